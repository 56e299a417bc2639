use super::state::{DensityOperator, PureState};
use crate::error::{shape, Error, Result};
use crate::linalg::{herm_eigenvalues, op_norm, ComplexMatrix, ToleranceConfig};
use crate::rng::RngStream;

/// Finite POVM with outcome labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl Povm {
    /// Validated POVM: every element PSD and the elements sum to the identity.
    pub fn new(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        Self::new_with(elements, labels, &ToleranceConfig::default())
    }

    pub fn new_with(elements: Vec<ComplexMatrix>, labels: Vec<String>, cfg: &ToleranceConfig) -> Result<Self> {
        let p = Self::from_elements_unchecked(elements, labels)?;
        p.validate(cfg)?;
        Ok(p)
    }

    /// Outcomes labelled `"0"`, `"1"`, ...
    pub fn with_index_labels(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (0..elements.len()).map(|k| k.to_string()).collect();
        Self::new(elements, labels)
    }

    /// Checks shapes only; for POVMs valid by construction.
    pub fn from_elements_unchecked(elements: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(shape("a POVM needs at least one element"));
        }
        if labels.len() != elements.len() {
            return Err(shape(format!("{} labels for {} elements", labels.len(), elements.len())));
        }
        let d = elements[0].rows();
        if elements.iter().any(|e| !e.is_square() || e.rows() != d) {
            return Err(shape("POVM elements must be square of equal size"));
        }
        Ok(Self { elements, labels })
    }

    /// Computational-basis measurement on `C^d`.
    pub fn computational(d: usize) -> Self {
        let elements = (0..d)
            .map(|k| {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(k, k)] = 1.0.into();
                e
            })
            .collect();
        Self { elements, labels: (0..d).map(|k| k.to_string()).collect() }
    }

    /// Single-outcome POVM `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self { elements: vec![ComplexMatrix::identity(d)], labels: vec!["0".into()] }
    }

    pub fn validate(&self, cfg: &ToleranceConfig) -> Result<()> {
        for (k, e) in self.elements.iter().enumerate() {
            if !e.is_hermitian(cfg.hermitian.max(1e-10)) {
                return Err(Error::Validation(format!("POVM element {k} is not Hermitian")));
            }
            let vals = herm_eigenvalues(e)?;
            let lmin = vals.last().copied().unwrap_or(0.0);
            if lmin < -cfg.psd * vals[0].abs().max(1.0) {
                return Err(Error::Validation(format!("POVM element {k} has eigenvalue {lmin:.3e}")));
            }
        }
        let dev = self.completeness_deviation();
        if dev > cfg.povm_sum {
            return Err(Error::Validation(format!("POVM elements deviate from identity by {dev:.3e}")));
        }
        Ok(())
    }

    /// `|| sum_k E_k - I ||_op`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim();
        let mut sum = ComplexMatrix::identity(d).scale_real(-1.0);
        for e in &self.elements {
            sum += &e.clone().clear_dims();
        }
        op_norm(&sum)
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn into_elements(self) -> Vec<ComplexMatrix> {
        self.elements
    }

    /// Born probabilities `Re tr(E_k rho)`; small negative values are clipped.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.probabilities_of(rho.matrix(), &ToleranceConfig::default())
    }

    pub(crate) fn probabilities_of(&self, rho: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<Vec<f64>> {
        if rho.rows() != self.dim() {
            return Err(shape(format!("POVM on dimension {} applied to dimension {}", self.dim(), rho.rows())));
        }
        self.elements
            .iter()
            .map(|e| {
                let p = e.trace_product(rho).re;
                if p < -cfg.negative_probability {
                    Err(Error::Numerical(format!("negative outcome probability {p:.3e}")))
                } else {
                    Ok(p.max(0.0))
                }
            })
            .collect()
    }
}

/// State left behind by a measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum PostState {
    Pure(PureState),
    Mixed(DensityOperator),
}

/// Outcome of one sampled measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: usize,
    pub label: String,
    pub probability: f64,
    pub post_state: Option<PostState>,
}

/// Samples an index from Born probabilities, treating entries below the
/// floor as impossible.
pub(crate) fn sample_index(probs: &[f64], floor: f64, rng: &mut RngStream) -> Result<usize> {
    let weights: Vec<f64> = probs.iter().map(|&p| if p < floor { 0.0 } else { p }).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("all outcome probabilities vanish".into()));
    }
    Ok(rng.weighted_index(&weights, total))
}

/// Samples outcome `k` with probability `tr(E_k rho)`. POVMs fix no
/// post-measurement state, so none is recorded.
pub fn sample_povm(p: &Povm, rho: &DensityOperator, rng: &mut RngStream) -> Result<MeasurementRecord> {
    let cfg = ToleranceConfig::default();
    let probs = p.probabilities_of(rho.matrix(), &cfg)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > cfg.povm_sum {
        return Err(Error::Numerical(format!("outcome probabilities sum to {total}")));
    }
    let k = sample_index(&probs, cfg.probability_floor, rng)?;
    Ok(MeasurementRecord { outcome: k, label: p.labels[k].clone(), probability: probs[k], post_state: None })
}
