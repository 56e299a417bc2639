use nlqc_core::instprotocols::{
    ebits_measurement, ebits_unitary, effective_channel, effective_povm, povm_choi_distance, targets, InstConfig,
    MeasurementSimulator, StepOrder, Target, UnitarySimulator,
};
use nlqc_core::linalg::ComplexMatrix;
use nlqc_core::qcore::{apply_channel, ent_fidelity, Povm, PureState, QuantumChannel};
use nlqc_core::random::haar_state;
use nlqc_core::rng::RngStream;
use serde_json::json;

use crate::{usage, Check, Cli, CliError, InstArgs, InstMode, OrderArg, Report, Row};

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("--target file {path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("--target file {path:?}: {e}")))
}

fn measurement_target(name: &str, n: usize) -> Result<Povm, CliError> {
    match name {
        "bell" => Ok(targets::bell_povm(n)),
        "comp" => Ok(targets::comp_povm(n)),
        _ => match name.strip_prefix("file:") {
            Some(path) => Ok(Povm::with_index_labels(read_json::<Vec<ComplexMatrix>>(path)?)?),
            None => Err(usage(format!("--target {name:?} is not a measurement target (bell, comp, file:PATH)"))),
        },
    }
}

fn unitary_target(name: &str, n: usize) -> Result<ComplexMatrix, CliError> {
    match name {
        "cnot" => Ok(targets::cnot(n)),
        "swap" => Ok(targets::swap(n)),
        "identity" => Ok(ComplexMatrix::identity(1 << (2 * n))),
        _ => match name.strip_prefix("file:") {
            Some(path) => read_json(path),
            None => Err(usage(format!("--target {name:?} is not a unitary target (cnot, swap, identity, file:PATH)"))),
        },
    }
}

fn input_state(text: &str, n: usize, rng: &RngStream) -> Result<PureState, CliError> {
    let dims = vec![2; 2 * n];
    if text == "haar" {
        return Ok(haar_state(dims, &mut rng.split_named("state", 0)));
    }
    let k = text
        .strip_prefix("basis:")
        .and_then(|k| k.parse::<usize>().ok())
        .ok_or_else(|| usage(format!("--state {text:?} must be haar or basis:K")))?;
    PureState::basis(dims, k).map_err(|e| usage(format!("--state {text:?}: {e}")))
}

pub(super) fn run(cli: &Cli, args: &InstArgs, report: &mut Report) -> Result<(), CliError> {
    let n = args.n;
    if n == 0 || n > 4 {
        return Err(usage(format!("--n must lie in 1..=4, got {n}")));
    }
    if args.ports == 0 {
        return Err(usage("--N must be at least 1"));
    }
    if args.trials < 2 {
        return Err(usage("--trials must be at least 2"));
    }
    let rng = RngStream::seeded(cli.seed);
    let psi = input_state(&args.state, n, &rng)?;
    let trials_rng = rng.split_named("trials", 0);
    let t = args.trials as f64;
    match args.mode {
        InstMode::Measure => {
            let target = measurement_target(args.target.as_deref().unwrap_or("bell"), n)?;
            let cfg = InstConfig::new(n, args.ports, Target::Measurement(target.clone()), cli.seed)?
                .with_max_dim(cli.max_dim);
            let order = match args.order {
                OrderArg::Protocol => StepOrder::Protocol,
                OrderArg::AliceFirst => StepOrder::AliceFirst,
                OrderArg::BobFirst => StepOrder::BobFirst,
            };
            let sim = MeasurementSimulator::new(&cfg, &psi, order)?;
            let runs = sim.run_many(args.trials, &trials_rng);
            let mut counts = vec![0usize; target.len()];
            for r in &runs {
                counts[r.charlie_output.expect("measurement run")] += 1;
            }
            let m = effective_povm(&cfg)?;
            let probs = m.probabilities(&psi.density())?;
            for (k, (&c, &p)) in counts.iter().zip(&probs).enumerate() {
                let f = c as f64 / t;
                let sigma = (p * (1.0 - p) / t).sqrt();
                report.push(
                    Row::new(
                        "outcome",
                        json!({ "label": target.labels()[k], "count": c, "frequency": f, "probability": p }),
                    )
                    .check(Check::le(
                        "frequency_deviation",
                        (f - p).abs(),
                        3.0 * sigma + 1.0 / t,
                        0.0,
                    )),
                );
            }
            let ebits = runs[0].ebits_consumed;
            report.push(
                Row::new(
                    "summary",
                    json!({
                        "ebits": ebits,
                        "choi_distance_to_target": povm_choi_distance(&m, &target)?,
                        "effective_completeness_deviation": m.completeness_deviation(),
                    }),
                )
                .check(Check::eq("ebits", ebits as f64, ebits_measurement(n, args.ports) as f64, 0.0)),
            );
        }
        InstMode::Unitary => {
            let u = unitary_target(args.target.as_deref().unwrap_or("cnot"), n)?;
            let cfg = InstConfig::new(n, args.ports, Target::Unitary(u.clone()), cli.seed)?.with_max_dim(cli.max_dim);
            let sim = UnitarySimulator::new(&cfg, &psi)?;
            let runs = sim.run_many(args.trials, &trials_rng)?;
            let fs: Vec<f64> = runs.iter().map(|r| r.fidelity.expect("unitary run")).collect();
            let mean = fs.iter().sum::<f64>() / t;
            let stderr = (fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt();
            let e = effective_channel(&cfg)?;
            let want = apply_channel(&e, &psi.density())?.expectation(psi.evolve(&u)?.amplitudes());
            let ent = ent_fidelity(&QuantumChannel::unitary(&u.adjoint())?.compose(&e)?)?;
            let ebits = runs[0].ebits_consumed;
            report.push(
                Row::new(
                    "fidelity",
                    json!({
                        "mean": mean,
                        "stderr": stderr,
                        "predicted": want,
                        "entanglement_fidelity": ent,
                        "trace_preservation_deviation": e.trace_preservation_deviation(),
                        "ebits": ebits,
                    }),
                )
                .check(Check::le("fidelity_deviation", (mean - want).abs(), 3.0 * stderr + 1e-12, 0.0))
                .check(Check::eq("ebits", ebits as f64, ebits_unitary(n, args.ports) as f64, 0.0)),
            );
        }
    }
    Ok(())
}
