use nlqc_core::lowerbound::build_ensemble;
use nlqc_core::mub::{mub_for_dim, povm_from_mub};
use nlqc_core::Error;
use serde_json::json;

use crate::{Check, CliError, MubArgs, Report, Row};

/// Largest total entry count of the conditional POVM built by `--check`.
const IDENTIFY_ENTRIES: usize = 1 << 26;

pub(super) fn run(args: &MubArgs, report: &mut Report) -> Result<(), CliError> {
    let d = args.d;
    let fam = mub_for_dim(d)?;
    let (overlap, unitarity) = (fam.overlap_deviation(), fam.unitarity_deviation());
    let mut row = Row::new(
        "family",
        json!({ "d": d, "bases": fam.len(), "overlap_deviation": overlap, "unitarity_deviation": unitarity }),
    );
    if args.check {
        row = row.check(Check::le("overlap_deviation", overlap, 1e-10, 0.0)).check(Check::le(
            "unitarity_deviation",
            unitarity,
            1e-10,
            0.0,
        ));
        let count = fam.len();
        let side = count * d;
        if d * side * side > IDENTIFY_ENTRIES {
            return Err(Error::SizeLimit { dim: side, limit: ((IDENTIFY_ENTRIES / d) as f64).sqrt() as usize }.into());
        }
        let inst = build_ensemble(&fam, count)?;
        let m = povm_from_mub(&fam, count)?;
        let worst = inst
            .ensemble()
            .iter()
            .enumerate()
            .map(|(x, rho)| m.povm.probabilities(rho).map(|p| p[x]))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(1.0, f64::min);
        report.push(row);
        row = Row::new("identification", json!({ "d": d, "bases": count, "min_probability": worst })).check(Check::ge(
            "identification_probability",
            worst,
            1.0 - 1e-10,
            0.0,
        ));
    }
    report.push(row);
    if args.export {
        report.extra("bases", fam.bases());
    }
    Ok(())
}
