use nlqc_core::lowerbound::{attack_success, build_ensemble, diamond_gap, seesaw_best, AttackResult, AttackStrategy};
use nlqc_core::mub::{mub_for_dim, povm_from_mub};
use nlqc_core::rng::RngStream;
use serde_json::json;

use crate::{usage, BoundArgs, Check, Cli, CliError, Report, Row};

fn bounded(kind: &str, name: &str, r: &AttackResult) -> Row {
    let row = Row::new(kind, json!({ "strategy": name, "result": r }));
    if r.vacuous {
        row
    } else {
        row.check(Check::le("success_vs_entanglement_bound", r.p_succ, r.bound, 1e-9))
    }
}

pub(super) fn run(cli: &Cli, args: &BoundArgs, report: &mut Report) -> Result<(), CliError> {
    let fam = mub_for_dim(args.d)?;
    let bases = args.bases.unwrap_or(fam.len());
    let dima = args.dima.unwrap_or(args.dimb);
    if args.dimb == 0 || dima == 0 {
        return Err(usage("--dima and --dimb must be positive"));
    }
    if args.restarts == 0 || args.sweeps == 0 {
        return Err(usage("--restarts and --sweeps must be positive"));
    }
    let inst = build_ensemble(&fam, bases)?;
    let target = povm_from_mub(&fam, bases)?.povm;
    let fixed = [
        ("constant_guess", AttackStrategy::constant_guess(&inst, 0)),
        ("bob_measures_basis_0", AttackStrategy::bob_measures_basis(&inst, 0)?),
    ];
    for (name, s) in &fixed {
        report.push(bounded("fixed", name, &attack_success(&inst, s)?));
    }
    let run = seesaw_best(&inst, dima, args.dimb, args.sweeps, args.restarts, &RngStream::seeded(cli.seed))?;
    let gap = diamond_gap(&inst, &run.strategy, &target)?;
    let p = run.result.p_succ;
    report.push(bounded("seesaw", "best_of_restarts", &run.result).check(Check::eq(
        "diamond_gap_identity",
        gap.gap,
        2.0 * (1.0 - p),
        1e-12,
    )));
    report.extra("seesaw_history", &run.history);
    report.extra("diamond_gap", gap);
    Ok(())
}
