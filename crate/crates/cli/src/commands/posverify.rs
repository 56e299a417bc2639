use nlqc_core::mub::mub_for_dim;
use nlqc_core::posverify::{
    binary_entropy, composition_plan, reduction_bound, run_honest, run_honest_at, single_round_bound,
    soundness_limited, CommunicationClass, EntangledAttack, InterceptAttack, SpacetimeConfig, Verdict,
};
use nlqc_core::rng::RngStream;
use serde_json::json;

use crate::{usage, Check, Cli, CliError, PosMode, PosverifyArgs, Report, Row};

fn spacetime(args: &PosverifyArgs) -> Result<SpacetimeConfig, CliError> {
    let parts = args
        .positions
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("--positions {:?}: {e}", args.positions)))?;
    match parts[..] {
        [v0, r0, v1] => SpacetimeConfig::new(v0, r0, v1, args.delta).map_err(|e| usage(format!("--positions: {e}"))),
        _ => Err(usage(format!("--positions needs three values r_V0,r_0,r_V1, got {:?}", args.positions))),
    }
}

pub(super) fn run(cli: &Cli, args: &PosverifyArgs, report: &mut Report) -> Result<(), CliError> {
    let n = args.n;
    if n == 0 || n > 16 {
        return Err(usage(format!("--n must lie in 1..=16, got {n}")));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let cfg = spacetime(args)?;
    let rng = RngStream::seeded(cli.seed);
    match args.mode {
        PosMode::Honest => {
            let fam = mub_for_dim(1 << n)?;
            let base = rng.split_named("honest", 0);
            let mut accepted = 0usize;
            let mut sample = None;
            for k in 0..args.trials {
                let t = run_honest(n, &cfg, &fam, &mut base.split(k as u64))?;
                t.check_causality(CommunicationClass::Classical)?;
                accepted += t.accepted() as usize;
                sample.get_or_insert(t);
            }
            let rate = accepted as f64 / args.trials as f64;
            report.push(
                Row::new("honest", json!({ "n": n, "trials": args.trials, "accepted": accepted, "rate": rate }))
                    .check(Check::eq("honest_acceptance", rate, 1.0, 0.0)),
            );
            let moved = run_honest_at(n, &cfg, &fam, cfg.adversaries[0], &mut rng.split_named("displaced", 0))?;
            report.push(
                Row::new("displaced", json!({ "position": cfg.adversaries[0], "verdict": moved.verdict })).check(
                    Check::eq(
                        "displaced_rejected_on_timing",
                        (moved.verdict == Verdict::RejectTiming) as u8 as f64,
                        1.0,
                        0.0,
                    ),
                ),
            );
            if args.transcript {
                report.extra("transcript", sample.expect("at least one trial"));
            }
        }
        PosMode::Attack => {
            let attack = EntangledAttack::new(n, args.ports, &cfg)?;
            let est = attack.estimate(args.trials, &rng.split_named("trials", 0))?;
            let want = attack.predicted_acceptance()?;
            let sigma = (want * (1.0 - want) / args.trials as f64).sqrt();
            report.push(
                Row::new("entangled_attack", json!({ "n": n, "N": args.ports, "predicted": want, "estimate": est }))
                    .check(Check::le("acceptance_deviation", (est.estimate - want).abs(), 3.0 * sigma + 1e-12, 0.0))
                    .check(Check::eq("ebits", est.ebits_consumed as f64, attack.ebits() as f64, 0.0)),
            );
            if args.transcript {
                let t = attack.run(&mut rng.split_named("sample", 0));
                t.check_causality(CommunicationClass::Classical)?;
                report.extra("transcript", t);
            }
        }
        PosMode::Bounds => {
            if n > 1 {
                report.push(Row::new("limited_entanglement", soundness_limited(n, args.m)?));
            }
            let delta = single_round_bound();
            let dim = 2f64.powi(args.m as i32);
            if dim > usize::MAX as f64 {
                return Err(usage(format!("--m = {} is too large", args.m)));
            }
            let red = reduction_bound(delta, dim as usize, dim as usize)?;
            report.push(Row::new("reduction", json!({ "eps0": delta, "dim_a": dim, "dim_b": dim, "bound": red })));
            report.push(
                Row::new("single_round", json!({ "delta": delta, "h_inverse_half": 1.0 - delta })).check(Check::eq(
                    "entropy_at_inverse",
                    binary_entropy(1.0 - delta),
                    0.5,
                    1e-12,
                )),
            );
            let plan = composition_plan(args.k.unwrap_or(args.m), args.eps)?;
            report.push(Row::new("composition", plan).check(Check::le(
                "composed_soundness",
                plan.entangled_bound,
                args.eps,
                args.eps * 1e-12,
            )));
            let fam = mub_for_dim(1 << n)?;
            let (name, attack, bound) = if n == 1 {
                ("breidbart", InterceptAttack::breidbart(), delta)
            } else {
                ("fixed_basis_0", InterceptAttack::fixed_basis(&fam, 0)?, soundness_limited(n, 0)?.bound)
            };
            let est = attack.estimate(
                n,
                &cfg,
                &fam,
                CommunicationClass::Classical,
                args.trials,
                &rng.split_named("intercept", 0),
            )?;
            let mut row = Row::new("intercept", json!({ "attack": name, "bound": bound, "estimate": est }));
            if bound < 1.0 {
                row = row.check(Check::le("intercept_vs_bound", est.estimate, bound + 3.0 * est.stderr, 0.0));
            }
            report.push(row);
        }
    }
    Ok(())
}
