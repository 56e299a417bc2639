use nlqc_core::portbased::{
    eta_family_with_limit, operator_bound_check, pbt_report_with_limit, pgm_build, pgm_generic_bound, pgm_success,
};
use nlqc_core::random::{random_density, random_psd};
use nlqc_core::rng::RngStream;
use serde_json::json;

use crate::grid::{default_grid, parse_grid};
use crate::{usage, Check, Cli, CliError, PbtArgs, PgmArgs, Report, Row};

const TOL: f64 = 1e-9;

fn cells(d: Option<usize>, ports: Option<usize>, grid: &[String]) -> Result<Vec<(usize, usize)>, CliError> {
    let mut out = Vec::new();
    for text in grid {
        out.extend(parse_grid(text).map_err(|e| usage(format!("--grid {text:?}: {e}")))?);
    }
    match (d, ports) {
        (Some(d), Some(n)) => out.push((d, n)),
        (Some(d), None) => out.extend((1..=4).map(|n| (d, n))),
        (None, Some(_)) => return Err(usage("--N needs --d")),
        (None, None) if out.is_empty() => out = default_grid(),
        (None, None) => {}
    }
    for &(d, n) in &out {
        if d < 2 {
            return Err(usage(format!("--d must be at least 2, got {d}")));
        }
        if n < 1 {
            return Err(usage(format!("--N must be at least 1, got {n}")));
        }
    }
    Ok(out)
}

pub(super) fn run_pbt(cli: &Cli, args: &PbtArgs, report: &mut Report) -> Result<(), CliError> {
    let mut prev: Option<(usize, f64)> = None;
    for (d, n) in cells(args.d, args.ports, &args.grid)? {
        let r = pbt_report_with_limit(d, n, cli.max_dim)?;
        // the sqrt(N) diamond bound says nothing above the trivial value 2
        let applicable = r.corollary1_bound <= 2.0;
        let mut data = serde_json::to_value(&r).expect("serializable");
        data["diamond_bound_applicable"] = json!(applicable);
        data["fidelity_success_residual"] = json!(r.equivalence_residual());
        let mut row = Row { kind: "cell".into(), data, checks: Vec::new() }
            .check(Check::ge("fidelity_lower_bound", r.fidelity, r.thm1_bound, TOL))
            .check(Check::eq("fidelity_success_identity", r.equivalence_residual(), 0.0, TOL))
            .check(Check::le("choi_distance_vs_fidelity", r.choi_halfdist, r.choi_fid_bound, TOL))
            .check(Check::ge("success_vs_generic_bound", r.p_succ, r.generic_bound, TOL));
        if applicable {
            row = row.check(Check::le("diamond_vs_sqrt_n_bound", r.diamond_upper, r.corollary1_bound, TOL));
        }
        if let Some((_, pf)) = prev.filter(|p| p.0 == d) {
            row = row.check(Check::ge("fidelity_nondecreasing", r.fidelity, pf, 1e-12));
        }
        prev = Some((d, r.fidelity));
        report.push(row);
    }
    Ok(())
}

pub(super) fn run_pgm(cli: &Cli, args: &PgmArgs, report: &mut Report) -> Result<(), CliError> {
    for (d, n) in cells(args.d, args.ports, &args.grid)? {
        let fam = eta_family_with_limit(d, n, cli.max_dim)?;
        let (self_target, cross_target) = ((d as f64).powi(1 - n as i32), (d as f64).powi(-(n as i32) - 1));
        let mut self_dev: f64 = 0.0;
        let mut cross_dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let o = fam.overlap(i, j);
                if i == j {
                    self_dev = self_dev.max((o - self_target).abs());
                } else {
                    cross_dev = cross_dev.max((o - cross_target).abs());
                }
            }
        }
        let mut row = Row::new("overlaps", json!({ "d": d, "N": n, "self": self_target, "cross": cross_target }))
            .check(Check::eq("self_overlap_deviation", self_dev, 0.0, TOL));
        if n > 1 {
            row = row.check(Check::eq("cross_overlap_deviation", cross_dev, 0.0, TOL));
        }
        report.push(row);
        let pgm = fam.pgm()?;
        let p = fam.success_probability(&pgm)?;
        let bound = fam.generic_bound()?;
        report.push(
            Row::new("port_family", json!({ "d": d, "N": n, "p_succ": p, "generic_bound": bound })).check(Check::ge(
                "success_vs_generic_bound",
                p,
                bound,
                TOL,
            )),
        );
    }
    let rng = RngStream::seeded(cli.seed);
    for k in 0..args.pairs {
        let mut r = rng.split_named("pairs", k as u64);
        let d = 2 + r.below(5);
        let (rx, ry) = (1 + r.below(d), 1 + r.below(d));
        let x = random_psd(d, rx, &mut r);
        let y = random_psd(d, ry, &mut r);
        let c = operator_bound_check(&x, &y)?;
        report.push(
            Row::new("operator_pair", json!({ "d": d, "rank_x": c.rank_x, "rank_y": ry, "check": c }))
                .check(Check::ge("operator_inequality", c.lhs, c.rhs, TOL)),
        );
    }
    for k in 0..args.ensembles {
        let mut r = rng.split_named("ensembles", k as u64);
        let d = 2 + r.below(4);
        let m = 2 + r.below(5);
        let states: Vec<_> = (0..m)
            .map(|_| {
                let rank = 1 + r.below(d);
                random_density(d, rank, &mut r)
            })
            .collect();
        let povm = pgm_build(&states)?;
        let p = pgm_success(&states, &povm)?;
        let bound = pgm_generic_bound(&states)?;
        report.push(
            Row::new("ensemble", json!({ "d": d, "states": m, "p_succ": p, "generic_bound": bound })).check(Check::ge(
                "success_vs_generic_bound",
                p,
                bound,
                TOL,
            )),
        );
    }
    Ok(())
}
