//! Acceptance criteria 1 to 8, one pass/fail line each.

use std::process::Command;
use std::time::Instant;

use nlqc_cli::report::without_timing;
use nlqc_core::instprotocols::{
    effective_channel, effective_povm, povm_choi_distance, targets, InstConfig, MeasurementSimulator, StepOrder,
    Target, UnitarySimulator,
};
use nlqc_core::linalg::C64;
use nlqc_core::lowerbound::{
    attack_success, build_ensemble, diamond_gap, seesaw_best, theoretical_bound, AttackStrategy,
};
use nlqc_core::mub::{mub_for_dim, povm_from_mub};
use nlqc_core::portbased::{eta_family, operator_bound_check, pbt_report, pgm_build, pgm_generic_bound, pgm_success};
use nlqc_core::posverify::{
    binary_entropy, composition_plan, inverse_binary_entropy, reduction_bound, run_honest, single_round_bound,
    soundness_limited, CommunicationClass, EntangledAttack, SpacetimeConfig,
};
use nlqc_core::qcore::{apply_channel, ent_fidelity, PureState, QuantumChannel};
use nlqc_core::random::{haar_state, random_density, random_psd};
use nlqc_core::rng::RngStream;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid() -> Vec<(usize, usize)> {
    let mut cells: Vec<_> = (1..=10).map(|n| (2, n)).collect();
    for d in [3, 4] {
        cells.extend((1..=4).map(|n| (d, n)));
    }
    cells
}

/// Closed-form entanglement fidelity of qubit port-based teleportation with
/// the pretty good measurement:
/// `2^-(N+3) sum_k C(N,k) ((N-2k-1)/sqrt(k+1) + (N-2k+1)/sqrt(N-k+1))^2`.
fn qubit_fidelity(n: usize) -> f64 {
    let nf = n as f64;
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..=n {
        let kf = k as f64;
        let t = (nf - 2.0 * kf - 1.0) / (kf + 1.0).sqrt() + (nf - 2.0 * kf + 1.0) / (nf - kf + 1.0).sqrt();
        total += binom * t * t;
        binom = binom * (nf - kf) / (kf + 1.0);
    }
    total / 2f64.powi(n as i32 + 3)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst_slack = f64::INFINITY;
    for (d, n) in grid() {
        let r = pbt_report(d, n).map_err(|e| format!("d={d} N={n}: {e}"))?;
        let slack = r.fidelity - (1.0 - (d * d - 1) as f64 / n as f64);
        worst_slack = worst_slack.min(slack);
        ensure(slack >= -1e-9, || format!("d={d} N={n}: F={} below the bound", r.fidelity))?;
        let identity = r.fidelity - n as f64 / (d * d) as f64 * r.p_succ;
        ensure(identity.abs() <= 1e-9, || format!("d={d} N={n}: F - (N/d^2) p_succ = {identity:e}"))?;
        if d == 2 {
            let want = qubit_fidelity(n);
            ensure((r.fidelity - want).abs() <= 1e-9, || format!("N={n}: F={} vs closed form {want}", r.fidelity))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 120.0, || format!("grid took {secs:.1}s"))?;
    Ok(format!("18 cells, min slack {worst_slack:.3e}, {secs:.1}s"))
}

fn criterion_2() -> Outcome {
    let rng = RngStream::seeded(2);
    let mut worst = f64::INFINITY;
    for k in 0..200 {
        let mut r = rng.split_named("pairs", k);
        let d = 2 + r.below(5);
        let (rx, ry) = (1 + r.below(d), 1 + r.below(d));
        let x = random_psd(d, rx, &mut r);
        let y = random_psd(d, ry, &mut r);
        let c = operator_bound_check(&x, &y).map_err(|e| e.to_string())?;
        // independent rank: number of nonzero columns of the generator
        ensure(c.rank_x == rx, || format!("pair {k}: rank {} vs {rx}", c.rank_x))?;
        worst = worst.min(c.lhs - c.rhs);
        ensure(c.lhs - c.rhs >= -1e-9, || format!("pair {k}: {} < {}", c.lhs, c.rhs))?;
    }
    let mut ensembles = 0;
    for (d, n) in grid() {
        let fam = eta_family(d, n).map_err(|e| e.to_string())?;
        let pgm = fam.pgm().map_err(|e| e.to_string())?;
        let p = fam.success_probability(&pgm).map_err(|e| e.to_string())?;
        let b = fam.generic_bound().map_err(|e| e.to_string())?;
        ensure(b <= p + 1e-9, || format!("d={d} N={n}: bound {b} > p_succ {p}"))?;
        let (self_t, cross_t) = ((d as f64).powi(1 - n as i32), (d as f64).powi(-(n as i32) - 1));
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { self_t } else { cross_t };
                let got = fam.overlap(i, j);
                ensure((got - want).abs() <= 1e-9, || format!("d={d} N={n}: tr(eta^{i} eta^{j}) = {got} vs {want}"))?;
                if i == j && n <= 3 {
                    // dense recomputation of the overlap
                    let e = fam.eta(i);
                    let dense = e.matrix().trace_product(e.matrix()).re;
                    ensure((dense - want).abs() <= 1e-9, || format!("d={d} N={n}: dense overlap {dense}"))?;
                }
            }
        }
    }
    for k in 0..100 {
        let mut r = rng.split_named("ensembles", k);
        let d = 2 + r.below(4);
        let m = 2 + r.below(5);
        let states: Vec<_> = (0..m)
            .map(|_| {
                let rank = 1 + r.below(d);
                random_density(d, rank, &mut r)
            })
            .collect();
        let povm = pgm_build(&states).map_err(|e| e.to_string())?;
        let p = pgm_success(&states, &povm).map_err(|e| e.to_string())?;
        let b = pgm_generic_bound(&states).map_err(|e| e.to_string())?;
        ensure(b <= p + 1e-9, || format!("ensemble {k}: bound {b} > p_succ {p}"))?;
        ensembles += 1;
    }
    Ok(format!("200 pairs (min slack {worst:.3e}), 18 cells, {ensembles} ensembles"))
}

fn criterion_3() -> Outcome {
    let mut applicable = 0;
    for (d, n) in grid() {
        let r = pbt_report(d, n).map_err(|e| e.to_string())?;
        let ceiling = (1.0 - r.fidelity).max(0.0).sqrt();
        ensure(r.choi_halfdist <= ceiling + 1e-9, || format!("d={d} N={n}: {} > {ceiling}", r.choi_halfdist))?;
        let sqrt_bound = 4.0 * (d * d) as f64 / (n as f64).sqrt();
        if sqrt_bound <= 2.0 {
            applicable += 1;
            ensure(r.diamond_upper <= sqrt_bound + 1e-9, || {
                format!("d={d} N={n}: {} > {sqrt_bound}", r.diamond_upper)
            })?;
        }
    }
    Ok(format!("Choi chain on 18 cells; 4d^2/sqrt(N) below the trivial ceiling on {applicable} cells"))
}

fn criterion_4() -> Outcome {
    let trials = 100_000;
    let rng = RngStream::seeded(4);
    let psi = haar_state(vec![2, 2], &mut rng.split_named("state", 0));
    let bell = targets::bell_povm(1);
    let u = targets::cnot(1);
    let undo = QuantumChannel::unitary(&u.adjoint()).map_err(|e| e.to_string())?;
    let (mut prev_povm, mut prev_chan) = (f64::INFINITY, f64::INFINITY);
    let mut worst_z: f64 = 0.0;
    for ports in [1, 2, 4] {
        let cfg = InstConfig::new(1, ports, Target::Measurement(bell.clone()), 0).map_err(|e| e.to_string())?;
        let m = effective_povm(&cfg).map_err(|e| e.to_string())?;
        let probs = m.probabilities(&psi.density()).map_err(|e| e.to_string())?;
        let sim = MeasurementSimulator::new(&cfg, &psi, StepOrder::Protocol).map_err(|e| e.to_string())?;
        let mut counts = vec![0usize; bell.len()];
        for run in sim.run_many(trials, &rng.split_named("measure", ports as u64)) {
            counts[run.charlie_output.ok_or("no output")?] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let f = *c as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            worst_z = worst_z.max((f - p).abs() / sigma.max(1e-300));
            ensure((f - p).abs() <= 3.0 * sigma, || format!("N={ports}: frequency {f} vs {p}"))?;
        }
        let dist = povm_choi_distance(&m, &bell).map_err(|e| e.to_string())?;
        ensure(dist <= prev_povm + 1e-12, || format!("N={ports}: POVM distance {dist} > {prev_povm}"))?;
        prev_povm = dist;

        let cfg = InstConfig::new(1, ports, Target::Unitary(u.clone()), 0).map_err(|e| e.to_string())?;
        let e = effective_channel(&cfg).map_err(|e| e.to_string())?;
        let want = apply_channel(&e, &psi.density())
            .map_err(|e| e.to_string())?
            .expectation(psi.evolve(&u).map_err(|e| e.to_string())?.amplitudes());
        let sim = UnitarySimulator::new(&cfg, &psi).map_err(|e| e.to_string())?;
        let fs: Vec<f64> = sim
            .run_many(trials, &rng.split_named("unitary", ports as u64))
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| r.fidelity.unwrap_or(f64::NAN))
            .collect();
        let t = trials as f64;
        let mean = fs.iter().sum::<f64>() / t;
        let se = (fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt();
        worst_z = worst_z.max((mean - want).abs() / se.max(1e-300));
        ensure((mean - want).abs() <= 3.0 * se, || format!("N={ports}: mean fidelity {mean} ± {se} vs {want}"))?;
        let dist = 1.0 - ent_fidelity(&undo.compose(&e).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(dist <= prev_chan + 1e-12, || format!("N={ports}: channel infidelity {dist} > {prev_chan}"))?;
        prev_chan = dist;
    }
    Ok(format!("N in {{1,2,4}}, 1e5 trials each, max deviation {worst_z:.2} sigma"))
}

fn criterion_5() -> Outcome {
    for d in [2, 3, 4, 5, 7, 8] {
        let fam = mub_for_dim(d).map_err(|e| e.to_string())?;
        ensure(fam.len() == d + 1, || format!("d={d}: {} bases", fam.len()))?;
        for a in 0..fam.len() {
            for b in 0..fam.len() {
                for x in 0..d {
                    for y in 0..d {
                        let ov = fam
                            .vector(a, x)
                            .iter()
                            .zip(fam.vector(b, y))
                            .map(|(p, q)| p.conj() * q)
                            .sum::<C64>()
                            .norm_sqr();
                        let want = if a != b {
                            1.0 / d as f64
                        } else if x == y {
                            1.0
                        } else {
                            0.0
                        };
                        ensure((ov - want).abs() <= 1e-10, || format!("d={d}: |<e{a}_{x}|e{b}_{y}>|^2 = {ov}"))?;
                    }
                }
            }
        }
        let inst = build_ensemble(&fam, d + 1).map_err(|e| e.to_string())?;
        let m = povm_from_mub(&fam, d + 1).map_err(|e| e.to_string())?;
        for (x, rho) in inst.ensemble().iter().enumerate() {
            let p = m.povm.probabilities(rho).map_err(|e| e.to_string())?[x];
            ensure(p >= 1.0 - 1e-10, || format!("d={d}: x={x} identified with probability {p}"))?;
        }
    }
    Ok("d in {2,3,4,5,7,8}".into())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let fam = mub_for_dim(16).map_err(|e| e.to_string())?;
    let inst = build_ensemble(&fam, 17).map_err(|e| e.to_string())?;
    let bound = theoretical_bound(16, 1);
    ensure(bound.value == 0.5, || format!("bound {}", bound.value))?;
    let mut best: f64 = 0.0;
    let mut strategies = vec![AttackStrategy::constant_guess(&inst, 0)];
    for b in 0..17 {
        strategies.push(AttackStrategy::bob_measures_basis(&inst, b).map_err(|e| e.to_string())?);
    }
    for s in &strategies {
        let p = attack_success(&inst, s).map_err(|e| e.to_string())?.p_succ;
        best = best.max(p);
        ensure(p <= 0.5, || format!("fixed strategy reached {p}"))?;
    }
    let run = seesaw_best(&inst, 1, 1, 50, 10, &RngStream::seeded(6)).map_err(|e| e.to_string())?;
    let p = run.result.p_succ;
    best = best.max(p);
    ensure(p <= 0.5, || format!("see-saw reached {p}"))?;
    let o = povm_from_mub(&fam, 17).map_err(|e| e.to_string())?.povm;
    let gap = diamond_gap(&inst, &run.strategy, &o).map_err(|e| e.to_string())?;
    ensure((gap.gap - 2.0 * (1.0 - p)).abs() <= 1e-12, || format!("gap {} vs {}", gap.gap, 2.0 * (1.0 - p)))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 600.0, || format!("took {secs:.1}s"))?;
    Ok(format!("best success {best:.6} <= 0.5, {secs:.1}s"))
}

fn criterion_7() -> Outcome {
    let cfg = SpacetimeConfig::default();
    for n in 1..=6 {
        let fam = mub_for_dim(1 << n).map_err(|e| e.to_string())?;
        let base = RngStream::seeded(7).split(n as u64);
        for k in 0..1000 {
            let t = run_honest(n, &cfg, &fam, &mut base.split(k)).map_err(|e| e.to_string())?;
            t.check_causality(CommunicationClass::Classical).map_err(|e| e.to_string())?;
            ensure(t.accepted(), || format!("n={n} run {k}: {:?}", t.verdict))?;
        }
    }
    let trials = 10_000;
    for ports in [1, 2, 4] {
        let attack = EntangledAttack::new(1, ports, &cfg).map_err(|e| e.to_string())?;
        let est = attack.estimate(trials, &RngStream::seeded(70 + ports as u64)).map_err(|e| e.to_string())?;
        // prediction straight from the instantaneous-measurement POVM
        let fam = mub_for_dim(2).map_err(|e| e.to_string())?;
        let target = povm_from_mub(&fam, 2).map_err(|e| e.to_string())?.povm;
        let m = effective_povm(&InstConfig::new(1, ports, Target::Measurement(target), 0).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let mut want = 0.0;
        for a in 0..2 {
            for x in 0..2 {
                let mut amps = vec![C64::new(0.0, 0.0); 4];
                amps[2 * a..2 * a + 2].copy_from_slice(&fam.vector(a, x));
                let psi = PureState::new(amps, vec![2, 2]).map_err(|e| e.to_string())?;
                want += m.probabilities(&psi.density()).map_err(|e| e.to_string())?[x] / 4.0;
            }
        }
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        ensure((est.estimate - want).abs() <= 3.0 * sigma, || format!("N={ports}: {} vs {want}", est.estimate))?;
    }
    ensure(soundness_limited(4, 0).map_err(|e| e.to_string())?.bound == 0.5, || "n=4, m=0".into())?;
    let r = reduction_bound(0.01, 2, 2).map_err(|e| e.to_string())?.value;
    ensure((r - 0.04).abs() <= 1e-15, || format!("reduction {r}"))?;
    let h_inv = inverse_binary_entropy(0.5).map_err(|e| e.to_string())?;
    ensure((binary_entropy(h_inv) - 0.5).abs() <= 1e-12, || format!("h(h^-1(1/2)) = {}", binary_entropy(h_inv)))?;
    let delta = single_round_bound();
    ensure((delta - (1.0 - h_inv)).abs() <= 1e-15, || format!("delta {delta}"))?;
    for k in [0, 1, 10, 100] {
        for eps in [1e-3, 1e-6, 2f64.powi(-20)] {
            let plan = composition_plan(k, eps).map_err(|e| e.to_string())?;
            let direct = 4f64.powi(k as i32) * delta.powi(plan.rounds as i32);
            ensure(direct <= eps * (1.0 + 1e-9), || format!("k={k} eps={eps}: 4^k delta^L = {direct}"))?;
        }
    }
    Ok(format!("delta = {delta:.12}"))
}

fn nlqc(args: &[&str], threads: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nlqc"))
        .args(args)
        .env("NLQC_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} exited with {:?}", out.status.code()))?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    without_timing(&text).map_err(|e| e.to_string())?;
    // byte comparison of everything but the timing line
    Ok(text.lines().filter(|l| !l.trim_start().starts_with("\"wall_clock_s\"")).collect::<Vec<_>>().join("\n"))
}

fn criterion_8() -> Outcome {
    let runs: [&[&str]; 8] = [
        &["pbt", "--d", "2", "--N", "4", "--seed", "8"],
        &["pgm", "--d", "2", "--N", "2", "--pairs", "20", "--ensembles", "10", "--seed", "8"],
        &["inst", "--mode", "measure", "--N", "2", "--trials", "2000", "--seed", "8"],
        &["inst", "--mode", "unitary", "--N", "2", "--trials", "500", "--seed", "8"],
        &["mub", "--d", "4", "--check", "--export"],
        &["bound", "--d", "4", "--dimb", "2", "--restarts", "2", "--sweeps", "5", "--seed", "8"],
        &["posverify", "--mode", "attack", "--trials", "1000", "--transcript", "--seed", "8"],
        &["posverify", "--mode", "bounds", "--n", "4", "--m", "1", "--trials", "500", "--seed", "8"],
    ];
    for args in runs {
        let a = nlqc(args, "1")?;
        let b = nlqc(args, "1")?;
        let c = nlqc(args, "3")?;
        ensure(a == b && a == c, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} experiments identical across repeats and thread counts", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("port-based fidelity bound and success identity", criterion_1),
        ("PGM property suite", criterion_2),
        ("Choi distance chain", criterion_3),
        ("instantaneous protocol oracle equivalence", criterion_4),
        ("mutually unbiased bases", criterion_5),
        ("guessing-game ceiling at d=16", criterion_6),
        ("position verification", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: pass  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
