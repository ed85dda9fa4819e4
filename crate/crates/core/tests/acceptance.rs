//! Acceptance suite: one line per criterion, nonzero exit if a gating
//! criterion fails. Runs without the libtest harness so the summary is
//! always printed.
#![allow(clippy::vec_init_then_push)]

use std::process::ExitCode;

use hubbard_lax::aux_space::{AuxSpace, AuxVertex, Sign::{Minus, Plus}};
use hubbard_lax::commute::{check_commutativity, sample_pairs, CommuteOptions};
use hubbard_lax::lax::{LaxBuilder, LaxFamily, LaxParams, XkBlock};
use hubbard_lax::lindblad::{compare_states, fixed_point_oracle, LindbladSpec};
use hubbard_lax::linalg::{DenseOperator, C64, ONE};
use hubbard_lax::ness::{
    boundary_reports, boundary_with_lambda_factor, build_ness, check_boundary_conditions, cutoff_difference,
    exact_cutoff, map_driving_to_params, DoubleLax, DrivingConfig, NessDiagnostics,
};
use hubbard_lax::observables::{current_series, profile_and_currents, scaling_fit, TransferEvaluator};
use hubbard_lax::sampling::{rng, sample_many, sample_params, DEFAULT_SEED};
use hubbard_lax::verify::{check_family, verify_params, CheckOptions, ResidualReport, DEFAULT_TOL};
use hubbard_lax::Result;

const DETECT: f64 = 1e-4;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn drive(gl: f64, gr: f64, ml: f64, mr: f64, u: f64, n: usize) -> DrivingConfig {
    DrivingConfig { gamma_l: gl, gamma_r: gr, mu_l: ml, mu_r: mr, u, n_sites: n }
}

/// Driving configurations used across the steady-state criteria.
fn configs(n: usize) -> Vec<DrivingConfig> {
    vec![
        drive(1.0, 0.5, 0.0, 0.0, 1.0, n),
        drive(0.7, 1.3, 0.4, -0.6, 2.0, n),
        drive(1.2, 0.3, -0.5, 0.2, -0.5, n),
        drive(0.9, 0.9, 0.3, 0.3, 0.0, n),
    ]
}

fn worst(reports: &[ResidualReport]) -> f64 {
    reports.iter().map(ResidualReport::relative).fold(0.0, f64::max)
}

fn lemma_identities() -> Result<Outcome> {
    let samples = sample_many(DEFAULT_SEED, 5);
    let mut all = Vec::new();
    for k in [3, 4, 5] {
        for p in &samples {
            all.extend(verify_params(*p, k, DEFAULT_TOL)?.into_iter().filter(|r| r.identity_name != "gLOD"));
        }
    }
    let ok = all.iter().all(|r| r.passed);
    Ok(outcome(ok, format!("{} reports, worst relative residual {:.2e}", all.len(), worst(&all))))
}

fn glod() -> Result<Outcome> {
    let mut params = sample_many(DEFAULT_SEED, 5);
    let base = params[0];
    params.push(LaxParams { lambda: C64::new(0.0, 0.0), ..base });
    params.push(LaxParams { u: 0.0, ..base });
    params.push(LaxParams { lambda: C64::new(0.0, 0.0), u: 0.0, ..base });
    let mut all = Vec::new();
    for k in [3, 4, 5] {
        for p in &params {
            all.extend(verify_params(*p, k, DEFAULT_TOL)?.into_iter().filter(|r| r.identity_name == "gLOD"));
        }
    }
    let ok = all.iter().all(|r| r.passed);
    Ok(outcome(ok, format!("{} points incl. lambda=0 and u=0, worst {:.2e}", all.len(), worst(&all))))
}

fn xk_structure() -> Result<Outcome> {
    let mut worst_det = 0.0f64;
    let mut worst_rec = 0.0f64;
    let mut initial_exact = true;
    for p in sample_many(DEFAULT_SEED + 1, 5) {
        let w = p.omega;
        let l2 = p.lambda * p.lambda;
        let b0 = XkBlock::new(&p, 0);
        initial_exact &= b0.entry(Plus, Plus) == ONE && b0.entry(Minus, Minus) == -w * w;
        for k in 0..=20 {
            let b = XkBlock::new(&p, k);
            worst_det = worst_det.max((b.det() + w * w).norm() / (w * w).norm());
            if k < 20 {
                let c = XkBlock::new(&p, k + 1);
                let du = p.u * w;
                let r1 = (c.entry(Minus, Minus) - b.entry(Minus, Minus) + du).norm();
                let r2 = (c.entry(Plus, Plus) - b.entry(Plus, Plus) + du * (ONE - l2)).norm();
                worst_rec = worst_rec.max(r1.max(r2) / (1.0 + b.entry(Plus, Plus).norm().max(b.entry(Minus, Minus).norm())));
            }
        }
    }
    let ok = initial_exact && worst_det <= 1e-12 && worst_rec <= 1e-12;
    Ok(outcome(
        ok,
        format!("k=0..20, det {worst_det:.2e}, recurrences {worst_rec:.2e}, initial exact {initial_exact}"),
    ))
}

fn oracle_equivalence(diag: &mut Vec<NessDiagnostics>) -> Result<Outcome> {
    let mut worst_dist = 0.0f64;
    let mut count = 0;
    for n in [2, 3] {
        for cfg in configs(n) {
            let ness = build_ness(&cfg, None)?;
            let oracle = fixed_point_oracle(&LindbladSpec::new(&cfg)?)?;
            let cmp = compare_states(&ness.rho, &oracle.rho, oracle.null_dim);
            worst_dist = worst_dist.max(cmp.frobenius_distance);
            diag.push(ness.diagnostics);
            count += 1;
        }
    }
    Ok(outcome(
        worst_dist <= 1e-9,
        format!("{count} configs at n=2,3, max Frobenius distance {worst_dist:.2e}"),
    ))
}

fn fixed_point_residual(diag: &mut Vec<NessDiagnostics>) -> Result<Outcome> {
    let mut worst_res = 0.0f64;
    for n in [4, 5] {
        for cfg in configs(n) {
            let ness = build_ness(&cfg, None)?;
            worst_res = worst_res.max(ness.diagnostics.lindblad_residual.unwrap_or(f64::INFINITY));
            diag.push(ness.diagnostics);
        }
    }
    Ok(outcome(worst_res <= 1e-9, format!("n=4,5, max ||L rho|| / ||rho|| {worst_res:.2e}")))
}

fn boundary_equations() -> Result<Outcome> {
    let mut exact = 0.0f64;
    let mut probe = f64::INFINITY;
    for cfg in configs(3) {
        let k = exact_cutoff(cfg.n_sites) + 2;
        let (l, r) = boundary_reports(&cfg, k)?;
        exact = exact.max(l.relative()).max(r.relative());
        let (pl, pr) = boundary_with_lambda_factor(&cfg, k, 1.05, DEFAULT_TOL)?;
        probe = probe.min(pl.relative().max(pr.relative()));
    }
    Ok(outcome(
        exact <= DEFAULT_TOL && probe > DETECT,
        format!("exact map worst {exact:.2e}, weakest 5% lambda probe {probe:.2e}"),
    ))
}

fn rho_sanity(diag: &[NessDiagnostics]) -> Outcome {
    let herm = diag.iter().map(|d| d.hermiticity).fold(0.0, f64::max);
    let eig = diag.iter().map(|d| d.positivity_min_eig).fold(f64::INFINITY, f64::min);
    let tr = diag.iter().map(|d| d.trace_error).fold(0.0, f64::max);
    outcome(
        herm <= 1e-10 && eig >= -1e-10 && tr <= 1e-12,
        format!("{} states, hermiticity {herm:.2e}, min eig {eig:.2e}, trace {tr:.2e}", diag.len()),
    )
}

fn transport() -> Result<Outcome> {
    let mut spread = 0.0f64;
    for n in 2..=6 {
        for cfg in configs(n) {
            let obs = if n <= 5 {
                profile_and_currents(&build_ness(&cfg, None)?)?
            } else {
                TransferEvaluator::new(&cfg, None)?.observables()?
            };
            let (s, t) = obs.current_spread();
            spread = spread.max(s).max(t);
        }
    }
    let base = drive(1.0, 1.0, 0.0, 0.0, 1.0, 2);
    let series = current_series(&base, &[4, 5, 6, 7, 8])?;
    let fit = scaling_fit(&series.iter().map(|&(n, s, _)| (n, s)).collect::<Vec<_>>())?;
    let in_window = (-2.8..=-1.2).contains(&fit.exponent);
    Ok(outcome(
        spread <= 1e-9 && in_window,
        format!(
            "uniformity {spread:.2e} (n=2..6){}; exponent {:.3} over n=4..8, r^2 {:.3}, window [-2.8, -1.2]{}",
            if spread <= 1e-9 { " ok" } else { " FAIL" },
            fit.exponent,
            fit.r_squared,
            if in_window { " ok" } else { " FAIL" }
        ),
    ))
}

fn commutativity() -> Result<Outcome> {
    let pairs = sample_pairs(DEFAULT_SEED, 20);
    let mut worst_res = 0.0f64;
    let mut total = 0;
    for n in 2..=4 {
        for u in [0.5, 1.0, 2.0] {
            for r in check_commutativity(n, u, &pairs, &CommuteOptions::default())? {
                worst_res = worst_res.max(r.residual);
                total += 1;
            }
        }
    }
    Ok(outcome(worst_res <= DEFAULT_TOL, format!("{total} pairs, n=2..4, worst {worst_res:.2e}")))
}

fn truncation_exactness() -> Result<Outcome> {
    let mut params: Vec<LaxParams> = sample_many(DEFAULT_SEED + 2, 2);
    params.push(drive(0.7, 1.3, 0.4, -0.6, 2.0, 2).lax_params()?);
    let mut worst_diff = 0.0f64;
    for n in 2..=8 {
        let k = exact_cutoff(n);
        for p in &params {
            worst_diff = worst_diff.max(cutoff_difference(*p, n, k, k + 1, DEFAULT_SEED)?);
        }
    }
    Ok(outcome(worst_diff <= 1e-13, format!("n=2..8, max relative difference {worst_diff:.2e}")))
}

fn mutation_sensitivity() -> Result<Outcome> {
    let mut r = rng(DEFAULT_SEED + 3);
    let p = sample_params(&mut r);
    let k = 5;
    let opts = CheckOptions::new(k - 2, DEFAULT_TOL);
    let detected = |f: &LaxFamily| -> Result<f64> { Ok(worst(&check_family(f, &opts)?)) };
    let mut scores = Vec::new();

    let mut f = LaxFamily::new(p, k)?;
    let v = f.s[0].get(0, 1);
    f.s[0].set(0, 1, v * 1.01)?;
    f.assemble()?;
    scores.push(("S+ entry", detected(&f)?));

    let space = AuxSpace::new(k)?;
    let mut g = space.spin_flip();
    let (a, b) = (5, 6);
    g.set(a, b, C64::new(0.0, 0.0))?;
    g.set(b, a, C64::new(0.0, 0.0))?;
    g.set(a, a, ONE)?;
    g.set(b, b, ONE)?;
    let f = LaxBuilder::new(p, k).flip(g).build()?;
    scores.push(("T via broken G", detected(&f)?));

    let mut f = LaxFamily::new(p, k)?;
    let at = |label: &str| AuxVertex::parse(label).and_then(|v| f.space.index(v)).expect("vertex within cutoff");
    let (i, j) = (at("1-"), at("1+"));
    let v = f.x.get(i, j);
    f.x.set(i, j, v * 1.01)?;
    f.assemble()?;
    scores.push(("X_1 entry", detected(&f)?));

    let mut f = LaxFamily::new(p, k)?;
    f.y = f.y.scale(C64::new(1.01, 0.0));
    f.assemble()?;
    scores.push(("Y scale", detected(&f)?));

    let cfg = drive(1.0, 0.5, 0.3, -0.2, 1.0, 3);
    let eta = map_driving_to_params(&cfg)?.eta * 1.1;
    let lp = cfg.lax_params()?;
    let kk = exact_cutoff(3) + 2;
    let double = DoubleLax::from_families(LaxFamily::new(lp, kk)?, LaxFamily::new(lp.conj(), kk)?, eta)?;
    let (l, rr) = check_boundary_conditions(&double, &cfg, DEFAULT_TOL)?;
    let rmat = double.contract(3)?.to_dense();
    let tr = rmat.trace();
    let rho: DenseOperator = rmat.scale(ONE / tr);
    let fixed = LindbladSpec::new(&cfg)?.relative_residual(&rho)?;
    scores.push(("M exponent x1.1", l.relative().max(rr.relative()).max(fixed)));

    let (pl, pr) = boundary_with_lambda_factor(&cfg, kk, 1.05, DEFAULT_TOL)?;
    scores.push(("lambda in driving map x1.05", pl.relative().max(pr.relative())));

    let ok = scores.iter().all(|(_, s)| *s > DETECT);
    let detail = scores
        .iter()
        .map(|(name, s)| format!("{name} {s:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(outcome(ok, detail))
}

fn main() -> ExitCode {
    let mut diag = Vec::new();
    let mut rows: Vec<(usize, &str, bool, Result<Outcome>)> = Vec::new();
    rows.push((1, "lemma identities", true, lemma_identities()));
    rows.push((2, "gLOD condition", true, glod()));
    rows.push((3, "X_k structure", true, xk_structure()));
    rows.push((4, "oracle equivalence", true, oracle_equivalence(&mut diag)));
    rows.push((5, "fixed-point residual", true, fixed_point_residual(&mut diag)));
    rows.push((6, "boundary equations", true, boundary_equations()));
    rows.push((7, "density-matrix sanity", true, Ok(rho_sanity(&diag))));
    rows.push((8, "transport", true, transport()));
    rows.push((9, "commutativity (conjecture tier)", false, commutativity()));
    rows.push((10, "truncation exactness", true, truncation_exactness()));
    rows.push((11, "mutation sensitivity", true, mutation_sensitivity()));

    let mut failed = 0;
    for (id, name, gating, res) in rows {
        let (passed, detail) = match res {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = match (passed, gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (informative)",
        };
        println!("criterion {id:>2} {tag:<4} {name}: {detail}");
        if !passed && gating {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
