use anyhow::Context;
use hubbard_lax::commute::{check_commutativity, sample_pairs, CommutatorReport, CommuteOptions};
use hubbard_lax::io::write_rho;
use hubbard_lax::lax::LaxParams;
use hubbard_lax::lindblad::{compare_states, fixed_point_oracle, LindbladSpec, OracleComparison, MAX_ORACLE_SITES};
use hubbard_lax::ness::{
    build_double_lax, check_boundary_conditions, build_ness, check_telescoping, exact_cutoff, DrivingConfig, DrivingParams,
    NessDiagnostics, NessResult,
};
use hubbard_lax::observables::{cosine_fit, scaling_fit, CosineFit, ObservableSet, ScalingFit, TransferEvaluator};
use hubbard_lax::sampling::{rng, sample_params};
use hubbard_lax::verify::{verify_params, ResidualReport};
use hubbard_lax::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{CommuteArgs, NessArgs, ObserveArgs, OracleArgs, SweepArgs, VerifyArgs};
use crate::config::{driving, settings, FileConfig, Settings, DEFAULT_N};
use crate::output::{write_path, Envelope, Sink, SCHEMA_VERSION};

/// Thresholds for the density-matrix checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
pub const FIXED_POINT_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-9;
pub const UNIFORMITY_TOL: f64 = 1e-9;
/// Largest chain for which `ness` runs the contracted telescoping check.
const TELESCOPING_MAX_SITES: usize = 4;

fn envelope<P: Serialize, R: Serialize>(command: &'static str, parameters: P, passed: bool, result: R) -> Envelope<P, R> {
    Envelope { schema_version: SCHEMA_VERSION, command, tier: "required", parameters, passed, result }
}

#[derive(Serialize)]
struct ChainParameters {
    driving: DrivingConfig,
    cutoff: usize,
    tol: f64,
    seed: u64,
}

fn chain_parameters(cfg: DrivingConfig, s: &Settings) -> ChainParameters {
    ChainParameters {
        driving: cfg,
        cutoff: s.cutoff.unwrap_or_else(|| exact_cutoff(cfg.n_sites)),
        tol: s.tol,
        seed: s.seed,
    }
}

pub fn verify(args: &VerifyArgs, file: &FileConfig, sink: &Sink) -> anyhow::Result<bool> {
    let s = settings(&args.common, file);
    let cutoff = s.cutoff.unwrap_or(4);
    let u = args.u.or(file.u);
    let mut r = rng(s.seed);
    let points: Vec<LaxParams> = (0..args.samples)
        .map(|_| {
            let p = sample_params(&mut r);
            LaxParams { u: u.unwrap_or(p.u), ..p }
        })
        .collect();
    let mut reports: Vec<ResidualReport> = Vec::new();
    for p in &points {
        reports.extend(verify_params(*p, cutoff, s.tol)?);
    }
    let passed = reports.iter().all(|r| r.passed);

    #[derive(Serialize)]
    struct Params {
        samples: usize,
        u: Option<f64>,
        cutoff: usize,
        tol: f64,
        seed: u64,
    }
    let params = Params { samples: args.samples, u, cutoff, tol: s.tol, seed: s.seed };
    sink.main_json("verify", &envelope("verify", params, passed, reports))?;
    Ok(passed)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    passed: bool,
}

fn check_max(name: &'static str, value: f64, threshold: f64) -> Check {
    Check { name, value, threshold, passed: value <= threshold }
}

fn state_checks(d: &NessDiagnostics) -> Vec<Check> {
    let mut checks = vec![
        check_max("hermiticity", d.hermiticity, HERMITICITY_TOL),
        Check {
            name: "positivity_min_eig",
            value: d.positivity_min_eig,
            threshold: -POSITIVITY_TOL,
            passed: d.positivity_min_eig >= -POSITIVITY_TOL,
        },
        check_max("trace_error", d.trace_error, TRACE_TOL),
    ];
    if let Some(res) = d.lindblad_residual {
        checks.push(check_max("lindblad_residual", res, FIXED_POINT_TOL));
    }
    checks
}

#[derive(Serialize)]
struct NessOutput {
    driving: DrivingParams,
    lax_params: LaxParams,
    cutoff: usize,
    diagnostics: NessDiagnostics,
    checks: Vec<Check>,
    boundary: Vec<ResidualReport>,
    telescoping: Option<ResidualReport>,
}

fn ness_output(ness: &NessResult, tol: f64) -> anyhow::Result<NessOutput> {
    let cfg = ness.config;
    let (l, r) = check_boundary_conditions(&build_double_lax(&cfg, ness.cutoff + 2)?, &cfg, tol)?;
    let boundary = vec![l, r];
    let telescoping = if cfg.n_sites <= TELESCOPING_MAX_SITES {
        Some(check_telescoping(&build_double_lax(&cfg, ness.cutoff)?, cfg.n_sites, tol)?)
    } else {
        None
    };
    Ok(NessOutput {
        driving: ness.driving,
        lax_params: ness.lax_params,
        cutoff: ness.cutoff,
        diagnostics: ness.diagnostics.clone(),
        checks: state_checks(&ness.diagnostics),
        boundary,
        telescoping,
    })
}

fn ness_passed(out: &NessOutput) -> bool {
    out.checks.iter().all(|c| c.passed)
        && out.boundary.iter().all(|r| r.passed)
        && out.telescoping.as_ref().is_none_or(|r| r.passed)
}

pub fn ness(args: &NessArgs, file: &FileConfig, sink: &Sink) -> anyhow::Result<bool> {
    let s = settings(&args.common, file);
    let cfg = driving(&args.driving, file);
    let ness = build_ness(&cfg, s.cutoff)?;
    if let Some(path) = &args.dump_rho {
        write_path(path, |f| write_rho(std::io::BufWriter::new(f), &ness.rho))?;
    }
    let out = ness_output(&ness, s.tol)?;
    let passed = ness_passed(&out);
    sink.main_json("ness", &envelope("ness", chain_parameters(cfg, &s), passed, out))?;
    Ok(passed)
}

pub fn oracle(args: &OracleArgs, file: &FileConfig, sink: &Sink) -> anyhow::Result<bool> {
    let s = settings(&args.common, file);
    let cfg = driving(&args.driving, file);
    cfg.validate()?;
    if cfg.n_sites > MAX_ORACLE_SITES {
        return Err(Error::TooLarge(format!(
            "the oracle materialises the superoperator and is limited to n <= {MAX_ORACLE_SITES}, got n = {}",
            cfg.n_sites
        ))
        .into());
    }
    let ness = build_ness(&cfg, s.cutoff)?;
    let oracle = fixed_point_oracle(&LindbladSpec::new(&cfg)?)?;
    let comparison = compare_states(&ness.rho, &oracle.rho, oracle.null_dim);

    #[derive(Serialize)]
    struct OracleOutput {
        comparison: OracleComparison,
        max_distance: f64,
        sigma_max: f64,
        blocks: usize,
        largest_block: usize,
    }
    let passed = comparison.frobenius_distance <= ORACLE_TOL;
    let out = OracleOutput {
        comparison,
        max_distance: ORACLE_TOL,
        sigma_max: oracle.sigma_max,
        blocks: oracle.block_sizes.len(),
        largest_block: oracle.block_sizes.iter().copied().max().unwrap_or(0),
    };
    sink.main_json("oracle", &envelope("oracle", chain_parameters(cfg, &s), passed, out))?;
    Ok(passed)
}

#[derive(Serialize)]
struct ScalingPoint {
    n: usize,
    current_sigma: f64,
    current_tau: f64,
}

#[derive(Serialize)]
struct ObserveOutput {
    observables: ObservableSet,
    occupations: Option<Vec<(f64, f64)>>,
    current_spread: (f64, f64),
    cosine_fit_sigma: Option<CosineFit>,
    scaling_series: Vec<ScalingPoint>,
    scaling_fit: Option<ScalingFit>,
    scaling_note: Option<String>,
    checks: Vec<Check>,
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().context("flushing CSV")
}

pub fn observe(args: &ObserveArgs, file: &FileConfig, sink: &Sink) -> anyhow::Result<bool> {
    let s = settings(&args.common, file);
    let cfg = driving(&args.driving, file);
    let obs = TransferEvaluator::new(&cfg, s.cutoff)?.observables()?;
    let spread = obs.current_spread();

    let mut series = Vec::new();
    for &n in &args.sizes {
        let c = DrivingConfig { n_sites: n, ..cfg };
        let (js, jt) = TransferEvaluator::new(&c, None)?.observables()?.current();
        series.push(ScalingPoint { n, current_sigma: js, current_tau: jt });
    }
    let (fit, note) = match scaling_fit(&series.iter().map(|p| (p.n, p.current_sigma)).collect::<Vec<_>>()) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let profile: Vec<f64> = obs.densities.iter().map(|d| d.0).collect();
    let checks = vec![
        check_max("current_uniformity", spread.0.max(spread.1), UNIFORMITY_TOL),
        check_max("imaginary_parts", obs.max_imag, HERMITICITY_TOL),
    ];
    let passed = checks.iter().all(|c| c.passed);

    if sink.has_dir() {
        let occ = obs.occupations();
        let mut header = vec!["site", "sz_sigma", "sz_tau"];
        if args.occupation {
            header.extend(["occupation_sigma", "occupation_tau"]);
        }
        let rows = obs.densities.iter().enumerate().map(|(j, d)| {
            let mut row = vec![(j + 1).to_string(), d.0.to_string(), d.1.to_string()];
            if args.occupation {
                row.extend([occ[j].0.to_string(), occ[j].1.to_string()]);
            }
            row
        });
        sink.file("profile.csv", &csv_bytes(&header, rows)?)?;
        let rows = obs
            .currents
            .iter()
            .enumerate()
            .map(|(j, c)| vec![format!("{}-{}", j + 1, j + 2), c.0.to_string(), c.1.to_string()]);
        sink.file("currents.csv", &csv_bytes(&["bond", "current_sigma", "current_tau"], rows)?)?;

        let mut dat = String::from("# site  <s^z>  <t^z>\n");
        for (j, d) in obs.densities.iter().enumerate() {
            dat.push_str(&format!("{} {:.16e} {:.16e}\n", j + 1, d.0, d.1));
        }
        sink.file("profile.dat", dat.as_bytes())?;
        let mut dat = String::from("# n  |J_sigma|  |J_tau|\n");
        for p in &series {
            dat.push_str(&format!("{} {:.16e} {:.16e}\n", p.n, p.current_sigma.abs(), p.current_tau.abs()));
        }
        sink.file("scaling.dat", dat.as_bytes())?;
        let mut scaling = serde_json::to_string_pretty(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "series": &series,
            "fit": fit,
            "note": &note,
        }))?;
        scaling.push('\n');
        sink.file("scaling.json", scaling.as_bytes())?;
    }

    let out = ObserveOutput {
        occupations: args.occupation.then(|| obs.occupations()),
        cosine_fit_sigma: cosine_fit(&profile).ok(),
        observables: obs,
        current_spread: spread,
        scaling_series: series,
        scaling_fit: fit,
        scaling_note: note,
        checks,
    };

    #[derive(Serialize)]
    struct Params {
        #[serde(flatten)]
        chain: ChainParameters,
        sizes: Vec<usize>,
    }
    let params = Params { chain: chain_parameters(cfg, &s), sizes: args.sizes.clone() };
    sink.main_json("observe", &envelope("observe", params, passed, out))?;
    Ok(passed)
}

/// Always reports success: the commutativity probe is informative only.
pub fn commute(args: &CommuteArgs, file: &FileConfig, sink: &Sink) -> anyhow::Result<bool> {
    let s = settings(&args.common, file);
    let n = args.n.or(file.n).unwrap_or(DEFAULT_N);
    let u = args.u.or(file.u).unwrap_or(1.0);
    let pairs = sample_pairs(s.seed, args.pairs);
    let opts = CommuteOptions { cutoff: s.cutoff, tol: s.tol, ..Default::default() };
    let reports: Vec<CommutatorReport> = check_commutativity(n, u, &pairs, &opts)?;
    let all = reports.iter().all(|r| r.passed);

    #[derive(Serialize)]
    struct Params {
        n: usize,
        u: f64,
        pairs: usize,
        cutoff: usize,
        tol: f64,
        seed: u64,
    }
    let params = Params {
        n,
        u,
        pairs: args.pairs,
        cutoff: s.cutoff.unwrap_or_else(|| exact_cutoff(n)),
        tol: s.tol,
        seed: s.seed,
    };
    let env = Envelope { tier: "conjecture", ..envelope("commute", params, all, reports) };
    sink.main_json("commute", &env)?;
    Ok(true)
}

#[derive(Serialize)]
struct SweepEntry {
    driving: DrivingConfig,
    passed: bool,
    result: Option<NessOutput>,
    error: Option<String>,
}

pub fn sweep(args: &SweepArgs, file: &FileConfig, sink: &Sink) -> anyhow::Result<bool> {
    let tol = args.tol.or(file.tol).unwrap_or(hubbard_lax::verify::DEFAULT_TOL);
    let mut grid = Vec::new();
    for &n in &args.n {
        for &u in &args.u {
            for &gamma_l in &args.gamma_l {
                for &gamma_r in &args.gamma_r {
                    for &mu_l in &args.mu_l {
                        for &mu_r in &args.mu_r {
                            grid.push(DrivingConfig { gamma_l, gamma_r, mu_l, mu_r, u, n_sites: n });
                        }
                    }
                }
            }
        }
    }
    grid.sort_by(|a, b| {
        let key = |c: &DrivingConfig| (c.n_sites, [c.u, c.gamma_l, c.gamma_r, c.mu_l, c.mu_r]);
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then_with(|| {
            ka.1.iter().zip(&kb.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    grid.dedup();

    let run = |cfg: &DrivingConfig| -> SweepEntry {
        let res = build_ness(cfg, None).map_err(anyhow::Error::from).and_then(|n| ness_output(&n, tol));
        match res {
            Ok(out) => SweepEntry { driving: *cfg, passed: ness_passed(&out), result: Some(out), error: None },
            Err(e) => SweepEntry { driving: *cfg, passed: false, result: None, error: Some(format!("{e:#}")) },
        }
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build()?;
    let entries: Vec<SweepEntry> = pool.install(|| grid.par_iter().map(run).collect());
    let passed = entries.iter().all(|e| e.passed);

    #[derive(Serialize)]
    struct Params {
        configurations: usize,
        tol: f64,
    }
    let params = Params { configurations: entries.len(), tol };
    sink.main_json("sweep", &envelope("sweep", params, passed, entries))?;
    Ok(passed)
}
