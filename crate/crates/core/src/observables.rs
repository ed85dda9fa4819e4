//! Densities, bond currents and finite-size fits in the steady state.
//!
//! The current through bond `(j, j+1)` follows from the continuity equation
//! `i[H, s^z_j] = J_{j-1,j} - J_{j,j+1}` and reads
//! `J^s_{j,j+1} = 4i (s+_j s-_{j+1} - s-_j s+_{j+1})`; positive values mean
//! particles flowing to the right (towards larger `j`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubbard::{species_local, PhysicalSpace, Species, MINUS, PLUS, Z};
use crate::linalg::{DenseOperator, SparseOperator, C64, I, ZERO};
use crate::mpo::transfer_chain;
use crate::ness::{build_double_lax, exact_cutoff, DoubleLax, DrivingConfig, NessResult};

/// `tr(rho obs)`.
pub fn expectation(rho: &DenseOperator, obs: &DenseOperator) -> Result<C64> {
    if rho.dim() != obs.dim() {
        return Err(Error::Linalg(crate::linalg::LinalgError::DimensionMismatch {
            op: "expectation",
            left: (rho.dim(), rho.dim()),
            right: (obs.dim(), obs.dim()),
        }));
    }
    Ok(rho.compose(obs)?.trace())
}

/// `tr(rho obs)` without densifying `obs`.
pub fn expectation_sparse(rho: &DenseOperator, obs: &SparseOperator) -> Result<C64> {
    if obs.shape() != (rho.dim(), rho.dim()) {
        return Err(Error::Linalg(crate::linalg::LinalgError::DimensionMismatch {
            op: "expectation",
            left: (rho.dim(), rho.dim()),
            right: obs.shape(),
        }));
    }
    Ok(obs.iter().map(|(i, j, v)| v * rho.get(j, i)).sum())
}

/// Two-site factors of the current, `(c, A_j, B_{j+1})` with
/// `J = sum c A_j B_{j+1}`.
fn current_terms(species: Species) -> [(C64, DenseOperator, DenseOperator); 2] {
    let p = species_local(species, PLUS);
    let m = species_local(species, MINUS);
    [(I * 4.0, p.clone(), m.clone()), (-I * 4.0, m, p)]
}

/// Current operator on bond `(j, j+1)`, sites counted from 1.
pub fn current_operator(space: &PhysicalSpace, j: usize, species: Species) -> Result<SparseOperator> {
    let n = space.n_sites();
    if j == 0 || j >= n {
        return Err(Error::SiteOutOfRange { site: j, n_sites: n });
    }
    let mut acc = SparseOperator::zeros(space.dim(), space.dim());
    for (c, a, b) in current_terms(species) {
        let term = space.embed_string(j, &[a, b])?.scale(c);
        acc = acc.try_add(&term)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub n_sites: usize,
    pub config: DrivingConfig,
    /// `(<s^z_j>, <t^z_j>)` for `j = 1..n`.
    pub densities: Vec<(f64, f64)>,
    /// `(J^s, J^t)` for bonds `(1,2) .. (n-1,n)`.
    pub currents: Vec<(f64, f64)>,
    /// Largest imaginary part discarded from any expectation value.
    pub max_imag: f64,
}

impl ObservableSet {
    /// Fermionic occupations `(<s^z> + 1) / 2`.
    pub fn occupations(&self) -> Vec<(f64, f64)> {
        self.densities
            .iter()
            .map(|&(s, t)| ((s + 1.0) / 2.0, (t + 1.0) / 2.0))
            .collect()
    }

    /// `max_j |J_{j,j+1} - J_{1,2}| / |J_{1,2}|` for each species.
    pub fn current_spread(&self) -> (f64, f64) {
        let Some(&(s0, t0)) = self.currents.first() else {
            return (0.0, 0.0);
        };
        let spread = |f: &dyn Fn(&(f64, f64)) -> f64, r: f64| {
            self.currents.iter().map(|c| (f(c) - r).abs()).fold(0.0, f64::max) / r.abs()
        };
        (spread(&|c| c.0, s0), spread(&|c| c.1, t0))
    }

    /// Current through the first bond, `(J^s, J^t)`.
    pub fn current(&self) -> (f64, f64) {
        self.currents.first().copied().unwrap_or((0.0, 0.0))
    }
}

fn real_part(z: C64, max_imag: &mut f64) -> f64 {
    *max_imag = max_imag.max(z.im.abs());
    z.re
}

/// Observables from a dense steady state.
pub fn profile_and_currents(ness: &NessResult) -> Result<ObservableSet> {
    let n = ness.config.n_sites;
    let space = PhysicalSpace::new(n)?;
    let mut max_imag = 0.0;
    let mut densities = Vec::with_capacity(n);
    for j in 1..=n {
        let s = expectation_sparse(&ness.rho, &space.site_operator(j, Species::Sigma, Z)?)?;
        let t = expectation_sparse(&ness.rho, &space.site_operator(j, Species::Tau, Z)?)?;
        densities.push((real_part(s, &mut max_imag), real_part(t, &mut max_imag)));
    }
    let mut currents = Vec::with_capacity(n - 1);
    for j in 1..n {
        let s = expectation_sparse(&ness.rho, &current_operator(&space, j, Species::Sigma)?)?;
        let t = expectation_sparse(&ness.rho, &current_operator(&space, j, Species::Tau)?)?;
        currents.push((real_part(s, &mut max_imag), real_part(t, &mut max_imag)));
    }
    Ok(ObservableSet {
        n_sites: n,
        config: ness.config,
        densities,
        currents,
        max_imag,
    })
}

/// Evaluates products of single-site observables on `tr R` without ever
/// forming the `4^n`-dimensional state.
pub struct TransferEvaluator {
    config: DrivingConfig,
    double: DoubleLax,
    n_sites: usize,
    identity: SparseOperator,
    norm: C64,
}

impl TransferEvaluator {
    pub fn new(cfg: &DrivingConfig, cutoff: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_sites;
        let k = cutoff.unwrap_or_else(|| exact_cutoff(n));
        if k < exact_cutoff(n) {
            return Err(Error::CutoffMismatch(format!(
                "transfer evaluation needs cutoff >= {} for n = {n}, got {k}",
                exact_cutoff(n)
            )));
        }
        let double = build_double_lax(cfg, k)?;
        let identity = double.l.transfer(&DenseOperator::identity(4))?;
        let chain: Vec<&SparseOperator> = vec![&identity; n];
        let norm = transfer_chain(&chain, 0, 0);
        if norm.norm() == 0.0 || !norm.is_finite() {
            return Err(Error::Inconsistent(format!("trace of the unnormalised state is {norm}")));
        }
        Ok(TransferEvaluator {
            config: *cfg,
            double,
            n_sites: n,
            identity,
            norm,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Unnormalised trace `tr R`.
    pub fn trace(&self) -> C64 {
        self.norm
    }

    /// `<O_j O_{j+1} ...>` for the operators `ops` placed from site `j` on.
    pub fn local_string(&self, j: usize, ops: &[DenseOperator]) -> Result<C64> {
        let n = self.n_sites;
        if ops.is_empty() || j == 0 || j + ops.len() - 1 > n {
            return Err(Error::SiteOutOfRange { site: j + ops.len().saturating_sub(1), n_sites: n });
        }
        let placed = ops
            .iter()
            .map(|o| self.double.l.transfer(o))
            .collect::<Result<Vec<_>>>()?;
        let mut chain: Vec<&SparseOperator> = vec![&self.identity; n];
        for (k, t) in placed.iter().enumerate() {
            chain[j - 1 + k] = t;
        }
        Ok(transfer_chain(&chain, 0, 0) / self.norm)
    }

    pub fn current(&self, j: usize, species: Species) -> Result<C64> {
        let mut acc = ZERO;
        for (c, a, b) in current_terms(species) {
            acc += c * self.local_string(j, &[a, b])?;
        }
        Ok(acc)
    }

    pub fn observables(&self) -> Result<ObservableSet> {
        let n = self.n_sites;
        let mut max_imag = 0.0;
        let sz = species_local(Species::Sigma, Z);
        let tz = species_local(Species::Tau, Z);
        let mut densities = Vec::with_capacity(n);
        for j in 1..=n {
            let s = self.local_string(j, std::slice::from_ref(&sz))?;
            let t = self.local_string(j, std::slice::from_ref(&tz))?;
            densities.push((real_part(s, &mut max_imag), real_part(t, &mut max_imag)));
        }
        let mut currents = Vec::with_capacity(n - 1);
        for j in 1..n {
            let s = self.current(j, Species::Sigma)?;
            let t = self.current(j, Species::Tau)?;
            currents.push((real_part(s, &mut max_imag), real_part(t, &mut max_imag)));
        }
        Ok(ObservableSet {
            n_sites: n,
            config: self.config,
            densities,
            currents,
            max_imag,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope of `log|J|` against `log n`.
    pub exponent: f64,
    /// `|J| ~ prefactor * n^exponent`.
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r^2)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}

/// Power-law fit of `|J|` against `n`.
pub fn scaling_fit(series: &[(usize, f64)]) -> Result<ScalingFit> {
    if series.len() < 3 {
        return Err(Error::FitRefused(format!("need at least 3 points, got {}", series.len())));
    }
    if series.iter().any(|&(n, j)| n == 0 || j == 0.0 || !j.is_finite()) {
        return Err(Error::FitRefused("zero or non-finite entry in the series".into()));
    }
    let positive = series[0].1 > 0.0;
    if series.iter().any(|&(_, j)| (j > 0.0) != positive) {
        return Err(Error::FitRefused("current changes sign across the series".into()));
    }
    let mut sizes: Vec<usize> = series.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::FitRefused("all points share one chain length".into()));
    }
    let xs: Vec<f64> = series.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = series.iter().map(|&(_, j)| j.abs().ln()).collect();
    let (a, b, r2) = linear_fit(&xs, &ys);
    Ok(ScalingFit {
        exponent: b,
        prefactor: a.exp(),
        r_squared: r2,
        points: series.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub amplitude: f64,
    pub offset: f64,
    pub r_squared: f64,
}

/// Fits `profile[j-1] ~ amplitude * cos(pi (j - 1/2) / n) + offset`.
pub fn cosine_fit(profile: &[f64]) -> Result<CosineFit> {
    let n = profile.len();
    if n < 3 {
        return Err(Error::FitRefused(format!("need at least 3 sites, got {n}")));
    }
    let xs: Vec<f64> = (1..=n)
        .map(|j| (std::f64::consts::PI * (j as f64 - 0.5) / n as f64).cos())
        .collect();
    let (a, b, r2) = linear_fit(&xs, profile);
    Ok(CosineFit {
        amplitude: b,
        offset: a,
        r_squared: r2,
    })
}

/// Steady-state current `(J^s, J^t)` on the first bond for each chain length.
pub fn current_series(base: &DrivingConfig, sizes: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    sizes
        .iter()
        .map(|&n| {
            let cfg = DrivingConfig { n_sites: n, ..*base };
            let obs = TransferEvaluator::new(&cfg, None)?.observables()?;
            let (s, t) = obs.current();
            Ok((n, s, t))
        })
        .collect()
}
