//! Steady state of the boundary-driven chain from the Lax family.
//!
//! `rho = Omega Omega^dagger M / tr(...)` with
//! `Omega = <0+| L_1 ... L_n |0+>` and `M_j = exp(eta (sz_j + tz_j))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aux_space::AuxSpace;
use crate::error::{Error, Result};
use crate::hubbard::{bond_operator, local, local_basis, species_local, PhysicalSpace, Species, ID, MINUS, PLUS, Z};
use crate::lax::{LaxFamily, LaxParams};
use crate::linalg::{DenseOperator, SparseOperator, C64, I, ONE, ZERO};
use crate::lindblad::LindbladSpec;
use crate::mpo::{apply_chain, contract_chain, MpoTensor};
use crate::sampling::random_vector;
use crate::verify::{lax_tensor, ResidualReport, DEFAULT_TOL, EDGE_MARGIN};

/// Largest chain for which the density matrix is formed densely.
pub const MAX_DENSE_SITES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingConfig {
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub mu_l: f64,
    pub mu_r: f64,
    pub u: f64,
    pub n_sites: usize,
}

/// The three numbers fixed by the driving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingParams {
    pub lambda: C64,
    pub omega: C64,
    pub eta: f64,
}

impl DrivingConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma_l, self.gamma_r, self.mu_l, self.mu_r, self.u]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidDriving("parameters must be finite".into()));
        }
        if self.gamma_l < 0.0 || self.gamma_r < 0.0 {
            return Err(Error::InvalidDriving(format!(
                "coupling rates cannot be negative (gamma_L = {}, gamma_R = {})",
                self.gamma_l, self.gamma_r
            )));
        }
        if self.gamma_l == 0.0 || self.gamma_r == 0.0 {
            return Err(Error::InvalidDriving(format!(
                "a zero coupling rate leaves the steady state non-unique; both \
                 gamma_L and gamma_R must be positive (gamma_L = {}, gamma_R = {})",
                self.gamma_l, self.gamma_r
            )));
        }
        if self.n_sites < 2 {
            return Err(Error::InvalidDriving(format!(
                "the driven chain needs n >= 2, got n = {}",
                self.n_sites
            )));
        }
        Ok(())
    }

    /// Parameters of the Lax family that generates the steady state.
    ///
    /// With the basis and component conventions of this crate the spectral
    /// parameter enters with the opposite sign to `DrivingParams::lambda`.
    pub fn lax_params(&self) -> Result<LaxParams> {
        let d = map_driving_to_params(self)?;
        Ok(LaxParams::new(-d.lambda, d.omega, self.u))
    }
}

pub fn map_driving_to_params(cfg: &DrivingConfig) -> Result<DrivingParams> {
    if cfg.gamma_l <= 0.0 || cfg.gamma_r <= 0.0 {
        return Err(Error::InvalidDriving(format!(
            "both coupling rates must be positive (gamma_L = {}, gamma_R = {})",
            cfg.gamma_l, cfg.gamma_r
        )));
    }
    let (gl, gr, ml, mr) = (cfg.gamma_l, cfg.gamma_r, cfg.mu_l, cfg.mu_r);
    let den = C64::new(gl + gr, -(ml - mr));
    if den == ZERO {
        return Err(Error::InvalidDriving("vanishing denominator in the parameter map".into()));
    }
    Ok(DrivingParams {
        lambda: C64::new(gl - gr, -(ml + mr)) / den,
        omega: C64::new(ml - mr, gl + gr) * 0.25,
        eta: 0.5 * (gl / gr).ln(),
    })
}

/// Smallest cutoff that reproduces `Omega` exactly for `n` sites.
pub fn exact_cutoff(n_sites: usize) -> usize {
    n_sites / 2 + 1
}

/// `diag(e^{2 eta}, 1, 1, e^{-2 eta})`.
pub fn filter_local(eta: f64) -> DenseOperator {
    let mut m = DenseOperator::identity(4);
    m.set(0, 0, C64::new((2.0 * eta).exp(), 0.0));
    m.set(3, 3, C64::new((-2.0 * eta).exp(), 0.0));
    m
}

/// Diagonal of `M` on the full chain.
pub fn filter_diagonal(n_sites: usize, eta: f64) -> Vec<C64> {
    let local: Vec<f64> = (0..4).map(|i| filter_local(eta).get(i, i).re).collect();
    let mut diag = vec![1.0];
    for _ in 0..n_sites {
        diag = diag.iter().flat_map(|d| local.iter().map(move |l| d * l)).collect();
    }
    diag.into_iter().map(|v| C64::new(v, 0.0)).collect()
}

/// Reachability rule for the single auxiliary space: from level `l` at least
/// `ceil(l)` more sites are needed to come back to `0+`.
pub fn single_keep(space: &AuxSpace) -> impl Fn(usize, usize) -> bool + '_ {
    move |remaining, m| space.twice_level(m) <= 2 * remaining
}

/// `<0+| L_1 ... L_n |0+>` from an assembled family.
pub fn omega_from_family(family: &LaxFamily, n_sites: usize) -> Result<SparseOperator> {
    if n_sites == 0 {
        return Err(Error::InvalidArgument("at least one site is required".into()));
    }
    let w = lax_tensor(&family.l)?;
    let sites = vec![&w; n_sites];
    contract_chain(&sites, 0, 0, single_keep(&family.space))
}

/// `Omega` at cutoff `K`. Below the exactness bound the result is compared
/// against cutoff `K + 1` and rejected if it differs.
pub fn build_omega(params: LaxParams, n_sites: usize, cutoff: usize) -> Result<SparseOperator> {
    let omega = omega_from_family(&LaxFamily::new(params, cutoff)?, n_sites)?;
    if cutoff < exact_cutoff(n_sites) {
        let wider = omega_from_family(&LaxFamily::new(params, cutoff + 1)?, n_sites)?;
        let diff = omega.max_abs_diff(&wider)?;
        let scale = wider.norms().max_abs.max(1.0);
        if diff > 1e-13 * scale {
            return Err(Error::CutoffMismatch(format!(
                "cutoff {cutoff} is below the exact bound {} for n = {n_sites} and changes Omega by {diff:e}",
                exact_cutoff(n_sites)
            )));
        }
    }
    Ok(omega)
}

/// Largest relative difference between `Omega` at two cutoffs, compared
/// entrywise for small chains and through random vectors otherwise.
pub fn cutoff_difference(params: LaxParams, n_sites: usize, k1: usize, k2: usize, seed: u64) -> Result<f64> {
    let f1 = LaxFamily::new(params, k1)?;
    let f2 = LaxFamily::new(params, k2)?;
    if n_sites <= 6 {
        let a = omega_from_family(&f1, n_sites)?;
        let b = omega_from_family(&f2, n_sites)?;
        return Ok(a.max_abs_diff(&b)? / b.norms().max_abs.max(f64::MIN_POSITIVE));
    }
    let w1 = lax_tensor(&f1.l)?;
    let w2 = lax_tensor(&f2.l)?;
    let s1 = vec![&w1; n_sites];
    let s2 = vec![&w2; n_sites];
    let dim = 4usize.pow(n_sites as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let psi = random_vector(&mut rng, dim);
        let a = apply_chain(&s1, 0, 0, single_keep(&f1.space), &psi)?;
        let b = apply_chain(&s2, 0, 0, single_keep(&f2.space), &psi)?;
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NessDiagnostics {
    /// `||rho - rho^dagger|| / ||rho||`.
    pub hermiticity: f64,
    pub positivity_min_eig: f64,
    /// `|tr rho - 1|`.
    pub trace_error: f64,
    /// `||[Omega Omega^dagger, M]|| / ||Omega Omega^dagger M||`.
    pub filter_commutator: f64,
    /// `||L rho|| / ||rho||`.
    pub lindblad_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NessResult {
    pub config: DrivingConfig,
    pub driving: DrivingParams,
    pub lax_params: LaxParams,
    pub eta: f64,
    pub cutoff: usize,
    pub omega_op: SparseOperator,
    pub rho: DenseOperator,
    pub diagnostics: NessDiagnostics,
}

/// `Omega Omega^dagger M` as a dense matrix.
pub fn unnormalized_state(omega: &SparseOperator, n_sites: usize, eta: f64) -> DenseOperator {
    let oo = (omega * &omega.dagger()).to_dense();
    let m = filter_diagonal(n_sites, eta);
    let d = oo.dim();
    DenseOperator::from_fn(d, |i, j| oo.get(i, j) * m[j])
}

/// Builds the steady state and its diagnostics.
pub fn build_ness(cfg: &DrivingConfig, cutoff: Option<usize>) -> Result<NessResult> {
    cfg.validate()?;
    let n = cfg.n_sites;
    if n > MAX_DENSE_SITES {
        return Err(Error::TooLarge(format!(
            "dense steady state limited to n <= {MAX_DENSE_SITES}; use transfer-matrix observables for n = {n}"
        )));
    }
    let k = cutoff.unwrap_or_else(|| exact_cutoff(n));
    let driving = map_driving_to_params(cfg)?;
    let lax_params = cfg.lax_params()?;
    let omega = build_omega(lax_params, n, k)?;
    let r = unnormalized_state(&omega, n, driving.eta);
    let tr = r.trace();
    if tr.norm() == 0.0 || !tr.is_finite() {
        return Err(Error::Inconsistent(format!("trace of Omega Omega^dagger M is {tr}")));
    }
    let rho = r.scale(ONE / tr);

    let oo = (&omega * &omega.dagger()).to_dense();
    let m = filter_diagonal(n, driving.eta);
    let comm = DenseOperator::from_fn(oo.dim(), |i, j| oo.get(i, j) * (m[j] - m[i]));
    let filter_commutator = comm.frobenius() / r.frobenius();

    let rho_norm = rho.frobenius();
    let spec = LindbladSpec::new(cfg)?;
    let lres = spec.apply(&rho)?.frobenius() / rho_norm;
    let diagnostics = NessDiagnostics {
        hermiticity: (&rho - &rho.dagger()).frobenius() / rho_norm,
        positivity_min_eig: rho.hermitian_eigenvalues()[0],
        trace_error: (rho.trace() - ONE).norm(),
        filter_commutator,
        lindblad_residual: Some(lres),
    };
    Ok(NessResult {
        config: *cfg,
        driving,
        lax_params,
        eta: driving.eta,
        cutoff: k,
        omega_op: omega,
        rho,
        diagnostics,
    })
}

/// Doubled Lax data on `aux (x) aux (x) phys`.
#[derive(Debug, Clone)]
pub struct DoubleLax {
    pub family: LaxFamily,
    pub conj_family: LaxFamily,
    pub eta: f64,
    pub l: MpoTensor,
    pub l_tilde: MpoTensor,
    /// Diagonal `Y (x) 1 - 1 (x) Ybar`.
    pub y: SparseOperator,
    /// `L~ + {Y, L}`, the divergence density.
    pub b: MpoTensor,
}

impl DoubleLax {
    pub fn from_families(family: LaxFamily, conj_family: LaxFamily, eta: f64) -> Result<Self> {
        let d = family.dim();
        if conj_family.dim() != d {
            return Err(Error::InvalidArgument("families on different cutoffs".into()));
        }
        let basis = local_basis();
        let m = filter_local(eta);
        let id = SparseOperator::identity(d);
        let y = &family.y.kron(&id)? - &id.kron(&conj_family.y)?;
        let mut aux_l = Vec::with_capacity(256);
        let mut aux_lt = Vec::with_capacity(256);
        let mut aux_b = Vec::with_capacity(256);
        let mut phys = Vec::with_capacity(256);
        for a in 0..16 {
            for b in 0..16 {
                let ll = family.l[a].kron(&conj_family.l[b])?;
                let lt = &family.l_tilde[a].kron(&conj_family.l[b])?
                    - &family.l[a].kron(&conj_family.l_tilde[b])?;
                let bb = &(&lt + &(&y * &ll)) + &(&ll * &y);
                aux_l.push(ll);
                aux_lt.push(lt);
                aux_b.push(bb);
                phys.push(&(&basis[a] * &basis[b].transpose()) * &m);
            }
        }
        Ok(DoubleLax {
            l: MpoTensor::from_components(&aux_l, &phys)?,
            l_tilde: MpoTensor::from_components(&aux_lt, &phys)?,
            b: MpoTensor::from_components(&aux_b, &phys)?,
            y,
            family,
            conj_family,
            eta,
        })
    }

    pub fn aux_dim(&self) -> usize {
        self.family.dim() * self.family.dim()
    }

    /// Twice the level of a doubled auxiliary index.
    pub fn twice_level(&self, index: usize) -> usize {
        let d = self.family.dim();
        let sp = &self.family.space;
        sp.twice_level(index / d).max(sp.twice_level(index % d))
    }

    pub fn keep(&self) -> impl Fn(usize, usize) -> bool + '_ {
        move |remaining, m| self.twice_level(m) <= 2 * remaining
    }

    /// `<00| L_1 ... L_n |00>`.
    pub fn contract(&self, n_sites: usize) -> Result<SparseOperator> {
        let sites = vec![&self.l; n_sites];
        contract_chain(&sites, 0, 0, self.keep())
    }
}

/// Doubled operators for a driving configuration.
pub fn build_double_lax(cfg: &DrivingConfig, cutoff: usize) -> Result<DoubleLax> {
    let params = cfg.lax_params()?;
    let eta = map_driving_to_params(cfg)?.eta;
    DoubleLax::from_families(
        LaxFamily::new(params, cutoff)?,
        LaxFamily::new(params.conj(), cutoff)?,
        eta,
    )
}

fn frob_terms(terms: &[(C64, &SparseOperator)]) -> (SparseOperator, f64) {
    let n = terms[0].1.nrows();
    let mut acc = SparseOperator::zeros(n, n);
    let mut scale = 0.0f64;
    for (c, t) in terms {
        scale = scale.max(t.frobenius());
        acc = acc.axpby(ONE, t, *c).expect("same shape");
    }
    (acc, scale)
}

/// Contracted divergence check
/// `sum_j [h_{j,j+1}, R] = <00| B_1 L_2..L_n - L_1..L_{n-1} B_n |00>`.
pub fn check_telescoping(double: &DoubleLax, n_sites: usize, tol: f64) -> Result<ResidualReport> {
    if n_sites < 2 {
        return Err(Error::InvalidArgument("telescoping needs n >= 2".into()));
    }
    let space = PhysicalSpace::new(n_sites)?;
    let r = double.contract(n_sites)?;
    let mut h = SparseOperator::zeros(space.dim(), space.dim());
    for j in 1..n_sites {
        h = &h + &bond_operator(&space, j, double.family.params.u)?;
    }
    let hr = &h * &r;
    let rh = &r * &h;
    let mut first = vec![&double.l; n_sites];
    first[0] = &double.b;
    let mut last = vec![&double.l; n_sites];
    last[n_sites - 1] = &double.b;
    let b1 = contract_chain(&first, 0, 0, double.keep())?;
    let bn = contract_chain(&last, 0, 0, double.keep())?;
    let (res, scale) = frob_terms(&[(ONE, &hr), (-ONE, &rh), (-ONE, &b1), (ONE, &bn)]);
    let n = res.norms();
    Ok(ResidualReport::new(
        format!("telescoping_n{n_sites}"),
        double.family.params,
        double.family.space.cutoff(),
        n.frobenius,
        n.max_abs,
        scale,
        tol,
    ))
}

/// Uncontracted two-site divergence check on `aux^2 (x) phys^2`, measured on
/// doubled levels `<= cutoff - 2`.
pub fn check_telescoping_full(double: &DoubleLax, tol: f64) -> Result<ResidualReport> {
    let cutoff = double.family.space.cutoff();
    if cutoff <= EDGE_MARGIN {
        return Err(Error::InvalidCutoff("full telescoping check needs cutoff >= 3".into()));
    }
    let keep_level = cutoff - EDGE_MARGIN;
    let ll = double.l.product(&double.l)?.to_operator();
    let b1 = double.b.product(&double.l)?.to_operator();
    let bn = double.l.product(&double.b)?.to_operator();
    let u = double.family.params.u;
    let h = SparseOperator::identity(double.aux_dim())
        .kron(&SparseOperator::from_dense(&crate::hubbard::bond_local(u)))?;
    let keep: Vec<usize> = (0..double.aux_dim())
        .filter(|&i| double.twice_level(i) <= 2 * keep_level)
        .flat_map(|i| (0..16).map(move |q| i * 16 + q))
        .collect();
    let p = |op: &SparseOperator| op.submatrix(&keep, &keep);
    let (hl, lh, b1, bn) = (p(&(&h * &ll)), p(&(&ll * &h)), p(&b1), p(&bn));
    let (res, scale) = frob_terms(&[(ONE, &hl), (-ONE, &lh), (-ONE, &b1), (ONE, &bn)]);
    let n = res.norms();
    Ok(ResidualReport::new(
        "telescoping_full_n2",
        double.family.params,
        keep_level,
        n.frobenius,
        n.max_abs,
        scale,
        tol,
    ))
}

/// `D_J A = 2 J A J^dagger - {J^dagger J, A}` summed over the given jumps.
pub fn dissipate(jumps: &[DenseOperator], a: &DenseOperator) -> DenseOperator {
    let mut out = DenseOperator::zeros(a.dim());
    for j in jumps {
        let jd = j.dagger();
        let jdj = &jd * j;
        let t = &(&(j * a) * &jd).scale(C64::new(2.0, 0.0)) - &jdj.anticommutator(a).unwrap();
        out = &out + &t;
    }
    out
}

fn boundary_field(u: f64, mu: f64) -> DenseOperator {
    crate::hubbard::boundary_local(u, mu)
}

/// Single-site jump operators at the left (source) end.
pub fn left_jumps(gamma: f64) -> [DenseOperator; 2] {
    let g = C64::new(gamma.sqrt(), 0.0);
    [species_local(Species::Sigma, PLUS).scale(g), species_local(Species::Tau, PLUS).scale(g)]
}

/// Single-site jump operators at the right (sink) end.
pub fn right_jumps(gamma: f64) -> [DenseOperator; 2] {
    let g = C64::new(gamma.sqrt(), 0.0);
    [species_local(Species::Sigma, MINUS).scale(g), species_local(Species::Tau, MINUS).scale(g)]
}

/// Residuals of the two boundary equations
/// `<00|(i D_L L + L~ + L Y + [h_L, L]) = 0` and
/// `(i D_R L - L~ - Y L + [h_R, L])|00> = 0`.
pub fn check_boundary_conditions(
    double: &DoubleLax,
    cfg: &DrivingConfig,
    tol: f64,
) -> Result<(ResidualReport, ResidualReport)> {
    let cutoff = double.family.space.cutoff();
    let keep_level = cutoff.saturating_sub(EDGE_MARGIN).max(1);
    let u = cfg.u;
    let jl = left_jumps(cfg.gamma_l);
    let jr = right_jumps(cfg.gamma_r);
    let hl = boundary_field(u, cfg.mu_l);
    let hr = boundary_field(u, cfg.mu_r);
    let zero = DenseOperator::zeros(4);
    let y = |i: usize| double.y.get(i, i);

    let mut left = (0.0, 0.0f64, 0.0f64);
    for (m, w) in double.l.row(0) {
        if double.twice_level(*m) > 2 * keep_level {
            continue;
        }
        let wt = double.l_tilde.block(0, *m).unwrap_or(&zero);
        let terms = [
            dissipate(&jl, w).scale(I),
            wt.clone(),
            w.scale(y(*m)),
            hl.commutator(w)?,
        ];
        accumulate(&mut left, &terms);
    }
    let mut right = (0.0, 0.0f64, 0.0f64);
    for i in 0..double.aux_dim() {
        if double.twice_level(i) > 2 * keep_level {
            continue;
        }
        let Some(w) = double.l.block(i, 0) else { continue };
        let wt = double.l_tilde.block(i, 0).unwrap_or(&zero);
        let terms = [
            dissipate(&jr, w).scale(I),
            wt.scale(-ONE),
            w.scale(-y(i)),
            hr.commutator(w)?,
        ];
        accumulate(&mut right, &terms);
    }
    let mk = |name: &str, (sq, max, scale): (f64, f64, f64)| {
        ResidualReport::new(name, double.family.params, keep_level, sq.sqrt(), max, scale, tol)
    };
    Ok((mk("boundary_left", left), mk("boundary_right", right)))
}

/// Adds one auxiliary block of a boundary equation to `(sum of squares, max
/// entry, scale)`; the scale collects squared term norms across blocks.
fn accumulate(acc: &mut (f64, f64, f64), terms: &[DenseOperator; 4]) {
    let sum = terms.iter().skip(1).fold(terms[0].clone(), |a, b| &a + b);
    let n = sum.norms();
    acc.0 += n.frobenius * n.frobenius;
    acc.1 = acc.1.max(n.max_abs);
    let term_scale = terms.iter().map(|t| t.frobenius()).fold(0.0, f64::max);
    acc.2 = (acc.2 * acc.2 + term_scale * term_scale).sqrt();
}

/// Boundary checks with the spectral parameter scaled by `factor`.
pub fn boundary_with_lambda_factor(cfg: &DrivingConfig, cutoff: usize, factor: f64, tol: f64) -> Result<(ResidualReport, ResidualReport)> {
    let mut params = cfg.lax_params()?;
    params.lambda *= factor;
    let eta = map_driving_to_params(cfg)?.eta;
    let double = DoubleLax::from_families(
        LaxFamily::new(params, cutoff)?,
        LaxFamily::new(params.conj(), cutoff)?,
        eta,
    )?;
    check_boundary_conditions(&double, cfg, tol)
}

/// Default-tolerance pair of boundary reports at the exact parameters.
pub fn boundary_reports(cfg: &DrivingConfig, cutoff: usize) -> Result<(ResidualReport, ResidualReport)> {
    check_boundary_conditions(&build_double_lax(cfg, cutoff)?, cfg, DEFAULT_TOL)
}

/// Local operators used for the magnetisation filter and the species swap.
pub fn local_z_sum() -> DenseOperator {
    &local(Z, ID) + &local(ID, Z)
}
