//! Direct Lindblad generator and a brute-force steady-state oracle.
//!
//! Superoperators act on row-major vectorised matrices,
//! `vec(rho)[i * D + j] = rho[i][j]`, so that `A rho B` becomes
//! `(A (x) B^T) vec(rho)`.

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubbard::{build_hamiltonian, HamiltonianSpec, PhysicalSpace, Species, MINUS, PLUS};
use crate::linalg::{DenseOperator, SparseOperator, C64, I, ONE};
use crate::ness::DrivingConfig;

/// Largest chain for which the superoperator is materialised.
pub const MAX_ORACLE_SITES: usize = 3;
pub const NULL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub config: DrivingConfig,
    pub hamiltonian: SparseOperator,
    /// `sqrt(gL) s+_1, sqrt(gL) t+_1, sqrt(gR) s-_n, sqrt(gR) t-_n`.
    pub jumps: Vec<SparseOperator>,
}

impl LindbladSpec {
    pub fn new(cfg: &DrivingConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_sites;
        let space = PhysicalSpace::new(n)?;
        let hamiltonian = build_hamiltonian(&HamiltonianSpec {
            n_sites: n,
            u: cfg.u,
            mu_l: cfg.mu_l,
            mu_r: cfg.mu_r,
        })?;
        let gl = C64::new(cfg.gamma_l.sqrt(), 0.0);
        let gr = C64::new(cfg.gamma_r.sqrt(), 0.0);
        let jumps = vec![
            space.site_operator(1, Species::Sigma, PLUS)?.scale(gl),
            space.site_operator(1, Species::Tau, PLUS)?.scale(gl),
            space.site_operator(n, Species::Sigma, MINUS)?.scale(gr),
            space.site_operator(n, Species::Tau, MINUS)?.scale(gr),
        ];
        Ok(LindbladSpec {
            config: *cfg,
            hamiltonian,
            jumps,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// `-i[H, rho] + sum_J (2 J rho J^dagger - {J^dagger J, rho})`.
    pub fn apply(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::Linalg(crate::linalg::LinalgError::DimensionMismatch {
                op: "apply_lindbladian",
                left: (self.dim(), self.dim()),
                right: (rho.dim(), rho.dim()),
            }));
        }
        let h = &self.hamiltonian;
        let comm = &h.mul_dense(rho)? - &rho.mul_sparse(h)?;
        let mut out = comm.scale(-I);
        for j in &self.jumps {
            let jd = j.dagger();
            let jdj = &jd * j;
            let sandwich = j.mul_dense(rho)?.mul_sparse(&jd)?;
            let anti = &jdj.mul_dense(rho)? + &rho.mul_sparse(&jdj)?;
            out = &out + &(&sandwich.scale(C64::new(2.0, 0.0)) - &anti);
        }
        Ok(out)
    }

    /// `||L rho|| / ||rho||`.
    pub fn relative_residual(&self, rho: &DenseOperator) -> Result<f64> {
        Ok(self.apply(rho)?.frobenius() / rho.frobenius())
    }

    /// The generator as a `D^2 x D^2` sparse matrix.
    pub fn superoperator(&self) -> Result<SparseOperator> {
        if self.config.n_sites > MAX_ORACLE_SITES {
            return Err(Error::TooLarge(format!(
                "superoperator limited to n <= {MAX_ORACLE_SITES}, got n = {}",
                self.config.n_sites
            )));
        }
        let d = self.dim();
        let id = SparseOperator::identity(d);
        let h = &self.hamiltonian;
        let mut sup = (&h.kron(&id)? - &id.kron(&h.transpose())?).scale(-I);
        for j in &self.jumps {
            let jdj = &j.dagger() * j;
            let term = &(&j.kron(&j.conj())?.scale(C64::new(2.0, 0.0)) - &jdj.kron(&id)?)
                - &id.kron(&jdj.transpose())?;
            sup = &sup + &term;
        }
        Ok(sup)
    }
}

pub fn vectorize(rho: &DenseOperator) -> Vec<C64> {
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64]) -> Result<DenseOperator> {
    let d = (v.len() as f64).sqrt().round() as usize;
    DenseOperator::from_row_major(d, v.to_vec()).map_err(Error::from)
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub rho: DenseOperator,
    pub null_dim: usize,
    pub sigma_max: f64,
    /// Sizes of the decoupled blocks of the superoperator.
    pub block_sizes: Vec<usize>,
}

/// Connected components of the symmetric sparsity graph.
fn components(op: &SparseOperator) -> Vec<Vec<usize>> {
    let n = op.nrows();
    let mut uf = UnionFind::<usize>::new(n);
    for (i, j, _) in op.iter() {
        uf.union(i, j);
    }
    let labels = uf.into_labeling();
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, l) in labels.into_iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Steady state from the null space of the superoperator. The matrix splits
/// into independent blocks; each is decomposed separately.
pub fn fixed_point_oracle(spec: &LindbladSpec) -> Result<OracleResult> {
    let sup = spec.superoperator()?;
    let blocks = components(&sup);
    let mut svds = Vec::with_capacity(blocks.len());
    let mut sigma_max = 0.0f64;
    for idx in &blocks {
        let sub = sup.submatrix(idx, idx);
        let mut m = DMatrix::<C64>::zeros(idx.len(), idx.len());
        for (i, j, v) in sub.iter() {
            m[(i, j)] = v;
        }
        let svd = m.svd(false, true);
        sigma_max = svd.singular_values.iter().fold(sigma_max, |a, &b| a.max(b));
        svds.push(svd);
    }
    let threshold = NULL_THRESHOLD * sigma_max;
    let mut null_vectors: Vec<Vec<C64>> = Vec::new();
    for (idx, svd) in blocks.iter().zip(&svds) {
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= threshold {
                let mut full = vec![C64::new(0.0, 0.0); sup.nrows()];
                for (pos, &g) in idx.iter().enumerate() {
                    full[g] = v_t[(k, pos)].conj();
                }
                null_vectors.push(full);
            }
        }
    }
    if null_vectors.len() != 1 {
        return Err(Error::NonUniqueFixedPoint(null_vectors.len()));
    }
    let raw = unvectorize(&null_vectors[0])?;
    let tr = raw.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::Inconsistent("null vector has zero trace".into()));
    }
    let rho = raw.scale(ONE / tr).hermitian_part();
    let tr = rho.trace();
    Ok(OracleResult {
        rho: rho.scale(ONE / tr),
        null_dim: 1,
        sigma_max,
        block_sizes: blocks.iter().map(Vec::len).collect(),
    })
}

/// All eigenvalues of the superoperator (small chains only), computed
/// block by block.
pub fn spectrum(spec: &LindbladSpec) -> Result<Vec<C64>> {
    let sup = spec.superoperator()?;
    let mut out = Vec::with_capacity(sup.nrows());
    for idx in components(&sup) {
        let sub = sup.submatrix(&idx, &idx);
        let k = idx.len();
        let mut m = faer::Mat::<C64>::zeros(k, k);
        for (i, j, v) in sub.iter() {
            m[(i, j)] = v;
        }
        let ev = m
            .eigenvalues()
            .map_err(|e| Error::Inconsistent(format!("eigenvalue solver failed: {e:?}")))?;
        out.extend(ev);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub frobenius_distance: f64,
    pub fidelity_overlap: f64,
    pub null_dim: usize,
}

/// Frobenius distance and normalised Hilbert-Schmidt overlap of two states.
pub fn compare_states(a: &DenseOperator, b: &DenseOperator, null_dim: usize) -> OracleComparison {
    let dist = (a - b).frobenius();
    let ab = a.dagger().compose(b).expect("same dimension").trace().re;
    OracleComparison {
        frobenius_distance: dist,
        fidelity_overlap: ab / (a.frobenius() * b.frobenius()),
        null_dim,
    }
}
