//! Residual checks for the defining identities of the Lax family.
//!
//! Every check works on `aux (x) phys` with the auxiliary index major and
//! measures the residual only on auxiliary levels `<= K`, where the family
//! is expected to be built at cutoff `K + 2`.

use serde::{Deserialize, Serialize};

use crate::aux_space::AuxSpace;
use crate::error::{Error, Result};
use crate::hubbard::{bond_local, local, local_basis, pauli, MINUS, PLUS, Z};
use crate::lax::{LaxFamily, LaxParams};
use crate::linalg::{DenseOperator, SparseBuilder, SparseOperator, C64, ONE};
use crate::mpo::MpoTensor;

pub const DEFAULT_TOL: f64 = 1e-10;
/// Margin between the build cutoff and the checked levels.
pub const EDGE_MARGIN: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity_name: String,
    pub params: LaxParams,
    pub cutoff_k: usize,
    pub residual_fro: f64,
    pub residual_max: f64,
    pub operand_scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ResidualReport {
    pub fn new(
        name: impl Into<String>,
        params: LaxParams,
        cutoff_k: usize,
        residual_fro: f64,
        residual_max: f64,
        operand_scale: f64,
        tolerance: f64,
    ) -> Self {
        ResidualReport {
            identity_name: name.into(),
            params,
            cutoff_k,
            residual_fro,
            residual_max,
            operand_scale,
            tolerance,
            passed: residual_fro <= tolerance * operand_scale,
        }
    }

    /// `residual_fro / operand_scale`, or the raw residual if the scale is 0.
    pub fn relative(&self) -> f64 {
        if self.operand_scale > 0.0 {
            self.residual_fro / self.operand_scale
        } else {
            self.residual_fro
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Highest auxiliary level kept when measuring residuals.
    pub project_to: usize,
    pub tol: f64,
}

impl CheckOptions {
    pub fn new(project_to: usize, tol: f64) -> Self {
        CheckOptions { project_to, tol }
    }

    /// Checks at the family's cutoff minus the edge margin.
    pub fn for_family(family: &LaxFamily, tol: f64) -> Result<Self> {
        let k = family.space.cutoff();
        if k <= EDGE_MARGIN {
            return Err(Error::InvalidCutoff(format!(
                "family cutoff {k} leaves no levels below the edge margin"
            )));
        }
        Ok(CheckOptions::new(k - EDGE_MARGIN, tol))
    }
}

/// `sum aux_i (x) phys_i`.
pub fn aux_phys_sum(terms: &[(SparseOperator, DenseOperator)]) -> Result<SparseOperator> {
    let (na, np) = match terms.first() {
        Some((a, p)) => (a.nrows(), p.dim()),
        None => return Err(Error::InvalidArgument("empty term list".into())),
    };
    let mut b = SparseBuilder::new(na * np, na * np);
    for (a, p) in terms {
        let ps = SparseOperator::from_dense(p);
        for (i, j, v) in a.iter() {
            for (x, y, w) in ps.iter() {
                b.add(i * np + x, j * np + y, v * w);
            }
        }
    }
    Ok(b.build())
}

/// Restriction to auxiliary levels `<= max_level`.
pub fn project_levels(op: &SparseOperator, space: &AuxSpace, phys_dim: usize, max_level: usize) -> SparseOperator {
    let keep: Vec<usize> = space
        .indices_up_to(max_level)
        .into_iter()
        .flat_map(|a| (0..phys_dim).map(move |q| a * phys_dim + q))
        .collect();
    op.submatrix(&keep, &keep)
}

/// Builds a report for `sum c_i term_i` after projection. The operand scale
/// is the largest projected term, so cancellations inside a side do not
/// shrink it.
fn report(
    name: &str,
    family: &LaxFamily,
    opts: &CheckOptions,
    phys_dim: usize,
    terms: &[(C64, SparseOperator)],
) -> ResidualReport {
    let proj = |op: &SparseOperator| project_levels(op, &family.space, phys_dim, opts.project_to);
    let mut scale = 0.0f64;
    let mut res: Option<SparseOperator> = None;
    for (c, t) in terms {
        let t = proj(t);
        scale = scale.max(t.frobenius());
        res = Some(match res {
            None => t.scale(*c),
            Some(r) => r.axpby(ONE, &t, *c).expect("same shape"),
        });
    }
    let n = res.expect("at least one term").norms();
    ResidualReport::new(name, family.params, opts.project_to, n.frobenius, n.max_abs, scale, opts.tol)
}

/// `a b` and `b a` as separate terms of `[a, b]`.
fn commutator_terms(a: &SparseOperator, b: &SparseOperator) -> [(C64, SparseOperator); 2] {
    [(ONE, a * b), (-ONE, b * a)]
}

fn hopping_one_species() -> DenseOperator {
    let a = pauli(PLUS).kron(&pauli(MINUS)).unwrap();
    let b = pauli(MINUS).kron(&pauli(PLUS)).unwrap();
    (&a + &b).scale(C64::new(2.0, 0.0))
}

/// Shared body of the two single-species identities.
fn single_species(
    name: &str,
    family: &LaxFamily,
    opts: &CheckOptions,
    a: &[SparseOperator; 4],
    acute_x: &[SparseOperator; 4],
    x_grave: &[SparseOperator; 4],
) -> Result<ResidualReport> {
    let x = &family.x;
    let mut axa = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for s in 0..4 {
        for s2 in 0..4 {
            let phys = pauli(s).kron(&pauli(s2))?;
            axa.push((&(&a[s] * x) * &a[s2], phys.clone()));
            left.push((&acute_x[s] * &a[s2], phys.clone()));
            right.push((&a[s] * &x_grave[s2], phys));
        }
    }
    let axa = aux_phys_sum(&axa)?;
    let h = aux_phys_sum(&[(SparseOperator::identity(family.dim()), hopping_one_species())])?;
    let [hx, xh] = commutator_terms(&h, &axa);
    Ok(report(
        name,
        family,
        opts,
        4,
        &[hx, xh, (-ONE, aux_phys_sum(&left)?), (ONE, aux_phys_sum(&right)?)],
    ))
}

/// `[h^s_12, S_1 X S_2] = S'_1 X S_2 - S_1 X S`_2` on aux (x) C2 (x) C2.
pub fn check_id1(family: &LaxFamily, opts: &CheckOptions) -> Result<ResidualReport> {
    single_species("id1", family, opts, &family.s, &family.s_acute_x, &family.x_s_grave)
}

/// The reflected identity for the tau species.
pub fn check_id2(family: &LaxFamily, opts: &CheckOptions) -> Result<ResidualReport> {
    single_species("id2", family, opts, &family.t, &family.t_acute_x, &family.x_t_grave)
}

/// `S T' + T S' - S` T - T` S = [Y - u sz tz, S T]` on one site.
pub fn check_id3(family: &LaxFamily, opts: &CheckOptions) -> Result<ResidualReport> {
    let f = family;
    let mut parts: [Vec<(SparseOperator, DenseOperator)>; 4] = Default::default();
    let mut st = Vec::new();
    for s in 0..4 {
        for t in 0..4 {
            let phys = local(s, t);
            parts[0].push((&f.s[s] * &f.t_acute[t], phys.clone()));
            parts[1].push((&f.t[t] * &f.s_acute[s], phys.clone()));
            parts[2].push((&f.s_grave[s] * &f.t[t], phys.clone()));
            parts[3].push((&f.t_grave[t] * &f.s[s], phys.clone()));
            st.push((&f.s[s] * &f.t[t], phys));
        }
    }
    let st = aux_phys_sum(&st)?;
    let w = aux_phys_sum(&[
        (f.y.clone(), DenseOperator::identity(4)),
        (SparseOperator::identity(f.dim()), local(Z, Z).scale(C64::new(-f.params.u, 0.0))),
    ])?;
    let [ws, sw] = commutator_terms(&w, &st);
    let mut terms = Vec::new();
    for (c, part) in [ONE, ONE, -ONE, -ONE].into_iter().zip(&parts) {
        terms.push((c, aux_phys_sum(part)?));
    }
    terms.push((-ONE, ws.1));
    terms.push((ONE, sw.1));
    Ok(report("id3", f, opts, 4, &terms))
}

/// `[S^s, T^t] = 0` for all components and `[X, Y] = 0`.
pub fn check_id4_id5(family: &LaxFamily, opts: &CheckOptions) -> Result<(ResidualReport, ResidualReport)> {
    let f = family;
    let keep = f.space.indices_up_to(opts.project_to);
    let proj = |op: &SparseOperator| op.submatrix(&keep, &keep);
    let (mut fro, mut max, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..4 {
        for t in 0..4 {
            let st = proj(&(&f.s[s] * &f.t[t]));
            let ts = proj(&(&f.t[t] * &f.s[s]));
            let n = (&st - &ts).norms();
            fro = fro.max(n.frobenius);
            max = max.max(n.max_abs);
            scale = scale.max(st.frobenius()).max(ts.frobenius());
        }
    }
    let id4 = ResidualReport::new("id4", f.params, opts.project_to, fro, max, scale, opts.tol);
    let xy = proj(&(&f.x * &f.y));
    let yx = proj(&(&f.y * &f.x));
    let n = (&xy - &yx).norms();
    let id5 = ResidualReport::new(
        "id5",
        f.params,
        opts.project_to,
        n.frobenius,
        n.max_abs,
        xy.frobenius().max(yx.frobenius()),
        opts.tol,
    );
    Ok((id4, id5))
}

/// Lax tensor `sum L^a (x) P_a`.
pub fn lax_tensor(components: &[SparseOperator]) -> Result<MpoTensor> {
    MpoTensor::from_components(components, &local_basis())
}

/// `[h_12, L_1 L_2] = (L~_1 + Y L_1) L_2 - L_1 (L~_2 + L_2 Y)`.
pub fn check_glod(family: &LaxFamily, opts: &CheckOptions) -> Result<ResidualReport> {
    let f = family;
    let w = lax_tensor(&f.l)?;
    let b1: Vec<SparseOperator> = (0..16).map(|a| &f.l_tilde[a] + &(&f.y * &f.l[a])).collect();
    let b2: Vec<SparseOperator> = (0..16).map(|a| &f.l_tilde[a] + &(&f.l[a] * &f.y)).collect();
    let b1 = lax_tensor(&b1)?;
    let b2 = lax_tensor(&b2)?;
    let ll = w.product(&w)?.to_operator();
    let h = aux_phys_sum(&[(SparseOperator::identity(f.dim()), bond_local(f.params.u))])?;
    let [hl, lh] = commutator_terms(&h, &ll);
    let first = b1.product(&w)?.to_operator();
    let second = w.product(&b2)?.to_operator();
    Ok(report("gLOD", f, opts, 16, &[hl, lh, (-ONE, first), (ONE, second)]))
}

/// Every identity for one family.
pub fn check_family(family: &LaxFamily, opts: &CheckOptions) -> Result<Vec<ResidualReport>> {
    let (id4, id5) = check_id4_id5(family, opts)?;
    Ok(vec![
        check_id1(family, opts)?,
        check_id2(family, opts)?,
        check_id3(family, opts)?,
        id4,
        id5,
        check_glod(family, opts)?,
    ])
}

/// Builds the family at `K + 2` and checks every identity at levels `<= K`.
pub fn verify_params(params: LaxParams, cutoff_k: usize, tol: f64) -> Result<Vec<ResidualReport>> {
    let family = LaxFamily::new(params, cutoff_k + EDGE_MARGIN)?;
    check_family(&family, &CheckOptions::new(cutoff_k, tol))
}
