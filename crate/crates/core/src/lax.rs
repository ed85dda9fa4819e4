//! Lax family at fixed `(lambda, omega, u)` on a truncated auxiliary space.
//!
//! Component index convention: `s, t` run over `(+, -, 0, z)` as `0..4` and
//! the Lax components are stored flat at `4*s + t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aux_space::{AuxSpace, AuxVertex, Sign};
use crate::error::{Error, Result};
use crate::linalg::{SparseBuilder, SparseOperator, C64, ONE, ZERO};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaxParams {
    pub lambda: Complex64,
    pub omega: Complex64,
    pub u: f64,
}

impl LaxParams {
    pub fn new(lambda: C64, omega: C64, u: f64) -> Self {
        LaxParams { lambda, omega, u }
    }

    /// Parameters of the conjugate representation.
    pub fn conj(&self) -> Self {
        LaxParams {
            lambda: self.lambda.conj(),
            omega: self.omega.conj(),
            u: self.u,
        }
    }
}

/// The 2x2 block `X_k` on `span{k-, k+}`, rows and columns ordered `(-, +)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XkBlock {
    pub k: usize,
    pub matrix: [[Complex64; 2]; 2],
}

impl XkBlock {
    pub fn new(params: &LaxParams, k: usize) -> Self {
        let (lam, om) = (params.lambda, params.omega);
        let ku = C64::new(k as f64 * params.u, 0.0);
        let one_m_l2 = ONE - lam * lam;
        XkBlock {
            k,
            matrix: [
                [-(om + ku) * om, ONE - (om + ku) * om * one_m_l2],
                [-ku * om, ONE - ku * om * one_m_l2],
            ],
        }
    }

    pub fn entry(&self, row: Sign, col: Sign) -> C64 {
        let i = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::Plus => 1,
        };
        self.matrix[i(row)][i(col)]
    }

    pub fn det(&self) -> C64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// Inverse of a 2x2 matrix; `None` when singular.
fn invert2(m: [[C64; 2]; 2]) -> Option<[[C64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == ZERO || !det.is_finite() {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

fn sign_pow(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Accumulates entries addressed by vertex, silently dropping anything that
/// falls outside the truncated space.
struct VertexBuilder<'a> {
    space: &'a AuxSpace,
    inner: SparseBuilder,
}

impl<'a> VertexBuilder<'a> {
    fn new(space: &'a AuxSpace) -> Self {
        VertexBuilder {
            space,
            inner: SparseBuilder::new(space.dim(), space.dim()),
        }
    }

    fn put(&mut self, row: AuxVertex, col: AuxVertex, value: C64) {
        if let (Some(i), Some(j)) = (self.space.index(row), self.space.index(col)) {
            self.inner.add(i, j, value);
        }
    }

    fn diag(&mut self, v: AuxVertex, value: C64) {
        self.put(v, v, value);
    }

    fn build(self) -> SparseOperator {
        self.inner.build()
    }
}

use Sign::{Minus as M, Plus as P};

fn int(k: usize, s: Sign) -> AuxVertex {
    AuxVertex::int(k, s)
}

/// `k + 1/2`
fn half(k: usize, s: Sign) -> AuxVertex {
    AuxVertex::half(k, s)
}

/// Range of plaquette indices that covers every vertex of the space.
fn span(space: &AuxSpace) -> std::ops::Range<usize> {
    0..space.cutoff() + 2
}

/// The four S components `(S+, S-, S0, Sz)`.
pub fn build_s(space: &AuxSpace, params: &LaxParams) -> [SparseOperator; 4] {
    let lam = params.lambda;
    let r2 = C64::new(SQRT2, 0.0);
    let mut sp = VertexBuilder::new(space);
    let mut sm = VertexBuilder::new(space);
    let mut s0 = VertexBuilder::new(space);
    let mut sz = VertexBuilder::new(space);
    for k in span(space) {
        let sgn = sign_pow(k);
        sp.put(int(k, P), half(k, P), r2);
        sp.put(half(k, M), int(k + 1, M), r2);
        sm.put(half(k, P), int(k, P), r2 * sgn);
        sm.put(int(k + 1, M), half(k, M), r2 * sgn);

        for v in [int(2 * k, P), half(2 * k, P), int(2 * k + 1, M), half(2 * k, M)] {
            s0.diag(v, ONE);
        }
        if k >= 1 {
            for v in [half(2 * k - 1, P), int(2 * k, M)] {
                s0.diag(v, lam);
            }
            for v in [int(2 * k - 1, P), half(2 * k - 1, P), int(2 * k, M), half(2 * k - 1, M)] {
                sz.diag(v, ONE);
            }
        }
        for v in [half(2 * k, P), int(2 * k + 1, M)] {
            sz.diag(v, lam);
        }
    }
    [sp.build(), sm.build(), s0.build(), sz.build()]
}

/// `T^t = G S^t G`.
pub fn build_t(flip: &SparseOperator, s: &[SparseOperator; 4]) -> [SparseOperator; 4] {
    std::array::from_fn(|t| &(flip * &s[t]) * flip)
}

/// The interaction operator `X` and its blocks `X_0 ..= X_K`.
pub fn build_x(space: &AuxSpace, params: &LaxParams) -> (SparseOperator, Vec<XkBlock>) {
    let mut x = VertexBuilder::new(space);
    x.diag(int(0, P), ONE);
    let blocks: Vec<XkBlock> = (0..=space.cutoff()).map(|k| XkBlock::new(params, k)).collect();
    for b in blocks.iter().skip(1) {
        let sgn = sign_pow(b.k);
        for (a, sa) in [M, P].into_iter().enumerate() {
            for (c, sc) in [M, P].into_iter().enumerate() {
                x.put(int(b.k, sa), int(b.k, sc), b.matrix[a][c] * sgn);
            }
        }
    }
    for k in span(space) {
        let v = params.omega * sign_pow(k);
        x.diag(half(k, P), v);
        x.diag(half(k, M), v);
    }
    (x.build(), blocks)
}

/// Diagonal `Y = -2 lambda u` on every integer-level vertex.
pub fn build_y(space: &AuxSpace, params: &LaxParams) -> SparseOperator {
    let v = -2.0 * params.lambda * params.u;
    let mut y = VertexBuilder::new(space);
    for k in span(space) {
        y.diag(int(k, P), v);
        y.diag(int(k + 1, M), v);
    }
    y.build()
}

/// The products `(S'^s X, X S`^s)` for `s = +, -, 0, z`. The two diagonal
/// components coincide.
pub fn build_hatted(
    space: &AuxSpace,
    params: &LaxParams,
) -> ([SparseOperator; 4], [SparseOperator; 4]) {
    let (lam, om) = (params.lambda, params.omega);
    let e = |k: usize, a: Sign, b: Sign| XkBlock::new(params, k).entry(a, b);
    let r = 2.0 * SQRT2;

    let mut apx = VertexBuilder::new(space);
    let mut amx = VertexBuilder::new(space);
    let mut xgp = VertexBuilder::new(space);
    let mut xgm = VertexBuilder::new(space);
    for k in 1..space.cutoff() + 2 {
        let sgn = sign_pow(k);
        apx.put(int(k, M), half(k, P), -r * sgn * e(k, M, P));
        amx.put(int(k, P), half(k - 1, M), -r * e(k, P, M));
        xgp.put(half(k - 1, M), int(k, P), r * sgn * e(k, M, P));
        xgm.put(half(k, P), int(k, M), -r * e(k, P, M));
    }

    let two = C64::new(2.0, 0.0);
    let mut a0 = VertexBuilder::new(space);
    let mut az = VertexBuilder::new(space);
    for k in span(space) {
        if k >= 1 {
            a0.diag(int(2 * k - 1, P), two * om);
            a0.diag(int(2 * k, M), -two * om);
            a0.diag(half(2 * k - 1, P), -two * e(2 * k - 1, P, P));
            a0.diag(half(2 * k - 1, M), -two * e(2 * k, M, M));
            az.diag(int(2 * k - 1, P), two * lam * om);
            az.diag(half(2 * k - 1, M), -two * lam * e(2 * k, M, M));
        }
        a0.diag(int(2 * k, P), -two * lam * om);
        a0.diag(half(2 * k, M), two * lam * e(2 * k + 1, M, M));
        az.diag(int(2 * k + 1, M), two * om);
        az.diag(int(2 * k, P), -two * om);
        az.diag(half(2 * k, P), two * e(2 * k, P, P));
        az.diag(half(2 * k, M), two * e(2 * k + 1, M, M));
    }
    let a0 = a0.build();
    let az = az.build();
    (
        [apx.build(), amx.build(), a0.clone(), az.clone()],
        [xgp.build(), xgm.build(), a0, az],
    )
}

/// Inverts an operator that is block diagonal on `{k-, k+}` integer pairs and
/// diagonal elsewhere.
pub fn invert_x(space: &AuxSpace, x: &SparseOperator) -> Result<SparseOperator> {
    let n = space.dim();
    let mut inv = SparseBuilder::new(n, n);
    let mut handled = vec![false; n];
    for i in 0..n {
        if handled[i] {
            continue;
        }
        let v = space.vertex(i);
        if v.is_half_integer() || v.twice_level == 0 {
            let d = x.get(i, i);
            if d == ZERO {
                return Err(Error::SingularRepresentation(format!(
                    "X vanishes at vertex {v} (omega = 0?)"
                )));
            }
            inv.add(i, i, ONE / d);
            handled[i] = true;
            continue;
        }
        let k = v.twice_level / 2;
        let im = space.index(int(k, M)).expect("integer pair present");
        let ip = space.index(int(k, P)).expect("integer pair present");
        let block = [[x.get(im, im), x.get(im, ip)], [x.get(ip, im), x.get(ip, ip)]];
        let b = invert2(block).ok_or_else(|| {
            Error::SingularRepresentation(format!("X block at level {k} is singular"))
        })?;
        for (a, ia) in [im, ip].into_iter().enumerate() {
            for (c, ic) in [im, ip].into_iter().enumerate() {
                inv.add(ia, ic, b[a][c]);
            }
        }
        handled[im] = true;
        handled[ip] = true;
    }
    Ok(inv.build())
}

/// Diagonal of the gauge transformation `|k+> -> xi |k+>`, `|k-> -> |k->/xi`
/// for `k >= 1`.
pub fn gauge_diagonal(space: &AuxSpace, xi: C64) -> Vec<C64> {
    space
        .vertices()
        .iter()
        .map(|v| {
            if v.is_half_integer() || v.twice_level == 0 {
                ONE
            } else if v.sign == P {
                xi
            } else {
                ONE / xi
            }
        })
        .collect()
}

/// Every operator of the Lax family.
///
/// Fields are public so that tests can perturb a component and call
/// [`LaxFamily::assemble`] to propagate the change into the derived
/// operators.
#[derive(Debug, Clone)]
pub struct LaxFamily {
    pub params: LaxParams,
    pub space: AuxSpace,
    pub flip: SparseOperator,
    pub gauge: C64,
    pub blocks: Vec<XkBlock>,
    pub s: [SparseOperator; 4],
    pub t: [SparseOperator; 4],
    pub x: SparseOperator,
    pub y: SparseOperator,
    pub s_acute_x: [SparseOperator; 4],
    pub x_s_grave: [SparseOperator; 4],

    pub x_inv: SparseOperator,
    pub t_acute_x: [SparseOperator; 4],
    pub x_t_grave: [SparseOperator; 4],
    pub s_acute: [SparseOperator; 4],
    pub s_grave: [SparseOperator; 4],
    pub t_acute: [SparseOperator; 4],
    pub t_grave: [SparseOperator; 4],
    /// `L^{st} = S^s T^t X` at index `4s+t`.
    pub l: Vec<SparseOperator>,
    /// Derivative components at index `4s+t`.
    pub l_tilde: Vec<SparseOperator>,
}

#[derive(Debug, Clone)]
pub struct LaxBuilder {
    params: LaxParams,
    cutoff: usize,
    flip: Option<SparseOperator>,
    gauge: C64,
}

impl LaxBuilder {
    pub fn new(params: LaxParams, cutoff: usize) -> Self {
        LaxBuilder {
            params,
            cutoff,
            flip: None,
            gauge: ONE,
        }
    }

    /// Replaces the auxiliary reflection (used to seed faults).
    pub fn flip(mut self, flip: SparseOperator) -> Self {
        self.flip = Some(flip);
        self
    }

    pub fn gauge(mut self, xi: C64) -> Self {
        self.gauge = xi;
        self
    }

    pub fn build(self) -> Result<LaxFamily> {
        let params = self.params;
        if params.omega == ZERO {
            return Err(Error::SingularRepresentation(
                "omega = 0 makes X non-invertible".into(),
            ));
        }
        if self.gauge == ZERO {
            return Err(Error::InvalidArgument("gauge parameter must be nonzero".into()));
        }
        let space = AuxSpace::new(self.cutoff)?;
        let flip = match self.flip {
            Some(f) if f.shape() != (space.dim(), space.dim()) => {
                return Err(Error::InvalidArgument(format!(
                    "flip operator has shape {:?}, space dimension is {}",
                    f.shape(),
                    space.dim()
                )))
            }
            Some(f) => f,
            None => space.spin_flip(),
        };
        let d = gauge_diagonal(&space, self.gauge);
        let g = |op: SparseOperator| op.diagonal_similarity(&d);

        let s = build_s(&space, &params).map(g);
        let t = build_t(&flip, &s);
        let (x, blocks) = build_x(&space, &params);
        let x = g(x);
        let y = g(build_y(&space, &params));
        let (sax, xsg) = build_hatted(&space, &params);
        let zero = SparseOperator::zeros(space.dim(), space.dim());
        let empty4 = || std::array::from_fn(|_| zero.clone());
        let mut fam = LaxFamily {
            params,
            flip,
            gauge: self.gauge,
            blocks,
            s,
            t,
            x,
            y,
            s_acute_x: sax.map(g),
            x_s_grave: xsg.map(g),
            x_inv: zero.clone(),
            t_acute_x: empty4(),
            x_t_grave: empty4(),
            s_acute: empty4(),
            s_grave: empty4(),
            t_acute: empty4(),
            t_grave: empty4(),
            l: Vec::new(),
            l_tilde: Vec::new(),
            space,
        };
        fam.assemble()?;
        Ok(fam)
    }
}

impl LaxFamily {
    /// Builds the family at cutoff `K` with default reflection and gauge.
    pub fn new(params: LaxParams, cutoff: usize) -> Result<Self> {
        LaxBuilder::new(params, cutoff).build()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Recomputes every derived operator from `s, t, x, y` and the hatted
    /// products.
    pub fn assemble(&mut self) -> Result<()> {
        let g = &self.flip;
        let conj = |a: &SparseOperator| &(g * a) * g;
        self.x_inv = invert_x(&self.space, &self.x)?;
        self.t_acute_x = std::array::from_fn(|i| conj(&self.s_acute_x[i]));
        self.x_t_grave = std::array::from_fn(|i| conj(&self.x_s_grave[i]));
        self.s_acute = std::array::from_fn(|i| &self.s_acute_x[i] * &self.x_inv);
        self.s_grave = std::array::from_fn(|i| &self.x_inv * &self.x_s_grave[i]);
        self.t_acute = std::array::from_fn(|i| conj(&self.s_acute[i]));
        self.t_grave = std::array::from_fn(|i| conj(&self.s_grave[i]));

        let half = C64::new(0.5, 0.0);
        self.l = Vec::with_capacity(16);
        self.l_tilde = Vec::with_capacity(16);
        for s in 0..4 {
            for t in 0..4 {
                let st = &self.s[s] * &self.t[t];
                self.l.push(&st * &self.x);
                let terms = [
                    &self.s[s] * &self.t_acute[t],
                    &self.t[t] * &self.s_acute[s],
                    &self.s_grave[s] * &self.t[t],
                    &self.t_grave[t] * &self.s[s],
                    -&(&self.y * &st),
                    -&(&st * &self.y),
                ];
                let sum = terms.iter().fold(SparseOperator::zeros(self.dim(), self.dim()), |a, b| &a + b);
                self.l_tilde.push(&(&sum * &self.x) * half);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> LaxParams {
        LaxParams::new(C64::new(0.7, 0.3), C64::new(0.5, -0.4), 1.3)
    }

    fn at(space: &AuxSpace, label: &str) -> usize {
        space.index(AuxVertex::parse(label).unwrap()).unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-13
    }

    #[test]
    fn s_entries() {
        let f = LaxFamily::new(p(), 3).unwrap();
        let sp = &f.space;
        assert!(close(f.s[0].get(at(sp, "0+"), at(sp, "1/2+")), C64::new(SQRT2, 0.0)));
        assert!(close(f.s[1].get(at(sp, "3/2+"), at(sp, "1+")), C64::new(-SQRT2, 0.0)));
        assert_eq!(f.s[3].get(0, 0), ZERO);
        assert!(close(f.s[3].get(at(sp, "1-"), at(sp, "1-")), p().lambda));
    }

    #[test]
    fn t_entries() {
        let f = LaxFamily::new(p(), 3).unwrap();
        let sp = &f.space;
        assert!(close(f.t[0].get(0, at(sp, "1/2-")), C64::new(SQRT2, 0.0)));
        assert!(close(f.t[2].get(at(sp, "1/2+"), at(sp, "1/2+")), ONE));
        let c = f.s[0].commutator(&f.t[1]).unwrap();
        assert!(c.norms().max_abs < 1e-14);
    }

    #[test]
    fn x_entries() {
        let q = p();
        let f = LaxFamily::new(q, 3).unwrap();
        let sp = &f.space;
        assert!(close(f.x.get(at(sp, "1/2+"), at(sp, "1/2+")), q.omega));
        assert!(close(f.x.get(at(sp, "3/2-"), at(sp, "3/2-")), -q.omega));
        let expect = -(ONE - (q.omega + q.u) * q.omega * (ONE - q.lambda * q.lambda));
        assert!(close(f.x.get(at(sp, "1-"), at(sp, "1+")), expect));
        assert_eq!(f.blocks[0].entry(P, P), ONE);
        assert!(close(f.blocks[0].entry(M, M), -q.omega * q.omega));
    }

    #[test]
    fn y_entries() {
        let q = p();
        let f = LaxFamily::new(q, 3).unwrap();
        assert!(close(f.y.get(0, 0), -2.0 * q.lambda * q.u));
        let i = at(&f.space, "1/2-");
        assert_eq!(f.y.get(i, i), ZERO);
        assert!(f.x.commutator(&f.y).unwrap().norms().max_abs < 1e-14);
    }

    #[test]
    fn hatted_entries() {
        let q = p();
        let f = LaxFamily::new(q, 3).unwrap();
        let sp = &f.space;
        // the off-diagonal block entry enters S'+X, see the decisions notes
        let x01 = ONE - (q.omega + q.u) * q.omega * (ONE - q.lambda * q.lambda);
        let got = f.s_acute_x[0].get(at(sp, "1-"), at(sp, "3/2+"));
        assert!(close(got, 2.0 * SQRT2 * x01));
        assert_eq!(f.s_acute_x[2], f.x_s_grave[2]);
        let i = at(sp, "1/2+");
        assert!(close(f.s_acute_x[3].get(i, i), C64::new(2.0, 0.0)));
    }

    #[test]
    fn lax_vacuum_entry_and_inverse() {
        let f = LaxFamily::new(p(), 4).unwrap();
        assert!(close(f.l[10].get(0, 0), ONE));
        let id = &f.x_inv * &f.x;
        assert!(id.max_abs_diff(&SparseOperator::identity(f.dim())).unwrap() < 1e-13);
        for k in 1..=4 {
            let sp = &f.space;
            let (im, ip) = (at(sp, &format!("{k}-")), at(sp, &format!("{k}+")));
            let b = [[f.x_inv.get(im, im), f.x_inv.get(im, ip)], [f.x_inv.get(ip, im), f.x_inv.get(ip, ip)]];
            let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
            let expect = -ONE / (q_om2(&f));
            assert!((det - expect).norm() < 1e-12 * expect.norm());
        }
    }

    fn q_om2(f: &LaxFamily) -> C64 {
        f.params.omega * f.params.omega
    }

    #[test]
    fn omega_zero_rejected() {
        let q = LaxParams::new(ONE, ZERO, 1.0);
        assert!(matches!(
            LaxFamily::new(q, 2),
            Err(Error::SingularRepresentation(_))
        ));
    }

    #[test]
    fn spin_flip_commutes_with_x_and_y() {
        let f = LaxFamily::new(p(), 4).unwrap();
        let g = &f.flip;
        assert_eq!(&(g * &f.x) * g, f.x);
        assert_eq!(&(g * &f.y) * g, f.y);
    }

    #[test]
    fn block_recurrences() {
        let q = p();
        let om = q.omega;
        for k in 0..=20 {
            let b0 = XkBlock::new(&q, k);
            let b1 = XkBlock::new(&q, k + 1);
            let scale = b0.matrix.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
            assert!((b0.det() + om * om).norm() < 1e-12 * scale * scale);
            assert!((b1.matrix[0][0] - b0.matrix[0][0] + q.u * om).norm() < 1e-12 * scale);
            let d = q.u * om * (ONE - q.lambda * q.lambda);
            assert!((b1.matrix[1][1] - b0.matrix[1][1] + d).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn center_condition_and_level_diagonal_anticommutator() {
        let f = LaxFamily::new(p(), 5).unwrap();
        let c = f.s[0].anticommutator(&f.s[1]).unwrap();
        for (i, j, _) in c.iter() {
            assert_eq!(f.space.twice_level(i), f.space.twice_level(j));
        }
        let keep = f.space.indices_up_to(4);
        for op in f.s.iter().chain(f.t.iter()) {
            let r = c.commutator(op).unwrap().submatrix(&keep, &keep);
            assert!(r.norms().max_abs < 1e-12);
        }
    }

    #[test]
    fn gauge_changes_offdiagonal_blocks_only() {
        let xi = C64::new(1.7, -0.4);
        let f0 = LaxFamily::new(p(), 3).unwrap();
        let f1 = LaxBuilder::new(p(), 3).gauge(xi).build().unwrap();
        let sp = &f0.space;
        let (im, ip) = (at(sp, "2-"), at(sp, "2+"));
        assert!(close(f1.x.get(ip, im), f0.x.get(ip, im) * xi * xi));
        assert!(close(f1.x.get(im, im), f0.x.get(im, im)));
        assert!(close(f1.l[10].get(0, 0), ONE));
    }
}
