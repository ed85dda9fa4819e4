//! Matrix-product operators: one site tensor is a sparse auxiliary matrix
//! whose entries are small dense physical blocks.

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, SparseBuilder, SparseOperator, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct MpoTensor {
    aux_dim: usize,
    phys_dim: usize,
    rows: Vec<Vec<(usize, DenseOperator)>>,
}

impl MpoTensor {
    /// `sum_c aux[c] (x) phys[c]`.
    pub fn from_components(aux: &[SparseOperator], phys: &[DenseOperator]) -> Result<Self> {
        if aux.is_empty() || aux.len() != phys.len() {
            return Err(Error::InvalidArgument(format!(
                "{} auxiliary components against {} physical components",
                aux.len(),
                phys.len()
            )));
        }
        let aux_dim = aux[0].nrows();
        let phys_dim = phys[0].dim();
        let mut rows: Vec<Vec<(usize, DenseOperator)>> = vec![Vec::new(); aux_dim];
        for (a, p) in aux.iter().zip(phys) {
            if a.shape() != (aux_dim, aux_dim) || p.dim() != phys_dim {
                return Err(Error::InvalidArgument(
                    "components of an MPO tensor must share dimensions".into(),
                ));
            }
            for (i, m, v) in a.iter() {
                let row = &mut rows[i];
                let scaled = p.scale(v);
                match row.binary_search_by_key(&m, |e| e.0) {
                    Ok(pos) => row[pos].1 = &row[pos].1 + &scaled,
                    Err(pos) => row.insert(pos, (m, scaled)),
                }
            }
        }
        for row in &mut rows {
            row.retain(|(_, w)| w.norms().max_abs > 0.0);
        }
        Ok(MpoTensor {
            aux_dim,
            phys_dim,
            rows,
        })
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn row(&self, i: usize) -> &[(usize, DenseOperator)] {
        &self.rows[i]
    }

    pub fn block(&self, i: usize, m: usize) -> Option<&DenseOperator> {
        self.rows[i]
            .binary_search_by_key(&m, |e| e.0)
            .ok()
            .map(|pos| &self.rows[i][pos].1)
    }

    pub fn num_blocks(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Two-site tensor with physical blocks `W1 (x) W2`.
    pub fn product(&self, rhs: &MpoTensor) -> Result<MpoTensor> {
        if self.aux_dim != rhs.aux_dim {
            return Err(Error::InvalidArgument("auxiliary dimensions differ".into()));
        }
        let mut rows = vec![Vec::new(); self.aux_dim];
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc: std::collections::BTreeMap<usize, DenseOperator> = Default::default();
            for (k, w1) in row {
                for (m, w2) in &rhs.rows[*k] {
                    let w = w1.kron(w2)?;
                    acc.entry(*m)
                        .and_modify(|e| *e = &*e + &w)
                        .or_insert(w);
                }
            }
            rows[i] = acc.into_iter().collect();
        }
        Ok(MpoTensor {
            aux_dim: self.aux_dim,
            phys_dim: self.phys_dim * rhs.phys_dim,
            rows,
        })
    }

    /// The tensor as one operator on `aux (x) phys`, auxiliary index major.
    pub fn to_operator(&self) -> SparseOperator {
        let p = self.phys_dim;
        let n = self.aux_dim * p;
        let mut b = SparseBuilder::new(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (m, w) in row {
                for a in 0..p {
                    for c in 0..p {
                        let v = w.get(a, c);
                        if v != ZERO {
                            b.add(i * p + a, m * p + c, v);
                        }
                    }
                }
            }
        }
        b.build()
    }

    /// Auxiliary matrix with entries `tr(W_im O)`.
    pub fn transfer(&self, obs: &DenseOperator) -> Result<SparseOperator> {
        if obs.dim() != self.phys_dim {
            return Err(Error::InvalidArgument(format!(
                "observable of dimension {} on physical dimension {}",
                obs.dim(),
                self.phys_dim
            )));
        }
        let mut b = SparseBuilder::new(self.aux_dim, self.aux_dim);
        let p = self.phys_dim;
        for (i, row) in self.rows.iter().enumerate() {
            for (m, w) in row {
                let mut tr = ZERO;
                for a in 0..p {
                    for c in 0..p {
                        tr += w.get(a, c) * obs.get(c, a);
                    }
                }
                b.add(i, *m, tr);
            }
        }
        Ok(b.build())
    }
}

fn check_chain(sites: &[&MpoTensor]) -> Result<(usize, usize)> {
    let first = sites
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty MPO chain".into()))?;
    if sites
        .iter()
        .any(|s| s.aux_dim != first.aux_dim || s.phys_dim != first.phys_dim)
    {
        return Err(Error::InvalidArgument("MPO sites have differing dimensions".into()));
    }
    Ok((first.aux_dim, first.phys_dim))
}

fn dense_to_triplets(w: &DenseOperator) -> Vec<(usize, usize, C64)> {
    let p = w.dim();
    let mut out = Vec::new();
    for a in 0..p {
        for c in 0..p {
            let v = w.get(a, c);
            if v != ZERO {
                out.push((a, c, v));
            }
        }
    }
    out
}

/// `<left| W_1 W_2 ... W_n |right>` as a physical operator.
///
/// `keep(remaining, m)` may discard auxiliary states that cannot return to
/// `right` within the `remaining` sites still to be absorbed.
pub fn contract_chain(
    sites: &[&MpoTensor],
    left: usize,
    right: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<SparseOperator> {
    let (aux, p) = check_chain(sites)?;
    let n = sites.len();
    let mut cur: Vec<Option<SparseOperator>> = vec![None; aux];
    cur[left] = Some(SparseOperator::identity(1));
    for (j, site) in sites.iter().enumerate() {
        let remaining = n - j - 1;
        let dim = cur.iter().flatten().next().map(|c| c.nrows()).unwrap_or(1);
        let mut next: Vec<Option<SparseBuilder>> = (0..aux).map(|_| None).collect();
        for (i, part) in cur.iter().enumerate() {
            let Some(part) = part else { continue };
            for (m, w) in site.row(i) {
                if !keep(remaining, *m) {
                    continue;
                }
                let wt = dense_to_triplets(w);
                let b = next[*m].get_or_insert_with(|| SparseBuilder::new(dim * p, dim * p));
                for (r, c, v) in part.iter() {
                    for &(a, d, x) in &wt {
                        b.add(r * p + a, c * p + d, v * x);
                    }
                }
            }
        }
        cur = next.into_iter().map(|b| b.map(SparseBuilder::build)).collect();
    }
    let total = p.pow(n as u32);
    Ok(cur[right].take().unwrap_or_else(|| SparseOperator::zeros(total, total)))
}

/// Matrix-free `(<left| W_1 ... W_n |right>) psi`.
pub fn apply_chain(
    sites: &[&MpoTensor],
    left: usize,
    right: usize,
    keep: impl Fn(usize, usize) -> bool,
    psi: &[C64],
) -> Result<Vec<C64>> {
    let (aux, p) = check_chain(sites)?;
    let n = sites.len();
    let total = p.pow(n as u32);
    if psi.len() != total {
        return Err(Error::InvalidArgument(format!(
            "vector of length {} for a {}-site chain of dimension {}",
            psi.len(),
            n,
            total
        )));
    }
    let mut cur: Vec<Option<Vec<C64>>> = vec![None; aux];
    cur[left] = Some(psi.to_vec());
    for (j, site) in sites.iter().enumerate() {
        let remaining = n - j - 1;
        let stride = p.pow(remaining as u32);
        let outer = total / (stride * p);
        let mut next: Vec<Option<Vec<C64>>> = vec![None; aux];
        for (i, part) in cur.iter().enumerate() {
            let Some(part) = part else { continue };
            for (m, w) in site.row(i) {
                if !keep(remaining, *m) {
                    continue;
                }
                let wt = dense_to_triplets(w);
                let dst = next[*m].get_or_insert_with(|| vec![ZERO; total]);
                for pre in 0..outer {
                    let base = pre * stride * p;
                    for &(a, c, x) in &wt {
                        let out = &mut dst[base + a * stride..base + (a + 1) * stride];
                        let inp = &part[base + c * stride..base + (c + 1) * stride];
                        for (o, v) in out.iter_mut().zip(inp) {
                            *o += x * v;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    Ok(cur[right].take().unwrap_or_else(|| vec![ZERO; total]))
}

/// `<left| T_1 T_2 ... T_n |right>` for auxiliary transfer matrices.
pub fn transfer_chain(transfers: &[&SparseOperator], left: usize, right: usize) -> C64 {
    let Some(first) = transfers.first() else {
        return if left == right { ONE } else { ZERO };
    };
    let mut v = vec![ZERO; first.nrows()];
    v[left] = ONE;
    for t in transfers {
        let mut next = vec![ZERO; t.ncols()];
        for (i, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for &(m, w) in t.row(i) {
                next[m] += x * w;
            }
        }
        v = next;
    }
    v[right]
}
