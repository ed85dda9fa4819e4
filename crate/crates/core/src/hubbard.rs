//! Physical ladder space, local Pauli operators and the Hubbard Hamiltonian.
//!
//! Local basis per site: `(s_up t_up, s_up t_dn, s_dn t_up, s_dn t_dn)`, with
//! the sigma qubit first. Sites are numbered from 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, SparseOperator, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    Sigma,
    Tau,
}

/// Pauli component index: `+, -, 0 (identity), z`.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
pub const ID: usize = 2;
pub const Z: usize = 3;

/// Single-qubit `sigma^s` for `s` in `(+, -, 0, z)`.
pub fn pauli(s: usize) -> DenseOperator {
    let mut p = DenseOperator::zeros(2);
    match s {
        PLUS => p.set(0, 1, ONE),
        MINUS => p.set(1, 0, ONE),
        ID => {
            p.set(0, 0, ONE);
            p.set(1, 1, ONE);
        }
        Z => {
            p.set(0, 0, ONE);
            p.set(1, 1, -ONE);
        }
        _ => panic!("pauli index {s} out of range"),
    }
    p
}

/// `sigma^s tau^t` on one site.
pub fn local(s: usize, t: usize) -> DenseOperator {
    pauli(s).kron(&pauli(t)).expect("4x4")
}

/// The sixteen local basis operators at index `4s + t`.
pub fn local_basis() -> Vec<DenseOperator> {
    (0..16).map(|a| local(a / 4, a % 4)).collect()
}

/// Single-species operator on one site.
pub fn species_local(species: Species, s: usize) -> DenseOperator {
    match species {
        Species::Sigma => local(s, ID),
        Species::Tau => local(ID, s),
    }
}

/// Local swap of the two qubits.
pub fn local_swap() -> DenseOperator {
    let mut g = DenseOperator::zeros(4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        g.set(i, j, ONE);
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalSpace {
    n_sites: usize,
}

impl PhysicalSpace {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidArgument("a chain needs at least one site".into()));
        }
        if n_sites > 12 {
            return Err(Error::TooLarge(format!("{n_sites} sites exceed the 4^12 limit")));
        }
        Ok(PhysicalSpace { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        4usize.pow(self.n_sites as u32)
    }

    fn check_site(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site: j,
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }

    /// `1 (x) ... (x) op_j (x) ... (x) 1` for a 4x4 local operator.
    pub fn embed(&self, j: usize, op: &DenseOperator) -> Result<SparseOperator> {
        self.check_site(j)?;
        let left = SparseOperator::identity(4usize.pow(j as u32 - 1));
        let right = SparseOperator::identity(4usize.pow((self.n_sites - j) as u32));
        Ok(left.kron(&SparseOperator::from_dense(op))?.kron(&right)?)
    }

    /// Product of local operators on consecutive sites starting at `j`.
    pub fn embed_string(&self, j: usize, ops: &[DenseOperator]) -> Result<SparseOperator> {
        self.check_site(j)?;
        if ops.is_empty() {
            return Ok(SparseOperator::identity(self.dim()));
        }
        self.check_site(j + ops.len() - 1)?;
        let mut acc = SparseOperator::identity(4usize.pow(j as u32 - 1));
        for op in ops {
            acc = acc.kron(&SparseOperator::from_dense(op))?;
        }
        let rest = self.n_sites - (j + ops.len() - 1);
        Ok(acc.kron(&SparseOperator::identity(4usize.pow(rest as u32)))?)
    }

    pub fn site_operator(&self, j: usize, species: Species, s: usize) -> Result<SparseOperator> {
        self.embed(j, &species_local(species, s))
    }

    /// Global species swap.
    pub fn spin_flip(&self) -> SparseOperator {
        let g = SparseOperator::from_dense(&local_swap());
        (1..self.n_sites).fold(g.clone(), |acc, _| acc.kron(&g).expect("bounded dimension"))
    }

    /// Total magnetisation of one species.
    pub fn magnetization(&self, species: Species) -> Result<SparseOperator> {
        let mut acc = SparseOperator::zeros(self.dim(), self.dim());
        for j in 1..=self.n_sites {
            acc = &acc + &self.site_operator(j, species, Z)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_sites: usize,
    pub u: f64,
    pub mu_l: f64,
    pub mu_r: f64,
}

/// Two-site hopping `2 s+ s- + 2 s- s+` of one species on a 16-dim pair.
pub fn hopping_pair(species: Species) -> DenseOperator {
    let a = species_local(species, PLUS).kron(&species_local(species, MINUS)).unwrap();
    let b = species_local(species, MINUS).kron(&species_local(species, PLUS)).unwrap();
    (&a + &b).scale(C64::new(2.0, 0.0))
}

/// Bond density `h_{j,j+1}` on a 16-dim pair, interaction split half per site.
pub fn bond_local(u: f64) -> DenseOperator {
    let zz = local(Z, Z);
    let id = DenseOperator::identity(4);
    let inter = &zz.kron(&id).unwrap() + &id.kron(&zz).unwrap();
    let hop = &hopping_pair(Species::Sigma) + &hopping_pair(Species::Tau);
    &hop + &inter.scale(C64::new(u / 2.0, 0.0))
}

/// Boundary term `u/2 sz tz + mu/2 (sz + tz)` on one site.
pub fn boundary_local(u: f64, mu: f64) -> DenseOperator {
    let zz = local(Z, Z).scale(C64::new(u / 2.0, 0.0));
    let z = (&local(Z, ID) + &local(ID, Z)).scale(C64::new(mu / 2.0, 0.0));
    &zz + &z
}

/// `h_{j,j+1}` embedded in the chain.
pub fn bond_operator(space: &PhysicalSpace, j: usize, u: f64) -> Result<SparseOperator> {
    space.check_site(j + 1)?;
    space.check_site(j)?;
    let left = SparseOperator::identity(4usize.pow(j as u32 - 1));
    let right = SparseOperator::identity(4usize.pow((space.n_sites - j - 1) as u32));
    Ok(left
        .kron(&SparseOperator::from_dense(&bond_local(u)))?
        .kron(&right)?)
}

/// The full Hamiltonian with boundary chemical potentials.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<SparseOperator> {
    if spec.n_sites < 2 {
        return Err(Error::InvalidArgument(format!(
            "the Hamiltonian needs n >= 2, got n = {}",
            spec.n_sites
        )));
    }
    let space = PhysicalSpace::new(spec.n_sites)?;
    let mut h = SparseOperator::zeros(space.dim(), space.dim());
    for j in 1..spec.n_sites {
        h = &h + &bond_operator(&space, j, spec.u)?;
    }
    h = &h + &space.embed(1, &boundary_local(spec.u, spec.mu_l))?;
    h = &h + &space.embed(spec.n_sites, &boundary_local(spec.u, spec.mu_r))?;
    Ok(h)
}
