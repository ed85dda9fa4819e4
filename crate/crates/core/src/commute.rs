//! Numerical probe of `[Omega(l, w), Omega(l', w')] = 0`.
//!
//! Results belong to a separate, non-gating tier: a residual above tolerance
//! is a finding, not an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lax::{LaxBuilder, LaxParams};
use crate::linalg::C64;
use crate::ness::{exact_cutoff, omega_from_family};
use crate::sampling::{annulus, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub lambda: C64,
    pub omega: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub n_sites: usize,
    pub cutoff_k: usize,
    pub first: LaxParams,
    pub second: LaxParams,
    /// `||[A, B]|| / (||A|| ||B||)`, Frobenius norms.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommuteOptions {
    pub cutoff: Option<usize>,
    pub tol: f64,
    pub gauge: C64,
}

impl Default for CommuteOptions {
    fn default() -> Self {
        CommuteOptions {
            cutoff: None,
            tol: crate::verify::DEFAULT_TOL,
            gauge: C64::new(1.0, 0.0),
        }
    }
}

/// Random pairs with both parameters on the sampling annulus.
pub fn sample_pairs(seed: u64, count: usize) -> Vec<(SpectralPair, SpectralPair)> {
    let mut r = rng(seed);
    let mut one = || SpectralPair {
        lambda: annulus(&mut r, 0.3, 1.5),
        omega: annulus(&mut r, 0.3, 1.5),
    };
    (0..count).map(|_| (one(), one())).collect()
}

pub fn check_commutativity(
    n_sites: usize,
    u: f64,
    pairs: &[(SpectralPair, SpectralPair)],
    opts: &CommuteOptions,
) -> Result<Vec<CommutatorReport>> {
    if n_sites == 0 {
        return Err(Error::InvalidArgument("at least one site is required".into()));
    }
    let k = opts.cutoff.unwrap_or_else(|| exact_cutoff(n_sites));
    if k < exact_cutoff(n_sites) {
        return Err(Error::CutoffMismatch(format!(
            "commutativity check needs cutoff >= {} for n = {n_sites}, got {k}",
            exact_cutoff(n_sites)
        )));
    }
    let omega = |p: &SpectralPair| -> Result<(LaxParams, crate::linalg::SparseOperator)> {
        let params = LaxParams::new(p.lambda, p.omega, u);
        let fam = LaxBuilder::new(params, k).gauge(opts.gauge).build()?;
        Ok((params, omega_from_family(&fam, n_sites)?))
    };
    pairs
        .iter()
        .map(|(a, b)| {
            let (pa, oa) = omega(a)?;
            let (pb, ob) = omega(b)?;
            let denom = oa.frobenius() * ob.frobenius();
            let residual = oa.commutator(&ob)?.frobenius() / denom;
            Ok(CommutatorReport {
                n_sites,
                cutoff_k: k,
                first: pa,
                second: pb,
                residual,
                tolerance: opts.tol,
                passed: residual <= opts.tol,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(l: (f64, f64), w: (f64, f64)) -> SpectralPair {
        SpectralPair { lambda: C64::new(l.0, l.1), omega: C64::new(w.0, w.1) }
    }

    #[test]
    fn self_commutation_and_single_site() {
        let p = pair((0.4, -0.3), (0.2, 0.9));
        let r = check_commutativity(3, 1.0, &[(p, p)], &CommuteOptions::default()).unwrap();
        assert!(r[0].residual < 1e-15);
        let q = pair((1.1, 0.2), (-0.5, 0.3));
        let r = check_commutativity(1, 2.0, &[(p, q)], &CommuteOptions::default()).unwrap();
        assert_eq!(r[0].residual, 0.0);
    }

    #[test]
    fn random_pairs_commute() {
        let pairs = sample_pairs(3, 4);
        for n in 2..=3 {
            for r in check_commutativity(n, 1.0, &pairs, &CommuteOptions::default()).unwrap() {
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn zero_lambda_slice_commutes() {
        let a = pair((0.0, 0.0), (0.6, 0.4));
        let b = pair((0.0, 0.0), (-0.3, 1.2));
        let r = check_commutativity(3, 0.5, &[(a, b)], &CommuteOptions::default()).unwrap();
        assert!(r[0].passed, "{:?}", r[0]);
    }

    #[test]
    fn residual_is_gauge_invariant() {
        let pairs = sample_pairs(11, 2);
        let plain = check_commutativity(3, 2.0, &pairs, &CommuteOptions::default()).unwrap();
        let opts = CommuteOptions { gauge: C64::new(0.7, -1.3), ..Default::default() };
        let gauged = check_commutativity(3, 2.0, &pairs, &opts).unwrap();
        for (a, b) in plain.iter().zip(&gauged) {
            assert!((a.residual - b.residual).abs() < 1e-12);
        }
    }

    #[test]
    fn low_cutoff_rejected() {
        let pairs = sample_pairs(1, 1);
        let opts = CommuteOptions { cutoff: Some(1), ..Default::default() };
        assert!(check_commutativity(4, 1.0, &pairs, &opts).is_err());
    }
}
