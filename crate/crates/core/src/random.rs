//! Seeded random matrices and measures for property campaigns.
//!
//! Every campaign trial draws from `ChaCha8Rng::seed_from_u64(seed)` switched to
//! stream `trial`, so trials are reproducible individually and in any order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use num_complex::Complex64;

use crate::error::Result;
use crate::matrix::{CMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use crate::measure::MeasureSpec;

/// Generator for trial `trial` of a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Complex Ginibre matrix with i.i.d. entries of unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// Orthonormal columns from the QR factorization of `g`, with the phases of
/// `diag(R)` moved into `Q` so the result is Haar distributed for Ginibre `g`.
pub fn orthonormalize(g: CMatrix) -> CMatrix {
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..q.ncols().min(r.nrows()) {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut column = q.column_mut(k);
        column *= phase;
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    let g = complex_gaussian(rng, dim, dim);
    HermitianMatrix::symmetrized((&g + g.adjoint()).scale(0.5))
}

/// Wishart-type `G G*/d + δ I` with `δ` drawn from `[0.05, 0.5]`.
pub fn random_pd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PositiveDefiniteMatrix {
    let g = complex_gaussian(rng, dim, dim);
    let delta = rng.random_range(0.05..0.5);
    let m = &g * g.adjoint() / Complex64::new(dim as f64, 0.0) + CMatrix::identity(dim, dim).scale(delta);
    PositiveDefiniteMatrix::new(HermitianMatrix::symmetrized(m)).expect("shifted Wishart matrix is positive definite")
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    orthonormalize(complex_gaussian(rng, dim, dim))
}

/// Diagonal matrix with log-uniform entries in `[0.2, 5]`.
pub fn random_diagonal_pd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PositiveDefiniteMatrix {
    let bound = 5f64.ln();
    let entries: Vec<f64> = (0..dim).map(|_| rng.random_range(-bound..bound).exp()).collect();
    PositiveDefiniteMatrix::from_diagonal(&entries).expect("positive diagonal")
}

/// Random probability weights bounded away from zero.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // absorb rounding so the weights sum to one to machine precision
    let head: f64 = weights[..m - 1].iter().sum();
    weights[m - 1] = 1.0 - head;
    weights
}

/// A discrete measure `μ` on `(0, 1)` and a mean-preserving spread `ν` of it,
/// so that `μ ≼ ν` in the convex order.
pub fn random_convex_order_pair<R: Rng + ?Sized>(rng: &mut R) -> (MeasureSpec, MeasureSpec) {
    let atoms = rng.random_range(1..=3);
    let weights = random_weights(rng, atoms);
    let mut lower = Vec::with_capacity(atoms);
    let mut upper = Vec::with_capacity(2 * atoms);
    for w in weights {
        let x: f64 = rng.random_range(0.05..0.95);
        let left = x * rng.random_range(0.0..1.0);
        let right = x + (1.0 - x) * rng.random_range(0.0..1.0);
        lower.push((x, w));
        if right - left < 1e-9 {
            upper.push((x, w));
        } else {
            // split x into {left, right} keeping the barycenter at x
            let p_right = (x - left) / (right - left);
            upper.push((left, w * (1.0 - p_right)));
            upper.push((right, w * p_right));
        }
    }
    let upper = upper.into_iter().filter(|&(_, w)| w > 0.0).collect();
    (MeasureSpec::Discrete { atoms: lower }, MeasureSpec::Discrete { atoms: upper })
}

/// Random ensemble of `m` matrices in dimension `dim`.
pub fn random_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    m: usize,
    diagonal: bool,
) -> Result<crate::barycenter::WeightedEnsemble> {
    let matrices = (0..m)
        .map(|_| if diagonal { random_diagonal_pd(rng, dim) } else { random_pd(rng, dim) })
        .collect();
    crate::barycenter::WeightedEnsemble::new(matrices, random_weights(rng, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::convex_order_leq;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_pd(&mut trial_rng(42, 3), 3);
        let b = random_pd(&mut trial_rng(42, 3), 3);
        let c = random_pd(&mut trial_rng(42, 4), 3);
        assert_eq!(a.as_matrix(), b.as_matrix());
        assert_ne!(a.as_matrix(), c.as_matrix());
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(&mut trial_rng(7, 0), 4);
        let defect = (u.adjoint() * &u - CMatrix::identity(4, 4)).norm();
        assert!(defect < 1e-12);
    }

    #[test]
    fn weights_are_normalized() {
        let mut rng = trial_rng(1, 1);
        for m in 1..6 {
            let w = random_weights(&mut rng, m);
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
            assert!(w.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn spreads_dominate_in_convex_order() {
        let mut rng = trial_rng(9, 0);
        for _ in 0..100 {
            let (mu, nu) = random_convex_order_pair(&mut rng);
            mu.validate().unwrap();
            nu.validate().unwrap();
            assert!(convex_order_leq(&mu, &nu).unwrap());
        }
    }
}
