//! Complex Hermitian and positive definite matrices.
//!
//! Every matrix function in the crate goes through a Hermitian
//! eigendecomposition: `f(H) = U diag(f(λ)) U*`. Constructors symmetrize
//! their input as `(H + H*)/2`, so products that are Hermitian in exact
//! arithmetic can be wrapped without accumulating skew parts.

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix used for intermediate (not necessarily Hermitian) algebra.
pub type CMatrix = DMatrix<Complex64>;

/// Relative floor on the smallest eigenvalue accepted by [`PositiveDefiniteMatrix::new`].
pub const PD_RELATIVE_FLOOR: f64 = 1e-12;

/// Condition number above which the inverse and square-root helpers flag a warning.
///
/// Construction already caps the condition number at `1 / PD_RELATIVE_FLOOR`,
/// so the warning sits one decade below that cap.
pub const CONDITION_WARNING_THRESHOLD: f64 = 1e11;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// A complex Hermitian matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianMatrix {
    data: CMatrix,
}

/// A Hermitian matrix whose spectrum is strictly positive.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct PositiveDefiniteMatrix {
    inner: HermitianMatrix,
}

/// Eigenvalues in ascending order together with a unitary matrix of eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianMatrix {
    /// Wraps a square matrix, replacing it by its Hermitian part.
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self::symmetrized(data))
    }

    pub(crate) fn symmetrized(data: CMatrix) -> Self {
        let adjoint = data.adjoint();
        Self {
            data: (data + adjoint).scale(0.5),
        }
    }

    /// Builds a matrix from real row-major rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Largest modulus of an imaginary part among the entries.
    pub fn max_imaginary(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: self.data.scale(factor),
        }
    }

    /// Real Hilbert-Schmidt inner product `Tr(self · other)`.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        // Tr(AB) = sum_ij A_ij B_ji, real for Hermitian A, B.
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[(i, j)] * other.data[(j, i)]).re;
            }
        }
        acc
    }

    /// `M · self · M*`.
    pub fn congruence(&self, m: &CMatrix) -> Self {
        Self::symmetrized(m * &self.data * m.adjoint())
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues[0])
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[(i, j)].norm() <= tol))
    }

    pub fn diagonal_part(&self) -> Self {
        let n = self.dim();
        Self {
            data: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(self.data[(i, i)].re, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.data)
    }
}

impl fmt::Debug for PositiveDefiniteMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PositiveDefiniteMatrix{}", self.inner.data)
    }
}

impl PositiveDefiniteMatrix {
    /// Accepts `h` when its smallest eigenvalue exceeds `1e-12 · λ_max`.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let decomposition = h.eig()?;
        let min = decomposition.eigenvalues[0];
        let max = *decomposition.eigenvalues.last().unwrap();
        if !(max > 0.0) || min <= PD_RELATIVE_FLOOR * max {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(Self { inner: h })
    }

    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(data)?)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(rows)?)
    }

    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diagonal)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: HermitianMatrix::identity(dim),
        }
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.inner
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.inner
    }

    /// Cheap positivity test used to reject trial points in line searches.
    pub fn cholesky_ok(h: &HermitianMatrix) -> bool {
        h.as_matrix().clone().cholesky().is_some()
    }

    pub fn sqrt(&self) -> Result<PositiveDefiniteMatrix> {
        self.spectral_pd(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> Result<PositiveDefiniteMatrix> {
        self.spectral_pd(|x| 1.0 / x.sqrt())
    }

    pub fn inv(&self) -> Result<PositiveDefiniteMatrix> {
        self.spectral_pd(|x| 1.0 / x)
    }

    /// `self^{-1/2} · other · self^{-1/2}`.
    pub fn whiten(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        let inv_sqrt = self.inv_sqrt()?;
        Ok(other.congruence(inv_sqrt.as_matrix()))
    }

    fn spectral_pd(&self, f: impl Fn(f64) -> f64) -> Result<PositiveDefiniteMatrix> {
        let h = apply_spectral(self, f)?;
        // Spectrum is mapped pointwise, so positivity is inherited.
        Ok(PositiveDefiniteMatrix { inner: h })
    }

    pub(crate) fn assume_pd(h: HermitianMatrix) -> Self {
        Self { inner: h }
    }
}

impl Deref for PositiveDefiniteMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.inner
    }
}

impl From<PositiveDefiniteMatrix> for HermitianMatrix {
    fn from(p: PositiveDefiniteMatrix) -> Self {
        p.inner
    }
}

impl TryFrom<HermitianMatrix> for PositiveDefiniteMatrix {
    type Error = Error;
    fn try_from(h: HermitianMatrix) -> Result<Self> {
        Self::new(h)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix {
            data: -&self.data,
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U · diag(values) · U*`.
    pub fn reassemble_with(&self, values: &[f64]) -> HermitianMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::symmetrized(scaled * u.adjoint())
    }

    pub fn reassemble(&self) -> HermitianMatrix {
        self.reassemble_with(&self.eigenvalues)
    }

    /// Applies `f` to each eigenvalue; fails on the first non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| {
                let v = f(l);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SpectralDomain { eigenvalue: l })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.reassemble_with(&values))
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let eigen = h
        .data
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or_else(|| Error::Eigensolver {
            matrix: format!("{}", h.data),
        })?;
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eigen.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| eigen.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `f(H) = U diag(f(λ_i)) U*`.
pub fn apply_spectral(h: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    h.eig()?.map(f)
}

/// A value together with the condition number of the matrix it was derived from.
#[derive(Clone, Debug)]
pub struct Conditioned<T> {
    pub value: T,
    pub condition_number: f64,
}

impl<T> Conditioned<T> {
    pub fn ill_conditioned(&self) -> bool {
        self.condition_number > CONDITION_WARNING_THRESHOLD
    }

    pub fn into_inner(self) -> T {
        self.value
    }
}

fn conditioned(
    a: &PositiveDefiniteMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<Conditioned<PositiveDefiniteMatrix>> {
    let decomposition = a.eig()?;
    let condition_number = decomposition.eigenvalues[a.dim() - 1] / decomposition.eigenvalues[0];
    let value = PositiveDefiniteMatrix::assume_pd(decomposition.map(f)?);
    Ok(Conditioned {
        value,
        condition_number,
    })
}

pub fn sqrt_pd(a: &PositiveDefiniteMatrix) -> Result<Conditioned<PositiveDefiniteMatrix>> {
    conditioned(a, f64::sqrt)
}

pub fn inv_sqrt_pd(a: &PositiveDefiniteMatrix) -> Result<Conditioned<PositiveDefiniteMatrix>> {
    conditioned(a, |x| 1.0 / x.sqrt())
}

pub fn inv_pd(a: &PositiveDefiniteMatrix) -> Result<Conditioned<PositiveDefiniteMatrix>> {
    conditioned(a, |x| 1.0 / x)
}

pub(crate) fn check_same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `A ≤ B` in the Löwner order, i.e. `λ_min(B − A) ≥ −tol`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(loewner_slack(a, b)? >= -tol)
}

/// Smallest eigenvalue of `B − A`.
pub fn loewner_slack(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    (b - a).min_eigenvalue()
}

pub fn frobenius_dist(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok((a - b).frobenius_norm())
}

/// Thompson metric `max_i |log λ_i(A^{-1/2} B A^{-1/2})|`.
pub fn thompson_dist(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    let spectrum = a.whiten(b)?.eig()?.eigenvalues;
    let lo = spectrum[0];
    let hi = spectrum[spectrum.len() - 1];
    if lo <= 0.0 {
        return Err(Error::Domain(format!(
            "whitened matrix has non-positive eigenvalue {lo:e}"
        )));
    }
    Ok(lo.ln().abs().max(hi.ln().abs()))
}

pub fn is_positive_definite(h: &HermitianMatrix, tol: f64) -> bool {
    h.min_eigenvalue().is_ok_and(|m| m > tol)
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    let ab = a.as_matrix() * b.as_matrix();
    let ba = b.as_matrix() * a.as_matrix();
    Ok((ab - ba).iter().map(Complex64::norm_sqr).sum::<f64>().sqrt())
}

/// Fréchet derivative `Df(X)[Y]` by the Daleckii-Krein formula
/// `U (Γ ∘ (U* Y U)) U*` with `Γ_ij = f^{[1]}(λ_i, λ_j)`.
///
/// Nearly coincident eigenvalue pairs use `f'` at their midpoint.
pub fn frechet_derivative(
    decomposition: &SpectralDecomposition,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
    direction: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let n = decomposition.dim();
    if direction.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: direction.dim(),
        });
    }
    let lambda = &decomposition.eigenvalues;
    let scale = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(f64::MIN_POSITIVE);
    let f_values: Vec<f64> = lambda.iter().map(|&l| f(l)).collect();
    let u = &decomposition.eigenvectors;
    let mut inner = u.adjoint() * direction.as_matrix() * u;
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (lambda[i], lambda[j]);
            let gamma = if (li - lj).abs() <= 1e-7 * scale {
                f_prime(0.5 * (li + lj))
            } else {
                (f_values[i] - f_values[j]) / (li - lj)
            };
            if !gamma.is_finite() {
                return Err(Error::SpectralDomain { eigenvalue: li });
            }
            inner[(i, j)] *= gamma;
        }
    }
    Ok(HermitianMatrix::symmetrized(u * inner * u.adjoint()))
}

/// JSON wire form `{"dim": d, "re": [[..]], "im": [[..]]}`; `im` may be omitted.
///
/// Rectangular matrices (Kraus operators) use `rows`/`cols` instead of `dim`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (r, c) = m.shape();
        let re = (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..r).map(|i| (0..c).map(|j| m[(i, j)].im).collect()).collect();
        let square = r == c;
        Self {
            dim: square.then_some(r),
            rows: (!square).then_some(r),
            cols: (!square).then_some(c),
            re,
            im: Some(im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let (want_r, want_c) = match (self.dim, self.rows, self.cols) {
            (Some(d), None, None) => (d, d),
            (None, Some(r), Some(c)) => (r, c),
            (None, None, None) => (rows, cols),
            _ => {
                return Err(Error::InvalidArgument(
                    "matrix json must give either `dim` or both `rows` and `cols`".into(),
                ))
            }
        };
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == want_r && m.iter().all(|row| row.len() == want_c);
        if want_r == 0 || want_c == 0 || !shape_ok(&self.re) {
            return Err(Error::InvalidArgument(format!(
                "`re` does not have shape {want_r}x{want_c}"
            )));
        }
        if let Some(im) = &self.im {
            if !shape_ok(im) {
                return Err(Error::InvalidArgument(format!(
                    "`im` does not have shape {want_r}x{want_c}"
                )));
            }
        }
        Ok(CMatrix::from_fn(want_r, want_c, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        }))
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;
    fn try_from(json: MatrixJson) -> Result<Self> {
        HermitianMatrix::new(json.to_matrix()?)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> Self {
        MatrixJson::from_matrix(&h.data)
    }
}

impl TryFrom<MatrixJson> for PositiveDefiniteMatrix {
    type Error = Error;
    fn try_from(json: MatrixJson) -> Result<Self> {
        PositiveDefiniteMatrix::new(HermitianMatrix::try_from(json)?)
    }
}

impl From<PositiveDefiniteMatrix> for MatrixJson {
    fn from(p: PositiveDefiniteMatrix) -> Self {
        p.inner.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn a2() -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_real_rows(&[vec![2.5, 1.5], vec![1.5, 2.5]]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(dim: usize, entries: &[f64]) -> CMatrix {
        CMatrix::from_fn(dim, dim, |i, j| {
            let k = 2 * (i * dim + j);
            c(entries[k % entries.len()], entries[(k + 1) % entries.len()])
        })
    }

    fn pd_from(dim: usize, entries: &[f64]) -> PositiveDefiniteMatrix {
        let g = random_matrix(dim, entries);
        let m = &g * g.adjoint() + CMatrix::identity(dim, dim).scale(0.5);
        PositiveDefiniteMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn construction_symmetrizes() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.get(0, 1), c(1.0, 0.5));
        assert_eq!(h.get(1, 0), c(1.0, -0.5));
    }

    #[test]
    fn rejects_non_square_and_non_pd() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotSquare { .. })));
        let h = HermitianMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            PositiveDefiniteMatrix::new(h),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn eig_of_diagonal_and_identity() {
        let d = HermitianMatrix::from_diagonal(&[4.0, 1.0]).unwrap().eig().unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 4.0]);
        // columns are a permutation of identity columns (up to phase)
        assert_abs_diff_eq!(d.eigenvectors[(1, 0)].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.eigenvectors[(0, 1)].norm(), 1.0, epsilon = 1e-14);
        let i = HermitianMatrix::identity(3).eig().unwrap();
        assert!(i.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eig_of_a2() {
        let d = a2().eig().unwrap();
        assert_abs_diff_eq!(d.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.eigenvalues[1], 4.0, epsilon = 1e-12);
        // eigenvector for 1 is ±(1,-1)/√2, for 4 is ±(1,1)/√2 (up to a phase)
        let v0 = d.eigenvectors.column(0);
        let v1 = d.eigenvectors.column(1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!((v0[0] + v0[1]).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v0[0].norm(), s, epsilon = 1e-12);
        assert_abs_diff_eq!((v1[0] - v1[1]).norm(), 0.0, epsilon = 1e-12);
        let back = d.reassemble();
        assert!(frobenius_dist(&back, &a2()).unwrap() < 1e-12);
    }

    #[test]
    fn spectral_functions() {
        let a = PositiveDefiniteMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let r = apply_spectral(&a, f64::sqrt).unwrap();
        assert!(frobenius_dist(&r, &HermitianMatrix::from_diagonal(&[2.0, 3.0]).unwrap()).unwrap() < 1e-14);
        let id = apply_spectral(&a, |x| x).unwrap();
        assert!(frobenius_dist(&id, &a).unwrap() < 1e-13);
        let s = apply_spectral(&a2(), f64::sqrt).unwrap();
        let sq = HermitianMatrix::new(s.as_matrix() * s.as_matrix()).unwrap();
        assert!(frobenius_dist(&sq, &a2()).unwrap() < 1e-10);
    }

    #[test]
    fn spectral_domain_error_names_eigenvalue() {
        let h = HermitianMatrix::from_diagonal(&[-2.0, 1.0]).unwrap();
        match apply_spectral(&h, f64::ln) {
            Err(Error::SpectralDomain { eigenvalue }) => assert_eq!(eigenvalue, -2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt_inv_helpers() {
        let i = PositiveDefiniteMatrix::identity(3);
        for r in [sqrt_pd(&i), inv_sqrt_pd(&i), inv_pd(&i)] {
            let r = r.unwrap();
            assert!(frobenius_dist(&r.value, &i).unwrap() < 1e-15);
            assert!(!r.ill_conditioned());
        }
        let d = PositiveDefiniteMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let s = sqrt_pd(&d).unwrap().value;
        assert!(frobenius_dist(&s, &HermitianMatrix::from_diagonal(&[2.0, 1.0]).unwrap()).unwrap() < 1e-14);
        let inv = inv_pd(&d).unwrap().value;
        assert!(frobenius_dist(&inv, &HermitianMatrix::from_diagonal(&[0.25, 1.0]).unwrap()).unwrap() < 1e-14);
        let bad = PositiveDefiniteMatrix::from_diagonal(&[1.0, 1.5e-12]).unwrap();
        assert!(inv_pd(&bad).unwrap().ill_conditioned());
    }

    #[test]
    fn loewner_examples() {
        let a = HermitianMatrix::from_diagonal(&[1.0, 1.0]).unwrap();
        let b = HermitianMatrix::from_diagonal(&[2.0, 3.0]).unwrap();
        assert!(loewner_leq(&a, &a, 0.0).unwrap());
        assert!(loewner_leq(&a, &b, 0.0).unwrap());
        let p = HermitianMatrix::from_diagonal(&[0.0, 2.0]).unwrap();
        assert!(!loewner_leq(&p, &a, 1e-12).unwrap());
        assert!(!loewner_leq(&a, &p, 1e-12).unwrap());
        assert!(matches!(
            loewner_leq(&a, &HermitianMatrix::identity(3), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn metric_examples() {
        let i = PositiveDefiniteMatrix::identity(2);
        let two = PositiveDefiniteMatrix::from_diagonal(&[2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(thompson_dist(&i, &two).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert_eq!(frobenius_dist(&a2(), &a2()).unwrap(), 0.0);
        let p = PositiveDefiniteMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let q = PositiveDefiniteMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        assert_abs_diff_eq!(thompson_dist(&p, &q).unwrap(), 4f64.ln(), epsilon = 1e-13);
    }

    #[test]
    fn positive_definiteness_examples() {
        assert!(is_positive_definite(&HermitianMatrix::identity(2), 1e-12));
        assert!(!is_positive_definite(&HermitianMatrix::from_diagonal(&[1.0, 0.0]).unwrap(), 1e-12));
        assert!(is_positive_definite(&a2(), 1e-12));
    }

    #[test]
    fn json_round_trip_and_missing_imaginary() {
        let h: HermitianMatrix = serde_json::from_str(r#"{"dim":2,"re":[[2.5,1.5],[1.5,2.5]]}"#).unwrap();
        assert_eq!(h, *a2().as_hermitian());
        let text = serde_json::to_string(&h).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
        let bad: std::result::Result<HermitianMatrix, _> =
            serde_json::from_str(r#"{"dim":3,"re":[[1,0],[0,1]]}"#);
        assert!(bad.is_err());
        let not_pd: std::result::Result<PositiveDefiniteMatrix, _> =
            serde_json::from_str(r#"{"dim":2,"re":[[1,0],[0,-1]]}"#);
        assert!(not_pd.is_err());
    }

    #[test]
    fn frechet_derivative_of_square_is_anticommutator() {
        let x = a2();
        let y = HermitianMatrix::from_real_rows(&[vec![0.3, -1.0], vec![-1.0, 2.0]]).unwrap();
        let d = frechet_derivative(&x.eig().unwrap(), |t| t * t, |t| 2.0 * t, &y).unwrap();
        let expected = HermitianMatrix::new(x.as_matrix() * y.as_matrix() + y.as_matrix() * x.as_matrix()).unwrap();
        assert!(frobenius_dist(&d, &expected).unwrap() < 1e-12);
    }

    fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reassembly_is_accurate(dim in 1usize..=16, e in entries(512)) {
            let h = HermitianMatrix::new(random_matrix(dim, &e)).unwrap();
            let d = h.eig().unwrap();
            prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let err = frobenius_dist(&d.reassemble(), &h).unwrap();
            prop_assert!(err <= 1e-10 * dim as f64, "reassembly error {err}");
            let u = &d.eigenvectors;
            let gram = u.adjoint() * u - CMatrix::identity(dim, dim);
            let unitarity = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(unitarity <= 1e-12);
        }

        #[test]
        fn spectral_composition(dim in 1usize..=6, e in entries(72)) {
            let a = pd_from(dim, &e);
            let direct = apply_spectral(&a, |x| (x.sqrt() + 1.0).ln()).unwrap();
            let inner = apply_spectral(&a, |x| x.sqrt() + 1.0).unwrap();
            let nested = apply_spectral(&inner, f64::ln).unwrap();
            prop_assert!(frobenius_dist(&direct, &nested).unwrap() <= 1e-9);
            let commutes = commutator_norm(&direct, &a).unwrap();
            prop_assert!(commutes <= 1e-10 * (1.0 + a.frobenius_norm()));
        }

        #[test]
        fn whitening_gives_identity(dim in 1usize..=6, e in entries(72)) {
            let a = pd_from(dim, &e);
            let w = a.whiten(&a).unwrap();
            prop_assert!(frobenius_dist(&w, &HermitianMatrix::identity(dim)).unwrap() <= 1e-10);
            let s = a.sqrt().unwrap();
            let sq = HermitianMatrix::new(s.as_matrix() * s.as_matrix()).unwrap();
            prop_assert!(frobenius_dist(&sq, &a).unwrap() <= 1e-10 * (1.0 + a.frobenius_norm()));
        }

        #[test]
        fn loewner_order_properties(dim in 1usize..=4, e in entries(96), s1 in 0.1f64..1.0, s2 in 0.1f64..1.0) {
            let tol = 1e-12;
            let a: HermitianMatrix = pd_from(dim, &e).into();
            let b = &a + &pd_from(dim, &e[32..]).scale(s1);
            let c = &b + &pd_from(dim, &e[64..]).scale(s2);
            prop_assert!(loewner_leq(&a, &a, tol).unwrap());
            prop_assert!(loewner_leq(&a, &b, tol).unwrap() && loewner_leq(&b, &c, tol).unwrap());
            prop_assert!(loewner_leq(&a, &c, tol).unwrap());
            prop_assert!(!loewner_leq(&b, &a, tol).unwrap());
        }

        #[test]
        fn thompson_triangle_and_congruence(dim in 1usize..=4, e in entries(128)) {
            let a = pd_from(dim, &e);
            let b = pd_from(dim, &e[32..]);
            let c = pd_from(dim, &e[64..]);
            let ab = thompson_dist(&a, &b).unwrap();
            let bc = thompson_dist(&b, &c).unwrap();
            let ac = thompson_dist(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-10);
            let m = random_matrix(dim, &e[96..]) + CMatrix::identity(dim, dim).scale(2.0);
            let ma = PositiveDefiniteMatrix::new(a.congruence(&m)).unwrap();
            let mb = PositiveDefiniteMatrix::new(b.congruence(&m)).unwrap();
            prop_assert!((thompson_dist(&ma, &mb).unwrap() - ab).abs() <= 1e-8);
        }
    }
}
