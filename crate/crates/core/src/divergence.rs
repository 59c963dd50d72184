//! Kubo-Ando means and generalized quantum Hellinger divergences
//! `φ(A, B) = Tr((1−c)A + cB − A σ B)`, together with the maximal f-divergence,
//! operator Bregman and commutative forms used to cross-check them.

use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorSpec};
use crate::matrix::{
    check_same_dim, commutator_norm, frechet_derivative, CMatrix, HermitianMatrix, PositiveDefiniteMatrix,
};

/// Square root and inverse square root of a fixed anchor matrix `A`, reused
/// across repeated evaluations of `A σ X`.
#[derive(Clone, Debug)]
pub(crate) struct Anchor {
    pub(crate) matrix: PositiveDefiniteMatrix,
    sqrt: CMatrix,
    inv_sqrt: CMatrix,
}

impl Anchor {
    pub(crate) fn new(a: &PositiveDefiniteMatrix) -> Result<Self> {
        let decomposition = a.eig()?;
        let sqrt = decomposition.map(f64::sqrt)?.into_matrix();
        let inv_sqrt = decomposition.map(|x| 1.0 / x.sqrt())?.into_matrix();
        Ok(Self {
            matrix: a.clone(),
            sqrt,
            inv_sqrt,
        })
    }

    /// `A^{-1/2} X A^{-1/2}`.
    pub(crate) fn whiten(&self, x: &HermitianMatrix) -> HermitianMatrix {
        x.congruence(&self.inv_sqrt)
    }

    /// `A^{1/2} M A^{1/2}`.
    pub(crate) fn unwhiten(&self, m: &HermitianMatrix) -> HermitianMatrix {
        m.congruence(&self.sqrt)
    }
}

fn require_mean(gen: &Generator) -> Result<()> {
    if gen.is_mean() {
        Ok(())
    } else {
        Err(Error::UnsupportedGenerator(format!(
            "`{}` does not generate a Kubo-Ando mean",
            gen.spec()
        )))
    }
}

/// `A σ_f B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}`.
pub fn kubo_ando_mean(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    gen: &Generator,
) -> Result<PositiveDefiniteMatrix> {
    check_same_dim(a, b)?;
    require_mean(gen)?;
    let anchor = Anchor::new(a)?;
    mean_with_anchor(&anchor, b, gen)
}

pub(crate) fn mean_with_anchor(
    anchor: &Anchor,
    b: &HermitianMatrix,
    gen: &Generator,
) -> Result<PositiveDefiniteMatrix> {
    map_with_anchor(anchor, b, |x| gen.value(x))
}

/// `A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}` for an arbitrary positive scalar map.
pub(crate) fn map_with_anchor(
    anchor: &Anchor,
    b: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<PositiveDefiniteMatrix> {
    let middle = anchor.whiten(b).eig()?.map(f)?;
    PositiveDefiniteMatrix::new(anchor.unwhiten(&middle))
}

/// A generator admissible for `φ`: a strictly concave mean with weight in `(0, 1)`.
#[derive(Clone, Debug)]
pub struct DivergenceSpec {
    generator: Generator,
    c: f64,
}

impl DivergenceSpec {
    pub fn new(generator: Generator) -> Result<Self> {
        require_mean(&generator)?;
        if let Some(mu) = generator.measure() {
            if mu.spec().supported_on_endpoints() {
                return Err(Error::UnsupportedGenerator(format!(
                    "`{}` is affine: its measure is supported on {{0, 1}}",
                    generator.spec()
                )));
            }
        }
        generator.check_strictly_concave()?;
        let c = generator.weight();
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::UnsupportedGenerator(format!("weight {c} outside (0, 1)")));
        }
        Ok(Self { generator, c })
    }

    pub fn from_spec(spec: GeneratorSpec) -> Result<Self> {
        Self::new(Generator::new(spec)?)
    }

    /// The quantum Hellinger divergence `Tr((A+B)/2 − A # B)`.
    pub fn arcsine() -> Self {
        Self::new(Generator::arcsine()).expect("arcsine divergence is valid")
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// The weight `c = f'(1)`.
    pub fn weight(&self) -> f64 {
        self.c
    }
}

/// `φ(A, B) = Tr((1−c)A + cB − A σ B)`.
pub fn phi(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, spec: &DivergenceSpec) -> Result<f64> {
    check_same_dim(a, b)?;
    let anchor = Anchor::new(a)?;
    phi_with_anchor(&anchor, b, spec)
}

pub(crate) fn phi_with_anchor(anchor: &Anchor, b: &HermitianMatrix, spec: &DivergenceSpec) -> Result<f64> {
    let c = spec.c;
    let mean = mean_with_anchor(anchor, b, &spec.generator)?;
    Ok((1.0 - c) * anchor.matrix.trace() + c * b.trace() - mean.trace())
}

/// `g(x) = (1−c) + c·x − f(x)`, nonnegative and vanishing only at `x = 1`.
pub fn g_of(spec: &DivergenceSpec, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    Ok(g_value(spec, x))
}

fn g_value(spec: &DivergenceSpec, x: f64) -> f64 {
    (1.0 - spec.c) + spec.c * x - spec.generator.value(x)
}

/// `φ(A, B) = Tr[A · g(A^{-1/2} B A^{-1/2})]`.
pub fn phi_via_g(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, spec: &DivergenceSpec) -> Result<f64> {
    maximal_f_divergence(a, b, |x| g_value(spec, x))
}

/// Maximal f-divergence `S_f(A, B) = Tr A · f(A^{-1/2} B A^{-1/2})`; no sign guarantee.
pub fn maximal_f_divergence(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    check_same_dim(a, b)?;
    let whitened = a.whiten(b)?;
    let fm = whitened.eig()?.map(f)?;
    Ok(a.trace_product(&fm))
}

/// Operator valued Bregman divergence `h(X) − h(Y) − Dh(Y)[X − Y]`, with the
/// Fréchet derivative taken by divided differences in the eigenbasis of `Y`.
pub fn operator_bregman(
    h: impl Fn(f64) -> f64,
    h_prime: impl Fn(f64) -> f64,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> Result<HermitianMatrix> {
    check_same_dim(x, y)?;
    let hx = x.eig()?.map(&h)?;
    let y_decomposition = y.eig()?;
    let hy = y_decomposition.map(&h)?;
    let derivative = frechet_derivative(&y_decomposition, &h, &h_prime, &(x.as_hermitian() - y.as_hermitian()))?;
    Ok(&(&hx - &hy) - &derivative)
}

/// `φ(A, B) = Tr[A · H_{−f}(A^{-1/2} B A^{-1/2}, I)]`.
pub fn phi_via_bregman(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    spec: &DivergenceSpec,
) -> Result<f64> {
    check_same_dim(a, b)?;
    let whitened = PositiveDefiniteMatrix::new(a.whiten(b)?)?;
    let gen = &spec.generator;
    let bregman = operator_bregman(
        |x| -gen.value(x),
        |x| -gen.derivative(x),
        &whitened,
        &PositiveDefiniteMatrix::identity(a.dim()),
    )?;
    Ok(a.trace_product(&bregman))
}

/// Relative commutator tolerance for the commutative divergence.
pub const COMMUTATIVITY_TOLERANCE: f64 = 1e-8;

pub(crate) fn check_commuting(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    let commutator = commutator_norm(a, b)?;
    if commutator > COMMUTATIVITY_TOLERANCE * a.frobenius_norm() * b.frobenius_norm() {
        return Err(Error::NotCommuting {
            commutator_norm: commutator,
        });
    }
    Ok(())
}

/// `φ_f(A, B) = Tr((f(1)−f'(1))A + f'(1)B − A f(A^{-1}B))` for commuting `A`, `B`,
/// where `f` need only be strictly concave and C¹.
pub fn commutative_phi(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, gen: &Generator) -> Result<f64> {
    check_same_dim(a, b)?;
    check_commuting(a, b)?;
    let (f1, d1) = (gen.value(1.0), gen.derivative(1.0));
    let whitened = a.whiten(b)?;
    let fm = whitened.eig()?.map(|x| gen.value(x))?;
    Ok((f1 - d1) * a.trace() + d1 * b.trace() - a.trace_product(&fm))
}

/// Classical squared Hellinger distance `½ Σ (√p_i − √q_i)²` of probability vectors.
pub fn classical_hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    for v in [p, q] {
        if let Some(&bad) = v.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("probability entry {bad} is negative")));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
    }
    Ok(0.5
        * p.iter()
            .zip(q)
            .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
            .sum::<f64>())
}
