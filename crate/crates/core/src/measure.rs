//! Probability measures on `[0, 1]` representing operator monotone generators
//! through `f_μ(x) = ∫ x / ((1−λ)x + λ) dμ(λ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_chebyshev_arcsine, gauss_jacobi_unit, QuadratureRule};

/// Default number of quadrature nodes for continuous measures.
pub const DEFAULT_QUADRATURE_ORDER: usize = 256;

const MASS_TOLERANCE: f64 = 1e-10;

/// A Borel probability measure on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureSpec {
    /// Finitely many atoms given as `(location, mass)` pairs.
    Discrete { atoms: Vec<(f64, f64)> },
    /// Density `1 / (π √(λ(1−λ)))`.
    Arcsine,
    /// Density `(sin(tπ)/π) λ^(t−1) (1−λ)^(−t)`.
    #[serde(rename = "beta")]
    BetaType { t: f64 },
    /// A density given only through a precomputed rule on `(0, 1)`.
    Tabulated { nodes: Vec<f64>, weights: Vec<f64> },
}

impl MeasureSpec {
    pub fn dirac(location: f64) -> Self {
        MeasureSpec::Discrete {
            atoms: vec![(location, 1.0)],
        }
    }

    /// `(1−c) δ₀ + c δ₁`, the largest measure with center of mass `c` in the convex order.
    pub fn two_point_extreme(c: f64) -> Self {
        MeasureSpec::Discrete {
            atoms: vec![(0.0, 1.0 - c), (1.0, c)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidArgument("discrete measure has no atoms".into()));
                }
                for &(loc, mass) in atoms {
                    if !(0.0..=1.0).contains(&loc) {
                        return Err(Error::InvalidArgument(format!(
                            "atom location {loc} outside [0, 1]"
                        )));
                    }
                    if !(mass > 0.0 && mass.is_finite()) {
                        return Err(Error::InvalidArgument(format!("atom mass {mass} is not positive")));
                    }
                }
                check_mass(atoms.iter().map(|a| a.1).sum())
            }
            MeasureSpec::Arcsine => Ok(()),
            MeasureSpec::BetaType { t } => {
                if *t > 0.0 && *t < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("beta parameter t = {t} outside (0, 1)")))
                }
            }
            MeasureSpec::Tabulated { nodes, weights } => {
                if nodes.is_empty() || nodes.len() != weights.len() {
                    return Err(Error::InvalidArgument(
                        "tabulated density needs equally many nodes and weights".into(),
                    ));
                }
                if nodes.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return Err(Error::InvalidArgument("tabulated nodes must lie in (0, 1)".into()));
                }
                if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                    return Err(Error::InvalidArgument("tabulated weights must be positive".into()));
                }
                check_mass(weights.iter().sum())
            }
        }
    }

    /// True when every atom sits in `{0, 1}`, i.e. the generator is affine.
    pub fn supported_on_endpoints(&self) -> bool {
        match self {
            MeasureSpec::Discrete { atoms } => atoms.iter().all(|&(l, _)| l == 0.0 || l == 1.0),
            _ => false,
        }
    }
}

fn check_mass(total: f64) -> Result<()> {
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "total mass {total} differs from 1"
        )));
    }
    Ok(())
}

/// `c(μ) = ∫ λ dμ(λ)`; exact for atoms and the closed-form densities.
pub fn center_of_mass(mu: &MeasureSpec) -> f64 {
    match mu {
        MeasureSpec::Discrete { atoms } => atoms.iter().map(|&(l, m)| l * m).sum(),
        MeasureSpec::Arcsine => 0.5,
        MeasureSpec::BetaType { t } => *t,
        MeasureSpec::Tabulated { nodes, weights } => nodes.iter().zip(weights).map(|(x, w)| x * w).sum(),
    }
}

/// Builds the quadrature rule of `mu` with `order` nodes (atoms for discrete measures).
pub fn quadrature(mu: &MeasureSpec, order: usize) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("quadrature order {order} < 2")));
    }
    mu.validate()?;
    match mu {
        MeasureSpec::Discrete { atoms } => Ok(QuadratureRule {
            nodes: atoms.iter().map(|a| a.0).collect(),
            weights: atoms.iter().map(|a| a.1).collect(),
            order: atoms.len(),
        }),
        MeasureSpec::Arcsine => Ok(gauss_chebyshev_arcsine(order)),
        MeasureSpec::BetaType { t } => {
            // λ^(t−1) (1−λ)^(−t) dλ = (1+x)^(t−1) (1−x)^(−t) dx on [−1, 1]; the
            // Jacobi moment Γ(1−t)Γ(t) = π / sin(tπ) cancels the density constant.
            let mut rule = gauss_jacobi_unit(order, -t, t - 1.0)?;
            let normalization = (t * PI).sin() / PI;
            let jacobi_moment = PI / (t * PI).sin();
            for w in &mut rule.weights {
                *w *= normalization * jacobi_moment;
            }
            Ok(rule)
        }
        MeasureSpec::Tabulated { nodes, weights } => Ok(QuadratureRule {
            nodes: nodes.clone(),
            weights: weights.clone(),
            order: nodes.len(),
        }),
    }
}

/// A validated measure together with its precomputed quadrature rule.
///
/// The rule is computed once at construction and only read afterwards.
#[derive(Clone, Debug)]
pub struct Measure {
    spec: MeasureSpec,
    rule: QuadratureRule,
    center: f64,
}

impl Measure {
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        Self::with_order(spec, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_order(spec: MeasureSpec, order: usize) -> Result<Self> {
        let rule = quadrature(&spec, order)?;
        let center = center_of_mass(&spec);
        Ok(Self { spec, rule, center })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn center_of_mass(&self) -> f64 {
        self.center
    }

    /// `f_μ(x)`; NaN for `x ≤ 0`.
    pub fn f(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NAN;
        }
        self.rule.integrate(|l| x / ((1.0 - l) * x + l))
    }

    /// `f_μ'(x) = ∫ λ / ((1−λ)x + λ)² dμ(λ)`; NaN for `x ≤ 0`.
    pub fn f_prime(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NAN;
        }
        self.rule.integrate(|l| {
            let d = (1.0 - l) * x + l;
            l / (d * d)
        })
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x = {x} must be positive")))
    }
}

pub fn f_mu(mu: &Measure, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(mu.f(x))
}

pub fn f_mu_prime(mu: &Measure, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(mu.f_prime(x))
}

/// `∫ (λ − t)₊ dμ(λ)` for a discrete measure.
fn hockey_stick(atoms: &[(f64, f64)], t: f64) -> f64 {
    atoms.iter().map(|&(l, m)| m * (l - t).max(0.0)).sum()
}

/// Convex order `μ ≼ ν` for discrete measures.
///
/// Equal means plus domination of the call-option integrals `∫(λ−t)₊` at every
/// atom location; both sides are piecewise linear in `t` with kinks only there.
pub fn convex_order_leq(mu: &MeasureSpec, nu: &MeasureSpec) -> Result<bool> {
    let (MeasureSpec::Discrete { atoms: a }, MeasureSpec::Discrete { atoms: b }) = (mu, nu) else {
        return Err(Error::UnsupportedMeasure(
            "convex order is implemented for discrete measures only".into(),
        ));
    };
    mu.validate()?;
    nu.validate()?;
    let tol = 1e-10;
    if (center_of_mass(mu) - center_of_mass(nu)).abs() > tol {
        return Ok(false);
    }
    Ok(a.iter()
        .chain(b)
        .all(|&(t, _)| hockey_stick(a, t) <= hockey_stick(b, t) + tol))
}
