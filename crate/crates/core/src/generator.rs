//! Scalar generators of Kubo-Ando means and of the commutative divergence family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Measure, MeasureSpec, DEFAULT_QUADRATURE_ORDER};

/// Wire-level description of a generator `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorSpec {
    /// `(1−λ) + λx`
    Arithmetic { lambda: f64 },
    /// `x^λ`
    Geometric { lambda: f64 },
    /// `((1−λ) + λ/x)^{-1}`
    Harmonic { lambda: f64 },
    /// `f_μ` of a representing measure.
    Measure { mu: MeasureSpec },
    /// `log x`; commutative divergences only.
    #[serde(rename = "log")]
    CommutativeLog,
    /// `x^t` used through the commutative divergence formula.
    #[serde(rename = "power")]
    CommutativePower { t: f64 },
}

impl GeneratorSpec {
    pub fn arcsine() -> Self {
        GeneratorSpec::Measure {
            mu: MeasureSpec::Arcsine,
        }
    }

    /// The probability measure representing the generator, when it has one.
    pub fn representing_measure(&self) -> Option<MeasureSpec> {
        match *self {
            GeneratorSpec::Arithmetic { lambda } => Some(MeasureSpec::two_point_extreme(lambda)),
            GeneratorSpec::Geometric { lambda } => Some(MeasureSpec::BetaType { t: lambda }),
            GeneratorSpec::CommutativePower { t } => Some(MeasureSpec::BetaType { t }),
            GeneratorSpec::Harmonic { lambda } => Some(MeasureSpec::dirac(lambda)),
            GeneratorSpec::Measure { ref mu } => Some(mu.clone()),
            GeneratorSpec::CommutativeLog => None,
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Arithmetic { lambda } => write!(f, "arithmetic:{lambda}"),
            GeneratorSpec::Geometric { lambda } => write!(f, "geometric:{lambda}"),
            GeneratorSpec::Harmonic { lambda } => write!(f, "harmonic:{lambda}"),
            GeneratorSpec::Measure { mu: MeasureSpec::Arcsine } => write!(f, "arcsine"),
            GeneratorSpec::Measure { mu: MeasureSpec::BetaType { t } } => write!(f, "beta:{t}"),
            GeneratorSpec::Measure { .. } => {
                write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
            }
            GeneratorSpec::CommutativeLog => write!(f, "log"),
            GeneratorSpec::CommutativePower { t } => write!(f, "power:{t}"),
        }
    }
}

/// Parses either JSON (`{"kind":"geometric","lambda":0.5}`) or a shorthand such as
/// `arcsine`, `geometric:0.5`, `arithmetic:0.3`, `harmonic:0.3`, `beta:0.25`,
/// `log`, `power:0.5`.
impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = || -> Result<f64> {
            let raw = arg.ok_or_else(|| {
                Error::InvalidArgument(format!("generator `{name}` needs a parameter, e.g. `{name}:0.5`"))
            })?;
            raw.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad generator parameter `{raw}`")))
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "arcsine" => GeneratorSpec::arcsine(),
            "geometric" => GeneratorSpec::Geometric { lambda: number()? },
            "arithmetic" => GeneratorSpec::Arithmetic { lambda: number()? },
            "harmonic" => GeneratorSpec::Harmonic { lambda: number()? },
            "beta" => GeneratorSpec::Measure {
                mu: MeasureSpec::BetaType { t: number()? },
            },
            "log" => GeneratorSpec::CommutativeLog,
            "power" => GeneratorSpec::CommutativePower { t: number()? },
            other => return Err(Error::InvalidArgument(format!("unknown generator `{other}`"))),
        };
        Ok(spec)
    }
}

/// A validated generator with closed-form `f`, `f'` where available and the
/// quadrature of its representing measure.
#[derive(Clone, Debug)]
pub struct Generator {
    spec: GeneratorSpec,
    measure: Option<Measure>,
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {v} must lie in (0, 1)")))
    }
}

impl Generator {
    pub fn new(spec: GeneratorSpec) -> Result<Self> {
        Self::with_quadrature_order(spec, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_quadrature_order(spec: GeneratorSpec, order: usize) -> Result<Self> {
        match spec {
            GeneratorSpec::Arithmetic { lambda }
            | GeneratorSpec::Geometric { lambda }
            | GeneratorSpec::Harmonic { lambda } => check_unit_interval("lambda", lambda)?,
            GeneratorSpec::CommutativePower { t } => check_unit_interval("t", t)?,
            GeneratorSpec::Measure { .. } | GeneratorSpec::CommutativeLog => {}
        }
        let measure = spec
            .representing_measure()
            .map(|mu| Measure::with_order(mu, order))
            .transpose()?;
        Ok(Self { spec, measure })
    }

    pub fn arcsine() -> Self {
        Self::new(GeneratorSpec::arcsine()).expect("arcsine generator is valid")
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn measure(&self) -> Option<&Measure> {
        self.measure.as_ref()
    }

    /// Whether `f(1) = 1`, i.e. the generator defines a Kubo-Ando mean.
    pub fn is_mean(&self) -> bool {
        !matches!(self.spec, GeneratorSpec::CommutativeLog)
    }

    /// `f(x)`; NaN outside `(0, ∞)`.
    pub fn value(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NAN;
        }
        match self.spec {
            GeneratorSpec::Arithmetic { lambda } => (1.0 - lambda) + lambda * x,
            GeneratorSpec::Geometric { lambda } => x.powf(lambda),
            GeneratorSpec::CommutativePower { t } => x.powf(t),
            GeneratorSpec::Harmonic { lambda } => x / ((1.0 - lambda) * x + lambda),
            GeneratorSpec::CommutativeLog => x.ln(),
            GeneratorSpec::Measure { .. } => self.measure.as_ref().map_or(f64::NAN, |m| m.f(x)),
        }
    }

    /// `f'(x)`; NaN outside `(0, ∞)`.
    pub fn derivative(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NAN;
        }
        match self.spec {
            GeneratorSpec::Arithmetic { lambda } => lambda,
            GeneratorSpec::Geometric { lambda } => lambda * x.powf(lambda - 1.0),
            GeneratorSpec::CommutativePower { t } => t * x.powf(t - 1.0),
            GeneratorSpec::Harmonic { lambda } => {
                let d = (1.0 - lambda) * x + lambda;
                lambda / (d * d)
            }
            GeneratorSpec::CommutativeLog => 1.0 / x,
            GeneratorSpec::Measure { .. } => self.measure.as_ref().map_or(f64::NAN, |m| m.f_prime(x)),
        }
    }

    /// The weight `f'(1)`, equal to the center of mass of the representing measure.
    pub fn weight(&self) -> f64 {
        match (&self.spec, &self.measure) {
            (GeneratorSpec::Measure { .. }, Some(m)) => m.center_of_mass(),
            _ => self.derivative(1.0),
        }
    }

    /// Checks strict concavity through second divided differences on a
    /// 512-point logarithmic grid over `[1e-3, 1e3]`.
    pub fn check_strictly_concave(&self) -> Result<()> {
        let n = 512;
        let grid: Vec<f64> = (0..n)
            .map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n - 1) as f64))
            .collect();
        let values: Vec<f64> = grid.iter().map(|&x| self.value(x)).collect();
        for k in 1..n - 1 {
            let (x0, x1, x2) = (grid[k - 1], grid[k], grid[k + 1]);
            let d01 = (values[k] - values[k - 1]) / (x1 - x0);
            let d12 = (values[k + 1] - values[k]) / (x2 - x1);
            let second = (d12 - d01) / (x2 - x0);
            if !(second < 0.0) {
                return Err(Error::NotStrictlyConcave { x: x1, value: second });
            }
        }
        Ok(())
    }
}
