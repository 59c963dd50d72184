//! Quantum channels in Kraus form and the data-processing and joint-convexity checks.

use serde::{Deserialize, Serialize};

use crate::divergence::{phi, DivergenceSpec};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, HermitianMatrix, MatrixJson, PositiveDefiniteMatrix};
use crate::random::{complex_gaussian, orthonormalize, trial_rng};

/// Tolerance on `‖Σ K_i* K_i − I‖_F`.
pub const TRACE_PRESERVING_TOLERANCE: f64 = 1e-10;

/// Relative size of the `ε·I` shift applied to channel outputs.
pub const REGULARIZATION_FACTOR: f64 = 1e-12;

/// Largest admissible `ε / λ_min` before an output counts as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

/// A completely positive map `A ↦ Σ K_i A K_i*`, trace preserving unless built
/// with [`QuantumChannel::new_unchecked`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    kraus: Vec<MatrixJson>,
}

impl TryFrom<ChannelJson> for QuantumChannel {
    type Error = Error;
    fn try_from(raw: ChannelJson) -> Result<Self> {
        let kraus = raw.kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        Self::new(kraus)
    }
}

impl From<QuantumChannel> for ChannelJson {
    fn from(c: QuantumChannel) -> Self {
        Self {
            kraus: c.kraus.iter().map(MatrixJson::from_matrix).collect(),
        }
    }
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let channel = Self::new_unchecked(kraus)?;
        let defect = channel.trace_preservation_defect();
        if !(defect <= TRACE_PRESERVING_TOLERANCE) {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(channel)
    }

    /// Skips the trace-preservation check; shapes are still validated.
    pub fn new_unchecked(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::InvalidArgument("Kraus operators must be non-empty".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.shape() != shape) {
            return Err(Error::DimensionMismatch {
                expected: shape.0 * shape.1,
                found: bad.nrows() * bad.ncols(),
            });
        }
        if kraus.iter().any(|k| k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::InvalidArgument("Kraus operators must be finite".into()));
        }
        Ok(Self { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// `‖Σ K_i* K_i − I‖_F`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.input_dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        (sum - CMatrix::identity(d, d)).norm()
    }

    /// Multiplies every Kraus operator by `factor`, scaling the map by `factor²`.
    pub fn scaled_unchecked(&self, factor: f64) -> Self {
        Self {
            kraus: self.kraus.iter().map(|k| k.scale(factor)).collect(),
        }
    }
}

/// `Σ_i K_i A K_i*`.
pub fn apply_channel(channel: &QuantumChannel, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.dim() != channel.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.input_dim(),
            found: a.dim(),
        });
    }
    let d = channel.output_dim();
    let mut out = CMatrix::zeros(d, d);
    for k in &channel.kraus {
        out += k * a.as_matrix() * k.adjoint();
    }
    Ok(HermitianMatrix::symmetrized(out))
}

/// Conditional expectation onto the diagonal algebra, with Kraus operators `e_i e_i*`.
pub fn pinching_channel(dim: usize) -> Result<QuantumChannel> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let kraus = (0..dim)
        .map(|i| {
            let mut p = CMatrix::zeros(dim, dim);
            p[(i, i)] = 1.0.into();
            p
        })
        .collect();
    QuantumChannel::new(kraus)
}

/// Random channel from a Haar-like isometry `V: C^{d_in} → C^{d_out} ⊗ C^{env}`
/// with `K_e = (I ⊗ ⟨e|) V`. Deterministic in `seed`.
pub fn random_cptp(d_in: usize, d_out: usize, env_dim: usize, seed: u64) -> Result<QuantumChannel> {
    if d_in == 0 || d_out == 0 || env_dim == 0 {
        return Err(Error::InvalidArgument("channel dimensions must be at least 1".into()));
    }
    if d_out * env_dim < d_in {
        return Err(Error::InvalidArgument(format!(
            "no isometry from dimension {d_in} into {d_out}x{env_dim}"
        )));
    }
    let mut rng = trial_rng(seed, 0);
    let v = orthonormalize(complex_gaussian(&mut rng, d_out * env_dim, d_in));
    let kraus = (0..env_dim)
        .map(|e| CMatrix::from_fn(d_out, d_in, |i, j| v[(i * env_dim + e, j)]))
        .collect();
    QuantumChannel::new(kraus)
}

/// Choi matrix `Σ_ij E_ij ⊗ T(E_ij)`; positive semidefinite iff the map is completely positive.
pub fn choi_matrix(channel: &QuantumChannel) -> HermitianMatrix {
    let (d_in, d_out) = (channel.input_dim(), channel.output_dim());
    let mut choi = CMatrix::zeros(d_in * d_out, d_in * d_out);
    for k in &channel.kraus {
        // block (i, j) of the Choi matrix is K E_ij K* = k_i k_j*, k_i the i-th column
        for i in 0..d_in {
            for j in 0..d_in {
                for r in 0..d_out {
                    for c in 0..d_out {
                        choi[(i * d_out + r, j * d_out + c)] += k[(r, i)] * k[(c, j)].conj();
                    }
                }
            }
        }
    }
    HermitianMatrix::symmetrized(choi)
}

/// A channel output made positive definite by `ε·I`, `ε = 1e-12·Tr/d`.
#[derive(Clone, Debug)]
pub struct Regularized {
    pub matrix: PositiveDefiniteMatrix,
    pub shift: f64,
}

/// Adds `ε·I` and rejects outputs whose smallest eigenvalue the shift moves by
/// more than a relative `1e-6`.
pub fn regularize(h: &HermitianMatrix) -> Result<Regularized> {
    let d = h.dim();
    let shift = REGULARIZATION_FACTOR * h.trace().abs() / d as f64;
    let shifted = h + &HermitianMatrix::identity(d).scale(shift);
    let min_eigenvalue = shifted.min_eigenvalue()?;
    if !(min_eigenvalue > 0.0) || shift > DEGENERACY_THRESHOLD * min_eigenvalue {
        return Err(Error::Degenerate { shift, min_eigenvalue });
    }
    Ok(Regularized {
        matrix: PositiveDefiniteMatrix::new(shifted)?,
        shift,
    })
}

/// Outcome of one data-processing check.
#[derive(Clone, Debug, Serialize)]
pub struct DpiCheck {
    /// `φ(A, B) − φ(T(A), T(B))`; the inequality holds iff this is `≥ −1e-9`.
    pub slack: f64,
    /// Largest regularization shift applied to `T(A)`, `T(B)`.
    pub regularization: f64,
}

pub fn check_dpi(
    spec: &DivergenceSpec,
    channel: &QuantumChannel,
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
) -> Result<DpiCheck> {
    let ta = regularize(&apply_channel(channel, a)?)?;
    let tb = regularize(&apply_channel(channel, b)?)?;
    let slack = phi(a, b, spec)? - phi(&ta.matrix, &tb.matrix, spec)?;
    Ok(DpiCheck {
        slack,
        regularization: ta.shift.max(tb.shift),
    })
}

/// `s φ(A₁,B₁) + (1−s) φ(A₂,B₂) − φ(sA₁+(1−s)A₂, sB₁+(1−s)B₂)`.
pub fn check_joint_convexity(
    spec: &DivergenceSpec,
    first: (&PositiveDefiniteMatrix, &PositiveDefiniteMatrix),
    second: (&PositiveDefiniteMatrix, &PositiveDefiniteMatrix),
    s: f64,
) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("mixing weight s = {s} must lie in (0, 1)")));
    }
    let mix = |x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix| {
        PositiveDefiniteMatrix::new(&x.scale(s) + &y.scale(1.0 - s))
    };
    let a = mix(first.0, second.0)?;
    let b = mix(first.1, second.1)?;
    Ok(s * phi(first.0, first.1, spec)? + (1.0 - s) * phi(second.0, second.1, spec)? - phi(&a, &b, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius_dist;
    use crate::random::random_pd;
    use approx::assert_abs_diff_eq;

    fn a1() -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_diagonal(&[4.0, 1.0]).unwrap()
    }

    fn a2() -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_real_rows(&[vec![2.5, 1.5], vec![1.5, 2.5]]).unwrap()
    }

    #[test]
    fn pinching_examples() {
        let pinch = pinching_channel(2).unwrap();
        let out = apply_channel(&pinch, &a2()).unwrap();
        assert_eq!(out.as_matrix(), HermitianMatrix::from_diagonal(&[2.5, 2.5]).unwrap().as_matrix());
        assert_eq!(apply_channel(&pinch, &out).unwrap().as_matrix(), out.as_matrix());
        assert_eq!(apply_channel(&pinch, &a1()).unwrap().as_matrix(), a1().as_matrix());
        let i3 = HermitianMatrix::identity(3);
        assert_eq!(apply_channel(&pinching_channel(3).unwrap(), &i3).unwrap().as_matrix(), i3.as_matrix());
        assert!(pinching_channel(0).is_err());
    }

    #[test]
    fn identity_channel_is_neutral() {
        let id = QuantumChannel::identity(2);
        assert_eq!(apply_channel(&id, &a2()).unwrap().as_matrix(), a2().as_matrix());
        let check = check_dpi(&DivergenceSpec::arcsine(), &id, &a1(), &a2()).unwrap();
        assert!(check.slack.abs() < 1e-9);
    }

    #[test]
    fn random_channels_are_trace_preserving() {
        for seed in 0..20 {
            let channel = random_cptp(3, 2, 3, seed).unwrap();
            assert!(channel.trace_preservation_defect() <= TRACE_PRESERVING_TOLERANCE);
            let a = random_pd(&mut trial_rng(seed, 1), 3);
            let out = apply_channel(&channel, &a).unwrap();
            assert_abs_diff_eq!(out.trace(), a.trace(), epsilon = 1e-10);
            assert!(choi_matrix(&channel).min_eigenvalue().unwrap() >= -1e-9);
        }
        let again = random_cptp(2, 2, 2, 42).unwrap();
        let first = random_cptp(2, 2, 2, 42).unwrap();
        assert_eq!(again.kraus(), first.kraus());
        assert!(random_cptp(4, 1, 2, 0).is_err());
    }

    #[test]
    fn unitary_channel_preserves_spectrum() {
        let channel = random_cptp(3, 3, 1, 5).unwrap();
        let a = random_pd(&mut trial_rng(5, 2), 3);
        let out = apply_channel(&channel, &a).unwrap();
        let (s1, s2) = (a.eig().unwrap().eigenvalues, out.eig().unwrap().eigenvalues);
        for (x, y) in s1.iter().zip(&s2) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn pinching_contracts_the_counterexample_pair() {
        let check = check_dpi(&DivergenceSpec::arcsine(), &pinching_channel(2).unwrap(), &a1(), &a2()).unwrap();
        // φ(diag(4,1), diag(2.5,2.5)) evaluated entrywise
        let g = |a: f64, b: f64| 0.5 * a + 0.5 * b - (a * b).sqrt();
        let pinched = g(4.0, 2.5) + g(1.0, 2.5);
        let full = phi(&a1(), &a2(), &DivergenceSpec::arcsine()).unwrap();
        assert_abs_diff_eq!(check.slack, full - pinched, epsilon = 1e-10);
        assert!(check.slack >= 0.0);
    }

    #[test]
    fn corrupted_channel_is_rejected_and_violates_dpi() {
        let unitary = random_cptp(2, 2, 1, 3).unwrap();
        let corrupted = unitary.scaled_unchecked(2f64.sqrt());
        assert!(matches!(
            QuantumChannel::new(corrupted.kraus().to_vec()),
            Err(Error::NotTracePreserving { .. })
        ));
        let check = check_dpi(&DivergenceSpec::arcsine(), &corrupted, &a1(), &a2()).unwrap();
        assert!(check.slack < -1e-3);
    }

    #[test]
    fn degenerate_outputs_are_flagged() {
        let singular = HermitianMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(regularize(&singular), Err(Error::Degenerate { .. })));
        let fine = regularize(&a2()).unwrap();
        assert!(frobenius_dist(&fine.matrix, &a2()).unwrap() < 1e-11);
    }

    #[test]
    fn joint_convexity_examples() {
        let spec = DivergenceSpec::arcsine();
        let slack = check_joint_convexity(&spec, (&a1(), &a2()), (&a1(), &a2()), 0.3).unwrap();
        assert!(slack.abs() < 1e-12);
        let slack = check_joint_convexity(&spec, (&a1(), &a2()), (&a2(), &a1()), 0.5).unwrap();
        assert!(slack >= -1e-9);
        let tiny = check_joint_convexity(&spec, (&a1(), &a2()), (&a2(), &a1()), 1e-9).unwrap();
        assert!(tiny.abs() < 1e-7);
    }

    #[test]
    fn channel_json_round_trip() {
        let channel = random_cptp(2, 3, 2, 11).unwrap();
        let json = serde_json::to_string(&channel).unwrap();
        let back: QuantumChannel = serde_json::from_str(&json).unwrap();
        for (x, y) in channel.kraus().iter().zip(back.kraus()) {
            assert!((x - y).norm() < 1e-12);
        }
        let bad = r#"{"kraus":[{"rows":1,"cols":1,"re":[[2.0]]}]}"#;
        assert!(serde_json::from_str::<QuantumChannel>(bad).is_err());
    }
}
