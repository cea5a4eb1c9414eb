//! Dimensionless two-level probe model.
//!
//! A fiducial qubit state with Bloch vector `a` is rotated around the unit
//! axis `n` by the angle `2pi * t * omega` (dimensionless time `t`, frequency
//! `omega`). With `a . n = 0` the locally optimal POVM centred at a guess `g`
//! has effects `P(0|g) = (I + (n x a(g)) . sigma) / 2` and
//! `P(1|g) = I - P(0|g)`, which gives
//!
//! ```text
//! p(0 | omega; g, t) = [1 + sin(2pi t (omega - g))] / 2
//! ```
//!
//! GHZ probes of `N` qubits are simulated as one effective binary measurement
//! whose phase accrues `N` times faster.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Bloch vector of the fiducial state, `|a| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector(Vec3);

impl BlochVector {
    pub fn new(a: Vec3) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("Bloch vector components must be finite"));
        }
        if norm(a) > 1.0 + NORM_TOL {
            return Err(Error::config(format!(
                "Bloch vector norm {} exceeds 1",
                norm(a)
            )));
        }
        Ok(Self(a))
    }

    pub fn components(&self) -> Vec3 {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(self.0)
    }
}

impl TryFrom<Vec3> for BlochVector {
    type Error = Error;
    fn try_from(a: Vec3) -> Result<Self> {
        Self::new(a)
    }
}

impl From<BlochVector> for Vec3 {
    fn from(a: BlochVector) -> Vec3 {
        a.0
    }
}

/// Unit rotation axis of the frequency encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct RotationAxis(Vec3);

impl RotationAxis {
    pub fn new(n: Vec3) -> Result<Self> {
        let len = norm(n);
        if !len.is_finite() || (len - 1.0).abs() > NORM_TOL {
            return Err(Error::config(format!(
                "rotation axis must be a unit vector, got norm {len}"
            )));
        }
        Ok(Self(n))
    }

    pub fn components(&self) -> Vec3 {
        self.0
    }
}

impl TryFrom<Vec3> for RotationAxis {
    type Error = Error;
    fn try_from(n: Vec3) -> Result<Self> {
        Self::new(n)
    }
}

impl From<RotationAxis> for Vec3 {
    fn from(n: RotationAxis) -> Vec3 {
        n.0
    }
}

/// How the qubits of one measurement step are prepared and read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    Single,
    /// `N` independent qubits measured in parallel at each step.
    ProductParallel,
    /// One `N`-qubit GHZ state read out as a single binary outcome.
    Ghz,
}

impl ProbeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeMode::Single => "single",
            ProbeMode::ProductParallel => "product_parallel",
            ProbeMode::Ghz => "ghz",
        }
    }
}

impl std::str::FromStr for ProbeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(ProbeMode::Single),
            "product" | "product_parallel" | "parallel" => Ok(ProbeMode::ProductParallel),
            "ghz" => Ok(ProbeMode::Ghz),
            other => Err(Error::config(format!("unknown probe mode `{other}`"))),
        }
    }
}

fn check_mode(mode: ProbeMode, n_qubits: u32) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::config("n_qubits must be at least 1"));
    }
    if mode == ProbeMode::Single && n_qubits != 1 {
        return Err(Error::config(format!(
            "single-qubit mode requires n_qubits = 1, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Probe and encoding description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub mode: ProbeMode,
    pub n_qubits: u32,
    pub bloch: BlochVector,
    pub axis: RotationAxis,
}

impl ProbeConfig {
    /// Probe with the default optimal fiducial state `a = x`, `n = y`.
    pub fn new(mode: ProbeMode, n_qubits: u32) -> Result<Self> {
        check_mode(mode, n_qubits)?;
        Ok(Self {
            mode,
            n_qubits,
            bloch: BlochVector([1.0, 0.0, 0.0]),
            axis: RotationAxis([0.0, 1.0, 0.0]),
        })
    }

    pub fn single() -> Self {
        Self::new(ProbeMode::Single, 1).expect("single-qubit probe is valid")
    }

    pub fn product(n_qubits: u32) -> Result<Self> {
        Self::new(ProbeMode::ProductParallel, n_qubits)
    }

    pub fn ghz(n_qubits: u32) -> Result<Self> {
        Self::new(ProbeMode::Ghz, n_qubits)
    }

    /// Probe with an explicit fiducial state satisfying `a . n = 0`.
    pub fn with_state(
        mode: ProbeMode,
        n_qubits: u32,
        bloch: BlochVector,
        axis: RotationAxis,
    ) -> Result<Self> {
        check_mode(mode, n_qubits)?;
        let overlap = dot(bloch.0, axis.0);
        if overlap.abs() > NORM_TOL {
            return Err(Error::config(format!(
                "fiducial state must be orthogonal to the rotation axis (a.n = {overlap})"
            )));
        }
        Ok(Self { mode, n_qubits, bloch, axis })
    }

    pub fn validate(&self) -> Result<()> {
        Self::with_state(self.mode, self.n_qubits, self.bloch, self.axis).map(|_| ())
    }

    /// Factor by which the encoded phase runs faster than for one qubit.
    pub fn phase_multiplier(&self) -> f64 {
        match self.mode {
            ProbeMode::Ghz => f64::from(self.n_qubits),
            _ => 1.0,
        }
    }

    /// Binary outcomes produced per measurement step.
    pub fn records_per_step(&self) -> usize {
        match self.mode {
            ProbeMode::ProductParallel => self.n_qubits as usize,
            _ => 1,
        }
    }

    /// Qubits consumed per measurement step.
    pub fn qubits_per_step(&self) -> u64 {
        u64::from(self.n_qubits)
    }

    /// Largest identifiable sensing time on `[-1, 1)`, scaled by `scale`.
    pub fn first_sensing_time(&self, scale: f64) -> f64 {
        scale / (4.0 * self.phase_multiplier())
    }
}

/// Outcome of one binary measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }
}

impl From<Outcome> for u8 {
    fn from(x: Outcome) -> u8 {
        x.bit()
    }
}

impl TryFrom<u8> for Outcome {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::One),
            _ => Err(Error::usage(format!("outcome must be 0 or 1, got {b}"))),
        }
    }
}

/// Locally optimal POVM `P_L(g)` applied for sensing time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOptimalPovm {
    pub g_tilde: f64,
    pub t_tilde: f64,
}

impl LocalOptimalPovm {
    pub fn new(g_tilde: f64, t_tilde: f64) -> Result<Self> {
        if !g_tilde.is_finite() {
            return Err(Error::usage("POVM guess must be finite"));
        }
        if !(t_tilde > 0.0 && t_tilde.is_finite()) {
            return Err(Error::usage(format!("sensing time must be positive, got {t_tilde}")));
        }
        Ok(Self { g_tilde, t_tilde })
    }

    /// Bloch vector `n x a(g)` of the effect `P(0|g)`; `P(1|g)` uses its negative.
    ///
    /// `a(g)` is the fiducial vector rotated by the phase the probe would
    /// accrue if the frequency were exactly `g`.
    pub fn effect_bloch(&self, probe: &ProbeConfig) -> Vec3 {
        let phase = TAU * probe.phase_multiplier() * self.t_tilde * self.g_tilde;
        let a = probe.bloch.0;
        let n = probe.axis.0;
        let n_x_a = cross(n, a);
        let rotated = [
            phase.cos() * a[0] + phase.sin() * n_x_a[0],
            phase.cos() * a[1] + phase.sin() * n_x_a[1],
            phase.cos() * a[2] + phase.sin() * n_x_a[2],
        ];
        cross(n, rotated)
    }

    /// `p(0|omega)` from the Bloch representation, `[1 + m . a(omega)] / 2`.
    ///
    /// Unlike [`outcome_probability`] this evaluates the general rotation, so it
    /// also serves as an independent route to the closed form.
    pub fn probability_zero_bloch(&self, probe: &ProbeConfig, omega_tilde: f64) -> f64 {
        let m = self.effect_bloch(probe);
        let phase = TAU * probe.phase_multiplier() * self.t_tilde * omega_tilde;
        let a = probe.bloch.0;
        let n = probe.axis.0;
        let n_x_a = cross(n, a);
        let along = dot(n, a);
        let (s, c) = phase.sin_cos();
        let state: Vec3 = std::array::from_fn(|k| c * a[k] + s * n_x_a[k] + (1.0 - c) * along * n[k]);
        (0.5 * (1.0 + dot(m, state))).clamp(0.0, 1.0)
    }

    /// Both effects are positive and complete iff `|n x a(g)| <= 1`.
    pub fn is_valid_for(&self, probe: &ProbeConfig) -> bool {
        norm(self.effect_bloch(probe)) <= 1.0 + NORM_TOL
    }
}

/// One recorded binary outcome together with the POVM that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub outcome: Outcome,
    pub g_tilde: f64,
    pub t_tilde: f64,
    /// Position within a parallel product step, 0 otherwise.
    pub qubit_index: u32,
}

/// Probability of outcome 0.
pub fn outcome_probability(
    g_tilde: f64,
    t_tilde: f64,
    omega_tilde: f64,
    mode: ProbeMode,
    n_qubits: u32,
) -> Result<f64> {
    check_mode(mode, n_qubits)?;
    if !(t_tilde > 0.0) {
        return Err(Error::usage(format!("sensing time must be positive, got {t_tilde}")));
    }
    let speed = if mode == ProbeMode::Ghz { f64::from(n_qubits) } else { 1.0 };
    let p = 0.5 * (1.0 + (TAU * speed * t_tilde * (omega_tilde - g_tilde)).sin());
    Ok(p.clamp(0.0, 1.0))
}

/// Bernoulli draw: outcome 0 with probability [`outcome_probability`].
pub fn sample_outcome<R: Rng + ?Sized>(
    g_tilde: f64,
    t_tilde: f64,
    omega_tilde: f64,
    mode: ProbeMode,
    n_qubits: u32,
    rng: &mut R,
) -> Result<Outcome> {
    let p0 = outcome_probability(g_tilde, t_tilde, omega_tilde, mode, n_qubits)?;
    Ok(draw(p0, rng))
}

#[inline]
pub(crate) fn draw<R: Rng + ?Sized>(p0: f64, rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    if u < p0 {
        Outcome::Zero
    } else {
        Outcome::One
    }
}

/// QFI of the encoded state, `t^2 [1 - (a . n)^2]`.
pub fn quantum_fisher_information(a: Vec3, n: Vec3, t: f64) -> Result<f64> {
    let a = BlochVector::new(a)?;
    let n = RotationAxis::new(n)?;
    let overlap = dot(a.0, n.0);
    Ok(t * t * (1.0 - overlap * overlap))
}

/// Fisher information of one measurement step under the optimal condition.
///
/// Every `P_L(g)` saturates the QFI, so this does not depend on `g` or `omega`.
pub fn fisher_information_per_measurement(t_tilde: f64, mode: ProbeMode, n_qubits: u32) -> f64 {
    let n = f64::from(n_qubits);
    let single = (TAU * t_tilde).powi(2);
    match mode {
        ProbeMode::Single => single,
        ProbeMode::ProductParallel => n * single,
        ProbeMode::Ghz => n * n * single,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use std::f64::consts::PI;

    #[test]
    fn probability_examples() {
        let p = outcome_probability(0.0, 0.25, 0.0, ProbeMode::Single, 1).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let p = outcome_probability(0.0, 0.25, 1.0, ProbeMode::Single, 1).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let p = outcome_probability(0.0, 1.0 / 20.0, 0.5, ProbeMode::Ghz, 5).unwrap();
        assert!((p - 0.5 * (1.0 + (PI / 4.0).sin())).abs() < 1e-12);
        assert!((p - 0.853553).abs() < 1e-6);
    }

    #[test]
    fn ghz_matches_bloch_route_for_effective_qubit() {
        let probe = ProbeConfig::ghz(5).unwrap();
        let povm = LocalOptimalPovm::new(0.0, 1.0 / 20.0).unwrap();
        let p = povm.probability_zero_bloch(&probe, 0.5);
        assert!((p - 0.853_553_390_593_273_7).abs() < 1e-12);
    }

    #[test]
    fn invalid_mode_combinations() {
        assert!(outcome_probability(0.0, 0.25, 0.0, ProbeMode::Single, 2).is_err());
        assert!(outcome_probability(0.0, 0.25, 0.0, ProbeMode::Ghz, 0).is_err());
        assert!(outcome_probability(0.0, 0.0, 0.0, ProbeMode::Single, 1).is_err());
        assert!(ProbeConfig::new(ProbeMode::Single, 3).is_err());
    }

    #[test]
    fn non_orthogonal_state_rejected_by_optimal_constructor() {
        let a = BlochVector::new([0.6, 0.8, 0.0]).unwrap();
        let n = RotationAxis::new([0.0, 1.0, 0.0]).unwrap();
        assert!(ProbeConfig::with_state(ProbeMode::Single, 1, a, n).is_err());
        assert!(BlochVector::new([1.0, 1.0, 0.0]).is_err());
        assert!(RotationAxis::new([0.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn degenerate_bernoulli_draws() {
        let mut rng = stream_rng(1, 1);
        for _ in 0..1000 {
            let x = sample_outcome(0.0, 0.25, 1.0, ProbeMode::Single, 1, &mut rng).unwrap();
            assert_eq!(x, Outcome::Zero);
            let y = sample_outcome(0.0, 0.25, -1.0, ProbeMode::Single, 1, &mut rng).unwrap();
            assert_eq!(y, Outcome::One);
        }
    }

    #[test]
    fn fair_coin_frequency() {
        let mut rng = stream_rng(42, 0);
        let zeros = (0..100_000)
            .filter(|_| sample_outcome(0.0, 0.25, 0.0, ProbeMode::Single, 1, &mut rng).unwrap() == Outcome::Zero)
            .count();
        let freq = zeros as f64 / 1e5;
        assert!((freq - 0.5).abs() <= 0.005, "freq = {freq}");
    }

    #[test]
    fn qfi_examples() {
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        assert_eq!(quantum_fisher_information(x, y, 1.0).unwrap(), 1.0);
        assert_eq!(quantum_fisher_information(y, y, 3.0).unwrap(), 0.0);
        let a = [0.8, 0.6, 0.0];
        assert!((quantum_fisher_information(a, y, 2.0).unwrap() - 2.56).abs() < 1e-12);
        assert!(quantum_fisher_information(x, [0.0, 1.1, 0.0], 1.0).is_err());
    }

    #[test]
    fn fisher_per_measurement_examples() {
        let f = fisher_information_per_measurement(0.25, ProbeMode::Single, 1);
        assert!((f - PI * PI / 4.0).abs() < 1e-12);
        for n in [1u32, 3, 7, 10] {
            for i in 1..6 {
                let t = f64::from(i) / (4.0 * f64::from(n));
                let f = fisher_information_per_measurement(t, ProbeMode::Ghz, n);
                let want = PI * PI * f64::from(i * i) / 4.0;
                assert!((f - want).abs() < 1e-10 * want);
            }
        }
        let f = fisher_information_per_measurement(0.25, ProbeMode::ProductParallel, 4);
        assert!((f - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn default_povm_is_a_valid_measurement() {
        let probe = ProbeConfig::single();
        for k in 0..50 {
            let g = -1.0 + 0.04 * f64::from(k);
            let povm = LocalOptimalPovm::new(g, 0.37).unwrap();
            assert!(povm.is_valid_for(&probe));
        }
    }
}
