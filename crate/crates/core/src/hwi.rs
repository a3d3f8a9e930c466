//! Hardware impairments: IRS phase errors, receiver phase drift and
//! transceiver distortion noise.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::scenario::ScenarioParams;

/// `E[e^{j theta_E}]` for errors uniform on `[-π/2, π/2]`.
pub const MEAN_ERROR_PHASOR: f64 = FRAC_2_PI;

/// `E[e^{j(theta_Ei - theta_Ej)}]`, `i != j`, for the same support.
pub const PAIR_ERROR_CORRELATION: f64 = 4.0 / (PI * PI);

/// IRS phase errors `theta_E`, drawn i.i.d. uniform on `[-w, w]`.
///
/// The default half-width `w = π/2` is the one the closed-form constants
/// `2/π` and `4/π²` are derived for. Other supports are accepted for
/// exploration; for those use [`PhaseErrorVector::mean_phasor`] instead of
/// the constants, and note that `closed_form` still assumes `π/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseErrorVector {
    theta: Vec<f64>,
    half_width: f64,
}

impl PhaseErrorVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        Self::with_support(theta, FRAC_PI_2)
    }

    pub fn with_support(theta: Vec<f64>, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(invalid(format!("support half-width {half_width} must be non-negative")));
        }
        if let Some(t) = theta.iter().find(|t| !(t.abs() <= half_width)) {
            return Err(invalid(format!("phase error {t} outside [-{half_width}, {half_width}]")));
        }
        Ok(Self { theta, half_width })
    }

    /// Error-free surface of `n` elements.
    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n], half_width: FRAC_PI_2 }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Diagonal of `Θ_E`.
    pub fn phasors(&self) -> Vec<Complex64> {
        self.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }

    /// Mirror image `-theta_E`, which has the same distribution.
    pub fn mirrored(&self) -> Self {
        Self { theta: self.theta.iter().map(|t| -t).collect(), half_width: self.half_width }
    }

    /// `E[e^{j theta}]` for uniform errors on `[-w, w]`: `sin(w) / w`.
    pub fn mean_phasor(half_width: f64) -> f64 {
        if half_width == 0.0 {
            1.0
        } else {
            half_width.sin() / half_width
        }
    }
}

pub fn sample_phase_errors<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PhaseErrorVector> {
    sample_phase_errors_with_support(n, FRAC_PI_2, rng)
}

pub fn sample_phase_errors_with_support<R: Rng + ?Sized>(
    n: usize,
    half_width: f64,
    rng: &mut R,
) -> Result<PhaseErrorVector> {
    if n == 0 {
        return Err(invalid("phase error vector needs at least one element"));
    }
    if !(half_width.is_finite() && half_width >= 0.0) {
        return Err(invalid(format!("support half-width {half_width} must be non-negative")));
    }
    let theta = if half_width == 0.0 {
        vec![0.0; n]
    } else {
        (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect()
    };
    Ok(PhaseErrorVector { theta, half_width })
}

/// Receiver oscillator phase, a Wiener process `psi(t) ~ N(psi(t-1), delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDriftState {
    pub psi: f64,
    pub delta_osc: f64,
}

impl PhaseDriftState {
    /// Drift process started at `psi(0) = 0`.
    pub fn new(delta_osc: f64) -> Result<Self> {
        if !(delta_osc.is_finite() && delta_osc >= 0.0) {
            return Err(invalid(format!("oscillator quality {delta_osc} must be non-negative")));
        }
        Ok(Self { psi: 0.0, delta_osc })
    }

    /// One Wiener step.
    pub fn advance<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        if self.delta_osc == 0.0 {
            return *self;
        }
        let step = Normal::new(0.0, self.delta_osc.sqrt()).expect("finite std dev");
        Self { psi: self.psi + step.sample(rng), delta_osc: self.delta_osc }
    }

    /// Multiplicative drift factor `e^{j psi}`; unit modulus for every state.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.psi)
    }
}

/// Distortion-noise variances for unit-power symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionVariances {
    /// Transmitter distortion `kappa_t * P`.
    pub upsilon_t: f64,
    /// Receiver distortion `kappa_r * P * |effective channel|^2`.
    pub v_r: f64,
}

pub fn distortion_variances(params: &ScenarioParams, composite_gain: f64) -> Result<DistortionVariances> {
    if !(composite_gain.is_finite() && composite_gain >= 0.0) {
        return Err(invalid(format!("composite gain {composite_gain} must be non-negative")));
    }
    Ok(DistortionVariances {
        upsilon_t: params.kappa_t() * params.power(),
        v_r: params.kappa_r() * params.power() * composite_gain,
    })
}
