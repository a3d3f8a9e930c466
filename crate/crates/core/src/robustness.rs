//! Sensitivity of the optimized phases to channel-estimation errors and to
//! residual phase noise at the surface.
//!
//! Variants share the clean run's seed tag, so all of them see the same
//! phase-error draws and their rate losses can be estimated from paired
//! differences.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::channels::ChannelRealization;
use crate::error::{invalid, Result};
use crate::hwi::{sample_phase_errors, sample_phase_errors_with_support, PhaseErrorVector};
use crate::monte_carlo::{instantaneous_rate_with_phi, reflection_diagonal, sample_trials, SeedStream, TrialAverage};
use crate::optimizer::{optimize, optimize_and_evaluate, OptimizationReport, OptimizerSettings};
use crate::scenario::ScenarioParams;

use std::f64::consts::FRAC_PI_2;

/// Additive zero-mean circularly-symmetric Gaussian estimation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiErrorModel {
    error_variance: f64,
}

impl CsiErrorModel {
    pub fn new(error_variance: f64) -> Result<Self> {
        if !(error_variance.is_finite() && error_variance >= 0.0) {
            return Err(invalid(format!("CSI error variance {error_variance} must be non-negative")));
        }
        Ok(Self { error_variance })
    }

    /// Error variance equal to the receiver noise power.
    pub fn from_params(params: &ScenarioParams) -> Self {
        Self { error_variance: params.noise_power() }
    }

    pub fn error_variance(&self) -> f64 {
        self.error_variance
    }
}

/// Draws `CN(0, v)` noise, real and imaginary parts each with variance `v/2`.
fn complex_gaussian<R: Rng + ?Sized>(v: f64, rng: &mut R) -> Complex64 {
    let d = Normal::new(0.0, (0.5 * v).sqrt()).expect("finite std dev");
    Complex64::new(d.sample(rng), d.sample(rng))
}

/// Channel estimate: every coefficient of `ch` plus independent `CN(0, v)` error.
pub fn perturb_csi<R: Rng + ?Sized>(ch: &ChannelRealization, model: &CsiErrorModel, rng: &mut R) -> Result<ChannelRealization> {
    let v = model.error_variance;
    if v == 0.0 {
        return Ok(ch.clone());
    }
    let h_iu = ch.h_iu().iter().map(|h| h + complex_gaussian(v, rng)).collect();
    let h_si = ch.h_si().iter().map(|h| h + complex_gaussian(v, rng)).collect();
    let h_su = ch.h_su() + complex_gaussian(v, rng);
    ChannelRealization::from_coefficients(h_iu, h_si, h_su)
}

/// Residual phase noise `θ_p`, uniform on `[-π/2, π/2]` like the surface errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPhaseNoise {
    theta_p: PhaseErrorVector,
}

impl ResidualPhaseNoise {
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Ok(Self { theta_p: sample_phase_errors(n, rng)? })
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta_p: PhaseErrorVector::zeros(n) }
    }

    pub fn angles(&self) -> &[f64] {
        self.theta_p.angles()
    }

    /// Realized phases `θ + θ_p`.
    pub fn apply(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().zip(self.angles()).map(|(t, p)| t + p).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantOutcome {
    pub theta: Vec<f64>,
    pub rank1_certified: bool,
    pub average: TrialAverage,
    pub samples: Vec<f64>,
}

/// Seed tag offset for the one-off channel-estimate draw of a run.
const ESTIMATE_TAG: u64 = 1 << 32;

/// Optimizes on an erroneous estimate of `ch_true` and evaluates the result on
/// `ch_true` with the same phase-error draws as the clean run with `tag`.
pub fn optimize_with_imperfect_csi(
    ch_true: &ChannelRealization,
    model: &CsiErrorModel,
    params: &ScenarioParams,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    settings: &OptimizerSettings,
) -> Result<VariantOutcome> {
    let estimate = perturb_csi(ch_true, model, &mut seeds.rng(tag | ESTIMATE_TAG, 0))?;
    let (_, _, lifted) = optimize(&estimate, params, settings)?;
    let samples = crate::monte_carlo::fixed_phase_samples(&lifted.theta, ch_true, params, trials, seeds, tag, settings.antithetic)?;
    Ok(VariantOutcome {
        average: TrialAverage::from_samples(&samples)?,
        samples,
        rank1_certified: lifted.rank1_certified,
        theta: lifted.theta,
    })
}

/// Per-trial rates with phases `theta_opt + θ_p`, where `θ_p` is uniform on
/// `[-w, w]` (`w = π/2` by default, `w = 0` disables it).
#[allow(clippy::too_many_arguments)]
pub fn residual_phase_noise_samples(
    theta_opt: &[f64],
    ch: &ChannelRealization,
    params: &ScenarioParams,
    half_width: f64,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    antithetic: bool,
) -> Result<Vec<f64>> {
    let n = ch.len();
    if theta_opt.len() != n {
        return Err(invalid(format!("{} phase shifts for {n} elements", theta_opt.len())));
    }
    let alpha = params.alpha();
    sample_trials(
        |rng| {
            let e = sample_phase_errors(n, rng)?;
            let tp = sample_phase_errors_with_support(n, half_width, rng)?;
            let rate = |e: &PhaseErrorVector, tp: &PhaseErrorVector| -> Result<f64> {
                let theta: Vec<f64> = theta_opt.iter().zip(tp.angles()).map(|(t, p)| t + p).collect();
                instantaneous_rate_with_phi(&reflection_diagonal(&theta, alpha), ch, e, params)
            };
            let r = rate(&e, &tp)?;
            if antithetic {
                Ok(0.5 * (r + rate(&e.mirrored(), &tp.mirrored())?))
            } else {
                Ok(r)
            }
        },
        trials,
        seeds,
        tag,
    )
}

pub fn evaluate_with_residual_phase_noise(
    theta_opt: &[f64],
    ch: &ChannelRealization,
    params: &ScenarioParams,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    antithetic: bool,
) -> Result<TrialAverage> {
    TrialAverage::from_samples(&residual_phase_noise_samples(theta_opt, ch, params, FRAC_PI_2, trials, seeds, tag, antithetic)?)
}

/// Clean, imperfect-CSI and residual-phase-noise results at one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessComparison {
    pub clean: OptimizationReport,
    pub imperfect_csi: VariantOutcome,
    pub residual_phase_noise: VariantOutcome,
    /// Paired `clean - imperfect_csi`.
    pub csi_loss: TrialAverage,
    /// Paired `clean - residual_phase_noise`.
    pub residual_loss: TrialAverage,
    /// Paired `imperfect_csi - residual_phase_noise`.
    pub csi_over_residual: TrialAverage,
}

pub fn compare_variants(
    ch: &ChannelRealization,
    params: &ScenarioParams,
    model: &CsiErrorModel,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    settings: &OptimizerSettings,
) -> Result<RobustnessComparison> {
    let clean = optimize_and_evaluate(ch, params, trials, seeds, tag, settings)?;
    let imperfect_csi = optimize_with_imperfect_csi(ch, model, params, trials, seeds, tag, settings)?;
    let rpn = residual_phase_noise_samples(clean.theta(), ch, params, FRAC_PI_2, trials, seeds, tag, settings.antithetic)?;
    let residual_phase_noise = VariantOutcome {
        theta: clean.theta().to_vec(),
        rank1_certified: clean.lifted.rank1_certified,
        average: TrialAverage::from_samples(&rpn)?,
        samples: rpn,
    };
    Ok(RobustnessComparison {
        csi_loss: TrialAverage::paired_difference(&clean.samples, &imperfect_csi.samples)?,
        residual_loss: TrialAverage::paired_difference(&clean.samples, &residual_phase_noise.samples)?,
        csi_over_residual: TrialAverage::paired_difference(&imperfect_csi.samples, &residual_phase_noise.samples)?,
        clean,
        imperfect_csi,
        residual_phase_noise,
    })
}
