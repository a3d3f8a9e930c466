//! Monte Carlo evaluation of instantaneous rates under hardware impairments.
//!
//! Every trial gets its own random stream derived from a master seed and the
//! trial index, so averages do not depend on thread count or scheduling.
//! Trials can be antithetic: each one evaluates an error draw and its mirror
//! image and reports the mean of the two.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::ChannelRealization;
use crate::error::{invalid, Result};
use crate::hwi::{sample_phase_errors, PhaseErrorVector};
use crate::scenario::{LinkBudget, ScenarioParams};

/// Sample mean of per-trial rates and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialAverage {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl TrialAverage {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(invalid("at least one trial is required"));
        }
        let mean = pairwise_sum(samples) / n as f64;
        let std_error = if n > 1 {
            let dev: Vec<f64> = samples.iter().map(|x| (x - mean).powi(2)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, std_error, trials: n })
    }

    /// Statistics of `a_i - b_i` for paired samples on common random numbers.
    pub fn paired_difference(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(invalid("paired samples must have equal length"));
        }
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Self::from_samples(&d)
    }
}

/// Summation with `O(log n)` error growth and a fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Counter-based source of independent per-trial generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Generator for trial `index` of the experiment component `tag`.
    pub fn rng(&self, tag: u64, index: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&tag.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}

/// Signal-to-interference-plus-noise ratio for a composite channel `z`.
pub fn sinr(z: Complex64, params: &ScenarioParams) -> f64 {
    let g = z.norm_sqr();
    let p = params.power();
    p * g / (p * params.kappa() * g + params.noise_power())
}

pub fn rate_from_composite(z: Complex64, params: &ScenarioParams) -> f64 {
    sinr(z, params).ln_1p() / LN_2
}

/// `alpha g_IU^T Θ_E g_SI + h_SU` for compensated phases.
pub fn composite_compensated(params: &ScenarioParams, budget: &LinkBudget, errors: &PhaseErrorVector) -> Complex64 {
    let amp = params.alpha() * (budget.mu_iu * budget.mu_si).sqrt();
    let sum: Complex64 = errors.phasors().iter().sum();
    amp * sum + Complex64::from_polar(budget.mu_su.sqrt(), params.phi_su())
}

/// Instantaneous rate when every element cancels its cascaded channel phase.
pub fn instantaneous_rate_compensated(
    n: usize,
    params: &ScenarioParams,
    budget: &LinkBudget,
    errors: &PhaseErrorVector,
) -> Result<f64> {
    if errors.len() != n {
        return Err(invalid(format!("expected {n} phase errors, got {}", errors.len())));
    }
    Ok(rate_from_composite(composite_compensated(params, budget, errors), params))
}

/// `h_IU^T Φ Θ_E h_SI + h_SU` for an arbitrary reflection diagonal.
pub fn composite_with_phi(phi: &[Complex64], ch: &ChannelRealization, errors: &PhaseErrorVector) -> Complex64 {
    let e = errors.phasors();
    let reflected: Complex64 = ch
        .h_iu()
        .iter()
        .zip(ch.h_si())
        .zip(phi)
        .zip(&e)
        .map(|(((iu, si), f), t)| iu * f * t * si)
        .sum();
    reflected + ch.h_su()
}

/// Instantaneous rate with reflection diagonal `phi` on the true channels.
pub fn instantaneous_rate_with_phi(
    phi: &[Complex64],
    ch: &ChannelRealization,
    errors: &PhaseErrorVector,
    params: &ScenarioParams,
) -> Result<f64> {
    let a = params.alpha();
    if let Some(f) = phi.iter().find(|f| (f.norm() - a).abs() > 1e-9 * a) {
        return Err(invalid(format!("reflection coefficient modulus {} differs from alpha {a}", f.norm())));
    }
    rate_with_phi_unchecked(phi, ch, errors, params)
}

pub(crate) fn rate_with_phi_unchecked(
    phi: &[Complex64],
    ch: &ChannelRealization,
    errors: &PhaseErrorVector,
    params: &ScenarioParams,
) -> Result<f64> {
    if phi.len() != ch.len() || errors.len() != ch.len() {
        return Err(invalid(format!(
            "dimension mismatch: {} reflection coefficients, {} errors, {} elements",
            phi.len(),
            errors.len(),
            ch.len()
        )));
    }
    Ok(rate_from_composite(composite_with_phi(phi, ch, errors), params))
}

/// Reflection diagonal `alpha e^{j theta_i}`.
pub fn reflection_diagonal(theta: &[f64], alpha: f64) -> Vec<Complex64> {
    theta.iter().map(|&t| Complex64::from_polar(alpha, t)).collect()
}

/// Per-trial samples of `sampler`, trial `i` drawing from `seeds.rng(tag, i)`.
pub fn sample_trials<F>(sampler: F, trials: usize, seeds: &SeedStream, tag: u64) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|i| sampler(&mut seeds.rng(tag, i)))
        .collect()
}

pub fn average_rate<F>(sampler: F, trials: usize, seeds: &SeedStream, tag: u64) -> Result<TrialAverage>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    TrialAverage::from_samples(&sample_trials(sampler, trials, seeds, tag)?)
}

/// Per-trial samples of the compensated-phase rate at `n` elements.
pub fn compensated_samples(
    n: usize,
    params: &ScenarioParams,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    antithetic: bool,
) -> Result<Vec<f64>> {
    let budget = params.link_budget();
    sample_trials(
        |rng| {
            let e = sample_phase_errors(n, rng)?;
            let r = instantaneous_rate_compensated(n, params, &budget, &e)?;
            if antithetic {
                Ok(0.5 * (r + instantaneous_rate_compensated(n, params, &budget, &e.mirrored())?))
            } else {
                Ok(r)
            }
        },
        trials,
        seeds,
        tag,
    )
}

pub fn average_rate_compensated(
    n: usize,
    params: &ScenarioParams,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    antithetic: bool,
) -> Result<TrialAverage> {
    TrialAverage::from_samples(&compensated_samples(n, params, trials, seeds, tag, antithetic)?)
}

/// Per-trial samples of the rate with fixed phase shifts `theta` on `ch`.
pub fn fixed_phase_samples(
    theta: &[f64],
    ch: &ChannelRealization,
    params: &ScenarioParams,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    antithetic: bool,
) -> Result<Vec<f64>> {
    let phi = reflection_diagonal(theta, params.alpha());
    sample_trials(
        |rng| {
            let e = sample_phase_errors(ch.len(), rng)?;
            let r = instantaneous_rate_with_phi(&phi, ch, &e, params)?;
            if antithetic {
                Ok(0.5 * (r + instantaneous_rate_with_phi(&phi, ch, &e.mirrored(), params)?))
            } else {
                Ok(r)
            }
        },
        trials,
        seeds,
        tag,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::sample_channels;
    use crate::closed_form::avg_rate_hwi;
    use crate::hwi::PhaseDriftState;
    use crate::scenario::default_scenario;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn coherent_gain_without_errors() {
        let p = default_scenario().with_phi_su(0.0).unwrap();
        let b = p.link_budget();
        let n = 10;
        let z = composite_compensated(&p, &b, &PhaseErrorVector::zeros(n));
        let want = (n as f64 * (b.mu_iu * b.mu_si).sqrt() + b.mu_su.sqrt()).powi(2);
        assert!((z.norm_sqr() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_drift_leaves_rate_unchanged() {
        let p = default_scenario();
        let b = p.link_budget();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut drift = PhaseDriftState::new(p.delta_osc()).unwrap();
        for _ in 0..200 {
            drift = drift.advance(&mut rng);
            let e = sample_phase_errors(16, &mut rng).unwrap();
            let z = composite_compensated(&p, &b, &e);
            let r0 = rate_from_composite(z, &p);
            let r1 = rate_from_composite(z * drift.phasor(), &p);
            assert!((r0 - r1).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let p = default_scenario();
        let b = p.link_budget();
        assert!(instantaneous_rate_compensated(3, &p, &b, &PhaseErrorVector::zeros(2)).is_err());
    }

    #[test]
    fn compensating_phi_reduces_to_compensated_rate() {
        let p = default_scenario();
        let b = p.link_budget();
        let ch = sample_channels(&p, 12, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let phi = reflection_diagonal(&ch.compensating_phases(), p.alpha());
        let e = PhaseErrorVector::zeros(12);
        let a = instantaneous_rate_with_phi(&phi, &ch, &e, &p).unwrap();
        let c = instantaneous_rate_compensated(12, &p, &b, &e).unwrap();
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn modulus_violation_is_rejected() {
        let p = default_scenario().with_alpha(0.5).unwrap();
        let ch = sample_channels(&p, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let phi = vec![Complex64::new(1.0, 0.0); 2];
        assert!(instantaneous_rate_with_phi(&phi, &ch, &PhaseErrorVector::zeros(2), &p).is_err());
    }

    #[test]
    fn direct_path_only_without_reflection() {
        let p = default_scenario();
        let b = p.link_budget();
        let ch = sample_channels(&p, 4, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let r = rate_with_phi_unchecked(&[Complex64::new(0.0, 0.0); 4], &ch, &PhaseErrorVector::zeros(4), &p).unwrap();
        let (pw, s2) = (p.power(), p.noise_power());
        let want = (1.0 + pw * b.mu_su / (pw * p.kappa() * b.mu_su + s2)).log2();
        assert!((r - want).abs() < 1e-12);
    }

    #[test]
    fn grid_search_dominates_random_phases() {
        let p = default_scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = sample_channels(&p, 2, &mut rng).unwrap();
        let e = PhaseErrorVector::zeros(2);
        let rate = |t0: f64, t1: f64| {
            instantaneous_rate_with_phi(&reflection_diagonal(&[t0, t1], 1.0), &ch, &e, &p).unwrap()
        };
        let grid: Vec<f64> = (0..16).map(|k| k as f64 * TAU / 16.0).collect();
        let best = grid.iter().flat_map(|&a| grid.iter().map(move |&b| (a, b))).map(|(a, b)| rate(a, b)).fold(0.0, f64::max);
        for _ in 0..100 {
            let r = rate(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
            // A 16-point grid is within π/16 of any phase; allow its worst-case loss.
            assert!(best >= r - 1e-2 * r.abs(), "{best} < {r}");
        }
    }

    #[test]
    fn constant_sampler_has_zero_error() {
        let avg = average_rate(|_| Ok(2.5), 50, &SeedStream::new(1), 0).unwrap();
        assert_eq!(avg.mean, 2.5);
        assert_eq!(avg.std_error, 0.0);
        assert!(average_rate(|_| Ok(1.0), 0, &SeedStream::new(1), 0).is_err());
    }

    #[test]
    fn results_independent_of_thread_count() {
        let p = default_scenario();
        let seeds = SeedStream::new(42);
        let a = average_rate_compensated(64, &p, 200, &seeds, 7, false).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| average_rate_compensated(64, &p, 200, &seeds, 7, false).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn mean_matches_closed_form() {
        let p = default_scenario();
        let b = p.link_budget();
        let seeds = SeedStream::new(9);
        let avg = average_rate_compensated(500, &p, 1000, &seeds, 1, false).unwrap();
        let cf = avg_rate_hwi(500.0, &p, &b).unwrap();
        assert!((avg.mean - cf).abs() < 3.0 * avg.std_error.max(1e-4), "{} vs {cf}", avg.mean);
        let avg = average_rate_compensated(5000, &p, 1000, &seeds, 2, false).unwrap();
        assert!((avg.mean - avg_rate_hwi(5000.0, &p, &b).unwrap()).abs() < 0.05);
    }

    #[test]
    fn single_element_matches_closed_form() {
        let p = default_scenario();
        let b = p.link_budget();
        let avg = average_rate_compensated(1, &p, 100_000, &SeedStream::new(5), 0, false).unwrap();
        let cf = avg_rate_hwi(1.0, &p, &b).unwrap();
        assert!((avg.mean / cf - 1.0).abs() < 0.02, "{} vs {cf}", avg.mean);
    }

    #[test]
    fn standard_error_scales_with_trials() {
        let p = default_scenario();
        let seeds = SeedStream::new(11);
        let a = average_rate_compensated(100, &p, 2000, &seeds, 0, false).unwrap();
        let b = average_rate_compensated(100, &p, 4000, &seeds, 0, false).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn antithetic_pairs_reduce_variance() {
        let p = default_scenario();
        let seeds = SeedStream::new(13);
        let plain = average_rate_compensated(25, &p, 2000, &seeds, 0, false).unwrap();
        let anti = average_rate_compensated(25, &p, 2000, &seeds, 0, true).unwrap();
        assert!(anti.std_error < plain.std_error);
        assert!((anti.mean - plain.mean).abs() < 3.0 * (plain.std_error + anti.std_error));
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn higher_kappa_lowers_every_sample(seed in any::<u64>(), n in 1usize..64, dk in 1e-4f64..0.05) {
            let p = default_scenario();
            let q = p.with_kappas(p.kappa_t() + dk, p.kappa_r()).unwrap();
            let b = p.link_budget();
            let e = sample_phase_errors(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let r_p = instantaneous_rate_compensated(n, &p, &b, &e).unwrap();
            let r_q = instantaneous_rate_compensated(n, &q, &b, &e).unwrap();
            prop_assert!(r_q < r_p);
            prop_assert!(r_q >= 0.0);
        }

        #[test]
        fn rates_are_nonnegative(theta in proptest::collection::vec(-FRAC_PI_2..FRAC_PI_2, 1..20)) {
            let p = default_scenario();
            let e = PhaseErrorVector::new(theta).unwrap();
            prop_assert!(instantaneous_rate_compensated(e.len(), &p, &p.link_budget(), &e).unwrap() >= 0.0);
        }
    }
}
