//! Closed-form average rate, utility and gap expressions for the
//! phase-compensated IRS link, with and without hardware impairments.
//!
//! `N` is taken as a real number throughout so that utilities are plain
//! derivatives of the rate curves. All rates are in bits/s/Hz.

use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Error, Result};
use crate::scenario::{LinkBudget, ScenarioParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCoefficients {
    pub beta: f64,
    pub lambda: f64,
    pub rho: f64,
    pub mu_su: f64,
}

impl RateCoefficients {
    /// `chi(N) = beta N^2 + lambda N + mu_SU`, the mean composite gain under HWI.
    pub fn chi(&self, n: f64) -> f64 {
        (self.beta * n + self.lambda) * n + self.mu_su
    }

    pub fn chi_prime(&self, n: f64) -> f64 {
        2.0 * self.beta * n + self.lambda
    }

    /// `varpi(N) = (π²/4) beta N^2 + rho N + mu_SU`, the coherent gain without HWI.
    pub fn varpi(&self, n: f64) -> f64 {
        (0.25 * PI * PI * self.beta * n + self.rho) * n + self.mu_su
    }

    pub fn varpi_prime(&self, n: f64) -> f64 {
        0.5 * PI * PI * self.beta * n + self.rho
    }
}

pub fn coefficients(params: &ScenarioParams, budget: &LinkBudget) -> RateCoefficients {
    let a = params.alpha();
    let cascade = budget.mu_iu * budget.mu_si;
    let cross = (cascade * budget.mu_su).sqrt() * params.phi_su().cos();
    let pi2 = PI * PI;
    RateCoefficients {
        beta: 4.0 * a * a * cascade / pi2,
        lambda: (1.0 - 4.0 / pi2) * a * a * cascade + 4.0 * a / PI * cross,
        rho: 2.0 * a * cross,
        mu_su: budget.mu_su,
    }
}

fn check_n(n: f64) -> Result<()> {
    if n.is_finite() && n > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("element count {n} must be positive")))
    }
}

struct Terms {
    c: RateCoefficients,
    kappa: f64,
    /// `sigma_w^2 / P`
    s: f64,
}

impl Terms {
    fn new(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            c: coefficients(params, budget),
            kappa: params.kappa(),
            s: params.noise_power() / params.power(),
        })
    }
}

/// Approximate average rate with HWI under compensated phases.
pub fn avg_rate_hwi(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let t = Terms::new(n, params, budget)?;
    let chi = t.c.chi(n);
    Ok((chi / (t.kappa * chi + t.s)).ln_1p() / LN_2)
}

/// Derivative of [`avg_rate_hwi`] with respect to `N`.
pub fn utility_hwi(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let t = Terms::new(n, params, budget)?;
    let chi = t.c.chi(n);
    let k = t.kappa;
    Ok(t.s * t.c.chi_prime(n) / ((k * chi + t.s) * ((k + 1.0) * chi + t.s) * LN_2))
}

/// Rate of the impairment-free link.
pub fn rate_ideal(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let t = Terms::new(n, params, budget)?;
    Ok((t.c.varpi(n) / t.s).ln_1p() / LN_2)
}

pub fn utility_ideal(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let t = Terms::new(n, params, budget)?;
    Ok(t.c.varpi_prime(n) / ((t.s + t.c.varpi(n)) * LN_2))
}

/// `rate_ideal - avg_rate_hwi`, evaluated as a single logarithm.
pub fn rate_gap(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let t = Terms::new(n, params, budget)?;
    let (p, s2) = (params.power(), params.noise_power());
    let k = t.kappa;
    let chi = t.c.chi(n);
    let varpi = t.c.varpi(n);
    let num = p * k * chi + s2 + p * p * chi * varpi * k / s2 + p * varpi;
    let den = p * (k + 1.0) * chi + s2;
    Ok((num / den).log2())
}

/// `utility_ideal - utility_hwi`, evaluated as a single fraction.
pub fn utility_gap(n: f64, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let t = Terms::new(n, params, budget)?;
    let (p, s2) = (params.power(), params.noise_power());
    let k = t.kappa;
    let (chi, dchi) = (t.c.chi(n), t.c.chi_prime(n));
    let (varpi, dvarpi) = (t.c.varpi(n), t.c.varpi_prime(n));
    let num = p.powi(3) * chi * chi * (k + 1.0) * (k / s2) * dvarpi
        + p * p * (k + 1.0) * (dvarpi * chi - dchi * varpi)
        + p * p * k * (dvarpi * chi + dchi * varpi)
        + p * s2 * (dvarpi - dchi);
    let den_a = p * k * chi + s2 + p * p * varpi * chi * k / s2 + p * varpi;
    let den_b = p * (k + 1.0) * chi + s2;
    Ok(num / (den_a * den_b * LN_2))
}

/// `d varpi/dN * chi - d chi/dN * varpi`, one of the two positive brackets
/// behind the utility gap.
pub fn gap_bracket_cross(n: f64, c: &RateCoefficients) -> f64 {
    c.varpi_prime(n) * c.chi(n) - c.chi_prime(n) * c.varpi(n)
}

/// `d varpi/dN - d chi/dN`.
pub fn gap_bracket_slope(n: f64, c: &RateCoefficients) -> f64 {
    c.varpi_prime(n) - c.chi_prime(n)
}

/// Large-`N` ceiling of the average rate with HWI, `log2(1 + 1/kappa)`.
pub fn rate_limit_inf(params: &ScenarioParams) -> Result<f64> {
    let k = params.kappa();
    if k <= 0.0 {
        return Err(Error::Divergent("rate grows without bound when kappa_t + kappa_r = 0".into()));
    }
    Ok((1.0 / k).ln_1p() / LN_2)
}
