//! Multiple-antenna decode-and-forward relay benchmark.
//!
//! The relay reuses the IRS channels (`h_SR = h_SI`, `h_RU = h_IU`) and the
//! same transceiver impairment levels. Its rate is the half-duplex upper
//! bound `min(A, B) / 2`, where `A` is the source-relay hop and `B` the
//! combined direct and relay-destination hops.

use std::f64::consts::LN_2;

use crate::closed_form::{avg_rate_hwi, coefficients, rate_limit_inf};
use crate::error::{invalid, Error, Result};
use crate::scenario::{LinkBudget, ScenarioParams};

/// Source and relay transmit powers with `P1 + P2 = 2P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfParams {
    p1: f64,
    p2: f64,
}

impl DfParams {
    /// Even split `P1 = P2 = P`.
    pub fn equal(params: &ScenarioParams) -> Self {
        Self { p1: params.power(), p2: params.power() }
    }

    /// Source power `p1`, relay power `2P - p1`.
    pub fn with_source_power(params: &ScenarioParams, p1: f64) -> Result<Self> {
        let p2 = 2.0 * params.power() - p1;
        if !(p1 > 0.0 && p2 > 0.0) {
            return Err(invalid(format!("source power {p1} must lie in (0, 2P)")));
        }
        Ok(Self { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfBranch {
    /// The source-relay hop `A` limits the rate.
    SourceRelay,
    /// The combined destination hop `B` limits the rate.
    RelayDestination,
}

impl DfBranch {
    pub fn label(&self) -> &'static str {
        match self {
            DfBranch::SourceRelay => "A",
            DfBranch::RelayDestination => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfUtility {
    pub value: f64,
    pub branch: DfBranch,
    /// `A == B` to 1e-12 relative: the bound has a kink there and `value`
    /// is the `A`-branch slope.
    pub tie: bool,
}

struct Hops {
    a: f64,
    b: f64,
    /// Denominator of the `A` SINR.
    den_a: f64,
    /// Denominator of the relay term of `B`.
    den_b: f64,
    /// Argument of the `B` logarithm.
    arg_b: f64,
}

fn hops(n: f64, df: &DfParams, params: &ScenarioParams, budget: &LinkBudget) -> Result<Hops> {
    if !(n.is_finite() && n > 0.0) {
        return Err(invalid(format!("antenna count {n} must be positive")));
    }
    let (kt, kr) = (params.kappa_t(), params.kappa_r());
    let s2 = params.noise_power();
    let (mu_si, mu_iu, mu_su) = (budget.mu_si, budget.mu_iu, budget.mu_su);
    let den_a = kr * mu_si + n * kt * mu_si + s2 / df.p1;
    let den_b = kt * mu_iu + n * kr * mu_iu + s2 / df.p2;
    let arg_b = 1.0 + mu_su / ((kt + kr) * mu_su + s2 / df.p1) + n * mu_iu / den_b;
    Ok(Hops {
        a: (n * mu_si / den_a).ln_1p() / LN_2,
        b: arg_b.log2(),
        den_a,
        den_b,
        arg_b,
    })
}

/// Source-relay and destination-side capacities `(A, B)`.
pub fn hop_rates(n: f64, df: &DfParams, params: &ScenarioParams, budget: &LinkBudget) -> Result<(f64, f64)> {
    let h = hops(n, df, params, budget)?;
    Ok((h.a, h.b))
}

pub fn df_rate_upper_bound(n: f64, df: &DfParams, params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let h = hops(n, df, params, budget)?;
    Ok(0.5 * h.a.min(h.b))
}

/// Derivative of [`df_rate_upper_bound`] on the active branch.
pub fn df_utility(n: f64, df: &DfParams, params: &ScenarioParams, budget: &LinkBudget) -> Result<DfUtility> {
    let h = hops(n, df, params, budget)?;
    let s2 = params.noise_power();
    let (kt, kr) = (params.kappa_t(), params.kappa_r());
    let slope_a = || {
        let mu = budget.mu_si;
        (kr * mu * mu + s2 / df.p1 * mu) / (2.0 * h.den_a * (h.den_a + n * mu) * LN_2)
    };
    let tie = (h.a - h.b).abs() <= 1e-12 * h.a.max(h.b);
    if tie || h.a < h.b {
        Ok(DfUtility { value: slope_a(), branch: DfBranch::SourceRelay, tie })
    } else {
        let mu = budget.mu_iu;
        let value = (kt * mu * mu + s2 / df.p2 * mu) / (2.0 * h.arg_b * h.den_b * h.den_b * LN_2);
        Ok(DfUtility { value, branch: DfBranch::RelayDestination, tie })
    }
}

/// Closed-form large-`N` and large-`P` limits for `κ = κ_t + κ_r`, assuming
/// `κ_t = κ_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics {
    pub kappa: f64,
    pub n: f64,
    /// `log2(1 + 1/κ)`.
    pub irs_rate_n_inf: f64,
    /// `log2(1 + 2/κ) / 2`.
    pub df_rate_n_inf: f64,
    /// `log2(1 + 2N/(κ + κN)) / 2`.
    pub df_rate_p_inf: f64,
    /// `log2(1 + 1/(κ² + 2κ)) / 2`, IRS minus DF as `N → ∞`.
    pub gap_n_inf: f64,
    /// IRS minus DF as `P → ∞` at `n` antennas.
    pub gap_p_inf: f64,
    pub irs_utility_p_inf: f64,
    /// `κ / ((κ + Nκ + 2N)(κ + Nκ) ln 2)`.
    pub df_utility_p_inf: f64,
}

pub fn asymptotics(params: &ScenarioParams, n: f64) -> Result<Asymptotics> {
    let k = params.kappa();
    if k <= 0.0 {
        return Err(Error::Divergent("limits are unbounded when kappa_t + kappa_r = 0".into()));
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(invalid(format!("antenna count {n} must be positive")));
    }
    Ok(Asymptotics {
        kappa: k,
        n,
        irs_rate_n_inf: rate_limit_inf(params)?,
        df_rate_n_inf: 0.5 * (2.0 / k).ln_1p() / LN_2,
        df_rate_p_inf: 0.5 * (2.0 * n / (k + k * n)).ln_1p() / LN_2,
        gap_n_inf: 0.5 * (1.0 / (k * k + 2.0 * k)).ln_1p() / LN_2,
        gap_p_inf: 0.5 * ((2.0 * k + n + 1.0) / ((n + 1.0) * k * k + 2.0 * n * k)).ln_1p() / LN_2,
        irs_utility_p_inf: 0.0,
        df_utility_p_inf: k / ((k + n * k + 2.0 * n) * (k + n * k) * LN_2),
    })
}

/// Total impairment level above which one IRS element already beats the
/// relay with unboundedly many antennas.
pub fn kappa_threshold(params: &ScenarioParams, budget: &LinkBudget) -> Result<f64> {
    let c = coefficients(params, budget);
    let q = c.beta + c.lambda + c.mu_su;
    let (p, s2) = (params.power(), params.noise_power());
    let den = p * p * q * q - 2.0 * s2 * p * q;
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "threshold undefined: P(beta + lambda + mu_SU) = {:e} does not exceed 2 sigma_w^2 = {:e}",
            p * q,
            2.0 * s2
        )));
    }
    Ok(2.0 * s2 * s2 / den)
}

/// `avg_rate_hwi(1) - log2(1 + 2/κ) / 2` for an even split of `κ`.
pub fn single_element_margin(params: &ScenarioParams, budget: &LinkBudget, kappa: f64) -> Result<f64> {
    let q = params.with_kappas(0.5 * kappa, 0.5 * kappa)?;
    Ok(avg_rate_hwi(1.0, &q, budget)? - 0.5 * (2.0 / kappa).ln_1p() / LN_2)
}
