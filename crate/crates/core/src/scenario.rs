//! Physical constants, geometry and link budget of the IRS-aided link.
//!
//! Everything in this module is stored in linear SI units. Decibel values are
//! accepted only through the explicit conversion helpers, which the config
//! loader and CLI use at the boundary.

use std::f64::consts::FRAC_PI_4;

use crate::error::{invalid, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(x_dbm: f64) -> Result<f64> {
    if !x_dbm.is_finite() {
        return Err(invalid(format!("power level {x_dbm} dBm is not finite")));
    }
    Ok(10f64.powf((x_dbm - 30.0) / 10.0))
}

/// Converts a power in watts to dBm. The power must be strictly positive.
pub fn watts_to_dbm(watts: f64) -> Result<f64> {
    if !(watts.is_finite() && watts > 0.0) {
        return Err(invalid(format!("power {watts} W has no dBm value")));
    }
    Ok(10.0 * watts.log10() + 30.0)
}

/// Converts a ratio in dB to a linear factor.
pub fn db_to_linear(x_db: f64) -> Result<f64> {
    if !x_db.is_finite() {
        return Err(invalid(format!("ratio {x_db} dB is not finite")));
    }
    Ok(10f64.powf(x_db / 10.0))
}

/// Distances between source (S), IRS (I) and destination (U), in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    d_si: f64,
    d_iu: f64,
    d_su: f64,
}

impl Geometry {
    pub fn new(d_si: f64, d_iu: f64, d_su: f64) -> Result<Self> {
        for (name, d) in [("d_SI", d_si), ("d_IU", d_iu), ("d_SU", d_su)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(invalid(format!("{name} = {d} m must be positive")));
            }
        }
        Ok(Self { d_si, d_iu, d_su })
    }

    /// Source, IRS and destination on a right triangle with the right angle at the IRS.
    pub fn right_triangle(d_si: f64, d_iu: f64) -> Result<Self> {
        Self::new(d_si, d_iu, d_si.hypot(d_iu))
    }

    pub fn d_si(&self) -> f64 {
        self.d_si
    }

    pub fn d_iu(&self) -> f64 {
        self.d_iu
    }

    pub fn d_su(&self) -> f64 {
        self.d_su
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self::right_triangle(50.0, 15.0).expect("default geometry is valid")
    }
}

/// Linear power attenuation coefficients of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub mu_iu: f64,
    pub mu_si: f64,
    pub mu_su: f64,
}

impl LinkBudget {
    /// Log-distance path loss `zeta0 * (d0 / d)^exponent`.
    pub fn path_gain(zeta0: f64, d0: f64, distance: f64, exponent: f64) -> Result<f64> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(invalid(format!("distance {distance} m must be positive")));
        }
        if !(d0 > 0.0 && zeta0 > 0.0) {
            return Err(invalid("reference distance and path loss must be positive"));
        }
        Ok(zeta0 * (d0 / distance).powf(exponent))
    }
}

/// Plain, unvalidated scenario values. Turn into [`ScenarioParams`] with
/// [`ScenarioParams::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioValues {
    pub alpha: f64,
    /// Transmit power in watts.
    pub power: f64,
    /// Receiver noise power in watts, noise amplification already folded in.
    pub noise_power: f64,
    pub zeta0: f64,
    pub d0: f64,
    pub exp_iu: f64,
    pub exp_si: f64,
    pub exp_su: f64,
    pub phi_su: f64,
    pub kappa_t: f64,
    pub kappa_r: f64,
    pub delta_osc: f64,
    pub geometry: Geometry,
}

impl Default for ScenarioValues {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            power: 0.1,
            noise_power: 1e-11,
            zeta0: 0.01,
            d0: 1.0,
            exp_iu: 3.0,
            exp_si: 3.0,
            exp_su: 3.0,
            phi_su: FRAC_PI_4,
            kappa_t: 0.0025,
            kappa_r: 0.0025,
            delta_osc: 1.58e-4,
            geometry: Geometry::default(),
        }
    }
}

/// Validated, immutable scenario. Experiments derive modified copies through
/// the `with_*` methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    v: ScenarioValues,
}

/// The reference scenario used throughout the experiments.
pub fn default_scenario() -> ScenarioParams {
    ScenarioParams::new(ScenarioValues::default()).expect("default scenario is valid")
}

impl Default for ScenarioParams {
    fn default() -> Self {
        default_scenario()
    }
}

impl ScenarioParams {
    pub fn new(v: ScenarioValues) -> Result<Self> {
        if !(v.alpha > 0.0 && v.alpha <= 1.0) {
            return Err(invalid(format!("alpha = {} must lie in (0, 1]", v.alpha)));
        }
        if !(v.power.is_finite() && v.power > 0.0) {
            return Err(invalid(format!("power = {} W must be positive", v.power)));
        }
        if !(v.noise_power.is_finite() && v.noise_power > 0.0) {
            return Err(invalid(format!("noise power = {} W must be positive", v.noise_power)));
        }
        if !(v.zeta0.is_finite() && v.zeta0 > 0.0 && v.d0.is_finite() && v.d0 > 0.0) {
            return Err(invalid("zeta0 and d0 must be positive"));
        }
        for (name, e) in [("exp_IU", v.exp_iu), ("exp_SI", v.exp_si), ("exp_SU", v.exp_su)] {
            if !e.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        if !v.phi_su.is_finite() {
            return Err(invalid("phi_SU must be finite"));
        }
        for (name, k) in [("kappa_t", v.kappa_t), ("kappa_r", v.kappa_r), ("delta_osc", v.delta_osc)] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(invalid(format!("{name} = {k} must be non-negative")));
            }
        }
        Ok(Self { v })
    }

    pub fn values(&self) -> ScenarioValues {
        self.v
    }

    pub fn alpha(&self) -> f64 {
        self.v.alpha
    }

    pub fn power(&self) -> f64 {
        self.v.power
    }

    pub fn noise_power(&self) -> f64 {
        self.v.noise_power
    }

    pub fn zeta0(&self) -> f64 {
        self.v.zeta0
    }

    pub fn d0(&self) -> f64 {
        self.v.d0
    }

    pub fn phi_su(&self) -> f64 {
        self.v.phi_su
    }

    pub fn kappa_t(&self) -> f64 {
        self.v.kappa_t
    }

    pub fn kappa_r(&self) -> f64 {
        self.v.kappa_r
    }

    /// Total distortion level `kappa_t + kappa_r`.
    pub fn kappa(&self) -> f64 {
        self.v.kappa_t + self.v.kappa_r
    }

    pub fn delta_osc(&self) -> f64 {
        self.v.delta_osc
    }

    pub fn geometry(&self) -> Geometry {
        self.v.geometry
    }

    pub fn link_budget(&self) -> LinkBudget {
        let g = self.v.geometry;
        let gain = |d, e| {
            LinkBudget::path_gain(self.v.zeta0, self.v.d0, d, e).expect("validated geometry")
        };
        LinkBudget {
            mu_iu: gain(g.d_iu, self.v.exp_iu),
            mu_si: gain(g.d_si, self.v.exp_si),
            mu_su: gain(g.d_su, self.v.exp_su),
        }
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(ScenarioValues { power, ..self.v })
    }

    pub fn with_kappas(&self, kappa_t: f64, kappa_r: f64) -> Result<Self> {
        Self::new(ScenarioValues { kappa_t, kappa_r, ..self.v })
    }

    pub fn with_phi_su(&self, phi_su: f64) -> Result<Self> {
        Self::new(ScenarioValues { phi_su, ..self.v })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(ScenarioValues { alpha, ..self.v })
    }

    pub fn with_geometry(&self, geometry: Geometry) -> Result<Self> {
        Self::new(ScenarioValues { geometry, ..self.v })
    }
}
