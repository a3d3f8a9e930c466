//! TOML scenario configuration.
//!
//! Every key is optional and falls back to the reference scenario. Unknown
//! keys are rejected. Powers are given in dBm, the reference path loss in dB,
//! distances in meters and angles in radians:
//!
//! ```toml
//! alpha = 1.0
//! power_dbm = 20.0
//! noise_dbm = -80.0
//! zeta0_db = -20.0
//! d0 = 1.0
//! exp_iu = 3.0
//! exp_si = 3.0
//! exp_su = 3.0
//! phi_su = 0.7853981633974483
//! kappa_t = 0.0025
//! kappa_r = 0.0025
//! delta_osc = 1.58e-4
//! d_si = 50.0
//! d_iu = 15.0
//! # d_su defaults to hypot(d_si, d_iu)
//! # csi_error_variance defaults to the noise power, in watts
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{db_to_linear, dbm_to_watts, watts_to_dbm, Geometry, ScenarioParams, ScenarioValues};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub alpha: Option<f64>,
    pub power_dbm: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub zeta0_db: Option<f64>,
    pub d0: Option<f64>,
    pub exp_iu: Option<f64>,
    pub exp_si: Option<f64>,
    pub exp_su: Option<f64>,
    pub phi_su: Option<f64>,
    pub kappa_t: Option<f64>,
    pub kappa_r: Option<f64>,
    pub delta_osc: Option<f64>,
    pub d_si: Option<f64>,
    pub d_iu: Option<f64>,
    pub d_su: Option<f64>,
    pub csi_error_variance: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub params: ScenarioParams,
    pub csi_error_variance: f64,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (if any) and applies `key=value` overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[(String, f64)]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut table: toml::Table = text.parse().map_err(config_error)?;
        for (k, v) in overrides {
            table.insert(k.clone(), toml::Value::Float(*v));
        }
        table.try_into().map_err(config_error)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let d = ScenarioValues::default();
        let g = d.geometry;
        let d_si = self.d_si.unwrap_or(g.d_si());
        let d_iu = self.d_iu.unwrap_or(g.d_iu());
        let geometry = match self.d_su {
            Some(d_su) => Geometry::new(d_si, d_iu, d_su)?,
            None => Geometry::right_triangle(d_si, d_iu)?,
        };
        let values = ScenarioValues {
            alpha: self.alpha.unwrap_or(d.alpha),
            power: self.power_dbm.map(dbm_to_watts).transpose()?.unwrap_or(d.power),
            noise_power: self.noise_dbm.map(dbm_to_watts).transpose()?.unwrap_or(d.noise_power),
            zeta0: self.zeta0_db.map(db_to_linear).transpose()?.unwrap_or(d.zeta0),
            d0: self.d0.unwrap_or(d.d0),
            exp_iu: self.exp_iu.unwrap_or(d.exp_iu),
            exp_si: self.exp_si.unwrap_or(d.exp_si),
            exp_su: self.exp_su.unwrap_or(d.exp_su),
            phi_su: self.phi_su.unwrap_or(d.phi_su),
            kappa_t: self.kappa_t.unwrap_or(d.kappa_t),
            kappa_r: self.kappa_r.unwrap_or(d.kappa_r),
            delta_osc: self.delta_osc.unwrap_or(d.delta_osc),
            geometry,
        };
        let params = ScenarioParams::new(values)?;
        let csi_error_variance = self.csi_error_variance.unwrap_or(params.noise_power());
        if !(csi_error_variance.is_finite() && csi_error_variance >= 0.0) {
            return Err(Error::Config(format!("csi_error_variance = {csi_error_variance} must be non-negative")));
        }
        Ok(Resolved { params, csi_error_variance })
    }
}

impl Resolved {
    /// All resolved keys in config units, in key order.
    pub fn entries(&self) -> Result<BTreeMap<&'static str, f64>> {
        let p = &self.params;
        let g = p.geometry();
        Ok(BTreeMap::from([
            ("alpha", p.alpha()),
            ("power_dbm", watts_to_dbm(p.power())?),
            ("noise_dbm", watts_to_dbm(p.noise_power())?),
            ("zeta0_db", 10.0 * p.zeta0().log10()),
            ("d0", p.d0()),
            ("exp_iu", p.values().exp_iu),
            ("exp_si", p.values().exp_si),
            ("exp_su", p.values().exp_su),
            ("phi_su", p.phi_su()),
            ("kappa_t", p.kappa_t()),
            ("kappa_r", p.kappa_r()),
            ("delta_osc", p.delta_osc()),
            ("d_si", g.d_si()),
            ("d_iu", g.d_iu()),
            ("d_su", g.d_su()),
            ("csi_error_variance", self.csi_error_variance),
        ]))
    }
}
