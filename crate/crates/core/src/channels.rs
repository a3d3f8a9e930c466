//! Source–IRS, IRS–destination and direct channels.
//!
//! Magnitudes follow the link budget and only the per-element phases are
//! random. A realization keeps the complex coefficients, so that perturbed
//! estimates (see `robustness`) fit the same type.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::scenario::{LinkBudget, ScenarioParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h_iu: Vec<Complex64>,
    h_si: Vec<Complex64>,
    h_su: Complex64,
}

/// The diagonals `D_IU = diag(h_IU)`, `D_SI = diag(h_SI)` and the direct coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedDiagonals {
    pub d_iu: Vec<Complex64>,
    pub d_si: Vec<Complex64>,
    pub h_su: Complex64,
}

impl ChannelRealization {
    /// Constant-magnitude channels with the given phases.
    pub fn from_phases(budget: &LinkBudget, phi_iu: &[f64], phi_si: &[f64], phi_su: f64) -> Result<Self> {
        if phi_iu.is_empty() || phi_iu.len() != phi_si.len() {
            return Err(invalid(format!(
                "phase vectors must be non-empty and equal length, got {} and {}",
                phi_iu.len(),
                phi_si.len()
            )));
        }
        if phi_iu.iter().chain(phi_si).chain([&phi_su]).any(|p| !p.is_finite()) {
            return Err(invalid("channel phases must be finite"));
        }
        let a_iu = budget.mu_iu.sqrt();
        let a_si = budget.mu_si.sqrt();
        Ok(Self {
            h_iu: phi_iu.iter().map(|&p| Complex64::from_polar(a_iu, p)).collect(),
            h_si: phi_si.iter().map(|&p| Complex64::from_polar(a_si, p)).collect(),
            h_su: Complex64::from_polar(budget.mu_su.sqrt(), phi_su),
        })
    }

    /// Arbitrary complex coefficients, e.g. channel estimates.
    pub fn from_coefficients(h_iu: Vec<Complex64>, h_si: Vec<Complex64>, h_su: Complex64) -> Result<Self> {
        if h_iu.is_empty() || h_iu.len() != h_si.len() {
            return Err(invalid("coefficient vectors must be non-empty and equal length"));
        }
        if h_iu.iter().chain(&h_si).chain([&h_su]).any(|h| !(h.re.is_finite() && h.im.is_finite())) {
            return Err(invalid("channel coefficients must be finite"));
        }
        Ok(Self { h_iu, h_si, h_su })
    }

    pub fn len(&self) -> usize {
        self.h_iu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_iu.is_empty()
    }

    pub fn h_iu(&self) -> &[Complex64] {
        &self.h_iu
    }

    pub fn h_si(&self) -> &[Complex64] {
        &self.h_si
    }

    pub fn h_su(&self) -> Complex64 {
        self.h_su
    }

    pub fn phi_iu(&self) -> Vec<f64> {
        self.h_iu.iter().map(|h| h.arg()).collect()
    }

    pub fn phi_si(&self) -> Vec<f64> {
        self.h_si.iter().map(|h| h.arg()).collect()
    }

    pub fn phi_su(&self) -> f64 {
        self.h_su.arg()
    }

    pub fn cascaded_diagonals(&self) -> CascadedDiagonals {
        CascadedDiagonals {
            d_iu: self.h_iu.clone(),
            d_si: self.h_si.clone(),
            h_su: self.h_su,
        }
    }

    /// Per-element cascaded coefficient `h_IU,i * h_SI,i`.
    pub fn cascaded(&self) -> Vec<Complex64> {
        self.h_iu.iter().zip(&self.h_si).map(|(a, b)| a * b).collect()
    }

    /// Phase shifts `theta_i = -(phi_IU,i + phi_SI,i)` that co-phase the
    /// reflected paths with each other, ignoring the direct link.
    pub fn compensating_phases(&self) -> Vec<f64> {
        self.cascaded().iter().map(|c| -c.arg()).collect()
    }

    /// Writes the phases as CSV with columns `index,phi_IU,phi_SI`.
    ///
    /// Only phases are stored; magnitudes come from the link budget on load.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "phi_IU", "phi_SI"])?;
        for (i, (iu, si)) in self.h_iu.iter().zip(&self.h_si).enumerate() {
            out.write_record([i.to_string(), format!("{:e}", iu.arg()), format!("{:e}", si.arg())])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, budget: &LinkBudget, phi_su: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut phi_iu = Vec::new();
        let mut phi_si = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Parse(format!("row {row}: missing column {k}")))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {row}: {e}")))
            };
            if field(0)? as usize != row {
                return Err(Error::Parse(format!("row {row}: indices must be consecutive from 0")));
            }
            phi_iu.push(field(1)?);
            phi_si.push(field(2)?);
        }
        Self::from_phases(budget, &phi_iu, &phi_si, phi_su)
    }
}

/// Draws a realization with i.i.d. phases uniform on `[0, 2π)` and the
/// direct-link phase fixed by the scenario.
pub fn sample_channels<R: Rng + ?Sized>(params: &ScenarioParams, n: usize, rng: &mut R) -> Result<ChannelRealization> {
    if n == 0 {
        return Err(invalid("number of reflecting elements must be at least 1"));
    }
    let phi_iu: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    let phi_si: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    ChannelRealization::from_phases(&params.link_budget(), &phi_iu, &phi_si, params.phi_su())
}
