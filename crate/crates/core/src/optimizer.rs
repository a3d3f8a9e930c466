//! Statistical phase-shift optimization.
//!
//! The received gain `|h_IU^T Φ Θ_E h_SI + h_SU|^2` is written as the
//! quadratic form `a^H Ξ a + |h_SU|^2` with `a = [α e^{-jθ}; 1]`. Replacing
//! `Ξ` by its expectation over the phase errors, lifting `X = a a^H` and
//! applying the Charnes-Cooper substitution `Y = μ̃ X` turns the SINR
//! maximization into a linear SDP. The lifted variable is stored as one PSD
//! matrix of dimension `N + 2`, with `μ̃` on the last diagonal slot.

use std::f64::consts::{FRAC_2_PI, LN_2};

use num_complex::Complex64;

use crate::channels::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::hwi::{PhaseErrorVector, PAIR_ERROR_CORRELATION};
use crate::monte_carlo::{fixed_phase_samples, SeedStream, TrialAverage};
use crate::scenario::ScenarioParams;
use crate::sdp::{solve, HermitianMatrix, SdpProblem, SdpSolution, SdpStatus, SdpTolerances};

/// `(N+1)×(N+1)` matrix of the gain quadratic form, with the direct link it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct XiMatrix {
    xi: HermitianMatrix,
    h_su: Complex64,
}

impl XiMatrix {
    pub fn n(&self) -> usize {
        self.xi.dim() - 1
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.xi
    }

    pub fn h_su(&self) -> Complex64 {
        self.h_su
    }

    /// `a^H Ξ a` for phase shifts `theta` and reflection amplitude `alpha`.
    pub fn quadratic_form(&self, theta: &[f64], alpha: f64) -> Result<f64> {
        let n = self.n();
        if theta.len() != n {
            return Err(invalid(format!("expected {n} phase shifts, got {}", theta.len())));
        }
        let a = lift_vector(theta, alpha);
        let m = self.xi.matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                acc += a[i].conj() * m[(i, j)] * a[j];
            }
        }
        Ok(acc.re)
    }

    /// SINR `P g / (P κ g + σ²)` with `g = a^H Ξ a + |h_SU|^2`.
    pub fn sinr(&self, theta: &[f64], params: &ScenarioParams) -> Result<f64> {
        let g = self.quadratic_form(theta, params.alpha())? + self.h_su.norm_sqr();
        let p = params.power();
        Ok(p * g / (p * params.kappa() * g + params.noise_power()))
    }
}

/// `a = [α e^{-jθ_1}, ..., α e^{-jθ_N}, 1]`.
pub fn lift_vector(theta: &[f64], alpha: f64) -> Vec<Complex64> {
    theta
        .iter()
        .map(|&t| Complex64::from_polar(alpha, -t))
        .chain([Complex64::new(1.0, 0.0)])
        .collect()
}

fn xi_from_parts(top: impl Fn(usize, usize) -> Complex64, border: &[Complex64], h_su: Complex64) -> Result<XiMatrix> {
    let n = border.len();
    let m = nalgebra::DMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => top(i, j),
        (true, false) => border[i],
        (false, true) => border[j].conj(),
        (false, false) => Complex64::new(0.0, 0.0),
    });
    Ok(XiMatrix { xi: HermitianMatrix::new(m)?, h_su })
}

/// `Ξ` for one phase-error draw: top block `w w^H` with `w = D_IU Θ_E h_SI`,
/// borders `h_SU^* w`.
pub fn build_xi(ch: &ChannelRealization, errors: &PhaseErrorVector) -> Result<XiMatrix> {
    if errors.len() != ch.len() {
        return Err(invalid(format!("{} phase errors for {} elements", errors.len(), ch.len())));
    }
    let e = errors.phasors();
    let w: Vec<Complex64> = ch.cascaded().iter().zip(&e).map(|(d, t)| d * t).collect();
    let border: Vec<Complex64> = w.iter().map(|wi| ch.h_su().conj() * wi).collect();
    xi_from_parts(|i, j| w[i] * w[j].conj(), &border, ch.h_su())
}

/// `E[Ξ]` over phase errors uniform on `[-π/2, π/2]`.
pub fn expected_xi(ch: &ChannelRealization) -> Result<XiMatrix> {
    let d = ch.cascaded();
    let border: Vec<Complex64> = d.iter().map(|di| ch.h_su().conj() * di * FRAC_2_PI).collect();
    xi_from_parts(
        |i, j| {
            let c = d[i] * d[j].conj();
            if i == j {
                c
            } else {
                c * PAIR_ERROR_CORRELATION
            }
        },
        &border,
        ch.h_su(),
    )
}

/// The lifted SDP together with what is needed to map its solution back.
#[derive(Debug, Clone)]
pub struct P6Problem {
    pub sdp: SdpProblem,
    pub xi: XiMatrix,
    /// Factor dividing the unscaled variables: `Y = Y_sdp / scale`, `μ̃ = μ_sdp / scale`.
    pub scale: f64,
    pub alpha: f64,
}

impl P6Problem {
    pub fn n(&self) -> usize {
        self.xi.n()
    }
}

/// Builds the Charnes-Cooper lifted SDP from `xi_bar` (usually `E[Ξ]`).
pub fn build_p6(xi_bar: &XiMatrix, params: &ScenarioParams) -> Result<P6Problem> {
    let kappa = params.kappa();
    if kappa <= 0.0 {
        return Err(invalid("kappa_t + kappa_r must be positive for the fractional lift"));
    }
    let n = xi_bar.n();
    let dim = n + 2;
    let mu = n + 1;
    let h2 = xi_bar.h_su.norm_sqr();
    let c_lift = h2 + params.noise_power() / (params.power() * kappa);
    let scale = c_lift + xi_bar.xi.frobenius_norm();
    let one = Complex64::new(1.0, 0.0);

    let mut xi_entries = Vec::new();
    for i in 0..=n {
        for j in i..=n {
            let z = xi_bar.xi.get(i, j);
            if z != Complex64::new(0.0, 0.0) {
                xi_entries.push((i, j, z / scale));
            }
        }
    }
    let with_mu = |extra: f64| {
        let mut e = xi_entries.clone();
        e.push((mu, mu, Complex64::new(extra, 0.0)));
        e
    };
    let a2 = params.alpha() * params.alpha();
    let mut constraints = Vec::with_capacity(n + 2);
    for k in 0..n {
        let a = HermitianMatrix::from_entries(dim, &[(k, k, one), (mu, mu, Complex64::new(-a2, 0.0))])?;
        constraints.push((a, 0.0));
    }
    let a = HermitianMatrix::from_entries(dim, &[(n, n, one), (mu, mu, Complex64::new(-1.0, 0.0))])?;
    constraints.push((a, 0.0));
    constraints.push((HermitianMatrix::from_entries(dim, &with_mu(c_lift / scale))?, 1.0));
    let objective = HermitianMatrix::from_entries(dim, &with_mu(h2 / scale))?.scaled(1.0 / kappa);
    Ok(P6Problem {
        sdp: SdpProblem::new(objective, constraints)?,
        xi: xi_bar.clone(),
        scale,
        alpha: params.alpha(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSolution {
    /// Unscaled Charnes-Cooper variable, `(N+1)×(N+1)`.
    pub y: HermitianMatrix,
    pub mu_tilde: f64,
    /// `Y / μ̃`.
    pub x: HermitianMatrix,
    pub theta: Vec<f64>,
    pub rank1_certified: bool,
    /// Second over first eigenvalue of `Y`.
    pub eigen_ratio: f64,
    /// `max |Y_r - Y| / max |Y|` for the rank-one reconstruction `Y_r`.
    pub reconstruction_error: f64,
}

/// Recovers phase shifts from a lifted `(N+1)` block and certifies rank one.
///
/// Certified solutions read `θ` off the last row of `X`; otherwise the phases
/// of the dominant eigenvector are used and the flag stays false.
pub fn lift_from_block(y: &HermitianMatrix, mu_tilde: f64, alpha: f64, rank_tol: f64) -> Result<LiftedSolution> {
    if !(mu_tilde > 0.0) {
        return Err(Error::Invariant(format!("normalization variable {mu_tilde} is not positive")));
    }
    let n = y.dim() - 1;
    let x = y.scaled(1.0 / mu_tilde);
    let (vals, vecs) = y.eigen();
    let l1 = vals[n];
    let l2 = if n > 0 { vals[n - 1] } else { 0.0 };
    let eigen_ratio = if l1 > 0.0 { l2.max(0.0) / l1 } else { f64::INFINITY };

    let row_theta: Vec<f64> = (0..n).map(|i| x.get(n, i).arg()).collect();
    let a = lift_vector(&row_theta, alpha);
    let y_r = HermitianMatrix::outer(&a).scaled(mu_tilde);
    let diff = (y_r.matrix() - y.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let reconstruction_error = diff / y.max_abs();
    let rank1_certified = eigen_ratio <= rank_tol && reconstruction_error <= 1e-5;

    let theta = if rank1_certified {
        row_theta
    } else {
        let u = vecs.column(n);
        let last = u[n];
        let pivot = if last.norm() > 1e-8 * u.norm() { last / last.norm() } else { Complex64::new(1.0, 0.0) };
        (0..n).map(|i| -(u[i] / pivot).arg()).collect()
    };
    Ok(LiftedSolution { y: y.clone(), mu_tilde, x, theta, rank1_certified, eigen_ratio, reconstruction_error })
}

/// Unscales an SDP solution of `p6`, splits off `μ̃` and certifies it.
pub fn extract_and_certify(sol: &SdpSolution, p6: &P6Problem, rank_tol: f64) -> Result<LiftedSolution> {
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver {
            status: sol.status,
            detail: format!(
                "primal residual {:e}, duality gap {:e} after {} iterations",
                sol.primal_residual, sol.duality_gap, sol.iterations
            ),
        });
    }
    let n = p6.n();
    let z = sol.y.scaled(1.0 / p6.scale);
    let block = nalgebra::DMatrix::from_fn(n + 1, n + 1, |i, j| z.get(i, j));
    let y = HermitianMatrix::new(block)?;
    lift_from_block(&y, z.get(n + 1, n + 1).re, p6.alpha, rank_tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub rank_tol: f64,
    pub sdp: SdpTolerances,
    pub antithetic: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { rank_tol: 1e-6, sdp: SdpTolerances::default(), antithetic: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub n: usize,
    pub lifted: LiftedSolution,
    /// Optimal SINR surrogate of the lifted problem.
    pub objective_value: f64,
    /// `log2(1 + objective_value)`.
    pub objective_rate: f64,
    /// `log2(1 + SINR)` at the extracted phases with `Ξ` replaced by `E[Ξ]`.
    pub reconstructed_rate: f64,
    pub monte_carlo: TrialAverage,
    pub samples: Vec<f64>,
}

impl OptimizationReport {
    pub fn theta(&self) -> &[f64] {
        &self.lifted.theta
    }

    /// `N, objective_value, rank1_certified, eigen_ratio, theta` with the
    /// phases joined by `;`.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            format!("{:e}", self.objective_value),
            self.lifted.rank1_certified.to_string(),
            format!("{:e}", self.lifted.eigen_ratio),
            self.lifted.theta.iter().map(|t| format!("{t:e}")).collect::<Vec<_>>().join(";"),
        ]
    }
}

/// Solves the statistical problem for `ch` and returns certified phases.
pub fn optimize(ch: &ChannelRealization, params: &ScenarioParams, settings: &OptimizerSettings) -> Result<(P6Problem, SdpSolution, LiftedSolution)> {
    let p6 = build_p6(&expected_xi(ch)?, params)?;
    let sol = solve(&p6.sdp, &settings.sdp)?;
    let lifted = extract_and_certify(&sol, &p6, settings.rank_tol)?;
    Ok((p6, sol, lifted))
}

/// Optimizes for `ch` and evaluates the resulting phases over fresh
/// phase-error draws on the true channels.
pub fn optimize_and_evaluate(
    ch: &ChannelRealization,
    params: &ScenarioParams,
    trials: usize,
    seeds: &SeedStream,
    tag: u64,
    settings: &OptimizerSettings,
) -> Result<OptimizationReport> {
    let (p6, sol, lifted) = optimize(ch, params, settings)?;
    let samples = fixed_phase_samples(&lifted.theta, ch, params, trials, seeds, tag, settings.antithetic)?;
    let reconstructed = p6.xi.sinr(&lifted.theta, params)?;
    Ok(OptimizationReport {
        n: ch.len(),
        objective_value: sol.objective_value,
        objective_rate: sol.objective_value.ln_1p() / LN_2,
        reconstructed_rate: reconstructed.ln_1p() / LN_2,
        monte_carlo: TrialAverage::from_samples(&samples)?,
        samples,
        lifted,
    })
}
