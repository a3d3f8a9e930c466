//! Infeasible-start primal-dual interior-point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! Works on the real embedding in minimization form
//! `min <K, X> s.t. <A_k, X> = b_k, X ⪰ 0`, with every constraint row scaled
//! to unit Frobenius norm and `K = -C / ||C||`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::{real_embedding, real_unembedding, SdpProblem, SdpSolution, SdpStatus, SdpTolerances};
use crate::error::{invalid, Result};

/// Relative threshold on `||A^T y + S|| / b^T y` (and the primal analogue)
/// for declaring an infeasibility certificate.
const CERTIFICATE_TOL: f64 = 1e-8;

struct Scaled {
    k: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    b: DVector<f64>,
    row_scale: Vec<f64>,
    c_scale: f64,
}

fn scale_problem(p: &SdpProblem) -> Result<Scaled> {
    let c = real_embedding(p.objective());
    let c_norm = c.norm();
    let c_scale = if c_norm > 0.0 { 1.0 / c_norm } else { 1.0 };
    let mut a = Vec::with_capacity(p.num_constraints());
    let mut b = DVector::zeros(p.num_constraints());
    let mut row_scale = Vec::with_capacity(p.num_constraints());
    for (k, (ak, bk)) in p.constraints().iter().enumerate() {
        let e = real_embedding(ak);
        let nrm = e.norm();
        if nrm == 0.0 {
            return Err(invalid(format!("constraint {k} has a zero matrix")));
        }
        row_scale.push(1.0 / nrm);
        b[k] = 2.0 * bk / nrm;
        a.push(e / nrm);
    }
    let m = a.len();
    let gram = DMatrix::from_fn(m, m, |i, j| a[i].dot(&a[j]));
    let min_ev = SymmetricEigen::new(gram).eigenvalues.min();
    if min_ev < 1e-12 {
        return Err(invalid(format!(
            "constraint matrices are linearly dependent (Gram eigenvalue {min_ev:e})"
        )));
    }
    Ok(Scaled { k: -c * c_scale, a, b, row_scale, c_scale })
}

fn apply_a(a: &[DMatrix<f64>], x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().map(|ak| ak.dot(x)))
}

fn apply_at(a: &[DMatrix<f64>], y: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for (ak, yk) in a.iter().zip(y.iter()) {
        out += ak * *yk;
    }
    out
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `t` with `X + t dX ⪰ 0`, given `X = L L^T`, capped at `cap`.
fn max_step(l: &DMatrix<f64>, dx: &DMatrix<f64>, cap: f64) -> f64 {
    let Some(t) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(m) = l.solve_lower_triangular(&t.transpose()) else { return 0.0 };
    let lmin = SymmetricEigen::new(sym(m)).eigenvalues.min();
    if lmin < 0.0 {
        (-1.0 / lmin).min(cap)
    } else {
        cap
    }
}

fn chol(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
}

struct Iterate {
    x: DMatrix<f64>,
    y: DVector<f64>,
    s: DMatrix<f64>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
}

impl Measures {
    fn merit(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.gap)
    }
}

fn measure(p: &Scaled, it: &Iterate) -> (Measures, DVector<f64>, DMatrix<f64>) {
    let n = it.x.nrows();
    let rp = &p.b - apply_a(&p.a, &it.x);
    let rd = &p.k - apply_at(&p.a, &it.y, n) - &it.s;
    let pobj = p.k.dot(&it.x);
    let dobj = p.b.dot(&it.y);
    let m = Measures {
        pobj,
        dobj,
        pinf: rp.norm() / (1.0 + p.b.norm()),
        dinf: rd.norm() / (1.0 + p.k.norm()),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    };
    (m, rp, rd)
}

enum Outcome {
    Converged,
    Infeasible,
    Stalled,
}

/// Solves `problem`; a non-optimal outcome is reported through the status.
///
/// Fails only for malformed input such as linearly dependent constraints.
pub fn solve(problem: &SdpProblem, tol: &SdpTolerances) -> Result<SdpSolution> {
    let p = scale_problem(problem)?;
    let n = p.k.nrows();
    let nf = n as f64;
    let m = p.a.len();

    let xi = (1..=m)
        .map(|k| nf.sqrt() * (1.0 + p.b[k - 1].abs()) / 2.0)
        .fold(10f64.max(nf.sqrt()), f64::max);
    let eta = 10f64.max(nf.sqrt());
    let mut it = Iterate {
        x: DMatrix::identity(n, n) * xi,
        y: DVector::zeros(m),
        s: DMatrix::identity(n, n) * eta,
    };
    let mut best: Option<(f64, Iterate)> = None;
    let mut outcome = Outcome::Stalled;
    let mut iterations = 0;

    for iter in 0..tol.max_iterations {
        iterations = iter;
        let (ms, rp, rd) = measure(&p, &it);
        if best.as_ref().is_none_or(|(b, _)| ms.merit() < *b) {
            best = Some((ms.merit(), Iterate { x: it.x.clone(), y: it.y.clone(), s: it.s.clone() }));
        }
        if ms.gap < tol.gap && ms.pinf < tol.feasibility && ms.dinf < tol.feasibility {
            outcome = Outcome::Converged;
            break;
        }
        if ms.dobj > 0.0 {
            let aty_s = apply_at(&p.a, &it.y, n) + &it.s;
            if aty_s.norm() <= CERTIFICATE_TOL * ms.dobj {
                outcome = Outcome::Infeasible;
                break;
            }
        }
        if ms.pobj < 0.0 && apply_a(&p.a, &it.x).norm() <= CERTIFICATE_TOL * -ms.pobj {
            outcome = Outcome::Infeasible;
            break;
        }

        let (Some(cx), Some(cs)) = (chol(&it.x), chol(&it.s)) else { break };
        let lx = cx.l();
        let ls = cs.l();
        let mu = it.x.dot(&it.s) / nf;

        // Nesterov-Todd scaling W = G G^T with G^{-1} X G^{-T} = G^T S G = V.
        let inner = SymmetricEigen::new(sym(lx.transpose() * &it.s * &lx));
        if inner.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            break;
        }
        let q = &inner.eigenvectors;
        let lam = &inner.eigenvalues;
        let v: Vec<f64> = lam.iter().map(|l| l.sqrt()).collect();
        let g = &lx * q * DMatrix::from_diagonal(&lam.map(|l| l.powf(-0.25)));
        let Some(lx_inv) = lx.solve_lower_triangular(&DMatrix::identity(n, n)) else { break };
        let g_inv = DMatrix::from_diagonal(&lam.map(|l| l.powf(0.25))) * q.transpose() * lx_inv;
        let w = sym(&g * g.transpose());

        let wa: Vec<DMatrix<f64>> = p.a.iter().map(|ak| &w * ak * &w).collect();
        let schur = DMatrix::from_fn(m, m, |i, j| p.a[i].dot(&wa[j]));
        let schur = sym(schur);
        let schur_chol = Cholesky::new(schur.clone());
        let schur_lu = schur.clone().lu();
        let solve_schur = |r: &DVector<f64>| -> Option<DVector<f64>> {
            match &schur_chol {
                Some(c) => Some(c.solve(r)),
                None => schur_lu.solve(r),
            }
        };
        let wrdw = &w * &rd * &w;
        let a_wrdw = apply_a(&p.a, &wrdw);

        let direction = |rc: &DMatrix<f64>| -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
            let rhs = &rp - apply_a(&p.a, rc) + &a_wrdw;
            let dy = solve_schur(&rhs)?;
            let ds = &rd - apply_at(&p.a, &dy, n);
            let dx = sym(rc - &w * &ds * &w);
            Some((dx, dy, sym(ds)))
        };

        // Predictor.
        let Some((dx_a, _, ds_a)) = direction(&(-&it.x)) else { break };
        let ap = max_step(&lx, &dx_a, 1.0);
        let ad = max_step(&ls, &ds_a, 1.0);
        let mu_aff = (&it.x + &dx_a * ap).dot(&(&it.s + &ds_a * ad)) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector with the second-order term in the scaled space.
        let dxt = &g_inv * &dx_a * g_inv.transpose();
        let dst = g.transpose() * &ds_a * &g;
        let cross = sym(&dxt * &dst);
        let h = DMatrix::from_fn(n, n, |i, j| {
            let target = if i == j { sigma * mu - v[i] * v[i] } else { 0.0 };
            2.0 * (target - cross[(i, j)]) / (v[i] + v[j])
        });
        let rc = sym(&g * h * g.transpose());
        let Some((dx, dy, ds)) = direction(&rc) else { break };

        let ap = max_step(&lx, &dx, f64::INFINITY);
        let ad = max_step(&ls, &ds, f64::INFINITY);
        let tau = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        it.x = sym(&it.x + dx * ap);
        it.y += dy * ad;
        it.s = sym(&it.s + ds * ad);
        iterations = iter + 1;
    }

    let final_it = match outcome {
        Outcome::Converged | Outcome::Infeasible => it,
        Outcome::Stalled => best.map(|(_, b)| b).unwrap_or(it),
    };
    Ok(finish(problem, &p, final_it, outcome, iterations))
}

fn finish(problem: &SdpProblem, p: &Scaled, it: Iterate, outcome: Outcome, iterations: usize) -> SdpSolution {
    let y = real_unembedding(&it.x);
    let dual_values: Vec<f64> = it.y.iter().zip(&p.row_scale).map(|(yk, r)| -yk * r / p.c_scale).collect();
    let slack = problem.dual_slack(&dual_values);
    let objective_value = problem.objective_at(&y);
    let dual_objective = problem.dual_objective(&dual_values);
    let primal_residual = problem.primal_residual(&y);
    let s_min = slack.eigenvalues()[0];
    let dual_residual = (-s_min).max(0.0) / (1.0 + problem.objective().frobenius_norm());
    let duality_gap = (dual_objective - objective_value).abs();
    let y_min = y.eigenvalues()[0];
    let within_invariants = duality_gap <= 1e-7 * (1.0 + objective_value.abs())
        && primal_residual <= 1e-8
        && dual_residual <= 1e-8
        && y_min >= -1e-8;
    let status = match outcome {
        Outcome::Infeasible => SdpStatus::Infeasible,
        _ if within_invariants => SdpStatus::Optimal,
        _ => SdpStatus::NumericalFailure,
    };
    SdpSolution {
        y,
        slack,
        objective_value,
        dual_objective,
        dual_values,
        primal_residual,
        dual_residual,
        duality_gap,
        status,
        iterations,
    }
}
