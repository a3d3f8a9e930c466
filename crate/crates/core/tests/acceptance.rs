//! Acceptance checks. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::{FRAC_2_PI, PI};
use std::time::Instant;

use irs_hwi::cli::{experiment_channel, FIG6_KAPPAS};
use irs_hwi::closed_form::{avg_rate_hwi, rate_gap, rate_ideal, rate_limit_inf, utility_gap, utility_hwi, utility_ideal};
use irs_hwi::df_relay::{df_rate_upper_bound, df_utility, kappa_threshold, DfParams};
use irs_hwi::hwi::sample_phase_errors;
use irs_hwi::monte_carlo::{average_rate_compensated, fixed_phase_samples, SeedStream, TrialAverage};
use irs_hwi::optimizer::{optimize, optimize_and_evaluate, OptimizerSettings};
use irs_hwi::robustness::{compare_variants, CsiErrorModel};
use irs_hwi::scenario::{default_scenario, Geometry, ScenarioParams};
use irs_hwi::sdp::{solve, HermitianMatrix, SdpProblem, SdpStatus, SdpTolerances};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err(e: irs_hwi::Error) -> String {
    e.to_string()
}

fn kappa_params(k: f64) -> ScenarioParams {
    default_scenario().with_kappas(k, k).unwrap()
}

fn irs_limits() -> Check {
    let expected = [7.6511, 6.6871, 5.9710];
    let got: Vec<f64> = FIG6_KAPPAS.iter().map(|&k| rate_limit_inf(&kappa_params(k))).collect::<Result<_, _>>().map_err(err)?;
    let worst = got.iter().zip(expected).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-3, format!("limits {got:.4?}, max deviation {worst:.1e}"))
}

fn df_limits() -> Check {
    let n_inf = [4.3237, 3.8400, 3.4798];
    let p_inf = [4.3209, 3.8372, 3.4770];
    let mut worst: f64 = 0.0;
    let mut got = Vec::new();
    for (i, &k) in FIG6_KAPPAS.iter().enumerate() {
        let p = kappa_params(k);
        let a = df_rate_upper_bound(1e10, &DfParams::equal(&p), &p, &p.link_budget()).map_err(err)?;
        let q = p.with_power(1e12).map_err(err)?;
        let b = df_rate_upper_bound(256.0, &DfParams::equal(&q), &q, &q.link_budget()).map_err(err)?;
        worst = worst.max((a - n_inf[i]).abs()).max((b - p_inf[i]).abs());
        got.push((a, b));
    }
    ensure(worst < 1e-3, format!("(N->inf, P->inf) {got:.4?}, max deviation {worst:.1e}"))
}

fn threshold() -> Check {
    let p = default_scenario();
    let k = kappa_threshold(&p, &p.link_budget()).map_err(err)?;
    let rel = (k / 4.0451e-6 - 1.0).abs();
    ensure(rel < 1e-3, format!("kappa_th = {k:.5e}, relative deviation {rel:.1e}"))
}

fn closed_form_vs_monte_carlo() -> Check {
    let p = default_scenario();
    let b = p.link_budget();
    let seeds = SeedStream::new(2024);
    let mut report = Vec::new();
    let mut ok = true;
    for n in [1usize, 500, 1000, 2500, 5000] {
        let cf = avg_rate_hwi(n as f64, &p, &b).map_err(err)?;
        let mc = average_rate_compensated(n, &p, 1000, &seeds, n as u64, false).map_err(err)?;
        let d = (mc.mean - cf).abs();
        ok &= d <= (3.0 * mc.std_error).max(0.05);
        report.push(format!("N={n}: |{:.4}-{cf:.4}|={d:.1e}", mc.mean));
    }
    ensure(ok, report.join(", "))
}

/// Composite Simpson rule with `m` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn phase_error_constants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 1_000_000;
    let e = sample_phase_errors(draws, &mut rng).map_err(err)?;
    let mean: Complex64 = e.phasors().iter().sum::<Complex64>() / draws as f64;
    let f = sample_phase_errors(draws, &mut rng).map_err(err)?;
    let pair: Complex64 =
        e.angles().iter().zip(f.angles()).map(|(a, b)| Complex64::from_polar(1.0, a - b)).sum::<Complex64>() / draws as f64;
    let target_pair = 4.0 / (PI * PI);
    let r1 = (mean.norm() / FRAC_2_PI - 1.0).abs();
    let r2 = (pair.norm() / target_pair - 1.0).abs();
    let pdf = |x: f64| (PI - x.abs()) / (PI * PI);
    let integral = simpson(|x| pdf(x) * x.cos(), -PI, 0.0, 4000) + simpson(|x| pdf(x) * x.cos(), 0.0, PI, 4000);
    let r3 = (integral - target_pair).abs();
    ensure(
        r1 < 5e-3 && r2 < 5e-3 && r3 < 1e-10,
        format!("E[e^jθ] rel {r1:.1e}, pair rel {r2:.1e}, triangular integral error {r3:.1e}"),
    )
}

const FIG4_N: [usize; 4] = [1, 13, 25, 37];

fn optimizer_dominance() -> Check {
    let p = default_scenario();
    let seeds = SeedStream::new(42);
    let settings = OptimizerSettings::default();
    let mut report = Vec::new();
    let mut ok = true;
    for n in FIG4_N {
        let ch = experiment_channel(&p, n, &seeds).map_err(err)?;
        let comp = fixed_phase_samples(&ch.compensating_phases(), &ch, &p, 1000, &seeds, n as u64, true).map_err(err)?;
        let opt = optimize_and_evaluate(&ch, &p, 1000, &seeds, n as u64, &settings).map_err(err)?;
        let gain = TrialAverage::paired_difference(&opt.samples, &comp).map_err(err)?;
        ok &= gain.mean > 3.0 * gain.std_error;
        report.push(format!("N={n}: gain {:.2e}±{:.1e}", gain.mean, gain.std_error));
    }
    ensure(ok, report.join(", "))
}

fn rank_one() -> Check {
    let p = default_scenario();
    let settings = OptimizerSettings::default();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 0..5u64 {
        let seeds = SeedStream::new(seed);
        for n in FIG4_N {
            let ch = experiment_channel(&p, n, &seeds).map_err(err)?;
            let (_, _, lifted) = optimize(&ch, &p, &settings).map_err(err)?;
            worst_ratio = worst_ratio.max(lifted.eigen_ratio);
            worst_rec = worst_rec.max(lifted.reconstruction_error);
            if !lifted.rank1_certified {
                failures.push(format!("seed {seed} N={n}"));
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!("20 solves, max eigen ratio {worst_ratio:.1e}, max reconstruction error {worst_rec:.1e}, uncertified {failures:?}"),
    )
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    HermitianMatrix::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

fn random_density(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = &g * g.adjoint() + DMatrix::identity(n, n) * Complex64::new(0.1, 0.0);
    let h = HermitianMatrix::new(m).unwrap();
    h.scaled(1.0 / h.trace())
}

fn random_sdps() -> Result<(usize, f64, f64, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut gap, mut pres, mut dres): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..200 {
        let n = rng.random_range(1..=12);
        let m = rng.random_range(0..=(n * n - 1).min(2 * n));
        let y0 = random_density(n, &mut rng);
        let mut constraints = vec![(HermitianMatrix::identity(n), 1.0)];
        for _ in 0..m {
            let a = random_hermitian(n, &mut rng);
            let b = a.inner(&y0);
            constraints.push((a, b));
        }
        let problem = SdpProblem::new(random_hermitian(n, &mut rng), constraints).map_err(err)?;
        let sol = solve(&problem, &SdpTolerances::default()).map_err(err)?;
        if sol.status != SdpStatus::Optimal {
            return Err(format!("instance {i} (n={n}, m={}) ended {:?}", m + 1, sol.status));
        }
        let y_min = sol.y.eigenvalues()[0];
        let s_min = problem.dual_slack(&sol.dual_values).eigenvalues()[0];
        gap = gap.max((problem.dual_objective(&sol.dual_values) - problem.objective_at(&sol.y)).abs());
        pres = pres.max(problem.primal_residual(&sol.y)).max(-y_min);
        dres = dres.max(-s_min);
    }
    Ok((200, gap, pres, dres))
}

/// Maximum of `v^T C v` over unit `v` in R^3 with `v^T A v = b`, by scanning
/// meridians of the sphere and bisecting each sign change of the constraint.
fn boundary_grid_max(c: &DMatrix<f64>, a: &DMatrix<f64>, b: f64) -> Option<f64> {
    let point = |t: f64, phi: f64| nalgebra::Vector3::new(t.sin() * phi.cos(), t.sin() * phi.sin(), t.cos());
    let quad = |m: &DMatrix<f64>, v: &nalgebra::Vector3<f64>| {
        let v = nalgebra::DVector::from_column_slice(v.as_slice());
        v.dot(&(m * &v))
    };
    let (meridians, steps) = (3000, 600);
    let mut best: Option<f64> = None;
    for i in 0..meridians {
        let phi = PI * i as f64 / meridians as f64;
        let g = |t: f64| quad(a, &point(t, phi)) - b;
        let mut t0 = 0.0;
        let mut g0 = g(t0);
        for j in 1..=steps {
            let t1 = PI * j as f64 / steps as f64;
            let g1 = g(t1);
            if g0 == 0.0 || g0.signum() != g1.signum() {
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo).signum() == g(mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let val = quad(c, &point(0.5 * (lo + hi), phi));
                best = Some(best.map_or(val, |x| x.max(val)));
            }
            t0 = t1;
            g0 = g1;
        }
    }
    best
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&g + g.transpose()) * 0.5
}

fn grid_oracle() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let c = random_symmetric(&mut rng);
        let a = random_symmetric(&mut rng);
        let g = DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y0 = &g * g.transpose() + DMatrix::identity(3, 3) * 0.1;
        let y0 = &y0 / y0.trace();
        let b = a.dot(&y0);
        let problem = SdpProblem::new(
            HermitianMatrix::from_real(c.clone()).map_err(err)?,
            vec![(HermitianMatrix::identity(3), 1.0), (HermitianMatrix::from_real(a.clone()).map_err(err)?, b)],
        )
        .map_err(err)?;
        let sol = solve(&problem, &SdpTolerances::default()).map_err(err)?;
        let oracle = boundary_grid_max(&c, &a, b).ok_or_else(|| format!("instance {i}: oracle found no feasible point"))?;
        worst = worst.max((sol.objective_value - oracle).abs());
    }
    Ok(worst)
}

fn sdp_soundness() -> Check {
    let (count, gap, pres, dres) = random_sdps()?;
    let grid = grid_oracle()?;
    ensure(
        gap <= 1e-7 && pres <= 1e-8 && dres <= 1e-8 && grid <= 1e-3,
        format!("{count} random instances: max gap {gap:.1e}, primal residual {pres:.1e}, dual residual {dres:.1e}; 3x3 grid oracle max deviation {grid:.1e}"),
    )
}

fn gap_sweeps() -> Check {
    let p = default_scenario();
    let b = p.link_budget();
    let mut prev_gap = f64::NEG_INFINITY;
    let mut prev_util = f64::INFINITY;
    for n in 1..=5000 {
        let x = n as f64;
        let g = rate_gap(x, &p, &b).map_err(err)?;
        let ug = utility_gap(x, &p, &b).map_err(err)?;
        let u = utility_hwi(x, &p, &b).map_err(err)?;
        if !(g > 0.0 && g > prev_gap && ug > 0.0 && u < prev_util) {
            return Err(format!("violated at N={n}: rate_gap {g:e}, utility_gap {ug:e}, utility_hwi {u:e}"));
        }
        prev_gap = g;
        prev_util = u;
    }
    Ok(format!("N=1..5000, rate_gap {:.4} at N=5000", prev_gap))
}

fn robustness_ordering() -> Check {
    let p = default_scenario();
    let seeds = SeedStream::new(42);
    let settings = OptimizerSettings::default();
    let model = CsiErrorModel::from_params(&p);
    let mut report = Vec::new();
    let mut ok = true;
    for n in [13usize, 25, 37] {
        let ch = experiment_channel(&p, n, &seeds).map_err(err)?;
        let c = compare_variants(&ch, &p, &model, 1000, &seeds, n as u64, &settings).map_err(err)?;
        ok &= c.csi_loss.mean > 3.0 * c.csi_loss.std_error;
        ok &= c.csi_over_residual.mean > 3.0 * c.csi_over_residual.std_error;
        report.push(format!(
            "N={n}: clean-csi {:.1e}±{:.0e}, csi-rpn {:.1e}±{:.0e}",
            c.csi_loss.mean, c.csi_loss.std_error, c.csi_over_residual.mean, c.csi_over_residual.std_error
        ));
    }
    ensure(ok, report.join(", "))
}

fn central_difference(f: impl Fn(f64) -> Result<f64, irs_hwi::Error>, x: f64) -> Result<f64, String> {
    let h = 1e-4 * x;
    Ok((f(x + h).map_err(err)? - f(x - h).map_err(err)?) / (2.0 * h))
}

fn derivative_oracles() -> Check {
    let base = default_scenario();
    let far = base.with_geometry(Geometry::right_triangle(5.0, 100.0).map_err(err)?).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut branches = std::collections::BTreeSet::new();
    for geometry in [base, far] {
        for &k in &FIG6_KAPPAS {
            let p = geometry.with_kappas(k, k).map_err(err)?;
            let b = p.link_budget();
            let df = DfParams::equal(&p);
            for n in [1.0, 2.0, 5.0, 10.0, 37.0, 100.0, 256.0, 1000.0, 5000.0] {
                let pairs = [
                    (utility_hwi(n, &p, &b).map_err(err)?, central_difference(|x| avg_rate_hwi(x, &p, &b), n)?),
                    (utility_ideal(n, &p, &b).map_err(err)?, central_difference(|x| rate_ideal(x, &p, &b), n)?),
                ];
                for (analytic, numeric) in pairs {
                    worst = worst.max((analytic / numeric - 1.0).abs());
                }
                let u = df_utility(n, &df, &p, &b).map_err(err)?;
                let h = 1e-4 * n;
                let same_branch = [n - h, n + h].iter().all(|&x| df_utility(x, &df, &p, &b).is_ok_and(|v| v.branch == u.branch && !v.tie));
                if same_branch && !u.tie {
                    let numeric = central_difference(|x| df_rate_upper_bound(x, &df, &p, &b), n)?;
                    worst = worst.max((u.value / numeric - 1.0).abs());
                    branches.insert(u.branch.label());
                }
            }
        }
    }
    ensure(worst < 1e-5 && branches.len() == 2, format!("max relative deviation {worst:.1e}, DF branches covered {branches:?}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("asymptotic IRS rate limits", irs_limits),
        ("DF rate limits", df_limits),
        ("kappa threshold", threshold),
        ("closed form vs Monte Carlo", closed_form_vs_monte_carlo),
        ("phase-error constants", phase_error_constants),
        ("optimizer dominance", optimizer_dominance),
        ("rank-one certification", rank_one),
        ("SDP solver soundness", sdp_soundness),
        ("gap positivity and monotonicity", gap_sweeps),
        ("robustness ordering", robustness_ordering),
        ("derivative oracles", derivative_oracles),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {:>2} {name}: {detail} ({:.2?})", i + 1, start.elapsed());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
