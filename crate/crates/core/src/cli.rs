//! Batch experiment runner writing one CSV per experiment.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::channels::{sample_channels, ChannelRealization};
use crate::closed_form::{avg_rate_hwi, rate_gap, rate_ideal, rate_limit_inf, utility_gap, utility_hwi, utility_ideal};
use crate::config::{Resolved, ScenarioConfig};
use crate::df_relay::{df_rate_upper_bound, df_utility, DfParams};
use crate::error::{invalid, Error, Result};
use crate::monte_carlo::{average_rate_compensated, fixed_phase_samples, SeedStream, TrialAverage};
use crate::optimizer::{optimize_and_evaluate, OptimizerSettings};
use crate::robustness::{compare_variants, CsiErrorModel};
use crate::scenario::{dbm_to_watts, watts_to_dbm, ScenarioParams};
use crate::sdp::SdpTolerances;

const COLUMNS: &str = "\
CSV columns (every file starts with '#' lines holding the resolved parameters and seed):
  fig3a         N, rate_hwi, rate_ideal, rate_gap, rate_limit, mc_mean, mc_std_error
                (Monte Carlo at N = 1 and every --mc-every elements, blank elsewhere)
  fig3b         N, utility_hwi, utility_ideal, utility_gap
  fig4          N, compensated_closed_form, compensated_mc, compensated_std_error,
                objective_rate, reconstructed_rate, optimized_mc, optimized_std_error,
                gain_mean, gain_std_error, rank1_certified, eigen_ratio, theta
                (theta: optimized phases in radians joined by ';')
  fig5          N, variant, mean, std_error
                (variant: clean, imperfect_csi, residual_phase_noise)
  fig6a         kappa, N, irs_rate, df_rate, irs_utility, df_utility, df_branch
  fig6b         kappa, P_dbm, irs_rate, df_rate, irs_utility, df_utility, df_branch
                (at --n elements/antennas)
  custom-sweep  N, P_dbm, kappa_t, kappa_r, rate_hwi, rate_ideal, rate_gap, utility_hwi,
                df_rate, df_utility, mc_mean, mc_std_error

kappa is kappa_t = kappa_r. Rates in bits/s/Hz, utilities per element.

Exit status: 0 success, 2 argument or config error, 3 solver failure,
4 invariant violation, 1 I/O error.";

#[derive(Debug, Parser)]
#[command(name = "irs-hwi", version, about = "IRS hardware-impairment experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its CSV.
    #[command(after_help = COLUMNS)]
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6a,
    Fig6b,
    CustomSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    N,
    PowerDbm,
    Kappa,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo trials per point (antithetic pairs unless --no-antithetic).
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Override a config key, e.g. --set kappa_t=0.0049. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    set: Vec<(String, f64)>,
    /// Sweep grid as start:step:stop (inclusive) or a comma-separated list.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Swept quantity for custom-sweep.
    #[arg(long, value_enum)]
    axis: Option<Axis>,
    /// kappa_t = kappa_r values for fig6a/fig6b.
    #[arg(long, value_delimiter = ',')]
    kappas: Option<Vec<f64>>,
    /// Element count when N is not the swept axis.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Monte Carlo spacing along N for fig3a.
    #[arg(long, default_value_t = 500)]
    mc_every: usize,
    #[arg(long)]
    no_antithetic: bool,
    #[arg(long, default_value_t = 200)]
    sdp_max_iterations: usize,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    values: Vec<f64>,
    text: String,
}

impl Grid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("grid is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid must be strictly increasing"));
        }
        let text = values.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        Ok(Self { values, text })
    }

    pub fn range(start: f64, step: f64, stop: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid(format!("grid step {step} must be positive")));
        }
        if !(start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(invalid(format!("grid {start}:{step}:{stop} is empty")));
        }
        let count = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize + 1;
        let mut g = Self::new((0..count).map(|k| start + k as f64 * step).collect())?;
        g.text = format!("{start}:{step}:{stop}");
        Ok(g)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values as element counts.
    fn counts(&self) -> Result<Vec<usize>> {
        self.values
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(invalid(format!("element count {v} must be a positive integer")))
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| invalid(format!("grid value {t:?}: {e}")));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => Self::range(num(a)?, num(b)?, num(c)?),
            [_] => Self::new(s.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(invalid(format!("grid {s:?} is neither start:step:stop nor a list"))),
        }
    }
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// One run: experiment, sweep and sampling settings.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub grid: Grid,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub axis: Option<Axis>,
    pub kappas: Vec<f64>,
    pub n: usize,
    pub mc_every: usize,
    pub antithetic: bool,
    pub sdp: SdpTolerances,
}

pub const FIG6_KAPPAS: [f64; 3] = [0.0025, 0.0049, 0.0081];

impl ExperimentSpec {
    /// Spec with the experiment's default grid.
    pub fn new(experiment: Experiment, out: PathBuf) -> Result<Self> {
        let grid = match experiment {
            Experiment::Fig3a | Experiment::Fig3b | Experiment::Fig6a => Grid::range(1.0, 1.0, 5000.0)?,
            Experiment::Fig4 | Experiment::Fig5 => Grid::new(vec![1.0, 13.0, 25.0, 37.0])?,
            Experiment::Fig6b => Grid::range(1.0, 0.5, 50.0)?,
            Experiment::CustomSweep => Grid::new(vec![1.0])?,
        };
        Ok(Self {
            experiment,
            grid,
            trials: 1000,
            seed: 42,
            out,
            axis: None,
            kappas: FIG6_KAPPAS.to_vec(),
            n: 256,
            mc_every: 500,
            antithetic: true,
            sdp: SdpTolerances::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n == 0 || self.mc_every == 0 {
            return Err(invalid("--n and --mc-every must be at least 1"));
        }
        if self.kappas.is_empty() || self.kappas.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(invalid("kappas must be a non-empty list of non-negative values"));
        }
        if self.experiment == Experiment::CustomSweep && self.axis.is_none() {
            return Err(invalid("custom-sweep needs --axis"));
        }
        let counts_axis = match self.experiment {
            Experiment::Fig6b => false,
            Experiment::CustomSweep => self.axis == Some(Axis::N),
            _ => true,
        };
        if counts_axis {
            self.grid.counts()?;
        }
        Ok(())
    }

    fn settings(&self) -> OptimizerSettings {
        OptimizerSettings { sdp: self.sdp, antithetic: self.antithetic, ..OptimizerSettings::default() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::Parse(_) | Error::Domain(_) | Error::Divergent(_) => 2,
        Error::Solver { .. } => 3,
        Error::Invariant(_) => 4,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// Column names and rows of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn num(name: &str, v: f64) -> Result<String> {
    if v.is_finite() {
        Ok(v.to_string())
    } else {
        Err(Error::Invariant(format!("{name} = {v} is not finite")))
    }
}

fn positive(name: &str, v: f64, strict: bool) -> Result<String> {
    if v < 0.0 || (strict && v <= 0.0) {
        return Err(Error::Invariant(format!("{name} = {v} must be {}", if strict { "positive" } else { "non-negative" })));
    }
    num(name, v)
}

fn average(a: &TrialAverage) -> Result<[String; 2]> {
    Ok([num("mean", a.mean)?, num("std_error", a.std_error)?])
}

const CHANNEL_TAG: u64 = 0xC4A7_0000_0000;

/// Channel realization used at `n` elements by the optimizer experiments.
pub fn experiment_channel(params: &ScenarioParams, n: usize, seeds: &SeedStream) -> Result<ChannelRealization> {
    sample_channels(params, n, &mut seeds.rng(CHANNEL_TAG, n as u64))
}

fn par_rows<T, F>(points: &[T], f: F) -> Result<Vec<Vec<String>>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Vec<String>>> + Sync + Send,
{
    let chunks = points.par_iter().map(f).collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn fig3a(spec: &ExperimentSpec, p: &ScenarioParams, seeds: &SeedStream) -> Result<Table> {
    let b = p.link_budget();
    let strict = p.kappa() > 0.0;
    let limit = match rate_limit_inf(p) {
        Ok(l) => num("rate_limit", l)?,
        Err(Error::Divergent(_)) => "inf".to_string(),
        Err(e) => return Err(e),
    };
    let rows = par_rows(&spec.grid.counts()?, |&n| {
        let x = n as f64;
        let mut row = vec![
            n.to_string(),
            num("rate_hwi", avg_rate_hwi(x, p, &b)?)?,
            num("rate_ideal", rate_ideal(x, p, &b)?)?,
            positive("rate_gap", rate_gap(x, p, &b)?, strict)?,
            limit.clone(),
        ];
        if n == 1 || n % spec.mc_every == 0 {
            row.extend(average(&average_rate_compensated(n, p, spec.trials, seeds, n as u64, spec.antithetic)?)?);
        } else {
            row.extend([String::new(), String::new()]);
        }
        Ok(vec![row])
    })?;
    Ok(Table { columns: vec!["N", "rate_hwi", "rate_ideal", "rate_gap", "rate_limit", "mc_mean", "mc_std_error"], rows })
}

fn fig3b(spec: &ExperimentSpec, p: &ScenarioParams) -> Result<Table> {
    let b = p.link_budget();
    let strict = p.kappa() > 0.0;
    let rows = par_rows(&spec.grid.counts()?, |&n| {
        let x = n as f64;
        Ok(vec![vec![
            n.to_string(),
            num("utility_hwi", utility_hwi(x, p, &b)?)?,
            num("utility_ideal", utility_ideal(x, p, &b)?)?,
            positive("utility_gap", utility_gap(x, p, &b)?, strict)?,
        ]])
    })?;
    Ok(Table { columns: vec!["N", "utility_hwi", "utility_ideal", "utility_gap"], rows })
}

fn fig4(spec: &ExperimentSpec, p: &ScenarioParams, seeds: &SeedStream) -> Result<Table> {
    let b = p.link_budget();
    let settings = spec.settings();
    let rows = par_rows(&spec.grid.counts()?, |&n| {
        let ch = experiment_channel(p, n, seeds)?;
        let tag = n as u64;
        let comp = fixed_phase_samples(&ch.compensating_phases(), &ch, p, spec.trials, seeds, tag, spec.antithetic)?;
        let opt = optimize_and_evaluate(&ch, p, spec.trials, seeds, tag, &settings)?;
        let gain = TrialAverage::paired_difference(&opt.samples, &comp)?;
        let row = opt.csv_row();
        let mut out = vec![n.to_string(), num("compensated_closed_form", avg_rate_hwi(n as f64, p, &b)?)?];
        out.extend(average(&TrialAverage::from_samples(&comp)?)?);
        out.push(num("objective_rate", opt.objective_rate)?);
        out.push(num("reconstructed_rate", opt.reconstructed_rate)?);
        out.extend(average(&opt.monte_carlo)?);
        out.extend(average(&gain)?);
        out.extend(row[2..].iter().cloned());
        Ok(vec![out])
    })?;
    Ok(Table {
        columns: vec![
            "N",
            "compensated_closed_form",
            "compensated_mc",
            "compensated_std_error",
            "objective_rate",
            "reconstructed_rate",
            "optimized_mc",
            "optimized_std_error",
            "gain_mean",
            "gain_std_error",
            "rank1_certified",
            "eigen_ratio",
            "theta",
        ],
        rows,
    })
}

fn fig5(spec: &ExperimentSpec, r: &Resolved, seeds: &SeedStream) -> Result<Table> {
    let p = &r.params;
    let model = CsiErrorModel::new(r.csi_error_variance)?;
    let settings = spec.settings();
    let rows = par_rows(&spec.grid.counts()?, |&n| {
        let ch = experiment_channel(p, n, seeds)?;
        let c = compare_variants(&ch, p, &model, spec.trials, seeds, n as u64, &settings)?;
        [("clean", &c.clean.monte_carlo), ("imperfect_csi", &c.imperfect_csi.average), ("residual_phase_noise", &c.residual_phase_noise.average)]
            .into_iter()
            .map(|(tag, a)| {
                let [m, s] = average(a)?;
                Ok(vec![n.to_string(), tag.to_string(), m, s])
            })
            .collect()
    })?;
    Ok(Table { columns: vec!["N", "variant", "mean", "std_error"], rows })
}

fn relay_columns(n: f64, p: &ScenarioParams) -> Result<Vec<String>> {
    let b = p.link_budget();
    let df = DfParams::equal(p);
    let u = df_utility(n, &df, p, &b)?;
    Ok(vec![
        num("irs_rate", avg_rate_hwi(n, p, &b)?)?,
        num("df_rate", df_rate_upper_bound(n, &df, p, &b)?)?,
        num("irs_utility", utility_hwi(n, p, &b)?)?,
        num("df_utility", u.value)?,
        u.branch.label().to_string(),
    ])
}

fn fig6a(spec: &ExperimentSpec, p: &ScenarioParams) -> Result<Table> {
    let counts = spec.grid.counts()?;
    let points: Vec<(f64, usize)> = spec.kappas.iter().flat_map(|&k| counts.iter().map(move |&n| (k, n))).collect();
    let rows = par_rows(&points, |&(k, n)| {
        let q = p.with_kappas(k, k)?;
        let mut row = vec![k.to_string(), n.to_string()];
        row.extend(relay_columns(n as f64, &q)?);
        Ok(vec![row])
    })?;
    Ok(Table { columns: vec!["kappa", "N", "irs_rate", "df_rate", "irs_utility", "df_utility", "df_branch"], rows })
}

fn fig6b(spec: &ExperimentSpec, p: &ScenarioParams) -> Result<Table> {
    let points: Vec<(f64, f64)> = spec.kappas.iter().flat_map(|&k| spec.grid.values().iter().map(move |&d| (k, d))).collect();
    let rows = par_rows(&points, |&(k, dbm)| {
        let q = p.with_kappas(k, k)?.with_power(dbm_to_watts(dbm)?)?;
        let mut row = vec![k.to_string(), dbm.to_string()];
        row.extend(relay_columns(spec.n as f64, &q)?);
        Ok(vec![row])
    })?;
    Ok(Table { columns: vec!["kappa", "P_dbm", "irs_rate", "df_rate", "irs_utility", "df_utility", "df_branch"], rows })
}

fn custom_sweep(spec: &ExperimentSpec, p: &ScenarioParams, seeds: &SeedStream) -> Result<Table> {
    let axis = spec.axis.ok_or_else(|| invalid("custom-sweep needs --axis"))?;
    let points: Vec<(usize, f64)> = spec.grid.values().iter().copied().enumerate().collect();
    let rows = par_rows(&points, |&(i, v)| {
        let (n, q, p_dbm) = match axis {
            Axis::N => (v as usize, *p, watts_to_dbm(p.power())?),
            Axis::PowerDbm => (spec.n, p.with_power(dbm_to_watts(v)?)?, v),
            Axis::Kappa => (spec.n, p.with_kappas(v, v)?, watts_to_dbm(p.power())?),
        };
        let b = q.link_budget();
        let df = DfParams::equal(&q);
        let x = n as f64;
        let mut row = vec![
            n.to_string(),
            p_dbm.to_string(),
            q.kappa_t().to_string(),
            q.kappa_r().to_string(),
            num("rate_hwi", avg_rate_hwi(x, &q, &b)?)?,
            num("rate_ideal", rate_ideal(x, &q, &b)?)?,
            positive("rate_gap", rate_gap(x, &q, &b)?, false)?,
            num("utility_hwi", utility_hwi(x, &q, &b)?)?,
            num("df_rate", df_rate_upper_bound(x, &df, &q, &b)?)?,
            num("df_utility", df_utility(x, &df, &q, &b)?.value)?,
        ];
        row.extend(average(&average_rate_compensated(n, &q, spec.trials, seeds, i as u64, spec.antithetic)?)?);
        Ok(vec![row])
    })?;
    Ok(Table {
        columns: vec![
            "N",
            "P_dbm",
            "kappa_t",
            "kappa_r",
            "rate_hwi",
            "rate_ideal",
            "rate_gap",
            "utility_hwi",
            "df_rate",
            "df_utility",
            "mc_mean",
            "mc_std_error",
        ],
        rows,
    })
}

/// Computes the table of `spec` without writing anything.
pub fn compute(spec: &ExperimentSpec, resolved: &Resolved) -> Result<Table> {
    spec.validate()?;
    let seeds = SeedStream::new(spec.seed);
    let p = &resolved.params;
    match spec.experiment {
        Experiment::Fig3a => fig3a(spec, p, &seeds),
        Experiment::Fig3b => fig3b(spec, p),
        Experiment::Fig4 => fig4(spec, p, &seeds),
        Experiment::Fig5 => fig5(spec, resolved, &seeds),
        Experiment::Fig6a => fig6a(spec, p),
        Experiment::Fig6b => fig6b(spec, p),
        Experiment::CustomSweep => custom_sweep(spec, p, &seeds),
    }
}

fn write_table<W: Write>(mut w: W, spec: &ExperimentSpec, resolved: &Resolved, table: &Table) -> Result<()> {
    let name = spec.experiment.to_possible_value().expect("no skipped variants").get_name().to_string();
    writeln!(w, "# experiment = {name}")?;
    writeln!(w, "# seed = {}", spec.seed)?;
    writeln!(w, "# trials = {}", spec.trials)?;
    writeln!(w, "# antithetic = {}", spec.antithetic)?;
    writeln!(w, "# grid = {}", spec.grid.text)?;
    match spec.experiment {
        Experiment::Fig3a => writeln!(w, "# mc_every = {}", spec.mc_every)?,
        Experiment::Fig6a => writeln!(w, "# kappas = {:?}", spec.kappas)?,
        Experiment::Fig6b => writeln!(w, "# kappas = {:?}\n# n = {}", spec.kappas, spec.n)?,
        Experiment::CustomSweep => writeln!(w, "# axis = {:?}\n# n = {}", spec.axis.expect("validated"), spec.n)?,
        Experiment::Fig4 | Experiment::Fig5 => writeln!(w, "# sdp_max_iterations = {}", spec.sdp.max_iterations)?,
        Experiment::Fig3b => {}
    }
    for (k, v) in resolved.entries()? {
        writeln!(w, "# {k} = {v}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&table.columns)?;
    for row in &table.rows {
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Computes `spec` and atomically writes the CSV to `spec.out`. Nothing is
/// left at `spec.out` when the run fails.
pub fn run(spec: &ExperimentSpec, resolved: &Resolved) -> Result<usize> {
    let table = compute(spec, resolved)?;
    let dir = match spec.out.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => Path::new(".").to_path_buf(),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    write_table(std::io::BufWriter::new(tmp.as_file_mut()), spec, resolved, &table)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&spec.out).map_err(|e| Error::Io(e.error))?;
    Ok(table.rows.len())
}

fn spec_from_args(a: &RunArgs) -> Result<(ExperimentSpec, Resolved)> {
    let resolved = ScenarioConfig::load(a.config.as_deref(), &a.set)?.resolve()?;
    let mut spec = ExperimentSpec::new(a.experiment, a.out.clone())?;
    if let Some(g) = &a.grid {
        spec.grid = g.clone();
    } else if a.experiment == Experiment::CustomSweep {
        return Err(invalid("custom-sweep needs --grid"));
    }
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.axis = a.axis;
    if let Some(k) = &a.kappas {
        spec.kappas = k.clone();
    }
    spec.n = a.n;
    spec.mc_every = a.mc_every;
    spec.antithetic = !a.no_antithetic;
    spec.sdp.max_iterations = a.sdp_max_iterations;
    spec.validate()?;
    Ok((spec, resolved))
}

/// Parses `args` (program name first), runs and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let Command::Run(a) = cli.command;
    let result = spec_from_args(&a).and_then(|(spec, resolved)| run(&spec, &resolved).map(|rows| (spec, rows)));
    match result {
        Ok((spec, rows)) => {
            eprintln!("wrote {rows} rows to {}", spec.out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;

    fn resolved() -> Resolved {
        ScenarioConfig::default().resolve().unwrap()
    }

    #[test]
    fn grid_parsing() {
        assert_eq!("1:1:5".parse::<Grid>().unwrap().values(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!("1:0.5:2".parse::<Grid>().unwrap().values(), &[1.0, 1.5, 2.0]);
        assert_eq!("0.1:0.1:0.3".parse::<Grid>().unwrap().values().len(), 3);
        assert_eq!("1,13,25".parse::<Grid>().unwrap().values(), &[1.0, 13.0, 25.0]);
        for bad in ["", "3,2", "1,1", "1:0:5", "5:1:1", "1:2", "a:1:2", "1,nan"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad:?}");
        }
        assert_eq!(Grid::range(1.0, 1.0, 5000.0).unwrap().values().len(), 5000);
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::new(Experiment::Fig4, "x.csv".into()).unwrap();
        s.validate().unwrap();
        s.trials = 0;
        assert!(s.validate().is_err());
        s.trials = 1;
        s.grid = "1.5,2".parse().unwrap();
        assert!(s.validate().is_err());
        let mut c = ExperimentSpec::new(Experiment::CustomSweep, "x.csv".into()).unwrap();
        assert!(c.validate().is_err());
        c.axis = Some(Axis::PowerDbm);
        c.grid = "-5:5:10".parse().unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&invalid("x")), 2);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Solver { status: crate::sdp::SdpStatus::NumericalFailure, detail: String::new() }), 3);
        assert_eq!(exit_code(&Error::Invariant("x".into())), 4);
    }

    #[test]
    fn non_finite_or_negative_outputs_are_invariant_violations() {
        assert!(matches!(num("x", f64::NAN), Err(Error::Invariant(_))));
        assert!(matches!(positive("x", -1e-3, false), Err(Error::Invariant(_))));
        assert!(matches!(positive("x", 0.0, true), Err(Error::Invariant(_))));
        assert_eq!(positive("x", 0.0, false).unwrap(), "0");
    }

    #[test]
    fn fig3a_rows_follow_the_grid() {
        let mut s = ExperimentSpec::new(Experiment::Fig3a, "x.csv".into()).unwrap();
        s.grid = "1:1:1001".parse().unwrap();
        s.trials = 20;
        let t = compute(&s, &resolved()).unwrap();
        assert_eq!(t.rows.len(), 1001);
        let with_mc: Vec<&str> = t.rows.iter().filter(|r| !r[5].is_empty()).map(|r| r[0].as_str()).collect();
        assert_eq!(with_mc, ["1", "500", "1000"]);
        assert!(t.rows.windows(2).all(|w| w[0][0].parse::<usize>().unwrap() < w[1][0].parse::<usize>().unwrap()));
    }

    #[test]
    fn fig4_and_fig5_share_the_channel_and_draws() {
        let r = resolved();
        let mut s4 = ExperimentSpec::new(Experiment::Fig4, "x.csv".into()).unwrap();
        s4.grid = "1,5".parse().unwrap();
        s4.trials = 50;
        let mut s5 = s4.clone();
        s5.experiment = Experiment::Fig5;
        let t4 = compute(&s4, &r).unwrap();
        let t5 = compute(&s5, &r).unwrap();
        assert_eq!(t5.rows.len(), 6);
        assert_eq!(t4.rows[1][6], t5.rows[3][2]);
        assert_eq!(t5.rows[3][1], "clean");
    }

    #[test]
    fn custom_sweep_over_power() {
        let mut s = ExperimentSpec::new(Experiment::CustomSweep, "x.csv".into()).unwrap();
        s.axis = Some(Axis::PowerDbm);
        s.grid = "10,20".parse().unwrap();
        s.n = 64;
        s.trials = 10;
        let t = compute(&s, &resolved()).unwrap();
        assert_eq!(t.rows[1][1], "20");
        let d = default_scenario();
        let rate: f64 = t.rows[1][4].parse().unwrap();
        assert_eq!(rate, avg_rate_hwi(64.0, &d, &d.link_budget()).unwrap());
    }
}
