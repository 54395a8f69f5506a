//! Command-line front end.
//!
//! Exit status: 0 success, 1 validation or domain error, 2 I/O error,
//! 3 a verification suite reported a failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chernoff_opt::{
    ModelId, OptimizationOutcome, OptimizationSettings, PerformanceModel, Pipeline, RegistryModel, ScenarioCount,
    ScenarioDistribution, ScenarioSet,
};
use crate::error::{Error, Result};
use crate::estimator::{estimate_from_batch, parse_batch, Certificate};
use crate::tail_bounds::{achieved_confidence, minimum_sample_size, validate_spec, SamplePlan};
use crate::verification::{
    coverage_experiment, domination_experiment, lemma_suite, DominationBox, ScanReport, COVERAGE_MUS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "probcert", version, about = "Certified sample sizes and Chernoff-surrogate probability minimization")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Also write the JSON result to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smallest sample size for a mixed absolute/relative error spec.
    Plan {
        #[arg(long)]
        eps_a: f64,
        #[arg(long)]
        eps_r: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Risk certified by n samples at the given tolerances.
    Confidence {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        eps_a: f64,
        #[arg(long)]
        eps_r: f64,
    },
    /// Certify the mean of a batch file (one value in [0, 1] per line).
    Estimate {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long)]
        eps_a: f64,
        #[arg(long)]
        eps_r: f64,
    },
    /// Minimize a failure probability from a JSON run configuration.
    Optimize {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Write `iteration,lambda,objective` rows here.
        #[arg(long, value_name = "PATH")]
        trace_csv: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        eps_a: f64,
        #[arg(long, default_value_t = 0.2)]
        eps_r: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemmas,
    Coverage,
    Domination,
    All,
}

/// JSON configuration for `optimize`.
///
/// Exactly one of `n_scenarios`, `spec` or `scenarios_csv` selects the
/// scenarios. `distribution` defaults per model: Normal(0, 0.5) for
/// `quadratic_well`, Uniform(0, 1) for `uniform_gap`, standard normal of
/// dimension `len(b)` for `affine`. `certify_spec` requests a fresh-sample
/// certificate at the optimum.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub model: ModelId,
    #[serde(default)]
    pub model_params: Value,
    #[serde(default)]
    pub n_scenarios: Option<usize>,
    #[serde(default)]
    pub spec: Option<crate::tail_bounds::ErrorSpec>,
    #[serde(default)]
    pub scenarios_csv: Option<PathBuf>,
    #[serde(default)]
    pub distribution: Option<ScenarioDistribution>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub settings: OptimizationSettings,
    #[serde(default)]
    pub certify_spec: Option<crate::tail_bounds::ErrorSpec>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl OptimizeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                Error::Config(e.into_inner().to_string())
            } else {
                Error::Config(format!("{path}: {}", e.into_inner()))
            }
        })
    }

    fn default_distribution(model: &RegistryModel) -> ScenarioDistribution {
        match model {
            RegistryModel::QuadraticWell(_) => ScenarioDistribution::Normal { mean: 0.0, std: 0.5, dim: 1 },
            RegistryModel::UniformGap(_) => ScenarioDistribution::Uniform { low: 0.0, high: 1.0, dim: 1 },
            RegistryModel::Affine(a) => ScenarioDistribution::Normal { mean: 0.0, std: 1.0, dim: a.b.len() },
        }
    }

    /// Validates the whole configuration and runs the pipeline.
    /// Relative `scenarios_csv` paths resolve against `base_dir`.
    pub fn run(&self, base_dir: &Path) -> Result<OptimizationOutcome> {
        let model = RegistryModel::from_params(self.model, &self.model_params)?;
        let distribution = self.distribution.clone().unwrap_or_else(|| Self::default_distribution(&model));
        distribution.validate()?;
        if distribution.dim() != model.dim_delta() {
            return Err(Error::Config(format!(
                "distribution.dim = {} but model expects {}",
                distribution.dim(),
                model.dim_delta()
            )));
        }
        self.settings.validate(model.dim_theta())?;

        let selected = [self.n_scenarios.is_some(), self.spec.is_some(), self.scenarios_csv.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if selected != 1 {
            return Err(Error::Config("give exactly one of `n_scenarios`, `spec`, `scenarios_csv`".into()));
        }
        let count = match (self.n_scenarios, self.spec) {
            (Some(0), _) => return Err(Error::Config("n_scenarios: must be positive".into())),
            (Some(n), _) => ScenarioCount::Fixed(n),
            (_, Some(spec)) => ScenarioCount::FromSpec(spec),
            _ => ScenarioCount::Fixed(0),
        };
        let pipeline = Pipeline {
            model: &model,
            distribution: &distribution,
            count,
            seed: self.seed,
            settings: self.settings.clone(),
            certify: self.certify_spec,
        };
        match &self.scenarios_csv {
            Some(path) => {
                let path = base_dir.join(path);
                let scenarios = ScenarioSet::from_csv(&read_file(&path)?)?;
                if scenarios.dim() != model.dim_delta() {
                    return Err(Error::Config(format!(
                        "{}: rows have {} columns, model expects {}",
                        path.display(),
                        scenarios.dim(),
                        model.dim_delta()
                    )));
                }
                pipeline.run_on(&scenarios)
            }
            None => pipeline.run(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfidenceReport {
    pub n: u64,
    pub eps_a: f64,
    pub eps_r: f64,
    pub delta: f64,
    pub guaranteed: bool,
}

fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors are printed to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(&config, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit<T: Serialize>(config: &RunConfig, out: &mut dyn Write, value: &T, text: &str) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(path) = &config.output {
        write_file(path, &format!("{json}\n"))?;
    }
    let written = if config.json { writeln!(out, "{json}") } else { write!(out, "{text}") };
    written.map_err(|e| Error::io("<stdout>", e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn plan_text(plan: &SamplePlan) -> String {
    format!(
        "n = {}\nthreshold = {}\nworst-case exponent = {}\neps_a = {}, eps_r = {}, delta = {}\n",
        plan.n,
        plan.threshold,
        plan.worst_case_exponent,
        plan.spec.eps_a(),
        plan.spec.eps_r(),
        plan.spec.delta()
    )
}

fn certificate_text(c: &Certificate) -> String {
    let mut s = format!(
        "mu_hat = {}\nn = {}\neps_a = {}, eps_r = {}\ndelta = {}{}\nkind = {:?}\n",
        c.mu_hat,
        c.n,
        c.eps_a,
        c.eps_r,
        c.delta_achieved,
        if c.guaranteed { "" } else { " (no guarantee)" },
        c.kind
    );
    if let Some(note) = &c.note {
        s.push_str(&format!("note: {note}\n"));
    }
    s
}

fn outcome_text(o: &OptimizationOutcome) -> String {
    let mut s = format!(
        "theta* = {:?}\nlambda* = {}\nobjective = {} -> {}\niterations = {} ({:?})\nscenarios = {}\n",
        o.theta_star,
        o.lambda_star,
        o.objective_trace.first().copied().unwrap_or(f64::NAN),
        o.objective_trace.last().copied().unwrap_or(f64::NAN),
        o.iterations,
        o.termination,
        o.metadata.n_scenarios
    );
    if let Some(c) = &o.certificate {
        s.push_str("certificate of Pr{Y <= 0} at theta*:\n");
        for line in certificate_text(c).lines() {
            s.push_str(&format!("  {line}\n"));
        }
    }
    s
}

/// Runs one parsed command, writing human or JSON output to `out`.
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    match &config.command {
        &Command::Plan { eps_a, eps_r, delta } => {
            let plan = minimum_sample_size(&validate_spec(eps_a, eps_r, delta)?)?;
            emit(config, out, &plan, &plan_text(&plan))?;
        }
        &Command::Confidence { n, eps_a, eps_r } => {
            let c = achieved_confidence(n, eps_a, eps_r)?;
            let report = ConfidenceReport { n, eps_a, eps_r, delta: c.delta, guaranteed: c.guaranteed };
            let text = if c.guaranteed {
                format!("delta = {}\n", c.delta)
            } else {
                format!("delta = {} (no guarantee: the bound is vacuous at n = {n})\n", c.delta)
            };
            emit(config, out, &report, &text)?;
        }
        Command::Estimate { input, eps_a, eps_r } => {
            let text = read_file(input)?;
            let values: Vec<f64> = parse_batch(&text)?.into_iter().map(|b| b.value).collect();
            let cert = estimate_from_batch(&values, *eps_a, *eps_r)?;
            emit(config, out, &cert, &certificate_text(&cert))?;
        }
        Command::Optimize { config: path, trace_csv } => {
            let text = read_file(path)?;
            let run = OptimizeConfig::from_json(&text)?;
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let outcome = run.run(base)?;
            if let Some(trace) = trace_csv {
                write_file(trace, &outcome.trace_csv())?;
            }
            emit(config, out, &outcome, &outcome_text(&outcome))?;
        }
        &Command::Verify { suite, trials, seed, eps_a, eps_r, delta } => {
            let spec = validate_spec(eps_a, eps_r, delta)?;
            let mut reports: Vec<ScanReport> = Vec::new();
            if matches!(suite, Suite::Lemmas | Suite::All) {
                reports.extend(lemma_suite(seed)?);
            }
            if matches!(suite, Suite::Coverage | Suite::All) {
                reports.push(coverage_experiment(&spec, &COVERAGE_MUS, trials, seed)?);
            }
            if matches!(suite, Suite::Domination | Suite::All) {
                let dist = ScenarioDistribution::Normal { mean: 0.0, std: 0.5, dim: 1 };
                let model = RegistryModel::QuadraticWell(crate::chernoff_opt::QuadraticWell);
                reports.push(domination_experiment(&model, &dist, &spec, 20, &DominationBox::default(), seed)?);
            }
            let text: String = reports.iter().map(ToString::to_string).collect();
            emit(config, out, &reports, &text)?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Result<i32>, String) {
        let config = RunConfig::try_parse_from(std::iter::once("probcert").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = execute(&config, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn plan_text_and_json() {
        let (r, text) = run(&["plan", "--eps-a", "0.05", "--eps-r", "0.2", "--delta", "0.05"]);
        assert_eq!(r.unwrap(), 0);
        assert!(text.starts_with("n = 577\n"));
        let (_, json) = run(&["plan", "--eps-a", "0.02", "--eps-r", "0.2", "--delta", "0.05", "--json"]);
        let plan: SamplePlan = serde_json::from_str(&json).unwrap();
        assert_eq!(plan.n, 1755);
    }

    #[test]
    fn plan_rejects_bad_spec() {
        let (r, _) = run(&["plan", "--eps-a", "0.3", "--eps-r", "0.5", "--delta", "0.1"]);
        let err = r.unwrap_err();
        assert_eq!(exit_code(&err), EXIT_VALIDATION);
        assert!(err.to_string().contains("exceeds 1/2"));
    }

    #[test]
    fn confidence_flags_vacuous_bounds() {
        let (_, text) = run(&["confidence", "--n", "1", "--eps-a", "0.05", "--eps-r", "0.2"]);
        assert!(text.contains("no guarantee"));
        let (_, json) = run(&["confidence", "--n", "577", "--eps-a", "0.05", "--eps-r", "0.2", "--json"]);
        let report: ConfidenceReport = serde_json::from_str(&json).unwrap();
        assert!((report.delta - 0.04976).abs() < 1e-5);
        assert!(report.guaranteed);
    }

    #[test]
    fn config_errors_name_fields() {
        let err =
            OptimizeConfig::from_json(r#"{"model": "quadratic_well", "settings": {"max_iters": "ten"}}"#).unwrap_err();
        assert!(err.to_string().contains("settings.max_iters"), "{err}");
        let err = OptimizeConfig::from_json(r#"{"model_params": {}}"#).unwrap_err();
        assert!(err.to_string().contains("`model`"), "{err}");
        let err = OptimizeConfig::from_json(r#"{"model": "quadratic_well", "n_scenario": 5}"#).unwrap_err();
        assert!(err.to_string().contains("n_scenario"), "{err}");
        let err = OptimizeConfig::from_json(
            r#"{"model": "quadratic_well", "spec": {"eps_a": 0.3, "eps_r": 0.5, "delta": 0.1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("spec"), "{err}");
        assert!(OptimizeConfig::from_json("{not json").is_err());
    }

    #[test]
    fn config_needs_one_scenario_source() {
        let cfg = OptimizeConfig::from_json(r#"{"model": "uniform_gap"}"#).unwrap();
        assert!(cfg.run(Path::new(".")).is_err());
        let cfg = OptimizeConfig::from_json(
            r#"{"model": "uniform_gap", "n_scenarios": 10, "spec": {"eps_a": 0.05, "eps_r": 0.2, "delta": 0.05}}"#,
        )
        .unwrap();
        assert!(cfg.run(Path::new(".")).is_err());
    }

    #[test]
    fn config_checks_distribution_dimension() {
        let cfg = OptimizeConfig::from_json(
            r#"{"model": "uniform_gap", "n_scenarios": 10, "distribution": {"kind": "normal", "mean": 0, "std": 1, "dim": 2}}"#,
        )
        .unwrap();
        assert!(cfg.run(Path::new(".")).unwrap_err().to_string().contains("distribution.dim"));
    }
}
