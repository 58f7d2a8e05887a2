//! Subcommands and their exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use bdlawson::dual::{build_basis, dual_value_oracle};
use bdlawson::lawson::solve;
use bdlawson::{LawsonConfig, SupportStrategy};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bundle::{read_rational, write_bundle};
use crate::experiments::{run_experiment, Experiment};
use crate::format::num;
use crate::problem::{read_points, read_support, ProblemFile};
use crate::{run_exit_code, CliError, EXIT_INPUT, EXIT_OK};

pub const OUT_DIR_ENV: &str = "MINIMAX_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "bdlawson",
    version,
    about = "Interpolation-constrained rational minimax approximation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a rational approximant to sampled data.
    Fit(FitArgs),
    /// Run one of the built-in experiments.
    Experiment(ExperimentArgs),
    /// Evaluate a fitted model at given points.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SupportChoice {
    Aaa,
    Uniform,
    Explicit,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Samples CSV with columns x_re, x_im, f_re, f_im.
    #[arg(long)]
    pub samples: PathBuf,
    /// Interpolation CSV with columns t_re, t_im, y_re, y_im.
    #[arg(long)]
    pub interp: Option<PathBuf>,
    /// Type (n, n) of the approximant. Defaults to the `# degree = N` header.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Relative duality-gap tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = SupportChoice::Aaa)]
    pub support: SupportChoice,
    /// Free support nodes (columns t_re, t_im) for `--support explicit`.
    #[arg(long)]
    pub support_file: Option<PathBuf>,
    /// Halve rho whenever the dual value would decrease.
    #[arg(long)]
    pub adaptive_rho: bool,
    /// Also solve the final dual densely and record the PSD margin.
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Reserved. The solver is deterministic and ignores it.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: Experiment,
    /// Output directory; defaults to $MINIMAX_OUT_DIR, then `results/<name>`.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model JSON (`rational.json` from a bundle).
    #[arg(long)]
    pub model: PathBuf,
    /// Points CSV with columns x_re[, x_im].
    #[arg(long)]
    pub points: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => fit(a, &args, stdout),
        Command::Experiment(a) => experiment(a, &args, stdout),
        Command::Eval(a) => eval(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn config_from(a: &FitArgs, degree: usize) -> Result<LawsonConfig, CliError> {
    let mut cfg = LawsonConfig::new(degree);
    cfg.k_max = a.max_iter;
    cfg.rho = a.rho;
    cfg.eps_r = a.tol;
    cfg.adaptive_rho = a.adaptive_rho;
    cfg.support_strategy = match (a.support, &a.support_file) {
        (SupportChoice::Explicit, Some(p)) => SupportStrategy::Explicit(read_support(p)?),
        (SupportChoice::Explicit, None) => {
            return Err(CliError::Input(
                "--support explicit needs --support-file".into(),
            ))
        }
        (_, Some(_)) => {
            return Err(CliError::Input(
                "--support-file is only used with --support explicit".into(),
            ))
        }
        (SupportChoice::Aaa, None) => SupportStrategy::AaaGreedy,
        (SupportChoice::Uniform, None) => SupportStrategy::UniformSubset,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn fit(a: &FitArgs, args: &[String], stdout: &mut dyn Write) -> Result<i32, CliError> {
    let out = a.out.clone().ok_or_else(|| {
        CliError::Input(format!(
            "no output directory: pass --out or set {OUT_DIR_ENV}"
        ))
    })?;
    let problem = ProblemFile::load(&a.samples, a.interp.as_deref())?;
    let degree = a.degree.or(problem.degree).ok_or_else(|| {
        CliError::Input(format!(
            "no degree: pass --degree or add a '# degree = N' line to {}",
            a.samples.display()
        ))
    })?;
    let cfg = config_from(a, degree)?;
    let mut result = solve(&problem.samples, &problem.interp, &cfg)?;
    if a.oracle_check {
        let basis = build_basis(&problem.samples, &result.support, problem.interp.values())?;
        let dense = dual_value_oracle(
            &basis,
            &problem.samples,
            &result.support,
            problem.interp.values(),
            &result.weights,
            &cfg.dual_options(),
        )?;
        result.certificate.psd_margin = dense.psd_margin;
    }
    let summary = write_bundle(&out, &problem.samples, &problem.interp, &result, args)?;
    writeln!(stdout, "{}", summary.line()).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(run_exit_code(&summary))
}

fn experiment(
    a: &ExperimentArgs,
    args: &[String],
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| Path::new("results").join(a.name.name()));
    let outcome = run_experiment(a.name, &out, args)?;
    for run in &outcome.runs {
        let label = if run.name.is_empty() {
            a.name.name().to_string()
        } else {
            format!("{}/{}", a.name.name(), run.name)
        };
        writeln!(stdout, "{label}: {}", run.summary.line())
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    Ok(outcome.exit_code())
}

/// One row per point: `x_re, x_im, value_re, value_im, pole`. Rows that hit
/// a pole have empty value fields and `pole = 1`.
pub fn eval_csv(model: &Path, points: &Path) -> Result<String, CliError> {
    let rational = read_rational(model)?;
    let xs = read_points(points)?;
    let mut out = String::from("x_re,x_im,value_re,value_im,pole\n");
    for x in xs {
        match rational.evaluate(x) {
            Ok(v) if v.is_finite() => out.push_str(&format!(
                "{},{},{},{},0\n",
                num(x.re),
                num(x.im),
                num(v.re),
                num(v.im)
            )),
            _ => out.push_str(&format!("{},{},,,1\n", num(x.re), num(x.im))),
        }
    }
    Ok(out)
}

fn eval(a: &EvalArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let text = eval_csv(&a.model, &a.points)?;
    match &a.output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string()))?,
    }
    Ok(EXIT_OK)
}
