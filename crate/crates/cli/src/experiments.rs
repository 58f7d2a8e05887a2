//! Built-in experiments: fixed data sets, fixed configurations, one bundle
//! per solve.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use bdlawson::lawson::solve;
use bdlawson::{Complex64, InterpolationData, LawsonConfig, SampleSet, SolveResult};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::bundle::{write_bundle, RunSummary};
use crate::format::num;
use crate::problem::{write_interp, write_samples};
use crate::{run_exit_code, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    AbsXTable,
    Example2,
    Example3Cos,
    Example4Discontinuous,
    Example6Sign,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::AbsXTable,
        Experiment::Example2,
        Experiment::Example3Cos,
        Experiment::Example4Discontinuous,
        Experiment::Example6Sign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AbsXTable => "abs_x_table",
            Experiment::Example2 => "example2",
            Experiment::Example3Cos => "example3_cos",
            Experiment::Example4Discontinuous => "example4_discontinuous",
            Experiment::Example6Sign => "example6_sign",
        }
    }
}

/// Published maximum errors for `|x|` on 20000 equispaced points.
pub const ABS_X_REFERENCE: [(usize, f64); 10] = [
    (4, 8.5506e-3),
    (8, 7.4051e-4),
    (12, 1.3342e-4),
    (16, 1.7130e-5),
    (20, 5.8606e-6),
    (24, 3.9164e-7),
    (28, 5.1226e-8),
    (32, 6.2480e-9),
    (36, 7.3968e-10),
    (40, 1.0765e-10),
];

pub const ABS_X_SAMPLES: usize = 20000;
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const SAMPLES_CSV: &str = "samples.csv";
pub const INTERP_CSV: &str = "interp.csv";

#[derive(Debug, Clone)]
pub struct Problem {
    /// Subdirectory of the experiment output; empty for single-run experiments.
    pub name: String,
    pub samples: SampleSet,
    pub interp: InterpolationData,
    pub config: LawsonConfig,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `x_j = −1 + 2j/(m−1)`, `j = 0..m−1`.
pub fn equispaced(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| -1.0 + 2.0 * j as f64 / (m - 1) as f64)
        .collect()
}

fn interp_from_fn(ts: &[f64], f: impl Fn(f64) -> f64) -> InterpolationData {
    InterpolationData::new(
        ts.iter().map(|&t| real(t)).collect(),
        ts.iter().map(|&t| real(f(t))).collect(),
    )
    .expect("distinct interpolation nodes")
}

pub fn abs_x_problem(n: usize, m: usize) -> Problem {
    Problem {
        name: format!("n{n:02}"),
        samples: SampleSet::from_real_fn(&equispaced(m), f64::abs).expect("valid grid"),
        interp: InterpolationData::empty(),
        config: LawsonConfig::new(n),
    }
}

pub fn example2_fn(x: f64) -> f64 {
    1.0 / (1.0 + 100.0 * (x - 0.5).powi(2)).sqrt() + 1.0 / (1.0 + 100.0 * (x + 0.5).powi(2))
}

/// The equispaced grid on `[−1, 1]` minus its endpoints, which are
/// interpolation nodes and may not double as samples.
pub fn example2_problem() -> Problem {
    let ts = [-1.0, 0.0, 1.0];
    let xs: Vec<f64> = equispaced(20000)
        .into_iter()
        .filter(|x| !ts.contains(x))
        .collect();
    Problem {
        name: String::new(),
        samples: SampleSet::from_real_fn(&xs, example2_fn).expect("valid grid"),
        interp: interp_from_fn(&ts, example2_fn),
        config: LawsonConfig::new(6),
    }
}

pub fn example3_problem() -> Problem {
    let m = 2000;
    let xs: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
    Problem {
        name: String::new(),
        samples: SampleSet::from_real_fn(&xs, |x| (2.0 * PI * x).cos()).expect("valid grid"),
        interp: interp_from_fn(&[-1.0, -0.7, -0.4], |_| 1.0),
        config: LawsonConfig::new(8),
    }
}

/// `1 − sin(πx)/2` on `x_j = j/(m+1)`, `j = 1..m`, with `ξ(0) = ξ(1) = 0`.
pub fn example4_problem() -> Problem {
    let m = 2000;
    let xs: Vec<f64> = (1..=m).map(|j| j as f64 / (m + 1) as f64).collect();
    Problem {
        name: String::new(),
        samples: SampleSet::from_real_fn(&xs, |x| 1.0 - 0.5 * (PI * x).sin()).expect("valid grid"),
        interp: interp_from_fn(&[0.0, 1.0], |_| 0.0),
        config: LawsonConfig::new(6),
    }
}

/// `E = {−3 + i cos(jπ/200)}` with value −1 and 2000 points on the unit
/// circle with value +1. The second problem moves the two ends of `E`
/// from the samples into interpolation constraints.
pub fn example6_problems() -> Vec<Problem> {
    let e: Vec<Complex64> = (0..=200)
        .map(|j| Complex64::new(-3.0, (j as f64 * PI / 200.0).cos()))
        .collect();
    let f: Vec<Complex64> = (0..2000)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 2000.0))
        .collect();
    let build = |e: &[Complex64]| {
        let nodes: Vec<Complex64> = e.iter().chain(&f).copied().collect();
        let values = e
            .iter()
            .map(|_| real(-1.0))
            .chain(f.iter().map(|_| real(1.0)))
            .collect();
        SampleSet::new(nodes, values).expect("E and F are disjoint")
    };
    let ends = vec![e[0], e[200]];
    vec![
        Problem {
            name: "plain".into(),
            samples: build(&e),
            interp: InterpolationData::empty(),
            config: LawsonConfig::new(15),
        },
        Problem {
            name: "interp".into(),
            samples: build(&e[1..200]),
            interp: InterpolationData::new(ends, vec![real(-1.0); 2]).expect("distinct ends"),
            config: LawsonConfig::new(15),
        },
    ]
}

pub fn problems(exp: Experiment) -> Vec<Problem> {
    match exp {
        Experiment::AbsXTable => ABS_X_REFERENCE
            .iter()
            .map(|&(n, _)| abs_x_problem(n, ABS_X_SAMPLES))
            .collect(),
        Experiment::Example2 => vec![example2_problem()],
        Experiment::Example3Cos => vec![example3_problem()],
        Experiment::Example4Discontinuous => vec![example4_problem()],
        Experiment::Example6Sign => example6_problems(),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub summary: RunSummary,
    pub exit_code: i32,
    pub result: SolveResult,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub experiment: Experiment,
    pub runs: Vec<RunOutcome>,
}

impl ExperimentOutcome {
    /// Worst exit code over the runs.
    pub fn exit_code(&self) -> i32 {
        self.runs.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }

    pub fn run(&self, name: &str) -> Option<&RunOutcome> {
        self.runs.iter().find(|r| r.name == name)
    }
}

pub fn solve_problem(p: &Problem) -> Result<SolveResult, CliError> {
    Ok(solve(&p.samples, &p.interp, &p.config)?)
}

pub fn run_experiment(
    exp: Experiment,
    out: &Path,
    command: &[String],
) -> Result<ExperimentOutcome, CliError> {
    let problems = problems(exp);
    // Rows are independent; results are collected in input order so the
    // output does not depend on scheduling.
    let results: Vec<Result<SolveResult, CliError>> =
        problems.par_iter().map(solve_problem).collect();
    let mut runs = Vec::with_capacity(problems.len());
    for (p, res) in problems.iter().zip(results) {
        let result = res?;
        let dir = out.join(&p.name);
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.display()));
        write_samples(&dir.join(SAMPLES_CSV), &p.samples, Some(p.config.degree)).map_err(io)?;
        write_interp(&dir.join(INTERP_CSV), &p.interp).map_err(io)?;
        let summary = write_bundle(&dir, &p.samples, &p.interp, &result, command)?;
        runs.push(RunOutcome {
            name: p.name.clone(),
            exit_code: run_exit_code(&summary),
            summary,
            result,
        });
    }
    if exp == Experiment::AbsXTable {
        let p = out.join(COMPARISON_CSV);
        fs::write(&p, comparison_csv(&runs))
            .map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
    }
    Ok(ExperimentOutcome {
        experiment: exp,
        runs,
    })
}

/// `n, computed, reference, rel_diff` for the `|x|` table.
pub fn comparison_csv(runs: &[RunOutcome]) -> String {
    let mut out = String::from("n,computed,reference,rel_diff\n");
    for (&(n, reference), run) in ABS_X_REFERENCE.iter().zip(runs) {
        let e = run.summary.max_error;
        out.push_str(&format!(
            "{n},{},{},{}\n",
            num(e),
            num(reference),
            num((e - reference).abs() / reference)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_match_their_definitions() {
        let xs = equispaced(5);
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let p = example2_problem();
        assert_eq!(p.samples.len(), 19998);
        assert_eq!(p.interp.len(), 3);
        assert!((p.interp.values()[1].re - (1.0 / 26f64.sqrt() + 1.0 / 26.0)).abs() < 1e-15);
        let p = example4_problem();
        assert_eq!(p.samples.len(), 2000);
        assert!(p.samples.nodes().iter().all(|x| x.re > 0.0 && x.re < 1.0));
    }

    #[test]
    fn example6_sets() {
        let ps = example6_problems();
        assert_eq!(ps[0].samples.len(), 2201);
        assert_eq!(ps[1].samples.len(), 2199);
        assert_eq!(ps[1].interp.nodes()[0], Complex64::new(-3.0, 1.0));
        assert!((ps[1].interp.nodes()[1] - Complex64::new(-3.0, -1.0)).norm() < 1e-15);
        assert!(ps[0].samples.values()[..201].iter().all(|v| v.re == -1.0));
        assert!(ps[0].samples.values()[201..].iter().all(|v| v.re == 1.0));
    }

    #[test]
    fn names_round_trip_through_clap() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_str(e.name(), false).unwrap(), e);
        }
    }
}
