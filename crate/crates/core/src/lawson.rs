//! Support selection and the Lawson driver.
//!
//! Each iteration evaluates the dual at the current weights, measures the
//! error of the resulting rational on the samples and stops once
//! `|√d − e| / e < eps_r`. Otherwise every weight is multiplied by its
//! residual raised to `ρ` and the vector is renormalized.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barycentric::{
    BarycentricRational, InterpolationData, SampleSet, SupportPoints, PROXIMITY_REL,
};
use crate::diagnostics::{
    duality_certificate, error_report, extreme_points, DualityCertificate, ErrorReport,
    ExtremePointSet,
};
use crate::dual::{
    build_basis, dual_value_fast, dual_value_oracle, BasisMatrices, DualEvaluation, DualOptions,
    WeightVector,
};
use crate::error::{Error, Result};
use crate::linalg::{smallest_singular_pair, ComplexMatrix};

/// Drop in `d` tolerated before adaptive mode halves `ρ`.
pub const ASCENT_SLACK: f64 = 1e-14;
/// Adaptive mode never shrinks `ρ` below `ρ₀ / 2¹⁰`.
pub const RHO_HALVINGS: i32 = 10;
/// Below this `|q(x_j)|` a sample counts as a pole hit.
pub const POLE_GUARD: f64 = 1e-300;
/// Exact fit: `e <= 1e-14 (1 + max |f|)`.
pub const EXACT_FIT_REL: f64 = 1e-14;
const PERTURBATION_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum SupportStrategy {
    AaaGreedy,
    UniformSubset,
    /// Free support nodes supplied verbatim.
    Explicit(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawsonConfig {
    pub degree: usize,
    pub rho: f64,
    pub eps_r: f64,
    pub k_max: usize,
    pub support_strategy: SupportStrategy,
    /// Shift applied to selected sample nodes; `None` means `1 / (10 m)`.
    pub perturbation_scale: Option<f64>,
    pub adaptive_rho: bool,
    pub w_floor: f64,
    /// Relative rank floor on singular values.
    pub rank_floor: f64,
    pub extreme_threshold: f64,
    pub cluster_collapse: bool,
}

impl LawsonConfig {
    pub fn new(degree: usize) -> Self {
        LawsonConfig {
            degree,
            rho: 1.0,
            eps_r: 1e-10,
            k_max: 40,
            support_strategy: SupportStrategy::AaaGreedy,
            perturbation_scale: None,
            adaptive_rho: false,
            w_floor: 1e-15,
            rank_floor: 1e-14,
            extreme_threshold: 1e-2,
            cluster_collapse: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::arg(format!("rho = {} is outside (0, 1]", self.rho)));
        }
        if self.eps_r.is_nan() || self.eps_r <= 0.0 {
            return Err(Error::arg(format!(
                "eps_r = {} must be positive",
                self.eps_r
            )));
        }
        if self.k_max < 1 {
            return Err(Error::arg("k_max must be at least 1"));
        }
        if let Some(h) = self.perturbation_scale {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::arg(format!(
                    "perturbation scale {h} must be positive"
                )));
            }
        }
        if !(self.extreme_threshold > 0.0 && self.extreme_threshold < 1.0) {
            return Err(Error::arg(format!(
                "extreme threshold {} is outside (0, 1)",
                self.extreme_threshold
            )));
        }
        Ok(())
    }

    pub fn dual_options(&self) -> DualOptions {
        DualOptions {
            w_floor: self.w_floor,
            rank_floor_rel: self.rank_floor,
            singularity_floor: None,
        }
    }
}

fn too_close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < PROXIMITY_REL * (1.0 + b.norm())
}

/// Indices chosen by the AAA greedy loop: each step takes the sample with
/// the largest residual of the current interim fit.
fn aaa_greedy_indices(
    samples: &SampleSet,
    interp: &InterpolationData,
    count: usize,
) -> Result<Vec<usize>> {
    let x = samples.nodes();
    let f = samples.values();
    let m = x.len();
    let mean = f.iter().sum::<Complex64>() / m as f64;
    let mut residual: Vec<f64> = f.iter().map(|fj| (fj - mean).norm()).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    let mut taken = vec![false; m];
    for (j, xj) in x.iter().enumerate() {
        if interp.nodes().iter().any(|t| t == xj) {
            taken[j] = true;
        }
    }
    for _ in 0..count {
        let next = (0..m)
            .filter(|&j| !taken[j])
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if residual[b] >= residual[j] => Some(b),
                _ => Some(j),
            })
            .ok_or_else(|| Error::SupportSelection("ran out of sample nodes".into()))?;
        taken[next] = true;
        chosen.push(next);
        if chosen.len() == count {
            break;
        }

        let rest: Vec<usize> = (0..m).filter(|&j| !taken[j]).collect();
        let k = chosen.len();
        let rows = rest.len().max(k);
        let mut loewner = ComplexMatrix::zeros(rows, k);
        for (i, &j) in rest.iter().enumerate() {
            for (c, &s) in chosen.iter().enumerate() {
                loewner[(i, c)] = (f[j] - f[s]) / (x[j] - x[s]);
            }
        }
        let beta = smallest_singular_pair(&loewner)?.v;
        for &j in &rest {
            let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (c, &s) in chosen.iter().enumerate() {
                let q = beta[c] / (x[j] - x[s]);
                num += q * f[s];
                den += q;
            }
            let r = (f[j] - num / den).norm();
            residual[j] = if r.is_finite() { r } else { f64::INFINITY };
        }
        for &s in &chosen {
            residual[s] = 0.0;
        }
    }
    Ok(chosen)
}

fn uniform_indices(m: usize, count: usize) -> Vec<usize> {
    match count {
        0 => vec![],
        1 => vec![(m - 1) / 2],
        _ => (0..count)
            .map(|i| ((i * (m - 1)) as f64 / (count - 1) as f64).round() as usize)
            .collect(),
    }
}

/// Chooses the free support nodes. Selected sample nodes are shifted right
/// by the perturbation scale so that no support point coincides with a
/// sample.
pub fn select_support_points(
    samples: &SampleSet,
    interp: &InterpolationData,
    config: &LawsonConfig,
) -> Result<SupportPoints> {
    let n = config.degree;
    let ell = interp.len();
    if ell > n + 1 {
        return Err(Error::arg(format!(
            "{ell} interpolation conditions exceed n + 1 = {}",
            n + 1
        )));
    }
    let count = n + 1 - ell;
    let m = samples.len();
    if m < count {
        return Err(Error::arg(format!(
            "need at least {count} samples to pick support points, got {m}"
        )));
    }
    let indices = match &config.support_strategy {
        _ if count == 0 => vec![],
        SupportStrategy::Explicit(nodes) => {
            if nodes.len() != count {
                return Err(Error::arg(format!(
                    "explicit support needs n + 1 − ℓ = {count} nodes, got {}",
                    nodes.len()
                )));
            }
            let support = SupportPoints::new(interp.nodes().to_vec(), nodes.clone())?;
            support.check_disjoint(samples)?;
            return Ok(support);
        }
        SupportStrategy::UniformSubset => uniform_indices(m, count),
        SupportStrategy::AaaGreedy => aaa_greedy_indices(samples, interp, count)?,
    };

    let mut h = config.perturbation_scale.unwrap_or(1.0 / (10.0 * m as f64));
    for _ in 0..=PERTURBATION_RETRIES {
        let free: Vec<Complex64> = indices
            .iter()
            .map(|&j| samples.nodes()[j] + Complex64::new(h, 0.0))
            .collect();
        let collides = free.iter().enumerate().any(|(i, t)| {
            samples.nodes().iter().any(|x| too_close(*t, *x))
                || interp.nodes().iter().any(|s| too_close(*t, *s))
                || free[..i].iter().any(|s| too_close(*t, *s))
        });
        if !collides {
            let support = SupportPoints::new(interp.nodes().to_vec(), free)?;
            support.check_disjoint(samples)?;
            return Ok(support);
        }
        h *= 2.0;
    }
    Err(Error::SupportSelection(format!(
        "perturbed support nodes still collide after {PERTURBATION_RETRIES} doublings"
    )))
}

pub fn initialize_weights(m: usize) -> Result<WeightVector> {
    WeightVector::uniform(m)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LawsonStep {
    Updated(WeightVector),
    /// Every `w_j r_j^ρ` vanished.
    ExactFit,
}

pub fn lawson_update(w: &WeightVector, residuals: &[f64], rho: f64) -> Result<LawsonStep> {
    if residuals.len() != w.len() {
        return Err(Error::arg(format!(
            "{} residuals for {} weights",
            residuals.len(),
            w.len()
        )));
    }
    if let Some(j) = residuals.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::arg(format!(
            "residual {j} = {} is not a nonnegative number",
            residuals[j]
        )));
    }
    let raw: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(residuals)
        .map(|(wj, r)| if rho == 1.0 { wj * r } else { wj * r.powf(rho) })
        .collect();
    if raw.iter().all(|&x| x == 0.0) {
        return Ok(LawsonStep::ExactFit);
    }
    WeightVector::normalized(raw).map(LawsonStep::Updated)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    MaxIterations,
    DegenerateDual,
    ConditioningFailure,
    /// Adaptive mode reached its smallest `ρ` and `d` still decreased.
    AscentStalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub d: f64,
    pub e: f64,
    /// `|√d − e| / e`.
    pub gap: f64,
    pub active_weights: usize,
    pub sigma_gap: f64,
    /// Exponent used for the update that follows this record.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub termination: TerminationReason,
    /// Record with the smallest `e`.
    pub best_index: usize,
    /// Error that ended the run, if any.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub rational: BarycentricRational,
    pub trace: IterationTrace,
    pub weights: WeightVector,
    pub support: SupportPoints,
    pub dual: DualEvaluation,
    pub report: ErrorReport,
    pub extremes: ExtremePointSet,
    pub certificate: DualityCertificate,
}

struct Iterate {
    w: WeightVector,
    eval: DualEvaluation,
    residuals: Vec<f64>,
    e: f64,
}

fn is_conditioning(err: &Error) -> bool {
    matches!(
        err,
        Error::Conditioning { .. }
            | Error::SingularMatrix { .. }
            | Error::DegeneratePencil
            | Error::TooFewWeights { .. }
    )
}

/// Fast dual with the dense pencil as fallback when a triangular factor is
/// too ill-conditioned to invert.
fn evaluate_dual(
    basis: &BasisMatrices,
    samples: &SampleSet,
    support: &SupportPoints,
    interp: &InterpolationData,
    w: &WeightVector,
    opts: &DualOptions,
) -> Result<DualEvaluation> {
    match dual_value_fast(basis, samples, support, interp.values(), w, opts) {
        Err(Error::Conditioning { .. }) | Err(Error::SingularMatrix { .. }) => {
            dual_value_oracle(basis, samples, support, interp.values(), w, opts)
        }
        other => other,
    }
}

fn measure(samples: &SampleSet, w: WeightVector, eval: DualEvaluation) -> Result<Iterate> {
    let mut residuals = Vec::with_capacity(samples.len());
    for (j, ((p, q), f)) in eval
        .p_at_samples
        .iter()
        .zip(&eval.q_at_samples)
        .zip(samples.values())
        .enumerate()
    {
        if q.norm() < POLE_GUARD {
            return Err(Error::PoleAtSample {
                index: j,
                x: samples.nodes()[j],
            });
        }
        residuals.push((f - p / q).norm());
    }
    let e = residuals.iter().copied().fold(0.0, f64::max);
    Ok(Iterate {
        w,
        eval,
        residuals,
        e,
    })
}

/// Runs the iteration. Errors before the first iterate is available are
/// returned as `Err`; later failures end the run with the last good iterate
/// and a termination reason.
pub fn solve(
    samples: &SampleSet,
    interp: &InterpolationData,
    config: &LawsonConfig,
) -> Result<SolveResult> {
    config.validate()?;
    let n = config.degree;
    let ell = interp.len();
    let m = samples.len();
    if ell > n + 1 {
        return Err(Error::arg(format!(
            "{ell} interpolation conditions exceed n + 1 = {}",
            n + 1
        )));
    }
    if m + ell < 2 * n + 2 {
        return Err(Error::arg(format!(
            "m >= 2n+2-ell is required: m = {m}, n = {n}, ell = {ell}"
        )));
    }
    interp.check_disjoint(samples)?;
    let support = select_support_points(samples, interp, config)?;
    let basis = build_basis(samples, &support, interp.values())?;
    let opts = config.dual_options();
    let exact_tol = EXACT_FIT_REL * (1.0 + samples.max_abs_value());

    let w0 = initialize_weights(m)?;
    let eval0 = evaluate_dual(&basis, samples, &support, interp, &w0, &opts)?;
    let mut cur = measure(samples, w0, eval0)?;
    let mut rho = config.rho;
    let rho_floor = config.rho * 2f64.powi(-RHO_HALVINGS);
    let mut records = Vec::new();
    let mut failure = None;

    let termination = loop {
        let k = records.len();
        let gap = if cur.e > 0.0 {
            (cur.eval.d.sqrt() - cur.e).abs() / cur.e
        } else {
            0.0
        };
        records.push(IterationRecord {
            k,
            d: cur.eval.d,
            e: cur.e,
            gap,
            active_weights: cur.w.count_above(config.w_floor),
            sigma_gap: cur.eval.sigma_gap,
            rho,
        });
        if cur.eval.is_degenerate() {
            break TerminationReason::DegenerateDual;
        }
        if cur.e <= exact_tol || gap < config.eps_r {
            break TerminationReason::Converged;
        }
        if k >= config.k_max {
            break TerminationReason::MaxIterations;
        }

        let next = loop {
            let w = match lawson_update(&cur.w, &cur.residuals, rho)? {
                LawsonStep::Updated(w) => w,
                // Weights sit only where the residual vanishes, so d is stuck at zero.
                LawsonStep::ExactFit => break Err(TerminationReason::DegenerateDual),
            };
            let eval = match evaluate_dual(&basis, samples, &support, interp, &w, &opts) {
                Ok(eval) => eval,
                Err(err) if is_conditioning(&err) => {
                    failure = Some(err.to_string());
                    break Err(TerminationReason::ConditioningFailure);
                }
                Err(err) => return Err(err),
            };
            if config.adaptive_rho && eval.d < cur.eval.d - ASCENT_SLACK {
                if rho <= rho_floor {
                    break Err(TerminationReason::AscentStalled);
                }
                rho = (rho / 2.0).max(rho_floor);
                records.last_mut().expect("record pushed above").rho = rho;
                continue;
            }
            match measure(samples, w, eval) {
                Ok(it) => break Ok(it),
                Err(err) => {
                    failure = Some(err.to_string());
                    break Err(TerminationReason::ConditioningFailure);
                }
            }
        };
        match next {
            Ok(it) => cur = it,
            Err(reason) => break reason,
        }
    };

    let best_index =
        (0..records.len()).fold(0, |b, i| if records[i].e < records[b].e { i } else { b });
    let trace = IterationTrace {
        records,
        termination,
        best_index,
        failure,
    };
    let rational = cur.eval.rational.clone();
    let report = error_report(&rational, samples, interp)?;
    let extremes = extreme_points(&report, config.extreme_threshold, config.cluster_collapse)?;
    let certificate = duality_certificate(&cur.eval, &report, &cur.w, config.eps_r)?;
    Ok(SolveResult {
        rational,
        trace,
        weights: cur.w,
        support,
        dual: cur.eval,
        report,
        extremes,
        certificate,
    })
}
