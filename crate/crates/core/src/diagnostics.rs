//! Error curves, extreme points and duality certificates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barycentric::{BarycentricRational, InterpolationData, SampleSet};
use crate::dual::{DualEvaluation, WeightVector};
use crate::error::{Error, Result};

/// Relative offset of the interpolation probes: `t + 1e-9 (1 + |t|)`.
pub const INTERP_PROBE_REL: f64 = 1e-9;

/// Complementary slackness tolerance relative to the maximum error.
pub const SLACKNESS_REL: f64 = 1e-6;

/// Slack allowed in `d <= e²` before weak duality counts as violated.
pub const WEAK_DUALITY_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `|f_j − ξ(x_j)|`.
    pub residuals: Vec<f64>,
    pub max_error: f64,
    /// Every index attaining `max_error`.
    pub argmax: Vec<usize>,
    /// `|ξ(t_j + δ_j) − y_j|` at the offset probes.
    pub interp_residuals: Vec<f64>,
    /// Whether adjacent samples are neighbours on an increasing real grid,
    /// which is what makes cluster collapse meaningful.
    pub ordered_real_grid: bool,
}

impl ErrorReport {
    pub fn from_residuals(
        residuals: Vec<f64>,
        interp_residuals: Vec<f64>,
        ordered_real_grid: bool,
    ) -> Self {
        let max_error = residuals.iter().copied().fold(0.0, f64::max);
        let argmax = residuals
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == max_error)
            .map(|(j, _)| j)
            .collect();
        ErrorReport {
            residuals,
            max_error,
            argmax,
            interp_residuals,
            ordered_real_grid,
        }
    }

    /// Largest interpolation probe residual relative to `1 + |y_j|`.
    pub fn max_interp_violation(&self, interp: &InterpolationData) -> f64 {
        self.interp_residuals
            .iter()
            .zip(interp.values())
            .map(|(r, y)| r / (1.0 + y.norm()))
            .fold(0.0, f64::max)
    }
}

pub fn interp_probe(t: Complex64) -> Complex64 {
    t + Complex64::new(INTERP_PROBE_REL * (1.0 + t.norm()), 0.0)
}

pub fn error_report(
    r: &BarycentricRational,
    samples: &SampleSet,
    interp: &InterpolationData,
) -> Result<ErrorReport> {
    let values = r.evaluate_on_samples(samples)?;
    let residuals = values
        .iter()
        .zip(samples.values())
        .map(|(v, f)| (f - v).norm())
        .collect();
    let interp_residuals = interp
        .nodes()
        .iter()
        .zip(interp.values())
        .map(|(t, y)| r.evaluate(interp_probe(*t)).map(|v| (v - y).norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::from_residuals(
        residuals,
        interp_residuals,
        samples.is_ordered_real(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremePointSet {
    pub indices: Vec<usize>,
    pub threshold: f64,
    pub collapsed: bool,
}

impl ExtremePointSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Samples whose residual is at least `(1 − threshold) e(ξ)`. With `collapse`
/// set and an ordered real grid, each run of adjacent indices is replaced by
/// the index of its largest residual.
pub fn extreme_points(
    report: &ErrorReport,
    threshold: f64,
    collapse: bool,
) -> Result<ExtremePointSet> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::arg(format!(
            "extreme threshold {threshold} is outside (0, 1)"
        )));
    }
    let e = report.max_error;
    if e == 0.0 {
        return Ok(ExtremePointSet {
            indices: vec![],
            threshold,
            collapsed: false,
        });
    }
    let cut = (1.0 - threshold) * e;
    let hits: Vec<usize> = (0..report.residuals.len())
        .filter(|&j| report.residuals[j] >= cut)
        .collect();
    let collapsed = collapse && report.ordered_real_grid;
    if !collapsed {
        return Ok(ExtremePointSet {
            indices: hits,
            threshold,
            collapsed,
        });
    }
    let mut indices = Vec::new();
    let mut run_best: Option<usize> = None;
    let mut prev: Option<usize> = None;
    for &j in &hits {
        match (prev, run_best) {
            (Some(p), Some(b)) if j == p + 1 => {
                if report.residuals[j] > report.residuals[b] {
                    run_best = Some(j);
                }
            }
            _ => {
                indices.extend(run_best);
                run_best = Some(j);
            }
        }
        prev = Some(j);
    }
    indices.extend(run_best);
    Ok(ExtremePointSet {
        indices,
        threshold,
        collapsed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    GapOpen,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityCertificate {
    pub d: f64,
    pub max_error: f64,
    /// `e(ξ)²`.
    pub primal: f64,
    /// `|√d − e| / e`, zero for an exact fit.
    pub relative_gap: f64,
    /// `max_j w_j |e − r_j|`.
    pub slackness: f64,
    pub weak_duality_holds: bool,
    pub psd_margin: Option<f64>,
    pub rank_deficient: bool,
    pub null_dim: usize,
    pub lost_interpolation: Vec<usize>,
    pub verdict: Verdict,
}

pub fn duality_certificate(
    eval: &DualEvaluation,
    report: &ErrorReport,
    w: &WeightVector,
    eps_r: f64,
) -> Result<DualityCertificate> {
    if w.len() != report.residuals.len() {
        return Err(Error::arg(format!(
            "{} weights for {} residuals",
            w.len(),
            report.residuals.len()
        )));
    }
    let e = report.max_error;
    let d = eval.d;
    let relative_gap = if e > 0.0 {
        (d.sqrt() - e).abs() / e
    } else {
        d.sqrt()
    };
    let slackness = w
        .as_slice()
        .iter()
        .zip(&report.residuals)
        .map(|(wj, r)| wj * (e - r).abs())
        .fold(0.0, f64::max);
    let verdict = if eval.is_degenerate() {
        Verdict::Degenerate
    } else if e == 0.0 || (relative_gap <= eps_r && slackness <= SLACKNESS_REL * e) {
        Verdict::Certified
    } else {
        Verdict::GapOpen
    };
    Ok(DualityCertificate {
        d,
        max_error: e,
        primal: e * e,
        relative_gap,
        slackness,
        weak_duality_holds: d <= e * e * (1.0 + WEAK_DUALITY_REL),
        psd_margin: eval.psd_margin,
        rank_deficient: eval.rank_deficient,
        null_dim: eval.null_dim,
        lost_interpolation: eval.rational.lost_interpolation_indices(),
        verdict,
    })
}

/// Extreme-point count against the proved bound `n + 2 − ℓ` and the
/// sharper count `2n + 2 − ℓ` seen in practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub cardinality: usize,
    pub proved_bound: usize,
    pub observed_bound: usize,
    pub holds: bool,
    pub meets_observed: bool,
}

pub fn theorem_bound_check(set: &ExtremePointSet, n: usize, ell: usize) -> BoundCheck {
    let proved_bound = (n + 2).saturating_sub(ell);
    let observed_bound = (2 * n + 2).saturating_sub(ell);
    BoundCheck {
        cardinality: set.len(),
        proved_bound,
        observed_bound,
        holds: set.len() >= proved_bound,
        meets_observed: set.len() >= observed_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barycentric::SupportPoints;
    use crate::dual::{build_basis, dual_value_fast, DualOptions};
    use proptest::prelude::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn constant(c: f64) -> BarycentricRational {
        let support = SupportPoints::new(vec![], vec![r(5.0)]).unwrap();
        BarycentricRational::new(support, vec![], vec![r(c)], vec![r(1.0)]).unwrap()
    }

    fn report_of(res: &[f64], ordered: bool) -> ErrorReport {
        ErrorReport::from_residuals(res.to_vec(), vec![], ordered)
    }

    #[test]
    fn constant_against_shifted_constant() {
        let xs: Vec<f64> = (0..7).map(|j| j as f64 / 6.0).collect();
        let s = SampleSet::from_real_fn(&xs, |_| 3.0).unwrap();
        let rep = error_report(&constant(2.0), &s, &InterpolationData::empty()).unwrap();
        assert!(rep.residuals.iter().all(|&x| x == 1.0));
        assert_eq!(rep.max_error, 1.0);
        assert_eq!(rep.argmax.len(), 7);
        assert!(rep.ordered_real_grid);
    }

    #[test]
    fn exact_fit_residuals_vanish() {
        let support = SupportPoints::new(vec![r(-2.0)], vec![r(2.0)]).unwrap();
        let rat =
            BarycentricRational::new(support, vec![r(0.5)], vec![r(1.5)], vec![r(1.0), r(2.0)])
                .unwrap();
        let xs: Vec<Complex64> = (0..11).map(|j| r(-1.0 + 0.2 * j as f64)).collect();
        let f = xs.iter().map(|&x| rat.evaluate(x).unwrap()).collect();
        let s = SampleSet::new(xs, f).unwrap();
        let interp = InterpolationData::new(vec![r(-2.0)], vec![r(0.5)]).unwrap();
        let rep = error_report(&rat, &s, &interp).unwrap();
        assert!(rep.max_error <= 1e-13 * (1.0 + s.max_abs_value()));
        assert!(rep.interp_residuals[0] <= 1e-6 * 1.5);
    }

    #[test]
    fn extreme_point_counts() {
        let rep = report_of(&[0.1, 0.5, 1.0, 0.2], true);
        assert_eq!(extreme_points(&rep, 1e-2, true).unwrap().len(), 1);

        let rep = report_of(&[1.0, 0.995, 0.2, 0.999, 0.1, 1.0], true);
        let plain = extreme_points(&rep, 1e-2, false).unwrap();
        assert_eq!(plain.indices, vec![0, 1, 3, 5]);
        let coll = extreme_points(&rep, 1e-2, true).unwrap();
        assert_eq!(coll.indices, vec![0, 3, 5]);

        // No collapse on unordered grids.
        let rep = report_of(&[1.0, 1.0], false);
        assert_eq!(extreme_points(&rep, 1e-2, true).unwrap().len(), 2);

        assert!(extreme_points(&rep, 0.0, true).is_err());
        assert!(extreme_points(&rep, 1.0, true).is_err());
    }

    #[test]
    fn bound_check_examples() {
        let set = |k| ExtremePointSet {
            indices: (0..k).collect(),
            threshold: 1e-2,
            collapsed: true,
        };
        assert!(theorem_bound_check(&set(11), 6, 3).holds);
        assert!(theorem_bound_check(&set(11), 6, 3).meets_observed);
        assert!(theorem_bound_check(&set(15), 8, 3).holds);
        assert!(!theorem_bound_check(&set(1), 6, 3).holds);
    }

    fn eval_for(f: impl Fn(f64) -> f64, n: usize) -> (DualEvaluation, SampleSet, WeightVector) {
        let xs: Vec<f64> = (0..40).map(|j| -1.0 + 2.0 * j as f64 / 39.0).collect();
        let s = SampleSet::from_real_fn(&xs, f).unwrap();
        let support = SupportPoints::new(
            vec![],
            (0..=n).map(|j| r(-0.95 + 0.6 * j as f64 + 0.01)).collect(),
        )
        .unwrap();
        let basis = build_basis(&s, &support, &[]).unwrap();
        let w = WeightVector::uniform(40).unwrap();
        let e = dual_value_fast(&basis, &s, &support, &[], &w, &DualOptions::default()).unwrap();
        (e, s, w)
    }

    #[test]
    fn zero_function_is_degenerate() {
        let (e, s, w) = eval_for(|_| 0.0, 3);
        let rep = error_report(&e.rational, &s, &InterpolationData::empty()).unwrap();
        let cert = duality_certificate(&e, &rep, &w, 1e-10).unwrap();
        assert_eq!(cert.verdict, Verdict::Degenerate);
    }

    #[test]
    fn exact_fit_is_certified() {
        let (e, s, w) = eval_for(|x| (1.0 + x) / (3.0 - x), 1);
        let rep = error_report(&e.rational, &s, &InterpolationData::empty()).unwrap();
        let rep = ErrorReport::from_residuals(vec![0.0; rep.residuals.len()], vec![], true);
        let e = DualEvaluation { d: 0.0, ..e };
        let cert = duality_certificate(&e, &rep, &w, 1e-10).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
    }

    #[test]
    fn weak_duality_on_uniform_weights() {
        let (e, s, w) = eval_for(f64::abs, 3);
        let rep = error_report(&e.rational, &s, &InterpolationData::empty()).unwrap();
        let cert = duality_certificate(&e, &rep, &w, 1e-10).unwrap();
        assert!(cert.weak_duality_holds);
        assert_eq!(cert.verdict, Verdict::GapOpen);
    }

    proptest! {
        #[test]
        fn extreme_count_grows_with_threshold(res in proptest::collection::vec(0.0f64..1.0, 1..60), a in 1e-3f64..0.5, b in 1e-3f64..0.5) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for ordered in [false, true] {
                let rep = report_of(&res, ordered);
                let small = extreme_points(&rep, lo, false).unwrap();
                let large = extreme_points(&rep, hi, false).unwrap();
                prop_assert!(small.len() <= large.len());
                if rep.max_error > 0.0 {
                    prop_assert!(!small.is_empty());
                    prop_assert!(!extreme_points(&rep, lo, true).unwrap().is_empty());
                }
            }
        }

        #[test]
        fn max_error_is_exact_max(res in proptest::collection::vec(0.0f64..10.0, 1..60)) {
            let rep = report_of(&res, true);
            prop_assert_eq!(rep.max_error, res.iter().copied().fold(0.0, f64::max));
            for &j in &rep.argmax {
                prop_assert_eq!(res[j], rep.max_error);
            }
        }
    }
}
