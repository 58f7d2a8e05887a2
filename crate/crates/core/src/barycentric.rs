//! Sample data, support points and the barycentric rational
//!
//! ```text
//!          Σ_{j≤ℓ} β_j y_j /(x − t_j) + Σ_{j>ℓ} α_j /(x − t_j)
//! ξ(x) = ─────────────────────────────────────────────────────
//!          Σ_{j≤ℓ} β_j /(x − t_j)     + Σ_{j>ℓ} β_j /(x − t_j)
//! ```
//!
//! The numerator coefficient of each interpolation node is tied to its
//! denominator coefficient, so `ξ(t_j) = y_j` whenever `β_j ≠ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative radius inside which `evaluate` switches to the limit value at a support point.
pub const PROXIMITY_REL: f64 = 1e-13;

/// Relative floor below which a denominator coefficient counts as zero.
pub const BETA_ZERO_REL: f64 = 1e-12;

fn check_finite(what: &str, zs: &[Complex64]) -> Result<()> {
    match zs
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(i) => Err(Error::arg(format!("{what}[{i}] is not finite"))),
        None => Ok(()),
    }
}

/// Returns the first pair of indices holding identical nodes.
fn find_duplicate(nodes: &[Complex64]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        nodes[a]
            .re
            .total_cmp(&nodes[b].re)
            .then(nodes[a].im.total_cmp(&nodes[b].im))
            .then(a.cmp(&b))
    });
    order
        .windows(2)
        .find(|w| nodes[w[0]] == nodes[w[1]])
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
}

fn check_distinct(what: &str, nodes: &[Complex64]) -> Result<()> {
    match find_duplicate(nodes) {
        Some((i, j)) => Err(Error::arg(format!(
            "{what} {i} and {j} coincide at {}",
            nodes[i]
        ))),
        None => Ok(()),
    }
}

/// The data being approximated: nodes `x_j` and values `f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    nodes: Vec<Complex64>,
    values: Vec<Complex64>,
}

impl SampleSet {
    pub fn new(nodes: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::arg(format!(
                "{} sample nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        check_finite("sample node", &nodes)?;
        check_finite("sample value", &values)?;
        check_distinct("sample nodes", &nodes)?;
        Ok(SampleSet { nodes, values })
    }

    /// Samples of a real function on real nodes.
    pub fn from_real_fn(nodes: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        SampleSet::new(
            nodes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            nodes.iter().map(|&x| Complex64::new(f(x), 0.0)).collect(),
        )
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    /// True when all nodes are real and strictly increasing.
    pub fn is_ordered_real(&self) -> bool {
        self.nodes.iter().all(|x| x.im == 0.0) && self.nodes.windows(2).all(|w| w[0].re < w[1].re)
    }
}

/// Interpolation constraints `ξ(t_j) = y_j`, possibly empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterpolationData {
    nodes: Vec<Complex64>,
    values: Vec<Complex64>,
}

impl InterpolationData {
    pub fn new(nodes: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::arg(format!(
                "{} interpolation nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        check_finite("interpolation node", &nodes)?;
        check_finite("interpolation value", &values)?;
        check_distinct("interpolation nodes", &nodes)?;
        Ok(InterpolationData { nodes, values })
    }

    pub fn empty() -> Self {
        InterpolationData::default()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fails if an interpolation node coincides with a sample node.
    pub fn check_disjoint(&self, samples: &SampleSet) -> Result<()> {
        let mut all = samples.nodes().to_vec();
        all.extend_from_slice(&self.nodes);
        match find_duplicate(&all) {
            Some((i, j)) if i < samples.len() && j >= samples.len() => Err(Error::arg(format!(
                "interpolation node {} coincides with sample node {i} at {}",
                j - samples.len(),
                all[i]
            ))),
            Some((i, j)) => Err(Error::arg(format!(
                "nodes {i} and {j} coincide at {}",
                all[i]
            ))),
            None => Ok(()),
        }
    }
}

/// The n+1 support points: ℓ interpolation nodes followed by n+1−ℓ free nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoints {
    interp_nodes: Vec<Complex64>,
    free_nodes: Vec<Complex64>,
}

impl SupportPoints {
    pub fn new(interp_nodes: Vec<Complex64>, free_nodes: Vec<Complex64>) -> Result<Self> {
        if interp_nodes.is_empty() && free_nodes.is_empty() {
            return Err(Error::arg("at least one support point is required"));
        }
        let all: Vec<Complex64> = interp_nodes.iter().chain(&free_nodes).copied().collect();
        check_finite("support point", &all)?;
        check_distinct("support points", &all)?;
        Ok(SupportPoints {
            interp_nodes,
            free_nodes,
        })
    }

    pub fn interp_nodes(&self) -> &[Complex64] {
        &self.interp_nodes
    }

    pub fn free_nodes(&self) -> &[Complex64] {
        &self.free_nodes
    }

    /// Number of interpolation nodes ℓ.
    pub fn ell(&self) -> usize {
        self.interp_nodes.len()
    }

    /// Degree n (one less than the number of support points).
    pub fn degree(&self) -> usize {
        self.interp_nodes.len() + self.free_nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.interp_nodes.len() + self.free_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, j: usize) -> Complex64 {
        if j < self.interp_nodes.len() {
            self.interp_nodes[j]
        } else {
            self.free_nodes[j - self.interp_nodes.len()]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.interp_nodes.iter().chain(&self.free_nodes).copied()
    }

    /// Fails if any support point coincides with a sample node.
    pub fn check_disjoint(&self, samples: &SampleSet) -> Result<()> {
        let mut all = samples.nodes().to_vec();
        all.extend(self.iter());
        match find_duplicate(&all) {
            Some((i, j)) if i < samples.len() && j >= samples.len() => Err(Error::arg(format!(
                "support point {} coincides with sample node {i} at {}",
                j - samples.len(),
                all[i]
            ))),
            Some((i, j)) => Err(Error::arg(format!(
                "nodes {i} and {j} coincide at {}",
                all[i]
            ))),
            None => Ok(()),
        }
    }
}

/// A type-(n, n) rational in barycentric form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RationalJson", try_from = "RationalJson")]
pub struct BarycentricRational {
    support: SupportPoints,
    interp_values: Vec<Complex64>,
    /// Numerator coefficients of the free nodes.
    alpha: Vec<Complex64>,
    /// Denominator coefficients of all n+1 nodes.
    beta: Vec<Complex64>,
}

impl BarycentricRational {
    pub fn new(
        support: SupportPoints,
        interp_values: Vec<Complex64>,
        alpha: Vec<Complex64>,
        beta: Vec<Complex64>,
    ) -> Result<Self> {
        let ell = support.ell();
        let k = support.len();
        if interp_values.len() != ell {
            return Err(Error::arg(format!(
                "{ell} interpolation nodes but {} values",
                interp_values.len()
            )));
        }
        if alpha.len() != k - ell || beta.len() != k {
            return Err(Error::arg(format!(
                "expected {} alpha and {k} beta coefficients, got {} and {}",
                k - ell,
                alpha.len(),
                beta.len()
            )));
        }
        check_finite("interpolation value", &interp_values)?;
        check_finite("alpha", &alpha)?;
        check_finite("beta", &beta)?;
        if beta.iter().all(|b| *b == Complex64::new(0.0, 0.0)) {
            return Err(Error::arg("all denominator coefficients are zero"));
        }
        Ok(BarycentricRational {
            support,
            interp_values,
            alpha,
            beta,
        })
    }

    /// Splits `c = (c₁, c₂, c₃)` of length 2(n+1)−ℓ into β on the
    /// interpolation nodes (c₁), α on the free nodes (c₂) and β on the free
    /// nodes (c₃).
    pub fn assemble_from_coefficients(
        support: SupportPoints,
        interp_values: Vec<Complex64>,
        c: &[Complex64],
    ) -> Result<Self> {
        let ell = support.ell();
        let free = support.len() - ell;
        if c.len() != ell + 2 * free {
            return Err(Error::arg(format!(
                "coefficient vector has length {}, expected {}",
                c.len(),
                ell + 2 * free
            )));
        }
        let alpha = c[ell..ell + free].to_vec();
        let mut beta = c[..ell].to_vec();
        beta.extend_from_slice(&c[ell + free..]);
        BarycentricRational::new(support, interp_values, alpha, beta)
    }

    pub fn support(&self) -> &SupportPoints {
        &self.support
    }

    pub fn interp_values(&self) -> &[Complex64] {
        &self.interp_values
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn degree(&self) -> usize {
        self.support.degree()
    }

    pub fn ell(&self) -> usize {
        self.support.ell()
    }

    /// Numerator coefficient at support index `j`: `β_j y_j` on interpolation
    /// nodes, `α_j` on free nodes.
    pub fn numerator_coefficient(&self, j: usize) -> Complex64 {
        let ell = self.ell();
        if j < ell {
            self.beta[j] * self.interp_values[j]
        } else {
            self.alpha[j - ell]
        }
    }

    fn beta_floor(&self) -> f64 {
        BETA_ZERO_REL * self.beta.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// Interpolation indices whose denominator coefficient is numerically zero.
    pub fn lost_interpolation_indices(&self) -> Vec<usize> {
        let floor = self.beta_floor();
        (0..self.ell())
            .filter(|&j| self.beta[j].norm() <= floor)
            .collect()
    }

    /// True when every interpolation condition is enforced (`β_j ≠ 0`, j ≤ ℓ).
    pub fn interpolation_valid(&self) -> bool {
        self.lost_interpolation_indices().is_empty()
    }

    /// Returns the same rational with every coefficient multiplied by `tau`.
    pub fn scaled(&self, tau: Complex64) -> Result<Self> {
        BarycentricRational::new(
            self.support.clone(),
            self.interp_values.clone(),
            self.alpha.iter().map(|a| a * tau).collect(),
            self.beta.iter().map(|b| b * tau).collect(),
        )
    }

    /// Numerator and denominator sums at `x` (no limit handling).
    pub fn two_sums(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        for (j, t) in self.support.iter().enumerate() {
            let kernel = (x - t).inv();
            p += self.numerator_coefficient(j) * kernel;
            q += self.beta[j] * kernel;
        }
        (p, q)
    }

    pub fn evaluate(&self, x: Complex64) -> Result<Complex64> {
        let mut x = x;
        for (j, t) in self.support.iter().enumerate() {
            let radius = PROXIMITY_REL * (1.0 + t.norm());
            if (x - t).norm() < radius {
                if self.beta[j].norm() > self.beta_floor() {
                    return Ok(match self.interp_values.get(j) {
                        Some(&y) => y,
                        None => self.alpha[j - self.ell()] / self.beta[j],
                    });
                }
                // Removable only if the neighbours say so; step just outside
                // the switch radius and use the ordinary formula.
                x = t + Complex64::new(2.0 * radius, 0.0);
                break;
            }
        }
        let (p, q) = self.two_sums(x);
        if q == Complex64::new(0.0, 0.0) {
            return Err(Error::Pole { x });
        }
        Ok(p / q)
    }

    pub fn evaluate_on_samples(&self, samples: &SampleSet) -> Result<Vec<Complex64>> {
        samples
            .nodes()
            .iter()
            .enumerate()
            .map(|(index, &x)| {
                let (p, q) = self.two_sums(x);
                if q == Complex64::new(0.0, 0.0) || !(p / q).is_finite() {
                    Err(Error::PoleAtSample { index, x })
                } else {
                    Ok(p / q)
                }
            })
            .collect()
    }
}

type Pair = [f64; 2];

fn to_pairs(zs: &[Complex64]) -> Vec<Pair> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(ps: &[Pair]) -> Vec<Complex64> {
    ps.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

/// On-disk layout of a [`BarycentricRational`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalJson {
    pub support_interp: Vec<Pair>,
    pub support_free: Vec<Pair>,
    pub interp_values: Vec<Pair>,
    pub alpha: Vec<Pair>,
    pub beta: Vec<Pair>,
    pub degree_n: usize,
    pub ell: usize,
}

impl From<BarycentricRational> for RationalJson {
    fn from(r: BarycentricRational) -> Self {
        RationalJson {
            support_interp: to_pairs(r.support.interp_nodes()),
            support_free: to_pairs(r.support.free_nodes()),
            interp_values: to_pairs(&r.interp_values),
            alpha: to_pairs(&r.alpha),
            beta: to_pairs(&r.beta),
            degree_n: r.degree(),
            ell: r.ell(),
        }
    }
}

impl TryFrom<RationalJson> for BarycentricRational {
    type Error = Error;

    fn try_from(j: RationalJson) -> Result<Self> {
        let support =
            SupportPoints::new(from_pairs(&j.support_interp), from_pairs(&j.support_free))?;
        if support.degree() != j.degree_n || support.ell() != j.ell {
            return Err(Error::arg(format!(
                "header says n = {}, ell = {} but support points give n = {}, ell = {}",
                j.degree_n,
                j.ell,
                support.degree(),
                support.ell()
            )));
        }
        BarycentricRational::new(
            support,
            from_pairs(&j.interp_values),
            from_pairs(&j.alpha),
            from_pairs(&j.beta),
        )
    }
}
