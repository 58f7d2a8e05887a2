//! The dual function
//!
//! ```text
//! d(w) = min ‖√W [C_p, −F C_q] N c‖²   subject to   ‖√W [0, C_q] N c‖ = 1
//! ```
//!
//! `C_p`, `C_q` are Cauchy matrices on the sample and support nodes, `N`
//! ties the numerator coefficient of each interpolation node to its
//! denominator coefficient, and `c = (c₁, c₂, c₃)` collects β on the
//! interpolation nodes, α on the free nodes and β on the free nodes.
//!
//! [`dual_value_fast`] eliminates `c₂` by projecting onto the orthogonal
//! complement of `range(√W C_{p,2})` and reads `d(w)` off one smallest
//! singular pair. [`dual_value_oracle`] solves the same problem as a dense
//! Hermitian pencil and is kept for cross-checking.

use num_complex::Complex64;

use crate::barycentric::{BarycentricRational, SampleSet, SupportPoints};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_complement_projector, default_singularity_floor, hermitian_definite_gevp_min,
    hermitian_min_eigenvalue, smallest_singular_pair, solve_right_upper_triangular,
    solve_upper_triangular, thin_qr, ComplexMatrix, ComplexVector,
};

/// Cauchy basis matrices of the numerator and denominator.
#[derive(Debug, Clone)]
pub struct BasisMatrices {
    pub cp: ComplexMatrix,
    pub cq: ComplexMatrix,
    pub ell: usize,
}

impl BasisMatrices {
    pub fn rows(&self) -> usize {
        self.cq.nrows()
    }

    /// Degree n.
    pub fn degree(&self) -> usize {
        self.cq.ncols() - 1
    }

    fn free(&self) -> usize {
        self.cq.ncols() - self.ell
    }

    pub fn cp1(&self) -> ComplexMatrix {
        self.cp.columns(0, self.ell).into_owned()
    }

    pub fn cp2(&self) -> ComplexMatrix {
        self.cp.columns(self.ell, self.free()).into_owned()
    }

    pub fn cq1(&self) -> ComplexMatrix {
        self.cq.columns(0, self.ell).into_owned()
    }

    pub fn cq2(&self) -> ComplexMatrix {
        self.cq.columns(self.ell, self.free()).into_owned()
    }
}

pub fn build_basis(
    samples: &SampleSet,
    support: &SupportPoints,
    interp_values: &[Complex64],
) -> Result<BasisMatrices> {
    let ell = support.ell();
    if interp_values.len() != ell {
        return Err(Error::arg(format!(
            "{ell} interpolation nodes but {} values",
            interp_values.len()
        )));
    }
    let m = samples.len();
    let k = support.len();
    let nodes: Vec<Complex64> = support.iter().collect();
    let mut cq = ComplexMatrix::zeros(m, k);
    for (i, t) in nodes.iter().enumerate() {
        for (j, x) in samples.nodes().iter().enumerate() {
            let diff = x - t;
            if diff == Complex64::new(0.0, 0.0) {
                return Err(Error::arg(format!(
                    "sample node {j} coincides with support point {i} at {x}"
                )));
            }
            cq[(j, i)] = diff.inv();
        }
    }
    let mut cp = cq.clone();
    for (i, y) in interp_values.iter().enumerate() {
        cp.column_mut(i).apply(|z| *z *= y);
    }
    Ok(BasisMatrices { cp, cq, ell })
}

/// Right-multiplies by the constraint basis `N` without forming it:
/// `[A₁, A₂, A₃, A₄] N = [A₁ + A₃, A₂, A₄]`.
pub fn constraint_matrix_apply(m: &ComplexMatrix, ell: usize) -> Result<ComplexMatrix> {
    let cols = m.ncols();
    if !cols.is_multiple_of(2) || ell > cols / 2 {
        return Err(Error::arg(format!(
            "constraint basis needs 2(n+1) columns with ell <= n+1, got {cols} columns and ell = {ell}"
        )));
    }
    let half = cols / 2;
    let free = half - ell;
    let mut out = ComplexMatrix::zeros(m.nrows(), 2 * half - ell);
    for j in 0..ell {
        out.set_column(j, &(m.column(j) + m.column(half + j)));
    }
    for j in 0..free {
        out.set_column(ell + j, &m.column(ell + j));
        out.set_column(ell + free + j, &m.column(half + ell + j));
    }
    Ok(out)
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Accepts weights that are nonnegative and sum to one within `1e-12`.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::arg("weight vector is empty"));
        }
        if let Some(j) = w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::arg(format!(
                "weight {j} = {} is not a nonnegative number",
                w[j]
            )));
        }
        let s = compensated_sum(w.iter().copied());
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("weights sum to {s}, not 1")));
        }
        Ok(WeightVector(w))
    }

    /// Normalizes nonnegative values onto the simplex. The largest entry
    /// absorbs the rounding so that the compensated sum is one.
    pub fn normalized(mut w: Vec<f64>) -> Result<Self> {
        if let Some(j) = w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::arg(format!(
                "weight {j} = {} is not a nonnegative number",
                w[j]
            )));
        }
        let total = compensated_sum(w.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::arg("weights sum to zero"));
        }
        w.iter_mut().for_each(|x| *x /= total);
        let imax = (0..w.len()).fold(0, |best, j| if w[j] > w[best] { j } else { best });
        let rest = compensated_sum(
            w.iter()
                .enumerate()
                .filter(|(j, _)| *j != imax)
                .map(|(_, x)| *x),
        );
        w[imax] = (1.0 - rest).max(0.0);
        Ok(WeightVector(w))
    }

    /// The barycentre `(1/m, …, 1/m)`, with the last entry set to one minus
    /// the sum of the others.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::arg("cannot build weights for zero samples"));
        }
        let mut w = vec![1.0 / m as f64; m];
        let partial: f64 = w[..m - 1].iter().sum();
        w[m - 1] = 1.0 - partial;
        Ok(WeightVector(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.0.iter().copied())
    }

    /// Number of weights strictly above `floor`.
    pub fn count_above(&self, floor: f64) -> usize {
        self.0.iter().filter(|&&x| x > floor).count()
    }
}

/// Which solver produced a [`DualEvaluation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualRoute {
    Fast,
    Oracle,
}

#[derive(Debug, Clone)]
pub struct DualEvaluation {
    pub d: f64,
    /// `(c₁, c₂, c₃)`, phase-fixed so the largest-modulus entry is real positive.
    pub c: Vec<Complex64>,
    pub rational: BarycentricRational,
    pub p_at_samples: Vec<Complex64>,
    pub q_at_samples: Vec<Complex64>,
    /// Gap between the two smallest singular values (square roots of the
    /// pencil eigenvalues on the oracle route).
    pub sigma_gap: f64,
    pub sigma_max: f64,
    /// `sqrt(d)` is at or below `rank_floor_rel * sigma_max`.
    pub rank_deficient: bool,
    /// Number of singular values at or below the rank floor. Two or more
    /// means the minimizer is not unique.
    pub null_dim: usize,
    /// Smallest eigenvalue of `AᴴA − d BᴴB` (oracle route only).
    pub psd_margin: Option<f64>,
    /// Frobenius norm of `AᴴA` (oracle route only).
    pub gram_norm: Option<f64>,
    pub route: DualRoute,
}

impl DualEvaluation {
    /// The dual value is zero on a subspace of dimension two or more, so the
    /// minimizing coefficient vector carries no information.
    pub fn is_degenerate(&self) -> bool {
        self.null_dim >= 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    /// Weights at or below this count as zero for the positivity precondition.
    pub w_floor: f64,
    /// Singular values at or below `rank_floor_rel * sigma_max` count as zero.
    pub rank_floor_rel: f64,
    /// Floor for triangular solves; `None` uses `m·u·max|R_ii|`.
    pub singularity_floor: Option<f64>,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions {
            w_floor: 1e-15,
            rank_floor_rel: 1e-14,
            singularity_floor: None,
        }
    }
}

fn scale_rows_real(m: &ComplexMatrix, s: &[f64]) -> ComplexMatrix {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        for (z, &sj) in col.iter_mut().zip(s) {
            *z *= sj;
        }
    }
    out
}

fn scale_rows(m: &ComplexMatrix, s: &[Complex64]) -> ComplexMatrix {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        for (z, sj) in col.iter_mut().zip(s) {
            *z *= sj;
        }
    }
    out
}

fn check_inputs(basis: &BasisMatrices, samples: &SampleSet, w: &WeightVector) -> Result<()> {
    let m = basis.rows();
    if samples.len() != m || w.len() != m {
        return Err(Error::arg(format!(
            "basis has {m} rows, samples {}, weights {}",
            samples.len(),
            w.len()
        )));
    }
    let n = basis.degree();
    if m + basis.ell < 2 * n + 2 {
        return Err(Error::arg(format!(
            "need m >= 2n+2-ell samples: m = {m}, n = {n}, ell = {}",
            basis.ell
        )));
    }
    Ok(())
}

fn fix_phase(c: &mut [Complex64]) {
    let imax = (0..c.len()).fold(0, |best, j| {
        if c[j].norm() > c[best].norm() {
            j
        } else {
            best
        }
    });
    let z = c[imax];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        c.iter_mut().for_each(|x| *x *= phase);
        c[imax] = Complex64::new(z.norm(), 0.0);
    }
}

fn conditioning(err: Error, what: &'static str, r: &ComplexMatrix) -> Error {
    match err {
        Error::SingularMatrix { .. } => {
            let condition = crate::linalg::ThinQr {
                q: ComplexMatrix::zeros(0, 0),
                r: r.clone(),
            }
            .condition_estimate();
            Error::Conditioning { what, condition }
        }
        other => other,
    }
}

/// Builds the evaluation record from a coefficient vector.
#[allow(clippy::too_many_arguments)]
fn finish(
    basis: &BasisMatrices,
    support: &SupportPoints,
    interp_values: &[Complex64],
    mut c: Vec<Complex64>,
    d: f64,
    spectrum: &[f64],
    opts: &DualOptions,
    route: DualRoute,
) -> Result<DualEvaluation> {
    fix_phase(&mut c);
    let ell = basis.ell;
    let free = basis.free();
    let beta =
        ComplexVector::from_iterator(ell + free, c[..ell].iter().chain(&c[ell + free..]).copied());
    let alpha = ComplexVector::from_column_slice(&c[ell..ell + free]);
    let q = &basis.cq * &beta;
    let p = basis.cp1() * beta.rows(0, ell) + basis.cp2() * alpha;
    let rational = BarycentricRational::assemble_from_coefficients(
        support.clone(),
        interp_values.to_vec(),
        &c,
    )?;

    let sigma_max = spectrum.last().copied().unwrap_or(0.0);
    let floor = opts.rank_floor_rel * sigma_max;
    let sigma_min = spectrum.first().copied().unwrap_or(0.0);
    Ok(DualEvaluation {
        d,
        c,
        rational,
        p_at_samples: p.iter().copied().collect(),
        q_at_samples: q.iter().copied().collect(),
        sigma_gap: if spectrum.len() > 1 {
            spectrum[1] - spectrum[0]
        } else {
            0.0
        },
        sigma_max,
        rank_deficient: sigma_min <= floor,
        null_dim: spectrum.iter().take_while(|&&s| s <= floor).count(),
        psd_margin: None,
        gram_norm: None,
        route,
    })
}

/// Which elimination [`dual_value_fast`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastPath {
    /// Specialized forms for ℓ = 0 and ℓ = n+1, general form otherwise.
    Auto,
    /// The general projected form regardless of ℓ.
    General,
}

/// Dual value from thin QR factorizations and a smallest singular pair.
pub fn dual_value_fast(
    basis: &BasisMatrices,
    samples: &SampleSet,
    support: &SupportPoints,
    interp_values: &[Complex64],
    w: &WeightVector,
    opts: &DualOptions,
) -> Result<DualEvaluation> {
    dual_value_fast_with(
        basis,
        samples,
        support,
        interp_values,
        w,
        opts,
        FastPath::Auto,
    )
}

pub fn dual_value_fast_with(
    basis: &BasisMatrices,
    samples: &SampleSet,
    support: &SupportPoints,
    interp_values: &[Complex64],
    w: &WeightVector,
    opts: &DualOptions,
    path: FastPath,
) -> Result<DualEvaluation> {
    check_inputs(basis, samples, w)?;
    let n = basis.degree();
    let ell = basis.ell;
    let free = basis.free();
    let active = w.count_above(opts.w_floor);
    if active < n + 1 {
        return Err(Error::TooFewWeights {
            required: n + 1,
            found: active,
        });
    }
    let m = basis.rows();
    let sqrt_w: Vec<f64> = w.as_slice().iter().map(|x| x.sqrt()).collect();
    let f = samples.values();

    let wcq = scale_rows_real(&basis.cq, &sqrt_w);
    let qr_q = thin_qr(&wcq)?;
    let floor_q = opts
        .singularity_floor
        .unwrap_or_else(|| default_singularity_floor(m, &qr_q.r));

    let special = path == FastPath::Auto && (ell == 0 || ell == n + 1);
    let (u, spectrum, c) = if special && ell == 0 {
        // C_p = C_q here, so one factorization serves both projectors.
        let fq = scale_rows(&qr_q.q, f);
        let mat = apply_complement_projector(&qr_q.q, &fq)?;
        let sp = smallest_singular_pair(&mat)?;
        let c3 = solve_upper_triangular(&qr_q.r, &sp.v, floor_q)
            .map_err(|e| conditioning(e, "R_q", &qr_q.r))?;
        let rhs = qr_q.q.ad_mul(&(&fq * &sp.v));
        let c2 = solve_upper_triangular(&qr_q.r, &rhs, floor_q)
            .map_err(|e| conditioning(e, "R_q", &qr_q.r))?;
        let c: Vec<Complex64> = c2.iter().chain(c3.iter()).copied().collect();
        (sp.v, sp.spectrum, c)
    } else if special {
        let diff = scale_rows_real(&(&basis.cp - scale_rows(&basis.cq, f)), &sqrt_w);
        let mat = solve_right_upper_triangular(&diff, &qr_q.r, floor_q)
            .map_err(|e| conditioning(e, "R_q", &qr_q.r))?;
        let sp = smallest_singular_pair(&mat)?;
        let c1 = solve_upper_triangular(&qr_q.r, &sp.v, floor_q)
            .map_err(|e| conditioning(e, "R_q", &qr_q.r))?;
        (sp.v, sp.spectrum, c1.iter().copied().collect())
    } else {
        // Â₁ = [C_{p,1} − F C_{q,1}, −F C_{q,2}], weighted.
        let fcq = scale_rows(&basis.cq, f);
        let mut a1 = -fcq;
        for j in 0..ell {
            let col = basis.cp.column(j) + a1.column(j);
            a1.set_column(j, &col);
        }
        let wa1 = scale_rows_real(&a1, &sqrt_w);
        let qr_p2 = thin_qr(&scale_rows_real(&basis.cp2(), &sqrt_w))?;
        let floor_p2 = opts
            .singularity_floor
            .unwrap_or_else(|| default_singularity_floor(m, &qr_p2.r));
        let x = solve_right_upper_triangular(&wa1, &qr_q.r, floor_q)
            .map_err(|e| conditioning(e, "R_q", &qr_q.r))?;
        let mat = apply_complement_projector(&qr_p2.q, &x)?;
        let sp = smallest_singular_pair(&mat)?;
        let c13 = solve_upper_triangular(&qr_q.r, &sp.v, floor_q)
            .map_err(|e| conditioning(e, "R_q", &qr_q.r))?;
        let rhs = -qr_p2.q.ad_mul(&(&wa1 * &c13));
        let c2 = solve_upper_triangular(&qr_p2.r, &rhs, floor_p2)
            .map_err(|e| conditioning(e, "R_p2", &qr_p2.r))?;
        let mut c = Vec::with_capacity(ell + 2 * free);
        c.extend(c13.iter().take(ell));
        c.extend(c2.iter());
        c.extend(c13.iter().skip(ell));
        (sp.v, sp.spectrum, c)
    };
    debug_assert_eq!(u.len(), n + 1);
    let d = spectrum[0] * spectrum[0];
    finish(
        basis,
        support,
        interp_values,
        c,
        d,
        &spectrum,
        opts,
        DualRoute::Fast,
    )
}

/// The dense matrices `A = √W [C_p, −F C_q] N` and `B = √W [0, C_q] N`.
pub fn pencil_factors(
    basis: &BasisMatrices,
    samples: &SampleSet,
    w: &WeightVector,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_inputs(basis, samples, w)?;
    let m = basis.rows();
    let k = basis.cq.ncols();
    let sqrt_w: Vec<f64> = w.as_slice().iter().map(|x| x.sqrt()).collect();
    let fcq = scale_rows(&basis.cq, samples.values());
    let mut full_a = ComplexMatrix::zeros(m, 2 * k);
    full_a.columns_mut(0, k).copy_from(&basis.cp);
    full_a.columns_mut(k, k).copy_from(&(-fcq));
    let mut full_b = ComplexMatrix::zeros(m, 2 * k);
    full_b.columns_mut(k, k).copy_from(&basis.cq);
    let a = scale_rows_real(&constraint_matrix_apply(&full_a, basis.ell)?, &sqrt_w);
    let b = scale_rows_real(&constraint_matrix_apply(&full_b, basis.ell)?, &sqrt_w);
    Ok((a, b))
}

/// Dual value from the dense pencil `(AᴴA, BᴴB)`, with the positive
/// semidefiniteness of `AᴴA − d BᴴB` measured as a certificate.
pub fn dual_value_oracle(
    basis: &BasisMatrices,
    samples: &SampleSet,
    support: &SupportPoints,
    interp_values: &[Complex64],
    w: &WeightVector,
    opts: &DualOptions,
) -> Result<DualEvaluation> {
    let (a, b) = pencil_factors(basis, samples, w)?;
    let aha = a.ad_mul(&a);
    let bhb = b.ad_mul(&b);
    let sol = hermitian_definite_gevp_min(&aha, &bhb)?;
    let d = sol.lambda.max(0.0);
    let spectrum: Vec<f64> = sol.spectrum.iter().map(|l| l.max(0.0).sqrt()).collect();
    let mut eval = finish(
        basis,
        support,
        interp_values,
        sol.v.iter().copied().collect(),
        d,
        &spectrum,
        opts,
        DualRoute::Oracle,
    )?;
    eval.psd_margin = Some(hermitian_min_eigenvalue(&(&aha - bhb.scale(d)))?);
    eval.gram_norm = Some(aha.norm());
    Ok(eval)
}

/// `‖√W [C_p, −F C_q] N c‖²` and `‖√W [0, C_q] N c‖` for an arbitrary `c`.
pub fn objective_and_constraint(
    basis: &BasisMatrices,
    samples: &SampleSet,
    w: &WeightVector,
    c: &[Complex64],
) -> Result<(f64, f64)> {
    let (a, b) = pencil_factors(basis, samples, w)?;
    if c.len() != a.ncols() {
        return Err(Error::arg(format!(
            "coefficient vector has length {}, expected {}",
            c.len(),
            a.ncols()
        )));
    }
    let cv = ComplexVector::from_column_slice(c);
    Ok(((&a * &cv).norm_squared(), (&b * &cv).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barycentric::InterpolationData;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn rc(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    /// Samples on the unit disk, support points on a circle of radius 1.5 + jitter.
    struct Instance {
        samples: SampleSet,
        support: SupportPoints,
        y: Vec<Complex64>,
        w: WeightVector,
    }

    fn instance(rng: &mut ChaCha8Rng, m: usize, n: usize, ell: usize) -> Instance {
        let nodes: Vec<Complex64> = (0..m)
            .map(|_| {
                let (rad, th): (f64, f64) = (
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                );
                Complex64::from_polar(rad.sqrt(), th)
            })
            .collect();
        let values = (0..m).map(|_| rc(rng)).collect();
        let samples = SampleSet::new(nodes, values).unwrap();
        let support_nodes: Vec<Complex64> = (0..=n)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + rng.random_range(0.0..0.5))
                    / (n as f64 + 1.0);
                Complex64::from_polar(1.5, th)
            })
            .collect();
        let support =
            SupportPoints::new(support_nodes[..ell].to_vec(), support_nodes[ell..].to_vec())
                .unwrap();
        let y = (0..ell).map(|_| rc(rng)).collect();
        let w =
            WeightVector::normalized((0..m).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
        Instance {
            samples,
            support,
            y,
            w,
        }
    }

    fn fast(inst: &Instance) -> Result<DualEvaluation> {
        let basis = build_basis(&inst.samples, &inst.support, &inst.y).unwrap();
        dual_value_fast(
            &basis,
            &inst.samples,
            &inst.support,
            &inst.y,
            &inst.w,
            &DualOptions::default(),
        )
    }

    fn oracle(inst: &Instance) -> Result<DualEvaluation> {
        let basis = build_basis(&inst.samples, &inst.support, &inst.y).unwrap();
        dual_value_oracle(
            &basis,
            &inst.samples,
            &inst.support,
            &inst.y,
            &inst.w,
            &DualOptions::default(),
        )
    }

    #[test]
    fn basis_small_example() {
        let s = SampleSet::new(vec![r(2.0), r(3.0)], vec![r(0.0); 2]).unwrap();
        let support = SupportPoints::new(vec![r(1.0)], vec![]).unwrap();
        let b = build_basis(&s, &support, &[r(5.0)]).unwrap();
        assert_eq!(b.cp[(0, 0)], r(5.0));
        assert_eq!(b.cp[(1, 0)], r(2.5));
        assert_eq!(b.cq[(0, 0)], r(1.0));
        assert_eq!(b.cq[(1, 0)], r(0.5));
    }

    #[test]
    fn basis_cauchy_identity_and_ell_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = instance(&mut rng, 12, 3, 0);
        let b = build_basis(&inst.samples, &inst.support, &inst.y).unwrap();
        assert_eq!(b.cp1().ncols(), 0);
        assert_eq!(b.cp, b.cq);
        for (i, t) in inst.support.iter().enumerate() {
            for (j, x) in inst.samples.nodes().iter().enumerate() {
                assert!((b.cq[(j, i)] * (x - t) - r(1.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn basis_rejects_coincident_nodes() {
        let s = SampleSet::new(vec![r(2.0), r(3.0)], vec![r(0.0); 2]).unwrap();
        let support = SupportPoints::new(vec![], vec![r(3.0)]).unwrap();
        let err = build_basis(&s, &support, &[]).unwrap_err().to_string();
        assert!(err.contains("sample node 1"), "{err}");
    }

    fn dense_n(n: usize, ell: usize) -> ComplexMatrix {
        let k = n + 1;
        let mut nmat = ComplexMatrix::zeros(2 * k, 2 * k - ell);
        for j in 0..ell {
            nmat[(j, j)] = r(1.0);
            nmat[(k + j, j)] = r(1.0);
        }
        for j in 0..k - ell {
            nmat[(ell + j, ell + j)] = r(1.0);
            nmat[(k + ell + j, k + j)] = r(1.0);
        }
        nmat
    }

    #[test]
    fn constraint_apply_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = ComplexMatrix::from_fn(7, 8, |_, _| rc(&mut rng));
        let out = constraint_matrix_apply(&m, 2).unwrap();
        assert!((&out - &m * dense_n(3, 2)).norm() <= 1e-15 * m.norm());
        assert_eq!(constraint_matrix_apply(&m, 0).unwrap(), m);
        assert!(constraint_matrix_apply(&ComplexMatrix::zeros(3, 5), 1).is_err());

        let mut cancel = m.clone();
        for j in 0..2 {
            let neg = -m.column(j);
            cancel.set_column(4 + j, &neg);
        }
        let out = constraint_matrix_apply(&cancel, 2).unwrap();
        assert!(out.columns(0, 2).norm() == 0.0);
    }

    #[test]
    fn weights() {
        assert_eq!(WeightVector::uniform(4).unwrap().as_slice(), &[0.25; 4]);
        assert_eq!(WeightVector::uniform(1).unwrap().as_slice(), &[1.0]);
        assert!(WeightVector::uniform(0).is_err());
        for m in [3usize, 7, 19999, 20000] {
            let w = WeightVector::uniform(m).unwrap();
            assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        }
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        let w = WeightVector::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn zero_data_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = instance(&mut rng, 20, 3, 0);
        let zero = SampleSet::new(inst.samples.nodes().to_vec(), vec![r(0.0); 20]).unwrap();
        let inst = Instance {
            samples: zero,
            ..inst
        };
        let e = fast(&inst).unwrap();
        assert_eq!(e.d, 0.0);
        assert!(e.rank_deficient);
        assert!(e.is_degenerate());
        let o = oracle(&inst).unwrap();
        assert!(o.d <= 1e-28);
    }

    /// f sampled from a random type-(n, n) rational with poles away from the data.
    #[test]
    fn representable_data_gives_zero_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..5 {
            let inst = instance(&mut rng, 30, n, 0);
            let truth_support = SupportPoints::new(
                vec![],
                (0..=n)
                    .map(|j| Complex64::from_polar(2.5, j as f64))
                    .collect(),
            )
            .unwrap();
            let truth = BarycentricRational::new(
                truth_support,
                vec![],
                (0..=n).map(|_| rc(&mut rng)).collect(),
                (0..=n).map(|_| rc(&mut rng) + r(2.0)).collect(),
            )
            .unwrap();
            let f = truth.evaluate_on_samples(&inst.samples).unwrap();
            let samples = SampleSet::new(inst.samples.nodes().to_vec(), f).unwrap();
            let inst = Instance { samples, ..inst };
            let e = fast(&inst).unwrap();
            assert!(e.d <= 1e-20, "n = {n}: d = {:e}", e.d);
            assert!(!e.is_degenerate());
            let vals = e.rational.evaluate_on_samples(&inst.samples).unwrap();
            for (v, fj) in vals.iter().zip(inst.samples.values()) {
                assert!((v - fj).norm() <= 1e-8 * (1.0 + fj.norm()));
            }
        }
    }

    #[test]
    fn fast_matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let n = rng.random_range(0..=6usize);
            let ell = rng.random_range(0..=n + 1);
            let m = rng.random_range(2 * n + 2 - ell..=50).max(n + 1);
            let inst = instance(&mut rng, m, n, ell);
            let e = fast(&inst).unwrap();
            let o = oracle(&inst).unwrap();
            assert!(
                (e.d - o.d).abs() <= 1e-10 * o.d.max(1e-300),
                "trial {trial} (m={m}, n={n}, ell={ell}): fast {:e} oracle {:e}",
                e.d,
                o.d
            );
            let margin = o.psd_margin.unwrap();
            assert!(
                margin >= -1e-9 * o.gram_norm.unwrap(),
                "trial {trial}: margin {margin:e}"
            );
        }
    }

    #[test]
    fn evaluation_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &(m, n, ell) in &[(30, 3, 2), (20, 4, 0), (12, 2, 3), (25, 5, 1)] {
            let inst = instance(&mut rng, m, n, ell);
            let basis = build_basis(&inst.samples, &inst.support, &inst.y).unwrap();
            let e = fast(&inst).unwrap();
            let (obj, cons) =
                objective_and_constraint(&basis, &inst.samples, &inst.w, &e.c).unwrap();
            assert!((cons - 1.0).abs() <= 1e-10);
            assert!((obj - e.d).abs() <= 1e-10 * e.d);

            // Any other normalized coefficient vector does no better.
            for _ in 0..200 {
                let c: Vec<Complex64> = (0..e.c.len()).map(|_| rc(&mut rng)).collect();
                let (o, b) = objective_and_constraint(&basis, &inst.samples, &inst.w, &c).unwrap();
                if b > 0.0 {
                    assert!(o / (b * b) >= e.d - 1e-10);
                }
            }

            // p and q at samples agree with the assembled rational.
            let vals = e.rational.evaluate_on_samples(&inst.samples).unwrap();
            for j in 0..m {
                let ratio = e.p_at_samples[j] / e.q_at_samples[j];
                assert!((ratio - vals[j]).norm() <= 1e-10 * (1.0 + vals[j].norm()));
            }

            // A unit phase on c leaves the rational unchanged. Random instances
            // can put a pole near a sample, so allow the conditioning loss.
            let phase = Complex64::from_polar(1.0, 0.7);
            let turned = e.rational.scaled(phase).unwrap();
            let vals2 = turned.evaluate_on_samples(&inst.samples).unwrap();
            for j in 0..m {
                assert!(
                    (vals2[j] - vals[j]).norm() <= 1e-12 * (1.0 + vals[j].norm()),
                    "{} vs {}",
                    vals2[j],
                    vals[j]
                );
            }
            let cmax = e.c.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            assert!(e.c.iter().any(|z| z.im == 0.0 && z.re == cmax));
        }
    }

    #[test]
    fn fast_and_oracle_coefficients_agree_up_to_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inst = instance(&mut rng, 30, 3, 2);
        let e = fast(&inst).unwrap();
        let o = oracle(&inst).unwrap();
        let diff: f64 =
            e.c.iter()
                .zip(&o.c)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
        let norm: f64 = e.c.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-7 * norm, "{diff:e}");
    }

    #[test]
    fn special_cases_agree_with_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..20 {
            let n = rng.random_range(1..=6usize);
            let ell = if trial % 2 == 0 { 0 } else { n + 1 };
            let m = rng.random_range(2 * n + 2 - ell..=50).max(n + 1);
            let inst = instance(&mut rng, m, n, ell);
            let basis = build_basis(&inst.samples, &inst.support, &inst.y).unwrap();
            let opts = DualOptions::default();
            let auto = dual_value_fast_with(
                &basis,
                &inst.samples,
                &inst.support,
                &inst.y,
                &inst.w,
                &opts,
                FastPath::Auto,
            )
            .unwrap();
            let gen = dual_value_fast_with(
                &basis,
                &inst.samples,
                &inst.support,
                &inst.y,
                &inst.w,
                &opts,
                FastPath::General,
            )
            .unwrap();
            assert!(
                (auto.d - gen.d).abs() <= 1e-11 * gen.d,
                "trial {trial}: {:e} vs {:e}",
                auto.d,
                gen.d
            );
        }
    }

    #[test]
    fn zero_weight_sample_does_not_change_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = instance(&mut rng, 25, 3, 1);
        let base = fast(&inst).unwrap();
        let mut nodes = inst.samples.nodes().to_vec();
        let mut vals = inst.samples.values().to_vec();
        nodes.push(Complex64::new(0.05, 0.01));
        vals.push(r(10.0));
        let mut w = inst.w.as_slice().to_vec();
        w.push(0.0);
        let ext = Instance {
            samples: SampleSet::new(nodes, vals).unwrap(),
            w: WeightVector::new(w).unwrap(),
            ..inst
        };
        let e = fast(&ext).unwrap();
        assert!((e.d - base.d).abs() <= 1e-12 * base.d);
    }

    #[test]
    fn too_few_positive_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let inst = instance(&mut rng, 20, 4, 1);
        let mut w = vec![0.0; 20];
        for x in w.iter_mut().take(4) {
            *x = 0.25;
        }
        let inst = Instance {
            w: WeightVector::new(w).unwrap(),
            ..inst
        };
        assert_eq!(
            fast(&inst).unwrap_err(),
            Error::TooFewWeights {
                required: 5,
                found: 4
            }
        );
    }

    #[test]
    fn interpolation_survives_the_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inst = instance(&mut rng, 30, 4, 3);
        let e = fast(&inst).unwrap();
        assert!(e.rational.interpolation_valid());
        let data =
            InterpolationData::new(inst.support.interp_nodes().to_vec(), inst.y.clone()).unwrap();
        for (t, y) in data.nodes().iter().zip(data.values()) {
            let v = e.rational.evaluate(t + Complex64::new(1e-9, 0.0)).unwrap();
            assert!((v - y).norm() <= 1e-6 * (1.0 + y.norm()));
        }
    }
}
