//! Dense complex kernels used by the dual solver.
//!
//! Storage and the underlying Householder QR, SVD and Hermitian eigensolvers
//! come from `nalgebra`; this module fixes the contracts the solver relies on
//! (thin factors, smallest singular pair with a gap indicator, triangular
//! solves with an explicit singularity floor, and a Hermitian-definite pencil
//! solver used to cross-check the fast path).

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const MAX_SWEEPS: usize = 10_000;

/// Thin QR factors `M = Q R` with `Q` of size m×k and `R` upper triangular k×k.
#[derive(Debug, Clone)]
pub struct ThinQr {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

impl ThinQr {
    /// 2-norm condition number of `R`. Infinite when `R` is exactly singular.
    pub fn condition_estimate(&self) -> f64 {
        let k = self.r.ncols();
        if k == 0 {
            return 1.0;
        }
        match singular_values(&self.r) {
            Ok(s) => {
                let (lo, hi) = (s[0], s[k - 1]);
                if lo > 0.0 {
                    hi / lo
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    }
}

/// Householder thin QR without pivoting.
pub fn thin_qr(m: &ComplexMatrix) -> Result<ThinQr> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::arg(format!(
            "thin QR needs rows >= cols, got {rows}x{cols}"
        )));
    }
    if cols == 0 {
        return Ok(ThinQr {
            q: ComplexMatrix::zeros(rows, 0),
            r: ComplexMatrix::zeros(0, 0),
        });
    }
    let qr = m.clone().qr();
    Ok(ThinQr {
        q: qr.q(),
        r: qr.r(),
    })
}

/// Smallest singular value of a tall matrix together with its right singular vector.
#[derive(Debug, Clone)]
pub struct SingularPair {
    pub sigma_min: f64,
    pub v: ComplexVector,
    /// Second-smallest minus smallest singular value; zero when k = 1.
    pub gap: f64,
    pub sigma_max: f64,
    /// All singular values in ascending order.
    pub spectrum: Vec<f64>,
}

impl SingularPair {
    /// Number of singular values at or below `floor`.
    pub fn null_dimension(&self, floor: f64) -> usize {
        self.spectrum.iter().take_while(|&&s| s <= floor).count()
    }
}

fn checked_svd(
    m: ComplexMatrix,
    vectors: bool,
) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m, false, vectors, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::arg("SVD failed to converge"))
}

/// Singular values in ascending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = checked_svd(m.clone(), false)?
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

pub fn smallest_singular_pair(m: &ComplexMatrix) -> Result<SingularPair> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::arg(format!(
            "smallest singular pair needs rows >= cols, got {rows}x{cols}"
        )));
    }
    if cols == 0 {
        return Err(Error::arg("matrix has no columns"));
    }
    // Reduce tall inputs to their k×k triangular factor first; the right
    // singular vectors are shared.
    let square = if rows > cols {
        thin_qr(m)?.r
    } else {
        m.clone()
    };
    let svd = checked_svd(square, true)?;
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let spectrum: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let imin = order[0];
    let v: ComplexVector = v_t.row(imin).adjoint();

    Ok(SingularPair {
        sigma_min: spectrum[0],
        v,
        gap: if cols > 1 {
            spectrum[1] - spectrum[0]
        } else {
            0.0
        },
        sigma_max: spectrum[cols - 1],
        spectrum,
    })
}

/// Default floor for triangular solves: `rows * u * max |R_ii|`.
pub fn default_singularity_floor(rows: usize, r: &ComplexMatrix) -> f64 {
    let max_diag = (0..r.nrows().min(r.ncols()))
        .map(|i| r[(i, i)].norm())
        .fold(0.0, f64::max);
    rows.max(1) as f64 * f64::EPSILON * max_diag
}

fn check_diagonal(r: &ComplexMatrix, floor: f64) -> Result<()> {
    for i in 0..r.nrows() {
        let magnitude = r[(i, i)].norm();
        if magnitude.is_nan() || magnitude < floor || magnitude == 0.0 {
            return Err(Error::SingularMatrix {
                index: i,
                magnitude,
                floor,
            });
        }
    }
    Ok(())
}

/// Back substitution for `R x = rhs`.
pub fn solve_upper_triangular(
    r: &ComplexMatrix,
    rhs: &ComplexVector,
    floor: f64,
) -> Result<ComplexVector> {
    let k = r.nrows();
    if r.ncols() != k || rhs.len() != k {
        return Err(Error::arg(format!(
            "triangular solve: R is {}x{}, rhs has length {}",
            r.nrows(),
            r.ncols(),
            rhs.len()
        )));
    }
    check_diagonal(r, floor)?;
    let mut x = rhs.clone();
    for i in (0..k).rev() {
        let mut acc = x[i];
        for j in i + 1..k {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    Ok(x)
}

/// Solves `X R = M` for `X`, i.e. forms `M R^{-1}` column by column.
pub fn solve_right_upper_triangular(
    m: &ComplexMatrix,
    r: &ComplexMatrix,
    floor: f64,
) -> Result<ComplexMatrix> {
    let k = r.nrows();
    if r.ncols() != k || m.ncols() != k {
        return Err(Error::arg(format!(
            "right triangular solve: M is {}x{}, R is {}x{}",
            m.nrows(),
            m.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    check_diagonal(r, floor)?;
    let mut x = m.clone();
    for j in 0..k {
        for i in 0..j {
            let coeff = r[(i, j)];
            if coeff != Complex64::new(0.0, 0.0) {
                let (left, mut right) = x.columns_range_pair_mut(i, j);
                right.axpy(-coeff, &left, Complex64::new(1.0, 0.0));
            }
        }
        let d = r[(j, j)];
        x.column_mut(j).apply(|z| *z /= d);
    }
    Ok(x)
}

/// Applies `I - Q Q^H` to `M`.
pub fn apply_complement_projector(q: &ComplexMatrix, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if q.nrows() != m.nrows() {
        return Err(Error::arg(format!(
            "projector has {} rows, operand has {}",
            q.nrows(),
            m.nrows()
        )));
    }
    if q.ncols() == 0 {
        return Ok(m.clone());
    }
    let coeffs = q.ad_mul(m);
    let mut out = m.clone();
    out.gemm(
        Complex64::new(-1.0, 0.0),
        q,
        &coeffs,
        Complex64::new(1.0, 0.0),
    );
    Ok(out)
}

fn hermitian_part(h: &ComplexMatrix) -> ComplexMatrix {
    (h + h.adjoint()).scale(0.5)
}

fn eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let eig = SymmetricEigen::try_new(hermitian_part(h), f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::arg("Hermitian eigensolver failed to converge"))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok((values, vectors))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::arg("expected a non-empty square matrix"));
    }
    Ok(eigh(h)?.0[0])
}

fn is_hermitian(h: &ComplexMatrix, tol: f64) -> bool {
    h.nrows() == h.ncols() && (h - h.adjoint()).norm() <= tol * h.norm().max(f64::MIN_POSITIVE)
}

/// Smallest eigenpair of `A v = λ B v` restricted to the range of `B`.
#[derive(Debug, Clone)]
pub struct GevpMin {
    pub lambda: f64,
    /// Normalized so that `vᴴ B v = 1`.
    pub v: ComplexVector,
    /// All finite eigenvalues of the pencil in ascending order.
    pub spectrum: Vec<f64>,
}

/// Dense Hermitian-definite pencil solver.
///
/// `B` may be singular. Directions in its null space are eliminated through
/// the Schur complement of `A`, which requires `A` to be positive definite on
/// `null(B)`; otherwise the pencil is reported as degenerate. Intended as a
/// brute-force cross-check only: it squares condition numbers.
pub fn hermitian_definite_gevp_min(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<GevpMin> {
    let k = a.nrows();
    if a.shape() != (k, k) || b.shape() != (k, k) || k == 0 {
        return Err(Error::arg("pencil matrices must be square and equal-sized"));
    }
    if !is_hermitian(a, 1e-10) || !is_hermitian(b, 1e-10) {
        return Err(Error::arg("pencil matrices must be Hermitian"));
    }
    let (b_vals, b_vecs) = eigh(b)?;
    let b_max = b_vals[k - 1];
    if b_max <= 0.0 {
        return Err(Error::DegeneratePencil);
    }
    let rank_tol = 100.0 * k as f64 * f64::EPSILON * b_max;
    if b_vals[0] < -rank_tol {
        return Err(Error::arg(format!(
            "B is indefinite: smallest eigenvalue {:e}",
            b_vals[0]
        )));
    }
    let null_dim = b_vals.iter().take_while(|&&l| l <= rank_tol).count();
    let v_null = b_vecs.columns(0, null_dim).into_owned();
    let v_range = b_vecs.columns(null_dim, k - null_dim).into_owned();
    let scales: Vec<f64> = b_vals[null_dim..].iter().map(|l| l.sqrt()).collect();

    let a_rr = v_range.ad_mul(&(a * &v_range));
    let (schur, elim) = if null_dim == 0 {
        (a_rr, None)
    } else {
        let a_nn = hermitian_part(&v_null.ad_mul(&(a * &v_null)));
        let a_nr = v_null.ad_mul(&(a * &v_range));
        let a_norm = a.norm();
        let chol = a_nn.clone().cholesky().ok_or(Error::DegeneratePencil)?;
        if hermitian_min_eigenvalue(&a_nn)? <= 1e-13 * a_norm {
            return Err(Error::DegeneratePencil);
        }
        let x = chol.solve(&a_nr);
        (&a_rr - a_nr.ad_mul(&x), Some(x))
    };

    let mut g = schur;
    for (j, sj) in scales.iter().enumerate() {
        for i in 0..g.nrows() {
            g[(i, j)] /= *sj;
            g[(j, i)] /= *sj;
        }
    }
    let (vals, vecs) = eigh(&g)?;
    let lambda = vals[0];
    let mut y = vecs.column(0).into_owned();
    for (i, si) in scales.iter().enumerate() {
        y[i] /= *si;
    }
    let mut v = &v_range * &y;
    if let Some(x) = elim {
        v -= &v_null * (x * &y);
    }
    Ok(GevpMin {
        lambda,
        v,
        spectrum: vals,
    })
}
