//! Small dense solves shared by the bifurcation and expansion stages.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Solves a 2×2 system; `None` when `|det|` after row scaling is at most `tol`.
pub(crate) fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2], tol: f64) -> Result<[f64; 2], f64> {
    let scaled_det = scaled_det2(m);
    if !(scaled_det.abs() > tol) {
        return Err(scaled_det);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Ok([(rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det, (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det])
}

/// Determinant of the 2×2 matrix with each row scaled to unit Euclidean norm.
pub(crate) fn scaled_det2(m: [[f64; 2]; 2]) -> f64 {
    let r0 = m[0][0].hypot(m[0][1]);
    let r1 = m[1][0].hypot(m[1][1]);
    if r0 == 0.0 || r1 == 0.0 {
        return 0.0;
    }
    (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / (r0 * r1)
}

/// Outcome of a minimum-norm least-squares solve.
pub(crate) struct LeastSquares {
    pub x: DVector<f64>,
    pub rank: usize,
}

/// Minimum-norm least squares via SVD, discarding singular values below
/// `rel_tol · max(σ_max, scale)`; `scale` is the magnitude of the operator
/// `a` was assembled from, so a numerically zero `a` has rank 0.
pub(crate) fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64, scale: f64) -> LeastSquares {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rel_tol * smax.max(scale);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut x = DVector::zeros(a.ncols());
    let mut rank = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cutoff && *s > 0.0 {
            rank += 1;
            let coef = u.column(i).dot(b) / s;
            x += v_t.row(i).transpose() * coef;
        }
    }
    LeastSquares { x, rank }
}

/// Right singular vector of the smallest singular value, and `σ_min / σ_max`.
pub(crate) fn complex_null_vector(m: &DMatrix<Complex64>) -> (DVector<Complex64>, f64) {
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let (imin, smin) = sv.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let smax = sv.max();
    let v_t = svd.v_t.expect("requested Vᴴ");
    let v = v_t.row(imin).adjoint();
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    (v, ratio)
}

/// `σ_min / σ_max` of a complex matrix.
pub(crate) fn complex_condition_ratio(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax > 0.0 {
        sv.min() / smax
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve2_rejects_singular() {
        assert!(solve2([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0], 1e-12).is_err());
        let x = solve2([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn lstsq_min_norm_on_rank_deficient() {
        // Columns 0 and 1 equal: the min-norm solution splits evenly.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let ls = min_norm_lstsq(&a, &b, 1e-8, 0.0);
        assert_eq!(ls.rank, 1);
        assert!((ls.x[0] - 1.0).abs() < 1e-14 && (ls.x[1] - 1.0).abs() < 1e-14);
        assert!((&a * &ls.x - &b).norm() < 1e-14);
        // Inconsistent data: the projection onto the range is matched.
        let inconsistent = DVector::from_vec(vec![1.0, -1.0]);
        let ls = min_norm_lstsq(&a, &inconsistent, 1e-8, 0.0);
        assert!(ls.x.norm() < 1e-15);
        // A numerically zero operator has rank 0 once its scale is known.
        let tiny = DMatrix::from_row_slice(2, 2, &[1e-17, 0.0, 0.0, 1e-17]);
        assert_eq!(min_norm_lstsq(&tiny, &b, 1e-8, 1.0).rank, 0);
        assert_eq!(min_norm_lstsq(&tiny, &b, 1e-8, 0.0).rank, 2);
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[one, i, -i, one]);
        let (v, ratio) = complex_null_vector(&m);
        assert!(ratio < 1e-15);
        assert!((&m * &v).norm() < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }
}
