//! Dense symmetric linear algebra: cyclic Jacobi eigendecomposition and
//! matrix functions through the eigenbasis.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Eigenvalues (descending) and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Q diag(f(λ)) Qᵀ`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> DMatrix<f64> {
        let d: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        from_eigen(&self.vectors, &d)
    }
}

/// `Q diag(d) Qᵀ` for an orthogonal `Q`.
pub fn from_eigen(q: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let n = q.nrows();
    let mut scaled = q.clone();
    for (j, &dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(dj);
    }
    let mut out = scaled * q.transpose();
    // exact symmetry
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = m;
            out[(j, i)] = m;
        }
    }
    out
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below
/// `1e-13 · ‖A‖_F`. Eigenvalues are sorted in descending order (ties keep
/// their rotation order) and every eigenvector is normalised so that its
/// largest-magnitude component is positive, taking the first such component
/// when magnitudes tie.
pub fn jacobi_eigen(input: &DMatrix<f64>) -> SymmetricEigen {
    assert!(input.is_square(), "jacobi_eigen needs a square matrix");
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm();

    if scale > 0.0 {
        let target = OFF_DIAGONAL_TOL * scale;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= target {
                break;
            }
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    // skip entries that can no longer move the diagonal
                    if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        continue;
                    }
                    rotated = true;
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = c * arp - s * arq;
                        let new_rq = s * arp + c * arq;
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                    a[(p, p)] = app - t * apq;
                    a[(q, q)] = aqq + t * apq;
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        orient(&mut col);
        vectors.set_column(dst, &col);
    }
    SymmetricEigen { values, vectors }
}

/// Flips `col` so that its largest-magnitude entry is positive (first one on ties).
pub fn orient(col: &mut DVector<f64>) {
    let max = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if col[pivot] < 0.0 {
        col.neg_mut();
    }
}

/// Clusters a descending sequence into runs whose consecutive gaps are at most `tol`.
pub fn eigen_groups(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > tol {
            if i > start {
                groups.push(start..i);
            }
            start = i;
        }
    }
    groups
}

/// Tolerance used to decide that two eigenvalues belong to the same eigenspace.
pub fn group_tolerance(values: &[f64]) -> f64 {
    let scale = values.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    1e-9 * scale
}

/// Largest absolute deviation from symmetry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Norm of the projection of `x` onto the span of the orthonormal columns of `basis`.
pub fn projection_norm(basis: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    (basis.transpose() * x).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix_is_already_decomposed() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 2.0]));
        let e = jacobi_eigen(&m);
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors.column(0)[1], 1.0);
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = jacobi_eigen(&DMatrix::zeros(3, 3));
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, DMatrix::identity(3, 3));
    }

    #[test]
    fn two_by_two_rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = jacobi_eigen(&m);
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.vectors[(0, 0)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 0)], h, epsilon = 1e-14);
        // tie in magnitude: first component positive
        assert_abs_diff_eq!(e.vectors[(0, 1)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 1)], -h, epsilon = 1e-14);
    }

    #[test]
    fn reconstruction_of_dense_matrix() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, -1.0, 0.5, 2.0, -1.0, 3.0, 0.0, 1.0, 0.5, 0.0, -2.0, 0.3, 2.0, 1.0, 0.3, 1.0,
            ],
        );
        let e = jacobi_eigen(&m);
        let back = from_eigen(&e.vectors, &e.values);
        assert!((back - &m).amax() < 1e-12);
        let qtq = e.vectors.transpose() * &e.vectors;
        assert!((qtq - DMatrix::identity(4, 4)).amax() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn grouping_merges_close_values() {
        let g = eigen_groups(&[2.0, 2.0 - 1e-12, 1.0, -1.0, -1.0], 1e-9);
        assert_eq!(g, vec![0..2, 2..3, 3..5]);
        assert!(eigen_groups(&[], 1e-9).is_empty());
    }

    #[test]
    fn orientation_rule() {
        let mut v = DVector::from_vec(vec![0.1, -0.9, 0.2]);
        orient(&mut v);
        assert_eq!(v[1], 0.9);
    }
}
