//! Dense factorizations used by the solvers: column-pivoted Householder QR,
//! a complete orthogonal decomposition for minimum-norm solves, cyclic
//! Jacobi eigenvalues for symmetric matrices, and Cholesky.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Singular values (estimated by pivoted-QR diagonals) below this fraction
/// of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Column-pivoted Householder QR: `A P = Q R` with `Q` m x m orthogonal,
/// `R` m x n upper trapezoidal, `P` a column permutation.
pub struct PivotedQr {
    pub q: Array2<f64>,
    pub r: Array2<f64>,
    /// `perm[j]` = original column index placed at position j.
    pub perm: Vec<usize>,
    pub rank: usize,
}

pub fn pivoted_qr(a: &ArrayView2<f64>) -> PivotedQr {
    let (m, n) = a.dim();
    let mut r = a.to_owned();
    let mut q = Array2::<f64>::eye(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    let mut first_diag = 0.0f64;
    let mut rank = 0;

    for j in 0..steps {
        // Select the remaining column with the largest trailing norm.
        let mut best = j;
        let mut best_norm = 0.0f64;
        for c in j..n {
            let mut s = 0.0;
            for i in j..m {
                s += r[(i, c)] * r[(i, c)];
            }
            if s > best_norm {
                best_norm = s;
                best = c;
            }
        }
        if best != j {
            perm.swap(j, best);
            for i in 0..m {
                let tmp = r[(i, j)];
                r[(i, j)] = r[(i, best)];
                r[(i, best)] = tmp;
            }
        }
        let norm = best_norm.sqrt();
        if j == 0 {
            first_diag = norm;
        }
        if norm <= RANK_TOL * first_diag.max(f64::MIN_POSITIVE) {
            break;
        }
        rank += 1;

        // Householder reflector for column j.
        let alpha = if r[(j, j)] >= 0.0 { -norm } else { norm };
        let mut v = Array1::<f64>::zeros(m - j);
        for i in j..m {
            v[i - j] = r[(i, j)];
        }
        v[0] -= alpha;
        let vnorm = v.dot(&v).sqrt();
        if vnorm <= f64::MIN_POSITIVE {
            r[(j, j)] = alpha;
            continue;
        }
        v.mapv_inplace(|x| x / vnorm);

        // Apply I - 2 v v^T to the trailing block of R and to Q columns.
        for c in j..n {
            let mut dot = 0.0;
            for i in j..m {
                dot += v[i - j] * r[(i, c)];
            }
            for i in j..m {
                r[(i, c)] -= 2.0 * v[i - j] * dot;
            }
        }
        for c in 0..m {
            let mut dot = 0.0;
            for i in j..m {
                dot += v[i - j] * q[(c, i)];
            }
            for i in j..m {
                q[(c, i)] -= 2.0 * v[i - j] * dot;
            }
        }
        r[(j, j)] = alpha;
        for i in (j + 1)..m {
            r[(i, j)] = 0.0;
        }
    }
    PivotedQr { q, r, perm, rank }
}

/// Minimum-norm solution of the consistent system `A x = b`.
///
/// Route: pivoted QR of A, then a second QR of `R1^T` (complete orthogonal
/// decomposition) so the minimum-norm solution reads off as `P W T^-T c`.
/// Returns `(x, rank, residual_l2)` where the residual measures consistency
/// of `b` with the range of A.
pub fn min_norm_solve(a: &ArrayView2<f64>, b: &ArrayView1<f64>) -> (Array1<f64>, usize, f64) {
    let (m, n) = a.dim();
    assert_eq!(b.len(), m);
    let qr = pivoted_qr(a);
    let r = qr.rank;
    if r == 0 {
        let res = b.dot(b).sqrt();
        return (Array1::zeros(n), 0, res);
    }
    // c = Q1^T b and the out-of-range residual.
    let qtb = qr.q.t().dot(b);
    let c = qtb.slice(ndarray::s![..r]).to_owned();
    let mut res2 = 0.0;
    for i in r..m {
        res2 += qtb[i] * qtb[i];
    }

    // R1 = R[..r, ..]: r x n. QR of R1^T = W T with W n x r orthonormal.
    let r1t = qr.r.slice(ndarray::s![..r, ..]).t().to_owned();
    let inner = pivoted_qr(&r1t.view());
    // R1^T has full column rank r by construction; its pivot order still
    // must be undone: R1^T P2 = W T  =>  R1 = T^T_perm ... easier to avoid
    // pivoting effects by solving through the factor directly:
    // R1^T = W T P2^T  =>  R1 = P2 T^T W^T.
    let w = inner.q.slice(ndarray::s![.., ..r]).to_owned();
    let t = inner.r.slice(ndarray::s![..r, ..r]).to_owned();

    // Solve P2 T^T (W^T xt) = c  =>  T^T u = P2^T c, then xt = W u.
    let mut c_perm = Array1::<f64>::zeros(r);
    for j in 0..r {
        c_perm[j] = c[inner.perm[j]];
    }
    // Forward substitution with T^T (lower triangular).
    let mut u = Array1::<f64>::zeros(r);
    for i in 0..r {
        let mut s = c_perm[i];
        for k in 0..i {
            s -= t[(k, i)] * u[k];
        }
        u[i] = s / t[(i, i)];
    }
    let xt = w.dot(&u);
    // Undo the outer column permutation.
    let mut x = Array1::<f64>::zeros(n);
    for j in 0..n {
        x[qr.perm[j]] = xt[j];
    }
    (x, r, res2.sqrt())
}

/// All eigenvalues of a symmetric matrix by the cyclic Jacobi method,
/// descending. Also returns the rotation product (columns = eigenvectors).
pub fn jacobi_eigh(s: &ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = s.nrows();
    assert_eq!(n, s.ncols());
    let mut a = s.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let off = |a: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)] * a[(i, j)];
            }
        }
        s
    };
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        if off(&a) <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let vals = Array1::from_iter(idx.iter().map(|&i| a[(i, i)]));
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (col, &i) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[(k, col)] = v[(k, i)];
        }
    }
    (vals, vecs)
}

/// Cholesky solve for a symmetric positive definite system.
pub fn cholesky_solve(a: &ArrayView2<f64>, b: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NoConvergence(format!(
                        "matrix not positive definite at pivot {i} (value {s:.3e})"
                    )));
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qr_reconstructs_and_ranks() {
        let a = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let f = pivoted_qr(&a.view());
        assert_eq!(f.rank, 2, "this matrix has rank 2");
        // Q R = A P.
        let qr = f.q.dot(&f.r);
        for j in 0..3 {
            for i in 0..3 {
                assert!((qr[(i, j)] - a[(i, f.perm[j])]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn min_norm_simple() {
        // One equation, two unknowns: x1 + x2 = 3 -> (1.5, 1.5).
        let a = array![[1.0, 1.0]];
        let b = array![3.0];
        let (x, rank, res) = min_norm_solve(&a.view(), &b.view());
        assert_eq!(rank, 1);
        assert!(res < 1e-12);
        assert!((x[0] - 1.5).abs() < 1e-12 && (x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn min_norm_matches_nalgebra_pinv() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..30 {
            let m = rng.gen_range(1..=8);
            let n = rng.gen_range(m..=30);
            let a = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0));
            let coeff = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
            let b = a.dot(&coeff); // consistent by construction
            let (x, _rank, res) = min_norm_solve(&a.view(), &b.view());
            assert!(res < 1e-10, "trial {trial}: residual {res}");

            let na = nalgebra::DMatrix::from_fn(m, n, |i, j| a[(i, j)]);
            let nb = nalgebra::DVector::from_fn(m, |i, _| b[i]);
            let pinv = na.clone().pseudo_inverse(1e-12).unwrap();
            let want = pinv * nb;
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..n {
                num += (x[j] - want[j]) * (x[j] - want[j]);
                den += want[j] * want[j];
            }
            assert!(
                (num / den.max(1e-300)).sqrt() < 1e-8,
                "trial {trial}: rel err {}",
                (num / den).sqrt()
            );
        }
    }

    #[test]
    fn jacobi_diagonalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 24;
        let g = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
        let s = &g + &g.t();
        let (vals, vecs) = jacobi_eigh(&s.view());
        // S v_i = lambda_i v_i for every column.
        for i in 0..n {
            let v = vecs.column(i).to_owned();
            let sv = s.dot(&v);
            for k in 0..n {
                assert!((sv[k] - vals[i] * v[k]).abs() < 1e-9, "eigpair {i}");
            }
        }
        // Descending order.
        for i in 1..n {
            assert!(vals[i - 1] >= vals[i] - 1e-12);
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 12;
        let g = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
        let spd = g.t().dot(&g) + Array2::<f64>::eye(n) * 0.5;
        let x_true = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
        let b = spd.dot(&x_true);
        let x = cholesky_solve(&spd.view(), &b.view()).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-9);
        }
        // Indefinite matrix refused.
        let indef = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky_solve(&indef.view(), &array![1.0, 1.0].view()).is_err());
    }
}
