//! Clustering and motion metrics: the breakplane similarity matrix and its
//! eigenvalue-cumsum AUC, the matched-pair step distance between parameter
//! snapshots, and the hull-masked relative error between two fitted fields.

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::SplineParams;
use crate::spectral::GridFunction;
use ndarray::Array2;

/// `S_ij = <xi_i, xi_j> exp(-|gamma_i - gamma_j|^2)` with a block-sorting
/// permutation from greedy average-linkage ordering on `1 - S`.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    pub s: Array2<f64>,
    pub order: Vec<usize>,
}

pub fn similarity(params: &SplineParams) -> Result<SimilarityMatrix> {
    let h = params.h();
    if h < 2 {
        return Err(Error::InvalidParams("similarity needs at least two neurons".into()));
    }
    let mut s = Array2::<f64>::zeros((h, h));
    for i in 0..h {
        for j in 0..h {
            let dot = params.xi.row(i).dot(&params.xi.row(j));
            let dg = params.gamma[i] - params.gamma[j];
            s[(i, j)] = dot * (-dg * dg).exp();
        }
    }
    let order = agglomerative_order(&s);
    Ok(SimilarityMatrix { s, order })
}

/// Greedy average-linkage ordering: repeatedly merge the two closest
/// clusters (distance `1 - mean(S)` across the pair) and keep members
/// contiguous, so similar blocks render together.
fn agglomerative_order(s: &Array2<f64>) -> Vec<usize> {
    let h = s.nrows();
    let mut clusters: Vec<Vec<usize>> = (0..h).map(|i| vec![i]).collect();
    while clusters.len() > 1 {
        let mut best = (0usize, 1usize, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut acc = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        acc += 1.0 - s[(i, j)];
                    }
                }
                let d = acc / (clusters[a].len() * clusters[b].len()) as f64;
                if d < best.2 {
                    best = (a, b, d);
                }
            }
        }
        let tail = clusters.remove(best.1);
        clusters[best.0].extend(tail);
    }
    clusters.pop().unwrap()
}

/// Eigenvalue-cumsum area: absolute eigenvalues sorted descending and
/// normalized to sum 1; the cumulative sum is anchored at (0, 0), sampled
/// at `i/H`, and integrated by trapezoid. Rank-1 matrices give
/// `(2H-1)/(2H)`; a flat spectrum gives exactly `1/2`.
pub fn cluster_auc(sim: &SimilarityMatrix) -> f64 {
    let h = sim.s.nrows();
    let (vals, _) = linalg::jacobi_eigh(&sim.s.view());
    let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total: f64 = mags.iter().sum();
    if total == 0.0 {
        return 0.5;
    }
    let mut auc = 0.0;
    let mut cum = 0.0;
    for m in &mags {
        let prev = cum;
        cum += m / total;
        auc += (prev + cum) / 2.0 / h as f64;
    }
    auc
}

/// Exact minimum-cost perfect assignment (Jonker-Volgonant style shortest
/// augmenting paths with potentials, O(n^3)). Returns `assign[row] = col`.
pub fn hungarian_min_cost(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols());
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

#[derive(Debug, Clone, Copy)]
pub struct StepDistance {
    pub value: f64,
    /// False when the greedy nearest-neighbor fallback was used (H > 512).
    pub exact: bool,
}

/// Mean l2 distance between matched pairs of augmented coordinates
/// `xi_tilde = (xi, -gamma)` under a minimum-cost perfect matching; a
/// permuted copy of the same breakplanes is at distance zero.
pub fn step_distance(prev: &SplineParams, next: &SplineParams) -> Result<StepDistance> {
    let h = prev.h();
    if h != next.h() {
        return Err(Error::InvalidParams("snapshots must share the width".into()));
    }
    let d = prev.d();
    let tilde = |s: &SplineParams, i: usize| -> Vec<f64> {
        let mut t: Vec<f64> = s.xi.row(i).iter().copied().collect();
        t.push(-s.gamma[i]);
        t
    };
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let prev_t: Vec<Vec<f64>> = (0..h).map(|i| tilde(prev, i)).collect();
    let next_t: Vec<Vec<f64>> = (0..h).map(|i| tilde(next, i)).collect();
    let _ = d;
    if h <= 512 {
        let cost = Array2::from_shape_fn((h, h), |(i, j)| dist(&prev_t[i], &next_t[j]));
        let assign = hungarian_min_cost(&cost);
        let total: f64 = (0..h).map(|i| cost[(i, assign[i])]).sum();
        Ok(StepDistance { value: total / h as f64, exact: true })
    } else {
        // Greedy nearest neighbor keeps large widths tractable.
        let mut taken = vec![false; h];
        let mut total = 0.0;
        for i in 0..h {
            let mut best = (usize::MAX, f64::INFINITY);
            for j in 0..h {
                if !taken[j] {
                    let c = dist(&prev_t[i], &next_t[j]);
                    if c < best.1 {
                        best = (j, c);
                    }
                }
            }
            taken[best.0] = true;
            total += best.1;
        }
        Ok(StepDistance { value: total / h as f64, exact: false })
    }
}

/// Convex hull of 2-D points (Andrew monotone chain) with half-plane
/// membership tests.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    /// Counter-clockwise vertices.
    pub vertices: Vec<[f64; 2]>,
}

impl ConvexHull {
    pub fn of(points: &Array2<f64>) -> Result<Self> {
        if points.ncols() != 2 {
            return Err(Error::InvalidParams("hulls are 2-D".into()));
        }
        let mut pts: Vec<[f64; 2]> =
            points.rows().into_iter().map(|r| [r[0], r[1]]).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::InvalidParams("hull needs at least three distinct points".into()));
        }
        let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| -> f64 {
            (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
        };
        let mut lower: Vec<[f64; 2]> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(*p);
        }
        let mut upper: Vec<[f64; 2]> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(*p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Ok(Self { vertices: lower })
    }

    /// Half-plane test against every hull edge (boundary counts as inside).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
            if cross < -1e-12 {
                return false;
            }
        }
        true
    }
}

/// `mean_hull |f_a - f_b| / max_hull |f_a|`, the fit-comparison metric
/// (`f_a` is the reference fit whose peak normalizes the average).
pub fn relative_error(f_a: &GridFunction, f_b: &GridFunction, hull: &ConvexHull) -> Result<f64> {
    assert_eq!(f_a.values.dim(), f_b.values.dim(), "fits must share the grid");
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut peak = 0.0f64;
    for i in 0..f_a.gx.len {
        for j in 0..f_a.gy.len {
            let x = f_a.gx.point(i);
            let y = f_a.gy.point(j);
            if hull.contains(x, y) {
                sum += (f_a.values[(i, j)] - f_b.values[(i, j)]).abs();
                peak = peak.max(f_a.values[(i, j)].abs());
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::InvalidParams("hull mask is empty on this grid".into()));
    }
    if peak == 0.0 {
        return Ok(if sum == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(sum / count as f64 / peak)
}
