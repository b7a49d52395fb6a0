//! Independent reference implementations used by the integration tests.
//! Nothing here calls the library routine it is checking.

#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use shapefilter::geometry::Vec2;
use shapefilter::pipeline::ScenarioSpec;
use shapefilter::{Contour, Mask, MaskStack, SrvShape};

// ------------------------------------------------------------ smoothing QP

/// Default grid used by the discretized smoothing objective.
pub const QP_GRID: usize = 701;

/// [`qp_smoothing_oracle_on`] with the default grid.
pub fn qp_smoothing_oracle(idx: &[usize], h: f64, y: &[f64], w: &[f64], rho: f64) -> Vec<f64> {
    qp_smoothing_oracle_on(QP_GRID, idx, h, y, w, rho)
}

/// Richardson extrapolation of the grid oracle over 701 and 1401 points.
/// The grid objective converges at O(h²), so `(4·g_fine − g_coarse)/3`
/// removes the leading error term; finer grids lose more to round-off than
/// they gain.
pub fn qp_smoothing_oracle_extrapolated(
    idx: &[usize],
    h: f64,
    y: &[f64],
    w: &[f64],
    rho: f64,
) -> Vec<f64> {
    let coarse = qp_smoothing_oracle_on(QP_GRID, idx, h, y, w, rho);
    let fine_idx: Vec<usize> = idx.iter().map(|k| 2 * k).collect();
    let fine = qp_smoothing_oracle_on(2 * QP_GRID - 1, &fine_idx, h / 2.0, y, w, rho);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Minimizes `ρ Σ wᵢ (yᵢ − g(kᵢ))² + (1 − ρ) Σⱼ h (Δ²g)ⱼ² / h⁴` over values
/// `g` on a uniform grid of `m` points with spacing `h`; data sit on grid
/// nodes `idx`. Returns `g` at the data nodes.
pub fn qp_smoothing_oracle_on(
    m: usize,
    idx: &[usize],
    h: f64,
    y: &[f64],
    w: &[f64],
    rho: f64,
) -> Vec<f64> {
    // symmetric pentadiagonal: band[d][j] = A[j][j + d]
    let mut band = vec![vec![0.0; m]; 3];
    let mut rhs = vec![0.0; m];
    for ((&k, &yi), &wi) in idx.iter().zip(y).zip(w) {
        band[0][k] += rho * wi;
        rhs[k] += rho * wi * yi;
    }
    let c = (1.0 - rho) / h.powi(3);
    let stencil = [1.0, -2.0, 1.0];
    for j in 1..m - 1 {
        let cols = [j - 1, j, j + 1];
        for a in 0..3 {
            for b in a..3 {
                band[b - a][cols[a]] += c * stencil[a] * stencil[b];
            }
        }
    }
    let g = banded_cholesky_solve(band, rhs);
    idx.iter().map(|&k| g[k]).collect()
}

/// Solves a symmetric positive definite banded system (bandwidth 2, upper
/// band storage) by Cholesky factorization.
fn banded_cholesky_solve(mut band: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    // L stored in the same layout: l[d][j] = L[j + d][j]
    for j in 0..m {
        let mut diag = band[0][j];
        for d in 1..=2 {
            if j >= d {
                diag -= band[d][j - d] * band[d][j - d];
            }
        }
        let ljj = diag.sqrt();
        band[0][j] = ljj;
        for d in 1..=2 {
            if j + d < m {
                let mut v = band[d][j];
                // subtract Σ L[j+d][k] L[j][k] for k < j within the band
                for e in 1..=2 {
                    if j >= e && d + e <= 2 {
                        v -= band[d + e][j - e] * band[e][j - e];
                    }
                }
                band[d][j] = v / ljj;
            }
        }
    }
    for j in 0..m {
        let mut v = b[j];
        for d in 1..=2 {
            if j >= d {
                v -= band[d][j - d] * b[j - d];
            }
        }
        b[j] = v / band[0][j];
    }
    for j in (0..m).rev() {
        let mut v = b[j];
        for d in 1..=2 {
            if j + d < m {
                v -= band[d][j] * b[j + d];
            }
        }
        b[j] = v / band[0][j];
    }
    b
}

/// A random problem with data on grid nodes 0 = k₀ < … < k_last = 700.
pub struct GridProblem {
    pub idx: Vec<usize>,
    pub h: f64,
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub rho: f64,
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> GridProblem {
    let n = rng.gen_range(3..=12);
    let mut idx = vec![0, QP_GRID - 1];
    while idx.len() < n {
        let k = rng.gen_range(1..QP_GRID - 1);
        if idx.iter().all(|&j| j.abs_diff(k) >= 20) {
            idx.push(k);
        }
    }
    idx.sort_unstable();
    let h = rng.gen_range(5.0..15.0) / (QP_GRID - 1) as f64;
    let times = idx.iter().map(|&k| k as f64 * h).collect();
    let y = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let w = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
    let rho = rng.gen_range(0.05..0.95);
    GridProblem {
        idx,
        h,
        times,
        y,
        w,
        rho,
    }
}

/// Dense O(m³) symmetric solve, used to check the banded oracle itself.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

// ------------------------------------------------------------ SRV shapes

/// Brute-force shape distance: every cyclic shift, closed-form Procrustes
/// rotation per shift, minimum over all shifts.
pub fn brute_force_distance(a: &SrvShape, b: &SrvShape) -> (f64, usize, f64) {
    let n = a.n();
    let ds = TAU / n as f64;
    let mut best = (f64::INFINITY, 0, 0.0);
    for k in 0..n {
        let (mut dot, mut cross) = (0.0, 0.0);
        for i in 0..n {
            let r = a.q()[i];
            let t = b.q()[(i + k) % n];
            dot += t.x * r.x + t.y * r.y;
            cross += t.x * r.y - t.y * r.x;
        }
        let theta = cross.atan2(dot);
        let (s, c) = theta.sin_cos();
        let ss: f64 = (0..n)
            .map(|i| {
                let t = b.q()[(i + k) % n];
                let rt = Vec2::new(c * t.x - s * t.y, s * t.x + c * t.y);
                let d = a.q()[i] - rt;
                d.x * d.x + d.y * d.y
            })
            .sum();
        let d = (ss * ds).sqrt();
        if d < best.0 {
            best = (d, k, theta);
        }
    }
    best
}

pub fn circle(center: Vec2, radius: f64, n: usize, phase: f64) -> Contour {
    Contour::new(
        (0..n)
            .map(|i| {
                let a = phase + TAU * i as f64 / n as f64;
                center + Vec2::new(radius * a.cos(), radius * a.sin())
            })
            .collect(),
    )
}

/// Smooth star-shaped closed curve, counterclockwise.
pub fn blob(center: Vec2, radius: f64, harmonics: &[(f64, f64)], n: usize) -> Contour {
    Contour::new(
        (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                let r = radius
                    + harmonics
                        .iter()
                        .enumerate()
                        .map(|(k, (p, q))| {
                            let h = (k + 2) as f64;
                            p * (h * a).cos() + q * (h * a).sin()
                        })
                        .sum::<f64>();
                center + Vec2::new(r * a.cos(), r * a.sin())
            })
            .collect(),
    )
}

// ------------------------------------------------------------ graphs, MDS

pub fn floyd_warshall_knn(dist: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let n = dist.len();
    let mut g = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        g[i][i] = 0.0;
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist[i][a].total_cmp(&dist[i][b]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            g[i][j] = dist[i][j];
            g[j][i] = dist[i][j];
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = g[i][m] + g[m][j];
                if via < g[i][j] {
                    g[i][j] = via;
                }
            }
        }
    }
    g
}

/// Top-2 classical MDS by power iteration with deflation.
pub fn mds_power_iteration(dist: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = dist.len();
    let sq: Vec<Vec<f64>> = dist.iter().map(|r| r.iter().map(|d| d * d).collect()).collect();
    let row: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let all = row.iter().sum::<f64>() / n as f64;
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| -0.5 * (sq[i][j] - row[i] - row[j] + all)).collect())
        .collect();
    let mut out = vec![[0.0; 2]; n];
    for axis in 0..2 {
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| b[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            lambda = norm;
            v = w.iter().map(|x| x / norm).collect();
        }
        for i in 0..n {
            out[i][axis] = v[i] * lambda.max(0.0).sqrt();
        }
        for i in 0..n {
            for j in 0..n {
                b[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    out
}

// ------------------------------------------------------------ masks

/// Counts by explicit set membership: (|A|, |B|, |A ∩ B|, Z).
pub fn stack_counts(a: &MaskStack, b: &MaskStack) -> (usize, usize, usize, usize) {
    use std::collections::HashSet;
    let set = |s: &MaskStack| -> HashSet<(usize, usize, usize)> {
        let mut out = HashSet::new();
        for (t, f) in s.frames().iter().enumerate() {
            for y in 0..f.height() {
                for x in 0..f.width() {
                    if f.get(x, y) {
                        out.insert((t, x, y));
                    }
                }
            }
        }
        out
    };
    let (sa, sb) = (set(a), set(b));
    let z = a.len() * a.width() * a.height();
    (sa.len(), sb.len(), sa.intersection(&sb).count(), z)
}

pub fn disc_mask(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> Mask {
    Mask::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        dx * dx + dy * dy <= r * r
    })
}

// ------------------------------------------------------------ suites

/// The 20 noisy sequences with merged-blob frames: 10–40 frames, 1–3
/// outlier frames, 1 px boundary noise.
pub fn outlier_suite() -> Vec<ScenarioSpec> {
    (0..20u64)
        .map(|s| {
            let frames = 10 + (s as usize * 7) % 31;
            ScenarioSpec::random(1000 + s, frames, 1 + s as usize % 3, 1.0)
        })
        .collect()
}

/// Noise-free, outlier-free sequences.
pub fn smooth_suite() -> Vec<ScenarioSpec> {
    (0..6u64)
        .map(|s| ScenarioSpec::random(2000 + s, 12 + 4 * s as usize, 0, 0.0))
        .collect()
}

/// Winding number of a closed polygon around `p`, or `None` when `p` lies on
/// an edge (within `eps`).
pub fn winding_number(poly: &[Vec2], p: Vec2, eps: f64) -> Option<i32> {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ab = b - a;
        let ap = p - a;
        let len2 = ab.x * ab.x + ab.y * ab.y;
        let t = if len2 > 0.0 { ((ap.x * ab.x + ap.y * ab.y) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let foot = a + ab * t;
        if (p - foot).norm() <= eps {
            return None;
        }
        let cross = ab.x * ap.y - ab.y * ap.x;
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            wn -= 1;
        }
    }
    Some(wn)
}

/// Star-shaped mask: pixel centres within `r(φ)` of `(cx, cy)`.
pub fn star_mask(w: usize, h: usize, cx: f64, cy: f64, r: f64, harmonics: &[(f64, f64)]) -> Mask {
    Mask::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let a = dy.atan2(dx);
        let rr = r + harmonics
            .iter()
            .enumerate()
            .map(|(k, (p, q))| {
                let m = (k + 2) as f64;
                p * (m * a).cos() + q * (m * a).sin()
            })
            .sum::<f64>();
        dx * dx + dy * dy <= rr * rr
    })
}
