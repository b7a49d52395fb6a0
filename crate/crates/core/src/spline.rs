//! Weighted cubic smoothing splines.
//!
//! For abscissae t, observations y, weights w and ρ ∈ [0, 1] the fit is the
//! natural cubic spline γ minimizing
//!
//! ```text
//! ρ Σ w(t) (y(t) − γ(t))² + (1 − ρ) ∫ γ''(t)² dt
//! ```
//!
//! solved with the Reinsch formulation: with λ = (1 − ρ)/ρ, the interior
//! second derivatives satisfy the pentadiagonal system
//! `(R + λ QᵀW⁻¹Q) m = Qᵀy` and the fitted values are `y − λ W⁻¹ Q m`.
//! Zero-weight samples are left out of the solve and the spline built on the
//! remaining knots is evaluated there, so they never influence the fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::srv::{ShapePath, SrvShape};
use crate::geometry::Vec2;
use crate::weights::WeightVector;

/// One scalar channel to be smoothed.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingProblem<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
    pub weights: &'a [f64],
    pub rho: f64,
}

/// Piecewise cubic on `breaks`, C² with natural ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    breaks: Vec<f64>,
    values: Vec<f64>,
    /// `[a, b, c, d]` per interval: a + b·dx + c·dx² + d·dx³.
    coefs: Vec<[f64; 4]>,
}

impl CubicSpline {
    /// Builds the piecewise cubic from knot values and knot second
    /// derivatives.
    fn from_values_and_curvature(breaks: Vec<f64>, values: Vec<f64>, second: &[f64]) -> Self {
        let coefs = breaks
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let h = w[1] - w[0];
                let (m0, m1) = (second[i], second[i + 1]);
                [
                    values[i],
                    (values[i + 1] - values[i]) / h - h * (2.0 * m0 + m1) / 6.0,
                    0.5 * m0,
                    (m1 - m0) / (6.0 * h),
                ]
            })
            .collect();
        CubicSpline {
            breaks,
            values,
            coefs,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn coefficients(&self) -> &[[f64; 4]] {
        &self.coefs
    }

    /// Fitted values at the breakpoints.
    pub fn knot_values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let lo = self.breaks[0];
        let hi = self.breaks[self.breaks.len() - 1];
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let i = self.breaks.partition_point(|&b| b <= t);
        Ok(i.saturating_sub(1).min(self.coefs.len() - 1))
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        if t == self.breaks[i] {
            return Ok(self.values[i]);
        }
        if t == self.breaks[i + 1] {
            return Ok(self.values[i + 1]);
        }
        let [a, b, c, d] = self.coefs[i];
        let dx = t - self.breaks[i];
        Ok(a + dx * (b + dx * (c + dx * d)))
    }

    /// Derivative of order `order` (0..=3) at `t`, taken from the interval
    /// that starts at or before `t`.
    pub fn derivative(&self, t: f64, order: usize) -> Result<f64> {
        let i = self.locate(t)?;
        let [a, b, c, d] = self.coefs[i];
        let dx = t - self.breaks[i];
        Ok(match order {
            0 => a + dx * (b + dx * (c + dx * d)),
            1 => b + dx * (2.0 * c + 3.0 * dx * d),
            2 => 2.0 * c + 6.0 * d * dx,
            3 => 6.0 * d,
            _ => 0.0,
        })
    }

    /// ∫ γ''(t)² dt over the breakpoint range.
    pub fn roughness(&self) -> f64 {
        self.coefs
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(&[_, _, c, d], w)| {
                let h = w[1] - w[0];
                let m0 = 2.0 * c;
                let m1 = 2.0 * c + 6.0 * d * h;
                h / 3.0 * (m0 * m0 + m0 * m1 + m1 * m1)
            })
            .sum()
    }
}

/// LDLᵀ factorization of a symmetric pentadiagonal matrix.
#[derive(Debug, Clone)]
struct Pentadiagonal {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl Pentadiagonal {
    /// `diag[i] = A[i][i]`, `off1[i] = A[i][i+1]`, `off2[i] = A[i][i+2]`.
    fn factor(diag: &[f64], off1: &[f64], off2: &[f64]) -> Self {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            let mut di = diag[i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            d[i] = di;
            if i + 1 < n {
                let mut v = off1[i];
                if i >= 1 {
                    v -= l2[i - 1] * l1[i - 1] * d[i - 1];
                }
                l1[i] = v / di;
            }
            if i + 2 < n {
                l2[i] = off2[i] / di;
            }
        }
        Pentadiagonal { d, l1, l2 }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut z = rhs.to_vec();
        for i in 0..n {
            if i >= 1 {
                z[i] -= self.l1[i - 1] * z[i - 1];
            }
            if i >= 2 {
                z[i] -= self.l2[i - 2] * z[i - 2];
            }
        }
        for i in 0..n {
            z[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                z[i] -= self.l1[i] * z[i + 1];
            }
            if i + 2 < n {
                z[i] -= self.l2[i] * z[i + 2];
            }
        }
        z
    }
}

#[derive(Debug, Clone)]
enum Mode {
    /// ρ = 0: weighted least-squares line.
    Line { wsum: f64, tbar: f64, sxx: f64 },
    /// ρ > 0: Reinsch solve with λ = (1 − ρ)/ρ (λ = 0 interpolates).
    Reinsch { lambda: f64, system: Pentadiagonal },
}

/// A smoothing spline operator for fixed abscissae, weights and ρ, reusable
/// across channels.
#[derive(Debug, Clone)]
pub struct SplineSmoother {
    times: Vec<f64>,
    active: Vec<usize>,
    knots: Vec<f64>,
    w: Vec<f64>,
    mode: Mode,
}

impl SplineSmoother {
    pub fn new(times: &[f64], weights: &[f64], rho: f64) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidLength(times.len()));
        }
        if weights.len() != times.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: weights.len(),
            });
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingTimes(i + 1));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!("rho = {rho} outside [0, 1]")));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        if active.len() < 2 {
            return Err(Error::TooFewPositiveWeights(active.len()));
        }
        let knots: Vec<f64> = active.iter().map(|&i| times[i]).collect();
        let w: Vec<f64> = active.iter().map(|&i| weights[i]).collect();

        let mode = if rho == 0.0 {
            let wsum: f64 = w.iter().sum();
            let tbar = knots.iter().zip(&w).map(|(t, w)| t * w).sum::<f64>() / wsum;
            let sxx = knots
                .iter()
                .zip(&w)
                .map(|(t, w)| w * (t - tbar) * (t - tbar))
                .sum();
            Mode::Line { wsum, tbar, sxx }
        } else {
            let lambda = (1.0 - rho) / rho;
            Mode::Reinsch {
                lambda,
                system: reinsch_system(&knots, &w, lambda),
            }
        };
        Ok(SplineSmoother {
            times: times.to_vec(),
            active,
            knots,
            w,
            mode,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Fits one channel of observations (one value per time).
    pub fn fit(&self, values: &[f64]) -> Result<CubicSpline> {
        if values.len() != self.times.len() {
            return Err(Error::LengthMismatch {
                left: self.times.len(),
                right: values.len(),
            });
        }
        let y: Vec<f64> = self.active.iter().map(|&i| values[i]).collect();
        let (g, m) = match &self.mode {
            Mode::Line { wsum, tbar, sxx } => {
                let ybar = y.iter().zip(&self.w).map(|(y, w)| y * w).sum::<f64>() / wsum;
                let sxy: f64 = self
                    .knots
                    .iter()
                    .zip(&y)
                    .zip(&self.w)
                    .map(|((t, y), w)| w * (t - tbar) * (y - ybar))
                    .sum();
                let slope = sxy / sxx;
                let g = self.knots.iter().map(|t| ybar + slope * (t - tbar)).collect();
                (g, vec![0.0; y.len()])
            }
            Mode::Reinsch { lambda, system } => {
                reinsch_solve(&self.knots, &self.w, *lambda, system, &y)
            }
        };
        let reduced = CubicSpline::from_values_and_curvature(self.knots.clone(), g, &m);
        if self.active.len() == self.times.len() {
            return Ok(reduced);
        }
        Ok(expand(&reduced, &m, &self.times))
    }
}

fn reinsch_system(x: &[f64], w: &[f64], lambda: f64) -> Pentadiagonal {
    let m = x.len();
    let k = m.saturating_sub(2);
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let mut diag = vec![0.0; k];
    let mut off1 = vec![0.0; k];
    let mut off2 = vec![0.0; k];
    // R: tridiagonal, interior knot j ↔ unknown j − 1.
    for j in 0..k {
        diag[j] = (h[j] + h[j + 1]) / 3.0;
        if j + 1 < k {
            off1[j] = h[j + 1] / 6.0;
        }
    }
    // λ QᵀW⁻¹Q, accumulated row by row of Q. Row i of Q touches unknowns
    // i − 2, i − 1, i (interior knots i − 1, i, i + 1).
    let q_entry = |i: usize, j: usize| -> f64 {
        // Q[i][col] for interior knot col = j + 1.
        let col = j + 1;
        if i + 1 == col {
            1.0 / h[col - 1]
        } else if i == col {
            -1.0 / h[col - 1] - 1.0 / h[col]
        } else if i == col + 1 {
            1.0 / h[col]
        } else {
            0.0
        }
    };
    for i in 0..m {
        let lo = i.saturating_sub(2);
        let hi = i.min(k.saturating_sub(1));
        if k == 0 || lo > hi {
            continue;
        }
        let s = lambda / w[i];
        for a in lo..=hi {
            let qa = q_entry(i, a);
            if qa == 0.0 {
                continue;
            }
            diag[a] += s * qa * qa;
            for b in (a + 1)..=hi {
                let qb = q_entry(i, b);
                if b == a + 1 {
                    off1[a] += s * qa * qb;
                } else if b == a + 2 {
                    off2[a] += s * qa * qb;
                }
            }
        }
    }
    Pentadiagonal::factor(&diag, &off1, &off2)
}

/// Returns (fitted values, second derivatives) at the knots.
fn reinsch_solve(
    x: &[f64],
    w: &[f64],
    lambda: f64,
    system: &Pentadiagonal,
    y: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let m = x.len();
    if m <= 2 {
        return (y.to_vec(), vec![0.0; m]);
    }
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let rhs: Vec<f64> = (1..m - 1)
        .map(|j| (y[j + 1] - y[j]) / h[j] - (y[j] - y[j - 1]) / h[j - 1])
        .collect();
    let gamma = system.solve(&rhs);
    let mut second = vec![0.0; m];
    second[1..m - 1].copy_from_slice(&gamma);
    if lambda == 0.0 {
        return (y.to_vec(), second);
    }
    // (Qγ)_i over the padded second-derivative vector.
    let g = (0..m)
        .map(|i| {
            let mut qg = 0.0;
            if i >= 1 && i <= m - 2 {
                qg += (-1.0 / h[i - 1] - 1.0 / h[i]) * second[i];
            }
            if i + 1 <= m - 2 {
                qg += second[i + 1] / h[i];
            }
            if i >= 2 {
                qg += second[i - 1] / h[i - 1];
            }
            y[i] - lambda / w[i] * qg
        })
        .collect();
    (g, second)
}

/// Re-expresses a spline built on a subset of `times` on all of them,
/// extending linearly past its end knots.
fn expand(reduced: &CubicSpline, second: &[f64], times: &[f64]) -> CubicSpline {
    let knots = reduced.breakpoints();
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    let (v0, s0) = (
        reduced.values[0],
        reduced.derivative(first, 1).expect("knot in range"),
    );
    let nl = knots.len() - 1;
    let vl = reduced.values[nl];
    let sl = {
        let [_, b, c, d] = reduced.coefs[nl - 1];
        let h = knots[nl] - knots[nl - 1];
        b + h * (2.0 * c + 3.0 * h * d)
    };
    let mut values = Vec::with_capacity(times.len());
    let mut curv = Vec::with_capacity(times.len());
    let mut k = 0;
    for &t in times {
        if t < first {
            values.push(v0 + s0 * (t - first));
            curv.push(0.0);
        } else if t > last {
            values.push(vl + sl * (t - last));
            curv.push(0.0);
        } else {
            while k < knots.len() && knots[k] < t {
                k += 1;
            }
            if k < knots.len() && knots[k] == t {
                values.push(reduced.values[k]);
                curv.push(second[k]);
            } else {
                values.push(reduced.evaluate(t).expect("inside knot range"));
                curv.push(reduced.derivative(t, 2).expect("inside knot range"));
            }
        }
    }
    CubicSpline::from_values_and_curvature(times.to_vec(), values, &curv)
}

/// Minimizer of the weighted smoothing objective over natural cubic splines.
pub fn fit_smoothing_spline(problem: &SmoothingProblem<'_>) -> Result<CubicSpline> {
    SplineSmoother::new(problem.times, problem.weights, problem.rho)?.fit(problem.values)
}

pub fn evaluate_spline(spline: &CubicSpline, t: f64) -> Result<f64> {
    spline.evaluate(t)
}

/// Per-frame weights rescaled to mean 1.
pub fn normalized_weights(w: &[f64]) -> Vec<f64> {
    let mean = w.iter().sum::<f64>() / w.len().max(1) as f64;
    if mean > 0.0 && mean.is_finite() {
        w.iter().map(|v| v / mean).collect()
    } else {
        w.to_vec()
    }
}

/// Result of smoothing a whole shape path channel by channel.
#[derive(Debug, Clone)]
pub struct PathFit {
    pub path: ShapePath,
    /// Sum of ∫γ''² over every fitted channel.
    pub roughness: f64,
}

/// Smooths every SRV coordinate and both basepoint coordinates of an
/// aligned path independently, with shared weights and ρ. Weights are
/// rescaled to mean 1 first.
pub fn fit_path(path: &ShapePath, weights: &WeightVector, rho: f64) -> Result<ShapePath> {
    Ok(fit_path_with(path, weights, rho, true)?.path)
}

pub fn fit_path_with(
    path: &ShapePath,
    weights: &WeightVector,
    rho: f64,
    normalize: bool,
) -> Result<PathFit> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    if weights.len() != path.len() {
        return Err(Error::LengthMismatch {
            left: path.len(),
            right: weights.len(),
        });
    }
    let w = if normalize {
        normalized_weights(weights.values())
    } else {
        weights.values().to_vec()
    };
    let smoother = SplineSmoother::new(path.times(), &w, rho)?;
    let n = path.n();
    let frames = path.len();
    let shapes = path.shapes();

    let mut out_q = vec![vec![Vec2::ZERO; n]; frames];
    let mut out_base = vec![Vec2::ZERO; frames];
    let mut roughness = 0.0;
    let mut channel = vec![0.0; frames];

    let mut run = |get: &dyn Fn(&SrvShape) -> f64, channel: &mut Vec<f64>| -> Result<Vec<f64>> {
        for (slot, s) in channel.iter_mut().zip(shapes) {
            *slot = get(s);
        }
        let sp = smoother.fit(channel)?;
        roughness += sp.roughness();
        Ok(sp.knot_values().to_vec())
    };

    for i in 0..n {
        let xs = run(&|s| s.q()[i].x, &mut channel)?;
        let ys = run(&|s| s.q()[i].y, &mut channel)?;
        for f in 0..frames {
            out_q[f][i] = Vec2::new(xs[f], ys[f]);
        }
    }
    let bx = run(&|s| s.basepoint().x, &mut channel)?;
    let by = run(&|s| s.basepoint().y, &mut channel)?;
    for f in 0..frames {
        out_base[f] = Vec2::new(bx[f], by[f]);
    }

    let fitted = out_q
        .into_iter()
        .zip(out_base)
        .map(|(q, b)| SrvShape::new(q, b))
        .collect();
    Ok(PathFit {
        path: ShapePath::new(fitted, path.times().to_vec())?,
        roughness,
    })
}
