//! Square-root velocity (SRV) representation of closed contours.
//!
//! A contour β sampled at `N` equidistant parameter values s ∈ [0, 2π) maps
//! to q(s) = β̇(s) / √‖β̇(s)‖. Shapes are compared in flat SRV coordinates
//! after rigid alignment (best cyclic shift and best planar rotation), so
//! the straight-line geodesic between two aligned shapes has length equal to
//! the discrete L2 norm of their difference.

use std::cell::RefCell;
use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::ingest::{resample_contour, Contour};

/// Speeds below this are treated as a zero-length segment.
pub const MIN_SPEED: f64 = 1e-12;

/// SRV coordinates of one contour plus the Cartesian point β(0) needed to
/// integrate back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrvShape {
    q: Vec<Vec2>,
    basepoint: Vec2,
}

impl SrvShape {
    pub fn new(q: Vec<Vec2>, basepoint: Vec2) -> Self {
        SrvShape { q, basepoint }
    }

    pub fn q(&self) -> &[Vec2] {
        &self.q
    }

    pub fn basepoint(&self) -> Vec2 {
        self.basepoint
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Parameter step Δs = 2π/N.
    pub fn param_step(&self) -> f64 {
        TAU / self.q.len() as f64
    }

    /// True if some q vector is (numerically) zero.
    pub fn is_degenerate(&self) -> bool {
        self.q.iter().any(|v| v.norm() < MIN_SPEED)
    }

    pub fn is_finite(&self) -> bool {
        self.basepoint.is_finite() && self.q.iter().all(|v| v.is_finite())
    }

    /// Same shape moved in the plane (q is unchanged).
    pub fn translated(&self, v: Vec2) -> SrvShape {
        SrvShape::new(self.q.clone(), self.basepoint + v)
    }

    /// Squared L2 norm of q under the discrete inner product Σ⟨·,·⟩Δs.
    /// Equals the curve length of the represented contour.
    pub fn norm_sq(&self) -> f64 {
        self.q.iter().map(|v| v.norm_sq()).sum::<f64>() * self.param_step()
    }

    /// Closure-corrected Cartesian points obtained by integrating q‖q‖ with
    /// the trapezoidal rule from the basepoint.
    pub fn integrate(&self) -> Vec<Vec2> {
        let n = self.q.len();
        if n == 0 {
            return Vec::new();
        }
        let ds = self.param_step();
        let vel: Vec<Vec2> = self.q.iter().map(|&v| v * v.norm()).collect();
        let mut pts = Vec::with_capacity(n + 1);
        let mut p = self.basepoint;
        pts.push(p);
        for i in 1..=n {
            p += (vel[i - 1] + vel[i % n]) * (0.5 * ds);
            pts.push(p);
        }
        let gap = pts[n] - pts[0];
        pts.truncate(n);
        for (i, pt) in pts.iter_mut().enumerate() {
            *pt -= gap * (i as f64 / n as f64);
        }
        pts
    }

    /// Centroid of the integrated contour.
    pub fn centroid(&self) -> Vec2 {
        let pts = self.integrate();
        if pts.is_empty() {
            return self.basepoint;
        }
        let mut acc = Vec2::ZERO;
        for p in &pts {
            acc += *p;
        }
        acc / pts.len() as f64
    }

    /// Applies a rigid alignment: re-index by `shift`, then rotate every q
    /// vector by `angle`. The represented contour is rotated about its own
    /// centroid, so the basepoint moves to the rotated image of the new
    /// first point.
    pub fn transformed(&self, t: Alignment) -> SrvShape {
        let n = self.q.len();
        if n == 0 {
            return self.clone();
        }
        let k = t.shift % n;
        let pts = self.integrate();
        let center = {
            let mut acc = Vec2::ZERO;
            for p in &pts {
                acc += *p;
            }
            acc / n as f64
        };
        let mut q = self.q.clone();
        q.rotate_left(k);
        let (s, c) = t.angle.sin_cos();
        for v in &mut q {
            *v = Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y);
        }
        let basepoint = center + (pts[k] - center).rotate(t.angle);
        SrvShape { q, basepoint }
    }
}

/// Rigid alignment of a shape: cyclic index shift followed by a rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Alignment {
    pub shift: usize,
    pub angle: f64,
}

/// Time-indexed sequence of SRV shapes sharing one sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapePath {
    shapes: Vec<SrvShape>,
    times: Vec<f64>,
}

impl ShapePath {
    pub fn new(shapes: Vec<SrvShape>, times: Vec<f64>) -> Result<Self> {
        if shapes.len() != times.len() {
            return Err(Error::LengthMismatch {
                left: shapes.len(),
                right: times.len(),
            });
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingTimes(i + 1));
        }
        if let Some(first) = shapes.first() {
            if let Some(bad) = shapes.iter().find(|s| s.n() != first.n()) {
                return Err(Error::SampleCountMismatch {
                    left: first.n(),
                    right: bad.n(),
                });
            }
        }
        Ok(ShapePath { shapes, times })
    }

    /// Path sampled at frame indices 0, 1, 2, ...
    pub fn with_unit_times(shapes: Vec<SrvShape>) -> Result<Self> {
        let times = (0..shapes.len()).map(|i| i as f64).collect();
        ShapePath::new(shapes, times)
    }

    pub fn shapes(&self) -> &[SrvShape] {
        &self.shapes
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Shared sample count (0 for an empty path).
    pub fn n(&self) -> usize {
        self.shapes.first().map_or(0, SrvShape::n)
    }

    pub fn into_shapes(self) -> Vec<SrvShape> {
        self.shapes
    }
}

/// SRV transform of an equidistant closed contour.
///
/// β̇ is taken by central differences on the cyclic point list with step
/// Δs = 2π/N; the basepoint is the first contour point.
pub fn srv_transform(contour: &Contour) -> Result<SrvShape> {
    let pts = contour.points();
    let n = pts.len();
    if n < 8 {
        return Err(Error::InvalidSampleCount(n));
    }
    for i in 0..n {
        if (pts[(i + 1) % n] - pts[i]).norm() < MIN_SPEED {
            return Err(Error::DegenerateSegment { index: i });
        }
    }
    let ds = TAU / n as f64;
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let vel = (pts[(i + 1) % n] - pts[(i + n - 1) % n]) / (2.0 * ds);
        let speed = vel.norm();
        if speed < MIN_SPEED {
            return Err(Error::DegenerateSegment { index: i });
        }
        q.push(vel / speed.sqrt());
    }
    Ok(SrvShape::new(q, pts[0]))
}

/// Integrates an SRV shape back to an equidistant Cartesian contour.
///
/// A zero field yields every point at the basepoint; check
/// [`Contour::is_degenerate`] on the result.
pub fn srv_inverse(shape: &SrvShape) -> Contour {
    let pts = shape.integrate();
    let n = pts.len();
    let raw = Contour::new(pts);
    if raw.is_degenerate() {
        return Contour::new(vec![shape.basepoint; n]);
    }
    match resample_contour(&raw, n) {
        Ok(c) => c,
        Err(_) => raw,
    }
}

fn check_same_n(a: &SrvShape, b: &SrvShape) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::SampleCountMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Σᵢ conj(target[i+k])·reference[i] for every cyclic shift k, treating
/// planar vectors as complex numbers. |C_k| is the best achievable
/// correlation at shift k and arg C_k the rotation that attains it.
fn shift_correlations(reference: &[Vec2], target: &[Vec2]) -> Vec<Complex64> {
    let n = reference.len();
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    });
    let mut r: Vec<Complex64> = reference.iter().map(|v| Complex64::new(v.x, v.y)).collect();
    let mut t: Vec<Complex64> = target.iter().map(|v| Complex64::new(v.x, v.y)).collect();
    fwd.process(&mut r);
    fwd.process(&mut t);
    // IFFT(conj(R)·T)[k] = Σ conj(r_i) t_{i+k}; our C_k is its conjugate.
    let mut prod: Vec<Complex64> = r.iter().zip(&t).map(|(a, b)| a.conj() * b).collect();
    inv.process(&mut prod);
    prod.iter().map(|c| c.conj()).collect()
}

fn correlation_at(reference: &[Vec2], target: &[Vec2], k: usize) -> Complex64 {
    let n = reference.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let t = target[(i + k) % n];
        let r = reference[i];
        acc += Complex64::new(t.dot(r), t.cross(r));
    }
    acc
}

/// Best rigid alignment of `target` onto `reference`: exhaustive over cyclic
/// shifts (via FFT cross-correlation) with the optimal rotation per shift.
pub fn best_alignment(reference: &SrvShape, target: &SrvShape) -> Result<Alignment> {
    check_same_n(reference, target)?;
    let n = reference.n();
    if n == 0 {
        return Ok(Alignment::default());
    }
    let corr = shift_correlations(&reference.q, &target.q);
    let peak = corr.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // FFT rounding can reorder near-ties; rescore the leading candidates
    // exactly and prefer the smallest shift among equals.
    let cutoff = peak * (1.0 - 1e-9) - 1e-300;
    let mut best: Option<(usize, Complex64)> = None;
    let mut examined = 0;
    for (k, c) in corr.iter().enumerate() {
        if c.norm() < cutoff {
            continue;
        }
        let exact = correlation_at(&reference.q, &target.q, k);
        if best.map_or(true, |(_, b)| exact.norm() > b.norm() * (1.0 + 1e-12)) {
            best = Some((k, exact));
        }
        examined += 1;
        if examined >= 8 {
            break;
        }
    }
    let (shift, c) = best.unwrap_or((0, Complex64::new(0.0, 0.0)));
    let angle = if c.norm() > 0.0 { c.im.atan2(c.re) } else { 0.0 };
    Ok(Alignment { shift, angle })
}

/// `target` after the cyclic shift and rotation that bring its q closest to
/// `reference.q` in L2.
pub fn align(reference: &SrvShape, target: &SrvShape) -> Result<SrvShape> {
    let t = best_alignment(reference, target)?;
    Ok(target.transformed(t))
}

/// Discrete L2 distance between q fields without any alignment.
pub fn l2_distance(a: &SrvShape, b: &SrvShape) -> Result<f64> {
    check_same_n(a, b)?;
    if a.n() == 0 {
        return Ok(0.0);
    }
    let ss: f64 = a.q.iter().zip(&b.q).map(|(x, y)| (*x - *y).norm_sq()).sum();
    Ok((ss * a.param_step()).sqrt())
}

/// Shape distance d_g: L2 norm of `a.q − align(a, b).q` under Σ⟨·,·⟩Δs.
pub fn geodesic_distance(a: &SrvShape, b: &SrvShape) -> Result<f64> {
    check_same_n(a, b)?;
    let n = a.n();
    if n == 0 {
        return Ok(0.0);
    }
    let t = best_alignment(a, b)?;
    let (s, c) = t.angle.sin_cos();
    let mut ss = 0.0;
    for i in 0..n {
        let v = b.q[(i + t.shift) % n];
        let rv = Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y);
        ss += (a.q[i] - rv).norm_sq();
    }
    Ok((ss * a.param_step()).sqrt())
}

/// Aligns every shape of `path` to its first frame; returns the aligned path
/// and the per-frame alignments (identity for frame 0).
pub fn align_path(path: &ShapePath) -> Result<(ShapePath, Vec<Alignment>)> {
    let Some(reference) = path.shapes.first() else {
        return Err(Error::EmptyPath);
    };
    let mut shapes = Vec::with_capacity(path.len());
    let mut transforms = Vec::with_capacity(path.len());
    shapes.push(reference.clone());
    transforms.push(Alignment::default());
    for s in &path.shapes[1..] {
        let t = best_alignment(reference, s)?;
        shapes.push(s.transformed(t));
        transforms.push(t);
    }
    Ok((ShapePath::new(shapes, path.times.clone())?, transforms))
}
