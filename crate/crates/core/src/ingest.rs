//! Mask ingestion: binary masks to closed, equidistant boundary contours.
//!
//! A frame goes through three steps before it reaches shape space:
//! [`trace_boundary`] extracts the outer pixel chain of the dominant
//! component, [`resample_contour`] places `n` points with equal chord
//! spacing on that chain, and [`canonical_seed`] rotates the point list so
//! index 0 sits at a reproducible position.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{perimeter, signed_area, vertex_centroid, Vec2};

/// Binary occupancy grid, row-major, values in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask data has {} cells, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::format("mask", "values must be 0 or 1"));
        }
        Ok(Mask {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    /// Build a mask from a predicate over (column, row).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(x, y)));
            }
        }
        Mask {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = u8::from(on);
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Same mask moved by whole pixels; content shifted past the border is lost.
    pub fn shifted(&self, dx: isize, dy: isize) -> Mask {
        Mask::from_fn(self.width, self.height, |x, y| {
            let sx = x as isize - dx;
            let sy = y as isize - dy;
            sx >= 0
                && sy >= 0
                && (sx as usize) < self.width
                && (sy as usize) < self.height
                && self.get(sx as usize, sy as usize)
        })
    }

    /// 4-connected components in first-scanned order, as flat pixel indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![false; self.data.len()];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.data.len() {
            if self.data[start] == 0 || label[start] {
                continue;
            }
            label[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(idx) = queue.pop_front() {
                comp.push(idx);
                let (x, y) = (idx % self.width, idx / self.width);
                let mut visit = |nx: usize, ny: usize| {
                    let n = ny * self.width + nx;
                    if self.data[n] != 0 && !label[n] {
                        label[n] = true;
                        queue.push_back(n);
                    }
                };
                if x > 0 {
                    visit(x - 1, y);
                }
                if x + 1 < self.width {
                    visit(x + 1, y);
                }
                if y > 0 {
                    visit(x, y - 1);
                }
                if y + 1 < self.height {
                    visit(x, y + 1);
                }
            }
            out.push(comp);
        }
        out
    }

    /// Mask holding only the largest 4-connected component. Ties go to the
    /// component whose first pixel comes first in raster order.
    pub fn largest_component(&self) -> Option<Mask> {
        let comps = self.components();
        let mut best: Option<&Vec<usize>> = None;
        for c in &comps {
            if best.map_or(true, |b| c.len() > b.len()) {
                best = Some(c);
            }
        }
        let best = best?;
        let mut m = Mask::zeros(self.width, self.height);
        for &idx in best {
            m.data[idx] = 1;
        }
        Some(m)
    }
}

/// Closed planar curve given by its ordered vertices (pixel units).
/// The last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    points: Vec<Vec2>,
}

impl Contour {
    pub fn new(points: Vec<Vec2>) -> Self {
        Contour { points }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.points)
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn centroid(&self) -> Vec2 {
        vertex_centroid(&self.points)
    }

    /// A contour collapsed to (numerically) a single point.
    pub fn is_degenerate(&self) -> bool {
        self.perimeter() < 1e-12
    }

    pub fn translated(&self, v: Vec2) -> Contour {
        Contour::new(self.points.iter().map(|&p| p + v).collect())
    }

    /// Rotation about `center` by `angle` radians.
    pub fn rotated_about(&self, center: Vec2, angle: f64) -> Contour {
        Contour::new(
            self.points
                .iter()
                .map(|&p| center + (p - center).rotate(angle))
                .collect(),
        )
    }

    /// Cyclic re-indexing so that old index `k` becomes index 0.
    pub fn cyclic_shift(&self, k: usize) -> Contour {
        let mut pts = self.points.clone();
        if !pts.is_empty() {
            let k = k % pts.len();
            pts.rotate_left(k);
        }
        Contour::new(pts)
    }

    /// Reverses traversal direction while keeping the first point.
    pub fn reversed(&self) -> Contour {
        let mut pts = Vec::with_capacity(self.points.len());
        if let Some(&first) = self.points.first() {
            pts.push(first);
            pts.extend(self.points[1..].iter().rev());
        }
        Contour::new(pts)
    }

    /// Lengths of the closing chords between consecutive points.
    pub fn chord_lengths(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .collect()
    }

    /// Largest relative deviation of a chord length from the mean chord.
    pub fn spacing_irregularity(&self) -> f64 {
        let chords = self.chord_lengths();
        if chords.is_empty() {
            return 0.0;
        }
        let mean = chords.iter().sum::<f64>() / chords.len() as f64;
        if mean == 0.0 {
            return 0.0;
        }
        chords
            .iter()
            .map(|c| (c - mean).abs() / mean)
            .fold(0.0, f64::max)
    }
}

// Moore neighbourhood, clockwise on screen (x right, y down), starting west.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Outer boundary of the largest 4-connected component as a pixel chain.
///
/// Moore-neighbour tracing with Jacob's stopping criterion. Points are
/// pixel centres `(column, row)`; the chain is oriented so its shoelace
/// area is positive.
pub fn trace_boundary(mask: &Mask) -> Result<Contour> {
    let comp = mask.largest_component().ok_or(Error::EmptyMask)?;
    let (w, h) = (comp.width as isize, comp.height as isize);
    let inside = |x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && x < w && y < h && comp.get(x as usize, y as usize)
    };

    let first = comp
        .data
        .iter()
        .position(|&v| v != 0)
        .ok_or(Error::EmptyMask)?;
    let start = ((first % comp.width) as isize, (first / comp.width) as isize);
    // Raster order guarantees the west neighbour is background.
    let start_back = (start.0 - 1, start.1);

    let mut chain = vec![start];
    let mut current = start;
    let mut back = start_back;
    let guard = 4 * comp.area() + 16;
    for _ in 0..guard {
        let dir = RING
            .iter()
            .position(|&(dx, dy)| (current.0 + dx, current.1 + dy) == back)
            .expect("backtrack pixel is always a Moore neighbour");
        let mut next = None;
        for i in 1..=8 {
            let (dx, dy) = RING[(dir + i) % 8];
            let cand = (current.0 + dx, current.1 + dy);
            if inside(cand.0, cand.1) {
                let (bx, by) = RING[(dir + i - 1) % 8];
                next = Some((cand, (current.0 + bx, current.1 + by)));
                break;
            }
        }
        let Some((pixel, new_back)) = next else {
            break; // isolated pixel
        };
        if pixel == start && new_back == start_back {
            break;
        }
        chain.push(pixel);
        current = pixel;
        back = new_back;
    }
    if chain.len() > 1 && chain.last() == Some(&start) {
        chain.pop();
    }

    let mut distinct = chain.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::DegenerateComponent {
            boundary: distinct.len(),
        });
    }

    let contour = Contour::new(
        chain
            .into_iter()
            .map(|(x, y)| Vec2::new(x as f64, y as f64))
            .collect(),
    );
    Ok(if contour.signed_area() < 0.0 {
        contour.reversed()
    } else {
        contour
    })
}

/// Closed polyline with zero-length edges removed and cumulative arclength.
struct Polyline {
    verts: Vec<Vec2>,
    cum: Vec<f64>,
    length: f64,
}

impl Polyline {
    fn new(points: &[Vec2]) -> Self {
        let mut verts: Vec<Vec2> = Vec::with_capacity(points.len());
        for &p in points {
            if verts.last().map_or(true, |&q| (p - q).norm() > 0.0) {
                verts.push(p);
            }
        }
        while verts.len() > 1 && (verts[0] - verts[verts.len() - 1]).norm() == 0.0 {
            verts.pop();
        }
        let m = verts.len();
        let mut cum = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..m {
            acc += (verts[(i + 1) % m] - verts[i]).norm();
            cum.push(acc);
        }
        Polyline {
            verts,
            cum,
            length: acc,
        }
    }

    fn seg(&self, k: usize) -> (Vec2, Vec2) {
        let m = self.verts.len();
        (self.verts[k % m], self.verts[(k + 1) % m])
    }

    /// Unwrapped arclength at (segment `k`, fraction `u`).
    fn position(&self, k: usize, u: f64) -> f64 {
        let m = self.verts.len();
        let laps = (k / m) as f64;
        let j = k % m;
        laps * self.length + self.cum[j] + u * (self.cum[j + 1] - self.cum[j])
    }

    /// First point after (`k`, `u`) along the curve at Euclidean distance `d`
    /// from the current point. Returns the new (segment, fraction, point).
    fn chord_step(&self, k: usize, u: f64, d: f64) -> Option<(usize, f64, Vec2)> {
        let (a0, b0) = self.seg(k);
        let c = a0 + (b0 - a0) * u;
        let limit = k + 2 * self.verts.len() + 2;
        let d2 = d * d;
        let mut seg = k;
        // Segments are scanned in order, so the first one whose end is at
        // distance >= d starts inside the circle and brackets one crossing.
        // Clamping the root absorbs rounding when the chord ends on a vertex.
        while seg < limit {
            let (a, b) = self.seg(seg);
            if (b - c).norm_sq() >= d2 {
                let e = b - a;
                let f = a - c;
                let qa = e.norm_sq();
                let qb = 2.0 * f.dot(e);
                let qc = f.norm_sq() - d2;
                let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
                let lower = if seg == k { u } else { 0.0 };
                let root = ((-qb + disc.sqrt()) / (2.0 * qa)).clamp(lower, 1.0);
                return Some((seg, root, a + e * root));
            }
            seg += 1;
        }
        None
    }

    /// Walk `n` chords of length `d` from the start; returns the visited
    /// points and the unwrapped arclength reached after the last chord.
    fn walk(&self, n: usize, d: f64) -> Option<(Vec<Vec2>, f64)> {
        let mut pts = Vec::with_capacity(n);
        let (mut k, mut u) = (0usize, 0.0f64);
        pts.push(self.verts[0]);
        for step in 0..n {
            let (k2, u2, p) = self.chord_step(k, u, d)?;
            k = k2;
            u = u2;
            if step + 1 < n {
                pts.push(p);
            }
        }
        Some((pts, self.position(k, u)))
    }
}

/// Resamples a closed polyline to `n` points with equal chord spacing.
///
/// Points lie on the input polyline, start at its first point, and follow
/// its traversal direction. The common chord length is found by bisection
/// so that `n` chords close the loop exactly; an already-equidistant
/// `n`-point contour is returned unchanged (up to rounding), which makes the
/// operation idempotent. Where the chord cuts a corner of the input the
/// output perimeter is shorter than the input's.
pub fn resample_contour(contour: &Contour, n: usize) -> Result<Contour> {
    if n < 8 {
        return Err(Error::InvalidSampleCount(n));
    }
    let poly = Polyline::new(contour.points());
    if poly.verts.len() < 3 {
        return Err(Error::TooFewPoints);
    }
    let total = poly.length;

    let residual = |d: f64| -> f64 {
        match poly.walk(n, d) {
            Some((_, reached)) => reached - total,
            None => f64::INFINITY,
        }
    };

    // Chords never exceed arclength, so n chords of length L/n reach at
    // least L; tiny chords fall short.
    let mut hi = total / n as f64;
    let mut lo = 0.0;
    let mut hi_res = residual(hi);
    if hi_res != 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let r = residual(mid);
            if r >= 0.0 {
                hi = mid;
                hi_res = r;
                if r == 0.0 {
                    break;
                }
            } else {
                lo = mid;
            }
        }
    }
    let chosen = if lo > 0.0 && residual(lo).abs() < hi_res.abs() {
        lo
    } else {
        hi
    };
    let (pts, _) = poly.walk(n, chosen).ok_or(Error::TooFewPoints)?;
    Ok(Contour::new(pts))
}

/// Angle of `p` around `center` in [0, 2π).
fn polar_angle(p: Vec2, center: Vec2) -> f64 {
    let a = (p.y - center.y).atan2(p.x - center.x);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Index of the point with the smallest polar angle about the centroid.
pub fn canonical_seed_index(contour: &Contour) -> usize {
    let center = contour.centroid();
    let mut best = 0;
    let mut best_angle = f64::INFINITY;
    for (i, &p) in contour.points().iter().enumerate() {
        let a = polar_angle(p, center);
        if a < best_angle {
            best_angle = a;
            best = i;
        }
    }
    best
}

/// Rotates the point list so index 0 has the smallest polar angle about the
/// vertex centroid, measured from the positive x axis. Ties keep the lower
/// index.
pub fn canonical_seed(contour: &Contour) -> Contour {
    contour.cyclic_shift(canonical_seed_index(contour))
}

/// Trace, resample to `n` points and canonically seed one frame.
pub fn extract_contour(mask: &Mask, n: usize) -> Result<Contour> {
    let traced = trace_boundary(mask)?;
    let resampled = resample_contour(&traced, n)?;
    Ok(canonical_seed(&resampled))
}
