//! Seeded synthetic sequences: one elliptical cell moving and deforming
//! slowly, with optional boundary noise and frames where a second, touching
//! blob is merged into the segmentation.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::ingest::{Contour, Mask};
use crate::metrics::{rasterize, MaskStack};

/// Highest harmonic of the radial boundary noise (lowest is 2).
const NOISE_HARMONICS: usize = 8;
const POLYGON_VERTICES: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseState {
    pub center: Vec2,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Orientation of the major axis, radians.
    pub angle: f64,
}

impl EllipseState {
    /// Boundary point at ellipse parameter `phi` pushed outward by `offset`
    /// along the scaled radius.
    fn point(&self, phi: f64, offset: f64) -> Vec2 {
        let local = Vec2::new(
            (self.semi_major + offset) * phi.cos(),
            (self.semi_minor + offset) * phi.sin(),
        );
        self.center + local.rotate(self.angle)
    }

    /// Distance from the centre to the boundary in direction `dir`.
    fn radius_towards(&self, dir: f64) -> f64 {
        let local = dir - self.angle;
        let (s, c) = local.sin_cos();
        let (a, b) = (self.semi_major, self.semi_minor);
        a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt()
    }
}

/// A disc merged into the segmentation of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierBlob {
    pub frame: usize,
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub width: usize,
    pub height: usize,
    /// One state per frame; its length is the frame count.
    pub trajectory: Vec<EllipseState>,
    pub outliers: Vec<OutlierBlob>,
    /// Standard deviation of the radial boundary noise, pixels.
    pub noise: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn frames(&self) -> usize {
        self.trajectory.len()
    }

    /// A randomized but seed-determined scenario: a cell of 10–22 px
    /// diameter drifting a few pixels, axes breathing by about ±10 %,
    /// orientation drifting slowly, and `n_outliers` distinct frames
    /// (never frame 0) with a neighbouring disc merged in.
    pub fn random(seed: u64, frames: usize, n_outliers: usize, noise: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
        let (width, height) = (72usize, 72usize);
        let start = Vec2::new(
            width as f64 / 2.0 + rng.gen_range(-2.0..2.0),
            height as f64 / 2.0 + rng.gen_range(-2.0..2.0),
        );
        let drift = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let a0 = rng.gen_range(8.0..11.0);
        let b0 = rng.gen_range(5.5..7.5);
        let angle0 = rng.gen_range(0.0..TAU);
        let spin = rng.gen_range(-0.3..0.3);
        let phase = rng.gen_range(0.0..TAU);
        let span = (frames.max(2) - 1) as f64;
        let trajectory: Vec<EllipseState> = (0..frames)
            .map(|i| {
                let u = i as f64 / span;
                let breathe = 0.1 * (TAU * u + phase).sin();
                EllipseState {
                    center: start + drift * u,
                    semi_major: a0 * (1.0 + breathe),
                    semi_minor: b0 * (1.0 + 0.8 * breathe),
                    angle: angle0 + spin * u,
                }
            })
            .collect();

        let mut candidates: Vec<usize> = (1..frames).collect();
        let mut outliers = Vec::new();
        for _ in 0..n_outliers.min(candidates.len()) {
            let frame = candidates.swap_remove(rng.gen_range(0..candidates.len()));
            let cell = trajectory[frame];
            let radius = cell.semi_minor * rng.gen_range(0.85..1.1);
            let dir = rng.gen_range(0.0..TAU);
            let reach = cell.radius_towards(dir) + 0.5 * radius;
            outliers.push(OutlierBlob {
                frame,
                center: cell.center + Vec2::new(dir.cos(), dir.sin()) * reach,
                radius,
            });
        }
        outliers.sort_by_key(|o| o.frame);
        ScenarioSpec {
            width,
            height,
            trajectory,
            outliers,
            noise,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectory.is_empty() {
            return Err(Error::InvalidParameter("scenario has no frames".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("image size must be positive".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise {} must be >= 0", self.noise)));
        }
        for e in &self.trajectory {
            if !(e.semi_major > 0.0 && e.semi_minor > 0.0) || !e.center.is_finite() {
                return Err(Error::InvalidParameter("ellipse axes must be positive".into()));
            }
        }
        for o in &self.outliers {
            if o.frame >= self.frames() {
                return Err(Error::InvalidParameter(format!(
                    "outlier frame {} beyond {} frames",
                    o.frame,
                    self.frames()
                )));
            }
            if !(o.radius > 0.0) {
                return Err(Error::InvalidParameter("blob radius must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Noisy segmentation plus the clean single-cell ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub masks: MaskStack,
    pub truth: MaskStack,
    /// Per-frame flag: a blob was merged into this frame.
    pub outlier_flags: Vec<bool>,
}

fn polygon(cell: &EllipseState, radial: &dyn Fn(f64) -> f64) -> Contour {
    Contour::new(
        (0..POLYGON_VERTICES)
            .map(|i| {
                let phi = TAU * i as f64 / POLYGON_VERTICES as f64;
                cell.point(phi, radial(phi))
            })
            .collect(),
    )
}

pub(crate) fn disc(center: Vec2, radius: f64) -> Contour {
    Contour::new(
        (0..POLYGON_VERTICES)
            .map(|i| {
                let phi = TAU * i as f64 / POLYGON_VERTICES as f64;
                center + Vec2::new(phi.cos(), phi.sin()) * radius
            })
            .collect(),
    )
}

fn union(a: &Mask, b: &Mask) -> Mask {
    Mask::from_fn(a.width(), a.height(), |x, y| a.get(x, y) || b.get(x, y))
}

/// Renders the scenario. Identical specs give bit-identical stacks.
pub fn generate_synthetic_sequence(spec: &ScenarioSpec) -> Result<SyntheticSequence> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coef_sd = spec.noise / ((NOISE_HARMONICS - 1) as f64).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut masks = Vec::with_capacity(spec.frames());
    let mut truth = Vec::with_capacity(spec.frames());
    let mut flags = vec![false; spec.frames()];
    for (frame, cell) in spec.trajectory.iter().enumerate() {
        let clean = rasterize(&polygon(cell, &|_| 0.0), spec.width, spec.height);
        let coefs: Vec<(f64, f64)> = (2..=NOISE_HARMONICS)
            .map(|_| {
                (
                    coef_sd * normal.sample(&mut rng),
                    coef_sd * normal.sample(&mut rng),
                )
            })
            .collect();
        let mut observed = if spec.noise > 0.0 {
            let radial = |phi: f64| -> f64 {
                coefs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let h = (k + 2) as f64;
                        a * (h * phi).cos() + b * (h * phi).sin()
                    })
                    .sum()
            };
            rasterize(&polygon(cell, &radial), spec.width, spec.height)
        } else {
            clean.clone()
        };
        for blob in spec.outliers.iter().filter(|o| o.frame == frame) {
            let extra = rasterize(&disc(blob.center, blob.radius), spec.width, spec.height);
            observed = union(&observed, &extra);
            flags[frame] = true;
        }
        masks.push(observed);
        truth.push(clean);
    }
    Ok(SyntheticSequence {
        masks: MaskStack::new(masks)?,
        truth: MaskStack::new(truth)?,
        outlier_flags: flags,
    })
}
