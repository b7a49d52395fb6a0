//! End-to-end shape filtering of a mask sequence.
//!
//! Stages: boundary extraction per frame, SRV transform, rigid alignment of
//! every frame to frame 0, a unity-weight pre-fit δ, per-frame weights, the
//! weighted smoothing fit γ, and integration back to Cartesian contours in
//! each frame's original orientation.

mod synth;

pub use synth::{generate_synthetic_sequence, EllipseState, OutlierBlob, ScenarioSpec, SyntheticSequence};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{extract_contour, Contour};
use crate::metrics::{rasterize, MaskStack};
use crate::spline::fit_path_with;
use crate::srv::{align_path, srv_inverse, srv_transform, Alignment, ShapePath};
use crate::weights::{
    bi3_weights, piecewise_weights, presmooth, residual_profile, sgaussian_weights, unity_weights,
    ResidualProfile, Scheme, WeightVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub n_samples: usize,
    pub rho: f64,
    pub rho_pre: f64,
    pub scheme: Scheme,
    pub a_const: f64,
    pub c_const: f64,
    pub outlier_flags: Option<Vec<bool>>,
    /// Seconds between frames; frame i sits at time i·dt.
    pub frame_interval: f64,
    /// Rescale weights to mean 1 before each spline solve.
    pub normalize_weights: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            n_samples: 100,
            rho: 0.6,
            rho_pre: 0.05,
            scheme: Scheme::Bi3,
            a_const: 1.0,
            c_const: 1.0,
            outlier_flags: None,
            frame_interval: 1.0,
            normalize_weights: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 8 {
            return Err(Error::InvalidSampleCount(self.n_samples));
        }
        for (name, v) in [("rho", self.rho), ("rho_pre", self.rho_pre)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (name, v) in [("A", self.a_const), ("C", self.c_const)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.frame_interval > 0.0 && self.frame_interval.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frame interval must be positive, got {}",
                self.frame_interval
            )));
        }
        if self.scheme == Scheme::Piecewise && self.outlier_flags.is_none() {
            return Err(Error::MissingOutlierFlags);
        }
        Ok(())
    }
}

/// Everything a filtering run produces.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// Filtered contours in image coordinates, one per input frame.
    pub contours: Vec<Contour>,
    pub weights: WeightVector,
    /// Fitted path γ in frame-0-aligned SRV coordinates.
    pub path: ShapePath,
    /// Input contours after tracing, resampling and seeding.
    pub input_contours: Vec<Contour>,
    /// Aligned input path φ.
    pub input_path: ShapePath,
    /// Pre-fit δ (Bi3 only).
    pub presmooth: Option<ShapePath>,
    pub residuals: Option<ResidualProfile>,
    pub alignments: Vec<Alignment>,
    /// Σ over fitted channels of ∫γ''².
    pub roughness: f64,
}

impl FilterOutput {
    /// Filtered contours rasterized onto `width` × `height` frames.
    pub fn masks(&self, width: usize, height: usize) -> MaskStack {
        let frames = self
            .contours
            .par_iter()
            .map(|c| rasterize(c, width, height))
            .collect();
        MaskStack::new(frames).expect("frames share one size")
    }
}

/// Boundary contours of every frame: traced, resampled to `n` points and
/// canonically seeded.
pub fn extract_contours(masks: &MaskStack, n: usize) -> Result<Vec<Contour>> {
    masks
        .frames()
        .par_iter()
        .map(|m| extract_contour(m, n))
        .collect()
}

/// Runs the filter on contours that were already extracted.
pub fn filter_contours(contours: Vec<Contour>, config: &FilterConfig) -> Result<FilterOutput> {
    config.validate()?;
    let frames = contours.len();
    if frames < 2 {
        return Err(Error::InsufficientFrames {
            need: 2,
            got: frames,
        });
    }
    if let Some(flags) = &config.outlier_flags {
        if config.scheme == Scheme::Piecewise && flags.len() != frames {
            return Err(Error::LengthMismatch {
                left: frames,
                right: flags.len(),
            });
        }
    }

    let shapes = contours
        .iter()
        .map(srv_transform)
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = (0..frames).map(|i| i as f64 * config.frame_interval).collect();
    let raw = ShapePath::new(shapes, times)?;
    let (aligned, alignments) = align_path(&raw)?;

    let mut delta = None;
    let mut residuals = None;
    let weights = match config.scheme {
        Scheme::Unity => unity_weights(frames)?,
        Scheme::Piecewise => piecewise_weights(
            config.outlier_flags.as_deref().ok_or(Error::MissingOutlierFlags)?,
            config.c_const,
        )?,
        Scheme::Bi3 => {
            let d = presmooth(&aligned, config.rho_pre)?;
            let profile = residual_profile(&aligned, &d)?;
            let w = bi3_weights(&profile, config.a_const)?;
            delta = Some(d);
            residuals = Some(profile);
            w
        }
        Scheme::SGaussian => sgaussian_weights(&aligned)?,
    };
    if weights.positive_count() == 0 {
        return Err(Error::AllWeightsZero);
    }

    let fit = fit_path_with(&aligned, &weights, config.rho, config.normalize_weights)?;

    // Undo each frame's own alignment: rotate about the centroid that the
    // alignment preserved, then restore the original seed index.
    let n = config.n_samples;
    let out_contours = fit
        .path
        .shapes()
        .par_iter()
        .zip(alignments.par_iter())
        .map(|(shape, t)| {
            let c = srv_inverse(shape).rotated_about(shape.centroid(), -t.angle);
            c.cyclic_shift((n - t.shift % n) % n)
        })
        .collect();

    Ok(FilterOutput {
        contours: out_contours,
        weights,
        path: fit.path,
        input_contours: contours,
        input_path: aligned,
        presmooth: delta,
        residuals,
        alignments,
        roughness: fit.roughness,
    })
}

/// Filters a mask sequence end to end.
pub fn filter_sequence(masks: &MaskStack, config: &FilterConfig) -> Result<FilterOutput> {
    config.validate()?;
    if masks.len() < 2 {
        return Err(Error::InsufficientFrames {
            need: 2,
            got: masks.len(),
        });
    }
    let contours = extract_contours(masks, config.n_samples)?;
    filter_contours(contours, config)
}
