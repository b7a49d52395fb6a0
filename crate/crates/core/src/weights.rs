//! Per-frame data-term weights.
//!
//! Four schemes are available:
//!
//! - unity: every frame weighs 1;
//! - piecewise: a constant `C` except for externally flagged outliers,
//!   which get 0;
//! - Bi3: a tricube-style robust weight of each frame's shape distance to a
//!   heavily smoothed pre-fit δ, `A·(1 − (r/(median r + τ))³)³`, clamped at 0;
//! - sGaussian: a Gaussian kernel of each frame's shape distance to the
//!   component-wise median shape.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::lower_median;
use crate::spline::fit_path;
use crate::srv::{geodesic_distance, ShapePath, SrvShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Unity,
    Piecewise,
    Bi3,
    #[serde(rename = "sgaussian")]
    SGaussian,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Unity, Scheme::Piecewise, Scheme::Bi3, Scheme::SGaussian];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Unity => "unity",
            Scheme::Piecewise => "piecewise",
            Scheme::Bi3 => "bi3",
            Scheme::SGaussian => "sgaussian",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unity" => Ok(Scheme::Unity),
            "piecewise" => Ok(Scheme::Piecewise),
            "bi3" => Ok(Scheme::Bi3),
            "sgaussian" => Ok(Scheme::SGaussian),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Non-negative per-frame weights tagged with the scheme that made them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w: Vec<f64>,
    scheme: Scheme,
}

impl WeightVector {
    pub fn new(w: Vec<f64>, scheme: Scheme) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidLength(0));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        Ok(WeightVector { w, scheme })
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn positive_count(&self) -> usize {
        self.w.iter().filter(|&&v| v > 0.0).count()
    }
}

pub fn unity_weights(n_frames: usize) -> Result<WeightVector> {
    WeightVector::new(vec![1.0; n_frames], Scheme::Unity)
}

/// `c` where the frame is not flagged, 0 where it is.
pub fn piecewise_weights(outlier_flags: &[bool], c: f64) -> Result<WeightVector> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    WeightVector::new(
        outlier_flags
            .iter()
            .map(|&outlier| if outlier { 0.0 } else { c })
            .collect(),
        Scheme::Piecewise,
    )
}

/// Residual distances to the pre-fit and their robust dispersion summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    pub r: Vec<f64>,
    pub median_r: f64,
    /// Mean absolute deviation of r from its median.
    pub sigma_r: f64,
    /// Tolerance σ_r + (σ_r − min r).
    pub tau: f64,
}

impl ResidualProfile {
    pub fn from_residuals(r: Vec<f64>) -> Result<Self> {
        let median_r = lower_median(&r).ok_or(Error::EmptyPath)?;
        if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "residuals must be finite and non-negative".into(),
            ));
        }
        let n = r.len() as f64;
        let sigma_r = r.iter().map(|v| (v - median_r).abs()).sum::<f64>() / n;
        let min_r = r.iter().copied().fold(f64::INFINITY, f64::min);
        let tau = sigma_r + (sigma_r - min_r);
        Ok(ResidualProfile {
            r,
            median_r,
            sigma_r,
            tau,
        })
    }
}

/// Shape distance of every frame of `path` to the same frame of `presmooth`.
pub fn residual_profile(path: &ShapePath, presmooth: &ShapePath) -> Result<ResidualProfile> {
    if path.len() != presmooth.len() {
        return Err(Error::LengthMismatch {
            left: path.len(),
            right: presmooth.len(),
        });
    }
    let r = path
        .shapes()
        .iter()
        .zip(presmooth.shapes())
        .map(|(phi, delta)| geodesic_distance(delta, phi))
        .collect::<Result<Vec<_>>>()?;
    ResidualProfile::from_residuals(r)
}

/// Bi3 robust weights, `A·(1 − (r/(median r + τ))³)³` clamped below at 0.
///
/// The denominator is guarded at `max(median + τ, 1e-9·(1 + median))`; it
/// only reaches the guard when every residual is equal.
pub fn bi3_weights(profile: &ResidualProfile, a: f64) -> Result<WeightVector> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("A must be positive, got {a}")));
    }
    let eps = 1e-9 * (1.0 + profile.median_r);
    let denom = (profile.median_r + profile.tau).max(eps);
    let w = profile
        .r
        .iter()
        .map(|&r| {
            let u = r / denom;
            let inner = 1.0 - u * u * u;
            if inner <= 0.0 {
                0.0
            } else {
                a * inner * inner * inner
            }
        })
        .collect();
    WeightVector::new(w, Scheme::Bi3)
}

/// Component-wise lower-middle median of every SRV coordinate (and of the
/// basepoints) over the frames of an aligned path.
pub fn median_shape(path: &ShapePath) -> Result<SrvShape> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let n = path.n();
    let shapes = path.shapes();
    let mut column = vec![0.0; shapes.len()];
    let mut med = |get: &dyn Fn(&SrvShape) -> f64| -> f64 {
        for (slot, s) in column.iter_mut().zip(shapes) {
            *slot = get(s);
        }
        lower_median(&column).expect("non-empty path")
    };
    let q = (0..n)
        .map(|i| Vec2::new(med(&|s| s.q()[i].x), med(&|s| s.q()[i].y)))
        .collect();
    let base = Vec2::new(med(&|s| s.basepoint().x), med(&|s| s.basepoint().y));
    Ok(SrvShape::new(q, base))
}

/// Variance below which the sGaussian kernel falls back to unity weights.
pub const SGAUSSIAN_MIN_VARIANCE: f64 = 1e-18;

/// Gaussian kernel weights from distances to the median shape:
/// `exp(−d²/2σ²)/√(2πσ²)` with σ² the mean squared distance.
pub fn sgaussian_from_distances(d: &[f64]) -> Result<WeightVector> {
    if d.is_empty() {
        return Err(Error::EmptyPath);
    }
    let var = d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64;
    if !(var >= SGAUSSIAN_MIN_VARIANCE) {
        return WeightVector::new(vec![1.0; d.len()], Scheme::SGaussian);
    }
    let peak = 1.0 / (std::f64::consts::TAU * var).sqrt();
    WeightVector::new(
        d.iter().map(|x| peak * (-x * x / (2.0 * var)).exp()).collect(),
        Scheme::SGaussian,
    )
}

/// sGaussian weights of an aligned path.
pub fn sgaussian_weights(path: &ShapePath) -> Result<WeightVector> {
    let median = median_shape(path)?;
    let d = path
        .shapes()
        .iter()
        .map(|s| geodesic_distance(s, &median))
        .collect::<Result<Vec<_>>>()?;
    sgaussian_from_distances(&d)
}

/// Constants shared by the weighting schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Bi3 amplitude A.
    pub a: f64,
    /// Piecewise constant C.
    pub c: f64,
    /// ρ of the unity-weight pre-fit δ used by Bi3.
    pub rho_pre: f64,
    pub outlier_flags: Option<Vec<bool>>,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            a: 1.0,
            c: 1.0,
            rho_pre: 0.05,
            outlier_flags: None,
        }
    }
}

/// Unity-weight smoothing-spline pre-fit δ of an aligned path.
pub fn presmooth(path: &ShapePath, rho_pre: f64) -> Result<ShapePath> {
    fit_path(path, &unity_weights(path.len())?, rho_pre)
}

/// Weights of `scheme` for an aligned path.
pub fn scheme_weights(path: &ShapePath, scheme: Scheme, params: &WeightParams) -> Result<WeightVector> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    match scheme {
        Scheme::Unity => unity_weights(path.len()),
        Scheme::Piecewise => {
            let flags = params
                .outlier_flags
                .as_deref()
                .ok_or(Error::MissingOutlierFlags)?;
            if flags.len() != path.len() {
                return Err(Error::LengthMismatch {
                    left: path.len(),
                    right: flags.len(),
                });
            }
            piecewise_weights(flags, params.c)
        }
        Scheme::Bi3 => {
            let delta = presmooth(path, params.rho_pre)?;
            bi3_weights(&residual_profile(path, &delta)?, params.a)
        }
        Scheme::SGaussian => sgaussian_weights(path),
    }
}
