//! Temporal shape filtering for cell segmentation sequences.
//!
//! Each frame's boundary contour is mapped to square-root-velocity (SRV)
//! coordinates, a weighted cubic smoothing spline is fitted across time in
//! those coordinates, and the fitted shapes are integrated back into
//! Cartesian contours. Robust per-frame weights let the filter replace
//! frames whose preliminary segmentation merged neighbouring cells.
//!
//! Module map:
//!
//! - [`ingest`]: masks to equidistant, canonically seeded contours.
//! - [`srv`]: SRV transform, inverse, alignment and shape distance.
//! - [`weights`]: unity, piecewise, Bi3 and sGaussian frame weights.
//! - [`spline`]: weighted natural cubic smoothing spline solver.
//! - [`pipeline`]: end-to-end filtering plus a synthetic sequence generator.
//! - [`metrics`]: rasterization, Dice and normalized MSE over mask stacks.
//! - [`embed`]: isomap projection of a shape path to the plane.
//! - [`io`]: PGM, CSV and SVG file formats.

pub mod embed;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod spline;
pub mod srv;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use ingest::{Contour, Mask};
pub use metrics::MaskStack;
pub use pipeline::{FilterConfig, FilterOutput};
pub use srv::{ShapePath, SrvShape};
pub use weights::{Scheme, WeightVector};

/// Lower-middle median: for even counts the smaller of the two middle
/// elements, so the result is always an attained value.
///
/// Returns `None` for an empty slice. NaNs sort last.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    let mid = (v.len() - 1) / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    Some(*m)
}

#[cfg(test)]
mod tests {
    use super::lower_median;

    #[test]
    fn lower_median_conventions() {
        assert_eq!(lower_median(&[]), None);
        assert_eq!(lower_median(&[3.0]), Some(3.0));
        assert_eq!(lower_median(&[4.0, 1.0]), Some(1.0));
        assert_eq!(lower_median(&[5.0, 1.0, 3.0]), Some(3.0));
        assert_eq!(lower_median(&[9.0, 1.0, 1.0, 1.0, 1.0]), Some(1.0));
        assert_eq!(lower_median(&[4.0, 3.0, 2.0, 1.0]), Some(2.0));
    }
}
