//! Volumetric evaluation of filtered mask stacks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Contour, Mask};

/// Time-indexed masks sharing one size, treated as a single 3D volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskStack {
    frames: Vec<Mask>,
}

impl MaskStack {
    pub fn new(frames: Vec<Mask>) -> Result<Self> {
        if let Some(first) = frames.first() {
            for (i, f) in frames.iter().enumerate() {
                if f.width() != first.width() || f.height() != first.height() {
                    return Err(Error::DimensionMismatch(format!(
                        "frame {i} is {}x{}, frame 0 is {}x{}",
                        f.width(),
                        f.height(),
                        first.width(),
                        first.height()
                    )));
                }
            }
        }
        Ok(MaskStack { frames })
    }

    pub fn frames(&self) -> &[Mask] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Mask> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames.first().map_or(0, Mask::width)
    }

    pub fn height(&self) -> usize {
        self.frames.first().map_or(0, Mask::height)
    }

    /// Z: pixel count over all frames.
    pub fn total_pixels(&self) -> usize {
        self.width() * self.height() * self.frames.len()
    }

    /// Foreground voxel count.
    pub fn volume(&self) -> usize {
        self.frames.iter().map(Mask::area).sum()
    }
}

/// Fills the closed polygon with the even–odd rule: pixel (x, y), whose
/// centre sits at integer coordinates, is set iff the centre is inside.
/// Scanlines are offset by 1e-9 so vertices on a pixel row resolve
/// consistently.
pub fn rasterize(contour: &Contour, width: usize, height: usize) -> Mask {
    let mut mask = Mask::zeros(width, height);
    let pts = contour.points();
    let n = pts.len();
    if n < 3 {
        return mask;
    }
    let mut crossings = Vec::new();
    for row in 0..height {
        let y = row as f64 + 1e-9;
        crossings.clear();
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            if (p.y > y) != (q.y > y) {
                crossings.push(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            // centre x is inside iff pair[0] <= x < pair[1]
            let start = pair[0].ceil().max(0.0);
            let end = pair[1].min(width as f64);
            let mut x = start;
            while x < end {
                mask.set(x as usize, row, true);
                x += 1.0;
            }
        }
    }
    mask
}

fn check_dims(a: &MaskStack, b: &MaskStack) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} frames vs {} frames",
            a.len(),
            b.len()
        )));
    }
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// (|A|, |B|, |A ∩ B|) over the whole volume.
fn overlap_counts(a: &MaskStack, b: &MaskStack) -> (usize, usize, usize) {
    let mut ca = 0;
    let mut cb = 0;
    let mut both = 0;
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        for (&x, &y) in fa.data().iter().zip(fb.data()) {
            let (x, y) = (x != 0, y != 0);
            ca += usize::from(x);
            cb += usize::from(y);
            both += usize::from(x && y);
        }
    }
    (ca, cb, both)
}

/// Dice coefficient 2|A∩B|/(|A|+|B|) over the packed volume; 1 when both
/// volumes are empty.
pub fn dice(truth: &MaskStack, test: &MaskStack) -> Result<f64> {
    check_dims(truth, test)?;
    let (a, b, both) = overlap_counts(truth, test);
    if a + b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (a + b) as f64)
}

/// Mean squared per-voxel difference, normalized by the total voxel count.
pub fn mse(truth: &MaskStack, test: &MaskStack) -> Result<f64> {
    check_dims(truth, test)?;
    let z = truth.total_pixels();
    if z == 0 {
        return Ok(0.0);
    }
    let mut sq = 0u64;
    for (fa, fb) in truth.frames.iter().zip(&test.frames) {
        for (&x, &y) in fa.data().iter().zip(fb.data()) {
            let d = i64::from(x) - i64::from(y);
            sq += (d * d) as u64;
        }
    }
    Ok(sq as f64 / z as f64)
}

/// Dice of each frame pair separately (1 for two empty frames).
pub fn dice_per_frame(truth: &MaskStack, test: &MaskStack) -> Result<Vec<f64>> {
    check_dims(truth, test)?;
    truth
        .frames
        .iter()
        .zip(&test.frames)
        .map(|(a, b)| {
            dice(
                &MaskStack::new(vec![a.clone()])?,
                &MaskStack::new(vec![b.clone()])?,
            )
        })
        .collect()
}

/// Dice and MSE of one evaluation, in the shape written to metrics JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub dice: f64,
    pub mse: f64,
    pub frames: usize,
}

pub fn evaluate(truth: &MaskStack, test: &MaskStack) -> Result<Metrics> {
    Ok(Metrics {
        dice: dice(truth, test)?,
        mse: mse(truth, test)?,
        frames: truth.len(),
    })
}
