//! Synthetic test bitmaps: white shapes on black background, optionally
//! speckled with gray noise blobs.
//!
//! Shapes are rendered from their signed distance: intensity ramps
//! linearly from white to black across a boundary band [`EDGE_RAMP_PX`]
//! pixels wide, centered on the true boundary. Intensity level sets are
//! then parallel offsets of the boundary, so a curve locking onto one
//! inherits the exact shape geometry rather than rasterization staircase,
//! and the width sets how finely a piecewise-constant per-pixel force
//! lookup quantizes across the edge. With the `parallel` feature (on by
//! default) rows are filled concurrently; the serial path is always
//! available and produces bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Domain, ForceError, IntensityGrid};
use crate::geometry::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("shape parameter out of range: {0}")]
    InvalidShape(String),
    #[error("noise parameter out of range: {0}")]
    InvalidNoise(String),
    #[error(transparent)]
    Image(#[from] ForceError),
}

/// Filled white region painted onto the bitmap.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk {
        center: Vec2,
        radius: f64,
    },
    /// Axis-aligned rectangle; `corner_radius` > 0 rounds the corners with
    /// quarter-circle arcs.
    Rectangle {
        center: Vec2,
        half_width: f64,
        half_height: f64,
        corner_radius: f64,
    },
    /// Annulus with a horizontal slot cut from the center rightward, an
    /// object the front must flow around.
    CShape {
        center: Vec2,
        outer_radius: f64,
        inner_radius: f64,
        gap_width: f64,
    },
}

impl Shape {
    pub fn validate(&self) -> Result<(), SynthError> {
        match *self {
            Shape::Disk { radius, .. } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(SynthError::InvalidShape(format!(
                        "disk radius {radius} must be positive"
                    )));
                }
            }
            Shape::Rectangle {
                half_width,
                half_height,
                corner_radius,
                ..
            } => {
                if !(half_width > 0.0 && half_height > 0.0)
                    || !half_width.is_finite()
                    || !half_height.is_finite()
                {
                    return Err(SynthError::InvalidShape(format!(
                        "rectangle half extents {half_width} x {half_height} must be positive"
                    )));
                }
                if !(corner_radius >= 0.0) || corner_radius > half_width.min(half_height) {
                    return Err(SynthError::InvalidShape(format!(
                        "corner radius {corner_radius} must lie in [0, min(half extents)]"
                    )));
                }
            }
            Shape::CShape {
                outer_radius,
                inner_radius,
                gap_width,
                ..
            } => {
                if !(inner_radius > 0.0 && inner_radius < outer_radius) || !outer_radius.is_finite()
                {
                    return Err(SynthError::InvalidShape(format!(
                        "annulus radii need 0 < inner ({inner_radius}) < outer ({outer_radius})"
                    )));
                }
                if !(gap_width > 0.0) || !gap_width.is_finite() {
                    return Err(SynthError::InvalidShape(format!(
                        "gap width {gap_width} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Signed distance to the shape boundary, negative inside. Exact for
    /// the disk and rectangle; for the C shape exact away from the slot
    /// mouth, a lower bound within a pixel of it.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match *self {
            Shape::Disk { center, radius } => p.distance(center) - radius,
            Shape::Rectangle {
                center,
                half_width,
                half_height,
                corner_radius,
            } => {
                let qx = (p.x - center.x).abs() - (half_width - corner_radius);
                let qy = (p.y - center.y).abs() - (half_height - corner_radius);
                let outside = Vec2::new(qx.max(0.0), qy.max(0.0)).norm();
                outside + qx.max(qy).min(0.0) - corner_radius
            }
            Shape::CShape {
                center,
                outer_radius,
                inner_radius,
                gap_width,
            } => {
                let d = p.distance(center);
                let ring = (d - outer_radius).max(inner_radius - d);
                let slot = (center.x - p.x).max((p.y - center.y).abs() - gap_width / 2.0);
                ring.max(-slot)
            }
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.signed_distance(p) <= 0.0
    }
}

/// Width of the boundary intensity ramp in pixels. The ramp is symmetric,
/// so the mid-intensity level set stays on the true boundary regardless of
/// width; wider ramps shrink the per-pixel force steps a curve rides over,
/// at the cost of a softer edge.
pub const EDGE_RAMP_PX: f64 = 10.0;

fn fill_row(shape: &Shape, domain: &Domain, width: usize, height: usize, row: usize, out: &mut [u8]) {
    let ramp = EDGE_RAMP_PX * domain.width() / width as f64;
    for (col, sample) in out.iter_mut().enumerate() {
        let center = domain.pixel_center(row, col, width, height);
        let t = (0.5 - shape.signed_distance(center) / ramp).clamp(0.0, 1.0);
        *sample = (t * 255.0).round() as u8;
    }
}

/// Serial rasterization; reference for the parallel path and fallback when
/// the `parallel` feature is off.
pub fn synthesize_bitmap_serial(
    shape: &Shape,
    width: usize,
    height: usize,
    domain: &Domain,
) -> Result<IntensityGrid, SynthError> {
    shape.validate()?;
    domain.validate()?;
    let mut grid = IntensityGrid::filled(width, height, 0)?;
    for row in 0..height {
        let start = row * width;
        fill_row(
            shape,
            domain,
            width,
            height,
            row,
            &mut grid.samples_mut()[start..start + width],
        );
    }
    Ok(grid)
}

/// Row-parallel rasterization. Output is bit-identical to the serial path.
#[cfg(feature = "parallel")]
pub fn synthesize_bitmap_parallel(
    shape: &Shape,
    width: usize,
    height: usize,
    domain: &Domain,
) -> Result<IntensityGrid, SynthError> {
    use rayon::prelude::*;

    shape.validate()?;
    domain.validate()?;
    let mut grid = IntensityGrid::filled(width, height, 0)?;
    grid.samples_mut()
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, out)| fill_row(shape, domain, width, height, row, out));
    Ok(grid)
}

/// Rasterizes a shape as a white-on-black bitmap over the domain, using
/// the parallel path when the `parallel` feature is enabled.
pub fn synthesize_bitmap(
    shape: &Shape,
    width: usize,
    height: usize,
    domain: &Domain,
) -> Result<IntensityGrid, SynthError> {
    #[cfg(feature = "parallel")]
    {
        synthesize_bitmap_parallel(shape, width, height, domain)
    }
    #[cfg(not(feature = "parallel"))]
    {
        synthesize_bitmap_serial(shape, width, height, domain)
    }
}

/// Gray blob noise sprinkled over the background.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Fraction of the image area the blobs should cover in total, 0..=1.
    pub density: f64,
    /// Intensity written into noise pixels.
    pub amplitude: u8,
    /// Blob radius in pixels.
    pub blob_radius_px: u32,
}

/// Stamps round noise blobs of the given intensity onto background (zero)
/// pixels; shape pixels are left untouched. Blob placement is drawn from a
/// fixed-algorithm generator, so equal seeds give equal output.
pub fn apply_salt_noise(
    grid: &mut IntensityGrid,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<(), SynthError> {
    if !(0.0..=1.0).contains(&noise.density) {
        return Err(SynthError::InvalidNoise(format!(
            "density {} must lie in [0, 1]",
            noise.density
        )));
    }
    if noise.blob_radius_px == 0 {
        return Err(SynthError::InvalidNoise(
            "blob radius must be at least 1 pixel".into(),
        ));
    }

    let width = grid.width();
    let height = grid.height();
    let radius = noise.blob_radius_px as i64;
    let blob_area = std::f64::consts::PI * (radius as f64) * (radius as f64);
    let count = ((noise.density * (width * height) as f64) / blob_area).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let blob_row = rng.gen_range(0..height) as i64;
        let blob_col = rng.gen_range(0..width) as i64;
        for row in (blob_row - radius).max(0)..=(blob_row + radius).min(height as i64 - 1) {
            for col in (blob_col - radius).max(0)..=(blob_col + radius).min(width as i64 - 1) {
                let dr = row - blob_row;
                let dc = col - blob_col;
                if dr * dr + dc * dc <= radius * radius
                    && grid.get(row as usize, col as usize) == 0
                {
                    grid.set(row as usize, col as usize, noise.amplitude);
                }
            }
        }
    }
    Ok(())
}
