//! External driving force derived from a grayscale image.
//!
//! An image is loaded (or synthesized) as an [`IntensityGrid`], placed over
//! a rectangular domain, and mapped to a piecewise-constant force: dark
//! pixels push the curve inward at close to the maximum force, bright
//! pixels hold it back at the minimum. Evaluation at a point clamps into
//! the domain and looks up the pixel under the point with no smoothing, so
//! the force is constant inside each pixel and jumps at pixel borders.

pub mod pgm;
pub mod synth;

use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForceError {
    #[error("image dimensions {width}x{height} must both be at least 1")]
    EmptyImage { width: usize, height: usize },
    #[error("sample buffer holds {got} values, expected {expected}")]
    SampleCountMismatch { expected: usize, got: usize },
    #[error("force range [{f_min}, {f_max}] must straddle zero with f_min < 0 < f_max")]
    InvalidForceRange { f_min: f64, f_max: f64 },
    #[error("domain [{x_min}, {x_max}] x [{y_min}, {y_max}] is empty")]
    EmptyDomain {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

/// Row-major grayscale image with samples in 0..=255. Row 0 is the top of
/// the image.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityGrid {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl IntensityGrid {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self, ForceError> {
        if width == 0 || height == 0 {
            return Err(ForceError::EmptyImage { width, height });
        }
        let expected = width * height;
        if samples.len() != expected {
            return Err(ForceError::SampleCountMismatch {
                expected,
                got: samples.len(),
            });
        }
        Ok(IntensityGrid {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ForceError> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.samples[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.samples[row * self.width + col] = value;
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }
}

/// Axis-aligned rectangle the image is stretched over. Row 0 of the image
/// sits along the top edge (largest y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// The square (-1.5, 1.5) x (-1.5, 1.5) the solver works in by default.
pub const OMEGA: Domain = Domain {
    x_min: -1.5,
    x_max: 1.5,
    y_min: -1.5,
    y_max: 1.5,
};

impl Default for Domain {
    fn default() -> Self {
        OMEGA
    }
}

impl Domain {
    pub fn validate(&self) -> Result<(), ForceError> {
        if !(self.x_min < self.x_max && self.y_min < self.y_max)
            || !self.x_min.is_finite()
            || !self.x_max.is_finite()
            || !self.y_min.is_finite()
            || !self.y_max.is_finite()
        {
            return Err(ForceError::EmptyDomain {
                x_min: self.x_min,
                x_max: self.x_max,
                y_min: self.y_min,
                y_max: self.y_max,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Nearest point inside the closed rectangle.
    #[inline]
    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
        )
    }

    /// Pixel under a point for an image of the given size laid over the
    /// domain. Points outside are clamped to the boundary first; the top
    /// image row covers the largest y values.
    pub fn pixel_under(&self, p: Vec2, width: usize, height: usize) -> (usize, usize) {
        let p = self.clamp(p);
        let fx = (p.x - self.x_min) / self.width() * width as f64;
        let fy = (self.y_max - p.y) / self.height() * height as f64;
        let col = (fx.floor() as usize).min(width - 1);
        let row = (fy.floor() as usize).min(height - 1);
        (row, col)
    }

    /// Center of a pixel for an image of the given size laid over the
    /// domain.
    pub fn pixel_center(&self, row: usize, col: usize, width: usize, height: usize) -> Vec2 {
        let cw = self.width() / width as f64;
        let ch = self.height() / height as f64;
        Vec2::new(
            self.x_min + (col as f64 + 0.5) * cw,
            self.y_max - (row as f64 + 0.5) * ch,
        )
    }
}

/// A scalar external force evaluated at points of the plane. Positive
/// values push a counterclockwise curve inward, negative values push it
/// outward.
pub trait Force {
    fn at(&self, p: Vec2) -> f64;
}

/// Spatially constant force, mostly useful for calibration runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformForce(pub f64);

impl Force for UniformForce {
    #[inline]
    fn at(&self, _p: Vec2) -> f64 {
        self.0
    }
}

/// Image-driven force. Intensity 0 maps to `f_max`, intensity 255 to
/// `f_min`, linearly in between; the lookup is piecewise constant over
/// pixels.
#[derive(Debug, Clone)]
pub struct ForceField {
    grid: IntensityGrid,
    domain: Domain,
    f_min: f64,
    f_max: f64,
}

impl ForceField {
    /// Builds a field over the default domain [`OMEGA`].
    ///
    /// # Errors
    ///
    /// Returns [`ForceError::InvalidForceRange`] unless `f_min < 0 < f_max`:
    /// the force must be able to both advance and retard the front.
    pub fn new(grid: IntensityGrid, f_min: f64, f_max: f64) -> Result<Self, ForceError> {
        Self::with_domain(grid, f_min, f_max, OMEGA)
    }

    pub fn with_domain(
        grid: IntensityGrid,
        f_min: f64,
        f_max: f64,
        domain: Domain,
    ) -> Result<Self, ForceError> {
        if !(f_min < 0.0 && 0.0 < f_max) || !f_min.is_finite() || !f_max.is_finite() {
            return Err(ForceError::InvalidForceRange { f_min, f_max });
        }
        domain.validate()?;
        Ok(ForceField {
            grid,
            domain,
            f_min,
            f_max,
        })
    }

    #[inline]
    pub fn grid(&self) -> &IntensityGrid {
        &self.grid
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    #[inline]
    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    /// Force value for a given intensity sample.
    #[inline]
    pub fn force_of_intensity(&self, intensity: u8) -> f64 {
        self.f_max - (self.f_max - self.f_min) * intensity as f64 / 255.0
    }
}

impl Force for ForceField {
    fn at(&self, p: Vec2) -> f64 {
        let (row, col) = self
            .domain
            .pixel_under(p, self.grid.width(), self.grid.height());
        self.force_of_intensity(self.grid.get(row, col))
    }
}

impl<F: Force + ?Sized> Force for &F {
    #[inline]
    fn at(&self, p: Vec2) -> f64 {
        (**self).at(p)
    }
}
