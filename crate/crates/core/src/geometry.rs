//! Closed polygonal curves and their discrete geometry.
//!
//! A curve is a counterclockwise list of vertices with periodic indexing.
//! Edge `e` runs from vertex `e-1` to vertex `e` (indices mod N) and carries
//! the per-edge quantities: length, signed curvature and tangent angle.
//! Dual cells are centered on vertices, with dual vertices at edge midpoints;
//! dual quantities are midpoint averages of the primal ones.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Shortest edge length the geometry pipeline accepts.
///
/// Below this the curvature and time-step formulas divide by effectively
/// zero, so construction fails loudly instead of propagating NaN.
pub const R_FLOOR: f64 = 1e-12;

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive when `other` lies
    /// counterclockwise of `self`.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a closed curve needs at least 4 vertices, got {count}")]
    TooFewVertices { count: usize },
    #[error("vertex {index} is not finite")]
    NonFiniteVertex { index: usize },
    #[error("edge {index} has length {length:e}, below the floor {floor:e}")]
    DegenerateEdge {
        index: usize,
        length: f64,
        floor: f64,
    },
}

/// A simple closed polygon, stored as its vertex list in counterclockwise
/// order. Construction rejects curves with fewer than 4 vertices and edges
/// shorter than [`R_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalCurve {
    vertices: Vec<Vec2>,
}

impl PolygonalCurve {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 4 {
            return Err(GeometryError::TooFewVertices { count: n });
        }
        for (index, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeometryError::NonFiniteVertex { index });
            }
        }
        for e in 0..n {
            let length = vertices[e].distance(vertices[(e + n - 1) % n]);
            if length <= R_FLOOR {
                return Err(GeometryError::DegenerateEdge {
                    index: e,
                    length,
                    floor: R_FLOOR,
                });
            }
        }
        Ok(PolygonalCurve { vertices })
    }

    /// Regular n-gon inscribed in the circle of the given center and radius,
    /// vertices in counterclockwise order starting on the positive x axis.
    pub fn circle(center: Vec2, radius: f64, n: usize) -> Result<Self, GeometryError> {
        let vertices = (0..n)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                center + radius * Vec2::new(theta.cos(), theta.sin())
            })
            .collect();
        Self::new(vertices)
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Per-edge geometry of a closed curve: edge vectors, lengths, signed
/// curvatures and unwrapped tangent angles, plus the two phantom angles
/// used when averaging onto dual cells at the index seam.
#[derive(Debug, Clone)]
pub struct EdgeGeometry {
    /// `edge_vectors[e]` is vertex `e` minus vertex `e-1`.
    pub edge_vectors: Vec<Vec2>,
    pub lengths: Vec<f64>,
    pub curvatures: Vec<f64>,
    /// Unwrapped tangent angles; consecutive entries differ by less than pi.
    pub angles: Vec<f64>,
    /// Continuation of the angle sequence one edge before the first.
    pub angle_before_first: f64,
    /// Continuation of the angle sequence one edge past the last.
    pub angle_past_last: f64,
}

impl EdgeGeometry {
    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Dual-cell geometry: dual vertices at edge midpoints and midpoint
/// averages of the primal edge quantities on the cells around vertices.
#[derive(Debug, Clone)]
pub struct DualGeometry {
    /// `vertices[e]` is the midpoint of edge `e`.
    pub vertices: Vec<Vec2>,
    pub lengths: Vec<f64>,
    pub curvatures: Vec<f64>,
    pub angles: Vec<f64>,
}

/// Sign convention for the turning direction: exactly zero for collinear
/// neighbors. `f64::signum` maps 0.0 to 1.0, which would bias straight
/// segments, so this is spelled out.
#[inline]
fn turn_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Guards `acos` against arguments pushed outside [-1, 1] by rounding.
#[inline]
fn safe_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Picks the representative of `raw` modulo 2*pi closest to `prev`,
/// considering only one shift either way. Ties keep the unshifted value.
#[inline]
fn unwrap_toward(raw: f64, prev: f64) -> f64 {
    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
    let mut best = raw;
    for candidate in [raw + TWO_PI, raw - TWO_PI] {
        if (candidate - prev).abs() < (best - prev).abs() {
            best = candidate;
        }
    }
    best
}

/// Computes edge vectors, lengths, signed curvatures and unwrapped tangent
/// angles for a closed curve.
///
/// The curvature at edge `e` is the turning angle between the neighboring
/// edge vectors divided by twice the edge length, signed by the turning
/// direction. Tangent angles are first taken in [0, 2*pi) and then
/// unwrapped into a sequence with steps below pi so that averaging across
/// the index seam stays meaningful.
///
/// # Errors
///
/// Returns [`GeometryError::DegenerateEdge`] if any edge is shorter than
/// [`R_FLOOR`]. Curves built through [`PolygonalCurve::new`] already
/// satisfy this.
pub fn compute_edge_geometry(curve: &PolygonalCurve) -> Result<EdgeGeometry, GeometryError> {
    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
    let n = curve.len();
    let v = curve.vertices();

    let edge_vectors: Vec<Vec2> = (0..n).map(|e| v[e] - v[(e + n - 1) % n]).collect();
    let mut lengths = Vec::with_capacity(n);
    for (index, p) in edge_vectors.iter().enumerate() {
        let length = p.norm();
        if length <= R_FLOOR {
            return Err(GeometryError::DegenerateEdge {
                index,
                length,
                floor: R_FLOOR,
            });
        }
        lengths.push(length);
    }

    let mut curvatures = Vec::with_capacity(n);
    for e in 0..n {
        let prev = edge_vectors[(e + n - 1) % n];
        let next = edge_vectors[(e + 1) % n];
        let r_prev = lengths[(e + n - 1) % n];
        let r_next = lengths[(e + 1) % n];
        let turning = safe_acos(prev.dot(next) / (r_prev * r_next));
        curvatures.push(turn_sign(prev.cross(next)) * turning / (2.0 * lengths[e]));
    }

    let raw_angle = |e: usize| {
        let p = edge_vectors[e];
        let base = safe_acos(p.x / lengths[e]);
        if p.y >= 0.0 {
            base
        } else {
            TWO_PI - base
        }
    };

    let mut angles = Vec::with_capacity(n);
    angles.push(raw_angle(0));
    for e in 1..n {
        let prev = angles[e - 1];
        angles.push(unwrap_toward(raw_angle(e), prev));
    }
    let angle_past_last = unwrap_toward(raw_angle(0), angles[n - 1]);
    let angle_before_first = angles[0] - (angle_past_last - angles[n - 1]);

    Ok(EdgeGeometry {
        edge_vectors,
        lengths,
        curvatures,
        angles,
        angle_before_first,
        angle_past_last,
    })
}

/// Midpoint-averages the primal edge quantities onto the dual cells.
///
/// Dual cell `e` is centered on vertex `e`; its length, curvature and angle
/// average edges `e` and `e+1`, with the angle at the last cell using the
/// unwrapped continuation past the seam rather than wrapping back to the
/// first angle.
pub fn compute_dual_geometry(curve: &PolygonalCurve, edges: &EdgeGeometry) -> DualGeometry {
    let n = curve.len();
    let v = curve.vertices();

    let vertices = (0..n)
        .map(|e| (v[e] + v[(e + n - 1) % n]) * 0.5)
        .collect();
    let lengths = (0..n)
        .map(|e| 0.5 * (edges.lengths[e] + edges.lengths[(e + 1) % n]))
        .collect();
    let curvatures = (0..n)
        .map(|e| 0.5 * (edges.curvatures[e] + edges.curvatures[(e + 1) % n]))
        .collect();
    let angles = (0..n)
        .map(|e| {
            let next = if e + 1 < n {
                edges.angles[e + 1]
            } else {
                edges.angle_past_last
            };
            0.5 * (edges.angles[e] + next)
        })
        .collect();

    DualGeometry {
        vertices,
        lengths,
        curvatures,
        angles,
    }
}

/// Length-weighted mean of a per-edge quantity over the whole curve.
///
/// # Panics
///
/// Panics if `values` does not have one entry per edge.
pub fn curve_average(values: &[f64], edges: &EdgeGeometry) -> f64 {
    assert_eq!(values.len(), edges.lengths.len());
    let weighted: f64 = values
        .iter()
        .zip(&edges.lengths)
        .map(|(value, length)| value * length)
        .sum();
    weighted / edges.total_length()
}

/// Net rotation of the tangent over one traversal of the curve. A simple
/// counterclockwise curve gives 2*pi, a clockwise one -2*pi.
pub fn total_turning(edges: &EdgeGeometry) -> f64 {
    edges.angle_past_last - edges.angles[0]
}
