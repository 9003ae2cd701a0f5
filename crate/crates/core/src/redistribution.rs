//! Tangential vertex redistribution.
//!
//! Vertices are moved along the curve so that, at equilibrium, edge length
//! weighted by the curvature profile phi is uniform: short edges
//! concentrate where phi (and so curvature) is large. The tangential
//! speeds alpha come from a periodic first-order recurrence closed by the
//! requirement that they average to zero over the curve, which pins the
//! single free constant.

use thiserror::Error;

use crate::geometry::{curve_average, DualGeometry, EdgeGeometry};

/// Smallest phi value accepted when dividing by phi of the dual curvature.
/// Unreachable for eps up to 0.9; insurance against eps pushed toward 1.
pub const PHI_FLOOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RedistributionError {
    #[error("epsilon {0} must lie in [0, 1)")]
    InvalidEpsilon(f64),
    #[error("omega {0} must be nonnegative")]
    InvalidOmega(f64),
    #[error("phi({curvature}) = {phi:e} at dual cell {index} is below the floor; epsilon too close to 1")]
    SingularPhi {
        index: usize,
        curvature: f64,
        phi: f64,
    },
}

/// Shape parameter eps and relaxation rate omega of the redistribution.
///
/// eps = 0 asks for plain uniform edge lengths; larger eps weighs edges by
/// curvature so corners attract vertices. omega sets how fast the
/// distribution relaxes toward its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedistributionParams {
    epsilon: f64,
    omega: f64,
}

impl RedistributionParams {
    pub fn new(epsilon: f64, omega: f64) -> Result<Self, RedistributionError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(RedistributionError::InvalidEpsilon(epsilon));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(RedistributionError::InvalidOmega(omega));
        }
        Ok(RedistributionParams { epsilon, omega })
    }

    /// Plain arc-length uniformity (eps = 0).
    pub fn uniform(omega: f64) -> Result<Self, RedistributionError> {
        Self::new(0.0, omega)
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Curvature weight phi(k) = 1 - eps + eps*sqrt(1 - eps + eps*k^2).
    #[inline]
    pub fn phi(&self, k: f64) -> f64 {
        let e = self.epsilon;
        1.0 - e + e * (1.0 - e + e * k * k).sqrt()
    }

    /// Derivative of phi with respect to k.
    #[inline]
    pub fn phi_prime(&self, k: f64) -> f64 {
        let e = self.epsilon;
        e * e * k / (1.0 - e + e * k * k).sqrt()
    }
}

/// Tangential speeds and the intermediate quantities they came from.
#[derive(Debug, Clone)]
pub struct TangentialSolution {
    /// Per-vertex tangential speed.
    pub alpha: Vec<f64>,
    /// Per-edge source terms of the recurrence.
    pub psi: Vec<f64>,
    /// Cumulative sums of psi, starting at zero for the first edge.
    pub psi_cumulative: Vec<f64>,
    /// The per-edge driving values f the sources were built from.
    pub f_values: Vec<f64>,
}

/// Per-edge driving term f of the redistribution source.
///
/// `force_vertices` holds the force at the curve vertices and feeds the
/// second-difference stencil alongside the curvatures; `force_midpoints`
/// holds the force at the edge midpoints and multiplies curvature
/// directly.
///
/// # Panics
///
/// Panics if the force arrays do not have one entry per edge.
pub fn compute_f(
    edges: &EdgeGeometry,
    duals: &DualGeometry,
    force_vertices: &[f64],
    force_midpoints: &[f64],
    params: &RedistributionParams,
) -> Vec<f64> {
    let n = edges.lengths.len();
    assert_eq!(force_vertices.len(), n);
    assert_eq!(force_midpoints.len(), n);

    let k = &edges.curvatures;
    let r = &edges.lengths;
    let rs = &duals.lengths;

    (0..n)
        .map(|e| {
            let prev = (e + n - 1) % n;
            let next = (e + 1) % n;
            let smooth = params.phi(k[e]) * k[e] * (k[e] + force_midpoints[e]);
            // Second differences of k and F over the dual spacing, scaled
            // back by the primal edge length.
            let stencil = (k[next] - k[e]) / rs[e] - (k[e] - k[prev]) / rs[prev]
                + (force_vertices[next] - force_vertices[e]) / rs[e]
                - (force_vertices[e] - force_vertices[prev]) / rs[prev];
            smooth - params.phi_prime(k[e]) / r[e] * stencil
        })
        .collect()
}

/// Solves the periodic recurrence for the tangential speeds.
///
/// The sources psi are accumulated into prefix sums; the value at the
/// first vertex then follows in closed form from the zero-mean condition
/// over dual cells, and every other speed is recovered by dividing the
/// shifted prefix sum by phi at the dual curvature.
///
/// # Errors
///
/// [`RedistributionError::SingularPhi`] if phi at some dual curvature
/// falls below [`PHI_FLOOR`].
pub fn solve_alpha(
    edges: &EdgeGeometry,
    duals: &DualGeometry,
    f_values: &[f64],
    params: &RedistributionParams,
) -> Result<TangentialSolution, RedistributionError> {
    let n = edges.lengths.len();
    assert_eq!(f_values.len(), n);

    let r = &edges.lengths;
    let rs = &duals.lengths;
    let total_length = edges.total_length();

    let phi_edge: Vec<f64> = edges.curvatures.iter().map(|&k| params.phi(k)).collect();
    let mut phi_dual = Vec::with_capacity(n);
    for (index, &k) in duals.curvatures.iter().enumerate() {
        let phi = params.phi(k);
        if phi <= PHI_FLOOR {
            return Err(RedistributionError::SingularPhi {
                index,
                curvature: k,
                phi,
            });
        }
        phi_dual.push(phi);
    }

    let mean_phi = curve_average(&phi_edge, edges);
    let mean_f = curve_average(f_values, edges);
    let target = total_length / n as f64 * mean_phi;

    let psi: Vec<f64> = (0..n)
        .map(|e| {
            f_values[e] * r[e] - phi_edge[e] / mean_phi * mean_f * r[e]
                + params.omega * (target - phi_edge[e] * r[e])
        })
        .collect();

    // Prefix sums skip the first edge: the recurrence only constrains
    // differences, and the first value is fixed by the closure below.
    let mut psi_cumulative = vec![0.0; n];
    for e in 1..n {
        psi_cumulative[e] = psi_cumulative[e - 1] + psi[e];
    }

    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for v in 0..n {
        numerator += rs[v] * psi_cumulative[v] / phi_dual[v];
        denominator += rs[v] / phi_dual[v];
    }
    let anchor = -numerator / denominator;

    let alpha = (0..n)
        .map(|v| (anchor + psi_cumulative[v]) / phi_dual[v])
        .collect();

    Ok(TangentialSolution {
        alpha,
        psi,
        psi_cumulative,
        f_values: f_values.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compute_dual_geometry, compute_edge_geometry, PolygonalCurve, Vec2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn perturbed_polygon(rng: &mut ChaCha8Rng, n: usize) -> PolygonalCurve {
        let vertices = (0..n)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / n as f64;
                let radius = 1.0 + rng.gen_range(-0.15..0.15);
                Vec2::new(radius * theta.cos(), radius * theta.sin())
            })
            .collect();
        PolygonalCurve::new(vertices).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(RedistributionParams::new(-0.1, 1.0).is_err());
        assert!(RedistributionParams::new(1.0, 1.0).is_err());
        assert!(RedistributionParams::new(0.5, -1.0).is_err());
        assert!(RedistributionParams::new(0.0, 0.0).is_ok());
        assert!(RedistributionParams::new(0.9, 50_000.0).is_ok());
    }

    #[test]
    fn phi_is_one_when_epsilon_is_zero() {
        let params = RedistributionParams::uniform(10.0).unwrap();
        for k in [-50.0, -1.0, 0.0, 0.3, 200.0] {
            assert_eq!(params.phi(k), 1.0);
            assert_eq!(params.phi_prime(k), 0.0);
        }
    }

    #[test]
    fn phi_at_zero_curvature() {
        let params = RedistributionParams::new(0.2, 0.0).unwrap();
        let expected = 0.8 + 0.2 * 0.8f64.sqrt();
        assert!((params.phi(0.0) - expected).abs() < 1e-15);
        assert!((params.phi(0.0) - 0.9789).abs() < 1e-4);
    }

    #[test]
    fn phi_even_phi_prime_odd() {
        let params = RedistributionParams::new(0.2, 0.0).unwrap();
        assert_eq!(params.phi(3.0), params.phi(-3.0));
        assert_eq!(params.phi_prime(3.0), -params.phi_prime(-3.0));
        assert!(params.phi_prime(3.0) > 0.0);
    }

    #[test]
    fn f_collapses_to_k_squared_without_weighting_or_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let curve = perturbed_polygon(&mut rng, 10);
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let zeros = vec![0.0; 10];
        let params = RedistributionParams::uniform(0.0).unwrap();
        let f = compute_f(&edges, &duals, &zeros, &zeros, &params);
        for e in 0..10 {
            let k = edges.curvatures[e];
            assert!((f[e] - k * k).abs() < 1e-12, "edge {e}");
        }
    }

    #[test]
    fn hexagon_f_is_uniform() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 6).unwrap();
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let zeros = vec![0.0; 6];
        let params = RedistributionParams::new(0.2, 0.0).unwrap();
        let f = compute_f(&edges, &duals, &zeros, &zeros, &params);
        let k = PI / 3.0;
        let expected = params.phi(k) * k * k;
        for e in 0..6 {
            assert!((f[e] - expected).abs() < 1e-12, "edge {e}: {}", f[e]);
        }
    }

    #[test]
    fn f_matches_direct_formula_reevaluation() {
        // Independent re-evaluation of the displayed formula, written with
        // explicit wraparound instead of the production indexing.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for case in 0..25 {
            let n = 8;
            let curve = perturbed_polygon(&mut rng, n);
            let edges = compute_edge_geometry(&curve).unwrap();
            let duals = compute_dual_geometry(&curve, &edges);
            let force_vertices: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let force_midpoints: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let params = RedistributionParams::new(0.1, 0.0).unwrap();
            let f = compute_f(&edges, &duals, &force_vertices, &force_midpoints, &params);

            let wrap = |i: isize| -> usize { i.rem_euclid(n as isize) as usize };
            for e in 0..n {
                let i = e as isize;
                let k_m = edges.curvatures[wrap(i - 1)];
                let k_0 = edges.curvatures[e];
                let k_p = edges.curvatures[wrap(i + 1)];
                let g_m = force_vertices[wrap(i - 1)];
                let g_0 = force_vertices[e];
                let g_p = force_vertices[wrap(i + 1)];
                let rs_0 = duals.lengths[e];
                let rs_m = duals.lengths[wrap(i - 1)];
                let direct = params.phi(k_0) * k_0 * (k_0 + force_midpoints[e])
                    - params.phi_prime(k_0) / edges.lengths[e]
                        * ((k_p - k_0) / rs_0 - (k_0 - k_m) / rs_m + (g_p - g_0) / rs_0
                            - (g_0 - g_m) / rs_m);
                assert!(
                    (f[e] - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "case {case}, edge {e}: {} vs {direct}",
                    f[e]
                );
            }
        }
    }

    #[test]
    fn second_difference_term_vanishes_when_epsilon_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let curve = perturbed_polygon(&mut rng, 12);
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let params = RedistributionParams::uniform(0.0).unwrap();
        let midpoint_force: Vec<f64> = (0..12).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let vertex_force_a = vec![0.0; 12];
        let vertex_force_b: Vec<f64> = (0..12).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // With eps = 0 the stencil is multiplied by phi' = 0, so the
        // vertex-sampled force cannot influence the result.
        let fa = compute_f(&edges, &duals, &vertex_force_a, &midpoint_force, &params);
        let fb = compute_f(&edges, &duals, &vertex_force_b, &midpoint_force, &params);
        assert_eq!(fa, fb);
    }

    #[test]
    fn symmetric_curve_gets_zero_tangential_speed() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 6).unwrap();
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let zeros = vec![0.0; 6];
        let params = RedistributionParams::new(0.2, 50_000.0).unwrap();
        let f = compute_f(&edges, &duals, &zeros, &zeros, &params);
        let solution = solve_alpha(&edges, &duals, &f, &params).unwrap();
        for (v, &alpha) in solution.alpha.iter().enumerate() {
            assert!(alpha.abs() < 1e-9, "vertex {v}: alpha {alpha}");
        }
    }

    #[test]
    fn sources_telescope_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..40 {
            let n = 6 + case % 10;
            let curve = perturbed_polygon(&mut rng, n);
            let edges = compute_edge_geometry(&curve).unwrap();
            let duals = compute_dual_geometry(&curve, &edges);
            let force: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let params = RedistributionParams::new(0.2, 100.0).unwrap();
            let f = compute_f(&edges, &duals, &force, &force, &params);
            let solution = solve_alpha(&edges, &duals, &f, &params).unwrap();
            let total: f64 = solution.psi.iter().sum();
            let scale: f64 = solution.psi.iter().map(|p| p.abs()).sum::<f64>() + 1.0;
            assert!(
                total.abs() < 1e-10 * scale,
                "case {case}: sum {total}, scale {scale}"
            );
        }
    }

    #[test]
    fn alpha_satisfies_recurrence_and_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for case in 0..40 {
            let n = 6 + case % 12;
            let curve = perturbed_polygon(&mut rng, n);
            let edges = compute_edge_geometry(&curve).unwrap();
            let duals = compute_dual_geometry(&curve, &edges);
            let force: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let params = RedistributionParams::new(0.3, 500.0).unwrap();
            let f = compute_f(&edges, &duals, &force, &force, &params);
            let solution = solve_alpha(&edges, &duals, &f, &params).unwrap();

            let alpha_max = solution
                .alpha
                .iter()
                .fold(0.0f64, |acc, a| acc.max(a.abs()));
            let mean: f64 = duals
                .lengths
                .iter()
                .zip(&solution.alpha)
                .map(|(rs, a)| rs * a)
                .sum();
            let bound = 1e-10 * edges.total_length() * (1.0 + alpha_max);
            assert!(mean.abs() <= bound, "case {case}: mean {mean}");

            let psi_scale = 1.0
                + solution
                    .psi
                    .iter()
                    .fold(0.0f64, |acc, p| acc.max(p.abs()));
            for v in 1..n {
                let lhs = params.phi(duals.curvatures[v]) * solution.alpha[v];
                let rhs = params.phi(duals.curvatures[v - 1]) * solution.alpha[v - 1]
                    + solution.psi[v];
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * psi_scale,
                    "case {case}, vertex {v}: residual {}",
                    lhs - rhs
                );
            }
        }
    }

    #[test]
    fn high_epsilon_still_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let curve = perturbed_polygon(&mut rng, 16);
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let zeros = vec![0.0; 16];
        let params = RedistributionParams::new(0.9, 50_000.0).unwrap();
        let f = compute_f(&edges, &duals, &zeros, &zeros, &params);
        let solution = solve_alpha(&edges, &duals, &f, &params).unwrap();
        assert!(solution.alpha.iter().all(|a| a.is_finite()));
    }
}
