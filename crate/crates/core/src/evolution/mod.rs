//! Semi-implicit time stepping of the curve evolution.
//!
//! Each step freezes the geometry, solves for tangential speeds (optional),
//! picks the adaptive time increment, assembles the cyclic tridiagonal
//! position system and solves it once per coordinate. The time increment
//! is chosen so the system is strictly diagonally dominant, which makes
//! the direct solve unconditionally safe.

pub mod tridiag;

use thiserror::Error;

use crate::force::Force;
use crate::geometry::{
    compute_dual_geometry, compute_edge_geometry, DualGeometry, EdgeGeometry, GeometryError,
    PolygonalCurve, Vec2,
};
use crate::redistribution::{
    compute_f, solve_alpha, RedistributionError, RedistributionParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Redistribution(#[from] RedistributionError),
    #[error("row {index} lost diagonal dominance (margin {margin:e})")]
    DominanceViolation { index: usize, margin: f64 },
    #[error("solver breakdown at row {index}, pivot {pivot:e}")]
    NumericalBreakdown { index: usize, pivot: f64 },
    #[error("lambda {0} must be positive and finite")]
    InvalidLambda(f64),
    #[error("invalid stopping criterion: {0}")]
    InvalidStop(String),
}

/// Matrix coefficients of one position step. Row i of the system reads
/// `-a[i]*tau*x[i-1] + (1 + b[i]*tau)*x[i] - c[i]*tau*x[i+1] = rhs[i]`
/// with periodic neighbors.
#[derive(Debug, Clone)]
pub struct StepCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub tau: f64,
    pub eta: f64,
}

impl StepCoefficients {
    /// Smallest gap between each diagonal entry and the absolute sum of
    /// its off-diagonal row entries. Positive means strictly dominant.
    pub fn dominance_margin(&self) -> f64 {
        let tau = self.tau;
        self.a
            .iter()
            .zip(&self.b)
            .zip(&self.c)
            .map(|((a, b), c)| 1.0 + b * tau - (a.abs() + c.abs()) * tau)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Curve plus clock: the state the run loop advances.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub curve: PolygonalCurve,
    /// Accumulated time, the sum of all accepted increments.
    pub time: f64,
    /// Number of accepted steps.
    pub step_index: u64,
}

impl EvolutionState {
    pub fn new(curve: PolygonalCurve) -> Self {
        EvolutionState {
            curve,
            time: 0.0,
            step_index: 0,
        }
    }
}

/// Measurements recorded after each accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step_index: u64,
    /// Time after the step.
    pub time: f64,
    /// Increment used by this step.
    pub tau: f64,
    /// Curve length before the step.
    pub length: f64,
    /// Shortest edge before the step.
    pub r_min: f64,
    /// Largest tangential speed magnitude.
    pub alpha_max: f64,
    /// Largest vertex displacement divided by tau.
    pub max_speed: f64,
    /// Absolute dual-weighted mean of the tangential speeds.
    pub mean_zero_residual: f64,
    /// Diagonal dominance margin of the solved system.
    pub dominance_margin: f64,
}

/// When to stop a run. Criteria may be combined; the first to be
/// satisfied between steps ends the run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoppingCriterion {
    fixed_time: Option<f64>,
    stationary: Option<(f64, u32)>,
    max_steps: Option<u64>,
}

impl StoppingCriterion {
    /// Stop once accumulated time reaches `t_end`.
    pub fn fixed_time(t_end: f64) -> Self {
        StoppingCriterion::default().or_fixed_time(t_end)
    }

    /// Stop once the maximal vertex speed stays below `speed_tol` for
    /// `window` consecutive steps.
    pub fn stationary(speed_tol: f64, window: u32) -> Self {
        StoppingCriterion::default().or_stationary(speed_tol, window)
    }

    /// Stop after `steps` accepted steps. Zero asks for no stepping at
    /// all and returns the initial state.
    pub fn max_steps(steps: u64) -> Self {
        StoppingCriterion::default().or_max_steps(steps)
    }

    pub fn or_fixed_time(mut self, t_end: f64) -> Self {
        self.fixed_time = Some(t_end);
        self
    }

    pub fn or_stationary(mut self, speed_tol: f64, window: u32) -> Self {
        self.stationary = Some((speed_tol, window));
        self
    }

    pub fn or_max_steps(mut self, steps: u64) -> Self {
        self.max_steps = Some(steps);
        self
    }

    fn validate(&self) -> Result<(), EvolutionError> {
        if self.fixed_time.is_none() && self.stationary.is_none() && self.max_steps.is_none() {
            return Err(EvolutionError::InvalidStop(
                "at least one stopping criterion is required".into(),
            ));
        }
        if let Some(t_end) = self.fixed_time {
            if !(t_end > 0.0) || !t_end.is_finite() {
                return Err(EvolutionError::InvalidStop(format!(
                    "fixed time {t_end} must be positive"
                )));
            }
        }
        if let Some((speed_tol, window)) = self.stationary {
            if !(speed_tol > 0.0) || !speed_tol.is_finite() {
                return Err(EvolutionError::InvalidStop(format!(
                    "speed tolerance {speed_tol} must be positive"
                )));
            }
            if window == 0 {
                return Err(EvolutionError::InvalidStop(
                    "stationarity window must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which criterion ended the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FixedTimeReached,
    Stationary,
    StepBudgetExhausted,
}

/// Finished run: final state, the full diagnostics log and what stopped it.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: EvolutionState,
    pub log: Vec<StepDiagnostics>,
    pub reason: StopReason,
}

/// Largest stable-by-construction time increment for the current geometry
/// and tangential speeds. Returns `(tau, eta)` where `eta` is the
/// dominance bound; `tau` never exceeds `1/(eta*(1+lambda))`.
///
/// `relaxation_rate` is the rate at which the tangential speeds pull edge
/// lengths toward their target. That pull is evaluated at the old
/// geometry, so the increment must also stay below its reciprocal or the
/// spacing overshoots and oscillates instead of settling. Pass zero when
/// no redistribution is active.
pub fn adaptive_time_step(
    edges: &EdgeGeometry,
    alpha: &[f64],
    lambda: f64,
    relaxation_rate: f64,
) -> (f64, f64) {
    let r_min = edges.min_length();
    let alpha_max = alpha.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
    let eta = 4.0 / r_min * (1.0 / r_min + alpha_max / 2.0);
    let mut tau = 1.0 / (eta * (1.0 + lambda));
    if relaxation_rate > 0.0 {
        tau = tau.min(relaxation_rate.recip());
    }
    (tau, eta)
}

#[inline]
fn normal_of_angle(nu: f64) -> Vec2 {
    Vec2::new(-nu.sin(), nu.cos())
}

/// Builds the matrix coefficients and right-hand side of the position
/// system for one step of size `tau`.
///
/// # Errors
///
/// [`EvolutionError::DominanceViolation`] if some row is not strictly
/// diagonally dominant; unreachable when `tau` comes from
/// [`adaptive_time_step`], checked anyway rather than assumed.
pub fn assemble_position_system<F: Force + ?Sized>(
    curve: &PolygonalCurve,
    edges: &EdgeGeometry,
    duals: &DualGeometry,
    alpha: &[f64],
    force: &F,
    tau: f64,
    eta: f64,
) -> Result<(StepCoefficients, Vec<Vec2>), EvolutionError> {
    let n = curve.len();
    assert_eq!(alpha.len(), n);

    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for v in 0..n {
        let inv_dual = 1.0 / duals.lengths[v];
        let inv_edge = 1.0 / edges.lengths[v];
        let av = inv_dual * (inv_edge - alpha[v] / 2.0);
        let cv = inv_dual * (inv_edge + alpha[v] / 2.0);
        a.push(av);
        c.push(cv);
        b.push(av + cv);
    }

    let rhs = curve
        .vertices()
        .iter()
        .zip(&duals.angles)
        .map(|(&x, &nu)| x + force.at(x) * tau * normal_of_angle(nu))
        .collect();

    let coefficients = StepCoefficients { a, b, c, tau, eta };
    let margin = coefficients.dominance_margin();
    if !(margin > 0.0) {
        // Locate the worst row for the report.
        let index = (0..n)
            .min_by(|&i, &j| {
                let mi = 1.0 + coefficients.b[i] * tau
                    - (coefficients.a[i].abs() + coefficients.c[i].abs()) * tau;
                let mj = 1.0 + coefficients.b[j] * tau
                    - (coefficients.a[j].abs() + coefficients.c[j].abs()) * tau;
                mi.partial_cmp(&mj).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        return Err(EvolutionError::DominanceViolation { index, margin });
    }
    Ok((coefficients, rhs))
}

/// Solves the cyclic position system for both coordinates against the
/// same matrix.
pub fn solve_position_system(
    coefficients: &StepCoefficients,
    rhs: &[Vec2],
) -> Result<Vec<Vec2>, EvolutionError> {
    let n = rhs.len();
    let tau = coefficients.tau;
    let sub: Vec<f64> = coefficients.a.iter().map(|a| -a * tau).collect();
    let sup: Vec<f64> = coefficients.c.iter().map(|c| -c * tau).collect();
    let diag: Vec<f64> = coefficients.b.iter().map(|b| 1.0 + b * tau).collect();
    let top_right = -coefficients.a[0] * tau;
    let bottom_left = -coefficients.c[n - 1] * tau;

    let rhs_x: Vec<f64> = rhs.iter().map(|p| p.x).collect();
    let rhs_y: Vec<f64> = rhs.iter().map(|p| p.y).collect();
    let x = tridiag::solve_cyclic(&sub, &diag, &sup, top_right, bottom_left, &rhs_x)?;
    let y = tridiag::solve_cyclic(&sub, &diag, &sup, top_right, bottom_left, &rhs_y)?;
    Ok(x.into_iter().zip(y).map(|(x, y)| Vec2::new(x, y)).collect())
}

fn validate_lambda(lambda: f64) -> Result<(), EvolutionError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(EvolutionError::InvalidLambda(lambda));
    }
    Ok(())
}

/// Advances the state by one accepted step.
///
/// With `redistribution` set, tangential speeds are solved from the
/// current geometry; without it the step is purely normal motion.
///
/// # Errors
///
/// Propagates geometry, redistribution and solver errors; also fails if
/// the stepped curve degenerates (vertices collide).
pub fn step<F: Force + ?Sized>(
    state: &EvolutionState,
    force: &F,
    redistribution: Option<&RedistributionParams>,
    lambda: f64,
) -> Result<(EvolutionState, StepDiagnostics), EvolutionError> {
    validate_lambda(lambda)?;
    let n = state.curve.len();
    let edges = compute_edge_geometry(&state.curve)?;
    let duals = compute_dual_geometry(&state.curve, &edges);

    let alpha = match redistribution {
        Some(params) => {
            let force_at_vertices: Vec<f64> = state
                .curve
                .vertices()
                .iter()
                .map(|&p| force.at(p))
                .collect();
            let force_at_midpoints: Vec<f64> =
                duals.vertices.iter().map(|&p| force.at(p)).collect();
            let f_values = compute_f(
                &edges,
                &duals,
                &force_at_vertices,
                &force_at_midpoints,
                params,
            );
            solve_alpha(&edges, &duals, &f_values, params)?.alpha
        }
        None => vec![0.0; n],
    };

    let relaxation_rate = redistribution.map_or(0.0, |params| params.omega());
    let (tau, eta) = adaptive_time_step(&edges, &alpha, lambda, relaxation_rate);
    let (coefficients, rhs) =
        assemble_position_system(&state.curve, &edges, &duals, &alpha, force, tau, eta)?;
    let new_vertices = solve_position_system(&coefficients, &rhs)?;

    let max_speed = state
        .curve
        .vertices()
        .iter()
        .zip(&new_vertices)
        .map(|(old, new)| old.distance(*new))
        .fold(0.0f64, f64::max)
        / tau;
    let alpha_max = alpha.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
    let mean_zero_residual = duals
        .lengths
        .iter()
        .zip(&alpha)
        .map(|(rs, a)| rs * a)
        .sum::<f64>()
        .abs();

    let diagnostics = StepDiagnostics {
        step_index: state.step_index + 1,
        time: state.time + tau,
        tau,
        length: edges.total_length(),
        r_min: edges.min_length(),
        alpha_max,
        max_speed,
        mean_zero_residual,
        dominance_margin: coefficients.dominance_margin(),
    };

    let next = EvolutionState {
        curve: PolygonalCurve::new(new_vertices)?,
        time: state.time + tau,
        step_index: state.step_index + 1,
    };
    Ok((next, diagnostics))
}

/// Runs the evolution until the stopping criterion fires, invoking the
/// observer after every accepted step.
///
/// # Errors
///
/// Propagates step errors; rejects an empty or out-of-range criterion and
/// a nonpositive lambda.
pub fn run_with_observer<F, O>(
    initial: PolygonalCurve,
    force: &F,
    redistribution: Option<&RedistributionParams>,
    lambda: f64,
    stop: &StoppingCriterion,
    mut observer: O,
) -> Result<RunOutcome, EvolutionError>
where
    F: Force + ?Sized,
    O: FnMut(&EvolutionState, &StepDiagnostics),
{
    stop.validate()?;
    validate_lambda(lambda)?;

    let mut state = EvolutionState::new(initial);
    let mut log = Vec::new();
    let mut calm_steps: u32 = 0;

    loop {
        if let Some(t_end) = stop.fixed_time {
            if state.time >= t_end {
                return Ok(RunOutcome {
                    state,
                    log,
                    reason: StopReason::FixedTimeReached,
                });
            }
        }
        if let Some((_, window)) = stop.stationary {
            if calm_steps >= window {
                return Ok(RunOutcome {
                    state,
                    log,
                    reason: StopReason::Stationary,
                });
            }
        }
        if let Some(budget) = stop.max_steps {
            if state.step_index >= budget {
                return Ok(RunOutcome {
                    state,
                    log,
                    reason: StopReason::StepBudgetExhausted,
                });
            }
        }

        let (next, diagnostics) = step(&state, force, redistribution, lambda)?;
        if let Some((speed_tol, _)) = stop.stationary {
            if diagnostics.max_speed < speed_tol {
                calm_steps += 1;
            } else {
                calm_steps = 0;
            }
        }
        observer(&next, &diagnostics);
        log.push(diagnostics);
        state = next;
    }
}

/// [`run_with_observer`] without an observer.
pub fn run<F: Force + ?Sized>(
    initial: PolygonalCurve,
    force: &F,
    redistribution: Option<&RedistributionParams>,
    lambda: f64,
    stop: &StoppingCriterion,
) -> Result<RunOutcome, EvolutionError> {
    run_with_observer(initial, force, redistribution, lambda, stop, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::force::UniformForce;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn mean_radius(curve: &PolygonalCurve) -> f64 {
        curve.vertices().iter().map(|v| v.norm()).sum::<f64>() / curve.len() as f64
    }

    fn spacing_deviation(curve: &PolygonalCurve) -> f64 {
        let edges = compute_edge_geometry(curve).unwrap();
        let n = curve.len() as f64;
        let total = edges.total_length();
        let mean = 1.0;
        let variance = edges
            .lengths
            .iter()
            .map(|r| {
                let scaled = n * r / total;
                (scaled - mean) * (scaled - mean)
            })
            .sum::<f64>()
            / n;
        variance.sqrt()
    }

    #[test]
    fn time_step_examples() {
        let mut edges = EdgeGeometry {
            edge_vectors: vec![],
            lengths: vec![0.5, 0.1, 0.3],
            curvatures: vec![],
            angles: vec![],
            angle_before_first: 0.0,
            angle_past_last: 0.0,
        };
        let (tau, eta) = adaptive_time_step(&edges, &[0.0, 0.0, 0.0], 1.0, 0.0);
        assert!((eta - 400.0).abs() < 1e-9);
        assert!((tau - 1.25e-3).abs() < 1e-15);

        let (tau, eta) = adaptive_time_step(&edges, &[20.0, -20.0, 5.0], 1.0, 0.0);
        assert!((eta - 800.0).abs() < 1e-9);
        assert!((tau - 6.25e-4).abs() < 1e-15);

        // A fast relaxation rate caps the step at its reciprocal; a slow
        // one leaves the dominance bound in charge.
        let (tau, _) = adaptive_time_step(&edges, &[0.0, 0.0, 0.0], 1.0, 50_000.0);
        assert!((tau - 2e-5).abs() < 1e-20);
        let (tau, _) = adaptive_time_step(&edges, &[0.0, 0.0, 0.0], 1.0, 10.0);
        assert!((tau - 1.25e-3).abs() < 1e-15);

        // Larger lambda shrinks the step further.
        edges.lengths = vec![0.1];
        let (tau_small, _) = adaptive_time_step(&edges, &[0.0], 3.0, 0.0);
        assert!((tau_small - 1.0 / (400.0 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn hexagon_coefficients_are_unit() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 6).unwrap();
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let alpha = vec![0.0; 6];
        let (tau, eta) = adaptive_time_step(&edges, &alpha, 1.0, 0.0);
        let force = UniformForce(0.0);
        let (coefficients, rhs) =
            assemble_position_system(&curve, &edges, &duals, &alpha, &force, tau, eta).unwrap();
        for v in 0..6 {
            assert!((coefficients.a[v] - 1.0).abs() < 1e-12);
            assert!((coefficients.c[v] - 1.0).abs() < 1e-12);
            assert!((coefficients.b[v] - 2.0).abs() < 1e-12);
        }
        // All edges length 1: eta = 4 * (1 + 0), tau = 1/8.
        assert!((tau - 0.125).abs() < 1e-15);
        assert!(coefficients.dominance_margin() > 0.0);
        // Zero force: rhs is the vertex itself.
        for (v, &p) in curve.vertices().iter().enumerate() {
            assert!(rhs[v].distance(p) < 1e-15);
        }
    }

    #[test]
    fn tangential_speeds_split_into_the_off_diagonals() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 6).unwrap();
        let edges = compute_edge_geometry(&curve).unwrap();
        let duals = compute_dual_geometry(&curve, &edges);
        let alpha = vec![0.5, -0.5, 0.25, 0.0, -0.25, 0.0];
        let force = UniformForce(0.0);
        let (tau, eta) = adaptive_time_step(&edges, &alpha, 1.0, 0.0);
        let (coefficients, _) =
            assemble_position_system(&curve, &edges, &duals, &alpha, &force, tau, eta).unwrap();
        for v in 0..6 {
            assert!((coefficients.a[v] - (1.0 - alpha[v] / 2.0)).abs() < 1e-12);
            assert!((coefficients.c[v] - (1.0 + alpha[v] / 2.0)).abs() < 1e-12);
            // b stays free of alpha.
            assert!((coefficients.b[v] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_step_shrinks_the_circle_at_the_curvature_rate() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 200).unwrap();
        let state = EvolutionState::new(curve);
        let params = RedistributionParams::new(0.0, 0.0).unwrap();
        let force = UniformForce(0.0);
        let (next, diagnostics) = step(&state, &force, Some(&params), 1.0).unwrap();
        let shrink = mean_radius(&state.curve) - mean_radius(&next.curve);
        // Curvature of the unit circle is 1, so one step shrinks the
        // radius by about tau.
        assert!(
            (shrink - diagnostics.tau).abs() < 0.1 * diagnostics.tau,
            "shrink {shrink}, tau {}",
            diagnostics.tau
        );
    }

    #[test]
    fn balanced_force_leaves_the_circle_still() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 0.5, 100).unwrap();
        let state = EvolutionState::new(curve);
        let force = UniformForce(-2.0);
        let (next, diagnostics) = step(&state, &force, None, 1.0).unwrap();
        let max_move = state
            .curve
            .vertices()
            .iter()
            .zip(next.curve.vertices())
            .map(|(a, b)| a.distance(*b))
            .fold(0.0f64, f64::max);
        assert!(
            max_move <= 1e-3 * diagnostics.tau,
            "moved {max_move} in one step of {}",
            diagnostics.tau
        );
    }

    #[test]
    fn step_advances_time_by_exactly_tau() {
        let curve = PolygonalCurve::circle(Vec2::new(0.1, 0.2), 0.8, 32).unwrap();
        let state = EvolutionState::new(curve);
        let force = UniformForce(1.0);
        let (next, diagnostics) = step(&state, &force, None, 1.0).unwrap();
        assert_eq!(next.time, diagnostics.tau);
        assert_eq!(next.step_index, 1);
        let (after, second) = step(&next, &force, None, 1.0).unwrap();
        assert_eq!(after.time, next.time + second.tau);
    }

    #[test]
    fn steps_commute_with_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let base: Vec<Vec2> = (0..40)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / 40.0;
                let radius = 0.9 + 0.1 * (3.0 * theta).sin();
                Vec2::new(radius * theta.cos(), radius * theta.sin())
            })
            .collect();
        let shift = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let shifted: Vec<Vec2> = base.iter().map(|&p| p + shift).collect();
        let params = RedistributionParams::new(0.2, 100.0).unwrap();
        let force = UniformForce(-0.5);

        let state_a = EvolutionState::new(PolygonalCurve::new(base).unwrap());
        let state_b = EvolutionState::new(PolygonalCurve::new(shifted).unwrap());
        let (next_a, _) = step(&state_a, &force, Some(&params), 1.0).unwrap();
        let (next_b, _) = step(&state_b, &force, Some(&params), 1.0).unwrap();
        for (a, b) in next_a.curve.vertices().iter().zip(next_b.curve.vertices()) {
            assert!((*a + shift).distance(*b) < 1e-10);
        }
    }

    #[test]
    fn fixed_time_run_matches_shrinking_law() {
        // R(t) = sqrt(R0^2 - 2t) for motion by curvature.
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 64).unwrap();
        let force = UniformForce(0.0);
        let stop = StoppingCriterion::fixed_time(0.05);
        let outcome = run(curve, &force, None, 1.0, &stop).unwrap();
        assert_eq!(outcome.reason, StopReason::FixedTimeReached);
        assert!(outcome.state.time >= 0.05);
        let expected = (1.0f64 - 2.0 * outcome.state.time).sqrt();
        assert!(
            (mean_radius(&outcome.state.curve) - expected).abs() < 0.01,
            "radius {} expected {expected}",
            mean_radius(&outcome.state.curve)
        );
        assert_eq!(outcome.state.curve.len(), 64);
    }

    /// Pulls circles toward radius 0.5 from both sides: the force exceeds
    /// the curvature outside that radius and falls below it inside, so the
    /// rest state attracts and vertex speeds genuinely decay to zero.
    struct RadialWell;

    impl Force for RadialWell {
        fn at(&self, p: Vec2) -> f64 {
            8.0 * (p.norm() - 0.5) - 2.0
        }
    }

    #[test]
    fn stationary_stop_finds_the_rest_radius() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 0.8, 64).unwrap();
        let stop = StoppingCriterion::stationary(1e-3, 10).or_max_steps(100_000);
        let outcome = run(curve, &RadialWell, None, 1.0, &stop).unwrap();
        assert_eq!(outcome.reason, StopReason::Stationary);
        assert!((mean_radius(&outcome.state.curve) - 0.5).abs() < 0.01);
    }

    #[test]
    fn step_budget_is_reported_distinctly() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 16).unwrap();
        let force = UniformForce(0.0);
        let stop = StoppingCriterion::max_steps(5);
        let outcome = run(curve, &force, None, 1.0, &stop).unwrap();
        assert_eq!(outcome.reason, StopReason::StepBudgetExhausted);
        assert_eq!(outcome.log.len(), 5);
        assert_eq!(outcome.state.step_index, 5);
    }

    #[test]
    fn zero_budget_returns_the_initial_state() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 16).unwrap();
        let force = UniformForce(0.0);
        let stop = StoppingCriterion::max_steps(0);
        let outcome = run(curve.clone(), &force, None, 1.0, &stop).unwrap();
        assert_eq!(outcome.state.time, 0.0);
        assert!(outcome.log.is_empty());
        assert_eq!(outcome.state.curve, curve);
    }

    #[test]
    fn empty_criterion_and_bad_lambda_are_rejected() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 16).unwrap();
        let force = UniformForce(0.0);
        let empty = StoppingCriterion::default();
        assert!(matches!(
            run(curve.clone(), &force, None, 1.0, &empty),
            Err(EvolutionError::InvalidStop(_))
        ));
        let stop = StoppingCriterion::max_steps(1);
        assert!(matches!(
            run(curve, &force, None, 0.0, &stop),
            Err(EvolutionError::InvalidLambda(_))
        ));
    }

    #[test]
    fn curve_shortening_never_lengthens_without_force() {
        let vertices: Vec<Vec2> = (0..80)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / 80.0;
                Vec2::new(1.2 * theta.cos(), 0.8 * theta.sin())
            })
            .collect();
        let force = UniformForce(0.0);
        let params = RedistributionParams::uniform(50.0).unwrap();
        for redistribution in [None, Some(&params)] {
            let curve = PolygonalCurve::new(vertices.clone()).unwrap();
            let stop = StoppingCriterion::max_steps(300);
            let outcome = run(curve, &force, redistribution, 1.0, &stop).unwrap();
            for pair in outcome.log.windows(2) {
                let before = pair[0].length;
                let after = pair[1].length;
                assert!(
                    after <= before * (1.0 + 1e-9),
                    "length grew from {before} to {after}"
                );
            }
        }
    }

    #[test]
    fn spacing_deviation_relaxes_on_the_balanced_circle() {
        // Unevenly parametrized circle at the balance radius: the shape
        // stays put while redistribution evens out the spacing.
        let n = 100;
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let vertices: Vec<Vec2> = (0..n)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / n as f64 + rng.gen_range(-0.02..0.02);
                Vec2::new(0.5 * theta.cos(), 0.5 * theta.sin())
            })
            .collect();
        let curve = PolygonalCurve::new(vertices).unwrap();
        assert!(spacing_deviation(&curve) > 0.05);

        let force = UniformForce(-2.0);
        let params = RedistributionParams::uniform(100.0).unwrap();
        let mut deviations = Vec::new();
        let stop = StoppingCriterion::max_steps(3000);
        let outcome = run_with_observer(
            curve,
            &force,
            Some(&params),
            1.0,
            &stop,
            |state, _| deviations.push(spacing_deviation(&state.curve)),
        )
        .unwrap();
        let final_deviation = *deviations.last().unwrap();
        assert!(
            final_deviation < 0.02,
            "spacing deviation stuck at {final_deviation}"
        );
        let transient = deviations.len() / 10;
        for (i, pair) in deviations[transient..].windows(2).enumerate() {
            assert!(
                pair[1] <= pair[0] + 1e-12,
                "deviation rose at step {}: {} -> {}",
                transient + i,
                pair[0],
                pair[1]
            );
        }
        assert_eq!(outcome.state.curve.len(), n);
    }

    #[test]
    fn diagnostics_expose_solver_health() {
        let curve = PolygonalCurve::circle(Vec2::ZERO, 1.0, 32).unwrap();
        let force = UniformForce(0.0);
        let params = RedistributionParams::new(0.2, 100.0).unwrap();
        let stop = StoppingCriterion::max_steps(20);
        let outcome = run(curve, &force, Some(&params), 1.0, &stop).unwrap();
        for record in &outcome.log {
            assert!(record.dominance_margin > 0.0);
            assert!(record.tau > 0.0);
            assert!(record.r_min > 0.0);
            assert!(record.max_speed.is_finite());
            let bound = 1e-10 * record.length * (1.0 + record.alpha_max);
            assert!(record.mean_zero_residual <= bound);
        }
    }
}
