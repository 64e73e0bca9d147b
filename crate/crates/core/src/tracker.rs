//! Predictor-corrector tracking along straight segments in parameter space.
//!
//! The homotopy is `H(x, t) = p(t) − Φ(x)` with `p(t) = (1 − t) p_0 + t p_1`.
//! Its tangent is `dx/dt = J_Φ(x)^{-1} (p_1 − p_0)`; each step takes an Euler
//! prediction along it and corrects with Newton at the new `t`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexRing, LuFactors};
use crate::polyspace::{forward_jacobian, forward_map, ProblemSpec};
use crate::system::{inf_norm, DecompositionPoint, WaringSystem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Corrector tolerance on the residual ∞-norm, scaled by `max(1, ‖p(t)‖∞)`.
    pub newton_tol: f64,
    pub max_corrector_iters: usize,
    pub max_steps: usize,
    pub shrink: f64,
    pub grow: f64,
    pub endpoint_iters: usize,
    /// Absolute residual bound a successful endpoint must meet.
    pub endpoint_tol: f64,
    pub divergence_bound: f64,
    /// Largest first Newton correction accepted, relative to `1 + ‖x‖∞`.
    pub max_correction: f64,
    /// When set, the segment is replaced by the two legs `p_0 → γ m → p_1`,
    /// `m` the midpoint, `γ = exp(i θ)` with `θ` this angle.
    pub midpoint_rotation: Option<f64>,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_step: 1e-7,
            max_step: 0.25,
            newton_tol: 1e-10,
            max_corrector_iters: 3,
            max_steps: 10_000,
            shrink: 0.5,
            grow: 1.25,
            endpoint_iters: 5,
            endpoint_tol: 1e-9,
            divergence_bound: 1e8,
            max_correction: 0.1,
            midpoint_rotation: None,
        }
    }
}

impl TrackOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step <= 1.0;
        if !ok {
            return Err(Error::TrackOptions(format!(
                "need 0 < min_step ({}) <= initial_step ({}) <= max_step ({}) <= 1",
                self.min_step, self.initial_step, self.max_step
            )));
        }
        if !(0.0 < self.shrink && self.shrink < 1.0 && self.grow >= 1.0) {
            return Err(Error::TrackOptions("need 0 < shrink < 1 <= grow".into()));
        }
        if !(self.newton_tol > 0.0 && self.endpoint_tol > 0.0) || self.max_corrector_iters == 0 {
            return Err(Error::TrackOptions("tolerances and corrector iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStatus {
    Success,
    Diverged,
    StepUnderflow,
    Singular,
    MaxSteps,
    EndpointFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub status: PathStatus,
    pub endpoint: DecompositionPoint,
    pub residual_norm: f64,
    pub steps: usize,
}

impl PathResult {
    pub fn is_success(&self) -> bool {
        self.status == PathStatus::Success
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub point: DecompositionPoint,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton's method on a square system; stops once the residual ∞-norm is at most `tol`.
pub fn newton_refine(
    system: &WaringSystem,
    point: &DecompositionPoint,
    tol: f64,
    max_iters: usize,
) -> Result<NewtonOutcome> {
    system.require_square()?;
    let mut x = point.clone();
    let mut res = system.residual(&x)?;
    let mut norm = inf_norm(&res);
    let mut iterations = 0;
    while norm > tol && iterations < max_iters {
        let jac = forward_jacobian(&ComplexRing, system.spec(), x.coords())?;
        let delta = LuFactors::new(&jac)?.solve(&res);
        let coords = x.coords().iter().zip(&delta).map(|(a, d)| a + d).collect();
        x = DecompositionPoint::new(x.block_size(), coords)?;
        res = system.residual(&x)?;
        norm = inf_norm(&res);
        iterations += 1;
    }
    Ok(NewtonOutcome {
        point: x,
        residual_norm: norm,
        iterations,
        converged: norm <= tol,
    })
}

struct Segment<'a> {
    spec: &'a ProblemSpec,
    start: &'a [Complex64],
    end: &'a [Complex64],
    direction: Vec<Complex64>,
}

impl<'a> Segment<'a> {
    fn new(spec: &'a ProblemSpec, start: &'a [Complex64], end: &'a [Complex64]) -> Self {
        let direction = end.iter().zip(start).map(|(b, a)| b - a).collect();
        Self {
            spec,
            start,
            end,
            direction,
        }
    }

    fn params_at(&self, t: f64) -> Vec<Complex64> {
        if t == 1.0 {
            return self.end.to_vec();
        }
        self.start.iter().zip(&self.direction).map(|(a, d)| a + d * t).collect()
    }

    fn residual(&self, params: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
        let model = forward_map(&ComplexRing, self.spec, x)?;
        Ok(params.iter().zip(model).map(|(p, m)| p - m).collect())
    }

    /// Newton at fixed parameters. `None` when the corrector does not converge.
    fn correct(
        &self,
        params: &[Complex64],
        mut x: Vec<Complex64>,
        iters: usize,
        tol: f64,
        max_first: Option<f64>,
    ) -> Result<Option<(Vec<Complex64>, f64)>> {
        let mut res = self.residual(params, &x)?;
        let mut norm = inf_norm(&res);
        for it in 0..iters {
            if norm <= tol {
                break;
            }
            let jac = forward_jacobian(&ComplexRing, self.spec, &x)?;
            let delta = match LuFactors::new(&jac) {
                Ok(lu) => lu.solve(&res),
                Err(Error::Singular { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            if it == 0 {
                if let Some(bound) = max_first {
                    if inf_norm(&delta) > bound * (1.0 + inf_norm(&x)) {
                        return Ok(None);
                    }
                }
            }
            for (a, d) in x.iter_mut().zip(&delta) {
                *a += d;
            }
            res = self.residual(params, &x)?;
            norm = inf_norm(&res);
        }
        Ok((norm <= tol && norm.is_finite()).then_some((x, norm)))
    }
}

fn scaled_tol(tol: f64, params: &[Complex64]) -> f64 {
    tol * inf_norm(params).max(1.0)
}

/// Tracks `start_point` from `params_start` to `params_end`.
///
/// Configuration problems (non-square system, bad shapes or options, a start
/// point that is not a solution) are errors; path failures are reported in
/// the returned [`PathResult`].
pub fn track_segment(
    spec: &ProblemSpec,
    k: usize,
    params_start: &[Complex64],
    params_end: &[Complex64],
    start_point: &DecompositionPoint,
    options: &TrackOptions,
) -> Result<PathResult> {
    options.validate()?;
    let sys = WaringSystem::new(spec.clone(), k, params_start.to_vec())?;
    sys.with_parameters(params_end.to_vec())?;
    let start_res = sys.residual_norm(start_point)?;
    if start_res > 1e-8 * inf_norm(params_start).max(1.0) {
        return Err(Error::Shape(format!(
            "start point is not a solution at the start parameters (residual {start_res:.3e})"
        )));
    }
    match options.midpoint_rotation {
        None => Ok(track_leg(spec, params_start, params_end, start_point, options)),
        Some(theta) => {
            let gamma = Complex64::from_polar(1.0, theta);
            let mid: Vec<Complex64> = params_start
                .iter()
                .zip(params_end)
                .map(|(a, b)| gamma * (a + b) * 0.5)
                .collect();
            let first = track_leg(spec, params_start, &mid, start_point, options);
            if !first.is_success() {
                return Ok(first);
            }
            let mut second = track_leg(spec, &mid, params_end, &first.endpoint, options);
            second.steps += first.steps;
            Ok(second)
        }
    }
}

fn track_leg(
    spec: &ProblemSpec,
    params_start: &[Complex64],
    params_end: &[Complex64],
    start_point: &DecompositionPoint,
    options: &TrackOptions,
) -> PathResult {
    match track_leg_inner(spec, params_start, params_end, start_point, options) {
        Ok(r) => r,
        // shape errors were ruled out by the caller; anything left is numerical
        Err(_) => PathResult {
            status: PathStatus::Singular,
            endpoint: start_point.clone(),
            residual_norm: f64::INFINITY,
            steps: 0,
        },
    }
}

fn track_leg_inner(
    spec: &ProblemSpec,
    params_start: &[Complex64],
    params_end: &[Complex64],
    start_point: &DecompositionPoint,
    options: &TrackOptions,
) -> Result<PathResult> {
    let bs = start_point.block_size();
    let seg = Segment::new(spec, params_start, params_end);
    let finish = |status, x: Vec<Complex64>, residual_norm, steps| -> Result<PathResult> {
        Ok(PathResult {
            status,
            endpoint: DecompositionPoint::new(bs, x)?,
            residual_norm,
            steps,
        })
    };

    let mut x = start_point.coords().to_vec();
    if params_start == params_end {
        let norm = inf_norm(&seg.residual(params_end, &x)?);
        return finish(PathStatus::Success, x, norm, 0);
    }

    let mut t = 0.0f64;
    let mut h = options.initial_step;
    let mut steps = 0;
    while t < 1.0 {
        if steps >= options.max_steps {
            let norm = inf_norm(&seg.residual(&seg.params_at(t), &x)?);
            return finish(PathStatus::MaxSteps, x, norm, steps);
        }
        steps += 1;
        let jac = forward_jacobian(&ComplexRing, spec, &x)?;
        let tangent = match LuFactors::new(&jac) {
            Ok(lu) => lu.solve(&seg.direction),
            Err(Error::Singular { .. }) => {
                let norm = inf_norm(&seg.residual(&seg.params_at(t), &x)?);
                return finish(PathStatus::Singular, x, norm, steps);
            }
            Err(e) => return Err(e),
        };
        let step = h.min(1.0 - t);
        let t_next = if t + step >= 1.0 - 1e-14 { 1.0 } else { t + step };
        let dt = t_next - t;
        let predicted: Vec<Complex64> = x.iter().zip(&tangent).map(|(a, d)| a + d * dt).collect();
        let params = seg.params_at(t_next);
        let tol = scaled_tol(options.newton_tol, &params);
        match seg.correct(
            &params,
            predicted,
            options.max_corrector_iters,
            tol,
            Some(options.max_correction),
        )? {
            Some((corrected, _)) => {
                x = corrected;
                t = t_next;
                h = (h * options.grow).min(options.max_step);
                if inf_norm(&x) > options.divergence_bound {
                    let norm = inf_norm(&seg.residual(&params, &x)?);
                    return finish(PathStatus::Diverged, x, norm, steps);
                }
            }
            None => {
                h *= options.shrink;
                if h < options.min_step {
                    let norm = inf_norm(&seg.residual(&seg.params_at(t), &x)?);
                    return finish(PathStatus::StepUnderflow, x, norm, steps);
                }
            }
        }
    }

    // polish at the target; stop early once rounding dominates
    let mut res = seg.residual(params_end, &x)?;
    let mut norm = inf_norm(&res);
    for _ in 0..options.endpoint_iters {
        if norm <= 1e-15 * inf_norm(params_end).max(1.0) {
            break;
        }
        let jac = forward_jacobian(&ComplexRing, spec, &x)?;
        let Ok(lu) = LuFactors::new(&jac) else {
            return finish(PathStatus::Singular, x, norm, steps);
        };
        let delta = lu.solve(&res);
        let candidate: Vec<Complex64> = x.iter().zip(&delta).map(|(a, d)| a + d).collect();
        let cres = seg.residual(params_end, &candidate)?;
        let cnorm = inf_norm(&cres);
        if !(cnorm < norm) {
            break;
        }
        x = candidate;
        res = cres;
        norm = cnorm;
    }
    let status = if norm < options.endpoint_tol {
        PathStatus::Success
    } else {
        PathStatus::EndpointFailed
    };
    finish(status, x, norm, steps)
}
