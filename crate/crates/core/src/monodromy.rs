//! Monodromy enumeration of decompositions via triangle loops.
//!
//! Starting from one real decomposition of a real polynomial vector, every
//! known solution is carried around a loop `base → P_1 → P_2 → base` through
//! two random complex parameter points. Endpoints that are new decompositions
//! are added to the registry; the run stops once several consecutive loops
//! bring nothing new.

use crate::error::{Error, Result};
use crate::linalg::ComplexRing;
use crate::polyspace::{forward_map, ProblemSpec};
use crate::system::{inf_norm, DecompositionPoint, WaringSystem};
use crate::tracker::{newton_refine, track_segment, TrackOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonodromyOptions {
    /// Consecutive loops without a new class before stopping.
    pub saturation: usize,
    pub max_loops: usize,
    pub dedupe_tol: f64,
    pub reality_tol: f64,
    /// A summand whose weights are all below this is degenerate.
    pub degenerate_weight: f64,
    /// Rotate the midpoint of the first (real-to-complex) leg by a random unit complex.
    pub rotate_first_leg: bool,
    pub track: TrackOptions,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self {
            saturation: 5,
            max_loops: 50,
            dedupe_tol: 1e-6,
            reality_tol: 1e-6,
            degenerate_weight: 1e-10,
            rotate_first_leg: false,
            track: TrackOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealityTag {
    Real,
    SelfConjugate,
    ComplexPaired,
}

impl fmt::Display for RealityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RealityTag::Real => "real",
            RealityTag::SelfConjugate => "self-conjugate",
            RealityTag::ComplexPaired => "complex-paired",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionClass {
    pub point: DecompositionPoint,
    pub tag: RealityTag,
    pub residual_norm: f64,
    /// How many loop endpoints landed on this class, including its discovery.
    pub multiplicity: usize,
    pub real_blocks: usize,
    pub conjugate_block_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A single decomposition over ℂ.
    IdentifiableOverC,
    /// Several complex decompositions, exactly one of them real.
    IdentifiableOverROnly,
    /// More than one real decomposition.
    NotIdentifiable,
    /// Several complex decompositions, none real.
    NoRealDecomposition,
}

impl Verdict {
    fn from_counts(complex: usize, real: usize) -> Self {
        match (complex, real) {
            (1, _) => Verdict::IdentifiableOverC,
            (_, 1) => Verdict::IdentifiableOverROnly,
            (_, 0) => Verdict::NoRealDecomposition,
            _ => Verdict::NotIdentifiable,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::IdentifiableOverC => "identifiable over ℂ",
            Verdict::IdentifiableOverROnly => "identifiable over ℝ, not over ℂ",
            Verdict::NotIdentifiable => "not identifiable over ℝ, not over ℂ",
            Verdict::NoRealDecomposition => "no real decomposition, not identifiable over ℂ",
        })
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoopStats {
    pub loops_run: usize,
    pub paths_tracked: usize,
    pub paths_failed: usize,
    pub degenerate_discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyReport {
    pub schema_version: u32,
    pub spec: ProblemSpec,
    pub k: usize,
    pub seed: u64,
    pub start_point: DecompositionPoint,
    #[serde(with = "crate::serde_complex")]
    pub base_parameters: Vec<Complex64>,
    pub classes: Vec<SolutionClass>,
    pub count_complex: usize,
    pub count_real: usize,
    pub count_self_conjugate: usize,
    pub count_complex_paired: usize,
    pub stats: LoopStats,
    pub saturated: bool,
    pub verdict: Verdict,
}

impl MonodromyReport {
    /// Every class's conjugate is also a class (expected for real parameters).
    pub fn is_conjugation_closed(&self, tol: f64) -> bool {
        self.classes.iter().all(|c| {
            let conj = c.point.conj();
            self.classes.iter().any(|d| same_decomposition(&conj, &d.point, tol))
        })
    }
}

fn uniform_point(spec: &ProblemSpec, k: usize, rng: &mut ChaCha8Rng, round: bool) -> Result<DecompositionPoint> {
    let coords: Vec<f64> = (0..k * spec.block_size())
        .map(|_| {
            let x: f64 = rng.random_range(-1.0..=1.0);
            if round {
                (x * 100.0).round() / 100.0
            } else {
                x
            }
        })
        .collect();
    DecompositionPoint::from_real(spec.block_size(), &coords)
}

/// A random real decomposition with entries in `[-1, 1]` and the polynomial
/// vector it decomposes.
pub fn generate_start_instance(spec: &ProblemSpec, k: usize, seed: u64) -> Result<(DecompositionPoint, Vec<Complex64>)> {
    generate_start_instance_with(spec, k, seed, false)
}

/// As [`generate_start_instance`], optionally rounding entries to two decimals.
pub fn generate_start_instance_with(
    spec: &ProblemSpec,
    k: usize,
    seed: u64,
    round_two_decimals: bool,
) -> Result<(DecompositionPoint, Vec<Complex64>)> {
    let unknowns = k * spec.block_size();
    if unknowns != spec.ambient_dim() {
        return Err(Error::NonSquare {
            equations: spec.ambient_dim(),
            unknowns,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = uniform_point(spec, k, &mut rng, round_two_decimals)?;
    let params = forward_map(&ComplexRing, spec, point.coords())?;
    Ok((point, params))
}

fn random_complex_params(len: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LoopOutcome {
    /// Successful endpoints at the base parameters, in input order.
    pub endpoints: Vec<DecompositionPoint>,
    pub failed: usize,
}

/// Carries every known solution once around a random triangle loop.
pub fn triangle_loop(
    spec: &ProblemSpec,
    k: usize,
    base_params: &[Complex64],
    known_points: &[DecompositionPoint],
    seed: u64,
    options: &MonodromyOptions,
) -> Result<LoopOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = random_complex_params(base_params.len(), &mut rng);
    let p2 = random_complex_params(base_params.len(), &mut rng);
    let mut first_leg = options.track.clone();
    if options.rotate_first_leg {
        first_leg.midpoint_rotation = Some(rng.random_range(0.0..std::f64::consts::TAU));
    }
    let legs: [(&[Complex64], &[Complex64], &TrackOptions); 3] = [
        (base_params, &p1, &first_leg),
        (&p1, &p2, &options.track),
        (&p2, base_params, &options.track),
    ];
    let results: Vec<Option<DecompositionPoint>> = known_points
        .par_iter()
        .map(|start| -> Result<Option<DecompositionPoint>> {
            let mut x = start.clone();
            for (from, to, opts) in legs {
                let r = track_segment(spec, k, from, to, &x, opts)?;
                if !r.is_success() {
                    return Ok(None);
                }
                x = r.endpoint;
            }
            Ok(Some(x))
        })
        .collect::<Result<_>>()?;
    let failed = results.iter().filter(|r| r.is_none()).count();
    Ok(LoopOutcome {
        endpoints: results.into_iter().flatten().collect(),
        failed,
    })
}

fn grid_key(x: f64, tol: f64) -> i64 {
    (x / tol).round() as i64
}

/// Sorts blocks by their coordinates rounded to the `tol` grid, linear
/// coefficients first.
pub fn canonicalize(point: &DecompositionPoint, tol: f64) -> DecompositionPoint {
    let mut order: Vec<usize> = (0..point.k()).collect();
    let keys: Vec<Vec<(i64, i64)>> = point
        .blocks()
        .map(|b| b.iter().map(|z| (grid_key(z.re, tol), grid_key(z.im, tol))).collect())
        .collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    point.permuted(&order)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

fn blocks_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(&x, &y)| close(x, y, tol))
}

/// Whether two points are the same decomposition up to block order.
pub fn same_decomposition(a: &DecompositionPoint, b: &DecompositionPoint, tol: f64) -> bool {
    if a.k() != b.k() || a.block_size() != b.block_size() {
        return false;
    }
    let mut used = vec![false; b.k()];
    a.blocks().all(|ba| {
        let hit = (0..b.k()).find(|&j| !used[j] && blocks_close(ba, b.block(j), tol));
        if let Some(j) = hit {
            used[j] = true;
        }
        hit.is_some()
    })
}

fn is_real_block(block: &[Complex64], tol: f64) -> bool {
    block.iter().all(|z| z.im.abs() < tol)
}

/// Reality tag plus `(real blocks, conjugate block pairs)`.
pub fn classify(point: &DecompositionPoint, reality_tol: f64, dedupe_tol: f64) -> (RealityTag, usize, usize) {
    let real_blocks = point.blocks().filter(|b| is_real_block(b, reality_tol)).count();
    let complex: Vec<&[Complex64]> = point.blocks().filter(|b| !is_real_block(b, reality_tol)).collect();
    let mut used = vec![false; complex.len()];
    let mut pairs = 0;
    for i in 0..complex.len() {
        if used[i] {
            continue;
        }
        let conj: Vec<Complex64> = complex[i].iter().map(|z| z.conj()).collect();
        if let Some(j) = (i + 1..complex.len()).find(|&j| !used[j] && blocks_close(&conj, complex[j], dedupe_tol)) {
            used[i] = true;
            used[j] = true;
            pairs += 1;
        }
    }
    let tag = if real_blocks == point.k() {
        RealityTag::Real
    } else if same_decomposition(point, &point.conj(), dedupe_tol) {
        RealityTag::SelfConjugate
    } else {
        RealityTag::ComplexPaired
    };
    (tag, real_blocks, pairs)
}

fn is_degenerate(point: &DecompositionPoint, n: usize, options: &MonodromyOptions) -> bool {
    let dead_summand = point
        .blocks()
        .any(|b| b[n..].iter().all(|w| w.norm() < options.degenerate_weight));
    let k = point.k();
    let coincident = (0..k).any(|i| (i + 1..k).any(|j| blocks_close(&point.block(i)[..n], &point.block(j)[..n], options.dedupe_tol)));
    dead_summand || coincident
}

fn make_class(point: DecompositionPoint, residual_norm: f64, options: &MonodromyOptions) -> SolutionClass {
    let point = canonicalize(&point, options.dedupe_tol);
    let (tag, real_blocks, conjugate_block_pairs) = classify(&point, options.reality_tol, options.dedupe_tol);
    SolutionClass {
        point,
        tag,
        residual_norm,
        multiplicity: 1,
        real_blocks,
        conjugate_block_pairs,
    }
}

/// Full run from a random start instance drawn with `seed`.
pub fn run_monodromy(spec: &ProblemSpec, k: usize, seed: u64, options: &MonodromyOptions) -> Result<MonodromyReport> {
    let (point, params) = generate_start_instance(spec, k, seed)?;
    run_monodromy_from(spec, k, point, params, seed, options)
}

/// Full run from a given start point and the parameters it solves.
pub fn run_monodromy_from(
    spec: &ProblemSpec,
    k: usize,
    start_point: DecompositionPoint,
    base_parameters: Vec<Complex64>,
    seed: u64,
    options: &MonodromyOptions,
) -> Result<MonodromyReport> {
    options.track.validate()?;
    let system = WaringSystem::new(spec.clone(), k, base_parameters.clone())?;
    let start_res = system.residual_norm(&start_point)?;
    if start_res > 1e-8 * inf_norm(&base_parameters).max(1.0) {
        return Err(Error::Shape(format!("start point does not solve the base system (residual {start_res:.3e})")));
    }
    let polished = newton_refine(&system, &start_point, 1e-14, 3)?;
    let mut classes = vec![make_class(polished.point, polished.residual_norm, options)];
    let mut stats = LoopStats::default();
    let mut stale = 0;
    // loop seeds come from their own stream so they do not overlap the start instance
    let mut seeder = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6e6f_6472_6f6d);
    while stats.loops_run < options.max_loops && stale < options.saturation {
        let known: Vec<DecompositionPoint> = classes.iter().map(|c| c.point.clone()).collect();
        let outcome = triangle_loop(spec, k, &base_parameters, &known, seeder.random(), options)?;
        stats.loops_run += 1;
        stats.paths_tracked += known.len();
        stats.paths_failed += outcome.failed;
        let mut discovered = false;
        for endpoint in outcome.endpoints {
            let refined = match newton_refine(&system, &endpoint, 1e-13, 3) {
                Ok(r) => r,
                Err(_) => {
                    stats.paths_failed += 1;
                    continue;
                }
            };
            if refined.residual_norm >= options.track.endpoint_tol || !refined.point.is_finite() {
                stats.paths_failed += 1;
                continue;
            }
            if is_degenerate(&refined.point, spec.n(), options) {
                stats.degenerate_discarded += 1;
                continue;
            }
            if let Some(c) = classes
                .iter_mut()
                .find(|c| same_decomposition(&c.point, &refined.point, options.dedupe_tol))
            {
                c.multiplicity += 1;
            } else {
                classes.push(make_class(refined.point, refined.residual_norm, options));
                discovered = true;
            }
        }
        stale = if discovered { 0 } else { stale + 1 };
    }
    let count = |tag| classes.iter().filter(|c| c.tag == tag).count();
    let count_real = count(RealityTag::Real);
    Ok(MonodromyReport {
        schema_version: crate::SCHEMA_VERSION,
        spec: spec.clone(),
        k,
        seed,
        start_point,
        base_parameters,
        count_complex: classes.len(),
        count_real,
        count_self_conjugate: count(RealityTag::SelfConjugate),
        count_complex_paired: count(RealityTag::ComplexPaired),
        verdict: Verdict::from_counts(classes.len(), count_real),
        saturated: stale >= options.saturation,
        classes,
        stats,
    })
}
