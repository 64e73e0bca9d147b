use crate::{to_json, CliError, Outcome, OutputFormat, SpecArgs, EXIT_MISMATCH, EXIT_NUMERICAL, EXIT_OK};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::path::PathBuf;
use waring_core::monodromy::{run_monodromy_from, same_decomposition};
use waring_core::polyspace::forward_map;
use waring_core::{
    run_monodromy, track_segment, Complex64, ComplexRing, DecompositionPoint, MonodromyOptions, MonodromyReport,
    ProblemSpec, RealityTag, TrackOptions,
};

const BUNDLED_FIXTURE: &str = include_str!("../fixtures/theorem_start_point.json");

/// Relative tolerance for comparing against the printed reference solutions.
pub const REFERENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Args)]
pub struct TrackerArgs {
    #[arg(long)]
    pub initial_step: Option<f64>,
    #[arg(long)]
    pub min_step: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub max_corrector_iters: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Rotate the midpoint of the first leg of each loop off the real line.
    #[arg(long)]
    pub rotate_first_leg: bool,
}

impl TrackerArgs {
    fn apply(&self, opts: &mut MonodromyOptions) {
        let t = &mut opts.track;
        if let Some(v) = self.initial_step {
            t.initial_step = v;
        }
        if let Some(v) = self.min_step {
            t.min_step = v;
        }
        if let Some(v) = self.max_step {
            t.max_step = v;
        }
        if let Some(v) = self.newton_tol {
            t.newton_tol = v;
        }
        if let Some(v) = self.max_corrector_iters {
            t.max_corrector_iters = v;
        }
        if let Some(v) = self.max_steps {
            t.max_steps = v;
        }
        opts.rotate_first_leg |= self.rotate_first_leg;
    }
}

#[derive(Debug, Clone, Args)]
pub struct MonodromyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Number of summands; must satisfy k(n+r) = N.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Upper bound on the number of loops.
    #[arg(long)]
    pub loops: Option<usize>,
    /// Stop after this many consecutive loops without a new class.
    #[arg(long)]
    pub saturation: Option<usize>,
    #[command(flatten)]
    pub tracker: TrackerArgs,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

fn monodromy_options(loops: Option<usize>, saturation: Option<usize>, tracker: Option<&TrackerArgs>) -> Result<MonodromyOptions, CliError> {
    let mut opts = MonodromyOptions::default();
    if let Some(l) = loops {
        opts.max_loops = l;
    }
    if let Some(s) = saturation {
        if s == 0 {
            return Err(CliError::Config("--saturation must be at least 1".into()));
        }
        opts.saturation = s;
    }
    if let Some(t) = tracker {
        t.apply(&mut opts);
    }
    opts.track.validate()?;
    Ok(opts)
}

pub fn summary_line(report: &MonodromyReport) -> String {
    format!(
        "{} classes over ℂ; {} real, {} self-conjugate, {} complex-paired; verdict: {}; {}",
        report.count_complex,
        report.count_real,
        report.count_self_conjugate,
        report.count_complex_paired,
        report.verdict,
        if report.saturated { "saturated" } else { "not saturated (loop budget exhausted)" }
    )
}

fn class_table(report: &MonodromyReport) -> String {
    let mut s = String::from("class,tag,real_blocks,conjugate_block_pairs,multiplicity,residual_norm\n");
    for (i, c) in report.classes.iter().enumerate() {
        writeln!(
            s,
            "{},{},{},{},{},{:.3e}",
            i, c.tag, c.real_blocks, c.conjugate_block_pairs, c.multiplicity, c.residual_norm
        )
        .unwrap();
    }
    s
}

fn report_human(report: &MonodromyReport) -> String {
    let mut s = format!("{}  k={}  seed={}\n{}\n", report.spec, report.k, report.seed, summary_line(report));
    for (i, c) in report.classes.iter().enumerate() {
        writeln!(
            s,
            "  class {i}: {:<15} real blocks {}, conjugate pairs {}, hit {}x, residual {:.2e}",
            c.tag.to_string(),
            c.real_blocks,
            c.conjugate_block_pairs,
            c.multiplicity,
            c.residual_norm
        )
        .unwrap();
    }
    let st = &report.stats;
    writeln!(
        s,
        "  loops {}, paths tracked {}, failed {}, degenerate discarded {}",
        st.loops_run, st.paths_tracked, st.paths_failed, st.degenerate_discarded
    )
    .unwrap();
    s
}

fn all_paths_failed(report: &MonodromyReport) -> bool {
    report.stats.paths_tracked > 0 && report.stats.paths_failed >= report.stats.paths_tracked
}

pub fn cmd_monodromy(args: &MonodromyArgs) -> Result<Outcome, CliError> {
    let spec = args.spec.to_spec()?;
    if args.k == 0 || args.k * spec.block_size() != spec.ambient_dim() {
        return Err(CliError::Config(format!(
            "monodromy needs a square system: k(n+r) = {}·{} but N = {}",
            args.k,
            spec.block_size(),
            spec.ambient_dim()
        )));
    }
    let opts = monodromy_options(args.loops, args.saturation, Some(&args.tracker))?;
    let report = run_monodromy(&spec, args.k, args.seed, &opts)?;
    let mut human = report_human(&report);
    let exit_code = if all_paths_failed(&report) {
        human.push_str("every tracked path failed\n");
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    Ok(Outcome {
        human,
        json: to_json(&report),
        csv: Some(class_table(&report)),
        exit_code,
    })
}

/// A start point with the reference decompositions of the polynomial vector it defines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub schema_version: u32,
    pub spec: ProblemSpec,
    pub k: usize,
    pub start_point: DecompositionPoint,
    #[serde(default)]
    pub reference_solutions: Vec<DecompositionPoint>,
}

impl Fixture {
    pub fn bundled() -> Fixture {
        serde_json::from_str(BUNDLED_FIXTURE).expect("bundled fixture parses")
    }

    pub fn load(path: &std::path::Path) -> Result<Fixture, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read fixture {}: {e}", path.display())))?;
        let f: Fixture = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("malformed fixture {}: {e}", path.display())))?;
        if f.start_point.block_size() != f.spec.block_size() || f.start_point.k() != f.k {
            return Err(CliError::Config("fixture start point does not fit its spec".into()));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Fixture JSON; the bundled one is used when omitted.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturb the polynomial vector by this relative amount and track the start point there first.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    #[arg(long)]
    pub loops: Option<usize>,
    #[arg(long)]
    pub saturation: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceComparison {
    /// Index of the matched class in the monodromy report, if any.
    pub class: Option<usize>,
    pub matched: bool,
    /// Largest entrywise relative deviation after block matching.
    pub max_relative_deviation: Option<f64>,
    /// `‖f̄ − Φ(reference)‖∞ / ‖f̄‖∞`: whether the reference solves the fixture's system at all.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub schema_version: u32,
    pub seed: u64,
    pub perturb: f64,
    pub report: MonodromyReport,
    /// Some class equals the (tracked) fixture start point.
    pub start_recovered: bool,
    /// Two classes: one real, one self-conjugate with one conjugate pair and the rest real.
    pub structure_ok: bool,
    pub references: Vec<ReferenceComparison>,
    pub passed: bool,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Nearest-block matching of `reference` into `found`; returns the largest
/// entrywise relative deviation.
pub fn max_block_deviation(found: &DecompositionPoint, reference: &DecompositionPoint) -> Option<f64> {
    if found.k() != reference.k() || found.block_size() != reference.block_size() {
        return None;
    }
    let mut used = vec![false; found.k()];
    let mut worst: f64 = 0.0;
    for rb in reference.blocks() {
        let (j, d) = (0..found.k())
            .filter(|&j| !used[j])
            .map(|j| {
                let d = rb.iter().zip(found.block(j)).map(|(&x, &y)| rel(x, y)).fold(0.0, f64::max);
                (j, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        used[j] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

fn perturbed(params: &[Complex64], eps: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7065_7274_7572_6221);
    params
        .iter()
        .map(|&z| {
            // real perturbation: the open-set argument is about real polynomial vectors
            let re: f64 = StandardNormal.sample(&mut rng);
            z + re * eps * z.norm().max(1.0)
        })
        .collect()
}

pub fn replay(fixture: &Fixture, seed: u64, perturb: f64, opts: &MonodromyOptions) -> Result<ReplayReport, CliError> {
    if !(perturb.is_finite() && perturb >= 0.0) {
        return Err(CliError::Config("--perturb must be a non-negative number".into()));
    }
    let spec = &fixture.spec;
    let k = fixture.k;
    let base = forward_map(&ComplexRing, spec, fixture.start_point.coords())?;
    let base_norm = base.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let (start, params) = if perturb > 0.0 {
        let target = perturbed(&base, perturb, seed);
        let path = track_segment(spec, k, &base, &target, &fixture.start_point, &TrackOptions::default())?;
        if !path.is_success() {
            return Err(CliError::Numerical(format!(
                "tracking the start point to the perturbed vector failed: {:?}",
                path.status
            )));
        }
        (path.endpoint, target)
    } else {
        (fixture.start_point.clone(), base.clone())
    };
    let report = run_monodromy_from(spec, k, start.clone(), params, seed, opts)?;
    let start_recovered = report.classes.iter().any(|c| same_decomposition(&c.point, &start, opts.dedupe_tol));
    let n_real = report.count_real;
    let selfconj: Vec<_> = report.classes.iter().filter(|c| c.tag == RealityTag::SelfConjugate).collect();
    let structure_ok = report.count_complex == 2
        && n_real == 1
        && selfconj.len() == 1
        && selfconj[0].conjugate_block_pairs == 1
        && selfconj[0].real_blocks == k - 2;
    let references: Vec<ReferenceComparison> = fixture
        .reference_solutions
        .iter()
        .map(|r| {
            let image = forward_map(&ComplexRing, spec, r.coords())?;
            let relative_residual =
                image.iter().zip(&base).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / base_norm;
            let class = report.classes.iter().position(|c| same_decomposition(&c.point, r, REFERENCE_TOL));
            Ok(ReferenceComparison {
                class,
                matched: class.is_some(),
                max_relative_deviation: class.and_then(|i| max_block_deviation(&report.classes[i].point, r)),
                relative_residual,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let passed = start_recovered && structure_ok && references.iter().all(|r| r.matched);
    Ok(ReplayReport {
        schema_version: waring_core::SCHEMA_VERSION,
        seed,
        perturb,
        report,
        start_recovered,
        structure_ok,
        references,
        passed,
    })
}

fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (3 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn fmt_c(z: Complex64) -> String {
    if z.im.abs() < 5e-5 * z.norm().max(1.0) {
        sig4(z.re)
    } else {
        format!("{}{}{}i", sig4(z.re), if z.im < 0.0 { "-" } else { "+" }, sig4(z.im.abs()))
    }
}

fn side_by_side(found: &DecompositionPoint, reference: &DecompositionPoint) -> String {
    let mut s = String::new();
    let mut used = vec![false; found.k()];
    for (b, rb) in reference.blocks().enumerate() {
        let j = (0..found.k())
            .filter(|&j| !used[j])
            .min_by(|&a, &c| {
                let da = rb.iter().zip(found.block(a)).map(|(&x, &y)| rel(x, y)).fold(0.0, f64::max);
                let dc = rb.iter().zip(found.block(c)).map(|(&x, &y)| rel(x, y)).fold(0.0, f64::max);
                da.total_cmp(&dc)
            })
            .unwrap_or(b);
        if j < used.len() {
            used[j] = true;
        }
        writeln!(s, "  summand {}", b + 1).unwrap();
        for (i, &r) in rb.iter().enumerate() {
            writeln!(s, "    {:>22}   {:>22}", fmt_c(found.block(j)[i]), fmt_c(r)).unwrap();
        }
    }
    s
}

pub fn cmd_replay_theorem(args: &ReplayArgs) -> Result<Outcome, CliError> {
    let fixture = match &args.fixture {
        Some(p) => Fixture::load(p)?,
        None => Fixture::bundled(),
    };
    let opts = monodromy_options(args.loops, args.saturation, None)?;
    let rep = replay(&fixture, args.seed, args.perturb, &opts)?;
    let mut human = report_human(&rep.report);
    writeln!(human, "start point recovered: {}", if rep.start_recovered { "yes" } else { "no" }).unwrap();
    writeln!(
        human,
        "structure (1 real + 1 self-conjugate with one conjugate pair): {}",
        if rep.structure_ok { "ok" } else { "MISMATCH" }
    )
    .unwrap();
    for (i, (cmp, reference)) in rep.references.iter().zip(&fixture.reference_solutions).enumerate() {
        match (cmp.class, cmp.max_relative_deviation) {
            (Some(c), Some(d)) => {
                writeln!(human, "reference {i}: matches class {c} (max relative deviation {d:.2e})").unwrap();
                writeln!(human, "    {:>22}   {:>22}", "computed", "reference").unwrap();
                human.push_str(&side_by_side(&rep.report.classes[c].point, reference));
            }
            _ => {
                writeln!(
                    human,
                    "reference {i}: no class within {REFERENCE_TOL:e} relative; relative residual of the reference on the fixture system {:.2e}",
                    cmp.relative_residual
                )
                .unwrap();
                if let Some(c) = rep.report.classes.iter().position(|c| c.tag == RealityTag::SelfConjugate) {
                    writeln!(human, "    {:>22}   {:>22}", "computed", "reference").unwrap();
                    human.push_str(&side_by_side(&rep.report.classes[c].point, reference));
                }
            }
        }
    }
    let exit_code = if all_paths_failed(&rep.report) {
        EXIT_NUMERICAL
    } else if rep.passed {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    Ok(Outcome {
        human,
        json: to_json(&rep),
        csv: Some(class_table(&rep.report)),
        exit_code,
    })
}
