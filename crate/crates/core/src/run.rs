//! Command dispatch: each command validates its inputs, runs, and writes
//! CSV artifacts, a `manifest.txt` and a `summary.txt` into the output
//! directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::config::{Command, Quadrature, RunConfig, WalkSource};
use crate::degiorgi::{
    threshold_check_no_reaction, verify_recursion, DeGiorgiReport, EnergyLog, ThresholdCheck,
};
use crate::error::{CertificateError, FieldError, IoError, OracleError, ParamsError, SolverError, WalkerError};
use crate::field::{integrate, support_radius, Grid, Region, ScalarField, SUPPORT_THRESHOLD};
use crate::io::{self, Manifest};
use crate::oracle::{sample_heat_kernel, BarenblattSpec};
use crate::params::{derive_constants, validate_params, DerivedConstants, ModelParams};
use crate::solver::{epsilon_sweep, solve, solve_observed, SolverConfig, Trajectory};
use crate::stats::regression_slope;
use crate::walkers::{
    advance, compare_to_pde, estimate_density, AdvanceOptions, AdvanceReport, Comparison, Ensemble, JumpLaw,
};

pub const EXIT_PARSE: i32 = 64;
pub const EXIT_VALIDATION: i32 = 65;
pub const EXIT_NUMERICAL: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => EXIT_PARSE,
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Numerical(_) => EXIT_NUMERICAL,
            RunError::Io(_) => EXIT_IO,
        }
    }
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(_) | SolverError::Field(_) => RunError::Validation(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<CertificateError> for RunError {
    fn from(e: CertificateError) -> Self {
        match e {
            CertificateError::Solver(s) => s.into(),
            CertificateError::Horizon { .. } => RunError::Numerical(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Validation(e.to_string())
            }
        }
    )*};
}
validation_from!(ParamsError, FieldError, WalkerError, OracleError);

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct WalkResult {
    pub report: AdvanceReport,
    pub ensemble: Ensemble,
    pub density: ScalarField,
    pub reference: Option<ScalarField>,
    pub comparison: Option<Comparison>,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    /// `2 D t` when the reference is the heat kernel.
    pub predicted_variance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CertifyResult {
    pub report: DeGiorgiReport,
    pub threshold: Option<ThresholdCheck>,
}

#[derive(Debug, Clone)]
pub struct PmeResult {
    /// `sum |u - U| / sum U` at the final time.
    pub l1_relative: f64,
    pub support_numeric: f64,
    pub support_exact: f64,
    /// Slope of `log R` against `log t` over the snapshots.
    pub exponent: f64,
    pub h: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub horizon: f64,
    /// Time at which the smallest-eps run dropped by `max_drop`.
    pub drop_time: Option<f64>,
    pub h: f64,
    pub epsilons: Vec<f64>,
    pub supports: Vec<f64>,
    pub max_values: Vec<f64>,
    pub initial_max: f64,
    /// Smallest value of the contrast run over non-wall nodes.
    pub contrast_interior_min: Option<f64>,
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone)]
pub enum CommandResult {
    Constants(DerivedConstants),
    Solve(SolveResult),
    Walk(WalkResult),
    Certify(CertifyResult),
    ValidatePme(PmeResult),
    EpsSweep(SweepResult),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub command: Command,
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub summary: String,
    pub result: CommandResult,
}

/// Run-wide bookkeeping shared by all commands.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    manifest: Manifest,
    summary: String,
}

impl Ctx<'_> {
    fn emit(&mut self, name: &str, file: &str, text: &str) -> Result<(), RunError> {
        io::emit(&mut self.manifest, self.dir, name, file, text)?;
        Ok(())
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }
}

/// Reject parameters the simulation cannot run with; report the rest.
fn check_params(ctx: &mut Ctx, params: &ModelParams) -> Result<(), RunError> {
    let v = validate_params(params);
    if !v.simulation_ok() {
        return Err(ParamsError::Invalid(v.violations).into());
    }
    for (k, viol) in v.violations.iter().enumerate() {
        ctx.manifest.set(format!("analysis_violation.{k}"), viol);
        ctx.line(format!("note: analysis condition violated: {viol}"));
    }
    Ok(())
}

fn solver_config(cfg: &RunConfig, params: &ModelParams, t_end: f64) -> SolverConfig {
    let s = &cfg.solver;
    let mut sc = SolverConfig::new(params.clone(), t_end);
    sc.mode = s.mode;
    sc.drift = cfg.drift();
    sc.cfl_safety = s.cfl_safety;
    sc.u_floor = s.u_floor;
    sc.pme_m = s.pme_m;
    sc.max_steps = s.max_steps;
    sc.upwind_drift = s.upwind_drift;
    sc.halt_below_max_fraction = s.halt_below_max_fraction;
    sc.with_uniform_snapshots(s.snapshots)
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let command = cfg
        .command
        .ok_or_else(|| RunError::Validation("no command given (config `command` or --command)".into()))?;
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let mut ctx = Ctx { cfg, dir, manifest: Manifest::new(), summary: String::new() };
    ctx.manifest.set("command", command.name());
    ctx.manifest.set("seed", cfg.seed);
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    ctx.manifest.set("created_unix", created);
    ctx.manifest.echo_toml("config", &cfg.to_toml_value());
    ctx.line(format!("command: {}", command.name()));
    let started = Instant::now();

    let (exit_code, result) = match command {
        Command::Constants => run_constants(&mut ctx)?,
        Command::Solve => run_solve(&mut ctx)?,
        Command::Walk => run_walk(&mut ctx)?,
        Command::Certify => run_certify(&mut ctx)?,
        Command::ValidatePme => run_pme(&mut ctx)?,
        Command::EpsSweep => run_sweep(&mut ctx)?,
    };

    ctx.manifest.set("exit_code", exit_code);
    ctx.manifest.set("wall_seconds", format!("{:.3}", started.elapsed().as_secs_f64()));
    io::write_text(&dir.join("summary.txt"), &ctx.summary)?;
    io::write_text(&dir.join("manifest.txt"), &ctx.manifest.render())?;
    Ok(RunOutcome { command, exit_code, output_dir: dir.to_path_buf(), summary: ctx.summary, result })
}

fn run_constants(ctx: &mut Ctx) -> Result<(i32, CommandResult), RunError> {
    let cfg = ctx.cfg;
    check_params(ctx, &cfg.params)?;
    let t = cfg.degiorgi.horizon.unwrap_or(cfg.solver.t_end);
    let c = derive_constants(&cfg.params, cfg.degiorgi.n_max, t)?;
    let rows = c.rows();
    ctx.emit("constants", "constants.csv", &io::constants_csv(&rows))?;
    for (name, v) in &rows {
        ctx.line(format!("{name} = {v}"));
    }
    Ok((0, CommandResult::Constants(c)))
}

fn run_solve(ctx: &mut Ctx) -> Result<(i32, CommandResult), RunError> {
    let cfg = ctx.cfg;
    check_params(ctx, &cfg.params)?;
    let grid = cfg.build_grid()?;
    let u0 = cfg.initial.sample(&grid, &cfg.params);
    let traj = solve(&u0, &solver_config(cfg, &cfg.params, cfg.solver.t_end))?;
    ctx.emit("field_0000", "fields/field_0000.csv", &io::field_csv(&traj.initial, 0.0))?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("field_{:04}", k + 1);
        ctx.emit(&name, &format!("fields/{name}.csv"), &io::field_csv(&s.field, s.time))?;
    }
    let mass: Vec<Vec<f64>> = traj.mass_history.iter().map(|(t, m)| vec![*t, *m]).collect();
    ctx.emit("mass", "mass.csv", &io::table_csv(&["time", "mass"], &mass))?;
    ctx.emit("support", "support.csv", &io::support_csv(&traj.support_radii(SUPPORT_THRESHOLD)))?;
    ctx.manifest.set("steps", traj.step_count);
    ctx.manifest.set("dt_min", traj.dt_stats.min);
    ctx.manifest.set("dt_max", traj.dt_stats.max);
    ctx.manifest.set("dt_mean", traj.dt_stats.mean);
    ctx.manifest.set("dt_halvings", traj.dt_stats.halvings);
    ctx.manifest.set("mass_history", "mass.csv");
    ctx.line(format!("steps: {}", traj.step_count));
    ctx.line(format!("final time: {}", traj.final_time()));
    if let Some(t) = traj.halted_at {
        ctx.line(format!("halted at t = {t} on the max-decay criterion"));
    }
    ctx.line(format!("final max u: {:.6e}", traj.final_field().max()));
    ctx.line(format!(
        "final support radius: {:.6}",
        support_radius(traj.final_field(), SUPPORT_THRESHOLD)
    ));
    Ok((0, CommandResult::Solve(SolveResult { trajectory: traj })))
}

fn run_walk(ctx: &mut Ctx) -> Result<(i32, CommandResult), RunError> {
    let cfg = ctx.cfg;
    let p = &cfg.params;
    check_params(ctx, p)?;
    let w = &cfg.walkers;
    let grid = Grid::centered_box(p.dim, cfg.half_width(), w.bin_h.unwrap_or(cfg.grid.h))?;
    let u0 = cfg.initial.sample(&grid, p);
    let t_end = w.t_end.unwrap_or(cfg.solver.t_end);
    let drift = cfg.drift();
    let shift: Vec<f64> = drift.iter().map(|b| b * w.tau_ref).collect();
    let law = JumpLaw::einstein(w.law, p, w.tau_ref, &shift)?;
    let mut ens = match w.source {
        WalkSource::Field => Ensemble::from_field(&u0, w.particles, cfg.seed)?,
        WalkSource::Point => {
            let mass = integrate(&u0, Region::Full);
            let mass = if mass > 0.0 { mass } else { 1.0 };
            Ensemble::point_source(p.dim, w.particles, &[0.0, 0.0], mass, cfg.seed)
        }
    };
    let mut opts = AdvanceOptions::new(grid.clone(), w.tau_ref);
    if let Some(t) = w.tau_max {
        opts.tau_max = t;
    }
    if let Some(r) = w.refresh_every {
        opts.refresh_every = r;
    }
    opts.absorption = w.absorption;
    opts.weight_rule = w.weight_rule;
    let report = advance(&mut ens, &law, p, t_end, &opts)?;
    let density = estimate_density(&ens, &grid).field;

    let heat_like = p.alpha == 0.0 && p.beta == 0.0 && !p.reaction.is_active() && drift.iter().all(|b| *b == 0.0);
    let (reference, predicted_variance) = match w.source {
        WalkSource::Point if heat_like => {
            let d = p.k2 * (1.0 + p.epsilon_reg);
            let mass = ens.total_weight();
            let hk = sample_heat_kernel(&grid, t_end, d)?.map(|v| v * mass);
            (Some(hk), Some(2.0 * d * t_end))
        }
        WalkSource::Field => {
            let mut sc = SolverConfig::new(p.clone(), t_end);
            sc.drift = drift.clone();
            sc.cfl_safety = cfg.solver.cfl_safety;
            (Some(solve(&u0, &sc)?.final_field().clone()), None)
        }
        WalkSource::Point => (None, None),
    };
    let comparison = reference.as_ref().map(|r| compare_to_pde(&density, r)).transpose()?;
    let (mean, variance) = ens.moments(0);
    let (se_mean, se_variance) = ens.moment_standard_errors(0);

    ctx.emit("ensemble", "ensemble.csv", &io::ensemble_csv(&ens))?;
    ctx.emit("density", "density.csv", &io::field_csv(&density, t_end))?;
    if let Some(r) = &reference {
        ctx.emit("reference", "reference.csv", &io::field_csv(r, t_end))?;
    }
    let nan = f64::NAN;
    let mut stats = vec![
        ("jumps".to_string(), report.jumps as f64),
        ("windows".to_string(), report.windows as f64),
        ("boundary_absorbed".to_string(), report.boundary_absorbed as f64),
        ("reaction_absorbed".to_string(), report.reaction_absorbed as f64),
        ("degenerate_dropped".to_string(), report.degenerate_dropped as f64),
        ("alive".to_string(), ens.alive_count() as f64),
        ("total_weight".to_string(), ens.total_weight()),
        ("mean_x".to_string(), mean),
        ("variance_x".to_string(), variance),
        ("se_mean_x".to_string(), se_mean),
        ("se_variance_x".to_string(), se_variance),
        ("predicted_variance_x".to_string(), predicted_variance.unwrap_or(nan)),
    ];
    if let Some(c) = &comparison {
        stats.push(("l1_distance".to_string(), c.distance));
        stats.push(("support_particles".to_string(), c.support_a));
        stats.push(("support_reference".to_string(), c.support_b));
    }
    ctx.emit("walk_stats", "walk_stats.csv", &io::constants_csv(&stats))?;
    for (name, v) in &stats {
        ctx.line(format!("{name} = {v}"));
    }
    Ok((
        0,
        CommandResult::Walk(WalkResult {
            report,
            ensemble: ens,
            density,
            reference,
            comparison,
            mean,
            variance,
            se_mean,
            se_variance,
            predicted_variance,
        }),
    ))
}

fn run_certify(ctx: &mut Ctx) -> Result<(i32, CommandResult), RunError> {
    let cfg = ctx.cfg;
    let p = &cfg.params;
    check_params(ctx, p)?;
    let grid = cfg.build_grid()?;
    let u0 = cfg.initial.sample(&grid, p);
    let geom = cfg.geometry();
    let horizon = cfg.degiorgi.horizon.unwrap_or(cfg.solver.t_end);
    let sc = solver_config(cfg, p, horizon);
    let (traj, log) = match cfg.degiorgi.quadrature {
        Quadrature::Steps => {
            let mut log = EnergyLog::new(geom, p, horizon);
            let traj = solve_observed(&u0, &sc, &mut log)?;
            (traj, Some(log))
        }
        Quadrature::Snapshots => (solve(&u0, &sc)?, None),
    };
    let report = verify_recursion(&traj, log.as_ref(), &geom, p, horizon)?;
    let threshold = if p.reaction.is_active() {
        None
    } else {
        Some(threshold_check_no_reaction(&traj, &geom, p, horizon)?)
    };

    let mut text = io::report_text(&report);
    if let Some(th) = &threshold {
        let o = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6e}"));
        let _ = writeln!(text, "\nno-reaction smallness test (sufficient only)");
        let _ = writeln!(text, "B0: {}", o(th.b0));
        let _ = writeln!(text, "mu: {}", o(th.mu));
        let _ = writeln!(text, "sup-norm bound: {}  observed: {:.6e}", o(th.sup_norm_bound), th.observed_sup_norm);
        let _ = writeln!(text, "I_0 bound: {}  observed: {:.6e}", o(th.i0_bound), th.observed_i0);
        let _ = writeln!(text, "pass: {}", th.pass);
    }
    io::write_text(&ctx.dir.join("report.txt"), &text)?;
    ctx.manifest.set("report", "report.txt");
    ctx.emit("recursion", "recursion.csv", &io::recursion_csv(&report))?;
    ctx.emit("support", "support.csv", &io::support_csv(&report.support_radii))?;
    if let Some(c) = &report.constants {
        ctx.emit("constants", "constants.csv", &io::constants_csv(&c.rows()))?;
    }
    ctx.emit("final_field", "final_field.csv", &io::field_csv(traj.final_field(), traj.final_time()))?;
    ctx.manifest.set("steps", traj.step_count);
    ctx.manifest.set("verdict", report.verdict.as_str());
    ctx.line(format!("verdict: {} ({})", report.verdict.as_str(), report.reason));
    ctx.line(format!("I_0 = {:.6e}, I_{} = {:.6e}", report.i_seq[0], geom.n_max, report.i_seq[geom.n_max]));
    ctx.line(format!("support radius at horizon: {:.6}", report.support_at_horizon));
    let code = report.verdict.exit_code();
    Ok((code, CommandResult::Certify(CertifyResult { report, threshold })))
}

fn run_pme(ctx: &mut Ctx) -> Result<(i32, CommandResult), RunError> {
    let cfg = ctx.cfg;
    let s = &cfg.pme;
    if s.nodes < 3 || !(s.half_width > 0.0) || !(s.t_end > s.t_start) {
        return Err(RunError::Validation(format!(
            "pme section needs nodes >= 3, half_width > 0, t_end > t_start; got {s:?}"
        )));
    }
    let h = 2.0 * s.half_width / (s.nodes - 1) as f64;
    let grid = Grid::line(s.nodes, h, -s.half_width)?;
    let params = ModelParams { dim: 1, domain_half_width: s.half_width, ..cfg.params.clone() };
    let spec = BarenblattSpec::with_constant(s.m, 1, s.constant, s.t_start)?;
    let u0 = spec.sample(&grid, s.t_start)?;
    let mut sc = SolverConfig::porous_medium(params, s.m, s.t_end - s.t_start).with_uniform_snapshots(s.snapshots);
    sc.cfl_safety = cfg.solver.cfl_safety;
    let traj = solve(&u0, &sc)?;
    let exact = spec.sample(&grid, s.t_end)?;
    let num = traj.final_field();
    let diff: f64 = num.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).sum();
    let l1_relative = diff / exact.values().iter().sum::<f64>();
    let series: Vec<(f64, f64, f64)> = traj
        .support_radii(SUPPORT_THRESHOLD)
        .into_iter()
        .map(|(tau, r)| {
            let t = s.t_start + tau;
            (t, r, spec.support_radius(t).unwrap_or(f64::NAN))
        })
        .collect();
    let logs: Vec<(f64, f64)> = series.iter().map(|(t, r, _)| (t.ln(), r.ln())).collect();
    let exponent = regression_slope(&logs);
    let support_numeric = support_radius(num, SUPPORT_THRESHOLD);
    let support_exact = spec.support_radius(s.t_end)?;

    ctx.emit("numeric", "numeric.csv", &io::field_csv(num, s.t_end))?;
    ctx.emit("exact", "exact.csv", &io::field_csv(&exact, s.t_end))?;
    let rows: Vec<Vec<f64>> = series.iter().map(|(t, r, e)| vec![*t, *r, *e]).collect();
    ctx.emit("support", "support.csv", &io::table_csv(&["time", "support_numeric", "support_exact"], &rows))?;
    ctx.manifest.set("steps", traj.step_count);
    ctx.line(format!("grid: {} nodes, h = {h}", s.nodes));
    ctx.line(format!("normalized L1 error: {l1_relative:.6e}"));
    ctx.line(format!("support radius: {support_numeric:.6} (exact {support_exact:.6}, |diff| / h = {:.3})", (support_numeric - support_exact).abs() / h));
    ctx.line(format!("support growth exponent: {exponent:.6} (exact {:.6})", spec.a()));
    Ok((0, CommandResult::ValidatePme(PmeResult { l1_relative, support_numeric, support_exact, exponent, h })))
}

fn run_sweep(ctx: &mut Ctx) -> Result<(i32, CommandResult), RunError> {
    let cfg = ctx.cfg;
    let p = &cfg.params;
    check_params(ctx, p)?;
    let sw = &cfg.sweep;
    if sw.epsilons.is_empty() || !(sw.max_drop > 0.0 && sw.max_drop < 1.0) {
        return Err(RunError::Validation("sweep needs epsilons and 0 < max_drop < 1".into()));
    }
    let grid = cfg.build_grid()?;
    let u0 = cfg.initial.sample(&grid, p);
    let initial_max = u0.max();
    let smallest = *sw.epsilons.last().expect("nonempty");

    // the horizon is where the least regularized run has lost max_drop of its peak
    let mut probe = solver_config(cfg, &ModelParams { epsilon_reg: smallest, ..p.clone() }, sw.max_horizon);
    probe.snapshot_times = vec![sw.max_horizon];
    probe.halt_below_max_fraction = Some(1.0 - sw.max_drop);
    let drop_time = solve(&u0, &probe)?.halted_at;
    let horizon = sw.min_horizon.max(drop_time.unwrap_or(sw.max_horizon));

    let sc = solver_config(cfg, p, horizon);
    let sweep = epsilon_sweep(&u0, &sc, &sw.epsilons)?;
    let supports = sweep.support_radii(SUPPORT_THRESHOLD);
    let max_values: Vec<f64> = sweep.runs.iter().map(|(_, t)| t.final_field().max()).collect();

    let contrast_interior_min = if sw.contrast {
        let cp = ModelParams { alpha: 0.0, beta: 0.0, theta: sw.contrast_theta, epsilon_reg: smallest, ..p.clone() };
        let mut csc = solver_config(cfg, &cp, horizon);
        csc.snapshot_times = vec![horizon];
        let tr = solve(&u0, &csc)?;
        let f = tr.final_field();
        ctx.emit("contrast", "contrast.csv", &io::field_csv(f, horizon))?;
        let g = f.grid();
        Some(
            f.values()
                .iter()
                .enumerate()
                .filter(|(k, _)| !g.is_boundary(*k))
                .map(|(_, v)| *v)
                .fold(f64::INFINITY, f64::min),
        )
    } else {
        None
    };

    let rows: Vec<Vec<f64>> = sweep
        .runs
        .iter()
        .zip(&supports)
        .zip(&max_values)
        .map(|(((eps, tr), r), m)| vec![*eps, horizon, *r, *m, integrate(tr.final_field(), Region::Full)])
        .collect();
    ctx.emit("sweep", "sweep.csv", &io::table_csv(&["epsilon", "horizon", "support_radius", "max_u", "mass"], &rows))?;
    let series: Vec<Vec<(f64, f64)>> = sweep.runs.iter().map(|(_, t)| t.support_radii(SUPPORT_THRESHOLD)).collect();
    let mut header = vec!["time".to_string()];
    header.extend(sweep.runs.iter().map(|(e, _)| format!("support_eps_{e:e}")));
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let series_rows: Vec<Vec<f64>> = (0..series[0].len())
        .map(|i| std::iter::once(series[0][i].0).chain(series.iter().map(|s| s[i].1)).collect())
        .collect();
    ctx.emit("support_series", "support_series.csv", &io::table_csv(&header_ref, &series_rows))?;
    for (k, (eps, tr)) in sweep.runs.iter().enumerate() {
        let name = format!("field_eps_{k}");
        ctx.emit(&name, &format!("{name}.csv"), &io::field_csv(tr.final_field(), horizon))?;
        ctx.manifest.set(format!("{name}.epsilon"), eps);
    }

    ctx.manifest.set("horizon", horizon);
    ctx.manifest.set("drop_time", drop_time.map_or("none".to_string(), |t| t.to_string()));
    ctx.line(format!("horizon: {horizon} (drop time {drop_time:?}, min horizon {})", sw.min_horizon));
    ctx.line(format!("grid spacing: {}", grid.h()));
    for ((eps, r), m) in sw.epsilons.iter().zip(&supports).zip(&max_values) {
        ctx.line(format!("eps = {eps:e}: support radius {r:.6}, max u {m:.6e} (initial {initial_max:.6e})"));
    }
    if let Some(m) = contrast_interior_min {
        ctx.line(format!("contrast (alpha = beta = 0) interior minimum: {m:.6e}"));
    }
    Ok((
        0,
        CommandResult::EpsSweep(SweepResult {
            horizon,
            drop_time,
            h: grid.h(),
            epsilons: sw.epsilons.clone(),
            supports,
            max_values,
            initial_max,
            contrast_interior_min,
            trajectories: sweep.runs.into_iter().map(|(_, t)| t).collect(),
        }),
    ))
}
