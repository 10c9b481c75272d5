//! Explicit time stepping for the regularized degenerate equation
//!
//! ```text
//! u_t = (u^alpha |grad u|^beta + eps) (k2 Δu + b·grad u) + |A(u)|
//! ```
//!
//! in non-divergence form, plus a divergence-form porous-medium mode
//! `u_t = Δ(u^m)` used only to check the numerics against the Barenblatt
//! solution.
//!
//! A drift `b` here advects mass with velocity `-b`; a walker drift shift
//! `Δe` per jump of the reference duration corresponds to `b = -Δe / tau_ref`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::field::{support_radius, Grid, ScalarField};
use crate::params::{reaction_value, ModelParams};

/// Nodes above which the stencil sweep is split across threads.
const PARALLEL_NODES: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    #[default]
    EinsteinDegenerate,
    PorousMediumValidation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub params: ModelParams,
    /// Constant drift per axis, `|b_i| <= k1`.
    pub drift: Vec<f64>,
    pub cfl_safety: f64,
    pub t_end: f64,
    /// Sorted output times in `(0, t_end]`.
    pub snapshot_times: Vec<f64>,
    pub u_floor: f64,
    /// Exponent of the validation-mode porous medium equation.
    pub pme_m: f64,
    pub max_steps: usize,
    /// One-sided differences for the drift term, upwind with respect to `-b`.
    pub upwind_drift: bool,
    /// Stop once `max u <= fraction * max u0`.
    pub halt_below_max_fraction: Option<f64>,
}

impl SolverConfig {
    pub fn new(params: ModelParams, t_end: f64) -> Self {
        let dim = params.dim;
        Self {
            mode: SolverMode::EinsteinDegenerate,
            params,
            drift: vec![0.0; dim],
            cfl_safety: 0.25,
            t_end,
            snapshot_times: vec![t_end],
            u_floor: 0.0,
            pme_m: 2.0,
            max_steps: 10_000_000,
            upwind_drift: false,
            halt_below_max_fraction: None,
        }
    }

    pub fn porous_medium(params: ModelParams, m: f64, t_end: f64) -> Self {
        Self {
            mode: SolverMode::PorousMediumValidation,
            pme_m: m,
            ..Self::new(params, t_end)
        }
    }

    /// `count` equally spaced snapshots ending at `t_end`.
    pub fn with_uniform_snapshots(mut self, count: usize) -> Self {
        let count = count.max(1);
        self.snapshot_times = (1..=count)
            .map(|k| if k == count { self.t_end } else { self.t_end * k as f64 / count as f64 })
            .collect();
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::Config(msg));
        if !(self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.u_floor >= 0.0) {
            return bad(format!("u_floor must be nonnegative, got {}", self.u_floor));
        }
        if self.drift.len() != self.params.dim {
            return bad(format!(
                "drift has {} components for dimension {}",
                self.drift.len(),
                self.params.dim
            ));
        }
        if let Some(b) = self.drift.iter().find(|b| b.abs() > self.params.k1) {
            return bad(format!("drift component {b} exceeds k1 = {}", self.params.k1));
        }
        if !(self.params.k2 > 0.0) {
            return bad(format!("k2 must be positive, got {}", self.params.k2));
        }
        if !(self.params.alpha >= 0.0 && self.params.beta >= 0.0 && self.params.epsilon_reg >= 0.0)
        {
            return bad("alpha, beta and epsilon_reg must be nonnegative".into());
        }
        if self.mode == SolverMode::PorousMediumValidation && !(self.pme_m > 1.0) {
            return bad(format!("pme_m must exceed 1, got {}", self.pme_m));
        }
        let mut prev = 0.0;
        for &t in &self.snapshot_times {
            if !(t > prev && t <= self.t_end) {
                return bad(format!(
                    "snapshot times must be increasing within (0, t_end], got {t}"
                ));
            }
            prev = t;
        }
        Ok(())
    }
}

/// `u^alpha |grad u|^beta + eps`, the inverse waiting time plus regularization.
pub fn degenerate_coefficient(u: f64, grad_norm: f64, params: &ModelParams) -> f64 {
    pow(u, params.alpha) * pow(grad_norm, params.beta) + params.epsilon_reg
}

/// `x^e` with shortcuts for the small integer exponents used in practice.
#[inline]
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}

/// Local diffusivity of the selected mode at one node.
#[inline]
fn node_coefficient(config: &SolverConfig, u: f64, grad_norm: f64) -> f64 {
    match config.mode {
        SolverMode::EinsteinDegenerate => degenerate_coefficient(u, grad_norm, &config.params),
        SolverMode::PorousMediumValidation => config.pme_m * pow(u, config.pme_m - 1.0),
    }
}

/// Node position used by the stencil sweeps, avoiding index division.
#[derive(Clone, Copy)]
struct Node {
    i: usize,
    j: usize,
    k: usize,
}

#[derive(Clone, Copy)]
struct Shape {
    nx: usize,
    ny: usize,
    dim: usize,
}

impl Shape {
    fn of(grid: &Grid) -> Self {
        let [nx, ny] = grid.shape();
        Self {
            nx,
            ny,
            dim: grid.dim(),
        }
    }

    /// Neighbor values along `axis` with zero ghosts beyond the walls.
    #[inline]
    fn neighbors(&self, v: &[f64], n: Node, axis: usize) -> (f64, f64) {
        let (pos, len, stride) = if axis == 0 {
            (n.i, self.nx, 1)
        } else {
            (n.j, self.ny, self.nx)
        };
        let lo = if pos == 0 { 0.0 } else { v[n.k - stride] };
        let hi = if pos + 1 == len { 0.0 } else { v[n.k + stride] };
        (lo, hi)
    }

    fn gradient_norm(&self, v: &[f64], n: Node, h: f64) -> f64 {
        let mut g2 = 0.0;
        for a in 0..self.dim {
            let (lo, hi) = self.neighbors(v, n, a);
            let d = (hi - lo) / (2.0 * h);
            g2 += d * d;
        }
        g2.sqrt()
    }

    /// Fill `out` row by row with `f(node)`.
    fn sweep(&self, out: &mut [f64], f: impl Fn(Node) -> f64 + Sync) {
        let nx = self.nx;
        let row = |(j, chunk): (usize, &mut [f64])| {
            for (i, o) in chunk.iter_mut().enumerate() {
                *o = f(Node { i, j, k: i + nx * j });
            }
        };
        if out.len() >= PARALLEL_NODES && self.ny > 1 {
            out.par_chunks_mut(nx).enumerate().for_each(row);
        } else {
            out.chunks_mut(nx).enumerate().for_each(row);
        }
    }
}

/// Largest explicit step that keeps the scheme monotone.
pub fn stable_dt(field: &ScalarField, config: &SolverConfig) -> f64 {
    stable_dt_with_max(field, config, field.max())
}

/// [`stable_dt`] with `max u` already known. Without a gradient factor the
/// coefficient is nondecreasing in `u`, so its maximum sits at `max u`.
fn stable_dt_with_max(field: &ScalarField, config: &SolverConfig, u_max: f64) -> f64 {
    let grid = field.grid();
    let v = field.values();
    let h = grid.h();
    let n = grid.dim() as f64;
    let needs_grad = config.mode == SolverMode::EinsteinDegenerate && config.params.beta != 0.0;
    let max_coeff = if needs_grad {
        let shape = Shape::of(grid);
        let mut coeff = vec![0.0; v.len()];
        shape.sweep(&mut coeff, |node| {
            node_coefficient(config, v[node.k], shape.gradient_norm(v, node, h))
        });
        coeff.into_iter().fold(0.0, f64::max)
    } else {
        node_coefficient(config, u_max, 0.0)
    };
    let (k2, k1, react) = match config.mode {
        SolverMode::EinsteinDegenerate => (
            config.params.k2,
            config.params.k1,
            config.params.reaction.lipschitz_on(u_max),
        ),
        SolverMode::PorousMediumValidation => (1.0, 0.0, 0.0),
    };
    let denom = 2.0 * n * k2 * max_coeff + h * k1 * n.sqrt() * max_coeff + h * h * react;
    if denom > 0.0 {
        config.cfl_safety * h * h / denom
    } else {
        config.cfl_safety * h * h
    }
}

/// Exponent with the common integer cases resolved once per step.
#[derive(Clone, Copy)]
enum Power {
    Zero,
    One,
    Two,
    Real(f64),
}

impl Power {
    fn new(e: f64) -> Self {
        match e {
            e if e == 0.0 => Power::Zero,
            e if e == 1.0 => Power::One,
            e if e == 2.0 => Power::Two,
            e => Power::Real(e),
        }
    }

    #[inline]
    fn of(self, x: f64) -> f64 {
        match self {
            Power::Zero => 1.0,
            Power::One => x,
            Power::Two => x * x,
            Power::Real(e) => x.powf(e),
        }
    }

    /// `|g|^e` from the squared norm.
    #[inline]
    fn of_squared_norm(self, g2: f64) -> f64 {
        match self {
            Power::Zero => 1.0,
            Power::One => g2.sqrt(),
            Power::Two => g2,
            Power::Real(e) => g2.powf(0.5 * e),
        }
    }
}

/// Per-step constants of the degenerate update.
struct Kernel<'a> {
    alpha: Power,
    beta: Power,
    eps: f64,
    k2: f64,
    drift: [f64; 2],
    upwind: bool,
    reaction: Option<&'a crate::params::ReactionSpec>,
    inv_h: f64,
    inv_2h: f64,
    inv_h2: f64,
}

impl<'a> Kernel<'a> {
    fn new(config: &'a SolverConfig, h: f64) -> Self {
        let p = &config.params;
        let mut drift = [0.0; 2];
        for (d, b) in drift.iter_mut().zip(&config.drift) {
            *d = *b;
        }
        Self {
            alpha: Power::new(p.alpha),
            beta: Power::new(p.beta),
            eps: p.epsilon_reg,
            k2: p.k2,
            drift,
            upwind: config.upwind_drift,
            reaction: p.reaction.is_active().then_some(&p.reaction),
            inv_h: 1.0 / h,
            inv_2h: 0.5 / h,
            inv_h2: 1.0 / (h * h),
        }
    }

    /// Rate of change at a node with value `u` and axis neighbors `nb`.
    #[inline(always)]
    fn rate<const DRIFT: bool, const REACT: bool>(&self, u: f64, nb: &[(f64, f64)]) -> f64 {
        let mut lap = 0.0;
        let mut g2 = 0.0;
        let mut transport = 0.0;
        for (a, &(lo, hi)) in nb.iter().enumerate() {
            lap += hi - 2.0 * u + lo;
            let central = (hi - lo) * self.inv_2h;
            g2 += central * central;
            if DRIFT {
                let b = self.drift[a];
                let d = if self.upwind {
                    // u_t = b u_x moves mass with velocity -b
                    if b > 0.0 {
                        (hi - u) * self.inv_h
                    } else {
                        (u - lo) * self.inv_h
                    }
                } else {
                    central
                };
                transport += b * d;
            }
        }
        let coeff = self.alpha.of(u) * self.beta.of_squared_norm(g2) + self.eps;
        let react = if REACT {
            self.reaction.map_or(0.0, |r| reaction_value(r, u))
        } else {
            0.0
        };
        coeff * (self.k2 * lap * self.inv_h2 + transport) + react
    }
}

fn einstein_sweep(config: &SolverConfig, grid: &Grid, v: &[f64], dt: f64, out: &mut [f64]) {
    let kernel = Kernel::new(config, grid.h());
    let drift = kernel.drift.iter().any(|&b| b != 0.0);
    let react = kernel.reaction.is_some();
    match (drift, react) {
        (false, false) => sweep_with::<false, false>(&kernel, grid, v, dt, out),
        (true, false) => sweep_with::<true, false>(&kernel, grid, v, dt, out),
        (false, true) => sweep_with::<false, true>(&kernel, grid, v, dt, out),
        (true, true) => sweep_with::<true, true>(&kernel, grid, v, dt, out),
    }
}

fn sweep_with<const DRIFT: bool, const REACT: bool>(
    kernel: &Kernel,
    grid: &Grid,
    v: &[f64],
    dt: f64,
    out: &mut [f64],
) {
    let shape = Shape::of(grid);
    let (nx, ny) = (shape.nx, shape.ny);
    let at = |k: usize, lo_ok: bool, hi_ok: bool, stride: usize| {
        (
            if lo_ok { v[k - stride] } else { 0.0 },
            if hi_ok { v[k + stride] } else { 0.0 },
        )
    };
    let update = |k: usize, nb: &[(f64, f64)]| v[k] + dt * kernel.rate::<DRIFT, REACT>(v[k], nb);
    if shape.dim == 1 {
        out[0] = update(0, &[at(0, false, nx > 1, 1)]);
        for (k, o) in out.iter_mut().enumerate().take(nx - 1).skip(1) {
            *o = update(k, &[(v[k - 1], v[k + 1])]);
        }
        if nx > 1 {
            out[nx - 1] = update(nx - 1, &[at(nx - 1, true, false, 1)]);
        }
        return;
    }
    let row = |(j, chunk): (usize, &mut [f64])| {
        let base = nx * j;
        for (i, o) in chunk.iter_mut().enumerate() {
            let k = base + i;
            let nb = [at(k, i > 0, i + 1 < nx, 1), at(k, j > 0, j + 1 < ny, nx)];
            *o = update(k, &nb);
        }
    };
    if out.len() >= PARALLEL_NODES {
        out.par_chunks_mut(nx).enumerate().for_each(row);
    } else {
        out.chunks_mut(nx).enumerate().for_each(row);
    }
}

/// One explicit Euler update at every node, wall nodes included, with zero
/// ghost values beyond the walls. No boundary condition or clamp is applied.
pub fn step_unconstrained(field: &ScalarField, config: &SolverConfig, dt: f64) -> ScalarField {
    let grid = field.grid();
    let v = field.values();
    let mut next = vec![0.0; v.len()];
    match config.mode {
        SolverMode::EinsteinDegenerate => einstein_sweep(config, grid, v, dt, &mut next),
        SolverMode::PorousMediumValidation => {
            let w: Vec<f64> = v.iter().map(|&x| pow(x, config.pme_m)).collect();
            let shape = Shape::of(grid);
            let inv_h2 = 1.0 / (grid.h() * grid.h());
            shape.sweep(&mut next, |n| {
                let mut lap = 0.0;
                for a in 0..shape.dim {
                    let (lo, hi) = shape.neighbors(&w, n, a);
                    lap += hi - 2.0 * w[n.k] + lo;
                }
                v[n.k] + dt * lap * inv_h2
            });
        }
    }
    ScalarField::from_values(grid.clone(), next)
        .expect("same grid")
        .with_dirichlet(field.dirichlet)
}

fn check_finite(field: &ScalarField, step: usize, time: f64) -> Result<(), SolverError> {
    match field.values().iter().position(|v| !v.is_finite()) {
        Some(node) => Err(SolverError::Unstable { step, node, time }),
        None => Ok(()),
    }
}

/// Clamp at `floor` and flush subnormal magnitudes to zero. Subnormal
/// arithmetic is two orders of magnitude slower on common hardware and the
/// diffusive tail otherwise fills with such values.
fn clamp_floor(field: &mut ScalarField, floor: f64) {
    for v in field.values_mut() {
        if v.abs() < f64::MIN_POSITIVE {
            *v = 0.0;
        }
        if *v < floor {
            *v = floor;
        }
    }
}

/// Minimum of a candidate state, or the first non-finite node.
fn scan_min(values: &[f64]) -> Result<f64, usize> {
    let mut lo = f64::INFINITY;
    for (k, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(k);
        }
        if v < lo {
            lo = v;
        }
    }
    Ok(lo)
}

/// Maximum and sum of a nonnegative state.
fn max_and_sum(values: &[f64]) -> (f64, f64) {
    let (mut hi, mut sum) = (0.0, 0.0);
    for &v in values {
        if v > hi {
            hi = v;
        }
        sum += v;
    }
    (hi, sum)
}

/// One explicit Euler step with the Dirichlet condition and the floor clamp.
pub fn step(field: &ScalarField, config: &SolverConfig, dt: f64) -> Result<ScalarField, SolverError> {
    let mut next = step_unconstrained(field, config, dt);
    check_finite(&next, 0, dt)?;
    next.enforce_dirichlet();
    clamp_floor(&mut next, config.u_floor);
    Ok(next)
}

/// Receives the state at the left end of every time step.
pub trait StepObserver {
    fn observe(&mut self, t: f64, dt: f64, u: &ScalarField);

    /// Called once with the final state.
    fn finish(&mut self, _t: f64, _u: &ScalarField) {}
}

impl StepObserver for () {
    fn observe(&mut self, _t: f64, _dt: f64, _u: &ScalarField) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: ScalarField,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DtStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
    /// Steps retried with a halved dt after an undershoot.
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: ScalarField,
    pub snapshots: Vec<Snapshot>,
    pub step_count: usize,
    pub dt_stats: DtStats,
    /// `(time, integral of u)` at `t = 0` and at every snapshot.
    pub mass_history: Vec<(f64, f64)>,
    /// Set when the run stopped on the max-decay criterion.
    pub halted_at: Option<f64>,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.time)
    }

    pub fn final_field(&self) -> &ScalarField {
        self.snapshots.last().map_or(&self.initial, |s| &s.field)
    }

    /// `(time, support radius)` including the initial state.
    pub fn support_radii(&self, threshold: f64) -> Vec<(f64, f64)> {
        std::iter::once((0.0, support_radius(&self.initial, threshold)))
            .chain(
                self.snapshots
                    .iter()
                    .map(|s| (s.time, support_radius(&s.field, threshold))),
            )
            .collect()
    }
}

/// Relative undershoot tolerated before the step is retried with half the dt.
const UNDERSHOOT_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 40;

pub fn solve(u0: &ScalarField, config: &SolverConfig) -> Result<Trajectory, SolverError> {
    solve_observed(u0, config, &mut ())
}

/// Advance `u0` to `t_end` with adaptive `dt = stable_dt`, reporting every
/// step to `observer`.
pub fn solve_observed(
    u0: &ScalarField,
    config: &SolverConfig,
    observer: &mut dyn StepObserver,
) -> Result<Trajectory, SolverError> {
    config.validate()?;
    if u0.grid().dim() != config.params.dim {
        return Err(SolverError::Config(format!(
            "initial field has dimension {} but params.dim = {}",
            u0.grid().dim(),
            config.params.dim
        )));
    }
    let mut u = u0.clone();
    u.enforce_dirichlet();
    clamp_floor(&mut u, config.u_floor);
    let initial = u.clone();
    let cell = u.grid().cell_volume();
    let (max0, sum0) = max_and_sum(u.values());
    let mut u_max = max0;

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let mut next_snap = 0usize;
    let mut mass_history = vec![(0.0, sum0 * cell)];
    let mut dt_stats = DtStats {
        min: f64::INFINITY,
        max: 0.0,
        ..DtStats::default()
    };
    let mut dt_sum = 0.0;
    let mut halted_at = None;

    while t < config.t_end {
        if steps >= config.max_steps {
            return Err(SolverError::StepBudget {
                max_steps: config.max_steps,
                time: t,
                t_end: config.t_end,
            });
        }
        let target = config
            .snapshot_times
            .get(next_snap)
            .copied()
            .unwrap_or(config.t_end);
        let mut dt = stable_dt_with_max(&u, config, u_max).min(target - t);
        let mut halvings = 0;
        let tol = UNDERSHOOT_TOL * u_max;
        let mut next = loop {
            let cand = step_unconstrained(&u, config, dt);
            let low = scan_min(cand.values())
                .map_err(|node| SolverError::Unstable { step: steps, node, time: t })?;
            if low >= -tol {
                break cand;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(SolverError::Undershoot { halvings, time: t });
            }
            dt *= 0.5;
        };
        dt_stats.halvings += halvings;
        next.enforce_dirichlet();
        clamp_floor(&mut next, config.u_floor);
        observer.observe(t, dt, &u);

        let reached = t + dt >= target - 1e-12 * target.max(1.0);
        t = if reached { target } else { t + dt };
        u = next;
        steps += 1;
        dt_stats.min = dt_stats.min.min(dt);
        dt_stats.max = dt_stats.max.max(dt);
        dt_sum += dt;
        let (hi, sum) = max_and_sum(u.values());
        u_max = hi;

        let halt = config
            .halt_below_max_fraction
            .is_some_and(|frac| u_max <= frac * max0);
        if reached || halt {
            mass_history.push((t, sum * cell));
        }
        if (reached && next_snap < config.snapshot_times.len()) || halt {
            snapshots.push(Snapshot {
                time: t,
                field: u.clone(),
            });
            if reached {
                next_snap += 1;
            }
        }
        if halt {
            halted_at = Some(t);
            break;
        }
    }
    observer.finish(t, &u);
    dt_stats.count = steps;
    dt_stats.mean = if steps > 0 { dt_sum / steps as f64 } else { 0.0 };
    if steps == 0 {
        dt_stats.min = 0.0;
    }
    Ok(Trajectory {
        initial,
        snapshots,
        step_count: steps,
        dt_stats,
        mass_history,
        halted_at,
    })
}

/// Result of [`epsilon_sweep`].
#[derive(Debug, Clone)]
pub struct EpsilonSweep {
    pub runs: Vec<(f64, Trajectory)>,
    /// Sup-norm distance between the final snapshots of consecutive runs.
    pub distances: Vec<f64>,
}

impl EpsilonSweep {
    pub fn support_radii(&self, threshold: f64) -> Vec<f64> {
        self.runs
            .iter()
            .map(|(_, tr)| support_radius(tr.final_field(), threshold))
            .collect()
    }
}

/// Solve once per regularization in `eps_list` (positive, decreasing).
/// Runs are independent and execute concurrently.
pub fn epsilon_sweep(
    u0: &ScalarField,
    config: &SolverConfig,
    eps_list: &[f64],
) -> Result<EpsilonSweep, SolverError> {
    if eps_list.iter().any(|e| !(*e > 0.0)) || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(SolverError::Config(format!(
            "epsilon list must be positive and strictly decreasing, got {eps_list:?}"
        )));
    }
    let runs = eps_list
        .par_iter()
        .map(|&eps| {
            let mut cfg = config.clone();
            cfg.params.epsilon_reg = eps;
            solve(u0, &cfg).map(|tr| (eps, tr))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let distances = runs
        .windows(2)
        .map(|w| {
            w[0].1
                .final_field()
                .sup_distance(w[1].1.final_field())
                .map_err(SolverError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EpsilonSweep { runs, distances })
}
