//! Particle realization of the generalized Einstein random walk.
//!
//! Each particle waits a density-dependent time `tau = tau_ref / c` with
//! `c = u^alpha |grad u|^beta + eps` (capped at `tau_max`) and then makes one
//! free jump with mean `Δe` and per-axis covariance `2 k2 tau_ref`. `u` is
//! read from a histogram of the ensemble refreshed every `refresh_every`
//! units of simulated time.
//!
//! Jumping at the departure rate alone gives the divergence form
//! `u_t = k2 Δ(c u)`. Under the default [`WeightRule::ArrivalRate`] each jump
//! from `y` to `x` also multiplies the particle weight by `c(x) / c(y)`,
//! which turns the mean-field generator into `c(x) k2 Δu`, the non-divergent
//! operator of the solver. Mass then follows the PDE and is not conserved
//! unless `c` is constant.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, WalkerError};
use crate::field::{gradient, integrate, support_radius, Grid, Region, ScalarField, SUPPORT_THRESHOLD};
use crate::params::{reaction_value, ModelParams, ReactionSpec};
use crate::rng::{Purpose, StreamKey};
use crate::solver::degenerate_coefficient;
use crate::stats::weighted_mean_var;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JumpDistribution {
    #[default]
    GaussianIsotropic,
    /// Uniform on an interval (1D) or a disk (2D) with matching variance.
    UniformBall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpLaw {
    pub distribution: JumpDistribution,
    /// Per-axis standard deviation of the symmetric part of a jump.
    pub scale: f64,
    /// Expected jump `Δe`.
    pub drift_shift: [f64; 2],
    pub dim: usize,
}

impl JumpLaw {
    /// Law whose symmetric part has covariance `2 k2 tau_ref` per axis.
    pub fn einstein(
        distribution: JumpDistribution,
        params: &ModelParams,
        tau_ref: f64,
        drift_shift: &[f64],
    ) -> Result<Self, WalkerError> {
        if !(tau_ref > 0.0) {
            return Err(WalkerError::Config(format!("tau_ref must be positive, got {tau_ref}")));
        }
        if drift_shift.len() != params.dim {
            return Err(WalkerError::Config(format!(
                "drift shift has {} components for dimension {}",
                drift_shift.len(),
                params.dim
            )));
        }
        let cap = params.k1 * tau_ref;
        if let Some(d) = drift_shift.iter().find(|d| d.abs() > cap * (1.0 + 1e-12)) {
            return Err(WalkerError::Config(format!("drift shift {d} exceeds k1 * tau_ref = {cap}")));
        }
        let mut shift = [0.0; 2];
        shift[..params.dim].copy_from_slice(drift_shift);
        Ok(Self {
            distribution,
            scale: (2.0 * params.k2 * tau_ref).sqrt(),
            drift_shift: shift,
            dim: params.dim,
        })
    }

    /// The even part `Δ - Δe` of one jump.
    pub fn sample_symmetric<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let mut d = [0.0; 2];
        match self.distribution {
            JumpDistribution::GaussianIsotropic => {
                for x in d.iter_mut().take(self.dim) {
                    let z: f64 = StandardNormal.sample(rng);
                    *x = self.scale * z;
                }
            }
            JumpDistribution::UniformBall if self.dim == 1 => {
                // variance a^2 / 3
                let a = 3f64.sqrt() * self.scale;
                d[0] = a * (2.0 * rng.random::<f64>() - 1.0);
            }
            JumpDistribution::UniformBall => {
                // per-axis variance R^2 / 4
                let radius = 2.0 * self.scale * rng.random::<f64>().sqrt();
                let angle = std::f64::consts::TAU * rng.random::<f64>();
                d[0] = radius * angle.cos();
                d[1] = radius * angle.sin();
            }
        }
        d
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let s = self.sample_symmetric(rng);
        [s[0] + self.drift_shift[0], s[1] + self.drift_shift[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AbsorptionMode {
    #[default]
    WeightDecay,
    Deletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// Reweight by `c(arrival) / c(departure)`; matches the solver's operator.
    #[default]
    ArrivalRate,
    /// Plain jumps; conserves weight, divergence-form limit.
    Conserved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvanceOptions {
    /// Histogram grid; its node box is also the domain.
    pub grid: Grid,
    pub tau_ref: f64,
    pub tau_max: f64,
    pub refresh_every: f64,
    pub absorption: AbsorptionMode,
    pub weight_rule: WeightRule,
}

impl AdvanceOptions {
    /// `tau_max = 1000 tau_ref`, refresh every `tau_ref / 10`.
    pub fn new(grid: Grid, tau_ref: f64) -> Self {
        Self {
            grid,
            tau_ref,
            tau_max: 1e3 * tau_ref,
            refresh_every: tau_ref / 10.0,
            absorption: AbsorptionMode::WeightDecay,
            weight_rule: WeightRule::default(),
        }
    }

    fn validate(&self) -> Result<(), WalkerError> {
        if !(self.tau_ref > 0.0 && self.tau_max >= self.tau_ref && self.refresh_every > 0.0) {
            return Err(WalkerError::Config(format!(
                "need tau_ref > 0, tau_max >= tau_ref and refresh_every > 0, got {}, {}, {}",
                self.tau_ref, self.tau_max, self.refresh_every
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub dim: usize,
    pub positions: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub alive: Vec<bool>,
    /// Remaining waiting time in units of the local mean wait `tau`. Drawn
    /// from `Exp(1)` so jumps form a Markov process, and re-rated against the
    /// density at every refresh. Negative until the first `advance` draws it.
    pub phase: Vec<f64>,
    /// Jumps made so far; the event index of each particle's stream.
    pub events: Vec<u64>,
    pub rng_seed: u64,
    pub sim_time: f64,
    windows: u64,
}

impl Ensemble {
    pub fn empty(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            positions: Vec::new(),
            weights: Vec::new(),
            alive: Vec::new(),
            phase: Vec::new(),
            events: Vec::new(),
            rng_seed: seed,
            sim_time: 0.0,
            windows: 0,
        }
    }

    fn with_particles(dim: usize, positions: Vec<[f64; 2]>, weight: f64, seed: u64) -> Self {
        let n = positions.len();
        Self {
            positions,
            weights: vec![weight; n],
            alive: vec![true; n],
            phase: vec![-1.0; n],
            events: vec![0; n],
            ..Self::empty(dim, seed)
        }
    }

    /// `n` particles at `x0` sharing `mass`.
    pub fn point_source(dim: usize, n: usize, x0: &[f64], mass: f64, seed: u64) -> Self {
        let mut p = [0.0; 2];
        p[..dim].copy_from_slice(&x0[..dim]);
        Self::with_particles(dim, vec![p; n], mass / n.max(1) as f64, seed)
    }

    /// `n` equal-weight particles distributed like the nonnegative `field`,
    /// uniformly within each node cell. Total weight equals the field integral.
    pub fn from_field(field: &ScalarField, n: usize, seed: u64) -> Result<Self, WalkerError> {
        let grid = field.grid();
        let dim = grid.dim();
        let mut cdf = Vec::with_capacity(field.values().len());
        let mut acc = 0.0;
        for &v in field.values() {
            if v < 0.0 {
                return Err(WalkerError::Config("field must be nonnegative".into()));
            }
            acc += v;
            cdf.push(acc);
        }
        if n == 0 || acc == 0.0 {
            return Ok(Self::empty(dim, seed));
        }
        let key = StreamKey::new(seed);
        let h = grid.h();
        let positions = (0..n as u64)
            .into_par_iter()
            .map(|id| {
                let mut rng = key.rng(Purpose::Placement, id, 0);
                let target = rng.random::<f64>() * acc;
                let k = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
                let c = grid.coords(k);
                let mut p = [0.0; 2];
                for a in 0..dim {
                    p[a] = c[a] + h * (rng.random::<f64>() - 0.5);
                }
                p
            })
            .collect();
        Ok(Self::with_particles(dim, positions, integrate(field, Region::Full) / n as f64, seed))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    /// Weight of alive particles, summed in id order.
    pub fn total_weight(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.alive)
            .filter(|(_, a)| **a)
            .map(|(w, _)| *w)
            .sum()
    }

    /// Weighted mean and variance of coordinate `axis` over alive particles.
    pub fn moments(&self, axis: usize) -> (f64, f64) {
        let (m, v, _) = weighted_mean_var(
            self.positions
                .iter()
                .zip(&self.weights)
                .zip(&self.alive)
                .filter(|(_, a)| **a)
                .map(|((p, w), _)| (p[axis], *w)),
        );
        (m, v)
    }

    /// Standard errors of the mean and the variance of `axis` for an
    /// equal-weight ensemble.
    pub fn moment_standard_errors(&self, axis: usize) -> (f64, f64) {
        let (mean, var) = self.moments(axis);
        let xs: Vec<f64> = self
            .positions
            .iter()
            .zip(&self.alive)
            .filter(|(_, a)| **a)
            .map(|(p, _)| p[axis])
            .collect();
        let n = xs.len() as f64;
        if n < 2.0 {
            return (f64::NAN, f64::NAN);
        }
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        ((var / n).sqrt(), ((m4 - var * var) / n).max(0.0).sqrt())
    }
}

/// Histogram of an ensemble on a grid.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub field: ScalarField,
    /// Alive particles outside the node cells, binned into the nearest one.
    pub outside: usize,
}

/// Nearest-node histogram of alive weights divided by the cell volume.
pub fn estimate_density(ens: &Ensemble, grid: &Grid) -> DensityEstimate {
    let mut values = vec![0.0; grid.len()];
    let mut outside = 0;
    let inv = 1.0 / grid.cell_volume();
    for ((p, w), a) in ens.positions.iter().zip(&ens.weights).zip(&ens.alive) {
        if !*a {
            continue;
        }
        let (k, inside) = grid.nearest(&p[..grid.dim()]);
        if !inside {
            outside += 1;
        }
        values[k] += w * inv;
    }
    let field = ScalarField::from_values(grid.clone(), values)
        .expect("sized to the grid")
        .with_dirichlet(false);
    DensityEstimate { field, outside }
}

/// `u^alpha |grad u|^beta + eps` with `u` and `|grad u|` read at the node
/// nearest `x`.
fn coefficient_at(x: &[f64], params: &ModelParams, density: &ScalarField, grad_norm: Option<&[f64]>) -> f64 {
    let (k, _) = density.grid().nearest(x);
    let g = grad_norm.map_or(0.0, |g| g[k]);
    degenerate_coefficient(density.values()[k], g, params)
}

fn unit_exponential(key: &StreamKey, id: u64, event: u64) -> f64 {
    let mut rng = key.rng(Purpose::Clock, id, event);
    Exp1.sample(&mut rng)
}

fn tau_from_coefficient(coeff: f64, tau_ref: f64, tau_max: f64) -> f64 {
    if coeff > 0.0 {
        (tau_ref / coeff).min(tau_max)
    } else {
        tau_max
    }
}

/// Waiting time `min(tau_max, tau_ref / (u^alpha |grad u|^beta + eps))` with
/// `u` and `|grad u|` read at the node nearest `x`.
pub fn local_tau(
    x: &[f64],
    params: &ModelParams,
    density: &ScalarField,
    grad_norm: Option<&[f64]>,
    tau_ref: f64,
    tau_max: f64,
) -> f64 {
    tau_from_coefficient(coefficient_at(x, params, density, grad_norm), tau_ref, tau_max)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdvanceReport {
    pub jumps: u64,
    pub windows: u64,
    pub boundary_absorbed: usize,
    pub reaction_absorbed: usize,
    /// Particles whose weight dropped to zero on arriving where `c = 0`.
    pub degenerate_dropped: usize,
    /// Largest count of particles binned from outside the grid in one refresh.
    pub outside_binned: usize,
}

/// Run the event loop up to `until`.
pub fn advance(
    ens: &mut Ensemble,
    law: &JumpLaw,
    params: &ModelParams,
    until: f64,
    opts: &AdvanceOptions,
) -> Result<AdvanceReport, WalkerError> {
    opts.validate()?;
    if opts.grid.dim() != ens.dim || law.dim != ens.dim || params.dim != ens.dim {
        return Err(WalkerError::Field(FieldError::GridMismatch));
    }
    if until < ens.sim_time {
        return Err(WalkerError::Config(format!(
            "cannot advance backwards from {} to {until}",
            ens.sim_time
        )));
    }
    let mut report = AdvanceReport::default();
    let key = StreamKey::new(ens.rng_seed);
    let grid = &opts.grid;
    let dim = ens.dim;
    // window ends accumulate rounding; do not let it postpone a due jump
    let slack = 1e-9 * opts.tau_ref;

    while ens.sim_time < until {
        let start = ens.sim_time;
        let mut end = (start + opts.refresh_every).min(until);
        if until - end <= slack {
            end = until;
        }
        let density = estimate_density(ens, grid);
        report.outside_binned = report.outside_binned.max(density.outside);
        let grad = if params.beta != 0.0 {
            Some(gradient(&density.field)?.norm)
        } else {
            None
        };
        let coeff_at = |x: &[f64; 2]| coefficient_at(&x[..dim], params, &density.field, grad.as_deref());
        // departure rate floor implied by the cap
        let min_rate = opts.tau_ref / opts.tau_max;
        let reweight = opts.weight_rule == WeightRule::ArrivalRate;

        let (jumps, lost, dropped) = (
            ens.positions.par_iter_mut(),
            ens.weights.par_iter_mut(),
            ens.alive.par_iter_mut(),
            ens.phase.par_iter_mut(),
            ens.events.par_iter_mut(),
        )
            .into_par_iter()
            .enumerate()
            .map(|(id, (pos, weight, alive, phase, events))| {
                if !*alive {
                    return (0u64, 0usize, 0usize);
                }
                let mut c_here = coeff_at(pos);
                let mut tau = tau_from_coefficient(c_here, opts.tau_ref, opts.tau_max);
                let mut t = start;
                let mut jumps = 0;
                if *phase < 0.0 {
                    *phase = unit_exponential(&key, id as u64, *events);
                }
                loop {
                    let due = t + *phase * tau;
                    if due > end + slack {
                        *phase -= (end - t) / tau;
                        break;
                    }
                    t = due;
                    let mut rng = key.rng(Purpose::Jump, id as u64, *events);
                    let d = law.sample(&mut rng);
                    for a in 0..dim {
                        pos[a] += d[a];
                    }
                    *events += 1;
                    jumps += 1;
                    *phase = unit_exponential(&key, id as u64, *events);
                    if !grid.contains(&pos[..dim]) {
                        *alive = false;
                        return (jumps, 1, 0);
                    }
                    let c_there = coeff_at(pos);
                    if reweight && c_there != c_here {
                        *weight *= c_there / c_here.max(min_rate);
                        if *weight == 0.0 {
                            *alive = false;
                            return (jumps, 0, 1);
                        }
                    }
                    c_here = c_there;
                    tau = tau_from_coefficient(c_here, opts.tau_ref, opts.tau_max);
                }
                (jumps, 0, 0)
            })
            .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
        report.jumps += jumps;
        report.boundary_absorbed += lost;
        report.degenerate_dropped += dropped;

        if params.reaction.is_active() {
            report.reaction_absorbed += absorb(ens, params, &density.field, end - start, opts.absorption, &key);
        }
        ens.sim_time = end;
        ens.windows += 1;
        report.windows += 1;
    }
    Ok(report)
}

/// Per-particle loss rate `|A(u)| / u`, continued to `u = 0` by its limit.
pub fn absorption_rate(spec: &ReactionSpec, u: f64) -> f64 {
    if !spec.is_active() {
        return 0.0;
    }
    if u > 0.0 {
        return reaction_value(spec, u) / u;
    }
    match spec.power {
        s if s > 1.0 => 0.0,
        s if s == 1.0 => spec.coefficient,
        _ => f64::INFINITY,
    }
}

/// Remove weight at rate `|A(u)| / u` over a window of length `dt`.
fn absorb(
    ens: &mut Ensemble,
    params: &ModelParams,
    density: &ScalarField,
    dt: f64,
    mode: AbsorptionMode,
    key: &StreamKey,
) -> usize {
    let dim = ens.dim;
    let window = ens.windows;
    let rate = |p: &[f64; 2]| absorption_rate(&params.reaction, density.nearest_value(&p[..dim]));
    let parts = (ens.positions.par_iter(), ens.weights.par_iter_mut(), ens.alive.par_iter_mut());
    match mode {
        AbsorptionMode::WeightDecay => {
            parts.into_par_iter().for_each(|(p, w, alive)| {
                if *alive {
                    *w *= (-rate(p) * dt).exp();
                }
            });
            0
        }
        AbsorptionMode::Deletion => parts
            .into_par_iter()
            .enumerate()
            .map(|(id, (p, _, alive))| {
                if !*alive {
                    return 0;
                }
                let kill = 1.0 - (-rate(p) * dt).exp();
                let mut rng = key.rng(Purpose::Absorption, id as u64, window);
                if rng.random::<f64>() < kill {
                    *alive = false;
                    1
                } else {
                    0
                }
            })
            .sum(),
    }
}

/// Normalized L1 distance between two densities and their support radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub distance: f64,
    pub support_a: f64,
    pub support_b: f64,
}

/// `integral |a - b| / max(integral a, integral b)`, zero when both vanish.
pub fn compare_to_pde(ens_density: &ScalarField, pde_field: &ScalarField) -> Result<Comparison, FieldError> {
    let diff = ens_density.combine(1.0, pde_field, -1.0)?.map(f64::abs);
    let scale = integrate(ens_density, Region::Full).max(integrate(pde_field, Region::Full));
    let distance = if scale > 0.0 {
        integrate(&diff, Region::Full) / scale
    } else {
        0.0
    };
    Ok(Comparison {
        distance,
        support_a: support_radius(ens_density, SUPPORT_THRESHOLD),
        support_b: support_radius(pde_field, SUPPORT_THRESHOLD),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat_params(k2: f64) -> ModelParams {
        ModelParams {
            alpha: 0.0,
            beta: 0.0,
            k2,
            ..ModelParams::default()
        }
    }

    #[test]
    fn empty_ensemble_histogram_is_zero() {
        let grid = Grid::line(11, 0.5, -2.5).unwrap();
        let d = estimate_density(&Ensemble::empty(1, 0), &grid);
        assert!(d.field.values().iter().all(|&v| v == 0.0));
        assert_eq!(d.outside, 0);
    }

    #[test]
    fn single_particle_reads_inverse_spacing() {
        let grid = Grid::line(11, 0.5, -2.5).unwrap();
        let ens = Ensemble::point_source(1, 1, &[0.5], 1.0, 0);
        let d = estimate_density(&ens, &grid);
        let (k, _) = grid.nearest(&[0.5]);
        assert_eq!(d.field.values()[k], 2.0);
        assert_eq!(d.field.values().iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn outside_particles_are_flagged() {
        let grid = Grid::line(11, 0.5, -2.5).unwrap();
        let ens = Ensemble::point_source(1, 3, &[10.0], 3.0, 0);
        let d = estimate_density(&ens, &grid);
        assert_eq!(d.outside, 3);
        assert_eq!(d.field.values()[10], 2.0 * 3.0);
    }

    #[test]
    fn gaussian_histogram_matches_density() {
        let grid = Grid::centered_box(1, 6.0, 0.2).unwrap();
        let n = 100_000;
        let key = StreamKey::new(3);
        let positions: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut key.rng(Purpose::Jump, i, 0));
                [z, 0.0]
            })
            .collect();
        let ens = Ensemble::with_particles(1, positions, 1.0 / n as f64, 3);
        let d = estimate_density(&ens, &grid);
        for (k, &v) in d.field.values().iter().enumerate() {
            let x = grid.coords(k)[0];
            let p = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * 0.2;
            let stderr = (p * (1.0 - p) / n as f64).sqrt() / 0.2;
            assert!((v - p / 0.2).abs() <= 5.0 * stderr + 2e-3, "x = {x}: {v}");
        }
    }

    #[test]
    fn tau_examples() {
        let grid = Grid::line(3, 1.0, -1.0).unwrap();
        let p = ModelParams {
            alpha: 2.0,
            beta: 1.0,
            ..ModelParams::default()
        };
        let f = ScalarField::from_values(grid.clone(), vec![1.0, 1.0, 2.0]).unwrap();
        let g = [1.0, 1.0, 0.5];
        assert_eq!(local_tau(&[-1.0], &p, &f, Some(&g), 1.0, 1e3), 1.0);
        assert_eq!(local_tau(&[1.0], &p, &f, Some(&g), 1.0, 1e3), 0.5);
        let zero = ScalarField::zeros(grid);
        assert_eq!(local_tau(&[0.0], &p, &zero, Some(&[0.0; 3]), 1.0, 1e3), 1e3);
    }

    #[test]
    fn uniform_law_has_target_variance() {
        for dim in [1, 2] {
            let params = ModelParams {
                dim,
                k2: 0.5,
                ..ModelParams::default()
            };
            let law = JumpLaw::einstein(JumpDistribution::UniformBall, &params, 0.04, &vec![0.0; dim]).unwrap();
            let key = StreamKey::new(11);
            let n = 50_000;
            let var: f64 = (0..n)
                .map(|i| law.sample(&mut key.rng(Purpose::Jump, i, 0))[0].powi(2))
                .sum::<f64>()
                / n as f64;
            assert!((var - 0.04).abs() < 0.04 * 0.03, "dim {dim}: {var}");
        }
    }

    #[test]
    fn drift_shift_is_bounded() {
        let mut p = heat_params(1.0);
        p.k1 = 1.0;
        assert!(JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, 0.1, &[0.1]).is_ok());
        assert!(JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, 0.1, &[0.2]).is_err());
    }

    #[test]
    fn heat_walk_variance_law() {
        let k2 = 0.5;
        let p = heat_params(k2);
        let tau_ref = 0.05;
        let grid = Grid::centered_box(1, 8.0, 0.1).unwrap();
        let law = JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, tau_ref, &[0.0]).unwrap();
        let mut ens = Ensemble::point_source(1, 20_000, &[0.0], 1.0, 5);
        let w0 = ens.total_weight();
        let mut opts = AdvanceOptions::new(grid, tau_ref);
        opts.refresh_every = 0.25;
        let rep = advance(&mut ens, &law, &p, 1.0, &opts).unwrap();
        // Poisson jump counts: mean 20 per particle
        let expected = 20.0 * 20_000.0;
        assert!((rep.jumps as f64 - expected).abs() < 4.0 * f64::sqrt(expected), "{}", rep.jumps);
        let (mean, var) = ens.moments(0);
        let (se_m, se_v) = ens.moment_standard_errors(0);
        assert!(mean.abs() < 3.0 * se_m);
        assert!((var - 2.0 * k2).abs() < 3.0 * se_v, "var {var}");
        assert_eq!(ens.total_weight(), w0);
    }

    #[test]
    fn frozen_particles_wait_tau_max() {
        let p = ModelParams::default();
        let grid = Grid::centered_box(1, 4.0, 0.1).unwrap();
        let law = JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, 0.01, &[0.0]).unwrap();
        // an isolated particle still sees its own cell, so place one far from
        // the pack and check the cap directly
        let zero = ScalarField::zeros(grid.clone());
        assert_eq!(local_tau(&[1.0], &p, &zero, None, 0.01, 10.0), 10.0);
        let mut ens = Ensemble::point_source(1, 10, &[0.0], 1.0, 1);
        let mut opts = AdvanceOptions::new(grid, 0.01);
        opts.tau_max = 0.5;
        advance(&mut ens, &law, &p, 0.1, &opts).unwrap();
        assert!(ens.events.iter().all(|&e| e > 0));
    }

    #[test]
    fn zero_particles_unchanged() {
        let p = ModelParams::default();
        let grid = Grid::centered_box(1, 4.0, 0.1).unwrap();
        let law = JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, 0.01, &[0.0]).unwrap();
        let mut ens = Ensemble::empty(1, 1);
        let rep = advance(&mut ens, &law, &p, 1.0, &AdvanceOptions::new(grid, 0.01)).unwrap();
        assert_eq!(rep.jumps, 0);
        assert!(ens.is_empty());
        assert_eq!(ens.sim_time, 1.0);
    }

    #[test]
    fn boundary_absorbs() {
        let p = heat_params(1.0);
        let grid = Grid::centered_box(1, 1.0, 0.1).unwrap();
        let law = JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, 0.01, &[0.0]).unwrap();
        let mut ens = Ensemble::point_source(1, 1000, &[0.0], 1.0, 2);
        let rep = advance(&mut ens, &law, &p, 2.0, &AdvanceOptions::new(grid, 0.01)).unwrap();
        assert!(rep.boundary_absorbed > 500);
        assert_eq!(ens.alive_count(), 1000 - rep.boundary_absorbed);
    }

    #[test]
    fn reaction_removes_weight() {
        let mut p = heat_params(1.0);
        p.reaction = crate::params::ReactionSpec::power_law(1.0, 1.0);
        let grid = Grid::centered_box(1, 4.0, 0.1).unwrap();
        let law = JumpLaw::einstein(JumpDistribution::GaussianIsotropic, &p, 0.01, &[0.0]).unwrap();
        let mut ens = Ensemble::point_source(1, 1000, &[0.0], 1.0, 2);
        advance(&mut ens, &law, &p, 0.5, &AdvanceOptions::new(grid.clone(), 0.01)).unwrap();
        // rate |A(u)| / u = 1 everywhere
        assert!((ens.total_weight() - (-0.5f64).exp()).abs() < 1e-9);

        let mut ens = Ensemble::point_source(1, 4000, &[0.0], 1.0, 2);
        let mut opts = AdvanceOptions::new(grid, 0.01);
        opts.absorption = AbsorptionMode::Deletion;
        let rep = advance(&mut ens, &law, &p, 0.5, &opts).unwrap();
        let frac = ens.alive_count() as f64 / 4000.0;
        assert!((frac - (-0.5f64).exp()).abs() < 0.03, "{frac}");
        assert_eq!(rep.reaction_absorbed, 4000 - ens.alive_count());
    }

    #[test]
    fn placement_follows_field() {
        let grid = Grid::centered_box(1, 3.0, 0.05).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| (1.0 - x[0] * x[0]).max(0.0));
        let ens = Ensemble::from_field(&f, 50_000, 4).unwrap();
        assert!((ens.total_weight() - integrate(&f, Region::Full)).abs() < 1e-9);
        assert!(ens.positions.iter().all(|p| p[0].abs() < 1.0 + 0.025));
        let (m, v) = ens.moments(0);
        // variance of the normalized parabola on [-1, 1] is 1/5
        assert!(m.abs() < 0.01);
        assert!((v - 0.2).abs() < 0.01);
    }

    #[test]
    fn comparison_examples() {
        let grid = Grid::line(11, 1.0, -5.0).unwrap();
        let a = ScalarField::from_fn(grid.clone(), |x| if x[0] < 0.0 && x[0] > -3.0 { 0.5 } else { 0.0 });
        let b = ScalarField::from_fn(grid.clone(), |x| if x[0] > 0.0 && x[0] < 3.0 { 0.5 } else { 0.0 });
        assert_eq!(compare_to_pde(&a, &a).unwrap().distance, 0.0);
        assert_eq!(compare_to_pde(&a, &b).unwrap().distance, 2.0);
        let z = ScalarField::zeros(grid);
        assert_eq!(compare_to_pde(&z, &z).unwrap().distance, 0.0);
    }
}
