#![allow(dead_code)]

use std::path::Path;

use fsplab::config::{Command, InitialCondition, RunConfig, WalkSource};
use fsplab::params::{validate_params, ModelParams};
use rand::Rng;

pub const THRESHOLD: f64 = 1e-10;

fn base(command: Command, dir: &Path) -> RunConfig {
    RunConfig { command: Some(command), output_dir: dir.to_path_buf(), seed: 20240607, ..RunConfig::default() }
}

pub fn bump() -> InitialCondition {
    InitialCondition::Bump { amplitude: 1.0, radius: Some(1.0), power: 2.0 }
}

/// Porous-medium validation: m = 2, 401 nodes on [-10, 10], t = 1 to 2.
pub fn pme(dir: &Path) -> RunConfig {
    base(Command::ValidatePme, dir)
}

/// Degenerate model alpha = 1 on [-6, 6] with R0 = 1, r = 2.5.
pub fn degenerate_params(beta: f64) -> ModelParams {
    let theta = if beta == 0.0 { 2.0 } else { 6.0 };
    ModelParams { alpha: 1.0, beta, theta, p: beta + 2.0, r0: 1.0, r: 2.5, domain_half_width: 6.0, ..ModelParams::default() }
}

/// Epsilon sweep with the alpha = beta = 0 contrast run for beta = 0.
pub fn sweep(beta: f64, dir: &Path) -> RunConfig {
    let mut cfg = base(Command::EpsSweep, dir);
    cfg.params = degenerate_params(beta);
    cfg.grid.h = if beta == 0.0 { 2.5 / 256.0 } else { 2.5 / 128.0 };
    cfg.initial = bump();
    cfg.solver.snapshots = 200;
    cfg.sweep.epsilons = vec![1e-2, 1e-3, 1e-4];
    cfg.sweep.max_drop = 0.5;
    cfg.sweep.min_horizon = 4.0;
    cfg.sweep.contrast = beta == 0.0;
    cfg.sweep.contrast_theta = 3.0;
    cfg
}

/// Certificate on the eps = 1e-2 member of the beta = 0 sweep, T = 4.
pub fn certify(alpha: f64, beta: f64, dir: &Path) -> RunConfig {
    let mut cfg = base(Command::Certify, dir);
    cfg.params = ModelParams { alpha, beta, epsilon_reg: 1e-2, ..degenerate_params(0.0) };
    if alpha == 0.0 && beta == 0.0 {
        cfg.params.theta = 3.0;
    }
    cfg.grid.h = 2.5 / 256.0;
    cfg.initial = bump();
    cfg.solver.t_end = 4.0;
    cfg.solver.snapshots = 200;
    cfg.degiorgi.horizon = Some(4.0);
    cfg
}

/// Heat walk: alpha = beta = 0, point source, k2 = 0.5, t = 1.
pub fn heat_walk(dir: &Path) -> RunConfig {
    let mut cfg = base(Command::Walk, dir);
    cfg.params = ModelParams { alpha: 0.0, beta: 0.0, k2: 0.5, epsilon_reg: 0.0, ..ModelParams::default() };
    cfg.grid.h = 0.1;
    cfg.initial = bump();
    cfg.walkers.particles = 100_000;
    cfg.walkers.tau_ref = 0.01;
    cfg.walkers.t_end = Some(1.0);
    cfg.walkers.source = WalkSource::Point;
    cfg
}

/// Degenerate walk alpha = 1, beta = 0 from (1 - x^2)^2 against the PDE at t = 0.1.
pub fn degenerate_walk(dir: &Path) -> RunConfig {
    let mut cfg = base(Command::Walk, dir);
    cfg.params = ModelParams { alpha: 1.0, beta: 0.0, epsilon_reg: 0.0, domain_half_width: 3.0, ..ModelParams::default() };
    cfg.grid.h = 0.02;
    cfg.initial = bump();
    cfg.walkers.particles = 100_000;
    cfg.walkers.tau_ref = 1e-3;
    cfg.walkers.t_end = Some(0.1);
    cfg.walkers.source = WalkSource::Field;
    cfg
}

/// A random parameter set accepted by `validate_params` (rejection sampling).
pub fn admissible<R: Rng>(rng: &mut R) -> ModelParams {
    loop {
        let beta = if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..3.0) };
        let k2 = rng.random_range(0.1..5.0);
        let r0 = rng.random_range(0.2..2.0);
        let mut p = ModelParams {
            alpha: rng.random_range(0.05..12.0),
            beta,
            theta: rng.random_range(1.0..10.0),
            k2,
            k1: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.5 * k2) },
            c1: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.5) },
            dim: rng.random_range(1..=2),
            epsilon_reg: rng.random_range(0.0..0.1),
            r0,
            r: r0 * rng.random_range(2.05..6.0),
            c_cut: rng.random_range(4.0..6.0),
            domain_half_width: 6.0 * r0 * 2.0,
            ..ModelParams::default()
        };
        let (lo, hi) = (p.p_lower(), p.p_upper());
        if hi <= lo {
            continue;
        }
        p.p = rng.random_range(lo..hi);
        if validate_params(&p).is_ok() {
            return p;
        }
    }
}
