//! Closed-form reference solutions: the heat kernel and the Barenblatt
//! self-similar solution of the porous medium equation `u_t = Δ(u^m)`.

use std::f64::consts::PI;

use crate::error::OracleError;
use crate::field::{norm, Grid, ScalarField};

/// `(4πDt)^(-N/2) exp(-|x|^2 / (4Dt))`.
pub fn heat_kernel(x: &[f64], t: f64, diffusivity: f64, dim: usize) -> Result<f64, OracleError> {
    if !(t > 0.0) {
        return Err(OracleError::Time(t));
    }
    let four_dt = 4.0 * diffusivity * t;
    let r2: f64 = x[..dim].iter().map(|v| v * v).sum();
    Ok((PI * four_dt).powf(-(dim as f64) / 2.0) * (-r2 / four_dt).exp())
}

/// Heat kernel sampled on every node of `grid`.
pub fn sample_heat_kernel(
    grid: &Grid,
    t: f64,
    diffusivity: f64,
) -> Result<ScalarField, OracleError> {
    if !(t > 0.0) {
        return Err(OracleError::Time(t));
    }
    let dim = grid.dim();
    Ok(ScalarField::from_fn(grid.clone(), |x| {
        heat_kernel(x, t, diffusivity, dim).unwrap_or(0.0)
    }))
}

/// Barenblatt solution with exponent `m > 1` in dimension `dim`.
///
/// `u(x,t) = t^(-a) (C - kappa |x|^2 t^(-2a/N))_+^(1/(m-1))` with
/// `a = N/(N(m-1)+2)` and `kappa = (m-1) a / (2 m N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarenblattSpec {
    pub m: f64,
    pub dim: usize,
    pub mass: f64,
    /// Physical time at which validation runs start.
    pub t_offset: f64,
    constant: f64,
}

impl BarenblattSpec {
    /// Profile carrying total mass `mass`.
    pub fn new(m: f64, dim: usize, mass: f64, t_offset: f64) -> Result<Self, OracleError> {
        Self::check(m, dim, t_offset)?;
        if !(mass > 0.0) {
            return Err(OracleError::Spec(format!("mass must be positive, got {mass}")));
        }
        let mut spec = Self {
            m,
            dim,
            mass,
            t_offset,
            constant: 1.0,
        };
        // mass = C^(1/(m-1) + N/2) * mass_at_unit_constant
        let unit = spec.mass_for_constant(1.0);
        let power = 1.0 / (m - 1.0) + dim as f64 / 2.0;
        spec.constant = (mass / unit).powf(1.0 / power);
        Ok(spec)
    }

    /// Profile with a prescribed constant `C`.
    pub fn with_constant(m: f64, dim: usize, constant: f64, t_offset: f64) -> Result<Self, OracleError> {
        Self::check(m, dim, t_offset)?;
        if !(constant > 0.0) {
            return Err(OracleError::Spec(format!("constant must be positive, got {constant}")));
        }
        let mut spec = Self {
            m,
            dim,
            mass: 0.0,
            t_offset,
            constant,
        };
        spec.mass = spec.mass_for_constant(constant);
        Ok(spec)
    }

    fn check(m: f64, dim: usize, t_offset: f64) -> Result<(), OracleError> {
        if !(m > 1.0) {
            return Err(OracleError::Spec(format!("m must exceed 1, got {m}")));
        }
        if dim != 1 && dim != 2 {
            return Err(OracleError::Spec(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(t_offset > 0.0) {
            return Err(OracleError::Spec(format!("t_offset must be positive, got {t_offset}")));
        }
        Ok(())
    }

    fn mass_for_constant(&self, c: f64) -> f64 {
        let n = self.dim as f64;
        let k = 1.0 / (self.m - 1.0);
        // integral of (1 - |y|^2)_+^k over the unit ball
        let ball = PI.powf(n / 2.0) * libm::tgamma(k + 1.0) / libm::tgamma(k + 1.0 + n / 2.0);
        c.powf(k + n / 2.0) * self.kappa().powf(-n / 2.0) * ball
    }

    /// Self-similar exponent `a = N / (N(m-1) + 2)`.
    pub fn a(&self) -> f64 {
        let n = self.dim as f64;
        n / (n * (self.m - 1.0) + 2.0)
    }

    pub fn kappa(&self) -> f64 {
        (self.m - 1.0) * self.a() / (2.0 * self.m * self.dim as f64)
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `R(t) = sqrt(C / kappa) t^(a/N)`.
    pub fn support_radius(&self, t: f64) -> Result<f64, OracleError> {
        if !(t > 0.0) {
            return Err(OracleError::Time(t));
        }
        Ok((self.constant / self.kappa()).sqrt() * t.powf(self.a() / self.dim as f64))
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<f64, OracleError> {
        if !(t > 0.0) {
            return Err(OracleError::Time(t));
        }
        Ok(self.value_unchecked(norm(&x[..self.dim]), t))
    }

    fn value_unchecked(&self, rho: f64, t: f64) -> f64 {
        let a = self.a();
        let inner = self.constant - self.kappa() * rho * rho * t.powf(-2.0 * a / self.dim as f64);
        if inner <= 0.0 {
            0.0
        } else {
            t.powf(-a) * inner.powf(1.0 / (self.m - 1.0))
        }
    }

    /// Profile at physical time `t` sampled on `grid`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<ScalarField, OracleError> {
        if !(t > 0.0) {
            return Err(OracleError::Time(t));
        }
        let dim = grid.dim();
        Ok(ScalarField::from_fn(grid.clone(), |x| {
            self.value_unchecked(norm(&x[..dim]), t)
        }))
    }
}

/// Free function form of [`BarenblattSpec::value`].
pub fn barenblatt(x: &[f64], t: f64, spec: &BarenblattSpec) -> Result<f64, OracleError> {
    spec.value(x, t)
}
