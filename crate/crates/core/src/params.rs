//! Model parameters, admissibility checks, and the closed-form constants of
//! the localization estimate.
//!
//! Every constant here is a plain function of [`ModelParams`]; nothing is
//! fitted. The embedding constants `c_G` and `c_p` are inputs (default 1).

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParamsError;

/// Kind of the reaction (absorption/bonding) term `A(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReactionKind {
    /// `A(u) = 0`.
    #[default]
    None,
    /// `|A(u)| = a * u^sigma`.
    PowerLaw,
}

/// Reaction term and the auxiliary transform `F` with `|A(u)| u^theta = F^s(z^gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactionSpec {
    pub kind: ReactionKind,
    /// Coefficient `a >= 0` of the power law.
    pub coefficient: f64,
    /// Power `sigma > 0` of the power law.
    pub power: f64,
    /// Exponent `s`; when absent the lower end of the admissible window is used.
    pub s_exponent: Option<f64>,
    /// Bound `M0` on `F'`.
    pub m0_bound: f64,
    /// Upper end of the density range on which `F'` is checked.
    pub u_range: f64,
}

impl Default for ReactionSpec {
    fn default() -> Self {
        Self {
            kind: ReactionKind::None,
            coefficient: 0.0,
            power: 1.0,
            s_exponent: None,
            m0_bound: 1.0,
            u_range: 1.0,
        }
    }
}

impl ReactionSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn power_law(coefficient: f64, power: f64) -> Self {
        Self {
            kind: ReactionKind::PowerLaw,
            coefficient,
            power,
            ..Self::default()
        }
    }

    pub fn is_active(&self) -> bool {
        self.kind == ReactionKind::PowerLaw && self.coefficient > 0.0
    }

    /// Lipschitz-type rate of `|A|` on `[0, u_max]`, used by the explicit step limit.
    pub fn lipschitz_on(&self, u_max: f64) -> f64 {
        if !self.is_active() || u_max <= 0.0 {
            return 0.0;
        }
        let (a, sigma) = (self.coefficient, self.power);
        if sigma >= 1.0 {
            a * sigma * u_max.powf(sigma - 1.0)
        } else {
            // secant slope; the derivative is unbounded at zero
            a * u_max.powf(sigma - 1.0)
        }
    }
}

/// `|A(u)|`; zero for [`ReactionKind::None`] and at `u = 0`.
pub fn reaction_value(spec: &ReactionSpec, u: f64) -> f64 {
    match spec.kind {
        ReactionKind::None => 0.0,
        ReactionKind::PowerLaw => {
            if u <= 0.0 {
                0.0
            } else {
                spec.coefficient * u.powf(spec.power)
            }
        }
    }
}

/// All physical and analysis constants of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Degeneracy power on `u`.
    pub alpha: f64,
    /// Degeneracy power on `|grad u|`.
    pub beta: f64,
    /// Bound on drift components.
    pub k1: f64,
    /// Isotropic covariance scale, `sigma_ij = 2 k2 delta_ij`.
    pub k2: f64,
    /// Gradient-bound constant `C1`.
    pub c1: f64,
    /// Test exponent `theta >= 1`.
    pub theta: f64,
    /// Cutoff power.
    pub p: f64,
    /// Spatial dimension (1 or 2).
    pub dim: usize,
    /// Regularization `epsilon`.
    pub epsilon_reg: f64,
    /// Initial support radius `R0`.
    pub r0: f64,
    /// Base radius `r > 2 R0` of the annular domains.
    pub r: f64,
    /// Cutoff slope constant `c`.
    pub c_cut: f64,
    /// Gagliardo-Nirenberg constant.
    pub sobolev_cg: f64,
    /// Poincare-Sobolev constant.
    pub poincare_cp: f64,
    /// Half width `L` of the box domain `[-L, L]^N`.
    pub domain_half_width: f64,
    pub reaction: ReactionSpec,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            k1: 0.0,
            k2: 1.0,
            c1: 0.0,
            theta: 2.0,
            p: 2.0,
            dim: 1,
            epsilon_reg: 0.0,
            r0: 1.0,
            r: 2.5,
            c_cut: 4.0,
            sobolev_cg: 1.0,
            poincare_cp: 1.0,
            domain_half_width: 6.0,
            reaction: ReactionSpec::default(),
        }
    }
}

impl ModelParams {
    /// Exponent of the z-transform, `(theta + alpha + beta + 1) / (beta + 2)`.
    pub fn z_exponent(&self) -> f64 {
        (self.theta + self.alpha + self.beta + 1.0) / (self.beta + 2.0)
    }

    /// Upper end of the cutoff-power window (exclusive).
    pub fn p_upper(&self) -> f64 {
        (self.theta + self.alpha) / (self.beta + 1.0) - self.k1 / self.k2 - self.c1
    }

    pub fn p_lower(&self) -> f64 {
        self.beta + 2.0
    }

    /// `Lambda = (alpha+beta) / (alpha+beta + N (beta+2)(theta+1))`.
    pub fn big_lambda(&self) -> f64 {
        let sum = self.alpha + self.beta;
        sum / (sum + self.dim as f64 * (self.beta + 2.0) * (self.theta + 1.0))
    }

    pub fn eps0(&self) -> f64 {
        self.dim as f64 * self.big_lambda() * (self.beta + 2.0)
    }

    /// Coefficient `D_n` of the energy inequality.
    pub fn d_n(&self, n: usize) -> f64 {
        let slope = self.c_cut * 2f64.powi(n as i32) / self.r;
        (self.theta + 1.0) * (self.k2 * self.p * slope.powf(self.beta + 2.0) + self.k1 + self.c1)
    }

    /// Geometric majorant `(theta+1)(k1 + c k2 (theta+alpha) / (2 R0)) 2^(n(beta+2))` of `D_n`.
    pub fn d_n_majorant(&self, n: usize) -> f64 {
        self.d_majorant_base() * 2f64.powf(n as f64 * (self.beta + 2.0))
    }

    fn d_majorant_base(&self) -> f64 {
        (self.theta + 1.0)
            * (self.k1 + self.c_cut / (2.0 * self.r0) * self.k2 * (self.theta + self.alpha))
    }

    /// `|Omega|` for the box `[-L, L]^N`.
    pub fn domain_measure(&self) -> f64 {
        (2.0 * self.domain_half_width).powi(self.dim as i32)
    }

    /// `|Omega_0| = |Omega \ B_r|`.
    pub fn omega0_measure(&self) -> f64 {
        self.domain_measure() - ball_measure(self.dim, self.r)
    }

    /// Admissible window `[lo, hi)` for the reaction exponent `s`.
    pub fn s_window(&self) -> (f64, f64) {
        let n = self.dim as f64;
        let e0 = self.eps0();
        let lo = (1.0 + e0).max(n * e0);
        let hi = (self.beta + 2.0).min(n * (1.0 + e0));
        (lo, hi)
    }
}

fn ball_measure(dim: usize, radius: f64) -> f64 {
    match dim {
        1 => 2.0 * radius,
        2 => std::f64::consts::PI * radius * radius,
        _ => f64::NAN,
    }
}

/// One violated admissibility condition, carrying the offending bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeAlpha { alpha: f64 },
    NegativeBeta { beta: f64 },
    NonPositiveK2 { k2: f64 },
    NegativeK1 { k1: f64 },
    NegativeC1 { c1: f64 },
    ThetaBelowOne { theta: f64 },
    UnsupportedDim { dim: usize },
    NegativeEpsilon { epsilon: f64 },
    NonPositiveR0 { r0: f64 },
    RadiusOrder { r: f64, r0: f64 },
    DomainTooSmall { half_width: f64, r: f64 },
    PBounds { p: f64, lower: f64, upper: f64 },
    CutoffSlope { c: f64 },
    Majorization { d0: f64, majorant: f64 },
    NonPositiveConstant { name: &'static str, value: f64 },
    ReactionCoefficient { coefficient: f64, power: f64 },
    ReactionWindow { s: f64, lower: f64, upper: f64 },
    ReactionDerivative { sup: f64, m0: f64 },
}

impl Violation {
    /// Whether the condition matters for plain simulation, as opposed to
    /// only the localization certificate.
    pub fn blocks_simulation(&self) -> bool {
        matches!(
            self,
            Violation::NegativeAlpha { .. }
                | Violation::NegativeBeta { .. }
                | Violation::NonPositiveK2 { .. }
                | Violation::NegativeK1 { .. }
                | Violation::NegativeEpsilon { .. }
                | Violation::UnsupportedDim { .. }
                | Violation::ReactionCoefficient { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeAlpha { alpha } => write!(f, "alpha = {alpha} < 0"),
            Violation::NegativeBeta { beta } => write!(f, "beta = {beta} < 0"),
            Violation::NonPositiveK2 { k2 } => write!(f, "k2 = {k2} must be > 0"),
            Violation::NegativeK1 { k1 } => write!(f, "k1 = {k1} < 0"),
            Violation::NegativeC1 { c1 } => write!(f, "c1 = {c1} < 0"),
            Violation::ThetaBelowOne { theta } => write!(f, "theta = {theta} < 1"),
            Violation::UnsupportedDim { dim } => write!(f, "dimension {dim} not in {{1, 2}}"),
            Violation::NegativeEpsilon { epsilon } => write!(f, "epsilon_reg = {epsilon} < 0"),
            Violation::NonPositiveR0 { r0 } => write!(f, "r0 = {r0} must be > 0"),
            Violation::RadiusOrder { r, r0 } => {
                write!(f, "r <= 2R0: r = {r}, 2R0 = {}", 2.0 * r0)
            }
            Violation::DomainTooSmall { half_width, r } => {
                write!(f, "domain half width {half_width} does not exceed 2r = {}", 2.0 * r)
            }
            Violation::PBounds { p, lower, upper } => {
                write!(f, "p-bounds: need {lower} <= p < {upper}, got p = {p}")
            }
            Violation::CutoffSlope { c } => write!(
                f,
                "cutoff slope constant c = {c} < 4; the ramp between r_n and the mid radius needs slope 2^(n+2)/r"
            ),
            Violation::Majorization { d0, majorant } => write!(
                f,
                "D_0 = {d0} exceeds its geometric majorant {majorant}; C_L does not bound D_n"
            ),
            Violation::NonPositiveConstant { name, value } => {
                write!(f, "{name} = {value} must be > 0")
            }
            Violation::ReactionCoefficient { coefficient, power } => write!(
                f,
                "power-law reaction needs a >= 0 and sigma > 0, got a = {coefficient}, sigma = {power}"
            ),
            Violation::ReactionWindow { s, lower, upper } => {
                write!(f, "reaction exponent window: need {lower} <= s < {upper}, got s = {s}")
            }
            Violation::ReactionDerivative { sup, m0 } => {
                write!(f, "sup |F'| = {sup} exceeds M0 = {m0}")
            }
        }
    }
}

/// Outcome of [`validate_params`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when nothing blocks a plain solver/walker run.
    pub fn simulation_ok(&self) -> bool {
        !self.violations.iter().any(Violation::blocks_simulation)
    }

    pub fn into_result(self) -> Result<(), ParamsError> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(ParamsError::Invalid(self.violations))
        }
    }
}

impl fmt::Display for ValidationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// Check every admissibility condition and report all violations at once.
pub fn validate_params(params: &ModelParams) -> ValidationResult {
    let mut out = Vec::new();
    let p = params;
    if !(p.alpha >= 0.0) {
        out.push(Violation::NegativeAlpha { alpha: p.alpha });
    }
    if !(p.beta >= 0.0) {
        out.push(Violation::NegativeBeta { beta: p.beta });
    }
    if !(p.k2 > 0.0) {
        out.push(Violation::NonPositiveK2 { k2: p.k2 });
    }
    if !(p.k1 >= 0.0) {
        out.push(Violation::NegativeK1 { k1: p.k1 });
    }
    if !(p.c1 >= 0.0) {
        out.push(Violation::NegativeC1 { c1: p.c1 });
    }
    if !(p.theta >= 1.0) {
        out.push(Violation::ThetaBelowOne { theta: p.theta });
    }
    if !(p.dim == 1 || p.dim == 2) {
        out.push(Violation::UnsupportedDim { dim: p.dim });
    }
    if !(p.epsilon_reg >= 0.0) {
        out.push(Violation::NegativeEpsilon { epsilon: p.epsilon_reg });
    }
    if !(p.r0 > 0.0) {
        out.push(Violation::NonPositiveR0 { r0: p.r0 });
    }
    if !(p.r > 2.0 * p.r0) {
        out.push(Violation::RadiusOrder { r: p.r, r0: p.r0 });
    }
    if !(p.domain_half_width > 2.0 * p.r) {
        out.push(Violation::DomainTooSmall {
            half_width: p.domain_half_width,
            r: p.r,
        });
    }
    let (lower, upper) = (p.p_lower(), p.p_upper());
    if !(p.p >= lower && p.p < upper) {
        out.push(Violation::PBounds {
            p: p.p,
            lower,
            upper,
        });
    }
    if !(p.c_cut >= 4.0) {
        out.push(Violation::CutoffSlope { c: p.c_cut });
    }
    let (d0, majorant) = (p.d_n(0), p.d_n_majorant(0));
    if !(d0 <= majorant) {
        out.push(Violation::Majorization { d0, majorant });
    }
    for (name, value) in [("sobolev_cg", p.sobolev_cg), ("poincare_cp", p.poincare_cp)] {
        if !(value > 0.0) {
            out.push(Violation::NonPositiveConstant { name, value });
        }
    }
    if p.reaction.kind == ReactionKind::PowerLaw {
        let rs = &p.reaction;
        if !(rs.coefficient >= 0.0 && rs.power > 0.0) {
            out.push(Violation::ReactionCoefficient {
                coefficient: rs.coefficient,
                power: rs.power,
            });
        }
        let (lo, hi) = p.s_window();
        let s = rs.s_exponent.unwrap_or(lo);
        if !(s >= lo && s < hi) {
            out.push(Violation::ReactionWindow {
                s,
                lower: lo,
                upper: hi,
            });
        } else if let Some(t) = reaction_transform(p, s, rs.u_range) {
            if !(t.sup_f_prime <= rs.m0_bound) {
                out.push(Violation::ReactionDerivative {
                    sup: t.sup_f_prime,
                    m0: rs.m0_bound,
                });
            }
        }
    }
    ValidationResult { violations: out }
}

/// Power-law realization of `F`: `F(w) = a^(1/s) w^exponent` with `w = z^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionTransform {
    pub exponent: f64,
    pub sup_f_prime: f64,
}

fn reaction_transform(p: &ModelParams, s: f64, u_max: f64) -> Option<ReactionTransform> {
    if p.reaction.kind != ReactionKind::PowerLaw {
        return None;
    }
    let a = p.reaction.coefficient;
    let sigma = p.reaction.power;
    let gamma = gamma_for(p, s);
    let kappa = p.z_exponent();
    let exponent = (sigma + p.theta) / (s * kappa * gamma);
    let scale = a.powf(1.0 / s);
    let w_max = u_max.max(0.0).powf(kappa * gamma);
    let sup_f_prime = if a == 0.0 {
        0.0
    } else if (exponent - 1.0).abs() <= 1e-12 {
        scale
    } else if exponent > 1.0 {
        scale * exponent * w_max.powf(exponent - 1.0)
    } else {
        f64::INFINITY
    };
    Some(ReactionTransform {
        exponent,
        sup_f_prime,
    })
}

fn lambda_of(p: &ModelParams) -> f64 {
    (p.theta + 1.0) * (p.beta + 2.0) / (p.theta + p.alpha + p.beta + 1.0)
}

fn gamma_for(p: &ModelParams, s: f64) -> f64 {
    ((1.0 + p.eps0()) / s - 1.0 / (p.beta + 2.0)) * lambda_of(p) + 1.0
}

/// Closed-form constants of the energy estimate, the iterative inequality and
/// the smallness thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// `lambda` of the z-transform.
    pub lambda: f64,
    /// `Lambda` of the Gagliardo-Nirenberg interpolation.
    pub big_lambda: f64,
    pub eps0: f64,
    /// Coefficient `C` of the gradient term.
    pub c_energy: f64,
    /// `D_n` for `n = 0..=n_max`.
    pub d: Vec<f64>,
    pub c_l: f64,
    pub b_l: f64,
    pub m_l: f64,
    pub g: f64,
    /// Exponent of the winning branch of `t^q` at the horizon.
    pub q: f64,
    /// `t^q` resolved at the horizon.
    pub t_pow_q: f64,
    pub t_horizon: f64,
    pub s: f64,
    pub gamma: f64,
    pub h_exp: f64,
    pub m_exp: f64,
    /// Exponent of the power-law `F`, when a reaction is active.
    pub f_exponent: Option<f64>,
    /// `sup |F'|` on the working range.
    pub sup_f_prime: Option<f64>,
    /// Threshold on `I_0(T)` for the combined iterative inequality.
    pub theta_l: Option<f64>,
    /// Threshold on `I_0(t)` without reaction, in terms of `C_L` only.
    pub theta_l_no_reaction: Option<f64>,
    pub b0: Option<f64>,
    pub mu: Option<f64>,
    /// Admissible `||u_0||_inf` at the horizon (no reaction).
    pub sup_norm_bound: Option<f64>,
}

/// Compute every derived constant; `t_horizon` resolves `t^q` and the
/// time-dependent thresholds.
pub fn derive_constants(
    params: &ModelParams,
    n_max: usize,
    t_horizon: f64,
) -> Result<DerivedConstants, ParamsError> {
    derive_constants_on_range(params, n_max, t_horizon, params.reaction.u_range)
}

/// As [`derive_constants`], with `sup |F'|` taken over `[0, u_max]`.
pub fn derive_constants_on_range(
    params: &ModelParams,
    n_max: usize,
    t_horizon: f64,
    u_max: f64,
) -> Result<DerivedConstants, ParamsError> {
    let p = params;
    if !(t_horizon > 0.0) {
        return Err(ParamsError::Horizon(t_horizon));
    }
    let (alpha, beta, theta) = (p.alpha, p.beta, p.theta);
    let n_dim = p.dim as f64;
    let bp2 = beta + 2.0;

    let lambda = lambda_of(p);
    let big_lambda = p.big_lambda();
    let eps0 = p.eps0();
    let c_energy =
        (theta + 1.0) * (p.k2 * (theta + alpha) / (1.0 + beta) - p.k1 - p.c1 * p.k2 * p.p);
    let d: Vec<f64> = (0..=n_max).map(|n| p.d_n(n)).collect();
    let c_l = (theta + 1.0)
        * (p.k1 + p.c_cut / (2.0 * p.r0) * p.k2 * (theta + alpha))
        * p.sobolev_cg
        * 2f64.powf(bp2);
    let b_l = 2f64.powf(bp2);
    let g = 1f64.min(c_energy * (lambda / (theta + 1.0)).powf(bp2));

    let active = p.reaction.kind == ReactionKind::PowerLaw;
    let (s, m_l, f_exponent, sup_f_prime) = if active {
        let (lo, hi) = p.s_window();
        if !(lo < hi) {
            return Err(ParamsError::NoAdmissibleS { lower: lo, upper: hi });
        }
        let s = p.reaction.s_exponent.unwrap_or(lo);
        if !(s >= lo && s < hi) {
            return Err(ParamsError::Invalid(vec![Violation::ReactionWindow {
                s,
                lower: lo,
                upper: hi,
            }]));
        }
        let t = reaction_transform(p, s, u_max).expect("power-law reaction");
        if !(t.sup_f_prime <= p.reaction.m0_bound) {
            return Err(ParamsError::Invalid(vec![Violation::ReactionDerivative {
                sup: t.sup_f_prime,
                m0: p.reaction.m0_bound,
            }]));
        }
        let gamma = gamma_for(p, s);
        let m_l = (theta + 1.0) * (p.poincare_cp * gamma * t.sup_f_prime).powf(s);
        (s, m_l, Some(t.exponent), Some(t.sup_f_prime))
    } else {
        (bp2, 0.0, None, None)
    };
    let gamma = gamma_for(p, s);
    let h_exp = s / ((1.0 + eps0) * bp2);
    let m_exp = s / (1.0 + eps0);

    let lambda_branch = 1.0 - big_lambda;
    let (q, t_pow_q) = if active {
        let s_branch = (bp2 - s) / bp2;
        let (a, b) = (t_horizon.powf(lambda_branch), t_horizon.powf(s_branch));
        if a >= b {
            (lambda_branch, a)
        } else {
            (s_branch, b)
        }
    } else {
        (lambda_branch, t_horizon.powf(lambda_branch))
    };

    let (theta_l, theta_l_no_reaction, b0, mu, sup_norm_bound) = if eps0 > 0.0 {
        let ab = alpha + beta;
        let ln_2pow = -bp2 / (eps0 * eps0) * LN_2;
        let theta_l = (ln_2pow + ((g / (c_l + m_l)).ln() - t_pow_q.ln()) / eps0).exp();
        let theta_l_nr = (ln_2pow + (g / c_l).ln() / eps0
            - (theta + 1.0) / ab * t_horizon.ln())
        .exp();
        let core = c_l.powf(-1.0 / eps0) * g.powf(1.0 + 1.0 / eps0);
        let b0 = core / (d[0] * p.omega0_measure());
        let mu = (ab + n_dim * bp2 * (theta + 1.0)).powi(2)
            / (bp2 * n_dim * n_dim * ab * ab * (ab + theta + 1.0));
        let bound = 2f64.powf(-mu)
            * (core / (d[0] * p.domain_measure())).powf(1.0 / (ab + theta + 1.0))
            * t_horizon.powf(-1.0 / ab);
        (Some(theta_l), Some(theta_l_nr), Some(b0), Some(mu), Some(bound))
    } else {
        (None, None, None, None, None)
    };

    Ok(DerivedConstants {
        lambda,
        big_lambda,
        eps0,
        c_energy,
        d,
        c_l,
        b_l,
        m_l,
        g,
        q,
        t_pow_q,
        t_horizon,
        s,
        gamma,
        h_exp,
        m_exp,
        f_exponent,
        sup_f_prime,
        theta_l,
        theta_l_no_reaction,
        b0,
        mu,
        sup_norm_bound,
    })
}

impl DerivedConstants {
    /// Flat `(name, value)` rows; `D_n` expands to `D_0, D_1, ...`.
    /// Undefined constants are reported as `nan`.
    pub fn rows(&self) -> Vec<(String, f64)> {
        let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
        let mut rows = vec![
            ("lambda".to_string(), self.lambda),
            ("Lambda".to_string(), self.big_lambda),
            ("eps0".to_string(), self.eps0),
            ("C".to_string(), self.c_energy),
        ];
        rows.extend(self.d.iter().enumerate().map(|(n, v)| (format!("D_{n}"), *v)));
        rows.extend([
            ("C_L".to_string(), self.c_l),
            ("b_L".to_string(), self.b_l),
            ("M_L".to_string(), self.m_l),
            ("G".to_string(), self.g),
            ("q".to_string(), self.q),
            ("t_pow_q".to_string(), self.t_pow_q),
            ("t_horizon".to_string(), self.t_horizon),
            ("s".to_string(), self.s),
            ("gamma".to_string(), self.gamma),
            ("H".to_string(), self.h_exp),
            ("m".to_string(), self.m_exp),
            ("F_exponent".to_string(), opt(self.f_exponent)),
            ("sup_F_prime".to_string(), opt(self.sup_f_prime)),
            ("theta_L".to_string(), opt(self.theta_l)),
            ("theta_L_no_reaction".to_string(), opt(self.theta_l_no_reaction)),
            ("B0".to_string(), opt(self.b0)),
            ("mu".to_string(), opt(self.mu)),
            ("sup_norm_bound".to_string(), opt(self.sup_norm_bound)),
        ]);
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(alpha: f64, beta: f64, theta: f64) -> ModelParams {
        ModelParams {
            alpha,
            beta,
            theta,
            k1: 0.0,
            k2: 1.0,
            c1: 0.0,
            p: 2.0,
            ..ModelParams::default()
        }
    }

    fn has_p_violation(v: &ValidationResult) -> bool {
        v.violations
            .iter()
            .any(|x| matches!(x, Violation::PBounds { .. }))
    }

    #[test]
    fn p_window_accepts_alpha_six() {
        let p = base(6.0, 0.0, 1.0);
        assert_eq!(p.p_upper(), 7.0);
        let v = validate_params(&p);
        assert!(v.is_ok(), "{v}");
    }

    #[test]
    fn p_window_rejects_alpha_one_theta_one() {
        let p = base(1.0, 0.0, 1.0);
        let v = validate_params(&p);
        assert!(has_p_violation(&v));
        let text = v.to_string();
        assert!(text.contains("p < 2"), "{text}");
    }

    #[test]
    fn radius_order_violation() {
        let mut p = base(1.0, 0.0, 1.0);
        p.r0 = 1.0;
        p.r = 1.5;
        let v = validate_params(&p);
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::RadiusOrder { .. })));
        assert!(v.to_string().contains("r <= 2R0"));
        // certificate-only conditions do not block a simulation
        assert!(v.simulation_ok());
    }

    #[test]
    fn hand_evaluated_constants() {
        let p = base(1.0, 0.0, 1.0);
        let c = derive_constants(&p, 4, 1.0).unwrap();
        assert!((c.big_lambda - 0.2).abs() < 1e-15);
        assert!((c.eps0 - 0.4).abs() < 1e-15);
        assert!((c.lambda - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.b_l, 4.0);
        let mu = c.mu.unwrap();
        assert!((mu - 25.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn energy_coefficient_alpha_six() {
        let p = base(6.0, 0.0, 1.0);
        let c = derive_constants(&p, 0, 1.0).unwrap();
        assert!((c.c_energy - 14.0).abs() < 1e-12);
    }

    #[test]
    fn non_degenerate_eps0_vanishes() {
        let p = base(0.0, 0.0, 3.0);
        let c = derive_constants(&p, 3, 1.0).unwrap();
        assert_eq!(c.eps0, 0.0);
        assert_eq!(c.big_lambda, 0.0);
        assert!(c.theta_l.is_none());
        assert!(c.mu.is_none());
    }

    #[test]
    fn neutral_reaction_fields() {
        let p = base(1.0, 1.0, 6.0);
        let c = derive_constants(&p, 2, 3.0).unwrap();
        assert_eq!(c.m_l, 0.0);
        assert_eq!(c.s, 3.0);
        assert_eq!(c.q, 1.0 - c.big_lambda);
        assert!((c.t_pow_q - 3f64.powf(1.0 - c.big_lambda)).abs() < 1e-14);
        // (1+eps0)(1-H) + s/(beta+2) = 1+eps0
        let lhs = (1.0 + c.eps0) * (1.0 - c.h_exp) + c.s / 3.0;
        assert!((lhs - (1.0 + c.eps0)).abs() < 1e-14);
    }

    #[test]
    fn reaction_value_examples() {
        assert_eq!(reaction_value(&ReactionSpec::none(), 5.0), 0.0);
        assert_eq!(reaction_value(&ReactionSpec::power_law(1.0, 2.0), 0.0), 0.0);
        assert_eq!(reaction_value(&ReactionSpec::power_law(2.0, 2.0), 3.0), 18.0);
    }

    #[test]
    fn reaction_in_one_dimension_has_empty_window() {
        let mut p = base(1.0, 0.0, 2.0);
        p.reaction = ReactionSpec::power_law(1.0, 2.0);
        let (lo, hi) = p.s_window();
        assert!(lo >= hi);
        assert!(matches!(
            derive_constants(&p, 2, 1.0),
            Err(ParamsError::NoAdmissibleS { .. })
        ));
    }

    #[test]
    fn reaction_in_two_dimensions() {
        // beta = 1 opens a nonempty window in 2D
        let mut p = base(1.0, 1.0, 8.0);
        p.dim = 2;
        p.p = 3.0;
        p.reaction = ReactionSpec::power_law(0.5, 12.0);
        p.reaction.m0_bound = 10.0;
        let (lo, hi) = p.s_window();
        assert!(lo < hi, "window [{lo}, {hi})");
        let c = derive_constants(&p, 3, 0.5).unwrap();
        assert!(c.m_l > 0.0);
        assert!(c.f_exponent.unwrap() >= 1.0);
        // exponent of the winning branch gives t^q
        assert!((0.5f64.powf(c.q) - c.t_pow_q).abs() < 1e-15);
        assert!(c.t_pow_q >= 0.5f64.powf(1.0 - c.big_lambda));
    }

    #[test]
    fn cutoff_slope_constant_below_four_is_rejected() {
        let mut p = base(6.0, 0.0, 1.0);
        p.c_cut = 1.0;
        let v = validate_params(&p);
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::CutoffSlope { .. })));
    }

    #[test]
    fn rows_expand_d_sequence() {
        let p = base(1.0, 0.0, 2.0);
        let c = derive_constants(&p, 3, 1.0).unwrap();
        let rows = c.rows();
        assert!(rows.iter().any(|(n, _)| n == "D_3"));
        assert!(!rows.iter().any(|(n, _)| n == "D_4"));
    }
}
