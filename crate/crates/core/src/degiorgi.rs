//! Localization certificate.
//!
//! With `z = u^((theta+alpha+beta+1)/(beta+2))` and `lambda` from the derived
//! constants, the energy functionals are
//!
//! ```text
//! I_n(t) = sup_{tau <= t} int_{Omega_{n+1}} z^lambda
//!        + int_0^t int_{Omega_{n+1}} |grad z|^(beta+2)
//! ```
//!
//! on the nested exteriors `Omega_n = {|x| >= r_n}`. The recursion
//! `I_n <= c t^q b_L^(n-1) I_{n-1}^(1+eps0)` is checked against the observed
//! sequence, both with the configured constants and with a fitted `c`.

use serde::Serialize;

use crate::error::CertificateError;
use crate::field::{
    support_radius, DeGiorgiGeometry, Grid, ScalarField, SUPPORT_THRESHOLD,
};
use crate::params::{derive_constants, DerivedConstants, ModelParams};
use crate::solver::{pow, StepObserver, Trajectory};

/// Required decay `I_{n_max} <= DECAY_RATIO * I_0` for a positive verdict.
pub const DECAY_RATIO: f64 = 1e-3;
/// Snapshot spacing must not exceed `T / CADENCE_DIVISOR`.
pub const CADENCE_DIVISOR: f64 = 200.0;

/// `z = u^((theta+alpha+beta+1)/(beta+2))`; negative values are treated as 0.
pub fn z_transform(u: &ScalarField, params: &ModelParams) -> ScalarField {
    let e = params.z_exponent();
    u.map(|v| pow(v.max(0.0), e))
}

/// `int_{Omega_{n+1}} z^lambda` for every `n = 0..=n_max`.
fn level_integrals(u: &ScalarField, geom: &DeGiorgiGeometry, params: &ModelParams) -> Vec<f64> {
    // z^lambda = u^(theta+1)
    let e = params.theta + 1.0;
    let grid = u.grid();
    let mut per_level = vec![0.0; geom.n_max + 2];
    for (k, v) in u.values().iter().enumerate() {
        if *v <= 0.0 {
            continue;
        }
        if let Some(l) = geom.level(grid.radius(k)) {
            per_level[l] += pow(*v, e);
        }
    }
    suffix_sums(&per_level, grid.cell_volume())
}

/// `out[n] = cell * sum_{l >= n+1} per_level[l]` for `n = 0..=n_max`.
fn suffix_sums(per_level: &[f64], cell: f64) -> Vec<f64> {
    let n_max = per_level.len() - 2;
    let mut out = vec![0.0; n_max + 1];
    let mut acc = 0.0;
    for n in (0..=n_max).rev() {
        acc += per_level[n + 1];
        out[n] = acc * cell;
    }
    out
}

/// Gradient energy density `|grad z|^(beta+2)` restricted to `Omega_1`,
/// evaluated with the same stencils as [`crate::field::gradient`].
struct GradientProbe {
    /// `(node, level)` for nodes with `|x| >= r_1`.
    nodes: Vec<(usize, usize)>,
    z_exp: f64,
    power: f64,
    n_max: usize,
}

impl GradientProbe {
    fn new(grid: &Grid, geom: &DeGiorgiGeometry, params: &ModelParams) -> Self {
        let nodes = (0..grid.len())
            .filter_map(|k| match geom.level(grid.radius(k)) {
                Some(l) if l >= 1 => Some((k, l)),
                _ => None,
            })
            .collect();
        Self {
            nodes,
            z_exp: params.z_exponent(),
            power: params.beta + 2.0,
            n_max: geom.n_max,
        }
    }

    /// `int_{Omega_{n+1}} |grad z|^(beta+2)` for every `n`.
    fn integrals(&self, u: &ScalarField) -> Vec<f64> {
        let grid = u.grid();
        let v = u.values();
        let z = |k: usize| pow(v[k].max(0.0), self.z_exp);
        let h = grid.h();
        let [nx, ny] = grid.shape();
        let mut per_level = vec![0.0; self.n_max + 2];
        for &(k, l) in &self.nodes {
            let (i, j) = grid.ij(k);
            let mut g2 = 0.0;
            for axis in 0..grid.dim() {
                let (pos, n_axis, stride) = if axis == 0 { (i, nx, 1) } else { (j, ny, nx) };
                let d = if pos == 0 {
                    (-3.0 * z(k) + 4.0 * z(k + stride) - z(k + 2 * stride)) / (2.0 * h)
                } else if pos + 1 == n_axis {
                    (3.0 * z(k) - 4.0 * z(k - stride) + z(k - 2 * stride)) / (2.0 * h)
                } else {
                    (z(k + stride) - z(k - stride)) / (2.0 * h)
                };
                g2 += d * d;
            }
            if g2 > 0.0 {
                per_level[l] += pow(g2.sqrt(), self.power);
            }
        }
        suffix_sums(&per_level, grid.cell_volume())
    }
}

/// How the time integral in `I_n` was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeQuadrature {
    /// Left-endpoint rule over the solver's own steps.
    SolverSteps,
    /// Left-endpoint rule over snapshot intervals (lower fidelity).
    Snapshots,
}

/// Step observer accumulating `int_0^t int_{Omega_{n+1}} |grad z|^(beta+2)`
/// over the solver steps up to `until`.
pub struct EnergyLog {
    probe: Option<GradientProbe>,
    geom: DeGiorgiGeometry,
    params: ModelParams,
    until: f64,
    covered: f64,
    totals: Vec<f64>,
}

impl EnergyLog {
    pub fn new(geom: DeGiorgiGeometry, params: &ModelParams, until: f64) -> Self {
        Self {
            probe: None,
            geom,
            params: params.clone(),
            until,
            covered: 0.0,
            totals: vec![0.0; geom.n_max + 1],
        }
    }

    /// Time span integrated so far.
    pub fn covered(&self) -> f64 {
        self.covered
    }

    pub fn until(&self) -> f64 {
        self.until
    }

    /// Accumulated gradient integrals, one per `n`.
    pub fn totals(&self) -> &[f64] {
        &self.totals
    }
}

impl StepObserver for EnergyLog {
    fn observe(&mut self, t: f64, dt: f64, u: &ScalarField) {
        if t >= self.until {
            return;
        }
        let width = dt.min(self.until - t);
        let probe = self
            .probe
            .get_or_insert_with(|| GradientProbe::new(u.grid(), &self.geom, &self.params));
        for (acc, g) in self.totals.iter_mut().zip(probe.integrals(u)) {
            *acc += width * g;
        }
        self.covered += width;
    }
}

fn check_horizon(traj: &Trajectory, t: f64) -> Result<(), CertificateError> {
    let end = traj.final_time();
    if end < t * (1.0 - 1e-12) {
        return Err(CertificateError::Horizon { requested: t, end });
    }
    Ok(())
}

/// Sup over snapshot times `0 < tau <= t` of `int_{Omega_{n+1}} z^lambda`.
fn sup_terms(traj: &Trajectory, geom: &DeGiorgiGeometry, params: &ModelParams, t: f64) -> Vec<f64> {
    let mut sup = vec![0.0; geom.n_max + 1];
    for s in traj.snapshots.iter().filter(|s| s.time <= t * (1.0 + 1e-12)) {
        for (a, b) in sup.iter_mut().zip(level_integrals(&s.field, geom, params)) {
            *a = f64::max(*a, b);
        }
    }
    sup
}

/// Gradient time integral by the left-endpoint rule over snapshot intervals.
fn snapshot_gradient_terms(
    traj: &Trajectory,
    geom: &DeGiorgiGeometry,
    params: &ModelParams,
    t: f64,
) -> Vec<f64> {
    let probe = GradientProbe::new(traj.initial.grid(), geom, params);
    let mut total = vec![0.0; geom.n_max + 1];
    let mut left = (0.0, &traj.initial);
    for s in &traj.snapshots {
        let right = s.time.min(t);
        if right > left.0 {
            for (a, g) in total.iter_mut().zip(probe.integrals(left.1)) {
                *a += (right - left.0) * g;
            }
        }
        if s.time >= t {
            break;
        }
        left = (s.time, &s.field);
    }
    total
}

/// `I_n(t)` with the time integral over snapshot intervals.
pub fn functional_in(
    traj: &Trajectory,
    geom: &DeGiorgiGeometry,
    params: &ModelParams,
    n: usize,
    t: f64,
) -> Result<f64, CertificateError> {
    if n > geom.n_max {
        return Err(CertificateError::Index { n, n_max: geom.n_max });
    }
    Ok(functionals(traj, None, geom, params, t)?.0[n])
}

/// `I_0..=I_{n_max}` at `t`. The gradient term comes from `log` when given
/// (solver-step quadrature) and from the snapshots otherwise.
pub fn functionals(
    traj: &Trajectory,
    log: Option<&EnergyLog>,
    geom: &DeGiorgiGeometry,
    params: &ModelParams,
    t: f64,
) -> Result<(Vec<f64>, TimeQuadrature), CertificateError> {
    check_horizon(traj, t)?;
    let sup = sup_terms(traj, geom, params, t);
    let (grad, mode) = match log {
        Some(log) => {
            if log.totals.len() != geom.n_max + 1 {
                return Err(CertificateError::Invalid("energy log geometry differs".into()));
            }
            if (log.until - t).abs() > 1e-12 * t.max(1.0) || log.covered < t * (1.0 - 1e-9) {
                return Err(CertificateError::Invalid(format!(
                    "energy log covers [0, {}] but the horizon is {t}",
                    log.covered
                )));
            }
            (log.totals.clone(), TimeQuadrature::SolverSteps)
        }
        None => (snapshot_gradient_terms(traj, geom, params, t), TimeQuadrature::Snapshots),
    };
    Ok((sup.iter().zip(&grad).map(|(a, b)| a + b).collect(), mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    LocalizedObserved,
    NotLocalized,
    Inconclusive,
}

impl Verdict {
    /// Process exit status of the certificate command.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::LocalizedObserved => 0,
            Verdict::NotLocalized => 2,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::LocalizedObserved => "LocalizedObserved",
            Verdict::NotLocalized => "NotLocalized",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

/// One line of the recursion table. Row 0 carries the smallness threshold
/// on `I_0` as its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionRow {
    pub n: usize,
    pub i_n: f64,
    /// Right-hand side with the configured constants.
    pub bound: f64,
    /// `i_n / bound`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSide {
    pub i0: f64,
    /// Smallness bound on `I_0(T)` with the configured `c_G`, `c_p`.
    pub configured: Option<f64>,
    /// The same bound with `(C_L + M_L)/G` replaced by the fitted constant.
    pub fitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeGiorgiReport {
    pub horizon: f64,
    pub geometry: DeGiorgiGeometry,
    pub constants: Option<DerivedConstants>,
    pub quadrature: TimeQuadrature,
    pub i_seq: Vec<f64>,
    pub rows: Vec<RecursionRow>,
    /// `(C_L + M_L) / G`.
    pub configured_constant: Option<f64>,
    /// Smallest `c` with `I_n <= c T^q b_L^(n-1) I_{n-1}^(1+eps0)` for all `n`.
    pub recursion_fit: Option<f64>,
    pub threshold: ThresholdSide,
    pub strictly_decreasing: bool,
    pub support_radii: Vec<(f64, f64)>,
    pub support_at_horizon: f64,
    pub verdict: Verdict,
    pub reason: String,
}

/// Largest gap between consecutive recorded times in `[0, t]`.
fn max_spacing(traj: &Trajectory, t: f64) -> f64 {
    let mut prev = 0.0;
    let mut gap: f64 = 0.0;
    for s in traj.snapshots.iter().take_while(|s| s.time <= t * (1.0 + 1e-12)) {
        gap = gap.max(s.time - prev);
        prev = s.time;
    }
    gap.max(t - prev)
}

/// Evaluate the certificate at horizon `t`.
pub fn verify_recursion(
    traj: &Trajectory,
    log: Option<&EnergyLog>,
    geom: &DeGiorgiGeometry,
    params: &ModelParams,
    t: f64,
) -> Result<DeGiorgiReport, CertificateError> {
    check_horizon(traj, t)?;
    let limit = t / CADENCE_DIVISOR;
    let spacing = max_spacing(traj, t);
    if spacing > limit * (1.0 + 1e-9) {
        return Err(CertificateError::Cadence { spacing, limit });
    }
    let (i_seq, quadrature) = functionals(traj, log, geom, params, t)?;
    let support_radii: Vec<(f64, f64)> = traj
        .support_radii(SUPPORT_THRESHOLD)
        .into_iter()
        .filter(|(s, _)| *s <= t * (1.0 + 1e-12))
        .collect();
    let final_field = traj
        .snapshots
        .iter()
        .take_while(|s| s.time <= t * (1.0 + 1e-12))
        .last()
        .map_or(&traj.initial, |s| &s.field);
    let support_at_horizon = support_radius(final_field, SUPPORT_THRESHOLD);
    let strictly_decreasing = i_seq.windows(2).all(|w| w[1] < w[0]);
    let i0 = i_seq[0];

    let mut report = DeGiorgiReport {
        horizon: t,
        geometry: *geom,
        constants: None,
        quadrature,
        rows: i_seq
            .iter()
            .enumerate()
            .map(|(n, &i_n)| RecursionRow { n, i_n, bound: f64::NAN, ratio: f64::NAN })
            .collect(),
        i_seq,
        configured_constant: None,
        recursion_fit: None,
        threshold: ThresholdSide { i0, configured: None, fitted: None },
        strictly_decreasing,
        support_radii,
        support_at_horizon,
        verdict: Verdict::Inconclusive,
        reason: String::new(),
    };

    if params.eps0() == 0.0 {
        report.reason = "infinite speed of propagation regime (eps0 = 0)".into();
        return Ok(report);
    }
    let constants = derive_constants(params, geom.n_max, t)?;
    let eps0 = constants.eps0;
    let configured = (constants.c_l + constants.m_l) / constants.g;
    let ln_tq = constants.t_pow_q.ln();
    let ln_b = constants.b_l.ln();

    // ln of T^q b_L^(n-1) I_{n-1}^(1+eps0); logs keep tiny I_n representable
    let ln_rhs = |n: usize, prev: f64| ln_tq + (n as f64 - 1.0) * ln_b + (1.0 + eps0) * prev.ln();
    let mut fit: Option<f64> = None;
    for n in 1..report.rows.len() {
        let (prev, cur) = (report.i_seq[n - 1], report.i_seq[n]);
        let bound = (configured.ln() + ln_rhs(n, prev)).exp();
        report.rows[n].bound = bound;
        report.rows[n].ratio = if cur == 0.0 { 0.0 } else { (cur.ln() - configured.ln() - ln_rhs(n, prev)).exp() };
        if cur > 0.0 {
            // prev >= cur > 0 on nested domains
            let c_n = (cur.ln() - ln_rhs(n, prev)).exp();
            fit = Some(fit.map_or(c_n, |f| f.max(c_n)));
        }
    }
    let fit = fit.unwrap_or(0.0);
    report.rows[0].bound = constants.theta_l.unwrap_or(f64::NAN);
    report.rows[0].ratio = if i0 == 0.0 { 0.0 } else { i0 / report.rows[0].bound };
    report.configured_constant = Some(configured);
    report.recursion_fit = Some(fit);
    report.threshold.configured = constants.theta_l;
    report.threshold.fitted = (fit > 0.0).then(|| {
        (-(fit.ln() + ln_tq) / eps0 - ln_b / (eps0 * eps0)).exp()
    });
    report.constants = Some(constants);

    let last = *report.i_seq.last().expect("n_max + 1 entries");
    let decayed = last <= DECAY_RATIO * i0;
    let contained = support_at_horizon < 2.0 * geom.r;
    report.verdict = if decayed && contained {
        Verdict::LocalizedObserved
    } else {
        Verdict::NotLocalized
    };
    report.reason = match (decayed, contained) {
        (true, true) if i0 == 0.0 => "all functionals vanish".into(),
        (true, true) => format!("I_{} / I_0 = {:.3e}, support {support_at_horizon:.4} < 2r", geom.n_max, last / i0),
        (false, _) => format!("I_{} / I_0 = {:.3e} exceeds {DECAY_RATIO:e}", geom.n_max, last / i0),
        (true, false) => format!("support {support_at_horizon:.4} reaches 2r = {}", 2.0 * geom.r),
    };
    Ok(report)
}

/// Result of [`ladyzhenskaya_iterate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadyzhenskayaRun {
    /// `y_0, y_1, ...` of the equality recursion `y_{n+1} = c b^n y_n^(1+eps)`.
    pub sequence: Vec<f64>,
    /// Closed-form bound for each computed term.
    pub bounds: Vec<f64>,
    /// `theta_L = c^(-1/eps) b^(-1/eps^2)`.
    pub threshold: f64,
    /// Iteration stopped because the next term overflowed.
    pub overflowed: bool,
    /// Iteration stopped because the next term left the normal range.
    pub underflowed: bool,
}

/// Iterate the equality case of the recursion for up to `n` steps.
pub fn ladyzhenskaya_iterate(
    y0: f64,
    c: f64,
    b: f64,
    eps: f64,
    n: usize,
) -> Result<LadyzhenskayaRun, CertificateError> {
    if !(y0 >= 0.0 && y0.is_finite() && c > 0.0 && c.is_finite() && b >= 1.0 && b.is_finite() && eps > 0.0 && eps.is_finite()) {
        return Err(CertificateError::Invalid(format!(
            "need y0 >= 0, c > 0, b >= 1, eps > 0; got y0 = {y0}, c = {c}, b = {b}, eps = {eps}"
        )));
    }
    let ln_theta = -c.ln() / eps - b.ln() / (eps * eps);
    // c^((g-1)/eps) b^((g-1)/eps^2 - k/eps) y0^g rearranged as
    // theta_L b^(-k/eps) (y0/theta_L)^g; the direct form cancels terms of size g
    let bound = |k: usize| {
        if y0 == 0.0 {
            return 0.0;
        }
        let g = (1.0 + eps).powi(k as i32);
        (ln_theta - k as f64 / eps * b.ln() + g * (y0.ln() - ln_theta)).exp()
    };
    let mut run = LadyzhenskayaRun {
        sequence: vec![y0],
        bounds: vec![bound(0)],
        threshold: ln_theta.exp(),
        overflowed: false,
        underflowed: false,
    };
    let mut y = y0;
    for k in 0..n {
        let pow = y.powf(1.0 + eps);
        let next = if pow.is_normal() || y == 0.0 {
            c * b.powi(k as i32) * pow
        } else {
            // y^(1+eps) alone left the normal range; its product may not have
            (c.ln() + k as f64 * b.ln() + (1.0 + eps) * y.ln()).exp()
        };
        if !next.is_finite() {
            run.overflowed = true;
            break;
        }
        if next != 0.0 && !next.is_normal() {
            run.underflowed = true;
            break;
        }
        y = next;
        run.sequence.push(y);
        run.bounds.push(bound(k + 1));
    }
    Ok(run)
}

/// Outcome of [`threshold_check_no_reaction`]. Bounds are `None` when
/// `eps0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub b0: Option<f64>,
    pub mu: Option<f64>,
    /// Admissible `||u_0||_inf`.
    pub sup_norm_bound: Option<f64>,
    pub observed_sup_norm: f64,
    /// Bound on `I_0(T)` in terms of `C_L` only.
    pub i0_bound: Option<f64>,
    pub observed_i0: f64,
    pub sup_norm_ok: bool,
    pub i0_ok: bool,
    /// Both sufficient conditions hold.
    pub pass: bool,
}

/// Initial-data smallness test for `A = 0`. One-sided: failing it does not
/// imply spreading.
pub fn threshold_check_no_reaction(
    traj: &Trajectory,
    geom: &DeGiorgiGeometry,
    params: &ModelParams,
    t: f64,
) -> Result<ThresholdCheck, CertificateError> {
    if params.reaction.is_active() {
        return Err(CertificateError::ReactionActive);
    }
    let observed_i0 = functionals(traj, None, geom, params, t)?.0[0];
    let observed_sup_norm = traj.initial.max().max(0.0);
    let (b0, mu, sup_norm_bound, i0_bound) = if params.eps0() > 0.0 {
        let c = derive_constants(params, geom.n_max, t)?;
        (c.b0, c.mu, c.sup_norm_bound, c.theta_l_no_reaction)
    } else {
        (None, None, None, None)
    };
    let sup_norm_ok = sup_norm_bound.is_some_and(|b| observed_sup_norm <= b);
    let i0_ok = i0_bound.is_some_and(|b| observed_i0 <= b);
    Ok(ThresholdCheck {
        b0,
        mu,
        sup_norm_bound,
        observed_sup_norm,
        i0_bound,
        observed_i0,
        sup_norm_ok,
        i0_ok,
        pass: sup_norm_ok && i0_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_observed, DtStats, Snapshot, SolverConfig};
    use proptest::prelude::*;

    fn static_trajectory(u: ScalarField, times: &[f64]) -> Trajectory {
        Trajectory {
            initial: u.clone(),
            snapshots: times
                .iter()
                .map(|&time| Snapshot { time, field: u.clone() })
                .collect(),
            step_count: 0,
            dt_stats: DtStats::default(),
            mass_history: Vec::new(),
            halted_at: None,
        }
    }

    fn cadence(t: f64) -> Vec<f64> {
        (1..=200).map(|k| t * k as f64 / 200.0).collect()
    }

    fn params_1d(alpha: f64, beta: f64, theta: f64) -> ModelParams {
        ModelParams { alpha, beta, theta, ..ModelParams::default() }
    }

    #[test]
    fn z_examples() {
        let grid = Grid::centered_box(1, 1.0, 0.5).unwrap();
        let p = params_1d(1.0, 0.0, 1.0);
        assert!(z_transform(&ScalarField::zeros(grid.clone()), &p).values().iter().all(|v| *v == 0.0));
        let ones = ScalarField::from_fn(grid.clone(), |_| 1.0);
        assert!(z_transform(&ones, &p).values().iter().all(|v| *v == 1.0));
        let fours = ScalarField::from_fn(grid, |_| 4.0);
        assert!(z_transform(&fours, &p).values().iter().all(|v| (*v - 8.0).abs() < 1e-12));
    }

    #[test]
    fn zero_trajectory_vanishes() {
        let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
        let traj = static_trajectory(ScalarField::zeros(grid), &cadence(1.0));
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 8);
        let p = params_1d(1.0, 0.0, 2.0);
        for n in 0..=8 {
            assert_eq!(functional_in(&traj, &geom, &p, n, 1.0).unwrap(), 0.0);
        }
        let report = verify_recursion(&traj, None, &geom, &p, 1.0).unwrap();
        assert_eq!(report.verdict, Verdict::LocalizedObserved);
        assert_eq!(report.recursion_fit, Some(0.0));
    }

    #[test]
    fn disjoint_support_vanishes() {
        let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
        let u = ScalarField::from_fn(grid, |x| (1.0 - x[0] * x[0]).max(0.0));
        let traj = static_trajectory(u, &cadence(1.0));
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 8);
        let p = params_1d(1.0, 0.0, 2.0);
        assert_eq!(functional_in(&traj, &geom, &p, 0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_annulus_integrates_to_its_measure() {
        // z = 1 on 25 nodes per side flush with the walls: measure 0.5
        let h = 0.01;
        let grid = Grid::centered_box(1, 6.0, h).unwrap();
        let u = ScalarField::from_fn(grid, |x| if x[0].abs() > 6.0 - 0.245 { 1.0 } else { 0.0 });
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 3);
        let p = params_1d(1.0, 0.0, 2.0);
        let sup = level_integrals(&u, &geom, &p);
        assert!((sup[2] - 0.5).abs() < 1e-12, "{}", sup[2]);
        // the gradient term is linear in t for a static field
        let t = 0.01;
        let a = functional_in(&static_trajectory(u.clone(), &cadence(t)), &geom, &p, 2, t).unwrap();
        let b = functional_in(&static_trajectory(u, &cadence(2.0 * t)), &geom, &p, 2, 2.0 * t).unwrap();
        assert!((2.0 * a - b - 0.5).abs() < 1e-9);
    }

    #[test]
    fn horizon_and_cadence_are_enforced() {
        let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
        let traj = static_trajectory(ScalarField::zeros(grid), &[0.5, 1.0]);
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 8);
        let p = params_1d(1.0, 0.0, 2.0);
        assert!(matches!(
            functional_in(&traj, &geom, &p, 0, 2.0),
            Err(CertificateError::Horizon { .. })
        ));
        assert!(matches!(
            verify_recursion(&traj, None, &geom, &p, 1.0),
            Err(CertificateError::Cadence { .. })
        ));
        assert!(matches!(functional_in(&traj, &geom, &p, 9, 1.0), Err(CertificateError::Index { .. })));
    }

    #[test]
    fn heat_regime_is_inconclusive() {
        let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
        let u = ScalarField::from_fn(grid, |x| (1.0 - x[0] * x[0]).max(0.0));
        let traj = static_trajectory(u, &cadence(1.0));
        let report =
            verify_recursion(&traj, None, &DeGiorgiGeometry::new(1.0, 2.5, 8), &params_1d(0.0, 0.0, 2.0), 1.0)
                .unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
        assert!(report.reason.contains("infinite speed"));
        assert_eq!(report.verdict.exit_code(), 3);
    }

    #[test]
    fn energy_log_matches_snapshot_quadrature() {
        let grid = Grid::centered_box(1, 6.0, 0.05).unwrap();
        let p = ModelParams { epsilon_reg: 1e-2, ..params_1d(1.0, 0.0, 2.0) };
        let u0 = ScalarField::from_fn(grid, |x| (1.0 - x[0] * x[0]).max(0.0));
        let t = 0.5;
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 4);
        let mut config = SolverConfig::new(p.clone(), t);
        config.snapshot_times = (1..=2000).map(|k| t * k as f64 / 2000.0).collect();
        let mut log = EnergyLog::new(geom, &p, t);
        let traj = solve_observed(&u0, &config, &mut log).unwrap();
        assert!((log.covered() - t).abs() < 1e-9);
        let (fine, mode) = functionals(&traj, Some(&log), &geom, &p, t).unwrap();
        assert_eq!(mode, TimeQuadrature::SolverSteps);
        let (coarse, _) = functionals(&traj, None, &geom, &p, t).unwrap();
        assert!(fine[0] > 0.0);
        for (a, b) in fine.iter().zip(&coarse) {
            assert!((a - b).abs() <= 0.02 * a.max(*b), "{a} {b}");
        }
    }

    #[test]
    fn ladyzhenskaya_examples() {
        let run = ladyzhenskaya_iterate(0.3, 1.0, 1.0, 0.5, 6).unwrap();
        for (k, (y, b)) in run.sequence.iter().zip(&run.bounds).enumerate() {
            let exact = 0.3f64.powf(1.5f64.powi(k as i32));
            assert!((y - exact).abs() <= 1e-12 * exact);
            assert!((b - exact).abs() <= 1e-12 * exact);
        }
        let run = ladyzhenskaya_iterate(0.1, 2.0, 4.0, 1.0, 3).unwrap();
        assert!((run.threshold - 0.125).abs() < 1e-15);
        let run = ladyzhenskaya_iterate(0.125, 2.0, 4.0, 1.0, 10).unwrap();
        for (k, y) in run.sequence.iter().enumerate() {
            assert!(*y <= 0.125 * 4f64.powf(-(k as f64)) * (1.0 + 1e-12));
        }
        assert!(ladyzhenskaya_iterate(-1.0, 1.0, 1.0, 1.0, 3).is_err());
        assert!(ladyzhenskaya_iterate(1.0, 1.0, 0.5, 1.0, 3).is_err());
    }

    #[test]
    fn ladyzhenskaya_last_normal_term_is_accurate() {
        // y^(1+eps) is subnormal at the last step while the next term is not
        let (c, b, eps): (f64, f64, f64) = (6.884478415160486, 5.7744266874212595, 0.10476444102630289);
        let theta = (-c.ln() / eps - b.ln() / (eps * eps)).exp();
        let run = ladyzhenskaya_iterate(0.18571006652463384 * theta, c, b, eps, 200).unwrap();
        assert!(run.sequence.len() > 20);
        for (y, bound) in run.sequence.iter().zip(&run.bounds) {
            assert!((y / bound - 1.0).abs() <= 1e-9, "{y} {bound}");
        }
    }

    #[test]
    fn ladyzhenskaya_flags_overflow() {
        let run = ladyzhenskaya_iterate(10.0, 10.0, 8.0, 2.0, 20).unwrap();
        assert!(run.overflowed);
        assert!(run.sequence.iter().all(|y| y.is_finite()));
    }

    #[test]
    fn threshold_check_examples() {
        let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
        let traj = static_trajectory(ScalarField::zeros(grid), &cadence(1.0));
        let geom = DeGiorgiGeometry::new(1.0, 2.5, 8);
        let p = params_1d(1.0, 0.0, 1.0);
        let check = threshold_check_no_reaction(&traj, &geom, &p, 1.0).unwrap();
        assert!(check.pass);
        assert!((check.mu.unwrap() - 25.0 / 6.0).abs() < 1e-12);
        let reacting = ModelParams {
            reaction: crate::params::ReactionSpec::power_law(1.0, 2.0),
            ..p
        };
        assert!(matches!(
            threshold_check_no_reaction(&traj, &geom, &reacting, 1.0),
            Err(CertificateError::ReactionActive)
        ));
    }

    #[test]
    fn large_initial_i0_fails_one_sided_test() {
        let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
        let u = ScalarField::from_fn(grid, |_| 1e3);
        let traj = static_trajectory(u, &cadence(1.0));
        let check =
            threshold_check_no_reaction(&traj, &DeGiorgiGeometry::new(1.0, 2.5, 8), &params_1d(1.0, 0.0, 1.0), 1.0)
                .unwrap();
        assert!(!check.i0_ok);
        assert!(!check.pass);
    }

    proptest! {
        #[test]
        fn functionals_are_monotone_in_n(
            amps in prop::collection::vec(0.0f64..2.0, 8),
            alpha in 0.5f64..2.0,
            beta in 0.0f64..1.0,
        ) {
            let grid = Grid::centered_box(1, 6.0, 0.1).unwrap();
            let u = ScalarField::from_fn(grid, |x| {
                let k = ((x[0].abs() / 0.75) as usize).min(7);
                amps[k] * (1.0 + 0.1 * x[0].sin())
            });
            let traj = static_trajectory(u, &cadence(1.0));
            let p = params_1d(alpha, beta, 2.0);
            let i = functionals(&traj, None, &DeGiorgiGeometry::new(1.0, 2.5, 8), &p, 1.0).unwrap().0;
            for w in i.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }

        #[test]
        fn z_is_monotone(
            a in prop::collection::vec(0.0f64..10.0, 7),
            bump in prop::collection::vec(0.0f64..10.0, 7),
            alpha in 0.0f64..3.0,
            beta in 0.0f64..2.0,
            theta in 1.0f64..4.0,
        ) {
            let grid = Grid::line(7, 1.0, 0.0).unwrap();
            let u = ScalarField::from_values(grid.clone(), a.clone()).unwrap();
            let v = ScalarField::from_values(grid, a.iter().zip(&bump).map(|(x, y)| x + y).collect()).unwrap();
            let p = params_1d(alpha, beta, theta);
            let (zu, zv) = (z_transform(&u, &p), z_transform(&v, &p));
            for (x, y) in zu.values().iter().zip(zv.values()) {
                prop_assert!(x <= y);
            }
        }

        #[test]
        fn heat_regime_always_inconclusive(amp in 0.0f64..5.0, theta in 1.0f64..4.0) {
            let grid = Grid::centered_box(1, 6.0, 0.2).unwrap();
            let u = ScalarField::from_fn(grid, |x| amp * (1.0 - x[0] * x[0]).max(0.0));
            let traj = static_trajectory(u, &cadence(1.0));
            let r = verify_recursion(&traj, None, &DeGiorgiGeometry::new(1.0, 2.5, 8), &params_1d(0.0, 0.0, theta), 1.0).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Inconclusive);
        }

        #[test]
        fn ladyzhenskaya_bound_is_tight(
            c in 0.1f64..10.0,
            b in 1.0f64..8.0,
            eps in 0.1f64..2.0,
            frac in 0.0f64..1.0,
        ) {
            let theta = (-c.ln() / eps - b.ln() / (eps * eps)).exp();
            let y0 = frac * theta;
            let run = ladyzhenskaya_iterate(y0, c, b, eps, 12).unwrap();
            for (k, (y, bound)) in run.sequence.iter().zip(&run.bounds).enumerate() {
                prop_assert!((y - bound).abs() <= 1e-9 * bound.abs().max(f64::MIN_POSITIVE), "n {} {} {}", k, y, bound);
                if b > 1.0 {
                    prop_assert!(*y <= run.threshold * b.powf(-(k as f64) / eps) * (1.0 + 1e-9));
                }
            }
        }
    }
}
