//! Pluriclosed flow `∂ₜω = −ρ^{1,1}` on invariant metric states.
//!
//! The state is the four coefficient fields of [`MetricState`]; the right-hand
//! side is J-invariant and torus-invariant, so it decomposes in the same basis.
//! Time stepping is classical RK4 under a parabolic step bound.
//!
//! Each recorded row carries the conservation monitors of the Vaisman
//! analysis. Rates along the flow are evaluated from the flow vector itself
//! by differentiating the split map:
//!
//! ```text
//! ǔ̇ = u̇ − 2(p ṗ + q q̇)/λ + (p² + q²) λ̇/λ²
//! ∂ₜ(λ μ₁∧μ₂) = ω̇ − ǔ̇ e¹²
//! μ̇₁ = ȧ e¹ + ḃ e²,  a = q/λ, b = p/λ
//! σ̇₁ = (dμ̇₁)₁₂/ǔ − σ₁ ǔ̇/ǔ
//! ```
//!
//! Finite differences between consecutive rows are kept as cross-checks.
//! The angle relation obtained by contracting with `μ₂` and the combined
//! `λ″` relation are algebraic consequences of the monitored identities
//! (fiber part, `g(∂ₜμ₁, μ₁) = −½λ′λ⁻²`, `σ₁′ = σ₁ s`), so they are not
//! tracked separately.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error as GeometryError;
use crate::forms::{InvariantForm, E1, E12, E2};
use crate::geometry::{bismut_ricci_with_split, characteristic_numbers, metric_split, MetricSplit, MetricState, OrthonormalFrame};
use crate::grid::ScalarField;
use crate::vaisman::pluriclosed_defect;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error("step rejected at t = {t}: positivity margin {margin:e}")]
    StepRejected { t: f64, margin: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("dt = {dt:e} exceeds the parabolic bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("invalid flow configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("monitors need at least 3 trace rows, got {0}")]
    TooFewRows(usize),
}

pub type FlowResult<T> = std::result::Result<T, FlowError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowTolerances {
    /// Threshold on `Var(λ) + Var(σ₁) + Var(σ₂)` marking a Vaisman instant.
    pub vaisman: f64,
    /// Threshold on `Var(s)` for the constant-scalar-curvature test.
    pub csc: f64,
}

impl Default for FlowTolerances {
    fn default() -> Self {
        Self {
            vaisman: 1e-9,
            csc: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Safety factor in `dt ≤ cfl_safety · h² · min(min u, min λ)`.
    pub cfl_safety: f64,
    pub record_every: usize,
    pub tolerances: FlowTolerances,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_end: 0.1,
            cfl_safety: 0.25,
            record_every: 10,
            tolerances: FlowTolerances::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> FlowResult<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(FlowError::InvalidConfig("dt must be positive"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(FlowError::InvalidConfig("t_end must be positive"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 0.5) {
            return Err(FlowError::InvalidConfig("cfl_safety must lie in (0, 0.5]"));
        }
        if self.record_every == 0 {
            return Err(FlowError::InvalidConfig("record_every must be >= 1"));
        }
        Ok(())
    }
}

/// Largest admissible step for a state.
pub fn cfl_bound(m: &MetricState, cfl_safety: f64) -> f64 {
    let h = m.grid().spacing();
    cfl_safety * h * h * m.u.min().min(m.lambda.min())
}

/// `−ρ^{1,1}` as a 2-form.
pub fn flow_rhs(m: &MetricState) -> FlowResult<InvariantForm> {
    let split = metric_split(m)?;
    rhs_with_split(m, &split)
}

fn rhs_with_split(m: &MetricState, split: &MetricSplit) -> FlowResult<InvariantForm> {
    let pkg = bismut_ricci_with_split(m, split)?;
    Ok(pkg.ricci_11.scale(-1.0))
}

/// The flow vector in coefficient form, with the anti-invariant residual of
/// the decomposition.
pub fn flow_velocity(m: &MetricState) -> FlowResult<(MetricState, f64)> {
    let rhs = flow_rhs(m)?;
    Ok(MetricState::decompose(&rhs)?)
}

fn velocity(m: &MetricState, t: f64) -> FlowResult<MetricState> {
    match flow_velocity(m) {
        Ok((v, _)) => Ok(v),
        Err(FlowError::Geometry(GeometryError::Positivity { margin, .. })) => Err(FlowError::StepRejected { t, margin }),
        Err(FlowError::Geometry(GeometryError::NonFinite { .. })) => Err(FlowError::NonFinite { t }),
        Err(e) => Err(e),
    }
}

/// One classical RK4 step. The result is rejected, not clamped, when it
/// leaves the positive cone.
pub fn step(m: &MetricState, dt: f64) -> FlowResult<MetricState> {
    step_at(m, dt, 0.0)
}

fn step_at(m: &MetricState, dt: f64, t: f64) -> FlowResult<MetricState> {
    let k1 = velocity(m, t)?;
    let k2 = velocity(&m.axpy(0.5 * dt, &k1), t + 0.5 * dt)?;
    let k3 = velocity(&m.axpy(0.5 * dt, &k2), t + 0.5 * dt)?;
    let k4 = velocity(&m.axpy(dt, &k3), t + dt)?;
    let next = m
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    if next.fields().iter().any(|f| f.check_finite().is_err()) {
        return Err(FlowError::NonFinite { t: t + dt });
    }
    let margin = next.positivity_margin();
    if !(margin > 0.0) {
        return Err(FlowError::StepRejected { t: t + dt, margin });
    }
    Ok(next)
}

/// One diagnostic row. Column order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub lambda_mean: f64,
    pub lambda_var: f64,
    pub sigma1_mean: f64,
    pub sigma1_var: f64,
    pub sigma2_mean: f64,
    pub sigma2_var: f64,
    pub s_mean: f64,
    pub s_var: f64,
    pub pluriclosed_defect: f64,
    pub lck_defect: f64,
    pub vaisman_defect: f64,
    pub char1: f64,
    pub char2: f64,
    /// `‖∂ₜ(λ μ₁∧μ₂)‖∞` from the flow vector.
    pub fiber_residual: f64,
    /// `max_i ‖μ_i(t) − μ_i(0)‖∞`.
    pub mu_drift: f64,
    /// `‖σ̇₁ − σ₁ s‖∞` from the flow vector.
    pub sigma1_ode_residual: f64,
    /// `max_i ‖g(∂ₜμ_i, μ_i) + ½ λ′ λ⁻²‖∞`.
    pub lambda_relation_residual: f64,
    /// `‖(λμ₁∧μ₂)(t₊) − (λμ₁∧μ₂)(t₋)‖∞ / Δt` between neighbouring rows.
    pub fiber_residual_fd: f64,
    /// `|σ̄₁′ − σ̄₁ s̄|` with `σ̄₁′` from neighbouring rows.
    pub sigma1_ode_residual_fd: f64,
    pub positivity_margin: f64,
}

impl TraceRow {
    pub const COLUMNS: [&'static str; 21] = [
        "t",
        "lambda_mean",
        "lambda_var",
        "sigma1_mean",
        "sigma1_var",
        "sigma2_mean",
        "sigma2_var",
        "s_mean",
        "s_var",
        "pluriclosed_defect",
        "lck_defect",
        "vaisman_defect",
        "char1",
        "char2",
        "fiber_residual",
        "mu_drift",
        "sigma1_ode_residual",
        "lambda_relation_residual",
        "fiber_residual_fd",
        "sigma1_ode_residual_fd",
        "positivity_margin",
    ];

    pub fn values(&self) -> [f64; 21] {
        [
            self.t,
            self.lambda_mean,
            self.lambda_var,
            self.sigma1_mean,
            self.sigma1_var,
            self.sigma2_mean,
            self.sigma2_var,
            self.s_mean,
            self.s_var,
            self.pluriclosed_defect,
            self.lck_defect,
            self.vaisman_defect,
            self.char1,
            self.char2,
            self.fiber_residual,
            self.mu_drift,
            self.sigma1_ode_residual,
            self.lambda_relation_residual,
            self.fiber_residual_fd,
            self.sigma1_ode_residual_fd,
            self.positivity_margin,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    Aborted { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
}

impl FlowTrace {
    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Data retained between rows for finite differences in time.
struct Snapshot {
    t: f64,
    fiber: InvariantForm,
    sigma1_mean: f64,
    s_mean: f64,
}

fn snapshot_row(m: &MetricState, t: f64, mu0: &(InvariantForm, InvariantForm)) -> FlowResult<(TraceRow, Snapshot, MetricSplit)> {
    let split = metric_split(m)?;
    let pkg = bismut_ricci_with_split(m, &split)?;
    let (velocity, _) = MetricState::decompose(&pkg.ricci_11.scale(-1.0))?;
    let rates = SplitRates::new(m, &split, &velocity)?;
    let (char1, char2) = characteristic_numbers(&split)?;
    let mu_drift = split
        .mu1
        .sub(&mu0.0)?
        .max_abs()
        .max(split.mu2.sub(&mu0.1)?.max_abs());
    let sigma1_ode = (&rates.sigma1 - &(&split.sigma1 * &pkg.scalar)).max_abs();

    let row = TraceRow {
        t,
        lambda_mean: split.lambda.mean(),
        lambda_var: split.lambda.variance(),
        sigma1_mean: split.sigma1.mean(),
        sigma1_var: split.sigma1.variance(),
        sigma2_mean: split.sigma2.mean(),
        sigma2_var: split.sigma2.variance(),
        s_mean: pkg.scalar.mean(),
        s_var: pkg.scalar.variance(),
        pluriclosed_defect: pluriclosed_defect(m)?,
        lck_defect: split.theta.exterior_d()?.max_abs(),
        vaisman_defect: split.lambda.variance() + split.sigma1.variance() + split.sigma2.variance(),
        char1,
        char2,
        fiber_residual: rates.fiber.max_abs(),
        mu_drift,
        sigma1_ode_residual: sigma1_ode,
        lambda_relation_residual: rates.lambda_relation,
        fiber_residual_fd: 0.0,
        sigma1_ode_residual_fd: 0.0,
        positivity_margin: m.positivity_margin(),
    };
    let snap = Snapshot {
        t,
        fiber: split.fiber_form(),
        sigma1_mean: row.sigma1_mean,
        s_mean: row.s_mean,
    };
    Ok((row, snap, split))
}

/// Time derivatives of the split data along a flow vector.
pub struct SplitRates {
    pub transverse: ScalarField,
    pub fiber: InvariantForm,
    pub mu1: InvariantForm,
    pub mu2: InvariantForm,
    pub sigma1: ScalarField,
    pub sigma2: ScalarField,
    pub lambda_relation: f64,
}

impl SplitRates {
    pub fn new(m: &MetricState, split: &MetricSplit, v: &MetricState) -> FlowResult<Self> {
        let grid = m.grid();
        let n = grid.len();
        let field = |f: &dyn Fn(usize) -> f64| -> ScalarField {
            ScalarField::from_values(grid, (0..n).map(f).collect()).expect("grid length")
        };
        let (l, p, q) = (m.lambda.values(), m.p.values(), m.q.values());
        let (du, dl, dp, dq) = (v.u.values(), v.lambda.values(), v.p.values(), v.q.values());
        let transverse = field(&|k| {
            du[k] - 2.0 * (p[k] * dp[k] + q[k] * dq[k]) / l[k] + (p[k] * p[k] + q[k] * q[k]) * dl[k] / (l[k] * l[k])
        });
        let da = field(&|k| dq[k] / l[k] - q[k] * dl[k] / (l[k] * l[k]));
        let db = field(&|k| dp[k] / l[k] - p[k] * dl[k] / (l[k] * l[k]));
        let fiber = v.omega().sub(&InvariantForm::monomial(E12, transverse.clone()))?;
        let mu1 = InvariantForm::from_terms(grid, 1, vec![(E1, da.clone()), (E2, db.clone())])?;
        let mu2 = mu1.apply_j();
        let t_density = split.transverse_density();
        let rate = |mu_dot: &InvariantForm, sigma: &ScalarField| -> FlowResult<ScalarField> {
            let d = mu_dot.exterior_d()?;
            let c = d.coeff(E12);
            Ok(field(&|k| (c.values()[k] - sigma.values()[k] * transverse.values()[k]) / t_density.values()[k]))
        };
        let sigma1 = rate(&mu1, &split.sigma1)?;
        let sigma2 = rate(&mu2, &split.sigma2)?;

        // g(μ̇_i, μ_i) + ½ λ̇ λ⁻² through the orthonormal frame
        let frame = OrthonormalFrame::new(split);
        let mut lambda_relation: f64 = 0.0;
        for (dot, mu) in [(&mu1, &split.mu1), (&mu2, &split.mu2)] {
            for k in 0..n {
                let ip: f64 = (0..4)
                    .map(|a| {
                        let fa = frame.vector_at(a, k);
                        dot.eval_at(k, &[fa]) * mu.eval_at(k, &[fa])
                    })
                    .sum();
                lambda_relation = lambda_relation.max((ip + 0.5 * dl[k] / (l[k] * l[k])).abs());
            }
        }
        Ok(Self {
            transverse,
            fiber,
            mu1,
            mu2,
            sigma1,
            sigma2,
            lambda_relation,
        })
    }
}

/// Three-point first derivative at `t1` on a possibly uneven stencil.
fn stencil_weights(t0: f64, t1: f64, t2: f64) -> [f64; 3] {
    let h0 = t1 - t0;
    let h1 = t2 - t1;
    [-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1))]
}

fn finalize_fd(rows: &mut [TraceRow], snaps: &[&Snapshot], target: usize, row_index: usize) -> FlowResult<()> {
    // snaps holds up to three consecutive snapshots; `target` indexes into it
    let (fiber_rate, sigma_rate) = match snaps.len() {
        2 => {
            let (a, b) = (snaps[0], snaps[1]);
            let dt = b.t - a.t;
            (
                b.fiber.sub(&a.fiber)?.scale(1.0 / dt),
                (b.sigma1_mean - a.sigma1_mean) / dt,
            )
        }
        3 => {
            let w = stencil_weights(snaps[0].t, snaps[1].t, snaps[2].t);
            let f = snaps[0]
                .fiber
                .scale(w[0])
                .add(&snaps[1].fiber.scale(w[1]))?
                .add(&snaps[2].fiber.scale(w[2]))?;
            let s = w[0] * snaps[0].sigma1_mean + w[1] * snaps[1].sigma1_mean + w[2] * snaps[2].sigma1_mean;
            (f, s)
        }
        _ => return Ok(()),
    };
    let snap = snaps[target];
    let row = &mut rows[row_index];
    row.fiber_residual_fd = fiber_rate.max_abs();
    row.sigma1_ode_residual_fd = (sigma_rate - snap.sigma1_mean * snap.s_mean).abs();
    Ok(())
}

/// Integrates from `m0` to `cfg.t_end`, recording every `cfg.record_every`
/// steps and at the final time. Stops at the first rejected step; the trace
/// up to that point is returned with the abort reason.
pub fn run(m0: &MetricState, cfg: &FlowConfig) -> FlowResult<FlowTrace> {
    cfg.validate()?;
    let bound = cfl_bound(m0, cfg.cfl_safety);
    if cfg.dt > bound {
        return Err(FlowError::StepTooLarge { dt: cfg.dt, bound });
    }
    let split0 = metric_split(m0)?;
    let mu0 = (split0.mu1.clone(), split0.mu2.clone());

    let mut rows = Vec::new();
    let mut window: Vec<Snapshot> = Vec::new();
    let record = |m: &MetricState, t: f64, rows: &mut Vec<TraceRow>, window: &mut Vec<Snapshot>| -> FlowResult<()> {
        let (row, snap, _) = snapshot_row(m, t, &mu0)?;
        rows.push(row);
        window.push(snap);
        if window.len() > 3 {
            window.remove(0);
        }
        let last = rows.len() - 1;
        match window.len() {
            2 => {
                let refs: Vec<&Snapshot> = window.iter().collect();
                finalize_fd(rows, &refs, 0, last - 1)?;
            }
            3 => {
                let refs: Vec<&Snapshot> = window.iter().collect();
                finalize_fd(rows, &refs, 1, last - 1)?;
            }
            _ => {}
        }
        Ok(())
    };

    record(m0, 0.0, &mut rows, &mut window)?;
    let mut m = m0.clone();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut termination = Termination::Completed;
    while t < cfg.t_end * (1.0 - 1e-12) {
        let dt = cfg.dt.min(cfg.t_end - t);
        let bound = cfl_bound(&m, cfg.cfl_safety);
        if dt > bound {
            termination = Termination::Aborted {
                t,
                reason: FlowError::StepTooLarge { dt, bound }.to_string(),
            };
            break;
        }
        match step_at(&m, dt, t) {
            Ok(next) => m = next,
            Err(e @ (FlowError::StepRejected { .. } | FlowError::NonFinite { .. })) => {
                termination = Termination::Aborted {
                    t,
                    reason: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        t = if t + dt >= cfg.t_end * (1.0 - 1e-12) { cfg.t_end } else { t + dt };
        if steps % cfg.record_every == 0 || t >= cfg.t_end {
            record(&m, t, &mut rows, &mut window)?;
        }
    }
    // closing row: backward difference
    if window.len() >= 2 {
        let k = window.len();
        let refs: Vec<&Snapshot> = window[k - 2..].iter().collect();
        let last = rows.len() - 1;
        finalize_fd(&mut rows, &refs, 1, last)?;
    }
    Ok(FlowTrace { rows, termination })
}

/// Integrates without diagnostics and returns the final state.
pub fn integrate(m0: &MetricState, dt: f64, t_end: f64) -> FlowResult<MetricState> {
    let mut m = m0.clone();
    let mut t = 0.0;
    while t < t_end * (1.0 - 1e-12) {
        let h = dt.min(t_end - t);
        m = step_at(&m, h, t)?;
        t += h;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    StaysVaisman,
    LeavesVaisman { exit_time: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub rows: usize,
    pub t_final: f64,
    /// `max_t |n_i(t) − n_i(0)| / max(t, 1)`.
    pub char_drift_rate: f64,
    pub max_fiber_residual_vaisman: f64,
    pub max_sigma1_ode_residual_vaisman: f64,
    pub max_lambda_relation_vaisman: f64,
    pub max_mu_drift_vaisman: f64,
    pub max_pluriclosed_defect: f64,
    pub max_vaisman_defect: f64,
    pub initial_s_variance: f64,
    pub vaisman_instants: usize,
    pub verdict: Verdict,
}

impl MonitorSummary {
    pub fn stays_vaisman(&self) -> bool {
        self.verdict == Verdict::StaysVaisman
    }

    pub fn exit_time(&self) -> Option<f64> {
        match self.verdict {
            Verdict::StaysVaisman => None,
            Verdict::LeavesVaisman { exit_time } => exit_time,
        }
    }
}

pub fn conservation_monitors(trace: &FlowTrace, tol: &FlowTolerances) -> FlowResult<MonitorSummary> {
    let rows = &trace.rows;
    if rows.len() < 3 {
        return Err(FlowError::TooFewRows(rows.len()));
    }
    let first = &rows[0];
    let char_drift_rate = rows
        .iter()
        .map(|r| {
            let drift = (r.char1 - first.char1).abs().max((r.char2 - first.char2).abs());
            drift / r.t.max(1.0)
        })
        .fold(0.0, f64::max);
    let instants: Vec<&TraceRow> = rows.iter().filter(|r| r.vaisman_defect < tol.vaisman).collect();
    let max_over = |f: &dyn Fn(&TraceRow) -> f64| instants.iter().map(|r| f(r)).fold(0.0, f64::max);
    let exit = rows.iter().find(|r| r.vaisman_defect >= tol.vaisman).map(|r| r.t);
    let stays = exit.is_none() && first.s_var < tol.csc && trace.is_complete();
    Ok(MonitorSummary {
        rows: rows.len(),
        t_final: rows.last().map(|r| r.t).unwrap_or(0.0),
        char_drift_rate,
        max_fiber_residual_vaisman: max_over(&|r| r.fiber_residual),
        max_sigma1_ode_residual_vaisman: max_over(&|r| r.sigma1_ode_residual),
        max_lambda_relation_vaisman: max_over(&|r| r.lambda_relation_residual),
        max_mu_drift_vaisman: max_over(&|r| r.mu_drift),
        max_pluriclosed_defect: rows.iter().map(|r| r.pluriclosed_defect).fold(0.0, f64::max),
        max_vaisman_defect: rows.iter().map(|r| r.vaisman_defect).fold(0.0, f64::max),
        initial_s_variance: first.s_var,
        vaisman_instants: instants.len(),
        verdict: if stays {
            Verdict::StaysVaisman
        } else {
            Verdict::LeavesVaisman { exit_time: exit }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BaseGrid;
    use crate::vaisman::{make_noncsc_vaisman, make_standard_vaisman};

    fn grid() -> BaseGrid {
        BaseGrid::new(32).unwrap()
    }

    #[test]
    fn stencil_is_exact_for_quadratics() {
        let w = stencil_weights(0.0, 0.1, 0.35);
        let f = |t: f64| 3.0 * t * t - t + 2.0;
        let d = w[0] * f(0.0) + w[1] * f(0.1) + w[2] * f(0.35);
        assert!((d - (6.0 * 0.1 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn csc_state_follows_closed_form() {
        // u = c gives −ρ^{1,1} = e¹²/c, so u(t) = √(c² + 2t)
        let c = 2.0;
        let m = make_standard_vaisman(grid(), c).unwrap();
        let (v, res) = flow_velocity(&m).unwrap();
        assert!(res < 1e-14);
        assert!((v.u.mean() - 1.0 / c).abs() < 1e-12 && v.u.variance() < 1e-24);
        assert!(v.lambda.max_abs() < 1e-12 && v.p.max_abs() < 1e-12 && v.q.max_abs() < 1e-12);
        let dt = 1e-4;
        let next = step(&m, dt).unwrap();
        let err = (next.u.mean() - (c * c + 2.0 * dt).sqrt()).abs();
        assert!(err < 4e-15, "{err:e}");
    }

    #[test]
    fn noncsc_first_step_follows_taylor() {
        let m = make_noncsc_vaisman(grid(), 0.1, (1, 1)).unwrap();
        let split = metric_split(&m).unwrap();
        let pkg = bismut_ricci_with_split(&m, &split).unwrap();
        let dt = 1e-4;
        let next = step(&m, dt).unwrap();
        assert!((&next.lambda - &m.lambda).max_abs() < 1e-10);
        let predicted = m.u.zip_map(&(&pkg.scalar * split.transverse_density()), |u, su| u - dt * su);
        // second-order remainder ~ dt² |∂ₜ² u|
        assert!((&next.u - &predicted).max_abs() < 1e-5);
    }

    #[test]
    fn rejects_oversized_steps() {
        let m = make_standard_vaisman(grid(), 1.0).unwrap();
        let cfg = FlowConfig {
            dt: 1e-2,
            ..FlowConfig::default()
        };
        assert!(matches!(run(&m, &cfg), Err(FlowError::StepTooLarge { .. })));
        let bad = FlowConfig {
            cfl_safety: 0.7,
            ..FlowConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn monitors_need_three_rows() {
        let trace = FlowTrace {
            rows: vec![],
            termination: Termination::Completed,
        };
        assert!(matches!(
            conservation_monitors(&trace, &FlowTolerances::default()),
            Err(FlowError::TooFewRows(0))
        ));
    }
}
