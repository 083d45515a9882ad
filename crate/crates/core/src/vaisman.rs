//! Vaisman predicates, defect functionals and seed metrics.
//!
//! For torus-invariant metrics the Vaisman condition is tested through the
//! constancy of `λ`, `σ₁`, `σ₂`; the potential identity
//! `|θ|² ω = θ∧Jθ − dJθ` is reported alongside as an independent check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::InvariantForm;
use crate::geometry::{bismut_ricci_with_split, bismut_torsion, metric_split, MetricSplit, MetricState, OrthonormalFrame};
use crate::grid::{gradient, solve_poisson, BaseGrid, ScalarField};

/// Default threshold on `Var(λ) + Var(σ₁) + Var(σ₂)`.
pub const DEFAULT_VARIANCE_TOL: f64 = 1e-14;
/// Default threshold for identities that hold exactly in the continuum.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    /// `‖d dᶜω‖∞`.
    pub pluriclosed_defect: f64,
    /// `‖dθ‖∞`.
    pub lck_defect: f64,
    /// `Var(λ) + Var(σ₁) + Var(σ₂)` over the base grid.
    pub vaisman_defect: f64,
    /// `‖ |θ|²ω − θ∧Jθ + dJθ ‖∞`.
    pub potential_residual: f64,
    pub is_vaisman: bool,
    /// `Var(s)`, the non-CSC defect.
    pub s_variance: f64,
}

pub fn pluriclosed_defect(m: &MetricState) -> Result<f64> {
    Ok(bismut_torsion(m)?.exterior_d()?.max_abs())
}

/// `|θ|²` pointwise.
pub fn lee_norm_squared(split: &MetricSplit) -> ScalarField {
    let frame = OrthonormalFrame::new(split);
    let grid = split.lambda.grid();
    let values = (0..grid.len())
        .map(|k| (0..4).map(|a| split.theta.eval_at(k, &[frame.vector_at(a, k)]).powi(2)).sum())
        .collect();
    ScalarField::from_values(grid, values).expect("grid length")
}

/// `|θ|²ω − θ∧Jθ + dJθ`.
pub fn potential_form(m: &MetricState, split: &MetricSplit) -> Result<InvariantForm> {
    let theta = &split.theta;
    let j_theta = theta.apply_j();
    let lhs = m.omega().scale_by(&lee_norm_squared(split));
    lhs.sub(&theta.wedge(&j_theta)?)?.add(&j_theta.exterior_d()?)
}

pub fn assess(m: &MetricState, tol: f64) -> Result<DefectReport> {
    let split = metric_split(m)?;
    let curvature = bismut_ricci_with_split(m, &split)?;
    let vaisman_defect = split.lambda.variance() + split.sigma1.variance() + split.sigma2.variance();
    Ok(DefectReport {
        pluriclosed_defect: pluriclosed_defect(m)?,
        lck_defect: split.theta.exterior_d()?.max_abs(),
        vaisman_defect,
        potential_residual: potential_form(m, &split)?.max_abs(),
        is_vaisman: vaisman_defect < tol,
        s_variance: curvature.scalar.variance(),
    })
}

/// The left-invariant Vaisman metric `scale·e¹² + e³⁴`.
pub fn make_standard_vaisman(grid: BaseGrid, scale: f64) -> Result<MetricState> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter {
            name: "scale",
            constraint: "must be a positive finite number",
        });
    }
    Ok(MetricState::homogeneous(grid, scale, 1.0, 0.0, 0.0))
}

/// Vaisman metric with non-constant scalar curvature.
///
/// Prescribes `λ = 1` and the transverse density
/// `ǔ = 1 + ε sin(2πk_x x) sin(2πk_y y)`, then looks for a connection
/// `μ₁ = e³ + a e¹ + b e²`, `μ₂ = Jμ₁ = e⁴ − b e¹ + a e²` with
/// `dμ₁ = −ω̌` and `dμ₂ = 0`, i.e. `σ₁ ≡ −1`, `σ₂ ≡ 0`:
///
/// ```text
/// ∂ₓb − ∂ᵧa = 1 − ǔ,    ∂ₓa + ∂ᵧb = 0.
/// ```
///
/// With a stream function `a = ∂ᵧφ`, `b = −∂ₓφ` this is `Δφ = ǔ − 1`, solved
/// spectrally (the source has zero mean). The metric is reassembled as
/// `ω = μ₁∧μ₂ + ǔ e¹²`, so `u = ǔ + a² + b²`, `p = b`, `q = a`.
pub fn make_noncsc_vaisman(grid: BaseGrid, epsilon: f64, mode: (u32, u32)) -> Result<MetricState> {
    if !(epsilon.abs() < 0.5) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            constraint: "|epsilon| < 1/2",
        });
    }
    if mode.0 == 0 || mode.1 == 0 {
        return Err(Error::InvalidParameter {
            name: "mode",
            constraint: "both wave numbers must be >= 1",
        });
    }
    let (kx, ky) = (mode.0 as f64, mode.1 as f64);
    let transverse = ScalarField::from_fn(grid, |x, y| {
        1.0 + epsilon * (2.0 * PI * kx * x).sin() * (2.0 * PI * ky * y).sin()
    });
    let source = transverse.map(|v| v - 1.0);
    let phi = solve_poisson(&source, 1e-12)?;
    let (phi_x, phi_y) = gradient(&phi)?;
    let a = phi_y;
    let b = -&phi_x;
    let u = transverse.zip_map(&(&(&a * &a) + &(&b * &b)), |t, s| t + s);
    let m = MetricState::new(u, ScalarField::constant(grid, 1.0), b, a)?;
    m.check_positive()?;
    Ok(m)
}

/// `∫ ω̌` over the base: non-zero certifies that `[ω̌]` is non-trivial in
/// basic cohomology, since basic exact 2-forms integrate to zero.
pub fn basic_class_nontriviality(split: &MetricSplit) -> Result<f64> {
    split.omega_check.base_integral()
}
