//! Randomized battery of the split identities and their consequences.

use std::f64::consts::PI;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{bismut_ricci_with_split, lee_form, metric_split, MetricSplit, MetricState};
use crate::grid::{BaseGrid, ScalarField};
use crate::vaisman::{lee_norm_squared, make_noncsc_vaisman, make_standard_vaisman, potential_form};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub tol: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_residual < self.tol
    }
}

/// Smooth periodic field: a mean drawn from `base`, plus modes `|k| ≤ 2`
/// with total amplitude `amp`.
pub fn random_field(grid: BaseGrid, rng: &mut impl Rng, base: Range<f64>, amp: f64) -> ScalarField {
    let base = rng.gen_range(base);
    let mut modes: Vec<(f64, f64, f64, f64)> = Vec::new();
    for kx in 0..=2i32 {
        for ky in -2..=2i32 {
            if (kx, ky) <= (0, 0) {
                continue;
            }
            modes.push((kx as f64, ky as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let total: f64 = modes.iter().map(|m| m.2.abs() + m.3.abs()).sum();
    let norm = amp / total;
    ScalarField::from_fn(grid, |x, y| {
        base + norm
            * modes
                .iter()
                .map(|&(kx, ky, a, b)| {
                    let phase = 2.0 * PI * (kx * x + ky * y);
                    a * phase.cos() + b * phase.sin()
                })
                .sum::<f64>()
    })
}

/// Random positive invariant state; `λ` is constant when `pluriclosed`.
pub fn random_state(grid: BaseGrid, rng: &mut impl Rng, pluriclosed: bool) -> MetricState {
    let lambda = if pluriclosed {
        ScalarField::constant(grid, rng.gen_range(0.6..1.6))
    } else {
        random_field(grid, rng, 0.8..1.4, 0.3)
    };
    let p = random_field(grid, rng, -0.3..0.3, 0.3);
    let q = random_field(grid, rng, -0.3..0.3, 0.3);
    let u = random_field(grid, rng, 1.8..2.5, 0.4);
    MetricState::new(u, lambda, p, q).expect("fields share the grid")
}

fn homogeneous_state(grid: BaseGrid, rng: &mut impl Rng) -> MetricState {
    MetricState::homogeneous(
        grid,
        rng.gen_range(1.5..3.0),
        rng.gen_range(0.5..2.0),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
    )
}

/// `(‖dω̌‖, max ‖dμᵢ − σᵢω̌‖, max ‖J dμᵢ − dμᵢ‖, ‖λμ₁∧μ₂ + ω̌ − ω‖)`.
pub fn split_residuals(m: &MetricState, split: &MetricSplit) -> Result<[f64; 4]> {
    let (o1, o2) = split.curvature_forms()?;
    let closed = split.omega_check.exterior_d()?.max_abs();
    let mut curvature: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for (o, sigma) in [(&o1, &split.sigma1), (&o2, &split.sigma2)] {
        curvature = curvature.max(o.sub(&split.omega_check.scale_by(sigma))?.max_abs());
        invariance = invariance.max(o.apply_j().sub(o)?.max_abs());
    }
    let reassembly = split.fiber_form().add(&split.omega_check)?.sub(&m.omega())?.max_abs();
    Ok([closed, curvature, invariance, reassembly])
}

fn lee_residual(m: &MetricState, split: &MetricSplit) -> Result<f64> {
    Ok(lee_form(m)?.sub(&split.lee_form_formula())?.max_abs())
}

fn lee_norm_residual(split: &MetricSplit) -> f64 {
    let expected = split
        .lambda
        .zip_map(&split.sigma1.zip_map(&split.sigma2, |a, b| a * a + b * b), |l, s| l * s);
    (&lee_norm_squared(split) - &expected).max_abs()
}

struct Tally {
    checks: Vec<IdentityCheck>,
}

impl Tally {
    fn record(&mut self, name: &'static str, residual: f64) {
        let c = self.checks.iter_mut().find(|c| c.name == name).expect("registered name");
        c.cases += 1;
        c.max_residual = c.max_residual.max(residual);
    }
}

/// The seed families: the standard metric at two scales and three
/// non-CSC perturbations.
pub fn vaisman_seeds(grid: BaseGrid) -> Result<Vec<(String, MetricState)>> {
    let mut seeds = vec![
        ("standard".to_string(), make_standard_vaisman(grid, 1.0)?),
        ("standard x2".to_string(), make_standard_vaisman(grid, 2.0)?),
    ];
    for (eps, mode) in [(0.1, (1, 1)), (0.2, (1, 2)), (-0.15, (2, 1))] {
        seeds.push((format!("noncsc eps={eps} mode={mode:?}"), make_noncsc_vaisman(grid, eps, mode)?));
    }
    Ok(seeds)
}

/// Runs every identity on `samples` random states plus the seed families.
pub fn identity_battery(grid: BaseGrid, samples: usize, seed: u64, tol: f64) -> Result<Vec<IdentityCheck>> {
    let names: [&'static str; 9] = [
        "d(omega_check) = 0",
        "d(mu_i) = sigma_i omega_check",
        "J d(mu_i) = d(mu_i)",
        "omega = lambda mu1^mu2 + omega_check",
        "Lee form: solver = lambda(sigma1 mu2 - sigma2 mu1)",
        "|theta|^2 = lambda(sigma1^2 + sigma2^2)",
        "potential identity (constant coefficients)",
        "rho = s omega_check on Vaisman seeds",
        "ricci decomposition residual",
    ];
    let mut tally = Tally {
        checks: names
            .iter()
            .map(|&name| IdentityCheck {
                name,
                cases: 0,
                max_residual: 0.0,
                tol,
            })
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<(MetricState, bool)> = (0..samples)
        .map(|i| {
            let pluriclosed = i % 2 == 1;
            (random_state(grid, &mut rng, pluriclosed), pluriclosed)
        })
        .collect();
    for (_, m) in vaisman_seeds(grid)? {
        states.push((m, true));
    }

    for (m, pluriclosed) in &states {
        let split = metric_split(m)?;
        let r = split_residuals(m, &split)?;
        for (name, v) in names.iter().zip(r) {
            tally.record(name, v);
        }
        if *pluriclosed {
            tally.record(names[4], lee_residual(m, &split)?);
            tally.record(names[5], lee_norm_residual(&split));
        }
    }
    for _ in 0..samples.div_ceil(5) {
        let m = homogeneous_state(grid, &mut rng);
        let split = metric_split(&m)?;
        tally.record(names[6], potential_form(&m, &split)?.max_abs());
    }
    for (_, m) in vaisman_seeds(grid)? {
        let split = metric_split(&m)?;
        let pkg = bismut_ricci_with_split(&m, &split)?;
        tally.record(names[7], pkg.horizontal_defect(&split));
        let (_, residual) = MetricState::decompose(&pkg.ricci_11)?;
        tally.record(names[8], residual);
    }
    Ok(tally.checks)
}
