//! Invariant Hermitian metrics and their dimensional-reduction splitting.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::forms::{basis, InvariantForm, Vertical, E1, E12, E13, E14, E1234, E2, E23, E24, E34, E3, E4};
use crate::grid::{BaseGrid, ScalarField};

/// Below this magnitude the transverse area form is treated as degenerate.
pub const TRANSVERSE_DEGENERACY: f64 = 1e-12;

/// Coefficients of the J-invariant 2-form
/// `ω = u e¹² + λ e³⁴ + p (e¹³ + e²⁴) + q (e¹⁴ − e²³)`.
///
/// The metric is `g(X, Y) = −ω(JX, Y)`; in the frame dual to the coframe it
/// reads
///
/// ```text
///     | u  0  q −p |
/// g = | 0  u  p  q |
///     | q  p  λ  0 |
///     |−p  q  0  λ |
/// ```
///
/// so `g > 0` iff `λ > 0` and the transverse density `u − (p² + q²)/λ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricState {
    pub u: ScalarField,
    pub lambda: ScalarField,
    pub p: ScalarField,
    pub q: ScalarField,
}

impl MetricState {
    pub fn new(u: ScalarField, lambda: ScalarField, p: ScalarField, q: ScalarField) -> Result<Self> {
        let g = u.grid();
        if lambda.grid() != g || p.grid() != g || q.grid() != g {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, lambda, p, q })
    }

    /// Constant-coefficient (left-invariant) state.
    pub fn homogeneous(grid: BaseGrid, u: f64, lambda: f64, p: f64, q: f64) -> Self {
        Self {
            u: ScalarField::constant(grid, u),
            lambda: ScalarField::constant(grid, lambda),
            p: ScalarField::constant(grid, p),
            q: ScalarField::constant(grid, q),
        }
    }

    pub fn grid(&self) -> BaseGrid {
        self.u.grid()
    }

    pub fn fields(&self) -> [&ScalarField; 4] {
        [&self.u, &self.lambda, &self.p, &self.q]
    }

    pub fn omega(&self) -> InvariantForm {
        let g = self.grid();
        InvariantForm::from_terms(
            g,
            2,
            vec![
                (E12, self.u.clone()),
                (E34, self.lambda.clone()),
                (E13, self.p.clone()),
                (E24, self.p.clone()),
                (E14, self.q.clone()),
                (E23, -&self.q),
            ],
        )
        .expect("degree-2 terms on one grid")
    }

    /// Decomposes a J-invariant 2-form into the four coefficient fields.
    /// Returns the state together with the largest anti-invariant residual.
    pub fn decompose(form: &InvariantForm) -> Result<(Self, f64)> {
        if form.degree() != 2 {
            return Err(Error::WrongDegree {
                expected: "degree 2",
                found: form.degree(),
            });
        }
        let (c13, c24) = (form.coeff(E13), form.coeff(E24));
        let (c14, c23) = (form.coeff(E14), form.coeff(E23));
        let residual = (c13 - c24).max_abs().max((c14 + c23).max_abs()) * 0.5;
        let state = Self {
            u: form.coeff(E12).clone(),
            lambda: form.coeff(E34).clone(),
            p: (c13 + c24).scale(0.5),
            q: (c14 - c23).scale(0.5),
        };
        Ok((state, residual))
    }

    /// `ǔ = u − (p² + q²)/λ`, the coefficient of the transverse form `ω̌ = ǔ e¹²`.
    pub fn transverse_density(&self) -> ScalarField {
        let g = self.grid();
        let values = (0..g.len())
            .map(|k| {
                let (u, l, p, q) = self.at(k);
                u - (p * p + q * q) / l
            })
            .collect();
        ScalarField::from_values(g, values).expect("grid length")
    }

    fn at(&self, k: usize) -> (f64, f64, f64, f64) {
        (
            self.u.values()[k],
            self.lambda.values()[k],
            self.p.values()[k],
            self.q.values()[k],
        )
    }

    /// `g(E_i, E_j)` at grid point `k`.
    pub fn metric_at(&self, k: usize) -> [[f64; 4]; 4] {
        let (u, l, p, q) = self.at(k);
        [[u, 0.0, q, -p], [0.0, u, p, q], [q, p, l, 0.0], [-p, q, 0.0, l]]
    }

    /// Pointwise `min(λ, ǔ)`: positive iff `g` is positive definite.
    pub fn positivity_margin_field(&self) -> ScalarField {
        let l = &self.lambda;
        let t = self.transverse_density();
        l.zip_map(&t, f64::min)
    }

    pub fn positivity_margin(&self) -> f64 {
        self.positivity_margin_field().min()
    }

    pub fn check_positive(&self) -> Result<()> {
        for f in self.fields() {
            f.check_finite()?;
        }
        let margin = self.positivity_margin_field();
        match margin.values().iter().position(|&m| !(m > 0.0)) {
            None => Ok(()),
            Some(k) => {
                let (ix, iy) = margin.grid().point(k);
                Err(Error::Positivity {
                    ix,
                    iy,
                    margin: margin.values()[k],
                })
            }
        }
    }

    /// Largest coefficient difference between two states.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields())
            .map(|(a, b)| (*a - b).max_abs())
            .fold(0.0, f64::max)
    }

    /// `self + c · other`, coefficient-wise.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        let f = |a: &ScalarField, b: &ScalarField| a.zip_map(b, |x, y| x + c * y);
        Self {
            u: f(&self.u, &other.u),
            lambda: f(&self.lambda, &other.lambda),
            p: f(&self.p, &other.p),
            q: f(&self.q, &other.q),
        }
    }
}

/// The splitting `ω = λ μ₁∧μ₂ + ω̌` induced by an invariant metric.
#[derive(Debug, Clone)]
pub struct MetricSplit {
    pub lambda: ScalarField,
    pub mu1: InvariantForm,
    pub mu2: InvariantForm,
    pub omega_check: InvariantForm,
    pub sigma1: ScalarField,
    pub sigma2: ScalarField,
    /// Lee form obtained from `dω = θ ∧ ω`.
    pub theta: InvariantForm,
}

impl MetricSplit {
    /// `ǔ`, the coefficient of `ω̌` on `e¹²`.
    pub fn transverse_density(&self) -> &ScalarField {
        self.omega_check.coeff(E12)
    }

    /// The fiber part `λ μ₁∧μ₂`.
    pub fn fiber_form(&self) -> InvariantForm {
        self.mu1.wedge(&self.mu2).expect("1-forms").scale_by(&self.lambda)
    }

    pub fn curvature_forms(&self) -> Result<(InvariantForm, InvariantForm)> {
        Ok((self.mu1.exterior_d()?, self.mu2.exterior_d()?))
    }

    /// `λ(σ₁ μ₂ − σ₂ μ₁)`, the Lee form predicted for pluriclosed metrics.
    pub fn lee_form_formula(&self) -> InvariantForm {
        let a = self.mu2.scale_by(&self.sigma1);
        let b = self.mu1.scale_by(&self.sigma2);
        a.sub(&b).expect("same degree").scale_by(&self.lambda)
    }
}

pub fn metric_split(m: &MetricState) -> Result<MetricSplit> {
    m.check_positive()?;
    let omega = m.omega();
    let inv_lambda = m.lambda.map(|l| 1.0 / l);
    let mu1 = omega.contract(Vertical::V2)?.scale_by(&inv_lambda).scale(-1.0);
    let mu2 = omega.contract(Vertical::V1)?.scale_by(&inv_lambda);
    let fiber = mu1.wedge(&mu2)?.scale_by(&m.lambda);
    let omega_check = omega.sub(&fiber)?;

    let top = mu1.wedge(&mu2)?;
    let denom = omega_check.wedge(&top)?;
    let denom = denom.coeff(E1234);
    if let Some(k) = denom.values().iter().position(|v| !(v.abs() > TRANSVERSE_DEGENERACY)) {
        let (ix, iy) = denom.grid().point(k);
        return Err(Error::DegenerateTransverse {
            ix,
            iy,
            value: denom.values()[k].abs(),
        });
    }
    let ratio = |mu: &InvariantForm| -> Result<ScalarField> {
        let num = mu.exterior_d()?.wedge(&top)?;
        Ok(num.coeff(E1234).zip_map(denom, |a, b| a / b))
    };
    let sigma1 = ratio(&mu1)?;
    let sigma2 = ratio(&mu2)?;
    let theta = lee_form(m)?;
    Ok(MetricSplit {
        lambda: m.lambda.clone(),
        mu1,
        mu2,
        omega_check,
        sigma1,
        sigma2,
        theta,
    })
}

/// Solves `dω = θ ∧ ω` pointwise; `α ↦ α∧ω` is an isomorphism from 1-forms
/// to 3-forms whenever `ω` is non-degenerate.
pub fn lee_form(m: &MetricState) -> Result<InvariantForm> {
    m.check_positive()?;
    let grid = m.grid();
    let omega = m.omega();
    let d_omega = omega.exterior_d()?;
    let images: Vec<InvariantForm> = basis(1)
        .iter()
        .map(|&e| InvariantForm::unit(grid, e).wedge(&omega))
        .collect::<Result<_>>()?;
    let rows = basis(3);
    let mut out = vec![Vec::with_capacity(grid.len()); 4];
    for k in 0..grid.len() {
        let mut a = Matrix4::zeros();
        let mut rhs = Vector4::zeros();
        for (r, &mask) in rows.iter().enumerate() {
            for (c, img) in images.iter().enumerate() {
                a[(r, c)] = img.coeff(mask).values()[k];
            }
            rhs[r] = d_omega.coeff(mask).values()[k];
        }
        let (ix, iy) = grid.point(k);
        let sol = a.lu().solve(&rhs).ok_or(Error::SingularLeeSystem {
            ix,
            iy,
            condition: f64::INFINITY,
        })?;
        for (c, v) in sol.iter().enumerate() {
            out[c].push(*v);
        }
    }
    let mut terms = Vec::with_capacity(4);
    for (mask, values) in [E1, E2, E3, E4].into_iter().zip(out) {
        terms.push((mask, ScalarField::from_values(grid, values)?));
    }
    InvariantForm::from_terms(grid, 1, terms)
}

/// Torsion 3-form `H = −dω(J·, J·, J·)`, i.e. `J` applied to `dω`.
pub fn bismut_torsion(m: &MetricState) -> Result<InvariantForm> {
    m.check_positive()?;
    Ok(m.omega().exterior_d()?.apply_j())
}

/// `(∫ dμ₁, ∫ dμ₂)` over the base torus.
pub fn characteristic_numbers(split: &MetricSplit) -> Result<(f64, f64)> {
    let (o1, o2) = split.curvature_forms()?;
    Ok((o1.base_integral()?, o2.base_integral()?))
}
