//! Bismut curvature by moving frames.
//!
//! The computation runs in the orthonormal frame
//!
//! ```text
//! F₀ = V₁/√λ,  F₁ = V₂/√λ,  F₂ = (E₁ − a E₃ + b E₄)/√ǔ,  F₃ = (E₂ − b E₃ − a E₄)/√ǔ
//! ```
//!
//! where `μ₁ = e³ + a e¹ + b e²` and `ǔ` is the transverse density. The frame
//! is J-adapted (`JF₀ = F₁`, `JF₂ = F₃`) with dual coframe
//! `(√λ μ₁, √λ μ₂, √ǔ e¹, √ǔ e²)`, so `ω = f⁰∧f¹ + f²∧f³`.
//!
//! Structure functions come from the coframe, `c_abc = g([F_a,F_b],F_c) = −df^c(F_a,F_b)`;
//! Levi-Civita coefficients `Γ_abc = g(∇_{F_a}F_b, F_c)` from the Koszul formula
//! `2Γ_abc = c_abc − c_acb − c_bca`. With `H = −dω(J·,J·,J·)` the Hermitian
//! connection with skew torsion is `Γ^B_abc = Γ_abc − ½ H_abc`; its torsion
//! 3-form is `−H`. Curvature follows from
//!
//! ```text
//! R_abcd = F_a(Γ_bcd) − F_b(Γ_acd) + Σ_e (Γ_bce Γ_aed − Γ_ace Γ_bed) − Σ_e c_abe Γ_ecd
//! ```
//!
//! and the Ricci form traces the endomorphism part against `J`:
//! `ρ(X,Y) = ½ Σ_i g(R(X,Y) J F_i, F_i) = −(R_XY01 + R_XY23)`. This is the sign
//! for which a Kähler metric has `ρ = Ric(J·,·)`. The scalar is
//! `s = ⟨ρ, ω⟩ = ρ₀₁ + ρ₂₃`, so `ρ = s ω̌` whenever `ρ` is a multiple of `ω̌`.

use rayon::prelude::*;

use crate::error::Result;
use crate::forms::{InvariantForm, E1, E12, E2};
use crate::geometry::metric::{bismut_torsion, metric_split, MetricSplit, MetricState};
use crate::grid::{gradient, BaseGrid, ScalarField};

/// Weight of the torsion in `Γ^B = Γ^{LC} + w·H`, fixed by `∇^B J = 0`.
pub const TORSION_WEIGHT: f64 = -0.5;

/// `J` on frame indices: `J F_a = sign · F_target`.
pub const FRAME_J: [(usize, f64); 4] = [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)];

/// J-adapted orthonormal frame and its dual coframe.
#[derive(Debug, Clone)]
pub struct OrthonormalFrame {
    /// `vectors[a][i]` is the `E_{i+1}` component of `F_a`.
    pub vectors: [[ScalarField; 4]; 4],
    pub coframe: [InvariantForm; 4],
}

impl OrthonormalFrame {
    pub fn new(split: &MetricSplit) -> Self {
        let grid = split.lambda.grid();
        let zero = ScalarField::zeros(grid);
        let sl = split.lambda.map(f64::sqrt);
        let isl = sl.map(|v| 1.0 / v);
        let su = split.transverse_density().map(f64::sqrt);
        let isu = su.map(|v| 1.0 / v);
        let a = split.mu1.coeff(E1);
        let b = split.mu1.coeff(E2);

        let vectors = [
            [zero.clone(), zero.clone(), isl.clone(), zero.clone()],
            [zero.clone(), zero.clone(), zero.clone(), isl],
            [isu.clone(), zero.clone(), -&(a * &isu), b * &isu],
            [zero.clone(), isu.clone(), -&(b * &isu), -&(a * &isu)],
        ];
        let coframe = [
            split.mu1.scale_by(&sl),
            split.mu2.scale_by(&sl),
            InvariantForm::monomial(E1, su.clone()),
            InvariantForm::monomial(E2, su),
        ];
        Self { vectors, coframe }
    }

    pub fn grid(&self) -> BaseGrid {
        self.vectors[0][0].grid()
    }

    /// Components of `F_a` at grid point `k`.
    pub fn vector_at(&self, a: usize, k: usize) -> [f64; 4] {
        std::array::from_fn(|i| self.vectors[a][i].values()[k])
    }

    /// `F_a(f)` for a basic function with precomputed gradient.
    fn directional(&self, a: usize, fx: &ScalarField, fy: &ScalarField) -> ScalarField {
        let vx = &self.vectors[a][0];
        let vy = &self.vectors[a][1];
        let values = (0..fx.values().len())
            .map(|k| vx.values()[k] * fx.values()[k] + vy.values()[k] * fy.values()[k])
            .collect();
        ScalarField::from_values(fx.grid(), values).expect("grid length")
    }

    /// Components of a 2-form in this frame: `β(F_a, F_b)`.
    pub fn frame_components(&self, beta: &InvariantForm) -> [[ScalarField; 4]; 4] {
        let grid = self.grid();
        let mut out: [[ScalarField; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| ScalarField::zeros(grid)));
        for a in 0..4 {
            for b in (a + 1)..4 {
                let values = (0..grid.len())
                    .map(|k| beta.eval_at(k, &[self.vector_at(a, k), self.vector_at(b, k)]))
                    .collect();
                let f = ScalarField::from_values(grid, values).expect("grid length");
                out[b][a] = -&f;
                out[a][b] = f;
            }
        }
        out
    }
}

/// Rank-3 array of frame coefficients, `T[a][b][c]`.
#[derive(Debug, Clone)]
pub struct FrameTensor {
    data: Vec<ScalarField>,
}

impl FrameTensor {
    fn from_fn(f: impl Fn(usize, usize, usize) -> ScalarField) -> Self {
        let mut data = Vec::with_capacity(64);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    data.push(f(a, b, c));
                }
            }
        }
        Self { data }
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &ScalarField {
        &self.data[16 * a + 4 * b + c]
    }

    pub fn at(&self, a: usize, b: usize, c: usize, k: usize) -> f64 {
        self.get(a, b, c).values()[k]
    }
}

#[derive(Debug, Clone)]
pub struct CurvaturePackage {
    pub frame: OrthonormalFrame,
    /// `c_abc = g([F_a, F_b], F_c)`.
    pub structure: FrameTensor,
    pub levi_civita: FrameTensor,
    pub bismut: FrameTensor,
    /// `H = −dω(J·,J·,J·)`.
    pub torsion: InvariantForm,
    pub ricci_form: InvariantForm,
    pub ricci_11: InvariantForm,
    pub scalar: ScalarField,
    /// `ρ(F_a, F_b)`.
    pub ricci_frame: [[ScalarField; 4]; 4],
}

pub fn bismut_ricci(m: &MetricState) -> Result<CurvaturePackage> {
    let split = metric_split(m)?;
    bismut_ricci_with_split(m, &split)
}

pub fn bismut_ricci_with_split(m: &MetricState, split: &MetricSplit) -> Result<CurvaturePackage> {
    let grid = m.grid();
    let n = grid.len();
    let frame = OrthonormalFrame::new(split);

    let dcoframe: Vec<[[ScalarField; 4]; 4]> = frame
        .coframe
        .iter()
        .map(|f| f.exterior_d().map(|d| frame.frame_components(&d)))
        .collect::<Result<_>>()?;
    let structure = FrameTensor::from_fn(|a, b, c| -&dcoframe[c][a][b]);

    let levi_civita = FrameTensor::from_fn(|a, b, c| {
        let s = structure.get(a, b, c) - structure.get(a, c, b);
        (&s - structure.get(b, c, a)).scale(0.5)
    });

    let torsion = bismut_torsion(m)?;
    // H is totally skew: evaluate a < b < c and fill by permutation sign
    let skew: Vec<ScalarField> = (0..4)
        .flat_map(|a| ((a + 1)..4).flat_map(move |b| ((b + 1)..4).map(move |c| (a, b, c))))
        .map(|(a, b, c)| {
            let values = (0..n)
                .map(|k| torsion.eval_at(k, &[frame.vector_at(a, k), frame.vector_at(b, k), frame.vector_at(c, k)]))
                .collect();
            ScalarField::from_values(grid, values).expect("grid length")
        })
        .collect();
    let zero = ScalarField::zeros(grid);
    let torsion_frame = FrameTensor::from_fn(|a, b, c| {
        if a == b || b == c || a == c {
            return zero.clone();
        }
        let mut idx = [a, b, c];
        let mut sign = 1.0;
        for i in 0..3 {
            for j in 0..2 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        // position of the missing index among (012, 013, 023, 123)
        let missing = 6 - idx[0] - idx[1] - idx[2];
        skew[3 - missing].scale(sign)
    });
    let bismut = FrameTensor::from_fn(|a, b, c| {
        levi_civita
            .get(a, b, c)
            .zip_map(torsion_frame.get(a, b, c), |g, h| g + TORSION_WEIGHT * h)
    });

    // base gradients of Γ^B_bcd, c < d
    let keys: Vec<(usize, usize, usize)> = (0..4)
        .flat_map(|b| (0..4).flat_map(move |c| ((c + 1)..4).map(move |d| (b, c, d))))
        .collect();
    let grads: Vec<(ScalarField, ScalarField)> = keys
        .par_iter()
        .map(|&(b, c, d)| gradient(bismut.get(b, c, d)))
        .collect::<Result<_>>()?;
    let grad = |b: usize, c: usize, d: usize| -> &(ScalarField, ScalarField) {
        let pos = keys.iter().position(|&key| key == (b, c, d)).expect("c < d");
        &grads[pos]
    };

    // R_abcd for the two J-planes (c,d) ∈ {(0,1), (2,3)}
    let riemann = |a: usize, b: usize, c: usize, d: usize| -> ScalarField {
        let (gbx, gby) = grad(b, c, d);
        let (gax, gay) = grad(a, c, d);
        let da = frame.directional(a, gbx, gby);
        let db = frame.directional(b, gax, gay);
        let values = (0..n)
            .map(|k| {
                let mut r = da.values()[k] - db.values()[k];
                for e in 0..4 {
                    r += bismut.at(b, c, e, k) * bismut.at(a, e, d, k)
                        - bismut.at(a, c, e, k) * bismut.at(b, e, d, k)
                        - structure.at(a, b, e, k) * bismut.at(e, c, d, k);
                }
                r
            })
            .collect();
        ScalarField::from_values(grid, values).expect("grid length")
    };

    let mut ricci_frame: [[ScalarField; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    for a in 0..4 {
        for b in (a + 1)..4 {
            let r = &riemann(a, b, 0, 1) + &riemann(a, b, 2, 3);
            ricci_frame[b][a] = r.clone();
            ricci_frame[a][b] = -&r;
        }
    }

    let mut ricci_form = InvariantForm::zero(grid, 2)?;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let term = frame.coframe[a].wedge(&frame.coframe[b])?.scale_by(&ricci_frame[a][b]);
            ricci_form = ricci_form.add(&term)?;
        }
    }
    let ricci_11 = ricci_form.p11_projection()?;
    let scalar = &ricci_frame[0][1] + &ricci_frame[2][3];

    Ok(CurvaturePackage {
        frame,
        structure,
        levi_civita,
        bismut,
        torsion,
        ricci_form,
        ricci_11,
        scalar,
        ricci_frame,
    })
}

impl CurvaturePackage {
    /// `‖ρ − s ω̌‖∞`.
    pub fn horizontal_defect(&self, split: &MetricSplit) -> f64 {
        let s_check = split.omega_check.scale_by(&self.scalar);
        self.ricci_form.sub(&s_check).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// Transverse part `ρ(F₂, F₃) f²∧f³`, for diagnostics.
    pub fn transverse_ricci(&self) -> InvariantForm {
        InvariantForm::monomial(E12, self.ricci_frame[2][3].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{E12, E34};
    use std::f64::consts::PI;

    fn grid() -> BaseGrid {
        BaseGrid::new(32).unwrap()
    }

    fn wavy() -> MetricState {
        let g = grid();
        MetricState::new(
            ScalarField::from_fn(g, |x, y| 2.0 + 0.3 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos()),
            ScalarField::from_fn(g, |x, _| 1.2 + 0.1 * (2.0 * PI * x).cos()),
            ScalarField::from_fn(g, |x, y| 0.3 * (2.0 * PI * (x + y)).cos()),
            ScalarField::from_fn(g, |_, y| 0.2 * (2.0 * PI * y).sin()),
        )
        .unwrap()
    }

    #[test]
    fn frame_is_orthonormal_and_adapted() {
        let m = wavy();
        let split = metric_split(&m).unwrap();
        let frame = OrthonormalFrame::new(&split);
        let cs = crate::forms::KODAIRA_THURSTON;
        for k in [0, 37, 200] {
            let gm = m.metric_at(k);
            for a in 0..4 {
                let va = frame.vector_at(a, k);
                for b in 0..4 {
                    let vb = frame.vector_at(b, k);
                    let mut ip = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            ip += va[i] * gm[i][j] * vb[j];
                        }
                    }
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-13, "g(F{a},F{b}) = {ip}");
                    let f = frame.coframe[b].eval_at(k, &[va]);
                    assert!((f - expect).abs() < 1e-13);
                }
                let (t, s) = FRAME_J[a];
                let jv = cs.j_vector(va);
                let target = frame.vector_at(t, k);
                for i in 0..4 {
                    assert!((jv[i] - s * target[i]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn bismut_connection_is_hermitian_with_skew_torsion() {
        let m = wavy();
        let pkg = bismut_ricci(&m).unwrap();
        let n = m.grid().len();
        for k in (0..n).step_by(17) {
            for a in 0..4 {
                for b in 0..4 {
                    let (jb, sb) = FRAME_J[b];
                    for c in 0..4 {
                        let (jc, sc) = FRAME_J[c];
                        let lhs = sb * sc * pkg.bismut.at(a, jb, jc, k);
                        assert!((lhs - pkg.bismut.at(a, b, c, k)).abs() < 1e-10, "{a}{b}{c} {lhs} {}", pkg.bismut.at(a, b, c, k));
                        // metric: antisymmetric in the last pair
                        assert!((pkg.bismut.at(a, b, c, k) + pkg.bismut.at(a, c, b, k)).abs() < 1e-12);
                        // torsion g(T(F_a,F_b),F_c) is −H and totally skew
                        let t = pkg.bismut.at(a, b, c, k) - pkg.bismut.at(b, a, c, k) - pkg.structure.at(a, b, c, k);
                        let h = pkg.torsion.eval_at(
                            k,
                            &[pkg.frame.vector_at(a, k), pkg.frame.vector_at(b, k), pkg.frame.vector_at(c, k)],
                        );
                        assert!((t + h).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn structure_constants_match_vector_brackets() {
        // [F_a, F_b] from the vector-field formula, using [E₁, E₂] = E₃
        let m = wavy();
        let pkg = bismut_ricci(&m).unwrap();
        let frame = &pkg.frame;
        let grads: Vec<Vec<(ScalarField, ScalarField)>> = (0..4)
            .map(|a| (0..4).map(|i| gradient(&frame.vectors[a][i]).unwrap()).collect())
            .collect();
        let k = 123;
        for a in 0..4 {
            for b in 0..4 {
                let va = frame.vector_at(a, k);
                let vb = frame.vector_at(b, k);
                let mut w = [0.0; 4];
                for j in 0..4 {
                    let dir = |v: [f64; 4], g: &(ScalarField, ScalarField)| v[0] * g.0.values()[k] + v[1] * g.1.values()[k];
                    w[j] = dir(va, &grads[b][j]) - dir(vb, &grads[a][j]);
                }
                w[2] += va[0] * vb[1] - va[1] * vb[0];
                for c in 0..4 {
                    let proj = frame.coframe[c].eval_at(k, &[w]);
                    assert!((proj - pkg.structure.at(a, b, c, k)).abs() < 1e-10, "{a}{b}{c}: {proj} vs {}", pkg.structure.at(a, b, c, k));
                }
            }
        }
    }

    #[test]
    fn standard_state_ricci() {
        let g = grid();
        let m = MetricState::homogeneous(g, 1.0, 1.0, 0.0, 0.0);
        let pkg = bismut_ricci(&m).unwrap();
        let expect = InvariantForm::unit(g, E12).scale(-1.0);
        assert!(pkg.ricci_form.sub(&expect).unwrap().max_abs() < 1e-12);
        assert!((pkg.scalar.mean() + 1.0).abs() < 1e-12);
        assert!(pkg.ricci_form.sub(&pkg.ricci_11).unwrap().max_abs() < 1e-12);
        assert!(pkg.ricci_form.coeff(E34).max_abs() < 1e-12);
    }
}
