//! Exterior algebra of t-invariant forms on the Kodaira-Thurston model.
//!
//! Forms are written in the global left-invariant coframe `(e¹, e², e³, e⁴)`
//! with structure `de¹ = de² = de⁴ = 0`, `de³ = −e¹∧e²`. The base coordinates
//! are `e¹ = dx`, `e² = dy`; the vertical generators `V₁`, `V₂` are dual to
//! `e³`, `e⁴`. Coefficients are basic scalar fields on the base torus, so
//! `d(f e^I) = df ∧ e^I + f de^I` with `df = ∂ₓf e¹ + ∂ᵧf e²`.
//!
//! `e¹∧e²∧e³∧e⁴` is the positive orientation.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{gradient, BaseGrid, ScalarField};

/// Bitmask of an increasing multi-index: bit `i` is `e^{i+1}`.
pub type MultiIndex = u8;

pub const E1: MultiIndex = 0b0001;
pub const E2: MultiIndex = 0b0010;
pub const E3: MultiIndex = 0b0100;
pub const E4: MultiIndex = 0b1000;
pub const E12: MultiIndex = E1 | E2;
pub const E13: MultiIndex = E1 | E3;
pub const E14: MultiIndex = E1 | E4;
pub const E23: MultiIndex = E2 | E3;
pub const E24: MultiIndex = E2 | E4;
pub const E34: MultiIndex = E3 | E4;
pub const E1234: MultiIndex = 0b1111;

const BASIS: [&[MultiIndex]; 5] = [
    &[0],
    &[E1, E2, E3, E4],
    &[E12, E13, E14, E23, E24, E34],
    &[E1 | E2 | E3, E1 | E2 | E4, E1 | E3 | E4, E2 | E3 | E4],
    &[E1234],
];

/// Increasing multi-indices of degree `k` in lexicographic order.
pub fn basis(k: usize) -> &'static [MultiIndex] {
    BASIS[k]
}

fn slot(mask: MultiIndex) -> usize {
    let k = mask.count_ones() as usize;
    BASIS[k].iter().position(|&m| m == mask).expect("valid mask")
}

/// Product of two basis monomials: `e^I ∧ e^J = sign · e^{I∪J}`.
pub fn wedge_monomials(i: MultiIndex, j: MultiIndex) -> Option<(MultiIndex, f64)> {
    if i & j != 0 {
        return None;
    }
    // count pairs (a in I, b in J) with b < a
    let mut swaps = 0;
    for a in 0..4 {
        if i & (1 << a) != 0 {
            swaps += (j & ((1u8 << a) - 1)).count_ones();
        }
    }
    Some((i | j, if swaps % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Structure data of the fixed global coframe.
#[derive(Debug, Clone, Copy)]
pub struct CoframeStructure {
    /// `de^i` as a single monomial with coefficient, or `None` when closed.
    pub differential: [Option<(MultiIndex, f64)>; 4],
    /// `J e^i = sign · e^{target}` on 1-forms, with `(Jα)(X) = −α(JX)`.
    pub complex_structure: [(usize, f64); 4],
}

pub const KODAIRA_THURSTON: CoframeStructure = CoframeStructure {
    differential: [None, None, Some((E12, -1.0)), None],
    complex_structure: [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
};

impl CoframeStructure {
    /// `d(e^I)` for a basis monomial, by the graded Leibniz rule.
    pub fn d_monomial(&self, mask: MultiIndex) -> Vec<(MultiIndex, f64)> {
        let mut out = Vec::new();
        let mut position = 0;
        for i in 0..4 {
            let bit = 1u8 << i;
            if mask & bit == 0 {
                continue;
            }
            if let Some((dmask, c)) = self.differential[i] {
                let before = mask & (bit - 1);
                let after = mask & !(bit | (bit - 1));
                let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
                if let Some((m1, s1)) = wedge_monomials(before, dmask) {
                    if let Some((m2, s2)) = wedge_monomials(m1, after) {
                        out.push((m2, sign * c * s1 * s2));
                    }
                }
            }
            position += 1;
        }
        out
    }

    /// `J` extended to monomials as an algebra automorphism.
    pub fn j_monomial(&self, mask: MultiIndex) -> (MultiIndex, f64) {
        let mut acc = (0u8, 1.0);
        for i in 0..4 {
            if mask & (1 << i) != 0 {
                let (t, s) = self.complex_structure[i];
                let (m, w) = wedge_monomials(acc.0, 1 << t).expect("J permutes the coframe");
                acc = (m, acc.1 * s * w);
            }
        }
        acc
    }

    /// Action of `J` on tangent vectors in the dual frame, from
    /// `e^i(JX) = −(Je^i)(X)`.
    pub fn j_vector(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, &(t, s)) in self.complex_structure.iter().enumerate() {
            // (J e^i) = s e^t  =>  e^i(JX) = -s X^t
            out[i] = -s * v[t];
        }
        out
    }
}

/// Vertical generators of the torus action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertical {
    V1,
    V2,
}

impl Vertical {
    fn frame_index(self) -> usize {
        match self {
            Vertical::V1 => 2,
            Vertical::V2 => 3,
        }
    }
}

/// A degree-`k` form with basic coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantForm {
    degree: usize,
    grid: BaseGrid,
    coeffs: Vec<ScalarField>,
}

impl InvariantForm {
    pub fn zero(grid: BaseGrid, degree: usize) -> Result<Self> {
        if degree > 4 {
            return Err(Error::InvalidDegree(degree));
        }
        Ok(Self {
            degree,
            grid,
            coeffs: vec![ScalarField::zeros(grid); BASIS[degree].len()],
        })
    }

    pub fn scalar(f: ScalarField) -> Self {
        Self {
            degree: 0,
            grid: f.grid(),
            coeffs: vec![f],
        }
    }

    /// `f · e^I`.
    pub fn monomial(mask: MultiIndex, f: ScalarField) -> Self {
        let mut out = Self::zero(f.grid(), mask.count_ones() as usize).expect("degree ≤ 4");
        out.coeffs[slot(mask)] = f;
        out
    }

    /// Constant-coefficient basis element `e^I`.
    pub fn unit(grid: BaseGrid, mask: MultiIndex) -> Self {
        Self::monomial(mask, ScalarField::constant(grid, 1.0))
    }

    /// Builds a form from `(multi-index, coefficient)` terms of equal degree.
    pub fn from_terms(grid: BaseGrid, degree: usize, terms: Vec<(MultiIndex, ScalarField)>) -> Result<Self> {
        let mut out = Self::zero(grid, degree)?;
        for (mask, f) in terms {
            if mask.count_ones() as usize != degree || mask > E1234 {
                return Err(Error::InvalidDegree(mask.count_ones() as usize));
            }
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let s = slot(mask);
            out.coeffs[s] = &out.coeffs[s] + &f;
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> BaseGrid {
        self.grid
    }

    pub fn coeff(&self, mask: MultiIndex) -> &ScalarField {
        assert_eq!(mask.count_ones() as usize, self.degree, "multi-index degree mismatch");
        &self.coeffs[slot(mask)]
    }

    pub fn set_coeff(&mut self, mask: MultiIndex, f: ScalarField) {
        assert_eq!(mask.count_ones() as usize, self.degree, "multi-index degree mismatch");
        self.coeffs[slot(mask)] = f;
    }

    /// `(multi-index, coefficient)` pairs in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &ScalarField)> {
        BASIS[self.degree].iter().copied().zip(self.coeffs.iter())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::WrongDegree {
                expected: "equal degrees",
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_coeffs(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_coeffs(other, |a, b| a - b))
    }

    fn zip_coeffs(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self {
            degree: self.degree,
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_coeffs(|f| f.scale(c))
    }

    /// Pointwise multiplication by a basic function.
    pub fn scale_by(&self, f: &ScalarField) -> Self {
        self.map_coeffs(|c| c * f)
    }

    fn map_coeffs(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            degree: self.degree,
            grid: self.grid,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Largest coefficient magnitude over all multi-indices and grid points.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    pub fn check_finite(&self) -> Result<()> {
        self.coeffs.iter().try_for_each(ScalarField::check_finite)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let degree = self.degree + other.degree;
        if degree > 4 {
            return Err(Error::DegreeOverflow(self.degree, other.degree));
        }
        let mut out = Self::zero(self.grid, degree)?;
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                if let Some((m, s)) = wedge_monomials(i, j) {
                    let k = slot(m);
                    out.coeffs[k] = out.coeffs[k].zip_map(&a.zip_map(b, |x, y| x * y), |acc, v| acc + s * v);
                }
            }
        }
        Ok(out)
    }

    pub fn exterior_d(&self) -> Result<Self> {
        if self.degree >= 4 {
            return Err(Error::WrongDegree {
                expected: "degree ≤ 3",
                found: self.degree,
            });
        }
        let mut out = Self::zero(self.grid, self.degree + 1)?;
        for (mask, f) in self.terms() {
            let (fx, fy) = gradient(f)?;
            for (dmask, df) in [(E1, fx), (E2, fy)] {
                if let Some((m, s)) = wedge_monomials(dmask, mask) {
                    let k = slot(m);
                    out.coeffs[k] = out.coeffs[k].zip_map(&df, |acc, v| acc + s * v);
                }
            }
            for (m, c) in KODAIRA_THURSTON.d_monomial(mask) {
                let k = slot(m);
                out.coeffs[k] = out.coeffs[k].zip_map(f, |acc, v| acc + c * v);
            }
        }
        Ok(out)
    }

    /// The coframe `J` extended as an algebra automorphism: identity on
    /// 0- and 4-forms, `(Jα)(X,…) = (−1)^k α(JX,…)` on `k`-forms.
    pub fn apply_j(&self) -> Self {
        let mut out = Self::zero(self.grid, self.degree).expect("same degree");
        for (mask, f) in self.terms() {
            let (m, s) = KODAIRA_THURSTON.j_monomial(mask);
            let k = slot(m);
            out.coeffs[k] = out.coeffs[k].zip_map(f, |acc, v| acc + s * v);
        }
        out
    }

    /// `(1,1)`-component `½(β + Jβ)` of a 2-form.
    pub fn p11_projection(&self) -> Result<Self> {
        if self.degree != 2 {
            return Err(Error::WrongDegree {
                expected: "degree 2",
                found: self.degree,
            });
        }
        Ok(self.add(&self.apply_j())?.scale(0.5))
    }

    /// Interior product with a vertical generator.
    pub fn contract(&self, v: Vertical) -> Result<Self> {
        self.contract_frame(v.frame_index())
    }

    /// Interior product with the dual frame vector `E_{index+1}`.
    pub fn contract_frame(&self, index: usize) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::WrongDegree {
                expected: "degree ≥ 1",
                found: 0,
            });
        }
        let bit = 1u8 << index;
        let mut out = Self::zero(self.grid, self.degree - 1)?;
        for (mask, f) in self.terms() {
            if mask & bit == 0 {
                continue;
            }
            let sign = if (mask & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let k = slot(mask & !bit);
            out.coeffs[k] = out.coeffs[k].zip_map(f, |acc, v| acc + sign * v);
        }
        Ok(out)
    }

    /// Largest vertical contraction, zero exactly for horizontal forms.
    pub fn vertical_leak(&self) -> f64 {
        if self.degree == 0 {
            return 0.0;
        }
        [Vertical::V1, Vertical::V2]
            .iter()
            .map(|&v| self.contract(v).map(|f| f.max_abs()).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    /// Integral over the base torus of a basic 2-form.
    pub fn base_integral(&self) -> Result<f64> {
        if self.degree != 2 {
            return Err(Error::WrongDegree {
                expected: "degree 2",
                found: self.degree,
            });
        }
        let leak = self.vertical_leak();
        if leak > 1e-12 {
            return Err(Error::NotBasic {
                max_contraction: leak,
            });
        }
        Ok(self.coeff(E12).integral())
    }

    /// Evaluates the form at grid point `k` on `degree` vectors given by
    /// their components in the frame dual to the coframe.
    pub fn eval_at(&self, k: usize, vectors: &[[f64; 4]]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        let mut total = 0.0;
        for (mask, f) in self.terms() {
            let mut idx = [0usize; 4];
            let mut len = 0;
            for i in 0..4 {
                if mask & (1 << i) != 0 {
                    idx[len] = i;
                    len += 1;
                }
            }
            total += f.values()[k] * alternating_det(&idx[..len], vectors);
        }
        total
    }
}

/// `det[v_r^{idx_c}]` for up to four vectors, by cofactor expansion along
/// the first vector.
fn alternating_det(idx: &[usize], vectors: &[[f64; 4]]) -> f64 {
    match idx.len() {
        0 => 1.0,
        1 => vectors[0][idx[0]],
        2 => vectors[0][idx[0]] * vectors[1][idx[1]] - vectors[0][idx[1]] * vectors[1][idx[0]],
        len => {
            let mut acc = 0.0;
            let mut rest = [0usize; 3];
            for c in 0..len {
                let mut r = 0;
                for (i, &v) in idx.iter().enumerate() {
                    if i != c {
                        rest[r] = v;
                        r += 1;
                    }
                }
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * vectors[0][idx[c]] * alternating_det(&rest[..len - 1], &vectors[1..]);
            }
            acc
        }
    }
}

impl fmt::Display for InvariantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, c) in self.terms() {
            if c.max_abs() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let digits: String = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| char::from(b'1' + i as u8)).collect();
            write!(f, "[{:.3e}..{:.3e}] e{}", c.min(), c.max(), digits)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
