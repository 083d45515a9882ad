//! Periodic base grid and fiber-constant scalar fields.
//!
//! The orbit space of the vertical torus action on the Kodaira-Thurston model
//! is a flat 2-torus `[0,1)²`. Every invariant quantity in this crate is a
//! [`ScalarField`] sampled on an `n × n` uniform grid over that torus, and all
//! base derivatives are trigonometric (Fourier) derivatives.
//!
//! Storage is row-major with `x` as the row index: the value at
//! `(x_i, y_j) = (i/n, j/n)` lives at `values[i * n + j]`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the unit 2-torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseGrid {
    n: usize,
}

impl BaseGrid {
    pub const MIN_RESOLUTION: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_RESOLUTION || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinate of grid line `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i % self.n) as f64 * self.spacing()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        (ix % self.n) * self.n + (iy % self.n)
    }

    /// Inverse of [`BaseGrid::index`].
    pub fn point(&self, k: usize) -> (usize, usize) {
        (k / self.n, k % self.n)
    }
}

impl fmt::Display for BaseGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{n}x{n}", n = self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A t-invariant function on the 4-manifold, i.e. a function of the base
/// point only.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: BaseGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: BaseGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: BaseGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: BaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.point(k);
                f(grid.coord(i), grid.coord(j))
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: BaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> BaseGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Population variance over grid points.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let dev: Vec<f64> = self.values.iter().map(|v| (v - m) * (v - m)).collect();
        pairwise_sum(&dev) / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rejects the field if any entry is NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => {
                let (ix, iy) = self.grid.point(k);
                Err(Error::NonFinite {
                    ix,
                    iy,
                    value: self.values[k],
                })
            }
        }
    }

    /// Trapezoidal integral over the unit torus. Exact for trigonometric
    /// polynomials resolved by the grid.
    pub fn integral(&self) -> f64 {
        self.mean()
    }

    pub fn derivative(&self, axis: Axis) -> Result<Self> {
        spectral_derivative(self, axis)
    }
}

/// Pairwise summation; exact for constant data on power-of-two grids.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => return 0.0,
        1 => return v[0],
        _ => {}
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

// --- spectral kernel -------------------------------------------------------

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Arc<FftPair>>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> Arc<FftPair> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(FftPair {
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    })
}

/// Transform along both axes in place. `inverse` includes the 1/n² scaling.
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let pair = plans(n);
    let fft = if inverse { &pair.inverse } else { &pair.forward };
    // rows are contiguous (fixed x, varying y)
    fft.process(data);
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            column[i] = data[i * n + j];
        }
        fft.process(&mut column);
        for i in 0..n {
            data[i * n + j] = column[i];
        }
    }
    if inverse {
        let s = 1.0 / (n * n) as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
}

/// Signed integer wavenumber of FFT bin `m`.
fn wavenumber(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Fourier coefficients of a real field (unnormalized forward transform).
pub(crate) fn spectrum(f: &ScalarField) -> Vec<Complex64> {
    let n = f.grid.n();
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut data, n, false);
    data
}

fn synthesize(grid: BaseGrid, mut data: Vec<Complex64>) -> ScalarField {
    fft2(&mut data, grid.n(), true);
    ScalarField {
        grid,
        values: data.into_iter().map(|z| z.re).collect(),
    }
}

fn derivative_from_spectrum(grid: BaseGrid, spec: &[Complex64], axis: Axis) -> ScalarField {
    let n = grid.n();
    let out = spec
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let (i, j) = grid.point(k);
            let m = match axis {
                Axis::X => i,
                Axis::Y => j,
            };
            // the Nyquist mode has no odd-derivative counterpart on the grid
            if 2 * m == n {
                return Complex64::new(0.0, 0.0);
            }
            let kk = 2.0 * PI * wavenumber(m, n) as f64;
            z * Complex64::new(0.0, kk)
        })
        .collect();
    synthesize(grid, out)
}

/// Partial derivative of a periodic field by trigonometric differentiation.
pub fn spectral_derivative(f: &ScalarField, axis: Axis) -> Result<ScalarField> {
    f.check_finite()?;
    Ok(derivative_from_spectrum(f.grid, &spectrum(f), axis))
}

/// Both partial derivatives from a single forward transform.
pub fn gradient(f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    f.check_finite()?;
    let spec = spectrum(f);
    Ok((
        derivative_from_spectrum(f.grid, &spec, Axis::X),
        derivative_from_spectrum(f.grid, &spec, Axis::Y),
    ))
}

/// Solves `Δφ = f` on the torus for zero-mean `f`, returning the zero-mean
/// solution. `f` must integrate to zero within `mean_tol`.
pub fn solve_poisson(f: &ScalarField, mean_tol: f64) -> Result<ScalarField> {
    f.check_finite()?;
    let mean = f.mean();
    if mean.abs() > mean_tol {
        return Err(Error::MeanCompatibility { mean });
    }
    let grid = f.grid;
    let n = grid.n();
    let spec = spectrum(f);
    let out = spec
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let (i, j) = grid.point(k);
            if i == 0 && j == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let kx = 2.0 * PI * wavenumber(i, n) as f64;
            let ky = 2.0 * PI * wavenumber(j, n) as f64;
            -z / (kx * kx + ky * ky)
        })
        .collect();
    Ok(synthesize(grid, out))
}
