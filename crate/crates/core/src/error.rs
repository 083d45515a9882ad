use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution {0} is not a power of two >= 8")]
    InvalidGrid(usize),

    #[error("expected {expected} grid values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} at grid index ({ix}, {iy})")]
    NonFinite { ix: usize, iy: usize, value: f64 },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("form degree {0} is out of range 0..=4")]
    InvalidDegree(usize),

    #[error("wedge of degrees {0} and {1} overflows dimension 4")]
    DegreeOverflow(usize, usize),

    #[error("operation needs degree {expected}, got {found}")]
    WrongDegree { expected: &'static str, found: usize },

    #[error("form is not basic: max |V ⌟ β| = {max_contraction:e}")]
    NotBasic { max_contraction: f64 },

    #[error("metric is not positive at grid index ({ix}, {iy}): margin {margin:e}")]
    Positivity { ix: usize, iy: usize, margin: f64 },

    #[error("transverse form degenerates at grid index ({ix}, {iy}): |ω̌| = {value:e}")]
    DegenerateTransverse { ix: usize, iy: usize, value: f64 },

    #[error("2-form is not J-invariant (decomposition residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("Lee-form system is singular at ({ix}, {iy}) (condition estimate {condition:e})")]
    SingularLeeSystem { ix: usize, iy: usize, condition: f64 },

    #[error("source term has non-zero mean {mean:e}; Poisson problem is incompatible")]
    MeanCompatibility { mean: f64 },

    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
    },
}
