//! Splitting data, Lee form and Bismut curvature of invariant metrics.

mod curvature;
mod metric;

pub use curvature::{
    bismut_ricci, bismut_ricci_with_split, CurvaturePackage, FrameTensor, OrthonormalFrame, FRAME_J, TORSION_WEIGHT,
};
pub use metric::{
    bismut_torsion, characteristic_numbers, lee_form, metric_split, MetricSplit, MetricState, TRANSVERSE_DEGENERACY,
};
