//! Rotationally symmetric metrics on a compactified radial grid and their curvature.

pub mod brute;
pub mod cartesian;
pub mod curvature;
pub mod grid;
pub mod metric;
pub mod stencil;

pub use brute::{brute_force_curvature, brute_force_curvature_with_step};
pub use cartesian::{components_from_pair, to_cartesian_components, CartesianComponents, RadialPair};
pub use curvature::{
    curvature_from_jets, curvature_of, curvature_with, gradient_norm_sq, laplacian, point_curvature, CurvatureFields,
    PointCurvature,
};
pub use grid::{Compactification, RadialGrid};
pub use metric::{ball_volume, sphere_area, AsymptoticProfile, PointJet, QuotientStructure, RadialJets, WarpedMetric};
pub use stencil::{InnerBoundary, JetBoundary};
