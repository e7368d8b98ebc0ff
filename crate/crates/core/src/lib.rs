//! Calculus on Carnot groups in exponential coordinates: exact structure
//! constants, BCH group law, complementary splittings, intrinsic graphs,
//! Pansu differentials, and covering estimates for the area formula of
//! intrinsically Lipschitz graphs.

pub mod algebra;
pub mod calculus;
pub mod catalog;
pub mod counterexample;
pub mod graph;
pub mod group;
pub mod linalg;
pub mod measure;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod splitting;

pub use algebra::{validate_algebra, AlgebraError, StratifiedAlgebra, Subspace, ValidationReport, Violation};
pub use calculus::{
    blowup_tangent_check, intrinsic_diff, pansu_diff, Arithmetic, CalculusError, DiffConfig, DifferentiabilityReport,
};
pub use graph::{
    hom_from_linear, intrinsic_lip_constant, linear_from_hom, Domain, GraphError, GraphFunction, HomogeneousHom,
    IntrinsicLinearMap, Rule,
};
pub use group::{CarnotGroup, GroupError, GroupPoint};
pub use measure::{area_check, classical_area_oracle, curve_length, hausdorff_content, jacobian, MeasureEstimate};
pub use scalar::{Rational, Scalar};
pub use splitting::{make_splitting, Splitting, SplittingError};
