#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod cap;
pub mod curvature;
pub mod directions;
pub mod error;
pub mod floating;
pub mod genbody;
pub mod homothety;
pub mod polygon;
pub mod quadrature;
pub mod roots;
pub mod threshold;

pub use body::{lp_curvature, unit_ball_volume, BodyKind, BodySpec, Point};
pub use cap::{cap_volume, cut_level, CapConfig, CapSolver, CutResult};
pub use curvature::{c_constant, floating_curvature, limit_ratio, q_matrix, QMatrix};
pub use error::{Error, Result};
pub use floating::{apply_affine, floating_body, floating_body_with, FloatingBodyResult, FloatingHull, FloatingOptions};
pub use homothety::{homothety_defect, petty_scan, HomothetyReport, PettyScan};
pub use polygon::{hausdorff, PolygonChain, Vec2};
pub use threshold::{threshold, ThresholdInputs, ThresholdReport};
