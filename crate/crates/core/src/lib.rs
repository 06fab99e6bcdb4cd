//! Five-dimensional extended tensors for rigid-motion mechanics.

pub mod bivector;
pub mod derivative;
pub mod error;
pub mod frame;
pub mod lagrange;
pub mod metric;
pub mod motion;
pub mod poly;
pub mod rigid_body;
pub mod tensor;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use frame::{Frame, FrameKind};
pub use metric::{Metric, MetricSpec};
pub use motion::{InfinitesimalMotion, MotionParams, MotionTensor};
pub use poly::{FieldKind, Poly, PolyField, PolyMatrix};
pub use tensor::ExtTensor;
