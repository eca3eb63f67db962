//! Rectangular treemap layouts: subdivision heuristics, spiral layouts, an
//! exact perimeter optimizer, and layout quality and stability metrics.

pub mod algorithm;
pub mod error;
pub mod geometry;
pub mod layout;
pub mod metrics;
pub mod optimizer;
pub mod spiral;
pub mod subdivision;
pub mod tree;

pub use algorithm::{Algorithm, AlgorithmOptions, OptOptions};
pub use error::{Error, Result};
pub use geometry::{Rect, Vec2};
pub use layout::Layout;
pub use tree::{AreaList, LeafId, WeightedTree};
