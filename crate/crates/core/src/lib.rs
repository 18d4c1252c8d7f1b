//! Image segmentation by relaxing a virtual elastic mesh.
//!
//! Every pixel carries a height `z`. Adjacent pixels repel each other in
//! proportion to their greyscale difference and are pulled back together by
//! an elastic term proportional to their height difference. Iterating the
//! synchronous update until the mesh is balanced leaves bright areas raised
//! and dark areas sunk; the sign of the height then splits the image into
//! regions, which can be greedily merged down to a target count.
//!
//! Pipeline:
//!
//! 1. [`mesh::simulate`] relaxes a [`HeightField`] over a [`Grid`].
//! 2. [`segmentation::sign_map`] and [`segmentation::cluster_regions`] label
//!    same-sign 4-connected regions.
//! 3. [`merging::merge_to_count`] fuses adjacent regions with the closest
//!    mean greyscale.
//!
//! [`imageio`] handles PGM input and artifact export, [`testgen`] builds
//! synthetic test images and [`baselines`] holds a k-means comparison.

pub mod baselines;
pub mod cli;
mod error;
pub mod grid;
pub mod imageio;
pub mod merging;
pub mod mesh;
pub mod segmentation;
pub mod testgen;

pub use error::{Error, Result};
pub use grid::{Grid, HeightField, Pixel};
pub use mesh::{simulate, ConvergenceTrace, SimParams, SimulationResult};
pub use segmentation::{LabelMap, RegionTable, SignMap};
