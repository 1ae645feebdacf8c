//! Empty space skipping for structured scalar volumes.
//!
//! The crate builds spatial indices over the visible voxels of a volume
//! (a linear BVH over bricks, top-down k-d trees driven by summed volume
//! tables, and a hybrid of a shallow k-d tree with a macro-cell grid),
//! renders them with an absorption+emission ray marcher that can use any
//! of them to skip empty space, and benchmarks build time against
//! rendering throughput.

// Negated float comparisons are used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod classify;
mod error;
pub mod geom;
pub mod hybrid;
pub mod index;
pub mod kdtree;
pub mod lbvh;
pub mod morton;
pub mod render;
pub mod svt;
pub mod tf;
pub mod volume;

#[cfg(test)]
mod testutil;

pub use classify::{classify, occupancy, BinaryVolume};
pub use error::{Error, Result};
pub use geom::Aabb;
pub use hybrid::{build_hybrid, HybridGrid};
pub use index::{build_index, report_stats, IndexKind, IndexStats, SpatialIndex};
pub use kdtree::{build_kdtree, BuildParams, KdTree};
pub use lbvh::{build_lbvh, flag_bricks, BrickSet, Lbvh};
pub use svt::{build_svt_grid, MacroGrid, SvtGrid};
pub use tf::TransferFunction;
pub use volume::Volume;

/// Voxels per axis.
pub type Dims = [u32; 3];

#[inline]
pub(crate) fn linear_index(dims: Dims, x: u32, y: u32, z: u32) -> usize {
    x as usize + dims[0] as usize * (y as usize + dims[1] as usize * z as usize)
}

#[inline]
pub(crate) fn voxel_count(dims: Dims) -> usize {
    dims.iter().map(|&d| d as usize).product()
}
