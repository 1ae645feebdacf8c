//! Index kinds and the tagged index handed to the renderer.

use std::fmt;
use std::str::FromStr;

use crate::hybrid::{build_hybrid, HybridGrid};
use crate::kdtree::{build_kdtree, build_kdtree_binned, precompute_cell_boxes, BuildParams, KdTree};
use crate::lbvh::{build_lbvh, flag_bricks, Lbvh};
use crate::svt::{build_svt_grid, MacroGrid, DEFAULT_BRICK_SIZE, MACRO_CELL_SIZE};
use crate::{BinaryVolume, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Naive,
    Grid,
    Lbvh,
    KdShallow,
    KdDeepMls32,
    KdDeepMls128,
    KdBinnedMls32,
    Hybrid,
}

impl IndexKind {
    pub const ALL: [IndexKind; 8] = [
        IndexKind::Naive,
        IndexKind::Grid,
        IndexKind::Lbvh,
        IndexKind::KdShallow,
        IndexKind::KdDeepMls32,
        IndexKind::KdDeepMls128,
        IndexKind::KdBinnedMls32,
        IndexKind::Hybrid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexKind::Naive => "naive",
            IndexKind::Grid => "grid",
            IndexKind::Lbvh => "lbvh",
            IndexKind::KdShallow => "kd-shallow",
            IndexKind::KdDeepMls32 => "kd-deep-mls32",
            IndexKind::KdDeepMls128 => "kd-deep-mls128",
            IndexKind::KdBinnedMls32 => "kd-binned-mls32",
            IndexKind::Hybrid => "hybrid",
        }
    }

    /// Tree parameters for the k-d tree kinds.
    pub fn kd_params(self) -> Option<BuildParams> {
        match self {
            IndexKind::KdShallow => Some(BuildParams::shallow()),
            IndexKind::KdDeepMls32 => Some(BuildParams::deep(Some(32))),
            IndexKind::KdDeepMls128 => Some(BuildParams::deep(Some(128))),
            IndexKind::KdBinnedMls32 => Some(BuildParams::deep(Some(32)).binned()),
            _ => None,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown index kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpatialIndex {
    /// No skipping.
    Naive,
    Grid(MacroGrid),
    Lbvh(Lbvh),
    KdTree(KdTree),
    Hybrid(HybridGrid),
}

/// Builds the index of `kind` over a classification. Everything from the
/// binary flags on counts as build work, summed volume tables included.
pub fn build_index(kind: IndexKind, b: &BinaryVolume) -> Result<SpatialIndex> {
    Ok(match kind {
        IndexKind::Naive => SpatialIndex::Naive,
        IndexKind::Grid => SpatialIndex::Grid(MacroGrid::from_binary(b, MACRO_CELL_SIZE)),
        IndexKind::Lbvh => SpatialIndex::Lbvh(build_lbvh(&flag_bricks(b, crate::lbvh::DEFAULT_BRICK_SIZE)?)),
        IndexKind::KdShallow | IndexKind::KdDeepMls32 | IndexKind::KdDeepMls128 => {
            let params = kind.kd_params().expect("k-d kind");
            let g = build_svt_grid(b, DEFAULT_BRICK_SIZE);
            SpatialIndex::KdTree(build_kdtree(&g, &params)?)
        }
        IndexKind::KdBinnedMls32 => {
            let params = kind.kd_params().expect("k-d kind");
            let cells = precompute_cell_boxes(b, params.cell_size)?;
            SpatialIndex::KdTree(build_kdtree_binned(&cells, &params)?)
        }
        IndexKind::Hybrid => SpatialIndex::Hybrid(build_hybrid(&build_svt_grid(b, DEFAULT_BRICK_SIZE))),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IndexStats {
    pub node_count: usize,
    pub height: usize,
}

/// Node count and height (nodes on the longest path). Grids and the naive
/// index have no tree and report zeros; the hybrid reports its tree.
pub fn report_stats(index: &SpatialIndex) -> IndexStats {
    match index {
        SpatialIndex::Naive | SpatialIndex::Grid(_) => IndexStats::default(),
        SpatialIndex::Lbvh(t) => IndexStats { node_count: t.node_count(), height: t.height() },
        SpatialIndex::KdTree(t) => IndexStats { node_count: t.node_count(), height: t.height() },
        SpatialIndex::Hybrid(h) => IndexStats { node_count: h.tree.node_count(), height: h.tree.height() },
    }
}
