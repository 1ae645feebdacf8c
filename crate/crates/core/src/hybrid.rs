//! Shallow k-d tree plus a global macro-cell occupancy grid.

use crate::kdtree::{build_kdtree, BuildParams, KdTree};
use crate::svt::{MacroGrid, SvtGrid, MACRO_CELL_SIZE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridGrid {
    pub tree: KdTree,
    pub grid: MacroGrid,
}

/// The grid is resampled from the same summed volume tables that drive the
/// shallow tree, one box count per 16³ cell.
pub fn build_hybrid(g: &SvtGrid) -> HybridGrid {
    let tree = build_kdtree(g, &BuildParams::shallow()).expect("shallow params are valid");
    let grid = MacroGrid::from_svt(g, MACRO_CELL_SIZE);
    HybridGrid { tree, grid }
}
