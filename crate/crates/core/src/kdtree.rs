//! Top-down k-d trees over SVT occupancy.
//!
//! Every node stores the tight box of the visible voxels in its region. A
//! node is split at the plane minimizing the summed volume of the two tight
//! child boxes, provided that sum is strictly smaller than the node's own
//! volume. Two plane finders exist: a full sweep over every voxel boundary
//! (answered from the summed volume tables) and a binned finder whose
//! candidates sit on the macro-cell raster, so child boxes can be reduced
//! from precomputed per-cell tight boxes.

use rayon::prelude::*;

use crate::geom::{union_opt, volume_opt, Aabb};
use crate::svt::{build_svt_grid, cell_box};
use crate::{morton, BinaryVolume, Dims, Error, Result, SvtGrid};

/// Shallow trees stop splitting at this fraction (in percent) of the root volume.
pub const SHALLOW_HALT_PERCENT: u64 = 10;
/// Deep trees stop splitting at this many voxels (8³).
pub const DEEP_HALT_VOLUME: u64 = 512;
pub const DEFAULT_BINS: u32 = 4;
pub const DEFAULT_CELL_SIZE: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Shallow,
    Deep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builder {
    /// Every voxel boundary is a candidate.
    Sweep,
    /// `bins - 1` candidates per axis, snapped to the cell raster.
    Binned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BuildParams {
    pub mode: Mode,
    /// Largest leaf extent per axis; deep mode only.
    pub max_leaf_size: Option<u32>,
    pub builder: Builder,
    pub bins: u32,
    pub cell_size: u32,
}

impl BuildParams {
    pub fn shallow() -> Self {
        BuildParams {
            mode: Mode::Shallow,
            max_leaf_size: None,
            builder: Builder::Sweep,
            bins: DEFAULT_BINS,
            cell_size: DEFAULT_CELL_SIZE,
        }
    }

    pub fn deep(max_leaf_size: Option<u32>) -> Self {
        BuildParams { mode: Mode::Deep, max_leaf_size, ..Self::shallow() }
    }

    pub fn binned(mut self) -> Self {
        self.builder = Builder::Binned;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_leaf_size.is_some() && self.mode == Mode::Shallow {
            return Err(Error::Config("max leaf size only applies to deep trees".into()));
        }
        if let Some(m) = self.max_leaf_size {
            if m < 2 {
                return Err(Error::Config("max leaf size must be at least 2".into()));
            }
        }
        if self.builder == Builder::Binned {
            if self.bins < 2 {
                return Err(Error::Config("binned builder needs at least 2 bins".into()));
            }
            if self.cell_size < 2 {
                return Err(Error::Config("cell size must be at least 2".into()));
            }
            if self.max_leaf_size.is_some_and(|m| m < self.cell_size) {
                return Err(Error::Config("max leaf size must not be smaller than the cell size".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Plane {
    pub axis: usize,
    pub pos: u32,
    pub cost: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    pub axis: u8,
    pub pos: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KdNode {
    /// Tight box of the visible voxels in the node's region.
    pub bbox: Aabb,
    /// `None` for leaves.
    pub split: Option<Split>,
    /// Below / above the plane; an empty side has no node.
    pub children: [Option<u32>; 2],
}

impl KdNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KdTree {
    pub nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn root(&self) -> Option<u32> {
        (!self.nodes.is_empty()).then_some(0)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on the longest root-to-leaf path; a lone root has height 1.
    pub fn height(&self) -> usize {
        let Some(root) = self.root() else { return 0 };
        let mut best = 0;
        let mut stack = vec![(root, 1usize)];
        while let Some((i, depth)) = stack.pop() {
            best = best.max(depth);
            for c in self.nodes[i as usize].children.into_iter().flatten() {
                stack.push((c, depth + 1));
            }
        }
        best
    }

    pub fn leaves(&self) -> impl Iterator<Item = &KdNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }
}

/// Per-cell tight boxes in Morton order of the cell coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBoxList {
    pub dims: Dims,
    pub cell_size: u32,
    pub cells_dims: [u32; 3],
    pub cells: Vec<CellBox>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellBox {
    pub coord: [u32; 3],
    pub morton: u32,
    pub tight: Option<Aabb>,
}

/// Tight box per macro cell. The per-cell summed volume tables only live for
/// the duration of this call.
pub fn precompute_cell_boxes(b: &BinaryVolume, cell_size: u32) -> Result<CellBoxList> {
    assert!(cell_size >= 2, "cell size must be at least 2");
    let transient = build_svt_grid(b, cell_size);
    CellBoxList::from_svt(&transient, cell_size)
}

impl CellBoxList {
    /// Cell boxes of `cell_size` answered by shrinking on an existing grid.
    pub fn from_svt(g: &SvtGrid, cell_size: u32) -> Result<Self> {
        let dims = g.dims();
        let cells_dims = dims.map(|d| d.div_ceil(cell_size));
        if cells_dims.iter().any(|&d| d > morton::AXIS_LIMIT) {
            return Err(Error::Range(format!("cell grid {cells_dims:?} too large for 30-bit codes")));
        }
        let n: usize = cells_dims.iter().map(|&d| d as usize).product();
        let mut cells: Vec<CellBox> = (0..n)
            .into_par_iter()
            .map(|i| {
                let coord = [
                    (i % cells_dims[0] as usize) as u32,
                    ((i / cells_dims[0] as usize) % cells_dims[1] as usize) as u32,
                    (i / (cells_dims[0] as usize * cells_dims[1] as usize)) as u32,
                ];
                CellBox {
                    coord,
                    morton: morton::encode_unchecked(coord[0], coord[1], coord[2]),
                    tight: g.shrink_to_occupied(&cell_box(dims, cell_size, coord)),
                }
            })
            .collect();
        cells.sort_unstable_by_key(|c| c.morton);
        Ok(CellBoxList { dims, cell_size, cells_dims, cells })
    }

    /// Tight box of the visible voxels inside `region`.
    ///
    /// Only the Morton range between the region's first and last cell is
    /// scanned. Exact whenever every cell cut by the region's faces has its
    /// tight box on one side of the cut, which holds for cell-aligned planes
    /// through a node's tight box.
    pub fn reduce(&self, region: &Aabb) -> Option<Aabb> {
        if region.is_empty() {
            return None;
        }
        let cs = self.cell_size;
        let clo = region.lo.map(|c| c / cs);
        let chi: [u32; 3] = std::array::from_fn(|a| (region.hi[a] - 1) / cs);
        let mlo = morton::encode_unchecked(clo[0], clo[1], clo[2]);
        let mhi = morton::encode_unchecked(chi[0], chi[1], chi[2]);
        let first = self.cells.partition_point(|c| c.morton < mlo);
        let last = self.cells.partition_point(|c| c.morton <= mhi);
        self.cells[first..last]
            .iter()
            .filter(|c| (0..3).all(|a| clo[a] <= c.coord[a] && c.coord[a] <= chi[a]))
            .filter_map(|c| c.tight.and_then(|t| t.intersect(region)))
            .reduce(|a, b| a.union(&b))
    }

    fn snap(&self, pos: u32) -> u32 {
        let cs = self.cell_size;
        (pos + cs / 2) / cs * cs
    }
}

/// Best plane over every interior voxel boundary of `bx`, or `None` when no
/// plane makes the two tight child boxes smaller than the tight box of `bx`.
/// Ties go to the lower axis, then the lower position.
pub fn sweep_best_plane(g: &SvtGrid, bx: &Aabb) -> Option<Plane> {
    let tight_volume = g.shrink_to_occupied(bx)?.volume();
    let mut best: Option<Plane> = None;
    for axis in 0..3 {
        let n = bx.extent(axis) as usize;
        if n < 2 {
            continue;
        }
        let lo = bx.lo[axis];
        let slab = |s: u32| {
            let mut b = *bx;
            b.lo[axis] = s;
            b.hi[axis] = s + 1;
            g.shrink_to_occupied(&b)
        };
        let slabs: Vec<Option<Aabb>> = if n >= 32 {
            (lo..bx.hi[axis]).into_par_iter().map(slab).collect()
        } else {
            (lo..bx.hi[axis]).map(slab).collect()
        };
        // below[k]: tight box of slabs [0, k); above[k]: of slabs [k, n).
        let mut below = vec![None; n + 1];
        for k in 0..n {
            below[k + 1] = union_opt(below[k], slabs[k]);
        }
        let mut above = vec![None; n + 1];
        for k in (0..n).rev() {
            above[k] = union_opt(above[k + 1], slabs[k]);
        }
        for k in 1..n {
            let cost = volume_opt(below[k]) + volume_opt(above[k]);
            if best.is_none_or(|b| cost < b.cost) {
                best = Some(Plane { axis, pos: lo + k as u32, cost });
            }
        }
    }
    best.filter(|p| p.cost < tight_volume)
}

/// Binned variant: per axis, the `bins - 1` equidistant boundaries of `bx`
/// snapped to the cell raster and strictly inside `bx`.
pub fn binned_best_plane(cells: &CellBoxList, bx: &Aabb, bins: u32) -> Option<Plane> {
    assert!(bins >= 2, "need at least two bins");
    let tight_volume = cells.reduce(bx)?.volume();
    let mut candidates = Vec::new();
    for axis in 0..3 {
        let (lo, hi) = (bx.lo[axis], bx.hi[axis]);
        let ext = (hi - lo) as u64;
        let mut last = None;
        for i in 1..bins as u64 {
            let raw = lo + (ext * i / bins as u64) as u32;
            let p = cells.snap(raw);
            if lo < p && p < hi && last != Some(p) {
                candidates.push((axis, p));
                last = Some(p);
            }
        }
    }
    let costs: Vec<u64> = candidates
        .par_iter()
        .map(|&(axis, pos)| {
            volume_opt(cells.reduce(&bx.below(axis, pos))) + volume_opt(cells.reduce(&bx.above(axis, pos)))
        })
        .collect();
    let mut best: Option<Plane> = None;
    for (&(axis, pos), &cost) in candidates.iter().zip(&costs) {
        if best.is_none_or(|b| cost < b.cost) {
            best = Some(Plane { axis, pos, cost });
        }
    }
    best.filter(|p| p.cost < tight_volume)
}

trait Splitter {
    fn root(&self) -> Option<Aabb>;
    fn best_plane(&self, node: &Aabb) -> Option<Plane>;
    fn tight(&self, region: &Aabb) -> Option<Aabb>;
    /// Forced split position for an oversized leaf.
    fn middle(&self, node: &Aabb) -> Option<(usize, u32)>;
}

struct SweepSplitter<'a>(&'a SvtGrid);

impl Splitter for SweepSplitter<'_> {
    fn root(&self) -> Option<Aabb> {
        self.0.shrink_to_occupied(&Aabb::from_dims(self.0.dims()))
    }
    fn best_plane(&self, node: &Aabb) -> Option<Plane> {
        sweep_best_plane(self.0, node)
    }
    fn tight(&self, region: &Aabb) -> Option<Aabb> {
        self.0.shrink_to_occupied(region)
    }
    fn middle(&self, node: &Aabb) -> Option<(usize, u32)> {
        let axis = node.longest_axis();
        (node.extent(axis) >= 2).then(|| (axis, (node.lo[axis] + node.hi[axis]) / 2))
    }
}

struct BinnedSplitter<'a> {
    cells: &'a CellBoxList,
    bins: u32,
}

impl Splitter for BinnedSplitter<'_> {
    fn root(&self) -> Option<Aabb> {
        self.cells.reduce(&Aabb::from_dims(self.cells.dims))
    }
    fn best_plane(&self, node: &Aabb) -> Option<Plane> {
        binned_best_plane(self.cells, node, self.bins)
    }
    fn tight(&self, region: &Aabb) -> Option<Aabb> {
        self.cells.reduce(region)
    }
    fn middle(&self, node: &Aabb) -> Option<(usize, u32)> {
        let axis = node.longest_axis();
        let (lo, hi) = (node.lo[axis], node.hi[axis]);
        let cs = self.cells.cell_size;
        // Raster positions strictly inside the node, closest to the midpoint.
        let first = (lo / cs + 1) * cs;
        let last = (hi - 1) / cs * cs;
        if first > last {
            return None;
        }
        let mid = (lo + hi) / 2;
        Some((axis, self.cells.snap(mid).clamp(first, last)))
    }
}

struct Recursion<'a, S> {
    splitter: &'a S,
    params: &'a BuildParams,
    root_volume: u64,
    nodes: Vec<KdNode>,
}

impl<S: Splitter> Recursion<'_, S> {
    fn halted(&self, volume: u64) -> bool {
        match self.params.mode {
            Mode::Shallow => volume * 100 <= self.root_volume * SHALLOW_HALT_PERCENT,
            Mode::Deep => volume <= DEEP_HALT_VOLUME,
        }
    }

    fn oversized(&self, bbox: &Aabb) -> bool {
        self.params.mode == Mode::Deep
            && self.params.max_leaf_size.is_some_and(|m| bbox.extents().iter().any(|&e| e > m))
    }

    fn build(&mut self, bbox: Aabb) -> u32 {
        let idx = self.nodes.len() as u32;
        self.nodes.push(KdNode { bbox, split: None, children: [None, None] });
        let mut split =
            if self.halted(bbox.volume()) { None } else { self.splitter.best_plane(&bbox).map(|p| (p.axis, p.pos)) };
        if split.is_none() && self.oversized(&bbox) {
            split = self.splitter.middle(&bbox);
        }
        let Some((axis, pos)) = split else { return idx };
        let below = self.splitter.tight(&bbox.below(axis, pos));
        let above = self.splitter.tight(&bbox.above(axis, pos));
        let left = below.map(|b| self.build(b));
        let right = above.map(|b| self.build(b));
        let node = &mut self.nodes[idx as usize];
        node.split = Some(Split { axis: axis as u8, pos });
        node.children = [left, right];
        idx
    }
}

fn build_with<S: Splitter>(splitter: &S, params: &BuildParams) -> KdTree {
    let Some(root) = splitter.root() else { return KdTree::default() };
    let mut r = Recursion { splitter, params, root_volume: root.volume(), nodes: Vec::new() };
    r.build(root);
    KdTree { nodes: r.nodes }
}

/// Builds a k-d tree from the summed volume tables. With the binned builder
/// the per-cell boxes are derived from `g` first.
pub fn build_kdtree(g: &SvtGrid, params: &BuildParams) -> Result<KdTree> {
    params.validate()?;
    match params.builder {
        Builder::Sweep => Ok(build_with(&SweepSplitter(g), params)),
        Builder::Binned => {
            let cells = CellBoxList::from_svt(g, params.cell_size)?;
            build_kdtree_binned(&cells, params)
        }
    }
}

/// Builds a k-d tree from precomputed cell boxes with the binned plane finder.
pub fn build_kdtree_binned(cells: &CellBoxList, params: &BuildParams) -> Result<KdTree> {
    params.validate()?;
    if params.builder != Builder::Binned || cells.cell_size != params.cell_size {
        return Err(Error::Config("binned build needs binned params matching the cell size".into()));
    }
    Ok(build_with(&BinnedSplitter { cells, bins: params.bins }, params))
}
