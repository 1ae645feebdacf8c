//! Per-ray traversal: each index turns a ray into the sorted, disjoint list
//! of parameter intervals that may contain visible samples.

use super::ray::Ray;
use crate::hybrid::HybridGrid;
use crate::kdtree::KdTree;
use crate::lbvh::{Lbvh, LbvhNodeKind};
use crate::{Dims, MacroGrid, SpatialIndex};

/// Half-open parameter interval `[t0, t1)` along a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
}

pub type SegmentList = Vec<Segment>;

/// Appends `[t0, t1)`, merging with the last interval when they touch.
/// Callers push in non-decreasing `t0` order.
#[inline]
pub fn push_merged(out: &mut SegmentList, t0: f64, t1: f64) {
    if t1 <= t0 {
        return;
    }
    if let Some(last) = out.last_mut() {
        if t0 <= last.t1 {
            last.t1 = last.t1.max(t1);
            return;
        }
    }
    out.push(Segment { t0, t1 });
}

/// Sorts by entry and merges overlapping or abutting intervals.
pub fn normalize(mut segs: SegmentList) -> SegmentList {
    segs.sort_by(|a, b| a.t0.total_cmp(&b.t0));
    let mut out = Vec::with_capacity(segs.len());
    for s in segs {
        push_merged(&mut out, s.t0, s.t1);
    }
    out
}

pub fn traverse_naive(ray: &Ray, dims: Dims) -> SegmentList {
    ray.volume_range(dims).map(|(t0, t1)| vec![Segment { t0, t1 }]).unwrap_or_default()
}

/// Amanatides-Woo walk over the cells of `grid` between `ta` and `tb`,
/// reporting each cell with the parameter range the ray spends in it.
pub fn walk_cells(ray: &Ray, grid: &MacroGrid, ta: f64, tb: f64, mut visit: impl FnMut([u32; 3], f64, f64)) {
    if tb <= ta {
        return;
    }
    let cs = grid.cell_size() as f64;
    let cd = grid.cells_dims();
    let p = ray.at(ta);
    let mut cell: [i64; 3] = std::array::from_fn(|a| ((p[a] / cs).floor() as i64).clamp(0, cd[a] as i64 - 1));
    let step: [i64; 3] = ray.dir.map(|d| {
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    });
    let boundary_t = |a: usize, c: i64| -> f64 {
        if step[a] == 0 {
            return f64::INFINITY;
        }
        let plane = if step[a] > 0 { (c + 1) as f64 * cs } else { c as f64 * cs };
        (plane - ray.origin[a]) / ray.dir[a]
    };
    let mut next: [f64; 3] = std::array::from_fn(|a| boundary_t(a, cell[a]));
    let mut t = ta;
    loop {
        let axis = if next[0] <= next[1] && next[0] <= next[2] {
            0
        } else if next[1] <= next[2] {
            1
        } else {
            2
        };
        let exit = next[axis].min(tb);
        if exit > t {
            visit(cell.map(|c| c as u32), t, exit);
        }
        if next[axis] >= tb {
            break;
        }
        t = t.max(next[axis]);
        cell[axis] += step[axis];
        if cell[axis] < 0 || cell[axis] >= cd[axis] as i64 {
            break;
        }
        next[axis] = boundary_t(axis, cell[axis]);
    }
}

fn grid_within(ray: &Ray, grid: &MacroGrid, ta: f64, tb: f64, out: &mut SegmentList) {
    walk_cells(ray, grid, ta, tb, |c, t0, t1| {
        if grid.is_occupied(c) {
            push_merged(out, t0, t1);
        }
    });
}

/// Occupied stretches of the macro-cell grid along the ray.
pub fn traverse_grid(ray: &Ray, grid: &MacroGrid) -> SegmentList {
    let mut out = Vec::new();
    if let Some((ta, tb)) = ray.volume_range(grid.dims()) {
        grid_within(ray, grid, ta, tb, &mut out);
    }
    out
}

/// Depth-first, near child first; leaf hits are clipped to the leaf box.
pub fn traverse_lbvh(ray: &Ray, bvh: &Lbvh) -> SegmentList {
    let mut hits = Vec::new();
    let (Some(root), Some((ta, tb))) = (bvh.root(), ray.volume_range(bvh.dims)) else {
        return hits;
    };
    let mut stack = Vec::with_capacity(64);
    stack.push(root);
    while let Some(i) = stack.pop() {
        let node = &bvh.nodes[i as usize];
        let (lo, hi) = node.bbox.to_f64();
        let Some((t0, t1)) = ray.intersect_box(lo, hi) else { continue };
        match node.kind {
            LbvhNodeKind::Leaf { .. } => {
                let (t0, t1) = (t0.max(ta), t1.min(tb));
                if t0 < t1 {
                    hits.push(Segment { t0, t1 });
                }
            }
            LbvhNodeKind::Inner { left, right, split_axis } => {
                let (near, far) = if ray.dir[split_axis as usize] >= 0.0 { (left, right) } else { (right, left) };
                stack.push(far);
                stack.push(near);
            }
        }
    }
    normalize(hits)
}

/// Front-to-back k-d traversal ordered by the split plane.
pub fn traverse_kd(ray: &Ray, tree: &KdTree, dims: Dims) -> SegmentList {
    let mut hits = Vec::new();
    let (Some(root), Some((ta, tb))) = (tree.root(), ray.volume_range(dims)) else {
        return hits;
    };
    let mut stack = Vec::with_capacity(64);
    stack.push(root);
    while let Some(i) = stack.pop() {
        let node = &tree.nodes[i as usize];
        let (lo, hi) = node.bbox.to_f64();
        let Some((t0, t1)) = ray.intersect_box(lo, hi) else { continue };
        match node.split {
            None => {
                let (t0, t1) = (t0.max(ta), t1.min(tb));
                if t0 < t1 {
                    hits.push(Segment { t0, t1 });
                }
            }
            Some(s) => {
                let [below, above] = node.children;
                let (near, far) = if ray.dir[s.axis as usize] >= 0.0 { (below, above) } else { (above, below) };
                if let Some(f) = far {
                    stack.push(f);
                }
                if let Some(n) = near {
                    stack.push(n);
                }
            }
        }
    }
    normalize(hits)
}

/// k-d traversal to the leaves, then the global grid inside each leaf interval.
pub fn traverse_hybrid(ray: &Ray, h: &HybridGrid) -> SegmentList {
    let mut out = Vec::new();
    for leaf in traverse_kd(ray, &h.tree, h.grid.dims()) {
        grid_within(ray, &h.grid, leaf.t0, leaf.t1, &mut out);
    }
    out
}

/// Intervals to integrate for `index`.
pub fn traverse(index: &SpatialIndex, ray: &Ray, dims: Dims) -> SegmentList {
    match index {
        SpatialIndex::Naive => traverse_naive(ray, dims),
        SpatialIndex::Grid(g) => traverse_grid(ray, g),
        SpatialIndex::Lbvh(b) => traverse_lbvh(ray, b),
        SpatialIndex::KdTree(t) => traverse_kd(ray, t, dims),
        SpatialIndex::Hybrid(h) => traverse_hybrid(ray, h),
    }
}
