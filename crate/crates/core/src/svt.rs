//! Summed volume tables over the binary classification.
//!
//! The volume is cut into cubic bricks (32³ by default). Every brick owns a
//! `(brick_size + 1)³` table of prefix counts with a zero border, so the number
//! of visible voxels in any box inside a brick costs eight lookups. Boxes that
//! span several bricks are answered brick by brick and summed.

use rayon::prelude::*;

use crate::geom::Aabb;
use crate::{linear_index, BinaryVolume, Dims};

pub const DEFAULT_BRICK_SIZE: u32 = 32;
/// Macro-cell size of the global grid used for skipping.
pub const MACRO_CELL_SIZE: u32 = 16;

#[derive(Clone, Debug)]
pub struct SvtGrid {
    dims: Dims,
    brick_size: u32,
    bricks_dims: [u32; 3],
    /// Table slot per brick in x-fastest order; empty bricks own no table.
    slots: Vec<u32>,
    /// `(brick_size + 1)³` entries per stored brick.
    tables: Vec<u32>,
}

const NO_TABLE: u32 = u32::MAX;

fn brick_coord(bricks_dims: [u32; 3], i: usize) -> [u32; 3] {
    let (nx, ny) = (bricks_dims[0] as usize, bricks_dims[1] as usize);
    [(i % nx) as u32, ((i / nx) % ny) as u32, (i / (nx * ny)) as u32]
}

pub fn build_svt_grid(b: &BinaryVolume, brick_size: u32) -> SvtGrid {
    assert!(brick_size >= 2, "brick size must be at least 2");
    let dims = b.dims();
    let bits = b.bits();
    let bricks_dims = dims.map(|d| d.div_ceil(brick_size));
    let side = brick_size as usize + 1;
    let table_len = side * side * side;
    let brick_count: usize = bricks_dims.iter().map(|&d| d as usize).product();
    let extent = |origin: [u32; 3]| -> [u32; 3] { std::array::from_fn(|a| brick_size.min(dims[a] - origin[a])) };

    let occupied: Vec<bool> = (0..brick_count)
        .into_par_iter()
        .map(|i| {
            let origin = brick_coord(bricks_dims, i).map(|c| c * brick_size);
            let ext = extent(origin);
            (0..ext[2]).any(|z| {
                (0..ext[1]).any(|y| {
                    let row = linear_index(dims, origin[0], origin[1] + y, origin[2] + z);
                    bits[row..row + ext[0] as usize].contains(&true)
                })
            })
        })
        .collect();
    let mut slots = vec![NO_TABLE; brick_count];
    let mut stored = Vec::new();
    for (i, _) in occupied.iter().enumerate().filter(|(_, &o)| o) {
        slots[i] = stored.len() as u32;
        stored.push(i);
    }

    let mut tables = vec![0u32; table_len * stored.len()];
    tables.par_chunks_mut(table_len).zip(&stored).for_each(|(table, &i)| {
        let origin = brick_coord(bricks_dims, i).map(|c| c * brick_size);
        let ext = extent(origin);
        // Flags outside the volume stay zero (padding). Rows are summed along
        // x while filling.
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                let src = linear_index(dims, origin[0], origin[1] + y, origin[2] + z);
                let src = &bits[src..src + ext[0] as usize];
                let row = side * (y as usize + 1 + side * (z as usize + 1));
                let dst = &mut table[row + 1..row + side];
                let mut acc = 0;
                for (d, &f) in dst.iter_mut().zip(src) {
                    acc += f as u32;
                    *d = acc;
                }
                for d in &mut dst[ext[0] as usize..] {
                    *d = acc;
                }
            }
        }
        let plane = side * side;
        for z in 1..side {
            for y in 1..side {
                let idx = side * (y + side * z);
                let (prev, cur) = table[idx - side..idx + side].split_at_mut(side);
                for (c, p) in cur.iter_mut().zip(prev.iter()) {
                    *c += *p;
                }
            }
        }
        for z in 1..side {
            let (prev, cur) = table[(z - 1) * plane..(z + 1) * plane].split_at_mut(plane);
            for (c, p) in cur.iter_mut().zip(prev.iter()) {
                *c += *p;
            }
        }
    });

    SvtGrid { dims, brick_size, bricks_dims, slots, tables }
}

/// Count inside the local box `[l, h)` of one table.
#[inline]
fn local_count(t: &[u32], side: usize, l: [usize; 3], h: [usize; 3]) -> u32 {
    let at = |x: usize, y: usize, z: usize| t[x + side * (y + side * z)];
    at(h[0], h[1], h[2])
        .wrapping_sub(at(l[0], h[1], h[2]))
        .wrapping_sub(at(h[0], l[1], h[2]))
        .wrapping_sub(at(h[0], h[1], l[2]))
        .wrapping_add(at(l[0], l[1], h[2]))
        .wrapping_add(at(l[0], h[1], l[2]))
        .wrapping_add(at(h[0], l[1], l[2]))
        .wrapping_sub(at(l[0], l[1], l[2]))
}

/// Pulls each side of `[l, h)` in by binary search while the count stays `count`.
fn local_shrink(t: &[u32], side: usize, mut l: [usize; 3], mut h: [usize; 3], count: u32) -> ([usize; 3], [usize; 3]) {
    for axis in 0..3 {
        let (mut good, mut bad) = (l[axis], h[axis]);
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            let mut ll = l;
            ll[axis] = mid;
            if local_count(t, side, ll, h) == count {
                good = mid;
            } else {
                bad = mid;
            }
        }
        l[axis] = good;
        let (mut bad, mut good) = (l[axis], h[axis]);
        while good - bad > 1 {
            let mid = bad + (good - bad) / 2;
            let mut hh = h;
            hh[axis] = mid;
            if local_count(t, side, l, hh) == count {
                good = mid;
            } else {
                bad = mid;
            }
        }
        h[axis] = good;
    }
    (l, h)
}

impl SvtGrid {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn brick_size(&self) -> u32 {
        self.brick_size
    }

    pub fn bricks_dims(&self) -> [u32; 3] {
        self.bricks_dims
    }

    /// Number of bricks holding at least one set flag.
    pub fn stored_bricks(&self) -> usize {
        self.slots.iter().filter(|&&s| s != NO_TABLE).count()
    }

    #[inline]
    fn side(&self) -> usize {
        self.brick_size as usize + 1
    }

    #[inline]
    fn table(&self, brick: [u32; 3]) -> Option<&[u32]> {
        let i = brick[0] as usize
            + self.bricks_dims[0] as usize * (brick[1] as usize + self.bricks_dims[1] as usize * brick[2] as usize);
        let slot = self.slots[i];
        if slot == NO_TABLE {
            return None;
        }
        let side = self.side();
        let len = side * side * side;
        let start = slot as usize * len;
        Some(&self.tables[start..start + len])
    }

    /// Prefix count of brick `brick` over its local box `[0,i)×[0,j)×[0,k)`.
    pub fn prefix(&self, brick: [u32; 3], i: u32, j: u32, k: u32) -> u32 {
        let side = self.side();
        self.table(brick).map_or(0, |t| t[i as usize + side * (j as usize + side * k as usize)])
    }

    /// Calls `f` with each stored brick overlapping `bx`, its table, and the
    /// part of `bx` inside it in brick-local coordinates.
    fn for_each_brick(&self, bx: &Aabb, mut f: impl FnMut([u32; 3], &[u32], [usize; 3], [usize; 3])) {
        debug_assert!((0..3).all(|a| bx.hi[a] <= self.dims[a]), "box outside volume");
        if bx.is_empty() {
            return;
        }
        let bs = self.brick_size;
        let b_lo = bx.lo.map(|c| c / bs);
        let b_hi: [u32; 3] = std::array::from_fn(|a| (bx.hi[a] - 1) / bs);
        for bz in b_lo[2]..=b_hi[2] {
            for by in b_lo[1]..=b_hi[1] {
                for bxi in b_lo[0]..=b_hi[0] {
                    let brick = [bxi, by, bz];
                    let Some(t) = self.table(brick) else { continue };
                    let origin = brick.map(|c| c * bs);
                    let l = std::array::from_fn(|a| (bx.lo[a].max(origin[a]) - origin[a]) as usize);
                    let h = std::array::from_fn(|a| (bx.hi[a].min(origin[a] + bs) - origin[a]) as usize);
                    f(origin, t, l, h);
                }
            }
        }
    }

    /// Exact number of set flags inside `bx`.
    pub fn box_count(&self, bx: &Aabb) -> u64 {
        let side = self.side();
        let mut total = 0u64;
        self.for_each_brick(bx, |_, t, l, h| total += local_count(t, side, l, h) as u64);
        total
    }

    /// Smallest box containing every set flag inside `bx`, or `None` when
    /// `bx` holds no set flag.
    ///
    /// Each overlapped brick shrinks its part of `bx` locally: every side is
    /// pulled in by binary search while the brick's count is unchanged. The
    /// local boxes are then merged.
    pub fn shrink_to_occupied(&self, bx: &Aabb) -> Option<Aabb> {
        let side = self.side();
        let mut tight: Option<Aabb> = None;
        self.for_each_brick(bx, |origin, t, l, h| {
            let count = local_count(t, side, l, h);
            if count == 0 {
                return;
            }
            // Skip bricks that cannot grow the merged box.
            if let Some(cur) = tight {
                let part = Aabb::new(
                    std::array::from_fn(|a| origin[a] + l[a] as u32),
                    std::array::from_fn(|a| origin[a] + h[a] as u32),
                );
                if cur.contains(&part) {
                    return;
                }
            }
            let (l, h) = local_shrink(t, side, l, h, count);
            let local = Aabb::new(
                std::array::from_fn(|a| origin[a] + l[a] as u32),
                std::array::from_fn(|a| origin[a] + h[a] as u32),
            );
            tight = Some(tight.map_or(local, |c| c.union(&local)));
        });
        tight
    }
}

/// Coarse occupancy grid: one flag per macro cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroGrid {
    dims: Dims,
    cell_size: u32,
    cells_dims: [u32; 3],
    occupied: Vec<bool>,
}

impl MacroGrid {
    /// Resamples SVT occupancy to cells of `cell_size` with one box count per cell.
    pub fn from_svt(g: &SvtGrid, cell_size: u32) -> Self {
        Self::build(g.dims(), cell_size, |b| g.box_count(b) > 0)
    }

    /// Same grid computed by scanning the flags directly.
    pub fn from_binary(b: &BinaryVolume, cell_size: u32) -> Self {
        Self::build(b.dims(), cell_size, |bx| {
            (bx.lo[2]..bx.hi[2]).any(|z| (bx.lo[1]..bx.hi[1]).any(|y| (bx.lo[0]..bx.hi[0]).any(|x| b.get(x, y, z))))
        })
    }

    fn build(dims: Dims, cell_size: u32, occupied: impl Fn(&Aabb) -> bool + Sync) -> Self {
        assert!(cell_size >= 2, "cell size must be at least 2");
        let cells_dims = dims.map(|d| d.div_ceil(cell_size));
        let n: usize = cells_dims.iter().map(|&d| d as usize).product();
        let occupied = (0..n)
            .into_par_iter()
            .map(|i| {
                let c = [
                    (i % cells_dims[0] as usize) as u32,
                    ((i / cells_dims[0] as usize) % cells_dims[1] as usize) as u32,
                    (i / (cells_dims[0] as usize * cells_dims[1] as usize)) as u32,
                ];
                occupied(&cell_box(dims, cell_size, c))
            })
            .collect();
        MacroGrid { dims, cell_size, cells_dims, occupied }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cell_size(&self) -> u32 {
        self.cell_size
    }

    pub fn cells_dims(&self) -> [u32; 3] {
        self.cells_dims
    }

    #[inline]
    pub fn is_occupied(&self, c: [u32; 3]) -> bool {
        let d = self.cells_dims;
        self.occupied[c[0] as usize + d[0] as usize * (c[1] as usize + d[1] as usize * c[2] as usize)]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn cell_count(&self) -> usize {
        self.occupied.len()
    }

    /// Voxel box of cell `c`, clipped to the volume.
    pub fn cell_box(&self, c: [u32; 3]) -> Aabb {
        cell_box(self.dims, self.cell_size, c)
    }

    /// Storage of the occupancy flags packed as bits.
    pub fn packed_bytes(&self) -> usize {
        self.occupied.len().div_ceil(8)
    }
}

pub(crate) fn cell_box(dims: Dims, cell_size: u32, c: [u32; 3]) -> Aabb {
    let lo = c.map(|v| v * cell_size);
    let hi = std::array::from_fn(|a| (lo[a] + cell_size).min(dims[a]));
    Aabb::new(lo, hi)
}
