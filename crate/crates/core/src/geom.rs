//! Integer voxel-space boxes.

use crate::Dims;

/// Half-open box `[lo, hi)` in voxel coordinates.
///
/// Degenerate boxes (`lo == hi` on some axis) are allowed and hold no voxels.
/// "No box at all" is expressed as `Option<Aabb>::None`, never as inverted
/// bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Aabb {
    pub lo: [u32; 3],
    pub hi: [u32; 3],
}

impl Aabb {
    pub fn new(lo: [u32; 3], hi: [u32; 3]) -> Self {
        assert!((0..3).all(|a| lo[a] <= hi[a]), "inverted box {lo:?}..{hi:?}");
        Aabb { lo, hi }
    }

    pub fn from_dims(dims: Dims) -> Self {
        Aabb::new([0; 3], dims)
    }

    /// The unit box of a single voxel.
    pub fn voxel(p: [u32; 3]) -> Self {
        Aabb::new(p, [p[0] + 1, p[1] + 1, p[2] + 1])
    }

    #[inline]
    pub fn extent(&self, axis: usize) -> u32 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn extents(&self) -> [u32; 3] {
        [self.extent(0), self.extent(1), self.extent(2)]
    }

    #[inline]
    pub fn volume(&self) -> u64 {
        self.extents().iter().map(|&e| e as u64).product()
    }

    pub fn is_empty(&self) -> bool {
        self.volume() == 0
    }

    pub fn contains_point(&self, p: [u32; 3]) -> bool {
        (0..3).all(|a| self.lo[a] <= p[a] && p[a] < self.hi[a])
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        (0..3).all(|a| self.lo[a] <= other.lo[a] && other.hi[a] <= self.hi[a])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: std::array::from_fn(|a| self.lo[a].min(other.lo[a])),
            hi: std::array::from_fn(|a| self.hi[a].max(other.hi[a])),
        }
    }

    /// Overlap of two boxes, `None` when they share no voxel.
    pub fn intersect(&self, other: &Aabb) -> Option<Aabb> {
        let lo: [u32; 3] = std::array::from_fn(|a| self.lo[a].max(other.lo[a]));
        let hi: [u32; 3] = std::array::from_fn(|a| self.hi[a].min(other.hi[a]));
        (0..3).all(|a| lo[a] < hi[a]).then_some(Aabb { lo, hi })
    }

    /// Axis with the largest extent; lowest axis wins ties.
    pub fn longest_axis(&self) -> usize {
        let e = self.extents();
        let mut best = 0;
        for a in 1..3 {
            if e[a] > e[best] {
                best = a;
            }
        }
        best
    }

    /// The part of the box below `pos` on `axis`.
    pub fn below(&self, axis: usize, pos: u32) -> Aabb {
        let mut b = *self;
        b.hi[axis] = pos.clamp(b.lo[axis], b.hi[axis]);
        b
    }

    /// The part of the box at or above `pos` on `axis`.
    pub fn above(&self, axis: usize, pos: u32) -> Aabb {
        let mut b = *self;
        b.lo[axis] = pos.clamp(b.lo[axis], b.hi[axis]);
        b
    }

    pub fn to_f64(&self) -> ([f64; 3], [f64; 3]) {
        (self.lo.map(f64::from), self.hi.map(f64::from))
    }
}

/// Union of two optional boxes.
pub fn union_opt(a: Option<Aabb>, b: Option<Aabb>) -> Option<Aabb> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.union(&b)),
        (a, None) => a,
        (None, b) => b,
    }
}

pub fn volume_opt(b: Option<Aabb>) -> u64 {
    b.map_or(0, |b| b.volume())
}
