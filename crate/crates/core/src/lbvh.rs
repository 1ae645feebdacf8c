//! Linear BVH over visible bricks.
//!
//! Bricks with at least one visible voxel are compacted, tagged with 30-bit
//! Morton codes of their brick coordinates and sorted. The sorted code
//! sequence defines a binary radix tree (Karras 2012) whose internal nodes
//! split their leaf ranges at the highest differing code bit, i.e. spatial
//! middle splits. Boxes are assembled bottom-up afterwards.

use rayon::prelude::*;

use crate::geom::Aabb;
use crate::morton;
use crate::{BinaryVolume, Dims, Error, Result};

pub const DEFAULT_BRICK_SIZE: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BrickEntry {
    pub coord: [u32; 3],
    pub morton: u32,
}

/// The non-empty bricks of a classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrickSet {
    pub brick_size: u32,
    pub dims: Dims,
    pub entries: Vec<BrickEntry>,
}

impl BrickSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Voxel box of a brick, clipped to the volume.
    pub fn brick_box(&self, coord: [u32; 3]) -> Aabb {
        crate::svt::cell_box(self.dims, self.brick_size, coord)
    }
}

/// Collects every brick holding at least one set flag, in brick scan order.
pub fn flag_bricks(b: &BinaryVolume, brick_size: u32) -> Result<BrickSet> {
    assert!(brick_size >= 1, "brick size must be positive");
    let dims = b.dims();
    let bd = dims.map(|d| d.div_ceil(brick_size));
    if bd.iter().any(|&d| d > morton::AXIS_LIMIT) {
        return Err(Error::Range(format!("brick grid {bd:?} exceeds {} bricks per axis", morton::AXIS_LIMIT)));
    }
    let bits = b.bits();
    let layer = bd[0] as usize * bd[1] as usize;
    // One streaming pass per layer of bricks; any visible voxel makes its brick visible.
    let visible: Vec<bool> = (0..bd[2])
        .into_par_iter()
        .flat_map_iter(|bz| {
            let mut flags = vec![false; layer];
            let z_end = ((bz + 1) * brick_size).min(dims[2]);
            for z in bz * brick_size..z_end {
                for y in 0..dims[1] {
                    let row_start = crate::linear_index(dims, 0, y, z);
                    let row = &bits[row_start..row_start + dims[0] as usize];
                    let base = (y / brick_size) as usize * bd[0] as usize;
                    for (bx, chunk) in row.chunks(brick_size as usize).enumerate() {
                        if !flags[base + bx] && chunk.contains(&true) {
                            flags[base + bx] = true;
                        }
                    }
                }
            }
            flags
        })
        .collect();
    let entries = visible
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| {
            let coord =
                [(i % bd[0] as usize) as u32, ((i / bd[0] as usize) % bd[1] as usize) as u32, (i / layer) as u32];
            BrickEntry { coord, morton: morton::encode_unchecked(coord[0], coord[1], coord[2]) }
        })
        .collect();
    Ok(BrickSet { brick_size, dims, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LbvhNodeKind {
    Inner {
        left: u32,
        right: u32,
        /// Axis of the highest differing Morton bit between the two children.
        split_axis: u8,
    },
    Leaf {
        brick: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LbvhNode {
    pub bbox: Aabb,
    pub kind: LbvhNodeKind,
}

/// Internal nodes occupy `nodes[..n - 1]` (root at 0), leaves `nodes[n - 1..]`
/// in Morton order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lbvh {
    pub nodes: Vec<LbvhNode>,
    /// Bricks sorted by Morton code; leaf `i` holds `bricks[i]`.
    pub bricks: Vec<BrickEntry>,
    pub brick_size: u32,
    pub dims: Dims,
}

impl Lbvh {
    pub fn root(&self) -> Option<u32> {
        (!self.nodes.is_empty()).then_some(0)
    }

    pub fn leaf_count(&self) -> usize {
        self.bricks.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let Some(root) = self.root() else { return 0 };
        let mut best = 0;
        let mut stack = vec![(root, 1usize)];
        while let Some((i, depth)) = stack.pop() {
            best = best.max(depth);
            if let LbvhNodeKind::Inner { left, right, .. } = self.nodes[i as usize].kind {
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
        }
        best
    }

    pub fn leaves(&self) -> impl Iterator<Item = &LbvhNode> {
        self.nodes.iter().filter(|n| matches!(n.kind, LbvhNodeKind::Leaf { .. }))
    }
}

/// Sort key: Morton code in the high word, original index as tie breaker.
fn sort_keys(bricks: &[BrickEntry]) -> Vec<(u64, BrickEntry)> {
    let mut keyed: Vec<(u64, BrickEntry)> =
        bricks.iter().enumerate().map(|(i, e)| (((e.morton as u64) << 32) | i as u64, *e)).collect();
    keyed.par_sort_unstable_by_key(|(k, _)| *k);
    keyed
}

/// Builds the hierarchy. An empty brick set yields an empty tree.
pub fn build_lbvh(bricks: &BrickSet) -> Lbvh {
    let keyed = sort_keys(&bricks.entries);
    let n = keyed.len();
    let sorted: Vec<BrickEntry> = keyed.iter().map(|(_, e)| *e).collect();
    let mut out = Lbvh {
        nodes: Vec::with_capacity(n.saturating_mul(2).saturating_sub(1)),
        bricks: sorted,
        brick_size: bricks.brick_size,
        dims: bricks.dims,
    };
    if n == 0 {
        return out;
    }
    let leaf_node =
        |i: usize, set: &Lbvh| LbvhNode { bbox: set_brick_box(set, i), kind: LbvhNodeKind::Leaf { brick: i as u32 } };
    if n == 1 {
        let leaf = leaf_node(0, &out);
        out.nodes.push(leaf);
        return out;
    }

    let keys: Vec<u64> = keyed.iter().map(|(k, _)| *k).collect();
    let codes: Vec<u32> = out.bricks.iter().map(|e| e.morton).collect();
    let inner: Vec<LbvhNode> = (0..n - 1).into_par_iter().map(|i| karras_node(&keys, &codes, i)).collect();
    out.nodes = inner;
    for i in 0..n {
        let leaf = leaf_node(i, &out);
        out.nodes.push(leaf);
    }
    refit(&mut out.nodes);
    out
}

fn set_brick_box(set: &Lbvh, i: usize) -> Aabb {
    crate::svt::cell_box(set.dims, set.brick_size, set.bricks[i].coord)
}

/// Longest common prefix of keys `i` and `j`, or -1 outside `[0, n)`.
#[inline]
fn delta(keys: &[u64], i: usize, j: i64) -> i32 {
    if j < 0 || j >= keys.len() as i64 {
        return -1;
    }
    (keys[i] ^ keys[j as usize]).leading_zeros() as i32
}

fn karras_node(keys: &[u64], codes: &[u32], i: usize) -> LbvhNode {
    let n = keys.len();
    let ii = i as i64;
    let d: i64 = if delta(keys, i, ii + 1) - delta(keys, i, ii - 1) >= 0 { 1 } else { -1 };
    let delta_min = delta(keys, i, ii - d);

    let mut l_max: i64 = 2;
    while delta(keys, i, ii + l_max * d) > delta_min {
        l_max *= 2;
    }
    let mut l: i64 = 0;
    let mut t = l_max / 2;
    while t >= 1 {
        if delta(keys, i, ii + (l + t) * d) > delta_min {
            l += t;
        }
        t /= 2;
    }
    let j = ii + l * d;

    let delta_node = delta(keys, i, j);
    let mut s: i64 = 0;
    let mut div: i64 = 2;
    loop {
        let t = (l + div - 1) / div;
        if delta(keys, i, ii + (s + t) * d) > delta_node {
            s += t;
        }
        if t <= 1 {
            break;
        }
        div *= 2;
    }
    let gamma = (ii + s * d + d.min(0)) as usize;
    let (first, last) = (ii.min(j) as usize, ii.max(j) as usize);
    let leaf_base = (n - 1) as u32;
    let left = if first == gamma { leaf_base + gamma as u32 } else { gamma as u32 };
    let right = if last == gamma + 1 { leaf_base + gamma as u32 + 1 } else { gamma as u32 + 1 };

    let diff = codes[gamma] ^ codes[gamma + 1];
    let split_axis = if diff == 0 { 0 } else { ((31 - diff.leading_zeros()) % 3) as u8 };
    LbvhNode {
        // Filled in by refit.
        bbox: Aabb::new([0; 3], [0; 3]),
        kind: LbvhNodeKind::Inner { left, right, split_axis },
    }
}

/// Single post-order pass assembling inner boxes from their children.
fn refit(nodes: &mut [LbvhNode]) {
    let mut stack = vec![(0u32, false)];
    while let Some((i, visited)) = stack.pop() {
        if let LbvhNodeKind::Inner { left, right, .. } = nodes[i as usize].kind {
            if visited {
                let b = nodes[left as usize].bbox.union(&nodes[right as usize].bbox);
                nodes[i as usize].bbox = b;
            } else {
                stack.push((i, true));
                stack.push((right, false));
                stack.push((left, false));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_binary;

    fn set_from_codes(codes: &[u32]) -> BrickSet {
        BrickSet {
            brick_size: 8,
            dims: [64; 3],
            entries: codes.iter().map(|&m| BrickEntry { coord: morton::decode(m), morton: m }).collect(),
        }
    }

    /// Validates structure and returns the leaf ranges per node, post-order.
    fn validate(t: &Lbvh) -> Vec<(usize, usize)> {
        let n = t.leaf_count();
        let mut seen = vec![0u32; t.nodes.len()];
        let mut ranges = vec![(usize::MAX, 0usize); t.nodes.len()];
        fn walk(t: &Lbvh, i: u32, seen: &mut [u32], ranges: &mut [(usize, usize)]) -> Aabb {
            seen[i as usize] += 1;
            let node = t.nodes[i as usize];
            match node.kind {
                LbvhNodeKind::Leaf { brick } => {
                    ranges[i as usize] = (brick as usize, brick as usize);
                    node.bbox
                }
                LbvhNodeKind::Inner { left, right, .. } => {
                    let a = walk(t, left, seen, ranges);
                    let b = walk(t, right, seen, ranges);
                    assert_eq!(node.bbox, a.union(&b));
                    let (l, r) = (ranges[left as usize], ranges[right as usize]);
                    assert_eq!(l.1 + 1, r.0, "children must cover adjacent leaf ranges");
                    ranges[i as usize] = (l.0, r.1);
                    node.bbox
                }
            }
        }
        if let Some(root) = t.root() {
            walk(t, root, &mut seen, &mut ranges);
            assert_eq!(ranges[0], (0, n - 1));
        }
        assert!(seen.iter().all(|&s| s == 1), "every node reachable exactly once");
        ranges
    }

    #[test]
    fn flag_edge_cases() {
        let none = BinaryVolume::from_fn([16; 3], |_, _, _| false);
        assert!(flag_bricks(&none, 8).unwrap().is_empty());
        let all = BinaryVolume::from_fn([16; 3], |_, _, _| true);
        assert_eq!(flag_bricks(&all, 8).unwrap().len(), 8);
        let huge = BinaryVolume::from_fn([1025 * 2, 1, 1], |_, _, _| false);
        assert!(flag_bricks(&huge, 2).is_err());
    }

    #[test]
    fn flag_matches_vote_oracle() {
        let b = random_binary([64; 3], 0.0003, 8);
        let set = flag_bricks(&b, 8).unwrap();
        let mut expect = Vec::new();
        for bz in 0..8 {
            for by in 0..8 {
                for bx in 0..8 {
                    let mut any = false;
                    for z in 0..8 {
                        for y in 0..8 {
                            for x in 0..8 {
                                any |= b.get(bx * 8 + x, by * 8 + y, bz * 8 + z);
                            }
                        }
                    }
                    if any {
                        expect.push([bx, by, bz]);
                    }
                }
            }
        }
        let got: Vec<_> = set.entries.iter().map(|e| e.coord).collect();
        assert_eq!(got, expect);
        assert!(!got.is_empty() && got.len() < 512);
    }

    #[test]
    fn empty_and_single() {
        let empty = build_lbvh(&set_from_codes(&[]));
        assert_eq!(empty.node_count(), 0);
        assert_eq!(empty.height(), 0);
        let one = build_lbvh(&set_from_codes(&[5]));
        assert_eq!(one.node_count(), 1);
        assert_eq!(one.height(), 1);
        assert_eq!(one.nodes[0].bbox, Aabb::new([8, 0, 8], [16, 8, 16]));
    }

    #[test]
    fn four_codes_form_perfect_tree() {
        let t = build_lbvh(&set_from_codes(&[3, 1, 0, 2]));
        assert_eq!(t.node_count(), 7);
        assert_eq!(t.height(), 3);
        let ranges = validate(&t);
        // Reference hierarchical middle split on code bits: {0,1} | {2,3}.
        let LbvhNodeKind::Inner { left, right, split_axis } = t.nodes[0].kind else { panic!("root must be inner") };
        assert_eq!(ranges[left as usize], (0, 1));
        assert_eq!(ranges[right as usize], (2, 3));
        // Bit 1 is the y bit of the lowest level.
        assert_eq!(split_axis, 1);
    }

    #[test]
    fn duplicate_codes_are_well_defined() {
        let t = build_lbvh(&set_from_codes(&[4, 4, 4, 1, 1]));
        assert_eq!(t.node_count(), 9);
        validate(&t);
    }

    #[test]
    fn splits_follow_highest_differing_bit() {
        let b = random_binary([128, 96, 64], 0.0002, 99);
        let t = build_lbvh(&flag_bricks(&b, 8).unwrap());
        let ranges = validate(&t);
        let codes: Vec<u32> = t.bricks.iter().map(|e| e.morton).collect();
        for (i, node) in t.nodes.iter().enumerate() {
            if let LbvhNodeKind::Inner { left, .. } = node.kind {
                let (first, last) = ranges[i];
                let split = ranges[left as usize].1;
                let range_bit = 32 - (codes[first] ^ codes[last]).leading_zeros();
                if range_bit == 0 {
                    continue;
                }
                let hi = range_bit - 1;
                // All codes left of the split have the bit clear, right of it set.
                assert!(codes[first..=split].iter().all(|c| c >> hi & 1 == 0));
                assert!(codes[split + 1..=last].iter().all(|c| c >> hi & 1 == 1));
            }
        }
    }

    #[test]
    fn deterministic() {
        let b = random_binary([64; 3], 0.0005, 3);
        let s = flag_bricks(&b, 8).unwrap();
        assert_eq!(build_lbvh(&s), build_lbvh(&s));
    }
}
