//! Binary visibility classification of a volume under a transfer function.

use rayon::prelude::*;

use crate::tf::quantize;
use crate::{linear_index, voxel_count, Dims, TransferFunction, Volume};

/// One visibility flag per voxel, same layout as the source volume.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryVolume {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryVolume {
    pub fn new(dims: Dims, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), voxel_count(dims), "flag count must match dims");
        BinaryVolume { dims, bits }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(u32, u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(voxel_count(dims));
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    bits.push(f(x, y, z));
                }
            }
        }
        BinaryVolume { dims, bits }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, z: u32) -> bool {
        self.bits[linear_index(self.dims, x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// 26-neighborhood dilation, clamped at the borders.
    pub fn dilated(&self) -> BinaryVolume {
        let mut bits = self.bits.clone();
        for axis in 0..3 {
            bits = dilate_axis(&bits, self.dims, axis);
        }
        BinaryVolume { dims: self.dims, bits }
    }
}

// A 3x3x3 box dilation is separable into three 1-D passes.
fn dilate_axis(src: &[bool], dims: Dims, axis: usize) -> Vec<bool> {
    let [nx, ny, _] = dims.map(|d| d as usize);
    let stride = [1, nx, nx * ny][axis];
    let n = dims[axis] as usize;
    let slice = nx * ny;
    let mut out = vec![false; src.len()];
    out.par_chunks_mut(slice).enumerate().for_each(|(z, plane)| {
        for (i, o) in plane.iter_mut().enumerate() {
            let idx = z * slice + i;
            let c = [i % nx, i / nx, z][axis];
            *o = src[idx] || (c > 0 && src[idx - stride]) || (c + 1 < n && src[idx + stride]);
        }
    });
    out
}

/// Flags voxels whose transfer-function alpha is strictly positive. With
/// `dilate`, every voxel within one step (26-neighborhood) of such a voxel is
/// flagged too, which keeps skipping conservative under trilinear sampling.
pub fn classify(v: &Volume, tf: &TransferFunction, dilate: bool) -> BinaryVolume {
    let visible: Vec<bool> = tf.lut().iter().map(|c| c[3] > 0.0).collect();
    let bits = v.voxels().par_iter().map(|&x| visible[quantize(x)]).collect();
    let base = BinaryVolume { dims: v.dims(), bits };
    if dilate {
        base.dilated()
    } else {
        base
    }
}

/// Fraction of flagged voxels.
pub fn occupancy(b: &BinaryVolume) -> f64 {
    b.count() as f64 / b.bits.len() as f64
}
