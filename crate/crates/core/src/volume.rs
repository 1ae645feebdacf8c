//! Scalar volumes: raw file I/O, procedural datasets and sampling.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{linear_index, voxel_count, Dims, Error, Result};

/// Dense scalar field, x-fastest, values normalized to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: Dims,
    voxels: Vec<f32>,
}

impl Volume {
    pub fn new(dims: Dims, voxels: Vec<f32>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Format(format!("volume dims {dims:?} must be >= 1")));
        }
        if voxels.len() != voxel_count(dims) {
            return Err(Error::Format(format!("{} voxels given for dims {dims:?}", voxels.len())));
        }
        if let Some(v) = voxels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Range(format!("voxel value {v} outside [0, 1]")));
        }
        Ok(Volume { dims, voxels })
    }

    /// Builds a volume by evaluating `f` at every voxel; results are clamped to `[0, 1]`.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(u32, u32, u32) -> f32) -> Self {
        assert!(dims.iter().all(|&d| d >= 1));
        let mut voxels = Vec::with_capacity(voxel_count(dims));
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    voxels.push(f(x, y, z).clamp(0.0, 1.0));
                }
            }
        }
        Volume { dims, voxels }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn voxels(&self) -> &[f32] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, z: u32) -> f32 {
        self.voxels[linear_index(self.dims, x, y, z)]
    }

    /// Trilinear reconstruction at world position `p` (voxel `i` spans
    /// `[i, i + 1)`, centered at `i + 0.5`), clamped to the edge voxels.
    #[inline]
    pub fn sample_trilinear(&self, p: [f64; 3]) -> f32 {
        let mut i0 = [0usize; 3];
        let mut i1 = [0usize; 3];
        let mut f = [0f32; 3];
        for a in 0..3 {
            let max = (self.dims[a] - 1) as f64;
            let u = (p[a] - 0.5).clamp(0.0, max);
            let base = u.floor();
            i0[a] = base as usize;
            i1[a] = (i0[a] + 1).min(self.dims[a] as usize - 1);
            f[a] = (u - base) as f32;
        }
        let nx = self.dims[0] as usize;
        let nxy = nx * self.dims[1] as usize;
        let at = |x: usize, y: usize, z: usize| self.voxels[x + nx * y + nxy * z];
        let lerp = |a: f32, b: f32, t: f32| a + (b - a) * t;
        let c00 = lerp(at(i0[0], i0[1], i0[2]), at(i1[0], i0[1], i0[2]), f[0]);
        let c10 = lerp(at(i0[0], i1[1], i0[2]), at(i1[0], i1[1], i0[2]), f[0]);
        let c01 = lerp(at(i0[0], i0[1], i1[2]), at(i1[0], i0[1], i1[2]), f[0]);
        let c11 = lerp(at(i0[0], i1[1], i1[2]), at(i1[0], i1[1], i1[2]), f[0]);
        lerp(lerp(c00, c10, f[1]), lerp(c01, c11, f[1]), f[2])
    }

    /// Value of the voxel containing `p`, clamped to the volume.
    #[inline]
    pub fn sample_nearest(&self, p: [f64; 3]) -> f32 {
        let c: [u32; 3] = std::array::from_fn(|a| (p[a].floor().max(0.0) as u32).min(self.dims[a] - 1));
        self.get(c[0], c[1], c[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endian {
    Little,
    Big,
}

/// Sidecar metadata stored as JSON next to a `.raw` file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMeta {
    pub dims: Dims,
    pub bits: u32,
    #[serde(rename = "endian")]
    pub endianness: Endian,
}

impl RawMeta {
    fn bytes_per_voxel(&self) -> Result<usize> {
        match self.bits {
            8 => Ok(1),
            16 => Ok(2),
            b => Err(Error::Unsupported(format!("{b}-bit voxels"))),
        }
    }
}

/// Path of the JSON sidecar belonging to a raw file.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

pub fn load_raw(path: &Path, meta: &RawMeta) -> Result<Volume> {
    let bpv = meta.bytes_per_voxel()?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = voxel_count(meta.dims) * bpv;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{} holds {} bytes, expected {expected} for dims {:?} at {} bits",
            path.display(),
            bytes.len(),
            meta.dims,
            meta.bits
        )));
    }
    let scale = ((1u32 << meta.bits) - 1) as f32;
    let voxels = match (bpv, meta.endianness) {
        (1, _) => bytes.iter().map(|&b| b as f32 / scale).collect(),
        (_, Endian::Little) => bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as f32 / scale).collect(),
        (_, Endian::Big) => bytes.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f32 / scale).collect(),
    };
    Volume::new(meta.dims, voxels)
}

/// Loads a raw file whose metadata lives in the sidecar JSON next to it.
pub fn load_raw_with_sidecar(path: &Path) -> Result<Volume> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: RawMeta = serde_json::from_str(&text)?;
    load_raw(path, &meta)
}

/// Writes `v` quantized to `meta.bits`; dims in `meta` must match the volume.
pub fn save_raw(path: &Path, v: &Volume, meta: &RawMeta) -> Result<()> {
    let bpv = meta.bytes_per_voxel()?;
    if meta.dims != v.dims {
        return Err(Error::Format(format!("meta dims {:?} differ from volume dims {:?}", meta.dims, v.dims)));
    }
    let scale = ((1u32 << meta.bits) - 1) as f32;
    let mut out = Vec::with_capacity(v.len() * bpv);
    for &x in &v.voxels {
        let q = (x * scale).round() as u32;
        match (bpv, meta.endianness) {
            (1, _) => out.push(q as u8),
            (_, Endian::Little) => out.extend_from_slice(&(q as u16).to_le_bytes()),
            (_, Endian::Big) => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the raw file plus its sidecar JSON.
pub fn save_raw_with_sidecar(path: &Path, v: &Volume, meta: &RawMeta) -> Result<()> {
    save_raw(path, v, meta)?;
    let side = sidecar_path(path);
    fs::write(&side, serde_json::to_string_pretty(meta)?).map_err(|e| Error::io(&side, e))
}

/// Menger sponge of the given level: `3^level` voxels per axis, 1.0 on the
/// sponge and 0.0 in the holes.
pub fn gen_menger(level: u32) -> Volume {
    assert!(level <= 6, "menger level {level} too large");
    let n = 3u32.pow(level);
    Volume::from_fn([n; 3], |x, y, z| {
        let (mut x, mut y, mut z) = (x, y, z);
        for _ in 0..level {
            let centered = [x % 3 == 1, y % 3 == 1, z % 3 == 1];
            if centered.iter().filter(|&&c| c).count() >= 2 {
                return 0.0;
            }
            x /= 3;
            y /= 3;
            z /= 3;
        }
        1.0
    })
}

/// Spherical shell: 1.0 where the voxel center lies within `thickness / 2`
/// of the sphere of `radius` around `center`.
pub fn gen_shell(dims: Dims, center: [f64; 3], radius: f64, thickness: f64) -> Volume {
    assert!(thickness > 0.0, "shell thickness must be positive");
    let half = thickness / 2.0;
    Volume::from_fn(dims, |x, y, z| {
        let p = [x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5];
        let d = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum::<f64>().sqrt();
        if (d - radius).abs() <= half {
            1.0
        } else {
            0.0
        }
    })
}

/// Standard deviation of the Gaussian splats used by [`gen_blobs`], in voxels.
pub const BLOB_SIGMA: f64 = 1.5;

/// Sum of `n` Gaussian splats at seeded random positions, clamped to `[0, 1]`.
pub fn gen_blobs(dims: Dims, n: usize, seed: u64) -> Volume {
    assert!(n >= 1, "need at least one blob");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 3]> = (0..n).map(|_| std::array::from_fn(|a| rng.gen_range(0.0..dims[a] as f64))).collect();
    gen_blobs_at(dims, &centers, BLOB_SIGMA)
}

/// Gaussian splats of unit peak at explicit centers. Splats are truncated at
/// three standard deviations so the background stays exactly zero.
pub fn gen_blobs_at(dims: Dims, centers: &[[f64; 3]], sigma: f64) -> Volume {
    let mut voxels = vec![0f32; voxel_count(dims)];
    let reach = 3.0 * sigma;
    let inv = 1.0 / (2.0 * sigma * sigma);
    for c in centers {
        let lo: [u32; 3] = std::array::from_fn(|a| (c[a] - reach - 0.5).ceil().max(0.0) as u32);
        let hi: [u32; 3] =
            std::array::from_fn(|a| ((c[a] + reach - 0.5).floor() + 1.0).clamp(0.0, dims[a] as f64) as u32);
        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    let p = [x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5];
                    let d2: f64 = (0..3).map(|a| (p[a] - c[a]).powi(2)).sum();
                    if d2 <= reach * reach {
                        voxels[linear_index(dims, x, y, z)] += (-d2 * inv).exp() as f32;
                    }
                }
            }
        }
    }
    for v in &mut voxels {
        *v = v.clamp(0.0, 1.0);
    }
    Volume { dims, voxels }
}
