//! 256-entry RGBA transfer functions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const LUT_SIZE: usize = 256;

pub type Rgba = [f32; 4];

/// Lookup table mapping a normalized scalar to color and opacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TfFile", into = "TfFile")]
pub struct TransferFunction {
    lut: Vec<Rgba>,
}

/// On-disk / on-wire form: `{"rgba": [[r, g, b, a], ...]}`.
#[derive(Serialize, Deserialize)]
struct TfFile {
    rgba: Vec<Rgba>,
}

impl TryFrom<TfFile> for TransferFunction {
    type Error = Error;
    fn try_from(f: TfFile) -> Result<Self> {
        TransferFunction::new(f.rgba)
    }
}

impl From<TransferFunction> for TfFile {
    fn from(tf: TransferFunction) -> Self {
        TfFile { rgba: tf.lut }
    }
}

/// LUT index for a normalized scalar: `floor(v * 255 + 0.5)` clamped to `[0, 255]`.
#[inline]
pub fn quantize(value: f32) -> usize {
    let q = (value * 255.0 + 0.5).floor();
    q.clamp(0.0, 255.0) as usize
}

impl TransferFunction {
    pub fn new(lut: Vec<Rgba>) -> Result<Self> {
        if lut.len() != LUT_SIZE {
            return Err(Error::Format(format!("transfer function needs {LUT_SIZE} entries, got {}", lut.len())));
        }
        if lut.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Range("transfer function channel outside [0, 1]".into()));
        }
        Ok(TransferFunction { lut })
    }

    pub fn constant(rgba: Rgba) -> Self {
        TransferFunction::new(vec![rgba; LUT_SIZE]).expect("constant channels must be in [0, 1]")
    }

    /// Opaque `color` for every entry except index 0, which is fully transparent.
    /// Classifies exactly the non-zero voxels of binary datasets.
    pub fn opaque(color: [f32; 3]) -> Self {
        let mut lut = vec![[color[0], color[1], color[2], 1.0]; LUT_SIZE];
        lut[0] = [0.0; 4];
        TransferFunction { lut }
    }

    /// Linear alpha ramp: zero for scalars at or below `lo`, rising to `max_alpha`
    /// at `hi`; color fades from `cold` to `hot` over the same range.
    pub fn ramp(lo: f32, hi: f32, max_alpha: f32, cold: [f32; 3], hot: [f32; 3]) -> Self {
        assert!(lo < hi, "ramp needs lo < hi");
        let lut = (0..LUT_SIZE)
            .map(|i| {
                let x = i as f32 / 255.0;
                let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
                let c: [f32; 3] = std::array::from_fn(|k| cold[k] + (hot[k] - cold[k]) * t);
                [c[0], c[1], c[2], (t * max_alpha).clamp(0.0, 1.0)]
            })
            .collect();
        TransferFunction { lut }
    }

    pub fn lut(&self) -> &[Rgba] {
        &self.lut
    }

    #[inline]
    pub fn lookup(&self, value: f32) -> Rgba {
        self.lut[quantize(value)]
    }

    /// Table with alpha corrected for sampling distance `dt` (in voxels):
    /// `a' = 1 - (1 - a)^dt`.
    pub fn opacity_corrected(&self, dt: f64) -> Vec<Rgba> {
        self.lut
            .iter()
            .map(|&[r, g, b, a]| {
                let a = if a >= 1.0 { 1.0 } else { 1.0 - (1.0 - a as f64).powf(dt) as f32 };
                [r, g, b, a]
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transfer function serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
