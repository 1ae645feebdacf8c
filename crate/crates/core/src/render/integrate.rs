use super::ray::Ray;
use super::traverse::Segment;
use crate::tf::{quantize, Rgba};
use crate::{Dims, TransferFunction, Volume};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    #[default]
    Trilinear,
    Nearest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Sampling distance in voxels.
    pub dt: f64,
    pub interpolation: Interpolation,
}

pub const DEFAULT_DT: f64 = 0.5;

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { dt: DEFAULT_DT, interpolation: Interpolation::Trilinear }
    }
}

/// Sample positions within this fraction of a step of a segment boundary
/// count as inside the segment.
const LATTICE_SLACK: f64 = 1e-6;

/// Absorption+emission compositor with an opacity-corrected lookup table.
pub struct Compositor<'a> {
    volume: &'a Volume,
    lut: Vec<Rgba>,
    opts: RenderOptions,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integrated {
    /// Premultiplied color and accumulated opacity.
    pub rgba: [f32; 4],
    pub samples: u64,
}

impl<'a> Compositor<'a> {
    pub fn new(volume: &'a Volume, tf: &TransferFunction, opts: RenderOptions) -> Self {
        assert!(opts.dt > 0.0, "step size must be positive");
        Compositor { volume, lut: tf.opacity_corrected(opts.dt), opts }
    }

    pub fn dims(&self) -> Dims {
        self.volume.dims()
    }

    /// Composites front to back over the lattice `t_entry + k·dt`, where
    /// `t_entry` is the ray's entry into the whole volume, visiting only the
    /// lattice points inside `segments`. Skipping therefore never moves a
    /// sample. No early termination.
    pub fn integrate(&self, ray: &Ray, segments: &[Segment]) -> Integrated {
        let mut out = Integrated::default();
        let Some((ta, tb)) = ray.volume_range(self.volume.dims()) else { return out };
        let dt = self.opts.dt;
        let total = ((tb - ta) / dt).ceil().max(0.0) as i64;
        let [mut r, mut g, mut b, mut a] = [0f32; 4];
        let mut next = 0i64;
        for s in segments {
            let first = (((s.t0 - ta) / dt - LATTICE_SLACK).ceil() as i64).max(next);
            let end = (((s.t1 - ta) / dt + LATTICE_SLACK).ceil() as i64).min(total);
            for k in first..end {
                let p = ray.at(ta + k as f64 * dt);
                let v = match self.opts.interpolation {
                    Interpolation::Trilinear => self.volume.sample_trilinear(p),
                    Interpolation::Nearest => self.volume.sample_nearest(p),
                };
                let c = self.lut[quantize(v)];
                if c[3] > 0.0 {
                    let w = (1.0 - a) * c[3];
                    r += w * c[0];
                    g += w * c[1];
                    b += w * c[2];
                    a += w;
                }
            }
            out.samples += (end - first).max(0) as u64;
            next = next.max(end);
        }
        out.rgba = [r, g, b, a];
        out
    }
}

/// One-shot integration of a single ray; see [`Compositor::integrate`].
pub fn integrate(
    ray: &Ray,
    segments: &[Segment],
    volume: &Volume,
    tf: &TransferFunction,
    opts: RenderOptions,
) -> Integrated {
    Compositor::new(volume, tf, opts).integrate(ray, segments)
}
