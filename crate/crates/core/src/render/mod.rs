//! Ray marching with pluggable empty space skipping.

mod camera;
mod frame;
mod integrate;
mod ray;
pub mod traverse;

use rayon::prelude::*;

pub use camera::Camera;
pub use frame::{quantize_channel, Frame};
pub use integrate::{integrate, Compositor, Integrated, Interpolation, RenderOptions, DEFAULT_DT};
pub use ray::Ray;
pub use traverse::{
    traverse, traverse_grid, traverse_hybrid, traverse_kd, traverse_lbvh, traverse_naive, Segment, SegmentList,
};

use crate::{SpatialIndex, TransferFunction, Volume};

/// Renders one frame, pixel rows in parallel. Output is deterministic.
pub fn render_frame(
    volume: &Volume,
    tf: &TransferFunction,
    index: &SpatialIndex,
    cam: &Camera,
    opts: RenderOptions,
) -> Frame {
    let comp = Compositor::new(volume, tf, opts);
    let dims = volume.dims();
    let row_len = cam.width as usize * 4;
    let mut pixels = vec![0u8; row_len * cam.height as usize];
    let sample_count = pixels
        .par_chunks_mut(row_len)
        .enumerate()
        .map(|(y, row)| {
            let mut samples = 0u64;
            for (x, px) in row.chunks_exact_mut(4).enumerate() {
                let ray = cam.ray(x as u32, y as u32);
                let segs = traverse(index, &ray, dims);
                let out = comp.integrate(&ray, &segs);
                samples += out.samples;
                for (p, c) in px.iter_mut().zip(out.rgba) {
                    *p = quantize_channel(c);
                }
            }
            samples
        })
        .sum();
    Frame { width: cam.width, height: cam.height, pixels, sample_count }
}
