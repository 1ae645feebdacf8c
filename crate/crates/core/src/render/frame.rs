use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// RGBA8 image plus the number of scalar samples it took to render.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
    pub sample_count: u64,
}

impl Frame {
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2], self.pixels[i + 3]]
    }

    /// Largest per-channel difference to another frame of the same size.
    pub fn max_channel_diff(&self, other: &Frame) -> u8 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.pixels.iter().zip(&other.pixels).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(path, &self.pixels, self.width, self.height, image::ExtendedColorType::Rgba8)?;
        Ok(())
    }

    pub fn save_raw(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.pixels).map_err(|e| Error::io(path, e))
    }
}

/// Maps a composited color channel in `[0, 1]` to 8 bits.
#[inline]
pub fn quantize_channel(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}
