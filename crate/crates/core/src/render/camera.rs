use super::ray::Ray;
use crate::{Dims, Error, Result};

/// Orthographic camera: parallel rays through a rectangular viewport.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub eye: [f64; 3],
    pub dir: [f64; 3],
    pub up: [f64; 3],
    right: [f64; 3],
    /// World-space height of the viewport; the width follows the aspect ratio.
    pub extent: f64,
    pub width: u32,
    pub height: u32,
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.map(|c| c / len)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl Camera {
    pub fn new(eye: [f64; 3], dir: [f64; 3], up: [f64; 3], extent: f64, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 || !(extent > 0.0) {
            return Err(Error::Config("camera needs a positive viewport".into()));
        }
        let dir = normalize(dir);
        let right = cross(dir, up);
        let rlen = right.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(rlen > 1e-9) || dir.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("camera direction and up must not be collinear".into()));
        }
        let right = right.map(|c| c / rlen);
        let up = cross(right, dir);
        Ok(Camera { eye, dir, up, right, extent, width, height })
    }

    /// Looks at the volume center from `azimuth` (around +y) and `elevation`
    /// (degrees). At `zoom` 1 the viewport spans the bounding sphere diameter,
    /// so the volume fills the window from every angle.
    pub fn orbit(dims: Dims, azimuth_deg: f64, elevation_deg: f64, zoom: f64, width: u32, height: u32) -> Result<Self> {
        if !(zoom > 0.0) {
            return Err(Error::Config("zoom must be positive".into()));
        }
        let center = dims.map(|d| d as f64 / 2.0);
        let radius = dims.iter().map(|&d| (d as f64 / 2.0).powi(2)).sum::<f64>().sqrt();
        let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians().clamp(-1.5, 1.5));
        let offset = [el.cos() * az.sin(), el.sin(), el.cos() * az.cos()];
        let eye = std::array::from_fn(|a| center[a] + offset[a] * 2.0 * radius);
        Camera::new(eye, offset.map(|c| -c), [0.0, 1.0, 0.0], 2.0 * radius / zoom, width, height)
    }

    /// Ray through the center of pixel `(px, py)`; row 0 is the top.
    #[inline]
    pub fn ray(&self, px: u32, py: u32) -> Ray {
        let h = self.extent;
        let w = h * self.width as f64 / self.height as f64;
        let u = ((px as f64 + 0.5) / self.width as f64 - 0.5) * w;
        let v = (0.5 - (py as f64 + 0.5) / self.height as f64) * h;
        let origin = std::array::from_fn(|a| self.eye[a] + self.right[a] * u + self.up[a] * v);
        Ray::new(origin, self.dir)
    }
}
