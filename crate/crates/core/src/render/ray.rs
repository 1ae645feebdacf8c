use crate::Dims;

/// Ray with a unit direction; `t` measures world (voxel) units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: [f64; 3],
    pub dir: [f64; 3],
    inv_dir: [f64; 3],
}

impl Ray {
    pub fn new(origin: [f64; 3], dir: [f64; 3]) -> Self {
        let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!(len > 0.0, "ray direction must be non-zero");
        let dir = dir.map(|d| d / len);
        Ray { origin, dir, inv_dir: dir.map(|d| 1.0 / d) }
    }

    #[inline]
    pub fn at(&self, t: f64) -> [f64; 3] {
        std::array::from_fn(|a| self.origin[a] + self.dir[a] * t)
    }

    /// Slab test against `[lo, hi]`, clipped to `t >= 0`.
    #[inline]
    pub fn intersect_box(&self, lo: [f64; 3], hi: [f64; 3]) -> Option<(f64, f64)> {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            if self.dir[a] == 0.0 {
                if self.origin[a] < lo[a] || self.origin[a] > hi[a] {
                    return None;
                }
                continue;
            }
            let ta = (lo[a] - self.origin[a]) * self.inv_dir[a];
            let tb = (hi[a] - self.origin[a]) * self.inv_dir[a];
            let (near, far) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(near);
            t1 = t1.min(far);
        }
        (t0 < t1).then_some((t0, t1))
    }

    /// Entry and exit of the volume box `[0, dims]`.
    #[inline]
    pub fn volume_range(&self, dims: Dims) -> Option<(f64, f64)> {
        self.intersect_box([0.0; 3], dims.map(f64::from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_hit_and_miss() {
        let r = Ray::new([-1.0, 0.5, 0.5], [1.0, 0.0, 0.0]);
        assert_eq!(r.volume_range([1, 1, 1]), Some((1.0, 2.0)));
        let miss = Ray::new([-1.0, 1.5, 0.5], [1.0, 0.0, 0.0]);
        assert_eq!(miss.volume_range([1, 1, 1]), None);
        let behind = Ray::new([3.0, 0.5, 0.5], [1.0, 0.0, 0.0]);
        assert_eq!(behind.volume_range([1, 1, 1]), None);
    }
}
