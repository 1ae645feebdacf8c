//! 30-bit 3-d Morton codes (10 bits per axis).

use crate::{Error, Result};

/// Largest coordinate (exclusive) representable per axis.
pub const AXIS_LIMIT: u32 = 1 << 10;

#[inline]
fn spread(v: u32) -> u32 {
    let mut x = v & 0x3ff;
    x = (x | (x << 16)) & 0x030000ff;
    x = (x | (x << 8)) & 0x0300f00f;
    x = (x | (x << 4)) & 0x030c30c3;
    x = (x | (x << 2)) & 0x09249249;
    x
}

#[inline]
fn compact(v: u32) -> u32 {
    let mut x = v & 0x09249249;
    x = (x | (x >> 2)) & 0x030c30c3;
    x = (x | (x >> 4)) & 0x0300f00f;
    x = (x | (x >> 8)) & 0x030000ff;
    x = (x | (x >> 16)) & 0x000003ff;
    x
}

/// Interleaves the bits of `x`, `y` and `z`: bit `i` of `x` lands at bit `3i`,
/// of `y` at `3i + 1` and of `z` at `3i + 2`.
pub fn encode(x: u32, y: u32, z: u32) -> Result<u32> {
    if x >= AXIS_LIMIT || y >= AXIS_LIMIT || z >= AXIS_LIMIT {
        return Err(Error::Range(format!("morton coordinate ({x}, {y}, {z}) exceeds 10 bits per axis")));
    }
    Ok(encode_unchecked(x, y, z))
}

#[inline]
pub(crate) fn encode_unchecked(x: u32, y: u32, z: u32) -> u32 {
    spread(x) | (spread(y) << 1) | (spread(z) << 2)
}

pub fn decode(code: u32) -> [u32; 3] {
    [compact(code), compact(code >> 1), compact(code >> 2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference interleave, one bit at a time.
    fn interleave_oracle(x: u32, y: u32, z: u32) -> u32 {
        let mut code = 0;
        for i in 0..10 {
            code |= ((x >> i) & 1) << (3 * i);
            code |= ((y >> i) & 1) << (3 * i + 1);
            code |= ((z >> i) & 1) << (3 * i + 2);
        }
        code
    }

    #[test]
    fn known_codes() {
        assert_eq!(encode(0, 0, 0).unwrap(), 0);
        assert_eq!(encode(1, 1, 1).unwrap(), 7);
        assert_eq!(encode(3, 0, 0).unwrap(), 9);
        assert_eq!(encode(1023, 1023, 1023).unwrap(), (1 << 30) - 1);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(encode(1024, 0, 0), Err(Error::Range(_))));
        assert!(encode(0, 0, 5000).is_err());
    }

    proptest! {
        #[test]
        fn matches_oracle_and_round_trips(x in 0u32..1024, y in 0u32..1024, z in 0u32..1024) {
            let code = encode(x, y, z).unwrap();
            prop_assert_eq!(code, interleave_oracle(x, y, z));
            prop_assert_eq!(decode(code), [x, y, z]);
        }
    }
}
