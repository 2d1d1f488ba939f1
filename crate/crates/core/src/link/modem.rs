//! Gray-coded square 16-QAM with unit average symbol energy.
//!
//! A symbol carries four bits `b0 b1 b2 b3` (`b0` is the most significant
//! bit of the nibble). `b0 b1` select the in-phase level and `b2 b3` the
//! quadrature level, each through the Gray table
//! `00 → −3, 01 → −1, 11 → +1, 10 → +3`, scaled by `1/√10`.

use num_complex::Complex64;

pub const BITS_PER_SYMBOL: u32 = 4;

const SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10

fn level(pair: u8) -> f64 {
    match pair & 0b11 {
        0b00 => -3.0,
        0b01 => -1.0,
        0b11 => 1.0,
        _ => 3.0,
    }
}

/// Nearest level, ties resolved toward the more negative level.
fn slice_level(x: f64) -> u8 {
    if x <= -2.0 {
        0b00
    } else if x <= 0.0 {
        0b01
    } else if x <= 2.0 {
        0b11
    } else {
        0b10
    }
}

/// Maps the low nibble of `bits` to a constellation point.
pub fn qam16_map(bits: u8) -> Complex64 {
    Complex64::new(level(bits >> 2), level(bits)) * SCALE
}

/// Hard decision back to a nibble.
pub fn qam16_slice(y: Complex64) -> u8 {
    let y = y / SCALE;
    (slice_level(y.re) << 2) | slice_level(y.im)
}
