//! Deterministic pseudo-random generation.
//!
//! Everything stochastic in this crate flows through [`RngState`], a
//! counter-based generator: draw `i` of the stream identified by
//! `(seed, stream)` is
//!
//! ```text
//! mix64(key(seed, stream) + i * GAMMA)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer and `GAMMA` the golden-ratio
//! increment. A draw is a pure function of `(seed, stream, i)`, so the
//! integer sequence is reproducible bit-for-bit across runs, processes,
//! and platforms. Distinct streams of one seed are decorrelated by mixing
//! the stream id through the finalizer before it enters the key.
//!
//! Gaussian variates use the Box-Muller transform with deterministic
//! pairing: entries `2i` and `2i+1` of a request come from the same
//! uniform pair, and an odd-length request discards the trailing sine
//! half. Floating-point output additionally depends on the platform's
//! `ln`/`cos`/`sin` rounding; the integer stream does not.

use crate::error::{Error, Result};
use crate::linalg::RealVector;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and an index (trial number,
/// worker id, ...). Children of distinct indices are decorrelated.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_mul(GAMMA) ^ 0xD1B5_4A32_D192_ED03))
}

/// Counter-based generator state. Copyable; copies continue the same
/// sequence independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    seed: u64,
    stream: u64,
    counter: u64,
    key: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngState {
            seed,
            stream,
            counter: 0,
            key: mix64(seed ^ mix64(stream ^ GAMMA)),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit draws taken so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`; safe as a logarithm argument.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }
}

/// Vector of independent `N(0, stddev^2)` entries.
///
/// `stddev == 0` returns zeros without consuming any draws.
pub fn gaussian_vector(rng: &mut RngState, len: usize, stddev: f64) -> Result<RealVector> {
    if len == 0 {
        return Err(Error::InvalidParameter(
            "gaussian vector length must be at least 1".into(),
        ));
    }
    if !stddev.is_finite() || stddev < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "standard deviation must be finite and nonnegative, got {stddev}"
        )));
    }
    if stddev == 0.0 {
        return Ok(RealVector::zeros(len));
    }
    let mut entries = Vec::with_capacity(len);
    while entries.len() < len {
        let (z0, z1) = rng.gaussian_pair();
        entries.push(stddev * z0);
        if entries.len() < len {
            entries.push(stddev * z1);
        }
    }
    Ok(RealVector::from_raw(entries))
}

/// Uniform draw from the unit sphere in `len` dimensions.
///
/// A standard normal vector is normalized; the measure-zero all-zero draw
/// is resampled.
pub fn sphere_uniform(rng: &mut RngState, len: usize) -> Result<RealVector> {
    loop {
        let v = gaussian_vector(rng, len, 1.0)?;
        let norm = crate::linalg::norm2(&v);
        if norm > 0.0 {
            let entries = v.iter().map(|x| x / norm).collect();
            return Ok(RealVector::from_raw(entries));
        }
    }
}
