//! Real-amplitude single-qubit states (rebits) in the linear-polarization
//! picture, measurement bases, and Born-rule measurement.
//!
//! A state `|phi⟩` has amplitude `cos(phi - theta)` on the basis vector
//! `|theta⟩`. A basis `{|theta⟩, |theta + 90°⟩}` reads bit 0 on the first
//! vector and bit 1 on the second.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Angles closer than this (in degrees) compare equal.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

fn reduce(angle: f64, period: f64) -> Result<f64> {
    if !angle.is_finite() {
        return Err(Error::NonFiniteAngle(angle));
    }
    let r = angle.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs.
    Ok(if r >= period { 0.0 } else { r })
}

/// Distance between two angles on a circle of the given period.
fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

/// Measurement / writing basis `{|theta⟩, |theta + 90°⟩}`, `theta ∈ [0, 90)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    theta: f64,
}

impl Basis {
    pub const RECTILINEAR: Basis = Basis { theta: 0.0 };
    pub const DIAGONAL: Basis = Basis { theta: 45.0 };

    /// Builds a basis, reducing `theta` modulo 90°.
    pub fn new(theta_degrees: f64) -> Result<Self> {
        Ok(Basis {
            theta: reduce(theta_degrees, 90.0)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Two bases are dissimilar iff their angles differ (modulo 90°, beyond
    /// [`ANGLE_TOLERANCE`]).
    pub fn is_dissimilar(&self, other: &Basis) -> bool {
        circular_distance(self.theta, other.theta, 90.0) > ANGLE_TOLERANCE
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.theta)
    }
}

/// Pure rebit state `|phi⟩`, `phi ∈ [0, 180)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RebitState {
    phi: f64,
}

impl RebitState {
    /// Builds a state, reducing `phi` modulo 180°.
    pub fn new(phi_degrees: f64) -> Result<Self> {
        Ok(RebitState {
            phi: reduce(phi_degrees, 180.0)?,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Amplitudes `(alpha0, alpha1)` on the vectors of `basis`.
    pub fn amplitudes(&self, basis: Basis) -> (f64, f64) {
        let d = (self.phi - basis.theta).to_radians();
        (d.cos(), d.sin())
    }

    /// Tolerant equality (angles modulo 180°).
    pub fn approx_eq(&self, other: &RebitState) -> bool {
        circular_distance(self.phi, other.phi, 180.0) <= ANGLE_TOLERANCE
    }

    /// True if the state is `|theta⟩` or `|theta + 90°⟩` for `basis`.
    pub fn is_eigenstate_of(&self, basis: Basis) -> bool {
        circular_distance(self.phi, basis.theta, 90.0) <= ANGLE_TOLERANCE
    }
}

/// A stream of uniform reals in `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

impl<T: UniformSource + ?Sized> UniformSource for &mut T {
    fn next_uniform(&mut self) -> f64 {
        (**self).next_uniform()
    }
}

/// Seedable, platform-independent randomness (ChaCha20 under the hood).
///
/// Each draw takes the top 53 bits of one 64-bit output word, so the
/// transcript for a given seed is identical on every platform.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn seeded(seed: u64) -> Self {
        RandomSource {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` under the same seed, for per-trial
    /// Monte Carlo fan-out.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { rng }
    }

    pub fn from_entropy() -> Self {
        RandomSource {
            rng: ChaCha20Rng::from_os_rng(),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

impl UniformSource for RandomSource {
    fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Replays a fixed list of draws, cycling. Handy for pinning transcripts.
#[derive(Debug, Clone)]
pub struct FixedSequence {
    draws: Vec<f64>,
    pos: usize,
}

impl FixedSequence {
    pub fn new(draws: Vec<f64>) -> Self {
        assert!(!draws.is_empty(), "FixedSequence needs at least one draw");
        FixedSequence { draws, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl UniformSource for FixedSequence {
    fn next_uniform(&mut self) -> f64 {
        let v = self.draws[self.pos % self.draws.len()];
        self.pos += 1;
        v
    }
}

/// The eigenstate `|theta + bit·90°⟩` of `basis`.
pub fn encode_bit(bit: bool, basis: Basis) -> RebitState {
    let phi = basis.theta + if bit { 90.0 } else { 0.0 };
    // theta < 90, so phi < 180 already.
    RebitState { phi }
}

/// `cos` of an angle in `[0, 180]` degrees, exact where the value is
/// rational (multiples of 60 and 90).
fn cos_degrees(a: f64) -> f64 {
    match a {
        0.0 => 1.0,
        60.0 => 0.5,
        90.0 => 0.0,
        120.0 => -0.5,
        180.0 => -1.0,
        _ => a.to_radians().cos(),
    }
}

/// Born-rule probability of reading `bit` when measuring `state` in `basis`:
/// `cos²(phi - theta - bit·90°)`.
pub fn outcome_probability(state: RebitState, basis: Basis, bit: bool) -> f64 {
    // Fold |phi - theta| into [0, 90]; cos² is even with period 180°.
    let mut d = (state.phi - basis.theta).abs() % 180.0;
    if d > 90.0 {
        d = 180.0 - d;
    }
    let p0 = if d <= ANGLE_TOLERANCE {
        1.0
    } else if 90.0 - d <= ANGLE_TOLERANCE {
        0.0
    } else {
        // Half-angle form: exact at d = 45.
        0.5 * (1.0 + cos_degrees(2.0 * d))
    };
    if bit {
        if p0 == 1.0 {
            0.0
        } else if p0 == 0.0 {
            1.0
        } else {
            0.5 * (1.0 - cos_degrees(2.0 * d))
        }
    } else {
        p0
    }
}

/// Measures `state` in `basis`, consuming exactly one draw: bit 0 iff the
/// draw falls below the probability of 0.
pub fn measure<R: UniformSource + ?Sized>(state: RebitState, basis: Basis, rng: &mut R) -> bool {
    let u = rng.next_uniform();
    u >= outcome_probability(state, basis, false)
}

/// Probability that a bit written in `writing` reads flipped in `reading`:
/// `sin²(theta_w - theta_r)`.
pub fn expected_error_probability(writing: Basis, reading: Basis) -> f64 {
    outcome_probability(encode_bit(false, writing), reading, true)
}
