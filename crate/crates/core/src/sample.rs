//! Deterministic sampling: quasi-random points in a box and seeded random
//! test vectors in subspaces.

use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::num;

/// How many points and test vectors a run draws, and from which seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub points: usize,
    /// Random unit test vectors drawn per relevant subspace per point.
    pub vectors_per_subspace: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            points: 25,
            vectors_per_subspace: 8,
            seed: 42,
        }
    }
}

const HALTON_PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// `index`-th element (1-based) of the van der Corput sequence in the given
/// base.
fn van_der_corput(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut result = 0.0;
    let mut denom = 1.0;
    while index > 0 {
        denom *= b as f64;
        result += (index % b) as f64 / denom;
        index /= b;
    }
    result
}

/// Low-discrepancy points in the unit cube `[0,1]^dim`, starting at index 1.
pub fn halton_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(
        dim <= HALTON_PRIMES.len(),
        "halton sampling supports up to {} dimensions",
        HALTON_PRIMES.len()
    );
    (1..=count as u64)
        .map(|i| {
            (0..dim)
                .map(|d| van_der_corput(i, HALTON_PRIMES[d]))
                .collect()
        })
        .collect()
}

/// Deterministic stream of random unit vectors, Gaussian-normalized so the
/// direction is uniform on the sphere of the coefficient space.
pub struct VectorSampler {
    rng: rand_chacha::ChaCha8Rng,
}

impl VectorSampler {
    /// The salt keeps different checks on independent streams while staying
    /// reproducible for a fixed plan seed.
    pub fn new(seed: u64, salt: &str) -> Self {
        VectorSampler {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ fnv1a(salt)),
        }
    }

    fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits in [0, 1)
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn gaussian(&mut self) -> f64 {
        // Box-Muller; the log argument is kept away from zero.
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        num::sqrt(-2.0 * num::ln(u1)) * num::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// Random coefficient vector of unit Euclidean norm.
    pub fn unit_coeffs(&mut self, dim: usize) -> DVector<f64> {
        loop {
            let v = DVector::from_fn(dim, |_, _| self.gaussian());
            let n = v.norm();
            if n > 1e-6 {
                return v / n;
            }
        }
    }

    /// Random vector in the span of the orthonormal columns of `basis`
    /// (unit norm in the metric the basis is orthonormal for).
    pub fn unit_in_span(&mut self, basis: &DMatrix<f64>) -> DVector<f64> {
        basis * self.unit_coeffs(basis.ncols())
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Identifier of a failed precondition while drawing sample points.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("sample point {index} at {point:?} lies in the excluded region (clearance {clearance})")]
    Excluded {
        index: usize,
        point: Vec<f64>,
        clearance: f64,
    },
    #[error("sampling failed: {0}")]
    Invalid(String),
}
