//! Seeded noise streams.
//!
//! Every noise source draws from its own ChaCha stream keyed by the run seed,
//! so switching one source off (or adding a sensor) never shifts the draws
//! of the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::so3::Vec3;

const GYRO_STREAM: u64 = 0;
const ACTIVATION_WEIGHT_STREAM: u64 = 1;
const VECTOR_STREAM_BASE: u64 = 16;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Independent `𝒩(0, std²)` draw per axis.
pub fn gaussian3<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Vec3 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Vec3::new(x, y, z) * std
}

/// Streams feeding one simulation run.
#[derive(Debug, Clone)]
pub struct NoiseStreams {
    pub gyro: ChaCha8Rng,
    pub vectors: Vec<ChaCha8Rng>,
}

impl NoiseStreams {
    pub fn new(seed: u64, vector_sensors: usize) -> Self {
        NoiseStreams {
            gyro: stream(seed, GYRO_STREAM),
            vectors: (0..vector_sensors as u64).map(|i| stream(seed, VECTOR_STREAM_BASE + i)).collect(),
        }
    }
}

/// Stream used to draw the activation input weights of a run.
pub fn activation_weight_stream(seed: u64) -> ChaCha8Rng {
    stream(seed, ACTIVATION_WEIGHT_STREAM)
}
