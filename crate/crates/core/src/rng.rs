//! Seed derivation for independent random substreams.
//!
//! Every random decision in a run is drawn from a stream whose seed is a
//! stable function of the master seed, a stream tag and up to two indices.
//! Node-level streams are keyed by `(iteration, node)`, so the order in which
//! nodes are evaluated never changes the outcome.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type SimRng = Pcg64Mcg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 1,
    Profiles = 2,
    InitialState = 3,
    Messages = 4,
    Node = 5,
}

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, a: u64, b: u64) -> u64 {
    let mut h = mix64(master);
    h = mix64(h ^ stream as u64);
    h = mix64(h ^ a);
    mix64(h ^ b.rotate_left(32))
}

pub fn stream_rng(master: u64, stream: Stream, a: u64, b: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream, a, b))
}

/// Random sources for one synchronous timestep.
#[derive(Debug, Clone, Copy)]
pub struct StepRng {
    pub seed: u64,
    pub iteration: u64,
}

impl StepRng {
    pub fn new(seed: u64, iteration: u64) -> Self {
        Self { seed, iteration }
    }

    pub fn messages(&self) -> SimRng {
        stream_rng(self.seed, Stream::Messages, self.iteration, 0)
    }

    pub fn node(&self, node: usize) -> SimRng {
        stream_rng(self.seed, Stream::Node, self.iteration, node as u64)
    }
}
