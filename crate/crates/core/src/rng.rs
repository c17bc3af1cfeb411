//! Reproducible random streams.
//!
//! Every sampler in this crate takes an explicit [`RngStream`]. A stream is
//! identified by a `(seed, stream_id)` pair and is backed by ChaCha8: the
//! seed is expanded into the 256-bit key with `seed_from_u64` and the stream
//! id selects the ChaCha stream word. The same pair always yields the same
//! draws on every platform, and distinct stream ids give independent
//! sequences under the same key.

use rand::distributions::{Distribution, Open01, Standard};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name recorded in output headers.
pub const GENERATOR_NAME: &str = "ChaCha8Rng(rand_chacha 0.3; key=seed_from_u64(seed); stream=stream_id)";

/// Sign of a centre move, the `ξ` of the thinned process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: num_traits::Float>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh stream `stream_id + index` under the same seed, positioned at
    /// its first draw. Replication `i` of a sample uses `substream(i)`.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, self.stream.wrapping_add(index))
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform<T>(&mut self) -> T
    where
        Standard: Distribution<T>,
    {
        self.inner.gen()
    }

    /// Uniform on `(0, 1)`.
    pub fn open01<T>(&mut self) -> T
    where
        Open01: Distribution<T>,
    {
        self.inner.sample(Open01)
    }

    pub fn sign(&mut self) -> Sign {
        if self.inner.gen::<bool>() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
