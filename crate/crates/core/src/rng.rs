//! Deterministic random streams.
//!
//! Every trial draws from its own ChaCha12 stream keyed by SHA-256 of
//! `(master_seed, index, tag)`, so results do not depend on worker count or
//! scheduling, and extending a campaign leaves earlier trials untouched.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha12Rng;

/// Purpose tags keep the streams of one trial independent of each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Channel,
    Noise,
    Pilot,
    Sto,
    Model,
    Theory,
    Custom(u32),
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Channel => 1,
            StreamTag::Noise => 2,
            StreamTag::Pilot => 3,
            StreamTag::Sto => 4,
            StreamTag::Model => 5,
            StreamTag::Theory => 6,
            StreamTag::Custom(c) => 0x1_0000_0000 | c as u64,
        }
    }
}

/// 256-bit seed for `(master_seed, index, tag)`.
pub fn derive_seed(master_seed: u64, index: u64, tag: StreamTag) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"lmmse-lab/substream/v1");
    h.update(master_seed.to_le_bytes());
    h.update(index.to_le_bytes());
    h.update(tag.code().to_le_bytes());
    h.finalize().into()
}

pub fn substream(master_seed: u64, index: u64, tag: StreamTag) -> SimRng {
    SimRng::from_seed(derive_seed(master_seed, index, tag))
}

/// 64-bit digest of `(master_seed, index, tag)`, e.g. for pilot seeds.
pub fn derive_u64(master_seed: u64, index: u64, tag: StreamTag) -> u64 {
    let s = derive_seed(master_seed, index, tag);
    u64::from_le_bytes(s[..8].try_into().unwrap())
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}
