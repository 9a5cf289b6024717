use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded source of independent random streams.
///
/// A `RandomSource` never hands out a shared generator. Callers ask for the
/// stream belonging to a specific event index (`stream(i)`), or derive a
/// child source for a named purpose (`derive("importance")`). Outputs
/// therefore depend only on the master seed and the indices involved, never
/// on how work is scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    master_seed: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Child source for a named purpose.
    pub fn derive(&self, label: &str) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed ^ splitmix64(fnv1a(label.as_bytes()))),
        }
    }

    /// Child source for a numbered purpose (generation, run, ...).
    pub fn derive_index(&self, index: u64) -> Self {
        Self {
            master_seed: splitmix64(self.master_seed.wrapping_add(splitmix64(index ^ 0xA076_1D64_78BD_642F))),
        }
    }

    /// Independent generator for event `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
