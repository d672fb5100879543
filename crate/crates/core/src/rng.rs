//! Counter-based random streams.
//!
//! Every random quantity consumed by an estimator is drawn from a stream
//! identified by `(seed, level, scenario, draw)`. The stream is a SplitMix64
//! sequence whose starting point is a hash of that key, so any stream can be
//! created in O(1) without touching the others. Results therefore do not
//! depend on thread count or on the order in which scenarios are visited.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Draw index reserved for the outer sample of a scenario.
pub const OUTER_DRAW: u64 = u64::MAX;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub level: u64,
    pub scenario: u64,
    pub draw: u64,
}

impl StreamKey {
    pub fn new(seed: u64, level: u64, scenario: u64, draw: u64) -> Self {
        Self {
            seed,
            level,
            scenario,
            draw,
        }
    }

    /// Key of the outer sample of `scenario` at `level`.
    pub fn outer(seed: u64, level: u64, scenario: u64) -> Self {
        Self::new(seed, level, scenario, OUTER_DRAW)
    }

    /// 64-bit digest of the key, usable as a derived seed.
    pub fn digest(&self) -> u64 {
        self.hash()
    }

    fn hash(&self) -> u64 {
        let mut h = mix64(self.seed ^ 0x6A09_E667_F3BC_C908);
        h = mix64(h ^ self.level.wrapping_add(1).wrapping_mul(GOLDEN));
        h = mix64(h ^ self.scenario.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03));
        mix64(h ^ self.draw.wrapping_add(1).wrapping_mul(0x8CB9_2BA7_2F3D_8DD7))
    }
}

/// SplitMix64 generator positioned at the start of a keyed stream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

impl StreamRng {
    pub fn new(key: StreamKey) -> Self {
        Self { state: key.hash() }
    }

    pub fn from_parts(seed: u64, level: u64, scenario: u64, draw: u64) -> Self {
        Self::new(StreamKey::new(seed, level, scenario, draw))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
