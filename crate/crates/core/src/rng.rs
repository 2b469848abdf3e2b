//! Counter-addressed random streams.
//!
//! Every frame gets its own ChaCha8 stream: the key is derived from the run
//! seed and the 64-bit stream id packs `(point index, frame index)`. A
//! frame's randomness therefore depends only on its coordinates, never on
//! which worker draws it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bits of the stream id reserved for the frame index.
const FRAME_BITS: u32 = 40;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Root of a family of independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    /// Stream for frame `frame` of experiment point `point`.
    pub fn frame_stream(&self, point: u32, frame: u64) -> ChaCha8Rng {
        assert!(
            point < (1 << (64 - FRAME_BITS)),
            "point index {point} out of range"
        );
        assert!(
            frame < (1 << FRAME_BITS),
            "frame index {frame} out of range"
        );
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream((u64::from(point) << FRAME_BITS) | frame);
        rng
    }
}
