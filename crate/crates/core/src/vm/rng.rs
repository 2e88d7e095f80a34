//! Counter-based random bit source.
//!
//! Every random bit a strategy consumes is a pure function of its seed and the
//! position of the bit in the stream, so any computation path can be replayed
//! from the seed alone.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and two indices (for example a
/// sample index and a player index).
pub fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    let h = splitmix64(base ^ splitmix64(a.wrapping_mul(GOLDEN_GAMMA)));
    splitmix64(h ^ splitmix64(b.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Where random bits come from.
#[derive(Debug, Clone)]
pub enum BitSource {
    /// Counter-mode splitmix stream keyed by a seed.
    Seeded { seed: u64, counter: u64, word: u64, left: u32 },
    /// An explicit tape; reading past its end yields zeros.
    Tape { bits: Vec<bool>, pos: usize },
}

impl BitSource {
    pub fn seeded(seed: u64) -> Self {
        BitSource::Seeded { seed, counter: 0, word: 0, left: 0 }
    }

    pub fn tape(bits: Vec<bool>) -> Self {
        BitSource::Tape { bits, pos: 0 }
    }

    /// Next bit of the stream, most significant bit of each word first.
    pub fn next_bit(&mut self) -> bool {
        match self {
            BitSource::Seeded { seed, counter, word, left } => {
                if *left == 0 {
                    *word = splitmix64(seed.wrapping_add(counter.wrapping_mul(GOLDEN_GAMMA)) ^ 0x5DEE_CE66_D1CE_4E5B);
                    *counter += 1;
                    *left = 64;
                }
                *left -= 1;
                (*word >> *left) & 1 == 1
            }
            BitSource::Tape { bits, pos } => {
                let b = bits.get(*pos).copied().unwrap_or(false);
                *pos += 1;
                b
            }
        }
    }

    /// Number of bits consumed so far.
    pub fn consumed(&self) -> u64 {
        match self {
            BitSource::Seeded { counter, left, .. } => counter * 64 - u64::from(*left),
            BitSource::Tape { pos, .. } => *pos as u64,
        }
    }

    /// Uniform value below `bound` (> 0) by rejection on the bit stream.
    /// Returns the value and the number of bits drawn.
    pub fn below(&mut self, bound: u64) -> (u64, u64) {
        assert!(bound > 0);
        if bound == 1 {
            return (0, 0);
        }
        let width = 64 - (bound - 1).leading_zeros();
        let mut drawn = 0;
        loop {
            let mut v = 0u64;
            for _ in 0..width {
                v = (v << 1) | u64::from(self.next_bit());
            }
            drawn += u64::from(width);
            if v < bound {
                return (v, drawn);
            }
        }
    }
}
