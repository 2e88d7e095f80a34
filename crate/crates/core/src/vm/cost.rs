//! Cost model shared by the interpreter and by host-implemented strategies.
//!
//! Every executed instruction costs one unit, plus the total bit length of
//! its arithmetic operands, plus one unit per output bit and per random bit.

/// Cost helpers. All costs are at least one unit.
pub struct CostModel;

impl CostModel {
    pub const BASE: u64 = 1;

    /// An instruction with no surcharge (jump, halt).
    pub const fn plain() -> u64 {
        Self::BASE
    }

    /// Arithmetic or comparison over operands of the given bit lengths.
    pub fn arith(operand_bits: &[u64]) -> u64 {
        operand_bits.iter().fold(Self::BASE, |acc, b| acc.saturating_add(*b))
    }

    /// `a * b mod m`, charged as a multiply followed by a division.
    pub fn mul_mod(a_bits: u64, b_bits: u64, m_bits: u64) -> u64 {
        Self::arith(&[a_bits, b_bits]).saturating_add(Self::arith(&[a_bits + b_bits, m_bits]))
    }

    /// Emitting `bits` output bits in one instruction.
    pub fn emit(bits: u64) -> u64 {
        Self::BASE.saturating_add(bits)
    }

    /// Drawing `bits` random bits in one instruction.
    pub fn draw(bits: u64) -> u64 {
        Self::BASE.saturating_add(bits)
    }

    /// Reading an input value of the given bit length into a register.
    pub fn read(bits: u64) -> u64 {
        Self::BASE.saturating_add(bits)
    }

    /// Loading an immediate of the given bit length.
    pub fn load(bits: u64) -> u64 {
        Self::BASE.saturating_add(bits)
    }
}

/// Step meter enforcing a hard cap.
#[derive(Debug, Clone)]
pub struct Meter {
    cap: u64,
    used: u64,
}

/// The cap was reached; the run is treated as non-halting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapExceeded;

impl Meter {
    pub fn new(cap: u64) -> Self {
        Meter { cap, used: 0 }
    }

    /// Charges `cost` units. On overflow of the cap the meter saturates at the
    /// cap and reports exhaustion.
    pub fn charge(&mut self, cost: u64) -> Result<(), CapExceeded> {
        debug_assert!(cost >= 1);
        match self.used.checked_add(cost) {
            Some(total) if total <= self.cap => {
                self.used = total;
                Ok(())
            }
            _ => {
                self.used = self.cap;
                Err(CapExceeded)
            }
        }
    }

    /// True if `cost` more units would fit.
    pub fn can_afford(&self, cost: u64) -> bool {
        self.used.checked_add(cost).is_some_and(|t| t <= self.cap)
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn remaining(&self) -> u64 {
        self.cap - self.used
    }
}
