//! Step-metered register machine for strategy programs.

pub mod asm;
pub mod cost;
pub mod exec;
pub mod program;
pub mod rng;

pub use asm::{parse_program, to_asm};
pub use cost::{CapExceeded, CostModel, Meter};
pub use exec::{execute, execute_with, ExecutionInput, ExecutionOutcome};
pub use program::{Bits, InputField, Instr, Program, Reg};
pub use rng::{mix_seed, splitmix64, BitSource};

/// Description size of a program in bits under the canonical serialization.
pub fn program_size_bits(program: &Program) -> u64 {
    program.size_bits()
}
