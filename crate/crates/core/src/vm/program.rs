use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of general purpose registers.
pub const NUM_REGS: usize = 16;

/// A register index, `r0` through `r15`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reg(u8);

impl Reg {
    pub fn new(index: u8) -> Option<Reg> {
        (usize::from(index) < NUM_REGS).then_some(Reg(index))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Input tape fields readable by `input`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputField {
    /// ⌈1/ε⌉
    Eps,
    /// ⌈1/δ⌉
    Delta,
    /// The opponent's output bits read as a big-endian integer.
    Opp,
    /// Length in bits of the opponent's output.
    OppLen,
}

impl InputField {
    pub fn name(self) -> &'static str {
        match self {
            InputField::Eps => "eps",
            InputField::Delta => "delta",
            InputField::Opp => "opp",
            InputField::OppLen => "opplen",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "eps" => InputField::Eps,
            "delta" => InputField::Delta,
            "opp" => InputField::Opp,
            "opplen" => InputField::OppLen,
            _ => return None,
        })
    }

    fn code(self) -> u64 {
        match self {
            InputField::Eps => 0,
            InputField::Delta => 1,
            InputField::Opp => 2,
            InputField::OppLen => 3,
        }
    }
}

/// Register machine instructions. Registers hold non-negative integers;
/// subtraction truncates at zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instr {
    Set(Reg, BigUint),
    Mov(Reg, Reg),
    Input(Reg, InputField),
    Add(Reg, Reg, Reg),
    Sub(Reg, Reg, Reg),
    Mul(Reg, Reg, Reg),
    /// `divmod q, r, a, b`; division by zero yields `q = 0, r = a`.
    DivMod(Reg, Reg, Reg, Reg),
    Shl(Reg, Reg, Reg),
    Shr(Reg, Reg, Reg),
    BitLen(Reg, Reg),
    Jmp(usize),
    Jlt(Reg, Reg, usize),
    Jle(Reg, Reg, usize),
    Jeq(Reg, Reg, usize),
    Jne(Reg, Reg, usize),
    Jz(Reg, usize),
    Jnz(Reg, usize),
    /// One random bit.
    RBit(Reg),
    /// As many random bits as the second register's value.
    RBits(Reg, Reg),
    /// Emit the low bit of a register.
    Emit(Reg),
    /// Emit a literal bit.
    EmitB(bool),
    /// Emit the binary expansion of a register (nothing for zero).
    EmitInt(Reg),
    /// Emit as many one-bits as the register's value.
    EmitOnes(Reg),
    Halt,
}

impl Instr {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Instr::Set(..) => "set",
            Instr::Mov(..) => "mov",
            Instr::Input(..) => "input",
            Instr::Add(..) => "add",
            Instr::Sub(..) => "sub",
            Instr::Mul(..) => "mul",
            Instr::DivMod(..) => "divmod",
            Instr::Shl(..) => "shl",
            Instr::Shr(..) => "shr",
            Instr::BitLen(..) => "bitlen",
            Instr::Jmp(..) => "jmp",
            Instr::Jlt(..) => "jlt",
            Instr::Jle(..) => "jle",
            Instr::Jeq(..) => "jeq",
            Instr::Jne(..) => "jne",
            Instr::Jz(..) => "jz",
            Instr::Jnz(..) => "jnz",
            Instr::RBit(..) => "rbit",
            Instr::RBits(..) => "rbits",
            Instr::Emit(..) => "emit",
            Instr::EmitB(..) => "emitb",
            Instr::EmitInt(..) => "emitint",
            Instr::EmitOnes(..) => "emitones",
            Instr::Halt => "halt",
        }
    }

    fn opcode(&self) -> u64 {
        match self {
            Instr::Set(..) => 0,
            Instr::Mov(..) => 1,
            Instr::Input(..) => 2,
            Instr::Add(..) => 3,
            Instr::Sub(..) => 4,
            Instr::Mul(..) => 5,
            Instr::DivMod(..) => 6,
            Instr::Shl(..) => 7,
            Instr::Shr(..) => 8,
            Instr::BitLen(..) => 9,
            Instr::Jmp(..) => 10,
            Instr::Jlt(..) => 11,
            Instr::Jle(..) => 12,
            Instr::Jeq(..) => 13,
            Instr::Jne(..) => 14,
            Instr::Jz(..) => 15,
            Instr::Jnz(..) => 16,
            Instr::RBit(..) => 17,
            Instr::RBits(..) => 18,
            Instr::Emit(..) => 19,
            Instr::EmitB(..) => 20,
            Instr::EmitInt(..) => 21,
            Instr::EmitOnes(..) => 22,
            Instr::Halt => 23,
        }
    }

    /// Branch target, if this is a jump.
    pub fn target(&self) -> Option<usize> {
        match *self {
            Instr::Jmp(t)
            | Instr::Jlt(_, _, t)
            | Instr::Jle(_, _, t)
            | Instr::Jeq(_, _, t)
            | Instr::Jne(_, _, t)
            | Instr::Jz(_, t)
            | Instr::Jnz(_, t) => Some(t),
            _ => None,
        }
    }

    fn registers(&self) -> Vec<Reg> {
        match self {
            Instr::Set(a, _) | Instr::Input(a, _) | Instr::RBit(a) | Instr::Emit(a) => vec![*a],
            Instr::EmitInt(a) | Instr::EmitOnes(a) | Instr::Jz(a, _) | Instr::Jnz(a, _) => vec![*a],
            Instr::Mov(a, b) | Instr::BitLen(a, b) | Instr::RBits(a, b) => vec![*a, *b],
            Instr::Jlt(a, b, _) | Instr::Jle(a, b, _) | Instr::Jeq(a, b, _) | Instr::Jne(a, b, _) => {
                vec![*a, *b]
            }
            Instr::Add(a, b, c)
            | Instr::Sub(a, b, c)
            | Instr::Mul(a, b, c)
            | Instr::Shl(a, b, c)
            | Instr::Shr(a, b, c) => vec![*a, *b, *c],
            Instr::DivMod(a, b, c, d) => vec![*a, *b, *c, *d],
            Instr::Jmp(_) | Instr::EmitB(_) | Instr::Halt => vec![],
        }
    }
}

/// Length of the Elias gamma code of `x >= 1`.
pub(crate) fn elias_gamma_len(x: u64) -> u64 {
    debug_assert!(x >= 1);
    2 * u64::from(63 - x.leading_zeros()) + 1
}

fn elias_gamma_len_big(x: &BigUint) -> u64 {
    // gamma(x + 1) so that zero is encodable
    let bits = (x + 1u32).bits();
    2 * (bits - 1) + 1
}

/// A validated strategy program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    name: String,
    instrs: Vec<Instr>,
    entry: usize,
}

impl Program {
    /// Validates and builds a program. Rejects empty programs, out of range
    /// branch targets and entry points.
    pub fn new(name: impl Into<String>, instrs: Vec<Instr>, entry: usize) -> Result<Program> {
        let name = name.into();
        if instrs.is_empty() {
            return Err(Error::MalformedProgram(format!("{name}: empty instruction list")));
        }
        if entry >= instrs.len() {
            return Err(Error::MalformedProgram(format!(
                "{name}: entry point {entry} out of range (0..{})",
                instrs.len()
            )));
        }
        for (i, ins) in instrs.iter().enumerate() {
            if let Some(t) = ins.target() {
                if t >= instrs.len() {
                    return Err(Error::MalformedProgram(format!(
                        "{name}: instruction {i} ({}) branches to {t}, outside 0..{}",
                        ins.mnemonic(),
                        instrs.len()
                    )));
                }
            }
        }
        Ok(Program { name, instrs, entry })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn entry(&self) -> usize {
        self.entry
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Bit length of the canonical binary serialization. The name is metadata
    /// and does not count.
    ///
    /// Layout: gamma(len) and a target-width entry index, then per instruction
    /// a 5-bit opcode, 4 bits per register, target-width bits per branch
    /// target, 2 bits per input selector, 1 bit per literal, and gamma(v + 1)
    /// per immediate.
    pub fn size_bits(&self) -> u64 {
        let n = self.instrs.len() as u64;
        let target_width = u64::from(64 - (n.max(2) - 1).leading_zeros());
        let mut bits = elias_gamma_len(n) + target_width;
        for ins in &self.instrs {
            bits += 5 + 4 * ins.registers().len() as u64;
            if ins.target().is_some() {
                bits += target_width;
            }
            match ins {
                Instr::Set(_, v) => bits += elias_gamma_len_big(v),
                Instr::Input(..) => bits += 2,
                Instr::EmitB(_) => bits += 1,
                _ => {}
            }
        }
        bits
    }

    /// Canonical serialization as a bit string, consistent with
    /// [`Program::size_bits`].
    pub fn serialize_bits(&self) -> Bits {
        let n = self.instrs.len() as u64;
        let target_width = 64 - (n.max(2) - 1).leading_zeros();
        let mut out = Bits::new();
        push_gamma(&mut out, &BigUint::from(n));
        push_fixed(&mut out, self.entry as u64, target_width);
        for ins in &self.instrs {
            push_fixed(&mut out, ins.opcode(), 5);
            for r in ins.registers() {
                push_fixed(&mut out, r.index() as u64, 4);
            }
            if let Some(t) = ins.target() {
                push_fixed(&mut out, t as u64, target_width);
            }
            match ins {
                Instr::Set(_, v) => push_gamma(&mut out, &(v + 1u32)),
                Instr::Input(_, f) => push_fixed(&mut out, f.code(), 2),
                Instr::EmitB(b) => out.push(*b),
                _ => {}
            }
        }
        out
    }
}

fn push_fixed(out: &mut Bits, v: u64, width: u32) {
    for i in (0..width).rev() {
        out.push((v >> i) & 1 == 1);
    }
}

fn push_gamma(out: &mut Bits, x: &BigUint) {
    let len = x.bits();
    for _ in 1..len {
        out.push(false);
    }
    for i in (0..len).rev() {
        out.push(x.bit(i));
    }
}

/// A bit string, most significant (first emitted) bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(v: Vec<bool>) -> Self {
        Bits(v)
    }

    /// Minimal big-endian binary expansion; zero is the empty string.
    pub fn from_uint(x: &BigUint) -> Self {
        let n = x.bits();
        Bits((0..n).rev().map(|i| x.bit(i)).collect())
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Big-endian value; the empty string is zero.
    pub fn to_uint(&self) -> BigUint {
        let mut acc = BigUint::default();
        for &b in &self.0 {
            acc <<= 1u32;
            if b {
                acc += 1u32;
            }
        }
        acc
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl From<Bits> for String {
    fn from(b: Bits) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Bits {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
