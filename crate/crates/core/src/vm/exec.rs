use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cost::{CostModel, Meter};
use super::program::{Bits, InputField, Instr, Program, NUM_REGS};
use super::rng::BitSource;
use crate::numeric::ceil_recip;

/// What a strategy sees on its input tape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionInput {
    /// ⌈1/ε⌉
    pub eps_code: u64,
    /// ⌈1/δ⌉
    pub delta_code: u64,
    /// Player 1's output, given to Player 2 in sequential games only.
    pub opponent_output: Option<Bits>,
}

impl ExecutionInput {
    pub fn new(eps: f64, delta: f64) -> Self {
        ExecutionInput { eps_code: ceil_recip(eps), delta_code: ceil_recip(delta), opponent_output: None }
    }

    pub fn with_opponent(mut self, bits: Bits) -> Self {
        self.opponent_output = Some(bits);
        self
    }

    pub fn field(&self, f: InputField) -> BigUint {
        match f {
            InputField::Eps => BigUint::from(self.eps_code),
            InputField::Delta => BigUint::from(self.delta_code),
            InputField::Opp => self.opponent_output.as_ref().map(Bits::to_uint).unwrap_or_default(),
            InputField::OppLen => {
                BigUint::from(self.opponent_output.as_ref().map_or(0, Bits::len) as u64)
            }
        }
    }
}

/// Result of one metered run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub halted: bool,
    pub output: Bits,
    /// Cost units consumed; equals the cap when `halted` is false.
    pub steps: u64,
}

impl ExecutionOutcome {
    pub fn halted(output: Bits, steps: u64) -> Self {
        ExecutionOutcome { halted: true, output, steps }
    }

    pub fn capped(cap: u64) -> Self {
        ExecutionOutcome { halted: false, output: Bits::new(), steps: cap }
    }
}

/// Runs `program` with random bits drawn from `seed`.
pub fn execute(program: &Program, input: &ExecutionInput, seed: u64, step_cap: u64) -> ExecutionOutcome {
    execute_with(program, input, &mut BitSource::seeded(seed), step_cap)
}

fn bits_of(x: &BigUint) -> u64 {
    x.bits()
}

/// Runs `program` against an arbitrary bit source. Falling off the end of the
/// instruction list halts.
pub fn execute_with(
    program: &Program,
    input: &ExecutionInput,
    rng: &mut BitSource,
    step_cap: u64,
) -> ExecutionOutcome {
    assert!(step_cap >= 1, "step cap must be positive");
    let mut regs: Vec<BigUint> = vec![BigUint::zero(); NUM_REGS];
    let mut meter = Meter::new(step_cap);
    let mut out = Bits::new();
    let mut pc = program.entry();
    let code = program.instrs();

    macro_rules! charge {
        ($cost:expr) => {
            if meter.charge($cost).is_err() {
                return ExecutionOutcome::capped(step_cap);
            }
        };
    }

    while let Some(ins) = code.get(pc) {
        let mut next = pc + 1;
        match ins {
            Instr::Set(d, v) => {
                charge!(CostModel::load(bits_of(v)));
                regs[d.index()] = v.clone();
            }
            Instr::Mov(d, s) => {
                charge!(CostModel::arith(&[bits_of(&regs[s.index()])]));
                regs[d.index()] = regs[s.index()].clone();
            }
            Instr::Input(d, f) => {
                let v = input.field(*f);
                charge!(CostModel::read(bits_of(&v)));
                regs[d.index()] = v;
            }
            Instr::Add(d, a, b) | Instr::Sub(d, a, b) | Instr::Mul(d, a, b) => {
                let (x, y) = (&regs[a.index()], &regs[b.index()]);
                charge!(CostModel::arith(&[bits_of(x), bits_of(y)]));
                let v = match ins {
                    Instr::Add(..) => x + y,
                    Instr::Sub(..) => {
                        if x >= y {
                            x - y
                        } else {
                            BigUint::zero()
                        }
                    }
                    _ => x * y,
                };
                regs[d.index()] = v;
            }
            Instr::DivMod(q, r, a, b) => {
                let (x, y) = (&regs[a.index()], &regs[b.index()]);
                charge!(CostModel::arith(&[bits_of(x), bits_of(y)]));
                let (qv, rv) = if y.is_zero() { (BigUint::zero(), x.clone()) } else { x.div_rem(y) };
                regs[q.index()] = qv;
                regs[r.index()] = rv;
            }
            Instr::Shl(d, a, b) | Instr::Shr(d, a, b) => {
                let (x, y) = (&regs[a.index()], &regs[b.index()]);
                let is_left = matches!(ins, Instr::Shl(..));
                // a left shift writes `y` new bits
                let written = if is_left { y.to_u64().unwrap_or(u64::MAX) } else { 0 };
                charge!(CostModel::arith(&[bits_of(x), bits_of(y)]).saturating_add(written));
                let v = match (is_left, y.to_u64()) {
                    (true, Some(s)) => x << s,
                    (false, Some(s)) => x >> s,
                    (false, None) => BigUint::zero(),
                    (true, None) => return ExecutionOutcome::capped(step_cap),
                };
                regs[d.index()] = v;
            }
            Instr::BitLen(d, s) => {
                let x = &regs[s.index()];
                charge!(CostModel::arith(&[bits_of(x)]));
                regs[d.index()] = BigUint::from(bits_of(x));
            }
            Instr::Jmp(t) => {
                charge!(CostModel::plain());
                next = *t;
            }
            Instr::Jlt(a, b, t) | Instr::Jle(a, b, t) | Instr::Jeq(a, b, t) | Instr::Jne(a, b, t) => {
                let (x, y) = (&regs[a.index()], &regs[b.index()]);
                charge!(CostModel::arith(&[bits_of(x), bits_of(y)]));
                let taken = match ins {
                    Instr::Jlt(..) => x < y,
                    Instr::Jle(..) => x <= y,
                    Instr::Jeq(..) => x == y,
                    _ => x != y,
                };
                if taken {
                    next = *t;
                }
            }
            Instr::Jz(a, t) | Instr::Jnz(a, t) => {
                let x = &regs[a.index()];
                charge!(CostModel::arith(&[bits_of(x)]));
                if x.is_zero() == matches!(ins, Instr::Jz(..)) {
                    next = *t;
                }
            }
            Instr::RBit(d) => {
                charge!(CostModel::draw(1));
                regs[d.index()] = BigUint::from(u8::from(rng.next_bit()));
            }
            Instr::RBits(d, n) => {
                let count = regs[n.index()].to_u64().unwrap_or(u64::MAX);
                charge!(CostModel::draw(count));
                let mut v = BigUint::zero();
                for _ in 0..count {
                    v <<= 1u32;
                    if rng.next_bit() {
                        v += 1u32;
                    }
                }
                regs[d.index()] = v;
            }
            Instr::Emit(s) => {
                charge!(CostModel::emit(1));
                out.push(regs[s.index()].bit(0));
            }
            Instr::EmitB(b) => {
                charge!(CostModel::emit(1));
                out.push(*b);
            }
            Instr::EmitInt(s) => {
                let x = &regs[s.index()];
                charge!(CostModel::emit(bits_of(x)));
                out.extend_from(&Bits::from_uint(x));
            }
            Instr::EmitOnes(s) => {
                let count = regs[s.index()].to_u64().unwrap_or(u64::MAX);
                charge!(CostModel::emit(count));
                for _ in 0..count {
                    out.push(true);
                }
            }
            Instr::Halt => {
                charge!(CostModel::plain());
                return ExecutionOutcome::halted(out, meter.used());
            }
        }
        pc = next;
    }
    ExecutionOutcome::halted(out, meter.used())
}
