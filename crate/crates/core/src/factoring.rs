//! Strategies and procedures for the Factoring game.
//!
//! Alice outputs an integer; Bob sees it and outputs a factor claim. The
//! host-implemented strategies here charge every arithmetic step through
//! [`CostModel`] so their step counts are on the same scale as interpreted
//! programs. [`bob_trial_division`] charges exactly what the interpreter
//! charges for [`trial_division_program`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{claim_len, encode_claim, Action, Codec};
use crate::numeric::{bit_len, ceil_recip, ceil_snap};
use crate::numtheory::{is_prime, trial_factor_big, DETERMINISTIC_BASES, MR_ROUNDS};
use crate::par;
use crate::strategy::{host_execute, HostRun, MeteredStrategy, Strategy};
use crate::vm::{
    mix_seed, parse_program, BitSource, Bits, CapExceeded, CostModel, ExecutionInput, ExecutionOutcome, Program,
};

/// Bit length of Alice's number at discount rate `eps`:
/// `max(2, ⌈1/(eps · log2(1/eps))⌉)`.
pub fn n_of_epsilon(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("n(eps) needs eps in (0, 1/2), got {eps}")));
    }
    let v = ceil_snap(1.0 / (eps * (1.0 / eps).log2()));
    Ok((v as u64).max(2))
}

/// `x · 2^(bits - bitlen(x))`.
pub fn pad_to_length(x: &BigUint, bits: u64) -> Result<BigUint> {
    let len = x.bits();
    if x.is_zero() || len > bits {
        return Err(Error::InvalidArgument(format!("{x} does not fit in {bits} bits")));
    }
    Ok(x << (bits - len))
}

// ---------------------------------------------------------------------------
// Alice

pub fn alice_const2() -> MeteredStrategy {
    let p = parse_program(".name alice_const2\n    emitb 1\n    emitb 0\n    halt\n").expect("static program");
    MeteredStrategy::program(p)
}

/// How Alice picks the length of her random number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NRule {
    /// `n_of_epsilon(1 / eps_code)`, computed from the input tape.
    OfEpsilon,
    Fixed(u64),
}

/// Uniform odd number of exactly `n` bits (top and bottom bits forced).
#[derive(Debug, Clone)]
pub struct AliceRandom {
    rule: NRule,
}

pub fn alice_random(rule: NRule) -> MeteredStrategy {
    if let NRule::Fixed(n) = rule {
        assert!(n >= 2, "alice_random needs at least two bits");
    }
    MeteredStrategy::new(AliceRandom { rule })
}

impl Strategy for AliceRandom {
    fn name(&self) -> String {
        match self.rule {
            NRule::OfEpsilon => "alice_random".into(),
            NRule::Fixed(n) => format!("alice_random:{n}"),
        }
    }

    fn size_bits(&self) -> u64 {
        96
    }

    fn run(&self, input: &ExecutionInput, rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        host_execute(step_cap, |h| {
            let n = match self.rule {
                NRule::Fixed(n) => n,
                NRule::OfEpsilon => {
                    let e = input.eps_code;
                    let eb = bit_len(e);
                    // read ⌈1/ε⌉, take its bit length, one division
                    h.charge(CostModel::read(eb))?;
                    h.charge(CostModel::arith(&[eb]))?;
                    h.charge(CostModel::arith(&[eb, bit_len(eb)]))?;
                    n_of_epsilon(1.0 / e as f64).unwrap_or(2)
                }
            };
            h.charge(CostModel::draw(n - 2))?;
            let mut bits = Vec::with_capacity(n as usize);
            bits.push(true);
            bits.extend((0..n - 2).map(|_| rng.next_bit()));
            bits.push(true);
            h.charge(CostModel::emit(n))?;
            h.out_mut().extend_from(&Bits::from_bools(bits));
            h.charge(CostModel::plain())
        })
    }
}

// ---------------------------------------------------------------------------
// Bob

pub fn bob_halt() -> MeteredStrategy {
    MeteredStrategy::program(parse_program(".name bob_halt\n    halt\n").expect("static program"))
}

/// Self-imposed limit after which a Bob gives up and halts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepBudget {
    Unlimited,
    Fixed(u64),
    /// `2 · bitlen(D) · D` for `D = ⌈1/δ⌉`, about `2 log(1/δ) / δ`.
    DeltaScaled,
}

impl StepBudget {
    fn resolve(self, h: &mut HostRun, input: &ExecutionInput) -> std::result::Result<u64, CapExceeded> {
        Ok(match self {
            StepBudget::Unlimited => u64::MAX,
            StepBudget::Fixed(b) => b,
            StepBudget::DeltaScaled => {
                let d = input.delta_code;
                let db = bit_len(d);
                h.charge(CostModel::read(db))?;
                h.charge(CostModel::arith(&[db]))?;
                h.charge(CostModel::arith(&[db, bit_len(db)]))?;
                h.charge(CostModel::arith(&[db + bit_len(db), 2]))?;
                delta_scaled_budget(d)
            }
        })
    }

    fn label(self) -> String {
        match self {
            StepBudget::Unlimited => String::new(),
            StepBudget::Fixed(b) => format!(":{b}"),
            StepBudget::DeltaScaled => ":delta".into(),
        }
    }
}

/// `2 · bitlen(d) · d`, saturating.
pub fn delta_scaled_budget(delta_code: u64) -> u64 {
    2u64.saturating_mul(bit_len(delta_code)).saturating_mul(delta_code)
}

/// Reference trial-division Bob as an interpreted program. Emits the
/// factorization of the opponent's number in ascending order.
pub const TRIAL_DIVISION_ASM: &str = "\
.name trial_division
    input r0, opp         ; m
    set r1, 2             ; d
    set r2, 1
    jle r0, r2, done
loop:
    mul r4, r1, r1
    jlt r0, r4, last      ; d*d > m
    divmod r5, r6, r0, r1
    jnz r6, next
    bitlen r7, r1
    emitones r7
    emitb 0
    emitint r1
    mov r0, r5
    jmp loop
next:
    add r1, r1, r2
    jmp loop
last:
    jle r0, r2, done      ; m == 1
    bitlen r7, r0
    emitones r7
    emitb 0
    emitint r0
done:
    halt
";

pub fn trial_division_program() -> Program {
    parse_program(TRIAL_DIVISION_ASM).expect("static program")
}

/// Why a host Bob stopped early.
enum Stop {
    Cap,
    GiveUp,
}

impl From<CapExceeded> for Stop {
    fn from(_: CapExceeded) -> Self {
        Stop::Cap
    }
}

type Step<T> = std::result::Result<T, Stop>;

/// Metered arithmetic for host Bobs.
struct Ops<'a> {
    run: &'a mut HostRun,
    budget: u64,
}

fn nbits(x: &BigUint) -> u64 {
    x.bits()
}

impl Ops<'_> {
    fn pay(&mut self, cost: u64) -> Step<()> {
        self.run.charge(cost)?;
        if self.run.used() > self.budget {
            return Err(Stop::GiveUp);
        }
        Ok(())
    }

    fn arith(&mut self, operands: &[&BigUint]) -> Step<()> {
        let bits: Vec<u64> = operands.iter().map(|x| nbits(x)).collect();
        self.pay(CostModel::arith(&bits))
    }

    fn divmod(&mut self, a: &BigUint, b: &BigUint) -> Step<(BigUint, BigUint)> {
        self.arith(&[a, b])?;
        Ok(a.div_rem(b))
    }

    fn mulmod(&mut self, a: &BigUint, b: &BigUint, m: &BigUint) -> Step<BigUint> {
        self.pay(CostModel::mul_mod(nbits(a), nbits(b), nbits(m)))?;
        Ok((a * b) % m)
    }

    fn abs_diff(&mut self, a: &BigUint, b: &BigUint) -> Step<BigUint> {
        // compare, then subtract
        self.arith(&[a, b])?;
        self.arith(&[a, b])?;
        Ok(if a >= b { a - b } else { b - a })
    }

    fn gcd(&mut self, a: &BigUint, b: &BigUint) -> Step<BigUint> {
        let (mut x, mut y) = (a.clone(), b.clone());
        loop {
            self.arith(&[&y])?;
            if y.is_zero() {
                return Ok(x);
            }
            let (_, r) = self.divmod(&x, &y)?;
            x = std::mem::replace(&mut y, r);
        }
    }

    fn modpow(&mut self, base: &BigUint, exp: &BigUint, m: &BigUint) -> Step<BigUint> {
        let mut acc = BigUint::one();
        for i in (0..exp.bits()).rev() {
            acc = self.mulmod(&acc, &acc, m)?;
            if exp.bit(i) {
                acc = self.mulmod(&acc, base, m)?;
            }
        }
        Ok(acc)
    }

    fn random_below(&mut self, m: &BigUint, rng: &mut BitSource) -> Step<BigUint> {
        let k = nbits(m) + 32;
        self.pay(CostModel::draw(k))?;
        let mut v = BigUint::zero();
        for _ in 0..k {
            v <<= 1u32;
            if rng.next_bit() {
                v += 1u32;
            }
        }
        Ok(self.divmod(&v, m)?.1)
    }

    /// `bitlen; emitones; emitb 0; emitint`, as the reference program does.
    fn emit_factor(&mut self, f: &BigUint) -> Step<()> {
        let fb = nbits(f);
        self.pay(CostModel::arith(&[fb]))?;
        self.pay(CostModel::emit(fb))?;
        self.pay(CostModel::emit(1))?;
        self.pay(CostModel::emit(fb))?;
        let claim = encode_claim(std::slice::from_ref(f));
        self.run.out_mut().extend_from(&claim);
        Ok(())
    }

    /// Miller-Rabin with the smallest deterministic witness set for the size
    /// of `n` (odd, greater than 3).
    fn is_probable_prime(&mut self, n: &BigUint, rng: &mut BitSource) -> Step<bool> {
        let n1 = n - 1u32;
        let s = n1.trailing_zeros().unwrap_or(0);
        self.pay(CostModel::arith(&[nbits(n), bit_len(s)]))?;
        let d = &n1 >> s;
        let bases: Vec<BigUint> = match witness_count(n) {
            Some(k) => DETERMINISTIC_BASES[..k].iter().map(|&b| BigUint::from(b)).collect(),
            None => {
                let span = n - 3u32;
                let mut v = Vec::with_capacity(MR_ROUNDS);
                for _ in 0..MR_ROUNDS {
                    v.push(self.random_below(&span, rng)? + 2u32);
                }
                v
            }
        };
        'witness: for a in &bases {
            let mut x = self.modpow(a, &d, n)?;
            self.arith(&[&x, n])?;
            if x.is_one() || x == n1 {
                continue;
            }
            for _ in 1..s {
                x = self.mulmod(&x, &x, n)?;
                self.arith(&[&x, n])?;
                if x == n1 {
                    continue 'witness;
                }
            }
            return Ok(false);
        }
        Ok(true)
    }

    /// Brent's variant of Pollard rho with batched gcds. `None` after
    /// exhausting the polynomial constants.
    fn rho(&mut self, n: &BigUint, rng: &mut BitSource) -> Step<Option<BigUint>> {
        const BATCH: u64 = 32;
        const ATTEMPTS: u64 = 16;
        for attempt in 0..ATTEMPTS {
            let k = BigUint::from(attempt + 1);
            let f = |ops: &mut Self, y: &BigUint| -> Step<BigUint> {
                let sq = ops.mulmod(y, y, n)?;
                ops.arith(&[&sq, &k])?;
                Ok((sq + &k) % n)
            };
            let mut y = self.random_below(n, rng)?;
            let mut x = y.clone();
            let mut ys = y.clone();
            let mut q = BigUint::one();
            let mut g = BigUint::one();
            let mut r = 1u64;
            while g.is_one() {
                x = y.clone();
                for _ in 0..r {
                    y = f(self, &y)?;
                }
                let mut j = 0;
                while j < r && g.is_one() {
                    ys = y.clone();
                    for _ in 0..BATCH.min(r - j) {
                        y = f(self, &y)?;
                        let diff = self.abs_diff(&x, &y)?;
                        q = self.mulmod(&q, &diff, n)?;
                    }
                    g = self.gcd(&q, n)?;
                    j += BATCH;
                }
                r = r.saturating_mul(2);
            }
            if &g == n {
                loop {
                    ys = f(self, &ys)?;
                    let diff = self.abs_diff(&x, &ys)?;
                    g = self.gcd(&diff, n)?;
                    if !g.is_one() {
                        break;
                    }
                }
            }
            if &g != n {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }
}

/// Number of leading prime witnesses that make Miller-Rabin exact below each
/// bound; `None` beyond the last bound.
fn witness_count(n: &BigUint) -> Option<usize> {
    static TABLE: OnceLock<Vec<(BigUint, usize)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        [
            ("2047", 1),
            ("1373653", 2),
            ("25326001", 3),
            ("3215031751", 4),
            ("2152302898747", 5),
            ("3474749660383", 6),
            ("341550071728321", 7),
            ("3825123056546413051", 9),
            ("318665857834031151167461", 12),
            ("3317044064679887385961981", 13),
        ]
        .iter()
        .map(|(s, k)| (BigUint::parse_bytes(s.as_bytes(), 10).expect("literal"), *k))
        .collect()
    });
    table.iter().find(|(bound, _)| n < bound).map(|(_, k)| *k)
}

/// Primes below 256, used by the rho Bob before it starts pivoting.
fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| (2u64..256).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect())
}

const SMALL_PRIME_LIMIT: u64 = 256;

/// Trial division with the exact per-instruction costs of
/// [`trial_division_program`], plus an optional give-up budget.
#[derive(Debug, Clone)]
pub struct TrialDivisionBob {
    budget: StepBudget,
}

pub fn bob_trial_division(budget: StepBudget) -> MeteredStrategy {
    MeteredStrategy::new(TrialDivisionBob { budget })
}

impl Strategy for TrialDivisionBob {
    fn name(&self) -> String {
        format!("bob_trial_division{}", self.budget.label())
    }

    fn size_bits(&self) -> u64 {
        trial_division_program().size_bits()
    }

    fn run(&self, input: &ExecutionInput, _rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        run_with_budget(step_cap, input, self.budget, |ops| {
            let one = BigUint::one();
            let mut m = input.opponent_output.as_ref().map(Bits::to_uint).unwrap_or_default();
            let mut d = BigUint::from(2u32);
            ops.pay(CostModel::read(nbits(&m)))?;
            ops.pay(CostModel::load(2))?;
            ops.pay(CostModel::load(1))?;
            ops.arith(&[&m, &one])?;
            if m <= one {
                return Ok(());
            }
            loop {
                let sq = &d * &d;
                ops.arith(&[&d, &d])?;
                ops.arith(&[&m, &sq])?;
                if m < sq {
                    break;
                }
                let (q, r) = ops.divmod(&m, &d)?;
                ops.arith(&[&r])?;
                if r.is_zero() {
                    ops.emit_factor(&d)?;
                    ops.arith(&[&q])?;
                    m = q;
                    ops.pay(CostModel::plain())?;
                } else {
                    ops.arith(&[&d, &one])?;
                    d += 1u32;
                    ops.pay(CostModel::plain())?;
                }
            }
            ops.arith(&[&m, &one])?;
            if m > one {
                ops.emit_factor(&m)?;
            }
            Ok(())
        })
    }
}

/// Runs a Bob body with a give-up budget. Giving up halts with whatever was
/// emitted so far.
fn run_with_budget(
    step_cap: u64,
    input: &ExecutionInput,
    budget: StepBudget,
    body: impl FnOnce(&mut Ops<'_>) -> Step<()>,
) -> ExecutionOutcome {
    host_execute(step_cap, |h| {
        let limit = budget.resolve(h, input)?;
        let mut ops = Ops { run: h, budget: limit };
        match body(&mut ops) {
            Ok(()) | Err(Stop::GiveUp) => h.charge(CostModel::plain()),
            Err(Stop::Cap) => Err(CapExceeded),
        }
    })
}

/// Trial division by primes below 256, then Pollard rho (Brent) with
/// Miller-Rabin on each cofactor.
#[derive(Debug, Clone)]
pub struct PollardRhoBob {
    budget: StepBudget,
}

pub fn bob_pollard_rho(budget: StepBudget) -> MeteredStrategy {
    MeteredStrategy::new(PollardRhoBob { budget })
}

impl Strategy for PollardRhoBob {
    fn name(&self) -> String {
        format!("bob_pollard_rho{}", self.budget.label())
    }

    fn size_bits(&self) -> u64 {
        640
    }

    fn run(&self, input: &ExecutionInput, rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        run_with_budget(step_cap, input, self.budget, |ops| {
            let one = BigUint::one();
            let mut m = input.opponent_output.as_ref().map(Bits::to_uint).unwrap_or_default();
            ops.pay(CostModel::read(nbits(&m)))?;
            ops.arith(&[&m, &one])?;
            if m <= one {
                return Ok(());
            }
            for &p in small_primes() {
                let pb = BigUint::from(p);
                let sq = BigUint::from(p * p);
                ops.arith(&[&m, &sq])?;
                if m < sq {
                    break;
                }
                loop {
                    let (q, r) = ops.divmod(&m, &pb)?;
                    ops.arith(&[&r])?;
                    if !r.is_zero() {
                        break;
                    }
                    ops.emit_factor(&pb)?;
                    m = q;
                }
            }
            let known_prime = BigUint::from(SMALL_PRIME_LIMIT * SMALL_PRIME_LIMIT);
            let mut stack = vec![m];
            while let Some(c) = stack.pop() {
                ops.arith(&[&c, &one])?;
                if c <= one {
                    continue;
                }
                // no factor below the trial bound remains
                ops.arith(&[&c, &known_prime])?;
                if c < known_prime || ops.is_probable_prime(&c, rng)? {
                    ops.emit_factor(&c)?;
                    continue;
                }
                let g = ops.rho(&c, rng)?.ok_or(Stop::GiveUp)?;
                let (q, _) = ops.divmod(&c, &g)?;
                stack.push(q);
                stack.push(g);
            }
            Ok(())
        })
    }
}

// ---------------------------------------------------------------------------
// Lookup tables

/// Precomputed factorizations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LookupTable {
    entries: BTreeMap<BigUint, Vec<BigUint>>,
}

impl LookupTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &BigUint) -> Option<&[BigUint]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BigUint, &[BigUint])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Longest key in bits.
    pub fn covered_length(&self) -> u64 {
        self.entries.keys().map(BigUint::bits).max().unwrap_or(0)
    }

    /// Whether every odd number of exactly `bits` bits is a key.
    pub fn covers_odd_of_length(&self, bits: u64) -> bool {
        bits >= 2 && odd_numbers_with_bits(bits).all(|k| self.entries.contains_key(&k))
    }

    /// Stored bits: each key plus its encoded claim.
    pub fn payload_bits(&self) -> u64 {
        self.entries.iter().map(|(k, v)| k.bits() + claim_len(v)).sum()
    }

    /// Checks and inserts an entry.
    pub fn insert(&mut self, key: BigUint, factors: Vec<BigUint>) -> Result<()> {
        if !crate::game::is_valid_factorization(&key, &Action::Factors(factors.clone())) {
            return Err(Error::TableBuild(format!("{key}: {factors:?} is not its prime factorization")));
        }
        self.entries.insert(key, factors);
        Ok(())
    }

    /// `key: f1 f2 ...`, one entry per line in key order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let fs: Vec<String> = v.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{k}: {}", fs.join(" "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = LookupTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, rest) = line.split_once(':').ok_or_else(|| Error::syntax(i + 1, "expected `key: f1 f2 ...`"))?;
            let key: BigUint = k.trim().parse().map_err(|_| Error::syntax(i + 1, format!("bad key `{}`", k.trim())))?;
            let factors = rest
                .split_whitespace()
                .map(|f| f.parse::<BigUint>().map_err(|_| Error::syntax(i + 1, format!("bad factor `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            t.insert(key, factors).map_err(|e| Error::syntax(i + 1, e.to_string()))?;
        }
        Ok(t)
    }
}

/// Odd integers with exactly `bits` bits, ascending.
pub fn odd_numbers_with_bits(bits: u64) -> impl Iterator<Item = BigUint> {
    assert!((2..=63).contains(&bits), "odd enumeration supports 2..=63 bits");
    let lo = (1u64 << (bits - 1)) + 1;
    let hi = 1u64 << bits;
    (lo..hi).step_by(2).map(BigUint::from)
}

/// Factors each support element by trial division up to `max_divisor`
/// (the offline build is not metered).
pub fn build_lookup_table(support: &[BigUint], max_divisor: u64) -> Result<LookupTable> {
    let factored = par::map_indexed(support.len(), |i| {
        let x = &support[i];
        if x < &BigUint::from(2u32) {
            return Err(Error::TableBuild(format!("support element {x} is below 2")));
        }
        trial_factor_big(x, max_divisor).ok_or_else(|| {
            Error::TableBuild(format!("{x} has a cofactor beyond trial division up to {max_divisor}"))
        })
    });
    let mut t = LookupTable::default();
    for (x, f) in support.iter().zip(factored) {
        t.insert(x.clone(), f?)?;
    }
    Ok(t)
}

/// Default divisor limit for offline table builds.
pub const TABLE_MAX_DIVISOR: u64 = 1 << 20;

/// Bob that answers from a table; an unknown key halts with no claim. Costs:
/// reading the key, one unit per key bit of state-machine traversal, the
/// claim output and the halt.
#[derive(Debug, Clone)]
pub struct LookupBob {
    table: Arc<LookupTable>,
}

pub fn bob_lookup(table: Arc<LookupTable>) -> MeteredStrategy {
    MeteredStrategy::new(LookupBob { table })
}

/// Fixed part of a lookup Bob's declared size.
pub const LOOKUP_BASE_BITS: u64 = 64;

impl Strategy for LookupBob {
    fn name(&self) -> String {
        format!("bob_lookup[{}]", self.table.len())
    }

    fn size_bits(&self) -> u64 {
        LOOKUP_BASE_BITS + self.table.payload_bits()
    }

    fn run(&self, input: &ExecutionInput, _rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        host_execute(step_cap, |h| {
            let key = input.opponent_output.as_ref().map(Bits::to_uint).unwrap_or_default();
            let b = key.bits();
            h.charge(CostModel::read(b))?;
            h.charge(b)?;
            if let Some(fs) = self.table.get(&key) {
                let claim = encode_claim(fs);
                h.charge(CostModel::emit(claim.len() as u64))?;
                h.out_mut().extend_from(&claim);
            }
            h.charge(CostModel::plain())
        })
    }
}

/// Interpreted lookup: compare against each key, emit the stored claim.
/// Mostly useful for its canonical size.
pub fn lookup_program(table: &LookupTable) -> Program {
    let mut src = String::from(".name lookup\n    input r0, opp\n");
    for (i, (k, _)) in table.entries().enumerate() {
        let _ = writeln!(src, "    set r1, {k}\n    jeq r0, r1, hit{i}");
    }
    src.push_str("    halt\n");
    for (i, (_, fs)) in table.entries().enumerate() {
        let claim = encode_claim(fs).to_uint();
        let _ = writeln!(src, "hit{i}:\n    set r2, {claim}\n    emitint r2\n    halt");
    }
    parse_program(&src).expect("generated program")
}

/// Length test applied by [`bob_length_gated`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    MaxBits(u64),
    /// At most the bit length of ⌈1/ε⌉.
    EpsBits,
}

/// Runs `inner` if Alice's number is short enough, else `fallback`.
#[derive(Debug, Clone)]
pub struct LengthGatedBob {
    gate: Gate,
    inner: MeteredStrategy,
    fallback: MeteredStrategy,
}

pub fn bob_length_gated(gate: Gate, inner: MeteredStrategy, fallback: MeteredStrategy) -> MeteredStrategy {
    MeteredStrategy::new(LengthGatedBob { gate, inner, fallback })
}

impl Strategy for LengthGatedBob {
    fn name(&self) -> String {
        format!("bob_length_gated({}, {})", self.inner.name(), self.fallback.name())
    }

    fn size_bits(&self) -> u64 {
        32 + self.inner.size_bits() + self.fallback.size_bits()
    }

    fn run(&self, input: &ExecutionInput, rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        let len = input.opponent_output.as_ref().map_or(0, Bits::len) as u64;
        let limit = match self.gate {
            Gate::MaxBits(b) => b,
            Gate::EpsBits => bit_len(input.eps_code),
        };
        let overhead = CostModel::read(bit_len(len)) + CostModel::arith(&[bit_len(len), bit_len(limit)]);
        if overhead >= step_cap {
            return ExecutionOutcome::capped(step_cap);
        }
        let chosen = if len <= limit { &self.inner } else { &self.fallback };
        let mut out = chosen.execute_with(input, rng, step_cap - overhead);
        if out.halted {
            out.steps += overhead;
        } else {
            out = ExecutionOutcome::capped(step_cap);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Procedures

/// Where a sampled number came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SampleSource {
    /// Output of the given run, padded.
    Run(u64),
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleD {
    pub value: BigUint,
    pub source: SampleSource,
}

/// Default repeat count for [`sample_d`].
pub const SAMPLE_D_REPEATS: u64 = 16;

/// Runs `alice` up to `repeats` times with cap ⌈1/ε⌉ and pads the first
/// output of at most `bitlen(⌈1/ε⌉)` bits to that length. If no run
/// qualifies, returns `2^(target - 1)`.
pub fn sample_d(alice: &MeteredStrategy, eps: f64, repeats: u64, seed: u64) -> Result<SampleD> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("sample_d needs at least one repeat".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0, 1)")));
    }
    let cap = ceil_recip(eps);
    let target = bit_len(cap);
    let input = ExecutionInput::new(eps, eps);
    for r in 0..repeats {
        let out = alice.execute(&input, mix_seed(seed, r, 1), cap);
        if !out.halted {
            continue;
        }
        if let Action::Int(x) = Codec::IntAtLeastTwo.decode(&out.output) {
            if x.bits() <= target {
                return Ok(SampleD { value: pad_to_length(&x, target)?, source: SampleSource::Run(r) });
            }
        }
    }
    Ok(SampleD { value: BigUint::one() << (target - 1), source: SampleSource::Fallback })
}

/// Parameters of the amplified factorer for inputs of `n` bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifiedFactorer {
    pub c: f64,
    pub runs: u64,
    pub per_run_cap: u64,
}

impl AmplifiedFactorer {
    /// `runs = ⌈log2 n⌉`, `per_run_cap = ⌈n^c · ⌈(log2 n)^(c+2)⌉⌉`.
    pub fn for_bits(n: u64, c: f64) -> Result<Self> {
        if !(c >= 1.0) {
            return Err(Error::InvalidArgument(format!("time exponent c = {c} must be at least 1")));
        }
        let n = n.max(2);
        let log = (n as f64).log2();
        let runs = ceil_snap(log) as u64;
        let cap = ceil_snap((n as f64).powf(c) * ceil_snap(log.powf(c + 2.0)));
        let per_run_cap = if cap >= u64::MAX as f64 { u64::MAX } else { cap as u64 };
        Ok(AmplifiedFactorer { c, runs: runs.max(1), per_run_cap })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    pub params: AmplifiedFactorer,
    /// `(y1, y2)` with `y1 · y2 = x`, both at least 2.
    pub factors: Option<(BigUint, BigUint)>,
    /// Index of the successful run.
    pub run: Option<u64>,
    /// Cost units over the runs up to and including the successful one (all
    /// runs on failure).
    pub total_cost: u64,
}

/// Algorithm A: runs `bob` on `x` independently `⌈log2 n⌉` times, each run
/// capped at `n^c ⌈(log2 n)^(c+2)⌉`, and returns the first split of `x`.
/// Bob sees `x` as Alice's output, `⌈1/δ⌉` = the run cap and
/// `⌈1/ε⌉ = cap^(1/c)`.
pub fn extract_algorithm_a(bob: &MeteredStrategy, c: f64, x: &BigUint, seed: u64) -> Result<Extraction> {
    let params = AmplifiedFactorer::for_bits(x.bits(), c)?;
    let cap = params.per_run_cap;
    let eps_code = ceil_snap((cap as f64).powf(1.0 / c)).max(2.0) as u64;
    let input = ExecutionInput { eps_code, delta_code: cap, opponent_output: Some(Bits::from_uint(x)) };
    let outcomes = par::map_indexed(params.runs as usize, |r| bob.execute(&input, mix_seed(seed, r as u64, 2), cap));
    let mut total_cost = 0u64;
    for (r, out) in outcomes.iter().enumerate() {
        total_cost = total_cost.saturating_add(out.steps);
        if !out.halted {
            continue;
        }
        if let Action::Factors(fs) = Codec::Claim.decode(&out.output) {
            if fs.len() >= 2 && fs.iter().product::<BigUint>() == *x {
                let y1 = fs[0].clone();
                let y2 = fs[1..].iter().product();
                return Ok(Extraction { params, factors: Some((y1, y2)), run: Some(r as u64), total_cost });
            }
        }
    }
    Ok(Extraction { params, factors: None, run: None, total_cost })
}

/// Whether `claim` is a full prime factorization of `n`; used by tests and
/// reports.
pub fn claim_is_valid(n: &BigUint, claim: &[BigUint]) -> bool {
    !claim.is_empty() && claim.iter().product::<BigUint>() == *n && claim.iter().all(is_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::trial_factor;
    use num_traits::ToPrimitive;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn bob_input(n: u64, delta: f64) -> ExecutionInput {
        ExecutionInput::new(0.1, delta).with_opponent(Bits::from_uint(&big(n)))
    }

    fn claim_of(out: &ExecutionOutcome) -> Vec<u64> {
        match Codec::Claim.decode(&out.output) {
            Action::Factors(fs) => {
                let mut v: Vec<u64> = fs.iter().map(|f| f.to_u64().unwrap()).collect();
                v.sort_unstable();
                v
            }
            _ => vec![],
        }
    }

    #[test]
    fn n_of_epsilon_values() {
        assert_eq!(n_of_epsilon(0.1).unwrap(), 4);
        assert_eq!(n_of_epsilon(0.001).unwrap(), 101);
        assert_eq!(n_of_epsilon(0.4).unwrap(), 2);
        assert!(n_of_epsilon(0.5).is_err());
    }

    #[test]
    fn padding() {
        assert_eq!(pad_to_length(&big(5), 6).unwrap(), big(40));
        assert_eq!(pad_to_length(&big(5), 3).unwrap(), big(5));
        // 11 -> 1100
        assert_eq!(pad_to_length(&big(3), 4).unwrap(), big(12));
        assert_eq!(trial_factor(12), vec![2, 2, 3]);
        assert!(pad_to_length(&big(9), 3).is_err());
    }

    #[test]
    fn alice_random_cost_and_length() {
        let a = alice_random(NRule::Fixed(24));
        let out = a.execute(&ExecutionInput::new(1e-3, 1e-6), 9, 1000);
        assert!(out.halted);
        assert_eq!(out.output.len(), 24);
        assert_eq!(out.steps, 49);
        let s = out.output.as_slice();
        assert!(s[0] && s[23]);

        let a = alice_random(NRule::OfEpsilon);
        for eps in [0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4] {
            let n = n_of_epsilon(eps).unwrap();
            let out = a.execute(&ExecutionInput::new(eps, eps * eps), 3, 1 << 20);
            assert_eq!(out.output.len() as u64, n, "eps {eps}");
            assert!(out.steps <= 64 * n);
        }
    }

    #[test]
    fn host_trial_division_matches_interpreter_exactly() {
        let prog = MeteredStrategy::program(trial_division_program());
        let host = bob_trial_division(StepBudget::Unlimited);
        for n in [0u64, 1, 2, 3, 4, 8, 9, 12, 15, 97, 360, 1001, 4096, 65_537, 999_983 * 3] {
            let input = bob_input(n, 0.01);
            let a = prog.execute(&input, 1, 1 << 30);
            let b = host.execute(&input, 1, 1 << 30);
            assert_eq!(a, b, "n = {n}");
        }
        // capping agrees too
        let input = bob_input(999_983 * 999_979, 0.01);
        assert_eq!(prog.execute(&input, 1, 5000), host.execute(&input, 1, 5000));
    }

    #[test]
    fn trial_division_gives_up_at_budget() {
        let bob = bob_trial_division(StepBudget::Fixed(2000));
        let out = bob.execute(&bob_input(999_983 * 999_979, 0.01), 1, 1 << 30);
        assert!(out.halted);
        assert!(out.output.is_empty());
        assert!(out.steps <= 2000 + 400);
    }

    #[test]
    fn pollard_rho_factors_correctly() {
        let bob = bob_pollard_rho(StepBudget::Unlimited);
        for n in [2u64, 3, 4, 15, 221, 65_521, 65_536, 1_000_001, 999_983 * 999_979, 600_851_475_143] {
            let out = bob.execute(&bob_input(n, 1e-6), n, 1 << 40);
            assert!(out.halted);
            assert_eq!(claim_of(&out), trial_factor(n), "n = {n}");
        }
    }

    #[test]
    fn pollard_rho_on_large_semiprime() {
        let p = BigUint::parse_bytes(b"1000000000000000003", 10).unwrap();
        let q = BigUint::parse_bytes(b"1000003", 10).unwrap();
        let n = &p * &q;
        let bob = bob_pollard_rho(StepBudget::Unlimited);
        let input = ExecutionInput::new(0.1, 1e-6).with_opponent(Bits::from_uint(&n));
        let out = bob.execute(&input, 5, u64::MAX);
        let Action::Factors(fs) = Codec::Claim.decode(&out.output) else { panic!("no claim") };
        assert!(claim_is_valid(&n, &fs));
    }

    #[test]
    fn lookup_table_build_and_text() {
        let t = build_lookup_table(&[big(4), big(15)], TABLE_MAX_DIVISOR).unwrap();
        assert_eq!(t.get(&big(4)).unwrap(), &[big(2), big(2)]);
        assert_eq!(t.get(&big(15)).unwrap(), &[big(3), big(5)]);
        assert_eq!(LookupTable::parse(&t.to_text()).unwrap(), t);
        assert_eq!(t.to_text(), "4: 2 2\n15: 3 5\n");
        let t2 = build_lookup_table(&[big(2)], TABLE_MAX_DIVISOR).unwrap();
        assert_eq!(t2.get(&big(2)).unwrap(), &[big(2)]);
        assert!(LookupTable::parse("15: 5 5\n").is_err());
        assert!(build_lookup_table(&[big(1)], 10).is_err());
    }

    #[test]
    fn lookup_bob_is_linear_in_key_length() {
        let support: Vec<BigUint> = odd_numbers_with_bits(10).collect();
        let t = Arc::new(build_lookup_table(&support, TABLE_MAX_DIVISOR).unwrap());
        assert!(t.covers_odd_of_length(10));
        let bob = bob_lookup(t.clone());
        for k in &support {
            let input = ExecutionInput::new(0.1, 0.01).with_opponent(Bits::from_uint(k));
            let out = bob.execute(&input, 0, 1000);
            assert!(out.steps <= 8 * 10);
            let Action::Factors(fs) = Codec::Claim.decode(&out.output) else { panic!() };
            assert!(claim_is_valid(k, &fs));
        }
    }

    #[test]
    fn lookup_program_size_counts_table_bits() {
        let support: Vec<BigUint> = (0..32u64).map(|i| big(512 + 2 * i + 1)).collect();
        let t = build_lookup_table(&support, TABLE_MAX_DIVISOR).unwrap();
        assert!(lookup_program(&t).size_bits() >= 320);
        assert!(bob_lookup(Arc::new(t)).size_bits() >= 320);
    }

    #[test]
    fn sample_d_paths() {
        let d = sample_d(&alice_const2(), 1e-3, 3, 0).unwrap();
        assert_eq!(d.value, big(2) << 8);
        assert_eq!(d.source, SampleSource::Run(0));
        let looping = MeteredStrategy::program(parse_program("top: jmp top").unwrap());
        let d = sample_d(&looping, 0.01, 5, 0).unwrap();
        assert_eq!(d.source, SampleSource::Fallback);
        assert_eq!(d.value.bits(), bit_len(100));
        let d = sample_d(&alice_random(NRule::Fixed(4)), 0.1, 10, 4).unwrap();
        assert_eq!(d.value.bits(), 4);
        assert!(matches!(d.source, SampleSource::Run(_)));
    }

    #[test]
    fn extraction() {
        let e = extract_algorithm_a(&bob_pollard_rho(StepBudget::Unlimited), 2.0, &big(15), 1).unwrap();
        let (a, b) = e.factors.unwrap();
        assert_eq!(&a * &b, big(15));
        let e = extract_algorithm_a(&bob_halt(), 2.0, &big(15), 1).unwrap();
        assert!(e.factors.is_none());
        assert_eq!(e.params.runs, 2);
    }

    #[test]
    fn amplified_parameters() {
        let a = AmplifiedFactorer::for_bits(80, 1.0).unwrap();
        assert_eq!(a.runs, 7);
        // 80 * ⌈log2(80)^3⌉ = 80 * 253
        assert_eq!(a.per_run_cap, 80 * 253);
    }
}
