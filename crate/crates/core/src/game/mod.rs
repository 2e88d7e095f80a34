//! Underlying games: Factoring, Largest Integer, bimatrix games and the
//! unbounded `2^i` game, with codecs from machine output bits to actions.

mod bimatrix;
mod codec;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

pub use bimatrix::{Bimatrix, ParsedBimatrix};
pub use codec::{claim_len, encode_claim, Codec};

use crate::error::{Error, Result};
use crate::numtheory::is_prime;
use crate::vm::Bits;

/// A decoded action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Int(BigUint),
    Factors(Vec<BigUint>),
    Index(usize),
    /// Factoring Bob's losing move: he output something that is not a claim.
    NoClaim,
    /// Output that encodes no action; treated like a non-halting machine.
    NoAction,
}

impl Action {
    pub fn is_valid(&self) -> bool {
        !matches!(self, Action::NoAction)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Int(v) => write!(f, "{v}"),
            Action::Factors(fs) => {
                let parts: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "[{}]", parts.join(" "))
            }
            Action::Index(i) => write!(f, "#{i}"),
            Action::NoClaim => f.write_str("no-claim"),
            Action::NoAction => f.write_str("no-action"),
        }
    }
}

/// Player 1 or player 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn index(self) -> u64 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub enum GameKind {
    Factoring,
    LargestInteger,
    Matrix(Arc<Bimatrix>),
    Exp,
}

/// An underlying game `(A1, A2, u1, u2)`.
#[derive(Debug, Clone)]
pub struct GameSpec {
    kind: GameKind,
    codecs: (Codec, Codec),
    bound: Option<f64>,
    sequential: bool,
}

impl GameSpec {
    /// Alice names an integer, Bob (who sees it) claims its factorization.
    pub fn factoring() -> Self {
        GameSpec {
            kind: GameKind::Factoring,
            codecs: (Codec::IntAtLeastTwo, Codec::Claim),
            bound: Some(2.0),
            sequential: true,
        }
    }

    pub fn largest_integer() -> Self {
        GameSpec {
            kind: GameKind::LargestInteger,
            codecs: (Codec::Natural, Codec::Natural),
            bound: Some(100.0),
            sequential: false,
        }
    }

    /// Simultaneous game over a payoff table. The bound is the largest entry,
    /// raised to 1 if smaller.
    pub fn matrix(table: Bimatrix) -> Self {
        let max = table.max_entry().max(1.0);
        GameSpec {
            codecs: (Codec::Index(table.rows()), Codec::Index(table.cols())),
            kind: GameKind::Matrix(Arc::new(table)),
            bound: Some(max),
            sequential: false,
        }
    }

    /// Each player gets `2^(own integer)`; no payoff bound.
    pub fn exp_game() -> Self {
        GameSpec { kind: GameKind::Exp, codecs: (Codec::Natural, Codec::Natural), bound: None, sequential: false }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            GameKind::Factoring => "factoring",
            GameKind::LargestInteger => "largest_integer",
            GameKind::Matrix(_) => "matrix",
            GameKind::Exp => "exp",
        }
    }

    pub fn kind(&self) -> &GameKind {
        &self.kind
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn is_sequential(&self) -> bool {
        self.sequential
    }

    pub fn codec(&self, player: Player) -> Codec {
        match player {
            Player::One => self.codecs.0,
            Player::Two => self.codecs.1,
        }
    }

    pub fn decode_action(&self, player: Player, bits: &Bits) -> Action {
        self.codec(player).decode(bits)
    }

    pub fn encode_action(&self, player: Player, action: &Action) -> Option<Bits> {
        self.codec(player).encode(action)
    }

    /// Payoffs for a pair of valid actions; `None` if either is not an action
    /// of this game.
    pub fn payoff(&self, a1: &Action, a2: &Action) -> Option<(f64, f64)> {
        match (&self.kind, a1, a2) {
            (GameKind::Factoring, Action::Int(n), claim) if n >= &BigUint::from(2u32) => {
                match claim {
                    Action::Factors(_) | Action::NoClaim => Some(factoring_payoff(n, claim)),
                    _ => None,
                }
            }
            (GameKind::LargestInteger, Action::Int(i), Action::Int(j)) => Some(largest_integer_payoff(i, j)),
            (GameKind::Matrix(t), Action::Index(i), Action::Index(j)) => matrix_payoff(t, *i, *j),
            (GameKind::Exp, Action::Int(i), Action::Int(j)) => {
                let p = exp_payoff(i, j);
                Some((p.u1, p.u2))
            }
            _ => None,
        }
    }

    /// Supremum, over the opponent's actions, of `player`'s payoff when it
    /// plays `own`. Used when the opponent's machine does not halt.
    pub fn sup_payoff(&self, player: Player, own: &Action) -> Result<f64> {
        let closed = match (&self.kind, player, own) {
            (GameKind::Factoring, Player::One, Action::Int(_)) => Some(2.0),
            (GameKind::Factoring, Player::Two, Action::Factors(fs)) => {
                Some(if fs.iter().all(is_prime) { 2.0 } else { 1.0 })
            }
            (GameKind::Factoring, Player::Two, Action::NoClaim) => Some(1.0),
            (GameKind::LargestInteger, _, Action::Int(i)) => Some(if i.is_zero() { 50.0 } else { 100.0 }),
            (GameKind::Matrix(t), Player::One, Action::Index(i)) if *i < t.rows() => {
                Some((0..t.cols()).map(|j| t.a(*i, j)).fold(0.0, f64::max))
            }
            (GameKind::Matrix(t), Player::Two, Action::Index(j)) if *j < t.cols() => {
                Some((0..t.rows()).map(|i| t.b(i, *j)).fold(0.0, f64::max))
            }
            (GameKind::Exp, _, Action::Int(i)) => Some(pow2_saturating(i).0),
            _ => None,
        };
        match (closed, self.bound) {
            (Some(v), _) => Ok(v),
            (None, Some(k)) => Ok(k),
            (None, None) => Err(Error::Unbounded(format!(
                "no closed-form supremum for {} player {} action {own} and no payoff bound",
                self.name(),
                player.index()
            ))),
        }
    }
}

/// `(1, 2)` if `claim` is a full prime factorization of `n`, else `(2, 1)`.
pub fn factoring_payoff(n: &BigUint, claim: &Action) -> (f64, f64) {
    if is_valid_factorization(n, claim) {
        (1.0, 2.0)
    } else {
        (2.0, 1.0)
    }
}

/// Product equals `n` and every factor is prime.
pub fn is_valid_factorization(n: &BigUint, claim: &Action) -> bool {
    match claim {
        Action::Factors(fs) if !fs.is_empty() => {
            fs.iter().product::<BigUint>() == *n && fs.iter().all(is_prime)
        }
        _ => false,
    }
}

/// Larger integer wins 100, the loser gets 0, a tie gives 50 each.
pub fn largest_integer_payoff(i: &BigUint, j: &BigUint) -> (f64, f64) {
    match i.cmp(j) {
        std::cmp::Ordering::Greater => (100.0, 0.0),
        std::cmp::Ordering::Less => (0.0, 100.0),
        std::cmp::Ordering::Equal => (50.0, 50.0),
    }
}

/// Stored entries, or `None` for an index outside the table.
pub fn matrix_payoff(table: &Bimatrix, i: usize, j: usize) -> Option<(f64, f64)> {
    (i < table.rows() && j < table.cols()).then(|| (table.a(i, j), table.b(i, j)))
}

/// Exponent at which `2^i` saturates.
pub const EXP_CAP: u32 = 1023;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPayoff {
    pub u1: f64,
    pub u2: f64,
    pub saturated: bool,
}

/// `(2^i, 2^j)`, saturating at `2^1023`.
pub fn exp_payoff(i: &BigUint, j: &BigUint) -> ExpPayoff {
    let (u1, s1) = pow2_saturating(i);
    let (u2, s2) = pow2_saturating(j);
    ExpPayoff { u1, u2, saturated: s1 || s2 }
}

fn pow2_saturating(i: &BigUint) -> (f64, bool) {
    match i.to_u32() {
        Some(e) if e <= EXP_CAP => (2f64.powi(e as i32), false),
        _ => (2f64.powi(EXP_CAP as i32), true),
    }
}

/// Helper for tests and builders: an integer action.
pub fn int_action(v: u64) -> Action {
    Action::Int(BigUint::from(v))
}

/// `n` as a factor list action.
pub fn factors_action(fs: &[u64]) -> Action {
    Action::Factors(fs.iter().map(|&f| BigUint::from(f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factoring_payoffs() {
        let n = BigUint::from(15u32);
        assert_eq!(factoring_payoff(&n, &factors_action(&[3, 5])), (1.0, 2.0));
        assert_eq!(factoring_payoff(&n, &factors_action(&[5, 5])), (2.0, 1.0));
        assert_eq!(factoring_payoff(&n, &Action::NoClaim), (2.0, 1.0));
        assert_eq!(factoring_payoff(&n, &Action::NoAction), (2.0, 1.0));
        // right product, composite factor
        assert_eq!(factoring_payoff(&BigUint::from(45u32), &factors_action(&[9, 5])), (2.0, 1.0));
    }

    #[test]
    fn largest_integer_payoffs() {
        let b = |v: u32| BigUint::from(v);
        assert_eq!(largest_integer_payoff(&b(7), &b(7)), (50.0, 50.0));
        assert_eq!(largest_integer_payoff(&b(8), &b(7)), (100.0, 0.0));
        assert_eq!(largest_integer_payoff(&b(0), &b(1)), (0.0, 100.0));
    }

    #[test]
    fn exp_payoffs_and_saturation() {
        let b = |v: u32| BigUint::from(v);
        assert_eq!(exp_payoff(&b(0), &b(0)), ExpPayoff { u1: 1.0, u2: 1.0, saturated: false });
        assert_eq!(exp_payoff(&b(3), &b(1)), ExpPayoff { u1: 8.0, u2: 2.0, saturated: false });
        let s = exp_payoff(&b(1100), &b(0));
        assert!(s.saturated);
        assert!(s.u1.is_finite());
        assert_eq!(s.u1, 2f64.powi(1023));
    }

    #[test]
    fn sup_conventions() {
        let f = GameSpec::factoring();
        assert_eq!(f.sup_payoff(Player::One, &int_action(15)).unwrap(), 2.0);
        assert_eq!(f.sup_payoff(Player::Two, &factors_action(&[3, 5])).unwrap(), 2.0);
        assert_eq!(f.sup_payoff(Player::Two, &factors_action(&[15])).unwrap(), 1.0);
        let li = GameSpec::largest_integer();
        assert_eq!(li.sup_payoff(Player::One, &int_action(7)).unwrap(), 100.0);
        assert_eq!(li.sup_payoff(Player::One, &int_action(0)).unwrap(), 50.0);
    }

    #[test]
    fn matrix_game_payoffs() {
        let t = Bimatrix::from_rows(&[vec![(2.0, 1.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 2.0)]]).unwrap();
        assert_eq!(matrix_payoff(&t, 0, 0), Some((2.0, 1.0)));
        assert_eq!(matrix_payoff(&t, 0, 1), Some((0.0, 0.0)));
        assert_eq!(matrix_payoff(&t, 2, 0), None);
        let g = GameSpec::matrix(t);
        assert_eq!(g.bound(), Some(2.0));
        assert_eq!(g.sup_payoff(Player::Two, &Action::Index(1)).unwrap(), 2.0);
        let one = Bimatrix::from_rows(&[vec![(0.5, 0.25)]]).unwrap();
        assert_eq!(matrix_payoff(&one, 0, 0), Some((0.5, 0.25)));
    }

    #[test]
    fn decode_via_game() {
        let g = GameSpec::factoring();
        let bits: Bits = "1111".parse().unwrap();
        assert_eq!(g.decode_action(Player::One, &bits), int_action(15));
        assert_eq!(g.decode_action(Player::One, &Bits::new()), Action::NoAction);
        let claim = g.encode_action(Player::Two, &factors_action(&[3, 5])).unwrap();
        assert_eq!(g.decode_action(Player::Two, &claim), factors_action(&[3, 5]));
    }
}
