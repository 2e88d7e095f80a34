//! Bit-string codecs for actions.

use num_bigint::BigUint;
use num_traits::One;

use super::Action;
use crate::vm::Bits;

/// How a player's output bits map to actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codec {
    /// Big-endian integer at least 2; empty, leading-zero or smaller values
    /// are not actions. (Factoring: Alice.)
    IntAtLeastTwo,
    /// Big-endian natural number; the empty string is zero. Leading zeros
    /// are malformed.
    Natural,
    /// Factor list: each factor `f` of bit length `L` is written `1^L 0 f`.
    /// Every string is an action: anything that does not parse as a non-empty
    /// list of factors `>= 2` is the losing "no claim". (Factoring: Bob.)
    Claim,
    /// Matrix index below `n`: minimal big-endian binary, `0` for zero.
    Index(usize),
}

impl Codec {
    pub fn decode(&self, bits: &Bits) -> Action {
        let s = bits.as_slice();
        match *self {
            Codec::IntAtLeastTwo => {
                if s.first() != Some(&true) {
                    return Action::NoAction;
                }
                let v = bits.to_uint();
                if v < BigUint::from(2u32) {
                    Action::NoAction
                } else {
                    Action::Int(v)
                }
            }
            Codec::Natural => match s.first() {
                None => Action::Int(BigUint::default()),
                Some(true) => Action::Int(bits.to_uint()),
                Some(false) => Action::NoAction,
            },
            Codec::Claim => decode_claim(s).map_or(Action::NoClaim, Action::Factors),
            Codec::Index(n) => {
                let idx = match s {
                    [] => return Action::NoAction,
                    [false] => 0usize,
                    [false, ..] => return Action::NoAction,
                    _ if s.len() > 63 => return Action::NoAction,
                    _ => s.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b)),
                };
                if idx < n {
                    Action::Index(idx)
                } else {
                    Action::NoAction
                }
            }
        }
    }

    /// Canonical encoding; `None` if the action is not in this codec's range.
    pub fn encode(&self, action: &Action) -> Option<Bits> {
        match (*self, action) {
            (Codec::IntAtLeastTwo, Action::Int(v)) if v >= &BigUint::from(2u32) => Some(Bits::from_uint(v)),
            (Codec::Natural, Action::Int(v)) => Some(Bits::from_uint(v)),
            (Codec::Claim, Action::Factors(fs)) if !fs.is_empty() && fs.iter().all(|f| f > &BigUint::one()) => {
                Some(encode_claim(fs))
            }
            (Codec::Claim, Action::NoClaim) => Some(Bits::new()),
            (Codec::Index(n), Action::Index(i)) if *i < n => {
                if *i == 0 {
                    Some(Bits::from_bools(vec![false]))
                } else {
                    Some(Bits::from_uint(&BigUint::from(*i)))
                }
            }
            _ => None,
        }
    }
}

/// Encodes a factor list as `1^L 0 f` per factor.
pub fn encode_claim(factors: &[BigUint]) -> Bits {
    let mut out = Bits::new();
    for f in factors {
        let b = Bits::from_uint(f);
        for _ in 0..b.len() {
            out.push(true);
        }
        out.push(false);
        out.extend_from(&b);
    }
    out
}

/// Number of bits [`encode_claim`] produces.
pub fn claim_len(factors: &[BigUint]) -> u64 {
    factors.iter().map(|f| 2 * f.bits() + 1).sum()
}

fn decode_claim(s: &[bool]) -> Option<Vec<BigUint>> {
    if s.is_empty() {
        return None;
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let len = s[i..].iter().take_while(|&&b| b).count();
        i += len;
        if len < 2 || s.get(i) != Some(&false) {
            return None;
        }
        i += 1;
        let field = s.get(i..i + len)?;
        if !field[0] {
            return None;
        }
        out.push(Bits::from_bools(field.to_vec()).to_uint());
        i += len;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn integer_codec_decodes_big_endian() {
        assert_eq!(Codec::IntAtLeastTwo.decode(&b("1111")), Action::Int(big(15)));
        assert_eq!(Codec::IntAtLeastTwo.decode(&b("")), Action::NoAction);
        assert_eq!(Codec::IntAtLeastTwo.decode(&b("1")), Action::NoAction);
        assert_eq!(Codec::IntAtLeastTwo.decode(&b("0101")), Action::NoAction);
    }

    #[test]
    fn natural_codec_reads_empty_as_zero() {
        assert_eq!(Codec::Natural.decode(&b("")), Action::Int(big(0)));
        assert_eq!(Codec::Natural.decode(&b("1111")), Action::Int(big(15)));
        assert_eq!(Codec::Natural.decode(&b("01")), Action::NoAction);
    }

    #[test]
    fn claim_of_three_and_five() {
        let bits = encode_claim(&[big(3), big(5)]);
        assert_eq!(bits.to_string(), "110111110101");
        assert_eq!(bits.len() as u64, claim_len(&[big(3), big(5)]));
        assert_eq!(Codec::Claim.decode(&bits), Action::Factors(vec![big(3), big(5)]));
    }

    #[test]
    fn malformed_claims_are_no_claim() {
        assert_eq!(Codec::Claim.decode(&b("")), Action::NoClaim);
        // factor 1 has length 1
        assert_eq!(Codec::Claim.decode(&b("101")), Action::NoClaim);
        // truncated field
        assert_eq!(Codec::Claim.decode(&b("110")), Action::NoClaim);
        assert_eq!(Codec::Claim.decode(&b("1101")), Action::NoClaim);
        // leading zero inside a field
        assert_eq!(Codec::Claim.decode(&b("11001")), Action::NoClaim);
    }

    #[test]
    fn index_codec_bounds() {
        let c = Codec::Index(3);
        assert_eq!(c.decode(&b("0")), Action::Index(0));
        assert_eq!(c.decode(&b("1")), Action::Index(1));
        assert_eq!(c.decode(&b("10")), Action::Index(2));
        assert_eq!(c.decode(&b("11")), Action::NoAction);
        assert_eq!(c.decode(&b("")), Action::NoAction);
        assert_eq!(c.decode(&b("01")), Action::NoAction);
        assert_eq!(c.encode(&Action::Index(0)).unwrap().to_string(), "0");
    }
}
