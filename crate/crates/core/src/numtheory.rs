//! Primality and factorization on arbitrary-precision integers.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::vm::splitmix64;

/// Witness bases that make Miller-Rabin deterministic below 3.317e24.
pub const DETERMINISTIC_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Number of Miller-Rabin rounds for inputs beyond the deterministic range.
pub const MR_ROUNDS: usize = 64;

fn deterministic_limit() -> BigUint {
    BigUint::parse_bytes(b"3317044064679887385961981", 10).expect("literal")
}

/// One Miller-Rabin round for odd `n > 3` with `n - 1 = d * 2^s`.
fn mr_round(n: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let n1 = n - 1u32;
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Miller-Rabin. Deterministic below 3.3e24 (first 13 prime bases); above,
/// 64 rounds with bases derived from a fixed splitmix stream.
pub fn is_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    if n < &deterministic_limit() {
        return DETERMINISTIC_BASES.iter().all(|&a| mr_round(n, &d, s, &BigUint::from(a)));
    }
    let span = n - 3u32;
    let mut state = 0x0DDB_1A5E_5BAD_5EEDu64;
    (0..MR_ROUNDS).all(|_| {
        let mut words = Vec::with_capacity(n.bits() as usize / 32 + 2);
        for _ in 0..(n.bits() / 32 + 2) {
            state = splitmix64(state);
            words.push(state as u32);
        }
        let a = BigUint::new(words) % &span + 2u32;
        mr_round(n, &d, s, &a)
    })
}

/// Full prime factorization by trial division, ascending. `n < 2` yields an
/// empty list. Used offline (lookup tables) and as a test oracle.
pub fn trial_factor(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut m = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        while m % d == 0 {
            out.push(d);
            m /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Trial-division factorization on big integers, giving up after `max_divisor`.
/// Returns `None` if a cofactor above `max_divisor^2` remains unresolved.
pub fn trial_factor_big(n: &BigUint, max_divisor: u64) -> Option<Vec<BigUint>> {
    if let Some(small) = n.to_u64() {
        if (max_divisor as u128) * (max_divisor as u128) >= small as u128 {
            return Some(trial_factor(small).into_iter().map(BigUint::from).collect());
        }
    }
    let mut out = Vec::new();
    let mut m = n.clone();
    let mut d = 2u64;
    while d <= max_divisor {
        let dd = BigUint::from(d);
        if &dd * &dd > m {
            break;
        }
        loop {
            let (q, r) = m.div_rem(&dd);
            if !r.is_zero() {
                break;
            }
            out.push(dd.clone());
            m = q;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let dd = BigUint::from(d);
    if m > BigUint::one() {
        if &dd * &dd > m {
            out.push(m);
        } else {
            return None;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn miller_rabin_matches_naive_below_100k() {
        for n in 0..100_000u64 {
            assert_eq!(is_prime(&BigUint::from(n)), naive_prime(n), "n = {n}");
        }
    }

    #[test]
    fn known_large_primes_and_composites() {
        // 2^89 - 1 is a Mersenne prime, 2^83 - 1 is not
        let m89 = (BigUint::one() << 89u32) - 1u32;
        let m83 = (BigUint::one() << 83u32) - 1u32;
        assert!(is_prime(&m89));
        assert!(!is_prime(&m83));
        // strong pseudoprime to the first nine prime bases
        let psp = BigUint::parse_bytes(b"3825123056546413051", 10).unwrap();
        assert!(!is_prime(&psp));
    }

    #[test]
    fn trial_factor_products_match() {
        for n in 2..5000u64 {
            let f = trial_factor(n);
            assert_eq!(f.iter().product::<u64>(), n);
            assert!(f.iter().all(|&p| naive_prime(p)));
            assert!(f.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn trial_factor_big_respects_budget() {
        let p = BigUint::from(1_000_003u64);
        let q = BigUint::from(1_000_033u64);
        let n = &p * &q;
        assert!(trial_factor_big(&n, 1000).is_none());
        assert_eq!(trial_factor_big(&n, 1_000_010).unwrap(), vec![p, q]);
    }
}
