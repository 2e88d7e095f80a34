//! Lemke-Howson complementary pivoting in exact rational arithmetic.
//!
//! Labels `0..m` are row strategies and `m..m+n` column strategies. The row
//! polytope `{x >= 0 : B'^T x <= 1}` and the column polytope
//! `{y >= 0 : A' y <= 1}` each get a tableau whose variables are indexed by
//! label; `A'`, `B'` are the payoffs shifted to be at least 1. Ties in the
//! ratio test are broken lexicographically on the slack columns, which is the
//! usual symbolic perturbation and makes degenerate inputs safe.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::profile::MixedProfile;
use super::support::{support_enum, SUPPORT_ENUM_LIMIT};
use crate::error::{Error, Result};
use crate::game::Bimatrix;

/// Pivots allowed before falling back to support enumeration.
pub const PIVOT_BUDGET: usize = 20_000;

type Q = BigRational;

struct Tableau {
    /// `rows x (vars + 1)`; the last column is the right-hand side.
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    vars: usize,
    slack: std::ops::Range<usize>,
}

impl Tableau {
    /// Lexicographic minimum-ratio row for `col`.
    fn leaving_row(&self, col: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for r in 0..self.t.len() {
            if !self.t[r][col].is_positive() {
                continue;
            }
            best = match best {
                None => Some(r),
                Some(b) if self.lex_less(r, b, col) => Some(r),
                keep => keep,
            };
        }
        best
    }

    fn lex_less(&self, r: usize, s: usize, col: usize) -> bool {
        let keys = std::iter::once(self.vars).chain(self.slack.clone());
        for k in keys {
            // compare t[r][k]/t[r][col] with t[s][k]/t[s][col]; both pivots positive
            let lhs = &self.t[r][k] * &self.t[s][col];
            let rhs = &self.t[s][k] * &self.t[r][col];
            match lhs.cmp(&rhs) {
                Ordering::Less => return true,
                Ordering::Greater => return false,
                Ordering::Equal => {}
            }
        }
        false
    }

    /// Brings `col` into the basis and returns the label that left.
    fn pivot(&mut self, col: usize) -> Option<usize> {
        let r = self.leaving_row(col)?;
        let piv = self.t[r][col].clone();
        for x in self.t[r].iter_mut() {
            *x = &*x / &piv;
        }
        let pivot_row = self.t[r].clone();
        for (o, row) in self.t.iter_mut().enumerate() {
            if o == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        Some(std::mem::replace(&mut self.basis[r], col))
    }

    /// Values of variables `range`, zero when non-basic.
    fn values(&self, range: std::ops::Range<usize>) -> Vec<Q> {
        let mut v = vec![Q::zero(); range.len()];
        for (r, &b) in self.basis.iter().enumerate() {
            if range.contains(&b) {
                v[b - range.start] = self.t[r][self.vars].clone();
            }
        }
        v
    }
}

pub(crate) fn to_rational(x: f64) -> Q {
    Q::from_float(x).expect("finite payoff")
}

/// Exact payoff matrices shifted so every entry is at least 1.
fn shifted(game: &Bimatrix) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let (m, n) = (game.rows(), game.cols());
    let mut min = f64::INFINITY;
    for i in 0..m {
        for j in 0..n {
            min = min.min(game.a(i, j)).min(game.b(i, j));
        }
    }
    let shift = Q::one() - to_rational(min);
    let a = (0..m).map(|i| (0..n).map(|j| to_rational(game.a(i, j)) + &shift).collect()).collect();
    let b = (0..m).map(|i| (0..n).map(|j| to_rational(game.b(i, j)) + &shift).collect()).collect();
    (a, b)
}

fn normalize(v: Vec<Q>) -> Option<Vec<Q>> {
    let s: Q = v.iter().sum();
    if !s.is_positive() {
        return None;
    }
    Some(v.into_iter().map(|x| x / &s).collect())
}

/// Runs the pivoting path from the artificial equilibrium, dropping
/// `initial_label`. `None` if the pivot budget runs out.
fn pivot_path(game: &Bimatrix, initial_label: usize, budget: usize) -> Result<Option<MixedProfile>> {
    let (m, n) = (game.rows(), game.cols());
    let vars = m + n;
    let (a, b) = shifted(game);
    let one = Q::one();

    // row polytope: B'^T x + s = 1, x = labels 0..m, s = labels m..m+n
    let mut row_tab = Tableau {
        t: (0..n)
            .map(|j| {
                let mut r = vec![Q::zero(); vars + 1];
                for i in 0..m {
                    r[i] = b[i][j].clone();
                }
                r[m + j] = one.clone();
                r[vars] = one.clone();
                r
            })
            .collect(),
        basis: (m..m + n).collect(),
        vars,
        slack: m..m + n,
    };
    // column polytope: r + A' y = 1, r = labels 0..m, y = labels m..m+n
    let mut col_tab = Tableau {
        t: (0..m)
            .map(|i| {
                let mut r = vec![Q::zero(); vars + 1];
                r[i] = one.clone();
                for j in 0..n {
                    r[m + j] = a[i][j].clone();
                }
                r[vars] = one.clone();
                r
            })
            .collect(),
        basis: (0..m).collect(),
        vars,
        slack: 0..m,
    };

    let mut entering = initial_label;
    let mut in_row = initial_label < m;
    for _ in 0..budget {
        let tab = if in_row { &mut row_tab } else { &mut col_tab };
        let leaving = tab
            .pivot(entering)
            .ok_or_else(|| Error::Solver("unbounded pivot column; payoffs must be shifted positive".into()))?;
        if leaving == initial_label {
            let x = normalize(row_tab.values(0..m));
            let y = normalize(col_tab.values(m..m + n));
            return match (x, y) {
                (Some(p), Some(q)) => Ok(Some(MixedProfile::from_exact(p, q))),
                _ => Err(Error::Solver("pivoting ended at the artificial equilibrium".into())),
            };
        }
        entering = leaving;
        in_row = !in_row;
    }
    Ok(None)
}

/// Lemke-Howson from `initial_label` (`0..m+n`). Falls back to support
/// enumeration if the pivot budget is exhausted and the game is small enough.
pub fn lemke_howson(game: &Bimatrix, initial_label: usize) -> Result<MixedProfile> {
    lemke_howson_with_budget(game, initial_label, PIVOT_BUDGET)
}

pub fn lemke_howson_with_budget(game: &Bimatrix, initial_label: usize, budget: usize) -> Result<MixedProfile> {
    let labels = game.rows() + game.cols();
    if initial_label >= labels {
        return Err(Error::InvalidArgument(format!("initial label {initial_label} outside 0..{labels}")));
    }
    if let Some(p) = pivot_path(game, initial_label, budget)? {
        return Ok(p);
    }
    if game.rows() <= SUPPORT_ENUM_LIMIT && game.cols() <= SUPPORT_ENUM_LIMIT {
        if let Some(p) = support_enum(game)?.into_iter().next() {
            return Ok(p);
        }
    }
    Err(Error::Solver(format!("no equilibrium within {budget} pivots")))
}

/// Exact regrets `(r1, r2)` of an exact profile.
pub fn regret_exact(game: &Bimatrix, p: &[Q], q: &[Q]) -> (Q, Q) {
    let (m, n) = (game.rows(), game.cols());
    let a: Vec<Vec<Q>> = (0..m).map(|i| (0..n).map(|j| to_rational(game.a(i, j))).collect()).collect();
    let b: Vec<Vec<Q>> = (0..m).map(|i| (0..n).map(|j| to_rational(game.b(i, j))).collect()).collect();
    let row_vals: Vec<Q> = (0..m).map(|i| (0..n).map(|j| &a[i][j] * &q[j]).sum()).collect();
    let col_vals: Vec<Q> = (0..n).map(|j| (0..m).map(|i| &b[i][j] * &p[i]).sum()).collect();
    let u1: Q = (0..m).map(|i| &p[i] * &row_vals[i]).sum();
    let u2: Q = (0..n).map(|j| &q[j] * &col_vals[j]).sum();
    let best1 = row_vals.into_iter().max().expect("non-empty");
    let best2 = col_vals.into_iter().max().expect("non-empty");
    (best1 - u1, best2 - u2)
}

/// Integer helper for building exact test inputs.
pub fn rational(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(cells: &[&[(f64, f64)]]) -> Bimatrix {
        Bimatrix::from_rows(&cells.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn unique_pure_equilibrium() {
        let g = game(&[&[(3.0, 3.0), (1.0, 2.0)], &[(2.0, 1.0), (0.0, 0.0)]]);
        for label in 0..4 {
            let p = lemke_howson(&g, label).unwrap();
            assert_eq!(p.p, vec![1.0, 0.0]);
            assert_eq!(p.q, vec![1.0, 0.0]);
        }
    }

    #[test]
    fn matching_pennies_is_uniform() {
        let g = game(&[&[(2.0, 0.0), (0.0, 2.0)], &[(0.0, 2.0), (2.0, 0.0)]]);
        let p = lemke_howson(&g, 0).unwrap();
        let (ep, eq) = p.exact().unwrap();
        assert_eq!(ep, &[rational(1, 2), rational(1, 2)]);
        assert_eq!(eq, &[rational(1, 2), rational(1, 2)]);
        let (r1, r2) = regret_exact(&g, ep, eq);
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn one_by_one() {
        let g = game(&[&[(0.3, 0.7)]]);
        let p = lemke_howson(&g, 1).unwrap();
        assert_eq!((p.p.clone(), p.q.clone()), (vec![1.0], vec![1.0]));
    }

    #[test]
    fn degenerate_game_terminates() {
        // column 1 ties everywhere for player 2
        let g = game(&[&[(1.0, 1.0), (1.0, 1.0)], &[(0.0, 1.0), (2.0, 1.0)]]);
        for label in 0..4 {
            let p = lemke_howson(&g, label).unwrap();
            let (ep, eq) = p.exact().unwrap();
            let (r1, r2) = regret_exact(&g, ep, eq);
            assert!(!r1.is_negative() && !r2.is_negative());
            assert!(r1.is_zero() && r2.is_zero(), "label {label}");
        }
    }

    #[test]
    fn bad_label_rejected() {
        let g = game(&[&[(1.0, 1.0)]]);
        assert!(lemke_howson(&g, 2).is_err());
    }
}
