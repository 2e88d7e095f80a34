//! Support enumeration for small bimatrix games (floating point). Serves as
//! the oracle for Lemke-Howson. Only equal-size support pairs are tried,
//! which finds every equilibrium of a nondegenerate game.

use super::profile::{regret, MixedProfile};
use crate::error::{Error, Result};
use crate::game::Bimatrix;

/// Largest dimension accepted.
pub const SUPPORT_ENUM_LIMIT: usize = 12;

const EQ_TOL: f64 = 1e-9;

/// Solves `M x = rhs` for square `M` by Gaussian elimination with partial
/// pivoting; `None` if (numerically) singular.
pub(crate) fn solve_linear(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[piv][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, piv);
        rhs.swap(c, piv);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (rhs[c] - s) / m[c][c];
    }
    Some(x)
}

/// Mixed strategy over `cols` making every row in `rows` indifferent under
/// `payoff(row, col)`, or `None`.
fn indifference(rows: &[usize], cols: &[usize], payoff: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    let k = rows.len();
    // unknowns: weights on cols, then the common value
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    let mut rhs = vec![0.0; k + 1];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            m[r][c] = payoff(i, j);
        }
        m[r][k] = -1.0;
    }
    for c in 0..k {
        m[k][c] = 1.0;
    }
    rhs[k] = 1.0;
    let x = solve_linear(m, rhs)?;
    let w = &x[..k];
    if w.iter().any(|v| *v < -EQ_TOL) {
        return None;
    }
    Some(w.iter().map(|v| v.max(0.0)).collect())
}

fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).filter(move |s| s.count_ones() as usize == k).map(move |s| (0..n).filter(|i| s >> i & 1 == 1).collect())
}

/// All equilibria found on equal-size supports, deduplicated.
pub fn support_enum(game: &Bimatrix) -> Result<Vec<MixedProfile>> {
    let (m, n) = (game.rows(), game.cols());
    if m > SUPPORT_ENUM_LIMIT || n > SUPPORT_ENUM_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "support enumeration limited to {SUPPORT_ENUM_LIMIT}x{SUPPORT_ENUM_LIMIT}, got {m}x{n}"
        )));
    }
    let tol = EQ_TOL * game.max_entry().max(1.0);
    let mut found: Vec<MixedProfile> = Vec::new();
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                // q makes player 1 indifferent over `rows`; p does the same for player 2
                let Some(qs) = indifference(&rows, &cols, |i, j| game.a(i, j)) else { continue };
                let Some(ps) = indifference(&cols, &rows, |j, i| game.b(i, j)) else { continue };
                let mut p = vec![0.0; m];
                let mut q = vec![0.0; n];
                for (w, &i) in ps.iter().zip(&rows) {
                    p[i] = *w;
                }
                for (w, &j) in qs.iter().zip(&cols) {
                    q[j] = *w;
                }
                let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
                p.iter_mut().for_each(|x| *x /= sp);
                q.iter_mut().for_each(|x| *x /= sq);
                let Ok(profile) = MixedProfile::new(p, q) else { continue };
                let r = regret(game, &profile)?;
                if r.max() > tol {
                    continue;
                }
                if found.iter().all(|f| f.linf_distance(&profile) > 1e-9) {
                    found.push(profile);
                }
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordination_game_has_three_equilibria() {
        let g = Bimatrix::from_rows(&[vec![(2.0, 2.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 1.0)]]).unwrap();
        let eqs = support_enum(&g).unwrap();
        assert_eq!(eqs.len(), 3);
        let mixed = eqs.iter().find(|e| e.p[0] > 0.0 && e.p[1] > 0.0).unwrap();
        // player 2 mixes to make player 1 indifferent: 2 q0 = q1
        assert!((mixed.q[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((mixed.p[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn dominant_strategy_game_has_one() {
        let g = Bimatrix::from_rows(&[vec![(3.0, 3.0), (1.0, 2.0)], vec![(2.0, 1.0), (0.0, 0.0)]]).unwrap();
        let eqs = support_enum(&g).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].p, vec![1.0, 0.0]);
    }

    #[test]
    fn one_by_one_and_limit() {
        let g = Bimatrix::from_rows(&[vec![(1.0, 1.0)]]).unwrap();
        assert_eq!(support_enum(&g).unwrap().len(), 1);
        let big = Bimatrix::from_fn(13, 2, |_, _| (1.0, 1.0)).unwrap();
        assert!(support_enum(&big).is_err());
    }

    #[test]
    fn linear_solver() {
        let x = solve_linear(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve_linear(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }
}
