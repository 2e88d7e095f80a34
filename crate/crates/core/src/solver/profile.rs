//! Mixed profiles and regret.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::lemke_howson::regret_exact;
use crate::error::{Error, Result};
use crate::game::Bimatrix;

/// Tolerance on a distribution's total mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A distribution over rows and one over columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(skip)]
    exact: Option<(Vec<BigRational>, Vec<BigRational>)>,
}

fn check_distribution(v: &[f64], who: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{who} distribution is empty")));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument(format!("{who} distribution has negative or non-finite mass")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > MASS_TOLERANCE * v.len() as f64 {
        return Err(Error::InvalidArgument(format!("{who} distribution sums to {s}")));
    }
    Ok(())
}

impl MixedProfile {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        check_distribution(&p, "row")?;
        check_distribution(&q, "column")?;
        Ok(MixedProfile { p, q, exact: None })
    }

    /// Pure profile `(i, j)` in an `m x n` game.
    pub fn pure(m: usize, n: usize, i: usize, j: usize) -> Self {
        let mut p = vec![0.0; m];
        let mut q = vec![0.0; n];
        p[i] = 1.0;
        q[j] = 1.0;
        MixedProfile { p, q, exact: None }
    }

    pub(crate) fn from_exact(p: Vec<BigRational>, q: Vec<BigRational>) -> Self {
        let f = |v: &[BigRational]| v.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
        MixedProfile { p: f(&p), q: f(&q), exact: Some((p, q)) }
    }

    /// Exact rational form when the profile came from exact pivoting.
    pub fn exact(&self) -> Option<(&[BigRational], &[BigRational])> {
        self.exact.as_ref().map(|(p, q)| (p.as_slice(), q.as_slice()))
    }

    /// `max |difference|` over both distributions.
    pub fn linf_distance(&self, other: &MixedProfile) -> f64 {
        if self.p.len() != other.p.len() || self.q.len() != other.q.len() {
            return f64::INFINITY;
        }
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Row and column supports.
    pub fn support(&self, tol: f64) -> (Vec<usize>, Vec<usize>) {
        let s = |v: &[f64]| v.iter().enumerate().filter(|(_, x)| **x > tol).map(|(i, _)| i).collect();
        (s(&self.p), s(&self.q))
    }
}

/// Best single deviation gains against a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub r1: f64,
    pub r2: f64,
    pub best_response_1: usize,
    pub best_response_2: usize,
    pub payoff1: f64,
    pub payoff2: f64,
}

impl RegretReport {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2)
    }
}

/// `r1 = max_i (A q)_i - p·A·q`, `r2` likewise for columns. Ties pick the
/// lowest index. Regrets are clamped at zero to absorb rounding.
pub fn regret(game: &Bimatrix, profile: &MixedProfile) -> Result<RegretReport> {
    let (m, n) = (game.rows(), game.cols());
    if profile.p.len() != m || profile.q.len() != n {
        return Err(Error::InvalidArgument(format!(
            "profile is {}x{}, game is {m}x{n}",
            profile.p.len(),
            profile.q.len()
        )));
    }
    let row_vals: Vec<f64> = (0..m).map(|i| (0..n).map(|j| game.a(i, j) * profile.q[j]).sum()).collect();
    let col_vals: Vec<f64> = (0..n).map(|j| (0..m).map(|i| game.b(i, j) * profile.p[i]).sum()).collect();
    let payoff1: f64 = (0..m).map(|i| profile.p[i] * row_vals[i]).sum();
    let payoff2: f64 = (0..n).map(|j| profile.q[j] * col_vals[j]).sum();
    let argmax = |v: &[f64]| {
        v.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
    };
    let (br1, v1) = argmax(&row_vals);
    let (br2, v2) = argmax(&col_vals);
    Ok(RegretReport {
        r1: (v1 - payoff1).max(0.0),
        r2: (v2 - payoff2).max(0.0),
        best_response_1: br1,
        best_response_2: br2,
        payoff1,
        payoff2,
    })
}

/// Exact-rational regret of a profile that carries its exact form, as `f64`.
pub fn exact_regret(game: &Bimatrix, profile: &MixedProfile) -> Option<(f64, f64)> {
    let (p, q) = profile.exact()?;
    let (r1, r2) = regret_exact(game, p, q);
    Some((r1.to_f64().unwrap_or(f64::INFINITY), r2.to_f64().unwrap_or(f64::INFINITY)))
}

/// An η-equilibrium check with Monte Carlo slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub regret: RegretReport,
    pub eta: f64,
    /// `eta + 3 · (largest cell standard error)`.
    pub tolerance: f64,
    pub certified: bool,
}

/// Certifies `profile` as an `eta`-equilibrium of `game`, widening the
/// tolerance by three times the largest cell standard error.
pub fn certify(game: &Bimatrix, profile: &MixedProfile, eta: f64) -> Result<Certificate> {
    let regret = regret(game, profile)?;
    let tolerance = eta + 3.0 * game.max_stderr();
    let certified = regret.max() <= tolerance;
    Ok(Certificate { regret, eta, tolerance, certified })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordination_off_diagonal_regret() {
        let g = Bimatrix::from_rows(&[vec![(2.0, 2.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 1.0)]]).unwrap();
        let r = regret(&g, &MixedProfile::pure(2, 2, 0, 1)).unwrap();
        assert_eq!(r.r1, 1.0);
        assert_eq!(r.best_response_1, 1);
        assert_eq!(r.r2, 2.0);
    }

    #[test]
    fn distributions_validated() {
        assert!(MixedProfile::new(vec![0.5, 0.5], vec![1.0]).is_ok());
        assert!(MixedProfile::new(vec![0.6, 0.5], vec![1.0]).is_err());
        assert!(MixedProfile::new(vec![1.5, -0.5], vec![1.0]).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = Bimatrix::from_rows(&[vec![(1.0, 1.0)]]).unwrap();
        assert!(regret(&g, &MixedProfile::pure(2, 1, 0, 0)).is_err());
    }
}
