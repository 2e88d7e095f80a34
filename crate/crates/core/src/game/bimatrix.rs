//! Finite two-player payoff tables and their text format.
//!
//! ```text
//! # optional comments
//! 2 2
//! 0 0 2 1
//! 0 1 0 0
//! 1 0 0 0
//! 1 1 1 2
//! profile:
//! p 1 0
//! q 1 0
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::discount::PayoffEstimate;
use crate::error::{Error, Result};

/// Per-cell Monte Carlo estimates behind a bimatrix built from strategies.
pub type CellProvenance = (PayoffEstimate, PayoffEstimate);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bimatrix {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Vec<CellProvenance>>,
}

/// A bimatrix read from text, with the optional `profile:` section.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedBimatrix {
    pub bimatrix: Bimatrix,
    pub profile: Option<(Vec<f64>, Vec<f64>)>,
}

impl Bimatrix {
    /// Row-major payoff vectors for players 1 and 2.
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("bimatrix needs at least one row and column".into()));
        }
        if a.len() != rows * cols || b.len() != rows * cols {
            return Err(Error::InvalidArgument(format!("expected {} cells per player", rows * cols)));
        }
        if let Some(v) = a.iter().chain(&b).find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidArgument(format!("payoff {v} is not a finite non-negative number")));
        }
        Ok(Bimatrix { rows, cols, a, b, provenance: None })
    }

    pub fn from_rows(cells: &[Vec<(f64, f64)>]) -> Result<Self> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        if cells.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged payoff rows".into()));
        }
        let a = cells.iter().flatten().map(|c| c.0).collect();
        let b = cells.iter().flatten().map(|c| c.1).collect();
        Bimatrix::new(rows, cols, a, b)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Result<Self> {
        let mut a = Vec::with_capacity(rows * cols);
        let mut b = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let (x, y) = f(i, j);
                a.push(x);
                b.push(y);
            }
        }
        Bimatrix::new(rows, cols, a, b)
    }

    pub fn with_provenance(mut self, cells: Vec<CellProvenance>) -> Self {
        assert_eq!(cells.len(), self.rows * self.cols, "one provenance record per cell");
        self.provenance = Some(cells);
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.cols + j]
    }

    pub fn provenance(&self) -> Option<&[CellProvenance]> {
        self.provenance.as_deref()
    }

    pub fn cell_provenance(&self, i: usize, j: usize) -> Option<&CellProvenance> {
        self.provenance.as_ref().map(|p| &p[i * self.cols + j])
    }

    /// Largest standard error over all cells, zero without provenance.
    pub fn max_stderr(&self) -> f64 {
        self.provenance
            .iter()
            .flatten()
            .flat_map(|(x, y)| [x.stderr, y.stderr])
            .fold(0.0, f64::max)
    }

    pub fn max_entry(&self) -> f64 {
        self.a.iter().chain(&self.b).copied().fold(0.0, f64::max)
    }

    /// Expected payoffs `(p·A·q, p·B·q)`.
    pub fn expected(&self, p: &[f64], q: &[f64]) -> (f64, f64) {
        let mut u1 = 0.0;
        let mut u2 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let w = p[i] * q[j];
                u1 += w * self.a(i, j);
                u2 += w * self.b(i, j);
            }
        }
        (u1, u2)
    }

    /// Renders the text format; entries use the shortest round-trip decimal.
    pub fn to_text(&self, profile: Option<(&[f64], &[f64])>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let _ = writeln!(s, "{i} {j} {:?} {:?}", self.a(i, j), self.b(i, j));
            }
        }
        if let Some((p, q)) = profile {
            let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
            let _ = writeln!(s, "profile:");
            let _ = writeln!(s, "p {}", join(p));
            let _ = writeln!(s, "q {}", join(q));
        }
        s
    }

    pub fn parse(text: &str) -> Result<ParsedBimatrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| Error::syntax(1, "empty bimatrix file"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::syntax(hline, "header must be `m n`"))?;
        let &[rows, cols] = dims.as_slice() else {
            return Err(Error::syntax(hline, "header must be `m n`"));
        };
        if rows == 0 || cols == 0 {
            return Err(Error::syntax(hline, "dimensions must be positive"));
        }

        let mut a = vec![f64::NAN; rows * cols];
        let mut b = vec![f64::NAN; rows * cols];
        let mut seen = vec![false; rows * cols];
        let mut profile: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut last_line = hline;
        let mut in_profile = false;
        let (mut p, mut q) = (None, None);

        for (n, line) in lines {
            last_line = n;
            if line == "profile:" {
                in_profile = true;
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if in_profile {
                let vals: Vec<f64> = toks[1..]
                    .iter()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::syntax(n, "bad probability"))?;
                match (toks[0], vals.len()) {
                    ("p", k) if k == rows => p = Some(vals),
                    ("q", k) if k == cols => q = Some(vals),
                    ("p" | "q", k) => return Err(Error::syntax(n, format!("{} has {k} entries", toks[0]))),
                    (other, _) => return Err(Error::syntax(n, format!("unknown profile line `{other}`"))),
                }
                continue;
            }
            if toks.len() != 4 {
                return Err(Error::syntax(n, "cell line must be `i j u1 u2`"));
            }
            let i: usize = toks[0].parse().map_err(|_| Error::syntax(n, "bad row index"))?;
            let j: usize = toks[1].parse().map_err(|_| Error::syntax(n, "bad column index"))?;
            if i >= rows || j >= cols {
                return Err(Error::syntax(n, format!("cell ({i}, {j}) outside {rows}x{cols}")));
            }
            let u1: f64 = toks[2].parse().map_err(|_| Error::syntax(n, "bad payoff"))?;
            let u2: f64 = toks[3].parse().map_err(|_| Error::syntax(n, "bad payoff"))?;
            if !(u1.is_finite() && u2.is_finite() && u1 >= 0.0 && u2 >= 0.0) {
                return Err(Error::syntax(n, "payoffs must be finite and non-negative"));
            }
            let k = i * cols + j;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::syntax(n, format!("cell ({i}, {j}) given twice")));
            }
            a[k] = u1;
            b[k] = u2;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::syntax(last_line, format!("cell ({}, {}) missing", k / cols, k % cols)));
        }
        if in_profile {
            match (p, q) {
                (Some(p), Some(q)) => profile = Some((p, q)),
                _ => return Err(Error::syntax(last_line, "profile section needs `p` and `q` lines")),
            }
        }
        Ok(ParsedBimatrix { bimatrix: Bimatrix::new(rows, cols, a, b)?, profile })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_with_profile() {
        let m = Bimatrix::from_rows(&[vec![(2.0, 1.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 2.0)]]).unwrap();
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let q = [1.0 / 3.0, 2.0 / 3.0];
        let text = m.to_text(Some((&p, &q)));
        let parsed = Bimatrix::parse(&text).unwrap();
        assert_eq!(parsed.bimatrix, m);
        assert_eq!(parsed.profile, Some((p.to_vec(), q.to_vec())));
    }

    #[test]
    fn missing_cell_reported() {
        let err = Bimatrix::parse("2 1\n0 0 1 1\n").unwrap_err();
        assert!(err.to_string().contains("(1, 0) missing"), "{err}");
    }

    #[test]
    fn negative_payoff_is_line_anchored() {
        let err = Bimatrix::parse("# c\n1 1\n0 0 -1 1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }));
    }

    #[test]
    fn expected_payoff() {
        let m = Bimatrix::from_rows(&[vec![(2.0, 0.0), (0.0, 2.0)], vec![(0.0, 2.0), (2.0, 0.0)]]).unwrap();
        assert_eq!(m.expected(&[0.5, 0.5], &[0.5, 0.5]), (1.0, 1.0));
    }
}
