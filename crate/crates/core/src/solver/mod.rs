//! Truncated finite approximations of discounted games and their equilibria.

mod lemke_howson;
mod profile;
mod support;

pub use lemke_howson::{lemke_howson, lemke_howson_with_budget, rational, regret_exact, PIVOT_BUDGET};
pub use profile::{certify, exact_regret, regret, Certificate, MixedProfile, RegretReport, MASS_TOLERANCE};
pub use support::{support_enum, SUPPORT_ENUM_LIMIT};

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::discount::{evaluate_profile, EvalConfig};
use crate::error::{Error, Result};
use crate::game::{Action, Bimatrix, GameKind, GameSpec, Player};
use crate::numeric::ceil_snap;
use crate::par;
use crate::strategy::MeteredStrategy;
use crate::vm::{mix_seed, parse_program};

/// `ceil(K^2 / delta^2)`: beyond this many steps a bounded payoff is worth at
/// most `delta`.
pub fn truncation_cap(k: f64, delta: f64) -> Result<u64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("payoff bound must be at least 1, got {k}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("rate must lie in (0,1), got {delta}")));
    }
    let v = ceil_snap(k * k / (delta * delta));
    Ok(if v >= u64::MAX as f64 { u64::MAX } else { v as u64 })
}

/// Ordered, labelled strategies for one player.
#[derive(Debug, Clone)]
pub struct StrategyLibrary {
    entries: Vec<MeteredStrategy>,
    labels: Vec<String>,
}

impl StrategyLibrary {
    pub fn new(entries: Vec<(String, MeteredStrategy)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("strategy library is empty".into()));
        }
        let mut seen = HashSet::new();
        for (label, _) in &entries {
            if !seen.insert(label.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate strategy label {label}")));
            }
        }
        let (labels, entries) = entries.into_iter().unzip();
        Ok(StrategyLibrary { entries, labels })
    }

    /// Labels taken from the strategies' own names.
    pub fn from_strategies(entries: Vec<MeteredStrategy>) -> Result<Self> {
        Self::new(entries.into_iter().map(|s| (s.name(), s)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &MeteredStrategy {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[MeteredStrategy] {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size_bits(&self) -> Vec<u64> {
        self.entries.iter().map(MeteredStrategy::size_bits).collect()
    }
}

/// Payoff matrix of `lib1 x lib2` in the discounted game. Player 1 runs are
/// capped at `truncation_cap(K, eps)`, player 2 runs at
/// `truncation_cap(K, delta)`; cell `(i, j)` uses seed `mix_seed(seed, i, j)`.
pub fn build_bimatrix(
    game: &GameSpec,
    lib1: &StrategyLibrary,
    lib2: &StrategyLibrary,
    eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<Bimatrix> {
    let caps = truncation_caps(game, eps, delta)?;
    build_bimatrix_with_caps(game, lib1, lib2, eps, delta, samples, seed, caps)
}

/// Step caps `(truncation_cap(K, eps), truncation_cap(K, delta))` for a
/// bounded game.
pub fn truncation_caps(game: &GameSpec, eps: f64, delta: f64) -> Result<(u64, u64)> {
    let k = game.bound().ok_or_else(|| {
        Error::Unbounded(format!(
            "{} has no payoff bound; truncation needs one (the 2^i game shows equilibria can fail to exist without it)",
            game.name()
        ))
    })?;
    let k = k.max(1.0);
    Ok((truncation_cap(k, eps)?, truncation_cap(k, delta)?))
}

/// As [`build_bimatrix`] with explicit step caps and no bound requirement.
#[allow(clippy::too_many_arguments)]
pub fn build_bimatrix_with_caps(
    game: &GameSpec,
    lib1: &StrategyLibrary,
    lib2: &StrategyLibrary,
    eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
    caps: (u64, u64),
) -> Result<Bimatrix> {
    let (m, n) = (lib1.len(), lib2.len());
    let cells = par::map_indexed(m * n, |c| {
        let (i, j) = (c / n, c % n);
        let cfg = EvalConfig::new(eps, delta, samples, mix_seed(seed, i as u64, j as u64), caps);
        evaluate_profile(game, lib1.get(i), lib2.get(j), &cfg)
    });
    let mut a = Vec::with_capacity(m * n);
    let mut b = Vec::with_capacity(m * n);
    let mut prov = Vec::with_capacity(m * n);
    for cell in cells {
        let est = cell?;
        a.push(est.u1.mean);
        b.push(est.u2.mean);
        prov.push((est.u1, est.u2));
    }
    Ok(Bimatrix::new(m, n, a, b)?.with_provenance(prov))
}

/// Slowly shrinking surrogate rates: `1 / max(2, ceil(log2(1/x)))`.
pub fn miniaturize(eps: f64, delta: f64) -> Result<(f64, f64)> {
    let one = |x: f64| -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidArgument(format!("rate must lie in (0,1), got {x}")));
        }
        Ok(1.0 / ceil_snap((1.0 / x).log2()).max(2.0))
    };
    Ok((one(eps)?, one(delta)?))
}

/// Equilibrium of a library game together with its certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LibrarySolution {
    pub bimatrix: Bimatrix,
    pub profile: MixedProfile,
    pub certificate: Certificate,
    pub labels1: Vec<String>,
    pub labels2: Vec<String>,
}

/// Builds the library bimatrix, runs Lemke-Howson from label 0 and certifies
/// the result as an `(eps + delta)`-equilibrium of that bimatrix.
pub fn solve_library_game(
    game: &GameSpec,
    lib1: &StrategyLibrary,
    lib2: &StrategyLibrary,
    eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<LibrarySolution> {
    let bimatrix = build_bimatrix(game, lib1, lib2, eps, delta, samples, seed)?;
    let profile = lemke_howson(&bimatrix, 0)?;
    let certificate = certify(&bimatrix, &profile, eps + delta)?;
    Ok(LibrarySolution {
        bimatrix,
        profile,
        certificate,
        labels1: lib1.labels().to_vec(),
        labels2: lib2.labels().to_vec(),
    })
}

/// Precision of lifted mixing probabilities, in bits.
pub const LIFT_BITS: u32 = 32;

/// `round(c * 2^LIFT_BITS)`.
fn quantize(c: f64) -> u64 {
    (c.clamp(0.0, 1.0) * (1u64 << LIFT_BITS) as f64).round() as u64
}

/// Program playing `dist` as a chain of Bernoulli choices: action `s_k` with
/// probability `p_k / (p_k + ... )`, else move on. Each choice compares a
/// uniform `U` with the threshold bit by bit, drawing bits only until they
/// differ, so a choice costs two draws on average instead of `LIFT_BITS`.
fn lift_one(game: &GameSpec, player: Player, dist: &[f64]) -> Result<MeteredStrategy> {
    let mut encodings = Vec::with_capacity(dist.len());
    for i in 0..dist.len() {
        let bits = game
            .encode_action(player, &Action::Index(i))
            .ok_or_else(|| Error::InvalidArgument(format!("action {i} has no encoding")))?;
        encodings.push(bits);
    }
    let support: Vec<usize> = (0..dist.len()).filter(|&i| dist[i] > 0.0).collect();
    if support.is_empty() {
        return Err(Error::InvalidArgument("distribution has no mass".into()));
    }
    let mut src = String::new();
    let _ = writeln!(src, ".name lift_p{}", player.index());
    let mut rest: f64 = support.iter().map(|&i| dist[i]).sum();
    for (k, &i) in support[..support.len() - 1].iter().enumerate() {
        let t = quantize(dist[i] / rest);
        rest -= dist[i];
        let fail = format!("c{}", k + 1);
        let _ = writeln!(src, "c{k}:");
        if t >> LIFT_BITS == 1 {
            let _ = writeln!(src, "    jmp a{i}");
            continue;
        }
        if t != 0 {
            // U < t decided at the first differing bit; once t's remaining
            // bits are all zero, U >= t
            for b in (t.trailing_zeros()..LIFT_BITS).rev() {
                let _ = writeln!(src, "    rbit r0");
                if t >> b & 1 == 1 {
                    let _ = writeln!(src, "    jz r0, a{i}");
                } else {
                    let _ = writeln!(src, "    jnz r0, {fail}");
                }
            }
        }
        let _ = writeln!(src, "    jmp {fail}");
    }
    let _ = writeln!(src, "c{}:\n    jmp a{}", support.len() - 1, support[support.len() - 1]);
    for &i in &support {
        let _ = writeln!(src, "a{i}:");
        for b in encodings[i].as_slice() {
            let _ = writeln!(src, "    emitb {}", u8::from(*b));
        }
        let _ = writeln!(src, "    halt");
    }
    Ok(MeteredStrategy::program(parse_program(&src)?))
}

/// Strategies for the discounted game that ignore their input and play the
/// finite game's mixed profile.
pub fn lift_finite(game: &GameSpec, ne: &MixedProfile) -> Result<(MeteredStrategy, MeteredStrategy)> {
    let GameKind::Matrix(table) = game.kind() else {
        return Err(Error::InvalidArgument(format!("{} is not a finite game", game.name())));
    };
    if ne.p.len() != table.rows() || ne.q.len() != table.cols() {
        return Err(Error::InvalidArgument("profile does not match the game's dimensions".into()));
    }
    Ok((lift_one(game, Player::One, &ne.p)?, lift_one(game, Player::Two, &ne.q)?))
}
