//! Discount factors, the non-halting payoff convention and Monte Carlo
//! estimation of a profile's expected discounted payoffs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, GameSpec, Player};
use crate::par;
use crate::strategy::MeteredStrategy;
use crate::vm::{mix_seed, Bits, ExecutionInput, ExecutionOutcome};

/// Largest `t` accepted by [`discount_factor_exact`].
pub const EXACT_T_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscountFamily {
    /// `(1 - rate)^t`
    Exponential,
    /// `1 / (1 + rate * t)`
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    pub family: DiscountFamily,
    pub rate: f64,
}

impl DiscountSpec {
    pub fn new(family: DiscountFamily, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::InvalidArgument(format!("discount rate {rate} outside (0, 1)")));
        }
        Ok(DiscountSpec { family, rate })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        DiscountSpec::new(DiscountFamily::Exponential, rate)
    }

    pub fn factor(&self, t: u64) -> f64 {
        discount_factor(self, t)
    }
}

/// Discount after `t` cost units. Exponential uses `exp(t * ln(1 - rate))`.
pub fn discount_factor(spec: &DiscountSpec, t: u64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    match spec.family {
        DiscountFamily::Exponential => (t as f64 * (-spec.rate).ln_1p()).exp(),
        DiscountFamily::Hyperbolic => 1.0 / (1.0 + spec.rate * t as f64),
    }
}

/// Exact rational discount, with the rate taken as the exact value of its
/// `f64`. Only for `t <= 10^4`.
pub fn discount_factor_exact(spec: &DiscountSpec, t: u64) -> Result<BigRational> {
    if t > EXACT_T_LIMIT {
        return Err(Error::InvalidArgument(format!("exact discount limited to t <= {EXACT_T_LIMIT}")));
    }
    let rate = BigRational::from_float(spec.rate).expect("finite rate");
    let one = BigRational::one();
    Ok(match spec.family {
        DiscountFamily::Exponential => Pow::pow(one - rate, t),
        DiscountFamily::Hyperbolic => one.clone() / (one + rate * BigRational::from_integer(BigInt::from(t))),
    })
}

/// Mean, standard error and sample count of a discounted payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl PayoffEstimate {
    /// Two-pass estimate in slice order. `stderr` uses the `n - 1` sample
    /// deviation and is zero for a single sample.
    pub fn from_samples(xs: &[f64]) -> Self {
        assert!(!xs.is_empty(), "estimate needs at least one sample");
        let n = xs.len() as f64;
        if xs.iter().all(|x| *x == xs[0]) {
            return PayoffEstimate { mean: xs[0], stderr: 0.0, samples: xs.len() as u64 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() < 2 {
            0.0
        } else {
            let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        };
        PayoffEstimate { mean, stderr, samples: xs.len() as u64 }
    }

    pub fn exact(value: f64) -> Self {
        PayoffEstimate { mean: value, stderr: 0.0, samples: 1 }
    }
}

/// One joint computation path.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSample {
    pub outcome1: ExecutionOutcome,
    pub outcome2: ExecutionOutcome,
    /// `None` when the machine did not halt.
    pub action1: Option<Action>,
    pub action2: Option<Action>,
    pub payoff1: f64,
    pub payoff2: f64,
}

impl ProfileSample {
    /// Halted but produced output that encodes no action.
    pub fn decode_failure(&self, player: Player) -> bool {
        let a = match player {
            Player::One => &self.action1,
            Player::Two => &self.action2,
        };
        matches!(a, Some(Action::NoAction))
    }
}

/// Payoff to a halting `player` whose opponent did not halt.
pub fn nonhalt_opponent_payoff(
    game: &GameSpec,
    player: Player,
    played: &Action,
    own_steps: u64,
    spec: &DiscountSpec,
) -> Result<f64> {
    Ok(discount_factor(spec, own_steps) * game.sup_payoff(player, played)?)
}

/// Decodes two outcomes and applies payoffs, discounting and the non-halting
/// convention. Undecodable output counts as not halting.
pub fn score_outcomes(
    game: &GameSpec,
    outcome1: ExecutionOutcome,
    outcome2: ExecutionOutcome,
    d1: &DiscountSpec,
    d2: &DiscountSpec,
) -> Result<ProfileSample> {
    let action1 = outcome1.halted.then(|| game.decode_action(Player::One, &outcome1.output));
    let action2 = outcome2.halted.then(|| game.decode_action(Player::Two, &outcome2.output));
    let live1 = action1.as_ref().filter(|a| a.is_valid());
    let live2 = action2.as_ref().filter(|a| a.is_valid());
    let (payoff1, payoff2) = match (live1, live2) {
        (Some(a1), Some(a2)) => {
            let (u1, u2) = game.payoff(a1, a2).ok_or_else(|| {
                Error::InvalidArgument(format!("actions {a1} / {a2} not playable in {}", game.name()))
            })?;
            (u1 * d1.factor(outcome1.steps), u2 * d2.factor(outcome2.steps))
        }
        (Some(a1), None) => (nonhalt_opponent_payoff(game, Player::One, a1, outcome1.steps, d1)?, 0.0),
        (None, Some(a2)) => (0.0, nonhalt_opponent_payoff(game, Player::Two, a2, outcome2.steps, d2)?),
        (None, None) => (0.0, 0.0),
    };
    Ok(ProfileSample { outcome1, outcome2, action1, action2, payoff1, payoff2 })
}

/// Parameters of a Monte Carlo profile evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub eps: f64,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    pub caps: (u64, u64),
    pub family: DiscountFamily,
}

impl EvalConfig {
    pub fn new(eps: f64, delta: f64, samples: usize, seed: u64, caps: (u64, u64)) -> Self {
        EvalConfig { eps, delta, samples, seed, caps, family: DiscountFamily::Exponential }
    }

    pub fn with_family(mut self, family: DiscountFamily) -> Self {
        self.family = family;
        self
    }

    fn validate(&self) -> Result<(DiscountSpec, DiscountSpec)> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if self.caps.0 == 0 || self.caps.1 == 0 {
            return Err(Error::InvalidArgument("step caps must be positive".into()));
        }
        Ok((DiscountSpec::new(self.family, self.eps)?, DiscountSpec::new(self.family, self.delta)?))
    }
}

/// Estimates of both players' expected discounted payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEstimate {
    pub u1: PayoffEstimate,
    pub u2: PayoffEstimate,
    pub non_halting: [u64; 2],
    pub decode_failures: [u64; 2],
    pub mean_steps: [f64; 2],
}

impl ProfileEstimate {
    pub fn means(&self) -> (f64, f64) {
        (self.u1.mean, self.u2.mean)
    }

    pub fn max_stderr(&self) -> f64 {
        self.u1.stderr.max(self.u2.stderr)
    }
}

/// Sample `index` of a profile evaluation. Player seeds are
/// `mix_seed(seed, index, player)`; in sequential games player 2 sees player
/// 1's output (empty if player 1 did not halt).
pub fn sample_profile(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    cfg: &EvalConfig,
    index: u64,
) -> Result<ProfileSample> {
    let (d1, d2) = cfg.validate()?;
    sample_with(game, s1, s2, cfg, &d1, &d2, index)
}

fn sample_with(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    cfg: &EvalConfig,
    d1: &DiscountSpec,
    d2: &DiscountSpec,
    index: u64,
) -> Result<ProfileSample> {
    let input = ExecutionInput::new(cfg.eps, cfg.delta);
    let out1 = s1.execute(&input, mix_seed(cfg.seed, index, 1), cfg.caps.0);
    let input2 = if game.is_sequential() {
        let seen = if out1.halted { out1.output.clone() } else { Bits::new() };
        input.with_opponent(seen)
    } else {
        input
    };
    let out2 = s2.execute(&input2, mix_seed(cfg.seed, index, 2), cfg.caps.1);
    score_outcomes(game, out1, out2, d1, d2)
}

/// Runs `cfg.samples` independent joint paths (in parallel when enabled) and
/// accumulates in sample order.
pub fn evaluate_profile(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    cfg: &EvalConfig,
) -> Result<ProfileEstimate> {
    let (d1, d2) = cfg.validate()?;
    let results = par::map_indexed(cfg.samples, |i| {
        sample_with(game, s1, s2, cfg, &d1, &d2, i as u64).map(|s| {
            (
                s.payoff1,
                s.payoff2,
                [s.action1.is_none(), s.action2.is_none()],
                [s.decode_failure(Player::One), s.decode_failure(Player::Two)],
                [s.outcome1.steps, s.outcome2.steps],
            )
        })
    });
    let mut p1 = Vec::with_capacity(cfg.samples);
    let mut p2 = Vec::with_capacity(cfg.samples);
    let mut non_halting = [0u64; 2];
    let mut decode_failures = [0u64; 2];
    let mut steps = [0f64; 2];
    for r in results {
        let (a, b, nh, df, st) = r?;
        p1.push(a);
        p2.push(b);
        for k in 0..2 {
            non_halting[k] += u64::from(nh[k]);
            decode_failures[k] += u64::from(df[k]);
            steps[k] += st[k] as f64;
        }
    }
    let n = cfg.samples as f64;
    Ok(ProfileEstimate {
        u1: PayoffEstimate::from_samples(&p1),
        u2: PayoffEstimate::from_samples(&p2),
        non_halting,
        decode_failures,
        mean_steps: [steps[0] / n, steps[1] / n],
    })
}
