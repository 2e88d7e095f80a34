//! Sweeps of vanishing discount rates: limit payoffs and empirical uniform /
//! strong-uniform equilibrium checks against declared deviation sets.
//!
//! A liminf over a continuum is replaced by the largest clipped deviation gain
//! over the last `window` grid points.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::discount::{evaluate_profile, DiscountFamily, EvalConfig, PayoffEstimate, ProfileEstimate};
use crate::error::{Error, Result};
use crate::game::{Bimatrix, GameSpec};
use crate::par;
use crate::solver::{
    build_bimatrix, build_bimatrix_with_caps, certify, lemke_howson, regret, truncation_caps, MixedProfile,
    StrategyLibrary,
};
use crate::strategy::MeteredStrategy;
use crate::vm::mix_seed;

/// How `delta` follows `eps` along a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaRule {
    /// One `delta` per grid point.
    Independent { deltas: Vec<f64> },
    /// `delta = eps^c`, `c >= 1`.
    Power { c: f64 },
    /// `delta = eps`.
    Linear,
}

pub const DEFAULT_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub eps_grid: Vec<f64>,
    pub delta_rule: DeltaRule,
    pub window: usize,
    pub family: DiscountFamily,
}

impl SweepSchedule {
    pub fn new(eps_grid: Vec<f64>, delta_rule: DeltaRule) -> Result<Self> {
        let window = DEFAULT_WINDOW.min(eps_grid.len()).max(1);
        Self::with_window(eps_grid, delta_rule, window)
    }

    pub fn with_window(eps_grid: Vec<f64>, delta_rule: DeltaRule, window: usize) -> Result<Self> {
        let s = SweepSchedule { eps_grid, delta_rule, window, family: DiscountFamily::Exponential };
        s.validate()?;
        Ok(s)
    }

    pub fn with_family(mut self, family: DiscountFamily) -> Self {
        self.family = family;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_grid.is_empty() {
            return Err(Error::InvalidArgument("eps grid is empty".into()));
        }
        for (i, &e) in self.eps_grid.iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidArgument(format!("eps grid entry {e} outside (0,1)")));
            }
            if i > 0 && e >= self.eps_grid[i - 1] {
                return Err(Error::InvalidArgument("eps grid must be strictly decreasing".into()));
            }
        }
        match &self.delta_rule {
            DeltaRule::Independent { deltas } => {
                if deltas.len() != self.eps_grid.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} deltas for {} grid points",
                        deltas.len(),
                        self.eps_grid.len()
                    )));
                }
                if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
                    return Err(Error::InvalidArgument(format!("delta {d} outside (0,1)")));
                }
            }
            DeltaRule::Power { c } => {
                if !(*c >= 1.0) || !c.is_finite() {
                    return Err(Error::InvalidArgument(format!("power rule exponent must be >= 1, got {c}")));
                }
            }
            DeltaRule::Linear => {}
        }
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must be positive".into()));
        }
        if self.window > self.eps_grid.len() {
            return Err(Error::InvalidArgument(format!(
                "window {} exceeds {} grid points",
                self.window,
                self.eps_grid.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.eps_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps_grid.is_empty()
    }

    pub fn delta_at(&self, i: usize) -> f64 {
        let e = self.eps_grid[i];
        match &self.delta_rule {
            DeltaRule::Independent { deltas } => deltas[i],
            DeltaRule::Power { c } => e.powf(*c),
            DeltaRule::Linear => e,
        }
    }

    /// `(eps, delta)` per grid point.
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|i| (self.eps_grid[i], self.delta_at(i))).collect()
    }
}

/// Acceptance threshold `base + stderr_mult * (largest relevant stderr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub base: f64,
    pub stderr_mult: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { base: 0.05, stderr_mult: 3.0 }
    }
}

impl Tolerance {
    pub fn new(base: f64) -> Self {
        Tolerance { base, ..Default::default() }
    }

    pub fn threshold(&self, max_stderr: f64) -> f64 {
        self.base + self.stderr_mult * max_stderr
    }
}

fn point_seed(seed: u64, k: usize) -> u64 {
    mix_seed(seed, k as u64, 0x5745_4550)
}

fn point_config(game: &GameSpec, schedule: &SweepSchedule, k: usize, samples: usize, seed: u64) -> Result<EvalConfig> {
    let (eps, delta) = (schedule.eps_grid[k], schedule.delta_at(k));
    let caps = truncation_caps(game, eps, delta)?;
    Ok(EvalConfig::new(eps, delta, samples, point_seed(seed, k), caps).with_family(schedule.family))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub eps: f64,
    pub delta: f64,
    pub u1: PayoffEstimate,
    pub u2: PayoffEstimate,
}

/// Payoff estimates along a sweep, ordered by decreasing `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffTrajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl PayoffTrajectory {
    fn from_estimates(schedule: &SweepSchedule, ests: &[ProfileEstimate]) -> Self {
        let points = schedule
            .points()
            .into_iter()
            .zip(ests)
            .map(|((eps, delta), e)| TrajectoryPoint { eps, delta, u1: e.u1, u2: e.u2 })
            .collect();
        PayoffTrajectory { points }
    }
}

/// Evaluates `(s1, s2)` at every grid point with truncation caps.
pub fn sweep_profile(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    schedule: &SweepSchedule,
    samples: usize,
    seed: u64,
) -> Result<PayoffTrajectory> {
    schedule.validate()?;
    let ests = par::map_indexed(schedule.len(), |k| {
        let cfg = point_config(game, schedule, k, samples, seed)?;
        evaluate_profile(game, s1, s2, &cfg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(PayoffTrajectory::from_estimates(schedule, &ests))
}

/// Direction of a sequence of values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    NonIncreasing,
    NonDecreasing,
    Mixed,
}

fn trend(values: &[f64]) -> Trend {
    let up = values.windows(2).any(|w| w[1] > w[0]);
    let down = values.windows(2).any(|w| w[1] < w[0]);
    match (up, down) {
        (false, false) => Trend::Constant,
        (false, true) => Trend::NonIncreasing,
        (true, false) => Trend::NonDecreasing,
        (true, true) => Trend::Mixed,
    }
}

/// Least-squares slope of `values` against `log10(1/eps)`.
fn slope(eps: &[f64], values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = eps.iter().map(|e| -e.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Mean of the trailing window plus trend diagnostics over the full sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPayoff {
    pub u1: f64,
    pub u2: f64,
    pub window: usize,
    /// Per decade of `1/eps`.
    pub slope1: f64,
    pub slope2: f64,
    pub trend1: Trend,
    pub trend2: Trend,
    /// Largest stderr among the window's points.
    pub max_stderr: f64,
}

impl LimitPayoff {
    pub fn within(&self, target: (f64, f64), tol: f64) -> bool {
        (self.u1 - target.0).abs() <= tol && (self.u2 - target.1).abs() <= tol
    }
}

pub fn limit_payoff(traj: &PayoffTrajectory, window: usize) -> Result<LimitPayoff> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let n = traj.points.len();
    if window > n {
        return Err(Error::InvalidArgument(format!("window {window} exceeds {n} points")));
    }
    let tail = &traj.points[n - window..];
    let w = window as f64;
    let eps: Vec<f64> = traj.points.iter().map(|p| p.eps).collect();
    let v1: Vec<f64> = traj.points.iter().map(|p| p.u1.mean).collect();
    let v2: Vec<f64> = traj.points.iter().map(|p| p.u2.mean).collect();
    Ok(LimitPayoff {
        u1: tail.iter().map(|p| p.u1.mean).sum::<f64>() / w,
        u2: tail.iter().map(|p| p.u2.mean).sum::<f64>() / w,
        window,
        slope1: slope(&eps, &v1),
        slope2: slope(&eps, &v2),
        trend1: trend(&v1),
        trend2: trend(&v2),
        max_stderr: tail.iter().map(|p| p.u1.stderr.max(p.u2.stderr)).fold(0.0, f64::max),
    })
}

/// Deviations that may depend on the rates.
pub trait DeviationFamily: Send + Sync {
    fn label(&self) -> String;
    fn build(&self, eps: f64, delta: f64) -> Result<MeteredStrategy>;
}

/// A fixed strategy viewed as a family.
pub struct ConstantFamily(pub MeteredStrategy);

impl DeviationFamily for ConstantFamily {
    fn label(&self) -> String {
        self.0.name()
    }

    fn build(&self, _eps: f64, _delta: f64) -> Result<MeteredStrategy> {
        Ok(self.0.clone())
    }
}

/// A family given by a closure.
pub struct FnFamily<F> {
    label: String,
    f: F,
}

impl<F> FnFamily<F>
where
    F: Fn(f64, f64) -> Result<MeteredStrategy> + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        FnFamily { label: label.into(), f }
    }
}

impl<F> DeviationFamily for FnFamily<F>
where
    F: Fn(f64, f64) -> Result<MeteredStrategy> + Send + Sync,
{
    fn label(&self) -> String {
        self.label.clone()
    }

    fn build(&self, eps: f64, delta: f64) -> Result<MeteredStrategy> {
        (self.f)(eps, delta)
    }
}

/// Largest admissible description size, `coeff * (1/eps)^exponent` bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBudget {
    pub coeff: f64,
    pub exponent: f64,
}

impl SizeBudget {
    pub fn bits(&self, eps: f64) -> f64 {
        self.coeff * (1.0 / eps).powf(self.exponent)
    }

    pub fn admits(&self, size_bits: u64, eps: f64) -> bool {
        size_bits as f64 <= self.bits(eps)
    }
}

/// One grid point of a deviation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictPoint {
    pub eps: f64,
    pub delta: f64,
    pub u1: PayoffEstimate,
    pub u2: PayoffEstimate,
    /// Best deviation payoff minus profile payoff; 0 when no deviation was
    /// admissible. May be negative.
    pub gain1: f64,
    pub gain2: f64,
    pub best_deviation_1: Option<String>,
    pub best_deviation_2: Option<String>,
    /// Deviations excluded by the size budget at this point.
    pub excluded: Vec<String>,
    /// Largest stderr among the profile and deviation estimates.
    pub max_stderr: f64,
    pub available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformVerdict {
    pub points: Vec<VerdictPoint>,
    pub deviations_1: Vec<String>,
    pub deviations_2: Vec<String>,
    pub window: usize,
    /// `max(gain, 0)` over both players and the trailing window.
    pub trailing_max: f64,
    pub tolerance: Tolerance,
    pub threshold: f64,
    pub passed: bool,
    pub size_budget: Option<SizeBudget>,
    pub warnings: Vec<String>,
}

impl UniformVerdict {
    /// The swept profile's payoffs as a trajectory (available points only).
    pub fn trajectory(&self) -> PayoffTrajectory {
        PayoffTrajectory {
            points: self
                .points
                .iter()
                .filter(|p| p.available)
                .map(|p| TrajectoryPoint { eps: p.eps, delta: p.delta, u1: p.u1, u2: p.u2 })
                .collect(),
        }
    }

    /// Re-judges the same measurements at another tolerance.
    pub fn rejudge(&self, tolerance: Tolerance) -> UniformVerdict {
        let mut v = self.clone();
        v.tolerance = tolerance;
        let (threshold, passed) = judge(&v.points, v.window, tolerance);
        v.threshold = threshold;
        v.passed = passed;
        v
    }
}

fn judge(points: &[VerdictPoint], window: usize, tol: Tolerance) -> (f64, bool) {
    let avail: Vec<&VerdictPoint> = points.iter().filter(|p| p.available).collect();
    if avail.is_empty() {
        return (tol.base, false);
    }
    let tail = &avail[avail.len().saturating_sub(window)..];
    let trailing = tail.iter().map(|p| p.gain1.max(p.gain2).max(0.0)).fold(0.0, f64::max);
    let threshold = tol.threshold(tail.iter().map(|p| p.max_stderr).fold(0.0, f64::max));
    (threshold, trailing <= threshold)
}

fn trailing_max(points: &[VerdictPoint], window: usize) -> f64 {
    let avail: Vec<&VerdictPoint> = points.iter().filter(|p| p.available).collect();
    avail[avail.len().saturating_sub(window)..].iter().map(|p| p.gain1.max(p.gain2).max(0.0)).fold(0.0, f64::max)
}

struct Deviation {
    label: String,
    strategy: MeteredStrategy,
}

/// Best deviation gain among `devs`, or `(0, None)` if there are none.
fn best_gain(
    devs: &[Deviation],
    eval: impl Fn(&MeteredStrategy) -> Result<(f64, f64)>,
    base: f64,
) -> Result<(f64, Option<String>, f64)> {
    let mut best: Option<(f64, String)> = None;
    let mut se = 0.0f64;
    for d in devs {
        let (u, s) = eval(&d.strategy)?;
        se = se.max(s);
        let g = u - base;
        if best.as_ref().is_none_or(|(bg, _)| g > *bg) {
            best = Some((g, d.label.clone()));
        }
    }
    Ok(match best {
        Some((g, l)) => (g, Some(l), se),
        None => (0.0, None, se),
    })
}

fn check_point(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    devs: (&[Deviation], &[Deviation]),
    cfg: &EvalConfig,
) -> Result<(ProfileEstimate, (f64, Option<String>), (f64, Option<String>), f64)> {
    let base = evaluate_profile(game, s1, s2, cfg)?;
    // common random numbers: deviations reuse the point's seed
    let (g1, l1, se1) = best_gain(
        devs.0,
        |d| evaluate_profile(game, d, s2, cfg).map(|e| (e.u1.mean, e.u1.stderr)),
        base.u1.mean,
    )?;
    let (g2, l2, se2) = best_gain(
        devs.1,
        |d| evaluate_profile(game, s1, d, cfg).map(|e| (e.u2.mean, e.u2.stderr)),
        base.u2.mean,
    )?;
    let se = base.max_stderr().max(se1).max(se2);
    Ok((base, (g1, l1), (g2, l2), se))
}

#[allow(clippy::too_many_arguments)]
fn deviation_check(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    fam1: &[&dyn DeviationFamily],
    fam2: &[&dyn DeviationFamily],
    schedule: &SweepSchedule,
    samples: usize,
    seed: u64,
    tol: Tolerance,
    budget: Option<SizeBudget>,
) -> Result<UniformVerdict> {
    schedule.validate()?;
    let results = par::map_indexed(schedule.len(), |k| -> Result<std::result::Result<VerdictPoint, String>> {
        let cfg = point_config(game, schedule, k, samples, seed)?;
        let (eps, delta) = (cfg.eps, cfg.delta);
        let mut excluded = Vec::new();
        let mut build = |fams: &[&dyn DeviationFamily]| -> std::result::Result<Vec<Deviation>, String> {
            let mut out = Vec::new();
            for f in fams {
                let s = f
                    .build(eps, delta)
                    .map_err(|e| format!("{} unavailable at eps={eps}: {e}", f.label()))?;
                if let Some(b) = budget {
                    if !b.admits(s.size_bits(), eps) {
                        excluded.push(f.label());
                        continue;
                    }
                }
                out.push(Deviation { label: f.label(), strategy: s });
            }
            Ok(out)
        };
        let d1 = match build(fam1) {
            Ok(d) => d,
            Err(w) => return Ok(Err(w)),
        };
        let d2 = match build(fam2) {
            Ok(d) => d,
            Err(w) => return Ok(Err(w)),
        };
        let (base, (g1, l1), (g2, l2), se) = check_point(game, s1, s2, (&d1, &d2), &cfg)?;
        Ok(Ok(VerdictPoint {
            eps,
            delta,
            u1: base.u1,
            u2: base.u2,
            gain1: g1,
            gain2: g2,
            best_deviation_1: l1,
            best_deviation_2: l2,
            excluded,
            max_stderr: se,
            available: true,
        }))
    });
    let mut points = Vec::with_capacity(schedule.len());
    let mut warnings = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r? {
            Ok(p) => points.push(p),
            Err(w) => {
                warnings.push(w);
                points.push(VerdictPoint {
                    eps: schedule.eps_grid[k],
                    delta: schedule.delta_at(k),
                    u1: PayoffEstimate::exact(f64::NAN),
                    u2: PayoffEstimate::exact(f64::NAN),
                    gain1: 0.0,
                    gain2: 0.0,
                    best_deviation_1: None,
                    best_deviation_2: None,
                    excluded: vec![],
                    max_stderr: 0.0,
                    available: false,
                });
            }
        }
    }
    if points.iter().all(|p| !p.available) {
        warnings.push("no grid point available; verdict fails".into());
    }
    let (threshold, passed) = judge(&points, schedule.window, tol);
    let trailing = if points.iter().any(|p| p.available) { trailing_max(&points, schedule.window) } else { 0.0 };
    Ok(UniformVerdict {
        deviations_1: fam1.iter().map(|f| f.label()).collect(),
        deviations_2: fam2.iter().map(|f| f.label()).collect(),
        window: schedule.window,
        trailing_max: trailing,
        tolerance: tol,
        threshold,
        passed,
        size_budget: budget,
        warnings,
        points,
    })
}

/// Uniform check against fixed deviation strategies.
#[allow(clippy::too_many_arguments)]
pub fn uniform_regret(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    dev1: &[MeteredStrategy],
    dev2: &[MeteredStrategy],
    schedule: &SweepSchedule,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<UniformVerdict> {
    let f1: Vec<ConstantFamily> = dev1.iter().cloned().map(ConstantFamily).collect();
    let f2: Vec<ConstantFamily> = dev2.iter().cloned().map(ConstantFamily).collect();
    let r1: Vec<&dyn DeviationFamily> = f1.iter().map(|f| f as &dyn DeviationFamily).collect();
    let r2: Vec<&dyn DeviationFamily> = f2.iter().map(|f| f as &dyn DeviationFamily).collect();
    deviation_check(game, s1, s2, &r1, &r2, schedule, samples, seed, tol, None)
}

/// Strong-uniform check: deviations are rebuilt at every grid point and may
/// be restricted to a description-size budget.
#[allow(clippy::too_many_arguments)]
pub fn strong_uniform_regret(
    game: &GameSpec,
    s1: &MeteredStrategy,
    s2: &MeteredStrategy,
    fam1: &[&dyn DeviationFamily],
    fam2: &[&dyn DeviationFamily],
    schedule: &SweepSchedule,
    samples: usize,
    seed: u64,
    tol: Tolerance,
    budget: Option<SizeBudget>,
) -> Result<UniformVerdict> {
    deviation_check(game, s1, s2, fam1, fam2, schedule, samples, seed, tol, budget)
}

/// Library equilibrium at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    #[serde(skip)]
    pub bimatrix: Bimatrix,
    pub eps: f64,
    pub delta: f64,
    pub profile: MixedProfile,
    pub payoff1: f64,
    pub payoff2: f64,
    pub regret: f64,
    /// `eps + delta + 3 * max cell stderr`.
    pub tolerance: f64,
    pub certified: bool,
    pub max_stderr: f64,
    pub samples: usize,
}

/// Solves the library game at every grid point.
pub fn sweep_equilibrium(
    game: &GameSpec,
    lib1: &StrategyLibrary,
    lib2: &StrategyLibrary,
    schedule: &SweepSchedule,
    samples: usize,
    seed: u64,
) -> Result<Vec<EquilibriumPoint>> {
    schedule.validate()?;
    let mut out = Vec::with_capacity(schedule.len());
    for (k, (eps, delta)) in schedule.points().into_iter().enumerate() {
        let bm = build_bimatrix(game, lib1, lib2, eps, delta, samples, point_seed(seed, k))?;
        let profile = lemke_howson(&bm, 0)?;
        let cert = certify(&bm, &profile, eps + delta)?;
        out.push(EquilibriumPoint {
            eps,
            delta,
            payoff1: cert.regret.payoff1,
            payoff2: cert.regret.payoff2,
            regret: cert.regret.max(),
            tolerance: cert.tolerance,
            certified: cert.certified,
            max_stderr: bm.max_stderr(),
            samples,
            profile,
            bimatrix: bm,
        });
    }
    Ok(out)
}

/// Equilibrium payoffs as a trajectory; each value carries the largest cell
/// stderr of its bimatrix.
pub fn equilibrium_trajectory(points: &[EquilibriumPoint]) -> PayoffTrajectory {
    let est = |v: f64, p: &EquilibriumPoint| PayoffEstimate { mean: v, stderr: p.max_stderr, samples: p.samples as u64 };
    PayoffTrajectory {
        points: points
            .iter()
            .map(|p| TrajectoryPoint { eps: p.eps, delta: p.delta, u1: est(p.payoff1, p), u2: est(p.payoff2, p) })
            .collect(),
    }
}

/// One extension step of the unbounded-game escalation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationStep {
    pub library: Vec<String>,
    pub payoff1: f64,
    pub payoff2: f64,
    /// Strategy appended next.
    pub deviation: String,
    /// Best gain of the appended strategy against the current equilibrium.
    pub gain: f64,
    /// Whether the current equilibrium is an `(eps + delta)`-equilibrium of
    /// the extended library game.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationReport {
    /// Error returned by `build_bimatrix` on the unbounded game.
    pub rejection: String,
    pub eps: f64,
    pub delta: f64,
    pub cap: u64,
    pub steps: Vec<EscalationStep>,
}

/// For each prefix `L_k` of `ladder` (k >= 1), solves the symmetric library
/// game under the fixed step cap and measures what appending the next rung
/// gains against that equilibrium.
pub fn escalation_demo(
    game: &GameSpec,
    ladder: &[MeteredStrategy],
    eps: f64,
    delta: f64,
    cap: u64,
    samples: usize,
    seed: u64,
) -> Result<EscalationReport> {
    if ladder.len() < 2 {
        return Err(Error::InvalidArgument("escalation needs at least two strategies".into()));
    }
    let full = StrategyLibrary::from_strategies(ladder.to_vec())?;
    let rejection = match build_bimatrix(game, &full, &full, eps, delta, samples, seed) {
        Ok(_) => return Err(Error::InvalidArgument(format!("{} is bounded; nothing to demonstrate", game.name()))),
        Err(e) => e.to_string(),
    };
    let big = build_bimatrix_with_caps(game, &full, &full, eps, delta, samples, seed, (cap, cap))?;
    let mut steps = Vec::new();
    for k in 1..ladder.len() {
        // equilibrium of the k-strategy sub-library
        let sub = Bimatrix::from_fn(k, k, |i, j| (big.a(i, j), big.b(i, j)))?;
        let ne = lemke_howson(&sub, 0)?;
        let mut p = ne.p.clone();
        let mut q = ne.q.clone();
        p.resize(k + 1, 0.0);
        q.resize(k + 1, 0.0);
        let ext = Bimatrix::from_fn(k + 1, k + 1, |i, j| (big.a(i, j), big.b(i, j)))?;
        let padded = MixedProfile::new(p, q)?;
        let r = regret(&ext, &padded)?;
        let row_dev: f64 = (0..=k).map(|j| ext.a(k, j) * padded.q[j]).sum::<f64>() - r.payoff1;
        let col_dev: f64 = (0..=k).map(|i| ext.b(i, k) * padded.p[i]).sum::<f64>() - r.payoff2;
        let sub_reg = regret(&sub, &ne)?;
        steps.push(EscalationStep {
            library: full.labels()[..k].to_vec(),
            payoff1: sub_reg.payoff1,
            payoff2: sub_reg.payoff2,
            deviation: full.labels()[k].clone(),
            gain: row_dev.max(col_dev),
            certified: r.max() <= eps + delta,
        });
    }
    Ok(EscalationReport { rejection, eps, delta, cap, steps })
}

/// Column names of the trajectory CSV, with descriptions.
pub const CSV_COLUMNS: [(&str, &str); 8] = [
    ("eps", "player 1 discount rate"),
    ("delta", "player 2 discount rate"),
    ("u1", "player 1 mean discounted payoff"),
    ("u1_stderr", "standard error of u1"),
    ("u2", "player 2 mean discounted payoff"),
    ("u2_stderr", "standard error of u2"),
    ("gain1", "best player 1 deviation payoff minus u1; blank when no deviation check ran"),
    ("gain2", "best player 2 deviation payoff minus u2; blank when no deviation check ran"),
];

fn csv_header() -> String {
    CSV_COLUMNS.iter().map(|c| c.0).collect::<Vec<_>>().join(",")
}

/// Trajectory CSV with blank gain columns.
pub fn trajectory_csv(traj: &PayoffTrajectory) -> String {
    let mut s = csv_header();
    s.push('\n');
    for p in &traj.points {
        let _ = writeln!(s, "{},{},{},{},{},{},,", p.eps, p.delta, p.u1.mean, p.u1.stderr, p.u2.mean, p.u2.stderr);
    }
    s
}

/// Verdict CSV; unavailable points are written with blank payoff fields.
pub fn verdict_csv(v: &UniformVerdict) -> String {
    let mut s = csv_header();
    s.push('\n');
    for p in &v.points {
        if p.available {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                p.eps, p.delta, p.u1.mean, p.u1.stderr, p.u2.mean, p.u2.stderr, p.gain1, p.gain2
            );
        } else {
            let _ = writeln!(s, "{},{},,,,,,", p.eps, p.delta);
        }
    }
    s
}
