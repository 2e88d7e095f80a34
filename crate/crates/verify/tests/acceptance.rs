//! Acceptance criteria, one line of output each.
//!
//! Every criterion runs at its stated tolerance. The process exits nonzero if
//! any criterion fails; the failing lines say which measurement missed.

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use dtg_core::discount::{discount_factor, evaluate_profile, DiscountSpec, EvalConfig};
use dtg_core::experiment::{self, lookup_family, LoadedConfig, Overrides};
use dtg_core::factoring::{
    alice_const2, alice_random, bob_halt, bob_lookup, bob_pollard_rho, bob_trial_division, build_lookup_table,
    n_of_epsilon, odd_numbers_with_bits, NRule, StepBudget, TABLE_MAX_DIVISOR,
};
use dtg_core::game::{Bimatrix, GameSpec};
use dtg_core::limit::{
    escalation_demo, limit_payoff, strong_uniform_regret, sweep_equilibrium, sweep_profile, uniform_regret,
    DeltaRule, DeviationFamily, SweepSchedule, Tolerance, DEFAULT_WINDOW,
};
use dtg_core::numeric::ceil_recip;
use dtg_core::solver::{
    exact_regret, lemke_howson, lift_finite, regret, support_enum, truncation_cap, truncation_caps, MixedProfile,
    StrategyLibrary,
};
use dtg_core::strategy::MeteredStrategy;
use dtg_core::vm::parse_program;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

const SAMPLES: usize = 200;
const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn mark(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISS"
    }
}

fn power_schedule(eps: &[f64], window: usize) -> SweepSchedule {
    SweepSchedule::with_window(eps.to_vec(), DeltaRule::Power { c: 2.0 }, window).unwrap()
}

fn program(name: &str, body: &str) -> MeteredStrategy {
    MeteredStrategy::program(parse_program(&format!(".name {name}\n{body}\n    halt\n")).unwrap())
}

fn ones(k: u64) -> MeteredStrategy {
    program(&format!("ones{k}"), &format!("    set r0, {k}\n    emitones r0"))
}

fn int(k: u64) -> MeteredStrategy {
    program(&format!("int{k}"), &format!("    set r0, {k}\n    emitint r0"))
}

fn c1_discount_constants() -> Outcome {
    // oracle: exp(t · ln(1 - rate)) straight from libm
    let oracle = |rate: f64, t: f64| (t * (-rate).ln_1p()).exp();
    let eps = 1e-4;
    let t = ceil_recip(eps);
    let got = 2.0 * discount_factor(&DiscountSpec::exponential(eps).unwrap(), t);
    let want = 2.0 * oracle(eps, t as f64);
    let a = (got - 2.0 / std::f64::consts::E).abs();
    let eps2: f64 = 1e-3;
    let t2 = (10.0 / eps2).round() as u64;
    let b = discount_factor(&DiscountSpec::exponential(eps2 * eps2).unwrap(), t2);
    let agree = (got - want).abs() < 1e-12 && (b - oracle(eps2 * eps2, t2 as f64)).abs() < 1e-12;
    outcome(
        a <= 0.01 && b >= 0.99 && agree,
        format!("|2(1-e)^ceil(1/e) - 2/e| = {a:.2e} (<= 0.01 {}); (1-e^2)^(10/e) = {b:.6} (>= 0.99 {})", mark(a <= 0.01), mark(b >= 0.99)),
    )
}

fn c2_hard_case() -> Outcome {
    let g = GameSpec::factoring();
    let grid = [0.1, 0.01, 0.001];
    let alice = alice_random(NRule::OfEpsilon);
    let devs = [bob_trial_division(StepBudget::DeltaScaled), bob_pollard_rho(StepBudget::DeltaScaled)];
    // the verdict is taken at the last point only; the limit uses the default window
    let sched = power_schedule(&grid, 1);
    let v = uniform_regret(&g, &alice, &bob_halt(), &[], &devs, &sched, SAMPLES, SEED, Tolerance::new(0.1)).unwrap();
    let traj = v.trajectory();
    let lp = limit_payoff(&traj, DEFAULT_WINDOW).unwrap();
    let limit_ok = lp.within((2.0, 1.0), 0.05);
    let last = v.points.last().unwrap();
    let gain_ok = last.gain2 <= 0.1 + 3.0 * last.max_stderr;
    let n = n_of_epsilon(1e-3).unwrap();
    let us: Vec<String> = traj.points.iter().map(|p| format!("({:.3},{:.4})", p.u1.mean, p.u2.mean)).collect();
    outcome(
        limit_ok && v.passed && gain_ok,
        format!(
            "trajectory {}; limit (window {}) = ({:.3},{:.4}) vs (2,1) +-0.05 {}; n(1e-3) = {n}; Bob gain at 1e-3 = {:.3} (<= 0.1 {})",
            us.join(" "),
            lp.window,
            lp.u1,
            lp.u2,
            mark(limit_ok),
            last.gain2,
            mark(v.passed && gain_ok),
        ),
    )
}

fn c3_easy_case() -> Outcome {
    let g = GameSpec::factoring();
    let sched = power_schedule(&[0.1, 0.01, 0.001], 1);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, alice) in [("const2", alice_const2()), ("alice_random:24", alice_random(NRule::Fixed(24)))] {
        let traj = sweep_profile(&g, &alice, &bob_pollard_rho(StepBudget::Unlimited), &sched, SAMPLES, SEED).unwrap();
        let lp = limit_payoff(&traj, 1).unwrap();
        let hit = lp.within((1.0, 2.0), 0.05);
        ok &= hit;
        parts.push(format!("{name}: ({:.4},{:.4}) {}", lp.u1, lp.u2, mark(hit)));
    }
    outcome(ok, format!("limit at 1e-3 vs (1,2) +-0.05: {}", parts.join("; ")))
}

fn c4_strong_uniform() -> Outcome {
    let g = GameSpec::factoring();
    let grid = [0.2, 0.1, 0.05];
    let sched = power_schedule(&grid, 1);
    let alice = alice_random(NRule::OfEpsilon);
    let fam = lookup_family();

    // payoffs of the profile (alice_random, table Bob) at each rate
    let mut payoff_ok = true;
    let mut pts = Vec::new();
    for (k, (eps, delta)) in sched.points().into_iter().enumerate() {
        let bits = n_of_epsilon(eps).unwrap();
        let support: Vec<_> = odd_numbers_with_bits(bits).collect();
        let table = build_lookup_table(&support, TABLE_MAX_DIVISOR).unwrap();
        let covers = table.covers_odd_of_length(bits);
        let bob = bob_lookup(Arc::new(table));
        let single = SweepSchedule::with_window(vec![eps], DeltaRule::Independent { deltas: vec![delta] }, 1).unwrap();
        let t = sweep_profile(&g, &alice, &bob, &single, SAMPLES, SEED + k as u64).unwrap();
        let (u1, u2) = (t.points[0].u1.mean, t.points[0].u2.mean);
        if covers {
            payoff_ok &= u2 >= 1.9 && u1 <= 1.1;
        }
        pts.push(format!("eps={eps} n={bits} covers={covers} ({u1:.3},{u2:.3})"));
    }

    let fams: [&dyn DeviationFamily; 1] = [&fam];
    let strong = strong_uniform_regret(&g, &alice, &bob_halt(), &[], &fams, &sched, SAMPLES, SEED, Tolerance::new(0.1), None).unwrap();
    // fixed deviation: the table sized for the coarsest rate
    let fixed = fam.build(grid[0], grid[0] * grid[0]).unwrap();
    let weak = uniform_regret(&g, &alice, &bob_halt(), &[], &[fixed], &sched, SAMPLES, SEED, Tolerance::new(0.1)).unwrap();
    let gains = |v: &dtg_core::limit::UniformVerdict| v.points.iter().map(|p| format!("{:.3}", p.gain2)).collect::<Vec<_>>().join(",");
    outcome(
        payoff_ok && !strong.passed && weak.passed,
        format!(
            "table-Bob payoffs {} (Bob >= 1.9, Alice <= 1.1 {}); strong gains [{}] fails {}; fixed-table gains [{}] passes {}",
            pts.join(" "),
            mark(payoff_ok),
            gains(&strong),
            mark(!strong.passed),
            gains(&weak),
            mark(weak.passed),
        ),
    )
}

fn c5_largest_integer() -> Outcome {
    let g = GameSpec::largest_integer();
    let lib = StrategyLibrary::from_strategies((0..=10).map(|k| ones(4 * k)).collect()).unwrap();
    let grid = vec![0.3, 0.1, 0.03, 0.01];
    let lin = SweepSchedule::with_window(grid.clone(), DeltaRule::Linear, 1).unwrap();
    let eq = sweep_equilibrium(&g, &lib, &lib, &lin, 50, SEED).unwrap();
    let regret_ok = eq.iter().all(|p| p.regret <= p.eps + p.delta);
    let pay: Vec<f64> = eq.iter().map(|p| p.payoff1.max(p.payoff2)).collect();
    let monotone = pay.windows(2).all(|w| w[1] <= w[0]);
    let final_ok = *pay.last().unwrap() <= 15.0;

    let pow = SweepSchedule::with_window(grid, DeltaRule::Power { c: 2.0 }, 1).unwrap();
    let eq2 = sweep_equilibrium(&g, &lib, &lib, &pow, 50, SEED).unwrap();
    let order_ok = eq2.iter().all(|p| p.payoff2 >= p.payoff1);
    let fmt = |v: &[dtg_core::limit::EquilibriumPoint]| {
        v.iter().map(|p| format!("({:.2},{:.2})", p.payoff1, p.payoff2)).collect::<Vec<_>>().join(" ")
    };
    outcome(
        regret_ok && monotone && final_ok && order_ok,
        format!(
            "eps=delta payoffs {} regret <= eps+delta {}, non-increasing {}, final <= 15 {}; delta=eps^2 payoffs {} P2 >= P1 {}",
            fmt(&eq),
            mark(regret_ok),
            mark(monotone),
            mark(final_ok),
            fmt(&eq2),
            mark(order_ok),
        ),
    )
}

fn random_game(rng: &mut StdRng, m: usize, n: usize, hi: f64) -> Bimatrix {
    Bimatrix::from_fn(m, n, |_, _| (rng.random_range(0.0..hi), rng.random_range(0.0..hi))).unwrap()
}

fn c6_finite_lift() -> Outcome {
    let (eps, delta) = (1e-4, 1e-4);
    let mut rng = StdRng::seed_from_u64(SEED);
    let (mut worst_pay, mut worst_gain, mut mixed) = (0.0f64, f64::NEG_INFINITY, 0);
    for g in 0..20u64 {
        let table = random_game(&mut rng, 3, 3, 2.0);
        // prefer the equilibrium with the widest support
        let ne = support_enum(&table)
            .unwrap()
            .into_iter()
            .max_by_key(|e| {
                let (a, b) = e.support(0.0);
                a.len() + b.len()
            })
            .unwrap();
        if ne.support(0.0).0.len() > 1 || ne.support(0.0).1.len() > 1 {
            mixed += 1;
        }
        let r = regret(&table, &ne).unwrap();
        let spec = GameSpec::matrix(table);
        let (l1, l2) = lift_finite(&spec, &ne).unwrap();
        let caps = truncation_caps(&spec, eps, delta).unwrap();
        let est = evaluate_profile(&spec, &l1, &l2, &EvalConfig::new(eps, delta, 40_000, SEED + g, caps)).unwrap();
        worst_pay = worst_pay.max((est.u1.mean - r.payoff1).abs()).max((est.u2.mean - r.payoff2).abs());
        let dev1: Vec<_> = (0..3).map(|i| lift_finite(&spec, &MixedProfile::pure(3, 3, i, 0)).unwrap().0).collect();
        let dev2: Vec<_> = (0..3).map(|j| lift_finite(&spec, &MixedProfile::pure(3, 3, 0, j)).unwrap().1).collect();
        let sched = SweepSchedule::with_window(vec![eps], DeltaRule::Linear, 1).unwrap();
        let v = uniform_regret(&spec, &l1, &l2, &dev1, &dev2, &sched, 40_000, SEED + g, Tolerance::new(0.02)).unwrap();
        worst_gain = worst_gain.max(v.points[0].gain1).max(v.points[0].gain2);
    }
    outcome(
        worst_pay <= 0.02 && worst_gain <= 0.02,
        format!("20 games ({mixed} mixed): worst payoff gap {worst_pay:.4} (<= 0.02), worst deviation gain {worst_gain:.4} (<= 0.02)"),
    )
}

fn c7_solver_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 7);
    let (mut worst_dist, mut worst_regret, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let (m, n) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let g = random_game(&mut rng, m, n, 10.0);
        let lh = lemke_howson(&g, 0).unwrap();
        let oracle = support_enum(&g).unwrap();
        let d = oracle.iter().map(|e| e.linf_distance(&lh)).fold(f64::INFINITY, f64::min);
        let r = exact_regret(&g, &lh).map(|(a, b)| a.max(b)).unwrap_or(f64::INFINITY);
        if d > 1e-6 || r > 1e-9 {
            failures += 1;
        }
        worst_dist = worst_dist.max(d);
        worst_regret = worst_regret.max(r);
    }
    outcome(
        failures == 0,
        format!("100 games: worst distance to an oracle equilibrium {worst_dist:.1e} (<= 1e-6), worst exact regret {worst_regret:.1e} (<= 1e-9), {failures} misses"),
    )
}

fn c8_truncation() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for k in [1.0, 2.0, 10.0] {
        for delta in [0.5, 0.1, 0.01] {
            let cap = truncation_cap(k, delta).unwrap();
            let lhs = (cap as f64 * (-delta).ln_1p()).exp() * k;
            ok &= lhs <= delta;
            worst = worst.max(lhs / delta);
        }
    }
    outcome(ok, format!("max (1-delta)^cap K / delta = {worst:.4} (<= 1)"))
}

fn c9_unbounded() -> Outcome {
    let ladder: Vec<_> = (0..6).map(int).collect();
    let (eps, delta) = (0.01, 0.01);
    let rep = escalation_demo(&GameSpec::exp_game(), &ladder, eps, delta, 10_000, 20, SEED).unwrap();
    let min_gain = rep.steps.iter().map(|s| s.gain).fold(f64::INFINITY, f64::min);
    let none_certified = rep.steps.iter().all(|s| !s.certified);
    let ok = rep.steps.len() == 5 && min_gain > eps + delta && none_certified && !rep.rejection.is_empty();
    let gains: Vec<String> = rep.steps.iter().map(|s| format!("{:.2}", s.gain)).collect();
    outcome(
        ok,
        format!(
            "build rejected ({}); gains per extension [{}], min {min_gain:.2} > eps+delta {}; certificates issued: {}",
            rep.rejection.split(':').next().unwrap_or(""),
            gains.join(","),
            mark(min_gain > eps + delta),
            rep.steps.iter().filter(|s| s.certified).count(),
        ),
    )
}

const C2_CONFIG: &str = r#"
[experiment]
kind = "factoring-demo"
game = "factoring"
samples = 200
seed = 20240601

[strategies]
player1 = "alice_random"
player2 = "bob_halt"

[schedule]
eps = [0.1, 0.01, 0.001]
delta_rule = "power"
c = 2.0
window = 1

[deviations]
player2 = ["trial_division:delta", "pollard_rho:delta"]

[tolerance]
base = 0.1
stderr_mult = 3.0
"#;

const C5_CONFIG: &str = r#"
[experiment]
kind = "solve"
game = "largest_integer"
samples = 50
seed = 20240601

[schedule]
eps = [0.3, 0.1, 0.03, 0.01]
delta_rule = "linear"
window = 1

[libraries]
player1 = ["ones:0", "ones:4", "ones:8", "ones:12", "ones:16", "ones:20", "ones:24", "ones:28", "ones:32", "ones:36", "ones:40"]
player2 = ["ones:0", "ones:4", "ones:8", "ones:12", "ones:16", "ones:20", "ones:24", "ones:28", "ones:32", "ones:36", "ones:40"]
"#;

fn run_and_replay(text: &str, dir: &Path) -> Result<usize, String> {
    let lc = LoadedConfig::parse(text, ".").map_err(|e| e.to_string())?;
    let o = Overrides { out: Some(dir.to_path_buf()), ..Default::default() };
    experiment::run(lc, &o, None).map_err(|e| e.to_string())?;
    let rep = experiment::replay(dir).map_err(|e| e.to_string())?;
    if rep.all_identical() {
        Ok(rep.files.len())
    } else {
        Err(format!("{:?}", rep.files))
    }
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_and_replay(C2_CONFIG, &tmp.path().join("hard"));
    let b = run_and_replay(C5_CONFIG, &tmp.path().join("li"));
    let show = |r: &Result<usize, String>| match r {
        Ok(n) => format!("{n} files identical"),
        Err(e) => format!("diverged: {e}"),
    };
    outcome(a.is_ok() && b.is_ok(), format!("hard case: {}; largest integer: {}", show(&a), show(&b)))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 10] = [
        ("1", "discount constants", c1_discount_constants),
        ("2", "hard-case trajectory", c2_hard_case),
        ("3", "easy-case trajectory", c3_easy_case),
        ("4", "strong-uniform failure", c4_strong_uniform),
        ("5", "largest integer", c5_largest_integer),
        ("6", "finite-game lift", c6_finite_lift),
        ("7", "solver oracle equivalence", c7_solver_oracle),
        ("8", "truncation inequality", c8_truncation),
        ("9", "unbounded counterexample", c9_unbounded),
        ("10", "determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == id) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name} [{:.1}s]: {}", t.elapsed().as_secs_f64(), o.detail);
        if !o.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} failing ({})", failed.len(), failed.join(", "));
        ExitCode::FAILURE
    }
}
