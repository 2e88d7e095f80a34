//! Declarative experiment runs: TOML configs in, a directory of CSV/JSON
//! results plus a checksummed manifest out.
//!
//! Output layout of a run directory:
//!
//! ```text
//! config.toml      effective configuration (after overrides, without `out`)
//! trajectory.csv   one row per grid point
//! bimatrix.txt     solve runs only
//! verdict.json     the run's measurements and pass/fail decisions
//! summary.json     headline numbers plus a schema block for the files above
//! manifest.json    hashes of everything above, timestamps, completion flag
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::discount::{evaluate_profile, DiscountFamily, EvalConfig};
use crate::error::{Error, Result};
use crate::factoring::{
    alice_const2, alice_random, bob_halt, bob_lookup, bob_pollard_rho, bob_trial_division, build_lookup_table,
    n_of_epsilon, odd_numbers_with_bits, NRule, StepBudget, TABLE_MAX_DIVISOR,
};
use crate::game::{Action, Bimatrix, GameSpec, Player};
use crate::limit::{
    self, equilibrium_trajectory, limit_payoff, strong_uniform_regret, sweep_equilibrium, sweep_profile,
    trajectory_csv, uniform_regret, verdict_csv, ConstantFamily, DeltaRule, DeviationFamily, FnFamily, SizeBudget,
    SweepSchedule, Tolerance,
};
use crate::solver::{lemke_howson, certify, truncation_caps, StrategyLibrary};
use crate::strategy::MeteredStrategy;
use crate::vm::parse_program;

pub const TOOL_NAME: &str = "dtg";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const STRONG_TRAJECTORY_FILE: &str = "strong_trajectory.csv";
pub const BIMATRIX_FILE: &str = "bimatrix.txt";
pub const VERDICT_FILE: &str = "verdict.json";
pub const SUMMARY_FILE: &str = "summary.json";

const DEFAULT_SAMPLES: usize = 200;

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub strategies: Option<ProfileSection>,
    pub schedule: Option<ScheduleSection>,
    pub deviations: Option<PlayerLists>,
    pub families: Option<FamilySection>,
    pub libraries: Option<PlayerLists>,
    pub tolerance: Option<Tolerance>,
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// eval | solve | sweep | uniform-check | factoring-demo | largest-integer-demo
    pub kind: Spanned<String>,
    /// factoring | largest_integer | matrix | exp
    pub game: Spanned<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<String>,
    /// Rates for single-point runs.
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    /// Step cap for both players; required for the unbounded game.
    pub cap: Option<u64>,
    /// Inline bimatrix text for the matrix game.
    pub matrix: Option<String>,
    /// Bimatrix file, relative to the config's directory.
    pub matrix_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub player1: Spanned<String>,
    pub player2: Spanned<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerLists {
    #[serde(default)]
    pub player1: Vec<Spanned<String>>,
    #[serde(default)]
    pub player2: Vec<Spanned<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    #[serde(default)]
    pub player1: Vec<Spanned<String>>,
    #[serde(default)]
    pub player2: Vec<Spanned<String>>,
    pub size_budget: Option<SizeBudget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub eps: Vec<f64>,
    /// linear | power | independent
    pub delta_rule: Spanned<String>,
    pub c: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub window: Option<usize>,
    /// exponential (default) | hyperbolic
    pub family: Option<String>,
}

/// Optional target for sweep runs: the limit payoff must lie within `within`
/// of `payoff` in both coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub payoff: [f64; 2],
    pub within: f64,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

/// A parsed config together with its source text (for line numbers) and the
/// directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub text: String,
    pub base_dir: PathBuf,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

impl LoadedConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
            Error::syntax(line, e.message().to_string())
        })?;
        Ok(LoadedConfig { config, text: text.to_string(), base_dir: base_dir.into() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    /// Error anchored at the line of a spanned value. Values synthesised by
    /// presets carry an empty span and anchor at line 1.
    fn at<T>(&self, v: &Spanned<T>, msg: impl Into<String>) -> Error {
        Error::syntax(line_of(&self.text, v.span().start), msg)
    }

    fn line_of_key(&self, key: &str) -> usize {
        self.text
            .lines()
            .position(|l| l.trim_start().starts_with(key))
            .map(|i| i + 1)
            .unwrap_or(1)
    }

    fn at_key(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::syntax(self.line_of_key(key), msg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.config.experiment.seed = s;
        }
        if let Some(n) = o.samples {
            self.config.experiment.samples = n;
        }
        if let Some(p) = &o.out {
            self.config.experiment.out = Some(p.display().to_string());
        }
    }
}

/// What a run does, after presets are expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Eval,
    Solve,
    Sweep,
    UniformCheck,
    FactoringDemo,
    LargestIntegerDemo,
}

impl RunKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "eval" => RunKind::Eval,
            "solve" => RunKind::Solve,
            "sweep" => RunKind::Sweep,
            "uniform-check" => RunKind::UniformCheck,
            "factoring-demo" => RunKind::FactoringDemo,
            "largest-integer-demo" => RunKind::LargestIntegerDemo,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Eval => "eval",
            RunKind::Solve => "solve",
            RunKind::Sweep => "sweep",
            RunKind::UniformCheck => "uniform-check",
            RunKind::FactoringDemo => "factoring-demo",
            RunKind::LargestIntegerDemo => "largest-integer-demo",
        }
    }
}

fn synth(s: &str) -> Spanned<String> {
    Spanned::new(0..0, s.to_string())
}

/// Fills the sections a demo preset implies when the config leaves them out.
fn expand_preset(cfg: &mut ExperimentConfig, kind: RunKind) {
    match kind {
        RunKind::FactoringDemo => {
            cfg.strategies.get_or_insert_with(|| ProfileSection {
                player1: synth("alice_random"),
                player2: synth("bob_halt"),
            });
            cfg.deviations.get_or_insert_with(|| PlayerLists {
                player1: vec![],
                player2: vec![synth("trial_division:delta"), synth("pollard_rho:delta")],
            });
            cfg.schedule.get_or_insert_with(|| ScheduleSection {
                eps: vec![0.1, 0.01, 0.001],
                delta_rule: synth("power"),
                c: Some(2.0),
                deltas: None,
                window: Some(1),
                family: None,
            });
        }
        RunKind::LargestIntegerDemo => {
            let ladder: Vec<Spanned<String>> = (0..=5).map(|k| synth(&format!("ones:{}", 4 * k))).collect();
            cfg.libraries.get_or_insert_with(|| PlayerLists { player1: ladder.clone(), player2: ladder });
            cfg.schedule.get_or_insert_with(|| ScheduleSection {
                eps: vec![0.3, 0.1, 0.03, 0.01],
                delta_rule: synth("linear"),
                c: None,
                deltas: None,
                window: Some(1),
                family: None,
            });
        }
        _ => {}
    }
}

fn build_game(lc: &LoadedConfig) -> Result<GameSpec> {
    let e = &lc.config.experiment;
    match e.game.get_ref().as_str() {
        "factoring" => Ok(GameSpec::factoring()),
        "largest_integer" => Ok(GameSpec::largest_integer()),
        "exp" => Ok(GameSpec::exp_game()),
        "matrix" => {
            let text = match (&e.matrix, &e.matrix_file) {
                (Some(t), None) => t.clone(),
                (None, Some(f)) => {
                    let p = lc.base_dir.join(f);
                    fs::read_to_string(&p).map_err(|err| Error::io(&p, err))?
                }
                _ => return Err(lc.at(&e.game, "matrix game needs exactly one of `matrix` or `matrix_file`")),
            };
            let parsed = Bimatrix::parse(&text).map_err(|err| lc.at(&e.game, format!("matrix: {err}")))?;
            Ok(GameSpec::matrix(parsed.bimatrix))
        }
        other => Err(lc.at(&e.game, format!("unknown game `{other}`"))),
    }
}

fn parse_budget(s: Option<&str>) -> std::result::Result<StepBudget, String> {
    match s {
        None | Some("unlimited") => Ok(StepBudget::Unlimited),
        Some("delta") => Ok(StepBudget::DeltaScaled),
        Some(n) => n.parse().map(StepBudget::Fixed).map_err(|_| format!("bad step budget `{n}`")),
    }
}

fn emit_program(name: &str, body: &str) -> std::result::Result<MeteredStrategy, String> {
    parse_program(&format!(".name {name}\n{body}    halt\n"))
        .map(MeteredStrategy::program)
        .map_err(|e| e.to_string())
}

fn fixed_lookup(bits: u64) -> std::result::Result<MeteredStrategy, String> {
    if !(2..=24).contains(&bits) {
        return Err(format!("lookup tables support 2..=24 bits, got {bits}"));
    }
    let support: Vec<_> = odd_numbers_with_bits(bits).collect();
    let table = build_lookup_table(&support, TABLE_MAX_DIVISOR).map_err(|e| e.to_string())?;
    Ok(bob_lookup(Arc::new(table)))
}

/// Strategy from a spec string such as `alice_random:24` or
/// `trial_division:delta`.
fn parse_strategy(spec: &str, game: &GameSpec, player: Player, base: &Path) -> std::result::Result<MeteredStrategy, String> {
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let num = |a: Option<&str>| -> std::result::Result<u64, String> {
        a.ok_or_else(|| format!("`{head}` needs an argument"))?
            .parse::<u64>()
            .map_err(|_| format!("`{head}` needs a non-negative integer argument"))
    };
    match head {
        "const2" | "alice_const2" => Ok(alice_const2()),
        "alice_random" => match arg {
            None => Ok(alice_random(NRule::OfEpsilon)),
            Some(_) => Ok(alice_random(NRule::Fixed(num(arg)?))),
        },
        "halt" | "bob_halt" => Ok(bob_halt()),
        "trial_division" => Ok(bob_trial_division(parse_budget(arg)?)),
        "pollard_rho" => Ok(bob_pollard_rho(parse_budget(arg)?)),
        "lookup" => fixed_lookup(num(arg)?),
        "ones" => {
            let k = num(arg)?;
            emit_program(spec, &format!("    set r0, {k}\n    emitones r0\n"))
        }
        "int" => {
            let v = num(arg)?;
            emit_program(spec, &format!("    set r0, {v}\n    emitint r0\n"))
        }
        "index" => {
            let i = num(arg)? as usize;
            let bits = game
                .encode_action(player, &Action::Index(i))
                .ok_or_else(|| format!("action index {i} is not encodable in {}", game.name()))?;
            let body: String = bits.as_slice().iter().map(|b| format!("    emitb {}\n", u8::from(*b))).collect();
            emit_program(spec, &body)
        }
        "asm" => {
            let p = base.join(arg.ok_or("`asm` needs a path")?);
            let text = fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_program(&text).map(MeteredStrategy::program).map_err(|e| format!("{}: {e}", p.display()))
        }
        _ => Err(format!("unknown strategy `{spec}`")),
    }
}

fn strategy(lc: &LoadedConfig, game: &GameSpec, player: Player, spec: &Spanned<String>) -> Result<MeteredStrategy> {
    parse_strategy(spec.get_ref(), game, player, &lc.base_dir).map_err(|m| lc.at(spec, m))
}

fn library(lc: &LoadedConfig, game: &GameSpec, player: Player, specs: &[Spanned<String>], what: &str) -> Result<StrategyLibrary> {
    if specs.is_empty() {
        return Err(lc.at_key(what, format!("library for player {} is empty", player.index())));
    }
    let mut entries = Vec::with_capacity(specs.len());
    for s in specs {
        entries.push((s.get_ref().clone(), strategy(lc, game, player, s)?));
    }
    StrategyLibrary::new(entries).map_err(|e| lc.at(&specs[0], e.to_string()))
}

fn schedule(lc: &LoadedConfig) -> Result<SweepSchedule> {
    let s = lc.config.schedule.as_ref().ok_or_else(|| lc.at_key("[experiment]", "this run needs a [schedule] section"))?;
    let rule = match s.delta_rule.get_ref().as_str() {
        "linear" => DeltaRule::Linear,
        "power" => DeltaRule::Power { c: s.c.ok_or_else(|| lc.at(&s.delta_rule, "power rule needs `c`"))? },
        "independent" => DeltaRule::Independent {
            deltas: s.deltas.clone().ok_or_else(|| lc.at(&s.delta_rule, "independent rule needs `deltas`"))?,
        },
        other => return Err(lc.at(&s.delta_rule, format!("unknown delta rule `{other}`"))),
    };
    let window = s.window.unwrap_or(limit::DEFAULT_WINDOW.min(s.eps.len()).max(1));
    let family = match s.family.as_deref() {
        None | Some("exponential") => DiscountFamily::Exponential,
        Some("hyperbolic") => DiscountFamily::Hyperbolic,
        Some(other) => return Err(lc.at_key("family", format!("unknown discount family `{other}`"))),
    };
    SweepSchedule::with_window(s.eps.clone(), rule, window)
        .map(|sch| sch.with_family(family))
        .map_err(|e| lc.at(&s.delta_rule, e.to_string()))
}

fn profile_pair(lc: &LoadedConfig, game: &GameSpec) -> Result<(MeteredStrategy, MeteredStrategy)> {
    let p = lc.config.strategies.as_ref().ok_or_else(|| lc.at_key("[experiment]", "this run needs a [strategies] section"))?;
    Ok((strategy(lc, game, Player::One, &p.player1)?, strategy(lc, game, Player::Two, &p.player2)?))
}

/// Rebuilds the lookup table for `n(eps)`-bit odd numbers at every point.
pub fn lookup_family() -> impl DeviationFamily {
    FnFamily::new("lookup", |eps: f64, _delta: f64| {
        let bits = n_of_epsilon(eps)?;
        if bits > 24 {
            return Err(Error::TableBuild(format!("{bits}-bit table is too large to enumerate")));
        }
        let support: Vec<_> = odd_numbers_with_bits(bits).collect();
        Ok(bob_lookup(Arc::new(build_lookup_table(&support, TABLE_MAX_DIVISOR)?)))
    })
}

fn families(lc: &LoadedConfig, game: &GameSpec, player: Player, specs: &[Spanned<String>]) -> Result<Vec<Box<dyn DeviationFamily>>> {
    let mut out: Vec<Box<dyn DeviationFamily>> = Vec::new();
    for s in specs {
        if s.get_ref() == "lookup" {
            out.push(Box::new(lookup_family()));
        } else {
            out.push(Box::new(ConstantFamily(strategy(lc, game, player, s)?)));
        }
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub config_hash: String,
    /// Directory that relative paths in the config resolve against.
    pub config_dir: String,
    pub started: String,
    pub finished: Option<String>,
    pub complete: bool,
    pub error: Option<String>,
    pub files: Vec<FileRecord>,
}

struct OutputDir {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, contents).map_err(|e| Error::io(&p, e))?;
        self.files.push(FileRecord { path: name.into(), sha256: sha256_hex(contents), bytes: contents.len() as u64 });
        Ok(())
    }

    fn write_json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    let p = dir.join(MANIFEST_FILE);
    let mut s = serde_json::to_string_pretty(m)?;
    s.push('\n');
    fs::write(&p, s).map_err(|e| Error::io(&p, e))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Documentation of every emitted file, embedded in `summary.json`.
fn schema() -> Value {
    let columns: serde_json::Map<String, Value> =
        limit::CSV_COLUMNS.iter().map(|(k, d)| (k.to_string(), Value::String(d.to_string()))).collect();
    json!({
        TRAJECTORY_FILE: {
            "format": "csv with header",
            "rows": "one per grid point, eps descending; solve runs report equilibrium payoffs with the largest cell stderr",
            "columns": columns,
        },
        STRONG_TRAJECTORY_FILE: {
            "format": "csv with header",
            "rows": "as trajectory.csv, gains against rate-dependent deviation families",
            "columns": columns,
        },
        BIMATRIX_FILE: {
            "format": "`m n` header, then `i j u1 u2` per cell, then a `profile:` section with the row and column distributions",
            "grid_point": "last point of the schedule",
        },
        VERDICT_FILE: {
            "kind": "run kind",
            "passed": "overall decision; absent when the run has no pass/fail criterion",
            "details": "per-kind measurements (estimates, verdict points, equilibria)",
        },
        SUMMARY_FILE: {
            "config_hash": "sha256 of config.toml",
            "headline": "key numbers of the run",
        },
    })
}

/// Outcome of a finished run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub kind: RunKind,
    pub passed: Option<bool>,
    pub manifest: RunManifest,
}

fn serialize_config(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(format!("cannot serialise configuration: {e}")))
}

/// Validates the config, executes it and writes the run directory.
/// `kind_override` forces the run kind (CLI subcommands).
pub fn run(mut lc: LoadedConfig, overrides: &Overrides, kind_override: Option<RunKind>) -> Result<RunReport> {
    lc.apply(overrides);
    let kind = match kind_override {
        Some(k) => k,
        None => {
            let k = &lc.config.experiment.kind;
            RunKind::parse(k.get_ref()).ok_or_else(|| lc.at(k, format!("unknown experiment kind `{}`", k.get_ref())))?
        }
    };
    expand_preset(&mut lc.config, kind);
    if lc.config.experiment.samples == 0 {
        return Err(lc.at_key("samples", "samples must be positive"));
    }
    let out = lc
        .config
        .experiment
        .out
        .clone()
        .map(PathBuf::from)
        .ok_or_else(|| lc.at_key("[experiment]", "no output directory: set `out` or pass --out"))?;
    let game = build_game(&lc)?;
    let plan = plan(&lc, &game, kind)?;

    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    // where the results go is not part of the experiment
    let mut effective = lc.config.clone();
    effective.experiment.out = None;
    let config_text = serialize_config(&effective)?;
    let mut manifest = RunManifest {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        kind: kind.as_str().into(),
        config_hash: sha256_hex(config_text.as_bytes()),
        config_dir: fs::canonicalize(&lc.base_dir)
            .unwrap_or_else(|_| lc.base_dir.clone())
            .display()
            .to_string(),
        started: now(),
        finished: None,
        complete: false,
        error: None,
        files: vec![],
    };
    write_manifest(&out, &manifest)?;
    let mut od = OutputDir { dir: out.clone(), files: vec![] };
    let result = od.write(CONFIG_FILE, config_text.as_bytes()).and_then(|_| execute(&lc, &game, plan, &mut od, &manifest));
    manifest.files = od.files;
    manifest.finished = Some(now());
    match result {
        Ok(passed) => {
            manifest.complete = true;
            write_manifest(&out, &manifest)?;
            Ok(RunReport { dir: out, kind, passed, manifest })
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            write_manifest(&out, &manifest)?;
            Err(e)
        }
    }
}

/// Everything a run needs, resolved before any output is written so that
/// validation errors leave no directory behind.
enum Plan {
    Eval { s1: MeteredStrategy, s2: MeteredStrategy, eps: f64, delta: f64, caps: (u64, u64) },
    Sweep { s1: MeteredStrategy, s2: MeteredStrategy, schedule: SweepSchedule },
    Uniform {
        s1: MeteredStrategy,
        s2: MeteredStrategy,
        schedule: SweepSchedule,
        dev: Option<(Vec<MeteredStrategy>, Vec<MeteredStrategy>)>,
        fam: Option<(Vec<Box<dyn DeviationFamily>>, Vec<Box<dyn DeviationFamily>>, Option<SizeBudget>)>,
    },
    Solve { lib1: StrategyLibrary, lib2: StrategyLibrary, schedule: SweepSchedule },
}

fn single_point(lc: &LoadedConfig) -> Result<(f64, f64)> {
    let e = &lc.config.experiment;
    if let (Some(eps), Some(delta)) = (e.eps, e.delta) {
        return Ok((eps, delta));
    }
    if lc.config.schedule.is_some() {
        let s = schedule(lc)?;
        return Ok((s.eps_grid[0], s.delta_at(0)));
    }
    Err(lc.at_key("[experiment]", "set `eps` and `delta` or give a [schedule]"))
}

fn plan(lc: &LoadedConfig, game: &GameSpec, kind: RunKind) -> Result<Plan> {
    Ok(match kind {
        RunKind::Eval => {
            let (s1, s2) = profile_pair(lc, game)?;
            let (eps, delta) = single_point(lc)?;
            for (name, v) in [("eps", eps), ("delta", delta)] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(lc.at_key(name, format!("{name} must lie in (0,1), got {v}")));
                }
            }
            let caps = match lc.config.experiment.cap {
                Some(0) => return Err(lc.at_key("cap", "cap must be positive")),
                Some(c) => (c, c),
                None => truncation_caps(game, eps, delta).map_err(|e| lc.at(&lc.config.experiment.game, e.to_string()))?,
            };
            Plan::Eval { s1, s2, eps, delta, caps }
        }
        RunKind::Sweep => {
            let (s1, s2) = profile_pair(lc, game)?;
            require_bounded(lc, game)?;
            Plan::Sweep { s1, s2, schedule: schedule(lc)? }
        }
        RunKind::UniformCheck | RunKind::FactoringDemo => {
            let (s1, s2) = profile_pair(lc, game)?;
            require_bounded(lc, game)?;
            let schedule = schedule(lc)?;
            let dev = match &lc.config.deviations {
                Some(d) => {
                    let mut v1 = Vec::new();
                    let mut v2 = Vec::new();
                    for s in &d.player1 {
                        v1.push(strategy(lc, game, Player::One, s)?);
                    }
                    for s in &d.player2 {
                        v2.push(strategy(lc, game, Player::Two, s)?);
                    }
                    Some((v1, v2))
                }
                None => None,
            };
            let fam = match &lc.config.families {
                Some(f) => Some((
                    families(lc, game, Player::One, &f.player1)?,
                    families(lc, game, Player::Two, &f.player2)?,
                    f.size_budget,
                )),
                None => None,
            };
            if dev.is_none() && fam.is_none() {
                return Err(lc.at_key("[experiment]", "uniform-check needs [deviations] or [families]"));
            }
            Plan::Uniform { s1, s2, schedule, dev, fam }
        }
        RunKind::Solve | RunKind::LargestIntegerDemo => {
            let libs = lc
                .config
                .libraries
                .as_ref()
                .ok_or_else(|| lc.at_key("[experiment]", "solve needs a [libraries] section"))?;
            require_bounded(lc, game)?;
            let lib1 = library(lc, game, Player::One, &libs.player1, "player1")?;
            let lib2 = library(lc, game, Player::Two, &libs.player2, "player2")?;
            let schedule = match &lc.config.schedule {
                Some(_) => schedule(lc)?,
                None => {
                    let (eps, delta) = single_point(lc)?;
                    SweepSchedule::with_window(vec![eps], DeltaRule::Independent { deltas: vec![delta] }, 1)
                        .map_err(|e| lc.at_key("eps", e.to_string()))?
                }
            };
            Plan::Solve { lib1, lib2, schedule }
        }
    })
}

fn require_bounded(lc: &LoadedConfig, game: &GameSpec) -> Result<()> {
    if game.bound().is_none() {
        return Err(lc.at(
            &lc.config.experiment.game,
            format!("{} has no payoff bound; only `eval` with an explicit `cap` is supported", game.name()),
        ));
    }
    Ok(())
}

fn tolerance(lc: &LoadedConfig) -> Tolerance {
    lc.config.tolerance.unwrap_or_default()
}

fn execute(lc: &LoadedConfig, game: &GameSpec, plan: Plan, od: &mut OutputDir, manifest: &RunManifest) -> Result<Option<bool>> {
    let e = &lc.config.experiment;
    let (samples, seed) = (e.samples, e.seed);
    let (details, headline, passed): (Value, Value, Option<bool>) = match plan {
        Plan::Eval { s1, s2, eps, delta, caps } => {
            let cfg = EvalConfig::new(eps, delta, samples, seed, caps);
            let est = evaluate_profile(game, &s1, &s2, &cfg)?;
            let traj = limit::PayoffTrajectory {
                points: vec![limit::TrajectoryPoint { eps, delta, u1: est.u1, u2: est.u2 }],
            };
            od.write(TRAJECTORY_FILE, trajectory_csv(&traj).as_bytes())?;
            let head = json!({ "u1": est.u1.mean, "u2": est.u2.mean, "caps": [caps.0, caps.1] });
            (json!({ "estimate": est, "caps": [caps.0, caps.1] }), head, None)
        }
        Plan::Sweep { s1, s2, schedule } => {
            let traj = sweep_profile(game, &s1, &s2, &schedule, samples, seed)?;
            od.write(TRAJECTORY_FILE, trajectory_csv(&traj).as_bytes())?;
            let lp = limit_payoff(&traj, schedule.window)?;
            let passed = lc.config.expect.map(|x| lp.within((x.payoff[0], x.payoff[1]), x.within));
            let head = json!({ "limit": [lp.u1, lp.u2], "window": lp.window });
            (json!({ "schedule": schedule, "limit": lp, "expect": lc.config.expect, "trajectory": traj }), head, passed)
        }
        Plan::Uniform { s1, s2, schedule, dev, fam } => {
            let tol = tolerance(lc);
            let mut details = serde_json::Map::new();
            let mut head = serde_json::Map::new();
            let mut passed = true;
            let mut wrote_main = false;
            if let Some((d1, d2)) = dev {
                let v = uniform_regret(game, &s1, &s2, &d1, &d2, &schedule, samples, seed, tol)?;
                od.write(TRAJECTORY_FILE, verdict_csv(&v).as_bytes())?;
                wrote_main = true;
                passed &= v.passed;
                head.insert("uniform_passed".into(), json!(v.passed));
                head.insert("uniform_trailing_max".into(), json!(v.trailing_max));
                let lp = limit_payoff(&v.trajectory(), schedule.window.min(v.trajectory().points.len()).max(1)).ok();
                details.insert("limit".into(), json!(lp));
                details.insert("uniform".into(), json!(v));
            }
            if let Some((f1, f2, budget)) = fam {
                let r1: Vec<&dyn DeviationFamily> = f1.iter().map(|b| b.as_ref()).collect();
                let r2: Vec<&dyn DeviationFamily> = f2.iter().map(|b| b.as_ref()).collect();
                let v = strong_uniform_regret(game, &s1, &s2, &r1, &r2, &schedule, samples, seed, tol, budget)?;
                let file = if wrote_main { STRONG_TRAJECTORY_FILE } else { TRAJECTORY_FILE };
                od.write(file, verdict_csv(&v).as_bytes())?;
                passed &= v.passed;
                head.insert("strong_passed".into(), json!(v.passed));
                head.insert("strong_trailing_max".into(), json!(v.trailing_max));
                details.insert("strong".into(), json!(v));
            }
            (Value::Object(details), Value::Object(head), Some(passed))
        }
        Plan::Solve { lib1, lib2, schedule } => {
            let points = sweep_equilibrium(game, &lib1, &lib2, &schedule, samples, seed)?;
            od.write(TRAJECTORY_FILE, trajectory_csv(&equilibrium_trajectory(&points)).as_bytes())?;
            let last = points.last().expect("non-empty schedule");
            let text = last.bimatrix.to_text(Some((&last.profile.p, &last.profile.q)));
            od.write(BIMATRIX_FILE, text.as_bytes())?;
            let passed = points.iter().all(|p| p.certified);
            let head = json!({
                "payoffs": points.iter().map(|p| [p.payoff1, p.payoff2]).collect::<Vec<_>>(),
                "all_certified": passed,
            });
            let details = json!({
                "labels1": lib1.labels(),
                "labels2": lib2.labels(),
                "size_bits1": lib1.size_bits(),
                "size_bits2": lib2.size_bits(),
                "schedule": schedule,
                "equilibria": points,
                "note": "equilibria and certificates are relative to the declared strategy libraries",
            });
            (details, head, Some(passed))
        }
    };
    let kind = manifest.kind.clone();
    od.write_json(VERDICT_FILE, &json!({ "kind": kind, "passed": passed, "details": details }))?;
    od.write_json(
        SUMMARY_FILE,
        &json!({
            "tool": TOOL_NAME,
            "kind": kind,
            "game": e.game.get_ref(),
            "seed": seed,
            "samples": samples,
            "config_hash": manifest.config_hash,
            "headline": headline,
            "schema": schema(),
        }),
    )?;
    Ok(passed)
}

/// Convenience: `certify` a pure profile read from a bimatrix file.
pub fn certify_file(path: &Path, eta: f64) -> Result<crate::solver::Certificate> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = Bimatrix::parse(&text)?;
    let profile = match parsed.profile {
        Some((p, q)) => crate::solver::MixedProfile::new(p, q)?,
        None => lemke_howson(&parsed.bimatrix, 0)?,
    };
    certify(&parsed.bimatrix, &profile, eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileStatus {
    Identical,
    Diverged,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileCheck {
    pub path: String,
    pub status: FileStatus,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub files: Vec<FileCheck>,
}

impl ReplayReport {
    pub fn all_identical(&self) -> bool {
        self.files.iter().all(|f| f.status == FileStatus::Identical)
    }
}

fn scratch_dir() -> PathBuf {
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    std::env::temp_dir().join(format!("{TOOL_NAME}-replay-{}-{nanos}", std::process::id()))
}

/// Re-runs the config stored next to a manifest and compares every listed
/// file's checksum. Accepts the manifest path or its directory.
pub fn replay(path: &Path) -> Result<ReplayReport> {
    let manifest_path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let unreadable = |p: &Path, e: &dyn std::fmt::Display| Error::Config(format!("cannot read {}: {e}", p.display()));
    let text = fs::read_to_string(&manifest_path).map_err(|e| unreadable(&manifest_path, &e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| unreadable(&manifest_path, &e))?;
    let cfg_path = dir.join(CONFIG_FILE);
    let cfg_text = fs::read_to_string(&cfg_path).map_err(|e| unreadable(&cfg_path, &e))?;
    let lc = LoadedConfig::parse(&cfg_text, PathBuf::from(&manifest.config_dir))?;
    let kind = RunKind::parse(&manifest.kind).ok_or_else(|| Error::Config(format!("unknown kind {}", manifest.kind)))?;
    let scratch = scratch_dir();
    let overrides = Overrides { out: Some(scratch.clone()), ..Default::default() };
    let rerun = run(lc, &overrides, Some(kind));
    let result = rerun.map(|r| {
        let mut files = Vec::new();
        for rec in &manifest.files {
            let original = dir.join(&rec.path);
            let check = if !original.exists() {
                FileCheck { path: rec.path.clone(), status: FileStatus::Missing, detail: Some("absent from run directory".into()) }
            } else {
                match r.manifest.files.iter().find(|f| f.path == rec.path) {
                    None => FileCheck {
                        path: rec.path.clone(),
                        status: FileStatus::Missing,
                        detail: Some("not produced by the replay".into()),
                    },
                    Some(f) if f.sha256 == rec.sha256 => {
                        FileCheck { path: rec.path.clone(), status: FileStatus::Identical, detail: None }
                    }
                    Some(f) => FileCheck {
                        path: rec.path.clone(),
                        status: FileStatus::Diverged,
                        detail: Some(format!("recorded {} replayed {}", &rec.sha256[..12], &f.sha256[..12])),
                    },
                }
            };
            files.push(check);
        }
        // files the replay emits that the manifest never listed
        for f in &r.manifest.files {
            if !manifest.files.iter().any(|m| m.path == f.path) {
                files.push(FileCheck {
                    path: f.path.clone(),
                    status: FileStatus::Diverged,
                    detail: Some("not listed in the manifest".into()),
                });
            }
        }
        ReplayReport { files }
    });
    let _ = fs::remove_dir_all(&scratch);
    result
}
