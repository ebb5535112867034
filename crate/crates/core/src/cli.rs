//! Command-line front end. Every subcommand writes one table, as CSV with a
//! header row or as a JSON array of records, to `--out` or stdout.
//!
//! Options can also come from a flat TOML file given with `--config`; its keys
//! are the long flag names without dashes prefix (`nd = "1,2"`, `beta = 0.001`).
//! Flags win over the file, the file wins over `--preset`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{verify_many, QuasiConcavityReport};
use crate::equilibrium::{
    enumerate_nash, single_network_optimum, solve_stackelberg, DEFAULT_EPS_TIE,
};
use crate::error::Error;
use crate::game::{wastage_cost, GridSpec, PayoffSurfaces};
use crate::metrics::{
    aoi_closed_form, aoi_node, inter_update_moments, per_node_throughput, throughput_closed_form,
};
use crate::model::{AccessVector, NetworkConfig, Player, StrategyPair};
use crate::simulate::{run_simulation, Estimate, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "coexist", version, about = "DSRC/WiFi coexistence game solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Age and throughput along a strategy sweep with the opponent fixed.
    Metrics(MetricsArgs),
    /// Pure Nash equilibria on the strategy grid.
    Nash(GameArgs),
    /// Pessimistic Stackelberg equilibria.
    Stackelberg(StackelbergArgs),
    /// Best access probability of a network alone on the medium.
    Optimum(OptimumArgs),
    /// Derivative sign-change scans.
    Verify(VerifyArgs),
    /// Monte Carlo run compared with the analytic values.
    Simulate(SimulateArgs),
    /// Nash and Stackelberg solutions across node counts and weights.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    NoCost,
    Costed,
    #[value(name = "weights-150")]
    Weights150,
    #[value(name = "weights-400")]
    Weights400,
}

impl Preset {
    fn weights(self, beta: f64) -> (f64, f64) {
        match self {
            Preset::NoCost => (0.0, 0.0),
            Preset::Costed => (beta, 1.0 + beta),
            Preset::Weights150 => (0.001, 150.0),
            Preset::Weights400 => (0.001, 400.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Dsrc,
    Wifi,
    Both,
}

impl Side {
    fn players(self) -> Vec<Player> {
        match self {
            Side::Dsrc => vec![Player::Dsrc],
            Side::Wifi => vec![Player::Wifi],
            Side::Both => vec![Player::Dsrc, Player::Wifi],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solve {
    Nash,
    Stackelberg,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items: Result<Vec<T>, String> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| format!("`{x}`: {e}")))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(items))
}

fn parse_counts(s: &str) -> Result<List<u32>, String> {
    parse_list(s)
}

fn parse_reals(s: &str) -> Result<List<f64>, String> {
    parse_list(s)
}

fn parse_colon_list<A, B>(s: &str) -> Result<List<(A, B)>, String>
where
    A: std::str::FromStr,
    B: std::str::FromStr,
    A::Err: std::fmt::Display,
    B::Err: std::fmt::Display,
{
    let items: Result<Vec<(A, B)>, String> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            let (a, b) = x
                .split_once(':')
                .ok_or_else(|| format!("`{x}`: expected two values joined by `:`"))?;
            let a = a.trim().parse::<A>().map_err(|e| format!("`{x}`: {e}"))?;
            let b = b.trim().parse::<B>().map_err(|e| format!("`{x}`: {e}"))?;
            Ok((a, b))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(items))
}

fn parse_pairs(s: &str) -> Result<List<(u32, u32)>, String> {
    parse_colon_list(s)
}

fn parse_weights(s: &str) -> Result<List<(f64, f64)>, String> {
    parse_colon_list(s)
}

fn parse_player(s: &str) -> Result<Player, String> {
    s.parse::<Player>().map_err(|e| e.to_string())
}

fn parse_enum<T: ValueEnum>(s: &str) -> Result<T, String> {
    T::from_str(s, true)
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// DSRC node counts, comma separated.
    #[arg(long, value_parser = parse_counts)]
    pub nd: Option<List<u32>>,
    /// WiFi node counts, comma separated.
    #[arg(long, value_parser = parse_counts)]
    pub nw: Option<List<u32>>,
    /// Explicit `nd:nw` cells; replaces the cross product of --nd and --nw.
    #[arg(long, value_parser = parse_pairs)]
    pub pairs: Option<List<(u32, u32)>>,
    /// Idle slot length relative to a busy slot of length 1 + beta.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "w-idle")]
    pub w_idle: Option<f64>,
    #[arg(long = "w-col")]
    pub w_col: Option<f64>,
    /// `w_idle:w_col` pairs; replaces --w-idle and --w-col.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<List<(f64, f64)>>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long = "grid-lo")]
    pub grid_lo: Option<f64>,
    #[arg(long = "grid-hi")]
    pub grid_hi: Option<f64>,
    #[arg(long = "grid-step")]
    pub grid_step: Option<f64>,
    /// Relative tolerance under which two payoffs count as tied.
    #[arg(long = "eps-tie")]
    pub eps_tie: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat TOML file with default values for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Network whose access probability is swept.
    #[arg(long, value_parser = parse_player)]
    pub kind: Option<Player>,
    /// Fixed opponent access probabilities.
    #[arg(long = "opp-tau", value_parser = parse_reals)]
    pub opp_tau: Option<List<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct StackelbergArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub leader: Option<Side>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub kind: Option<Side>,
    /// Network sizes.
    #[arg(long, value_parser = parse_counts)]
    pub n: Option<List<u32>>,
    /// Width of the final refinement bracket.
    #[arg(long)]
    pub refine: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub kind: Option<Side>,
    #[arg(long = "opp-tau", value_parser = parse_reals)]
    pub opp_tau: Option<List<f64>>,
    #[arg(long = "scan-step")]
    pub scan_step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Per-node access probabilities; replaces the homogeneous networks.
    #[arg(long, value_parser = parse_reals)]
    pub taus: Option<List<f64>>,
    #[arg(long = "tau-d")]
    pub tau_d: Option<f64>,
    #[arg(long = "tau-w")]
    pub tau_w: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated slots including warmup.
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub warmup: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub solve: Option<Solve>,
}

/// Values from the `--config` file, kept as strings and parsed with the same
/// functions as the flags.
struct FileValues(BTreeMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "nd",
    "nw",
    "pairs",
    "beta",
    "w-idle",
    "w-col",
    "weights",
    "preset",
    "grid-lo",
    "grid-hi",
    "grid-step",
    "eps-tie",
    "format",
    "out",
    "kind",
    "opp-tau",
    "leader",
    "n",
    "refine",
    "scan-step",
    "taus",
    "tau-d",
    "tau-w",
    "seed",
    "horizon",
    "warmup",
    "solve",
];

impl FileValues {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileValues(BTreeMap::new()));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut out = BTreeMap::new();
        for (key, value) in table {
            let key = key.replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(config_err(format!(
                    "unknown key `{key}` in {}",
                    path.display()
                )));
            }
            out.insert(key.clone(), toml_to_string(&key, &value)?);
        }
        Ok(FileValues(out))
    }

    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> CliResult<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(s) => parse(s)
                .map(Some)
                .map_err(|e| config_err(format!("`{key}`: {e}"))),
        }
    }

    fn pick<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key, parse),
        }
    }
}

fn toml_to_string(key: &str, v: &toml::Value) -> CliResult<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|x| toml_to_string(key, x))
            .collect::<CliResult<Vec<_>>>()?
            .join(","),
        _ => return Err(config_err(format!("`{key}`: unsupported value"))),
    })
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| e.to_string())
}

/// Shared options after merging flags, the config file and the preset.
#[derive(Debug, Clone)]
struct Resolved {
    cells: Vec<(u32, u32)>,
    beta: f64,
    weights: Vec<(f64, f64)>,
    grid: GridSpec,
    eps_tie: f64,
    format: Format,
    out: Option<PathBuf>,
}

impl Resolved {
    fn config(&self, nd: u32, nw: u32, w: (f64, f64)) -> CliResult<NetworkConfig> {
        Ok(NetworkConfig::new(nd, nw, self.beta, w.0, w.1)?)
    }
}

fn resolve(c: &Common, file: &FileValues) -> CliResult<Resolved> {
    let beta = file.pick(c.beta, "beta", parse_num)?.unwrap_or(0.001);
    let preset = file.pick(c.preset, "preset", parse_enum::<Preset>)?;
    let (p_idle, p_col) = preset.map_or((0.0, 0.0), |p| p.weights(beta));
    let w_idle = file.pick(c.w_idle, "w-idle", parse_num)?.unwrap_or(p_idle);
    let w_col = file.pick(c.w_col, "w-col", parse_num)?.unwrap_or(p_col);
    let weights = match file.pick(c.weights.clone(), "weights", parse_weights)? {
        Some(List(w)) => w,
        None => vec![(w_idle, w_col)],
    };

    let nd = file.pick(c.nd.clone(), "nd", parse_counts)?;
    let nw = file.pick(c.nw.clone(), "nw", parse_counts)?;
    let cells = match file.pick(c.pairs.clone(), "pairs", parse_pairs)? {
        Some(List(p)) => p,
        None => {
            let nd = nd.map_or(vec![2], |l| l.0);
            let nw = nw.map_or(vec![2], |l| l.0);
            let mut cells: Vec<(u32, u32)> = nd
                .iter()
                .flat_map(|d| nw.iter().map(move |w| (*d, *w)))
                .collect();
            cells.sort_unstable();
            cells.dedup();
            cells
        }
    };

    let d = GridSpec::default();
    let grid = GridSpec::new(
        file.pick(c.grid_lo, "grid-lo", parse_num)?.unwrap_or(d.lo),
        file.pick(c.grid_hi, "grid-hi", parse_num)?.unwrap_or(d.hi),
        file.pick(c.grid_step, "grid-step", parse_num)?
            .unwrap_or(d.step),
    )?;
    let eps_tie = file
        .pick(c.eps_tie, "eps-tie", parse_num)?
        .unwrap_or(DEFAULT_EPS_TIE);
    if !(eps_tie >= 0.0) {
        return Err(config_err(format!("`eps-tie` must be >= 0, got {eps_tie}")));
    }

    let r = Resolved {
        cells,
        beta,
        weights,
        grid,
        eps_tie,
        format: file
            .pick(c.format, "format", parse_enum::<Format>)?
            .unwrap_or(Format::Csv),
        out: file.pick(c.out.clone(), "out", |s| Ok(PathBuf::from(s)))?,
    };
    // surface parameter errors before any work starts
    for &(nd, nw) in &r.cells {
        for &w in &r.weights {
            r.config(nd, nw, w)?;
        }
    }
    Ok(r)
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_sig(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) if x.is_finite() => Value::from(round_sig(*x)),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(u64::from(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn to_json(&self) -> String {
        let records: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| {
                self.columns
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect()
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&records).expect("json values serialize");
        s.push('\n');
        s
    }
}

/// Six significant digits, fixed notation for moderate magnitudes and
/// exponent notation otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// The value a reader gets back from [`fmt_sig`].
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Tables go to `--out` or `stdout`, diagnostics to `stderr`.
pub fn run_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok((table, format, out)) => match emit(&table, format, out.as_ref(), stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "{e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(
    table: &Table,
    format: Format,
    out: Option<&PathBuf>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write output: {e}"))),
    }
}

/// Runs a parsed subcommand and returns its table with the output settings.
pub fn execute(cmd: &Command) -> CliResult<(Table, Format, Option<PathBuf>)> {
    let common = match cmd {
        Command::Metrics(a) => &a.common,
        Command::Nash(a) => &a.common,
        Command::Stackelberg(a) => &a.common,
        Command::Optimum(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Simulate(a) => &a.common,
        Command::Sweep(a) => &a.common,
    };
    let file = FileValues::load(common.config.as_ref())?;
    let r = resolve(common, &file)?;
    let table = match cmd {
        Command::Metrics(a) => metrics_table(a, &r, &file)?,
        Command::Nash(_) => sweep_table(&r, Solve::Nash, false)?,
        Command::Stackelberg(a) => {
            let side = file
                .pick(a.leader, "leader", parse_enum::<Side>)?
                .unwrap_or(Side::Both);
            stackelberg_table(&r, side)?
        }
        Command::Optimum(a) => optimum_table(a, &r, &file)?,
        Command::Verify(a) => verify_table(a, &r, &file)?,
        Command::Simulate(a) => simulate_table(a, &r, &file)?,
        Command::Sweep(a) => {
            let solve = file
                .pick(a.solve, "solve", parse_enum::<Solve>)?
                .unwrap_or(Solve::All);
            sweep_table(&r, solve, true)?
        }
    };
    Ok((table, r.format, r.out))
}

fn metrics_table(a: &MetricsArgs, r: &Resolved, file: &FileValues) -> CliResult<Table> {
    let kind = file
        .pick(a.kind, "kind", parse_player)?
        .unwrap_or(Player::Dsrc);
    let opp = file
        .pick(a.opp_tau.clone(), "opp-tau", parse_reals)?
        .map_or(vec![0.2], |l| l.0);
    let mut opp = opp;
    opp.sort_by(f64::total_cmp);
    let mut t = Table::new(&[
        "nd",
        "nw",
        "w_idle",
        "w_col",
        "swept",
        "tau_d",
        "tau_w",
        "age",
        "throughput",
        "cost",
    ]);
    for &(nd, nw) in &r.cells {
        for &w in &r.weights {
            let c = r.config(nd, nw, w)?;
            for &o in &opp {
                if !(o > 0.0 && o < 1.0) {
                    return Err(config_err(format!("`opp-tau` must lie in (0, 1), got {o}")));
                }
                for tau in r.grid.points() {
                    let p = StrategyPair::from_roles(kind, tau, o);
                    let mut row = row![nd, nw, w.0, w.1, kind.as_str(), p.tau_d, p.tau_w];
                    row.push(Cell::opt(aoi_closed_form(p, &c).ok()));
                    row.push(Cell::opt(throughput_closed_form(p, &c).ok()));
                    row.push(Cell::Num(wastage_cost(p, &c)));
                    t.rows.push(row);
                }
            }
        }
    }
    Ok(t)
}

fn game_cells(r: &Resolved) -> Vec<(u32, u32, (f64, f64))> {
    let mut cells: Vec<_> = r
        .cells
        .iter()
        .flat_map(|&(d, w)| r.weights.iter().map(move |wt| (d, w, *wt)))
        .collect();
    cells.sort_by(|a, b| {
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then(a.2 .0.total_cmp(&b.2 .0))
            .then(a.2 .1.total_cmp(&b.2 .1))
    });
    cells
}

fn surfaces_for(r: &Resolved, cells: &[(u32, u32, (f64, f64))]) -> CliResult<Vec<PayoffSurfaces>> {
    cells
        .par_iter()
        .map(|&(nd, nw, w)| Ok(PayoffSurfaces::build(r.config(nd, nw, w)?, r.grid)?))
        .collect()
}

const GAME_COLUMNS: &[&str] = &[
    "nd",
    "nw",
    "w_idle",
    "w_col",
    "solution",
    "tau_d",
    "tau_w",
    "age",
    "throughput",
    "u_d",
    "u_w",
];

/// Nash rows per cell, or Nash and Stackelberg rows with a `solution` column.
fn sweep_table(r: &Resolved, solve: Solve, with_solution: bool) -> CliResult<Table> {
    let cells = game_cells(r);
    let surfaces = surfaces_for(r, &cells)?;
    let mut columns = GAME_COLUMNS.to_vec();
    if !with_solution {
        columns.retain(|c| *c != "solution");
    }
    let mut t = Table::new(&columns);
    let blocks: Vec<Vec<Vec<Cell>>> = cells
        .par_iter()
        .zip(surfaces.par_iter())
        .map(|(&(nd, nw, w), s)| {
            let mut rows = Vec::new();
            let mut push = |label: &str, p: StrategyPair, age: f64, thr: f64| {
                let (i, j) = s.locate(p).expect("solutions lie on the grid");
                let mut row = row![nd, nw, w.0, w.1];
                if with_solution {
                    row.push(Cell::from(label));
                }
                row.extend(row![
                    p.tau_d,
                    p.tau_w,
                    age,
                    thr,
                    s.dsrc_payoff_at(i, j),
                    s.wifi_payoff_at(i, j)
                ]);
                rows.push(row);
            };
            if matches!(solve, Solve::Nash | Solve::All) {
                for ne in enumerate_nash(s, r.eps_tie) {
                    push("nash", ne.pair, ne.age, ne.throughput);
                }
            }
            if matches!(solve, Solve::Stackelberg | Solve::All) {
                for (label, leader) in [("se-dsrc", Player::Dsrc), ("se-wifi", Player::Wifi)] {
                    let se = solve_stackelberg(leader, s, r.eps_tie);
                    push(label, se.pair, se.age, se.throughput);
                }
            }
            rows
        })
        .collect();
    for b in blocks {
        t.rows.extend(b);
    }
    Ok(t)
}

fn stackelberg_table(r: &Resolved, side: Side) -> CliResult<Table> {
    let cells = game_cells(r);
    let surfaces = surfaces_for(r, &cells)?;
    let mut t = Table::new(&[
        "nd",
        "nw",
        "w_idle",
        "w_col",
        "leader",
        "tau_d",
        "tau_w",
        "age",
        "throughput",
        "leader_payoff",
        "follower_payoff",
    ]);
    let blocks: Vec<Vec<Vec<Cell>>> = cells
        .par_iter()
        .zip(surfaces.par_iter())
        .map(|(&(nd, nw, w), s)| {
            side.players()
                .into_iter()
                .map(|leader| {
                    let se = solve_stackelberg(leader, s, r.eps_tie);
                    row![
                        nd,
                        nw,
                        w.0,
                        w.1,
                        leader.as_str(),
                        se.pair.tau_d,
                        se.pair.tau_w,
                        se.age,
                        se.throughput,
                        se.leader_guaranteed_payoff,
                        se.follower_payoff
                    ]
                })
                .collect()
        })
        .collect();
    for b in blocks {
        t.rows.extend(b);
    }
    Ok(t)
}

fn optimum_table(a: &OptimumArgs, r: &Resolved, file: &FileValues) -> CliResult<Table> {
    let side = file
        .pick(a.kind, "kind", parse_enum::<Side>)?
        .unwrap_or(Side::Both);
    let mut ns = file
        .pick(a.n.clone(), "n", parse_counts)?
        .map_or(vec![2, 4, 10], |l| l.0);
    ns.sort_unstable();
    ns.dedup();
    let refine = file.pick(a.refine, "refine", parse_num)?.unwrap_or(1e-5);
    let mut t = Table::new(&["kind", "n", "tau_star", "value"]);
    for player in side.players() {
        for &n in &ns {
            let o = single_network_optimum(player, n, r.beta, r.grid, refine)?;
            t.rows.push(row![player.as_str(), n, o.tau_star, o.value]);
        }
    }
    Ok(t)
}

fn verify_table(a: &VerifyArgs, r: &Resolved, file: &FileValues) -> CliResult<Table> {
    let side = file
        .pick(a.kind, "kind", parse_enum::<Side>)?
        .unwrap_or(Side::Both);
    let mut opp = file
        .pick(a.opp_tau.clone(), "opp-tau", parse_reals)?
        .map_or_else(|| (1..=9).map(|k| f64::from(k) / 10.0).collect(), |l| l.0);
    opp.sort_by(f64::total_cmp);
    let step = file
        .pick(a.scan_step, "scan-step", parse_num)?
        .unwrap_or(0.001);
    if !(step > 0.0 && step < 0.5) {
        return Err(config_err(format!(
            "`scan-step` must lie in (0, 0.5), got {step}"
        )));
    }
    let intervals = ((1.0 - 2.0 * step) / step).round();
    let scan = GridSpec::new(step, step + intervals * step, step)?;

    let mut cases = Vec::new();
    for (nd, nw, w) in game_cells(r) {
        let c = r.config(nd, nw, w)?;
        for player in side.players() {
            for &o in &opp {
                cases.push((player, c, o));
            }
        }
    }
    let reports = verify_many(&cases, scan)?;
    let mut t = Table::new(&[
        "player",
        "nd",
        "nw",
        "beta",
        "w_idle",
        "w_col",
        "opp_tau",
        "points",
        "sign_changes",
        "pattern_ok",
        "tau_prime_bound",
        "alpha2_root",
    ]);
    for q in reports {
        t.rows.push(report_row(&q));
    }
    Ok(t)
}

fn report_row(q: &QuasiConcavityReport) -> Vec<Cell> {
    let mut row = row![
        q.player.as_str(),
        q.n_dsrc,
        q.n_wifi,
        q.beta,
        q.w_idle,
        q.w_col,
        q.fixed_opponent,
        q.points_scanned,
        q.sign_change_count,
        q.sign_pattern_ok
    ];
    row.push(Cell::opt(q.tau_prime_bound));
    row.push(Cell::opt(q.alpha2_root));
    row
}

fn simulate_table(a: &SimulateArgs, r: &Resolved, file: &FileValues) -> CliResult<Table> {
    let v = match file.pick(a.taus.clone(), "taus", parse_reals)? {
        Some(List(taus)) => AccessVector::untagged(taus)?,
        None => {
            let &[(nd, nw)] = r.cells.as_slice() else {
                return Err(config_err(
                    "simulate takes a single `nd`, `nw` cell or explicit `taus`",
                ));
            };
            let tau_d = file.pick(a.tau_d, "tau-d", parse_num)?;
            let tau_w = file.pick(a.tau_w, "tau-w", parse_num)?;
            let need = |v: Option<f64>, n: u32, key: &str| match (v, n) {
                (Some(x), _) => Ok(x),
                (None, 0) => Ok(0.0),
                (None, _) => Err(config_err(format!("`{key}` is required"))),
            };
            AccessVector::from_counts(need(tau_d, nd, "tau-d")?, nd, need(tau_w, nw, "tau-w")?, nw)?
        }
    };
    let horizon = file
        .pick(a.horizon, "horizon", parse_num)?
        .unwrap_or(1_000_000);
    let seed = file.pick(a.seed, "seed", parse_num)?.unwrap_or(0);
    let cfg = match file.pick(a.warmup, "warmup", parse_num)? {
        Some(w) => SimConfig::with_warmup(horizon, seed, w)?,
        None => SimConfig::new(horizon, seed)?,
    };
    let s = crate::model::SlotLengths::from_beta(r.beta)?;
    let sim = run_simulation(&v, &s, &cfg)?;

    let mut t = Table::new(&[
        "quantity",
        "node",
        "simulated",
        "std_err",
        "analytic",
        "delta",
        "z_score",
    ]);
    let mut push = |q: &str, node: Option<usize>, e: Option<Estimate>, analytic: Option<f64>| {
        let mut row = vec![Cell::from(q), node.map_or(Cell::Empty, Cell::from)];
        row.push(Cell::opt(e.map(|e| e.mean)));
        row.push(Cell::opt(e.map(|e| e.std_err)));
        row.push(Cell::opt(analytic));
        let both = e.zip(analytic);
        row.push(Cell::opt(both.map(|(e, x)| e.mean - x)));
        row.push(Cell::opt(both.map(|(e, x)| e.z_score(x))));
        t.rows.push(row);
    };
    for (i, node) in sim.nodes.iter().enumerate() {
        let m = inter_update_moments(&v, &s, i).ok();
        push("age", Some(i), Some(node.age), aoi_node(&v, &s, i).ok());
        push(
            "throughput",
            Some(i),
            Some(node.throughput),
            per_node_throughput(&v, &s, i).ok(),
        );
        push("z_mean", Some(i), node.z_mean, m.map(|m| m.first));
        push("z_second", Some(i), node.z_second, m.map(|m| m.second));
    }
    let p_idle = v.joint_idle_prob();
    let p_succ = v.success_prob_total();
    let [fi, fs, fc] = sim.slots.frequencies();
    push("idle_fraction", None, Some(fi), Some(p_idle));
    push("success_fraction", None, Some(fs), Some(p_succ));
    push(
        "collision_fraction",
        None,
        Some(fc),
        Some(1.0 - p_idle - p_succ),
    );
    Ok(t)
}
