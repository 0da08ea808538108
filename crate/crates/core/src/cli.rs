//! Command-line front end.
//!
//! Every subcommand writes one table, as CSV (default) or JSON, together with
//! a metadata block holding the resolved parameters. Feeding a JSON output
//! (or any flat key/value file) back through `--config` reproduces it.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 solver failure, 4 oracle
//! truncation failure. Errors go to stderr prefixed `error[E<code>]:`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::algebra::{commutator_defect, commutator_off_diagonal, deformed_annihilator, default_truncation, ExpansionOrder};
use crate::error::Error;
use crate::model::{
    deviation_curve, solve_deformed_steady_state_with, spectrum_surface, stationary_moments, undeformed_steady_state,
    ModelParams, SolverOptions, Spectrum, SpectrumVariant,
};
use crate::oracle::{truncation_convergence, RegressionOracle};

pub const OUTPUT_DIR_ENV: &str = "DEFORMED_BEC_OUTPUT_DIR";
pub const TOOL_NAME: &str = "deformed-bec";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_ARGS: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

const COLUMNS_HELP: &str = "\
Output columns (CSV header / JSON record keys):
  steady-state     N,re_beta,im_beta,re_beta_inf,im_beta_inf,residual,re_lambda1,im_lambda1,re_lambda2,im_lambda2,stable
  deviation-curve  N,abs_beta,abs_beta_inf,deviation
  spectrum         N,omega,S
  oracle-compare   N,n_cut,re_beta,im_beta,re_beta_oracle,im_beta_oracle,rel_error,occupation_linear,occupation_oracle,s_paper_0,s_oracle_0,ratio_0
  algebra-check    n,commutator_diag,expected,defect,boundary,expansion_error

Grids are written start:stop:step (inclusive) or as comma-separated lists.
CSV files start with '#'-prefixed metadata lines; numbers use 9 significant digits.
Without --output, results go to $DEFORMED_BEC_OUTPUT_DIR/<subcommand>.<ext> if set, else stdout.";

#[derive(Debug, Parser)]
#[command(name = TOOL_NAME, version, about = "Scattered-light spectrum of a deformed Bose-Einstein condensate", after_help = COLUMNS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deformed and linear steady states with drift eigenvalues.
    SteadyState {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        atoms: AtomsArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// ||beta| - |beta_inf|| against the number of atoms.
    DeviationCurve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        atoms: AtomsArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Spectrum S(omega) on an (N, omega) grid.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        atoms: AtomsArgs,
        /// Frequency grid start:stop:step in units of gamma.
        #[arg(long, allow_hyphen_values = true)]
        omega_range: Option<String>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Semiclassical results against the Lindblad master-equation oracle.
    OracleCompare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        atoms: AtomsArgs,
        /// Fock truncation (default from the mean amplitude).
        #[arg(long)]
        n_cut: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Commutator and expansion report for the deformed annihilator.
    AlgebraCheck {
        /// Number of atoms; sets eta = 1/N.
        #[arg(long)]
        n: Option<f64>,
        /// Deformation parameter (overrides --n).
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        n_cut: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Detuning in units of gamma.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Laser coupling in units of gamma.
    #[arg(long)]
    g: Option<f64>,
    /// One-atom linewidth (the rate unit).
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct AtomsArgs {
    /// Single number of atoms.
    #[arg(long)]
    n: Option<f64>,
    /// Comma-separated numbers of atoms.
    #[arg(long)]
    n_list: Option<String>,
    /// Atom-number grid start:stop:step.
    #[arg(long)]
    n_range: Option<String>,
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Flat key/value config file (TOML or JSON; a previous JSON output works).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Paper,
    Physical,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn args(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID_ARGS, message: message.into() }
    }

    fn solver(message: impl Into<String>) -> Self {
        CliError { code: EXIT_SOLVER, message: message.into() }
    }

    fn oracle(message: impl Into<String>) -> Self {
        CliError { code: EXIT_ORACLE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Domain { .. } => CliError::args(e.to_string()),
            Error::NoConvergence { .. } | Error::Unstable { .. } | Error::Overflow { .. } => CliError::solver(e.to_string()),
            Error::SingularSolve(_) | Error::Truncation(_) => CliError::oracle(e.to_string()),
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            eprint!("error[E{EXIT_INVALID_ARGS}]: {}", msg.strip_prefix("error: ").unwrap_or(&msg));
            return EXIT_INVALID_ARGS;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error[E{}]: {}", e.code, e.message);
            e.code
        }
    }
}

/// Flag values overlaid on config-file values.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(config: Option<&Path>) -> Result<Self, CliError> {
        let values = match config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        Ok(Settings { values })
    }

    /// Applies flags; any flag from `group` clears the config's whole group.
    fn overlay(&mut self, group: &[&str], flags: &[(&str, Option<String>)]) {
        if flags.iter().any(|(_, v)| v.is_some()) {
            for key in group {
                self.values.remove(*key);
            }
        }
        for (key, value) in flags {
            if let Some(v) = value {
                self.values.insert(key.to_string(), v.clone());
            }
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            Some(s) => parse_f64(key, s),
            None => Ok(default),
        }
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::args(format!("{key}: expected a non-negative integer, got `{s}`"))))
            .transpose()
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::args(format!("{key}: expected a number, got `{s}`")))?;
    if !v.is_finite() {
        return Err(CliError::args(format!("{key}: expected a finite number, got `{s}`")));
    }
    Ok(v)
}

const PARAM_KEYS: &[&str] = &["delta", "g", "gamma", "n", "n_list", "n_range", "omega_range", "variant", "n_cut", "eta", "format"];

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::args(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|m| CliError::args(format!("config {}: {m}", path.display())))
}

/// Reads a flat key/value document. JSON objects may wrap the keys in
/// `metadata.parameters` (the layout of JSON outputs) or `parameters`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let flat: Vec<(String, String)> = if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let table = doc
            .pointer("/metadata/parameters")
            .or_else(|| doc.get("parameters"))
            .unwrap_or(&doc)
            .as_object()
            .ok_or("expected a JSON object")?;
        table
            .iter()
            .map(|(k, v)| scalar_to_string(v).map(|s| (k.clone(), s)).ok_or_else(|| format!("key `{k}` is not a scalar")))
            .collect::<Result<_, _>>()?
    } else {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        doc.iter()
            .map(|(k, v)| {
                let s = match v {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Float(f) => f.to_string(),
                    toml::Value::Boolean(b) => b.to_string(),
                    _ => return Err(format!("key `{k}` is not a scalar")),
                };
                Ok((k.clone(), s))
            })
            .collect::<Result<_, _>>()?
    };
    let mut out = BTreeMap::new();
    for (k, v) in flat {
        let key = k.replace('-', "_");
        if !PARAM_KEYS.contains(&key.as_str()) {
            return Err(format!("unknown key `{k}`"));
        }
        out.insert(key, v);
    }
    Ok(out)
}

fn scalar_to_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Inclusive grid `start:stop:step`.
pub fn parse_range(key: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::args(format!("{key}: expected start:stop:step, got `{spec}`")));
    }
    let start = parse_f64(key, parts[0])?;
    let stop = parse_f64(key, parts[1])?;
    let step = parse_f64(key, parts[2])?;
    if !(step > 0.0) {
        return Err(CliError::args(format!("{key}: step must be positive")));
    }
    if !(start < stop) {
        return Err(CliError::args(format!("{key}: start must be below stop")));
    }
    let span = (stop - start) / step;
    let count = span.round();
    if count > 10_000_000.0 {
        return Err(CliError::args(format!("{key}: grid too large")));
    }
    if (span - count).abs() < 1e-9 * span.max(1.0) {
        let k_max = count as usize;
        // interpolate so both endpoints are exact
        Ok((0..=k_max).map(|k| start + (stop - start) * (k as f64 / k_max as f64)).collect())
    } else {
        let k_max = span.floor() as usize;
        Ok((0..=k_max).map(|k| start + step * k as f64).collect())
    }
}

fn parse_list(key: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::args(format!("{key}: empty list")));
    }
    Ok(values)
}

/// Resolved atom-number grid with the key that produced it.
fn atom_grid(settings: &Settings, default: (&str, &str)) -> Result<(Vec<f64>, (String, String)), CliError> {
    for key in ["n", "n_list", "n_range"] {
        if let Some(v) = settings.get(key) {
            let grid = match key {
                "n" => vec![parse_f64(key, v)?],
                "n_list" => parse_list(key, v)?,
                _ => parse_range(key, v)?,
            };
            return Ok((grid, (key.to_string(), v.to_string())));
        }
    }
    let (key, v) = default;
    let grid = if key == "n_range" { parse_range(key, v)? } else { parse_list(key, v)? };
    Ok((grid, (key.to_string(), v.to_string())))
}

const ATOM_KEYS: &[&str] = &["n", "n_list", "n_range"];

fn overlay_model(settings: &mut Settings, m: &ModelArgs) {
    settings.overlay(&[], &[("delta", m.delta.map(fmt_param)), ("g", m.g.map(fmt_param)), ("gamma", m.gamma.map(fmt_param))]);
}

fn overlay_atoms(settings: &mut Settings, a: &AtomsArgs) {
    settings.overlay(ATOM_KEYS, &[("n", a.n.map(fmt_param)), ("n_list", a.n_list.clone()), ("n_range", a.n_range.clone())]);
}

fn overlay_io(settings: &mut Settings, io: &IoArgs) {
    settings.overlay(&[], &[("format", io.format.map(|f| f.name().to_string()))]);
}

fn fmt_param(v: f64) -> String {
    v.to_string()
}

fn resolve_format(settings: &Settings) -> Result<Format, CliError> {
    match settings.get("format") {
        None | Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(CliError::args(format!("format: expected csv|json, got `{other}`"))),
    }
}

fn base_params(settings: &Settings, default_g: f64, n: f64) -> Result<ModelParams, CliError> {
    let delta = settings.f64_or("delta", 0.0)?;
    let g = settings.f64_or("g", default_g)?;
    let gamma = settings.f64_or("gamma", 1.0)?;
    Ok(ModelParams::new(delta, g, gamma, n)?)
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
}

struct Table {
    subcommand: &'static str,
    parameters: Vec<(String, String)>,
    summary: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

fn sci(v: f64) -> String {
    if v.is_finite() {
        // + 0.0 folds -0 into 0
        format!("{:.8e}", v + 0.0)
    } else {
        "NaN".to_string()
    }
}

fn cell_text(c: Cell) -> String {
    match c {
        Cell::Num(v) => sci(v),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn cell_json(c: Cell) -> Value {
    match c {
        Cell::Num(v) if v.is_finite() => {
            let rounded: f64 = sci(v).parse().expect("formatted float parses");
            json!(rounded)
        }
        Cell::Num(_) => Value::Null,
        Cell::Int(i) => json!(i),
        Cell::Bool(b) => json!(b),
    }
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# tool: {TOOL_NAME} {TOOL_VERSION}").unwrap();
        writeln!(out, "# subcommand: {}", self.subcommand).unwrap();
        for (k, v) in &self.parameters {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        for (k, v) in &self.summary {
            writeln!(out, "# summary.{k}: {v}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|&c| cell_text(c)).collect();
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        out
    }

    fn render_json(&self) -> String {
        let params: Map<String, Value> = self.parameters.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let rec: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, &cell)| (c.to_string(), cell_json(cell))).collect();
                Value::Object(rec)
            })
            .collect();
        let doc = json!({
            "metadata": {
                "tool": TOOL_NAME,
                "version": TOOL_VERSION,
                "subcommand": self.subcommand,
                "parameters": params,
            },
            "summary": summary,
            "columns": self.columns,
            "records": records,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

fn emit(table: &Table, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    let text = table.render(format);
    let target = match output {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", table.subcommand, format.name()))),
    };
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| CliError::args(format!("cannot create {}: {e}", parent.display())))?;
            }
            std::fs::write(&path, text).map_err(|e| CliError::args(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn model_parameters(settings: &Settings, default_g: f64, atoms: &(String, String)) -> Result<Vec<(String, String)>, CliError> {
    Ok(vec![
        ("delta".into(), fmt_param(settings.f64_or("delta", 0.0)?)),
        ("g".into(), fmt_param(settings.f64_or("g", default_g)?)),
        ("gamma".into(), fmt_param(settings.f64_or("gamma", 1.0)?)),
        atoms.clone(),
    ])
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::SteadyState { model, atoms, io } => {
            let mut s = Settings::load(io.config.as_deref())?;
            overlay_model(&mut s, &model);
            overlay_atoms(&mut s, &atoms);
            overlay_io(&mut s, &io);
            let format = resolve_format(&s)?;
            let table = steady_state_table(&s)?;
            emit(&table, format, io.output.as_deref())
        }
        Command::DeviationCurve { model, atoms, io } => {
            let mut s = Settings::load(io.config.as_deref())?;
            overlay_model(&mut s, &model);
            overlay_atoms(&mut s, &atoms);
            overlay_io(&mut s, &io);
            let format = resolve_format(&s)?;
            let table = deviation_table(&s)?;
            emit(&table, format, io.output.as_deref())
        }
        Command::Spectrum { model, atoms, omega_range, variant, io } => {
            let mut s = Settings::load(io.config.as_deref())?;
            overlay_model(&mut s, &model);
            overlay_atoms(&mut s, &atoms);
            let variant = variant.map(|v| match v {
                VariantArg::Paper => "paper".to_string(),
                VariantArg::Physical => "physical".to_string(),
            });
            s.overlay(&[], &[("omega_range", omega_range), ("variant", variant)]);
            overlay_io(&mut s, &io);
            let format = resolve_format(&s)?;
            let table = spectrum_table(&s)?;
            emit(&table, format, io.output.as_deref())
        }
        Command::OracleCompare { model, atoms, n_cut, io } => {
            let mut s = Settings::load(io.config.as_deref())?;
            overlay_model(&mut s, &model);
            overlay_atoms(&mut s, &atoms);
            s.overlay(&[], &[("n_cut", n_cut.map(|v| v.to_string()))]);
            overlay_io(&mut s, &io);
            let format = resolve_format(&s)?;
            let table = oracle_table(&s)?;
            emit(&table, format, io.output.as_deref())
        }
        Command::AlgebraCheck { n, eta, n_cut, io } => {
            let mut s = Settings::load(io.config.as_deref())?;
            s.overlay(&["n", "eta"], &[("n", n.map(fmt_param)), ("eta", eta.map(fmt_param))]);
            s.overlay(&[], &[("n_cut", n_cut.map(|v| v.to_string()))]);
            overlay_io(&mut s, &io);
            let format = resolve_format(&s)?;
            let table = algebra_table(&s)?;
            emit(&table, format, io.output.as_deref())
        }
    }
}

fn steady_state_table(s: &Settings) -> Result<Table, CliError> {
    let (grid, atoms) = atom_grid(s, ("n_list", "100"))?;
    let opts = SolverOptions::default();
    let mut rows = Vec::new();
    for &n in &grid {
        let p = base_params(s, 2.5, n)?;
        let st = solve_deformed_steady_state_with(&p, &opts)?;
        let inf = undeformed_steady_state(&p);
        let (l1, l2) = st.drift_eigenvalues;
        rows.push(vec![
            Cell::Num(n),
            Cell::Num(st.beta.re),
            Cell::Num(st.beta.im),
            Cell::Num(inf.re),
            Cell::Num(inf.im),
            Cell::Num(st.residual_norm),
            Cell::Num(l1.re),
            Cell::Num(l1.im),
            Cell::Num(l2.re),
            Cell::Num(l2.im),
            Cell::Bool(st.stable),
        ]);
    }
    Ok(Table {
        subcommand: "steady-state",
        parameters: model_parameters(s, 2.5, &atoms)?,
        summary: vec![],
        columns: vec![
            "N", "re_beta", "im_beta", "re_beta_inf", "im_beta_inf", "residual", "re_lambda1", "im_lambda1", "re_lambda2",
            "im_lambda2", "stable",
        ],
        rows,
    })
}

fn report_skipped(skipped: &[(f64, String)], total: usize) -> Result<Vec<(String, String)>, CliError> {
    for (n, e) in skipped {
        eprintln!("warning: N = {n}: {e}; row skipped");
    }
    if total > 0 && skipped.len() == total {
        return Err(CliError::solver(format!("every row failed; first: N = {}: {}", skipped[0].0, skipped[0].1)));
    }
    if skipped.is_empty() {
        return Ok(vec![]);
    }
    let list: Vec<String> = skipped.iter().map(|(n, _)| fmt_param(*n)).collect();
    Ok(vec![("skipped_n".into(), list.join(","))])
}

fn deviation_table(s: &Settings) -> Result<Table, CliError> {
    let (grid, atoms) = atom_grid(s, ("n_range", "20:200:5"))?;
    let base = base_params(s, 2.5, 2.0)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for row in deviation_curve(&base, &grid) {
        match row.error {
            None => rows.push(vec![
                Cell::Num(row.n_atoms),
                Cell::Num(row.abs_beta),
                Cell::Num(row.abs_beta_inf),
                Cell::Num(row.deviation),
            ]),
            Some(e) => skipped.push((row.n_atoms, e)),
        }
    }
    let summary = report_skipped(&skipped, grid.len())?;
    Ok(Table {
        subcommand: "deviation-curve",
        parameters: model_parameters(s, 2.5, &atoms)?,
        summary,
        columns: vec!["N", "abs_beta", "abs_beta_inf", "deviation"],
        rows,
    })
}

fn spectrum_table(s: &Settings) -> Result<Table, CliError> {
    let (grid, atoms) = atom_grid(s, ("n_list", "100"))?;
    let omega_spec = s.get("omega_range").unwrap_or("-20:20:0.1").to_string();
    let omega = parse_range("omega_range", &omega_spec)?;
    let variant: SpectrumVariant = s.get("variant").unwrap_or("paper").parse()?;
    let base = base_params(s, 2.5, 2.0)?;
    let surface = spectrum_surface(&base, &grid, &omega, variant);
    let skipped: Vec<(f64, String)> = surface.failed.iter().map(|f| (f.n_atoms, f.error.to_string())).collect();
    let summary = report_skipped(&skipped, grid.len())?;
    let rows = surface.points.iter().map(|pt| vec![Cell::Num(pt.n_atoms), Cell::Num(pt.omega), Cell::Num(pt.value)]).collect();
    let mut parameters = model_parameters(s, 2.5, &atoms)?;
    parameters.push(("omega_range".into(), omega_spec));
    parameters.push(("variant".into(), variant.to_string()));
    Ok(Table { subcommand: "spectrum", parameters, summary, columns: vec!["N", "omega", "S"], rows })
}

fn oracle_table(s: &Settings) -> Result<Table, CliError> {
    const ORACLE_G: f64 = 0.5;
    let (grid, atoms) = atom_grid(s, ("n_list", "25,50,100"))?;
    let n_cut_flag = s.usize_opt("n_cut")?;
    let mut rows = Vec::new();
    let mut ratio_note = Vec::new();
    for &n in &grid {
        let p = base_params(s, ORACLE_G, n)?;
        let spec = Spectrum::new(&p)?;
        let beta = spec.steady.beta;
        let n_cut = n_cut_flag.unwrap_or_else(|| default_truncation(beta.norm(), n));
        if n_cut < 2 {
            return Err(CliError::args("n_cut must be at least 2"));
        }
        let report = truncation_convergence(&p, &[n_cut, n_cut + 5])?;
        if !report.converged() {
            let (a, b) = (&report.rows[0], &report.rows[1]);
            return Err(CliError::oracle(format!(
                "N = {n}: truncation n_cut = {n_cut} not converged (|d<b>| = {:e}, |d<n>| = {:e} against n_cut = {})",
                (a.mean_amplitude - b.mean_amplitude).norm(),
                (a.occupation - b.occupation).abs(),
                b.n_cut
            )));
        }
        let oracle = RegressionOracle::new(&p, n_cut)?;
        let b_oracle = oracle.mean_amplitude();
        let rel_error = if beta.norm() > 0.0 { (b_oracle - beta).norm() / beta.norm() } else { b_oracle.norm() };
        let occupation_linear = stationary_moments(&spec.coeffs, p.big_gamma())?.occupation;
        let s_paper = spec.eval(0.0, SpectrumVariant::Paper);
        let s_oracle = oracle.spectrum_at(0.0)?;
        let ratio = if s_paper > 0.0 { s_oracle / s_paper } else { f64::NAN };
        if ratio.is_finite() {
            ratio_note.push(format!("{}:{}", fmt_param(n), sci(ratio * std::f64::consts::PI / p.big_gamma())));
        }
        rows.push(vec![
            Cell::Num(n),
            Cell::Int(n_cut as i64),
            Cell::Num(beta.re),
            Cell::Num(beta.im),
            Cell::Num(b_oracle.re),
            Cell::Num(b_oracle.im),
            Cell::Num(rel_error),
            Cell::Num(occupation_linear),
            Cell::Num(oracle.fluctuation_occupation()),
            Cell::Num(s_paper),
            Cell::Num(s_oracle),
            Cell::Num(ratio),
        ]);
    }
    let mut parameters = model_parameters(s, ORACLE_G, &atoms)?;
    if let Some(c) = n_cut_flag {
        parameters.push(("n_cut".into(), c.to_string()));
    }
    let mut summary = vec![];
    if !ratio_note.is_empty() {
        // ratio_0 / (Gamma / pi) per N: 1 means S_oracle = (2 Gamma / 2 pi) |B|^2/|Xi|^2
        summary.push(("ratio_over_gamma_by_pi".into(), ratio_note.join(",")));
    }
    Ok(Table {
        subcommand: "oracle-compare",
        parameters,
        summary,
        columns: vec![
            "N", "n_cut", "re_beta", "im_beta", "re_beta_oracle", "im_beta_oracle", "rel_error", "occupation_linear",
            "occupation_oracle", "s_paper_0", "s_oracle_0", "ratio_0",
        ],
        rows,
    })
}

fn algebra_table(s: &Settings) -> Result<Table, CliError> {
    let (eta, key) = match (s.get("eta"), s.get("n")) {
        (Some(e), _) => (parse_f64("eta", e)?, ("eta".to_string(), e.to_string())),
        (None, Some(n)) => {
            let n_atoms = parse_f64("n", n)?;
            if !(n_atoms >= 2.0) {
                return Err(CliError::args("n must be >= 2"));
            }
            (1.0 / n_atoms, ("n".to_string(), n.to_string()))
        }
        (None, None) => (0.01, ("n".to_string(), "100".to_string())),
    };
    if !(0.0..=0.5).contains(&eta) {
        return Err(CliError::args(format!("eta must lie in [0, 0.5], got {eta}")));
    }
    let closure = if eta > 0.0 { (1.0 / eta + 1.0 + 1e-9).floor() as usize } else { usize::MAX };
    let n_cut = s.usize_opt("n_cut")?.unwrap_or(20.min(closure));
    if n_cut < 1 {
        return Err(CliError::args("n_cut must be at least 1"));
    }
    let defects = commutator_defect(n_cut, eta)?;
    let exact = deformed_annihilator(n_cut, eta, ExpansionOrder::Exact)?;
    let first = deformed_annihilator(n_cut, eta, ExpansionOrder::First)?;
    let off_diag = commutator_off_diagonal(n_cut, eta)?;
    let interior = defects.iter().filter(|d| !d.boundary).fold(0.0_f64, |m, d| m.max(d.defect.abs()));
    let rows = defects
        .iter()
        .map(|d| {
            let expansion = if d.n == 0 { 0.0 } else { (exact.get(d.n - 1, d.n) - first.get(d.n - 1, d.n)).norm() };
            vec![
                Cell::Int(d.n as i64),
                Cell::Num(d.diagonal),
                Cell::Num(d.expected),
                Cell::Num(d.defect),
                Cell::Bool(d.boundary),
                Cell::Num(expansion),
            ]
        })
        .collect();
    Ok(Table {
        subcommand: "algebra-check",
        parameters: vec![key, ("n_cut".into(), n_cut.to_string())],
        summary: vec![
            ("max_interior_defect".into(), sci(interior)),
            ("max_off_diagonal".into(), sci(off_diag)),
        ],
        columns: vec!["n", "commutator_diag", "expected", "defect", "boundary", "expansion_error"],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let g = parse_range("x", "-20:20:0.1").unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(g[0], -20.0);
        assert_eq!(g[200], 0.0);
        assert_eq!(g[400], 20.0);
        let g = parse_range("x", "20:200:5").unwrap();
        assert_eq!(g.len(), 37);
        assert_eq!(g[16], 100.0);
        let g = parse_range("x", "0:1:0.3").unwrap();
        assert_eq!(g.len(), 4);
        assert!(parse_range("x", "1:0:0.1").is_err());
        assert!(parse_range("x", "0:1:0").is_err());
        assert!(parse_range("x", "0:1").is_err());
    }

    #[test]
    fn config_formats() {
        let t = parse_config("delta = 0.5\ng = 2\nn-list = \"25,50\"\n").unwrap();
        assert_eq!(t["delta"], "0.5");
        assert_eq!(t["g"], "2");
        assert_eq!(t["n_list"], "25,50");
        let j = parse_config(r#"{"metadata": {"tool": "x", "parameters": {"delta": "1", "variant": "physical"}}}"#).unwrap();
        assert_eq!(j["variant"], "physical");
        assert_eq!(j.len(), 2);
        let flat = parse_config(r#"{"g": 2.5, "n": 100}"#).unwrap();
        assert_eq!(flat["n"], "100");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("g = [1, 2]").is_err());
    }

    #[test]
    fn scientific_format() {
        assert_eq!(sci(0.073593128807148), "7.35931288e-2");
        assert_eq!(sci(100.0), "1.00000000e2");
        assert_eq!(sci(f64::NAN), "NaN");
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::InvalidParams("x".into())).code, EXIT_INVALID_ARGS);
        assert_eq!(CliError::from(Error::Unstable { max_re_lambda: 1.0 }).code, EXIT_SOLVER);
        assert_eq!(CliError::from(Error::SingularSolve("x".into())).code, EXIT_ORACLE);
    }
}
