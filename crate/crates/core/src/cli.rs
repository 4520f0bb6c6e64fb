//! The `gls` command line: `norm`, `verify`, `tail` and `convolve`.
//!
//! Every option can also come from a `key=value` file given with `--config`;
//! flags win over the file. Keys are the long flag names (`p-max` and
//! `p_max` are both accepted). Exit status: 0 success, 1 a checked
//! inequality failed (or, with `--strict`, a norm diverged), 2 bad usage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{GlsError, Result};
use crate::group::{self, FiniteGroup, GroupFunction, GroupKind};
use crate::norms::{self, NormResult};
use crate::pgrid::{GridSequence, RestrictedSet};
use crate::psi::{GeneratingFunction, PsiSpec};
use crate::report::{opt_real, real, Table};
use crate::rv::RandomVariableModel;
use crate::suites::{self, Suite, SuiteConfig};
use crate::tails;

pub const SEED_ENV: &str = "GLS_DEFAULT_SEED";
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_PSI: &str = "power_slowvary(r=2, delta=0)";
const DEFAULT_TAIL_GRID: &str = "integers:M=50";
const DEFAULT_TAIL_N: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "gls", version, about = "Grand Lebesgue Space norms, equivalence constants, tail envelopes and group convolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full, restricted (--set) and discrete (--grid) norms of a model.
    Norm(Flags),
    /// Run a seeded verification suite and write one CSV row per case.
    Verify(Flags),
    /// Compare sample tails with the envelope built from the discrete norm.
    Tail(Flags),
    /// Convolve two functions on a finite group and report their norms.
    Convolve(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// key=value file with defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
    /// gaussian, uniform01, exponential, rademacher, constant:<c>,
    /// empirical:<path>, density:<gaussian|uniform01|exponential>
    #[arg(long)]
    model: Option<String>,
    /// power_slowvary(r=.., delta=..), power_slowvary_raw(..),
    /// oscillating(r=.., amp=..), natural
    #[arg(long)]
    psi: Option<String>,
    /// full, intervals:1-2,3-inf, points:1,2, grid:<grid>; parts joined by ';'
    #[arg(long)]
    set: Option<String>,
    /// geometric:D=<d>:M=<m> or integers:M=<m>
    #[arg(long)]
    grid: Option<String>,
    /// cyclic:<n>, dihedral:<n>, symmetric:<n>, product:<G>x<H>
    #[arg(long)]
    group: Option<String>,
    #[arg(long = "p-max")]
    p_max: Option<f64>,
    /// Grid truncation; overrides the M in --grid.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat a divergent norm as a failure.
    #[arg(long)]
    strict: bool,
    /// sandwich, tails, young, algebra or all
    #[arg(long)]
    suite: Option<String>,
    /// Comma-separated evaluation points for `tail`.
    #[arg(long)]
    x: Option<String>,
    /// Function file (one value per line, by element index) for `convolve`.
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long)]
    g: Option<PathBuf>,
}

/// Settings after merging flags, the config file and the environment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
    pub strict: bool,
}

const KEYS: &[&str] = &[
    "model", "psi", "set", "grid", "group", "p-max", "M", "seed", "n", "out", "strict", "suite", "x", "f", "g",
];

impl ExperimentConfig {
    /// Parses `key=value` lines; blank lines and `#` comments are ignored.
    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GlsError::Parse(format!("config line {}: expected key=value", i + 1)))?;
            let key = canonical_key(k.trim())
                .ok_or_else(|| GlsError::Parse(format!("config line {}: unknown key '{}'", i + 1, k.trim())))?;
            cfg.values.insert(key.to_string(), v.trim().to_string());
        }
        if let Some(s) = cfg.values.get("strict") {
            cfg.strict = parse_bool(s)?;
        }
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| GlsError::Parse(format!("bad value '{v}' for --{key}"))))
            .transpose()
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| GlsError::Parse(format!("missing --{key}")))
    }

    pub fn model(&self) -> Result<RandomVariableModel> {
        RandomVariableModel::from_spec(self.require("model")?)
    }

    pub fn psi(&self, model: Option<&RandomVariableModel>) -> Result<GeneratingFunction> {
        self.get("psi").unwrap_or(DEFAULT_PSI).parse::<PsiSpec>()?.build(model)
    }

    pub fn grid(&self) -> Result<Option<GridSequence>> {
        let Some(spec) = self.get("grid") else { return Ok(None) };
        let grid: GridSequence = spec.parse()?;
        Ok(Some(match self.parsed::<usize>("M")? {
            Some(m) => grid.with_truncation(m)?,
            None => grid,
        }))
    }

    pub fn set_spec(&self) -> Result<Option<RestrictedSet>> {
        self.get("set").map(str::parse).transpose()
    }

    pub fn p_max(&self) -> Result<Option<f64>> {
        self.parsed("p-max")
    }

    /// `--seed`, then the config file, then `GLS_DEFAULT_SEED`, then the
    /// suite default.
    pub fn seed(&self) -> Result<u64> {
        if let Some(s) = self.parsed::<u64>("seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| GlsError::Parse(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
            Err(_) => Ok(suites::DEFAULT_SEED),
        }
    }

    pub fn n(&self) -> Result<Option<usize>> {
        self.parsed("n")
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.get("out").map(PathBuf::from)
    }
}

fn canonical_key(k: &str) -> Option<&'static str> {
    let k = if k == "p_max" { "p-max" } else { k };
    KEYS.iter().copied().find(|x| *x == k)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(GlsError::Parse(format!("bad boolean '{other}'"))),
    }
}

fn resolve(flags: Flags) -> Result<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => ExperimentConfig::parse_file_text(&std::fs::read_to_string(path).map_err(|e| {
            GlsError::Parse(format!("cannot read config {}: {e}", path.display()))
        })?)?,
        None => ExperimentConfig::default(),
    };
    let path = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
    cfg.set("model", flags.model);
    cfg.set("psi", flags.psi);
    cfg.set("set", flags.set);
    cfg.set("grid", flags.grid);
    cfg.set("group", flags.group);
    cfg.set("p-max", flags.p_max.map(|v| v.to_string()));
    cfg.set("M", flags.m.map(|v| v.to_string()));
    cfg.set("seed", flags.seed.map(|v| v.to_string()));
    cfg.set("n", flags.n.map(|v| v.to_string()));
    cfg.set("out", path(flags.out));
    cfg.set("suite", flags.suite);
    cfg.set("x", flags.x);
    cfg.set("f", path(flags.f));
    cfg.set("g", path(flags.g));
    cfg.strict |= flags.strict;
    Ok(cfg)
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. CSV goes to `stdout` or `--out`; messages go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Norm(f) => resolve(f).and_then(|c| cmd_norm(&c, stdout, stderr)),
        Command::Verify(f) => resolve(f).and_then(|c| cmd_verify(&c, stdout, stderr)),
        Command::Tail(f) => resolve(f).and_then(|c| cmd_tail(&c, stdout, stderr)),
        Command::Convolve(f) => resolve(f).and_then(|c| cmd_convolve(&c, stdout, stderr)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(table: &Table, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<()> {
    match cfg.out() {
        Some(path) => write_file(table, &path),
        None => table.write_csv(stdout),
    }
}

fn write_file(table: &Table, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

const NORM_HEADER: [&str; 9] = [
    "kind", "model", "psi", "domain", "value", "arg_p", "p_max", "decreasing_at_p_max", "diagnostics",
];

fn norm_row(kind: &str, model: &RandomVariableModel, psi: &GeneratingFunction, domain: String, r: &NormResult) -> Vec<String> {
    vec![
        kind.to_string(),
        model.label().to_string(),
        psi.to_string(),
        domain,
        real(r.value),
        real(r.arg_p),
        real(r.truncation_p_max),
        r.decreasing_at_truncation.map(|b| b.to_string()).unwrap_or_default(),
        r.diagnostics.clone(),
    ]
}

/// Prints the full norm (or the restricted one for `--set`) and, with
/// `--grid`, the discrete norm.
pub fn cmd_norm(cfg: &ExperimentConfig, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<i32> {
    let model = cfg.model()?;
    let psi = cfg.psi(Some(&model))?;
    let grid = cfg.grid()?;
    let set = cfg.set_spec()?;
    let p_max = cfg.p_max()?.unwrap_or_else(|| norms::default_p_max(&model));
    let mut table = Table::new(NORM_HEADER);
    let mut results = Vec::new();
    match &set {
        Some(s) if s.to_string() != "full" => {
            let r = norms::restricted_norm(&model, &psi, s, p_max)?;
            table.push(norm_row("restricted", &model, &psi, s.to_string(), &r));
            results.push(r);
        }
        _ if grid.is_none() || set.is_some() => {
            let r = norms::gls_norm(&model, &psi, p_max, norms::DEFAULT_REFINE_TOL)?;
            table.push(norm_row("full", &model, &psi, "full".into(), &r));
            results.push(r);
        }
        _ => {}
    }
    if let Some(g) = &grid {
        let r = norms::discrete_norm(&model, &psi, g)?;
        table.push(norm_row("discrete", &model, &psi, g.to_string(), &r));
        results.push(r);
    }
    emit(&table, cfg, stdout)?;
    let divergent = results.iter().any(|r| !r.is_finite());
    Ok(if cfg.strict && divergent { EXIT_VIOLATION } else { EXIT_OK })
}

pub fn cmd_verify(cfg: &ExperimentConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let name = cfg.get("suite").unwrap_or("all");
    let mut scfg = SuiteConfig {
        seed: cfg.seed()?,
        ..SuiteConfig::default()
    };
    if let Some(n) = cfg.n()? {
        scfg.tail_samples = n;
    }
    if let Some(p) = cfg.p_max()? {
        scfg.p_max = p;
    }
    let report = if name == "all" {
        suites::run_all(&scfg)?
    } else {
        suites::run(name.parse::<Suite>()?, &scfg)?
    };
    emit(&report.table(), cfg, stdout)?;
    let violations = report.violations();
    writeln!(stderr, "{name}: {} cases, {violations} violations (seed {})", report.rows.len(), scfg.seed)?;
    Ok(if violations == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

const TAIL_HEADER: [&str; 8] = ["row", "x", "empirical", "envelope", "upper", "status", "k_hat", "k_over_norm"];

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| GlsError::Parse(format!("bad number '{v}' in --x"))))
        .collect()
}

/// Envelope rows for each `x` (default: `e * norm` times 1, 1.25, 1.5, 2,
/// 2.5), then one row with the smallest feasible `K`.
pub fn cmd_tail(cfg: &ExperimentConfig, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<i32> {
    let model = cfg.model()?;
    let psi = cfg.psi(Some(&model))?;
    let grid = match cfg.grid()? {
        Some(g) => g,
        None => {
            let g: GridSequence = DEFAULT_TAIL_GRID.parse()?;
            match cfg.parsed::<usize>("M")? {
                Some(m) => g.with_truncation(m)?,
                None => g,
            }
        }
    };
    let n = cfg.n()?.unwrap_or(DEFAULT_TAIL_N);
    let seed = cfg.seed()?;
    let xs = match cfg.get("x") {
        Some(s) => parse_list(s)?,
        None => {
            let norm = norms::discrete_norm(&model, &psi, &grid)?.value;
            [1.0, 1.25, 1.5, 2.0, 2.5].iter().map(|k| k * std::f64::consts::E * norm).collect()
        }
    };
    let rep = tails::tail_check(&model, &psi, &grid, n, seed, &xs)?;
    let mut table = Table::new(TAIL_HEADER);
    for r in &rep.rows {
        let status = match (r.in_domain, r.pass) {
            (false, _) => "out-of-domain",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        table.push(vec![
            "envelope".into(),
            real(r.x),
            real(r.empirical),
            opt_real(r.envelope),
            opt_real(r.envelope.map(|e| e + r.slack)),
            status.into(),
            String::new(),
            String::new(),
        ]);
    }
    let batch = model.sample(n, seed)?;
    let k_grid = tails::default_k_grid(Some(rep.norm), &batch);
    let (k_hat, ratio, status) = match tails::membership_k_estimate(&batch, &grid, &psi, &k_grid) {
        Ok(est) => (real(est.k_hat), real(est.ratio_to(rep.norm)), "feasible"),
        Err(GlsError::NoFeasibleK { .. }) => (String::new(), String::new(), "no feasible K"),
        Err(e) => return Err(e),
    };
    table.push(vec![
        "k_hat".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        status.into(),
        k_hat,
        ratio,
    ]);
    emit(&table, cfg, stdout)?;
    Ok(if rep.violations() == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

const CONVOLVE_HEADER: [&str; 6] = ["kind", "index", "f", "g", "f*g", "pass"];

/// Element-wise values of `f`, `g`, `f*g`, their `L^1`, `L^2`, `L^inf`
/// norms, and with `--psi` the restricted norms and the algebra inequality
/// over `--set` (default `full`).
pub fn cmd_convolve(cfg: &ExperimentConfig, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<i32> {
    let kind: GroupKind = cfg.require("group")?.parse()?;
    let group = FiniteGroup::new(&kind)?;
    let f = GroupFunction::from_file(cfg.require("f")?)?;
    let g = GroupFunction::from_file(cfg.require("g")?)?;
    let fg = group::convolve(&group, &f, &g)?;
    let mut table = Table::new(CONVOLVE_HEADER);
    for i in 0..group.order() {
        table.push(vec![
            "value".into(),
            i.to_string(),
            real(f.values()[i]),
            real(g.values()[i]),
            real(fg.values()[i]),
            String::new(),
        ]);
    }
    for (label, p) in [("L1", 1.0), ("L2", 2.0), ("Linf", f64::INFINITY)] {
        table.push(vec![
            label.into(),
            String::new(),
            real(group::group_lp_norm(&group, &f, p)?),
            real(group::group_lp_norm(&group, &g, p)?),
            real(group::group_lp_norm(&group, &fg, p)?),
            String::new(),
        ]);
    }
    let mut code = EXIT_OK;
    if cfg.get("psi").is_some() {
        let psi = cfg.psi(None)?;
        let set = cfg.set_spec()?.unwrap_or_else(RestrictedSet::full);
        let rep = group::algebra_check(&group, &f, &g, &psi, &set)?;
        table.push(vec![
            "gls".into(),
            String::new(),
            real(rep.f_norm),
            real(rep.g_norm),
            real(rep.conv_norm.value),
            if rep.pass { "pass" } else { "FAIL" }.into(),
        ]);
        if !rep.pass {
            code = EXIT_VIOLATION;
        }
    }
    emit(&table, cfg, stdout)?;
    Ok(code)
}
