//! Seeded randomized verification suites. Case `i` of a suite draws from its
//! own ChaCha8 stream, so a report depends only on the seed, never on the
//! thread count or on which other cases ran.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GlsError, Result};
use crate::group::{self, FiniteGroup, GroupFunction, GroupKind, YoungTriple};
use crate::norms::{self, SandwichReport};
use crate::pgrid::{GridSequence, RestrictedSet};
use crate::psi::{GeneratingFunction, PowerSlowVaryParams};
use crate::report::{opt_real, real, Table};
use crate::rv::RandomVariableModel;
use crate::tails;

pub const DEFAULT_SEED: u64 = 7;
pub const RESTRICTED_CASES: usize = 50;
pub const DISCRETE_CASES: usize = 50;
pub const YOUNG_CASES: usize = 200;
pub const ALGEBRA_NORMALIZED_CASES: usize = 100;
pub const ALGEBRA_UNNORMALIZED_CASES: usize = 50;
pub const DEFAULT_TAIL_SAMPLES: usize = 1_000_000;

/// Unbounded sets with finite `Z` for every monotone family used here.
pub const SET_FIXTURES: &[&str] = &[
    "full",
    "intervals:1-2,3-inf",
    "intervals:1-1.5,2-4,6-inf",
    "intervals:1-1.25,8-inf;points:2,4",
    "intervals:5-inf;points:1,2,3",
    "intervals:1.5-2.5,5-inf;points:1",
    "grid:geometric:D=2:M=60",
    "grid:geometric:D=3:M=40",
    "grid:integers:M=100",
];

pub const GRID_FIXTURES: &[&str] = &[
    "geometric:D=2:M=60",
    "geometric:D=3:M=40",
    "geometric:D=4:M=30",
    "integers:M=50",
    "integers:M=100",
];

/// The non-monotone generating function used with `W-hat`.
pub const OSCILLATING: (f64, f64) = (2.0, 0.3);

pub const GROUP_FIXTURES: &[&str] = &[
    "cyclic:2", "cyclic:3", "cyclic:5", "cyclic:8", "cyclic:12", "cyclic:16", "dihedral:3", "dihedral:4", "dihedral:5",
    "dihedral:6", "symmetric:3", "symmetric:4",
];

pub const ALGEBRA_SET_FIXTURES: &[&str] = &[
    "full",
    "grid:integers:M=100",
    "grid:geometric:D=2:M=60",
    "intervals:1-2,3-inf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Sandwich,
    Tails,
    Young,
    Algebra,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Sandwich, Suite::Tails, Suite::Young, Suite::Algebra];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::Tails => "tails",
            Suite::Young => "young",
            Suite::Algebra => "algebra",
        }
    }

    fn stream_tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = GlsError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| GlsError::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Draws per tail case.
    pub tail_samples: usize,
    pub p_max: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: DEFAULT_SEED,
            tail_samples: DEFAULT_TAIL_SAMPLES,
            p_max: norms::DEFAULT_P_MAX,
        }
    }
}

/// One checked inequality `lower <= value <= upper` (either side optional).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow {
    pub suite: Suite,
    pub case: usize,
    pub setup: String,
    pub lower: Option<f64>,
    pub value: f64,
    pub upper: Option<f64>,
    pub constant: Option<f64>,
    pub pass: bool,
    pub note: String,
}

pub const HEADER: [&str; 9] = ["suite", "case", "setup", "lower", "value", "upper", "constant", "pass", "note"];

impl CaseRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.suite.name().to_string(),
            self.case.to_string(),
            self.setup.clone(),
            opt_real(self.lower),
            real(self.value),
            opt_real(self.upper),
            opt_real(self.constant),
            if self.pass { "pass" } else { "FAIL" }.to_string(),
            self.note.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub rows: Vec<CaseRow>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(HEADER);
        for r in &self.rows {
            t.push(r.record());
        }
        t
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.rows.extend(other.rows);
    }
}

pub fn run(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match suite {
        Suite::Sandwich => sandwich(cfg),
        Suite::Tails => tail_suite(cfg),
        Suite::Young => young(cfg),
        Suite::Algebra => algebra(cfg),
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut out = SuiteReport { rows: Vec::new() };
    for s in Suite::ALL {
        out.extend(run(s, cfg)?);
    }
    Ok(out)
}

fn case_rng(seed: u64, suite: Suite, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((suite.stream_tag() << 32) | case as u64);
    rng
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("fixture lists are nonempty")
}

/// A closed-form model and the exponents `r` for which `p^(1/r) L(p)` gives
/// it a finite norm.
fn random_model(rng: &mut ChaCha8Rng) -> (RandomVariableModel, &'static [f64]) {
    const SUBGAUSSIAN: &[f64] = &[1.0, 1.5, 2.0];
    const SUBEXPONENTIAL: &[f64] = &[1.0];
    const BOUNDED: &[f64] = &[1.0, 2.0, 3.0, 4.0];
    let (m, rs) = match rng.random_range(0..7) {
        0 => (RandomVariableModel::gaussian(), SUBGAUSSIAN),
        1 => (RandomVariableModel::uniform01(), BOUNDED),
        2 => (RandomVariableModel::exponential(), SUBEXPONENTIAL),
        3 => (RandomVariableModel::rademacher(), BOUNDED),
        4 => (RandomVariableModel::constant(round3(rng.random_range(0.5..3.0))), BOUNDED),
        // sparse indicators peak in the interior
        _ => (
            RandomVariableModel::bernoulli(*pick(rng, &[1e-2, 1e-3, 1e-5])).expect("valid probability"),
            BOUNDED,
        ),
    };
    let alpha = *pick(rng, &[1.0, 1.0, -2.0, 0.5, 3.0]);
    (if alpha == 1.0 { m } else { m.scaled(alpha) }, rs)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn random_power_psi(rng: &mut ChaCha8Rng, rs: &[f64]) -> Result<GeneratingFunction> {
    let r = *pick(rng, rs);
    let delta = *pick(rng, &[0.0, 0.5, 1.0]);
    GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(r, delta)?)
}

fn sandwich_row(case: usize, setup: String, rep: SandwichReport) -> CaseRow {
    CaseRow {
        suite: Suite::Sandwich,
        case,
        setup,
        lower: Some(rep.lower),
        value: rep.full,
        upper: Some(rep.bound),
        constant: Some(rep.constant),
        pass: rep.passed() == Some(true),
        note: rep.note,
    }
}

/// Restricted cases first, then discrete ones; every fifth discrete case uses
/// the oscillating generating function with `W-hat`.
pub fn sandwich(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let restricted = (0..RESTRICTED_CASES).into_par_iter().map(|i| {
        let mut rng = case_rng(cfg.seed, Suite::Sandwich, i);
        let (model, rs) = random_model(&mut rng);
        let psi = random_power_psi(&mut rng, rs)?;
        let set: RestrictedSet = pick(&mut rng, SET_FIXTURES).parse()?;
        let rep = norms::sandwich_check_restricted(&model, &psi, &set, cfg.p_max)?;
        let setup = format!("restricted; {}; {psi}; {set}", model.label());
        Ok(sandwich_row(i, setup, rep))
    });
    let discrete = (0..DISCRETE_CASES).into_par_iter().map(|j| {
        let i = RESTRICTED_CASES + j;
        let mut rng = case_rng(cfg.seed, Suite::Sandwich, i);
        let (model, rs) = random_model(&mut rng);
        let oscillating = j % 5 == 4;
        let (psi, use_w_hat) = if oscillating && rs.contains(&2.0) {
            (GeneratingFunction::oscillating(OSCILLATING.0, OSCILLATING.1)?, true)
        } else {
            (random_power_psi(&mut rng, rs)?, false)
        };
        let grid: GridSequence = pick(&mut rng, GRID_FIXTURES).parse()?;
        let rep = norms::sandwich_check_discrete(&model, &psi, &grid, cfg.p_max, use_w_hat)?;
        let kind = if use_w_hat { "discrete W-hat" } else { "discrete W" };
        let setup = format!("{kind}; {}; {psi}; {grid}", model.label());
        Ok(sandwich_row(i, setup, rep))
    });
    let mut rows = restricted.collect::<Result<Vec<_>>>()?;
    rows.extend(discrete.collect::<Result<Vec<_>>>()?);
    Ok(SuiteReport { rows })
}

/// A tail case: model, `psi`, grid, and the `x` values to probe.
pub type TailCase = (RandomVariableModel, GeneratingFunction, GridSequence, Vec<f64>);

/// Fixed tail cases; the `x` values are chosen at or above `e * norm` except
/// where a case deliberately probes the out-of-domain region.
pub fn tail_cases() -> Result<Vec<TailCase>> {
    let g = RandomVariableModel::gaussian();
    let natural = GeneratingFunction::natural(&g)?;
    let sqrt = GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(2.0, 0.0)?)?;
    let linear = GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(1.0, 0.0)?)?;
    Ok(vec![
        (g.clone(), natural, GridSequence::integers(50)?, vec![2.5, 3.0, 3.5, 4.0]),
        (g, sqrt.clone(), GridSequence::geometric(2, 60)?, vec![1.0, 2.5, 3.0, 3.5, 4.0, 5.0]),
        (RandomVariableModel::exponential(), linear, GridSequence::integers(100)?, vec![3.0, 4.0, 6.0, 8.0, 12.0]),
        (RandomVariableModel::uniform01(), sqrt.clone(), GridSequence::integers(50)?, vec![1.0, 1.5, 2.0]),
        (RandomVariableModel::rademacher(), sqrt.clone(), GridSequence::geometric(2, 60)?, vec![2.0, 3.0, 4.0]),
        (RandomVariableModel::constant(2.0), sqrt, GridSequence::integers(50)?, vec![4.0, 6.0, 8.0]),
    ])
}

pub fn tail_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let cases = tail_cases()?;
    let mut rows = Vec::new();
    for (i, (model, psi, grid, xs)) in cases.iter().enumerate() {
        let seed = cfg.seed.wrapping_add((i as u64) << 40);
        let rep = tails::tail_check(model, psi, grid, cfg.tail_samples, seed, xs)?;
        for r in rep.rows {
            rows.push(CaseRow {
                suite: Suite::Tails,
                case: i,
                setup: format!("{}; {psi}; {grid}; n={}; x={}", model.label(), cfg.tail_samples, r.x),
                lower: None,
                value: r.empirical,
                upper: r.envelope.map(|e| e + r.slack),
                constant: Some(rep.norm),
                pass: r.pass,
                note: match r.envelope {
                    Some(e) => format!("envelope {}", real(e)),
                    None => format!("out-of-domain (x < e*norm = {})", real(rep.threshold)),
                },
            });
        }
    }
    Ok(SuiteReport { rows })
}

fn random_group_fn(rng: &mut ChaCha8Rng, n: usize) -> Result<GroupFunction> {
    let nonnegative = rng.random_bool(0.3);
    let lo = if nonnegative { 0.0 } else { -3.0 };
    GroupFunction::new((0..n).map(|_| rng.random_range(lo..3.0)).collect())
}

/// `(1/p, 1/q)` uniform over the admissible triangle `1/p + 1/q >= 1`, with
/// the corners and `r = inf` drawn explicitly part of the time.
fn random_triple(rng: &mut ChaCha8Rng) -> Result<YoungTriple> {
    let inv = |x: f64| if x == 0.0 { f64::INFINITY } else { 1.0 / x };
    match rng.random_range(0..10) {
        0 => YoungTriple::new(1.0, 1.0, 1.0),
        1 | 2 => {
            let a: f64 = rng.random_range(0.0..=1.0);
            YoungTriple::new(inv(a), inv(1.0 - a), f64::INFINITY)
        }
        _ => {
            let a: f64 = rng.random_range(0.0..=1.0);
            let b: f64 = rng.random_range(1.0 - a..=1.0);
            YoungTriple::new(inv(a), inv(b), inv(a + b - 1.0))
        }
    }
}

pub fn young(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let rows = (0..YOUNG_CASES)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(cfg.seed, Suite::Young, i);
            let kind: GroupKind = pick(&mut rng, GROUP_FIXTURES).parse()?;
            let g = FiniteGroup::new(&kind)?;
            let f = random_group_fn(&mut rng, g.order())?;
            let h = random_group_fn(&mut rng, g.order())?;
            let t = random_triple(&mut rng)?;
            let rep = group::young_check(&g, &f, &h, t)?;
            Ok(CaseRow {
                suite: Suite::Young,
                case: i,
                setup: format!("{kind}; {t}"),
                lower: None,
                value: rep.lhs,
                upper: Some(rep.bound),
                constant: None,
                pass: rep.pass,
                note: format!("|f|_p={} |g|_q={}", real(rep.f_norm), real(rep.g_norm)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { rows })
}

/// Normalized cases (some with the unit element, some rescaled to norm one)
/// followed by cases with `psi(1) != 1`.
pub fn algebra(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let total = ALGEBRA_NORMALIZED_CASES + ALGEBRA_UNNORMALIZED_CASES;
    let rows = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(cfg.seed, Suite::Algebra, i);
            let kind: GroupKind = pick(&mut rng, GROUP_FIXTURES).parse()?;
            let g = FiniteGroup::new(&kind)?;
            let set: RestrictedSet = pick(&mut rng, ALGEBRA_SET_FIXTURES).parse()?;
            let r = *pick(&mut rng, &[1.0, 2.0, 3.0]);
            let normalized = i < ALGEBRA_NORMALIZED_CASES;
            let psi = if normalized {
                let delta = *pick(&mut rng, &[0.0, 0.5, 1.0]);
                GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(r, delta)?)?
            } else {
                let delta = *pick(&mut rng, &[-0.5, 0.5, 1.0, 2.0]);
                GeneratingFunction::power_slowvary_raw(PowerSlowVaryParams::new(r, delta)?)?
            };
            let (mut f, mut h) = (random_group_fn(&mut rng, g.order())?, random_group_fn(&mut rng, g.order())?);
            let mut variant = "random";
            match i % 10 {
                0 => {
                    f = GroupFunction::unit(&g);
                    h = GroupFunction::unit(&g);
                    variant = "unit*unit";
                }
                1 => {
                    h = GroupFunction::unit(&g);
                    variant = "f*unit";
                }
                2..=5 => {
                    let nf = norms::restricted_norm(&f.as_model("f")?, &psi, &set, group::ALGEBRA_P_MAX)?.value;
                    let nh = norms::restricted_norm(&h.as_model("g")?, &psi, &set, group::ALGEBRA_P_MAX)?.value;
                    if nf > 0.0 && nh > 0.0 {
                        f = f.scaled(1.0 / nf)?;
                        h = h.scaled(1.0 / nh)?;
                        variant = "unit-norm";
                    }
                }
                _ => {}
            }
            let rep = group::algebra_check(&g, &f, &h, &psi, &set)?;
            Ok(CaseRow {
                suite: Suite::Algebra,
                case: i,
                setup: format!("{kind}; {variant}; {psi}; {set}"),
                lower: None,
                value: rep.conv_norm.value,
                upper: Some(rep.bound),
                constant: Some(rep.constant),
                pass: rep.pass,
                note: format!(
                    "|f|={} |g|={}; truncation {}; {}",
                    real(rep.f_norm),
                    real(rep.g_norm),
                    if rep.truncation_exact { "exact" } else { "unverified" },
                    rep.diagnostics
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { rows })
}
