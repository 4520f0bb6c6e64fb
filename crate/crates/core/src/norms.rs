//! The classical, restricted and discrete norms and the sandwich checks that
//! relate them.
//!
//! Suprema over continuous exponent ranges are found by a geometric coarse
//! grid followed by golden-section refinement around every local maximum; the
//! ratio `|f|_p / psi(p)` is not assumed unimodal. Every supremum is truncated
//! at a finite `p_max`, and the result records whether the ratio was still
//! growing there.

use rayon::prelude::*;

use crate::error::{GlsError, Result};
use crate::numeric::{self, geometric_points};
use crate::pgrid::{self, GridSequence, RestrictedSet};
use crate::psi::GeneratingFunction;
use crate::rv::RandomVariableModel;

pub const COARSE_POINTS: usize = 512;
pub const DEFAULT_P_MAX: f64 = 200.0;
pub const DEFAULT_REFINE_TOL: f64 = 1e-9;
/// Relative slack added to every sandwich comparison on top of the model's
/// moment tolerance.
pub const BASE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    /// The supremum, `+inf` when a moment diverges.
    pub value: f64,
    /// Exponent attaining the supremum (smallest on ties), or the first
    /// exponent with a divergent moment.
    pub arg_p: f64,
    pub truncation_p_max: f64,
    /// `Some(true)` if the ratio was decreasing at the truncation point.
    pub decreasing_at_truncation: Option<bool>,
    pub diagnostics: String,
}

impl NormResult {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `|f|_p / psi(p)`; a divergent moment maps to `+inf`.
fn ratio(model: &RandomVariableModel, psi: &GeneratingFunction, p: f64) -> Result<f64> {
    match model.lp_norm(p) {
        Ok(v) => Ok(v / psi.eval(p)?),
        Err(GlsError::Divergent { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Default truncation for a model: 200, or `5 ln n` for samples.
pub fn default_p_max(model: &RandomVariableModel) -> f64 {
    match model.reliable_p_max() {
        Some(reliable) => DEFAULT_P_MAX.min(reliable).max(1.0 + 1e-9),
        None => DEFAULT_P_MAX,
    }
}

fn warn_if_unreliable(model: &RandomVariableModel, p_max: f64) {
    if let Some(reliable) = model.reliable_p_max() {
        if p_max > reliable {
            log::warn!(
                "model '{}': plug-in moments above p = {reliable:.3} are dominated by the sample maximum (p_max = {p_max})",
                model.label()
            );
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    p: f64,
    value: f64,
}

/// Picks the largest value, ties toward the smaller exponent.
fn best(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    cands.into_iter().fold(None, |acc: Option<Candidate>, c| match acc {
        None => Some(c),
        Some(a) if c.value > a.value || (c.value == a.value && c.p < a.p) => Some(c),
        keep => keep,
    })
}

/// Supremum of the ratio over `[lo, hi]`.
fn search_interval(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    lo: f64,
    hi: f64,
    refine_tol: f64,
    hints: &[f64],
) -> Result<(Candidate, Option<bool>)> {
    if lo == hi {
        let v = ratio(model, psi, lo)?;
        return Ok((Candidate { p: lo, value: v }, None));
    }
    let mut grid = geometric_points(lo, hi, COARSE_POINTS);
    grid.extend(hints.iter().copied().filter(|&h| h > lo && h < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values = grid
        .par_iter()
        .map(|&p| ratio(model, psi, p))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(i) = values.iter().position(|v| v.is_infinite()) {
        return Ok((
            Candidate {
                p: grid[i],
                value: f64::INFINITY,
            },
            None,
        ));
    }
    let n = grid.len();
    let peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    let refined: Vec<Candidate> = peaks
        .par_iter()
        .map(|&i| {
            let (p, v) = numeric::golden_section_maximize(
                |p| ratio(model, psi, p).unwrap_or(f64::NEG_INFINITY),
                grid[i - 1],
                grid[i + 1],
                refine_tol,
            );
            Candidate { p, value: v }
        })
        .collect();
    let coarse = grid.iter().zip(&values).map(|(&p, &value)| Candidate { p, value });
    let top = best(coarse.chain(refined)).expect("nonempty grid");
    let decreasing = values[n - 1] < values[n - 2];
    Ok((top, Some(decreasing)))
}

fn truncation_note(decreasing: Option<bool>, p_max: f64) -> String {
    match decreasing {
        Some(true) => format!("ratio decreasing at p_max={p_max}"),
        Some(false) => format!("ratio not decreasing at p_max={p_max}; supremum may lie beyond"),
        None => format!("truncated at p_max={p_max}"),
    }
}

fn check_p_max(p_max: f64) -> Result<()> {
    if !(p_max > 1.0 && p_max.is_finite()) {
        return Err(GlsError::domain("p_max", p_max, "finite p_max > 1"));
    }
    Ok(())
}

/// `sup_{1 <= p <= p_max} |f|_p / psi(p)`.
pub fn gls_norm(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    p_max: f64,
    refine_tol: f64,
) -> Result<NormResult> {
    gls_norm_with_hints(model, psi, p_max, refine_tol, &[])
}

/// As [`gls_norm`], with extra exponents added to the coarse grid.
pub fn gls_norm_with_hints(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    p_max: f64,
    refine_tol: f64,
    hints: &[f64],
) -> Result<NormResult> {
    check_p_max(p_max)?;
    warn_if_unreliable(model, p_max);
    let (top, decreasing) = search_interval(model, psi, 1.0, p_max, refine_tol, hints)?;
    let diagnostics = if top.value.is_infinite() {
        format!("divergent moment at p={}", top.p)
    } else {
        truncation_note(decreasing, p_max)
    };
    Ok(NormResult {
        value: top.value,
        arg_p: top.p,
        truncation_p_max: p_max,
        decreasing_at_truncation: decreasing,
        diagnostics,
    })
}

/// Grid points of `q` (continued past its truncation) up to `p_max`.
fn grid_points_upto(grid: &GridSequence, p_max: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = grid.points().iter().copied().take_while(|&q| q <= p_max).collect();
    if pts.len() == grid.truncation() {
        let mut m = grid.truncation();
        loop {
            m += 1;
            let q = grid.value_at(m);
            if !(q <= p_max) || m > 1 << 20 {
                break;
            }
            pts.push(q);
        }
    }
    pts
}

/// `sup_{p in S, p <= p_max} |f|_p / psi(p)`. Interval components are
/// searched like [`gls_norm`]; points and grid points are enumerated.
pub fn restricted_norm(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    set: &RestrictedSet,
    p_max: f64,
) -> Result<NormResult> {
    if !set.contains(1.0) {
        return Err(GlsError::InvalidParameter("restricted set must contain 1".into()));
    }
    check_p_max(p_max)?;
    warn_if_unreliable(model, p_max);
    let mut cands = Vec::new();
    let mut decreasing = None;
    for iv in set.intervals() {
        if iv.lo > p_max {
            continue;
        }
        let hi = iv.hi.min(p_max);
        let (c, dec) = search_interval(model, psi, iv.lo, hi, DEFAULT_REFINE_TOL, &[])?;
        if iv.hi >= p_max {
            decreasing = dec;
        }
        cands.push(c);
    }
    let mut discrete: Vec<f64> = set.points().iter().copied().filter(|&x| x <= p_max).collect();
    if let Some(g) = set.grid() {
        discrete.extend(grid_points_upto(g, p_max));
    }
    for p in discrete {
        cands.push(Candidate {
            p,
            value: ratio(model, psi, p)?,
        });
    }
    let divergent = cands.iter().filter(|c| c.value.is_infinite()).map(|c| c.p).fold(None, |a: Option<f64>, p| {
        Some(a.map_or(p, |a| a.min(p)))
    });
    let top = match divergent {
        Some(p) => Candidate { p, value: f64::INFINITY },
        None => best(cands).expect("1 is in S"),
    };
    let diagnostics = if top.value.is_infinite() {
        format!("divergent moment at p={}", top.p)
    } else {
        truncation_note(decreasing, p_max)
    };
    Ok(NormResult {
        value: top.value,
        arg_p: top.p,
        truncation_p_max: p_max,
        decreasing_at_truncation: decreasing,
        diagnostics,
    })
}

/// `max_{m = 1..M} |f|_{q(m)} / psi(q(m))`, by exact enumeration.
pub fn discrete_norm(model: &RandomVariableModel, psi: &GeneratingFunction, grid: &GridSequence) -> Result<NormResult> {
    let top_q = grid.q(grid.truncation());
    warn_if_unreliable(model, top_q);
    let mut values = Vec::with_capacity(grid.truncation());
    for &q in grid.points() {
        let v = ratio(model, psi, q)?;
        if v.is_infinite() {
            return Ok(NormResult {
                value: f64::INFINITY,
                arg_p: q,
                truncation_p_max: top_q,
                decreasing_at_truncation: None,
                diagnostics: format!("divergent moment at q(m)={q}"),
            });
        }
        values.push(v);
    }
    let top = best(grid.points().iter().zip(&values).map(|(&p, &value)| Candidate { p, value })).expect("M >= 1");
    let n = values.len();
    let decreasing = (n >= 2).then(|| values[n - 1] < values[n - 2]);
    let m = grid.points().iter().position(|&q| q == top.p).map_or(0, |i| i + 1);
    Ok(NormResult {
        value: top.value,
        arg_p: top.p,
        truncation_p_max: top_q,
        decreasing_at_truncation: decreasing,
        diagnostics: format!("max at m={m}; {}", truncation_note(decreasing, top_q)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// The restricted or discrete norm.
    pub lower: f64,
    pub full: f64,
    /// `Z`, `W` or `W-hat`.
    pub constant: f64,
    /// `constant * lower`.
    pub bound: f64,
    /// Relative slack allowed in both comparisons.
    pub slack: f64,
    /// Exponent range actually compared: `[1, truncation_p_max]`.
    pub truncation_p_max: f64,
    /// `None` when the check is not applicable (infinite constant or norm).
    pub lower_ok: Option<bool>,
    pub upper_ok: Option<bool>,
    pub note: String,
}

impl SandwichReport {
    pub fn applicable(&self) -> bool {
        self.lower_ok.is_some()
    }

    /// `Some(true)` iff both sides hold; `None` if not applicable.
    pub fn passed(&self) -> Option<bool> {
        Some(self.lower_ok? && self.upper_ok?)
    }

    fn evaluate(lower: f64, full: f64, constant: f64, slack: f64, truncation_p_max: f64, note: String) -> Self {
        let applicable = lower.is_finite() && full.is_finite() && constant.is_finite();
        let bound = constant * lower;
        let (lower_ok, upper_ok, note) = if applicable {
            (
                Some(lower <= full * (1.0 + slack)),
                Some(full <= bound * (1.0 + slack)),
                note,
            )
        } else {
            (None, None, format!("not applicable: {note}"))
        };
        SandwichReport {
            lower,
            full,
            constant,
            bound,
            slack,
            truncation_p_max,
            lower_ok,
            upper_ok,
            note,
        }
    }
}

fn sandwich_slack(model: &RandomVariableModel) -> f64 {
    BASE_SLACK + model.moment_tolerance()
}

/// `restricted <= full <= Z[psi, S] * restricted`. Both norms are taken over
/// `[1, P]` with `P = p+[S](p_max)`, so every `p <= P` has `p+(p) <= P`.
pub fn sandwich_check_restricted(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    set: &RestrictedSet,
    p_max: f64,
) -> Result<SandwichReport> {
    check_p_max(p_max)?;
    let z = pgrid::z_constant(set, psi)?;
    let top = set.p_plus(p_max)?;
    let top = if top.is_finite() { top } else { p_max };
    let restricted = restricted_norm(model, psi, set, top)?;
    let mut hints: Vec<f64> = set.points().to_vec();
    for iv in set.intervals() {
        hints.push(iv.lo);
        if iv.hi.is_finite() {
            hints.push(iv.hi);
        }
    }
    if let Some(g) = set.grid() {
        hints.extend(grid_points_upto(g, top));
    }
    let full = gls_norm_with_hints(model, psi, top, DEFAULT_REFINE_TOL, &hints)?;
    let note = if z.unbounded_gap {
        "Z = +inf (bounded set)".to_string()
    } else {
        format!("{}; {}", full.diagnostics, restricted.diagnostics)
    };
    Ok(SandwichReport::evaluate(
        restricted.value,
        full.value,
        z.value,
        sandwich_slack(model),
        top,
        note,
    ))
}

/// `discrete <= full <= W * discrete` (or `W-hat` when `use_w_hat`). The grid
/// is cut at the first `q(m*) >= p_max` and the full norm taken over
/// `[1, q(m*)]`.
pub fn sandwich_check_discrete(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    grid: &GridSequence,
    p_max: f64,
    use_w_hat: bool,
) -> Result<SandwichReport> {
    check_p_max(p_max)?;
    if !use_w_hat && !psi.monotonicity().is_monotone() {
        return Err(GlsError::NonMonotone(format!(
            "{} (use W-hat for non-monotone generating functions)",
            psi.description()
        )));
    }
    let (m_star, top) = grid
        .first_at_or_above(p_max)
        .ok_or_else(|| GlsError::InvalidParameter(format!("grid never reaches p_max = {p_max}")))?;
    let m_star = m_star.max(2);
    let cut = grid.with_truncation(m_star)?;
    let top = top.max(cut.q(m_star));
    let whole = if m_star > grid.truncation() { cut.clone() } else { grid.clone() };
    let constant = if use_w_hat {
        pgrid::w_hat_constant(&whole, psi, pgrid::DEFAULT_CELL_GRID)?
    } else {
        pgrid::w_constant(&whole, psi)?
    };
    let discrete = discrete_norm(model, psi, &cut)?;
    let full = gls_norm_with_hints(model, psi, top, DEFAULT_REFINE_TOL, cut.points())?;
    let note = format!("{}; {}", full.diagnostics, discrete.diagnostics);
    Ok(SandwichReport::evaluate(
        discrete.value,
        full.value,
        constant.value,
        sandwich_slack(model),
        top,
        note,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::PowerSlowVaryParams;

    fn power(r: f64, delta: f64) -> GeneratingFunction {
        GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(r, delta).unwrap()).unwrap()
    }

    #[test]
    fn constant_model_attains_at_one() {
        let m = RandomVariableModel::constant(3.0);
        let r = gls_norm(&m, &power(2.0, 0.0), 200.0, DEFAULT_REFINE_TOL).unwrap();
        assert_eq!(r.value, 3.0);
        assert_eq!(r.arg_p, 1.0);
        assert_eq!(r.decreasing_at_truncation, Some(true));
    }

    #[test]
    fn natural_psi_gives_l1_norm() {
        for m in [RandomVariableModel::gaussian(), RandomVariableModel::exponential(), RandomVariableModel::uniform01()] {
            let psi = GeneratingFunction::natural(&m).unwrap();
            let l1 = m.lp_norm(1.0).unwrap();
            let r = gls_norm(&m, &psi, 200.0, DEFAULT_REFINE_TOL).unwrap();
            assert!((r.value - l1).abs() <= 1e-12 * l1, "{}: {} vs {l1}", m.label(), r.value);
            let d = discrete_norm(&m, &psi, &GridSequence::geometric(2, 7).unwrap()).unwrap();
            assert!((d.value - l1).abs() <= 1e-12 * l1);
        }
    }

    #[test]
    fn uniform_with_sqrt_peaks_at_left_endpoint() {
        // (p+1)^(-1/p) / sqrt(p) on a fine grid, independent of the search.
        let oracle = (0..=99_000)
            .map(|i| 1.0 + i as f64 * 1e-3)
            .map(|p: f64| (p + 1.0).powf(-1.0 / p) / p.sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(oracle, 0.5);
        let r = gls_norm(&RandomVariableModel::uniform01(), &power(2.0, 0.0), 100.0, DEFAULT_REFINE_TOL).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.arg_p, 1.0);
    }

    #[test]
    fn interior_maximum_is_refined() {
        // Exponential with psi = p: Gamma(p+1)^(1/p) / p rises then falls to 1/e.
        let oracle = (0..=199_000)
            .map(|i| 1.0 + i as f64 * 1e-3)
            .map(|p: f64| (numeric::ln_gamma(p + 1.0) / p).exp() / p)
            .fold(f64::NEG_INFINITY, f64::max);
        let r = gls_norm(&RandomVariableModel::exponential(), &power(1.0, 0.0), 200.0, DEFAULT_REFINE_TOL).unwrap();
        assert!(r.value >= oracle * (1.0 - 1e-12));
        assert!(r.value <= oracle * (1.0 + 1e-6));
    }

    #[test]
    fn restricted_examples() {
        let g = RandomVariableModel::gaussian();
        let psi = power(2.0, 0.0);
        let full = gls_norm(&g, &psi, 200.0, DEFAULT_REFINE_TOL).unwrap();
        let r = restricted_norm(&g, &psi, &RestrictedSet::full(), 200.0).unwrap();
        assert!((r.value - full.value).abs() <= 1e-12 * full.value);
        let one: RestrictedSet = "points:1".parse().unwrap();
        let r = restricted_norm(&g, &psi, &one, 200.0).unwrap();
        assert_eq!(r.value, g.lp_norm(1.0).unwrap());
        let nat = GeneratingFunction::natural(&g).unwrap();
        let s: RestrictedSet = "intervals:1-2,3-inf".parse().unwrap();
        let r = restricted_norm(&g, &nat, &s, 200.0).unwrap();
        assert!((r.value - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn discrete_examples() {
        let r = discrete_norm(&RandomVariableModel::constant(2.5), &power(2.0, 0.0), &GridSequence::integers(10).unwrap()).unwrap();
        assert_eq!(r.value, 2.5);
        assert_eq!(r.arg_p, 1.0);
        assert!(r.diagnostics.starts_with("max at m=1"));
    }

    #[test]
    fn gaussian_sqrt_integer_grid_by_enumeration() {
        // Independent route: integer Gaussian moments via double factorials.
        let mut oracle = f64::NEG_INFINITY;
        for m in 1..=50u32 {
            let mut ln_df = 0.0f64;
            let mut k = m as i64 - 1;
            while k > 1 {
                ln_df += (k as f64).ln();
                k -= 2;
            }
            let ln_moment = if m % 2 == 0 { ln_df } else { ln_df + 0.5 * (2.0 / std::f64::consts::PI).ln() };
            oracle = oracle.max((ln_moment / m as f64).exp() / (m as f64).sqrt());
        }
        // The m = 1 term sqrt(2/pi) dominates; later ratios sink toward e^(-1/2).
        assert!((oracle - 0.797_884_560_802_865_4).abs() < 1e-15);
        let r = discrete_norm(&RandomVariableModel::gaussian(), &power(2.0, 0.0), &GridSequence::integers(50).unwrap()).unwrap();
        assert!((r.value - oracle).abs() < 1e-13);
        assert_eq!(r.arg_p, 1.0);
    }

    #[test]
    fn divergent_moment_reports_infinity() {
        use crate::numeric::QuadSettings;
        use crate::rv::DensityModel;
        let pareto = DensityModel::new(|x: f64| 3.0 * x.powi(-4), 1.0, f64::INFINITY, QuadSettings::default()).unwrap();
        let m = RandomVariableModel::density(pareto, "pareto3");
        let r = gls_norm(&m, &power(2.0, 0.0), 10.0, DEFAULT_REFINE_TOL).unwrap();
        assert_eq!(r.value, f64::INFINITY);
        assert!(r.arg_p >= 3.0 && r.arg_p < 3.1, "{}", r.arg_p);
        let d = discrete_norm(&m, &power(2.0, 0.0), &GridSequence::integers(6).unwrap()).unwrap();
        assert_eq!(d.value, f64::INFINITY);
        assert_eq!(d.arg_p, 3.0);
        let sw = sandwich_check_discrete(&m, &power(2.0, 0.0), &GridSequence::integers(10).unwrap(), 8.0, false).unwrap();
        assert_eq!(sw.passed(), None);
    }

    #[test]
    fn sandwich_full_set_coincides() {
        let rep = sandwich_check_restricted(&RandomVariableModel::gaussian(), &power(2.0, 0.0), &RestrictedSet::full(), 200.0).unwrap();
        assert_eq!(rep.constant, 1.0);
        assert!((rep.lower - rep.full).abs() <= 1e-12 * rep.full);
        assert_eq!(rep.passed(), Some(true));
    }

    #[test]
    fn sandwich_natural_psi_is_equality() {
        let g = RandomVariableModel::gaussian();
        let nat = GeneratingFunction::natural(&g).unwrap();
        let s: RestrictedSet = "intervals:1-2,3-inf".parse().unwrap();
        let rep = sandwich_check_restricted(&g, &nat, &s, 200.0).unwrap();
        assert!((rep.lower - rep.full).abs() < 1e-12);
        assert_eq!(rep.passed(), Some(true));
    }

    #[test]
    fn sandwich_exponential_identity_psi() {
        let s: RestrictedSet = "intervals:1-2,3-inf".parse().unwrap();
        let rep = sandwich_check_restricted(&RandomVariableModel::exponential(), &power(1.0, 0.0), &s, 200.0).unwrap();
        assert_eq!(rep.constant, 1.5);
        assert_eq!(rep.passed(), Some(true));
    }

    #[test]
    fn sandwich_discrete_examples() {
        let psi = power(2.0, 0.0);
        let rep = sandwich_check_discrete(&RandomVariableModel::gaussian(), &psi, &GridSequence::geometric(2, 60).unwrap(), 200.0, false).unwrap();
        assert!((rep.constant - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(rep.truncation_p_max, 255.0);
        assert_eq!(rep.passed(), Some(true));
        let rep = sandwich_check_discrete(&RandomVariableModel::uniform01(), &psi, &GridSequence::integers(60).unwrap(), 200.0, false).unwrap();
        assert!((rep.constant - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(rep.passed(), Some(true));
        let rep = sandwich_check_discrete(&RandomVariableModel::constant(4.0), &psi, &GridSequence::integers(60).unwrap(), 50.0, false).unwrap();
        assert_eq!(rep.lower, 4.0);
        assert_eq!(rep.full, 4.0);
    }

    #[test]
    fn sandwich_discrete_rejects_w_for_nonmonotone() {
        let psi = GeneratingFunction::oscillating(2.0, 0.5).unwrap();
        let g = GridSequence::integers(60).unwrap();
        assert!(sandwich_check_discrete(&RandomVariableModel::gaussian(), &psi, &g, 50.0, false).is_err());
        let rep = sandwich_check_discrete(&RandomVariableModel::gaussian(), &psi, &g, 50.0, true).unwrap();
        assert_eq!(rep.passed(), Some(true));
    }

    #[test]
    fn bounded_set_is_not_applicable() {
        let s: RestrictedSet = "intervals:1-5".parse().unwrap();
        let rep = sandwich_check_restricted(&RandomVariableModel::gaussian(), &power(2.0, 0.0), &s, 50.0).unwrap();
        assert!(!rep.applicable());
        assert!(rep.note.starts_with("not applicable"));
    }

    #[test]
    fn density_backend_norm_matches_closed_form() {
        let psi = power(2.0, 1.0);
        let a = gls_norm(&RandomVariableModel::exponential(), &psi, 60.0, DEFAULT_REFINE_TOL).unwrap();
        let b = gls_norm(&RandomVariableModel::exponential_density(), &psi, 60.0, DEFAULT_REFINE_TOL).unwrap();
        assert!((a.value - b.value).abs() <= 1e-7 * a.value);
    }

    #[test]
    fn default_p_max_for_samples() {
        let m = RandomVariableModel::empirical(vec![1.0; 1000], "ones").unwrap();
        assert!((default_p_max(&m) - 5.0 * 1000f64.ln()).abs() < 1e-12);
        assert_eq!(default_p_max(&RandomVariableModel::gaussian()), 200.0);
    }
}
