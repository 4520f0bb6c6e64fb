//! Generating functions `psi` on `[1, inf)`.
//!
//! A generating function is an arbitrary positive evaluator plus declared
//! metadata: whether it is monotone and its value at `p = 1`. Non-normalized
//! functions (`psi(1) != 1`) are representable; callers that need
//! normalization check [`GeneratingFunction::is_normalized`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{GlsError, Result};
use crate::rv::RandomVariableModel;

/// Default upper end of the exponent range used when sampling `psi`.
pub const DEFAULT_P_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    StrictlyIncreasing,
    NonDecreasing,
    /// No monotonicity is claimed.
    Unspecified,
}

impl Monotonicity {
    pub fn is_monotone(self) -> bool {
        !matches!(self, Monotonicity::Unspecified)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct GeneratingFunction {
    evaluator: Evaluator,
    monotonicity: Monotonicity,
    value_at_one: f64,
    description: String,
}

impl fmt::Debug for GeneratingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratingFunction")
            .field("description", &self.description)
            .field("monotonicity", &self.monotonicity)
            .field("value_at_one", &self.value_at_one)
            .finish()
    }
}

impl fmt::Display for GeneratingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

impl GeneratingFunction {
    /// Wraps an arbitrary evaluator. `psi(1)` must be finite and positive.
    pub fn from_fn<F>(evaluator: F, monotonicity: Monotonicity, description: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let value_at_one = evaluator(1.0);
        if !(value_at_one.is_finite() && value_at_one > 0.0) {
            return Err(GlsError::domain("psi(1)", value_at_one, "finite and positive"));
        }
        Ok(GeneratingFunction {
            evaluator: Arc::new(evaluator),
            monotonicity,
            value_at_one,
            description: description.into(),
        })
    }

    /// `psi(p) = p^(1/r) ln^delta(2 + p) / ln^delta(3)`, normalized so that
    /// `psi(1) = 1`. Strictly increasing for `delta >= 0`.
    pub fn power_slowvary(params: PowerSlowVaryParams) -> Result<Self> {
        params.check()?;
        let PowerSlowVaryParams { r, delta } = params;
        let at_one = 3f64.ln().powf(delta);
        let mono = if delta >= 0.0 {
            Monotonicity::StrictlyIncreasing
        } else {
            Monotonicity::Unspecified
        };
        let f = move |p: f64| p.powf(1.0 / r) * (2.0 + p).ln().powf(delta) / at_one;
        Self::from_fn(f, mono, PsiSpec::PowerSlowVary(params).to_string())
    }

    /// The same family without the division by `psi(1)`; `psi(1) = ln^delta(3)`.
    pub fn power_slowvary_raw(params: PowerSlowVaryParams) -> Result<Self> {
        params.check()?;
        let PowerSlowVaryParams { r, delta } = params;
        let mono = if delta >= 0.0 {
            Monotonicity::StrictlyIncreasing
        } else {
            Monotonicity::Unspecified
        };
        let f = move |p: f64| p.powf(1.0 / r) * (2.0 + p).ln().powf(delta);
        Self::from_fn(f, mono, PsiSpec::PowerSlowVaryRaw(params).to_string())
    }

    /// `p^(1/r) (1 + amp cos^2(pi p)) / (1 + amp)`: normalized but not monotone.
    pub fn oscillating(r: f64, amp: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(GlsError::InvalidParameter(format!("r must be positive, got {r}")));
        }
        if !(amp >= 0.0) {
            return Err(GlsError::InvalidParameter(format!("amp must be nonnegative, got {amp}")));
        }
        let f = move |p: f64| {
            let c = (std::f64::consts::PI * p).cos();
            p.powf(1.0 / r) * (1.0 + amp * c * c) / (1.0 + amp)
        };
        Self::from_fn(f, Monotonicity::Unspecified, PsiSpec::Oscillating { r, amp }.to_string())
    }

    /// The natural generating function `psi_f(p) = |f|_p / |f|_1` of a model.
    /// Nondecreasing by the Lyapunov inequality.
    pub fn natural(model: &RandomVariableModel) -> Result<Self> {
        let l1 = model.lp_norm(1.0)?;
        if !(l1 > 0.0) {
            return Err(GlsError::Degenerate(format!(
                "|f|_1 = {l1} for model '{}'",
                model.label()
            )));
        }
        let m = model.clone();
        let f = move |p: f64| {
            if p == 1.0 {
                return 1.0;
            }
            match m.lp_norm(p) {
                Ok(v) => v / l1,
                Err(_) => f64::NAN,
            }
        };
        Self::from_fn(f, Monotonicity::NonDecreasing, format!("natural[{}]", model.label()))
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(GlsError::domain("p", p, "p >= 1"));
        }
        let v = (self.evaluator)(p);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(GlsError::domain("psi(p)", v, "finite and positive"))
        }
    }

    /// Evaluates without the domain and positivity checks.
    #[inline]
    pub(crate) fn raw(&self, p: f64) -> f64 {
        (self.evaluator)(p)
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn value_at_one(&self) -> f64 {
        self.value_at_one
    }

    pub fn is_normalized(&self) -> bool {
        self.value_at_one == 1.0
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSlowVaryParams {
    /// Power exponent, `psi ~ p^(1/r)`.
    pub r: f64,
    /// Exponent of the slowly varying factor `ln(2 + p)`.
    pub delta: f64,
}

impl PowerSlowVaryParams {
    pub fn new(r: f64, delta: f64) -> Result<Self> {
        let params = PowerSlowVaryParams { r, delta };
        params.check()?;
        Ok(params)
    }

    fn check(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(GlsError::InvalidParameter(format!("r must be positive, got {}", self.r)));
        }
        if !self.delta.is_finite() {
            return Err(GlsError::InvalidParameter(format!("delta must be finite, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Textual form of the built-in families, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiSpec {
    PowerSlowVary(PowerSlowVaryParams),
    PowerSlowVaryRaw(PowerSlowVaryParams),
    Oscillating { r: f64, amp: f64 },
    /// `|f|_p / |f|_1` of whatever model it is paired with.
    Natural,
}

impl PsiSpec {
    pub fn build(&self, model: Option<&RandomVariableModel>) -> Result<GeneratingFunction> {
        match *self {
            PsiSpec::PowerSlowVary(p) => GeneratingFunction::power_slowvary(p),
            PsiSpec::PowerSlowVaryRaw(p) => GeneratingFunction::power_slowvary_raw(p),
            PsiSpec::Oscillating { r, amp } => GeneratingFunction::oscillating(r, amp),
            PsiSpec::Natural => match model {
                Some(m) => GeneratingFunction::natural(m),
                None => Err(GlsError::InvalidParameter(
                    "the natural generating function needs a model".into(),
                )),
            },
        }
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSpec::PowerSlowVary(p) => write!(f, "power_slowvary(r={}, delta={})", p.r, p.delta),
            PsiSpec::PowerSlowVaryRaw(p) => write!(f, "power_slowvary_raw(r={}, delta={})", p.r, p.delta),
            PsiSpec::Oscillating { r, amp } => write!(f, "oscillating(r={r}, amp={amp})"),
            PsiSpec::Natural => f.write_str("natural"),
        }
    }
}

fn parse_named_args(body: &str, names: &[&str]) -> Result<Vec<f64>> {
    let mut out = vec![None; names.len()];
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| GlsError::Parse(format!("expected key=value, got '{part}'")))?;
        let idx = names
            .iter()
            .position(|n| *n == k.trim())
            .ok_or_else(|| GlsError::Parse(format!("unknown argument '{}'", k.trim())))?;
        let val: f64 = v
            .trim()
            .parse()
            .map_err(|_| GlsError::Parse(format!("bad number '{}'", v.trim())))?;
        out[idx] = Some(val);
    }
    out.into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| GlsError::Parse(format!("missing argument '{n}'"))))
        .collect()
}

impl FromStr for PsiSpec {
    type Err = GlsError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "natural" {
            return Ok(PsiSpec::Natural);
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| GlsError::Parse(format!("unrecognized psi '{s}'")))?;
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| GlsError::Parse(format!("missing ')' in '{s}'")))?;
        match name.trim() {
            "power_slowvary" | "power_slowvary_raw" => {
                let v = parse_named_args(body, &["r", "delta"])?;
                let params = PowerSlowVaryParams::new(v[0], v[1])?;
                Ok(if name.trim() == "power_slowvary" {
                    PsiSpec::PowerSlowVary(params)
                } else {
                    PsiSpec::PowerSlowVaryRaw(params)
                })
            }
            "oscillating" => {
                let v = parse_named_args(body, &["r", "amp"])?;
                Ok(PsiSpec::Oscillating { r: v[0], amp: v[1] })
            }
            other => Err(GlsError::Parse(format!("unknown psi family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub p_max: f64,
    pub grid_points: usize,
    pub positive: bool,
    pub strictly_increasing: bool,
    pub nondecreasing: bool,
    /// First grid point where monotonicity (as declared) breaks.
    pub first_monotonicity_failure: Option<f64>,
    pub value_at_one: f64,
    /// `|psi(1) - 1|`.
    pub normalization_error: f64,
    pub normalized: bool,
}

impl ValidationReport {
    /// Monotonicity in the sense the function declares (strict for
    /// `StrictlyIncreasing`, non-strict otherwise).
    pub fn monotone_as_declared(&self, declared: Monotonicity) -> bool {
        match declared {
            Monotonicity::StrictlyIncreasing => self.strictly_increasing,
            _ => self.nondecreasing,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.positive && self.strictly_increasing && self.normalized
    }
}

/// Samples `psi` on an even grid over `[1, p_max]` and reports positivity,
/// monotonicity and normalization. Failures are carried in the report.
pub fn psi_validate(psi: &GeneratingFunction, p_max: f64, grid_points: usize) -> Result<ValidationReport> {
    if !(p_max > 1.0) {
        return Err(GlsError::domain("p_max", p_max, "p_max > 1"));
    }
    if grid_points < 2 {
        return Err(GlsError::InvalidParameter(format!("grid_points must be >= 2, got {grid_points}")));
    }
    let grid = crate::numeric::linear_points(1.0, p_max, grid_points);
    let values: Vec<f64> = grid.iter().map(|&p| psi.raw(p)).collect();
    let positive = values.iter().all(|v| v.is_finite() && *v > 0.0);
    let mut strict = true;
    let mut nondec = true;
    let mut first_failure = None;
    for (i, w) in values.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            strict = false;
            if psi.monotonicity() == Monotonicity::StrictlyIncreasing && first_failure.is_none() {
                first_failure = Some(grid[i + 1]);
            }
        }
        if !(w[0] <= w[1]) {
            nondec = false;
            if first_failure.is_none() {
                first_failure = Some(grid[i + 1]);
            }
        }
    }
    let at_one = psi.raw(1.0);
    Ok(ValidationReport {
        p_max,
        grid_points,
        positive,
        strictly_increasing: strict,
        nondecreasing: nondec,
        first_monotonicity_failure: first_failure,
        value_at_one: at_one,
        normalization_error: (at_one - 1.0).abs(),
        normalized: at_one == 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt_psi() -> GeneratingFunction {
        GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(2.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn sqrt_family_values() {
        let psi = sqrt_psi();
        assert_eq!(psi.eval(1.0).unwrap(), 1.0);
        assert_eq!(psi.eval(4.0).unwrap(), 2.0);
        assert!(psi.is_normalized());
        assert_eq!(psi.monotonicity(), Monotonicity::StrictlyIncreasing);
    }

    #[test]
    fn log_factor_normalizes_by_ln3() {
        let psi = GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(psi.eval(1.0).unwrap(), 1.0);
        // ln 9 / ln 3 = 2
        let v = psi.eval(7.0).unwrap();
        assert!((v - 2.0 * 7f64.sqrt()).abs() < 1e-14, "{v}");
    }

    #[test]
    fn identity_power() {
        let psi = GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(1.0, 0.0).unwrap()).unwrap();
        for p in [1.0, 2.5, 10.0, 123.0] {
            assert_eq!(psi.eval(p).unwrap(), p);
        }
    }

    #[test]
    fn rejects_nonpositive_r() {
        assert!(PowerSlowVaryParams::new(0.0, 1.0).is_err());
        assert!(PowerSlowVaryParams::new(-1.0, 0.0).is_err());
        assert!("power_slowvary(r=0, delta=1)".parse::<PsiSpec>().is_err());
    }

    #[test]
    fn eval_below_one_is_domain_error() {
        assert!(matches!(sqrt_psi().eval(0.5), Err(GlsError::Domain { .. })));
    }

    #[test]
    fn validate_sqrt_passes() {
        let rep = psi_validate(&sqrt_psi(), 100.0, 1000).unwrap();
        assert!(rep.all_passed());
    }

    #[test]
    fn validate_reciprocal_fails_monotonicity() {
        let psi = GeneratingFunction::from_fn(|p| 1.0 / p, Monotonicity::Unspecified, "1/p").unwrap();
        let rep = psi_validate(&psi, 100.0, 1000).unwrap();
        assert!(rep.positive);
        assert!(!rep.nondecreasing);
        assert!(!rep.strictly_increasing);
        assert!(!rep.all_passed());
    }

    #[test]
    fn validate_unnormalized_reports_ln3() {
        let psi = GeneratingFunction::power_slowvary_raw(PowerSlowVaryParams::new(2.0, 1.0).unwrap()).unwrap();
        let rep = psi_validate(&psi, 100.0, 200).unwrap();
        assert!(!rep.normalized);
        assert!((rep.value_at_one - 3f64.ln()).abs() < 1e-15);
        assert!((rep.normalization_error - (3f64.ln() - 1.0)).abs() < 1e-15);
        assert!(rep.strictly_increasing);
    }

    #[test]
    fn natural_psi_of_gaussian_at_two() {
        let psi = GeneratingFunction::natural(&RandomVariableModel::gaussian()).unwrap();
        let v = psi.eval(2.0).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn natural_psi_of_constant_is_one() {
        let psi = GeneratingFunction::natural(&RandomVariableModel::constant(3.0)).unwrap();
        for p in [1.0, 2.0, 17.5, 100.0] {
            assert!((psi.eval(p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn natural_psi_of_uniform_matches_closed_form() {
        let psi = GeneratingFunction::natural(&RandomVariableModel::uniform01()).unwrap();
        for p in [1.5, 3.0, 10.0] {
            let expected = (p + 1.0f64).powf(-1.0 / p) / 0.5;
            assert!((psi.eval(p).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn natural_psi_of_zero_is_degenerate() {
        let r = GeneratingFunction::natural(&RandomVariableModel::constant(0.0));
        assert!(matches!(r, Err(GlsError::Degenerate(_))));
    }

    #[test]
    fn spec_text_roundtrip_examples() {
        let s: PsiSpec = "power_slowvary(r=2, delta=0)".parse().unwrap();
        assert_eq!(s.to_string(), "power_slowvary(r=2, delta=0)");
        let s: PsiSpec = "power_slowvary(r=2.5,delta=-0.5)".parse().unwrap();
        assert_eq!(s, PsiSpec::PowerSlowVary(PowerSlowVaryParams { r: 2.5, delta: -0.5 }));
        assert!("power_slowvary(r=2)".parse::<PsiSpec>().is_err());
        assert!("cubic(r=2)".parse::<PsiSpec>().is_err());
    }

    proptest! {
        #[test]
        fn normalized_family_is_at_least_one(r in 0.2f64..8.0, delta in 0.0f64..3.0, p in 1.0f64..1e4) {
            let psi = GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(r, delta).unwrap()).unwrap();
            prop_assert_eq!(psi.eval(1.0).unwrap(), 1.0);
            prop_assert!(psi.eval(p).unwrap() >= 1.0);
        }

        #[test]
        fn spec_display_parse_roundtrip(r in 1e-3f64..1e3, delta in -5.0f64..5.0) {
            let spec = PsiSpec::PowerSlowVary(PowerSlowVaryParams { r, delta });
            let back: PsiSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }

        #[test]
        fn natural_psi_nondecreasing(p1 in 1.0f64..60.0, dp in 0.0f64..60.0) {
            for model in [RandomVariableModel::gaussian(), RandomVariableModel::exponential(), RandomVariableModel::uniform01()] {
                let psi = GeneratingFunction::natural(&model).unwrap();
                let a = psi.eval(p1).unwrap();
                let b = psi.eval(p1 + dp).unwrap();
                prop_assert!(a <= b * (1.0 + 1e-12));
            }
        }
    }
}
