//! Exponent sets: restricted sets `S` in `[1, inf)`, grid sequences `q`, the
//! partition cells `A(m) = [q(m), q(m+1))`, and the constants `Z[psi, S]`,
//! `W[q, psi]` and `W-hat[q, psi]` that bound the full norm by the restricted
//! or discrete one.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{GlsError, Result};
use crate::numeric;
use crate::psi::GeneratingFunction;

/// Default truncation index for grid suprema.
pub const DEFAULT_M: usize = 60;
/// Samples per cell for the inner minimization of `W-hat`.
pub const DEFAULT_CELL_GRID: usize = 256;

#[derive(Clone)]
enum GridKind {
    Geometric { base: u64 },
    Integers,
    Custom { label: String, generator: Arc<dyn Fn(usize) -> f64 + Send + Sync> },
}

/// A strictly increasing sequence `q(1) = 1 < q(2) < ...`, materialized up to
/// index `M`. Indices are 1-based throughout.
#[derive(Clone)]
pub struct GridSequence {
    kind: GridKind,
    points: Vec<f64>,
}

impl fmt::Debug for GridSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridSequence({self})")
    }
}

impl fmt::Display for GridSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.points.len();
        match &self.kind {
            GridKind::Geometric { base } => write!(f, "geometric:D={base}:M={m}"),
            GridKind::Integers => write!(f, "integers:M={m}"),
            GridKind::Custom { label, .. } => write!(f, "{label}:M={m}"),
        }
    }
}

fn geometric_value(base: u64, m: usize) -> f64 {
    let exact = u32::try_from(m)
        .ok()
        .and_then(|e| (base as u128).checked_pow(e))
        .map(|pow| pow - base as u128 + 1);
    match exact {
        Some(v) => v as f64,
        None => (base as f64).powi(m as i32) - base as f64 + 1.0,
    }
}

impl GridSequence {
    /// `q(m) = D^m - D + 1`, `m = 1..=M`.
    pub fn geometric(base: u64, m: usize) -> Result<Self> {
        if base < 2 {
            return Err(GlsError::InvalidParameter(format!("geometric grid needs D >= 2, got {base}")));
        }
        Self::build(GridKind::Geometric { base }, m)
    }

    /// `q(m) = m`.
    pub fn integers(m: usize) -> Result<Self> {
        Self::build(GridKind::Integers, m)
    }

    /// An arbitrary generator `m -> q(m)`; validated on `1..=M`.
    pub fn from_fn<F>(generator: F, m: usize, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self::build(
            GridKind::Custom {
                label: label.into(),
                generator: Arc::new(generator),
            },
            m,
        )
    }

    fn build(kind: GridKind, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(GlsError::InvalidParameter("grid truncation M must be >= 1".into()));
        }
        let mut grid = GridSequence { kind, points: Vec::new() };
        grid.points = (1..=m).map(|i| grid.value_at(i)).collect();
        if grid.points[0] != 1.0 {
            return Err(GlsError::InvalidParameter(format!("q(1) must be 1, got {}", grid.points[0])));
        }
        if let Some(i) = grid.points.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(GlsError::InvalidParameter(format!(
                "grid is not strictly increasing at m = {}",
                i + 2
            )));
        }
        Ok(grid)
    }

    /// `q(m)` for any `m >= 1`, including indices beyond the truncation.
    pub fn value_at(&self, m: usize) -> f64 {
        match &self.kind {
            GridKind::Geometric { base } => geometric_value(*base, m),
            GridKind::Integers => m as f64,
            GridKind::Custom { generator, .. } => generator(m),
        }
    }

    /// The same sequence truncated at a different `M`.
    pub fn with_truncation(&self, m: usize) -> Result<Self> {
        Self::build(self.kind.clone(), m)
    }

    /// `q(m)`, 1-based, within the truncation.
    pub fn q(&self, m: usize) -> f64 {
        self.points[m - 1]
    }

    pub fn truncation(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `max_m q(m+1)/q(m)` over the materialized points (1 if `M = 1`).
    pub fn max_ratio(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] / w[0]).fold(1.0, f64::max)
    }

    /// Smallest index `m` (possibly beyond `M`) with `q(m) >= p`, together with
    /// `q(m)`; `None` if the generator does not reach `p` in a bounded search.
    pub fn first_at_or_above(&self, p: f64) -> Option<(usize, f64)> {
        let i = self.points.partition_point(|&q| q < p);
        if i < self.points.len() {
            return Some((i + 1, self.points[i]));
        }
        if let GridKind::Integers = self.kind {
            let m = p.ceil();
            return (m < 9.0e15).then_some((m as usize, m));
        }
        let mut m = self.points.len();
        while m < (1 << 20) {
            m += 1;
            let q = self.value_at(m);
            if !q.is_finite() {
                return None;
            }
            if q >= p {
                return Some((m, q));
            }
        }
        None
    }

    /// Cells `A(m) = [q(m), q(m+1))` for `m = 1..M-1`.
    pub fn partition_cells(&self) -> Result<Vec<PartitionCell>> {
        if self.points.len() < 2 {
            return Err(GlsError::InvalidParameter("partition needs M >= 2".into()));
        }
        Ok(self
            .points
            .windows(2)
            .enumerate()
            .map(|(i, w)| PartitionCell {
                m: i + 1,
                lower: w[0],
                upper: w[1],
            })
            .collect())
    }
}

impl FromStr for GridSequence {
    type Err = GlsError;

    /// `geometric:D=<d>:M=<m>` or `integers:M=<m>`, optionally prefixed by `grid:`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("grid:").unwrap_or(s);
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let mut d = None;
        let mut m = None;
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| GlsError::Parse(format!("expected key=value in grid spec, got '{part}'")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| GlsError::Parse(format!("bad integer '{v}' in grid spec")))?;
            match k.trim() {
                "D" => d = Some(v),
                "M" => m = Some(v),
                other => return Err(GlsError::Parse(format!("unknown grid key '{other}'"))),
            }
        }
        let m = m.unwrap_or(DEFAULT_M);
        match kind {
            "geometric" => {
                let d = d.ok_or_else(|| GlsError::Parse("geometric grid needs D=<d>".into()))?;
                GridSequence::geometric(d as u64, m)
            }
            "integers" => GridSequence::integers(m),
            other => Err(GlsError::Parse(format!("unknown grid kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionCell {
    pub m: usize,
    pub lower: f64,
    /// Excluded: the cell is `[lower, upper)`.
    pub upper: f64,
}

impl PartitionCell {
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p < self.upper
    }
}

/// `[lo, hi]` or `[lo, hi)`; `hi` may be `+inf` (a final ray).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, hi_closed: hi.is_finite() }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, hi_closed: false }
    }

    pub fn ray(lo: f64) -> Self {
        Interval {
            lo,
            hi: f64::INFINITY,
            hi_closed: false,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && (p < self.hi || (self.hi_closed && p == self.hi))
    }
}

/// A subset of `[1, inf)` containing 1: a finite union of intervals, isolated
/// points, and optionally the points of a grid sequence (which continues past
/// its truncation).
#[derive(Debug, Clone)]
pub struct RestrictedSet {
    intervals: Vec<Interval>,
    points: Vec<f64>,
    grid: Option<GridSequence>,
}

impl RestrictedSet {
    pub fn new(mut intervals: Vec<Interval>, mut points: Vec<f64>, grid: Option<GridSequence>) -> Result<Self> {
        for iv in &intervals {
            if !(iv.lo >= 1.0 && iv.lo <= iv.hi) || iv.lo.is_nan() || iv.hi.is_nan() {
                return Err(GlsError::InvalidParameter(format!(
                    "interval [{}, {}] must satisfy 1 <= lo <= hi",
                    iv.lo, iv.hi
                )));
            }
            if iv.lo == iv.hi && !iv.hi_closed {
                return Err(GlsError::InvalidParameter(format!("interval [{0}, {0}) is empty", iv.lo)));
            }
        }
        if let Some(p) = points.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
            return Err(GlsError::InvalidParameter(format!("point {p} is outside [1, inf)")));
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in intervals.windows(2) {
            let overlap = w[1].lo < w[0].hi || (w[1].lo == w[0].hi && w[0].hi_closed);
            if overlap {
                return Err(GlsError::InvalidParameter(format!(
                    "intervals starting at {} and {} overlap",
                    w[0].lo, w[1].lo
                )));
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points.retain(|p| !intervals.iter().any(|iv| iv.contains(*p)));
        let set = RestrictedSet { intervals, points, grid };
        if !set.contains(1.0) {
            return Err(GlsError::InvalidParameter("the set must contain 1".into()));
        }
        Ok(set)
    }

    /// `[1, inf)`.
    pub fn full() -> Self {
        RestrictedSet {
            intervals: vec![Interval::ray(1.0)],
            points: Vec::new(),
            grid: None,
        }
    }

    /// The point set of a grid, continued past its truncation.
    pub fn from_grid(grid: GridSequence) -> Self {
        RestrictedSet {
            intervals: Vec::new(),
            points: Vec::new(),
            grid: Some(grid),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn grid(&self) -> Option<&GridSequence> {
        self.grid.as_ref()
    }

    /// Whether `S` is unbounded above (has a final ray or a grid).
    pub fn is_unbounded(&self) -> bool {
        self.grid.is_some() || self.intervals.iter().any(|iv| iv.hi.is_infinite())
    }

    pub fn contains(&self, p: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(p))
            || self.points.binary_search_by(|x| x.total_cmp(&p)).is_ok()
            || self
                .grid
                .as_ref()
                .is_some_and(|g| g.first_at_or_above(p).is_some_and(|(_, q)| q == p))
    }

    /// `p+[S](p) = inf { t in S : t >= p }`; `+inf` when no such `t` exists.
    pub fn p_plus(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(GlsError::domain("p", p, "p >= 1"));
        }
        let mut best = f64::INFINITY;
        for iv in &self.intervals {
            if iv.contains(p) {
                return Ok(p);
            }
            if iv.lo >= p {
                best = best.min(iv.lo);
            }
        }
        let i = self.points.partition_point(|&x| x < p);
        if let Some(&x) = self.points.get(i) {
            best = best.min(x);
        }
        if let Some((_, q)) = self.grid.as_ref().and_then(|g| g.first_at_or_above(p)) {
            best = best.min(q);
        }
        Ok(best)
    }

    /// Sorted, disjoint components as `(lo, hi, hi_closed)`; points become
    /// degenerate closed intervals. Grid points are materialized past every
    /// finite bound of the other components.
    fn components(&self) -> Vec<Interval> {
        let mut comps: Vec<Interval> = self.intervals.clone();
        comps.extend(self.points.iter().map(|&x| Interval::closed(x, x)));
        if let Some(g) = &self.grid {
            let finite_top = comps
                .iter()
                .map(|c| c.hi)
                .filter(|h| h.is_finite())
                .fold(1.0, f64::max);
            let mut pts: Vec<f64> = g.points().to_vec();
            let mut m = pts.len();
            while *pts.last().expect("grid has M >= 1 points") <= finite_top && m < (1 << 20) {
                m += 1;
                let q = g.value_at(m);
                if !q.is_finite() {
                    break;
                }
                pts.push(q);
            }
            comps.extend(
                pts.into_iter()
                    .filter(|&q| !self.intervals.iter().any(|iv| iv.contains(q)) && !self.points.contains(&q))
                    .map(|q| Interval::closed(q, q)),
            );
        }
        comps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        comps
    }

    /// Gaps `(left, right)` of `S` in increasing order: open intervals outside
    /// `S` whose infimum is `left` and whose `p+` is `right`.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        let comps = self.components();
        let mut gaps = Vec::new();
        let mut reach = comps[0].hi;
        for c in &comps[1..] {
            if reach.is_infinite() {
                break;
            }
            if c.lo > reach {
                gaps.push((reach, c.lo));
            }
            reach = reach.max(c.hi);
        }
        gaps
    }

    /// Largest finite element reached by the components, if `S` is bounded.
    fn bounded_top(&self) -> Option<f64> {
        if self.is_unbounded() {
            None
        } else {
            Some(self.components().iter().map(|c| c.hi).fold(1.0, f64::max))
        }
    }
}

impl fmt::Display for RestrictedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals == [Interval::ray(1.0)] && self.points.is_empty() && self.grid.is_none() {
            return f.write_str("full");
        }
        let mut parts = Vec::new();
        if !self.intervals.is_empty() {
            let ivs: Vec<String> = self
                .intervals
                .iter()
                .map(|iv| {
                    if iv.hi.is_infinite() {
                        format!("{}-inf", iv.lo)
                    } else if iv.hi_closed {
                        format!("{}-{}", iv.lo, iv.hi)
                    } else {
                        format!("{}-{})", iv.lo, iv.hi)
                    }
                })
                .collect();
            parts.push(format!("intervals:{}", ivs.join(",")));
        }
        if !self.points.is_empty() {
            let pts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
            parts.push(format!("points:{}", pts.join(",")));
        }
        if let Some(g) = &self.grid {
            parts.push(format!("grid:{g}"));
        }
        f.write_str(&parts.join(";"))
    }
}

fn parse_bound(s: &str) -> Result<f64> {
    let s = s.trim();
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse().map_err(|_| GlsError::Parse(format!("bad number '{s}' in set spec")))
}

impl FromStr for RestrictedSet {
    type Err = GlsError;

    /// `full`, `intervals:1-2,3-inf` (append `)` for a half-open right end),
    /// `points:1,3.5`, `grid:<grid spec>`; several parts join with `;`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full" {
            return Ok(RestrictedSet::full());
        }
        let mut intervals = Vec::new();
        let mut points = Vec::new();
        let mut grid = None;
        for part in s.split(';') {
            let part = part.trim();
            if let Some(body) = part.strip_prefix("intervals:") {
                for item in body.split(',') {
                    let item = item.trim();
                    let (body, half_open) = match item.strip_suffix(')') {
                        Some(b) => (b, true),
                        None => (item, false),
                    };
                    let (lo, hi) = body
                        .split_once('-')
                        .ok_or_else(|| GlsError::Parse(format!("expected lo-hi, got '{item}'")))?;
                    let (lo, hi) = (parse_bound(lo)?, parse_bound(hi)?);
                    intervals.push(if hi.is_infinite() {
                        Interval::ray(lo)
                    } else if half_open {
                        Interval::half_open(lo, hi)
                    } else {
                        Interval::closed(lo, hi)
                    });
                }
            } else if let Some(body) = part.strip_prefix("points:") {
                for item in body.split(',') {
                    points.push(parse_bound(item)?);
                }
            } else if part.starts_with("grid:") {
                grid = Some(part.parse::<GridSequence>()?);
            } else {
                return Err(GlsError::Parse(format!("unrecognized set spec '{part}'")));
            }
        }
        RestrictedSet::new(intervals, points, grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZReport {
    /// `Z[psi, S]`, or `+inf` for a bounded set.
    pub value: f64,
    /// Set when `S` is bounded above: `p+` is `+inf` past its top.
    pub unbounded_gap: bool,
    /// The gap attaining the maximum ratio, if any gap does better than 1.
    pub attaining_gap: Option<(f64, f64)>,
    pub gaps_examined: usize,
    /// For grid-continued sets: whether the gap ratio is non-increasing at the
    /// truncation boundary.
    pub tail_decreasing: Option<bool>,
}

/// `Z[psi, S] = sup_p psi(p+(p)) / psi(p)`, computed from the gaps of `S`: for
/// monotone `psi` the supremum over a gap `(a, b)` is the limit `psi(b)/psi(a)`.
pub fn z_constant(set: &RestrictedSet, psi: &GeneratingFunction) -> Result<ZReport> {
    if !psi.monotonicity().is_monotone() {
        return Err(GlsError::NonMonotone(psi.description().to_string()));
    }
    let gaps = set.gaps();
    if set.bounded_top().is_some() {
        return Ok(ZReport {
            value: f64::INFINITY,
            unbounded_gap: true,
            attaining_gap: None,
            gaps_examined: gaps.len(),
            tail_decreasing: None,
        });
    }
    let mut value = 1.0;
    let mut attaining = None;
    let mut ratios = Vec::with_capacity(gaps.len());
    for &(a, b) in &gaps {
        let r = psi.eval(b)? / psi.eval(a)?;
        ratios.push(r);
        if r > value {
            value = r;
            attaining = Some((a, b));
        }
    }
    let tail_decreasing = match (&set.grid, ratios.len()) {
        (Some(_), n) if n >= 2 => Some(ratios[n - 1] <= ratios[n - 2]),
        _ => None,
    };
    Ok(ZReport {
        value,
        unbounded_gap: false,
        attaining_gap: attaining,
        gaps_examined: gaps.len(),
        tail_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WReport {
    pub value: f64,
    /// Index `m` attaining the supremum (smallest on ties).
    pub attaining_m: usize,
    /// Per-cell ratios, index `m - 1`.
    pub ratios: Vec<f64>,
    /// Whether the ratio sequence is non-increasing at the truncation
    /// boundary; `None` with fewer than two ratios.
    pub tail_decreasing: Option<bool>,
}

fn w_report(ratios: Vec<f64>) -> WReport {
    let mut value = f64::NEG_INFINITY;
    let mut attaining_m = 1;
    for (i, &r) in ratios.iter().enumerate() {
        if r > value {
            value = r;
            attaining_m = i + 1;
        }
    }
    let n = ratios.len();
    let tail_decreasing = (n >= 2).then(|| ratios[n - 1] <= ratios[n - 2]);
    WReport {
        value,
        attaining_m,
        ratios,
        tail_decreasing,
    }
}

/// `W[q, psi] = sup_m psi(q(m+1)) / psi(q(m))` over `m = 1..M-1`.
pub fn w_constant(grid: &GridSequence, psi: &GeneratingFunction) -> Result<WReport> {
    if grid.truncation() < 2 {
        return Err(GlsError::InvalidParameter("W needs M >= 2".into()));
    }
    let values = grid.points().iter().map(|&q| psi.eval(q)).collect::<Result<Vec<_>>>()?;
    Ok(w_report(values.windows(2).map(|w| w[1] / w[0]).collect()))
}

/// `min` of `psi` over the closed cell `[lo, hi]`: `samples` even points,
/// then golden-section refinement around the best one.
pub fn cell_minimum(psi: &GeneratingFunction, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    let pts = numeric::linear_points(lo, hi, samples.max(2));
    let vals = pts.iter().map(|&p| psi.eval(p)).collect::<Result<Vec<_>>>()?;
    let (k, &best) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least two samples");
    let a = pts[k.saturating_sub(1)];
    let b = pts[(k + 1).min(pts.len() - 1)];
    let tol = (b - a) * 1e-10;
    let (_, neg) = numeric::golden_section_maximize(|p| -psi.raw(p), a, b, tol);
    let refined = -neg;
    Ok(if refined.is_finite() && refined > 0.0 {
        best.min(refined)
    } else {
        best
    })
}

/// `W-hat[q, psi] = sup_m psi(q(m+1)) / min_{A(m)} psi`; needs no
/// monotonicity. Cells are processed in parallel and reduced in index order.
pub fn w_hat_constant(grid: &GridSequence, psi: &GeneratingFunction, cell_grid: usize) -> Result<WReport> {
    if cell_grid < 2 {
        return Err(GlsError::InvalidParameter(format!("cell_grid must be >= 2, got {cell_grid}")));
    }
    let cells = grid.partition_cells()?;
    let ratios = cells
        .par_iter()
        .map(|c| Ok(psi.eval(c.upper)? / cell_minimum(psi, c.lower, c.upper, cell_grid)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(w_report(ratios))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::{Monotonicity, PowerSlowVaryParams};

    fn power(r: f64, delta: f64) -> GeneratingFunction {
        GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(r, delta).unwrap()).unwrap()
    }

    #[test]
    fn geometric_grid_values() {
        assert_eq!(GridSequence::geometric(2, 4).unwrap().points(), &[1.0, 3.0, 7.0, 15.0]);
        assert_eq!(GridSequence::geometric(3, 3).unwrap().points(), &[1.0, 7.0, 25.0]);
        for d in 2..10 {
            assert_eq!(GridSequence::geometric(d, 1).unwrap().q(1), 1.0);
        }
        assert!(GridSequence::geometric(1, 4).is_err());
        let g = GridSequence::geometric(2, 60).unwrap();
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn integer_grid() {
        let g = GridSequence::integers(3).unwrap();
        assert_eq!(g.points(), &[1.0, 2.0, 3.0]);
        assert_eq!(GridSequence::integers(100).unwrap().max_ratio(), 2.0);
        assert!(GridSequence::integers(0).is_err());
    }

    #[test]
    fn custom_grid_validation() {
        assert!(GridSequence::from_fn(|m| m as f64 + 1.0, 5, "shifted").is_err());
        assert!(GridSequence::from_fn(|m| if m < 3 { m as f64 } else { 2.0 }, 5, "flat").is_err());
        let g = GridSequence::from_fn(|m| (m * m) as f64, 5, "squares").unwrap();
        assert_eq!(g.first_at_or_above(30.0), Some((6, 36.0)));
    }

    #[test]
    fn partition_of_dyadic_grid() {
        let cells = GridSequence::geometric(2, 3).unwrap().partition_cells().unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!((cells[0].lower, cells[0].upper), (1.0, 3.0));
        assert_eq!((cells[1].lower, cells[1].upper), (3.0, 7.0));
        assert!(GridSequence::integers(1).unwrap().partition_cells().is_err());
    }

    #[test]
    fn partition_is_disjoint_cover() {
        let cells = GridSequence::geometric(3, 8).unwrap().partition_cells().unwrap();
        let top = cells.last().unwrap().upper;
        for p in numeric::linear_points(1.0, top, 5001) {
            let n = cells.iter().filter(|c| c.contains(p)).count();
            assert_eq!(n, usize::from(p < top), "p = {p}");
        }
    }

    #[test]
    fn p_plus_examples() {
        let s: RestrictedSet = "intervals:1-2,3-inf".parse().unwrap();
        assert_eq!(s.p_plus(1.5).unwrap(), 1.5);
        assert_eq!(s.p_plus(2.5).unwrap(), 3.0);
        assert_eq!(s.p_plus(2.0).unwrap(), 2.0);
        assert!(s.p_plus(0.5).is_err());
        let g = RestrictedSet::from_grid(GridSequence::geometric(2, 60).unwrap());
        assert_eq!(g.p_plus(4.0).unwrap(), 7.0);
        assert_eq!(g.p_plus(7.0).unwrap(), 7.0);
        let short = RestrictedSet::from_grid(GridSequence::geometric(2, 3).unwrap());
        assert_eq!(short.p_plus(100.0).unwrap(), 127.0);
        let bounded: RestrictedSet = "intervals:1-2;points:5".parse().unwrap();
        assert_eq!(bounded.p_plus(3.0).unwrap(), 5.0);
        assert_eq!(bounded.p_plus(6.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn set_must_contain_one() {
        assert!("intervals:2-inf".parse::<RestrictedSet>().is_err());
        assert!("intervals:1-3,2-inf".parse::<RestrictedSet>().is_err());
        assert!("intervals:1-2),2-inf".parse::<RestrictedSet>().is_ok());
    }

    #[test]
    fn set_spec_display_roundtrip() {
        for spec in ["full", "intervals:1-2,3-inf", "intervals:1-2),2.5-inf", "points:1,4.5", "grid:geometric:D=2:M=60", "grid:integers:M=100"] {
            let s: RestrictedSet = spec.parse().unwrap();
            assert_eq!(s.to_string(), spec);
        }
    }

    #[test]
    fn z_examples() {
        let full = RestrictedSet::full();
        assert_eq!(z_constant(&full, &power(2.0, 0.0)).unwrap().value, 1.0);
        let s: RestrictedSet = "intervals:1-2,3-inf".parse().unwrap();
        let z = z_constant(&s, &power(1.0, 0.0)).unwrap();
        assert_eq!(z.value, 1.5);
        assert_eq!(z.attaining_gap, Some((2.0, 3.0)));
        let g = RestrictedSet::from_grid(GridSequence::geometric(2, 60).unwrap());
        let z = z_constant(&g, &power(2.0, 0.0)).unwrap();
        assert!((z.value - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(z.tail_decreasing, Some(true));
    }

    #[test]
    fn z_is_infinite_for_bounded_set() {
        let s: RestrictedSet = "intervals:1-5".parse().unwrap();
        let z = z_constant(&s, &power(2.0, 0.0)).unwrap();
        assert!(z.unbounded_gap);
        assert_eq!(z.value, f64::INFINITY);
    }

    #[test]
    fn z_rejects_nonmonotone_psi() {
        let psi = GeneratingFunction::oscillating(2.0, 0.5).unwrap();
        assert!(matches!(z_constant(&RestrictedSet::full(), &psi), Err(GlsError::NonMonotone(_))));
    }

    #[test]
    fn z_of_grid_set_matches_w() {
        for grid in [GridSequence::geometric(2, 60).unwrap(), GridSequence::geometric(3, 30).unwrap(), GridSequence::integers(60).unwrap()] {
            for psi in [power(2.0, 0.0), power(1.0, 0.0), power(3.0, 1.5)] {
                let z = z_constant(&RestrictedSet::from_grid(grid.clone()), &psi).unwrap().value;
                let w = w_constant(&grid, &psi).unwrap().value;
                assert!((z - w).abs() <= 1e-12 * w, "{grid} {psi}: {z} vs {w}");
            }
        }
    }

    #[test]
    fn w_examples() {
        let w = w_constant(&GridSequence::geometric(2, 60).unwrap(), &power(2.0, 0.0)).unwrap();
        assert!((w.value - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(w.attaining_m, 1);
        assert_eq!(w.tail_decreasing, Some(true));
        let w = w_constant(&GridSequence::integers(60).unwrap(), &power(2.0, 0.0)).unwrap();
        assert!((w.value - 2f64.sqrt()).abs() < 1e-15);
        let w = w_constant(&GridSequence::geometric(3, 60).unwrap(), &power(1.0, 0.0)).unwrap();
        assert_eq!(w.value, 7.0);
        assert_eq!(w.ratios[1], 25.0 / 7.0);
    }

    #[test]
    fn w_hat_equals_w_for_monotone_psi() {
        let g = GridSequence::integers(40).unwrap();
        for psi in [power(2.0, 0.0), power(1.5, 1.0)] {
            let w = w_constant(&g, &psi).unwrap();
            let wh = w_hat_constant(&g, &psi, DEFAULT_CELL_GRID).unwrap();
            assert_eq!(w.value, wh.value);
        }
    }

    #[test]
    fn w_hat_dominates_w_for_dip() {
        let psi = GeneratingFunction::oscillating(2.0, 0.5).unwrap();
        assert_eq!(psi.monotonicity(), Monotonicity::Unspecified);
        let g = GridSequence::integers(30).unwrap();
        let w = w_constant(&g, &psi).unwrap();
        let wh = w_hat_constant(&g, &psi, DEFAULT_CELL_GRID).unwrap();
        assert!(wh.value >= w.value);
        // The dip at half-integers pulls the cell minimum well below psi(m).
        assert!(wh.value > w.value * 1.2);
        for (a, b) in w.ratios.iter().zip(&wh.ratios) {
            assert!(b >= a);
        }
    }

    #[test]
    fn cell_minimum_locates_interior_dip() {
        let psi = GeneratingFunction::from_fn(|p| 1.0 + (p - 2.3) * (p - 2.3), Monotonicity::Unspecified, "bowl").unwrap();
        let m = cell_minimum(&psi, 1.0, 4.0, 16).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "{m}");
    }
}
