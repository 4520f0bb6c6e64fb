//! The discrete transform `h[q, psi](x) = sup_m q(m) (ln x - ln psi(q(m)))`,
//! the Chebyshev-Markov tail envelope `P(|f| >= x) <= exp(-h(x / ||f||))` built
//! from the discrete norm, its Monte Carlo check, and the empirical estimate of
//! the smallest `K` for which `exp(-h(x / K))` dominates a sample's tail.

use std::f64::consts::E;

use crate::error::{GlsError, Result};
use crate::norms;
use crate::pgrid::GridSequence;
use crate::psi::GeneratingFunction;
use crate::rv::{RandomVariableModel, SampleBatch, SortedMagnitudes};

/// Extra indices enumerated past the first `m` with `psi(q(m)) >= x`.
pub const SAFETY_MARGIN: usize = 5;
/// Number of geometric points in the default `K` grid.
pub const K_GRID_POINTS: usize = 32;
const MAX_EXTENDED_M: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HTransform {
    pub value: f64,
    /// Index attaining the maximum (smallest on ties).
    pub argmax_m: usize,
    /// Number of terms enumerated.
    pub terms: usize,
}

/// `max_m q(m) (ln x - ln psi(q(m)))`, enumerating up to the first index with
/// `psi(q(m)) >= x` plus [`SAFETY_MARGIN`]. Past that index every term is
/// non-positive and, for increasing `psi`, decreasing.
pub fn h_transform(grid: &GridSequence, psi: &GeneratingFunction, x: f64) -> Result<HTransform> {
    if !(x >= 1.0) {
        return Err(GlsError::domain("x", x, "x >= 1"));
    }
    let ln_x = x.ln();
    let mut value = f64::NEG_INFINITY;
    let mut argmax_m = 1;
    let mut stop_at = None;
    let mut last_psi = f64::NAN;
    for (i, &q) in grid.points().iter().enumerate() {
        let m = i + 1;
        let psi_q = psi.eval(q)?;
        last_psi = psi_q;
        let term = q * (ln_x - psi_q.ln());
        if term > value {
            value = term;
            argmax_m = m;
        }
        if stop_at.is_none() && psi_q >= x {
            stop_at = Some(m + SAFETY_MARGIN);
        }
        if stop_at == Some(m) {
            return Ok(HTransform { value, argmax_m, terms: m });
        }
    }
    match stop_at {
        Some(_) => Ok(HTransform {
            value,
            argmax_m,
            terms: grid.truncation(),
        }),
        None => Err(GlsError::TruncationInsufficient {
            m: grid.truncation(),
            psi_at_end: last_psi,
            x,
        }),
    }
}

/// Raises the truncation of `grid` until `psi(q(M)) >= x_max` so that
/// [`h_transform`] is defined up to `x_max`.
pub fn extend_grid_for(grid: &GridSequence, psi: &GeneratingFunction, x_max: f64) -> Result<GridSequence> {
    let mut m = grid.truncation();
    if psi.eval(grid.q(m))? >= x_max {
        return Ok(grid.clone());
    }
    while m < MAX_EXTENDED_M {
        m += 1;
        let q = grid.value_at(m);
        if !q.is_finite() {
            break;
        }
        if psi.eval(q)? >= x_max {
            return grid.with_truncation(m);
        }
    }
    Err(GlsError::TruncationInsufficient {
        m,
        psi_at_end: psi.raw(grid.value_at(m)),
        x: x_max,
    })
}

/// `x -> exp(-h[q, psi](x / norm))` on `x >= e * norm`.
#[derive(Debug, Clone)]
pub struct TailEnvelope {
    grid: GridSequence,
    psi: GeneratingFunction,
    norm_value: f64,
}

impl TailEnvelope {
    pub fn new(grid: GridSequence, psi: GeneratingFunction, norm_value: f64) -> Result<Self> {
        if !(norm_value > 0.0 && norm_value.is_finite()) {
            return Err(GlsError::domain("norm", norm_value, "finite and positive"));
        }
        Ok(TailEnvelope { grid, psi, norm_value })
    }

    pub fn norm_value(&self) -> f64 {
        self.norm_value
    }

    /// `e * norm`: the envelope says nothing below this point.
    pub fn domain_threshold(&self) -> f64 {
        E * self.norm_value
    }

    pub fn grid(&self) -> &GridSequence {
        &self.grid
    }

    pub fn psi(&self) -> &GeneratingFunction {
        &self.psi
    }

    pub fn at(&self, x: f64) -> Result<f64> {
        if !(x >= self.domain_threshold()) {
            return Err(GlsError::domain("x", x, "x >= e * norm"));
        }
        let h = h_transform(&self.grid, &self.psi, x / self.norm_value)?;
        Ok((-h.value).exp().min(1.0))
    }
}

pub fn tail_envelope(env: &TailEnvelope, x: f64) -> Result<f64> {
    env.at(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub x: f64,
    pub empirical: f64,
    /// `None` below the domain threshold.
    pub envelope: Option<f64>,
    /// Three standard errors of a Bernoulli(envelope) mean over `n` draws.
    pub slack: f64,
    pub in_domain: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub norm: f64,
    pub threshold: f64,
    pub n: usize,
    pub seed: u64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

/// Compares the empirical survival of `n` seeded draws with the envelope at
/// each `x`; a row passes when `empirical <= envelope + 3 sqrt(env (1 - env) / n)`.
/// Points below `e * norm` are reported as out of domain and never fail.
pub fn tail_check(
    model: &RandomVariableModel,
    psi: &GeneratingFunction,
    grid: &GridSequence,
    n: usize,
    seed: u64,
    x_grid: &[f64],
) -> Result<TailReport> {
    let norm = norms::discrete_norm(model, psi, grid)?;
    if !norm.is_finite() {
        return Err(GlsError::InvalidParameter(format!(
            "discrete norm of '{}' is infinite; no envelope",
            model.label()
        )));
    }
    let envelope = TailEnvelope::new(grid.clone(), psi.clone(), norm.value)?;
    let batch = model.sample(n, seed)?;
    let mags = SortedMagnitudes::new(&batch)?;
    let mut rows = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let empirical = mags.survival(x);
        if x < envelope.domain_threshold() {
            rows.push(TailRow {
                x,
                empirical,
                envelope: None,
                slack: 0.0,
                in_domain: false,
                pass: true,
            });
            continue;
        }
        let env = envelope.at(x)?;
        let slack = 3.0 * (env * (1.0 - env) / n as f64).sqrt();
        rows.push(TailRow {
            x,
            empirical,
            envelope: Some(env),
            slack,
            in_domain: true,
            pass: empirical <= env + slack,
        });
    }
    Ok(TailReport {
        norm: norm.value,
        threshold: envelope.domain_threshold(),
        n,
        seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipEstimate {
    pub k_hat: f64,
    /// `[K e, max |x|]`; empty (lo > hi) when no sample reaches `K e`.
    pub x_range_checked: (f64, f64),
    /// Failures at `k_hat`; zero on success.
    pub violations: usize,
    pub points_checked: usize,
}

impl MembershipEstimate {
    /// `K-hat / norm`, the diagnostic comparing the estimate with a known norm.
    pub fn ratio_to(&self, norm: f64) -> f64 {
        self.k_hat / norm
    }
}

/// 32 geometric points over `[norm/4, 8 norm]`, or over the sample's
/// magnitude range when no norm is available.
pub fn default_k_grid(norm: Option<f64>, batch: &SampleBatch) -> Vec<f64> {
    let (lo, hi) = match norm {
        Some(v) if v > 0.0 && v.is_finite() => (v / 4.0, 8.0 * v),
        _ => {
            let pos = batch.values.iter().map(|v| v.abs()).filter(|v| *v > 0.0);
            let lo = pos.clone().fold(f64::INFINITY, f64::min);
            let hi = pos.fold(0.0, f64::max);
            if !lo.is_finite() {
                return vec![1.0];
            }
            (lo, hi)
        }
    };
    if lo == hi {
        return vec![lo];
    }
    crate::numeric::geometric_points(lo, hi, K_GRID_POINTS)
}

/// Smallest `K` in `k_grid` with `survival(x) <= exp(-h(x / K))` at every
/// sample magnitude `x >= K e`. The survival function only drops at sample
/// points and the envelope is nonincreasing, so those points suffice.
pub fn membership_k_estimate(
    batch: &SampleBatch,
    grid: &GridSequence,
    psi: &GeneratingFunction,
    k_grid: &[f64],
) -> Result<MembershipEstimate> {
    if k_grid.is_empty() {
        return Err(GlsError::InvalidParameter("K grid is empty".into()));
    }
    if k_grid.iter().any(|k| !(*k > 0.0 && k.is_finite())) || k_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(GlsError::InvalidParameter("K grid must be positive and ascending".into()));
    }
    let mags = SortedMagnitudes::new(batch)?;
    let sorted = mags.as_slice();
    let n = sorted.len();
    let x_max = mags.max();
    // Extended on demand; too-small K usually fail near K e, long before
    // x / K leaves the range of the given truncation.
    let mut grid = grid.clone();
    for &k in k_grid {
        let threshold = E * k;
        let start = sorted.partition_point(|&v| v < threshold);
        let mut violations = 0;
        let mut checked = 0;
        let mut i = start;
        while i < n {
            let x = sorted[i];
            let survival = (n - i) as f64 / n as f64;
            let h = match h_transform(&grid, psi, x / k) {
                Err(GlsError::TruncationInsufficient { .. }) => {
                    grid = extend_grid_for(&grid, psi, x / k)?;
                    h_transform(&grid, psi, x / k)?
                }
                other => other?,
            };
            let env = (-h.value).exp();
            checked += 1;
            if survival > env {
                violations += 1;
                break;
            }
            // skip ties
            i += sorted[i..].partition_point(|&v| v == x);
        }
        if violations == 0 {
            return Ok(MembershipEstimate {
                k_hat: k,
                x_range_checked: (threshold, x_max),
                violations: 0,
                points_checked: checked,
            });
        }
    }
    Err(GlsError::NoFeasibleK {
        largest: *k_grid.last().expect("nonempty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::PowerSlowVaryParams;

    fn sqrt_psi() -> GeneratingFunction {
        GeneratingFunction::power_slowvary(PowerSlowVaryParams::new(2.0, 0.0).unwrap()).unwrap()
    }

    fn brute_force_h(grid: &GridSequence, psi: &GeneratingFunction, x: f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &q) in grid.points().iter().enumerate() {
            let t = q * (x.ln() - psi.eval(q).unwrap().ln());
            if t > best.0 {
                best = (t, i + 1);
            }
        }
        best
    }

    #[test]
    fn h_at_one_is_zero() {
        let g = GridSequence::integers(100).unwrap();
        let h = h_transform(&g, &sqrt_psi(), 1.0).unwrap();
        assert_eq!(h.value, 0.0);
        assert_eq!(h.argmax_m, 1);
    }

    #[test]
    fn h_anchor_values() {
        let g = GridSequence::integers(1000).unwrap();
        let h = h_transform(&g, &sqrt_psi(), E).unwrap();
        assert_eq!(h.argmax_m, 3);
        assert!((h.value - (3.0 - 1.5 * 3f64.ln())).abs() < 1e-14);
        assert!((h.value - 1.35208).abs() < 1e-5);
        let h = h_transform(&g, &sqrt_psi(), E * E).unwrap();
        assert_eq!(h.argmax_m, 20);
        assert!((h.value - 20.0 * (2.0 - 0.5 * 20f64.ln())).abs() < 1e-12);
        assert!((h.value - 10.0427).abs() < 1e-4);
        // continuous relaxation: sup_p p (2 - ln(p)/2) = e^3 / 2
        assert!((h.value - E.powi(3) / 2.0).abs() < 0.01);
    }

    #[test]
    fn h_matches_brute_force_and_stops_early() {
        let g = GridSequence::integers(1000).unwrap();
        for x in [1.5, E, 5.0, 9.9] {
            let h = h_transform(&g, &sqrt_psi(), x).unwrap();
            let (v, m) = brute_force_h(&g, &sqrt_psi(), x);
            assert_eq!(h.value, v);
            assert_eq!(h.argmax_m, m);
            assert!(h.terms < 1000);
        }
    }

    #[test]
    fn h_truncation_insufficient() {
        let g = GridSequence::integers(10).unwrap();
        assert!(matches!(
            h_transform(&g, &sqrt_psi(), 100.0),
            Err(GlsError::TruncationInsufficient { m: 10, .. })
        ));
        assert!(h_transform(&g, &sqrt_psi(), 0.5).is_err());
        let ext = extend_grid_for(&g, &sqrt_psi(), 100.0).unwrap();
        assert_eq!(ext.truncation(), 10_000);
    }

    #[test]
    fn envelope_examples() {
        let g = GridSequence::integers(1000).unwrap();
        let env = TailEnvelope::new(g.clone(), sqrt_psi(), 1.0).unwrap();
        let v = env.at(E).unwrap();
        assert!((v - (-(3.0 - 1.5 * 3f64.ln())).exp()).abs() < 1e-15);
        assert!((v - 0.2587).abs() < 1e-4);
        assert!(matches!(env.at(E - 1e-9), Err(GlsError::Domain { .. })));
        let doubled = TailEnvelope::new(g, sqrt_psi(), 2.0).unwrap();
        assert_eq!(doubled.domain_threshold(), 2.0 * E);
        for x in [E, 3.5, 5.0] {
            assert_eq!(doubled.at(2.0 * x).unwrap(), env.at(x).unwrap());
        }
    }

    #[test]
    fn envelope_nonincreasing_and_bounded() {
        let g = GridSequence::integers(2000).unwrap();
        let env = TailEnvelope::new(g, sqrt_psi(), 0.8).unwrap();
        let xs = crate::numeric::linear_points(env.domain_threshold(), 20.0, 400);
        let vals: Vec<f64> = xs.iter().map(|&x| env.at(x).unwrap()).collect();
        assert!(vals.iter().all(|v| *v > 0.0 && *v <= 1.0));
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tail_check_constant_and_uniform() {
        let g = GridSequence::integers(50).unwrap();
        let c = RandomVariableModel::constant(2.0);
        let rep = tail_check(&c, &sqrt_psi(), &g, 1000, 1, &[1.0, 2.0, 6.0, 8.0]).unwrap();
        assert_eq!(rep.violations(), 0);
        assert!(!rep.rows[0].in_domain && !rep.rows[1].in_domain);
        assert!(rep.rows[2..].iter().all(|r| r.in_domain && r.empirical == 0.0));
        let u = RandomVariableModel::uniform01();
        let rep = tail_check(&u, &sqrt_psi(), &g, 10_000, 1, &[0.5, 1.0, 1.5, 3.0]).unwrap();
        assert_eq!(rep.violations(), 0);
        assert!((rep.norm - 0.5).abs() < 1e-15);
    }

    #[test]
    fn membership_all_zero_batch() {
        let batch = SampleBatch::from_values(vec![0.0; 100]);
        let g = GridSequence::integers(50).unwrap();
        let est = membership_k_estimate(&batch, &g, &sqrt_psi(), &[0.1, 0.5, 1.0]).unwrap();
        assert_eq!(est.k_hat, 0.1);
        assert_eq!(est.violations, 0);
    }

    #[test]
    fn membership_rejects_bad_grid() {
        let batch = SampleBatch::from_values(vec![1.0; 10]);
        let g = GridSequence::integers(50).unwrap();
        assert!(membership_k_estimate(&batch, &g, &sqrt_psi(), &[1.0, 0.5]).is_err());
        assert!(membership_k_estimate(&batch, &g, &sqrt_psi(), &[]).is_err());
        assert!(matches!(
            membership_k_estimate(&batch, &g, &sqrt_psi(), &[0.01, 0.02]),
            Err(GlsError::NoFeasibleK { .. })
        ));
    }

    #[test]
    fn membership_gaussian_natural_psi() {
        let g = RandomVariableModel::gaussian();
        let psi = GeneratingFunction::natural(&g).unwrap();
        let grid = GridSequence::integers(50).unwrap();
        let norm = norms::discrete_norm(&g, &psi, &grid).unwrap().value;
        let batch = g.sample(200_000, 3).unwrap();
        let kg = default_k_grid(Some(norm), &batch);
        assert_eq!(kg.len(), K_GRID_POINTS);
        let est = membership_k_estimate(&batch, &grid, &psi, &kg).unwrap();
        assert!(est.k_hat <= 1.5 * norm, "{} vs {norm}", est.k_hat);
        assert!(est.ratio_to(norm) <= 1.5);
    }

    #[test]
    fn membership_monotone_under_doubling() {
        let grid = GridSequence::integers(50).unwrap();
        let psi = sqrt_psi();
        let batch = RandomVariableModel::exponential().sample(50_000, 11).unwrap();
        let doubled = SampleBatch::from_values(batch.values.iter().map(|v| 2.0 * v).collect());
        let kg = crate::numeric::geometric_points(0.05, 20.0, 64);
        let a = membership_k_estimate(&batch, &grid, &psi, &kg).unwrap();
        let b = membership_k_estimate(&doubled, &grid, &psi, &kg).unwrap();
        assert!(b.k_hat >= a.k_hat);
    }
}
