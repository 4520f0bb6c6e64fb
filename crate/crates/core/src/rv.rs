//! Random variables on a probability space, seen through their `L^p` moments.
//!
//! Three backends: closed-form moment maps for a few standard families,
//! a density integrated numerically, and an empirical sample with plug-in
//! moments. Every model can be rescaled by a real factor.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{GlsError, Result};
use crate::numeric::{self, QuadFailure, QuadSettings};

/// Samples are generated in chunks of this size, each from its own RNG stream,
/// so the output does not depend on how chunks are scheduled.
pub const SAMPLE_CHUNK: usize = 1 << 16;

/// Plug-in moments of an `n`-point sample are dominated by the maximum once
/// `p` exceeds this multiple of `ln n`.
pub const EMPIRICAL_P_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    Gaussian,
    Uniform01,
    Exponential,
    Constant(f64),
    Rademacher,
    /// 1 with probability `eps`, else 0: `|X|_p = eps^(1/p)` rises steeply.
    Bernoulli(f64),
}

impl ClosedForm {
    fn lp_norm(self, p: f64) -> f64 {
        match self {
            ClosedForm::Gaussian => {
                let ln_moment = 0.5 * p * 2f64.ln() + numeric::ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln();
                (ln_moment / p).exp()
            }
            ClosedForm::Uniform01 => (-p.ln_1p() / p).exp(),
            ClosedForm::Exponential => (numeric::ln_gamma(p + 1.0) / p).exp(),
            ClosedForm::Constant(c) => c.abs(),
            ClosedForm::Rademacher => 1.0,
            ClosedForm::Bernoulli(eps) => (eps.ln() / p).exp(),
        }
    }

    fn label(self) -> String {
        match self {
            ClosedForm::Gaussian => "gaussian".into(),
            ClosedForm::Uniform01 => "uniform01".into(),
            ClosedForm::Exponential => "exponential".into(),
            ClosedForm::Constant(c) => format!("constant:{c}"),
            ClosedForm::Rademacher => "rademacher".into(),
            ClosedForm::Bernoulli(eps) => format!("bernoulli:{eps}"),
        }
    }

    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            ClosedForm::Gaussian => rng.sample(StandardNormal),
            ClosedForm::Uniform01 => rng.random::<f64>(),
            ClosedForm::Exponential => rng.sample(Exp1),
            ClosedForm::Constant(c) => c,
            ClosedForm::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ClosedForm::Bernoulli(eps) => {
                if rng.random::<f64>() < eps {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A probability density on `[lower, upper]`; either bound may be infinite.
#[derive(Clone)]
pub struct DensityModel {
    density: Density,
    lower: f64,
    upper: f64,
    settings: QuadSettings,
}

impl fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityModel")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("settings", &self.settings)
            .finish()
    }
}

/// Change of variables taking `t` in a finite interval to `x`, with Jacobian.
#[derive(Debug, Clone, Copy)]
enum Mapping {
    Finite { a: f64, b: f64 },
    /// `x = a + t / (1 - t)`, `t in [0, 1)`.
    RightRay { a: f64 },
    /// `x = b - t / (1 - t)`, `t in [0, 1)`.
    LeftRay { b: f64 },
    /// `x = t / (1 - t^2)`, `t in (-1, 1)`.
    Line,
}

impl Mapping {
    fn new(lower: f64, upper: f64) -> Self {
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => Mapping::Finite { a: lower, b: upper },
            (true, false) => Mapping::RightRay { a: lower },
            (false, true) => Mapping::LeftRay { b: upper },
            (false, false) => Mapping::Line,
        }
    }

    fn t_range(self) -> (f64, f64) {
        match self {
            Mapping::Finite { a, b } => (a, b),
            Mapping::RightRay { .. } | Mapping::LeftRay { .. } => (0.0, 1.0),
            Mapping::Line => (-1.0, 1.0),
        }
    }

    /// Returns `(x, ln |dx/dt|)`.
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Mapping::Finite { .. } => (t, 0.0),
            Mapping::RightRay { a } => {
                let u = 1.0 - t;
                (a + t / u, -2.0 * u.ln())
            }
            Mapping::LeftRay { b } => {
                let u = 1.0 - t;
                (b - t / u, -2.0 * u.ln())
            }
            Mapping::Line => {
                let u = 1.0 - t * t;
                (t / u, (1.0 + t * t).ln() - 2.0 * u.ln())
            }
        }
    }
}

const SEED_SEGMENTS: usize = 64;
const TAIL_PROBE: (f64, f64) = (1e10, 1e12);

impl DensityModel {
    pub fn new<F>(density: F, lower: f64, upper: f64, settings: QuadSettings) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lower < upper) {
            return Err(GlsError::InvalidParameter(format!(
                "density support [{lower}, {upper}] is empty"
            )));
        }
        let model = DensityModel {
            density: Arc::new(density),
            lower,
            upper,
            settings,
        };
        let mass = model
            .integrate_log(|_| 0.0)
            .map_err(|_| GlsError::InvalidParameter("density mass integral did not converge".into()))?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(GlsError::InvalidParameter(format!(
                "density integrates to {mass}, expected 1"
            )));
        }
        Ok(model)
    }

    /// Integrates `exp(weight(x)) * density(x)` over the support. The
    /// integrand is rescaled by its maximum on a scan so that large moments
    /// do not overflow; returns the natural log of the integral.
    fn integrate_log_scaled<W: Fn(f64) -> f64>(&self, weight: W) -> std::result::Result<f64, QuadFailure> {
        let map = Mapping::new(self.lower, self.upper);
        let (t0, t1) = map.t_range();
        let log_integrand = |t: f64| -> f64 {
            let (x, ln_jac) = map.apply(t);
            let d = (self.density)(x);
            if !(d > 0.0) || !x.is_finite() {
                return f64::NEG_INFINITY;
            }
            weight(x) + d.ln() + ln_jac
        };
        let scan = 1024;
        let step = (t1 - t0) / scan as f64;
        let mut peak = f64::NEG_INFINITY;
        let mut peak_t = t0;
        for i in 1..scan {
            let t = t0 + step * i as f64;
            let v = log_integrand(t);
            if v.is_nan() || v == f64::INFINITY {
                return Err(QuadFailure::NonFinite);
            }
            if v > peak {
                peak = v;
                peak_t = t;
            }
        }
        if peak == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let mut breaks: Vec<f64> = (0..=SEED_SEGMENTS).map(|k| t0 + (t1 - t0) * k as f64 / SEED_SEGMENTS as f64).collect();
        breaks.extend([peak_t - step, peak_t, peak_t + step]);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks.retain(|t| (t0..=t1).contains(t));
        let out = numeric::integrate_with_breaks(|t| (log_integrand(t) - peak).exp(), &breaks, &self.settings)?;
        Ok(peak + out.value.ln())
    }

    fn integrate_log<W: Fn(f64) -> f64>(&self, weight: W) -> std::result::Result<f64, QuadFailure> {
        self.integrate_log_scaled(weight).map(f64::exp)
    }

    /// Power-law tails: the log-log slope of `|x|^p density(x)` far out. A
    /// slope of -1 or more means the moment integral diverges there.
    fn tail_divergent(&self, p: f64) -> bool {
        let scale = [self.lower, self.upper]
            .iter()
            .filter(|b| b.is_finite())
            .fold(1.0f64, |m, b| m.max(b.abs()));
        let (x1, x2) = (scale * TAIL_PROBE.0, scale * TAIL_PROBE.1);
        let log_f = |x: f64| p * x.abs().ln() + (self.density)(x).ln();
        let slope = |a: f64, b: f64| (log_f(b) - log_f(a)) / (x2 / x1).ln();
        let right = self.upper == f64::INFINITY && slope(x1, x2) >= -1.0 - 1e-9;
        let left = self.lower == f64::NEG_INFINITY && slope(-x1, -x2) >= -1.0 - 1e-9;
        right || left
    }

    fn lp_norm(&self, p: f64) -> Result<f64> {
        if self.tail_divergent(p) {
            return Err(GlsError::Divergent { p });
        }
        let ln_moment = self
            .integrate_log_scaled(|x| {
                if x == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    p * x.abs().ln()
                }
            })
            .map_err(|_| GlsError::Divergent { p })?;
        Ok((ln_moment / p).exp())
    }

    /// Piecewise-uniform approximation of the distribution over `cells`
    /// equal-width cells, as cumulative masses. Finite support only.
    fn cdf_table(&self, cells: usize) -> Result<Vec<f64>> {
        if !(self.lower.is_finite() && self.upper.is_finite()) {
            return Err(GlsError::UnsupportedBackend("density with unbounded support".into()));
        }
        let w = (self.upper - self.lower) / cells as f64;
        let mut cum = Vec::with_capacity(cells);
        let mut acc = 0.0;
        for i in 0..cells {
            let a = self.lower + w * i as f64;
            let mass = numeric::integrate(|x| (self.density)(x), a, a + w, &self.settings)
                .map_err(|_| GlsError::InvalidParameter("density cell mass did not converge".into()))?
                .value;
            acc += mass.max(0.0);
            cum.push(acc);
        }
        let total = acc;
        cum.iter_mut().for_each(|c| *c /= total);
        Ok(cum)
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    ClosedForm(ClosedForm),
    Density(DensityModel),
    Empirical(Arc<[f64]>),
    /// Uniform law on finitely many atoms; moments are exact, not estimates.
    Atoms(Arc<[f64]>),
}

#[derive(Debug, Clone)]
pub struct RandomVariableModel {
    backend: Backend,
    scale: f64,
    label: String,
}

impl RandomVariableModel {
    fn closed(c: ClosedForm) -> Self {
        RandomVariableModel {
            label: c.label(),
            backend: Backend::ClosedForm(c),
            scale: 1.0,
        }
    }

    pub fn gaussian() -> Self {
        Self::closed(ClosedForm::Gaussian)
    }

    pub fn uniform01() -> Self {
        Self::closed(ClosedForm::Uniform01)
    }

    pub fn exponential() -> Self {
        Self::closed(ClosedForm::Exponential)
    }

    pub fn constant(c: f64) -> Self {
        Self::closed(ClosedForm::Constant(c))
    }

    pub fn rademacher() -> Self {
        Self::closed(ClosedForm::Rademacher)
    }

    /// Indicator of an event of probability `eps` in `(0, 1]`.
    pub fn bernoulli(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(GlsError::domain("eps", eps, "0 < eps <= 1"));
        }
        Ok(Self::closed(ClosedForm::Bernoulli(eps)))
    }

    pub fn density(model: DensityModel, label: impl Into<String>) -> Self {
        RandomVariableModel {
            backend: Backend::Density(model),
            scale: 1.0,
            label: label.into(),
        }
    }

    pub fn gaussian_density() -> Self {
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let d = DensityModel::new(phi, f64::NEG_INFINITY, f64::INFINITY, QuadSettings::default())
            .expect("standard normal density is valid");
        Self::density(d, "density:gaussian")
    }

    pub fn uniform01_density() -> Self {
        let d = DensityModel::new(|_| 1.0, 0.0, 1.0, QuadSettings::default()).expect("uniform density is valid");
        Self::density(d, "density:uniform01")
    }

    pub fn exponential_density() -> Self {
        let d = DensityModel::new(|x: f64| (-x).exp(), 0.0, f64::INFINITY, QuadSettings::default())
            .expect("exponential density is valid");
        Self::density(d, "density:exponential")
    }

    /// Pareto law `a x^(-a-1)` on `[1, inf)`; moments of order `p >= a` diverge.
    pub fn pareto_density(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(GlsError::InvalidParameter(format!("pareto index must be positive, got {a}")));
        }
        let d = DensityModel::new(move |x: f64| a * x.powf(-a - 1.0), 1.0, f64::INFINITY, QuadSettings::default())?;
        Ok(Self::density(d, format!("density:pareto:{a}")))
    }

    /// Plug-in model of a finite sample. Values must be finite.
    pub fn empirical(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(GlsError::EmptyBatch);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(GlsError::InvalidParameter(format!("non-finite sample value {bad}")));
        }
        Ok(RandomVariableModel {
            backend: Backend::Empirical(values.into()),
            scale: 1.0,
            label: label.into(),
        })
    }

    /// Uniform distribution on `values` (a function on a finite probability
    /// space with equal weights). Same moments as [`Self::empirical`], but
    /// they are exact at every `p`.
    pub fn uniform_atoms(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let mut m = Self::empirical(values, label)?;
        if let Backend::Empirical(v) = m.backend {
            m.backend = Backend::Atoms(v);
        }
        Ok(m)
    }

    /// Loads a one-value-per-line file; blank lines and `#` comments are skipped.
    pub fn empirical_from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let values = read_values(path)?;
        Self::empirical(values, format!("empirical:{}", path.display()))
    }

    /// Parses a model specifier: `gaussian`, `uniform01`, `exponential`,
    /// `rademacher`, `constant:<c>`, `bernoulli:<eps>`, `empirical:<path>`,
    /// `density:<family>`, or `density:pareto:<a>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "gaussian" => return Ok(Self::gaussian()),
            "uniform01" => return Ok(Self::uniform01()),
            "exponential" => return Ok(Self::exponential()),
            "rademacher" => return Ok(Self::rademacher()),
            "density:gaussian" => return Ok(Self::gaussian_density()),
            "density:uniform01" => return Ok(Self::uniform01_density()),
            "density:exponential" => return Ok(Self::exponential_density()),
            _ => {}
        }
        if let Some(c) = spec.strip_prefix("constant:") {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| GlsError::Parse(format!("bad constant '{c}'")))?;
            if !c.is_finite() {
                return Err(GlsError::Parse(format!("constant must be finite, got {c}")));
            }
            return Ok(Self::constant(c));
        }
        if let Some(eps) = spec.strip_prefix("bernoulli:") {
            let eps: f64 = eps
                .trim()
                .parse()
                .map_err(|_| GlsError::Parse(format!("bad probability '{eps}'")))?;
            return Self::bernoulli(eps);
        }
        if let Some(a) = spec.strip_prefix("density:pareto:") {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| GlsError::Parse(format!("bad pareto index '{a}'")))?;
            return Self::pareto_density(a);
        }
        if let Some(path) = spec.strip_prefix("empirical:") {
            return Self::empirical_from_file(path);
        }
        Err(GlsError::Parse(format!("unknown model '{spec}'")))
    }

    /// The model of `alpha * f`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let scale = self.scale * alpha;
        let base = self.base_label();
        let label = if scale == 1.0 {
            base.to_string()
        } else {
            format!("{scale}*{base}")
        };
        RandomVariableModel {
            backend: self.backend.clone(),
            scale,
            label,
        }
    }

    fn base_label(&self) -> &str {
        match self.label.split_once('*') {
            Some((_, base)) if self.scale != 1.0 => base,
            _ => &self.label,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(E|f|^p)^(1/p)` for finite `p >= 1`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(GlsError::domain("p", p, "finite p >= 1"));
        }
        let base = match &self.backend {
            Backend::ClosedForm(c) => c.lp_norm(p),
            Backend::Density(d) => d.lp_norm(p)?,
            Backend::Empirical(values) | Backend::Atoms(values) => power_mean(values, p),
        };
        Ok(self.scale.abs() * base)
    }

    /// Relative accuracy of `lp_norm` for this backend.
    pub fn moment_tolerance(&self) -> f64 {
        match &self.backend {
            Backend::Density(d) => d.settings.rel_tol,
            _ => 1e-14,
        }
    }

    /// Largest `p` at which plug-in moments are trusted, for empirical models.
    pub fn reliable_p_max(&self) -> Option<f64> {
        match &self.backend {
            Backend::Empirical(v) => Some(EMPIRICAL_P_FACTOR * (v.len() as f64).ln()),
            _ => None,
        }
    }

    /// Draws `n` values. The result depends only on `(n, seed)`: chunk `k`
    /// is drawn from stream `k` of a ChaCha8 generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        let sampler = self.sampler()?;
        let chunks = n.div_ceil(SAMPLE_CHUNK);
        let parts: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let len = SAMPLE_CHUNK.min(n - k * SAMPLE_CHUNK);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                (0..len).map(|_| sampler.draw(&mut rng) * self.scale).collect()
            })
            .collect();
        Ok(SampleBatch {
            values: parts.concat(),
            seed,
            size: n,
        })
    }

    fn sampler(&self) -> Result<Sampler<'_>> {
        Ok(match &self.backend {
            Backend::ClosedForm(c) => Sampler::Closed(*c),
            Backend::Empirical(v) | Backend::Atoms(v) => Sampler::Bootstrap(v),
            Backend::Density(d) => Sampler::Table {
                lower: d.lower,
                width: (d.upper - d.lower) / DENSITY_CELLS as f64,
                cdf: d.cdf_table(DENSITY_CELLS)?,
            },
        })
    }
}

const DENSITY_CELLS: usize = 2048;

enum Sampler<'a> {
    Closed(ClosedForm),
    Bootstrap(&'a [f64]),
    Table { lower: f64, width: f64, cdf: Vec<f64> },
}

impl Sampler<'_> {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Closed(c) => c.draw(rng),
            Sampler::Bootstrap(v) => v[rng.random_range(0..v.len())],
            Sampler::Table { lower, width, cdf } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                let below = if k == 0 { 0.0 } else { cdf[k - 1] };
                let mass = cdf[k] - below;
                let frac = if mass > 0.0 { (u - below) / mass } else { 0.5 };
                lower + width * (k as f64 + frac)
            }
        }
    }
}

/// `((1/n) sum |x_i|^p)^(1/p)`, computed relative to `max |x_i|` so large `p`
/// does not overflow. Exact for constant inputs.
pub fn power_mean(values: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let n = values.len() as f64;
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * (sum / n).powf(1.0 / p)
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| GlsError::Parse(format!("{}:{}: bad value '{}'", path.display(), i + 1, l.trim())))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub size: usize,
}

impl SampleBatch {
    pub fn from_values(values: Vec<f64>) -> Self {
        let size = values.len();
        SampleBatch { values, seed: 0, size }
    }

    /// `#{i : |x_i| >= x} / n`.
    pub fn empirical_survival(&self, x: f64) -> Result<f64> {
        if self.values.is_empty() {
            return Err(GlsError::EmptyBatch);
        }
        let count = self.values.iter().filter(|v| v.abs() >= x).count();
        Ok(count as f64 / self.values.len() as f64)
    }

    pub fn magnitudes(&self) -> Result<SortedMagnitudes> {
        SortedMagnitudes::new(self)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Sorted `|x_i|` for repeated survival queries.
#[derive(Debug, Clone)]
pub struct SortedMagnitudes {
    sorted: Vec<f64>,
}

impl SortedMagnitudes {
    pub fn new(batch: &SampleBatch) -> Result<Self> {
        if batch.values.is_empty() {
            return Err(GlsError::EmptyBatch);
        }
        let mut sorted: Vec<f64> = batch.values.iter().map(|v| v.abs()).collect();
        sorted.sort_by(f64::total_cmp);
        Ok(SortedMagnitudes { sorted })
    }

    pub fn survival(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < x);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().expect("nonempty")
    }
}
