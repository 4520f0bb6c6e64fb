//! Finite groups with the normalized counting (Haar) measure, convolution
//! `(f*g)(x) = (1/n) sum_y f(y) g(y^-1 x)`, Young's inequality and the
//! submultiplicativity of restricted GLS norms under convolution.
//!
//! Element order per constructor: cyclic groups use residues `0..n`;
//! dihedral groups list rotations `r^k` then reflections `r^k s`; symmetric
//! groups list permutations of `0..n` lexicographically; a product `G x H`
//! puts `(g, h)` at `g * |H| + h`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GlsError, Result};
use crate::norms::{self, NormResult};
use crate::pgrid::RestrictedSet;
use crate::psi::GeneratingFunction;
use crate::rv::{power_mean, read_values, RandomVariableModel};

pub const MAX_SYMMETRIC: usize = 5;
pub const MAX_ORDER: usize = 4096;
/// Associativity is checked on every triple up to this order, sampled above.
pub const EXHAUSTIVE_AXIOM_ORDER: usize = 128;
const SAMPLED_TRIPLES: usize = 200_000;
pub const YOUNG_EXPONENT_TOL: f64 = 1e-12;
pub const YOUNG_SLACK: f64 = 1e-12;
/// Truncation for restricted norms of group functions.
pub const ALGEBRA_P_MAX: f64 = 200.0;
/// Relative tolerance for the algebra inequality; covers the golden-section
/// refinement of the three suprema.
pub const ALGEBRA_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    Product(Box<GroupKind>, Box<GroupKind>),
}

impl GroupKind {
    pub fn order(&self) -> usize {
        match self {
            GroupKind::Cyclic(n) => *n,
            GroupKind::Dihedral(n) => 2 * n,
            GroupKind::Symmetric(n) => (1..=*n).product(),
            GroupKind::Product(a, b) => a.order().saturating_mul(b.order()),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupKind::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupKind::Symmetric(n) => write!(f, "symmetric:{n}"),
            GroupKind::Product(a, b) => {
                match **a {
                    GroupKind::Product(..) => write!(f, "product:({a})")?,
                    _ => write!(f, "product:{a}")?,
                }
                write!(f, "x{b}")
            }
        }
    }
}

impl FromStr for GroupKind {
    type Err = GlsError;

    /// `cyclic:n`, `dihedral:n`, `symmetric:n`, `product:<G>x<H>`. A product
    /// on the left of `x` must be parenthesized.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || GlsError::Parse(format!("bad group spec '{s}'"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let count = || arg.trim().parse::<usize>().map_err(|_| bad());
        match kind.trim() {
            "cyclic" => Ok(GroupKind::Cyclic(count()?)),
            "dihedral" => Ok(GroupKind::Dihedral(count()?)),
            "symmetric" => Ok(GroupKind::Symmetric(count()?)),
            "product" => {
                let arg = arg.trim();
                let (left, right) = if let Some(rest) = arg.strip_prefix('(') {
                    let mut depth = 1;
                    let close = rest
                        .char_indices()
                        .find(|&(_, c)| {
                            match c {
                                '(' => depth += 1,
                                ')' => depth -= 1,
                                _ => {}
                            }
                            depth == 0
                        })
                        .map(|(i, _)| i)
                        .ok_or_else(bad)?;
                    let after = rest[close + 1..].trim_start().strip_prefix('x').ok_or_else(bad)?;
                    (&rest[..close], after)
                } else {
                    arg.split_once('x').ok_or_else(bad)?
                };
                Ok(GroupKind::Product(Box::new(left.parse()?), Box::new(right.parse()?)))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: usize,
    label: String,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("label", &self.label)
            .field("order", &self.order)
            .finish()
    }
}

impl FiniteGroup {
    pub fn new(kind: &GroupKind) -> Result<Self> {
        let table = Self::table_for(kind)?;
        Self::from_table(table, kind.order(), kind.to_string())
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&GroupKind::Cyclic(n))
    }

    pub fn dihedral(n: usize) -> Result<Self> {
        Self::new(&GroupKind::Dihedral(n))
    }

    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(&GroupKind::Symmetric(n))
    }

    pub fn product(a: GroupKind, b: GroupKind) -> Result<Self> {
        Self::new(&GroupKind::Product(Box::new(a), Box::new(b)))
    }

    fn table_for(kind: &GroupKind) -> Result<Vec<u32>> {
        let n = kind.order();
        if n == 0 {
            return Err(GlsError::InvalidParameter(format!("{kind}: order must be positive")));
        }
        if n > MAX_ORDER {
            return Err(GlsError::InvalidParameter(format!("{kind}: order {n} exceeds {MAX_ORDER}")));
        }
        let mut t = vec![0u32; n * n];
        match kind {
            GroupKind::Cyclic(n) => {
                let n = *n;
                for a in 0..n {
                    for b in 0..n {
                        t[a * n + b] = ((a + b) % n) as u32;
                    }
                }
            }
            GroupKind::Dihedral(k) => {
                let k = *k;
                // (r^a s^e)(r^b s^f) = r^(a + (-1)^e b) s^(e+f)
                for x in 0..n {
                    let (a, e) = (x % k, x / k);
                    for y in 0..n {
                        let (b, f) = (y % k, y / k);
                        let rot = if e == 0 { (a + b) % k } else { (a + k - b) % k };
                        t[x * n + y] = (((e + f) % 2) * k + rot) as u32;
                    }
                }
            }
            GroupKind::Symmetric(k) => {
                if *k > MAX_SYMMETRIC {
                    return Err(GlsError::InvalidParameter(format!(
                        "symmetric:{k} exceeds symmetric:{MAX_SYMMETRIC}"
                    )));
                }
                let perms = permutations(*k);
                let index: HashMap<&[u8], usize> = perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
                let mut buf = vec![0u8; *k];
                for (i, s) in perms.iter().enumerate() {
                    for (j, tau) in perms.iter().enumerate() {
                        for (slot, &ti) in buf.iter_mut().zip(tau) {
                            *slot = s[ti as usize];
                        }
                        t[i * n + j] = index[buf.as_slice()] as u32;
                    }
                }
            }
            GroupKind::Product(a, b) => {
                let (ta, tb) = (Self::table_for(a)?, Self::table_for(b)?);
                let (na, nb) = (a.order(), b.order());
                for x in 0..n {
                    let (xa, xb) = (x / nb, x % nb);
                    for y in 0..n {
                        let (ya, yb) = (y / nb, y % nb);
                        t[x * n + y] = (ta[xa * na + ya] as usize * nb + tb[xb * nb + yb] as usize) as u32;
                    }
                }
            }
        }
        Ok(t)
    }

    /// Builds a group from a row-major multiplication table, checking closure,
    /// identity, inverses and associativity.
    pub fn from_table(mul: Vec<u32>, order: usize, label: impl Into<String>) -> Result<Self> {
        let n = order;
        let label = label.into();
        if n == 0 || mul.len() != n * n {
            return Err(GlsError::SizeMismatch {
                expected: n * n,
                got: mul.len(),
            });
        }
        if mul.iter().any(|&v| v as usize >= n) {
            return Err(GlsError::AxiomViolation(format!("{label}: table not closed")));
        }
        let at = |a: usize, b: usize| mul[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| GlsError::AxiomViolation(format!("{label}: no identity")))?;
        let mut inv = vec![0u32; n];
        for (a, slot) in inv.iter_mut().enumerate() {
            let b = (0..n)
                .find(|&b| at(a, b) == identity)
                .ok_or_else(|| GlsError::AxiomViolation(format!("{label}: element {a} has no inverse")))?;
            if at(b, a) != identity {
                return Err(GlsError::AxiomViolation(format!("{label}: inverse of {a} is one-sided")));
            }
            *slot = b as u32;
        }
        let assoc = |a: usize, b: usize, c: usize| at(at(a, b), c) == at(a, at(b, c));
        let ok = if n <= EXHAUSTIVE_AXIOM_ORDER {
            (0..n).into_par_iter().all(|a| (0..n).all(|b| (0..n).all(|c| assoc(a, b, c))))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            (0..SAMPLED_TRIPLES).all(|_| {
                assoc(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))
            })
        };
        if !ok {
            return Err(GlsError::AxiomViolation(format!("{label}: not associative")));
        }
        Ok(FiniteGroup {
            order: n,
            mul,
            inv,
            identity,
            label,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Mass of each element under the normalized Haar measure.
    pub fn haar_weight(&self) -> f64 {
        1.0 / self.order as f64
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a + 1..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn permutations(k: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (0..k as u8).collect();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot has a successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Real function on the elements of a finite group, indexed by element.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    values: Vec<f64>,
}

impl GroupFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(GlsError::InvalidParameter(format!("non-finite group function value {bad}")));
        }
        Ok(GroupFunction { values })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(read_values(path.as_ref())?)
    }

    pub fn constant(group: &FiniteGroup, c: f64) -> Result<Self> {
        Self::new(vec![c; group.order()])
    }

    /// `n * 1_{e}`, the unit of convolution under normalized Haar measure.
    pub fn unit(group: &FiniteGroup) -> Self {
        let mut values = vec![0.0; group.order()];
        values[group.identity()] = group.order() as f64;
        GroupFunction { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| alpha * v).collect())
    }

    /// The same function viewed as a random variable on `(G, Haar)`.
    pub fn as_model(&self, label: impl Into<String>) -> Result<RandomVariableModel> {
        RandomVariableModel::uniform_atoms(self.values.clone(), label)
    }

    fn check_on(&self, group: &FiniteGroup) -> Result<()> {
        if self.len() != group.order() {
            return Err(GlsError::SizeMismatch {
                expected: group.order(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// `(f*g)(x) = (1/n) sum_y f(y) g(y^-1 x)`, summed in element order and then
/// scaled, so results do not depend on the thread count.
pub fn convolve(group: &FiniteGroup, f: &GroupFunction, g: &GroupFunction) -> Result<GroupFunction> {
    f.check_on(group)?;
    g.check_on(group)?;
    let n = group.order();
    let values = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut s = 0.0;
            for y in 0..n {
                s += f.values[y] * g.values[group.mul(group.inv(y), x)];
            }
            s / n as f64
        })
        .collect();
    Ok(GroupFunction { values })
}

/// `((1/n) sum |f|^p)^(1/p)`, or `max |f|` for `p = inf`.
pub fn group_lp_norm(group: &FiniteGroup, f: &GroupFunction, p: f64) -> Result<f64> {
    f.check_on(group)?;
    if !(p >= 1.0) {
        return Err(GlsError::domain("p", p, "p >= 1 or p = inf"));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(power_mean(&f.values, p))
}

/// Exponents with `1 + 1/r = 1/p + 1/q`, each in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungTriple {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl YoungTriple {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("r", r)] {
            if !(v >= 1.0) {
                return Err(GlsError::domain(name, v, "in [1, inf]"));
            }
        }
        let gap = 1.0 + 1.0 / r - 1.0 / p - 1.0 / q;
        if gap.abs() > YOUNG_EXPONENT_TOL {
            return Err(GlsError::InvalidParameter(format!(
                "exponents p={p}, q={q}, r={r} violate 1 + 1/r = 1/p + 1/q (off by {gap:e})"
            )));
        }
        Ok(YoungTriple { p, q, r })
    }

    /// Completes `(p, q)` with `1/r = 1/p + 1/q - 1`; needs `1/p + 1/q >= 1`.
    pub fn from_pq(p: f64, q: f64) -> Result<Self> {
        let inv_r = 1.0 / p + 1.0 / q - 1.0;
        if !(-YOUNG_EXPONENT_TOL..=1.0).contains(&inv_r) {
            return Err(GlsError::InvalidParameter(format!("no admissible r for p={p}, q={q}")));
        }
        let r = if inv_r <= 0.0 { f64::INFINITY } else { 1.0 / inv_r };
        Self::new(p, q, r)
    }
}

impl fmt::Display for YoungTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} q={} r={}", self.p, self.q, self.r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YoungReport {
    pub triple: YoungTriple,
    /// `|f*g|_r`
    pub lhs: f64,
    pub f_norm: f64,
    pub g_norm: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `|f*g|_r <= |f|_p |g|_q (1 + 1e-12)`.
pub fn young_check(group: &FiniteGroup, f: &GroupFunction, g: &GroupFunction, triple: YoungTriple) -> Result<YoungReport> {
    let triple = YoungTriple::new(triple.p, triple.q, triple.r)?;
    let fg = convolve(group, f, g)?;
    let lhs = group_lp_norm(group, &fg, triple.r)?;
    let f_norm = group_lp_norm(group, f, triple.p)?;
    let g_norm = group_lp_norm(group, g, triple.q)?;
    let bound = f_norm * g_norm;
    Ok(YoungReport {
        triple,
        lhs,
        f_norm,
        g_norm,
        bound,
        pass: lhs <= bound * (1.0 + YOUNG_SLACK),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport {
    pub conv_norm: NormResult,
    pub f_norm: f64,
    pub g_norm: f64,
    /// 1 for normalized psi, `psi(1)` otherwise.
    pub constant: f64,
    pub bound: f64,
    pub pass: bool,
    /// True when `max|h| / psi(p_max)` is below each computed norm, so the
    /// truncation at `p_max` cannot hide a larger ratio (monotone psi only).
    pub truncation_exact: bool,
    pub diagnostics: String,
}

/// `||f*g|| <= psi(1) ||f|| ||g||` for restricted norms over `S` truncated at
/// [`ALGEBRA_P_MAX`], with the group functions viewed as random variables
/// under the normalized Haar measure.
pub fn algebra_check(
    group: &FiniteGroup,
    f: &GroupFunction,
    g: &GroupFunction,
    psi: &GeneratingFunction,
    set: &RestrictedSet,
) -> Result<AlgebraReport> {
    let fg = convolve(group, f, g)?;
    let models = [
        fg.as_model(format!("f*g on {group}"))?,
        f.as_model(format!("f on {group}"))?,
        g.as_model(format!("g on {group}"))?,
    ];
    let results = models
        .iter()
        .map(|m| norms::restricted_norm(m, psi, set, ALGEBRA_P_MAX))
        .collect::<Result<Vec<_>>>()?;
    let conv_norm = results[0].clone();
    // Any evaluated ratio is a lower bound for a sup; reuse the point where
    // the convolution peaked so the refinement of each sup cannot disagree.
    let at_peak = |m: &RandomVariableModel, v: f64| -> Result<f64> {
        let p = conv_norm.arg_p;
        Ok(v.max(m.lp_norm(p)? / psi.eval(p)?))
    };
    let f_norm = at_peak(&models[1], results[1].value)?;
    let g_norm = at_peak(&models[2], results[2].value)?;
    let constant = if psi.is_normalized() { 1.0 } else { psi.value_at_one() };
    let bound = constant * f_norm * g_norm;
    let pass = conv_norm.value <= bound * (1.0 + ALGEBRA_SLACK);

    let psi_end = psi.eval(ALGEBRA_P_MAX)?;
    let limits: Vec<f64> = [&fg, f, g]
        .iter()
        .map(|h| h.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) / psi_end)
        .collect();
    let truncation_exact = psi.monotonicity().is_monotone()
        && limits.iter().zip([conv_norm.value, f_norm, g_norm]).all(|(l, v)| *l <= v);
    let diagnostics = format!(
        "normalized Haar measure; p->inf limits max|h|/psi({ALGEBRA_P_MAX}) = {:.6e}, {:.6e}, {:.6e} (f*g, f, g)",
        limits[0], limits[1], limits[2]
    );
    Ok(AlgebraReport {
        conv_norm,
        f_norm,
        g_norm,
        constant,
        bound,
        pass,
        truncation_exact,
        diagnostics,
    })
}
