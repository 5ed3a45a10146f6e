//! Multi-index sets defining the polynomial space.
//!
//! Three isotropic families are provided: tensor product (max-norm ball),
//! total degree (1-norm ball) and hyperbolic cross (bounded product of
//! `n_k + 1`). All generators emit indices in lexicographic order, which fixes
//! the column order of every design matrix built from the set.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of indices a generator may emit.
pub const DEFAULT_CARDINALITY_CAP: usize = 1_000_000;

/// A d-dimensional multi-index of nonnegative degrees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape("multi-index must have dimension >= 1".into()));
        }
        Ok(Self(entries))
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn max_norm(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    /// `prod (n_k + 1)`, saturating.
    pub fn hc_norm(&self) -> u64 {
        self.0
            .iter()
            .fold(1u64, |acc, &k| acc.saturating_mul(k as u64 + 1))
    }

    /// True when every entry of `self` is `<=` the matching entry of `other`.
    pub fn is_dominated_by(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        assert!(!v.is_empty(), "multi-index must have dimension >= 1");
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Index-set family without a degree attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexFamily {
    TensorProduct,
    TotalDegree,
    HyperbolicCross,
}

impl IndexFamily {
    pub fn name(self) -> &'static str {
        match self {
            IndexFamily::TensorProduct => "tensor_product",
            IndexFamily::TotalDegree => "total_degree",
            IndexFamily::HyperbolicCross => "hyperbolic_cross",
        }
    }

    pub fn build(self, n: u32, d: usize) -> Result<MultiIndexSet> {
        match self {
            IndexFamily::TensorProduct => tensor_product_set(n, d),
            IndexFamily::TotalDegree => total_degree_set(n, d),
            IndexFamily::HyperbolicCross => hyperbolic_cross_set(n, d),
        }
    }

    /// Exact cardinality of the degree-`n` set, without materializing it.
    /// Counts beyond `cap` are reported as a size-limit error.
    pub fn cardinality(self, n: u32, d: usize, cap: usize) -> Result<usize> {
        check_dim(d)?;
        let count: u128 = match self {
            IndexFamily::TensorProduct => {
                let mut acc: u128 = 1;
                for _ in 0..d {
                    acc = acc.saturating_mul(n as u128 + 1);
                    if acc > cap as u128 {
                        break;
                    }
                }
                acc
            }
            IndexFamily::TotalDegree => binomial_capped(n as u128 + d as u128, d as u128, cap),
            IndexFamily::HyperbolicCross => {
                let mut count = 0u128;
                count_hc(d, n as u64 + 1, cap as u128 + 1, &mut count);
                count
            }
        };
        if count > cap as u128 {
            return Err(Error::SizeLimit {
                requested: count,
                cap,
            });
        }
        Ok(count as usize)
    }
}

impl fmt::Display for IndexFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tensor_product" | "tp" => Ok(IndexFamily::TensorProduct),
            "total_degree" | "td" => Ok(IndexFamily::TotalDegree),
            "hyperbolic_cross" | "hc" => Ok(IndexFamily::HyperbolicCross),
            other => Err(Error::Parse(format!("unknown index-set family `{other}`"))),
        }
    }
}

/// How an index set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "degree", rename_all = "snake_case")]
pub enum IndexSetKind {
    TensorProduct(u32),
    TotalDegree(u32),
    HyperbolicCross(u32),
    Custom,
}

impl IndexSetKind {
    fn label(&self) -> &'static str {
        match self {
            IndexSetKind::TensorProduct(_) => "tensor_product",
            IndexSetKind::TotalDegree(_) => "total_degree",
            IndexSetKind::HyperbolicCross(_) => "hyperbolic_cross",
            IndexSetKind::Custom => "custom",
        }
    }
}

/// An ordered, duplicate-free collection of multi-indices of a common dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    dim: usize,
    kind: IndexSetKind,
    indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    /// Builds a custom set. Indices are sorted lexicographically; duplicates
    /// and mixed dimensions are rejected.
    pub fn custom(dim: usize, indices: Vec<MultiIndex>) -> Result<Self> {
        check_dim(dim)?;
        if indices.is_empty() {
            return Err(Error::Shape("index set must contain at least one index".into()));
        }
        if let Some(bad) = indices.iter().find(|m| m.dim() != dim) {
            return Err(Error::Shape(format!(
                "index {bad} has dimension {} but the set has dimension {dim}",
                bad.dim()
            )));
        }
        let mut indices = indices;
        indices.sort();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Shape(format!("duplicate index {}", w[0])));
        }
        Ok(Self {
            dim,
            kind: IndexSetKind::Custom,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> IndexSetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn contains(&self, index: &MultiIndex) -> bool {
        self.indices.binary_search(index).is_ok()
    }

    /// Column position of `index`, if present.
    pub fn position(&self, index: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(index).ok()
    }

    /// Largest single-coordinate degree.
    pub fn max_degree(&self) -> u32 {
        self.indices.iter().map(MultiIndex::max_norm).max().unwrap_or(0)
    }

    /// Largest degree appearing in each coordinate.
    pub fn max_degree_per_axis(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.dim];
        for m in &self.indices {
            for (o, &k) in out.iter_mut().zip(m.entries()) {
                *o = (*o).max(k);
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &MultiIndexSet) -> bool {
        self.dim == other.dim && self.indices.iter().all(|m| other.contains(m))
    }

    /// Short human-readable descriptor, e.g. `hyperbolic_cross(n=20,d=2,N=...)`.
    pub fn descriptor(&self) -> String {
        match self.kind {
            IndexSetKind::TensorProduct(n)
            | IndexSetKind::TotalDegree(n)
            | IndexSetKind::HyperbolicCross(n) => {
                format!("{}(n={n},d={},N={})", self.kind.label(), self.dim, self.len())
            }
            IndexSetKind::Custom => format!("custom(d={},N={})", self.dim, self.len()),
        }
    }

    /// Plain-text form: a `dim=<d> kind=<kind> n=<n>` header followed by one
    /// space-separated index per line.
    pub fn to_text(&self) -> String {
        let n = match self.kind {
            IndexSetKind::TensorProduct(n)
            | IndexSetKind::TotalDegree(n)
            | IndexSetKind::HyperbolicCross(n) => n,
            IndexSetKind::Custom => self.max_degree(),
        };
        let mut out = format!("dim={} kind={} n={}\n", self.dim, self.kind.label(), n);
        for m in &self.indices {
            let line: Vec<String> = m.entries().iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty index-set file".into()))?;
        let mut dim = None;
        let mut kind = None;
        let mut degree = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed header field `{field}`")))?;
            match key {
                "dim" => dim = Some(parse_num::<usize>(value)?),
                "kind" => kind = Some(value.to_string()),
                "n" => degree = Some(parse_num::<u32>(value)?),
                other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("header is missing `dim`".into()))?;
        let kind = kind.ok_or_else(|| Error::Parse("header is missing `kind`".into()))?;
        let degree = degree.ok_or_else(|| Error::Parse("header is missing `n`".into()))?;

        let mut indices = Vec::new();
        for line in lines {
            let entries = line
                .split_whitespace()
                .map(parse_num::<u32>)
                .collect::<Result<Vec<_>>>()?;
            indices.push(MultiIndex::new(entries)?);
        }
        let mut set = MultiIndexSet::custom(dim, indices)?;
        set.kind = match kind.as_str() {
            "custom" => IndexSetKind::Custom,
            family => {
                let family: IndexFamily = family.parse()?;
                let expected = family.build(degree, dim)?;
                if expected.indices != set.indices {
                    return Err(Error::Parse(format!(
                        "listed indices do not match {family} of degree {degree}"
                    )));
                }
                expected.kind
            }
        };
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a MultiIndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("not a nonnegative integer: `{s}`")))
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::Shape("dimension must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn binomial_capped(n: u128, k: u128, cap: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: C(n, i+1) = C(n, i) * (n - i) / (i + 1)
        acc = acc * (n - i) / (i + 1);
        if acc > cap as u128 {
            return acc;
        }
    }
    acc
}

fn count_hc(dims_left: usize, budget: u64, stop: u128, count: &mut u128) {
    if *count >= stop {
        return;
    }
    if dims_left == 1 {
        *count += budget as u128;
        return;
    }
    let mut k = 0u64;
    while k < budget {
        count_hc(dims_left - 1, budget / (k + 1), stop, count);
        if *count >= stop {
            return;
        }
        k += 1;
    }
}

/// `{ n : |n|_inf <= n }`, cardinality `(n+1)^d`.
pub fn tensor_product_set(n: u32, d: usize) -> Result<MultiIndexSet> {
    tensor_product_set_capped(n, d, DEFAULT_CARDINALITY_CAP)
}

pub fn tensor_product_set_capped(n: u32, d: usize, cap: usize) -> Result<MultiIndexSet> {
    IndexFamily::TensorProduct.cardinality(n, d, cap)?;
    let mut indices = Vec::new();
    let mut current = vec![0u32; d];
    fill_bounded(0, &mut current, &mut indices, &|_, _| n);
    Ok(MultiIndexSet {
        dim: d,
        kind: IndexSetKind::TensorProduct(n),
        indices,
    })
}

/// `{ n : |n|_1 <= n }`, cardinality `binom(n+d, d)`.
pub fn total_degree_set(n: u32, d: usize) -> Result<MultiIndexSet> {
    total_degree_set_capped(n, d, DEFAULT_CARDINALITY_CAP)
}

pub fn total_degree_set_capped(n: u32, d: usize, cap: usize) -> Result<MultiIndexSet> {
    IndexFamily::TotalDegree.cardinality(n, d, cap)?;
    let mut indices = Vec::new();
    let mut current = vec![0u32; d];
    fill_bounded(0, &mut current, &mut indices, &|prefix: &[u32], _| {
        n - prefix.iter().sum::<u32>()
    });
    Ok(MultiIndexSet {
        dim: d,
        kind: IndexSetKind::TotalDegree(n),
        indices,
    })
}

/// `{ n : prod (n_k + 1) <= n + 1 }`.
pub fn hyperbolic_cross_set(n: u32, d: usize) -> Result<MultiIndexSet> {
    hyperbolic_cross_set_capped(n, d, DEFAULT_CARDINALITY_CAP)
}

pub fn hyperbolic_cross_set_capped(n: u32, d: usize, cap: usize) -> Result<MultiIndexSet> {
    IndexFamily::HyperbolicCross.cardinality(n, d, cap)?;
    let mut indices = Vec::new();
    let mut current = vec![0u32; d];
    fill_bounded(0, &mut current, &mut indices, &|prefix: &[u32], _| {
        let used: u64 = prefix.iter().map(|&k| k as u64 + 1).product();
        ((n as u64 + 1) / used - 1) as u32
    });
    Ok(MultiIndexSet {
        dim: d,
        kind: IndexSetKind::HyperbolicCross(n),
        indices,
    })
}

/// Depth-first fill where `bound(prefix, axis)` gives the largest admissible
/// entry for `axis` given the entries already chosen. Emission order is
/// lexicographic because the first axis is the outermost loop.
fn fill_bounded(
    axis: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
    bound: &dyn Fn(&[u32], usize) -> u32,
) {
    if axis == current.len() {
        out.push(MultiIndex(current.clone()));
        return;
    }
    let hi = bound(&current[..axis], axis);
    for k in 0..=hi {
        current[axis] = k;
        fill_bounded(axis + 1, current, out, bound);
    }
    current[axis] = 0;
}

/// Whether `set` is closed under coordinatewise domination.
pub fn is_lower_set(set: &MultiIndexSet) -> bool {
    let members: HashSet<&MultiIndex> = set.indices.iter().collect();
    // Closure under unit decrements implies closure under domination.
    set.indices.iter().all(|m| {
        (0..m.dim()).all(|k| {
            if m.0[k] == 0 {
                return true;
            }
            let mut lower = m.clone();
            lower.0[k] -= 1;
            members.contains(&lower)
        })
    })
}

/// Relation between the space dimension `N` and the sample count `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum OversamplingRule {
    /// `c N <= M`
    Linear { c: f64 },
    /// `c N log N <= M`
    LogLinear { c: f64 },
    /// `c N^2 <= M`, or `c N^2 log N <= M` when `log` is set
    Quadratic { c: f64, log: bool },
}

impl OversamplingRule {
    fn load(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            OversamplingRule::Linear { c } => c * n,
            OversamplingRule::LogLinear { c } => c * n * n.ln(),
            OversamplingRule::Quadratic { c, log: false } => c * n * n,
            OversamplingRule::Quadratic { c, log: true } => c * n * n * n.ln(),
        }
    }

    /// Whether `M` samples satisfy the rule for a space of dimension `N`.
    pub fn admits(&self, n: usize, m: usize) -> bool {
        self.load(n) <= m as f64
    }

    /// Smallest admissible `M` for a space of dimension `N` (at least 1).
    pub fn samples_for(&self, n: usize) -> usize {
        (self.load(n).ceil() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let c = match *self {
            OversamplingRule::Linear { c }
            | OversamplingRule::LogLinear { c }
            | OversamplingRule::Quadratic { c, .. } => c,
        };
        if c.is_finite() && c > 0.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "oversampling constant must be positive, got {c}"
            )))
        }
    }
}

impl fmt::Display for OversamplingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OversamplingRule::Linear { c } => write!(f, "linear({c})"),
            OversamplingRule::LogLinear { c } => write!(f, "loglinear({c})"),
            OversamplingRule::Quadratic { c, log: false } => write!(f, "quadratic({c})"),
            OversamplingRule::Quadratic { c, log: true } => write!(f, "quadratic_log({c})"),
        }
    }
}

impl FromStr for OversamplingRule {
    type Err = Error;

    /// Accepts `linear`, `loglinear`, `quadratic`, `quadratic_log`, each with
    /// an optional `(c)` suffix (default `c = 1`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, c) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in `{s}`")))?;
                let c: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad oversampling constant in `{s}`")))?;
                (name.trim().to_string(), c)
            }
            None => (s.clone(), 1.0),
        };
        let rule = match name.as_str() {
            "linear" => OversamplingRule::Linear { c },
            "loglinear" | "log_linear" => OversamplingRule::LogLinear { c },
            "quadratic" => OversamplingRule::Quadratic { c, log: false },
            "quadratic_log" | "quadraticlog" => OversamplingRule::Quadratic { c, log: true },
            other => return Err(Error::Parse(format!("unknown oversampling rule `{other}`"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Largest degree `n` whose set cardinality satisfies `rule` for budget `m`.
/// Returns 0 when even the single constant index violates the rule.
pub fn largest_n_for_budget(
    family: IndexFamily,
    d: usize,
    m: usize,
    rule: OversamplingRule,
) -> Result<u32> {
    if m == 0 {
        return Err(Error::InvalidBudget("sample budget M must be >= 1".into()));
    }
    rule.validate()?;
    check_dim(d)?;
    let mut best = 0u32;
    let mut n = 1u32;
    loop {
        let card = family.cardinality(n, d, DEFAULT_CARDINALITY_CAP)?;
        if !rule.admits(card, m) {
            return Ok(best);
        }
        best = n;
        n += 1;
    }
}
