//! Orthonormal bases on the bounding box `D` and related quantities.
//!
//! Every 1-D family is orthonormal with respect to the probability measure
//! of its box: Legendre for the uniform measure on (-1, 1), Chebyshev for the
//! arcsine measure on (-1, 1) and the cosine family for the uniform measure on
//! (-T, T). Tensor functions are products over coordinates.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexsets::{total_degree_set, MultiIndex, MultiIndexSet};
use crate::quadrature::{self, Rule1d};

/// Extra quadrature points per axis beyond the largest degree.
pub const DEFAULT_QUADRATURE_MARGIN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BasisKind {
    Legendre,
    Chebyshev,
    /// Cosine functions on `(-T, T)`, `T >= 1`.
    Cosine { half_width: f64 },
}

/// Probability measure on the box with respect to which a basis is orthonormal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxMeasure {
    Uniform,
    Chebyshev,
}

impl BasisKind {
    pub fn cosine(half_width: f64) -> Result<Self> {
        let b = BasisKind::Cosine { half_width };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BasisKind::Cosine { half_width } if !(half_width >= 1.0 && half_width.is_finite()) => {
                Err(Error::Parameter(format!(
                    "cosine half-width must be >= 1, got {half_width}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Half-width `T` of the box `D = (-T, T)^d`.
    pub fn half_width(&self) -> f64 {
        match *self {
            BasisKind::Cosine { half_width } => half_width,
            _ => 1.0,
        }
    }

    pub fn measure(&self) -> BoxMeasure {
        match self {
            BasisKind::Chebyshev => BoxMeasure::Chebyshev,
            _ => BoxMeasure::Uniform,
        }
    }

    /// Value of the degree-`n` 1-D basis function at `y`.
    pub fn eval_1d(&self, n: u32, y: f64) -> f64 {
        match *self {
            BasisKind::Legendre => legendre_1d(n, y),
            BasisKind::Chebyshev => chebyshev_1d(n, y),
            BasisKind::Cosine { half_width } => cosine_1d(n, y, half_width),
        }
    }

    /// Writes degrees `0..out.len()` of the 1-D family at `y` into `out`.
    pub fn eval_1d_all(&self, y: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        match *self {
            BasisKind::Legendre => {
                let mut p0 = 1.0;
                let mut p1 = y;
                out[0] = 1.0;
                for (n, slot) in out.iter_mut().enumerate().skip(1) {
                    if n > 1 {
                        let k = (n - 1) as f64;
                        let p2 = ((2.0 * k + 1.0) * y * p1 - k * p0) / (k + 1.0);
                        p0 = p1;
                        p1 = p2;
                    }
                    *slot = ((2 * n + 1) as f64).sqrt() * p1;
                }
            }
            BasisKind::Chebyshev => {
                let mut t0 = 1.0;
                let mut t1 = y;
                out[0] = 1.0;
                for (n, slot) in out.iter_mut().enumerate().skip(1) {
                    if n > 1 {
                        let t2 = 2.0 * y * t1 - t0;
                        t0 = t1;
                        t1 = t2;
                    }
                    *slot = SQRT_2 * t1;
                }
            }
            BasisKind::Cosine { half_width } => {
                let theta = PI * (y + half_width) / (2.0 * half_width);
                out[0] = 1.0;
                for (n, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = SQRT_2 * (n as f64 * theta).cos();
                }
            }
        }
    }

    /// Quadrature rule matched to the basis measure, `q` points (panels for the
    /// cosine family).
    pub fn quadrature_rule(&self, q: usize) -> Rule1d {
        match *self {
            BasisKind::Legendre => quadrature::gauss_legendre(q),
            BasisKind::Chebyshev => quadrature::gauss_chebyshev(q),
            BasisKind::Cosine { half_width } => quadrature::trapezoid(q, half_width),
        }
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisKind::Legendre => f.write_str("legendre"),
            BasisKind::Chebyshev => f.write_str("chebyshev"),
            BasisKind::Cosine { half_width } => write!(f, "cosine({half_width})"),
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "legendre" => Ok(BasisKind::Legendre),
            "chebyshev" => Ok(BasisKind::Chebyshev),
            "cosine" => Ok(BasisKind::Cosine { half_width: 1.0 }),
            _ => {
                let inner = s
                    .strip_prefix("cosine(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("unknown basis `{s}`")))?;
                let t: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad cosine half-width in `{s}`")))?;
                BasisKind::cosine(t)
            }
        }
    }
}

/// `sqrt(2n + 1) P_n(y)`, with `P_n` from the three-term recurrence.
pub fn legendre_1d(n: u32, y: f64) -> f64 {
    let mut p0 = 1.0;
    let mut p1 = y;
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * y * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    ((2 * n + 1) as f64).sqrt() * p1
}

/// Orthonormal Chebyshev function: 1 for `n = 0`, `sqrt(2) T_n(y)` otherwise.
pub fn chebyshev_1d(n: u32, y: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut t0 = 1.0;
    let mut t1 = y;
    for _ in 1..n {
        let t2 = 2.0 * y * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    SQRT_2 * t1
}

/// Orthonormal cosine function on `(-T, T)`: 1 for `n = 0`,
/// `sqrt(2) cos(n pi (y + T) / (2T))` otherwise.
pub fn cosine_1d(n: u32, y: f64, half_width: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    SQRT_2 * (n as f64 * PI * (y + half_width) / (2.0 * half_width)).cos()
}

/// Evaluates all tensor basis functions of an index set at points.
///
/// Per-axis 1-D tables are filled once per point, so the cost per point is
/// `O(sum of axis degrees + N d)`.
#[derive(Debug, Clone)]
pub struct TensorBasis<'a> {
    set: &'a MultiIndexSet,
    kind: BasisKind,
    axis_degrees: Vec<u32>,
    strict: bool,
}

impl<'a> TensorBasis<'a> {
    pub fn new(set: &'a MultiIndexSet, kind: BasisKind) -> Self {
        Self {
            set,
            kind,
            axis_degrees: set.max_degree_per_axis(),
            strict: false,
        }
    }

    /// Makes evaluation outside the box an error instead of returning the
    /// analytic continuation.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn set(&self) -> &MultiIndexSet {
        self.set
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Reusable per-axis tables for [`TensorBasis::eval_into`].
    pub fn scratch(&self) -> Vec<Vec<f64>> {
        self.axis_degrees
            .iter()
            .map(|&k| vec![0.0; k as usize + 1])
            .collect()
    }

    pub fn eval_into(&self, point: &[f64], tables: &mut [Vec<f64>], out: &mut [f64]) -> Result<()> {
        let d = self.set.dim();
        if point.len() != d {
            return Err(Error::Shape(format!(
                "point has dimension {} but the index set has dimension {d}",
                point.len()
            )));
        }
        if out.len() != self.set.len() {
            return Err(Error::Shape(format!(
                "output buffer has length {} but N = {}",
                out.len(),
                self.set.len()
            )));
        }
        if self.strict {
            let t = self.kind.half_width();
            if point.iter().any(|y| !(y.abs() <= t)) {
                return Err(Error::OutsideBox {
                    point: point.to_vec(),
                    half_width: t,
                });
            }
        }
        for (table, &y) in tables.iter_mut().zip(point) {
            self.kind.eval_1d_all(y, table);
        }
        for (slot, m) in out.iter_mut().zip(self.set.iter()) {
            *slot = m
                .entries()
                .iter()
                .zip(tables.iter())
                .map(|(&k, t)| t[k as usize])
                .product();
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut tables = self.scratch();
        let mut out = vec![0.0; self.set.len()];
        self.eval_into(point, &mut tables, &mut out)?;
        Ok(out)
    }
}

/// Values of every basis function `psi_n`, `n` in `set`, at `point`, in the
/// canonical order of `set`.
pub fn tensor_basis_eval(set: &MultiIndexSet, point: &[f64], kind: BasisKind) -> Result<Vec<f64>> {
    TensorBasis::new(set, kind).eval(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum SobolevWeightKind {
    /// Sum over `|j|_1 <= m`.
    Classical(u32),
    /// Sum over `|j|_inf <= m`.
    Mixed(u32),
}

/// Legendre-Sobolev weight `sum_j prod_k (n_k (n_k + 1))^{j_k}` with `0^0 = 1`.
pub fn sobolev_weight(index: &MultiIndex, kind: SobolevWeightKind) -> f64 {
    let eig: Vec<f64> = index
        .entries()
        .iter()
        .map(|&k| k as f64 * (k as f64 + 1.0))
        .collect();
    match kind {
        // the max-norm ball factorizes over coordinates
        SobolevWeightKind::Mixed(m) => eig
            .iter()
            .map(|&e| (0..=m).map(|j| e.powi(j as i32)).sum::<f64>())
            .product(),
        SobolevWeightKind::Classical(m) => {
            let js = total_degree_set(m, index.dim()).expect("order set stays small");
            js.iter()
                .map(|j| {
                    j.entries()
                        .iter()
                        .zip(&eig)
                        .map(|(&p, &e)| e.powi(p as i32))
                        .product::<f64>()
                })
                .sum()
        }
    }
}

/// Orthogonal projection coefficients of a function onto the span of the
/// tensor basis, computed by tensor quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    /// Points per axis (panels for the trapezoid rule).
    pub order: usize,
    /// Set when `order` is below `max degree + 1`, in which case coefficients
    /// of polynomial inputs are no longer exact.
    pub under_resolved: bool,
}

/// Default quadrature order: largest degree plus [`DEFAULT_QUADRATURE_MARGIN`].
pub fn default_quadrature_order(set: &MultiIndexSet) -> usize {
    set.max_degree() as usize + DEFAULT_QUADRATURE_MARGIN
}

/// `<f, psi_n>` over `L^2(D, nu)` for every `n` in `set`.
pub fn projection_coefficients<F>(
    f: F,
    set: &MultiIndexSet,
    kind: BasisKind,
    order: Option<usize>,
) -> Result<Projection>
where
    F: Fn(&[f64]) -> f64,
{
    kind.validate()?;
    let order = order.unwrap_or_else(|| default_quadrature_order(set)).max(1);
    let rule = kind.quadrature_rule(order);
    let d = set.dim();
    let axis_degrees = set.max_degree_per_axis();
    let max_deg = axis_degrees.iter().copied().max().unwrap_or(0) as usize;
    // table[node][degree]
    let table: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&y| {
            let mut row = vec![0.0; max_deg + 1];
            kind.eval_1d_all(y, &mut row);
            row
        })
        .collect();
    let mut coefficients = vec![0.0; set.len()];
    quadrature::for_each_tensor_node(&rule, d, |point, w, pos| {
        let fw = f(point) * w;
        if fw == 0.0 {
            return;
        }
        for (c, m) in coefficients.iter_mut().zip(set.iter()) {
            let psi: f64 = m
                .entries()
                .iter()
                .zip(pos)
                .map(|(&k, &i)| table[i][k as usize])
                .product();
            *c += fw * psi;
        }
    })?;
    Ok(Projection {
        coefficients,
        order,
        under_resolved: order < max_deg + 1,
    })
}

/// `E_nu[g]` over the box by tensor quadrature of the given order.
pub fn integrate_on_box<F>(g: F, kind: BasisKind, d: usize, order: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let rule = kind.quadrature_rule(order.max(1));
    let mut acc = 0.0;
    quadrature::for_each_tensor_node(&rule, d, |point, w, _| acc += w * g(point))?;
    Ok(acc)
}

/// Quadrature Gram matrix `<psi_m, psi_n>` on the box, assembled from 1-D
/// quadrature Grams (valid because both rule and basis are tensor products).
pub fn quadrature_gram(set: &MultiIndexSet, kind: BasisKind, order: usize) -> Vec<Vec<f64>> {
    let rule = kind.quadrature_rule(order.max(1));
    let max_deg = set.max_degree() as usize;
    let values: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&y| {
            let mut row = vec![0.0; max_deg + 1];
            kind.eval_1d_all(y, &mut row);
            row
        })
        .collect();
    let mut g1 = vec![vec![0.0; max_deg + 1]; max_deg + 1];
    for (row, &w) in values.iter().zip(&rule.weights) {
        for a in 0..=max_deg {
            for b in 0..=max_deg {
                g1[a][b] += w * row[a] * row[b];
            }
        }
    }
    let n = set.len();
    let mut gram = vec![vec![0.0; n]; n];
    for (i, mi) in set.iter().enumerate() {
        for (j, mj) in set.iter().enumerate().skip(i) {
            let v: f64 = mi
                .entries()
                .iter()
                .zip(mj.entries())
                .map(|(&a, &b)| g1[a as usize][b as usize])
                .product();
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    gram
}
