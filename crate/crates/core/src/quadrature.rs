//! One-dimensional quadrature rules normalized to probability measures, and
//! their tensor products on the bounding box.

use crate::error::{Error, Result};

/// Nodes and weights of a rule whose weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `q`-point Gauss-Legendre rule for the uniform probability measure on (-1, 1).
/// Exact for polynomials of degree `<= 2q - 1`.
pub fn gauss_legendre(q: usize) -> Rule1d {
    assert!(q >= 1, "quadrature order must be >= 1");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_q
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(q, x);
        dp = if d.is_finite() { d } else { dp };
        // weight of the probability measure is half the Lebesgue weight
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Rule1d { nodes, weights }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// `q`-point Gauss-Chebyshev rule for the Chebyshev probability measure
/// `dy / (pi sqrt(1 - y^2))` on (-1, 1).
pub fn gauss_chebyshev(q: usize) -> Rule1d {
    assert!(q >= 1, "quadrature order must be >= 1");
    let nodes = (1..=q)
        .rev()
        .map(|j| ((2 * j - 1) as f64 * std::f64::consts::PI / (2 * q) as f64).cos())
        .collect();
    Rule1d {
        nodes,
        weights: vec![1.0 / q as f64; q],
    }
}

/// Composite trapezoid rule with `q` equal panels on `[-t, t]`, normalized to
/// the uniform probability measure. Exact for `cos(k pi (y + t) / (2t))`
/// whenever `k` is not a positive multiple of `2q`.
pub fn trapezoid(q: usize, t: f64) -> Rule1d {
    assert!(q >= 1, "quadrature order must be >= 1");
    let h = 2.0 * t / q as f64;
    let nodes = (0..=q).map(|j| -t + h * j as f64).collect();
    let mut weights = vec![1.0 / q as f64; q + 1];
    weights[0] *= 0.5;
    weights[q] *= 0.5;
    Rule1d { nodes, weights }
}

/// Largest tensor grid the integrators will build.
pub const MAX_TENSOR_POINTS: usize = 50_000_000;

/// Visits every node of the `d`-fold tensor product of `rule`, passing the
/// point, its product weight and the per-axis node positions.
pub fn for_each_tensor_node<F>(rule: &Rule1d, d: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[f64], f64, &[usize]),
{
    let q = rule.len();
    let total = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > MAX_TENSOR_POINTS as u128 {
        return Err(Error::Parameter(format!(
            "tensor quadrature with {q}^{d} nodes exceeds the limit of {MAX_TENSOR_POINTS}"
        )));
    }
    let mut pos = vec![0usize; d];
    let mut point: Vec<f64> = vec![rule.nodes[0]; d];
    loop {
        let w: f64 = pos.iter().map(|&i| rule.weights[i]).product();
        visit(&point, w, &pos);
        // odometer increment, last axis fastest
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(());
            }
            axis -= 1;
            pos[axis] += 1;
            if pos[axis] < q {
                point[axis] = rule.nodes[pos[axis]];
                break;
            }
            pos[axis] = 0;
            point[axis] = rule.nodes[0];
        }
    }
}
