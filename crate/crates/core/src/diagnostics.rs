//! Conditioning constants, Nikolskii estimates and sample-complexity formulas.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::domains::{draw_samples_on_stream, DomainSpec, SampleSet, SamplingMeasure};
use crate::error::{Error, Result};
use crate::framesolver::{basis_matrix, FrameSvd};
use crate::indexsets::MultiIndexSet;
use crate::polybasis::{BasisKind, BoxMeasure};
use crate::rng::streams;

/// Default number of Monte-Carlo points for Gram estimates.
pub const DEFAULT_GRAM_POINTS: usize = 10_000;

/// Relative rank tolerance below which `C_{Y,L}` is reported as infinite.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Sampling measure on `Omega` induced by the orthogonality measure of a basis.
pub fn matched_measure(basis: BasisKind) -> SamplingMeasure {
    match basis.measure() {
        BoxMeasure::Uniform => SamplingMeasure::UniformOnOmega,
        BoxMeasure::Chebyshev => SamplingMeasure::ChebyshevOnOmega,
    }
}

/// `K x N` matrix with rows `phi_n(z_k) / sqrt(K)` for `z_k ~ mu` i.i.d.
#[derive(Debug, Clone)]
pub struct MonteCarloGram {
    pub h: DMatrix<f64>,
    pub points: SampleSet,
    /// Set when `K < N`, in which case `H^T H` is singular.
    pub under_sampled: bool,
}

impl MonteCarloGram {
    pub fn k(&self) -> usize {
        self.h.nrows()
    }

    /// `H^T H`, the estimate of the Gram matrix on `Omega`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.h.tr_mul(&self.h)
    }
}

pub fn monte_carlo_gram(
    domain: &DomainSpec,
    set: &MultiIndexSet,
    basis: BasisKind,
    k: usize,
    seed: u64,
) -> Result<MonteCarloGram> {
    let points = draw_samples_on_stream(domain, matched_measure(basis), k, seed, streams::GRAM)?;
    monte_carlo_gram_from_points(points, set, basis)
}

/// Gram estimate on a given point set (for example, an evaluation set).
pub fn monte_carlo_gram_from_points(
    points: SampleSet,
    set: &MultiIndexSet,
    basis: BasisKind,
) -> Result<MonteCarloGram> {
    let k = points.len();
    let h = basis_matrix(set, basis, &points.points, 1.0 / (k as f64).sqrt())?;
    Ok(MonteCarloGram {
        under_sampled: k < set.len(),
        h,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub c_prime: f64,
    pub c_double_prime: f64,
    pub c_max: f64,
    /// `C_{Y,L}`; infinite when `A` is numerically rank deficient.
    pub c_unregularized: Option<f64>,
    pub epsilon: f64,
    pub retained_rank: usize,
    pub gram_sample_count: usize,
    pub seed: Option<u64>,
    /// Relative standard error of `c_max` due to the Monte-Carlo Gram,
    /// estimated at the maximizing direction.
    pub mc_rel_std_err: f64,
}

/// Largest eigenvalue and unit eigenvector of `W^T G W`.
fn top_eigen(g: &DMatrix<f64>, w: &DMatrix<f64>) -> (f64, DVector<f64>) {
    if w.ncols() == 0 {
        return (0.0, DVector::zeros(0));
    }
    let s = w.tr_mul(&(g * w));
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let (idx, &lam) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    (lam.max(0.0), eig.eigenvectors.column(idx).into_owned())
}

/// Relative standard error of `||H x||_2` viewed as the square root of the
/// Monte-Carlo mean of `K (H x)_k^2`.
fn mc_rel_std_err(h: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let k = h.nrows() as f64;
    let hx = h * x;
    let s: Vec<f64> = hx.iter().map(|v| k * v * v).collect();
    let mean = s.iter().sum::<f64>() / k;
    if mean <= 0.0 || k < 2.0 {
        return 0.0;
    }
    let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    // delta method: relative error of sqrt(mean) is half that of the mean
    0.5 * (var / k).sqrt() / mean
}

/// The constants `C'`, `C''` and `C = max(C', C'')` of the regularized
/// reconstruction, from the SVD of `A` and a Monte-Carlo Gram factor `H`.
///
/// `C'' = ||H P||_2 / eps` with `P` the projector onto the discarded right
/// singular directions, including the null space of `A` when `M < N`.
pub fn condition_constants(
    svd: &FrameSvd,
    epsilon: f64,
    gram: &MonteCarloGram,
    seed: Option<u64>,
) -> Result<ConditionReport> {
    let g = gram.gram();
    condition_constants_with_gram(svd, epsilon, &gram.h, &g, seed)
}

/// [`condition_constants`] with `G = H^T H` precomputed, for sweeps over `eps`.
pub fn condition_constants_with_gram(
    svd: &FrameSvd,
    epsilon: f64,
    h: &DMatrix<f64>,
    g: &DMatrix<f64>,
    seed: Option<u64>,
) -> Result<ConditionReport> {
    let n = svd.cols();
    if h.ncols() != n || g.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "Gram factor has {} columns but A has {n}",
            h.ncols()
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("threshold must be finite and >= 0, got {epsilon}")));
    }
    let k = svd.retained_rank(epsilon);
    let sigma = svd.sigma();
    let v = svd.v();

    let mut w = v.columns(0, k).into_owned();
    for j in 0..k {
        w.column_mut(j).scale_mut(1.0 / sigma[j]);
    }
    let (lam1, u1) = top_eigen(g, &w);
    let c_prime = lam1.sqrt();

    let (c_double_prime, dir2) = if epsilon == 0.0 || k == n {
        (0.0, None)
    } else {
        let vp = v.columns(k, n - k).into_owned();
        let (lam2, u2) = top_eigen(g, &vp);
        (lam2.sqrt() / epsilon, Some(vp * u2))
    };

    let c_max = c_prime.max(c_double_prime);
    let rel = if c_max == 0.0 {
        0.0
    } else if c_prime >= c_double_prime {
        mc_rel_std_err(h, &(w * u1))
    } else {
        mc_rel_std_err(h, dir2.as_ref().expect("C'' direction"))
    };
    Ok(ConditionReport {
        c_prime,
        c_double_prime,
        c_max,
        c_unregularized: Some(c_upsilon_lambda_with_gram(svd, g)),
        epsilon,
        retained_rank: k,
        gram_sample_count: h.nrows(),
        seed,
        mc_rel_std_err: rel,
    })
}

/// `C_{Y,L} = ||H V Sigma^{-1}||_2`, the square root of the largest
/// generalized eigenvalue of `(H^T H, A^T A)`.
pub fn c_upsilon_lambda(svd: &FrameSvd, gram: &MonteCarloGram) -> f64 {
    c_upsilon_lambda_with_gram(svd, &gram.gram())
}

pub fn c_upsilon_lambda_with_gram(svd: &FrameSvd, g: &DMatrix<f64>) -> f64 {
    let sigma = svd.sigma();
    let n = svd.cols();
    let smax = sigma[0];
    if svd.singular_values().len() < n || !(sigma[n - 1] > RANK_TOLERANCE * smax) {
        return f64::INFINITY;
    }
    let mut w = svd.v().clone();
    for j in 0..n {
        w.column_mut(j).scale_mut(1.0 / sigma[j]);
    }
    top_eigen(g, &w).0.sqrt()
}

/// `sigma_max / sigma_min` over the `min(M, N)` singular values of `A`.
pub fn condition_number(svd: &FrameSvd) -> f64 {
    let s = svd.singular_values();
    let lo = s[s.len() - 1];
    if svd.singular_values().len() < svd.cols() || lo <= 0.0 {
        f64::INFINITY
    } else {
        s[0] / lo
    }
}

/// The cap `1 / (sqrt(v) eps)` on `C_{Y,L,eps}`.
pub fn universal_cap(volume_fraction: f64, epsilon: f64) -> f64 {
    1.0 / (volume_fraction.sqrt() * epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NikolskiiEstimate {
    pub value: f64,
    pub candidates: usize,
    pub gram_points: usize,
    /// The Gram estimate needed an eigenvalue floor to be inverted.
    pub regularized: bool,
}

/// Lower-bound estimate of the Nikolskii constant of `P_Lambda` on `Omega`:
/// the maximum of `sqrt(Phi(y)^T G^{-1} Phi(y))` over the Gram points and the
/// first `k_points` points of a fresh candidate pool.
pub fn nikolskii_constant_estimate(
    domain: &DomainSpec,
    set: &MultiIndexSet,
    basis: BasisKind,
    k_gram: usize,
    k_points: usize,
    seed: u64,
) -> Result<NikolskiiEstimate> {
    let gram = monte_carlo_gram(domain, set, basis, k_gram, seed)?;
    let pool = if k_points > 0 {
        Some(draw_samples_on_stream(
            domain,
            matched_measure(basis),
            k_points,
            seed,
            streams::CANDIDATES,
        )?)
    } else {
        None
    };
    nikolskii_from_gram(&gram, pool.as_ref(), set, basis)
}

pub fn nikolskii_from_gram(
    gram: &MonteCarloGram,
    pool: Option<&SampleSet>,
    set: &MultiIndexSet,
    basis: BasisKind,
) -> Result<NikolskiiEstimate> {
    let n = set.len();
    let g = gram.gram();
    // whitening map W with W^T W = G^{-1}, so Phi^T G^{-1} Phi = |W Phi|^2
    let (whiten, regularized) = match g.clone().cholesky() {
        Some(ch) if !gram.under_sampled => {
            let inv_l = ch
                .l()
                .solve_lower_triangular(&DMatrix::identity(n, n))
                .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
            (inv_l, false)
        }
        _ => {
            let eig = SymmetricEigen::new(g);
            let top = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
            let floor = RANK_TOLERANCE * top;
            let mut w = eig.eigenvectors.transpose();
            for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                w.row_mut(i).scale_mut(1.0 / lam.max(floor).sqrt());
            }
            (w, true)
        }
    };
    let sqrt_k = (gram.k() as f64).sqrt();
    let mut best = 0.0f64;
    let mut candidates = 0;
    // rows of H are already Phi(z) / sqrt(K)
    for row in gram.h.row_iter() {
        let z = &whiten * row.transpose();
        best = best.max(z.norm() * sqrt_k);
        candidates += 1;
    }
    if let Some(pool) = pool {
        let phi = basis_matrix(set, basis, &pool.points, 1.0)?;
        for row in phi.row_iter() {
            let z = &whiten * row.transpose();
            best = best.max(z.norm());
            candidates += 1;
        }
    }
    Ok(NikolskiiEstimate {
        value: best,
        candidates,
        gram_points: gram.k(),
        regularized,
    })
}

/// Source of the `sup`-to-`L^2` constant in the sample-complexity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NikolskiiSource {
    /// `N^2 / lambda` for domains with the lambda-rectangle property.
    Lambda(f64),
    /// A squared Nikolskii constant, estimated or known.
    Squared(f64),
}

/// Smallest `M` with `M >= K log(N / gamma) / ((1 - delta) log(1 - delta) + delta)`,
/// where `K` is `N^2 / lambda` or the squared Nikolskii constant.
pub fn sample_complexity_bound(n: usize, source: NikolskiiSource, delta: f64, gamma: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Parameter(format!(
            "delta and gamma must lie in (0, 1), got delta = {delta}, gamma = {gamma}"
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("N must be >= 1".into()));
    }
    let nf = n as f64;
    let k = match source {
        NikolskiiSource::Lambda(l) if l > 0.0 && l <= 1.0 => nf * nf / l,
        NikolskiiSource::Squared(s) if s > 0.0 && s.is_finite() => s,
        other => return Err(Error::Parameter(format!("invalid constant {other:?}"))),
    };
    let denom = (1.0 - delta) * (1.0 - delta).ln() + delta;
    let m = (k * (nf / gamma).ln() / denom).ceil();
    if !(m.is_finite() && m < u64::MAX as f64) {
        return Err(Error::Parameter("sample complexity overflows".into()));
    }
    Ok(m as u64)
}

/// `T_{N-1}(4/|Omega| - 1) / N^2` for an interval `Omega` of length `|Omega|`
/// inside `(-1, 1)`.
pub fn cond_lower_bound_1d(n: usize, omega_length: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("N must be >= 1".into()));
    }
    if !(omega_length > 0.0 && omega_length <= 2.0) {
        return Err(Error::Parameter(format!(
            "interval length must lie in (0, 2], got {omega_length}"
        )));
    }
    let x = 4.0 / omega_length - 1.0;
    let (mut t0, mut t1) = (1.0, x);
    let t = if n == 1 {
        1.0
    } else {
        for _ in 2..n {
            let t2 = 2.0 * x * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        t1
    };
    Ok(t / (n * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{draw_uniform_samples, DomainKind};
    use crate::framesolver::assemble_design_matrix;
    use crate::indexsets::{hyperbolic_cross_set, total_degree_set, MultiIndex};
    use crate::quadrature::gauss_legendre;
    use crate::polybasis::legendre_1d;

    fn box2() -> DomainSpec {
        DomainSpec::new(DomainKind::FullBox, 2).unwrap()
    }

    #[test]
    fn well_sampled_full_box() {
        let set = total_degree_set(4, 2).unwrap();
        let s = draw_uniform_samples(&box2(), 20_000, 3).unwrap();
        let a = assemble_design_matrix(&s, &set, BasisKind::Legendre).unwrap();
        let svd = FrameSvd::new(&a.matrix).unwrap();
        let h = monte_carlo_gram(&box2(), &set, BasisKind::Legendre, 10_000, 3).unwrap();
        let r = condition_constants(&svd, 1e-8, &h, Some(3)).unwrap();
        assert_eq!(r.c_double_prime, 0.0);
        assert!((r.c_prime - 1.0).abs() < 0.1, "C' = {}", r.c_prime);
        assert_eq!(r.c_max, r.c_prime);
        let cu = r.c_unregularized.unwrap();
        assert!((cu - r.c_prime).abs() < 1e-10);
        assert!((cu - 1.0).abs() < 0.1);
    }

    #[test]
    fn threshold_above_spectrum() {
        let set = total_degree_set(3, 2).unwrap();
        let s = draw_uniform_samples(&box2(), 200, 1).unwrap();
        let a = assemble_design_matrix(&s, &set, BasisKind::Legendre).unwrap();
        let svd = FrameSvd::new(&a.matrix).unwrap();
        let h = monte_carlo_gram(&box2(), &set, BasisKind::Legendre, 2_000, 1).unwrap();
        let eps = 10.0 * svd.sigma()[0];
        let r = condition_constants(&svd, eps, &h, None).unwrap();
        assert_eq!(r.retained_rank, 0);
        assert_eq!(r.c_prime, 0.0);
        let hv_norm = (&h.h * svd.v()).singular_values().max();
        assert!((r.c_double_prime - hv_norm / eps).abs() < 1e-10 * r.c_double_prime);
    }

    #[test]
    fn same_points_give_unit_constant() {
        let dom = DomainSpec::new(DomainKind::LShape, 2).unwrap();
        let set = hyperbolic_cross_set(6, 2).unwrap();
        let s = draw_uniform_samples(&dom, 500, 9).unwrap();
        let a = assemble_design_matrix(&s, &set, BasisKind::Legendre).unwrap();
        let svd = FrameSvd::new(&a.matrix).unwrap();
        let gram = monte_carlo_gram_from_points(s.clone(), &set, BasisKind::Legendre).unwrap();
        let c = c_upsilon_lambda(&svd, &gram);
        assert!((c - 1.0).abs() < 1e-9, "{c}");
    }

    #[test]
    fn wide_matrix_is_rank_deficient() {
        let set = total_degree_set(4, 2).unwrap();
        let s = draw_uniform_samples(&box2(), 10, 2).unwrap();
        let a = assemble_design_matrix(&s, &set, BasisKind::Legendre).unwrap();
        let svd = FrameSvd::new(&a.matrix).unwrap();
        let h = monte_carlo_gram(&box2(), &set, BasisKind::Legendre, 1_000, 2).unwrap();
        let r = condition_constants(&svd, 1e-8, &h, None).unwrap();
        assert_eq!(r.c_unregularized, Some(f64::INFINITY));
        assert!(r.c_double_prime > 0.0);
        assert!(r.c_max <= universal_cap(1.0, 1e-8) * (1.0 + 3.0 * r.mc_rel_std_err) + 1.0);
        let r0 = condition_constants(&svd, 0.0, &h, None).unwrap();
        assert_eq!(r0.c_double_prime, 0.0);
    }

    #[test]
    fn gram_deterministic_and_matches_quadrature_on_lshape() {
        let dom = DomainSpec::new(DomainKind::LShape, 2).unwrap();
        let set = total_degree_set(2, 2).unwrap();
        let n = set.len();
        let k = 50_000;
        let g1 = monte_carlo_gram(&dom, &set, BasisKind::Legendre, k, 5).unwrap();
        let g2 = monte_carlo_gram(&dom, &set, BasisKind::Legendre, k, 5).unwrap();
        assert_eq!(g1.h, g2.h);
        // the L-shape is [-1,0]x[-1,1] union [0,1]x[-1,0]; map Gauss points onto each
        let rule = gauss_legendre(8);
        let psi = |m: &MultiIndex, x: f64, y: f64| {
            legendre_1d(m.entries()[0], x) * legendre_1d(m.entries()[1], y)
        };
        let rects = [(-1.0, 0.0, -1.0, 1.0), (0.0, 1.0, -1.0, 0.0)];
        let area = 3.0;
        let gram = g1.gram();
        for (i, mi) in set.iter().enumerate() {
            for (j, mj) in set.iter().enumerate() {
                let mut exact = 0.0;
                for &(x0, x1, y0, y1) in &rects {
                    let jac = (x1 - x0) * (y1 - y0);
                    for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
                        for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                            let x = x0 + (x1 - x0) * (a + 1.0) / 2.0;
                            let y = y0 + (y1 - y0) * (b + 1.0) / 2.0;
                            exact += wa * wb * jac * psi(mi, x, y) * psi(mj, x, y);
                        }
                    }
                }
                exact /= area;
                let prods: Vec<f64> = g1
                    .points
                    .rows()
                    .map(|p| psi(mi, p[0], p[1]) * psi(mj, p[0], p[1]))
                    .collect();
                let mean = prods.iter().sum::<f64>() / k as f64;
                let var = prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
                let se = (var / k as f64).sqrt();
                assert!((gram[(i, j)] - mean).abs() < 1e-12);
                assert!((gram[(i, j)] - exact).abs() < 3.5 * se + 1e-12, "({i},{j}) of {n}");
            }
        }
    }

    #[test]
    fn nikolskii_estimates() {
        let zero = MultiIndexSet::custom(2, vec![MultiIndex::zero(2)]).unwrap();
        let e = nikolskii_constant_estimate(&box2(), &zero, BasisKind::Legendre, 1_000, 500, 1)
            .unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);

        let set = total_degree_set(4, 2).unwrap();
        let n = set.len() as f64;
        let full = nikolskii_constant_estimate(&box2(), &set, BasisKind::Legendre, 10_000, 2_000, 4)
            .unwrap();
        assert!(full.value <= n * 1.05, "{}", full.value);

        let dom = DomainSpec::new(DomainKind::LShape, 2).unwrap();
        let ls = nikolskii_constant_estimate(&dom, &set, BasisKind::Legendre, 10_000, 2_000, 4)
            .unwrap();
        assert!(ls.value.powi(2) <= n * n / (2.0 / 3.0), "{}", ls.value);

        let small = nikolskii_constant_estimate(&dom, &set, BasisKind::Legendre, 10_000, 100, 4)
            .unwrap();
        assert!(small.value <= ls.value);
    }

    #[test]
    fn sample_complexity_examples() {
        assert_eq!(
            sample_complexity_bound(10, NikolskiiSource::Lambda(2.0 / 3.0), 0.5, 1e-2).unwrap(),
            6754
        );
        let a = sample_complexity_bound(10, NikolskiiSource::Lambda(0.5), 0.5, 0.01).unwrap();
        let b = sample_complexity_bound(10, NikolskiiSource::Lambda(0.5), 0.5, 0.02).unwrap();
        assert!(b < a);
        let tiny = sample_complexity_bound(10, NikolskiiSource::Lambda(0.5), 1e-6, 0.01).unwrap();
        assert!(tiny > 1_000_000_000_000);
        assert!(sample_complexity_bound(10, NikolskiiSource::Lambda(0.5), 1.0, 0.1).is_err());
        assert!(sample_complexity_bound(10, NikolskiiSource::Squared(100.0), 0.5, 0.0).is_err());
        assert_eq!(
            sample_complexity_bound(10, NikolskiiSource::Squared(150.0), 0.5, 1e-2).unwrap(),
            6754
        );
    }

    #[test]
    fn cond_lower_bound_examples() {
        for n in 1..8 {
            assert!((cond_lower_bound_1d(n, 2.0).unwrap() - 1.0 / (n * n) as f64).abs() < 1e-15);
        }
        assert_eq!(cond_lower_bound_1d(5, 1.0).unwrap(), 577.0 / 25.0);
        for n in 10..30 {
            let r = cond_lower_bound_1d(n + 1, 1.0).unwrap() / cond_lower_bound_1d(n, 1.0).unwrap();
            assert!(r > 1.5);
        }
        assert!(cond_lower_bound_1d(5, 0.0).is_err());
        assert!(cond_lower_bound_1d(5, 2.5).is_err());
    }
}
