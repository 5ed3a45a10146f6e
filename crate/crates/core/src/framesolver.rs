//! Design matrices, the truncated-SVD least-squares solver, approximant
//! evaluation and pointwise truncation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::SampleSet;
use crate::error::{Error, Result};
use crate::indexsets::MultiIndexSet;
use crate::polybasis::{BasisKind, TensorBasis};

/// Default truncation threshold.
pub const DEFAULT_EPSILON: f64 = 1e-8;

const ROW_CHUNK: usize = 256;

/// Rows `scale * (psi_n(y_i))_n` for a flat batch of points, assembled in parallel.
pub fn basis_matrix(
    set: &MultiIndexSet,
    basis: BasisKind,
    points: &[f64],
    scale: f64,
) -> Result<DMatrix<f64>> {
    let d = set.dim();
    if !points.len().is_multiple_of(d) {
        return Err(Error::Shape(format!(
            "flat point buffer of length {} is not a multiple of d = {d}",
            points.len()
        )));
    }
    let rows = points.len() / d;
    let n = set.len();
    let tb = TensorBasis::new(set, basis).strict(true);
    let mut data = vec![0.0; rows * n];
    data.par_chunks_mut(ROW_CHUNK * n)
        .zip(points.par_chunks(ROW_CHUNK * d))
        .try_for_each(|(out, pts)| -> Result<()> {
            let mut tables = tb.scratch();
            for (row, y) in out.chunks_exact_mut(n).zip(pts.chunks_exact(d)) {
                tb.eval_into(y, &mut tables, row)?;
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numeric(format!("non-finite basis value at point {y:?}")));
                }
                for v in row.iter_mut() {
                    *v *= scale;
                }
            }
            Ok(())
        })?;
    Ok(DMatrix::from_row_slice(rows, n, &data))
}

/// The scaled `M x N` least-squares matrix `A_{i,n} = phi_n(y_i) / sqrt(M)`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub matrix: DMatrix<f64>,
    pub basis: BasisKind,
    pub index_set_descriptor: String,
    pub seed: Option<u64>,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn assemble_design_matrix(
    samples: &SampleSet,
    set: &MultiIndexSet,
    basis: BasisKind,
) -> Result<DesignMatrix> {
    if samples.dim() != set.dim() {
        return Err(Error::Shape(format!(
            "samples have dimension {} but the index set has dimension {}",
            samples.dim(),
            set.dim()
        )));
    }
    let scale = 1.0 / (samples.len() as f64).sqrt();
    Ok(DesignMatrix {
        matrix: basis_matrix(set, basis, &samples.points, scale)?,
        basis,
        index_set_descriptor: set.descriptor(),
        seed: Some(samples.seed),
    })
}

/// `b_i = f(y_i) / sqrt(M)`.
pub fn assemble_rhs<F>(samples: &SampleSet, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let scale = 1.0 / (samples.len() as f64).sqrt();
    samples
        .rows()
        .map(|y| {
            let v = f(y);
            if v.is_finite() {
                Ok(v * scale)
            } else {
                Err(Error::Numeric(format!("target is not finite at sample {y:?}")))
            }
        })
        .collect()
}

/// Singular value decomposition of a design matrix with a full set of `N`
/// right singular vectors.
///
/// Tall matrices are reduced by Householder QR before the SVD of the
/// triangular factor; wide matrices are padded with zero rows to `N x N`, so
/// that the null space of `A` appears as trailing zero singular values.
#[derive(Debug, Clone)]
pub struct FrameSvd {
    rows: usize,
    /// Nonincreasing, length `N`.
    sigma: Vec<f64>,
    /// `N x N`, columns are right singular vectors.
    v: DMatrix<f64>,
    /// `(U_R^T Q^T)` restricted to its first `N` rows, applied lazily.
    qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    u_r: DMatrix<f64>,
}

impl FrameSvd {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::Shape("cannot factor an empty matrix".into()));
        }
        let padded = if m >= n {
            a.clone()
        } else {
            let mut p = DMatrix::zeros(n, n);
            p.rows_mut(0, m).copy_from(a);
            p
        };
        let qr = padded.qr();
        let r = qr.r();
        let svd = nalgebra::linalg::SVD::try_new(r, true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
        let u_r = svd.u.ok_or_else(|| Error::Numeric("SVD returned no U".into()))?;
        let v = svd
            .v_t
            .ok_or_else(|| Error::Numeric("SVD returned no V".into()))?
            .transpose();
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        if sigma.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numeric("non-finite singular value".into()));
        }
        Ok(FrameSvd { rows: m, sigma, v, qr, u_r })
    }

    /// All `N` singular values, nonincreasing.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// The `min(M, N)` singular values of `A` itself.
    pub fn singular_values(&self) -> &[f64] {
        &self.sigma[..self.rows.min(self.sigma.len())]
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    /// Number of singular values strictly above `epsilon`.
    pub fn retained_rank(&self, epsilon: f64) -> usize {
        self.singular_values().iter().take_while(|&&s| s > epsilon).count()
    }

    /// `U^T b` in the basis of the `N` singular directions.
    pub fn ut_mul(&self, b: &[f64]) -> Result<DVector<f64>> {
        if b.len() != self.rows {
            return Err(Error::Shape(format!(
                "right-hand side has length {} but A has {} rows",
                b.len(),
                self.rows
            )));
        }
        let n = self.cols();
        let mut full = DVector::zeros(self.rows.max(n));
        full.rows_mut(0, self.rows).copy_from_slice(b);
        self.qr.q_tr_mul(&mut full);
        Ok(self.u_r.tr_mul(&full.rows(0, n)))
    }

    /// `c = V Sigma_eps^+ U^T b`.
    pub fn solve(&self, b: &[f64], epsilon: f64) -> Result<DVector<f64>> {
        let k = self.retained_rank(epsilon);
        let utb = self.ut_mul(b)?;
        let mut c = DVector::zeros(self.cols());
        for j in 0..k {
            c.axpy(utb[j] / self.sigma[j], &self.v.column(j), 1.0);
        }
        Ok(c)
    }
}

/// Output of [`truncated_svd_solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSvdSolution {
    pub epsilon: f64,
    pub retained_rank: usize,
    pub singular_values: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub index_set_descriptor: String,
    pub basis_descriptor: String,
    pub seed: Option<u64>,
}

impl TruncatedSvdSolution {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn coefficient_l2_norm(&self) -> f64 {
        coefficient_l2_norm(&self.coefficients)
    }

    pub fn condition_number(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("threshold must be finite and >= 0, got {epsilon}")))
    }
}

/// Solves with a precomputed factorization, so several thresholds can share one SVD.
pub fn solve_with_svd(
    a: &DesignMatrix,
    svd: &FrameSvd,
    b: &[f64],
    epsilon: f64,
) -> Result<TruncatedSvdSolution> {
    check_epsilon(epsilon)?;
    let c = svd.solve(b, epsilon)?;
    let residual = &a.matrix * &c - DVector::from_column_slice(b);
    Ok(TruncatedSvdSolution {
        epsilon,
        retained_rank: svd.retained_rank(epsilon),
        singular_values: svd.singular_values().to_vec(),
        coefficients: c.iter().copied().collect(),
        residual_norm: residual.norm(),
        index_set_descriptor: a.index_set_descriptor.clone(),
        basis_descriptor: a.basis.descriptor(),
        seed: a.seed,
    })
}

pub fn truncated_svd_solve(a: &DesignMatrix, b: &[f64], epsilon: f64) -> Result<TruncatedSvdSolution> {
    check_epsilon(epsilon)?;
    let svd = FrameSvd::new(&a.matrix)?;
    solve_with_svd(a, &svd, b, epsilon)
}

/// `sum_n c_n psi_n(y)` at each point of a flat batch.
pub fn evaluate_approximant(
    coefficients: &[f64],
    set: &MultiIndexSet,
    basis: BasisKind,
    points: &[f64],
) -> Result<Vec<f64>> {
    if coefficients.len() != set.len() {
        return Err(Error::Shape(format!(
            "{} coefficients for an index set of size {}",
            coefficients.len(),
            set.len()
        )));
    }
    let d = set.dim();
    if !points.len().is_multiple_of(d) {
        return Err(Error::Shape(format!(
            "flat point buffer of length {} is not a multiple of d = {d}",
            points.len()
        )));
    }
    let tb = TensorBasis::new(set, basis);
    let n = set.len();
    let chunks: Vec<Result<Vec<f64>>> = points
        .par_chunks(ROW_CHUNK * d)
        .map(|pts| {
            let mut tables = tb.scratch();
            let mut phi = vec![0.0; n];
            pts.chunks_exact(d)
                .map(|y| {
                    tb.eval_into(y, &mut tables, &mut phi)?;
                    Ok(phi.iter().zip(coefficients).map(|(p, c)| p * c).sum())
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(points.len() / d);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

fn check_bound(l: f64) -> Result<()> {
    if l >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("truncation bound must be >= 0, got {l}")))
    }
}

/// `T_L(g) = sgn(g) min(|g|, L)`.
pub fn truncate_pointwise(values: &[f64], l: f64) -> Result<Vec<f64>> {
    check_bound(l)?;
    Ok(values.iter().map(|&g| g.clamp(-l, l)).collect())
}

/// [`truncate_pointwise`] with the complex sign `z / |z|`.
pub fn truncate_pointwise_complex(values: &[Complex64], l: f64) -> Result<Vec<Complex64>> {
    check_bound(l)?;
    Ok(values
        .iter()
        .map(|&z| {
            let r = z.norm();
            if r <= l {
                z
            } else {
                z * (l / r)
            }
        })
        .collect())
}

/// Euclidean norm of a coefficient vector, which equals the `L^2(D, nu)`
/// norm of the approximant by orthonormality.
pub fn coefficient_l2_norm(coefficients: &[f64]) -> f64 {
    coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
}
