//! Least squares by Householder QR and the CR1 cluster-robust sandwich.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Column `j` counts as dependent when `|R_jj| <= RANK_TOL * ||X_j||`.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^-1`.
    pub xtx_inv: DMatrix<f64>,
}

/// Upper-triangular `R` of `X = QR` after a rank check. Dependent columns
/// are reported by name.
fn checked_qr(x: &DMatrix<f64>, names: &[String]) -> Result<nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let (n, k) = x.shape();
    let name = |j: usize| names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
    let zero: Vec<String> = (0..k).filter(|&j| x.column(j).iter().all(|&v| v == 0.0)).map(name).collect();
    if !zero.is_empty() {
        return Err(Error::RankDeficient(zero));
    }
    if n < k {
        return Err(Error::InsufficientDof { n_obs: n, n_params: k });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<String> = (0..k)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOL * x.column(j).norm())
        .map(name)
        .collect();
    if !dependent.is_empty() {
        return Err(Error::RankDeficient(dependent));
    }
    Ok(qr)
}

fn inverse_from_r(r: &DMatrix<f64>) -> DMatrix<f64> {
    let k = r.ncols();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .expect("diagonal checked non-zero");
    &r_inv * r_inv.transpose()
}

pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<OlsFit> {
    if x.nrows() != y.len() {
        return Err(Error::InconsistentInputs(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.len()
        )));
    }
    let k = x.ncols();
    let qr = checked_qr(x, names)?;
    let r = qr.r();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let beta = r
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .expect("diagonal checked non-zero");
    let residuals = y - x * &beta;
    Ok(OlsFit {
        coefficients: beta,
        residuals,
        xtx_inv: inverse_from_r(&r),
    })
}

/// `(X'X)^-1` with the same rank check as [`ols`].
pub fn xtx_inverse(x: &DMatrix<f64>, names: &[String]) -> Result<DMatrix<f64>> {
    let qr = checked_qr(x, names)?;
    Ok(inverse_from_r(&qr.r()))
}

/// CR1 sandwich
/// `(X'X)^-1 (Σ_g X_g' r_g r_g' X_g) (X'X)^-1 · G/(G-1) · (N-1)/(N-K)`
/// with `K = X.ncols() + n_absorbed`.
pub fn cluster_robust_vcov(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    clusters: &[usize],
    n_absorbed: usize,
) -> Result<DMatrix<f64>> {
    let names: Vec<String> = (0..x.ncols()).map(|j| format!("x{j}")).collect();
    let bread = xtx_inverse(x, &names)?;
    cluster_robust_vcov_with_bread(x, residuals, clusters, n_absorbed, &bread)
}

pub(crate) fn cluster_robust_vcov_with_bread(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    clusters: &[usize],
    n_absorbed: usize,
    bread: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    if residuals.len() != n || clusters.len() != n {
        return Err(Error::InconsistentInputs("residual/cluster length mismatch".into()));
    }
    let mut scores: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
    for i in 0..n {
        let s = scores.entry(clusters[i]).or_insert_with(|| DVector::zeros(k));
        s.axpy(residuals[i], &x.row(i).transpose(), 1.0);
    }
    let g = scores.len();
    if g < 2 {
        return Err(Error::SingleCluster);
    }
    let k_total = k + n_absorbed;
    if n <= k_total {
        return Err(Error::InsufficientDof {
            n_obs: n,
            n_params: k_total,
        });
    }
    let mut meat = DMatrix::zeros(k, k);
    for s in scores.values() {
        meat.ger(1.0, s, s, 1.0);
    }
    let scale = (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n - k_total) as f64);
    let v = bread * meat * bread * scale;
    // exact symmetry
    Ok((&v + v.transpose()) * 0.5)
}
