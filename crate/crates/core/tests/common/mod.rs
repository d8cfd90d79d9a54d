//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls into the estimator under test.

#![allow(dead_code)]

use discspace_core::econometrics::{RegressionDataset, RegressionRow, Subsample, DENSITY};
use discspace_core::{Observation, Panel, Period};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solves `A X = B` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Mat = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).copied().collect()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.abs() > 1e-300, "singular system");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    for c in 0..n + m {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn crossprod(x: &Mat) -> Mat {
    let k = x[0].len();
    let mut out = vec![vec![0.0; k]; k];
    for row in x {
        for i in 0..k {
            for j in 0..k {
                out[i][j] += row[i] * row[j];
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// Least squares with an explicit dummy for every unit and every non-base
/// period, solved through the normal equations.
pub struct DummyFit {
    /// Slopes then period dummies, in the estimator's column order.
    pub beta: Vec<f64>,
    /// CR1 covariance of the same block.
    pub vcov: Mat,
}

pub fn dummy_ols(ds: &RegressionDataset, base: usize, clusters: &[usize]) -> DummyFit {
    let slopes = if ds.with_interaction { 3 } else { 2 };
    let dummies: Vec<usize> = (0..ds.periods.len()).filter(|&p| p != base).collect();
    let nu = ds.units.len();
    let k = slopes + dummies.len() + nu;
    let x: Mat = ds
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![0.0; k];
            row[0] = r.x_density;
            row[1] = r.x_rca;
            if ds.with_interaction {
                row[2] = r.x_density * r.x_rca;
            }
            if let Some(p) = dummies.iter().position(|&p| p == r.period_id) {
                row[slopes + p] = 1.0;
            }
            row[slopes + dummies.len() + r.unit_id] = 1.0;
            row
        })
        .collect();
    let y: Vec<f64> = ds.rows.iter().map(|r| r.y).collect();
    let xtx = crossprod(&x);
    let xty: Mat = (0..k).map(|j| vec![x.iter().zip(&y).map(|(r, yi)| r[j] * yi).sum()]).collect();
    let beta: Vec<f64> = gauss_jordan(&xtx, &xty).into_iter().map(|r| r[0]).collect();
    let resid: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(r, yi)| yi - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let bread = gauss_jordan(&xtx, &identity(k));

    let groups: std::collections::BTreeSet<usize> = clusters.iter().copied().collect();
    let mut meat = vec![vec![0.0; k]; k];
    for g in &groups {
        let mut s = vec![0.0; k];
        for (i, row) in x.iter().enumerate() {
            if clusters[i] == *g {
                for j in 0..k {
                    s[j] += row[j] * resid[i];
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                meat[i][j] += s[i] * s[j];
            }
        }
    }
    let (n, g) = (x.len() as f64, groups.len() as f64);
    let scale = g / (g - 1.0) * (n - 1.0) / (n - k as f64);
    let v = matmul(&matmul(&bread, &meat), &bread);
    let keep = slopes + dummies.len();
    DummyFit {
        beta: beta[..keep].to_vec(),
        vcov: (0..keep).map(|i| (0..keep).map(|j| v[i][j] * scale).collect()).collect(),
    }
}

fn skeleton(n_countries: usize, n_units: usize, n_periods: usize, with_interaction: bool) -> RegressionDataset {
    let per_country = n_units.div_ceil(n_countries);
    RegressionDataset {
        rows: Vec::new(),
        subsample: Subsample::RcaLt1,
        with_interaction,
        density_name: DENSITY,
        units: (0..n_units).map(|u| (u % n_countries, u / n_countries)).collect(),
        periods: (0..n_periods as i32)
            .map(|p| Period {
                start: 2000 + 4 * p,
                end: 2004 + 4 * p,
            })
            .collect(),
        countries: (0..n_countries).map(|c| format!("C{c}")).collect(),
        disciplines: (0..per_country).map(|d| format!("D{d}")).collect(),
        n_dropped: 0,
    }
}

/// Unbalanced panel with arbitrary regressors and response; every unit keeps
/// at least two periods.
pub fn random_dataset(rng: &mut impl Rng, n_units: usize, n_periods: usize, with_interaction: bool) -> RegressionDataset {
    let mut ds = skeleton(rng.random_range(3..=6), n_units, n_periods, with_interaction);
    for u in 0..n_units {
        let keep_all = rng.random_bool(0.5);
        for p in 0..n_periods {
            if !keep_all && p >= 2 && rng.random_bool(0.25) {
                continue;
            }
            ds.rows.push(RegressionRow {
                y: rng.random_range(-1.0..1.0),
                x_density: rng.random_range(0.0..1.0),
                x_rca: rng.random_range(0.0..1.0),
                period_id: p,
                unit_id: u,
            });
        }
    }
    ds
}

/// `y = α₁ d + α₂ r + α₃ d r + μ_u + τ_p + e` where `e` is AR(1) within each
/// unit with unit-specific scale, so errors are correlated inside clusters.
pub fn dgp_dataset(rng: &mut impl Rng, n_units: usize, n_periods: usize, alpha: [f64; 3]) -> RegressionDataset {
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut ds = skeleton(10, n_units, n_periods, true);
    let tau: Vec<f64> = (0..n_periods).map(|_| std.sample(rng) * 0.3).collect();
    for u in 0..n_units {
        let mu = std.sample(rng);
        let scale = rng.random_range(0.05..0.3);
        let mut e = std.sample(rng) * scale;
        let d_level = rng.random_range(0.1..0.6);
        for (p, t) in tau.iter().enumerate() {
            let d = (d_level + 0.1 * std.sample(rng)).clamp(0.0, 1.0);
            let r = rng.random_range(0.0..1.0) + 0.3 * mu.tanh();
            if p > 0 {
                e = 0.6 * e + std.sample(rng) * scale;
            }
            ds.rows.push(RegressionRow {
                y: alpha[0] * d + alpha[1] * r + alpha[2] * d * r + mu + t + e,
                x_density: d,
                x_rca: r,
                period_id: p,
                unit_id: u,
            });
        }
    }
    ds
}

/// Random counts panel; about `zero_share` of cells are zero.
pub fn random_panel(rng: &mut impl Rng, n_countries: usize, n_disciplines: usize, years: std::ops::RangeInclusive<i32>, zero_share: f64) -> Panel {
    let mut obs = Vec::new();
    for year in years {
        for c in 0..n_countries {
            for d in 0..n_disciplines {
                let documents = if rng.random_bool(zero_share) { 0 } else { rng.random_range(1..5000) };
                obs.push(Observation {
                    country: format!("C{c:02}"),
                    discipline: format!("D{d:02}"),
                    year,
                    documents,
                    citations: documents * rng.random_range(0..20),
                });
            }
        }
    }
    Panel::from_observations(obs).unwrap()
}

/// Count-form proximity straight from a row-major flag matrix.
pub fn phi_oracle(flags: &[bool], nc: usize, nd: usize, i: usize, j: usize) -> f64 {
    let has = |c: usize, d: usize| flags[c * nd + d];
    let ci = (0..nc).filter(|&c| has(c, i)).count();
    let cj = (0..nc).filter(|&c| has(c, j)).count();
    let joint = (0..nc).filter(|&c| has(c, i) && has(c, j)).count();
    if ci == 0 || cj == 0 {
        return 0.0;
    }
    (joint as f64 / ci as f64).min(joint as f64 / cj as f64)
}
