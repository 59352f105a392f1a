use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::stats::{mean, sample_std};
use crate::error::AnalyticsError;

/// Tolerance below which a column counts as constant.
const CONSTANT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    /// Row-major z-scores over the retained columns.
    pub rows: Vec<Vec<f64>>,
    /// Indices (into the input columns) that were kept.
    pub retained: Vec<usize>,
    /// (mean, std) per retained column.
    pub params: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Z-scores each column with the n−1 standard deviation. Constant columns
/// are dropped and reported in `warnings`.
pub fn standardize(rows: &[Vec<f64>]) -> Result<Standardized, AnalyticsError> {
    let width = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || width == 0 {
        return Err(AnalyticsError::EmptyMatrix);
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(AnalyticsError::InvalidParameter("ragged matrix".into()));
    }
    let mut retained = Vec::new();
    let mut params = Vec::new();
    let mut warnings = Vec::new();
    for j in 0..width {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let m = mean(&col).expect("non-empty");
        match sample_std(&col) {
            Some(s) if s > CONSTANT_EPS => {
                retained.push(j);
                params.push((m, s));
            }
            _ => warnings.push(format!("column {j} is constant and was dropped")),
        }
    }
    let out = rows
        .iter()
        .map(|r| {
            retained
                .iter()
                .zip(&params)
                .map(|(&j, &(m, s))| (r[j] - m) / s)
                .collect()
        })
        .collect();
    Ok(Standardized {
        rows: out,
        retained,
        params,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// k unit vectors, each of the input width.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    /// Per-row scores on the k components.
    pub projections: Vec<Vec<f64>>,
}

/// Principal components of a column-centred matrix (the output of
/// [`standardize`]) via eigendecomposition of its covariance.
///
/// Each component is signed so that its largest-magnitude coordinate is
/// positive; callers must not rely on sign beyond that.
pub fn pca(rows: &[Vec<f64>], k: usize) -> Result<PcaResult, AnalyticsError> {
    let n = rows.len();
    if n < 2 {
        return Err(AnalyticsError::DegenerateInput(format!("PCA needs at least 2 rows, got {n}")));
    }
    let d = rows[0].len();
    if k == 0 || k > d {
        return Err(AnalyticsError::InvalidParameter(format!("k = {k} with {d} features")));
    }
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let means: Vec<f64> = (0..d).map(|j| x.column(j).mean()).collect();
    let centred = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - means[j]);
    let cov = (centred.transpose() * &centred) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();

    let mut components = Vec::with_capacity(k);
    let mut ratios = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        let lambda = eig.eigenvalues[idx].max(0.0);
        ratios.push(if total > 0.0 { lambda / total } else { 0.0 });
    }
    let projections = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| (0..d).map(|j| centred[(i, j)] * c[j]).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult {
        components,
        explained_variance_ratio: ratios,
        projections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cyclic Jacobi eigen-solver for small symmetric matrices.
    fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = a.len();
        let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
        let vals = (0..n).map(|i| a[i][i]).collect();
        let vecs = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
        (vals, vecs)
    }

    fn random_rows(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..d).map(|j| rng.random::<f64>() * (j + 1) as f64).collect()).collect()
    }

    #[test]
    fn standardize_small_column() {
        let s = standardize(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(s.retained, vec![0]);
        assert_eq!(s.rows, vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(s.warnings.len(), 1);
        assert!(matches!(standardize(&[]), Err(AnalyticsError::EmptyMatrix)));
    }

    #[test]
    fn standardize_is_idempotent() {
        let s = standardize(&random_rows(3, 30, 3)).unwrap();
        let again = standardize(&s.rows).unwrap();
        for (a, b) in s.rows.iter().flatten().zip(again.rows.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
        for j in 0..3 {
            let col: Vec<f64> = s.rows.iter().map(|r| r[j]).collect();
            assert!(mean(&col).unwrap().abs() < 1e-9);
            assert!((sample_std(&col).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_points_have_one_component() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let p = pca(&rows, 2).unwrap();
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert!(matches!(pca(&rows[..1], 1), Err(AnalyticsError::DegenerateInput(_))));
    }

    #[test]
    fn full_rank_invariants_and_reconstruction() {
        let rows = standardize(&random_rows(11, 40, 4)).unwrap().rows;
        let p = pca(&rows, 4).unwrap();
        assert!((p.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for w in p.explained_variance_ratio.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = (0..4).map(|j| p.components[a][j] * p.components[b][j]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9);
            }
        }
        for (row, proj) in rows.iter().zip(&p.projections) {
            for j in 0..4 {
                let back: f64 = (0..4).map(|c| proj[c] * p.components[c][j]).sum();
                assert!((back - row[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn components_match_jacobi_oracle() {
        let rows = random_rows(42, 50, 4);
        let n = rows.len() as f64;
        let means: Vec<f64> = (0..4).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let cov: Vec<Vec<f64>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|b| rows.iter().map(|r| (r[a] - means[a]) * (r[b] - means[b])).sum::<f64>() / (n - 1.0))
                    .collect()
            })
            .collect();
        let (vals, vecs) = jacobi_eigen(cov);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let p = pca(&rows, 4).unwrap();
        for (c, &idx) in order.iter().enumerate() {
            let dot: f64 = (0..4).map(|j| p.components[c][j] * vecs[idx][j]).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-6, "component {c}: |dot| = {}", dot.abs());
        }
    }
}
