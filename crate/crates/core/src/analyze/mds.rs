use nalgebra::{DMatrix, SymmetricEigen};

use super::{columns_to_rows, fix_signs, DistanceMatrix, Embedding, EmbeddingMethod};
use crate::error::{Error, Result};

/// Classical (Torgerson) multidimensional scaling.
///
/// `B = -½ J D⁽²⁾ J` with `J = I - 11ᵀ/n`; coordinates are the top-`k`
/// eigenvectors of `B` scaled by `√max(λ, 0)`.
pub fn classical_mds(d: &DistanceMatrix, k: usize) -> Result<Embedding> {
    let n = d.n();
    if k == 0 || k >= n {
        return Err(Error::param("k", format!("need 1 <= k < n = {n}, got {k}")));
    }
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let mut columns = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for &ax in order.iter().take(k) {
        let lambda = eig.eigenvalues[ax];
        let scale = lambda.max(0.0).sqrt();
        columns.push(eig.eigenvectors.column(ax).iter().map(|v| v * scale).collect::<Vec<f64>>());
        eigenvalues.push(lambda);
    }
    fix_signs(&mut columns);
    Ok(Embedding { coords: columns_to_rows(&columns, n), method: EmbeddingMethod::Mds, eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    fn dist(p: &[f64], q: &[f64]) -> f64 {
        p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    fn matrix_of(points: &[Vec<f64>]) -> DistanceMatrix {
        let n = points.len();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = dist(&points[i], &points[j]);
            }
        }
        DistanceMatrix::new(n, e).unwrap()
    }

    #[test]
    fn equilateral_triangle() {
        let d = DistanceMatrix::new(3, vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 1.0 };
                assert!((dist(&e.coords[i], &e.coords[j]) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn planar_points_reconstructed() {
        let mut s = RngSeed(21).stream();
        let pts: Vec<Vec<f64>> = (0..10).map(|_| vec![4.0 * s.uniform() - 2.0, 3.0 * s.uniform()]).collect();
        let d = matrix_of(&pts);
        let e = classical_mds(&d, 2).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let got = dist(&e.coords[i], &e.coords[j]);
                assert!((got - d.get(i, j)).abs() <= 1e-6 * d.get(i, j).max(1.0));
            }
        }
        assert!(e.eigenvalues[0] >= e.eigenvalues[1]);
    }

    #[test]
    fn zero_matrix_gives_zero_embedding() {
        let d = DistanceMatrix::new(4, vec![0.0; 16]).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        assert!(e.coords.iter().flatten().all(|v| *v == 0.0 && v.is_sign_positive()));
    }

    #[test]
    fn sign_convention_and_bad_k() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![5.0]];
        let e = classical_mds(&matrix_of(&pts), 1).unwrap();
        let col: Vec<f64> = e.coords.iter().map(|r| r[0]).collect();
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max.abs() >= min.abs());
        assert!(classical_mds(&matrix_of(&pts), 0).is_err());
        assert!(classical_mds(&matrix_of(&pts), 3).is_err());
    }
}
