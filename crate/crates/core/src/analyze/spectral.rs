use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{columns_to_rows, fix_signs, matrix_string, read_square, DistanceMatrix, Embedding, EmbeddingMethod};
use crate::error::{Error, Result};
use crate::io;

/// Symmetric similarity matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!("expected {n}×{n} entries, found {}", entries.len())));
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!("similarity ({i}, {j}) = {v} outside [0, 1]")));
                }
                if v != entries[j * n + i] {
                    return Err(Error::InvalidInput(format!("similarity is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SimilarityMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_string(path, &matrix_string(self.entries.chunks(self.n.max(1)).map(|r| r.to_vec())))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_square(path)?;
        let n = rows.len();
        SimilarityMatrix::new(n, rows.into_iter().flatten().collect())
    }
}

/// `S_ij = exp(-Δ_ij / scale)`.
pub fn similarity_from_distance(d: &DistanceMatrix, scale: f64) -> Result<SimilarityMatrix> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param("scale", format!("must be positive, got {scale}")));
    }
    let entries = d.entries().iter().map(|&v| (-v / scale).exp()).collect();
    Ok(SimilarityMatrix { n: d.n(), entries })
}

/// Post-processing of the Laplacian eigenvectors. All off by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpectralOptions {
    /// Drop the eigenvector of the smallest eigenvalue.
    pub skip_trivial: bool,
    /// Multiply row `i` by `d_i^{-1/2}` (random-walk eigenvectors).
    pub degree_rescale: bool,
    /// Scale each row to unit Euclidean norm.
    pub row_normalize: bool,
}

/// Normalized-cut spectral embedding: eigenvectors of the `k` smallest
/// eigenvalues of `L_sym = I - D^{-1/2} S D^{-1/2}`.
pub fn spectral_embed(s: &SimilarityMatrix, k: usize, opts: SpectralOptions) -> Result<Embedding> {
    let n = s.n();
    let skip = usize::from(opts.skip_trivial);
    if k == 0 || k + skip > n {
        return Err(Error::param("k", format!("need 1 <= k <= {} for n = {n}", n - skip)));
    }
    let degree: Vec<f64> = (0..n).map(|i| (0..n).map(|j| s.get(i, j)).sum()).collect();
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::DegenerateGraph(format!("row {i} has zero degree")));
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt[i] * s.get(i, j) * inv_sqrt[j]
    });
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut columns = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for &ax in order.iter().skip(skip).take(k) {
        let mut col: Vec<f64> = eig.eigenvectors.column(ax).iter().copied().collect();
        if opts.degree_rescale {
            col.iter_mut().zip(&inv_sqrt).for_each(|(v, w)| *v *= w);
        }
        columns.push(col);
        eigenvalues.push(eig.eigenvalues[ax]);
    }
    fix_signs(&mut columns);
    let mut coords = columns_to_rows(&columns, n);
    if opts.row_normalize {
        for row in &mut coords {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }
    Ok(Embedding { coords, method: EmbeddingMethod::Spectral, eigenvalues })
}

/// All eigenvalues of `L_sym`, ascending. Used by diagnostics and tests.
pub fn laplacian_spectrum(s: &SimilarityMatrix) -> Result<Vec<f64>> {
    let e = spectral_embed(s, s.n(), SpectralOptions::default())?;
    Ok(e.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    #[test]
    fn similarity_examples() {
        let d = DistanceMatrix::new(2, vec![0.0, 200.0, 200.0, 0.0]).unwrap();
        let s = similarity_from_distance(&d, 200.0).unwrap();
        assert_eq!(s.get(0, 0), 1.0);
        assert!((s.get(0, 1) - (-1.0f64).exp()).abs() < 1e-12);
        assert!(similarity_from_distance(&d, 0.0).is_err());
    }

    #[test]
    fn complete_graph_spectrum() {
        let n = 6;
        let s = SimilarityMatrix::new(n, vec![1.0; n * n]).unwrap();
        let e = spectral_embed(&s, 1, SpectralOptions::default()).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-9);
        let c0 = e.coords[0][0];
        assert!(c0 > 0.0);
        assert!(e.coords.iter().all(|r| (r[0] - c0).abs() < 1e-9));
    }

    #[test]
    fn spectrum_in_unit_interval_pair() {
        let mut rng = RngSeed(5).stream();
        let n = 12;
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            e[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let v = 0.01 + 0.99 * rng.uniform();
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }
        let spec = laplacian_spectrum(&SimilarityMatrix::new(n, e).unwrap()).unwrap();
        assert!(spec[0].abs() < 1e-9);
        assert!(spec.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)));
    }

    #[test]
    fn three_blocks_separate() {
        let sizes = [4, 5, 3];
        let n: usize = sizes.iter().sum();
        let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
        let eps = 1e-6;
        let e: Vec<f64> = (0..n * n)
            .map(|k| if block[k / n] == block[k % n] { 1.0 } else { eps })
            .collect();
        let s = SimilarityMatrix::new(n, e).unwrap();
        let spec = laplacian_spectrum(&s).unwrap();
        assert!(spec[..3].iter().all(|l| l.abs() < 1e-4));
        assert!(spec[3] > 0.5);
        let emb = spectral_embed(&s, 3, SpectralOptions { degree_rescale: true, ..Default::default() }).unwrap();
        // Rows in the same block coincide; rows in different blocks are apart.
        for i in 0..n {
            for j in 0..n {
                let d: f64 = emb.coords[i].iter().zip(&emb.coords[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if block[i] == block[j] {
                    assert!(d < 1e-3, "{i} {j} {d}");
                } else {
                    assert!(d > 0.1, "{i} {j} {d}");
                }
            }
        }
    }

    #[test]
    fn zero_degree_row() {
        let s = SimilarityMatrix::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(spectral_embed(&s, 1, SpectralOptions::default()), Err(Error::DegenerateGraph(_))));
    }
}
