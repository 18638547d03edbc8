//! Comparing intensities: L1 distances, embeddings and clustering.

mod confusion;
mod kmeans;
mod mds;
mod spectral;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::IntensityGrid;
use crate::io;

pub use confusion::{best_permutation_purity, confusion_matrix};
pub use kmeans::{kmeans, kmeans_with, ClusterAssignment, KMeansOptions};
pub use mds::classical_mds;
pub use spectral::{laplacian_spectrum, similarity_from_distance, spectral_embed, SimilarityMatrix, SpectralOptions};

/// `∫ |a - b|` as a Riemann sum over the shared grid.
pub fn l1_distance(a: &IntensityGrid, b: &IntensityGrid) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::IncompatibleGrids("L1 distance needs identical grid specs".into()));
    }
    let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum * a.spec.cell_area())
}

/// Symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Checks symmetry, zero diagonal and nonnegativity.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!("expected {n}×{n} entries, found {}", entries.len())));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!("entry ({i}, {j}) = {v} is not a finite nonnegative distance")));
                }
                let w = entries[j * n + i];
                if (v - w).abs() > 1e-12 * v.abs().max(w.abs()).max(1.0) {
                    return Err(Error::InvalidInput(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self.entries.chunks(self.n.max(1)).map(|r| r.to_vec());
        io::write_string(path, &matrix_string(rows))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_square(path)?;
        let n = rows.len();
        DistanceMatrix::new(n, rows.into_iter().flatten().collect())
    }
}

fn matrix_string(rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| io::fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn read_square(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = io::MatrixFile::read(path)?;
    let n = file.rows.len();
    if file.rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: format!("expected a square matrix with {n} columns"),
        });
    }
    Ok(file.rows)
}

/// Pairwise L1 distances, each unordered pair evaluated once.
pub fn distance_matrix(grids: &[IntensityGrid]) -> Result<DistanceMatrix> {
    let n = grids.len();
    if n == 0 {
        return Err(Error::InvalidInput("distance matrix of zero grids".into()));
    }
    if let Some(k) = grids.iter().position(|g| g.spec != grids[0].spec) {
        return Err(Error::IncompatibleGrids(format!("grid {k} has a different spec than grid 0")));
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| l1_distance(&grids[i], &grids[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix { n, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    Mds,
    Spectral,
}

/// Low-dimensional coordinates, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Vec<Vec<f64>>,
    pub method: EmbeddingMethod,
    /// Eigenvalues of the retained axes, in axis order.
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    fn header(&self) -> Vec<String> {
        std::iter::once("id".to_string()).chain((1..=self.k()).map(|c| format!("c{c}"))).collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for (id, row) in self.coords.iter().enumerate() {
            out.push_str(&id.to_string());
            for v in row {
                out.push(',');
                out.push_str(&io::fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_string(path, &self.to_csv_string())
    }

    /// Reads an `id,c1,...,ck` file; eigenvalues are not stored and come back empty
    /// except for their count.
    pub fn read_csv(path: &Path, method: EmbeddingMethod) -> Result<Self> {
        let text = io::read_to_string(path)?;
        let k = text.lines().next().map_or(0, |h| h.split(',').count().saturating_sub(1));
        let header: Vec<String> = std::iter::once("id".to_string()).chain((1..=k).map(|c| format!("c{c}"))).collect();
        let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let rows = io::read_numeric_csv(path, &header_refs)?;
        Ok(Embedding {
            coords: rows.into_iter().map(|r| r[1..].to_vec()).collect(),
            method,
            eigenvalues: vec![f64::NAN; k],
        })
    }
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
pub(crate) fn fix_signs(columns: &mut [Vec<f64>]) {
    for col in columns.iter_mut() {
        let mut best = 0usize;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col.get(best).is_some_and(|v| *v < 0.0) {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        col.iter_mut().for_each(|v| *v += 0.0);
    }
}

pub(crate) fn columns_to_rows(columns: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::intensity::WeightSpec;
    use crate::rng::RngSeed;

    fn grid(values: Vec<f64>) -> IntensityGrid {
        let spec = GridSpec::new(0.0, 2.0, 0.0, 3.0, 5, 4).unwrap();
        IntensityGrid { spec, values, tau: 0.1, weights: WeightSpec::default() }
    }

    fn random_grid(seed: u64) -> IntensityGrid {
        let mut s = RngSeed(seed).stream();
        grid((0..20).map(|_| s.uniform()).collect())
    }

    #[test]
    fn l1_examples() {
        let a = random_grid(1);
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        // Node-centred cells: area = nx·ny·Δx·Δy.
        let area = 20.0 * 0.5 * 1.0;
        let d = l1_distance(&grid(vec![1.0; 20]), &grid(vec![3.5; 20])).unwrap();
        assert!((d - 2.5 * area).abs() < 1e-12);
        let b = random_grid(2);
        let mut brute = 0.0;
        for k in 0..20 {
            brute += (a.values[k] - b.values[k]).abs();
        }
        assert_eq!(l1_distance(&a, &b).unwrap(), brute * 0.5);
    }

    #[test]
    fn l1_spec_mismatch() {
        let a = random_grid(1);
        let mut b = random_grid(2);
        b.spec.x_hi = 3.0;
        assert!(matches!(l1_distance(&a, &b), Err(Error::IncompatibleGrids(_))));
    }

    #[test]
    fn l1_is_a_metric() {
        for s in 0..30 {
            let (a, b, c) = (random_grid(3 * s), random_grid(3 * s + 1), random_grid(3 * s + 2));
            let ab = l1_distance(&a, &b).unwrap();
            assert_eq!(ab, l1_distance(&b, &a).unwrap());
            let ac = l1_distance(&a, &c).unwrap();
            let cb = l1_distance(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-12);
        }
    }

    #[test]
    fn distance_matrix_matches_pairwise() {
        let g = vec![random_grid(4), random_grid(5), random_grid(6)];
        let d = distance_matrix(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), l1_distance(&g[i], &g[j]).unwrap());
            }
        }
        let same = distance_matrix(&[g[0].clone(), g[0].clone()]).unwrap();
        assert_eq!(same.entries(), &[0.0; 4]);
    }

    #[test]
    fn distance_matrix_validation() {
        assert!(DistanceMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let g = vec![random_grid(7), random_grid(8), random_grid(9)];
        let d = distance_matrix(&g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("delta.csv");
        d.write_csv(&p).unwrap();
        assert_eq!(DistanceMatrix::read_csv(&p).unwrap(), d);
    }
}
