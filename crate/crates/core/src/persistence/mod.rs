//! Persistence diagrams of level-set filtrations of grid functions.
//!
//! Sublevel persistence is computed directly on the lower-star filtration of
//! the cubical complex (4-connectivity, squares bounded by their four edges).
//! Superlevel persistence negates the field, runs the sublevel engine, and
//! maps each pair `(b', d')` back to `(b, d) = (-d', -b')`, so stored points
//! always satisfy `birth <= death`. The essential component and zero-lifetime
//! pairs are dropped.

mod filtration;
mod reduction;
mod union_find;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldKind, GridField};
use crate::grid::GridSpec;
use crate::io;
use filtration::Filtration;
use union_find::ComponentForest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Filter by `{f >= t}` with `t` descending.
    Superlevel,
    /// Filter by `{f <= t}` with `t` ascending.
    Sublevel,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "super" | "superlevel" => Ok(Direction::Superlevel),
            "sub" | "sublevel" => Ok(Direction::Sublevel),
            other => Err(Error::param("direction", format!("expected super or sub, got `{other}`"))),
        }
    }
}

/// One finite feature, stored with `birth <= death`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    /// `None` for diagrams loaded from file.
    pub direction: Option<Direction>,
    pub source: Option<(GridSpec, FieldKind)>,
}

impl PersistenceDiagram {
    pub fn from_pairs(pairs: Vec<PersistencePair>) -> Self {
        PersistenceDiagram { pairs, direction: None, source: None }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs of one homology dimension.
    pub fn of_dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Bounding box `(birth_lo, birth_hi, death_lo, death_hi)` of the pairs.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.pairs.first()?;
        Some(self.pairs.iter().fold(
            (first.birth, first.birth, first.death, first.death),
            |(bl, bh, dl, dh), p| (bl.min(p.birth), bh.max(p.birth), dl.min(p.death), dh.max(p.death)),
        ))
    }

    /// Pairs sorted by `(dim, birth, death)`, for multiset comparisons.
    pub fn canonical_pairs(&self) -> Vec<PersistencePair> {
        let mut v = self.pairs.clone();
        v.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        v
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{},{}\n", p.dim, io::fmt_f64(p.birth), io::fmt_f64(p.death)));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_string(path, &self.to_csv_string())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = io::read_numeric_csv_lines(path, &["dim", "birth", "death"])?;
        let err = |line: u64, reason: String| Error::Parse {
            path: path.display().to_string(),
            line,
            reason,
        };
        let mut pairs = Vec::with_capacity(rows.len());
        for (line, r) in rows {
            let dim = match r[0] {
                d if d == 0.0 => 0,
                d if d == 1.0 => 1,
                d => return Err(err(line, format!("dimension must be 0 or 1, found {d}"))),
            };
            if r[2] < r[1] {
                return Err(err(line, format!("death {} below birth {}", r[2], r[1])));
            }
            pairs.push(PersistencePair { dim, birth: r[1], death: r[2] });
        }
        Ok(PersistenceDiagram::from_pairs(pairs))
    }
}

/// Persistence diagram of a grid field's level-set filtration.
pub fn compute_persistence(field: &GridField, direction: Direction, max_dim: u8) -> Result<PersistenceDiagram> {
    let pairs = persistence_of_values(field.spec.nx, field.spec.ny, &field.values, direction, max_dim)?;
    Ok(PersistenceDiagram {
        pairs,
        direction: Some(direction),
        source: Some((field.spec, field.kind)),
    })
}

/// Persistence pairs of a raw `rows × cols` value grid (row-major). Unlike
/// [`compute_persistence`] this accepts degenerate grids such as a single row.
pub fn persistence_of_values(
    rows: usize,
    cols: usize,
    values: &[f64],
    direction: Direction,
    max_dim: u8,
) -> Result<Vec<PersistencePair>> {
    if max_dim > 1 {
        return Err(Error::param("max_dim", "must be 0 or 1"));
    }
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(Error::InvalidInput(format!(
            "expected {rows}×{cols} values, found {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("field contains non-finite values".into()));
    }
    let filtered: Vec<f64> = match direction {
        Direction::Sublevel => values.to_vec(),
        Direction::Superlevel => values.iter().map(|v| -v).collect(),
    };
    let filt = Filtration::build(rows, cols, filtered, max_dim >= 1);
    let mut raw = sublevel_pairs_dim0(&filt);
    if max_dim >= 1 {
        raw.extend(sublevel_pairs_dim1(&filt));
    }
    Ok(raw
        .into_iter()
        .filter(|p| p.death != p.birth)
        .map(|p| match direction {
            Direction::Sublevel => p,
            Direction::Superlevel => PersistencePair { dim: p.dim, birth: -p.death, death: -p.birth },
        })
        .collect())
}

/// Elder rule on the vertex/edge filtration: when an edge joins two
/// components, the one whose oldest vertex is younger dies at the edge.
fn sublevel_pairs_dim0(filt: &Filtration) -> Vec<PersistencePair> {
    let mut forest = ComponentForest::new(filt.values.len());
    let mut pairs = Vec::new();
    for &(u, v, top) in &filt.edges {
        let (ru, rv) = (forest.find(u), forest.find(v));
        if ru == rv {
            continue;
        }
        let (ou, ov) = (forest.oldest(ru), forest.oldest(rv));
        let (elder, younger) = if filt.vertex_rank[ou] < filt.vertex_rank[ov] { (ou, ov) } else { (ov, ou) };
        pairs.push(PersistencePair {
            dim: 0,
            birth: filt.values[younger],
            death: filt.values[top],
        });
        forest.merge(ru, rv, elder);
    }
    pairs
}

fn sublevel_pairs_dim1(filt: &Filtration) -> Vec<PersistencePair> {
    let boundaries: Vec<[usize; 4]> = filt.squares.iter().map(|s| s.0).collect();
    reduction::reduce_boundary(filt.edges.len(), &boundaries)
        .into_iter()
        .map(|(e, s)| PersistencePair {
            dim: 1,
            birth: filt.values[filt.edges[e].2],
            death: filt.values[filt.squares[s].1],
        })
        .collect()
}
