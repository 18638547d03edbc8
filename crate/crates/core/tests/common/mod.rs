#![allow(dead_code)]

pub mod oracle;

use pif::persistence::PersistencePair;

/// Pairs sorted by (dim, birth, death) for multiset comparison.
pub fn sorted(mut pairs: Vec<PersistencePair>) -> Vec<(u8, f64, f64)> {
    pairs.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death)));
    pairs.into_iter().map(|p| (p.dim, p.birth, p.death)).collect()
}
