use crate::error::{Error, Result};

/// Counts `(true class, cluster)` co-occurrences; `n_classes × n_clusters`.
pub fn confusion_matrix(
    true_labels: &[usize],
    clusters: &[usize],
    n_classes: usize,
    n_clusters: usize,
) -> Result<Vec<Vec<usize>>> {
    if true_labels.len() != clusters.len() {
        return Err(Error::InvalidInput(format!(
            "{} true labels but {} cluster labels",
            true_labels.len(),
            clusters.len()
        )));
    }
    let mut table = vec![vec![0usize; n_clusters]; n_classes];
    for (&t, &c) in true_labels.iter().zip(clusters) {
        if t >= n_classes || c >= n_clusters {
            return Err(Error::InvalidInput(format!("label pair ({t}, {c}) out of range")));
        }
        table[t][c] += 1;
    }
    Ok(table)
}

/// Largest fraction of items on the diagonal over all one-to-one matchings
/// of classes to clusters. Exhaustive; intended for small tables (≤ 8).
pub fn best_permutation_purity(table: &[Vec<usize>]) -> Result<f64> {
    let rows = table.len();
    let cols = table.first().map_or(0, |r| r.len());
    let k = rows.max(cols);
    if k > 8 {
        return Err(Error::param("k", "purity search supports at most 8 classes"));
    }
    let total: usize = table.iter().flatten().sum();
    if total == 0 {
        return Err(Error::InvalidInput("empty confusion table".into()));
    }
    let cell = |i: usize, j: usize| table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        best = best.max((0..k).map(|i| cell(i, p[i])).sum());
    });
    Ok(best as f64 / total as f64)
}

fn permute(p: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_assignment_is_permuted_diagonal() {
        let t = [0, 0, 1, 1, 2];
        let c = [2, 2, 0, 0, 1];
        let m = confusion_matrix(&t, &c, 3, 3).unwrap();
        assert_eq!(m, vec![vec![0, 0, 2], vec![2, 0, 0], vec![0, 1, 0]]);
        assert_eq!(best_permutation_purity(&m).unwrap(), 1.0);
    }

    #[test]
    fn empty_class_row() {
        let m = confusion_matrix(&[0, 2], &[1, 1], 3, 2).unwrap();
        assert_eq!(m[1], vec![0, 0]);
    }

    #[test]
    fn hand_counted_table() {
        let t = [0, 1, 2, 0, 1, 2, 0, 0, 2, 1];
        let c = [1, 1, 0, 1, 2, 0, 0, 1, 2, 1];
        let m = confusion_matrix(&t, &c, 3, 3).unwrap();
        // class 0 at 0,3,6,7 -> clusters 1,1,0,1; class 1 at 1,4,9 -> 1,2,1; class 2 at 2,5,8 -> 0,0,2
        assert_eq!(m, vec![vec![1, 3, 0], vec![0, 2, 1], vec![2, 0, 1]]);
        let purity = best_permutation_purity(&m).unwrap();
        // best matching: 0->1 (3), 1->2 (1), 2->0 (2) = 6
        assert_eq!(purity, 0.6);
    }

    #[test]
    fn relabeling_permutes_columns() {
        let t = [0, 1, 2, 0, 1, 2, 0, 0, 2, 1];
        let c = [1, 1, 0, 1, 2, 0, 0, 1, 2, 1];
        let relabel = [2, 0, 1];
        let c2: Vec<usize> = c.iter().map(|&x| relabel[x]).collect();
        let m = confusion_matrix(&t, &c, 3, 3).unwrap();
        let m2 = confusion_matrix(&t, &c2, 3, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], m2[i][relabel[j]]);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion_matrix(&[0, 1], &[0], 2, 2).is_err());
    }
}
