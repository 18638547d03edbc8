//! Column reduction of the square-to-edge boundary matrix over GF(2).

/// Pairs `(edge position, square position)` from reducing the boundary columns
/// of `squares` (each a sorted list of edge positions) in order.
pub(crate) fn reduce_boundary(n_edges: usize, squares: &[[usize; 4]]) -> Vec<(usize, usize)> {
    let mut owner: Vec<Option<usize>> = vec![None; n_edges];
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(squares.len());
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();
    for (s, bd) in squares.iter().enumerate() {
        let mut col: Vec<usize> = bd.to_vec();
        while let Some(&pivot) = col.last() {
            match owner[pivot] {
                Some(other) => {
                    symmetric_difference(&col, &reduced[other], &mut scratch);
                    std::mem::swap(&mut col, &mut scratch);
                }
                None => break,
            }
        }
        if let Some(&pivot) = col.last() {
            owner[pivot] = Some(s);
            pairs.push((pivot, s));
        }
        reduced.push(col);
    }
    pairs
}

fn symmetric_difference(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_of_sorted_columns() {
        let mut out = Vec::new();
        symmetric_difference(&[1, 3, 5, 7], &[3, 4, 7, 9], &mut out);
        assert_eq!(out, vec![1, 4, 5, 9]);
    }

    #[test]
    fn two_squares_sharing_an_edge() {
        // Squares {0,1,2,3} and {2,4,5,6}: second reduces only if pivots clash.
        let pairs = reduce_boundary(7, &[[0, 1, 2, 3], [2, 4, 5, 6]]);
        assert_eq!(pairs, vec![(3, 0), (6, 1)]);
        let pairs = reduce_boundary(4, &[[0, 1, 2, 3], [0, 1, 2, 3]]);
        assert_eq!(pairs, vec![(3, 0)]);
    }
}
