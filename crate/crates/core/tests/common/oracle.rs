//! Brute-force persistent homology of grid level sets.
//!
//! Every threshold complex is built explicitly (vertices present, edges with
//! both ends present, squares with all four corners present) and persistent
//! Betti numbers `β^{i,j}` come from GF(2) ranks. Pair multiplicities follow
//! from inclusion–exclusion over consecutive thresholds. Distinct values only.

/// GF(2) rank of a set of bit vectors (XOR basis keyed by leading bit).
fn rank(vs: Vec<u128>) -> usize {
    let mut basis = [0u128; 128];
    let mut r = 0;
    for mut v in vs {
        while v != 0 {
            let top = 127 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                r += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    r
}

/// Basis of the kernel of the linear map sending unit vector `k` to `images[k]`.
fn kernel(images: &[u128]) -> Vec<u128> {
    // Row-reduce pairs (image, source) and keep sources whose image vanishes.
    let mut rows: Vec<(u128, u128)> = images.iter().enumerate().map(|(k, &im)| (im, 1u128 << k)).collect();
    let mut r = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        if let Some(p) = (r..rows.len()).find(|&k| rows[k].0 & mask != 0) {
            rows.swap(r, p);
            let pivot = rows[r];
            for (k, v) in rows.iter_mut().enumerate() {
                if k != r && v.0 & mask != 0 {
                    v.0 ^= pivot.0;
                    v.1 ^= pivot.1;
                }
            }
            r += 1;
        }
    }
    rows[r..].iter().map(|v| v.1).collect()
}

struct Complex {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    squares: Vec<[usize; 4]>,
    square_edges: Vec<[usize; 4]>,
}

fn complex(rows: usize, cols: usize) -> Complex {
    let id = |i: usize, j: usize| i * cols + j;
    let mut edges = Vec::new();
    let mut index = std::collections::HashMap::new();
    for i in 0..rows {
        for j in 0..cols {
            if j + 1 < cols {
                index.insert((id(i, j), id(i, j + 1)), edges.len());
                edges.push((id(i, j), id(i, j + 1)));
            }
            if i + 1 < rows {
                index.insert((id(i, j), id(i + 1, j)), edges.len());
                edges.push((id(i, j), id(i + 1, j)));
            }
        }
    }
    let mut squares = Vec::new();
    let mut square_edges = Vec::new();
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols.saturating_sub(1) {
            let (a, b, c, d) = (id(i, j), id(i, j + 1), id(i + 1, j), id(i + 1, j + 1));
            squares.push([a, b, c, d]);
            square_edges.push([index[&(a, b)], index[&(c, d)], index[&(a, c)], index[&(b, d)]]);
        }
    }
    Complex { n_vertices: rows * cols, edges, squares, square_edges }
}

/// `(dim, value_at_birth_step, value_at_death_step)` of every finite class
/// with positive lifetime, in the order the sweep meets thresholds.
pub fn sweep_pairs(rows: usize, cols: usize, values: &[f64], descending: bool) -> Vec<(u8, f64, f64)> {
    let c = complex(rows, cols);
    assert!(c.n_vertices <= 128 && c.edges.len() <= 128, "oracle grid too large");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        if descending { o.reverse() } else { o }.then(a.cmp(&b))
    });
    let mut step = vec![0; values.len()];
    for (s, &v) in order.iter().enumerate() {
        step[v] = s;
    }
    let n = values.len();
    let edge_step: Vec<usize> = c.edges.iter().map(|&(u, v)| step[u].max(step[v])).collect();
    let square_step: Vec<usize> = c.squares.iter().map(|q| q.iter().map(|&v| step[v]).max().unwrap()).collect();

    // Boundary images as bit vectors.
    let edge_bd: Vec<u128> = c.edges.iter().map(|&(u, v)| (1u128 << u) | (1u128 << v)).collect();
    let square_bd: Vec<u128> = c.square_edges.iter().map(|es| es.iter().fold(0u128, |acc, &e| acc | (1u128 << e))).collect();

    // Cycle spaces Z_p(K_i) and boundary generators B_p(K_j) for each step.
    let z0: Vec<Vec<u128>> = (0..n).map(|i| (0..n).filter(|&v| step[v] <= i).map(|v| 1u128 << v).collect()).collect();
    let b0: Vec<Vec<u128>> = (0..n).map(|j| (0..c.edges.len()).filter(|&e| edge_step[e] <= j).map(|e| edge_bd[e]).collect()).collect();
    let z1: Vec<Vec<u128>> = (0..n)
        .map(|i| {
            let present: Vec<usize> = (0..c.edges.len()).filter(|&e| edge_step[e] <= i).collect();
            let images: Vec<u128> = present.iter().map(|&e| edge_bd[e]).collect();
            kernel(&images)
                .into_iter()
                .map(|k| present.iter().enumerate().filter(|(b, _)| k >> b & 1 == 1).fold(0u128, |acc, (_, &e)| acc | (1u128 << e)))
                .collect()
        })
        .collect();
    let b1: Vec<Vec<u128>> = (0..n)
        .map(|j| (0..c.squares.len()).filter(|&q| square_step[q] <= j).map(|q| square_bd[q]).collect())
        .collect();

    let mut out = Vec::new();
    for (dim, z, b) in [(0u8, &z0, &b0), (1u8, &z1, &b1)] {
        let b_rank: Vec<usize> = b.iter().map(|g| rank(g.clone())).collect();
        // beta[i][j] for i <= j.
        let mut beta = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i..n {
                let mut all = z[i].clone();
                all.extend_from_slice(&b[j]);
                beta[i][j] = (rank(all) - b_rank[j]) as i64;
            }
        }
        let bt = |i: isize, j: usize| -> i64 { if i < 0 { 0 } else { beta[i as usize][j] } };
        for i in 0..n {
            for j in (i + 1)..n {
                let ii = i as isize;
                let mu = bt(ii, j - 1) - bt(ii, j) - bt(ii - 1, j - 1) + bt(ii - 1, j);
                assert!(mu >= 0, "negative multiplicity");
                for _ in 0..mu {
                    out.push((dim, values[order[i]], values[order[j]]));
                }
            }
        }
    }
    out
}

/// Pairs in the stored convention: sublevel `(birth, death)` as swept;
/// superlevel swapped so that `birth <= death`.
pub fn oracle_pairs(rows: usize, cols: usize, values: &[f64], superlevel: bool, max_dim: u8) -> Vec<(u8, f64, f64)> {
    let mut v: Vec<(u8, f64, f64)> = sweep_pairs(rows, cols, values, superlevel)
        .into_iter()
        .filter(|p| p.0 <= max_dim)
        .map(|(d, b, e)| if superlevel { (d, e, b) } else { (d, b, e) })
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    v
}

/// Betti numbers `(β0, β1)` of the level-set complex `{f <= t}` (or `>= t`).
pub fn level_set_betti(rows: usize, cols: usize, values: &[f64], t: f64, superlevel: bool) -> (i64, i64) {
    let c = complex(rows, cols);
    let inside = |v: usize| if superlevel { values[v] >= t } else { values[v] <= t };
    let verts: Vec<usize> = (0..c.n_vertices).filter(|&v| inside(v)).collect();
    let edges: Vec<usize> = (0..c.edges.len()).filter(|&e| inside(c.edges[e].0) && inside(c.edges[e].1)).collect();
    let squares: Vec<usize> = (0..c.squares.len()).filter(|&q| c.squares[q].iter().all(|&v| inside(v))).collect();
    let r1 = rank(edges.iter().map(|&e| (1u128 << c.edges[e].0) | (1u128 << c.edges[e].1)).collect());
    let r2 = rank(squares.iter().map(|&q| c.square_edges[q].iter().fold(0u128, |a, &e| a | (1u128 << e))).collect());
    (verts.len() as i64 - r1 as i64, edges.len() as i64 - r1 as i64 - r2 as i64)
}
