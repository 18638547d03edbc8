//! Lower-star filtration of the vertex-based cubical complex on a grid.
//!
//! Vertices are grid nodes, edges join 4-neighbours, squares are unit cells.
//! Vertices are ranked by `(value, flat index)`; every edge and square enters
//! with its highest-ranked vertex. Edges are ordered by `(top rank, other
//! rank)` and squares by `(top rank, flat square index)`.

pub(crate) struct Filtration {
    /// Vertex values, flat index `i * cols + j`.
    pub values: Vec<f64>,
    /// Rank of each vertex in filtration order.
    pub vertex_rank: Vec<usize>,
    /// Edges in filtration order: `(u, v, top vertex)`.
    pub edges: Vec<(usize, usize, usize)>,
    /// Squares in filtration order: edge positions of the boundary (sorted) and top vertex.
    pub squares: Vec<([usize; 4], usize)>,
}

impl Filtration {
    pub fn build(rows: usize, cols: usize, values: Vec<f64>, with_squares: bool) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        let n = rows * cols;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut vertex_rank = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            vertex_rank[v] = r;
        }

        // Edge ids: horizontal (i, j)-(i, j+1) first, then vertical (i, j)-(i+1, j).
        let horizontal = rows * cols.saturating_sub(1);
        let mut raw_edges = Vec::with_capacity(horizontal + rows.saturating_sub(1) * cols);
        for i in 0..rows {
            for j in 0..cols.saturating_sub(1) {
                raw_edges.push((i * cols + j, i * cols + j + 1));
            }
        }
        for i in 0..rows.saturating_sub(1) {
            for j in 0..cols {
                raw_edges.push((i * cols + j, (i + 1) * cols + j));
            }
        }
        let key = |&(u, v): &(usize, usize)| {
            let (ru, rv) = (vertex_rank[u], vertex_rank[v]);
            (ru.max(rv), ru.min(rv))
        };
        let mut edge_order: Vec<usize> = (0..raw_edges.len()).collect();
        edge_order.sort_by_key(|&e| key(&raw_edges[e]));
        let mut edge_pos = vec![0; raw_edges.len()];
        for (p, &e) in edge_order.iter().enumerate() {
            edge_pos[e] = p;
        }
        let edges = edge_order
            .iter()
            .map(|&e| {
                let (u, v) = raw_edges[e];
                let top = if vertex_rank[u] > vertex_rank[v] { u } else { v };
                (u, v, top)
            })
            .collect();

        let mut squares = Vec::new();
        if with_squares && rows >= 2 && cols >= 2 {
            let mut raw = Vec::with_capacity((rows - 1) * (cols - 1));
            for i in 0..rows - 1 {
                for j in 0..cols - 1 {
                    let top_h = i * (cols - 1) + j;
                    let bottom_h = (i + 1) * (cols - 1) + j;
                    let left_v = horizontal + i * cols + j;
                    let right_v = horizontal + i * cols + j + 1;
                    let mut bd = [edge_pos[top_h], edge_pos[bottom_h], edge_pos[left_v], edge_pos[right_v]];
                    bd.sort_unstable();
                    let corners = [i * cols + j, i * cols + j + 1, (i + 1) * cols + j, (i + 1) * cols + j + 1];
                    let top = *corners.iter().max_by_key(|&&c| vertex_rank[c]).unwrap();
                    raw.push((bd, top));
                }
            }
            let mut idx: Vec<usize> = (0..raw.len()).collect();
            idx.sort_by_key(|&s| (vertex_rank[raw[s].1], s));
            squares = idx.into_iter().map(|s| raw[s]).collect();
        }

        Filtration { values, vertex_rank, edges, squares }
    }
}
