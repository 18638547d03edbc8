/// Disjoint sets over vertices, tracking the oldest vertex of each component.
pub(crate) struct ComponentForest {
    parent: Vec<usize>,
    size: Vec<u32>,
    /// Oldest (lowest-ranked) vertex of the component rooted here.
    oldest: Vec<usize>,
}

impl ComponentForest {
    pub fn new(n: usize) -> Self {
        ComponentForest {
            parent: (0..n).collect(),
            size: vec![1; n],
            oldest: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub fn oldest(&self, root: usize) -> usize {
        self.oldest[root]
    }

    /// Merges two distinct roots; the merged component keeps `elder` as its
    /// oldest vertex.
    pub fn merge(&mut self, a: usize, b: usize, elder: usize) {
        let (big, small) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.oldest[big] = elder;
    }
}
