//! Disjoint-set forest with path halving and union by size.
//!
//! Nodes touched since the last reset are tracked so that clearing the
//! structure between Monte-Carlo trials costs time proportional to the
//! number of unions, not the number of nodes.

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    touched: Vec<u32>,
}

impl UnionFind {
    pub fn new(nodes: usize) -> Self {
        UnionFind {
            parent: (0..nodes as u32).collect(),
            size: vec![1; nodes],
            touched: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.touched.push(ra);
        self.touched.push(rb);
        true
    }

    pub fn connected(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    /// Restores every node to a singleton set.
    pub fn reset(&mut self) {
        for &t in &self.touched {
            self.parent[t as usize] = t;
            self.size[t as usize] = 1;
        }
        self.touched.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bfs_connected(n: usize, edges: &[(u32, u32)], a: u32, b: u32) -> bool {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([a]);
        seen[a as usize] = true;
        while let Some(u) = queue.pop_front() {
            if u == b {
                return true;
            }
            for &v in &adj[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    #[test]
    fn basic_merges() {
        let mut uf = UnionFind::new(5);
        assert!(!uf.connected(0, 4));
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert!(uf.union(1, 4));
        assert!(uf.connected(0, 3));
        assert!(!uf.connected(2, 3));
        uf.reset();
        for i in 0..5 {
            assert_eq!(uf.find(i), i);
        }
        assert_eq!(uf.len(), 5);
    }

    proptest! {
        #[test]
        fn matches_bfs(
            n in 2usize..60,
            raw in prop::collection::vec((0u32..60, 0u32..60), 0..120),
            queries in prop::collection::vec((0u32..60, 0u32..60), 1..20),
        ) {
            let edges: Vec<(u32, u32)> = raw.into_iter().map(|(a, b)| (a % n as u32, b % n as u32)).collect();
            let mut uf = UnionFind::new(n);
            // Dirty the structure first to exercise reset.
            uf.union(0, 1);
            uf.reset();
            for &(a, b) in &edges {
                uf.union(a, b);
            }
            for (a, b) in queries {
                let (a, b) = (a % n as u32, b % n as u32);
                prop_assert_eq!(uf.connected(a, b), bfs_connected(n, &edges, a, b));
            }
        }
    }
}
