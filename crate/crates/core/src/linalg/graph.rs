//! Off-diagonal positivity graph of a payoff matrix and its strongly connected components.

use std::collections::VecDeque;

use super::PayoffMatrix;

/// Directed graph on `0..n` with an edge `(i, j)`, `i != j`, wherever `M[i, j] > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    succ: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        for (i, j) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for n = {n}");
            if i != j && !succ[i].contains(&j) {
                succ[i].push(j);
            }
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        Self { succ }
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.succ[i].binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn is_subgraph_of(&self, other: &DirectedGraph) -> bool {
        self.n() == other.n() && self.edges().all(|(i, j)| other.has_edge(i, j))
    }

    /// True when every predecessor of a member of `set` is itself in `set`.
    pub fn is_predecessor_inclusive(&self, set: &[bool]) -> bool {
        self.edges().all(|(u, v)| !set[v] || set[u])
    }

    /// Breadth-first forest grown from `roots` (visited in the given order).
    /// Returns `(parent, depth)`; roots have no parent and depth 0, unreachable vertices `None`.
    pub fn bfs_forest(&self, roots: &[usize]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let n = self.n();
        let mut parent = vec![None; n];
        let mut depth = vec![None; n];
        let mut queue = VecDeque::new();
        for &r in roots {
            if depth[r].is_none() {
                depth[r] = Some(0);
                queue.push_back(r);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = depth[u].unwrap();
            for &v in &self.succ[u] {
                if depth[v].is_none() {
                    depth[v] = Some(du + 1);
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        (parent, depth)
    }

    pub fn scc(&self) -> SccDecomposition {
        scc_decompose(self)
    }
}

pub fn build_graph(m: &PayoffMatrix) -> DirectedGraph {
    let n = m.n();
    DirectedGraph::from_edges(
        n,
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && m.get(i, j) > 0.0),
    )
}

/// Strongly connected components with their condensation DAG.
///
/// Components are listed in reverse topological order: if some edge goes from component
/// `a` to component `b`, then `b` comes before `a`. Vertices inside a component are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    /// Successor components of each component (deduplicated, sorted).
    pub condensation: Vec<Vec<usize>>,
    /// Components with no incoming condensation edge, ascending.
    pub sources: Vec<usize>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_source(&self, c: usize) -> bool {
        self.sources.binary_search(&c).is_ok()
    }
}

/// Tarjan's algorithm with an explicit stack.
pub fn scc_decompose(g: &DirectedGraph) -> SccDecomposition {
    const UNSEEN: usize = usize::MAX;
    let n = g.n();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut next_index = 0;
    // (vertex, position in successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }

    let mut component_of = vec![0; n];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let mut condensation = vec![Vec::new(); components.len()];
    let mut has_incoming = vec![false; components.len()];
    for (u, v) in g.edges() {
        let (cu, cv) = (component_of[u], component_of[v]);
        if cu != cv {
            condensation[cu].push(cv);
            has_incoming[cv] = true;
        }
    }
    for succ in &mut condensation {
        succ.sort_unstable();
        succ.dedup();
    }
    let sources = (0..components.len()).filter(|&c| !has_incoming[c]).collect();
    SccDecomposition {
        components,
        component_of,
        condensation,
        sources,
    }
}

/// A matrix is irreducible when its off-diagonal graph is strongly connected.
/// A single action is irreducible.
pub fn is_irreducible(m: &PayoffMatrix) -> bool {
    m.n() == 1 || scc_decompose(&build_graph(m)).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> PayoffMatrix {
        PayoffMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn graph_edges() {
        let g = build_graph(&m(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        let g = build_graph(&m(&[&[5.0, 0.0], &[0.0, 7.0]]));
        assert_eq!(g.edge_count(), 0);
        let g = build_graph(&m(&[&[1.0, 1.0], &[0.0, 1.0]]));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn scc_examples() {
        let two_cycle = scc_decompose(&DirectedGraph::from_edges(2, [(0, 1), (1, 0)]));
        assert_eq!(two_cycle.components, vec![vec![0, 1]]);
        assert_eq!(two_cycle.sources, vec![0]);

        let chain = scc_decompose(&DirectedGraph::from_edges(2, [(0, 1)]));
        assert_eq!(chain.len(), 2);
        let src = &chain.components[chain.sources[0]];
        assert_eq!(src, &vec![0]);
        assert_eq!(chain.sources.len(), 1);
        // sink listed first
        assert_eq!(chain.components[0], vec![1]);

        let empty = scc_decompose(&DirectedGraph::from_edges(3, []));
        assert_eq!(empty.len(), 3);
        assert_eq!(empty.sources.len(), 3);
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&m(&[&[0.0, 1.0], &[1.0, 0.0]])));
        assert!(!is_irreducible(&m(&[&[1.0, 1.0], &[0.0, 1.0]])));
        assert!(!is_irreducible(&m(&[&[1.0, 0.0], &[0.0, 2.0]])));
        assert!(is_irreducible(&m(&[&[0.0]])));
    }

    #[test]
    fn bfs_depths_on_chain() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 2)]);
        let (parent, depth) = g.bfs_forest(&[0]);
        assert_eq!(depth, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(parent, vec![None, Some(0), Some(1)]);
    }

    #[test]
    fn predecessor_inclusive() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 2)]);
        assert!(g.is_predecessor_inclusive(&[true, false, false]));
        assert!(!g.is_predecessor_inclusive(&[false, true, false]));
        assert!(g.is_predecessor_inclusive(&[true, true, true]));
    }
}
