//! Secondary structure for cluster-tree inference: moral graph,
//! triangulation, join tree, and table placement.
//!
//! Every step is deterministic. Triangulation is greedy min-fill with ties
//! broken by variable declaration order; the join tree is a maximum-weight
//! spanning tree over the clique graph (weight = separator size, ties toward
//! smaller clique indices); tables and likelihood vectors go to the
//! lowest-indexed cluster that can hold them.

use crate::network::BeliefNetwork;
use std::collections::BTreeSet;

/// Undirected graph over the network variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoralGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl MoralGraph {
    pub fn with_vertices(n: usize) -> MoralGraph {
        MoralGraph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Edges as (u, v) pairs with u < v, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs.range(u + 1..) {
                out.push((u, v));
            }
        }
        out
    }
}

/// Undirected skeleton plus an edge between every pair of co-parents.
pub fn moralize(bn: &BeliefNetwork) -> MoralGraph {
    let mut g = MoralGraph::with_vertices(bn.variable_count());
    for cpt in bn.cpts() {
        for &p in &cpt.parents {
            g.add_edge(p, cpt.child);
        }
        for (i, &p) in cpt.parents.iter().enumerate() {
            for &q in &cpt.parents[i + 1..] {
                g.add_edge(p, q);
            }
        }
    }
    g
}

/// Result of min-fill triangulation.
#[derive(Debug, Clone)]
pub struct Triangulation {
    /// Elimination order (a perfect elimination order of `chordal`).
    pub order: Vec<usize>,
    /// Input graph plus fill-in edges.
    pub chordal: MoralGraph,
    /// Maximal cliques, in order of discovery during elimination.
    pub cliques: Vec<BTreeSet<usize>>,
}

pub fn triangulate(g: &MoralGraph) -> Triangulation {
    let n = g.vertex_count();
    let mut work = g.clone();
    let mut chordal = g.clone();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut elim_cliques: Vec<BTreeSet<usize>> = Vec::new();

    for _ in 0..n {
        // fill count = live neighbor pairs not yet adjacent; lowest id wins ties
        let mut best: Option<(usize, usize)> = None;
        for &v in &alive {
            let nbrs: Vec<usize> = work.adj[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if !work.has_edge(a, b) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(bf, _)| fill < bf) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.unwrap();

        let mut clique: BTreeSet<usize> = work.adj[v].clone();
        clique.insert(v);
        elim_cliques.push(clique);

        let nbrs: Vec<usize> = work.adj[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !work.has_edge(a, b) {
                    work.add_edge(a, b);
                    chordal.add_edge(a, b);
                }
            }
        }
        for &u in &nbrs {
            work.adj[u].remove(&v);
        }
        work.adj[v].clear();
        alive.remove(&v);
        order.push(v);
    }

    // keep only maximal cliques, preserving discovery order
    let mut cliques: Vec<BTreeSet<usize>> = Vec::new();
    for c in &elim_cliques {
        if !elim_cliques.iter().any(|d| d != c && c.is_subset(d))
            && !cliques.contains(c)
        {
            cliques.push(c.clone());
        }
    }
    Triangulation { order, chordal, cliques }
}

/// A tree over clusters of variables with the running intersection property.
#[derive(Debug, Clone)]
pub struct JoinTree {
    pub clusters: Vec<BTreeSet<usize>>,
    /// (a, b, separator) with a < b.
    pub edges: Vec<(usize, usize, BTreeSet<usize>)>,
    neighbors: Vec<Vec<(usize, usize)>>, // cluster -> (neighbor cluster, edge index)
}

impl JoinTree {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Neighbors of a cluster with the connecting edge index, ascending.
    pub fn neighbors(&self, c: usize) -> &[(usize, usize)] {
        &self.neighbors[c]
    }

    /// Lowest-indexed cluster containing the variable.
    pub fn home_of(&self, var: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&var))
    }

    /// True iff for every variable the clusters containing it form a
    /// connected subtree. Checked directly by walking tree paths.
    pub fn satisfies_running_intersection(&self) -> bool {
        let vars: BTreeSet<usize> = self.clusters.iter().flatten().copied().collect();
        for &v in &vars {
            let holding: Vec<usize> =
                (0..self.clusters.len()).filter(|&c| self.clusters[c].contains(&v)).collect();
            for &a in &holding {
                for &b in &holding {
                    if a < b {
                        for step in self.path(a, b) {
                            if !self.clusters[step].contains(&v) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Clusters along the unique tree path from `a` to `b`, inclusive.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.clusters.len()];
        let mut stack = vec![a];
        let mut seen = vec![false; self.clusters.len()];
        seen[a] = true;
        while let Some(c) = stack.pop() {
            if c == b {
                break;
            }
            for &(nb, _) in &self.neighbors[c] {
                if !seen[nb] {
                    seen[nb] = true;
                    prev[nb] = c;
                    stack.push(nb);
                }
            }
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Connects the cliques into a join tree. Kruskal on separator size, largest
/// first; zero-size separators are allowed so disconnected networks still
/// yield a single tree.
pub fn build_join_tree(cliques: &[BTreeSet<usize>]) -> JoinTree {
    let k = cliques.len();
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new(); // (weight, a, b)
    for a in 0..k {
        for b in a + 1..k {
            candidates.push((cliques[a].intersection(&cliques[b]).count(), a, b));
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut edges = Vec::new();
    for (_, a, b) in candidates {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            let sep: BTreeSet<usize> = cliques[a].intersection(&cliques[b]).copied().collect();
            edges.push((a, b, sep));
            if edges.len() == k.saturating_sub(1) {
                break;
            }
        }
    }
    edges.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut neighbors = vec![Vec::new(); k];
    for (i, (a, b, _)) in edges.iter().enumerate() {
        neighbors[*a].push((*b, i));
        neighbors[*b].push((*a, i));
    }
    for n in &mut neighbors {
        n.sort_unstable();
    }
    JoinTree { clusters: cliques.to_vec(), edges, neighbors }
}

/// Where each CPT and each evidence likelihood vector lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    /// Per variable: the cluster holding its CPT (a family-covering cluster).
    pub cpt_cluster: Vec<usize>,
    /// Per declared evidence variable: (variable, cluster containing it).
    pub lambda_cluster: Vec<(usize, usize)>,
}

/// Assigns every CPT to the lowest-indexed cluster covering its family, and
/// every evidence variable's likelihood vector to the lowest-indexed cluster
/// containing it.
pub fn place_tables(
    tree: &JoinTree,
    bn: &BeliefNetwork,
    evidence_vars: &[usize],
) -> Placement {
    let mut cpt_cluster = Vec::with_capacity(bn.variable_count());
    for var in 0..bn.variable_count() {
        let mut family: BTreeSet<usize> = bn.cpt(var).parents.iter().copied().collect();
        family.insert(var);
        let cluster = (0..tree.clusters.len())
            .find(|&c| family.is_subset(&tree.clusters[c]))
            .expect("triangulation guarantees a family-covering cluster");
        cpt_cluster.push(cluster);
    }
    let lambda_cluster = evidence_vars
        .iter()
        .map(|&v| (v, tree.home_of(v).expect("every variable appears in some cluster")))
        .collect();
    Placement { cpt_cluster, lambda_cluster }
}

/// Moralize, triangulate and connect in one call.
pub fn join_tree_for(bn: &BeliefNetwork) -> JoinTree {
    build_join_tree(&triangulate(&moralize(bn)).cliques)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkBuilder;
    use crate::testnet::fork_abc;

    fn chain_abc() -> crate::network::BeliefNetwork {
        let mut b = NetworkBuilder::new("chain");
        b.variable("A", &["0", "1"]).unwrap();
        b.variable("B", &["0", "1"]).unwrap();
        b.variable("C", &["0", "1"]).unwrap();
        b.cpt("A", &[], vec![vec![0.5, 0.5]]).unwrap();
        b.cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        b.cpt("C", &["B"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        b.finish().unwrap()
    }

    fn collider_abc() -> crate::network::BeliefNetwork {
        let mut b = NetworkBuilder::new("collider");
        b.variable("A", &["0", "1"]).unwrap();
        b.variable("B", &["0", "1"]).unwrap();
        b.variable("C", &["0", "1"]).unwrap();
        b.cpt("A", &[], vec![vec![0.5, 0.5]]).unwrap();
        b.cpt("B", &[], vec![vec![0.5, 0.5]]).unwrap();
        let rows = vec![vec![0.5, 0.5]; 4];
        b.cpt("C", &["A", "B"], rows).unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn chain_moralizes_without_marriages() {
        let g = moralize(&chain_abc());
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn collider_marries_the_parents() {
        let g = moralize(&collider_abc());
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn fork_moral_graph_is_its_skeleton() {
        let g = moralize(&fork_abc());
        assert_eq!(g.edges(), vec![(0, 1), (0, 2)]);
    }

    /// Brute-force chordality: every simple cycle of length >= 4 has a chord.
    fn is_chordal(g: &MoralGraph) -> bool {
        let n = g.vertex_count();
        // enumerate simple cycles by DFS from each start vertex
        fn dfs(g: &MoralGraph, start: usize, path: &mut Vec<usize>, ok: &mut bool) {
            let last = *path.last().unwrap();
            for &next in g.neighbors(last) {
                if next == start && path.len() >= 4 {
                    // found a cycle; look for a chord
                    let chord = path.iter().enumerate().any(|(i, &a)| {
                        path.iter().skip(i + 2).any(|&b| {
                            !(i == 0 && b == *path.last().unwrap()) && g.has_edge(a, b)
                        })
                    });
                    if !chord {
                        *ok = false;
                    }
                } else if next > start && !path.contains(&next) {
                    path.push(next);
                    dfs(g, start, path, ok);
                    path.pop();
                }
                if !*ok {
                    return;
                }
            }
        }
        let mut ok = true;
        for start in 0..n {
            let mut path = vec![start];
            dfs(g, start, &mut path, &mut ok);
            if !ok {
                return false;
            }
        }
        true
    }

    #[test]
    fn triangle_needs_no_fill() {
        let mut g = MoralGraph::with_vertices(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(0, 2);
        let t = triangulate(&g);
        assert_eq!(t.chordal.edge_count(), 3);
        assert_eq!(t.cliques.len(), 1);
        assert_eq!(t.cliques[0].len(), 3);
    }

    #[test]
    fn four_cycle_gets_exactly_one_fill_edge() {
        let mut g = MoralGraph::with_vertices(4);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(0, 3);
        assert!(!is_chordal(&g));
        let t = triangulate(&g);
        assert_eq!(t.chordal.edge_count(), 5);
        assert!(is_chordal(&t.chordal));
        assert_eq!(t.cliques.len(), 2);
        assert!(t.cliques.iter().all(|c| c.len() == 3));
    }

    #[test]
    fn fork_cliques_are_the_two_pairs() {
        let t = triangulate(&moralize(&fork_abc()));
        let sets: Vec<Vec<usize>> =
            t.cliques.iter().map(|c| c.iter().copied().collect()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn two_cliques_share_one_separator() {
        let t = triangulate(&moralize(&fork_abc()));
        let tree = build_join_tree(&t.cliques);
        assert_eq!(tree.edges.len(), 1);
        let (a, b, sep) = &tree.edges[0];
        assert_eq!((*a, *b), (0, 1));
        assert_eq!(sep.iter().copied().collect::<Vec<_>>(), vec![0]);
        assert!(tree.satisfies_running_intersection());
    }

    #[test]
    fn single_clique_tree_has_no_edges() {
        let tree = build_join_tree(&[BTreeSet::from([0, 1, 2])]);
        assert_eq!(tree.cluster_count(), 1);
        assert!(tree.edges.is_empty());
        assert!(tree.satisfies_running_intersection());
    }

    #[test]
    fn fork_placement_matches_the_family_rule() {
        let bn = fork_abc();
        let tree = join_tree_for(&bn);
        // clusters: 0 = {A,B}, 1 = {A,C}
        let placement = place_tables(&tree, &bn, &[2]);
        assert_eq!(placement.cpt_cluster, vec![0, 0, 1]);
        assert_eq!(placement.lambda_cluster, vec![(2, 1)]);
    }

    #[test]
    fn single_variable_network_places_into_the_only_cluster() {
        let mut b = NetworkBuilder::new("one");
        b.variable("X", &["a", "b", "c"]).unwrap();
        b.cpt("X", &[], vec![vec![0.2, 0.3, 0.5]]).unwrap();
        let bn = b.finish().unwrap();
        let tree = join_tree_for(&bn);
        assert_eq!(tree.cluster_count(), 1);
        let placement = place_tables(&tree, &bn, &[0]);
        assert_eq!(placement.cpt_cluster, vec![0]);
        assert_eq!(placement.lambda_cluster, vec![(0, 0)]);
    }

    #[test]
    fn disconnected_network_still_yields_one_tree() {
        let mut b = NetworkBuilder::new("two_islands");
        b.variable("X", &["a", "b"]).unwrap();
        b.variable("Y", &["a", "b"]).unwrap();
        b.cpt("X", &[], vec![vec![0.5, 0.5]]).unwrap();
        b.cpt("Y", &[], vec![vec![0.1, 0.9]]).unwrap();
        let bn = b.finish().unwrap();
        let tree = join_tree_for(&bn);
        assert_eq!(tree.cluster_count(), 2);
        assert_eq!(tree.edges.len(), 1);
        assert!(tree.edges[0].2.is_empty());
        assert!(tree.satisfies_running_intersection());
    }

    #[test]
    fn moral_edge_count_is_skeleton_plus_new_marriages() {
        let bn = collider_abc();
        let g = moralize(&bn);
        let bn_edges = bn.edges().count();
        assert_eq!(g.edge_count(), bn_edges + 1); // A-B is the one marriage
    }
}
