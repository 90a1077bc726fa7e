//! Static undirected social network.

use std::io::BufRead;
use std::path::Path;

use rand::Rng;

use crate::error::{check_unit, Error, Result};
use crate::rng::{stream_rng, Stream};

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Neighbor lists are sorted ascending, contain no duplicates and never
/// contain the node itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicate and reversed edges
    /// collapse into one; self-loops are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count == 0 {
            return Err(Error::Validation("graph must have at least one node".into()));
        }
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for (u, v) in edges {
            if u == v {
                return Err(Error::Validation(format!("self-loop on node {u}")));
            }
            for x in [u, v] {
                if x >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node: x,
                        node_count,
                    });
                }
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        Ok(Self::from_lists(lists))
    }

    fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    /// G(n, p): every unordered pair is an edge independently with
    /// probability `edge_prob`. Pure function of its arguments.
    pub fn erdos_renyi(node_count: usize, edge_prob: f64, seed: u64) -> Result<Self> {
        check_unit("edge_prob", edge_prob)?;
        if node_count == 0 {
            return Err(Error::Validation("graph must have at least one node".into()));
        }
        let mut rng = stream_rng(seed, Stream::Graph, 0, 0);
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for u in 0..node_count {
            for v in (u + 1)..node_count {
                if rng.gen_bool(edge_prob) {
                    lists[u].push(v);
                    lists[v].push(u);
                }
            }
        }
        Ok(Self::from_lists(lists))
    }

    /// Parses the whitespace-separated `u v` edge-list format. Blank lines and
    /// lines starting with `#` are skipped. The node count is the largest id
    /// plus one.
    pub fn from_edge_list<I, S>(lines: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for (idx, line) in lines.into_iter().enumerate() {
            let line_no = idx + 1;
            let line = line.as_ref().trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected two node ids, got {line:?}"),
                });
            };
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node id {s:?}"),
                })
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u == v {
                return Err(Error::Validation(format!(
                    "self-loop on node {u} at line {line_no}"
                )));
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
        }
        let Some(max_id) = max_id else {
            return Err(Error::Validation("edge list contains no edges".into()));
        };
        Self::from_edges(max_id + 1, edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let lines = std::io::BufReader::new(file)
            .lines()
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(path, e))?;
        Self::from_edge_list(lines)
    }

    pub fn complete(node_count: usize) -> Self {
        let lists = (0..node_count)
            .map(|u| (0..node_count).filter(|&v| v != u).collect())
            .collect();
        Self::from_lists(lists)
    }

    pub fn empty(node_count: usize) -> Self {
        Self::from_lists(vec![Vec::new(); node_count])
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn mean_degree(&self) -> f64 {
        self.targets.len() as f64 / self.node_count() as f64
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: usize) -> Result<&[usize]> {
        if u >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: u,
                node_count: self.node_count(),
            });
        }
        Ok(self.adj(u))
    }

    /// Unchecked variant of [`Graph::neighbors`] for hot loops.
    #[inline]
    pub(crate) fn adj(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |u| self.adj(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_invariants(g: &Graph) {
        for u in 0..g.node_count() {
            let nb = g.neighbors(u).unwrap();
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "unsorted or duplicate at {u}");
            assert!(!nb.contains(&u), "self-loop at {u}");
            for &v in nb {
                assert!(g.neighbors(v).unwrap().binary_search(&u).is_ok());
            }
        }
    }

    #[test]
    fn er_extremes() {
        let g = Graph::erdos_renyi(5, 0.0, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = Graph::erdos_renyi(5, 1.0, 1).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g, Graph::complete(5));
    }

    #[test]
    fn er_rejects_bad_probability() {
        assert!(matches!(
            Graph::erdos_renyi(5, 1.5, 1),
            Err(Error::ParamDomain { .. })
        ));
        assert!(Graph::erdos_renyi(5, -0.1, 1).is_err());
        assert!(Graph::erdos_renyi(0, 0.5, 1).is_err());
    }

    #[test]
    fn er_edge_count_binomial() {
        // Binomial(C(1000,2), 0.01): mean 4995, sd sqrt(4995 * 0.99).
        let g = Graph::erdos_renyi(1000, 0.01, 7).unwrap();
        let mean = 4995.0;
        let sd = (4995.0f64 * 0.99).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() <= 3.0 * sd, "{}", g.edge_count());
    }

    #[test]
    fn er_mean_degree_over_seeds() {
        // Mean of 100 independent mean degrees: each is 2|E|/n with
        // |E| ~ Bin(C(n,2), p), so var(mean degree) = 4 C(n,2) p (1-p) / n^2 / 100.
        let (n, p) = (200usize, 0.05);
        let pairs = (n * (n - 1) / 2) as f64;
        let sd = (4.0 * pairs * p * (1.0 - p)).sqrt() / n as f64 / 10.0;
        let avg: f64 = (0..100)
            .map(|s| Graph::erdos_renyi(n, p, s).unwrap().mean_degree())
            .sum::<f64>()
            / 100.0;
        let expected = p * (n - 1) as f64;
        assert!((avg - expected).abs() <= 3.0 * sd, "{avg} vs {expected}");
    }

    #[test]
    fn er_is_deterministic() {
        let a = Graph::erdos_renyi(300, 0.03, 11).unwrap();
        let b = Graph::erdos_renyi(300, 0.03, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Graph::erdos_renyi(300, 0.03, 12).unwrap());
    }

    #[test]
    fn er_invariants_exhaustive_small() {
        for n in [1usize, 2, 3, 10, 57, 200] {
            for (i, p) in [0.0, 0.1, 0.5, 1.0].into_iter().enumerate() {
                check_invariants(&Graph::erdos_renyi(n, p, i as u64).unwrap());
            }
        }
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::from_edge_list(["0 1", "1 2"]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        let g = Graph::from_edge_list(["0 1", "1 0", "# comment", "", "0\t1"]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert!(matches!(
            Graph::from_edge_list(["0 0"]),
            Err(Error::Validation(_))
        ));
        match Graph::from_edge_list(["0 1", "# x", "2 x"]) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Graph::from_edge_list(["0 1 2"]),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(Graph::from_edge_list(["-1 2"]).is_err());
    }

    #[test]
    fn neighbor_queries() {
        let k3 = Graph::complete(3);
        assert_eq!(k3.neighbors(0).unwrap(), &[1, 2]);
        assert!(Graph::empty(3).neighbors(0).unwrap().is_empty());
        let path = Graph::from_edge_list(["0 1", "2 1"]).unwrap();
        assert_eq!(path.neighbors(1).unwrap(), &[0, 2]);
        assert!(matches!(
            path.neighbors(3),
            Err(Error::NodeOutOfRange { node: 3, node_count: 3 })
        ));
    }

    proptest! {
        #[test]
        fn from_edges_normalizes(edges in proptest::collection::vec((0usize..30, 0usize..30), 0..120)) {
            let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
            let g = Graph::from_edges(30, edges.clone()).unwrap();
            check_invariants(&g);
            let mut want: Vec<_> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
            want.sort_unstable();
            want.dedup();
            prop_assert_eq!(g.edges().collect::<Vec<_>>(), want);
        }
    }
}
