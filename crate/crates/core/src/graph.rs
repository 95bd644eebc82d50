//! Hop-count metrics on connected undirected graphs.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_cnd, negative_type_necessary, CndVerdict, SymMatrix};

/// Connected simple graph. Node order is the order labels were given in and
/// fixes the row order of every distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new<S: AsRef<str>>(labels: &[S], edges: &[(S, S)]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.as_str(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node label {l:?}")));
            }
        }
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("edge references unknown node {l:?}")))
        };
        let mut adjacency = vec![Vec::new(); labels.len()];
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            let (i, j) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on {:?}", labels[i])));
            }
            if !edge_set.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {:?}-{:?}",
                    labels[i], labels[j]
                )));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let graph = Self {
            labels,
            adjacency,
            edges: edge_set,
        };
        let reached = graph.bfs(0).iter().filter(|d| d.is_some()).count();
        if reached != graph.labels.len() {
            return Err(Error::InvalidGraph(format!(
                "graph is disconnected: {} of {} nodes reachable from {:?}",
                reached,
                graph.labels.len(),
                graph.labels[0]
            )));
        }
        Ok(graph)
    }

    /// Builds a graph from an edge list; nodes are numbered in order of first
    /// appearance.
    pub fn from_edge_list<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        let mut labels: Vec<&str> = Vec::new();
        for (a, b) in edges {
            for l in [a.as_ref(), b.as_ref()] {
                if !labels.contains(&l) {
                    labels.push(l);
                }
            }
        }
        let edges: Vec<(&str, &str)> = edges
            .iter()
            .map(|(a, b)| (a.as_ref(), b.as_ref()))
            .collect();
        Self::new(&labels, &edges)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.labels.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Hop distances, one BFS per source node.
    pub fn hop_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.labels.len())
            .map(|s| {
                self.bfs(s)
                    .into_iter()
                    .map(|d| d.expect("connected"))
                    .collect()
            })
            .collect()
    }
}

pub fn bfs_distances(g: &Graph) -> SymMatrix {
    let hops = g.hop_matrix();
    SymMatrix::from_upper_fn(g.node_count(), |i, j| hops[i][j] as f64).expect("nonempty graph")
}

/// Complete bipartite `K_{2,3}` with parts `{A, E}` and `{B, C, D}`.
pub fn k23_graph() -> Graph {
    let edges = [
        ("A", "B"),
        ("A", "C"),
        ("A", "D"),
        ("E", "B"),
        ("E", "C"),
        ("E", "D"),
    ];
    Graph::new(&["A", "B", "C", "D", "E"], &edges).expect("fixture")
}

pub fn path_graph(labels: &[&str]) -> Result<Graph> {
    let edges: Vec<(&str, &str)> = labels.windows(2).map(|w| (w[0], w[1])).collect();
    Graph::new(labels, &edges)
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSpectralReport {
    pub labels: Vec<String>,
    pub distances: Vec<Vec<usize>>,
    pub eigenvalues: Vec<f64>,
    pub positive_eigenvalues: usize,
    /// Exactly one positive eigenvalue (necessary for negative type).
    pub necessary_condition: bool,
    pub cnd: CndVerdict,
}

pub fn graph_negative_type_report(g: &Graph, tol: f64) -> Result<GraphSpectralReport> {
    let m = bfs_distances(g);
    let necessary = negative_type_necessary(&m, tol)?;
    let cnd = is_cnd(&m, tol)?;
    Ok(GraphSpectralReport {
        labels: g.labels.clone(),
        distances: g.hop_matrix(),
        eigenvalues: necessary.eigenvalues,
        positive_eigenvalues: necessary.positive_count,
        necessary_condition: necessary.passes,
        cnd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    fn floyd_warshall(g: &Graph) -> Vec<Vec<usize>> {
        let n = g.node_count();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for (i, j) in g.edges() {
            d[i][j] = 1;
            d[j][i] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn test_graphs() -> Vec<Graph> {
        let cycle = Graph::new(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b"),
                ("b", "c"),
                ("c", "d"),
                ("d", "e"),
                ("e", "f"),
                ("f", "a"),
            ],
        )
        .unwrap();
        let star =
            Graph::from_edge_list(&[("hub", "x"), ("hub", "y"), ("hub", "z"), ("z", "w")]).unwrap();
        let petersenish = Graph::new(
            &["0", "1", "2", "3", "4", "5", "6", "7"],
            &[
                ("0", "1"),
                ("1", "2"),
                ("2", "3"),
                ("3", "0"),
                ("0", "4"),
                ("4", "5"),
                ("5", "6"),
                ("6", "7"),
                ("7", "4"),
                ("2", "6"),
            ],
        )
        .unwrap();
        vec![
            k23_graph(),
            path_graph(&["A", "B", "C"]).unwrap(),
            path_graph(&["A", "B"]).unwrap(),
            Graph::new(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("A", "C")]).unwrap(),
            cycle,
            star,
            petersenish,
        ]
    }

    #[test]
    fn bfs_matches_floyd_warshall() {
        for g in test_graphs() {
            assert_eq!(g.hop_matrix(), floyd_warshall(&g));
        }
    }

    #[test]
    fn hop_metric_axioms_hold_exactly() {
        for g in test_graphs() {
            let d = g.hop_matrix();
            let n = d.len();
            for i in 0..n {
                assert_eq!(d[i][i], 0);
                for j in 0..n {
                    assert_eq!(d[i][j], d[j][i]);
                    if i != j {
                        assert!(d[i][j] > 0);
                    }
                    for k in 0..n {
                        assert!(d[i][j] <= d[i][k] + d[k][j]);
                    }
                }
            }
        }
    }

    #[test]
    fn small_graph_examples() {
        let path = bfs_distances(&path_graph(&["A", "B", "C"]).unwrap());
        assert_eq!(
            path.to_rows(),
            vec![vec![0., 1., 2.], vec![1., 0., 1.], vec![2., 1., 0.]]
        );
        let tri = Graph::new(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("A", "C")]).unwrap();
        let m = bfs_distances(&tri);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn k23_reproduces_delta() {
        let g = k23_graph();
        assert_eq!(g.edge_count(), 6);
        let hops = g.hop_matrix();
        assert_eq!(
            hops,
            vec![
                vec![0, 1, 1, 1, 2],
                vec![1, 0, 2, 2, 1],
                vec![1, 2, 0, 2, 1],
                vec![1, 2, 2, 0, 1],
                vec![2, 1, 1, 1, 0],
            ]
        );
        assert_eq!(hops[0][4], 2);
        assert_eq!(hops[1][4], 1);
    }

    #[test]
    fn negative_type_reports() {
        let r = graph_negative_type_report(&k23_graph(), DEFAULT_TOL).unwrap();
        assert_eq!(r.positive_eigenvalues, 2);
        assert!(!r.necessary_condition);
        assert!(!r.cnd.cnd);
        let r = graph_negative_type_report(&path_graph(&["A", "B", "C"]).unwrap(), DEFAULT_TOL)
            .unwrap();
        assert!(r.necessary_condition);
        let r = graph_negative_type_report(&path_graph(&["A", "B"]).unwrap(), DEFAULT_TOL).unwrap();
        assert!(r.cnd.cnd);
    }

    #[test]
    fn single_edge_is_cnd_by_sampling() {
        use rand::{Rng, SeedableRng};
        let m = bfs_distances(&path_graph(&["A", "B"]).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let c0: f64 = rng.gen_range(-1.0..1.0);
            assert!(m.quadratic_form(&[c0, -c0]) <= 0.0);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(Graph::new(&["A", "B", "C"], &[("A", "B")]).is_err());
        assert!(Graph::new(&["A", "A"], &[("A", "A")]).is_err());
        assert!(Graph::new(&["A", "B"], &[("A", "A")]).is_err());
        assert!(Graph::new(&["A", "B"], &[("A", "B"), ("B", "A")]).is_err());
        assert!(Graph::new(&["A", "B"], &[("A", "Z")]).is_err());
        assert!(Graph::new::<&str>(&[], &[]).is_err());
        assert!(Graph::from_edge_list(&[("A", "B"), ("C", "D")]).is_err());
        let single = Graph::new(&["solo"], &[]).unwrap();
        assert_eq!(bfs_distances(&single).to_rows(), vec![vec![0.0]]);
    }
}
