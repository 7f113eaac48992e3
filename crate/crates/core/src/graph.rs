//! Simple undirected graphs and the edge-list text format.
//!
//! The text format is a header line `v <count>` followed by one `e <i> <j>`
//! line per edge (`i < j`), with vertices numbered in construction order.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::statespace::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    points: Vec<Point>,
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices. Self-loops are rejected and
    /// duplicate edges are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::domain(format!("edge ({u}, {v}) outside {n} vertices")));
            }
            adjacency[u].push(v as u32);
            adjacency[v].push(u as u32);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Graph {
            points: Vec::new(),
            adjacency,
            edge_count: edge_count / 2,
        })
    }

    /// Attaches vertex states; `points.len()` must equal the vertex count.
    pub fn with_points(mut self, points: Vec<Point>) -> Result<Self> {
        if points.len() != self.vertex_count() {
            return Err(Error::domain("point count differs from vertex count"));
        }
        self.points = points;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Vertex states in construction order (empty for abstract graphs).
    pub fn vertex_points(&self) -> &[Point] {
        &self.points
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(i, j)` with `i < j`, lexicographically ordered.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Subgraph induced by vertices `0..n`.
    pub fn induced_prefix(&self, n: usize) -> Graph {
        let n = n.min(self.vertex_count());
        let edges: Vec<(usize, usize)> = self.edges().filter(|&(_, v)| v < n).collect();
        let mut g = Graph::from_edges(n, &edges).expect("prefix edges are valid");
        if !self.points.is_empty() {
            g.points = self.points[..n].to_vec();
        }
        g
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "v {}", self.vertex_count())?;
        for (u, v) in self.edges() {
            writeln!(w, "e {u} {v}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<edge list>", e))?;
            let loc = || format!("edge list line {}", lineno + 1);
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    location: loc(),
                    message: e.to_string(),
                })
            };
            match fields.as_slice() {
                [] => continue,
                ["v", c] if n.is_none() => n = Some(num(c)?),
                ["e", a, b] if n.is_some() => edges.push((num(a)?, num(b)?)),
                _ => {
                    return Err(Error::Parse {
                        location: loc(),
                        message: format!("unexpected line {line:?}"),
                    })
                }
            }
        }
        let n = n.ok_or_else(|| Error::Parse {
            location: "edge list".into(),
            message: "missing `v <count>` header".into(),
        })?;
        Graph::from_edges(n, &edges)
    }
}
