//! Marked Poisson and binomial configurations and the graphs built on them.
//!
//! Each configuration owns three independent streams derived from its seed:
//! the point coordinates `X_1, X_2, ...`, the Poisson count, and the mark
//! streams. Points are drawn sequentially from one stream, so a binomial
//! configuration of size `n` is the prefix of any Poisson configuration with
//! the same seed and at least `n` points.
//!
//! Two constructions are provided. [`Construction::Ordered`] ranks points by
//! their first mark `t_{.,0}` (ties broken by sampling index) and joins the
//! points of ranks `i < j` iff `t_{i,j} <= phi(x_i, x_j)`, using the mark
//! stream of the lower-ranked point; this graph does not depend on the
//! storage order of the marked points. [`Construction::Sequential`] uses the
//! sampling index instead of the rank, which makes the graph on the first
//! `n` points an induced subgraph of the graph on the first `m >= n`.
//! Vertices of the resulting graph are numbered in construction order:
//! by rank for the ordered graph, by sampling index for the sequential one.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::connection::ConnectionFunction;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::marks::{MarkStream, MAX_POSITION};
use crate::rng::{derive_seed, random_state, RandomState};
use crate::statespace::{Point, ProbabilityMeasure, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Process {
    Poisson { intensity: f64 },
    Binomial { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    #[default]
    Ordered,
    Sequential,
}

/// Finite point set with aligned mark streams.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedConfiguration {
    points: Vec<Point>,
    marks: Vec<MarkStream>,
    process: Process,
    seed: u64,
}

impl MarkedConfiguration {
    /// Assembles a configuration from explicit parts.
    pub fn from_parts(points: Vec<Point>, marks: Vec<MarkStream>, seed: u64) -> Result<Self> {
        if points.len() != marks.len() {
            return Err(Error::domain("points and marks must be aligned"));
        }
        let count = points.len();
        Ok(MarkedConfiguration {
            points,
            marks,
            process: Process::Binomial { count },
            seed,
        })
    }

    /// Fixed points carrying the marks a configuration with `seed` would use.
    pub fn with_points(points: Vec<Point>, seed: u64) -> Self {
        let mark_seed = derive_seed(seed, "marks");
        let marks = (0..points.len() as u64)
            .map(|i| MarkStream::new(mark_seed, i))
            .collect();
        let count = points.len();
        MarkedConfiguration {
            points,
            marks,
            process: Process::Binomial { count },
            seed,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn marks(&self) -> &[MarkStream] {
        &self.marks
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The first `n` marked points.
    pub fn prefix(&self, n: usize) -> MarkedConfiguration {
        let n = n.min(self.len());
        MarkedConfiguration {
            points: self.points[..n].to_vec(),
            marks: self.marks[..n].to_vec(),
            process: Process::Binomial { count: n },
            seed: self.seed,
        }
    }

    /// Reorders storage by `perm` (a permutation of `0..len`).
    pub fn permuted(&self, perm: &[usize]) -> MarkedConfiguration {
        MarkedConfiguration {
            points: perm.iter().map(|&i| self.points[i]).collect(),
            marks: perm.iter().map(|&i| self.marks[i]).collect(),
            process: self.process,
            seed: self.seed,
        }
    }
}

fn draw_points(measure: &ProbabilityMeasure, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = random_state(derive_seed(seed, "points"));
    (0..n).map(|_| measure.sample_point(&mut rng)).collect()
}

fn attach_marks(points: Vec<Point>, process: Process, seed: u64) -> MarkedConfiguration {
    let mark_seed = derive_seed(seed, "marks");
    let marks = (0..points.len() as u64)
        .map(|i| MarkStream::new(mark_seed, i))
        .collect();
    MarkedConfiguration {
        points,
        marks,
        process,
        seed,
    }
}

/// Poisson number of points for a given intensity and seed.
pub fn poisson_point_count(s: f64, seed: u64) -> u64 {
    let mut rng = random_state(derive_seed(seed, "count"));
    sample_poisson(s, &mut rng)
}

/// Poisson process with mean measure `s * mu`.
pub fn sample_poisson_configuration(
    measure: &ProbabilityMeasure,
    s: f64,
    seed: u64,
) -> Result<MarkedConfiguration> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::config(format!("intensity {s} must be positive and finite")));
    }
    let n = poisson_point_count(s, seed);
    if n >= MAX_POSITION - 1 {
        return Err(Error::capability("configuration too large for mark streams"));
    }
    let points = draw_points(measure, n as usize, seed);
    Ok(attach_marks(points, Process::Poisson { intensity: s }, seed))
}

/// `n` i.i.d. points from `mu`.
pub fn sample_binomial_configuration(
    measure: &ProbabilityMeasure,
    n: usize,
    seed: u64,
) -> Result<MarkedConfiguration> {
    if n == 0 {
        return Err(Error::config("binomial count must be at least 1"));
    }
    if n as u64 >= MAX_POSITION - 1 {
        return Err(Error::capability("configuration too large for mark streams"));
    }
    let points = draw_points(measure, n, seed);
    Ok(attach_marks(points, Process::Binomial { count: n }, seed))
}

/// Exact Poisson variate: inversion for small means, Hormann's transformed
/// rejection (PTRS) above 30.
pub fn sample_poisson(mean: f64, rng: &mut RandomState) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean <= 30.0 {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        return k;
    }
    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mean = mean.ln();
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * ln_mean - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Graph `G_phi(xi)`: vertices ordered by first mark.
pub fn build_graph_ordered(config: &MarkedConfiguration, phi: &ConnectionFunction) -> Graph {
    build_graph(config, phi, Construction::Ordered)
}

/// Graph with edges decided in sampling-index order.
pub fn build_graph_sequential(config: &MarkedConfiguration, phi: &ConnectionFunction) -> Graph {
    build_graph(config, phi, Construction::Sequential)
}

pub fn build_graph(
    config: &MarkedConfiguration,
    phi: &ConnectionFunction,
    construction: Construction,
) -> Graph {
    EdgeRule::new(config, phi, construction).build()
}

/// Degrees of all vertices (in construction order), each truncated at
/// `cap + 1`. Agrees with the full graph on every degree `<= cap`.
pub fn capped_degrees(
    config: &MarkedConfiguration,
    phi: &ConnectionFunction,
    construction: Construction,
    cap: usize,
) -> Vec<usize> {
    EdgeRule::new(config, phi, construction).capped_degrees(cap)
}

/// How candidate pairs are generated.
enum Candidates {
    /// No pair can be joined.
    Empty,
    /// Uniform grid with cell side at least the support radius.
    Grid(CellGrid),
    /// Two blocks of the partition kernel.
    Blocks(Vec<Vec<u32>>, Vec<u8>),
    /// Enumerate marks below `sup phi` along each stream.
    MarkScan(f64),
}

struct EdgeRule<'a> {
    config: &'a MarkedConfiguration,
    phi: &'a ConnectionFunction,
    /// Storage index of the point at each rank.
    order: Vec<u32>,
    /// Rank of each storage index.
    rank: Vec<u32>,
    candidates: Candidates,
}

impl<'a> EdgeRule<'a> {
    fn new(
        config: &'a MarkedConfiguration,
        phi: &'a ConnectionFunction,
        construction: Construction,
    ) -> Self {
        let n = config.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        if construction == Construction::Ordered {
            let keys: Vec<f64> = config.marks.iter().map(MarkStream::first).collect();
            order.sort_by(|&a, &b| {
                keys[a as usize]
                    .total_cmp(&keys[b as usize])
                    .then(a.cmp(&b))
            });
        }
        let mut rank = vec![0u32; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i as usize] = r as u32;
        }
        let candidates = choose_candidates(config, phi);
        EdgeRule {
            config,
            phi,
            order,
            rank,
            candidates,
        }
    }

    /// Decides the pair of storage indices `u != v`.
    #[inline]
    fn is_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.rank[u] < self.rank[v] { (u, v) } else { (v, u) };
        let p = self.phi.evaluate(&self.config.points[a], &self.config.points[b]);
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.config.marks[a].value(self.rank[b] as u64 + 1) <= p
        }
    }

    fn build(&self) -> Graph {
        let n = self.config.len();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        match &self.candidates {
            Candidates::Empty => {}
            Candidates::Grid(grid) => grid.for_each_pair(|u, v| {
                if self.is_edge(u, v) {
                    edges.push((u, v));
                }
            }),
            Candidates::Blocks(blocks, _) => {
                for block in blocks {
                    for (i, &u) in block.iter().enumerate() {
                        for &v in &block[i + 1..] {
                            if self.is_edge(u as usize, v as usize) {
                                edges.push((u as usize, v as usize));
                            }
                        }
                    }
                }
            }
            Candidates::MarkScan(theta) => {
                for (r, &a) in self.order.iter().enumerate() {
                    let a = a as usize;
                    let xa = &self.config.points[a];
                    self.config.marks[a].for_each_below(r as u64 + 2, n as u64, *theta, |pos, t| {
                        let b = self.order[pos as usize - 1] as usize;
                        if t <= self.phi.evaluate(xa, &self.config.points[b]) {
                            edges.push((a, b));
                        }
                    });
                }
            }
        }
        let relabeled: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (self.rank[u] as usize, self.rank[v] as usize))
            .collect();
        let points = self
            .order
            .iter()
            .map(|&i| self.config.points[i as usize])
            .collect();
        Graph::from_edges(n, &relabeled)
            .and_then(|g| g.with_points(points))
            .expect("constructed edges are valid")
    }

    fn capped_degrees(&self, cap: usize) -> Vec<usize> {
        let n = self.config.len();
        let limit = cap + 1;
        let by_storage: Vec<usize> = match &self.candidates {
            Candidates::Empty => vec![0; n],
            Candidates::Grid(grid) => (0..n)
                .map(|u| {
                    let mut d = 0;
                    grid.for_each_neighbor_until(u, |v| {
                        if self.is_edge(u, v) {
                            d += 1;
                        }
                        d >= limit
                    });
                    d
                })
                .collect(),
            Candidates::Blocks(blocks, block_of) => (0..n)
                .map(|u| {
                    let mut d = 0;
                    for &v in &blocks[block_of[u] as usize] {
                        let v = v as usize;
                        if v != u && self.is_edge(u, v) {
                            d += 1;
                            if d >= limit {
                                break;
                            }
                        }
                    }
                    d
                })
                .collect(),
            Candidates::MarkScan(_) => {
                let g = self.build();
                return (0..n).map(|v| g.degree(v).min(limit)).collect();
            }
        };
        self.order.iter().map(|&i| by_storage[i as usize]).collect()
    }
}

fn choose_candidates(config: &MarkedConfiguration, phi: &ConnectionFunction) -> Candidates {
    if config.len() < 2 || phi.sup_phi() <= 0.0 {
        return Candidates::Empty;
    }
    if let Some(t) = phi.partition_threshold() {
        let mut blocks = vec![Vec::new(), Vec::new()];
        let mut block_of = Vec::with_capacity(config.len());
        for (i, p) in config.points.iter().enumerate() {
            let b = (p.coords()[0] > t) as u8;
            blocks[b as usize].push(i as u32);
            block_of.push(b);
        }
        return Candidates::Blocks(blocks, block_of);
    }
    if let Some(r) = phi.support_radius() {
        if r <= 0.0 {
            return Candidates::Empty;
        }
        if let Some(grid) = CellGrid::new(config.points(), r, phi) {
            return Candidates::Grid(grid);
        }
    }
    Candidates::MarkScan(phi.sup_phi())
}

/// Uniform cell grid over the bounding box (or the unit torus).
struct CellGrid {
    dim: usize,
    cells_per_dim: usize,
    wrap: bool,
    cell_of: Vec<usize>,
    cell_coords: Vec<[usize; MAX_DIM]>,
    offsets: Vec<usize>,
    members: Vec<u32>,
    offsets_nd: Vec<[i64; MAX_DIM]>,
}

impl CellGrid {
    fn new(points: &[Point], r: f64, phi: &ConnectionFunction) -> Option<CellGrid> {
        let n = points.len();
        let dim = phi.dimension();
        let torus = phi.is_torus();
        let (lo, extent): (Vec<f64>, f64) = if torus {
            (vec![0.0; dim], 1.0)
        } else {
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for p in points {
                for (i, &c) in p.coords().iter().enumerate() {
                    lo[i] = lo[i].min(c);
                    hi[i] = hi[i].max(c);
                }
            }
            let ext = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| h - l)
                .fold(0.0f64, f64::max);
            (lo, ext.max(f64::MIN_POSITIVE))
        };
        let by_radius = (extent / r).floor().max(1.0);
        let by_count = ((4 * n) as f64).powf(1.0 / dim as f64).floor().max(1.0);
        let mut m = by_radius.min(by_count).min((1u32 << 20) as f64) as usize;
        let mut wrap = torus;
        if torus && m < 3 {
            m = 1;
            wrap = false;
        }
        if m == 1 && n > 4096 {
            return None;
        }
        let total = m.checked_pow(dim as u32)?;
        let mut cell_coords = Vec::with_capacity(n);
        let mut cell_of = Vec::with_capacity(n);
        let mut counts = vec![0usize; total + 1];
        for p in points {
            let mut cc = [0usize; MAX_DIM];
            let mut idx = 0;
            for i in 0..dim {
                let x = p.coords()[i];
                let rel = if torus { x.rem_euclid(1.0) } else { x - lo[i] };
                let c = ((rel / extent * m as f64) as usize).min(m - 1);
                cc[i] = c;
                idx = idx * m + c;
            }
            cell_coords.push(cc);
            cell_of.push(idx);
            counts[idx + 1] += 1;
        }
        for c in 0..total {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut members = vec![0u32; n];
        for (i, &c) in cell_of.iter().enumerate() {
            members[fill[c]] = i as u32;
            fill[c] += 1;
        }
        let mut offsets_nd = Vec::new();
        let span = 3usize.pow(dim as u32);
        for code in 0..span {
            let mut off = [0i64; MAX_DIM];
            let mut c = code;
            for o in off.iter_mut().take(dim) {
                *o = (c % 3) as i64 - 1;
                c /= 3;
            }
            offsets_nd.push(off);
        }
        Some(CellGrid {
            dim,
            cells_per_dim: m,
            wrap,
            cell_of,
            cell_coords,
            offsets: counts,
            members,
            offsets_nd,
        })
    }

    fn members_of(&self, cell: usize) -> &[u32] {
        &self.members[self.offsets[cell]..self.offsets[cell + 1]]
    }

    /// Index of the cell at `base + off`, or `None` off the grid.
    #[inline]
    fn shifted(&self, base: &[usize; MAX_DIM], off: &[i64; MAX_DIM]) -> Option<usize> {
        let m = self.cells_per_dim as i64;
        let mut idx = 0usize;
        for i in 0..self.dim {
            let mut c = base[i] as i64 + off[i];
            if self.wrap {
                c = c.rem_euclid(m);
            } else if c < 0 || c >= m {
                return None;
            }
            idx = idx * self.cells_per_dim + c as usize;
        }
        Some(idx)
    }

    fn for_each_pair(&self, mut f: impl FnMut(usize, usize)) {
        for u in 0..self.cell_of.len() {
            self.for_each_neighbor_until(u, |v| {
                if u < v {
                    f(u, v);
                }
                false
            });
        }
    }

    /// Visits candidate neighbours of `u` until `f` returns true.
    fn for_each_neighbor_until(&self, u: usize, mut f: impl FnMut(usize) -> bool) {
        let base = &self.cell_coords[u];
        for off in &self.offsets_nd {
            let Some(cell) = self.shifted(base, off) else {
                continue;
            };
            for &v in self.members_of(cell) {
                let v = v as usize;
                if v != u && f(v) {
                    return;
                }
            }
        }
    }
}
