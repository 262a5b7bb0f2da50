//! Finite connected graphs with unit edge lengths, the metric models everything
//! else in this crate runs on.
//!
//! Distances are exact integers from breadth-first search; Gromov products and
//! the four-point hyperbolicity defect are exact half-integers ([`Half`]). No
//! floating point enters any metric quantity.
//!
//! Determinism contract: every operation that makes a choice (geodesic
//! representative, witness quadruple, net centres) resolves ties by lowest
//! vertex id / lexicographic order, so repeated runs return identical results.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::Digester;

/// Exact half-integer. Stores twice the value, so `3/2` is `Half(3)`.
///
/// Gromov products on integer metrics live in (1/2)Z; keeping the doubled
/// value in an `i64` makes every comparison and sum exact.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Half(i64);

impl Half {
    pub const ZERO: Half = Half(0);

    pub fn from_twice(twice: i64) -> Self {
        Half(twice)
    }

    pub fn from_int(v: i64) -> Self {
        Half(2 * v)
    }

    /// Twice the value, always an integer.
    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `self * k + c` with integer `k`, `c`; used for bounds like `4*delta + 1`.
    pub fn scale_add(self, k: i64, c: i64) -> Half {
        Half(self.0 * k + 2 * c)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl From<Half> for num_rational::Ratio<i64> {
    fn from(h: Half) -> Self {
        num_rational::Ratio::new(h.twice(), 2)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl std::ops::Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

/// Finite connected graph with unit edge lengths and optional vertex labels.
///
/// Vertices are `0..vertex_count()`. The adjacency lists are sorted, the edge
/// set is deduplicated, self loops are rejected, and the graph must be
/// connected (every metric operation assumes all distances are finite).
#[derive(Clone, Debug)]
pub struct MetricGraph {
    adj: Vec<Vec<u32>>,
    labels: Option<Vec<String>>,
    digest: String,
}

impl MetricGraph {
    /// Builds a graph on `n` vertices from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySet);
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen = std::collections::BTreeSet::new();
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(Error::UnknownVertex(u, n));
            }
            if v as usize >= n {
                return Err(Error::UnknownVertex(v, n));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = MetricGraph { digest: digest_of(&adj), adj, labels: None };
        g.check_connected()?;
        Ok(g)
    }

    /// Attaches one label per vertex (canonical words for Cayley balls).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::Parse(format!(
                "expected {} labels, got {}",
                self.vertex_count(),
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Path graph `0 - 1 - ... - n-1`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// Cycle graph on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parse(format!("cycle needs >= 3 vertices, got {n}")));
        }
        let mut edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
        edges.push((n as u32 - 1, 0));
        Self::from_edges(n, &edges)
    }

    fn check_connected(&self) -> Result<()> {
        let dist = self.bfs_distances(0)?;
        if let Some(w) = dist.iter().position(|d| *d == UNREACHED) {
            let components = self.component_count();
            return Err(Error::DisconnectedGraph { components, witness: w as u32 });
        }
        Ok(())
    }

    fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([s as u32]);
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u as usize] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> Result<&[u32]> {
        self.adj
            .get(v as usize)
            .map(|l| l.as_slice())
            .ok_or(Error::UnknownVertex(v, self.vertex_count()))
    }

    /// Sorted edge list `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label_of(&self, v: u32) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(v as usize)).map(|s| s.as_str())
    }

    /// Structural digest over the vertex count and sorted edge set. Two graphs
    /// with identical metric structure share a digest; labels do not enter.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v, self.vertex_count()))
        }
    }

    /// All distances from `src`. The graph is connected, so every entry is finite.
    pub fn bfs_distances(&self, src: u32) -> Result<Vec<u32>> {
        self.check_vertex(src)?;
        let mut dist = vec![UNREACHED; self.vertex_count()];
        let mut queue = VecDeque::with_capacity(64);
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Distance from every vertex to the nearest member of `sources`.
    pub fn multi_source_distances(&self, sources: &[u32]) -> Result<Vec<u32>> {
        let mut dist = vec![UNREACHED; self.vertex_count()];
        let mut queue = VecDeque::with_capacity(sources.len());
        for &s in sources {
            self.check_vertex(s)?;
            if dist[s as usize] == UNREACHED {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        if queue.is_empty() {
            return Err(Error::EmptySet);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Multi-source BFS that also records, per vertex, which source claimed
    /// it: the one minimizing (distance, position in `sources`). Seeding the
    /// queue in slice order and labelling on first discovery yields exactly
    /// that lexicographic minimum, because frontier vertices stay grouped by
    /// source position at every distance.
    pub fn multi_source_nearest(&self, sources: &[u32]) -> Result<(Vec<u32>, Vec<u32>)> {
        let mut dist = vec![UNREACHED; self.vertex_count()];
        let mut owner = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::with_capacity(sources.len());
        for (i, &s) in sources.iter().enumerate() {
            self.check_vertex(s)?;
            if dist[s as usize] == UNREACHED {
                dist[s as usize] = 0;
                owner[s as usize] = i as u32;
                queue.push_back(s);
            }
        }
        if queue.is_empty() {
            return Err(Error::EmptySet);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            let ou = owner[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED {
                    dist[v as usize] = du + 1;
                    owner[v as usize] = ou;
                    queue.push_back(v);
                }
            }
        }
        Ok((dist, owner))
    }

    pub fn distance(&self, u: u32, v: u32) -> Result<u32> {
        self.check_vertex(v)?;
        Ok(self.bfs_distances(u)?[v as usize])
    }

    /// Canonical geodesic from `u` to `v`: walk back from `v`, always stepping
    /// to the lowest-id neighbour one BFS layer closer to `u`.
    pub fn geodesic(&self, u: u32, v: u32) -> Result<GeodesicSegment> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let dist = self.bfs_distances(u)?;
        let mut path = vec![v];
        let mut cur = v;
        while cur != u {
            let d = dist[cur as usize];
            // adjacency lists are sorted, so the first hit is the lowest id
            let prev = self.adj[cur as usize]
                .iter()
                .copied()
                .find(|&w| dist[w as usize] + 1 == d)
                .expect("connected graph: some neighbour is one layer closer");
            path.push(prev);
            cur = prev;
        }
        path.reverse();
        Ok(GeodesicSegment { vertices: path, graph_digest: self.digest.clone() })
    }

    /// Gromov product `(a, b)_c = (d(a,c) + d(b,c) - d(a,b)) / 2`, exact.
    pub fn gromov_product(&self, a: u32, b: u32, c: u32) -> Result<Half> {
        let from_c = self.bfs_distances(c)?;
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        let dab = self.distance(a, b)?;
        let twice =
            i64::from(from_c[a as usize]) + i64::from(from_c[b as usize]) - i64::from(dab);
        Ok(Half::from_twice(twice))
    }

    /// Exhaustive four-point hyperbolicity constant.
    ///
    /// For each unordered quadruple, sort the three pairing sums
    /// `d(x,y)+d(z,w)`, `d(x,z)+d(y,w)`, `d(x,w)+d(y,z)` as `L1 >= L2 >= L3`;
    /// the defect is `(L1 - L2) / 2` and delta is the maximum defect. Witness
    /// ties resolve to the lexicographically smallest quadruple.
    ///
    /// Cost is `O(n^2)` memory and `O(n^4)` time; refuses graphs above `cap`
    /// (`None` means the default cap of 2000 vertices). For larger graphs use
    /// [`MetricGraph::delta_four_point_sampled`].
    pub fn delta_four_point(&self, cap: Option<usize>) -> Result<HyperbolicityReport> {
        let cap = cap.unwrap_or(DEFAULT_SCAN_CAP);
        let n = self.vertex_count();
        if n > cap {
            return Err(Error::GraphTooLarge { vertices: n, cap });
        }
        let rows: Vec<Vec<u32>> =
            (0..n as u32).map(|v| self.bfs_distances(v)).collect::<Result<_>>()?;
        let mut best: i64 = 0;
        let mut witness = [0u32; 4];
        let mut scanned: u64 = 0;
        for x in 0..n {
            for y in (x + 1)..n {
                let dxy = i64::from(rows[x][y]);
                for z in (y + 1)..n {
                    let dxz = i64::from(rows[x][z]);
                    let dyz = i64::from(rows[y][z]);
                    for w in (z + 1)..n {
                        scanned += 1;
                        let s1 = dxy + i64::from(rows[z][w]);
                        let s2 = dxz + i64::from(rows[y][w]);
                        let s3 = i64::from(rows[x][w]) + dyz;
                        let hi = s1.max(s2).max(s3);
                        let lo = s1.min(s2).min(s3);
                        let mid = s1 + s2 + s3 - hi - lo;
                        let defect = hi - mid;
                        if defect > best {
                            best = defect;
                            witness = [x as u32, y as u32, z as u32, w as u32];
                        }
                    }
                }
            }
        }
        Ok(HyperbolicityReport {
            delta: Half::from_twice(best),
            witness,
            quadruples_scanned: scanned,
            exact: true,
        })
    }

    /// Sampled four-point scan for graphs beyond the exhaustive cap: runs BFS
    /// from `sources` seeded vertices and scans quadruples inside that set.
    /// The result is an exact lower bound for delta, flagged `exact: false`.
    pub fn delta_four_point_sampled(&self, sources: usize, seed: u64) -> Result<HyperbolicityReport> {
        let n = self.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<u32> = if sources >= n {
            (0..n as u32).collect()
        } else {
            let mut set = std::collections::BTreeSet::new();
            while set.len() < sources {
                set.insert(rng.gen_range(0..n as u32));
            }
            set.into_iter().collect()
        };
        picked.sort_unstable();
        let rows: Vec<Vec<u32>> =
            picked.iter().map(|&v| self.bfs_distances(v)).collect::<Result<_>>()?;
        let k = picked.len();
        let mut best: i64 = 0;
        let mut witness = [picked.first().copied().unwrap_or(0); 4];
        let mut scanned = 0u64;
        for a in 0..k {
            for b in (a + 1)..k {
                let dab = i64::from(rows[a][picked[b] as usize]);
                for c in (b + 1)..k {
                    let dac = i64::from(rows[a][picked[c] as usize]);
                    let dbc = i64::from(rows[b][picked[c] as usize]);
                    for d in (c + 1)..k {
                        scanned += 1;
                        let s1 = dab + i64::from(rows[c][picked[d] as usize]);
                        let s2 = dac + i64::from(rows[b][picked[d] as usize]);
                        let s3 = i64::from(rows[a][picked[d] as usize]) + dbc;
                        let hi = s1.max(s2).max(s3);
                        let lo = s1.min(s2).min(s3);
                        let defect = hi - (s1 + s2 + s3 - hi - lo);
                        if defect > best {
                            best = defect;
                            witness = [picked[a], picked[b], picked[c], picked[d]];
                        }
                    }
                }
            }
        }
        Ok(HyperbolicityReport {
            delta: Half::from_twice(best),
            witness,
            quadruples_scanned: scanned,
            exact: false,
        })
    }

    /// Metric ball: the subgraph induced on `{ v : d(center, v) <= radius }`,
    /// renumbered by `(distance, original id)` so the centre is vertex 0.
    pub fn ball(&self, center: u32, radius: u32) -> Result<BallSubgraph> {
        let dist = self.bfs_distances(center)?;
        let mut kept: Vec<u32> =
            (0..self.vertex_count() as u32).filter(|&v| dist[v as usize] <= radius).collect();
        kept.sort_by_key(|&v| (dist[v as usize], v));
        let mut back = vec![UNREACHED; self.vertex_count()];
        for (new, &old) in kept.iter().enumerate() {
            back[old as usize] = new as u32;
        }
        let mut edges = Vec::new();
        for &old in &kept {
            for &nb in &self.adj[old as usize] {
                if old < nb && back[nb as usize] != UNREACHED {
                    edges.push((back[old as usize], back[nb as usize]));
                }
            }
        }
        let mut graph = MetricGraph::from_edges(kept.len(), &edges)?;
        if let Some(all) = &self.labels {
            graph = graph.with_labels(kept.iter().map(|&v| all[v as usize].clone()).collect())?;
        }
        Ok(BallSubgraph { graph, original_ids: kept })
    }

    /// Separated net: greedily (ascending id) selects centres pairwise at
    /// distance >= 2, joins selected pairs at distance <= 4, and assigns every
    /// vertex to its smallest-id centre within distance 1.
    pub fn net_approximation(&self) -> Result<NetApproximation> {
        let n = self.vertex_count();
        let mut blocked = vec![false; n];
        let mut centers = Vec::new();
        for v in 0..n {
            if !blocked[v] {
                centers.push(v as u32);
                blocked[v] = true;
                for &nb in &self.adj[v] {
                    blocked[nb as usize] = true;
                }
            }
        }
        let mut center_index = vec![UNREACHED; n];
        for (i, &c) in centers.iter().enumerate() {
            center_index[c as usize] = i as u32;
        }
        // assignment: smallest-id centre within distance 1; centres are >= 2
        // apart, so a centre is always assigned to itself.
        let mut assignment = vec![UNREACHED; n];
        for v in 0..n {
            if center_index[v] != UNREACHED {
                assignment[v] = center_index[v];
                continue;
            }
            let c = self.adj[v]
                .iter()
                .copied()
                .find(|&nb| center_index[nb as usize] != UNREACHED)
                .expect("greedy maximality: an unselected vertex has a selected neighbour");
            assignment[v] = center_index[c as usize];
        }
        // net edges: selected pairs at distance <= 4, found by depth-4 BFS
        // from each centre.
        let mut edges = Vec::new();
        for (i, &c) in centers.iter().enumerate() {
            for &u in &self.bfs_ball_members(c, 4) {
                let j = center_index[u as usize];
                if j != UNREACHED && (j as usize) > i {
                    edges.push((i as u32, j));
                }
            }
        }
        let net = MetricGraph::from_edges(centers.len(), &edges)?;
        Ok(NetApproximation { net, centers, assignment })
    }

    fn bfs_ball_members(&self, src: u32, radius: u32) -> Vec<u32> {
        let mut dist = std::collections::BTreeMap::new();
        dist.insert(src, 0u32);
        let mut queue = VecDeque::from([src]);
        let mut out = vec![src];
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if du == radius {
                continue;
            }
            for &v in &self.adj[u as usize] {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    out.push(v);
                    queue.push_back(v);
                }
            }
        }
        out
    }

    /// Exact diameter by all-sources BFS; guarded by the same cap as the
    /// four-point scan since it is quadratic-plus work.
    pub fn diameter(&self, cap: Option<usize>) -> Result<u32> {
        let cap = cap.unwrap_or(DEFAULT_SCAN_CAP);
        let n = self.vertex_count();
        if n > cap {
            return Err(Error::GraphTooLarge { vertices: n, cap });
        }
        let mut best = 0;
        for v in 0..n as u32 {
            let d = self.bfs_distances(v)?;
            best = best.max(d.into_iter().max().unwrap_or(0));
        }
        Ok(best)
    }

    /// Parses the plain edge-list format: one `u v` pair per line, blank lines
    /// skipped, `#` starts a comment. Vertex count is `max id + 1`.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<u32> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (a, b) = (it.next(), it.next());
            if it.next().is_some() {
                return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 1)));
            }
            match (a, b) {
                (Some(a), Some(b)) => {
                    let u: u32 = a
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad vertex `{a}`", lineno + 1)))?;
                    let v: u32 = b
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad vertex `{b}`", lineno + 1)))?;
                    max_id = Some(max_id.unwrap_or(0).max(u).max(v));
                    edges.push((u, v));
                }
                _ => return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 1))),
            }
        }
        match max_id {
            None => Err(Error::EmptySet),
            Some(m) => Self::from_edges(m as usize + 1, &edges),
        }
    }

    /// Renders the graph in the same edge-list format, sorted, with a vertex
    /// count header comment so single-vertex graphs round trip.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = format!("# vertices: {}\n", self.vertex_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

pub(crate) const UNREACHED: u32 = u32::MAX;
pub const DEFAULT_SCAN_CAP: usize = 2000;

fn digest_of(adj: &[Vec<u32>]) -> String {
    let mut d = Digester::new();
    d.update_u64(adj.len() as u64);
    for (u, list) in adj.iter().enumerate() {
        for &v in list {
            if (u as u32) < v {
                d.update_u64(u as u64);
                d.update_u64(u64::from(v));
            }
        }
    }
    d.finish()
}

/// A geodesic in a specific graph: consecutive vertices are adjacent and the
/// segment length equals the endpoint distance. Carries the graph digest so
/// using it against a different graph fails loudly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicSegment {
    vertices: Vec<u32>,
    graph_digest: String,
}

impl GeodesicSegment {
    /// Validates that `vertices` really is a geodesic in `g`.
    pub fn from_vertices(g: &MetricGraph, vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySet);
        }
        for &v in &vertices {
            if v as usize >= g.vertex_count() {
                return Err(Error::UnknownVertex(v, g.vertex_count()));
            }
        }
        for pair in vertices.windows(2) {
            if !g.adj[pair[0] as usize].contains(&pair[1]) {
                return Err(Error::NotAPath(pair[0], pair[1]));
            }
        }
        let (a, b) = (vertices[0], vertices[vertices.len() - 1]);
        let d = g.distance(a, b)?;
        if d as usize != vertices.len() - 1 {
            return Err(Error::PreconditionViolated(format!(
                "sequence of length {} is not geodesic: d({a},{b}) = {d}",
                vertices.len() - 1
            )));
        }
        Ok(GeodesicSegment { vertices, graph_digest: g.digest.clone() })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> u32 {
        self.vertices[0]
    }

    pub fn end(&self) -> u32 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn graph_digest(&self) -> &str {
        &self.graph_digest
    }

    /// Errors unless the segment was built on a graph with `g`'s digest.
    pub fn check_graph(&self, g: &MetricGraph) -> Result<()> {
        if self.graph_digest == g.digest {
            Ok(())
        } else {
            Err(Error::SegmentGraphMismatch {
                segment: self.graph_digest.clone(),
                graph: g.digest.clone(),
            })
        }
    }
}

/// Result of the four-point scan.
#[derive(Clone, Debug)]
pub struct HyperbolicityReport {
    pub delta: Half,
    /// Lexicographically smallest quadruple attaining delta.
    pub witness: [u32; 4],
    pub quadruples_scanned: u64,
    /// False for the sampled scan, which only lower-bounds delta.
    pub exact: bool,
}

/// Metric ball returned with the renumbering back to the host graph.
#[derive(Clone, Debug)]
pub struct BallSubgraph {
    pub graph: MetricGraph,
    /// `original_ids[new] = old`; sorted by `(distance, old id)`.
    pub original_ids: Vec<u32>,
}

/// Separated net with its correspondence: `centers[i]` is the host vertex for
/// net vertex `i`, `assignment[v]` the net vertex representing host vertex `v`.
#[derive(Clone, Debug)]
pub struct NetApproximation {
    pub net: MetricGraph,
    pub centers: Vec<u32>,
    pub assignment: Vec<u32>,
}
