//! Trees of spaces: a rooted simplicial tree whose vertices and edges carry
//! connected graphs, glued into one total space.
//!
//! Gluing is discrete: each edge space gets a single mid-copy joined by unit
//! edges to both attach images, so crossing a tree edge costs 2 and the
//! preimage of an edge midpoint is an honest subgraph. Attach maps are
//! extensional vertex tables, validated total and injective. The declared
//! family constants (delta, K, epsilon) are inputs to be audited, never
//! trusted: `verify_qi_embedded` measures every attach map against them.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{GeodesicSegment, Half, MetricGraph};
use crate::groups::{cayley_ball, FreeAutomorphism, GroupModel};
use crate::hyperbolic::{fit_qi_grid, QIEstimate};
use crate::report::Digester;

type Rat = Ratio<i64>;

/// Rooted tree over vertices 0..n; edges keep their declared end order, which
/// fixes which attach table is "lo" and which is "hi".
#[derive(Clone, Debug)]
pub struct SimplicialTree {
    adj: Vec<Vec<u32>>,
    edge_ends: Vec<(u32, u32)>,
    edge_index: HashMap<(u32, u32), u32>,
    root: u32,
    parent: Vec<Option<u32>>,
    depth: Vec<u32>,
}

impl SimplicialTree {
    pub fn new(vertex_count: usize, edges: &[(u32, u32)], root: u32) -> Result<Self> {
        if edges.len() + 1 != vertex_count {
            return Err(Error::Parse(format!(
                "a tree on {vertex_count} vertices needs {} edges, got {}",
                vertex_count - 1,
                edges.len()
            )));
        }
        // connectivity with n-1 edges makes it a tree
        let graph = MetricGraph::from_edges(vertex_count, edges)?;
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); vertex_count];
        let mut edge_index = HashMap::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
            edge_index.insert((u.min(v), u.max(v)), i as u32);
        }
        if root as usize >= vertex_count {
            return Err(Error::UnknownVertex(root, vertex_count));
        }
        let dist = graph.bfs_distances(root)?;
        let mut parent = vec![None; vertex_count];
        for v in 0..vertex_count as u32 {
            if v != root {
                // the unique neighbour one step closer to the root
                parent[v as usize] = adj[v as usize]
                    .iter()
                    .copied()
                    .find(|&u| dist[u as usize] + 1 == dist[v as usize]);
            }
        }
        Ok(SimplicialTree {
            adj,
            edge_ends: edges.to_vec(),
            edge_index,
            root,
            parent,
            depth: dist,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ends.len()
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn edge_ends(&self, e: u32) -> (u32, u32) {
        self.edge_ends[e as usize]
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        self.parent[v as usize]
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn edge_between(&self, u: u32, v: u32) -> Option<u32> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    /// The edge joining `v` to its parent.
    pub fn edge_toward_root(&self, v: u32) -> Result<u32> {
        let p = self.parent(v).ok_or(Error::VertexIsRoot(v))?;
        Ok(self.edge_between(v, p).expect("parent edge exists"))
    }

    pub fn distance(&self, u: u32, v: u32) -> u32 {
        // walk both vertices up to their meeting point
        let (mut a, mut b, mut d) = (u, v, 0);
        while self.depth[a as usize] > self.depth[b as usize] {
            a = self.parent[a as usize].unwrap();
            d += 1;
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            b = self.parent[b as usize].unwrap();
            d += 1;
        }
        while a != b {
            a = self.parent[a as usize].unwrap();
            b = self.parent[b as usize].unwrap();
            d += 2;
        }
        d
    }
}

/// Family constants the instance declares and the audits verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeclaredParams {
    pub delta: Half,
    pub k: Rat,
    pub epsilon: Rat,
}

impl Default for DeclaredParams {
    fn default() -> Self {
        DeclaredParams {
            delta: Half::from_int(2),
            k: Rat::from_integer(2),
            epsilon: Rat::from_integer(2),
        }
    }
}

pub struct TreeOfSpaces {
    pub tree: SimplicialTree,
    pub vertex_spaces: Vec<MetricGraph>,
    pub edge_spaces: Vec<MetricGraph>,
    /// Per edge: vertex map from the edge space into the space at ends.0.
    pub attach_lo: Vec<Vec<u32>>,
    /// Per edge: vertex map from the edge space into the space at ends.1.
    pub attach_hi: Vec<Vec<u32>>,
    pub params: DeclaredParams,
    digest: String,
}

fn check_attach(
    map: &[u32],
    edge_space: &MetricGraph,
    target: &MetricGraph,
    side: &str,
) -> Result<()> {
    if map.len() != edge_space.vertex_count() {
        return Err(Error::Parse(format!(
            "attach table ({side}) covers {} of {} edge-space vertices",
            map.len(),
            edge_space.vertex_count()
        )));
    }
    let mut seen: HashMap<u32, u32> = HashMap::new();
    for (x, &img) in map.iter().enumerate() {
        if img as usize >= target.vertex_count() {
            return Err(Error::AttachTargetMissing(img, side.to_string()));
        }
        if let Some(&prev) = seen.get(&img) {
            return Err(Error::AttachMapNotInjective(prev, x as u32, img));
        }
        seen.insert(img, x as u32);
    }
    Ok(())
}

impl TreeOfSpaces {
    pub fn new(
        tree: SimplicialTree,
        vertex_spaces: Vec<MetricGraph>,
        edge_spaces: Vec<MetricGraph>,
        attach_lo: Vec<Vec<u32>>,
        attach_hi: Vec<Vec<u32>>,
        params: DeclaredParams,
    ) -> Result<Self> {
        if vertex_spaces.len() != tree.vertex_count()
            || edge_spaces.len() != tree.edge_count()
            || attach_lo.len() != tree.edge_count()
            || attach_hi.len() != tree.edge_count()
        {
            return Err(Error::Parse(format!(
                "tree has {} vertices / {} edges but got {} spaces, {} edge spaces, {}+{} attach tables",
                tree.vertex_count(),
                tree.edge_count(),
                vertex_spaces.len(),
                edge_spaces.len(),
                attach_lo.len(),
                attach_hi.len()
            )));
        }
        for e in 0..tree.edge_count() {
            let (lo, hi) = tree.edge_ends(e as u32);
            check_attach(&attach_lo[e], &edge_spaces[e], &vertex_spaces[lo as usize], "lo")?;
            check_attach(&attach_hi[e], &edge_spaces[e], &vertex_spaces[hi as usize], "hi")?;
        }
        let mut dig = Digester::new();
        dig.update(b"tos");
        dig.update_u64(tree.root() as u64);
        for e in 0..tree.edge_count() {
            let (u, v) = tree.edge_ends(e as u32);
            dig.update_u64(u as u64);
            dig.update_u64(v as u64);
        }
        for g in vertex_spaces.iter().chain(edge_spaces.iter()) {
            dig.update(g.digest().as_bytes());
        }
        for table in attach_lo.iter().chain(attach_hi.iter()) {
            for &t in table {
                dig.update_u64(t as u64);
            }
        }
        dig.update_u64(params.delta.twice() as u64);
        dig.update(params.k.to_string().as_bytes());
        dig.update(params.epsilon.to_string().as_bytes());
        Ok(TreeOfSpaces {
            tree,
            vertex_spaces,
            edge_spaces,
            attach_lo,
            attach_hi,
            params,
            digest: dig.finish(),
        })
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Partial map between attach images induced by crossing the edge from
    /// `v`'s parent into `v`: attach-image points in the parent space map to
    /// their counterparts in X_v.
    pub fn phi_map(&self, v: u32) -> Result<BTreeMap<u32, u32>> {
        let e = self.tree.edge_toward_root(v)?;
        let (lo, _hi) = self.tree.edge_ends(e);
        let (from, to): (&[u32], &[u32]) = if lo == v {
            // parent is the hi end
            (&self.attach_hi[e as usize], &self.attach_lo[e as usize])
        } else {
            (&self.attach_lo[e as usize], &self.attach_hi[e as usize])
        };
        Ok(from.iter().zip(to.iter()).map(|(&a, &b)| (a, b)).collect())
    }

    /// Pushes a geodesic in the parent space of `v` through the edge: the
    /// canonical geodesic in X_v joining the images of mu's endpoints.
    pub fn capital_phi(&self, v: u32, mu: &GeodesicSegment) -> Result<GeodesicSegment> {
        let parent = self.tree.parent(v).ok_or(Error::VertexIsRoot(v))?;
        mu.check_graph(&self.vertex_spaces[parent as usize])?;
        let phi = self.phi_map(v)?;
        let a = *phi.get(&mu.start()).ok_or(Error::EndpointOutsideDomain(mu.start()))?;
        let b = *phi.get(&mu.end()).ok_or(Error::EndpointOutsideDomain(mu.end()))?;
        self.vertex_spaces[v as usize].geodesic(a, b)
    }
}

/// Where a total-space vertex projects to in the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjTarget {
    Vertex(u32),
    EdgeMid(u32),
}

pub struct TotalSpace {
    pub graph: MetricGraph,
    /// P: total-space vertex to tree vertex or edge midpoint.
    pub projection: Vec<ProjTarget>,
    vertex_offsets: Vec<u32>,
    mid_offsets: Vec<u32>,
    tos_digest: String,
}

impl TotalSpace {
    /// i_v: embeds a vertex-space point into the total space.
    pub fn lift(&self, v: u32, x: u32) -> Result<u32> {
        let off = *self
            .vertex_offsets
            .get(v as usize)
            .ok_or(Error::UnknownVertex(v, self.vertex_offsets.len()))?;
        let end = self
            .vertex_offsets
            .get(v as usize + 1)
            .copied()
            .or_else(|| self.mid_offsets.first().copied())
            .unwrap_or(self.graph.vertex_count() as u32);
        if off + x >= end {
            return Err(Error::UnknownVertex(x, (end - off) as usize));
        }
        Ok(off + x)
    }

    /// Mid-copy embedding of an edge-space point.
    pub fn mid(&self, e: u32, x: u32) -> Result<u32> {
        let off = *self
            .mid_offsets
            .get(e as usize)
            .ok_or(Error::UnknownVertex(e, self.mid_offsets.len()))?;
        let end = self
            .mid_offsets
            .get(e as usize + 1)
            .copied()
            .unwrap_or(self.graph.vertex_count() as u32);
        if off + x >= end {
            return Err(Error::UnknownVertex(x, (end - off) as usize));
        }
        Ok(off + x)
    }

    /// Inverse of the embeddings: which copy a total-space vertex lives in,
    /// and its local id there.
    pub fn locate(&self, x: u32) -> (ProjTarget, u32) {
        let target = self.projection[x as usize];
        let off = match target {
            ProjTarget::Vertex(v) => self.vertex_offsets[v as usize],
            ProjTarget::EdgeMid(e) => self.mid_offsets[e as usize],
        };
        (target, x - off)
    }

    pub fn tos_digest(&self) -> &str {
        &self.tos_digest
    }

    /// Tree distance between projection targets; edge midpoints sit half way
    /// along their edge.
    pub fn tree_distance(&self, tree: &SimplicialTree, a: ProjTarget, b: ProjTarget) -> Half {
        match (a, b) {
            (ProjTarget::Vertex(u), ProjTarget::Vertex(v)) => {
                Half::from_int(i64::from(tree.distance(u, v)))
            }
            (ProjTarget::Vertex(u), ProjTarget::EdgeMid(e))
            | (ProjTarget::EdgeMid(e), ProjTarget::Vertex(u)) => {
                let (x, y) = tree.edge_ends(e);
                let d = tree.distance(u, x).min(tree.distance(u, y));
                Half::from_twice(2 * i64::from(d) + 1)
            }
            (ProjTarget::EdgeMid(e), ProjTarget::EdgeMid(f)) => {
                if e == f {
                    return Half::ZERO;
                }
                let (a0, a1) = tree.edge_ends(e);
                let (b0, b1) = tree.edge_ends(f);
                let d = [(a0, b0), (a0, b1), (a1, b0), (a1, b1)]
                    .into_iter()
                    .map(|(u, v)| tree.distance(u, v))
                    .min()
                    .unwrap();
                Half::from_int(i64::from(d) + 1)
            }
        }
    }
}

/// Glues the tree of spaces into one graph: all vertex spaces, one mid-copy
/// per edge space, and unit edges mid(x) -- attach_lo(x), mid(x) --
/// attach_hi(x) realizing each gluing.
pub fn assemble_total_space(tos: &TreeOfSpaces) -> Result<TotalSpace> {
    let tv = tos.tree.vertex_count();
    let te = tos.tree.edge_count();
    let mut vertex_offsets = Vec::with_capacity(tv);
    let mut n: u32 = 0;
    for g in &tos.vertex_spaces {
        vertex_offsets.push(n);
        n += g.vertex_count() as u32;
    }
    let mut mid_offsets = Vec::with_capacity(te);
    for g in &tos.edge_spaces {
        mid_offsets.push(n);
        n += g.vertex_count() as u32;
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (v, g) in tos.vertex_spaces.iter().enumerate() {
        let off = vertex_offsets[v];
        edges.extend(g.edges().into_iter().map(|(a, b)| (off + a, off + b)));
    }
    for (e, g) in tos.edge_spaces.iter().enumerate() {
        let off = mid_offsets[e];
        edges.extend(g.edges().into_iter().map(|(a, b)| (off + a, off + b)));
        let (lo, hi) = tos.tree.edge_ends(e as u32);
        let lo_off = vertex_offsets[lo as usize];
        let hi_off = vertex_offsets[hi as usize];
        for x in 0..g.vertex_count() as u32 {
            edges.push((lo_off + tos.attach_lo[e][x as usize], off + x));
            edges.push((off + x, hi_off + tos.attach_hi[e][x as usize]));
        }
    }
    let mut projection = Vec::with_capacity(n as usize);
    let mut labels = Vec::with_capacity(n as usize);
    for (v, g) in tos.vertex_spaces.iter().enumerate() {
        for x in 0..g.vertex_count() as u32 {
            projection.push(ProjTarget::Vertex(v as u32));
            labels.push(match g.label_of(x) {
                Some(l) => format!("v{v}:{l}"),
                None => format!("v{v}:{x}"),
            });
        }
    }
    for (e, g) in tos.edge_spaces.iter().enumerate() {
        for x in 0..g.vertex_count() as u32 {
            projection.push(ProjTarget::EdgeMid(e as u32));
            labels.push(match g.label_of(x) {
                Some(l) => format!("e{e}:{l}"),
                None => format!("e{e}:{x}"),
            });
        }
    }
    let graph = MetricGraph::from_edges(n as usize, &edges)?.with_labels(labels)?;
    Ok(TotalSpace {
        graph,
        projection,
        vertex_offsets,
        mid_offsets,
        tos_digest: tos.digest.clone(),
    })
}

/// Measured embedding quality of one edge's two attach maps.
#[derive(Clone, Debug)]
pub struct EdgeEmbeddingReport {
    pub edge: u32,
    pub lo: QIEstimate,
    pub hi: QIEstimate,
    pub pass: bool,
}

/// Fits (K, eps) for every attach map by exhaustive pair comparison of edge-
/// space distances with image distances; passes against the declared params.
pub fn verify_qi_embedded(
    tos: &TreeOfSpaces,
    _total: &TotalSpace,
) -> Result<Vec<EdgeEmbeddingReport>> {
    let mut out = Vec::with_capacity(tos.tree.edge_count());
    for e in 0..tos.tree.edge_count() {
        let (lo_v, hi_v) = tos.tree.edge_ends(e as u32);
        let lo = embedding_fit(
            &tos.edge_spaces[e],
            &tos.vertex_spaces[lo_v as usize],
            &tos.attach_lo[e],
        )?;
        let hi = embedding_fit(
            &tos.edge_spaces[e],
            &tos.vertex_spaces[hi_v as usize],
            &tos.attach_hi[e],
        )?;
        let pass = [&lo, &hi].into_iter().all(|est| {
            est.k <= tos.params.k && est.epsilon <= tos.params.epsilon
        });
        out.push(EdgeEmbeddingReport { edge: e as u32, lo, hi, pass });
    }
    Ok(out)
}

fn embedding_fit(
    domain: &MetricGraph,
    target: &MetricGraph,
    map: &[u32],
) -> Result<QIEstimate> {
    let nd = domain.vertex_count();
    let mut pairs = Vec::with_capacity(nd * (nd - 1) / 2);
    for x in 0..nd as u32 {
        let dom_row = domain.bfs_distances(x)?;
        let img_row = target.bfs_distances(map[x as usize])?;
        for y in (x + 1)..nd as u32 {
            pairs.push((
                i64::from(dom_row[y as usize]),
                i64::from(img_row[map[y as usize] as usize]),
            ));
        }
    }
    Ok(fit_qi_grid(&pairs, i64::from(target.diameter(None)?)))
}

const PROPERNESS_VERTEX_CAP: usize = 4096;

/// For each bound M, the largest vertex-space distance between points whose
/// total-space distance is at most M. Finite and nondecreasing tables witness
/// uniform properness of the embeddings i_v.
pub fn verify_uniform_properness(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    m_values: &[u32],
) -> Result<Vec<(u32, u32)>> {
    let n = total.graph.vertex_count();
    if n > PROPERNESS_VERTEX_CAP {
        return Err(Error::GraphTooLarge { vertices: n, cap: PROPERNESS_VERTEX_CAP });
    }
    let mut sorted = m_values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let m_max = *sorted.last().ok_or(Error::EmptySet)?;
    let mut answers: Vec<u32> = vec![0; sorted.len()];
    for (v, g) in tos.vertex_spaces.iter().enumerate() {
        for x in 0..g.vertex_count() as u32 {
            let inner = g.bfs_distances(x)?;
            let outer = total.graph.bfs_distances(total.lift(v as u32, x)?)?;
            for y in 0..g.vertex_count() as u32 {
                let dx = outer[total.lift(v as u32, y)? as usize];
                if dx > m_max {
                    continue;
                }
                for (slot, &m) in sorted.iter().enumerate() {
                    if dx <= m {
                        answers[slot] = answers[slot].max(inner[y as usize]);
                    }
                }
            }
        }
    }
    Ok(sorted.into_iter().zip(answers).collect())
}

// ---- spec files ----

#[derive(serde::Deserialize)]
struct RawSpec {
    root: u32,
    params: Option<RawParams>,
    spaces: BTreeMap<String, String>,
    edges: Vec<RawEdge>,
}

#[derive(serde::Deserialize)]
struct RawParams {
    delta: String,
    k: String,
    epsilon: String,
}

#[derive(serde::Deserialize)]
struct RawEdge {
    ends: [u32; 2],
    space: String,
    attach_lo: String,
    attach_hi: String,
}

fn parse_rational(s: &str) -> Result<Rat> {
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Error::Parse(format!("expected a rational like 3 or 3/2, got {s:?}"));
    match parts.as_slice() {
        [n] => Ok(Rat::from_integer(n.trim().parse().map_err(|_| bad())?)),
        [n, d] => {
            let den: i64 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Rat::new(n.trim().parse().map_err(|_| bad())?, den))
        }
        _ => Err(bad()),
    }
}

fn parse_half(s: &str) -> Result<Half> {
    let r = parse_rational(s)?;
    let doubled = r * Rat::from_integer(2);
    if !doubled.is_integer() {
        return Err(Error::Parse(format!("{s:?} is not a half-integer")));
    }
    Ok(Half::from_twice(doubled.to_integer()))
}

/// Builds a space from a reference string: `path:N`, `cycle:N`, a group model
/// with ball radius (`free:2/3`, `fbc:2:a->ab,b->a/2`, `tiling:7:3/4`), or an
/// inline edge list `edges: 0-1, 1-2`.
pub fn space_from_ref(s: &str) -> Result<MetricGraph> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("edges:") {
        let mut edges = Vec::new();
        let mut max_id = 0u32;
        for part in rest.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (a, b) = part.split_once('-').ok_or_else(|| {
                Error::Parse(format!("bad inline edge {part:?}; expected u-v"))
            })?;
            let u: u32 = a.trim().parse().map_err(|_| {
                Error::Parse(format!("bad vertex id in inline edge {part:?}"))
            })?;
            let v: u32 = b.trim().parse().map_err(|_| {
                Error::Parse(format!("bad vertex id in inline edge {part:?}"))
            })?;
            max_id = max_id.max(u).max(v);
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::Parse(String::from("inline edge list is empty")));
        }
        return MetricGraph::from_edges(max_id as usize + 1, &edges);
    }
    if let Some(rest) = s.strip_prefix("path:") {
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad path length {rest:?}")))?;
        return MetricGraph::path(n);
    }
    if let Some(rest) = s.strip_prefix("cycle:") {
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad cycle length {rest:?}")))?;
        return MetricGraph::cycle(n);
    }
    let (model_str, radius_str) = s
        .rsplit_once('/')
        .ok_or_else(|| Error::Parse(format!("space reference {s:?} needs /radius")))?;
    let radius: u32 = radius_str
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad ball radius {radius_str:?}")))?;
    let model = GroupModel::parse(model_str)?;
    Ok(cayley_ball(&model, radius)?.graph)
}

/// Resolves an attach reference into a vertex table from `domain` to `target`.
///
/// `identity` matches labels when both spaces carry them and ids otherwise;
/// `words:a->ab,b->a` rewrites word labels through the automorphism;
/// `table:0->5,1->3` is explicit.
pub fn attach_from_ref(
    s: &str,
    domain: &MetricGraph,
    target: &MetricGraph,
) -> Result<Vec<u32>> {
    let s = s.trim();
    let by_label = |f: &dyn Fn(&str) -> Result<String>| -> Result<Vec<u32>> {
        let lookup: HashMap<&str, u32> = target
            .labels()
            .expect("caller checked labels")
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let mut out = Vec::with_capacity(domain.vertex_count());
        for x in 0..domain.vertex_count() as u32 {
            let lab = domain.label_of(x).expect("caller checked labels");
            let image = f(lab)?;
            match lookup.get(image.as_str()) {
                Some(&t) => out.push(t),
                None => return Err(Error::AttachTargetMissing(x, image)),
            }
        }
        Ok(out)
    };
    if s == "identity" {
        if domain.labels().is_some() && target.labels().is_some() {
            return by_label(&|lab: &str| Ok(lab.to_string()));
        }
        if domain.vertex_count() > target.vertex_count() {
            return Err(Error::Parse(format!(
                "identity attach needs the edge space ({}) inside the vertex space ({})",
                domain.vertex_count(),
                target.vertex_count()
            )));
        }
        return Ok((0..domain.vertex_count() as u32).collect());
    }
    if let Some(map_str) = s.strip_prefix("words:") {
        if domain.labels().is_none() || target.labels().is_none() {
            return Err(Error::Parse(String::from(
                "words attach requires word-labelled spaces on both sides",
            )));
        }
        let rank = map_str
            .bytes()
            .filter(u8::is_ascii_alphabetic)
            .map(|c| c.to_ascii_lowercase() - b'a' + 1)
            .max()
            .unwrap_or(0);
        let auto = FreeAutomorphism::parse(rank, map_str, 8)?;
        return by_label(&|lab: &str| {
            let w = crate::groups::parse_word(lab)?;
            Ok(auto.apply(&w).render())
        });
    }
    if let Some(rest) = s.strip_prefix("table:") {
        let mut out = vec![u32::MAX; domain.vertex_count()];
        for part in rest.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (a, b) = part.split_once("->").ok_or_else(|| {
                Error::Parse(format!("bad table entry {part:?}; expected x->y"))
            })?;
            let x: u32 = a.trim().parse().map_err(|_| {
                Error::Parse(format!("bad source vertex in {part:?}"))
            })?;
            let y: u32 = b.trim().parse().map_err(|_| {
                Error::Parse(format!("bad target vertex in {part:?}"))
            })?;
            if x as usize >= out.len() {
                return Err(Error::UnknownVertex(x, out.len()));
            }
            out[x as usize] = y;
        }
        if let Some(missing) = out.iter().position(|&t| t == u32::MAX) {
            return Err(Error::MapNotDefinedOnVertex(missing as u32));
        }
        return Ok(out);
    }
    Err(Error::Parse(format!("unknown attach reference {s:?}")))
}

/// Parses the structured instance file: root, declared params, one space
/// reference per tree vertex, and per edge the ends, edge space, and the two
/// attach references.
pub fn parse_tree_of_spaces(text: &str) -> Result<TreeOfSpaces> {
    let raw: RawSpec =
        toml::from_str(text).map_err(|e| Error::Parse(format!("spec file: {e}")))?;
    let tv = raw.spaces.len();
    let mut vertex_spaces = Vec::with_capacity(tv);
    for v in 0..tv as u32 {
        let key = v.to_string();
        let space_ref = raw
            .spaces
            .get(&key)
            .ok_or_else(|| Error::Parse(format!("missing space for tree vertex {v}")))?;
        vertex_spaces.push(space_from_ref(space_ref)?);
    }
    let edge_list: Vec<(u32, u32)> =
        raw.edges.iter().map(|e| (e.ends[0], e.ends[1])).collect();
    let tree = SimplicialTree::new(tv, &edge_list, raw.root)?;
    let mut edge_spaces = Vec::with_capacity(raw.edges.len());
    let mut attach_lo = Vec::with_capacity(raw.edges.len());
    let mut attach_hi = Vec::with_capacity(raw.edges.len());
    for e in &raw.edges {
        let space = space_from_ref(&e.space)?;
        attach_lo.push(attach_from_ref(
            &e.attach_lo,
            &space,
            &vertex_spaces[e.ends[0] as usize],
        )?);
        attach_hi.push(attach_from_ref(
            &e.attach_hi,
            &space,
            &vertex_spaces[e.ends[1] as usize],
        )?);
        edge_spaces.push(space);
    }
    let params = match raw.params {
        Some(p) => DeclaredParams {
            delta: parse_half(&p.delta)?,
            k: parse_rational(&p.k)?,
            epsilon: parse_rational(&p.epsilon)?,
        },
        None => DeclaredParams::default(),
    };
    TreeOfSpaces::new(tree, vertex_spaces, edge_spaces, attach_lo, attach_hi, params)
}

/// Exhaustively checks d_X(x, y) >= d_T(P x, P y) on an assembled instance.
pub fn verify_projection_contraction(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
) -> Result<()> {
    let n = total.graph.vertex_count();
    if n > PROPERNESS_VERTEX_CAP {
        return Err(Error::GraphTooLarge { vertices: n, cap: PROPERNESS_VERTEX_CAP });
    }
    for x in 0..n as u32 {
        let row = total.graph.bfs_distances(x)?;
        for y in 0..n as u32 {
            let dt = total.tree_distance(
                &tos.tree,
                total.projection[x as usize],
                total.projection[y as usize],
            );
            if Half::from_int(i64::from(row[y as usize])) < dt {
                return Err(Error::PreconditionViolated(format!(
                    "d_X({x},{y}) = {} < d_T = {dt}",
                    row[y as usize]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_vertex_graph() -> MetricGraph {
        MetricGraph::from_edges(1, &[]).unwrap()
    }

    /// Two tree vertices, all three spaces a single point.
    fn tiny_tos() -> TreeOfSpaces {
        let tree = SimplicialTree::new(2, &[(0, 1)], 0).unwrap();
        TreeOfSpaces::new(
            tree,
            vec![single_vertex_graph(), single_vertex_graph()],
            vec![single_vertex_graph()],
            vec![vec![0]],
            vec![vec![0]],
            DeclaredParams::default(),
        )
        .unwrap()
    }

    /// Three-vertex path tree 0-1-2 rooted at 0, every space the F2 ball of
    /// radius `r`, identity attach maps.
    fn product_like(r: u32) -> TreeOfSpaces {
        let model = GroupModel::parse("free:2").unwrap();
        let ball = || cayley_ball(&model, r).unwrap().graph;
        let tree = SimplicialTree::new(3, &[(0, 1), (1, 2)], 0).unwrap();
        let att = |g: &MetricGraph| (0..g.vertex_count() as u32).collect::<Vec<_>>();
        let e = ball();
        TreeOfSpaces::new(
            tree,
            vec![ball(), ball(), ball()],
            vec![ball(), ball()],
            vec![att(&e), att(&e)],
            vec![att(&e), att(&e)],
            DeclaredParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn tree_structure_basics() {
        let t = SimplicialTree::new(5, &[(0, 1), (1, 2), (1, 3), (3, 4)], 0).unwrap();
        assert_eq!(t.parent(0), None);
        assert_eq!(t.parent(4), Some(3));
        assert_eq!(t.depth(4), 3);
        assert_eq!(t.distance(2, 4), 3);
        assert_eq!(t.edge_toward_root(4).unwrap(), 3);
        assert!(matches!(t.edge_toward_root(0), Err(Error::VertexIsRoot(0))));
        // a cycle is rejected
        assert!(SimplicialTree::new(3, &[(0, 1), (1, 2), (2, 0)], 0).is_err());
    }

    #[test]
    fn two_point_total_space_is_a_path() {
        let total = assemble_total_space(&tiny_tos()).unwrap();
        assert_eq!(total.graph.vertex_count(), 3);
        assert_eq!(total.graph.edge_count(), 2);
        // v0 copy, v1 copy, mid; distance across the edge is 2
        assert_eq!(total.graph.distance(0, 1).unwrap(), 2);
        assert_eq!(total.projection[2], ProjTarget::EdgeMid(0));
        assert_eq!(total.locate(2), (ProjTarget::EdgeMid(0), 0));
    }

    #[test]
    fn single_vertex_tree_total_space_is_the_space() {
        let tree = SimplicialTree::new(1, &[], 0).unwrap();
        let tos = TreeOfSpaces::new(
            tree,
            vec![MetricGraph::path(3).unwrap()],
            vec![],
            vec![],
            vec![],
            DeclaredParams::default(),
        )
        .unwrap();
        let total = assemble_total_space(&tos).unwrap();
        assert_eq!(total.graph.vertex_count(), 3);
        assert!(total
            .projection
            .iter()
            .all(|&t| t == ProjTarget::Vertex(0)));
    }

    #[test]
    fn product_like_counts_and_crossing_cost() {
        let tos = product_like(2);
        let ball_n = tos.vertex_spaces[0].vertex_count() as u32;
        let total = assemble_total_space(&tos).unwrap();
        assert_eq!(total.graph.vertex_count() as u32, 5 * ball_n);
        // corresponding basepoints in adjacent vertex spaces are 2 apart
        let a = total.lift(0, 0).unwrap();
        let b = total.lift(1, 0).unwrap();
        assert_eq!(total.graph.distance(a, b).unwrap(), 2);
    }

    #[test]
    fn total_space_distance_dominates_tree_distance() {
        let tos = product_like(1);
        let total = assemble_total_space(&tos).unwrap();
        verify_projection_contraction(&tos, &total).unwrap();
    }

    #[test]
    fn identity_attachments_embed_isometrically() {
        let tos = product_like(2);
        let total = assemble_total_space(&tos).unwrap();
        for rep in verify_qi_embedded(&tos, &total).unwrap() {
            assert_eq!(rep.lo, QIEstimate::geodesic());
            assert_eq!(rep.hi, QIEstimate::geodesic());
            assert!(rep.pass);
        }
    }

    #[test]
    fn twisted_attachment_stays_bilipschitz_at_small_scale() {
        // edge space: radius-2 ball; one side identity, the other through
        // the automorphism a -> ab, b -> a
        let model = GroupModel::parse("free:2").unwrap();
        let small = cayley_ball(&model, 2).unwrap().graph;
        let big = cayley_ball(&model, 4).unwrap().graph;
        let tree = SimplicialTree::new(2, &[(0, 1)], 0).unwrap();
        let lo = attach_from_ref("identity", &small, &big).unwrap();
        let hi = attach_from_ref("words:a->ab,b->a", &small, &big).unwrap();
        let tos = TreeOfSpaces::new(
            tree,
            vec![big.clone(), big.clone()],
            vec![small],
            vec![lo],
            vec![hi],
            DeclaredParams::default(),
        )
        .unwrap();
        let total = assemble_total_space(&tos).unwrap();
        let reps = verify_qi_embedded(&tos, &total).unwrap();
        assert_eq!(reps[0].lo, QIEstimate::geodesic());
        assert!(reps[0].hi.k <= Rat::from_integer(2), "hi fit {:?}", reps[0].hi);
    }

    #[test]
    fn properness_tables() {
        // single tree vertex: the embedding is the identity
        let tree = SimplicialTree::new(1, &[], 0).unwrap();
        let tos = TreeOfSpaces::new(
            tree,
            vec![MetricGraph::path(9).unwrap()],
            vec![],
            vec![],
            vec![],
            DeclaredParams::default(),
        )
        .unwrap();
        let total = assemble_total_space(&tos).unwrap();
        let table = verify_uniform_properness(&tos, &total, &[1, 2, 5, 8]).unwrap();
        assert_eq!(table, vec![(1, 1), (2, 2), (5, 5), (8, 8)]);

        // identity gluings add no shortcuts inside a vertex space
        let tos = product_like(1);
        let total = assemble_total_space(&tos).unwrap();
        let table = verify_uniform_properness(&tos, &total, &[1, 2]).unwrap();
        assert_eq!(table, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn phi_maps_compose_attachments() {
        let tos = product_like(1);
        let phi = tos.phi_map(1).unwrap();
        // identity attach: the induced crossing map is the identity
        for (a, b) in &phi {
            assert_eq!(a, b);
        }
        assert!(matches!(tos.phi_map(0), Err(Error::VertexIsRoot(0))));
    }

    #[test]
    fn twisted_phi_applies_the_automorphism() {
        let model = GroupModel::parse("free:2").unwrap();
        let small = cayley_ball(&model, 2).unwrap().graph;
        let big = cayley_ball(&model, 4).unwrap().graph;
        let tree = SimplicialTree::new(2, &[(0, 1)], 0).unwrap();
        let lo = attach_from_ref("identity", &small, &big).unwrap();
        let hi = attach_from_ref("words:a->ab,b->a", &small, &big).unwrap();
        let tos = TreeOfSpaces::new(
            tree,
            vec![big.clone(), big.clone()],
            vec![small],
            vec![lo],
            vec![hi],
            DeclaredParams::default(),
        )
        .unwrap();
        let phi = tos.phi_map(1).unwrap();
        // vertex labelled "a" maps to the vertex labelled "ab"
        let find = |lab: &str| {
            (0..big.vertex_count() as u32)
                .find(|&v| big.label_of(v) == Some(lab))
                .unwrap()
        };
        assert_eq!(phi[&find("a")], find("ab"));
        assert_eq!(phi[&find("1")], find("1"));

        // mu = [identity, a, aa]; its push-through joins 1 to abab
        let mu = big.geodesic(find("1"), find("aa")).unwrap();
        let pushed = tos.capital_phi(1, &mu).unwrap();
        assert_eq!(pushed.len(), 4);
        assert_eq!(pushed.start(), find("1"));
        assert_eq!(pushed.end(), find("abab"));

        // endpoints outside the attach image are rejected
        let far = big.geodesic(find("1"), find("aaaa")).unwrap();
        assert!(matches!(
            tos.capital_phi(1, &far),
            Err(Error::EndpointOutsideDomain(_))
        ));
    }

    #[test]
    fn rejects_bad_attachments() {
        let tree = SimplicialTree::new(2, &[(0, 1)], 0).unwrap();
        let p3 = MetricGraph::path(3).unwrap();
        let p2 = MetricGraph::path(2).unwrap();
        // non-injective
        let err = TreeOfSpaces::new(
            tree,
            vec![p3.clone(), p3.clone()],
            vec![p2.clone()],
            vec![vec![0, 0]],
            vec![vec![0, 1]],
            DeclaredParams::default(),
        );
        assert!(matches!(err, Err(Error::AttachMapNotInjective(0, 1, 0))));
        // out of range
        let tree = SimplicialTree::new(2, &[(0, 1)], 0).unwrap();
        let err = TreeOfSpaces::new(
            tree,
            vec![p3.clone(), p3.clone()],
            vec![p2],
            vec![vec![0, 7]],
            vec![vec![0, 1]],
            DeclaredParams::default(),
        );
        assert!(matches!(err, Err(Error::AttachTargetMissing(7, _))));
    }

    #[test]
    fn spec_file_round_trip() {
        let text = r#"
root = 0

[params]
delta = "3/2"
k = "2"
epsilon = "2"

[spaces]
0 = "free:2/2"
1 = "free:2/2"

[[edges]]
ends = [0, 1]
space = "free:2/1"
attach_lo = "identity"
attach_hi = "words:a->ab,b->a"
"#;
        let tos = parse_tree_of_spaces(text).unwrap();
        assert_eq!(tos.params.delta, Half::from_twice(3));
        assert_eq!(tos.tree.vertex_count(), 2);
        assert_eq!(tos.edge_spaces[0].vertex_count(), 5);
        let total = assemble_total_space(&tos).unwrap();
        assert_eq!(total.graph.vertex_count(), 17 + 17 + 5);
        // parse again: identical digest
        assert_eq!(parse_tree_of_spaces(text).unwrap().digest(), tos.digest());
    }

    #[test]
    fn space_refs_parse() {
        assert_eq!(space_from_ref("path:4").unwrap().vertex_count(), 4);
        assert_eq!(space_from_ref("cycle:6").unwrap().edge_count(), 6);
        assert_eq!(space_from_ref("edges: 0-1, 1-2").unwrap().vertex_count(), 3);
        assert_eq!(space_from_ref("tiling:7:3/1").unwrap().vertex_count(), 4);
        assert_eq!(space_from_ref("free:2/1").unwrap().vertex_count(), 5);
        assert!(space_from_ref("free:2").is_err());
        assert!(space_from_ref("mystery:9").is_err());
    }
}
