//! The ladder construction and its retraction.
//!
//! Starting from a geodesic lambda in the root space, each tree edge at an
//! already-reached vertex is inspected: where the C-neighborhood of the
//! current segment meets the edge's attach image, the farthest pair (p_e,
//! q_e) is selected, and if its distance strictly exceeds D the geodesic
//! between the pair's images is pushed into the child space. The union of
//! all segments is the ladder B; its support in the tree is connected by
//! construction. The retraction onto B first snaps a point to the nearest
//! vertex-space copy carrying a segment (ties to the lowest vertex id) and
//! then projects inside that copy. The audits measure the edge-Lipschitz
//! constant of the retraction, the quasiconvexity of B in the total space,
//! and the vertical excursion rate A, all with recomputable witnesses.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::GeodesicSegment;
use crate::hyperbolic::{nearest_point_projection, quasiconvexity_constant};
use crate::report::{witness_ids, AuditRow, Digester};
use crate::tree::{ProjTarget, TotalSpace, TreeOfSpaces};

type Rat = Ratio<i64>;

/// How a non-root segment was produced: the farthest admissible pair in the
/// parent space whose pushed-through geodesic became this vertex's segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub parent: u32,
    pub p_e: u32,
    pub q_e: u32,
}

/// One segment per reached tree vertex, plus everything needed to rebuild
/// the construction: constants, generations, and per-vertex provenance.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub base_geodesic: GeodesicSegment,
    pub root: u32,
    /// lambda_v for every tree vertex v in the support.
    pub segments: BTreeMap<u32, GeodesicSegment>,
    pub generation: BTreeMap<u32, u32>,
    pub provenance: BTreeMap<u32, Provenance>,
    pub c: i64,
    pub d_threshold: i64,
    tos_digest: String,
    digest: String,
}

impl Ladder {
    /// Tree vertices carrying a segment, ascending.
    pub fn support_tree(&self) -> Vec<u32> {
        self.segments.keys().copied().collect()
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn lambda_digest(&self) -> String {
        let mut dig = Digester::new();
        dig.update(b"lambda");
        for &v in self.base_geodesic.vertices() {
            dig.update_u64(u64::from(v));
        }
        dig.finish()
    }

    fn check_total(&self, total: &TotalSpace) -> Result<()> {
        if total.tos_digest() != self.tos_digest {
            return Err(Error::SegmentGraphMismatch {
                segment: self.tos_digest.clone(),
                graph: total.tos_digest().to_string(),
            });
        }
        Ok(())
    }

    /// All total-space vertices of the ladder, ascending.
    pub fn total_vertices(&self, total: &TotalSpace) -> Result<Vec<u32>> {
        self.check_total(total)?;
        let mut out = Vec::new();
        for (&v, seg) in &self.segments {
            for &x in seg.vertices() {
                out.push(total.lift(v, x)?);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Per-vertex dump: generation, provenance, and the segment's vertices.
    pub fn dump(&self) -> String {
        let mut out = String::from("tree_vertex,generation,parent,p_e,q_e,segment\n");
        for (&v, seg) in &self.segments {
            let gen = self.generation[&v];
            let (parent, p_e, q_e) = match self.provenance.get(&v) {
                Some(p) => (p.parent.to_string(), p.p_e.to_string(), p.q_e.to_string()),
                None => ("-".into(), "-".into(), "-".into()),
            };
            out.push_str(&format!(
                "{v},{gen},{parent},{p_e},{q_e},{}\n",
                witness_ids(seg.vertices())
            ));
        }
        out
    }
}

/// Segment emitted for one child vertex by a single construction step.
#[derive(Clone, Debug)]
pub struct B1Child {
    pub child: u32,
    pub p_e: u32,
    pub q_e: u32,
    pub segment: GeodesicSegment,
}

fn check_constants(c: i64, d: i64) -> Result<()> {
    if c < 0 || d < 0 {
        return Err(Error::ConstantsNegative(format!("C = {c}, D = {d}")));
    }
    Ok(())
}

/// One construction step at tree vertex `v` holding segment `mu`: per child
/// edge, the farthest pair of attach-image points C-close to `mu` is pushed
/// through when strictly farther apart than D. Pairs are compared by
/// distance, ties by (p, q) vertex id.
pub fn build_b1(
    tos: &TreeOfSpaces,
    _total: &TotalSpace,
    v: u32,
    mu: &GeodesicSegment,
    c: i64,
    d: i64,
) -> Result<Vec<B1Child>> {
    check_constants(c, d)?;
    let space = &tos.vertex_spaces[v as usize];
    mu.check_graph(space)?;
    let to_mu = space.multi_source_distances(mu.vertices())?;
    let mut out = Vec::new();
    for &u in tos.tree.neighbors(v) {
        if tos.tree.parent(u) != Some(v) {
            continue;
        }
        let e = tos.tree.edge_between(v, u).expect("tree edge");
        let table = if tos.tree.edge_ends(e).0 == v {
            &tos.attach_lo[e as usize]
        } else {
            &tos.attach_hi[e as usize]
        };
        let mut candidates: Vec<u32> = table
            .iter()
            .copied()
            .filter(|&img| i64::from(to_mu[img as usize]) <= c)
            .collect();
        candidates.sort_unstable();
        if candidates.is_empty() {
            continue;
        }
        // exhaustive farthest pair; ascending scan with strict improvement
        // keeps the lexicographically first maximal (p, q)
        let mut best: (u32, (u32, u32)) = (0, (candidates[0], candidates[0]));
        for (i, &p) in candidates.iter().enumerate() {
            let row = space.bfs_distances(p)?;
            for &q in &candidates[i + 1..] {
                if row[q as usize] > best.0 {
                    best = (row[q as usize], (p, q));
                }
            }
        }
        if i64::from(best.0) <= d {
            continue;
        }
        let (p_e, q_e) = best.1;
        let pushed = tos.capital_phi(u, &space.geodesic(p_e, q_e)?)?;
        out.push(B1Child { child: u, p_e, q_e, segment: pushed });
    }
    Ok(out)
}

/// Runs the construction breadth-first from the root until no vertex emits.
/// Each tree vertex is reached along its unique parent edge at most once, so
/// the result is deterministic and the support is a connected subtree.
pub fn build_ladder(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    lambda: &GeodesicSegment,
    c: i64,
    d: i64,
) -> Result<Ladder> {
    check_constants(c, d)?;
    let root = tos.tree.root();
    lambda.check_graph(&tos.vertex_spaces[root as usize])?;
    let mut segments = BTreeMap::new();
    let mut generation = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    segments.insert(root, lambda.clone());
    generation.insert(root, 0u32);
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            let mu = segments[&v].clone();
            for child in build_b1(tos, total, v, &mu, c, d)? {
                let gen = generation[&v] + 1;
                segments.insert(child.child, child.segment);
                generation.insert(child.child, gen);
                provenance.insert(
                    child.child,
                    Provenance { parent: v, p_e: child.p_e, q_e: child.q_e },
                );
                next.push(child.child);
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    let mut dig = Digester::new();
    dig.update(b"ladder");
    dig.update(tos.digest().as_bytes());
    for &x in lambda.vertices() {
        dig.update_u64(u64::from(x));
    }
    dig.update_u64(c as u64);
    dig.update_u64(d as u64);
    Ok(Ladder {
        base_geodesic: lambda.clone(),
        root,
        segments,
        generation,
        provenance,
        c,
        d_threshold: d,
        tos_digest: tos.digest().to_string(),
        digest: dig.finish(),
    })
}

/// The retraction at a single point: inside a segment-carrying vertex copy,
/// project onto that copy's segment; anywhere else, first walk to the
/// nearest segment-carrying copy vertex (ties to the lowest vertex id).
pub fn retract(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
    x: u32,
) -> Result<u32> {
    ladder.check_total(total)?;
    let in_support = |t: ProjTarget| match t {
        ProjTarget::Vertex(v) => ladder.segments.contains_key(&v),
        ProjTarget::EdgeMid(_) => false,
    };
    let (target, _) = total.locate(x);
    let x1 = if in_support(target) {
        x
    } else {
        let dist = total.graph.bfs_distances(x)?;
        let mut best: Option<(u32, u32)> = None;
        for y in 0..total.graph.vertex_count() as u32 {
            if in_support(total.locate(y).0) {
                let d = dist[y as usize];
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, y));
                }
            }
        }
        best.expect("support is nonempty").1
    };
    let (ProjTarget::Vertex(v), local) = total.locate(x1) else {
        unreachable!("x1 lies in a vertex copy")
    };
    let projected =
        nearest_point_projection(&tos.vertex_spaces[v as usize], local, &ladder.segments[&v])?;
    total.lift(v, projected)
}

/// The retraction at every vertex at once: one labelled multi-source BFS
/// finds each vertex's snap target, one labelled BFS per support space finds
/// the segment projections. Agrees with `retract` pointwise.
pub fn retract_all(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<Vec<u32>> {
    ladder.check_total(total)?;
    let n = total.graph.vertex_count();
    // sources ascending by vertex id makes the owner tie-break "lowest id"
    let mut sources = Vec::new();
    for &v in ladder.segments.keys() {
        let count = tos.vertex_spaces[v as usize].vertex_count() as u32;
        for local in 0..count {
            sources.push(total.lift(v, local)?);
        }
    }
    sources.sort_unstable();
    let (_, owner) = total.graph.multi_source_nearest(&sources)?;
    // per support space: projection of every local vertex onto the segment,
    // tie-break earliest segment position
    let mut proj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&v, seg) in &ladder.segments {
        let space = &tos.vertex_spaces[v as usize];
        let (_, pos) = space.multi_source_nearest(seg.vertices())?;
        let table = pos
            .into_iter()
            .map(|p| seg.vertices()[p as usize])
            .collect();
        proj.insert(v, table);
    }
    let mut out = Vec::with_capacity(n);
    for x in 0..n as u32 {
        let snap = sources[owner[x as usize] as usize];
        let (ProjTarget::Vertex(v), local) = total.locate(snap) else {
            unreachable!("snap targets are vertex-copy points")
        };
        out.push(total.lift(v, proj[&v][local as usize])?);
    }
    Ok(out)
}

/// Joint audit result; each measured constant keeps its witness.
#[derive(Clone, Debug)]
pub struct RetractionReport {
    pub lipschitz_c0: u32,
    pub witness_pair: (u32, u32),
    pub quasiconvexity_cprime: u32,
    pub vertical_a: Rat,
    pub vertical_witness: Option<u32>,
}

impl RetractionReport {
    pub fn audit_rows(&self, input_digest: &str) -> Vec<AuditRow> {
        vec![
            AuditRow::new(
                "retraction_lipschitz",
                input_digest,
                self.lipschitz_c0.to_string(),
                "finite",
                true,
            ),
            AuditRow::new(
                "ladder_quasiconvexity",
                input_digest,
                self.quasiconvexity_cprime.to_string(),
                "finite",
                true,
            ),
            AuditRow::new(
                "vertical_bound",
                input_digest,
                format!("{}/{}", self.vertical_a.numer(), self.vertical_a.denom()),
                "finite",
                true,
            ),
        ]
    }
}

/// C0 = the largest displacement of the retraction across a single edge of
/// the total space; the witness edge is the first maximal one in edge order.
pub fn audit_retraction_lipschitz(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<(u32, (u32, u32))> {
    let pi = retract_all(tos, total, ladder)?;
    // retractions land on the ladder, a small set: one BFS per target
    let mut rows: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &t in &pi {
        rows.entry(t).or_default();
    }
    for (&t, row) in rows.iter_mut() {
        *row = total.graph.bfs_distances(t)?;
    }
    let mut best = (0u32, (0u32, 0u32));
    for (a, b) in total.graph.edges() {
        let d = rows[&pi[a as usize]][pi[b as usize] as usize];
        if d > best.0 {
            best = (d, (a, b));
        }
    }
    Ok(best)
}

/// C' = quasiconvexity constant of the ladder's vertex set inside the total
/// space, measured along canonical geodesics.
pub fn audit_quasiconvexity(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<u32> {
    let _ = tos;
    let set = ladder.total_vertices(total)?;
    quasiconvexity_constant(&total.graph, &set)
}

/// A = the worst ratio of (distance back to the base segment) to (tree
/// distance from the root), over all ladder points outside the base copy.
/// A trivial ladder has no such points and reports 0.
pub fn audit_vertical_bound(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<(Rat, Option<u32>)> {
    ladder.check_total(total)?;
    if ladder.segments.len() == 1 {
        return Ok((Rat::from_integer(0), None));
    }
    let base: Vec<u32> = ladder
        .base_geodesic
        .vertices()
        .iter()
        .map(|&x| total.lift(ladder.root, x))
        .collect::<Result<_>>()?;
    let to_base = total.graph.multi_source_distances(&base)?;
    let mut best: Option<(Rat, u32)> = None;
    for (&v, seg) in &ladder.segments {
        if v == ladder.root {
            continue;
        }
        let depth = i64::from(tos.tree.depth(v));
        for &x in seg.vertices() {
            let a = total.lift(v, x)?;
            let ratio = Rat::new(i64::from(to_base[a as usize]), depth);
            if best.map_or(true, |(b, _)| ratio > b) {
                best = Some((ratio, a));
            }
        }
    }
    let (a, w) = best.expect("non-root segment exists");
    Ok((a, Some(w)))
}

/// Runs all three audits and bundles them with their witnesses.
pub fn audit_retraction(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<RetractionReport> {
    let (c0, witness_pair) = audit_retraction_lipschitz(tos, total, ladder)?;
    let cprime = audit_quasiconvexity(tos, total, ladder)?;
    let (vertical_a, vertical_witness) = audit_vertical_bound(tos, total, ladder)?;
    Ok(RetractionReport {
        lipschitz_c0: c0,
        witness_pair,
        quasiconvexity_cprime: cprime,
        vertical_a,
        vertical_witness,
    })
}

/// Exhaustive retraction fixed-point check: every ladder vertex must map to
/// itself. Returns the first violation.
pub fn verify_retraction_fixes_ladder(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<Option<(u32, u32)>> {
    let pi = retract_all(tos, total, ladder)?;
    for x in ladder.total_vertices(total)? {
        if pi[x as usize] != x {
            return Ok(Some((x, pi[x as usize])));
        }
    }
    Ok(None)
}

/// Exhaustive range check: the retraction must land inside the ladder.
pub fn verify_retraction_range(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    ladder: &Ladder,
) -> Result<Option<u32>> {
    let pi = retract_all(tos, total, ladder)?;
    let set = ladder.total_vertices(total)?;
    for (x, &t) in pi.iter().enumerate() {
        if set.binary_search(&t).is_err() {
            return Ok(Some(x as u32));
        }
    }
    Ok(None)
}
