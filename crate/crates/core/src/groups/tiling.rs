//! Combinatorial generator for balls in the 1-skeleton of the regular {p,q}
//! tessellation of the hyperbolic plane ((p-2)(q-2) > 4).
//!
//! The patch grows face corona by face corona around a base vertex. A corona
//! completes every boundary vertex to its full q faces: boundary edges are
//! grouped into runs joined through saturated corners (one new p-gon covers a
//! whole run), and each unsaturated corner additionally receives its missing
//! "free" faces, every new face sharing one edge with its predecessor around
//! the annulus. All bookkeeping is exact integers; vertex ids follow creation
//! order, so the construction is deterministic.
//!
//! After k+1 coronas every vertex at distance <= k from the base is complete,
//! so the patch contains the radius-k ball with all of its internal edges; the
//! requested ball is then cut out by breadth-first distance and renumbered by
//! (distance, creation id).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

const DEFAULT_RADIUS_CAP: u32 = 8;
const MAX_PATCH_VERTICES: usize = 2_000_000;

struct Patch {
    adj: Vec<Vec<u32>>,
    boundary: Vec<u32>,
    p: usize,
    q: usize,
}

impl Patch {
    fn new_vertex(&mut self) -> Result<u32> {
        if self.adj.len() >= MAX_PATCH_VERTICES {
            return Err(Error::GraphTooLarge {
                vertices: self.adj.len(),
                cap: MAX_PATCH_VERTICES,
            });
        }
        self.adj.push(Vec::with_capacity(3));
        Ok((self.adj.len() - 1) as u32)
    }

    fn add_edge(&mut self, u: u32, v: u32) {
        debug_assert!(u != v);
        debug_assert!(!self.adj[u as usize].contains(&v), "duplicate edge {u}-{v}");
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
    }

    fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }
}

/// First corona: the q faces around the base vertex. Face 0 contributes p-1
/// new vertices, the middle faces p-2 each (sharing one spoke with their
/// predecessor), the last face p-3 (sharing spokes with both neighbours).
fn corona_zero(patch: &mut Patch) -> Result<()> {
    let (p, q) = (patch.p, patch.q);
    let center = 0u32;
    let mut boundary = Vec::new();
    let mut w = center; // most recent vertex sharing a spoke with the next face
    let mut first = center;
    for j in 0..q {
        let s = if j == 0 {
            p - 1
        } else if j + 1 < q {
            p - 2
        } else {
            p - 3
        };
        let mut prev = if j == 0 { center } else { w };
        let mut chain_first = None;
        for _ in 0..s {
            let nv = patch.new_vertex()?;
            patch.add_edge(prev, nv);
            boundary.push(nv);
            if chain_first.is_none() {
                chain_first = Some(nv);
            }
            prev = nv;
        }
        if j == 0 {
            first = chain_first.expect("p >= 3 so the first face has new vertices");
            patch.add_edge(prev, center);
        } else if j + 1 < q {
            patch.add_edge(prev, center);
        } else {
            // last face closes onto the first spoke
            patch.add_edge(prev, first);
        }
        w = prev;
    }
    patch.boundary = boundary;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Task {
    /// One face covering `run_len` consecutive boundary edges that end at
    /// `end_corner` (interior corners of the run are saturated).
    Run { end_corner: u32, run_len: usize },
    /// One face incident to `corner` through new edges only.
    Free { corner: u32 },
}

impl Task {
    fn new_vertex_count(&self, p: usize) -> usize {
        match *self {
            Task::Run { run_len, .. } => p - 2 - run_len,
            Task::Free { .. } => p - 2,
        }
    }
}

/// Grows the patch by one corona, completing every current boundary vertex.
fn corona(patch: &mut Patch) -> Result<()> {
    let (p, q) = (patch.p, patch.q);
    let old_boundary = std::mem::take(&mut patch.boundary);
    let m = old_boundary.len();
    let deg0: Vec<usize> = old_boundary.iter().map(|&v| patch.degree(v)).collect();
    let broken = |msg: &str| Error::PreconditionViolated(format!("corona bookkeeping: {msg}"));

    let start = (0..m)
        .find(|&i| deg0[i] < q)
        .ok_or_else(|| broken("boundary fully saturated"))?;
    let at = |i: usize| (start + i) % m;

    // Group boundary edges into runs; append each end corner's free faces.
    let mut tasks: Vec<Task> = Vec::new();
    let mut e = 0usize;
    while e < m {
        let mut j = e + 1;
        while j < m && deg0[at(j)] == q {
            j += 1;
        }
        let run_len = j - e;
        if run_len > p - 2 {
            return Err(broken("run longer than one face can cover"));
        }
        let end_corner = old_boundary[at(j % m)];
        tasks.push(Task::Run { end_corner, run_len });
        let free = q
            .checked_sub(deg0[at(j % m)] + 1)
            .ok_or_else(|| broken("boundary degree exceeds q"))?;
        for _ in 0..free {
            tasks.push(Task::Free { corner: end_corner });
        }
        e = j;
    }

    // Start materialisation at a face that creates vertices, so the deferred
    // closing edge has a concrete endpoint.
    let k0 = tasks
        .iter()
        .position(|t| t.new_vertex_count(p) >= 1)
        .ok_or_else(|| broken("corona creates no vertices"))?;
    tasks.rotate_left(k0);

    let mut new_boundary: Vec<u32> = Vec::new();
    let mut w: Option<u32> = None; // newest vertex adjacent to the current corner
    let mut dangle: Option<u32> = None; // open chain end of the first face
    for task in &tasks {
        let s = task.new_vertex_count(p);
        match *task {
            Task::Run { end_corner, .. } => {
                if s == 0 {
                    // the face closes with the single edge (end_corner, w)
                    let wv = w.ok_or_else(|| broken("zero-vertex face cannot start"))?;
                    patch.add_edge(end_corner, wv);
                    continue;
                }
                let mut prev = end_corner;
                let mut arc = Vec::with_capacity(s);
                for _ in 0..s {
                    let nv = patch.new_vertex()?;
                    patch.add_edge(prev, nv);
                    arc.push(nv);
                    prev = nv;
                }
                match w {
                    Some(wv) => patch.add_edge(prev, wv),
                    None => dangle = Some(prev),
                }
                new_boundary.extend(arc.iter().rev());
                w = Some(arc[0]);
            }
            Task::Free { corner } => {
                let mut arc = Vec::with_capacity(s);
                let mut prev = w;
                for _ in 0..s {
                    let nv = patch.new_vertex()?;
                    if let Some(pv) = prev {
                        patch.add_edge(pv, nv);
                    }
                    arc.push(nv);
                    prev = Some(nv);
                }
                patch.add_edge(*arc.last().expect("p >= 3"), corner);
                if w.is_none() {
                    dangle = Some(arc[0]);
                }
                new_boundary.extend(arc.iter());
                w = Some(*arc.last().unwrap());
            }
        }
    }
    match (dangle, w) {
        (Some(d), Some(wv)) if d != wv => patch.add_edge(d, wv),
        _ => return Err(broken("degenerate corona closure")),
    }

    // every old boundary vertex must now carry its full q edges
    for &v in &old_boundary {
        if patch.degree(v) != q {
            return Err(broken(&format!(
                "vertex {v} completed with degree {} != {q}",
                patch.degree(v)
            )));
        }
    }
    patch.boundary = new_boundary;
    Ok(())
}

/// Ball of `radius` around a vertex of the {p,q} tessellation.
///
/// `cap` bounds the radius (default 8); patches are additionally capped at
/// two million vertices. Vertices are numbered by (distance, creation order),
/// so vertex 0 is the centre.
pub fn tiling_ball(p: u32, q: u32, radius: u32, cap: Option<u32>) -> Result<MetricGraph> {
    if p < 3 || q < 3 || (p - 2) * (q - 2) <= 4 {
        return Err(Error::NotHyperbolicTiling { p, q });
    }
    let cap = cap.unwrap_or(DEFAULT_RADIUS_CAP);
    if radius > cap {
        return Err(Error::PreconditionViolated(format!(
            "tiling radius {radius} exceeds cap {cap}"
        )));
    }
    if radius == 0 {
        return MetricGraph::from_edges(1, &[]);
    }
    let mut patch = Patch {
        adj: vec![Vec::new()],
        boundary: vec![0],
        p: p as usize,
        q: q as usize,
    };
    corona_zero(&mut patch)?;
    for _ in 0..radius {
        corona(&mut patch)?;
    }

    // cut out the ball: distances in the patch equal tessellation distances
    // out to `radius` because every closer vertex is complete
    let n = patch.adj.len();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::from([0u32]);
    dist[0] = 0;
    while let Some(u) = queue.pop_front() {
        for &v in &patch.adj[u as usize] {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut kept: Vec<u32> = (0..n as u32).filter(|&v| dist[v as usize] <= radius).collect();
    kept.sort_by_key(|&v| (dist[v as usize], v));
    let mut back = vec![u32::MAX; n];
    for (new, &old) in kept.iter().enumerate() {
        back[old as usize] = new as u32;
    }
    let mut edges = Vec::new();
    for &old in &kept {
        for &nb in &patch.adj[old as usize] {
            if old < nb && back[nb as usize] != u32::MAX {
                edges.push((back[old as usize], back[nb as usize]));
            }
        }
    }
    MetricGraph::from_edges(kept.len(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact girth by BFS from every vertex.
    fn girth(g: &MetricGraph) -> Option<u32> {
        let mut best: Option<u32> = None;
        let n = g.vertex_count();
        for src in 0..n as u32 {
            let mut dist = vec![u32::MAX; n];
            let mut parent = vec![u32::MAX; n];
            let mut queue = VecDeque::from([src]);
            dist[src as usize] = 0;
            while let Some(u) = queue.pop_front() {
                for &v in g.neighbors(u).unwrap() {
                    if dist[v as usize] == u32::MAX {
                        dist[v as usize] = dist[u as usize] + 1;
                        parent[v as usize] = u;
                        queue.push_back(v);
                    } else if parent[u as usize] != v {
                        let cycle = dist[u as usize] + dist[v as usize] + 1;
                        best = Some(best.map_or(cycle, |b| b.min(cycle)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn rejects_non_hyperbolic_parameters() {
        for (p, q) in [(4, 4), (3, 6), (6, 3), (2, 9), (9, 2)] {
            assert!(matches!(
                tiling_ball(p, q, 2, None),
                Err(Error::NotHyperbolicTiling { .. })
            ));
        }
        assert!(tiling_ball(7, 3, 20, None).is_err()); // beyond radius cap
    }

    #[test]
    fn tiny_balls_by_hand() {
        let g = tiling_ball(7, 3, 0, None).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));

        // degree-3 star at radius 1; the heptagons are far from closing
        let g = tiling_ball(7, 3, 1, None).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 3));

        // {3,7}: radius 1 is a wheel, 7 spokes + 7 rim edges
        let g = tiling_ball(3, 7, 1, None).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 14));

        let g = tiling_ball(4, 5, 1, None).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (6, 5));
    }

    #[test]
    fn interior_vertices_have_full_degree() {
        for (p, q, r) in [(7u32, 3u32, 4u32), (4, 5, 3), (3, 7, 3), (5, 4, 3)] {
            let g = tiling_ball(p, q, r, None).unwrap();
            let dist = g.bfs_distances(0).unwrap();
            for v in 0..g.vertex_count() as u32 {
                if dist[v as usize] < r {
                    assert_eq!(
                        g.neighbors(v).unwrap().len(),
                        q as usize,
                        "interior vertex {v} of ({p},{q}) radius {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn girth_matches_face_size() {
        // once a whole face fits in the ball the girth is exactly p
        assert_eq!(girth(&tiling_ball(7, 3, 3, None).unwrap()), Some(7));
        assert_eq!(girth(&tiling_ball(4, 5, 2, None).unwrap()), Some(4));
        assert_eq!(girth(&tiling_ball(3, 7, 1, None).unwrap()), Some(3));
        assert_eq!(girth(&tiling_ball(5, 4, 3, None).unwrap()), Some(5));
        // radius-1 {7,3} ball is a tree
        assert_eq!(girth(&tiling_ball(7, 3, 2, None).unwrap()), None);
    }

    #[test]
    fn deterministic_rebuild() {
        let a = tiling_ball(4, 5, 3, None).unwrap();
        let b = tiling_ball(4, 5, 3, None).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.edges(), b.edges());
    }
}
