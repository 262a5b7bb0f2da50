//! Geometric cross-check of the combinatorial tiling generator.
//!
//! The {p,q} tessellation is rebuilt from scratch in the hyperboloid model
//! (x^2 + y^2 - z^2 = -1): vertices carry orthonormal frames, neighbours are
//! reached by rotating and translating along geodesics by the exact edge
//! length cosh(l/2) = cos(pi/p)/sin(pi/q), and coincident points are merged by
//! quantised Poincare-disk coordinates. Breadth-first layer sizes and the
//! per-layer-pair edge counts must match the combinatorial patch generator
//! exactly; any drift in either construction breaks the comparison.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::f64::consts::PI;

use treespace::groups::tiling::tiling_ball;

type Mat = [[f64; 3]; 3];

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn rot(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn boost_x(d: f64) -> Mat {
    let (sh, ch) = (d.sinh(), d.cosh());
    [[ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, ch]]
}

fn base_point(m: &Mat) -> [f64; 3] {
    [m[0][2], m[1][2], m[2][2]]
}

/// Minkowski pairing; two hyperboloid points coincide iff this equals -1.
fn mink(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    p[0] * q[0] + p[1] * q[1] - p[2] * q[2]
}

struct Dedup {
    cells: HashMap<(i64, i64), Vec<u32>>,
    points: Vec<[f64; 3]>,
}

const CELL: f64 = 1e-4;
const SAME: f64 = 1e-6;

impl Dedup {
    fn new() -> Self {
        Dedup { cells: HashMap::new(), points: Vec::new() }
    }

    /// Returns (id, freshly_inserted).
    fn intern(&mut self, p: [f64; 3]) -> (u32, bool) {
        let u = p[0] / (1.0 + p[2]);
        let v = p[1] / (1.0 + p[2]);
        let (cu, cv) = ((u / CELL).floor() as i64, (v / CELL).floor() as i64);
        for du in -1..=1 {
            for dv in -1..=1 {
                if let Some(ids) = self.cells.get(&(cu + du, cv + dv)) {
                    for &id in ids {
                        if (mink(&p, &self.points[id as usize]) + 1.0).abs() < SAME {
                            return (id, false);
                        }
                    }
                }
            }
        }
        let id = self.points.len() as u32;
        self.points.push(p);
        self.cells.entry((cu, cv)).or_default().push(id);
        (id, true)
    }
}

struct GeometricBall {
    dist: Vec<u32>,
    edges: BTreeSet<(u32, u32)>,
}

fn geometric_ball(p: u32, q: u32, radius: u32) -> GeometricBall {
    let edge_len = 2.0 * ((PI / p as f64).cos() / (PI / q as f64).sin()).acosh();
    assert!(edge_len.is_finite() && edge_len > 0.0, "({p},{q}) is not hyperbolic");
    let mut dedup = Dedup::new();
    let base: Mat = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let (root, _) = dedup.intern(base_point(&base));
    let mut frames: Vec<Mat> = vec![base];
    let mut dist: Vec<u32> = vec![0];
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut queue = VecDeque::from([root]);
    while let Some(id) = queue.pop_front() {
        if dist[id as usize] > radius {
            continue;
        }
        let frame = frames[id as usize];
        for j in 0..q {
            let step = mul(
                &mul(&frame, &rot(2.0 * PI * j as f64 / q as f64)),
                &mul(&boost_x(edge_len), &rot(PI)),
            );
            let (nid, fresh) = dedup.intern(base_point(&step));
            if fresh {
                frames.push(step);
                dist.push(dist[id as usize] + 1);
                if dist[id as usize] < radius {
                    queue.push_back(nid);
                }
            }
            if dist[id as usize] <= radius && dist[nid as usize] <= radius {
                edges.insert((id.min(nid), id.max(nid)));
            }
        }
    }
    // ids are assigned in breadth-first order, so the out-of-ball vertices
    // discovered while expanding the last layer form a suffix
    let keep = dist.iter().take_while(|&&d| d <= radius).count();
    dist.truncate(keep);
    GeometricBall { dist, edges }
}

fn layer_profile(dist: &[u32]) -> Vec<usize> {
    let top = *dist.iter().max().unwrap();
    let mut out = vec![0usize; top as usize + 1];
    for &d in dist {
        out[d as usize] += 1;
    }
    out
}

fn edge_profile(dist: &[u32], edges: &BTreeSet<(u32, u32)>) -> BTreeMap<(u32, u32), usize> {
    let mut out = BTreeMap::new();
    for &(u, v) in edges {
        let (a, b) = (dist[u as usize], dist[v as usize]);
        *out.entry((a.min(b), a.max(b))).or_insert(0) += 1;
    }
    out
}

#[test]
fn combinatorial_balls_match_hyperboloid_geometry() {
    for (p, q, radius) in [(7u32, 3u32, 4u32), (4, 5, 3), (3, 7, 3), (5, 4, 3), (8, 3, 3)] {
        let comb = tiling_ball(p, q, radius, None).unwrap();
        let comb_dist = comb.bfs_distances(0).unwrap();
        let comb_edges: BTreeSet<(u32, u32)> = comb.edges().into_iter().collect();
        let geo = geometric_ball(p, q, radius);
        assert_eq!(
            layer_profile(&comb_dist),
            layer_profile(&geo.dist),
            "layer sizes differ for ({p},{q}) radius {radius}"
        );
        assert_eq!(
            edge_profile(&comb_dist, &comb_edges),
            edge_profile(&geo.dist, &geo.edges),
            "edge layer profile differs for ({p},{q}) radius {radius}"
        );
        println!("({p},{q}) radius {radius}: layers {:?}", layer_profile(&comb_dist));
    }
}
