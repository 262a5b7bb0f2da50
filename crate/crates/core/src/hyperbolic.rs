//! Projections, quasiconvexity, and quasigeodesic audits on hyperbolic graphs.
//!
//! Each operation measures a quantity the coarse-geometry toolbox asserts is
//! bounded (projection displacement, Gromov products along quasigeodesics,
//! perpendicular-union thickness, avoiding-path growth) and reports the
//! measured value next to a budget instead of silently passing. Budgets
//! default to empirically calibrated formulas in the measured delta; callers
//! can override any of them. All arithmetic is exact except the divergence
//! log-slope, which only feeds a flag.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GeodesicSegment, Half, MetricGraph};
use crate::report::AuditRow;

type Rat = Ratio<i64>;

/// Multiplicative/additive distortion pair of a quasi-isometric embedding:
/// `(1/K) d(x,y) - eps <= d(f(x), f(y)) <= K d(x,y) + eps`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QIEstimate {
    pub k: Rat,
    pub epsilon: Rat,
}

impl QIEstimate {
    pub fn new(k: Rat, epsilon: Rat) -> Result<Self> {
        if k < Rat::from_integer(1) {
            return Err(Error::ConstantsNegative(format!("K = {k} < 1")));
        }
        if epsilon < Rat::from_integer(0) {
            return Err(Error::ConstantsNegative(format!("epsilon = {epsilon} < 0")));
        }
        Ok(QIEstimate { k, epsilon })
    }

    pub fn geodesic() -> Self {
        QIEstimate { k: Rat::from_integer(1), epsilon: Rat::from_integer(0) }
    }

    pub fn render(&self) -> String {
        format!("K={};eps={}", self.k, self.epsilon)
    }
}

/// Position of the earliest nearest point of `mu` to `x`, with its distance.
fn project_to_positions(dist_from_x: &[u32], mu: &GeodesicSegment) -> (usize, u32) {
    let mut best = (0usize, u32::MAX);
    for (pos, &v) in mu.vertices().iter().enumerate() {
        let d = dist_from_x[v as usize];
        if d < best.1 {
            best = (pos, d);
        }
    }
    best
}

/// Vertex of `mu` nearest to `x`; ties resolve to the earliest position.
pub fn nearest_point_projection(g: &MetricGraph, x: u32, mu: &GeodesicSegment) -> Result<u32> {
    mu.check_graph(g)?;
    let dist = g.bfs_distances(x)?;
    let (pos, _) = project_to_positions(&dist, mu);
    Ok(mu.vertices()[pos])
}

/// How far apart adjacent vertices can land under projection to `mu`.
#[derive(Clone, Debug)]
pub struct ProjectionLipschitzReport {
    pub max_jump: u32,
    pub witness: (u32, u32),
    /// `4 delta + 1`; an integer because delta is a half-integer.
    pub bound: i64,
    pub delta_used: Half,
    pub pass: bool,
}

impl ProjectionLipschitzReport {
    pub fn audit_row(&self, input_digest: &str) -> AuditRow {
        AuditRow::new(
            "projection_lipschitz",
            input_digest,
            self.max_jump.to_string(),
            self.bound.to_string(),
            self.pass,
        )
    }
}

/// Projects every vertex to `mu` and scans all edges for the largest
/// displacement between the projections of the endpoints.
pub fn projection_lipschitz_audit(
    g: &MetricGraph,
    mu: &GeodesicSegment,
    delta: Half,
) -> Result<ProjectionLipschitzReport> {
    mu.check_graph(g)?;
    let n = g.vertex_count();
    // one BFS per segment vertex, then argmin over positions per graph vertex
    let rows: Vec<Vec<u32>> =
        mu.vertices().iter().map(|&v| g.bfs_distances(v)).collect::<Result<_>>()?;
    let mut proj_pos = vec![0usize; n];
    for v in 0..n {
        let mut best = (0usize, u32::MAX);
        for (pos, row) in rows.iter().enumerate() {
            if row[v] < best.1 {
                best = (pos, row[v]);
            }
        }
        proj_pos[v] = best.0;
    }
    let mut max_jump = 0u32;
    let mut witness = (0u32, 0u32);
    for (u, v) in g.edges() {
        // both projections lie on a geodesic, so their distance is the
        // position difference
        let jump = proj_pos[u as usize].abs_diff(proj_pos[v as usize]) as u32;
        if jump > max_jump {
            max_jump = jump;
            witness = (u, v);
        }
    }
    let bound = delta.scale_add(4, 1);
    debug_assert!(bound.is_integer());
    Ok(ProjectionLipschitzReport {
        max_jump,
        witness,
        bound: bound.twice() / 2,
        delta_used: delta,
        pass: i64::from(max_jump) <= bound.twice() / 2,
    })
}

/// Least k such that canonical geodesics between members of `s` stay within
/// distance k of `s`.
pub fn quasiconvexity_constant(g: &MetricGraph, s: &[u32]) -> Result<u32> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let dist_s = multi_source_distances(g, s)?;
    let mut k = 0u32;
    for &a in s {
        for &b in s {
            if a == b {
                continue;
            }
            for &v in g.geodesic(a, b)?.vertices() {
                k = k.max(dist_s[v as usize]);
            }
        }
    }
    Ok(k)
}

pub(crate) const EXHAUSTIVE_VERTEX_CAP: usize = 64;

/// Like [`quasiconvexity_constant`] but over vertices of *every* geodesic
/// (those v with d(a,v) + d(v,b) = d(a,b)), not just the canonical one.
/// Exponentially many geodesics collapse to one linear sweep per pair, but the
/// all-pairs distance table still caps the graph size.
pub fn quasiconvexity_constant_exhaustive(g: &MetricGraph, s: &[u32]) -> Result<u32> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = g.vertex_count();
    if n > EXHAUSTIVE_VERTEX_CAP {
        return Err(Error::GraphTooLarge { vertices: n, cap: EXHAUSTIVE_VERTEX_CAP });
    }
    let rows: Vec<Vec<u32>> =
        (0..n as u32).map(|v| g.bfs_distances(v)).collect::<Result<_>>()?;
    let dist_s = multi_source_distances(g, s)?;
    let mut k = 0u32;
    for (i, &a) in s.iter().enumerate() {
        for &b in &s[i + 1..] {
            let d_ab = rows[a as usize][b as usize];
            for v in 0..n {
                if rows[a as usize][v] + rows[b as usize][v] == d_ab {
                    k = k.max(dist_s[v]);
                }
            }
        }
    }
    Ok(k)
}

fn multi_source_distances(g: &MetricGraph, sources: &[u32]) -> Result<Vec<u32>> {
    g.multi_source_distances(sources)
}

/// Fits the grid-minimal (K, eps) making every (domain, image) distance pair
/// satisfy `(1/K) d_dom - eps <= d_img <= K d_dom + eps`: K runs over quarter
/// steps 1..=16 and eps over nonnegative integers. Returns the smallest K
/// whose eps fits under `eps_cap`, or the fit at K = 16 if none does.
pub(crate) fn fit_qi_grid(pairs: &[(i64, i64)], eps_cap: i64) -> QIEstimate {
    let mut fallback = QIEstimate::geodesic();
    for quarters in 4..=64i64 {
        let k = Rat::new(quarters, 4);
        let mut eps_needed = 0i64;
        for &(d_dom, d_img) in pairs {
            let lower = (Rat::from_integer(d_dom) / k - Rat::from_integer(d_img))
                .ceil()
                .to_integer();
            let upper = (Rat::from_integer(d_img) - Rat::from_integer(d_dom) * k)
                .ceil()
                .to_integer();
            eps_needed = eps_needed.max(lower).max(upper);
        }
        let estimate = QIEstimate {
            k,
            epsilon: Rat::from_integer(eps_needed.max(0)),
        };
        if eps_needed <= eps_cap {
            return estimate;
        }
        fallback = estimate;
    }
    fallback
}

/// Fits the smallest (K, eps) on the search grid (K in quarter steps up to 16,
/// eps a nonnegative integer) for which `path` is a (K, eps)-quasigeodesic.
/// Unit-speed paths always satisfy the upper bound, so only the lower bound
/// binds. Prefers the smallest K whose eps does not exceed the graph diameter;
/// if none qualifies the fit at K = 16 is returned as-is.
pub fn quasigeodesic_params(g: &MetricGraph, path: &[u32]) -> Result<QIEstimate> {
    let n = g.vertex_count();
    for &v in path {
        if v as usize >= n {
            return Err(Error::UnknownVertex(v, n));
        }
    }
    for pair in path.windows(2) {
        if !g.neighbors(pair[0])?.contains(&pair[1]) {
            return Err(Error::NotAPath(pair[0], pair[1]));
        }
    }
    if path.len() <= 1 {
        return Ok(QIEstimate::geodesic());
    }
    let mut rows: HashMap<u32, Vec<u32>> = HashMap::new();
    for &v in path {
        if !rows.contains_key(&v) {
            rows.insert(v, g.bfs_distances(v)?);
        }
    }
    let mut pairs = Vec::with_capacity(path.len() * (path.len() - 1) / 2);
    for i in 0..path.len() {
        for j in (i + 1)..path.len() {
            pairs.push(((j - i) as i64, i64::from(rows[&path[i]][path[j] as usize])));
        }
    }
    let eps_cap = i64::from(g.diameter(None)?);
    Ok(fit_qi_grid(&pairs, eps_cap))
}

/// Budget for the projection-concatenation check.
#[derive(Clone, Copy, Debug)]
pub struct ConcatBudget {
    pub k_max: Rat,
    pub eps_max: Rat,
}

/// Empirical default: K <= 3 and eps <= 8 delta + 2.
pub fn default_concat_budget(delta: Half) -> ConcatBudget {
    ConcatBudget { k_max: Rat::from_integer(3), eps_max: delta.scale_add(8, 2).into() }
}

#[derive(Clone, Debug)]
pub struct ConcatReport {
    pub estimate: QIEstimate,
    pub k_budget: Rat,
    pub eps_budget: Rat,
    pub path: Vec<u32>,
    pub pass: bool,
}

impl ConcatReport {
    pub fn audit_row(&self, input_digest: &str) -> AuditRow {
        AuditRow::new(
            "concat_projection",
            input_digest,
            self.estimate.render(),
            format!("K={};eps={}", self.k_budget, self.eps_budget),
            self.pass,
        )
    }
}

/// Concatenates the geodesic from `x` to its projection y on `mu` with the
/// stretch of `mu` from y to position `z_index`, then fits quasigeodesic
/// parameters to the result.
pub fn concat_projection_check(
    g: &MetricGraph,
    x: u32,
    mu: &GeodesicSegment,
    z_index: usize,
    delta: Half,
    budget: Option<ConcatBudget>,
) -> Result<ConcatReport> {
    mu.check_graph(g)?;
    if z_index >= mu.vertices().len() {
        return Err(Error::PreconditionViolated(format!(
            "z_index {z_index} exceeds last position {}",
            mu.vertices().len() - 1
        )));
    }
    let dist = g.bfs_distances(x)?;
    let (y_pos, _) = project_to_positions(&dist, mu);
    let mut path = g.geodesic(x, mu.vertices()[y_pos])?.vertices().to_vec();
    // walk along mu from the projection to the target position
    if y_pos <= z_index {
        path.extend(&mu.vertices()[y_pos + 1..=z_index]);
    } else {
        path.extend(mu.vertices()[z_index..y_pos].iter().rev());
    }
    let estimate = quasigeodesic_params(g, &path)?;
    let budget = budget.unwrap_or_else(|| default_concat_budget(delta));
    Ok(ConcatReport {
        estimate,
        k_budget: budget.k_max,
        eps_budget: budget.eps_max,
        pass: estimate.k <= budget.k_max && estimate.epsilon <= budget.eps_max,
        path,
    })
}

/// Empirical default for the Gromov-product budget along a (K, eps)
/// quasigeodesic: K eps / 2 + 4 delta + 1.
pub fn default_inner_product_budget(params: &QIEstimate, delta: Half) -> Rat {
    params.k * params.epsilon / Rat::from_integer(2) + Rat::from(delta.scale_add(4, 1))
}

#[derive(Clone, Debug)]
pub struct InnerProductReport {
    pub value: Half,
    pub params: QIEstimate,
    pub budget: Rat,
    pub pass: bool,
}

impl InnerProductReport {
    pub fn audit_row(&self, input_digest: &str) -> AuditRow {
        AuditRow::new(
            "inner_product_bound",
            input_digest,
            self.value.to_string(),
            self.budget.to_string(),
            self.pass,
        )
    }
}

/// Gromov product (path[p], path[r]) based at path[q] for quasigeodesic
/// `path`; small values witness that quasigeodesics do not backtrack far.
pub fn inner_product_bound_audit(
    g: &MetricGraph,
    path: &[u32],
    p: usize,
    q: usize,
    r: usize,
    delta: Half,
    budget: Option<Rat>,
) -> Result<InnerProductReport> {
    if p >= q {
        return Err(Error::OutOfOrder(p, q));
    }
    if q >= r {
        return Err(Error::OutOfOrder(q, r));
    }
    if r >= path.len() {
        return Err(Error::PreconditionViolated(format!(
            "position {r} exceeds last path index {}",
            path.len() - 1
        )));
    }
    let params = quasigeodesic_params(g, path)?;
    let value = g.gromov_product(path[p], path[r], path[q])?;
    let budget = budget.unwrap_or_else(|| default_inner_product_budget(&params, delta));
    Ok(InnerProductReport { value, params, budget, pass: Rat::from(value) <= budget })
}

/// Empirical default for the projection-compatibility budget: 1 for the
/// identity (tie-breaks may differ by one step), (K+1)(eps + 4 delta + 2)
/// otherwise.
pub fn default_compat_budget(params: &QIEstimate, delta: Half, identity: bool) -> Rat {
    if identity {
        Rat::from_integer(1)
    } else {
        (params.k + Rat::from_integer(1))
            * (params.epsilon + Rat::from(delta.scale_add(4, 2)))
    }
}

#[derive(Clone, Debug)]
pub struct CompatReport {
    pub max_moved: u32,
    pub witness: u32,
    pub budget: Rat,
    pub pass: bool,
}

impl CompatReport {
    pub fn audit_row(&self, input_digest: &str) -> AuditRow {
        AuditRow::new(
            "projection_compat",
            input_digest,
            self.max_moved.to_string(),
            self.budget.to_string(),
            self.pass,
        )
    }
}

/// Measures how far "project, then map" lands from "map, then project":
/// for each sample p, compares the projection of phi(p) to the image segment
/// geodesic(phi(a), phi(b)) against phi of the projection of p to `mu1`.
pub fn projection_compat_audit(
    g: &MetricGraph,
    phi: &[u32],
    phi_params: &QIEstimate,
    mu1: &GeodesicSegment,
    sample: &[u32],
    delta: Half,
    budget: Option<Rat>,
) -> Result<CompatReport> {
    mu1.check_graph(g)?;
    let n = g.vertex_count();
    if phi.len() != n {
        return Err(Error::MapNotDefinedOnVertex(phi.len() as u32));
    }
    if let Some(&bad) = phi.iter().find(|&&t| t as usize >= n) {
        return Err(Error::MapNotDefinedOnVertex(bad));
    }
    let mu2 = g.geodesic(phi[mu1.start() as usize], phi[mu1.end() as usize])?;
    let identity = phi.iter().enumerate().all(|(i, &t)| i as u32 == t);
    let budget =
        budget.unwrap_or_else(|| default_compat_budget(phi_params, delta, identity));
    let mut max_moved = 0u32;
    let mut witness = 0u32;
    for &p in sample {
        if p as usize >= n {
            return Err(Error::UnknownVertex(p, n));
        }
        let q = nearest_point_projection(g, p, mu1)?;
        let r = nearest_point_projection(g, phi[p as usize], &mu2)?;
        let moved = g.distance(r, phi[q as usize])?;
        if moved > max_moved {
            max_moved = moved;
            witness = p;
        }
    }
    Ok(CompatReport {
        max_moved,
        witness,
        budget,
        pass: Rat::from_integer(i64::from(max_moved)) <= budget,
    })
}

/// Calibrated thickness of perpendicular-geodesic unions: for admissible
/// quadruples (a,b,c,d), where b is the projection foot of a on [b,c], c the
/// foot of d, and d(b,c) at least the threshold, the union [a,b] u [b,c] u
/// [c,d] stays in the C1-neighborhood of geodesic(a,d).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PerpsConstants {
    pub d_threshold: u32,
    pub c1: u32,
    pub delta_used: Half,
}

#[derive(Clone, Copy, Debug)]
pub struct CalibrationOptions {
    /// Graphs up to this many vertices get the full quadruple scan.
    pub exhaustive_cap: usize,
    /// Number of (b,c) pairs sampled above the cap.
    pub pair_sample: usize,
    /// Cap on admissible a (and d) values kept per sampled pair.
    pub ad_cap: usize,
    pub seed: u64,
    /// Upper limit of the doubling threshold search.
    pub d_cap: u32,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            exhaustive_cap: EXHAUSTIVE_VERTEX_CAP,
            pair_sample: 160,
            ad_cap: 24,
            seed: 0,
            d_cap: 64,
        }
    }
}

const SAMPLED_VERTEX_CAP: usize = 4096;

pub fn calibrate_perps(g: &MetricGraph, delta: Half) -> Result<PerpsConstants> {
    calibrate_perps_with(g, delta, CalibrationOptions::default())
}

pub fn calibrate_perps_with(
    g: &MetricGraph,
    delta: Half,
    opts: CalibrationOptions,
) -> Result<PerpsConstants> {
    let n = g.vertex_count();
    if n < 2 {
        return Ok(PerpsConstants { d_threshold: 1, c1: 0, delta_used: delta });
    }
    if n > SAMPLED_VERTEX_CAP {
        return Err(Error::GraphTooLarge { vertices: n, cap: SAMPLED_VERTEX_CAP });
    }
    let exhaustive = n <= opts.exhaustive_cap;
    let pairs: Vec<(u32, u32)> = if exhaustive {
        let mut v = Vec::with_capacity(n * n - n);
        for b in 0..n as u32 {
            for c in 0..n as u32 {
                if b != c {
                    v.push((b, c));
                }
            }
        }
        v
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.pair_sample)
            .map(|_| loop {
                let b = rng.gen_range(0..n as u32);
                let c = rng.gen_range(0..n as u32);
                if b != c {
                    break (b, c);
                }
            })
            .collect()
    };

    // max union-thickness bucketed by d(b,c); C1(D) is then a suffix max
    let mut row_cache: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut geod_dist_cache: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    let mut by_len: Vec<u32> = Vec::new();
    let mut any_quadruple = false;
    for (b, c) in pairs {
        let gamma = g.geodesic(b, c)?;
        let to_gamma = multi_source_distances(g, gamma.vertices())?;
        if !row_cache.contains_key(&b) {
            row_cache.insert(b, g.bfs_distances(b)?);
        }
        if !row_cache.contains_key(&c) {
            row_cache.insert(c, g.bfs_distances(c)?);
        }
        let row_b = &row_cache[&b];
        let row_c = &row_cache[&c];
        let mut a_side: Vec<u32> =
            (0..n as u32).filter(|&a| to_gamma[a as usize] == row_b[a as usize]).collect();
        let mut d_side: Vec<u32> =
            (0..n as u32).filter(|&d| to_gamma[d as usize] == row_c[d as usize]).collect();
        if !exhaustive {
            a_side.truncate(opts.ad_cap);
            d_side.truncate(opts.ad_cap);
        }
        let len_bc = row_b[c as usize];
        if by_len.len() <= len_bc as usize {
            by_len.resize(len_bc as usize + 1, 0);
        }
        for &a in &a_side {
            let leg_a = g.geodesic(a, b)?;
            for &d in &d_side {
                any_quadruple = true;
                let key = (a, d);
                if !geod_dist_cache.contains_key(&key) {
                    let ad = g.geodesic(a, d)?;
                    geod_dist_cache
                        .insert(key, multi_source_distances(g, ad.vertices())?);
                }
                let to_ad = &geod_dist_cache[&key];
                let mut m = 0u32;
                for &u in leg_a.vertices() {
                    m = m.max(to_ad[u as usize]);
                }
                for &u in gamma.vertices() {
                    m = m.max(to_ad[u as usize]);
                }
                for &u in g.geodesic(c, d)?.vertices() {
                    m = m.max(to_ad[u as usize]);
                }
                by_len[len_bc as usize] = by_len[len_bc as usize].max(m);
            }
        }
    }
    if !any_quadruple {
        return Err(Error::CalibrationFailed(String::from("no admissible quadruples")));
    }
    // suffix maxima: c1_at[d] = max thickness over quadruples with d(b,c) >= d
    let mut c1_at = by_len.clone();
    for i in (0..c1_at.len().saturating_sub(1)).rev() {
        c1_at[i] = c1_at[i].max(c1_at[i + 1]);
    }
    let value_at = |d: u32| -> Option<u32> {
        // None once no quadruple reaches the threshold
        if (d as usize) < c1_at.len() {
            Some(c1_at[d as usize])
        } else {
            None
        }
    };
    let mut d = 1u32;
    while d <= opts.d_cap {
        match (value_at(d), value_at(2 * d)) {
            (Some(v1), Some(v2)) if v1 == v2 => {
                return Ok(PerpsConstants { d_threshold: d, c1: v1, delta_used: delta });
            }
            (Some(_), _) => d *= 2,
            (None, _) => break,
        }
    }
    Err(Error::CalibrationFailed(format!(
        "thickness kept changing up to threshold {d} (graph {})",
        g.digest()
    )))
}

const DIVERGENCE_SLOPE_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergenceVerdict {
    /// log-length grows along the profile faster than the threshold slope
    Exponential,
    /// finite avoiding paths exist but their lengths stay flat
    Flat,
    /// fewer than two finite entries; the obstacle separates x from w
    Disconnected,
}

#[derive(Clone, Debug)]
pub struct DivergenceProfile {
    /// (threshold D, length of the shortest x-w path avoiding the
    /// D-neighborhood of geodesic(y,z)); None when no such path exists
    pub rows: Vec<(u32, Option<u32>)>,
    pub log_slope: f64,
    pub slope_threshold: f64,
    pub verdict: DivergenceVerdict,
}

impl DivergenceProfile {
    pub fn audit_row(&self, input_digest: &str) -> AuditRow {
        AuditRow::new(
            "divergence_slope",
            input_digest,
            format!("{:.6}", self.log_slope),
            format!("{:.6}", self.slope_threshold),
            self.verdict == DivergenceVerdict::Exponential,
        )
    }
}

/// Shortest-path lengths from x to w that avoid growing neighborhoods of the
/// geodesic [y,z]; exponential growth in the threshold is hyperbolic
/// behaviour, flat growth (cycles, grids) is not.
///
/// Preconditions keep the configuration genuinely crossing: both Gromov
/// products (x,z)_y and (y,w)_z must be at most `a0`, and d(y,z) must be at
/// least `b_min` (default 4).
pub fn divergence_profile(
    g: &MetricGraph,
    x: u32,
    y: u32,
    z: u32,
    w: u32,
    a0: i64,
    b_min: Option<u32>,
) -> Result<DivergenceProfile> {
    let b_min = b_min.unwrap_or(4);
    let prod_xy = g.gromov_product(x, z, y)?;
    if prod_xy > Half::from_int(a0) {
        return Err(Error::PreconditionViolated(format!(
            "(x,z)_y = {prod_xy} exceeds A0 = {a0}"
        )));
    }
    let prod_zw = g.gromov_product(y, w, z)?;
    if prod_zw > Half::from_int(a0) {
        return Err(Error::PreconditionViolated(format!(
            "(y,w)_z = {prod_zw} exceeds A0 = {a0}"
        )));
    }
    if g.distance(y, z)? < b_min {
        return Err(Error::PreconditionViolated(format!(
            "d(y,z) = {} below the minimum {b_min}",
            g.distance(y, z)?
        )));
    }
    let gamma = g.geodesic(y, z)?;
    let to_gamma = multi_source_distances(g, gamma.vertices())?;
    let cap = to_gamma[x as usize].min(to_gamma[w as usize]);
    if cap == 0 {
        return Err(Error::PreconditionViolated(String::from(
            "x or w lies on the geodesic [y,z]",
        )));
    }
    let mut rows = Vec::new();
    for d_thresh in 0..cap {
        rows.push((d_thresh, avoiding_path_length(g, x, w, &to_gamma, d_thresh)?));
    }
    let finite: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|&(d, len)| len.map(|l| (f64::from(d), f64::from(l).ln())))
        .collect();
    let (log_slope, verdict) = if finite.len() < 2 {
        (0.0, DivergenceVerdict::Disconnected)
    } else {
        let slope = least_squares_slope(&finite);
        if slope > DIVERGENCE_SLOPE_THRESHOLD {
            (slope, DivergenceVerdict::Exponential)
        } else {
            (slope, DivergenceVerdict::Flat)
        }
    };
    Ok(DivergenceProfile {
        rows,
        log_slope,
        slope_threshold: DIVERGENCE_SLOPE_THRESHOLD,
        verdict,
    })
}

fn avoiding_path_length(
    g: &MetricGraph,
    x: u32,
    w: u32,
    to_gamma: &[u32],
    d_thresh: u32,
) -> Result<Option<u32>> {
    use std::collections::VecDeque;
    let n = g.vertex_count();
    let allowed = |v: u32| to_gamma[v as usize] > d_thresh;
    if !allowed(x) || !allowed(w) {
        return Ok(None);
    }
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::from([x]);
    dist[x as usize] = 0;
    while let Some(u) = queue.pop_front() {
        if u == w {
            return Ok(Some(dist[u as usize]));
        }
        for &v in g.neighbors(u)? {
            if allowed(v) && dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok(None)
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
