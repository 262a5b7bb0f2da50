//! Boundary-behaviour surrogates at finite scale: the properness modulus of
//! the root-space embedding, the depth profile of endpoint geodesics, and
//! the lower-bound identity tying the two together through the ladder
//! constants.
//!
//! The profile answers, per tangency radius N: how deep back toward the
//! basepoint can a total-space geodesic dip when its endpoints come from a
//! segment that stays N away from the basepoint in its own space? Growing
//! answers are the finite shadow of a well-defined boundary extension.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{GeodesicSegment, MetricGraph};
use crate::hyperbolic::EXHAUSTIVE_VERTEX_CAP;
use crate::report::{Digester, ReportRow};
use crate::tree::{TotalSpace, TreeOfSpaces};

type Rat = Ratio<i64>;

/// Stable digest of a segment's vertex list; the provenance tag every
/// profile row and ladder dump carries for the same lambda.
pub fn lambda_digest(seg: &GeodesicSegment) -> String {
    let mut dig = Digester::new();
    dig.update(b"lambda");
    for &v in seg.vertices() {
        dig.update_u64(u64::from(v));
    }
    dig.finish()
}

/// f(N): how far from the embedded basepoint the embedding pushes everything
/// that is at least N away in the vertex space. N values with no witness
/// (beyond the space's reach from x0) are listed as skipped, not rows.
#[derive(Clone, Debug)]
pub struct PropernessTable {
    pub space_vertex: u32,
    pub basepoint: u32,
    pub rows: Vec<(u32, u32)>,
    pub skipped: Vec<u32>,
}

impl PropernessTable {
    pub fn lookup(&self, n: u32) -> Option<u32> {
        self.rows
            .iter()
            .find(|&&(row_n, _)| row_n == n)
            .map(|&(_, f)| f)
    }

    pub fn report_rows(&self) -> Vec<ReportRow> {
        let mut out: Vec<ReportRow> = self
            .rows
            .iter()
            .map(|&(n, f)| ReportRow::new(format!("f({n})"), f.to_string(), ""))
            .collect();
        for &n in &self.skipped {
            out.push(ReportRow::new(
                format!("f({n})"),
                "-",
                "beyond space reach",
            ));
        }
        out
    }
}

pub fn properness_modulus(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    v0: u32,
    x0: u32,
    n_values: &[u32],
) -> Result<PropernessTable> {
    let space = tos
        .vertex_spaces
        .get(v0 as usize)
        .ok_or(Error::UnknownVertex(v0, tos.vertex_spaces.len()))?;
    let inner = space.bfs_distances(x0)?;
    let basepoint = total.lift(v0, x0)?;
    let outer = total.graph.bfs_distances(basepoint)?;
    let mut sorted = n_values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for n in sorted {
        let f = (0..space.vertex_count() as u32)
            .filter(|&y| inner[y as usize] >= n)
            .map(|y| outer[total.lift(v0, y).expect("vertex in range") as usize])
            .min();
        match f {
            Some(f) => rows.push((n, f)),
            None => skipped.push(n),
        }
    }
    Ok(PropernessTable { space_vertex: v0, basepoint, rows, skipped })
}

/// Which geodesics between the embedded endpoints a profile row minimized
/// over: the canonical one, or every geodesic (small graphs only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeodesicMode {
    Canonical,
    Exhaustive,
}

impl GeodesicMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GeodesicMode::Canonical => "canonical",
            GeodesicMode::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CTRow {
    pub n: u32,
    pub f_of_n: u32,
    pub m_of_n: u32,
    pub mode: GeodesicMode,
    pub lambda_digest: String,
}

/// Per-N worst case over the family: the shallowest depth a geodesic between
/// embedded endpoints reaches, grouped by tangency radius, keeping the
/// minimum.
#[derive(Clone, Debug)]
pub struct CTProfile {
    pub basepoint: u32,
    pub rows: Vec<CTRow>,
}

impl CTProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,f,M,mode,lambda_digest\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                r.f_of_n,
                r.m_of_n,
                r.mode.as_str(),
                r.lambda_digest
            );
        }
        out
    }
}

pub fn mn_profile(
    tos: &TreeOfSpaces,
    total: &TotalSpace,
    x0: u32,
    family: &[GeodesicSegment],
    mode: GeodesicMode,
) -> Result<CTProfile> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if mode == GeodesicMode::Exhaustive && total.graph.vertex_count() > EXHAUSTIVE_VERTEX_CAP {
        return Err(Error::GraphTooLarge {
            vertices: total.graph.vertex_count(),
            cap: EXHAUSTIVE_VERTEX_CAP,
        });
    }
    let root = tos.tree.root();
    let space = &tos.vertex_spaces[root as usize];
    let inner = space.bfs_distances(x0)?;
    let basepoint = total.lift(root, x0)?;
    let outer = total.graph.bfs_distances(basepoint)?;
    // per N keep the worst (minimal) M; earliest lambda wins ties
    let mut grouped: BTreeMap<u32, (u32, String)> = BTreeMap::new();
    for lam in family {
        lam.check_graph(space)?;
        let n = lam
            .vertices()
            .iter()
            .map(|&v| inner[v as usize])
            .min()
            .expect("segment is nonempty");
        let ia = total.lift(root, lam.start())?;
        let ib = total.lift(root, lam.end())?;
        let m = match mode {
            GeodesicMode::Canonical => total
                .graph
                .geodesic(ia, ib)?
                .vertices()
                .iter()
                .map(|&v| outer[v as usize])
                .min()
                .expect("segment is nonempty"),
            GeodesicMode::Exhaustive => {
                let da = total.graph.bfs_distances(ia)?;
                let db = total.graph.bfs_distances(ib)?;
                let dab = da[ib as usize];
                (0..total.graph.vertex_count() as u32)
                    .filter(|&v| da[v as usize] + db[v as usize] == dab)
                    .map(|v| outer[v as usize])
                    .min()
                    .expect("endpoints lie on a geodesic")
            }
        };
        let entry = grouped.entry(n).or_insert_with(|| (m, lambda_digest(lam)));
        if m < entry.0 {
            *entry = (m, lambda_digest(lam));
        }
    }
    let ns: Vec<u32> = grouped.keys().copied().collect();
    let f_table = properness_modulus(tos, total, root, x0, &ns)?;
    let mut rows = Vec::with_capacity(grouped.len());
    for (n, (m, digest)) in grouped {
        let f = f_table.lookup(n).ok_or_else(|| {
            Error::PreconditionViolated(format!("no properness row for N = {n}"))
        })?;
        rows.push(CTRow { n, f_of_n: f, m_of_n: m, mode, lambda_digest: digest });
    }
    Ok(CTProfile { basepoint, rows })
}

/// Outcome of the lower-bound identity check: every row must clear
/// f(N)/(A+1) - C', and the grouped M values must grow from the first third
/// of rows to the final third.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub pass: bool,
    pub rowwise_pass: bool,
    pub trend_pass: bool,
    pub witness: String,
    pub vertical_a: Rat,
    pub quasiconvexity_cprime: u32,
}

impl CriterionReport {
    pub fn verdict_line(&self) -> String {
        format!(
            "criterion,{},{}",
            if self.pass { "pass" } else { "fail" },
            if self.witness.is_empty() { "-" } else { &self.witness }
        )
    }
}

pub fn criterion_check(
    profile: &CTProfile,
    f_table: &PropernessTable,
    a: Rat,
    cprime: u32,
) -> Result<CriterionReport> {
    if profile.basepoint != f_table.basepoint {
        return Err(Error::InconsistentBasepoint(profile.basepoint, f_table.basepoint));
    }
    let mut rowwise_pass = true;
    let mut witness = String::new();
    for row in &profile.rows {
        let f = f_table.lookup(row.n).ok_or_else(|| {
            Error::PreconditionViolated(format!("f table has no row for N = {}", row.n))
        })?;
        if f != row.f_of_n {
            return Err(Error::PreconditionViolated(format!(
                "f({}) disagrees between inputs: {} vs {}",
                row.n, row.f_of_n, f
            )));
        }
        let bound = Rat::from_integer(i64::from(f)) / (a + Rat::from_integer(1))
            - Rat::from_integer(i64::from(cprime));
        if Rat::from_integer(i64::from(row.m_of_n)) < bound {
            rowwise_pass = false;
            if witness.is_empty() {
                witness = format!("N={}", row.n);
            }
        }
    }
    // growth proxy: a single row cannot witness growth
    let len = profile.rows.len();
    let third = (len / 3).max(1);
    let trend_pass = if len < 2 {
        false
    } else {
        let first = profile.rows[..third].iter().map(|r| r.m_of_n).min().unwrap();
        let last = profile.rows[len - third..].iter().map(|r| r.m_of_n).min().unwrap();
        last > first
    };
    if !trend_pass && witness.is_empty() {
        witness = String::from("trend");
    }
    Ok(CriterionReport {
        pass: rowwise_pass && trend_pass,
        rowwise_pass,
        trend_pass,
        witness: if rowwise_pass && trend_pass { String::new() } else { witness },
        vertical_a: a,
        quasiconvexity_cprime: cprime,
    })
}

/// Deterministic tangent geodesic: touches the sphere of radius `n` around
/// `x0` at its lexicographically smallest vertex and never comes closer.
/// Arms grow greedily toward larger spheres, always taking the smallest
/// admissible vertex id; stalled length moves to the other arm.
pub fn tangent_geodesic(
    space: &MetricGraph,
    x0: u32,
    n: u32,
    length: u32,
) -> Result<GeodesicSegment> {
    let dist0 = space.bfs_distances(x0)?;
    let m = (0..space.vertex_count() as u32)
        .find(|&v| dist0[v as usize] == n)
        .ok_or_else(|| {
            Error::PreconditionViolated(format!("no vertex at distance {n} from {x0}"))
        })?;
    let mut used = vec![false; space.vertex_count()];
    used[m as usize] = true;
    let grow = |used: &mut Vec<bool>, target: usize| -> Vec<u32> {
        let mut arm = Vec::new();
        let mut cur = m;
        while arm.len() < target {
            let next = space
                .neighbors(cur)
                .expect("vertex in range")
                .iter()
                .copied()
                .filter(|&u| dist0[u as usize] == dist0[cur as usize] + 1 && !used[u as usize])
                .min();
            match next {
                Some(u) => {
                    used[u as usize] = true;
                    arm.push(u);
                    cur = u;
                }
                None => break,
            }
        }
        arm
    };
    let half = (length as usize + 1) / 2;
    let mut arm_a = grow(&mut used, half);
    let arm_b = grow(&mut used, length as usize - arm_a.len());
    if arm_a.len() + arm_b.len() < length as usize {
        // second arm stalled too; push the first one further
        let mut cur = *arm_a.last().unwrap_or(&m);
        while arm_a.len() + arm_b.len() < length as usize {
            let next = space
                .neighbors(cur)?
                .iter()
                .copied()
                .filter(|&u| dist0[u as usize] == dist0[cur as usize] + 1 && !used[u as usize])
                .min();
            match next {
                Some(u) => {
                    used[u as usize] = true;
                    arm_a.push(u);
                    cur = u;
                }
                None => {
                    return Err(Error::PreconditionViolated(format!(
                        "no tangent geodesic of length {length} at radius {n}"
                    )))
                }
            }
        }
    }
    let mut vertices: Vec<u32> = arm_b.into_iter().rev().collect();
    vertices.push(m);
    vertices.extend(arm_a);
    GeodesicSegment::from_vertices(space, vertices)
}

/// Builds the family for a profile run: one tangent geodesic per (N, length)
/// combination that the space admits. Combinations the space cannot realize
/// are skipped; an empty result is an error.
pub fn lambda_family(
    space: &MetricGraph,
    x0: u32,
    n_values: &[u32],
    lengths: &[u32],
) -> Result<Vec<GeodesicSegment>> {
    let mut out = Vec::new();
    for &n in n_values {
        for &len in lengths {
            if let Ok(seg) = tangent_geodesic(space, x0, n, len) {
                out.push(seg);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(out)
}
