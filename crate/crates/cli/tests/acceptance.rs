//! Release gate: one test per shipping criterion, each printing a single
//! PASS line (a failed assert is the FAIL line). Instances live in
//! tests/data, frozen expectations in tests/golden.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use treespace::boundary::{
    criterion_check, lambda_family, mn_profile, properness_modulus, GeodesicMode,
};
use treespace::graph::{GeodesicSegment, Half, MetricGraph};
use treespace::groups::tiling::tiling_ball;
use treespace::groups::twist::twist_bounds_check;
use treespace::groups::{distortion_profile, GroupModel, SubgroupSpec};
use treespace::hyperbolic::{
    calibrate_perps, divergence_profile, projection_lipschitz_audit, quasiconvexity_constant,
    quasiconvexity_constant_exhaustive, DivergenceVerdict,
};
use treespace::ladder::{audit_retraction, build_ladder, verify_retraction_fixes_ladder};
use treespace::tree::{assemble_total_space, parse_tree_of_spaces, TotalSpace, TreeOfSpaces};
use treespace::Ratio;

fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/data/{name}.toml"))
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}"));
    fs::read_to_string(p).expect("golden file readable")
}

fn load(name: &str) -> (TreeOfSpaces, TotalSpace) {
    let text = fs::read_to_string(data_path(name)).expect("instance file readable");
    let tos = parse_tree_of_spaces(&text).expect("instance parses");
    let total = assemble_total_space(&tos).expect("instance assembles");
    (tos, total)
}

/// xorshift64*, deterministic across platforms; used wherever the gate
/// needs "random" structures.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.wrapping_mul(0x9e3779b97f4a7c15) | 1)
    }

    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn random_tree(n: u32, rng: &mut Rng) -> MetricGraph {
    let mut edges = Vec::with_capacity(n as usize - 1);
    for v in 1..n {
        edges.push((rng.below(u64::from(v)) as u32, v));
    }
    MetricGraph::from_edges(n as usize, &edges).expect("tree is valid")
}

/// Instance constant for ladder construction. The gate instances all have
/// tree-shaped vertex spaces (balls in free groups, paths), where the
/// thin-triangle constant is exactly zero, so the union constant reduces to
/// the worst attach-image quasiconvexity; the shape is asserted, not assumed.
fn ladder_constant(tos: &TreeOfSpaces) -> i64 {
    for space in &tos.vertex_spaces {
        assert_eq!(
            space.edge_count(),
            space.vertex_count() - 1,
            "gate instances use tree-shaped vertex spaces"
        );
    }
    let mut c2 = 0u32;
    for e in 0..tos.tree.edge_count() {
        let (lo, hi) = tos.tree.edge_ends(e as u32);
        for (v, table) in [(lo, &tos.attach_lo[e]), (hi, &tos.attach_hi[e])] {
            let q = quasiconvexity_constant(&tos.vertex_spaces[v as usize], table)
                .expect("attach image is nonempty");
            c2 = c2.max(q);
        }
    }
    i64::from(c2)
}

/// Base geodesics of every length in 6..=20, tangent at the instance's
/// basepoint (radius 0 keeps the whole family anchored at one vertex).
fn length_family(tos: &TreeOfSpaces, x0: u32) -> Vec<GeodesicSegment> {
    let space = &tos.vertex_spaces[tos.tree.root() as usize];
    let lengths: Vec<u32> = (6..=20).collect();
    let fam = lambda_family(space, x0, &[0], &lengths).expect("family is nonempty");
    assert_eq!(fam.len(), lengths.len(), "no length should be skipped");
    fam
}

struct FamilyAudit {
    c0: Vec<u32>,
    cprime: Vec<u32>,
    a: Vec<Ratio<i64>>,
}

fn audit_family(name: &str, x0: u32) -> FamilyAudit {
    let (tos, total) = load(name);
    let c = ladder_constant(&tos);
    let mut out = FamilyAudit { c0: Vec::new(), cprime: Vec::new(), a: Vec::new() };
    for lambda in &length_family(&tos, x0) {
        let ladder = build_ladder(&tos, &total, lambda, c, c).expect("ladder builds");
        assert!(ladder.support_tree().len() > 1, "family ladders must propagate");
        let rep = audit_retraction(&tos, &total, &ladder).expect("audits run");
        let fixed = verify_retraction_fixes_ladder(&tos, &total, &ladder).expect("scan runs");
        assert_eq!(fixed, None, "retraction must fix the ladder pointwise");
        out.c0.push(rep.lipschitz_c0);
        out.cprime.push(rep.quasiconvexity_cprime);
        out.a.push(rep.vertical_a);
    }
    out
}

/// Profile plan per instance: basepoint, tangency radii, segment lengths.
const PROFILE_PLANS: [(&str, u32, [u32; 2], [u32; 2]); 6] = [
    ("lone_tree", 0, [0, 4], [2, 6]),
    ("product_small", 0, [0, 3], [2, 5]),
    ("product", 12, [0, 6], [4, 6]),
    ("twisted_small", 0, [0, 1], [2, 4]),
    ("twisted", 0, [0, 2], [2, 6]),
    ("twisted_deep", 0, [0, 6], [4, 8]),
];

#[test]
fn criterion_01_exact_delta_on_trees_and_cycle() {
    let start = Instant::now();
    let mut rng = Rng::new(11);
    for i in 0..50u64 {
        let n = 10 + ((i * 7919) % 191) as u32;
        let tree = random_tree(n, &mut rng);
        let rep = tree.delta_four_point(None).expect("scan fits the cap");
        assert_eq!(rep.delta, Half::ZERO, "tree #{i} ({n} vertices) must have delta 0");
        assert!(rep.exact);
    }
    let c4 = MetricGraph::cycle(4).expect("cycle builds");
    assert_eq!(c4.delta_four_point(None).expect("scan runs").delta, Half::from_int(1));
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}, budget 10s");
    println!("criterion 01 (exact delta on trees and C4): PASS ({elapsed:?})");
}

#[test]
fn criterion_02_projection_displacement_bound() {
    let mut violations = 0u32;
    for (p, q) in [(7u32, 3u32), (4, 5)] {
        for r in [3u32, 4] {
            let g = tiling_ball(p, q, r, None).expect("tiling builds");
            let delta = g.delta_four_point(None).expect("scan runs").delta;
            let n = g.vertex_count() as u64;
            let mut rng = Rng::new(u64::from(p * 100 + q * 10 + r));
            for _ in 0..20 {
                let u = rng.below(n) as u32;
                let mut v = rng.below(n) as u32;
                if v == u {
                    v = (v + 1) % n as u32;
                }
                let mu = g.geodesic(u, v).expect("geodesic exists");
                let rep = projection_lipschitz_audit(&g, &mu, delta).expect("audit runs");
                if !rep.pass {
                    violations += 1;
                    eprintln!(
                        "tiling {p}:{q} r{r}, geodesic {u}-{v}: jump {} > bound {}",
                        rep.max_jump, rep.bound
                    );
                }
            }
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 02 (projection displacement within 4*delta+1): PASS");
}

#[test]
fn criterion_03_calibration_stabilizes() {
    let mut rng = Rng::new(5);
    let mut corpus: Vec<(MetricGraph, bool)> = vec![
        (MetricGraph::path(9).expect("path builds"), true),
        (random_tree(40, &mut rng), true),
        (random_tree(75, &mut rng), true),
        (MetricGraph::cycle(6).expect("cycle builds"), false),
        (tiling_ball(7, 3, 3, None).expect("tiling builds"), false),
        (tiling_ball(4, 5, 3, None).expect("tiling builds"), false),
    ];
    let free_ball = treespace::groups::cayley_ball(
        &GroupModel::parse("free:2").expect("model parses"),
        3,
    )
    .expect("ball builds");
    corpus.push((free_ball.graph, true));
    let (_, product_total) = load("product_small");
    corpus.push((product_total.graph, false));
    for (i, (g, is_tree)) in corpus.iter().enumerate() {
        let delta = g.delta_four_point(None).expect("scan runs").delta;
        let first = calibrate_perps(g, delta).expect("calibration stabilizes");
        let again = calibrate_perps(g, delta).expect("calibration stabilizes");
        assert_eq!(first, again, "graph #{i}: calibration must be deterministic");
        if *is_tree {
            assert_eq!(delta, Half::ZERO);
            assert_eq!(first.c1, 0, "graph #{i}: trees calibrate to exactly 0");
        }
    }
    println!("criterion 03 (calibration exact on trees, stable everywhere): PASS");
}

#[test]
fn criterion_04_retraction_constant_uniform_over_lengths() {
    let mut golden_rows = String::from("instance,length,c0,cprime,a\n");
    for (name, x0) in [("product", 12u32), ("twisted_deep", 0)] {
        let audit = audit_family(name, x0);
        let max = *audit.c0.iter().max().expect("family is nonempty");
        let min = *audit.c0.iter().min().expect("family is nonempty");
        assert!(min >= 1, "{name}: degenerate retraction constant");
        assert!(
            max <= 2 * min,
            "{name}: retraction constant spread {min}..{max} exceeds factor 2"
        );
        for (i, len) in (6..=20).enumerate() {
            golden_rows.push_str(&format!(
                "{name},{len},{},{},{}/{}\n",
                audit.c0[i],
                audit.cprime[i],
                audit.a[i].numer(),
                audit.a[i].denom()
            ));
        }
    }
    assert_eq!(golden_rows, golden("ladder_constants.csv"), "measured constants drifted");
    println!("criterion 04 (retraction constant uniform over base lengths 6..20): PASS");
}

#[test]
fn criterion_05_vertical_bound_stable_over_lengths() {
    for (name, x0) in [("product", 12u32), ("twisted_deep", 0)] {
        let audit = audit_family(name, x0);
        let max = *audit.a.iter().max().expect("family is nonempty");
        let min = *audit.a.iter().min().expect("family is nonempty");
        assert!(
            max - min <= Ratio::from_integer(1),
            "{name}: vertical bound swings from {min} to {max}"
        );
    }
    println!("criterion 05 (vertical bound stable within +1 over the family): PASS");
}

#[test]
fn criterion_06_lower_bound_identity_holds() {
    for (name, x0, radii, lengths) in PROFILE_PLANS {
        let (tos, total) = load(name);
        let root = tos.tree.root();
        let space = &tos.vertex_spaces[root as usize];
        let ns: Vec<u32> = (radii[0]..=radii[1]).collect();
        let lens: Vec<u32> = (lengths[0]..=lengths[1]).collect();
        let fam = lambda_family(space, x0, &ns, &lens).expect("family is nonempty");
        let profile = mn_profile(&tos, &total, x0, &fam, GeodesicMode::Canonical)
            .expect("profile computes");
        let profile_ns: Vec<u32> = profile.rows.iter().map(|r| r.n).collect();
        let f = properness_modulus(&tos, &total, root, x0, &profile_ns)
            .expect("modulus computes");
        assert!(f.skipped.is_empty(), "{name}: radii must stay within the space");
        for pair in profile.rows.windows(2) {
            assert!(
                pair[0].m_of_n <= pair[1].m_of_n,
                "{name}: grouped M must be nondecreasing"
            );
        }
        let longest = fam.iter().max_by_key(|s| s.len()).expect("family is nonempty");
        let c = ladder_constant(&tos);
        let ladder = build_ladder(&tos, &total, longest, c, c).expect("ladder builds");
        let rep = audit_retraction(&tos, &total, &ladder).expect("audits run");
        let verdict = criterion_check(&profile, &f, rep.vertical_a, rep.quasiconvexity_cprime)
            .expect("inputs are consistent");
        assert!(
            verdict.pass,
            "{name}: lower-bound identity failed, witness {}",
            verdict.witness
        );
        if name == "lone_tree" {
            for row in &profile.rows {
                assert_eq!(row.m_of_n, row.n, "lone instance must give M(N) = N");
            }
        }
    }
    println!("criterion 06 (M >= f/(A+1) - C' row-wise, M(N)=N when lone): PASS");
}

#[test]
fn criterion_07_exhaustive_mode_agrees_with_canonical() {
    for name in ["product_small", "twisted_small"] {
        let (tos, total) = load(name);
        assert!(total.graph.vertex_count() <= 60);
        let slack = {
            let rep = total.graph.delta_four_point(None).expect("scan runs");
            // documented slack: canonical geodesics track any geodesic
            // within twice the thin-triangle constant
            rep.delta.twice() as u32
        };
        let space = &tos.vertex_spaces[tos.tree.root() as usize];
        let fam = lambda_family(space, 0, &[0, 1, 2], &[2, 3, 4]).expect("family is nonempty");
        let can = mn_profile(&tos, &total, 0, &fam, GeodesicMode::Canonical)
            .expect("profile computes");
        let exh = mn_profile(&tos, &total, 0, &fam, GeodesicMode::Exhaustive)
            .expect("profile computes");
        assert_eq!(can.rows.len(), exh.rows.len());
        for (c, e) in can.rows.iter().zip(&exh.rows) {
            assert_eq!(c.n, e.n);
            assert!(e.m_of_n <= c.m_of_n, "{name}: exhaustive minimum exceeds canonical");
            assert!(
                c.m_of_n - e.m_of_n <= slack,
                "{name} N={}: canonical M {} vs exhaustive {} beyond slack {slack}",
                c.n,
                c.m_of_n,
                e.m_of_n
            );
        }
        let c = ladder_constant(&tos);
        let ladder =
            build_ladder(&tos, &total, &fam[0], c, c).expect("ladder builds");
        let set = ladder.total_vertices(&total).expect("ladder is consistent");
        let q_can = quasiconvexity_constant(&total.graph, &set).expect("set is nonempty");
        let q_exh =
            quasiconvexity_constant_exhaustive(&total.graph, &set).expect("set is nonempty");
        assert!(q_can <= q_exh, "{name}: canonical scans a subset of geodesics");
        assert!(
            q_exh - q_can <= slack,
            "{name}: quasiconvexity {q_can} vs exhaustive {q_exh} beyond slack {slack}"
        );
    }
    println!("criterion 07 (exhaustive mode within 2*delta of canonical): PASS");
}

#[test]
fn criterion_08_distortion_profiles() {
    let start = Instant::now();
    let free3 = GroupModel::parse("free:3").expect("model parses");
    let factor = SubgroupSpec::parse("factor:2").expect("subgroup parses");
    let flat = distortion_profile(&free3, factor, &[2, 4, 6, 8, 10]).expect("profile computes");
    for row in &flat.rows {
        assert!(
            row.disto <= Ratio::from_integer(2),
            "undistorted subgroup at R={} has disto {}",
            row.radius,
            row.disto
        );
    }
    let fbc = GroupModel::parse("fbc:2:a->ab,b->a").expect("model parses");
    let fiber = SubgroupSpec::parse("fiber").expect("subgroup parses");
    let table = distortion_profile(&fbc, fiber, &[4, 6, 8, 10]).expect("profile computes");
    assert_eq!(table.to_csv(), golden("fiber_distortion.csv"), "fiber table drifted");
    for pair in table.rows.windows(2) {
        assert!(
            pair[0].disto <= pair[1].disto,
            "fiber distortion ratios must be nondecreasing"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60s");
    println!("criterion 08 (distortion flat for factors, growing for the fiber): PASS ({elapsed:?})");
}

#[test]
fn criterion_09_twist_bounds_exhaustive() {
    let start = Instant::now();
    let mut checked = 0u64;
    for n in 1..=8u32 {
        let mut idx = vec![0usize; n as usize];
        loop {
            let coeffs: Vec<i64> = idx.iter().map(|&i| [2i64, 3, 5][i]).collect();
            let rep = twist_bounds_check(&coeffs).expect("product computes");
            assert!(rep.det_ok, "determinant must be 1 for {coeffs:?}");
            assert!(rep.bounds_ok, "length proxy escaped its bounds for {coeffs:?}");
            checked += 1;
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < 3 {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    assert_eq!(checked, (1..=8).map(|n| 3u64.pow(n)).sum::<u64>());
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 5, "took {elapsed:?}, budget 5s");
    println!("criterion 09 (twist bounds hold on {checked} coefficient tuples): PASS ({elapsed:?})");
}

/// Crossing quadruple for the divergence scan: a central geodesic (first
/// depth-2 pair at mutual distance 4), x the vertex farthest from it, w the
/// vertex farthest from x among those nearly as deep relative to the
/// geodesic.
fn crossing_quadruple(g: &MetricGraph) -> (u32, u32, u32, u32) {
    let n = g.vertex_count() as u32;
    let depth = g.bfs_distances(0).expect("graph is connected");
    let mut yz = None;
    'outer: for y in 0..n {
        if depth[y as usize] != 2 {
            continue;
        }
        for z in (y + 1)..n {
            if depth[z as usize] == 2 && g.distance(y, z).expect("distance computes") == 4 {
                yz = Some((y, z));
                break 'outer;
            }
        }
    }
    let (y, z) = yz.expect("a central pair exists");
    let gamma = g.geodesic(y, z).expect("geodesic exists");
    let to_gamma = g.multi_source_distances(gamma.vertices()).expect("scan runs");
    let x = (0..n)
        .max_by_key(|&i| (to_gamma[i as usize], std::cmp::Reverse(i)))
        .expect("graph is nonempty");
    let dx = g.bfs_distances(x).expect("graph is connected");
    let w = (0..n)
        .filter(|&i| i != x && to_gamma[i as usize] + 2 >= to_gamma[x as usize])
        .max_by_key(|&i| (dx[i as usize], std::cmp::Reverse(i)))
        .expect("a far vertex exists");
    (x, y, z, w)
}

fn divergence_at(g: &MetricGraph) -> treespace::hyperbolic::DivergenceProfile {
    let (x, y, z, w) = crossing_quadruple(g);
    for a0 in 3..=8i64 {
        if let Ok(p) = divergence_profile(g, x, y, z, w, a0, None) {
            return p;
        }
    }
    panic!("no feasible separation constant for the crossing quadruple");
}

#[test]
fn criterion_10_divergence_grows_only_on_hyperbolic_balls() {
    let hyp = tiling_ball(7, 3, 6, None).expect("tiling builds");
    let prof = divergence_at(&hyp);
    assert_eq!(prof.verdict, DivergenceVerdict::Exponential);
    assert!(prof.log_slope > 0.0);
    let finite: Vec<u32> = prof.rows.iter().filter_map(|&(_, l)| l).collect();
    assert!(finite.len() >= 2, "need at least two finite rows");
    for pair in finite.windows(2) {
        assert!(pair[0] < pair[1], "avoiding-path lengths must strictly increase");
    }
    let flat = divergence_at(&MetricGraph::cycle(20).expect("cycle builds"));
    assert_ne!(flat.verdict, DivergenceVerdict::Exponential);
    assert!(flat.log_slope.abs() < flat.slope_threshold);
    println!("criterion 10 (divergence exponential on tiling, flat on cycle): PASS");
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_treespace"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code present"),
        String::from_utf8(out.stdout).expect("reports are utf8"),
    )
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("output dir exists")
        .map(|e| {
            let e = e.expect("entry reads");
            (
                e.file_name().into_string().expect("utf8 name"),
                fs::read(e.path()).expect("file reads"),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_cli_reruns_are_byte_identical() {
    let spec = data_path("twisted_small");
    let spec = spec.to_str().expect("utf8 path");
    let cases: Vec<Vec<&str>> = vec![
        vec!["delta", "path:9"],
        vec!["delta", "tiling:7:3/4", "--sample", "8", "--seed", "3"],
        vec!["project", "cycle:8", "0", "4"],
        vec!["qconvex", "free:2/2", "0;1;2"],
        vec!["assemble", spec],
        vec!["verify", spec],
        vec!["ladder", spec, "--lambda", "1:2"],
        vec!["mn-profile", spec, "--x0", "0", "--radii", "0..1", "--lengths", "2..4"],
        vec!["distortion", "fbc:2:a->ab,b->a", "fiber", "--radii", "4,6"],
        vec!["twist", "2,3,5"],
    ];
    let base = std::env::temp_dir().join(format!("treespace-gate-{}", std::process::id()));
    for (i, case) in cases.iter().enumerate() {
        let mut snaps = Vec::new();
        let mut stdouts = Vec::new();
        for run in 0..2 {
            let out_dir = base.join(format!("case{i}-run{run}"));
            let mut args = case.clone();
            let out_str = out_dir.to_str().expect("utf8 path").to_string();
            args.push("--out");
            args.push(&out_str);
            let (code, stdout) = run_cli(&args);
            assert_eq!(code, 0, "case {case:?} run {run} failed:\n{stdout}");
            snaps.push(dir_snapshot(&out_dir));
            stdouts.push(stdout);
        }
        assert_eq!(stdouts[0], stdouts[1], "case {case:?}: stdout drifted");
        assert_eq!(snaps[0], snaps[1], "case {case:?}: report files drifted");
        let names: Vec<&str> = snaps[0].iter().map(|(n, _)| n.as_str()).collect();
        assert!(names.contains(&"manifest.json"), "case {case:?}: manifest missing");
    }
    fs::remove_dir_all(&base).ok();

    // exit-code contract: 1 flags a failed audit, 2 flags bad input
    let (code, _) = run_cli(&["--budget", "retraction_lipschitz=0", "ladder", spec, "--lambda", "1:2"]);
    assert_eq!(code, 1);
    let bad = std::env::temp_dir().join(format!("treespace-gate-bad-{}.toml", std::process::id()));
    fs::write(&bad, "root = 0\nedges = []\n[spaces]\n0 = \"nonsense:9\"\n").expect("write works");
    let (code, stdout) = run_cli(&["ladder", bad.to_str().expect("utf8 path"), "--lambda", "0:1"]);
    fs::remove_file(&bad).ok();
    assert_eq!(code, 2);
    assert!(stdout.starts_with("error,"), "error record missing: {stdout}");
    println!("criterion 11 (CLI re-runs byte-identical, exit codes contractual): PASS");
}
