//! Batch front end: every subcommand reads files or model references, runs
//! one pipeline, prints its reports, and mirrors them into --out together
//! with a manifest naming the config digest and each artifact's digest.
//! Exit status: 0 all checks passed, 1 some audit failed (witnesses are in
//! the reports), 2 the input could not be processed (a machine-readable
//! `error,kind,detail` record is printed).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use treespace::boundary::{
    criterion_check, lambda_family, mn_profile, properness_modulus, GeodesicMode,
};
use treespace::graph::{Half, MetricGraph};
use treespace::groups::twist::twist_bounds_check;
use treespace::groups::{distortion_profile, GroupModel, SubgroupSpec};
use treespace::hyperbolic::{
    calibrate_perps, projection_lipschitz_audit, quasiconvexity_constant,
    quasiconvexity_constant_exhaustive,
};
use treespace::ladder::{
    audit_retraction, build_ladder, verify_retraction_fixes_ladder, verify_retraction_range,
};
use treespace::report::{
    digest_bytes, render_audit_csv, render_report_csv, witness_ids, AuditRow, ReportRow,
};
use treespace::tree::{
    assemble_total_space, parse_tree_of_spaces, space_from_ref, TotalSpace, TreeOfSpaces,
};
use treespace::{Error, Result};

#[derive(Parser)]
#[command(
    name = "treespace",
    version,
    about = "Finite models of trees of hyperbolic spaces: audits, ladders, profiles"
)]
struct Cli {
    /// Seed for sampled scans.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory to mirror reports into, plus a manifest.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Per-audit pass threshold, e.g. --budget retraction_lipschitz=6.
    #[arg(long, global = true, value_name = "AUDIT=VALUE")]
    budget: Vec<String>,

    /// Which geodesics the profile and quasiconvexity scans minimize over.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Canonical)]
    mode: ModeArg,

    /// Vertex cap for the exhaustive quadruple scan.
    #[arg(long, global = true)]
    cap: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Canonical,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Four-point hyperbolicity constant of a graph.
    Delta {
        /// Edge-list file or space reference (path:9, cycle:6, free:2/3, tiling:7:3/4).
        graph: String,
        /// Sample this many BFS sources instead of scanning all quadruples.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Projection displacement audit along a canonical geodesic.
    Project {
        graph: String,
        start: u32,
        end: u32,
    },
    /// Quasiconvexity constant of a vertex set.
    Qconvex {
        graph: String,
        /// Vertex ids joined with ';'.
        set: String,
    },
    /// Build the total space of a tree-of-spaces file and report its shape.
    Assemble { spec: PathBuf },
    /// Audit attach-map embeddings and uniform properness of an instance.
    Verify { spec: PathBuf },
    /// Build a ladder over a base geodesic and audit its retraction.
    Ladder {
        spec: PathBuf,
        /// Base geodesic endpoints in the root space, as START:END.
        #[arg(long, value_name = "A:B")]
        lambda: String,
        /// Neighborhood constant; derived from the instance when omitted.
        #[arg(long)]
        c: Option<i64>,
        /// Emission threshold; defaults to the neighborhood constant.
        #[arg(long)]
        d: Option<i64>,
    },
    /// Tangency profile rows with the properness modulus and the criterion verdict.
    MnProfile {
        spec: PathBuf,
        /// Basepoint in the root space.
        #[arg(long, default_value_t = 0)]
        x0: u32,
        /// Tangency radii, inclusive, as LO..HI or a single value.
        #[arg(long, value_name = "LO..HI", default_value = "0..4")]
        radii: String,
        /// Segment lengths to try per radius, as LO..HI or a single value.
        #[arg(long, value_name = "LO..HI", default_value = "4..8")]
        lengths: String,
        #[arg(long)]
        c: Option<i64>,
        #[arg(long)]
        d: Option<i64>,
    },
    /// Subgroup distortion table for a group model.
    Distortion {
        /// Model reference: free:2, fbc:2:a->ab,b->a, tiling:7:3.
        model: String,
        /// Subgroup: whole, fiber, or factor:R.
        subgroup: String,
        /// Ambient ball radii, comma separated.
        #[arg(long, default_value = "4,6,8,10")]
        radii: String,
    },
    /// Alternating twist product with its length-proxy bounds.
    Twist {
        /// Coefficients, comma separated, each at least 2.
        coeffs: String,
    },
}

/// Collected artifacts of one run: named report files plus the canonical
/// config that digests identically across re-runs.
struct Run {
    config: BTreeMap<String, String>,
    files: Vec<(String, String)>,
}

impl Run {
    fn new(command: &str) -> Self {
        let mut config = BTreeMap::new();
        config.insert("command".to_string(), command.to_string());
        Run { config, files: Vec::new() }
    }

    fn arg(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    fn config_digest(&self) -> String {
        let mut canon = String::new();
        for (k, v) in &self.config {
            canon.push_str(k);
            canon.push('=');
            canon.push_str(v);
            canon.push('\n');
        }
        digest_bytes(canon.as_bytes())
    }

    fn emit(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn finish(self, out: Option<&PathBuf>) -> Result<()> {
        for (name, content) in &self.files {
            println!("== {name} ==");
            print!("{content}");
        }
        let Some(dir) = out else { return Ok(()) };
        fs::create_dir_all(dir)?;
        let mut outputs = BTreeMap::new();
        for (name, content) in &self.files {
            fs::write(dir.join(name), content)?;
            outputs.insert(name.clone(), digest_bytes(content.as_bytes()));
        }
        let manifest = serde_json::json!({
            "command": self.config.get("command"),
            "config": self.config,
            "config_digest": self.config_digest(),
            "outputs": outputs,
        });
        let mut text =
            serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}

fn parse_budgets(entries: &[String]) -> Result<BTreeMap<String, i64>> {
    let mut out = BTreeMap::new();
    for entry in entries {
        let (k, v) = entry
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("budget {entry:?}: expected AUDIT=VALUE")))?;
        let value: i64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("budget value {v:?} is not an integer")))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

/// Inclusive LO..HI range, or a single value.
fn parse_range(s: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad range start {lo:?}")))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad range end {hi:?}")))?;
        if hi < lo {
            return Err(Error::Parse(format!("empty range {s:?}")));
        }
        return Ok((lo..=hi).collect());
    }
    Ok(vec![s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value {s:?}")))?])
}

fn parse_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad list entry {p:?}")))
        })
        .collect()
}

fn parse_id_set(s: &str) -> Result<Vec<u32>> {
    s.split(';')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex id {p:?}")))
        })
        .collect()
}

/// A graph argument is an edge-list file if the path exists, otherwise a
/// space reference.
fn resolve_graph(s: &str) -> Result<MetricGraph> {
    let path = PathBuf::from(s);
    if path.is_file() {
        return MetricGraph::parse_edge_list(&fs::read_to_string(path)?);
    }
    space_from_ref(s)
}

fn load_instance(spec: &PathBuf) -> Result<(TreeOfSpaces, TotalSpace)> {
    let text = fs::read_to_string(spec)?;
    let tos = parse_tree_of_spaces(&text)?;
    let total = assemble_total_space(&tos)?;
    Ok((tos, total))
}

/// Hyperbolicity of a single space, sampled past the exhaustive cap.
fn space_delta(space: &MetricGraph, seed: u64) -> Result<Half> {
    const FULL_SCAN_CAP: usize = 2000;
    if space.vertex_count() <= FULL_SCAN_CAP {
        Ok(space.delta_four_point(None)?.delta)
    } else {
        Ok(space.delta_four_point_sampled(64, seed)?.delta)
    }
}

/// Instance constant for ladder construction: calibrated union thickness of
/// the root space plus the worst attach-image quasiconvexity.
fn derived_ladder_constant(tos: &TreeOfSpaces, seed: u64) -> Result<i64> {
    let root = tos.tree.root();
    let space = &tos.vertex_spaces[root as usize];
    let delta = space_delta(space, seed)?;
    let c1 = calibrate_perps(space, delta)?.c1;
    let mut c2 = 0u32;
    for e in 0..tos.tree.edge_count() {
        let (lo, hi) = tos.tree.edge_ends(e as u32);
        for (v, table) in [(lo, &tos.attach_lo[e]), (hi, &tos.attach_hi[e])] {
            let q = quasiconvexity_constant(&tos.vertex_spaces[v as usize], table)?;
            c2 = c2.max(q);
        }
    }
    Ok(i64::from(c1) + i64::from(c2))
}

/// Applies a budget override to an audit row: measured <= budget decides.
fn budget_row(
    audit: &str,
    input_digest: &str,
    measured: i64,
    budgets: &BTreeMap<String, i64>,
    default_row: AuditRow,
) -> AuditRow {
    match budgets.get(audit) {
        Some(&b) => AuditRow::new(
            audit,
            input_digest,
            measured.to_string(),
            b.to_string(),
            measured <= b,
        ),
        None => default_row,
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let budgets = parse_budgets(&cli.budget)?;
    let mode = match cli.mode {
        ModeArg::Canonical => GeodesicMode::Canonical,
        ModeArg::Exhaustive => GeodesicMode::Exhaustive,
    };
    let mut pass = true;
    let mut run = match &cli.command {
        Command::Delta { graph, sample } => {
            let mut r = Run::new("delta");
            r.arg("graph", graph);
            r.arg("seed", cli.seed);
            if let Some(s) = sample {
                r.arg("sample", s);
            }
            if let Some(c) = cli.cap {
                r.arg("cap", c);
            }
            let g = resolve_graph(graph)?;
            let report = match sample {
                Some(s) => g.delta_four_point_sampled(*s, cli.seed)?,
                None => g.delta_four_point(cli.cap)?,
            };
            let mut rows = vec![
                ReportRow::new("delta", report.delta.to_string(), witness_ids(&report.witness)),
                ReportRow::new(
                    "quadruples_scanned",
                    report.quadruples_scanned.to_string(),
                    "",
                ),
            ];
            if let Some(&b) = budgets.get("delta") {
                let ok = report.delta <= Half::from_int(b);
                rows.push(ReportRow::new("delta_budget", b.to_string(), if ok { "pass" } else { "fail" }));
                pass &= ok;
            }
            rows.push(ReportRow::new("config_digest", r.config_digest(), ""));
            r.emit("delta.csv", render_report_csv(&rows));
            r
        }
        Command::Project { graph, start, end } => {
            let mut r = Run::new("project");
            r.arg("graph", graph);
            r.arg("start", start);
            r.arg("end", end);
            let g = resolve_graph(graph)?;
            let delta = space_delta(&g, cli.seed)?;
            let mu = g.geodesic(*start, *end)?;
            let report = projection_lipschitz_audit(&g, &mu, delta)?;
            let row = budget_row(
                "projection_lipschitz",
                g.digest(),
                i64::from(report.max_jump),
                &budgets,
                report.audit_row(g.digest()),
            );
            pass &= row.pass;
            r.emit("project.csv", render_audit_csv(&[row]));
            r
        }
        Command::Qconvex { graph, set } => {
            let mut r = Run::new("qconvex");
            r.arg("graph", graph);
            r.arg("set", set);
            r.arg("mode", mode.as_str());
            let g = resolve_graph(graph)?;
            let ids = parse_id_set(set)?;
            let c = match mode {
                GeodesicMode::Canonical => quasiconvexity_constant(&g, &ids)?,
                GeodesicMode::Exhaustive => quasiconvexity_constant_exhaustive(&g, &ids)?,
            };
            let mut rows = vec![ReportRow::new(
                "quasiconvexity",
                c.to_string(),
                witness_ids(&ids),
            )];
            if let Some(&b) = budgets.get("quasiconvexity") {
                let ok = i64::from(c) <= b;
                rows.push(ReportRow::new("quasiconvexity_budget", b.to_string(), if ok { "pass" } else { "fail" }));
                pass &= ok;
            }
            rows.push(ReportRow::new("config_digest", r.config_digest(), ""));
            r.emit("qconvex.csv", render_report_csv(&rows));
            r
        }
        Command::Assemble { spec } => {
            let mut r = Run::new("assemble");
            r.arg("spec", spec.display());
            let (tos, total) = load_instance(spec)?;
            let rows = vec![
                ReportRow::new("tree_vertices", tos.tree.vertex_count().to_string(), ""),
                ReportRow::new("tree_edges", tos.tree.edge_count().to_string(), ""),
                ReportRow::new("total_vertices", total.graph.vertex_count().to_string(), ""),
                ReportRow::new("total_edges", total.graph.edge_count().to_string(), ""),
                ReportRow::new("tos_digest", tos.digest(), ""),
                ReportRow::new("config_digest", r.config_digest(), ""),
            ];
            r.emit("assemble.csv", render_report_csv(&rows));
            r.emit("total_edges.txt", total.graph.to_edge_list_string());
            r
        }
        Command::Verify { spec } => {
            let mut r = Run::new("verify");
            r.arg("spec", spec.display());
            let (tos, total) = load_instance(spec)?;
            let reports = treespace::tree::verify_qi_embedded(&tos, &total)?;
            let declared = format!(
                "K={};eps={}",
                tos.params.k, tos.params.epsilon
            );
            let mut audit_rows = Vec::new();
            for rep in &reports {
                pass &= rep.pass;
                audit_rows.push(AuditRow::new(
                    format!("edge_embedding_{}", rep.edge),
                    tos.digest(),
                    format!("lo:{};hi:{}", rep.lo.render(), rep.hi.render()),
                    declared.clone(),
                    rep.pass,
                ));
            }
            r.emit("verify.csv", render_audit_csv(&audit_rows));
            const PROPERNESS_CAP: usize = 4096;
            let mut rows = Vec::new();
            if total.graph.vertex_count() <= PROPERNESS_CAP {
                let table =
                    treespace::tree::verify_uniform_properness(&tos, &total, &[1, 2, 4, 8, 16])?;
                for (m, n) in table {
                    rows.push(ReportRow::new(format!("properness_M{m}"), n.to_string(), ""));
                }
                treespace::tree::verify_projection_contraction(&tos, &total)?;
                rows.push(ReportRow::new("projection_contraction", "ok", ""));
            } else {
                rows.push(ReportRow::new(
                    "properness",
                    "-",
                    "skipped;graph beyond exhaustive cap",
                ));
            }
            rows.push(ReportRow::new("config_digest", r.config_digest(), ""));
            r.emit("properness.csv", render_report_csv(&rows));
            r
        }
        Command::Ladder { spec, lambda, c, d } => {
            let mut r = Run::new("ladder");
            r.arg("spec", spec.display());
            r.arg("lambda", lambda);
            r.arg("seed", cli.seed);
            let (tos, total) = load_instance(spec)?;
            let (a, b) = parse_lambda(lambda)?;
            let root = tos.tree.root();
            let seg = tos.vertex_spaces[root as usize].geodesic(a, b)?;
            let c_val = match c {
                Some(v) => *v,
                None => derived_ladder_constant(&tos, cli.seed)?,
            };
            let d_val = d.unwrap_or(c_val);
            r.arg("c", c_val);
            r.arg("d", d_val);
            let ladder = build_ladder(&tos, &total, &seg, c_val, d_val)?;
            r.emit("ladder.csv", ladder.dump());
            let report = audit_retraction(&tos, &total, &ladder)?;
            let mut audit_rows = Vec::new();
            let defaults = report.audit_rows(ladder.digest());
            audit_rows.push(budget_row(
                "retraction_lipschitz",
                ladder.digest(),
                i64::from(report.lipschitz_c0),
                &budgets,
                defaults[0].clone(),
            ));
            audit_rows.push(budget_row(
                "ladder_quasiconvexity",
                ladder.digest(),
                i64::from(report.quasiconvexity_cprime),
                &budgets,
                defaults[1].clone(),
            ));
            // the vertical rate is rational; its budget bounds the ceiling
            audit_rows.push(budget_row(
                "vertical_bound",
                ladder.digest(),
                report.vertical_a.ceil().to_integer(),
                &budgets,
                defaults[2].clone(),
            ));
            let fixed = verify_retraction_fixes_ladder(&tos, &total, &ladder)?;
            audit_rows.push(AuditRow::new(
                "retraction_fixed_points",
                ladder.digest(),
                match fixed {
                    None => "all".to_string(),
                    Some((x, y)) => format!("moved {x} to {y}"),
                },
                "pointwise",
                fixed.is_none(),
            ));
            let range = verify_retraction_range(&tos, &total, &ladder)?;
            audit_rows.push(AuditRow::new(
                "retraction_range",
                ladder.digest(),
                match range {
                    None => "inside".to_string(),
                    Some(x) => format!("escaped at {x}"),
                },
                "subset",
                range.is_none(),
            ));
            pass &= audit_rows.iter().all(|row| row.pass);
            r.emit("audits.csv", render_audit_csv(&audit_rows));
            let rows = vec![
                ReportRow::new("support", witness_ids(&ladder.support_tree()), ""),
                ReportRow::new("c", c_val.to_string(), ""),
                ReportRow::new("d_threshold", d_val.to_string(), ""),
                ReportRow::new("lambda_digest", ladder.lambda_digest(), ""),
                ReportRow::new(
                    "witness_pair",
                    witness_ids(&[report.witness_pair.0, report.witness_pair.1]),
                    "",
                ),
                ReportRow::new("config_digest", r.config_digest(), ""),
            ];
            r.emit("constants.csv", render_report_csv(&rows));
            r
        }
        Command::MnProfile { spec, x0, radii, lengths, c, d } => {
            let mut r = Run::new("mn-profile");
            r.arg("spec", spec.display());
            r.arg("x0", x0);
            r.arg("radii", radii);
            r.arg("lengths", lengths);
            r.arg("mode", mode.as_str());
            r.arg("seed", cli.seed);
            let (tos, total) = load_instance(spec)?;
            let root = tos.tree.root();
            let space = &tos.vertex_spaces[root as usize];
            let ns = parse_range(radii)?;
            let lens = parse_range(lengths)?;
            let family = lambda_family(space, *x0, &ns, &lens)?;
            let profile = mn_profile(&tos, &total, *x0, &family, mode)?;
            let profile_ns: Vec<u32> = profile.rows.iter().map(|row| row.n).collect();
            let f_table = properness_modulus(&tos, &total, root, *x0, &profile_ns)?;
            // ladder constants measured on the longest family member
            let longest = family
                .iter()
                .max_by_key(|seg| seg.len())
                .expect("family is nonempty");
            let c_val = match c {
                Some(v) => *v,
                None => derived_ladder_constant(&tos, cli.seed)?,
            };
            let d_val = d.unwrap_or(c_val);
            r.arg("c", c_val);
            r.arg("d", d_val);
            let ladder = build_ladder(&tos, &total, longest, c_val, d_val)?;
            let audits = audit_retraction(&tos, &total, &ladder)?;
            let verdict = criterion_check(
                &profile,
                &f_table,
                audits.vertical_a,
                audits.quasiconvexity_cprime,
            )?;
            pass &= verdict.pass;
            let mut csv = profile.to_csv();
            csv.push_str(&verdict.verdict_line());
            csv.push('\n');
            r.emit("mn_profile.csv", csv);
            let rows = vec![
                ReportRow::new(
                    "vertical_a",
                    format!(
                        "{}/{}",
                        audits.vertical_a.numer(),
                        audits.vertical_a.denom()
                    ),
                    "",
                ),
                ReportRow::new(
                    "quasiconvexity_cprime",
                    audits.quasiconvexity_cprime.to_string(),
                    "",
                ),
                ReportRow::new("family_size", family.len().to_string(), ""),
                ReportRow::new("config_digest", r.config_digest(), ""),
            ];
            r.emit("constants.csv", render_report_csv(&rows));
            r
        }
        Command::Distortion { model, subgroup, radii } => {
            let mut r = Run::new("distortion");
            r.arg("model", model);
            r.arg("subgroup", subgroup);
            r.arg("radii", radii);
            let model = GroupModel::parse(model)?;
            let sub = SubgroupSpec::parse(subgroup)?;
            let rs = parse_list(radii)?;
            let table = distortion_profile(&model, sub, &rs)?;
            r.emit("distortion.csv", table.to_csv());
            r
        }
        Command::Twist { coeffs } => {
            let mut r = Run::new("twist");
            r.arg("coeffs", coeffs);
            let a: Vec<i64> = coeffs
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad coefficient {p:?}")))
                })
                .collect::<Result<_>>()?;
            let report = twist_bounds_check(&a)?;
            pass &= report.pass();
            let csv = format!(
                "lower,proxy,upper,pass\n{},{},{},{}\n",
                report.product.lower,
                report.product.proxy,
                report.product.upper,
                if report.pass() { "pass" } else { "fail" }
            );
            r.emit("twist.csv", csv);
            r
        }
    };
    run.arg("budgets", cli.budget.join(";"));
    run.finish(cli.out.as_ref())?;
    Ok(pass)
}


fn parse_lambda(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("lambda {s:?}: expected START:END")))?;
    Ok((
        a.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad lambda start {a:?}")))?,
        b.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad lambda end {b:?}")))?,
    ))
}

fn error_kind(e: &Error) -> String {
    let debug = format!("{e:?}");
    debug
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let detail = e.to_string().replace(',', ";");
            println!("error,{},{detail}", error_kind(&e));
            ExitCode::from(2)
        }
    }
}

