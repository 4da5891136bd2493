//! Benchmark and verification driver: dataset generation, structure
//! builds, query batches, invariant audits, determinism hashing, and
//! JSON/CSV reporting.  Exit codes: 0 ok, 1 invariant or oracle
//! failure, 2 input error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use partree::gen::{self, Family, QueryKind};
use partree::io::{self, Dataset, Query};
use partree::oracle;
use partree::par::map_batch;
use partree::rangecount::{build_rangecount, triangle_query, RangeCountConfig, RangeQuery};
use partree::rayshoot::{build_rayshoot, RayShootConfig};
use partree::scalar::Scalar;
use partree::segquery::{build_segment_store, SegQueryConfig};
use partree::stabbing::{build_stabbing, StabbingConfig};
use partree::tree::{build_tree, PartitionTree, TreeConfig};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "partree", about = "Deterministic planar partition-tree harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct DatasetArgs {
    /// Read a dataset file instead of generating one.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "uniform")]
    family: String,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Generate pairwise-disjoint segments (required for ray shooting).
    #[arg(long, default_value_t = true)]
    disjoint_segments: bool,
}

#[derive(Args, Clone)]
struct StructParams {
    /// Branching factor (power of two, >= 4).
    #[arg(long)]
    b: Option<u32>,
    /// Reweighting exponent base, as `p/q`.
    #[arg(long)]
    beta: Option<String>,
    /// Cutting shrink factor, as `p/q`.
    #[arg(long)]
    ccut: Option<String>,
    /// Stabbing schedule exponent, as `p/q`.
    #[arg(long)]
    eps: Option<String>,
    /// Tree / stage-1 radius.
    #[arg(long)]
    r: Option<u32>,
    /// Stage-2 radius.
    #[arg(long)]
    r1: Option<u32>,
    /// Leaf-structure size bound.
    #[arg(long)]
    tleaf: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a deterministic dataset.
    Gen {
        #[command(flatten)]
        ds: DatasetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build structures and print build stats as JSON.
    Build {
        #[command(flatten)]
        ds: DatasetArgs,
        #[command(flatten)]
        params: StructParams,
        /// Also serialize the partition tree (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer a query batch; results as CSV.
    Query {
        #[command(flatten)]
        ds: DatasetArgs,
        #[command(flatten)]
        params: StructParams,
        /// Query file; generated (`--queries N` of each kind) if absent.
        #[arg(long)]
        query_file: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        queries: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv (default) or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Audit every structural invariant and oracle-check query batches.
    Verify {
        #[command(flatten)]
        ds: DatasetArgs,
        #[command(flatten)]
        params: StructParams,
        #[arg(long, default_value_t = 50)]
        queries: usize,
        /// Audit a serialized partition tree instead of fresh builds.
        #[arg(long)]
        tree_json: Option<PathBuf>,
    },
    /// Doubling-schedule scaling table per query family.
    Bench {
        #[arg(long, default_value = "uniform")]
        family: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        queries: usize,
        /// Comma-separated sizes.
        #[arg(long, default_value = "64,128,256")]
        ns: String,
        #[command(flatten)]
        params: StructParams,
    },
}

fn parse_rat(s: &str) -> Result<Scalar> {
    let mk = |n: i64, d: i64| -> Result<Scalar> {
        if d == 0 {
            bail!("zero denominator in `{s}`");
        }
        Ok(Scalar::new(n.into(), d.into()))
    };
    match s.split_once('/') {
        None => mk(i64::from_str(s).with_context(|| format!("bad rational `{s}`"))?, 1),
        Some((n, d)) => mk(
            i64::from_str(n).with_context(|| format!("bad rational `{s}`"))?,
            i64::from_str(d).with_context(|| format!("bad rational `{s}`"))?,
        ),
    }
}

struct Configs {
    tree: TreeConfig,
    range: RangeCountConfig,
    stab: StabbingConfig,
    seg: SegQueryConfig,
    ray: RayShootConfig,
    r: Option<u32>,
}

fn configs(p: &StructParams) -> Result<Configs> {
    let mut tree = TreeConfig::default();
    if let Some(b) = p.b {
        tree.b = b;
    }
    if let Some(beta) = &p.beta {
        tree.beta = parse_rat(beta)?;
    }
    if let Some(ccut) = &p.ccut {
        tree.c_cut = parse_rat(ccut)?;
    }
    let mut range = RangeCountConfig { r: p.r, r1: p.r1, ..RangeCountConfig::default() };
    if let Some(b) = p.b {
        range.b = b;
        range.b1 = b;
    }
    if let Some(t) = p.tleaf {
        range.t_leaf = t;
    }
    let mut stab = StabbingConfig { r: p.r, reporting: true, ..StabbingConfig::default() };
    if let Some(b) = p.b {
        stab.b = b;
    }
    if let Some(eps) = &p.eps {
        stab.eps = parse_rat(eps)?;
    }
    if let Some(t) = p.tleaf {
        stab.t_leaf = t;
    }
    let mut seg = SegQueryConfig { r: p.r, ..SegQueryConfig::default() };
    if let Some(b) = p.b {
        seg.b = b;
    }
    let ray = RayShootConfig { store: seg.clone(), allow_shared_endpoints: false };
    Ok(Configs { tree, range, stab, seg, ray, r: p.r })
}

fn load_dataset(ds: &DatasetArgs) -> Result<Dataset> {
    if let Some(path) = &ds.input {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        return Ok(Dataset::parse(&text)?);
    }
    let family = Family::from_str(&ds.family).map_err(|e| anyhow!(e))?;
    Ok(gen::dataset(family, ds.n, ds.seed, ds.disjoint_segments))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tree_r(r: Option<u32>, n: usize) -> u32 {
    r.unwrap_or_else(|| ((n / 8) as u32).max(2)).clamp(2, n.max(2) as u32)
}

fn cmd_build(ds: &DatasetArgs, params: &StructParams, out: &Option<PathBuf>) -> Result<()> {
    let cfgs = configs(params)?;
    let data = load_dataset(ds)?;
    let t0 = Instant::now();
    let tree = build_tree(&data.points, tree_r(cfgs.r, data.points.len()), &cfgs.tree)
        .map_err(|e| anyhow!("tree build: {e:?}"))?;
    let t_tree = t0.elapsed();
    let t0 = Instant::now();
    let range = build_rangecount(&data.points, cfgs.range).map_err(|e| anyhow!("{e:?}"))?;
    let t_range = t0.elapsed();
    let t0 = Instant::now();
    let stab = build_stabbing(&data.triangles, cfgs.stab).map_err(|e| anyhow!("{e:?}"))?;
    let t_stab = t0.elapsed();
    let t0 = Instant::now();
    let segs = build_segment_store(&data.segments, cfgs.seg).map_err(|e| anyhow!("{e:?}"))?;
    let t_seg = t0.elapsed();

    let stats = tree.audit_structure().map_err(|e| anyhow!("tree audit: {e}"))?;
    let (stab_stored, stab_levels) = stab.space_report();
    let report = json!({
        "n": data.points.len(),
        "tree": {
            "digest": tree.digest(),
            "levels": tree.levels.iter().map(|l| l.len()).collect::<Vec<_>>(),
            "r": tree.r,
            "b": tree.b,
            "max_size_ratio": stats.max_size_ratio.to_string(),
            "build_ms": t_tree.as_millis() as u64,
        },
        "rangecount": {
            "digest": range.digest(),
            "build_ms": t_range.as_millis() as u64,
        },
        "stabbing": {
            "triangles": stab.n(),
            "stored_ids": stab_stored,
            "levels": stab_levels,
            "build_ms": t_stab.as_millis() as u64,
        },
        "segments": {
            "n": segs.n(),
            "build_ms": t_seg.as_millis() as u64,
        },
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string(&tree)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn ids_field(ids: &[usize]) -> String {
    let strs: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    strs.join(";")
}

fn cmd_query(
    ds: &DatasetArgs,
    params: &StructParams,
    query_file: &Option<PathBuf>,
    count: usize,
    out: &Option<PathBuf>,
    format: &str,
) -> Result<()> {
    let cfgs = configs(params)?;
    let data = load_dataset(ds)?;
    let queries: Vec<Query> = match query_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            io::parse_queries(&text)?
        }
        None => {
            let kinds = [
                QueryKind::Triangle,
                QueryKind::Halfplane,
                QueryKind::Point,
                QueryKind::Line,
                QueryKind::Segment,
                QueryKind::Ray,
            ];
            kinds
                .iter()
                .flat_map(|&k| gen::queries(k, count, ds.seed ^ xq_u64(k), &data))
                .collect()
        }
    };

    let need = |f: fn(&Query) -> bool| queries.iter().any(f);
    let range = if need(|q| matches!(q, Query::Triangle(_) | Query::Halfplane(..))) {
        Some(build_rangecount(&data.points, cfgs.range).map_err(|e| anyhow!("{e:?}"))?)
    } else {
        None
    };
    let stab = if need(|q| matches!(q, Query::Point(_))) {
        Some(build_stabbing(&data.triangles, cfgs.stab).map_err(|e| anyhow!("{e:?}"))?)
    } else {
        None
    };
    let segs = if need(|q| matches!(q, Query::Line(_) | Query::Segment(_))) {
        Some(build_segment_store(&data.segments, cfgs.seg).map_err(|e| anyhow!("{e:?}"))?)
    } else {
        None
    };
    let rays = if need(|q| matches!(q, Query::Ray(_))) {
        Some(build_rayshoot(&data.segments, cfgs.ray).map_err(|e| anyhow!("{e:?}"))?)
    } else {
        None
    };

    // (kind, answer, ids, visited) per query, order-preserving.
    let rows: Vec<(String, String, String, usize)> = map_batch(&queries, |q| match q {
        Query::Triangle([a, b, c]) => {
            let s = range.as_ref().unwrap().count(&triangle_query(a, b, c));
            ("triangle".into(), s.count.to_string(), String::new(), s.visited_cells)
        }
        Query::Halfplane(l, side) => {
            let q = RangeQuery::Simplex(vec![partree::cell::Halfplane::new(l.clone(), *side)]);
            let s = range.as_ref().unwrap().count(&q);
            ("halfplane".into(), s.count.to_string(), String::new(), s.visited_cells)
        }
        Query::Point(p) => {
            let st = stab.as_ref().unwrap();
            let ids = st.stab_report(p).expect("reporting enabled");
            ("stab".into(), ids.len().to_string(), ids_field(&ids), 0)
        }
        Query::Line(l) => {
            let hit = segs.as_ref().unwrap().detect_line(l);
            ("detect".into(), (hit as u8).to_string(), String::new(), 0)
        }
        Query::Segment(s) => {
            let ids = segs.as_ref().unwrap().report_intersecting(s);
            ("intersect".into(), ids.len().to_string(), ids_field(&ids), 0)
        }
        Query::Ray(r) => match rays.as_ref().unwrap().shoot(r) {
            Some(h) => ("shoot".into(), h.id.to_string(), format!("t={}", h.t), 0),
            None => ("shoot".into(), "-".into(), String::new(), 0),
        },
    });

    let text = match format {
        "csv" => {
            let mut s = String::from("# partree results v1\nindex,kind,answer,ids,visited\n");
            for (i, (kind, answer, ids, visited)) in rows.iter().enumerate() {
                let _ = writeln!(s, "{i},{kind},{answer},{ids},{visited}");
            }
            s
        }
        "json" => {
            let arr: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(i, (kind, answer, ids, visited))| {
                    json!({"index": i, "kind": kind, "answer": answer,
                           "ids": ids, "visited": visited})
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&arr)?)
        }
        other => bail!("unknown format `{other}` (expected csv|json)"),
    };
    write_out(out, &text)
}

// Seed tweak per query kind so batches differ.
#[allow(non_snake_case)]
fn xq_u64(k: QueryKind) -> u64 {
    match k {
        QueryKind::Triangle => 0x11,
        QueryKind::Halfplane => 0x22,
        QueryKind::Point => 0x33,
        QueryKind::Line => 0x44,
        QueryKind::Segment => 0x55,
        QueryKind::Ray => 0x66,
    }
}

/// Invariant audits plus oracle equivalence; returns the failure count.
fn verify_all(ds: &DatasetArgs, params: &StructParams, count: usize) -> Result<usize> {
    let cfgs = configs(params)?;
    let data = load_dataset(ds)?;
    let mut failures = 0usize;
    let mut check = |name: &str, res: std::result::Result<(), String>| match res {
        Ok(()) => println!("ok    {name}"),
        Err(w) => {
            failures += 1;
            println!("FAIL  {name}: {w}");
        }
    };

    let tree = build_tree(&data.points, tree_r(cfgs.r, data.points.len()), &cfgs.tree)
        .map_err(|e| anyhow!("tree build: {e:?}"))?;
    check("tree structure", tree.audit_structure().map(|_| ()));
    let tree2 = build_tree(&data.points, tree_r(cfgs.r, data.points.len()), &cfgs.tree)
        .map_err(|e| anyhow!("tree rebuild: {e:?}"))?;
    check(
        "tree determinism",
        if tree.digest() == tree2.digest() {
            Ok(())
        } else {
            Err(format!("{} != {}", tree.digest(), tree2.digest()))
        },
    );

    let range = build_rangecount(&data.points, cfgs.range).map_err(|e| anyhow!("{e:?}"))?;
    check("rangecount structure", range.audit_structure());
    let mut bad = None;
    for q in gen::queries(QueryKind::Triangle, count, ds.seed ^ 0x11, &data) {
        let Query::Triangle([a, b, c]) = &q else { unreachable!() };
        let rq = triangle_query(a, b, c);
        let got = range.count(&rq).count;
        let want = match &rq {
            RangeQuery::Simplex(cons) => oracle::count_in_simplex(&data.points, cons),
            RangeQuery::Segment(s) => {
                data.points.iter().filter(|p| s.contains(p)).count()
            }
            RangeQuery::Point(p) => data.points.iter().filter(|x| *x == p).count(),
        };
        if got != want {
            bad = Some(format!("triangle {a:?} {b:?} {c:?}: {got} != {want}"));
            break;
        }
    }
    check("rangecount vs oracle", bad.take().map_or(Ok(()), Err));

    let stab = build_stabbing(&data.triangles, cfgs.stab).map_err(|e| anyhow!("{e:?}"))?;
    for q in gen::queries(QueryKind::Point, count, ds.seed ^ 0x33, &data) {
        let Query::Point(p) = &q else { unreachable!() };
        let got = stab.stab_report(p).map_err(|e| anyhow!("{e:?}"))?;
        let want = oracle::stab_ids(&data.triangles, p);
        if got != want {
            bad = Some(format!("stab {p:?}: {got:?} != {want:?}"));
            break;
        }
    }
    check("stabbing vs oracle", bad.take().map_or(Ok(()), Err));

    let segs = build_segment_store(&data.segments, cfgs.seg).map_err(|e| anyhow!("{e:?}"))?;
    check("segment storage", segs.audit_storage());
    for q in gen::queries(QueryKind::Line, count, ds.seed ^ 0x44, &data) {
        let Query::Line(l) = &q else { unreachable!() };
        if segs.detect_line(l) != oracle::detect_line(&data.segments, l) {
            bad = Some(format!("detect {l:?}"));
            break;
        }
    }
    check("detection vs oracle", bad.take().map_or(Ok(()), Err));
    for q in gen::queries(QueryKind::Segment, count, ds.seed ^ 0x55, &data) {
        let Query::Segment(s) = &q else { unreachable!() };
        let got = segs.report_intersecting(s);
        let want = oracle::seg_intersect_ids(&data.segments, s);
        if got != want {
            bad = Some(format!("intersect {s:?}: {got:?} != {want:?}"));
            break;
        }
    }
    check("intersection vs oracle", bad.take().map_or(Ok(()), Err));

    match build_rayshoot(&data.segments, cfgs.ray) {
        Ok(rays) => {
            for q in gen::queries(QueryKind::Ray, count, ds.seed ^ 0x66, &data) {
                let Query::Ray(r) = &q else { unreachable!() };
                let got = rays.shoot(r).map(|h| (h.id, h.t));
                let want = oracle::first_hit(&data.segments, r);
                if got != want {
                    bad = Some(format!("shoot {r:?}: {got:?} != {want:?}"));
                    break;
                }
            }
            check("ray shooting vs oracle", bad.take().map_or(Ok(()), Err));
        }
        Err(e) => println!("skip  ray shooting (segments not disjoint: {e:?})"),
    }

    Ok(failures)
}

fn median(mut xs: Vec<u128>) -> u128 {
    xs.sort_unstable();
    if xs.is_empty() {
        0
    } else {
        xs[xs.len() / 2]
    }
}

fn cmd_bench(family: &str, seed: u64, count: usize, ns: &str, params: &StructParams) -> Result<()> {
    let family = Family::from_str(family).map_err(|e| anyhow!(e))?;
    let cfgs = configs(params)?;
    let sizes: Vec<usize> = ns
        .split(',')
        .map(|s| s.trim().parse().with_context(|| format!("bad size `{s}`")))
        .collect::<Result<_>>()?;
    println!("family,n,queries,median_visited,median_us,visited_ratio");
    let mut prev: Option<u128> = None;
    for &n in &sizes {
        let data = gen::dataset(family, n, seed, true);
        let range =
            build_rangecount(&data.points, cfgs.range.clone()).map_err(|e| anyhow!("{e:?}"))?;
        let queries = gen::queries(QueryKind::Triangle, count, seed ^ 0x11, &data);
        let mut visited = Vec::new();
        let mut times = Vec::new();
        for q in &queries {
            let Query::Triangle([a, b, c]) = q else { unreachable!() };
            let rq = triangle_query(a, b, c);
            let t0 = Instant::now();
            let s = range.count(&rq);
            times.push(t0.elapsed().as_micros());
            visited.push(s.visited_cells as u128);
        }
        let med_v = median(visited);
        let med_t = median(times);
        let ratio = prev.map_or("-".to_string(), |p| {
            if p == 0 {
                "-".to_string()
            } else {
                format!("{:.3}", med_v as f64 / p as f64)
            }
        });
        println!("{family},{n},{},{med_v},{med_t},{ratio}", queries.len());
        prev = Some(med_v);
    }
    Ok(())
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Gen { ds, out } => {
            let data = load_dataset(ds)?;
            write_out(out, &data.emit())?;
            Ok(0)
        }
        Cmd::Build { ds, params, out } => {
            cmd_build(ds, params, out)?;
            Ok(0)
        }
        Cmd::Query { ds, params, query_file, queries, out, format } => {
            cmd_query(ds, params, query_file, *queries, out, format)?;
            Ok(0)
        }
        Cmd::Verify { ds, params, queries, tree_json } => {
            if let Some(path) = tree_json {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let tree: PartitionTree = serde_json::from_str(&text)?;
                return match tree.audit_structure() {
                    Ok(_) => {
                        println!("ok    serialized tree");
                        Ok(0)
                    }
                    Err(w) => {
                        println!("FAIL  serialized tree: {w}");
                        Ok(1)
                    }
                };
            }
            let failures = verify_all(ds, params, *queries)?;
            Ok(if failures == 0 { 0 } else { 1 })
        }
        Cmd::Bench { family, seed, queries, ns, params } => {
            cmd_bench(family, *seed, *queries, ns, params)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
