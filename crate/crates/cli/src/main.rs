use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dctopo::analysis::{analyze, analyze_collective, CostMode};
use dctopo::cost::{measure_cost, CostModel, CostVector};
use dctopo::io::{
    parse_bandwidth, parse_bytes, parse_time, read_topology, schedule_from_jsonl, schedule_to_jsonl, topology_to_edge_list,
    topology_to_json, trace_from_csv,
};
use dctopo::lp::sp::integer_schedule;
use dctopo::materialize::{allgather, graph_of, reduce_scatter};
use dctopo::milp::emit_milp;
use dctopo::pareto::{
    baseline_costs, enumerate, pareto_tsv, sweep, theoretical_lower_bound, CollectiveKind, SearchOptions,
};
use dctopo::rational::{format_q, parse_q, to_f64};
use dctopo::schedule::{reverse_schedule, Collective};
use dctopo::sim::{compare, compare_tsv, simulate_allreduce};
use dctopo::validate::{check_bandwidth_optimal, check_moore_optimal, validate};
use dctopo::{parse_expr, Error};

#[derive(Parser)]
#[command(name = "dctopo", version, about = "Direct-connect topologies and collective schedules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct Setting {
    /// Per-step latency, e.g. 10us.
    #[arg(long, default_value = "10us")]
    alpha: String,
    /// Node bandwidth, e.g. 100Gbps.
    #[arg(long, default_value = "100Gbps")]
    bandwidth: String,
    /// Data size per node, e.g. 100MiB (MB means MiB).
    #[arg(long, default_value = "100MiB")]
    model_bytes: String,
}

impl Setting {
    fn model(&self) -> Result<CostModel, Error> {
        CostModel::new(
            parse_time(&self.alpha)?,
            parse_bandwidth(&self.bandwidth)?,
            parse_bytes(&self.model_bytes)? * 8.0,
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    #[value(name = "rs-ag")]
    RsAg,
    Allreduce,
}

impl From<Kind> for CollectiveKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::RsAg => CollectiveKind::RsAg,
            Kind::Allreduce => CollectiveKind::Allreduce,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleKind {
    Rs,
    Ag,
    Allreduce,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Edges,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pareto frontier of constructions for a size and degree, as TSV.
    Pareto {
        #[arg(long)]
        nodes: u64,
        #[arg(long)]
        degree: u64,
        #[command(flatten)]
        setting: Setting,
        #[arg(long, value_enum, default_value = "rs-ag")]
        collective: Kind,
        /// Bound the target generalized Kautz LP while pruning.
        #[arg(long)]
        fast: bool,
        /// Cost import-only bases with their buildable schedules.
        #[arg(long)]
        materialized: bool,
        #[arg(long, default_value_t = 6)]
        max_depth: usize,
        #[arg(long, default_value_t = 4)]
        max_power: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best construction and baselines for every N in a range, as TSV.
    Sweep {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long)]
        degree: u64,
        #[command(flatten)]
        setting: Setting,
        #[arg(long, value_enum, default_value = "rs-ag")]
        collective: Kind,
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a topology and its schedule; writes BASE.topology.json and
    /// BASE.rs.jsonl / BASE.ag.jsonl.
    Schedule {
        #[arg(long)]
        expr: String,
        #[arg(long, value_enum, default_value = "rs")]
        collective: ScheduleKind,
        /// Chunks in multiples of 1/P of a shard, rounded from the LP.
        #[arg(long)]
        granularity: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a schedule against a topology; exit 1 when invalid.
    Validate {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Write the topology of an expression.
    Graph {
        #[arg(long)]
        expr: String,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-layer allreduce finish times for a trace.
    Simulate {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, conflicts_with_all = ["x", "y", "compare"])]
        expr: Option<String>,
        #[arg(long, requires = "y")]
        x: Option<u32>,
        /// Bandwidth coefficient, decimal or p/q.
        #[arg(long, requires = "x")]
        y: Option<String>,
        /// Compare the frontier for --nodes/--degree against ring, tree and bound.
        #[arg(long, requires_all = ["nodes", "degree"])]
        compare: bool,
        #[arg(long)]
        nodes: Option<u64>,
        #[arg(long)]
        degree: Option<u64>,
        #[arg(long, default_value = "10us")]
        alpha: String,
        #[arg(long, default_value = "100Gbps")]
        bandwidth: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the topology-synthesis MILP in LP format.
    EmitMilp {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 1.0)]
        capacity: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moore-bound latency with optimal bandwidth, plus ring and tree allreduce.
    LowerBound {
        #[arg(long)]
        nodes: u64,
        #[arg(long)]
        degree: u64,
        #[command(flatten)]
        setting: Setting,
    },
}

enum Failure {
    Invalid(Value),
    Err(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Err(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Err(e.into())
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(p: &Path) -> Result<String, Error> {
    fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cost_json(c: &CostVector) -> Value {
    json!({"x": c.x, "y": format_q(&c.y), "y_decimal": to_f64(&c.y)})
}

fn search_options(fast: bool, materialized: bool, max_depth: usize, max_power: usize) -> SearchOptions {
    let mut o = SearchOptions {
        fast,
        ..SearchOptions::default()
    };
    if materialized {
        o.mode = CostMode::Materialized;
    }
    o.limits.max_depth = max_depth;
    o.limits.max_power = max_power;
    o
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Pareto {
            nodes,
            degree,
            setting,
            collective,
            fast,
            materialized,
            max_depth,
            max_power,
            out,
        } => {
            let cm = setting.model()?;
            let entries = enumerate(nodes, degree, &search_options(fast, materialized, max_depth, max_power))?;
            emit(&out, &pareto_tsv(nodes, degree, &entries, &cm, collective.into()))?;
        }
        Cmd::Sweep {
            from,
            to,
            degree,
            setting,
            collective,
            fast,
            out,
        } => {
            let cm = setting.model()?;
            let rows = sweep(from..=to, degree, &cm, collective.into(), &search_options(fast, false, 6, 4))?;
            let mut text = String::from("N\tbest\tx\ty\truntime_ms\tfallback\tlower_bound_ms\tring_ms\tdbt_ms\n");
            for r in rows {
                let (name, x, y, t, fb) = match &r.best {
                    Some((e, t)) => (e.expr.to_string(), e.cost.x, to_f64(&e.cost.y), *t, e.fallback),
                    None => ("-".into(), 0, 0.0, f64::NAN, false),
                };
                text.push_str(&format!(
                    "{}\t{name}\t{x}\t{y:.6}\t{:.3}\t{fb}\t{:.3}\t{:.3}\t{:.3}\n",
                    r.n,
                    t * 1e3,
                    r.lower_bound.runtime * 1e3,
                    r.baselines.ring * 1e3,
                    r.baselines.dbt * 1e3
                ));
            }
            emit(&out, &text)?;
        }
        Cmd::Schedule {
            expr,
            collective,
            granularity,
            out,
        } => {
            let e = parse_expr(&expr)?;
            let mut files = Vec::new();
            let (graph, rs, ag) = match granularity {
                Some(p) => {
                    let g = graph_of(&e)?;
                    let (s, _) = integer_schedule(&g, p)?;
                    let gt = g.transpose();
                    let (st, _) = integer_schedule(&gt, p)?;
                    (g, s, reverse_schedule(&st).sorted())
                }
                None => {
                    let needs_ag = !matches!(collective, ScheduleKind::Rs);
                    let needs_rs = !matches!(collective, ScheduleKind::Ag);
                    let rs = if needs_rs { Some(reduce_scatter(&e)?) } else { None };
                    let ag = if needs_ag { Some(allgather(&e)?) } else { None };
                    let graph = rs.as_ref().or(ag.as_ref()).map(|m| m.graph.clone()).unwrap();
                    let empty = |k| dctopo::Schedule::new(k, vec![]);
                    (
                        graph,
                        rs.map(|m| m.schedule)
                            .unwrap_or_else(|| empty(dctopo::Collective::ReduceScatter)),
                        ag.map(|m| m.schedule).unwrap_or_else(|| empty(dctopo::Collective::Allgather)),
                    )
                }
            };
            let n = graph.node_count();
            let topo = with_suffix(&out, ".topology.json");
            fs::write(&topo, topology_to_json(&graph))?;
            files.push(topo.display().to_string());
            let mut costs = serde_json::Map::new();
            if !matches!(collective, ScheduleKind::Ag) {
                let p = with_suffix(&out, ".rs.jsonl");
                fs::write(&p, schedule_to_jsonl(&rs, n))?;
                files.push(p.display().to_string());
                costs.insert("reduce-scatter".into(), cost_json(&measure_cost(&rs, &graph)?));
            }
            if !matches!(collective, ScheduleKind::Rs) {
                let p = with_suffix(&out, ".ag.jsonl");
                fs::write(&p, schedule_to_jsonl(&ag, n))?;
                files.push(p.display().to_string());
                costs.insert("allgather".into(), cost_json(&measure_cost(&ag, &graph)?));
            }
            let report = json!({
                "expr": e.to_string(),
                "n": n,
                "degree": graph.regular_degree(),
                "cost": costs,
                "files": files,
            });
            println!("{report}");
        }
        Cmd::Validate { topology, schedule } => {
            let g = read_topology(&read(&topology)?)?;
            let (s, n) = schedule_from_jsonl(&read(&schedule)?)?;
            if n != g.node_count() {
                return Err(Error::Format(format!(
                    "schedule is for {n} nodes, topology has {}",
                    g.node_count()
                ))
                .into());
            }
            let v = validate(&s, &g)?;
            let missing: Vec<Value> = v
                .missing
                .iter()
                .take(20)
                .map(|m| {
                    let ivs: Vec<(String, String)> = m
                        .uncovered
                        .intervals()
                        .iter()
                        .map(|(a, b)| (format_q(a), format_q(b)))
                        .collect();
                    json!({"root": m.root, "node": m.node, "uncovered": ivs})
                })
                .collect();
            let mut report = json!({
                "valid": v.ok,
                "kind": s.kind.as_str(),
                "missing_count": v.missing.len(),
                "missing": missing,
            });
            if v.ok {
                let c = measure_cost(&s, &g)?;
                report["cost"] = cost_json(&c);
                report["bandwidth_optimal"] = json!(check_bandwidth_optimal(&s, &g)?.optimal);
                report["moore_optimal"] = json!(check_moore_optimal(&s, &g)?);
                println!("{report}");
            } else {
                return Err(Failure::Invalid(report));
            }
        }
        Cmd::Graph { expr, format, out } => {
            let g = graph_of(&parse_expr(&expr)?)?;
            let text = match format {
                GraphFormat::Json => topology_to_json(&g) + "\n",
                GraphFormat::Edges => topology_to_edge_list(&g),
            };
            emit(&out, &text)?;
        }
        Cmd::Simulate {
            trace,
            expr,
            x,
            y,
            compare: cmp,
            nodes,
            degree,
            alpha,
            bandwidth,
            out,
        } => {
            let t = trace_from_csv(&read(&trace)?)?;
            let (alpha, bw) = (parse_time(&alpha)?, parse_bandwidth(&bandwidth)?);
            if cmp {
                let (n, d) = (nodes.unwrap(), degree.unwrap());
                let entries = enumerate(n, d, &SearchOptions::default())?;
                emit(&out, &compare_tsv(&compare(&t, &entries, n, d, alpha, bw)))?;
                return Ok(());
            }
            let (cost, ag_cost) = match (expr, x, y) {
                (Some(e), _, _) => {
                    let e = parse_expr(&e)?;
                    let rs = analyze(&e, CostMode::Table)?.cost;
                    let ag = analyze_collective(&e, CostMode::Table, Collective::Allgather)?.cost;
                    (rs, ag)
                }
                (None, Some(x), Some(y)) => {
                    let yq = parse_q(&y)
                        .or_else(|| y.parse::<f64>().ok().map(|v| dctopo::rational::snap(v, 1_000_000)))
                        .ok_or(Error::InvalidParam(format!("bad y '{y}'")))?;
                    (CostVector::new(x, yq), CostVector::new(x, yq))
                }
                _ => {
                    return Err(Error::InvalidParam("give --expr, --x and --y, or --compare".into()).into());
                }
            };
            let r = simulate_allreduce(&t, &cost, &ag_cost, alpha, bw);
            let mut text = String::from("layer\tready_ms\tduration_ms\tfinish_ms\n");
            for (i, (l, (d, f))) in t.layers().iter().zip(r.durations.iter().zip(&r.finish)).enumerate() {
                text.push_str(&format!(
                    "{i}\t{:.6}\t{:.6}\t{:.6}\n",
                    l.ready * 1e3,
                    d * 1e3,
                    f * 1e3
                ));
            }
            text.push_str(&format!(
                "# f_max_ms={:.6} avg_layer_ms={:.6}\n",
                r.f_max * 1e3,
                r.avg_duration() * 1e3
            ));
            emit(&out, &text)?;
        }
        Cmd::EmitMilp {
            nodes,
            degree,
            capacity,
            out,
        } => emit(&out, &emit_milp(nodes, degree, capacity)?)?,
        Cmd::LowerBound { nodes, degree, setting } => {
            let cm = setting.model()?;
            let lb = theoretical_lower_bound(nodes, degree, &cm);
            let b = baseline_costs(nodes, &cm);
            let report = json!({
                "n": nodes,
                "degree": degree,
                "x": lb.x,
                "y": format_q(&lb.y),
                "runtime_ms": lb.runtime * 1e3,
                "ring_allreduce_ms": b.ring * 1e3,
                "dbt_allreduce_ms": b.dbt * 1e3,
            });
            println!("{report}");
        }
    }
    Ok(())
}

/// Bad input exits 2, a topology or solver that cannot deliver exits 3.
fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Parse { .. } => ("parse", 2),
        Error::InvalidParam(_) => ("invalid-param", 2),
        Error::Io(_) => ("io", 2),
        Error::Format(_)
        | Error::EndpointOutOfRange { .. }
        | Error::UnknownArc(_)
        | Error::UnknownNode(_)
        | Error::StepOutOfRange { .. }
        | Error::EmptyChunk
        | Error::WrongKind { .. } => ("format", 2),
        Error::Solver(_) => ("solver", 3),
        _ => ("construction", 3),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            eprintln!("{}", json!({"error": msg.trim(), "kind": "usage"}));
            return ExitCode::from(2);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(report)) => {
            println!("{report}");
            eprintln!("{}", json!({"error": "schedule is not valid", "kind": "validation"}));
            ExitCode::from(1)
        }
        Err(Failure::Err(e)) => {
            let (kind, code) = error_kind(&e);
            let mut v = json!({"error": e.to_string(), "kind": kind});
            if let Error::Parse { pos, .. } = e {
                v["position"] = json!(pos);
            }
            eprintln!("{v}");
            ExitCode::from(code)
        }
    }
}
