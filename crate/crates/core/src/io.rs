//! File formats: topology JSON and edge lists, schedule JSONL, layer-trace
//! CSV, and numbers with unit suffixes.
//!
//! Byte suffixes are binary (`MB` and `MiB` both mean 2^20 bytes) and
//! bandwidth suffixes decimal (`Gbps` is 10^9 bits per second).

use serde::{Deserialize, Serialize};

use crate::chunk::ChunkSet;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::rational::{format_q, parse_q};
use crate::schedule::{Collective, Schedule, Transfer};
use crate::sim::{Layer, LayerTrace};

#[derive(Serialize, Deserialize)]
struct TopologyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    n: usize,
    arcs: Vec<(usize, usize)>,
}

/// `{"label", "n", "arcs": [[src, dst], ...]}`; arc ids are list positions.
pub fn topology_to_json(g: &Digraph) -> String {
    let t = TopologyJson {
        label: g.label().map(str::to_string),
        n: g.node_count(),
        arcs: g.arc_pairs(),
    };
    serde_json::to_string(&t).expect("topology serializes")
}

pub fn topology_from_json(text: &str) -> Result<Digraph> {
    let t: TopologyJson = serde_json::from_str(text).map_err(|e| Error::Format(format!("topology: {e}")))?;
    let g = Digraph::new(t.n, &t.arcs)?;
    Ok(match t.label {
        Some(l) => g.with_label(l),
        None => g,
    })
}

/// `# n=<N>` then one `src dst` line per arc.
pub fn topology_to_edge_list(g: &Digraph) -> String {
    let mut out = format!("# n={}\n", g.node_count());
    if let Some(l) = g.label() {
        out.push_str(&format!("# label={l}\n"));
    }
    for (s, d) in g.arc_pairs() {
        out.push_str(&format!("{s} {d}\n"));
    }
    out
}

pub fn topology_from_edge_list(text: &str) -> Result<Digraph> {
    let mut n = None;
    let mut label = None;
    let mut arcs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(c) = l.strip_prefix('#') {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("n=") {
                n = Some(v.trim().parse().map_err(|_| Error::Format(format!("line {}: bad node count", i + 1)))?);
            } else if let Some(v) = c.strip_prefix("label=") {
                label = Some(v.to_string());
            }
            continue;
        }
        if l.is_empty() {
            continue;
        }
        let mut it = l.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(s)), Some(Ok(d)), None) => arcs.push((s, d)),
            _ => return Err(Error::Format(format!("line {}: expected 'src dst'", i + 1))),
        }
    }
    let n = n.unwrap_or_else(|| arcs.iter().map(|&(s, d)| s.max(d) + 1).max().unwrap_or(0));
    let g = Digraph::new(n, &arcs)?;
    Ok(match label {
        Some(l) => g.with_label(l),
        None => g,
    })
}

/// Reads JSON when the text starts with `{`, an edge list otherwise.
pub fn read_topology(text: &str) -> Result<Digraph> {
    if text.trim_start().starts_with('{') {
        topology_from_json(text)
    } else {
        topology_from_edge_list(text)
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleHeader {
    kind: String,
    t_max: u32,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct TransferJson {
    root: usize,
    chunk: Vec<(String, String)>,
    arc: usize,
    step: u32,
}

/// Header `{"kind", "t_max", "n"}` then one transfer per line; chunk
/// endpoints are exact rationals written `p/q`.
pub fn schedule_to_jsonl(s: &Schedule, n: usize) -> String {
    let header = ScheduleHeader {
        kind: s.kind.as_str().to_string(),
        t_max: s.t_max,
        n,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for t in &s.transfers {
        let tj = TransferJson {
            root: t.root,
            chunk: t.chunk.intervals().iter().map(|(a, b)| (format_q(a), format_q(b))).collect(),
            arc: t.arc,
            step: t.step,
        };
        out.push_str(&serde_json::to_string(&tj).expect("transfer serializes"));
        out.push('\n');
    }
    out
}

/// Returns the schedule and the node count from its header.
pub fn schedule_from_jsonl(text: &str) -> Result<(Schedule, usize)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(Error::Format("schedule: empty file".into()))?;
    let h: ScheduleHeader = serde_json::from_str(first).map_err(|e| Error::Format(format!("schedule header: {e}")))?;
    let kind = Collective::parse(&h.kind).ok_or(Error::Format(format!("schedule: unknown kind '{}'", h.kind)))?;
    let mut ts = Vec::new();
    for (i, l) in lines {
        let t: TransferJson = serde_json::from_str(l).map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
        let mut ivs = Vec::with_capacity(t.chunk.len());
        for (a, b) in &t.chunk {
            let (Some(a), Some(b)) = (parse_q(a), parse_q(b)) else {
                return Err(Error::Format(format!("line {}: bad chunk endpoint", i + 1)));
            };
            ivs.push((a, b));
        }
        ts.push(Transfer::new(t.root, ChunkSet::from_intervals(ivs), t.arc, t.step));
    }
    Ok((Schedule::with_t_max(kind, ts, h.t_max), h.n))
}

/// `ready_us,size_bytes` rows; returned in seconds and bits.
pub fn trace_from_csv(text: &str) -> Result<LayerTrace> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == "ready_us,size_bytes" => {}
        _ => return Err(Error::Format("trace: expected header 'ready_us,size_bytes'".into())),
    }
    let mut layers = Vec::new();
    for (i, l) in lines {
        let mut it = l.split(',').map(|v| v.trim().parse::<f64>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(r)), Some(Ok(b)), None) => layers.push(Layer {
                ready: r * 1e-6,
                bits: b * 8.0,
            }),
            _ => return Err(Error::Format(format!("trace line {}: expected 'ready_us,size_bytes'", i + 1))),
        }
    }
    LayerTrace::new(layers)
}

fn split_unit(s: &str) -> Result<(f64, String)> {
    let s = s.trim();
    let num = s.trim_end_matches(|c: char| c.is_ascii_alphabetic() || c == 'µ');
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad number '{s}'")))?;
    Ok((v, s[num.len()..].to_string()))
}

/// Seconds; accepts `s`, `ms`, `us`, `µs`, `ns` or no suffix (seconds).
pub fn parse_time(s: &str) -> Result<f64> {
    let (v, u) = split_unit(s)?;
    let scale = match u.as_str() {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" => 1e-6,
        "ns" => 1e-9,
        _ => return Err(Error::InvalidParam(format!("unknown time unit '{u}'"))),
    };
    Ok(v * scale)
}

/// Bytes; `KB`/`KiB`, `MB`/`MiB`, `GB`/`GiB` are powers of 1024.
pub fn parse_bytes(s: &str) -> Result<f64> {
    let (v, u) = split_unit(s)?;
    let scale = match u.as_str() {
        "" | "B" => 1.0,
        "KB" | "KiB" => 1024.0,
        "MB" | "MiB" => 1024.0 * 1024.0,
        "GB" | "GiB" => 1024.0 * 1024.0 * 1024.0,
        _ => return Err(Error::InvalidParam(format!("unknown size unit '{u}'"))),
    };
    Ok(v * scale)
}

/// Bits per second; `Kbps`, `Mbps`, `Gbps`, `Tbps` are powers of 1000.
pub fn parse_bandwidth(s: &str) -> Result<f64> {
    let (v, u) = split_unit(s)?;
    let scale = match u.as_str() {
        "" | "bps" => 1.0,
        "Kbps" => 1e3,
        "Mbps" => 1e6,
        "Gbps" => 1e9,
        "Tbps" => 1e12,
        _ => return Err(Error::InvalidParam(format!("unknown bandwidth unit '{u}'"))),
    };
    Ok(v * scale)
}
