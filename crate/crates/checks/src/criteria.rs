//! Runners for the ten acceptance criteria. Each returns an [`Outcome`]
//! whose detail text is deterministic; timings are kept separately.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use codebadger_core::analyses::{
    find_bounds_checks, find_taint_flows, get_program_slice, resolve_point, SourceSinkConfig, TaintPath,
};
use codebadger_core::config::Config;
use codebadger_core::cpg::{Cpg, NodeId, NodeKind};
use codebadger_core::session::SessionManager;
use codebadger_core::tools::{dispatch, manifest, ToolRequest, ToolResponse};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::corpus::{self, FlowPair, Program};
use crate::gen;
use crate::oracle::{self, SliceOracle};

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    /// One table row; contains no timing.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{:>2}  {verdict}  {:<28} {}", self.id, self.name, self.detail)
    }
}

pub const NAMES: [&str; 10] = [
    "taint oracle equivalence",
    "path cap semantics",
    "slice fixpoint",
    "slice reduction",
    "dataflow/control oracles",
    "bounds-check ordering",
    "cache correctness",
    "async equivalence",
    "workflow replay",
    "determinism",
];

fn outcome(id: u8, start: Instant, failures: &[String], summary: String) -> Outcome {
    let detail = match failures.first() {
        None => summary,
        Some(first) => format!("{summary}; {} failure(s), first: {first}", failures.len()),
    };
    Outcome {
        id,
        name: NAMES[id as usize - 1],
        passed: failures.is_empty(),
        detail,
        elapsed: start.elapsed(),
    }
}

fn flow_pair(p: &TaintPath) -> FlowPair {
    FlowPair {
        source_file: p.source.file.clone(),
        source_line: p.source.line,
        sink_file: p.sink.file.clone(),
        sink_line: p.sink.line,
    }
}

fn first_diff(a: &BTreeSet<FlowPair>, b: &BTreeSet<FlowPair>) -> String {
    if let Some(x) = a.difference(b).next() {
        return format!("extra {x}");
    }
    match b.difference(a).next() {
        Some(x) => format!("missing {x}"),
        None => String::new(),
    }
}

/// Taint results equal the brute-force oracle's (source, sink) pairs on
/// every corpus program, with planted flows present and clean sinks
/// untouched.
pub fn taint_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let config = SourceSinkConfig::default();
    let programs = corpus::taint_corpus();
    let mut failures = Vec::new();
    let (mut flows, mut planted_total, mut interprocedural) = (0, 0, 0);
    for p in &programs {
        let statements: usize = p.files.iter().map(|f| gen::statement_count(&f.content)).sum();
        if statements > 60 {
            failures.push(format!("{}: {statements} statements", p.name));
        }
        let cpg = p.cpg();
        let paths = find_taint_flows(&cpg, &config, 1000);
        let actual: BTreeSet<FlowPair> = paths.iter().map(flow_pair).collect();
        let expected = oracle::taint_pairs(&cpg, &config);
        if actual != expected {
            failures.push(format!("{}: {}", p.name, first_diff(&actual, &expected)));
        }
        let planted = p.planted();
        planted_total += planted.len();
        if let Some(miss) = planted.difference(&actual).next() {
            failures.push(format!("{}: planted flow {miss} not found", p.name));
        }
        let clean = p.clean_sinks();
        if let Some(hit) = actual
            .iter()
            .find(|f| clean.contains(&(f.sink_file.clone(), f.sink_line)))
        {
            failures.push(format!("{}: clean sink reached by {hit}", p.name));
        }
        flows += actual.len();
        interprocedural += paths.iter().filter(|t| t.source.method != t.sink.method).count();
    }
    if programs.len() < 25 {
        failures.push(format!("only {} programs", programs.len()));
    }
    if interprocedural == 0 {
        failures.push("no inter-procedural flow in corpus".into());
    }
    if start.elapsed() >= Duration::from_secs(10) {
        failures.push("over 10 s".into());
    }
    outcome(
        1,
        start,
        &failures,
        format!(
            "{} programs, {flows} flows ({interprocedural} inter-procedural), {planted_total} planted",
            programs.len()
        ),
    )
}

fn sort_key(p: &TaintPath) -> (usize, &str, u32, &str, u32, u32, u32, NodeId, NodeId) {
    (
        p.length,
        &p.source.file,
        p.source.line,
        &p.sink.file,
        p.sink.line,
        p.source.col,
        p.sink.col,
        p.source.node_id,
        p.sink.node_id,
    )
}

/// `|find_taint_flows(M)| = min(M, true count)` and every capped result is
/// a prefix of the uncapped, sorted one.
pub fn path_cap_semantics() -> Outcome {
    let start = Instant::now();
    let config = SourceSinkConfig::default();
    let mut failures = Vec::new();
    let mut runs = 0;
    for p in corpus::taint_corpus() {
        let cpg = p.cpg();
        let truth = oracle::taint_pairs(&cpg, &config).len();
        let full = find_taint_flows(&cpg, &config, usize::MAX);
        if full.len() != truth {
            failures.push(format!("{}: {} paths, oracle {truth}", p.name, full.len()));
        }
        if !full.windows(2).all(|w| sort_key(&w[0]) <= sort_key(&w[1])) {
            failures.push(format!("{}: not in documented order", p.name));
        }
        let mut caps = vec![1, 2, 3, truth, truth + 5];
        caps.retain(|&m| m > 0);
        for m in caps {
            runs += 1;
            let capped = find_taint_flows(&cpg, &config, m);
            if capped.len() != m.min(truth) {
                failures.push(format!("{}: M={m} gave {}", p.name, capped.len()));
            } else if capped[..] != full[..capped.len()] {
                failures.push(format!("{}: M={m} not a prefix", p.name));
            }
        }
    }
    outcome(2, start, &failures, format!("{runs} capped runs"))
}

fn statements(cpg: &Cpg) -> Vec<NodeId> {
    cpg.methods()
        .iter()
        .flat_map(|m| m.cfg_nodes.iter().copied())
        .filter(|&n| !matches!(cpg.node(n).kind, NodeKind::Method | NodeKind::MethodReturn))
        .collect()
}

pub const SLICE_SAMPLES: usize = 120;

/// Slices at random criteria equal the whole-set fixpoint oracle, contain
/// the criterion, and are minimal under closure.
pub fn slice_fixpoint() -> Outcome {
    let start = Instant::now();
    let programs = corpus::everything();
    let graphs: Vec<(String, Cpg)> = programs.iter().map(|p| (p.name.clone(), p.cpg())).collect();
    let oracles: Vec<SliceOracle> = graphs.iter().map(|(_, g)| SliceOracle::new(g)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ce);
    let mut failures = Vec::new();
    let mut total_points = 0;
    for _ in 0..SLICE_SAMPLES {
        let i = rng.random_range(0..graphs.len());
        let (name, cpg) = &graphs[i];
        let stmts = statements(cpg);
        let c = stmts[rng.random_range(0..stmts.len())];
        let at = format!("{name} node {c} line {}", cpg.node(c).line);
        let slice: BTreeSet<NodeId> = get_program_slice(cpg, c).points.into_iter().collect();
        total_points += slice.len();
        let expected = oracles[i].slice(c);
        if slice != expected {
            failures.push(format!("{at}: {} points, oracle {}", slice.len(), expected.len()));
            continue;
        }
        if !slice.contains(&c) {
            failures.push(format!("{at}: criterion missing"));
        }
        if !oracles[i].is_closed(&slice) {
            failures.push(format!("{at}: not closed"));
        }
        if let Some(p) = oracles[i].removable(&slice, c).first() {
            failures.push(format!("{at}: removing node {p} keeps closure"));
        }
    }
    outcome(
        3,
        start,
        &failures,
        format!("{SLICE_SAMPLES} criteria, {total_points} points checked"),
    )
}

/// Slice sizes on the 300-line program as a fraction of its lines.
pub fn slice_reduction() -> Outcome {
    let start = Instant::now();
    let p = corpus::slice_program();
    let cpg = p.cpg();
    let total = p.line_count();
    let mut failures = Vec::new();
    let mut sizes = Vec::new();
    for line in corpus::SLICE_CRITERIA {
        match resolve_point(&cpg, "inventory.c", line, None) {
            Ok(id) => sizes.push(get_program_slice(&cpg, id).lines.len()),
            Err(e) => failures.push(format!("line {line}: {e}")),
        }
    }
    let methods = cpg.methods().len();
    let pct = |n: f64| 100.0 * n / total as f64;
    let mean = pct(sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64);
    let min = pct(sizes.iter().copied().min().unwrap_or(total) as f64);
    if total != 300 || methods != 12 {
        failures.push(format!("program has {total} lines and {methods} functions"));
    }
    if mean > 40.0 {
        failures.push(format!("mean {mean:.1}% over 40%"));
    }
    if min > 10.0 {
        failures.push(format!("smallest {min:.1}% over 10%"));
    }
    if start.elapsed() >= Duration::from_secs(2) {
        failures.push("over 2 s".into());
    }
    let listed: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    outcome(
        4,
        start,
        &failures,
        format!(
            "{total} lines, slice sizes [{}], mean {mean:.1}%, min {min:.1}%",
            listed.join(" ")
        ),
    )
}

pub const ORACLE_MAX_CFG_NODES: usize = 12;

/// REACHING_DEF and CDG edges, and dominators, against the textbook
/// definitions on every corpus method with a small CFG.
pub fn dataflow_control_oracles() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut methods, mut rd_edges, mut cd_edges) = (0, 0, 0);
    for p in corpus::everything() {
        let cpg = p.cpg();
        for m in cpg.methods() {
            if m.cfg_nodes.len() > ORACLE_MAX_CFG_NODES {
                continue;
            }
            methods += 1;
            let at = format!("{}::{}", p.name, m.name);
            let rd = oracle::reaching_definitions(&cpg, m);
            if rd != oracle::reaching_def_edges(&cpg, m) {
                failures.push(format!("{at}: REACHING_DEF differs"));
            }
            let cd = oracle::control_dependences(&cpg, m);
            if cd != oracle::cdg_edges(&cpg, m) {
                failures.push(format!("{at}: CDG differs"));
            }
            for (n, doms) in oracle::dominators(&cpg, m) {
                let tree: BTreeSet<NodeId> = m.cfg_nodes.iter().copied().filter(|&d| m.dom.dominates(d, n)).collect();
                if tree != doms {
                    failures.push(format!("{at}: dominators of node {n} differ"));
                }
            }
            rd_edges += rd.len();
            cd_edges += cd.len();
        }
    }
    outcome(
        5,
        start,
        &failures,
        format!("{methods} methods, {rd_edges} REACHING_DEF and {cd_edges} CDG edges"),
    )
}

fn bounds_summary(p: &Program, line: u32, failures: &mut Vec<String>) -> Option<(usize, usize)> {
    let cpg = p.cpg();
    let report = match find_bounds_checks(&cpg, "strip.c", line, None) {
        Ok(r) => r,
        Err(e) => {
            failures.push(format!("{}: {e}", p.name));
            return None;
        }
    };
    let access = report.access.node_id;
    let method = cpg.method_of(access)?;
    let doms = oracle::dominators(&cpg, method);
    for c in &report.checks {
        let stmt = cpg.statement_of(c.check.node_id)?;
        let expected = stmt != access && doms.get(&access).is_some_and(|d| d.contains(&stmt));
        if c.dominates_access != expected {
            failures.push(format!(
                "{}: check at line {} disagrees with dominator oracle",
                p.name, c.check.line
            ));
        }
    }
    let before = report.checks.iter().filter(|c| c.dominates_access).count();
    Some((report.checks.len(), before))
}

/// Check-after-use on the vulnerable strip reader; check-before-use once
/// patched.
pub fn bounds_check_ordering() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (vl, pl) = corpus::BOUNDS_ACCESS_LINE;
    let vuln = bounds_summary(&corpus::bounds_vulnerable(), vl, &mut failures);
    let patched = bounds_summary(&corpus::bounds_patched(), pl, &mut failures);
    let mut summary = String::new();
    if let (Some((vn, vb)), Some((pn, pb))) = (vuln, patched) {
        if vn == 0 || vb != 0 {
            failures.push(format!("vulnerable: {vn} checks, {vb} before the access"));
        }
        if pb == 0 {
            failures.push(format!("patched: {pn} checks, none before the access"));
        }
        summary = format!("vulnerable {vb}/{vn} checks dominate the access, patched {pb}/{pn}");
    }
    outcome(6, start, &failures, summary)
}

/// Tool calls exercising every session tool against one codebase.
pub fn sample_calls(cpg: &Cpg) -> Vec<(&'static str, Value)> {
    let file = cpg.files()[0].path.clone();
    let methods: Vec<&str> = cpg.methods().iter().map(|m| m.name.as_str()).collect();
    let first = methods.first().copied().unwrap_or("main");
    let last = methods.last().copied().unwrap_or("main");
    let stmt = statements(cpg)
        .into_iter()
        .rev()
        .find(|&n| cpg.node(n).kind == NodeKind::Call || cpg.node(n).kind == NodeKind::Assign)
        .map(|n| (cpg.file(cpg.node(n).file).path.clone(), cpg.node(n).line))
        .unwrap_or((file.clone(), 1));
    let index = cpg
        .nodes()
        .iter()
        .find(|n| n.kind == NodeKind::Operator && n.name.as_deref() == Some("[]"))
        .map(|n| (cpg.file(n.file).path.clone(), n.line))
        .unwrap_or(stmt.clone());
    vec![
        ("get_codebase_summary", json!({})),
        ("list_methods", json!({})),
        ("list_methods", json!({"pattern": "m*", "limit": 1})),
        ("get_method_source", json!({"name": first})),
        ("list_calls", json!({})),
        ("list_calls", json!({"pattern": "*", "within": last})),
        (
            "get_code_snippet",
            json!({"file": file, "start_line": 1, "end_line": 4}),
        ),
        ("get_data_dependencies", json!({"file": stmt.0, "line": stmt.1})),
        (
            "get_data_dependencies",
            json!({"file": stmt.0, "line": stmt.1, "direction": "forward", "depth": 3}),
        ),
        ("get_program_slice", json!({"file": stmt.0, "line": stmt.1})),
        ("find_taint_sources", json!({})),
        ("find_taint_sinks", json!({})),
        ("find_taint_flows", json!({})),
        ("find_taint_flows", json!({"max_paths": 1})),
        ("find_bounds_checks", json!({"file": index.0, "line": index.1})),
        ("get_call_graph", json!({"root": last})),
        ("check_reachability", json!({"from": last, "to": first})),
        ("search_literals", json!({})),
        ("search_literals", json!({"kind": "string"})),
        ("run_structured_query", json!({"kind": "Call"})),
        (
            "run_structured_query",
            json!({"kind": "Assign", "expand": {"edge_kind": "REACHING_DEF", "direction": "forward"}}),
        ),
    ]
}

fn request(session: Option<&str>, params: Value, is_async: bool) -> ToolRequest {
    ToolRequest {
        tool: None,
        session_id: session.map(String::from),
        params,
        is_async,
    }
}

fn body(resp: &ToolResponse) -> String {
    match resp {
        ToolResponse::Ok { result } => serde_json::to_string(result).unwrap_or_default(),
        ToolResponse::Error { error } => {
            let v = serde_json::to_value(error).unwrap_or_default();
            format!("error {}", serde_json::to_string(&v).unwrap_or_default())
        }
        ToolResponse::Accepted { .. } => "accepted".into(),
    }
}

fn session_id(resp: &ToolResponse) -> Option<String> {
    match resp {
        ToolResponse::Ok { result } => result["session_id"].as_str().map(String::from),
        _ => None,
    }
}

fn without_ids(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        for k in ["session_id", "job_id", "created_at", "started_at", "finished_at"] {
            o.remove(k);
        }
    }
    v
}

struct Workspace {
    _dir: tempfile::TempDir,
    cache: std::path::PathBuf,
    sources: Vec<(Program, String)>,
}

fn workspace() -> std::io::Result<Workspace> {
    let dir = tempfile::tempdir()?;
    let cache = dir.path().join("cache");
    let mut sources = Vec::new();
    for p in corpus::everything() {
        let root = dir.path().join("src").join(&p.name);
        p.write_to(&root)?;
        sources.push((p, root.to_string_lossy().into_owned()));
    }
    Ok(Workspace {
        _dir: dir,
        cache,
        sources,
    })
}

fn manager(cache: &Path) -> Arc<SessionManager> {
    SessionManager::new(Config {
        cache_root: cache.to_path_buf(),
        cache_entries: 256,
        ..Config::default()
    })
}

fn create(m: &Arc<SessionManager>, source: &str) -> ToolResponse {
    dispatch(m, "create_cpg_session", request(None, json!({"source": source}), false))
}

/// A second session on identical bytes builds nothing and answers every
/// query identically; so does a fresh process loading from disk.
pub fn cache_correctness() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let ws = match workspace() {
        Ok(w) => w,
        Err(e) => return outcome(7, start, &[format!("workspace: {e}")], String::new()),
    };
    let first = manager(&ws.cache);
    let mut queries = 0;
    for (p, source) in &ws.sources {
        let built = first.cache().builds();
        let a = create(&first, source);
        let b = create(&first, source);
        if first.cache().builds() != built + 1 {
            failures.push(format!("{}: {} builds", p.name, first.cache().builds() - built));
        }
        let (Some(sa), Some(sb)) = (session_id(&a), session_id(&b)) else {
            failures.push(format!("{}: session failed: {}", p.name, body(&a)));
            continue;
        };
        if sa == sb {
            failures.push(format!("{}: session ids repeat", p.name));
        }
        let hits = match (&a, &b) {
            (ToolResponse::Ok { result: ra }, ToolResponse::Ok { result: rb }) => {
                (ra["cache_hit"].clone(), rb["cache_hit"].clone())
            }
            _ => (Value::Null, Value::Null),
        };
        if hits != (json!(false), json!(true)) {
            failures.push(format!("{}: cache_hit flags {:?}", p.name, hits));
        }
        let cpg = first.graph(&sa).expect("session ready");
        for (tool, params) in sample_calls(&cpg) {
            queries += 1;
            let ra = dispatch(&first, tool, request(Some(&sa), params.clone(), false));
            let rb = dispatch(&first, tool, request(Some(&sb), params, false));
            if body(&ra) != body(&rb) {
                failures.push(format!("{}: {tool} differs on cache hit", p.name));
            }
        }
    }
    // A new manager over the same cache directory loads from disk.
    let second = manager(&ws.cache);
    for (p, source) in &ws.sources {
        let a = create(&first, source);
        let b = create(&second, source);
        let (Some(sa), Some(sb)) = (session_id(&a), session_id(&b)) else {
            continue;
        };
        let cpg = first.graph(&sa).expect("session ready");
        for (tool, params) in sample_calls(&cpg) {
            let ra = dispatch(&first, tool, request(Some(&sa), params.clone(), false));
            let rb = dispatch(&second, tool, request(Some(&sb), params, false));
            if body(&ra) != body(&rb) {
                failures.push(format!("{}: {tool} differs after disk load", p.name));
            }
        }
    }
    if second.cache().builds() != 0 {
        failures.push(format!("disk reload built {} graphs", second.cache().builds()));
    }
    outcome(
        7,
        start,
        &failures,
        format!("{} codebases, {queries} queries, 0 rebuilds", ws.sources.len()),
    )
}

fn wait(m: &Arc<SessionManager>, resp: &ToolResponse) -> Result<Value, String> {
    let ToolResponse::Accepted { job_id } = resp else {
        return Err(format!("not accepted: {}", body(resp)));
    };
    let job = m
        .jobs()
        .wait(job_id, Duration::from_secs(30))
        .ok_or_else(|| "job vanished".to_string())?;
    let v = serde_json::to_value(&job).map_err(|e| e.to_string())?;
    match v["state"].as_str() {
        Some("done") => Ok(v["result"].clone()),
        Some("failed") => Err(format!(
            "error {}",
            serde_json::to_string(&v["error"]).unwrap_or_default()
        )),
        other => Err(format!("job still {other:?}")),
    }
}

fn async_body(m: &Arc<SessionManager>, resp: &ToolResponse) -> String {
    match wait(m, resp) {
        Ok(v) => serde_json::to_string(&v).unwrap_or_default(),
        Err(e) => e,
    }
}

/// Every tool, on every codebase: the polled job result is byte-identical
/// to the synchronous response.
pub fn async_equivalence() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let ws = match workspace() {
        Ok(w) => w,
        Err(e) => return outcome(8, start, &[format!("workspace: {e}")], String::new()),
    };
    let m = manager(&ws.cache);
    let mut tools_seen = BTreeSet::new();
    let mut compared = 0;
    let mut check = |tool: &'static str, sync: String, asynchronous: String, failures: &mut Vec<String>, name: &str| {
        compared += 1;
        tools_seen.insert(tool);
        if sync != asynchronous {
            failures.push(format!("{name}: {tool} async result differs"));
        }
    };
    for (p, source) in &ws.sources {
        let warm = create(&m, source);
        let Some(sid) = session_id(&warm) else {
            failures.push(format!("{}: session failed: {}", p.name, body(&warm)));
            continue;
        };
        // Session lifecycle tools, with ids removed before comparing.
        let sync = match create(&m, source) {
            ToolResponse::Ok { result } => serde_json::to_string(&without_ids(result)).unwrap_or_default(),
            other => body(&other),
        };
        let accepted = dispatch(&m, "create_cpg_session", request(None, json!({"source": source}), true));
        let asynchronous = wait(&m, &accepted)
            .map(|v| serde_json::to_string(&without_ids(v)).unwrap_or_default())
            .unwrap_or_else(|e| e);
        check("create_cpg_session", sync, asynchronous, &mut failures, &p.name);

        let extra: Vec<String> = (0..2).filter_map(|_| session_id(&create(&m, source))).collect();
        if extra.len() == 2 {
            let sync = match dispatch(&m, "close_session", request(Some(&extra[0]), json!({}), false)) {
                ToolResponse::Ok { result } => serde_json::to_string(&without_ids(result)).unwrap_or_default(),
                other => body(&other),
            };
            let accepted = dispatch(&m, "close_session", request(Some(&extra[1]), json!({}), true));
            let asynchronous = wait(&m, &accepted)
                .map(|v| serde_json::to_string(&without_ids(v)).unwrap_or_default())
                .unwrap_or_else(|e| e);
            check("close_session", sync, asynchronous, &mut failures, &p.name);
        }

        let cpg = m.graph(&sid).expect("session ready");
        let mut last_job = None;
        for (tool, params) in sample_calls(&cpg) {
            let sync = body(&dispatch(&m, tool, request(Some(&sid), params.clone(), false)));
            let accepted = dispatch(&m, tool, request(Some(&sid), params, true));
            let asynchronous = async_body(&m, &accepted);
            if let ToolResponse::Accepted { job_id } = &accepted {
                last_job = Some(job_id.clone());
            }
            check(tool, sync, asynchronous, &mut failures, &p.name);
        }
        if let Some(job) = last_job {
            let params = json!({"job_id": job});
            let sync = body(&dispatch(&m, "poll_job", request(None, params.clone(), false)));
            let accepted = dispatch(&m, "poll_job", request(None, params, true));
            check("poll_job", sync, async_body(&m, &accepted), &mut failures, &p.name);
        }
    }
    let all: BTreeSet<&str> = manifest().iter().map(|t| t.name).collect();
    if let Some(missing) = all.difference(&tools_seen).next() {
        failures.push(format!("tool {missing} not exercised"));
    }
    outcome(
        8,
        start,
        &failures,
        format!(
            "{} tools, {} codebases, {compared} comparisons",
            tools_seen.len(),
            ws.sources.len()
        ),
    )
}

fn line_of(text: &str, needle: &str) -> u32 {
    text.lines()
        .position(|l| l.contains(needle))
        .map_or(0, |i| i as u32 + 1)
}

struct Client {
    http: reqwest::blocking::Client,
    base: String,
    session: Option<String>,
}

impl Client {
    fn call(&self, tool: &str, params: Value) -> Result<Value, String> {
        let mut req = json!({ "params": params });
        if let Some(s) = &self.session {
            req["session_id"] = json!(s);
        }
        let resp: Value = self
            .http
            .post(format!("{}/tools/{tool}", self.base))
            .json(&req)
            .send()
            .and_then(|r| r.json())
            .map_err(|e| format!("{tool}: {e}"))?;
        match resp["status"].as_str() {
            Some("ok") => Ok(resp["result"].clone()),
            _ => Err(format!("{tool}: {}", resp["error"])),
        }
    }
}

fn workflow(source: &str, text: &str, cache: &Path) -> Result<String, String> {
    let addr = codebadger_server::spawn(Config {
        port: 0,
        cache_root: cache.to_path_buf(),
        ..Config::default()
    })
    .map_err(|e| e.to_string())?;
    let mut c = Client {
        http: reqwest::blocking::Client::new(),
        base: format!("http://{addr}"),
        session: None,
    };
    let info = c.call("create_cpg_session", json!({ "source": source }))?;
    c.session = info["session_id"].as_str().map(String::from);

    let methods = c.call("list_methods", json!({"pattern": "build_qname"}))?;
    if methods["items"].as_array().map_or(0, Vec::len) != 1 {
        return Err(format!("list_methods: {}", methods["items"]));
    }
    let src = c.call("get_method_source", json!({"name": "build_qname"}))?;
    if !src["source"].as_str().is_some_and(|s| s.contains("memcpy")) {
        return Err("get_method_source: no memcpy in source".into());
    }
    let calls = c.call("list_calls", json!({"pattern": "memcpy", "within": "build_qname"}))?;
    let lines: Vec<u32> = calls["items"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|c| c["line"].as_u64().map(|l| l as u32))
        .collect();
    let [first_copy, second_copy] = lines[..] else {
        return Err(format!("list_calls: {} memcpy calls", lines.len()));
    };
    let lenn_def = line_of(text, "lenn = strlen");
    let lenp_def = line_of(text, "lenp = strlen");
    let alloc = line_of(text, "xmlMalloc");
    for (var, def) in [("lenn", lenn_def), ("lenp", lenp_def)] {
        let deps = c.call(
            "get_data_dependencies",
            json!({"file": "tree.c", "line": second_copy, "direction": "backward", "variable": var}),
        )?;
        let found: Vec<u64> = deps["dependencies"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|d| d["line"].as_u64())
            .collect();
        if !found.contains(&(def as u64)) {
            return Err(format!("{var} dependencies {found:?} miss line {def}"));
        }
    }
    let slice = c.call("get_program_slice", json!({"file": "tree.c", "line": second_copy}))?;
    let in_slice: BTreeSet<u32> = slice["lines"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|l| l["line"].as_u64().map(|v| v as u32))
        .collect();
    let wanted = [alloc, lenn_def, lenp_def, first_copy, second_copy];
    if let Some(miss) = wanted.iter().find(|l| !in_slice.contains(l)) {
        return Err(format!("slice misses line {miss}"));
    }
    Ok(format!(
        "6 calls over HTTP; slice of {} lines holds allocation {alloc}, sizes {lenn_def}/{lenp_def}, copies {first_copy}/{second_copy}",
        in_slice.len()
    ))
}

/// The scripted audit of the qname toy, end to end over HTTP.
pub fn workflow_replay() -> Outcome {
    let start = Instant::now();
    let p = corpus::qname();
    let result = tempfile::tempdir().map_err(|e| e.to_string()).and_then(|dir| {
        let src = dir.path().join("src");
        p.write_to(&src).map_err(|e| e.to_string())?;
        workflow(&src.to_string_lossy(), &p.files[0].content, &dir.path().join("cache"))
    });
    let mut failures = Vec::new();
    let summary = match result {
        Ok(s) => s,
        Err(e) => {
            failures.push(e);
            String::new()
        }
    };
    if start.elapsed() >= Duration::from_secs(5) {
        failures.push("over 5 s".into());
    }
    outcome(9, start, &failures, summary)
}

/// Criteria 1 to 9, in order.
pub fn run_all() -> Vec<Outcome> {
    vec![
        taint_oracle_equivalence(),
        path_cap_semantics(),
        slice_fixpoint(),
        slice_reduction(),
        dataflow_control_oracles(),
        bounds_check_ordering(),
        cache_correctness(),
        async_equivalence(),
        workflow_replay(),
    ]
}

/// The corpus-check table: criteria 1 to 9, then determinism judged by
/// rendering a second in-process run.
pub fn corpus_check() -> (String, Vec<Outcome>) {
    let first = run_all();
    let start = Instant::now();
    let second = run_all();
    let render = |o: &[Outcome]| o.iter().map(Outcome::line).collect::<Vec<_>>().join("\n");
    let same = render(&first) == render(&second);
    let failures = if same {
        Vec::new()
    } else {
        vec!["second run differs".to_string()]
    };
    let mut all = first;
    all.push(outcome(10, start, &failures, "second in-process run identical".into()));
    let mut table = render(&all);
    let passed = all.iter().filter(|o| o.passed).count();
    table.push_str(&format!("\n{passed}/{} criteria passed\n", all.len()));
    (table, all)
}
