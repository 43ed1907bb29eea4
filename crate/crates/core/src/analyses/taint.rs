use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{governor_lines, is_within, step_edge, AnalysisError, ProgramPoint};
use crate::cpg::{Cpg, EdgeKind, NodeId, NodeKind, RETURN_VAR};
use crate::glob::Glob;

/// Which arguments of a sink call are security-relevant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgSelector {
    All,
    Positions(Vec<usize>),
}

/// A sink pattern with its relevant argument positions, written
/// `name:1|2`, `name:*`, or plain `name` (all arguments).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkSpec {
    pub pattern: Glob,
    pub args: ArgSelector,
}

impl SinkSpec {
    pub fn new(pattern: &str, args: ArgSelector) -> Self {
        SinkSpec {
            pattern: Glob::new(pattern),
            args,
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let (name, args) = match text.split_once(':') {
            None => (text, ArgSelector::All),
            Some((name, "*")) => (name, ArgSelector::All),
            Some((name, list)) => {
                let positions = list
                    .split('|')
                    .map(|p| p.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("bad argument positions in sink '{text}'"))?;
                (name, ArgSelector::Positions(positions))
            }
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(format!("empty sink pattern in '{text}'"));
        }
        Ok(SinkSpec::new(name, args))
    }

    /// Relevant argument indices for a call with `argc` arguments.
    pub fn relevant(&self, argc: usize) -> Vec<usize> {
        match &self.args {
            ArgSelector::All => (0..argc).collect(),
            ArgSelector::Positions(p) => p.iter().copied().filter(|&i| i < argc).collect(),
        }
    }
}

impl fmt::Display for SinkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.args {
            ArgSelector::All => write!(f, "{}:*", self.pattern),
            ArgSelector::Positions(p) => {
                let list: Vec<String> = p.iter().map(usize::to_string).collect();
                write!(f, "{}:{}", self.pattern, list.join("|"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSinkConfig {
    pub sources: Vec<Glob>,
    pub sinks: Vec<SinkSpec>,
}

impl Default for SourceSinkConfig {
    fn default() -> Self {
        let pos = |p: &[usize]| ArgSelector::Positions(p.to_vec());
        SourceSinkConfig {
            sources: ["read", "recv", "getenv", "gets", "scanf", "fread"]
                .into_iter()
                .map(Glob::new)
                .collect(),
            sinks: vec![
                SinkSpec::new("system", pos(&[0])),
                SinkSpec::new("exec", pos(&[0])),
                SinkSpec::new("memcpy", pos(&[1, 2])),
                SinkSpec::new("strcpy", pos(&[1, 2])),
                SinkSpec::new("sprintf", ArgSelector::All),
                SinkSpec::new("malloc", pos(&[0])),
            ],
        }
    }
}

impl SourceSinkConfig {
    pub fn is_source(&self, name: &str) -> bool {
        self.sources.iter().any(|g| g.matches(name))
    }

    /// First sink spec matching `name`.
    pub fn sink_for(&self, name: &str) -> Option<&SinkSpec> {
        self.sinks.iter().find(|s| s.pattern.matches(name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaintSource {
    #[serde(flatten)]
    pub point: ProgramPoint,
    pub callee: String,
    /// Variables receiving attacker-controlled data at this call.
    pub tainted: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaintSink {
    #[serde(flatten)]
    pub point: ProgramPoint,
    pub callee: String,
    pub relevant_args: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepEdge {
    ReachingDef,
    ParamBinding,
    ReturnBinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub node_id: NodeId,
    pub file: String,
    pub line: u32,
    pub code: String,
    /// Variable carried by the incoming edge (none on the first step).
    pub variable: Option<String>,
    pub edge: Option<StepEdge>,
    /// Lines of the branches this step is control dependent on.
    pub control: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaintPath {
    pub source: ProgramPoint,
    pub sink: ProgramPoint,
    pub length: usize,
    pub steps: Vec<PathStep>,
}

fn calls_matching(cpg: &Cpg, pred: impl Fn(&str) -> bool) -> Vec<NodeId> {
    let mut calls: Vec<NodeId> = cpg
        .nodes_of_kind(NodeKind::Call)
        .iter()
        .copied()
        .filter(|&c| cpg.node(c).name.as_deref().is_some_and(&pred))
        .collect();
    calls.sort_by_key(|&c| {
        let n = cpg.node(c);
        (n.file, n.line, n.col, c)
    });
    calls
}

fn tainted_vars(cpg: &Cpg, call: NodeId) -> Vec<String> {
    let Some(stmt) = cpg.statement_of(call) else {
        return Vec::new();
    };
    let Some(facts) = cpg.facts(stmt) else {
        return Vec::new();
    };
    let mut vars = Vec::new();
    for &arg in cpg.children(call) {
        let a = cpg.node(arg);
        if a.kind == NodeKind::Identifier {
            let name = a.name.as_deref().unwrap_or_default();
            if facts.defs.iter().any(|d| !d.strong && d.var == name) {
                vars.push(name.to_string());
            }
        }
    }
    let s = cpg.node(stmt);
    let target = match s.kind {
        NodeKind::Assign => cpg.children(stmt).get(1).map(|&v| (v, s.name.clone())),
        NodeKind::Local => cpg.children(stmt).first().map(|&v| (v, s.name.clone())),
        NodeKind::Return => cpg.children(stmt).first().map(|&v| (v, Some(RETURN_VAR.to_string()))),
        _ => None,
    };
    if let Some((value, Some(var))) = target {
        if is_within(cpg, call, value) && facts.defs.iter().any(|d| d.var == var) {
            vars.push(var);
        }
    }
    vars.sort();
    vars.dedup();
    vars
}

/// Calls matching a source pattern, with the variables they taint.
pub fn find_taint_sources(cpg: &Cpg, config: &SourceSinkConfig) -> Result<Vec<TaintSource>, AnalysisError> {
    if config.sources.is_empty() {
        return Err(AnalysisError::Config("no taint sources configured".into()));
    }
    Ok(calls_matching(cpg, |n| config.is_source(n))
        .into_iter()
        .map(|c| TaintSource {
            point: ProgramPoint::of(cpg, c),
            callee: cpg.node(c).name.clone().unwrap_or_default(),
            tainted: tainted_vars(cpg, c),
        })
        .collect())
}

/// Calls matching a sink pattern, with their security-relevant arguments.
pub fn find_taint_sinks(cpg: &Cpg, config: &SourceSinkConfig) -> Result<Vec<TaintSink>, AnalysisError> {
    if config.sinks.is_empty() {
        return Err(AnalysisError::Config("no taint sinks configured".into()));
    }
    Ok(calls_matching(cpg, |n| config.sink_for(n).is_some())
        .into_iter()
        .map(|c| {
            let callee = cpg.node(c).name.clone().unwrap_or_default();
            let spec = config.sink_for(&callee).expect("matched above");
            TaintSink {
                point: ProgramPoint::of(cpg, c),
                relevant_args: spec.relevant(cpg.children(c).len()),
                callee,
            }
        })
        .collect())
}

struct SinkSite {
    call: NodeId,
    /// Relevant argument subtrees.
    args: Vec<NodeId>,
}

impl SinkSite {
    /// Whether data arriving over an edge carrying `var` (from `origin`, the
    /// callee exit for return bindings) reaches a relevant argument.
    fn fed_by(&self, cpg: &Cpg, var: &str, origin: Option<NodeId>) -> bool {
        let callee = origin.and_then(|exit| cpg.node(exit).method);
        self.args.iter().any(|&arg| {
            std::iter::once(arg).chain(cpg.descendants(arg)).any(|n| {
                let node = cpg.node(n);
                match node.kind {
                    NodeKind::Identifier => node.name.as_deref() == Some(var),
                    NodeKind::Call => callee.is_some() && cpg.callee_of(n) == callee,
                    _ => false,
                }
            })
        })
    }
}

struct State {
    node: NodeId,
    var: Option<String>,
    edge: Option<StepEdge>,
    parent: Option<usize>,
}

/// Forward taint flows: for each source call, a breadth-first walk over
/// REACHING_DEF edges (binding edges included) from the source's statement.
/// A sink is reached when the variable on the incoming edge occurs in one of
/// its relevant arguments, or when the edge returns from a callee that a
/// relevant argument calls. One shortest path is kept per (source, sink)
/// pair; the result is sorted shortest-first, then by source and sink
/// position, and cut to `max_paths`.
pub fn find_taint_flows(cpg: &Cpg, config: &SourceSinkConfig, max_paths: usize) -> Vec<TaintPath> {
    let mut sinks_at: BTreeMap<NodeId, Vec<SinkSite>> = BTreeMap::new();
    for call in calls_matching(cpg, |n| config.sink_for(n).is_some()) {
        let Some(stmt) = cpg.statement_of(call) else {
            continue;
        };
        let spec = config
            .sink_for(cpg.node(call).name.as_deref().unwrap_or_default())
            .expect("matched above");
        let kids = cpg.children(call);
        let args = spec.relevant(kids.len()).into_iter().map(|i| kids[i]).collect();
        sinks_at.entry(stmt).or_default().push(SinkSite { call, args });
    }

    let mut paths = Vec::new();
    for source in calls_matching(cpg, |n| config.is_source(n)) {
        let Some(start) = cpg.statement_of(source) else {
            continue;
        };
        let mut hits: BTreeMap<NodeId, Vec<PathStep>> = BTreeMap::new();
        let mut states = vec![State {
            node: start,
            var: None,
            edge: None,
            parent: None,
        }];
        for site in sinks_at.get(&start).into_iter().flatten() {
            if site.args.iter().any(|&a| is_within(cpg, source, a)) {
                hits.entry(site.call).or_insert_with(|| trace(cpg, &states, 0));
            }
        }
        let mut seen: HashSet<(NodeId, Option<String>, Option<NodeId>)> = HashSet::new();
        seen.insert((start, None, None));
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let from = states[i].node;
            for e in cpg.out_edges_of(from, EdgeKind::ReachingDef) {
                let edge = step_edge(cpg, e.src, e.dst);
                let origin = (edge == StepEdge::ReturnBinding).then_some(e.src);
                if !seen.insert((e.dst, e.variable.clone(), origin)) {
                    continue;
                }
                states.push(State {
                    node: e.dst,
                    var: e.variable.clone(),
                    edge: Some(edge),
                    parent: Some(i),
                });
                let idx = states.len() - 1;
                queue.push_back(idx);
                let var = e.variable.as_deref().unwrap_or_default();
                for site in sinks_at.get(&e.dst).into_iter().flatten() {
                    if !hits.contains_key(&site.call) && site.fed_by(cpg, var, origin) {
                        hits.insert(site.call, trace(cpg, &states, idx));
                    }
                }
            }
        }
        for (sink, steps) in hits {
            paths.push(TaintPath {
                source: ProgramPoint::of(cpg, source),
                sink: ProgramPoint::of(cpg, sink),
                length: steps.len() - 1,
                steps,
            });
        }
    }
    paths.sort_by_key(|a| path_key(cpg, a));
    paths.truncate(max_paths);
    paths
}

type PathKey = (usize, u32, u32, u32, u32, u32, u32, NodeId, NodeId);

fn path_key(cpg: &Cpg, p: &TaintPath) -> PathKey {
    let s = cpg.node(p.source.node_id);
    let k = cpg.node(p.sink.node_id);
    (p.length, s.file, s.line, k.file, k.line, s.col, k.col, s.id, k.id)
}

fn trace(cpg: &Cpg, states: &[State], mut idx: usize) -> Vec<PathStep> {
    let mut steps = Vec::new();
    loop {
        let st = &states[idx];
        let node = cpg.node(st.node);
        steps.push(PathStep {
            node_id: st.node,
            file: cpg.file(node.file).path.clone(),
            line: node.line,
            code: node.code.clone(),
            variable: st.var.clone(),
            edge: st.edge,
            control: governor_lines(cpg, st.node),
        });
        match st.parent {
            Some(p) => idx = p,
            None => break,
        }
    }
    steps.reverse();
    steps
}
