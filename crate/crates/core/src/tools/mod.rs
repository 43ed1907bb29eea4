//! The tool surface shared by the HTTP server and the command line: the
//! manifest, parameter validation, execution against a graph, response size
//! limits, and session-aware dispatch.

mod manifest;
mod params;

pub use manifest::{
    find_tool, manifest, manifest_json, ParamSpec, ParamType, ToolSpec, DEFAULT_MAX_PATHS, DEFAULT_PAGE_LIMIT,
};
pub use params::Params;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analyses::{self, AnalysisError, Direction, LiteralKind, StructuredQuery};
use crate::config::Config;
use crate::cpg::Cpg;
use crate::glob::Glob;
use crate::session::SessionManager;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolError {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ToolError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ToolError {
            code: code.to_string(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn invalid_params(message: impl Into<String>) -> Self {
        ToolError::new("invalid_params", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ToolError::new("internal_error", message)
    }

    pub fn unknown_session(id: &str) -> Self {
        ToolError::new("unknown_session", format!("unknown session '{id}'")).with_detail(json!({ "session_id": id }))
    }

    pub fn unknown_tool(name: &str) -> Self {
        ToolError::new("unknown_tool", format!("unknown tool '{name}'")).with_detail(json!({ "tool": name }))
    }
}

impl std::fmt::Display for ToolError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ToolError {}

impl From<AnalysisError> for ToolError {
    fn from(e: AnalysisError) -> Self {
        ToolError::new(e.code(), e.to_string()).with_detail(e.detail())
    }
}

/// Every error code a tool call can produce.
pub const ERROR_CODES: [&str; 16] = [
    "unknown_tool",
    "invalid_params",
    "unknown_session",
    "unknown_job",
    "unknown_method",
    "ambiguous_method",
    "unresolved_point",
    "not_a_bounds_context",
    "parse_error",
    "query_error",
    "range_error",
    "config_error",
    "io_error",
    "build_failed",
    "session_not_ready",
    "internal_error",
];

fn to_json<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

/// Pages `items` from `cursor`, stopping at `limit` items or before the
/// encoded page would exceed `max_bytes`.
fn paginate(items: Vec<Value>, params: &Params, max_bytes: usize) -> Result<Value, ToolError> {
    let start = match params.str("cursor") {
        None => 0,
        Some(c) => c.parse::<usize>().ok().filter(|&n| n <= items.len()).ok_or_else(|| {
            ToolError::invalid_params(format!("invalid cursor '{c}'")).with_detail(json!({ "field": "cursor" }))
        })?,
    };
    let limit = params.u64("limit").unwrap_or(DEFAULT_PAGE_LIMIT) as usize;
    let total = items.len();
    // Envelope overhead is small and bounded; reserve room for it.
    let budget = max_bytes.saturating_sub(128);
    let mut used = 2;
    let mut page = Vec::new();
    for item in items.into_iter().skip(start).take(limit) {
        let size = serde_json::to_string(&item).map_or(0, |s| s.len()) + 1;
        if !page.is_empty() && used + size > budget {
            break;
        }
        used += size;
        page.push(item);
    }
    let end = start + page.len();
    let truncated = end < total;
    Ok(json!({
        "items": page,
        "total": total,
        "truncated": truncated,
        "next_cursor": if truncated { Value::from(end.to_string()) } else { Value::Null },
    }))
}

fn encoded_len(v: &Value) -> usize {
    serde_json::to_string(v).map_or(0, |s| s.len())
}

/// Shrinks an oversized object result: drops trailing elements from its
/// largest array field (or shortens its largest string) until it fits, and
/// marks it `truncated`.
fn guard(mut value: Value, max_bytes: usize) -> Value {
    if encoded_len(&value) <= max_bytes {
        return value;
    }
    let Value::Object(map) = &mut value else {
        return value;
    };
    map.insert("truncated".into(), Value::Bool(true));
    loop {
        let over = encoded_len(&Value::Object(map.clone())).saturating_sub(max_bytes);
        if over == 0 {
            break;
        }
        let largest = map
            .iter()
            .filter(|(_, v)| {
                matches!(v, Value::Array(a) if !a.is_empty()) || matches!(v, Value::String(s) if !s.is_empty())
            })
            .max_by_key(|(_, v)| encoded_len(v))
            .map(|(k, _)| k.clone());
        let Some(key) = largest else {
            break;
        };
        match map.get_mut(&key) {
            Some(Value::Array(a)) => {
                a.pop();
            }
            Some(Value::String(s)) => {
                let mut cut = s.len().saturating_sub(over.max(1));
                while !s.is_char_boundary(cut) {
                    cut -= 1;
                }
                s.truncate(cut);
            }
            _ => break,
        }
    }
    value
}

/// Runs a graph-backed tool. `params` must already be validated against the
/// tool's schema. Session-management tools are not handled here.
pub fn run_cpg_tool(cpg: &Cpg, config: &Config, tool: &str, params: &Params) -> Result<Value, ToolError> {
    let max = config.max_response_bytes;
    let point = || {
        analyses::resolve_point(
            cpg,
            params.req_str("file"),
            params.u32("line").unwrap_or_default(),
            params.u32("col"),
        )
    };
    let pattern = || Glob::new(params.str("pattern").unwrap_or("*"));
    let items = |v: Vec<Value>| paginate(v, params, max);
    let result = match tool {
        "get_codebase_summary" => to_json(analyses::get_codebase_summary(cpg)),
        "list_methods" => {
            return items(
                analyses::list_methods(cpg, &pattern())
                    .into_iter()
                    .map(to_json)
                    .collect(),
            )
        }
        "get_method_source" => to_json(analyses::get_method_source(
            cpg,
            params.req_str("name"),
            params.str("file"),
        )?),
        "list_calls" => {
            let calls = analyses::list_calls(cpg, &pattern(), params.str("within"))?;
            return items(calls.into_iter().map(to_json).collect());
        }
        "get_code_snippet" => to_json(analyses::get_code_snippet(
            cpg,
            params.req_str("file"),
            params.u32("start_line").unwrap_or_default(),
            params.u32("end_line").unwrap_or_default(),
        )?),
        "get_data_dependencies" => {
            let start = point()?;
            let direction = match params.str("direction") {
                Some("forward") => Direction::Forward,
                _ => Direction::Backward,
            };
            let deps = analyses::get_data_dependencies(
                cpg,
                start,
                direction,
                params.u32("depth").unwrap_or(1),
                params.str("variable"),
            );
            json!({
                "point": analyses::ProgramPoint::of(cpg, start),
                "direction": direction,
                "dependencies": deps,
            })
        }
        "get_program_slice" => to_json(analyses::get_program_slice(cpg, point()?)),
        "find_taint_sources" => {
            return items(
                analyses::find_taint_sources(cpg, &config.taint)?
                    .into_iter()
                    .map(to_json)
                    .collect(),
            )
        }
        "find_taint_sinks" => {
            return items(
                analyses::find_taint_sinks(cpg, &config.taint)?
                    .into_iter()
                    .map(to_json)
                    .collect(),
            )
        }
        "find_taint_flows" => {
            if config.taint.sources.is_empty() || config.taint.sinks.is_empty() {
                return Err(ToolError::new(
                    "config_error",
                    "taint sources and sinks must be configured",
                ));
            }
            let m = params.u64("max_paths").unwrap_or(DEFAULT_MAX_PATHS) as usize;
            let paths = analyses::find_taint_flows(cpg, &config.taint, m);
            json!({ "paths": paths, "total": paths.len() })
        }
        "find_bounds_checks" => to_json(analyses::find_bounds_checks(
            cpg,
            params.req_str("file"),
            params.u32("line").unwrap_or_default(),
            params.u32("col"),
        )?),
        "get_call_graph" => to_json(analyses::get_call_graph(
            cpg,
            params.req_str("root"),
            params.u32("depth").unwrap_or(2),
        )?),
        "check_reachability" => to_json(analyses::check_reachability(
            cpg,
            params.req_str("from"),
            params.req_str("to"),
        )?),
        "search_literals" => {
            let kind = match params.str("kind") {
                Some("int") => LiteralKind::Int,
                Some("string") => LiteralKind::String,
                _ => LiteralKind::Any,
            };
            return items(
                analyses::search_literals(cpg, &pattern(), kind)
                    .into_iter()
                    .map(to_json)
                    .collect(),
            );
        }
        "run_structured_query" => {
            let mut q = StructuredQuery {
                kind: params.str("kind").map(str::to_string),
                name_glob: params.str("name_glob").map(str::to_string),
                code_contains: params.str("code_contains").map(str::to_string),
                expand: None,
            };
            if let Some(x) = params.value("expand") {
                q.expand = Some(serde_json::from_value(x.clone()).map_err(|e| {
                    ToolError::new("query_error", format!("invalid expansion: {e}"))
                        .with_detail(json!({ "field": "expand" }))
                })?);
            }
            let limit = params.u64("limit").unwrap_or(config.query_limit as u64) as usize;
            to_json(analyses::run_structured_query(cpg, &q, limit)?)
        }
        other => return Err(ToolError::unknown_tool(other)),
    };
    Ok(guard(result, max))
}

/// Body of `POST /tools/{name}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolRequest {
    /// Optional; must match the tool named in the path when present.
    #[serde(default)]
    pub tool: Option<String>,
    #[serde(default)]
    pub session_id: Option<String>,
    #[serde(default)]
    pub params: Value,
    #[serde(default, rename = "async")]
    pub is_async: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ToolResponse {
    Ok { result: Value },
    Error { error: ToolError },
    Accepted { job_id: String },
}

impl ToolResponse {
    pub fn from_result(r: Result<Value, ToolError>) -> Self {
        match r {
            Ok(result) => ToolResponse::Ok { result },
            Err(error) => ToolResponse::Error { error },
        }
    }

    /// HTTP status code for this response.
    pub fn http_status(&self) -> u16 {
        match self {
            ToolResponse::Ok { .. } => 200,
            ToolResponse::Accepted { .. } => 202,
            ToolResponse::Error { error } => error_status(&error.code),
        }
    }
}

pub fn error_status(code: &str) -> u16 {
    match code {
        "unknown_tool" | "unknown_session" | "unknown_job" | "unknown_method" => 404,
        "ambiguous_method" | "session_not_ready" => 409,
        "build_failed" => 422,
        "config_error" | "internal_error" => 500,
        _ => 400,
    }
}

/// Routes a tool call to the session layer or to [`run_cpg_tool`]. With
/// `async` set, the call runs as a job and the response carries its id.
pub fn dispatch(manager: &Arc<SessionManager>, name: &str, request: ToolRequest) -> ToolResponse {
    let Some(spec) = find_tool(name) else {
        return ToolResponse::Error {
            error: ToolError::unknown_tool(name),
        };
    };
    if let Some(t) = request.tool.as_deref().filter(|t| *t != name) {
        return ToolResponse::Error {
            error: ToolError::invalid_params(format!("body names tool '{t}' but the path names '{name}'"))
                .with_detail(json!({ "field": "tool" })),
        };
    }
    let params = match Params::validate(&spec, &request.params) {
        Ok(p) => p,
        Err(error) => return ToolResponse::Error { error },
    };
    let session_id = match (&request.session_id, spec.requires_session) {
        (Some(id), true) => Some(id.clone()),
        (None, true) => {
            return ToolResponse::Error {
                error: ToolError::invalid_params("missing required field 'session_id'")
                    .with_detail(json!({ "field": "session_id" })),
            }
        }
        (_, false) => None,
    };
    if request.is_async {
        if let Some(id) = &session_id {
            if !manager.exists(id) {
                return ToolResponse::Error {
                    error: ToolError::unknown_session(id),
                };
            }
        }
    }

    if name == "create_cpg_session" {
        let source = params.req_str("source").to_string();
        let language = params.str("language").unwrap_or("c").to_string();
        return if request.is_async {
            match manager.create_session_async(&source, &language, params.as_value()) {
                Ok(job_id) => ToolResponse::Accepted { job_id },
                Err(error) => ToolResponse::Error { error },
            }
        } else {
            ToolResponse::from_result(manager.create_session(&source, &language))
        };
    }

    let m = manager.clone();
    let sid = session_id.clone();
    let tool = spec.name;
    let job_params = params.as_value();
    let work = move || -> Result<Value, ToolError> {
        match tool {
            "close_session" => m.close_session(sid.as_deref().unwrap_or_default()),
            "poll_job" => m.poll_job(params.req_str("job_id")).map(to_json),
            _ => {
                let cpg = m.graph(sid.as_deref().unwrap_or_default())?;
                run_cpg_tool(&cpg, m.config(), tool, &params)
            }
        }
    };
    if request.is_async {
        ToolResponse::Accepted {
            job_id: manager.jobs().submit(session_id, name, job_params, work),
        }
    } else {
        ToolResponse::from_result(work())
    }
}
