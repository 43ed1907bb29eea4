use serde_json::{json, Map, Value};

use crate::cpg::EdgeKind;
use crate::cpg::NodeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamType {
    String,
    Integer,
    Boolean,
    Object,
}

impl ParamType {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamType::String => "string",
            ParamType::Integer => "integer",
            ParamType::Boolean => "boolean",
            ParamType::Object => "object",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub ty: ParamType,
    pub required: bool,
    pub description: &'static str,
    pub choices: Vec<&'static str>,
    pub minimum: Option<u64>,
    pub default: Option<Value>,
    /// Full JSON schema for object parameters.
    pub schema: Option<Value>,
}

impl ParamSpec {
    fn new(name: &'static str, ty: ParamType, description: &'static str) -> Self {
        ParamSpec {
            name,
            ty,
            required: false,
            description,
            choices: Vec::new(),
            minimum: None,
            default: None,
            schema: None,
        }
    }

    fn required(mut self) -> Self {
        self.required = true;
        self
    }

    fn choices(mut self, c: &[&'static str]) -> Self {
        self.choices = c.to_vec();
        self
    }

    fn min(mut self, m: u64) -> Self {
        self.minimum = Some(m);
        self
    }

    fn default(mut self, v: Value) -> Self {
        self.default = Some(v);
        self
    }

    pub fn json_schema(&self) -> Value {
        if let Some(s) = &self.schema {
            return s.clone();
        }
        let mut m = Map::new();
        m.insert("type".into(), json!(self.ty.as_str()));
        m.insert("description".into(), json!(self.description));
        if !self.choices.is_empty() {
            m.insert("enum".into(), json!(self.choices));
        }
        if let Some(min) = self.minimum {
            m.insert("minimum".into(), json!(min));
        }
        if let Some(d) = &self.default {
            m.insert("default".into(), d.clone());
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub requires_session: bool,
    /// Listing tools page their `items` with `cursor` and `limit`.
    pub listing: bool,
    pub params: Vec<ParamSpec>,
}

impl ToolSpec {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn params_schema(&self) -> Value {
        let props: Map<String, Value> = self
            .params
            .iter()
            .map(|p| (p.name.to_string(), p.json_schema()))
            .collect();
        let required: Vec<&str> = self.params.iter().filter(|p| p.required).map(|p| p.name).collect();
        json!({
            "type": "object",
            "properties": props,
            "required": required,
            "additionalProperties": false,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "description": self.description,
            "requires_session": self.requires_session,
            "params": self.params_schema(),
        })
    }
}

pub const DEFAULT_PAGE_LIMIT: u64 = 100;
pub const DEFAULT_MAX_PATHS: u64 = 100;

fn s(name: &'static str, d: &'static str) -> ParamSpec {
    ParamSpec::new(name, ParamType::String, d)
}

fn i(name: &'static str, d: &'static str) -> ParamSpec {
    ParamSpec::new(name, ParamType::Integer, d)
}

fn point_params() -> Vec<ParamSpec> {
    vec![
        s("file", "Source file path relative to the session root").required(),
        i("line", "1-based line number").required().min(1),
        i(
            "col",
            "Optional 1-based column selecting the innermost statement at that position",
        )
        .min(1),
    ]
}

fn tool(name: &'static str, description: &'static str, requires_session: bool, params: Vec<ParamSpec>) -> ToolSpec {
    ToolSpec {
        name,
        description,
        requires_session,
        listing: false,
        params,
    }
}

fn listing(name: &'static str, description: &'static str, mut params: Vec<ParamSpec>) -> ToolSpec {
    params.push(s("cursor", "Continuation cursor from a previous truncated response"));
    params.push(
        i("limit", "Maximum number of items to return")
            .min(1)
            .default(json!(DEFAULT_PAGE_LIMIT)),
    );
    ToolSpec {
        name,
        description,
        requires_session: true,
        listing: true,
        params,
    }
}

fn query_schema() -> Value {
    let kinds: Vec<&str> = NodeKind::ALL.iter().map(|k| k.as_str()).collect();
    let edges: Vec<&str> = EdgeKind::ALL.iter().map(|k| k.as_str()).collect();
    json!({
        "type": "object",
        "description": "Optional single edge expansion applied to the filtered nodes",
        "properties": {
            "edge_kind": { "type": "string", "enum": edges },
            "direction": { "type": "string", "enum": ["backward", "forward"] },
            "depth": { "type": "integer", "minimum": 1, "maximum": 3, "default": 1 },
        },
        "required": ["edge_kind", "direction"],
        "additionalProperties": false,
        "x-node-kinds": kinds,
    })
}

/// Every tool, in a fixed order.
pub fn manifest() -> Vec<ToolSpec> {
    let mut expand = ParamSpec::new("expand", ParamType::Object, "Edge expansion");
    expand.schema = Some(query_schema());
    let kinds: Vec<&'static str> = NodeKind::ALL.iter().map(|k| k.as_str()).collect();
    vec![
        tool(
            "create_cpg_session",
            "Build (or load from cache) the code property graph for a source tree and open a session on it",
            false,
            vec![
                s(
                    "source",
                    "Local directory or file; a git URL when enabled by the server",
                )
                .required(),
                s("language", "Source language").choices(&["c"]).default(json!("c")),
            ],
        ),
        tool(
            "close_session",
            "Close a session; its cached graph is kept",
            true,
            vec![],
        ),
        tool(
            "poll_job",
            "State of an asynchronous job, with its result once done",
            false,
            vec![s("job_id", "Job identifier returned by an asynchronous call").required()],
        ),
        tool(
            "get_codebase_summary",
            "Counts of files, methods, call sites and lines, plus external callees",
            true,
            vec![],
        ),
        listing(
            "list_methods",
            "Methods whose name matches a glob pattern",
            vec![s("pattern", "Glob over method names; * matches any run").default(json!("*"))],
        ),
        tool(
            "get_method_source",
            "Source text of a method, also with line numbers",
            true,
            vec![
                s("name", "Method name").required(),
                s("file", "Restrict to methods defined in this file"),
            ],
        ),
        listing(
            "list_calls",
            "Call sites whose callee matches a glob pattern",
            vec![
                s("pattern", "Glob over callee names").default(json!("*")),
                s("within", "Only calls made inside this method"),
            ],
        ),
        tool(
            "get_code_snippet",
            "Verbatim source lines start_line..=end_line",
            true,
            vec![
                s("file", "Source file path").required(),
                i("start_line", "First line (1-based)").required(),
                i("end_line", "Last line (inclusive)").required(),
            ],
        ),
        tool(
            "get_data_dependencies",
            "Reaching-definition dependencies of a program point",
            true,
            {
                let mut p = point_params();
                p.push(
                    s(
                        "direction",
                        "backward: definitions feeding the point; forward: uses it feeds",
                    )
                    .choices(&["backward", "forward"])
                    .default(json!("backward")),
                );
                p.push(i("depth", "Maximum number of hops").min(1).default(json!(1)));
                p.push(s("variable", "Only follow this variable on the first hop"));
                p
            },
        ),
        tool(
            "get_program_slice",
            "Backward program slice from a criterion point",
            true,
            {
                let mut p = point_params();
                p.push(
                    s("direction", "Slice direction")
                        .choices(&["backward"])
                        .default(json!("backward")),
                );
                p
            },
        ),
        listing("find_taint_sources", "Calls to configured taint sources", vec![]),
        listing(
            "find_taint_sinks",
            "Calls to configured taint sinks with their relevant arguments",
            vec![],
        ),
        tool(
            "find_taint_flows",
            "Shortest source-to-sink data flow paths, at most max_paths of them",
            true,
            vec![i("max_paths", "Maximum number of paths")
                .min(1)
                .default(json!(DEFAULT_MAX_PATHS))],
        ),
        tool(
            "find_bounds_checks",
            "Comparisons guarding an array index or size argument, and whether each precedes the access",
            true,
            point_params(),
        ),
        tool(
            "get_call_graph",
            "Call edges reachable from a method within a depth",
            true,
            vec![
                s("root", "Root method name").required(),
                i("depth", "Maximum call depth").min(0).default(json!(2)),
            ],
        ),
        tool(
            "check_reachability",
            "Whether one method can reach another through calls, with a shortest witness",
            true,
            vec![
                s("from", "Caller method name").required(),
                s("to", "Target method name").required(),
            ],
        ),
        listing(
            "search_literals",
            "Integer and string literals matching a glob pattern",
            vec![
                s("pattern", "Glob over literal values (strings are decoded)").default(json!("*")),
                s("kind", "Literal kind")
                    .choices(&["int", "string", "any"])
                    .default(json!("any")),
            ],
        ),
        tool(
            "run_structured_query",
            "Filter graph nodes by kind, name and code, optionally expanding over one edge kind",
            true,
            vec![
                s("kind", "Node kind").choices(&kinds),
                s("name_glob", "Glob over node names"),
                s("code_contains", "Substring of the node's code"),
                expand,
                i(
                    "limit",
                    "Maximum number of nodes (defaults to the server's query_limit)",
                )
                .min(1),
            ],
        ),
    ]
}

pub fn find_tool(name: &str) -> Option<ToolSpec> {
    manifest().into_iter().find(|t| t.name == name)
}

pub fn manifest_json() -> Value {
    json!({ "tools": manifest().iter().map(ToolSpec::to_json).collect::<Vec<_>>() })
}
