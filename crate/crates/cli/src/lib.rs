//! The `codebadger` command line. Every tool in the manifest is a
//! subcommand of the same name taking its parameters as flags
//! (`max_paths` becomes `--max-paths`). Invocations build the graph for
//! `--source`, or load it from the shared cache, run one tool and print its
//! result. `--format json` prints exactly what the server returns as
//! `result`.
//!
//! Exit codes: 0 on success, 1 when the tool reports an error, 2 on usage
//! errors.

use std::io::Write;
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde_json::{Map, Value};

use codebadger_core::config::Config;
use codebadger_core::session::{open_graph, snapshot, CpgCache};
use codebadger_core::tools::{manifest, run_cpg_tool, ParamType, Params, ToolError, ToolSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOOL_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const ALIASES: [(&str, &str); 2] = [("get_program_slice", "slice"), ("find_taint_flows", "taint")];

fn flag(name: &str) -> String {
    name.replace('_', "-")
}

fn tool_command(spec: &ToolSpec) -> Command {
    let mut cmd = Command::new(spec.name).about(spec.description);
    if let Some((_, alias)) = ALIASES.iter().find(|(t, _)| *t == spec.name) {
        cmd = cmd.visible_alias(*alias);
    }
    match spec.name {
        "create_cpg_session" | "poll_job" => {}
        "close_session" => {
            cmd = cmd.arg(
                Arg::new("session_id")
                    .long("session-id")
                    .help("Session to close; the command line keeps no sessions"),
            )
        }
        _ => {
            cmd = cmd.arg(
                Arg::new("source")
                    .long("source")
                    .required(true)
                    .value_parser(value_parser!(PathBuf))
                    .help("Source directory or file to analyze"),
            )
        }
    }
    for p in &spec.params {
        let mut arg = Arg::new(p.name).long(flag(p.name)).help(p.description);
        if p.required {
            arg = arg.required(true);
        }
        arg = match p.ty {
            ParamType::Integer => arg.value_parser(value_parser!(u64)).value_name("N"),
            ParamType::Boolean => arg.value_parser(value_parser!(bool)),
            ParamType::Object => arg.value_name("JSON"),
            ParamType::String if !p.choices.is_empty() => {
                arg.value_parser(PossibleValuesParser::new(p.choices.clone()))
            }
            ParamType::String => arg,
        };
        cmd = cmd.arg(arg);
    }
    cmd
}

/// The full command tree.
pub fn command() -> Command {
    let mut cmd = Command::new("codebadger")
        .about("Code property graph analysis for Mini-C")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_parser(value_parser!(PathBuf))
                .help("Configuration file (default: $CODEBADGER_CONFIG, then built-in defaults)"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .global(true)
                .value_parser(["json", "text"])
                .default_value("json")
                .help("Output format"),
        );
    for spec in manifest() {
        cmd = cmd.subcommand(tool_command(&spec));
    }
    cmd.subcommand(
        Command::new("serve")
            .about("Run the HTTP tool server")
            .arg(
                Arg::new("host")
                    .long("host")
                    .help("Listen address (overrides the configuration)"),
            )
            .arg(
                Arg::new("port")
                    .long("port")
                    .value_parser(value_parser!(u16))
                    .help("Listen port (overrides the configuration)"),
            ),
    )
    .subcommand(
        Command::new("corpus-check")
            .about("Run the acceptance criteria against the bundled corpus and print a pass/fail table")
            .arg(
                Arg::new("timings")
                    .long("timings")
                    .action(ArgAction::SetTrue)
                    .help("Also report per-criterion timings on stderr"),
            ),
    )
}

/// Parameters given as flags, as the JSON object a server request carries.
fn collect_params(spec: &ToolSpec, m: &ArgMatches) -> Result<Value, ToolError> {
    let mut out = Map::new();
    for p in &spec.params {
        let value = match p.ty {
            ParamType::Integer => m.get_one::<u64>(p.name).map(|n| Value::from(*n)),
            ParamType::Boolean => m.get_one::<bool>(p.name).map(|b| Value::from(*b)),
            ParamType::Object => match m.get_one::<String>(p.name) {
                None => None,
                Some(text) => Some(serde_json::from_str(text).map_err(|e| {
                    ToolError::invalid_params(format!("--{}: invalid JSON: {e}", flag(p.name)))
                        .with_detail(serde_json::json!({ "field": p.name }))
                })?),
            },
            ParamType::String => m.get_one::<String>(p.name).map(|s| Value::from(s.as_str())),
        };
        if let Some(v) = value {
            out.insert(p.name.to_string(), v);
        }
    }
    Ok(Value::Object(out))
}

fn execute(spec: &ToolSpec, m: &ArgMatches, config: &Config) -> Result<Value, ToolError> {
    let params = Params::validate(spec, &collect_params(spec, m)?)?;
    let cache = || CpgCache::new(config.cache_root.clone(), config.cache_entries);
    match spec.name {
        "create_cpg_session" => {
            let snap = snapshot(config, params.req_str("source"), params.str("language").unwrap_or("c"))?;
            let (_, info) = open_graph(&cache(), snap)?;
            serde_json::to_value(info).map_err(|e| ToolError::internal(e.to_string()))
        }
        "close_session" => {
            let id = m.get_one::<String>("session_id").map_or("", String::as_str);
            Err(ToolError::unknown_session(id))
        }
        "poll_job" => {
            let id = params.req_str("job_id");
            Err(ToolError::new("unknown_job", format!("unknown job '{id}'"))
                .with_detail(serde_json::json!({ "job_id": id })))
        }
        tool => {
            let source = m.get_one::<PathBuf>("source").expect("required by clap");
            let snap = snapshot(config, &source.to_string_lossy(), "c")?;
            let (cpg, _) = open_graph(&cache(), snap)?;
            run_cpg_tool(&cpg, config, tool, &params)
        }
    }
}

fn render_text(tool: &str, result: &Value) -> String {
    let field = match tool {
        "get_program_slice" | "get_code_snippet" => "code",
        "get_method_source" => "numbered",
        _ => "",
    };
    match result.get(field).and_then(Value::as_str) {
        Some(text) if text.ends_with('\n') => text.to_string(),
        Some(text) => format!("{text}\n"),
        None => format!(
            "{}\n",
            serde_json::to_string_pretty(result).expect("json values serialize")
        ),
    }
}

fn serve(m: &ArgMatches, mut config: Config, err: &mut dyn Write) -> i32 {
    if let Some(host) = m.get_one::<String>("host") {
        config.host = host.clone();
    }
    if let Some(port) = m.get_one::<u16>("port") {
        config.port = *port;
    }
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start runtime: {e}");
            return EXIT_TOOL_ERROR;
        }
    };
    match runtime.block_on(codebadger_server::serve(config)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_TOOL_ERROR
        }
    }
}

fn corpus_check(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (table, outcomes) = codebadger_checks::criteria::corpus_check();
    let _ = out.write_all(table.as_bytes());
    if m.get_flag("timings") {
        for o in &outcomes {
            let _ = writeln!(err, "{:>2}  {:>8.1} ms", o.id, o.elapsed.as_secs_f64() * 1000.0);
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        EXIT_TOOL_ERROR
    }
}

/// Runs one invocation; `args` includes the program name. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut cmd = command();
    let matches = match cmd.try_get_matches_from_mut(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return e.exit_code();
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let config = match Config::resolve(matches.get_one::<PathBuf>("config").map(PathBuf::as_path)) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: config_error: {e}");
            return EXIT_TOOL_ERROR;
        }
    };
    match name {
        "serve" => return serve(sub, config, err),
        "corpus-check" => return corpus_check(sub, out, err),
        _ => {}
    }
    let spec = manifest()
        .into_iter()
        .find(|t| t.name == name)
        .expect("subcommands mirror the manifest");
    let json = matches.get_one::<String>("format").map(String::as_str) != Some("text");
    match execute(&spec, sub, &config) {
        Ok(result) => {
            let text = if json {
                format!("{}\n", serde_json::to_string(&result).expect("json values serialize"))
            } else {
                render_text(name, &result)
            };
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) if e.code == "invalid_params" => {
            let _ = writeln!(err, "error: {}\n", e.message);
            let help = cmd.find_subcommand_mut(name).expect("known subcommand").render_help();
            let _ = write!(err, "{help}");
            EXIT_USAGE
        }
        Err(e) => {
            if json {
                let _ = writeln!(err, "{}", serde_json::to_string(&e).expect("errors serialize"));
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            EXIT_TOOL_ERROR
        }
    }
}
