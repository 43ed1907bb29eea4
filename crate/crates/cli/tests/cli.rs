use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};

use codebadger_checks::corpus;
use codebadger_checks::criteria::sample_calls;
use codebadger_core::config::Config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_codebadger"))
}

struct Fixture {
    _dir: tempfile::TempDir,
    config: PathBuf,
    root: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("codebadger.conf");
    std::fs::write(&config, format!("cache_root: {}\n", dir.path().join("cache").display())).unwrap();
    let root = dir.path().to_path_buf();
    Fixture {
        _dir: dir,
        config,
        root,
    }
}

/// Runs in-process; returns (exit code, stdout, stderr).
fn run(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("codebadger".to_string()).chain(args.iter().cloned());
    let code = codebadger_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn args(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Tool parameters as command-line flags.
fn flags(params: &Value) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in params.as_object().unwrap() {
        out.push(format!("--{}", k.replace('_', "-")));
        out.push(match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        });
    }
    out
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn every_tool_has_one_subcommand() {
    let cmd = codebadger_cli::command();
    let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
    for t in codebadger_core::tools::manifest() {
        assert_eq!(names.iter().filter(|n| **n == t.name).count(), 1, "{}", t.name);
    }
    assert_eq!(names.len(), codebadger_core::tools::manifest().len() + 2);
}

#[test]
fn slice_contains_the_criterion_line() {
    let f = fixture();
    let p = corpus::bounds_vulnerable();
    let src = f.root.join("toy");
    p.write_to(&src).unwrap();
    let line = corpus::BOUNDS_ACCESS_LINE.0;
    let out = bin()
        .args(["--config", &f.config.to_string_lossy()])
        .args([
            "slice",
            "--source",
            &src.to_string_lossy(),
            "--file",
            "strip.c",
            "--line",
            &line.to_string(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let slice: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lines: Vec<u64> = slice["lines"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["line"].as_u64().unwrap())
        .collect();
    assert!(lines.contains(&(line as u64)), "{lines:?}");
}

#[test]
fn taint_max_paths_one_gives_one_path() {
    let f = fixture();
    let src = f.root.join("corpus");
    for p in corpus::handwritten() {
        p.write_to(&src.join(&p.name)).unwrap();
    }
    let base = args(&[
        "--config",
        &f.config.to_string_lossy(),
        "taint",
        "--source",
        &src.to_string_lossy(),
    ]);
    let (code, all, _) = run(&base);
    assert_eq!(code, 0);
    let all: Value = serde_json::from_str(&all).unwrap();
    assert!(all["total"].as_u64().unwrap() > 1);
    let mut capped = base.clone();
    capped.extend(args(&["--max-paths", "1"]));
    let (code, one, _) = run(&capped);
    assert_eq!(code, 0);
    let one: Value = serde_json::from_str(&one).unwrap();
    assert_eq!(one["paths"].as_array().unwrap().len(), 1);
    assert_eq!(one["paths"][0], all["paths"][0]);
}

#[test]
fn text_format_prints_code() {
    let f = fixture();
    let src = f.root.join("q");
    corpus::qname().write_to(&src).unwrap();
    let (code, out, _) = run(&args(&[
        "get_code_snippet",
        "--config",
        &f.config.to_string_lossy(),
        "--format",
        "text",
        "--source",
        &src.to_string_lossy(),
        "--file",
        "tree.c",
        "--start-line",
        "14",
        "--end-line",
        "14",
    ]));
    assert_eq!(code, 0);
    assert!(out.contains("xmlMalloc"), "{out}");
    assert!(!out.trim_start().starts_with('{'));
}

#[test]
fn exit_codes() {
    let f = fixture();
    let src = f.root.join("q");
    corpus::qname().write_to(&src).unwrap();
    let conf = f.config.to_string_lossy().to_string();
    let source = src.to_string_lossy().to_string();

    let (code, _, err) = run(&args(&[
        "--config",
        &conf,
        "get_method_source",
        "--source",
        &source,
        "--name",
        "nope",
    ]));
    assert_eq!(code, 1);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["code"], "unknown_method");

    let (code, _, err) = run(&args(&["--config", &conf, "get_call_graph", "--source", &source]));
    assert_eq!(code, 2);
    assert!(err.contains("--root"), "{err}");

    let (code, _, err) = run(&args(&[
        "--config",
        &conf,
        "run_structured_query",
        "--source",
        &source,
        "--expand",
        "{not json",
    ]));
    assert_eq!(code, 2);
    assert!(err.contains("Usage"), "{err}");

    let (code, _, _) = run(&args(&[
        "--config",
        &conf,
        "get_codebase_summary",
        "--source",
        "/no/such/dir",
    ]));
    assert_eq!(code, 1);

    let (code, _, err) = run(&args(&["--config", &conf, "poll_job", "--job-id", "x"]));
    assert_eq!(code, 1);
    assert!(err.contains("unknown_job"));

    let (code, out, _) = run(&args(&["--config", &conf, "create_cpg_session", "--source", &source]));
    assert_eq!(code, 0);
    let info: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(info["session_id"], Value::Null);
    assert_eq!(info["cache_hit"], true);
}

/// The `result` member of a server response, as the raw bytes sent.
fn raw_result(body: &str) -> Option<&str> {
    body.strip_prefix("{\"status\":\"ok\",\"result\":")?.strip_suffix('}')
}

#[test]
fn json_output_matches_the_server_result_byte_for_byte() {
    let f = fixture();
    let config = Config::load(&f.config).unwrap();
    let addr = codebadger_server::spawn(Config { port: 0, ..config }).unwrap();
    let client = reqwest::blocking::Client::new();
    let conf = f.config.to_string_lossy().to_string();
    let mut compared = 0;
    for p in corpus::everything() {
        let src = f.root.join("src").join(&p.name);
        p.write_to(&src).unwrap();
        let source = src.to_string_lossy().to_string();
        let created: Value = client
            .post(format!("http://{addr}/tools/create_cpg_session"))
            .json(&json!({"params": {"source": source}}))
            .send()
            .unwrap()
            .json()
            .unwrap();
        let sid = created["result"]["session_id"].as_str().unwrap().to_string();
        for (tool, params) in sample_calls(&p.cpg()) {
            let body = client
                .post(format!("http://{addr}/tools/{tool}"))
                .json(&json!({"session_id": sid, "params": params}))
                .send()
                .unwrap()
                .text()
                .unwrap();
            let mut argv = args(&["--config", &conf, tool, "--source", &source]);
            argv.extend(flags(&params));
            let (code, out, err) = run(&argv);
            match raw_result(&body) {
                Some(result) => {
                    assert_eq!(code, 0, "{} {tool}: {err}", p.name);
                    assert_eq!(out.strip_suffix('\n').unwrap(), result, "{} {tool} {params}", p.name);
                }
                None => {
                    let server: Value = serde_json::from_str(&body).unwrap();
                    assert_eq!(code, 1, "{} {tool}: {body}", p.name);
                    let cli: Value = serde_json::from_str(err.trim()).unwrap();
                    assert_eq!(cli, server["error"], "{} {tool}", p.name);
                }
            }
            compared += 1;
        }
    }
    assert!(compared >= 600, "{compared}");
}
