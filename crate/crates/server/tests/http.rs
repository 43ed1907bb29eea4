use std::net::SocketAddr;
use std::path::Path;
use std::time::{Duration, Instant};

use codebadger_core::config::Config;
use codebadger_core::tools::manifest;
use codebadger_server::{spawn, Server, ServerError};
use reqwest::StatusCode;
use serde_json::{json, Value};

const VULN: &str = "\
int process(int fd) {
    char buf[64];
    int n;
    n = read(fd, buf, 64);
    if (n > 0) {
        system(buf);
    }
    return n;
}

int main(int argc) {
    int r;
    r = process(argc);
    return r;
}
";

struct Harness {
    base: String,
    client: reqwest::Client,
    _cache: tempfile::TempDir,
    src: tempfile::TempDir,
}

fn start() -> Harness {
    let cache = tempfile::tempdir().unwrap();
    let src = tempfile::tempdir().unwrap();
    std::fs::write(src.path().join("vuln.c"), VULN).unwrap();
    let config = Config {
        port: 0,
        cache_root: cache.path().to_path_buf(),
        ..Config::default()
    };
    let addr: SocketAddr = spawn(config).unwrap();
    Harness {
        base: format!("http://{addr}"),
        client: reqwest::Client::new(),
        _cache: cache,
        src,
    }
}

impl Harness {
    async fn call(&self, tool: &str, body: Value) -> (StatusCode, Value) {
        let resp = self
            .client
            .post(format!("{}/tools/{tool}", self.base))
            .json(&body)
            .send()
            .await
            .unwrap();
        let status = resp.status();
        (status, resp.json().await.unwrap())
    }

    async fn call_raw(&self, tool: &str, body: &'static str) -> (StatusCode, Value) {
        let resp = self
            .client
            .post(format!("{}/tools/{tool}", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .await
            .unwrap();
        let status = resp.status();
        (status, resp.json().await.unwrap())
    }

    async fn get(&self, path: &str) -> (StatusCode, Value) {
        let resp = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        let status = resp.status();
        (status, resp.json().await.unwrap())
    }

    async fn session(&self) -> String {
        let source = self.src.path().to_str().unwrap();
        let (status, body) = self
            .call("create_cpg_session", json!({"params": {"source": source}}))
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body["result"]["session_id"].as_str().unwrap().to_string()
    }

    async fn wait_job(&self, job_id: &str) -> Value {
        let deadline = Instant::now() + Duration::from_secs(10);
        loop {
            let (status, body) = self.get(&format!("/jobs/{job_id}")).await;
            assert_eq!(status, StatusCode::OK, "{body}");
            let state = body["result"]["state"].as_str().unwrap().to_string();
            if state == "done" || state == "failed" || Instant::now() > deadline {
                return body["result"].clone();
            }
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }
}

#[tokio::test]
async fn health_and_manifest() {
    let h = start();
    let (status, body) = h.get("/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");

    let (status, body) = h.get("/tools").await;
    assert_eq!(status, StatusCode::OK);
    let tools = body["tools"].as_array().unwrap();
    assert!(tools.len() >= 16);
    for t in tools {
        assert!(t["name"].is_string());
        assert_eq!(t["params"]["type"], "object");
        assert!(t["params"]["properties"].is_object(), "{t}");
    }
}

#[tokio::test]
async fn unknown_tool_is_404() {
    let h = start();
    let (status, body) = h.call("nonexistent", json!({})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["status"], "error");
    assert_eq!(body["error"]["code"], "unknown_tool");
}

#[tokio::test]
async fn missing_session_id_names_the_field() {
    let h = start();
    let (status, body) = h.call("list_methods", json!({"params": {}})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_params");
    assert_eq!(body["error"]["detail"]["field"], "session_id");
    assert!(body["error"]["message"].as_str().unwrap().contains("session_id"));
}

#[tokio::test]
async fn malformed_body_is_parse_error() {
    let h = start();
    let (status, body) = h.call_raw("list_methods", "{\"session_id\": ").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "parse_error");
    let (status, body) = h.call_raw("list_methods", "{\"sesion_id\": \"x\"}").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_params");
}

#[tokio::test]
async fn tool_name_in_body_must_match_path() {
    let h = start();
    let (_, body) = h
        .call("list_methods", json!({"tool": "list_calls", "session_id": "x"}))
        .await;
    assert_eq!(body["error"]["code"], "invalid_params");
    assert_eq!(body["error"]["detail"]["field"], "tool");
}

#[tokio::test]
async fn taint_flow_then_stale_session() {
    let h = start();
    let sid = h.session().await;
    let (status, body) = h.call("find_taint_flows", json!({"session_id": sid})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["status"], "ok");
    let paths = body["result"]["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0]["source"]["line"], 4);
    assert_eq!(paths[0]["sink"]["line"], 6);

    let (status, body) = h.call("close_session", json!({"session_id": sid})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    for tool in ["list_methods", "find_taint_flows", "close_session"] {
        let (status, body) = h.call(tool, json!({"session_id": sid})).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{tool}");
        assert_eq!(body["error"]["code"], "unknown_session");
    }
    let (_, body) = h.call("list_methods", json!({"session_id": sid, "async": true})).await;
    assert_eq!(body["error"]["code"], "unknown_session");
}

#[tokio::test]
async fn async_slice_matches_sync() {
    let h = start();
    let sid = h.session().await;
    let params = json!({"file": "vuln.c", "line": 6});
    let (_, sync) = h
        .call("get_program_slice", json!({"session_id": sid, "params": params}))
        .await;
    assert_eq!(sync["status"], "ok", "{sync}");

    let (status, accepted) = h
        .call(
            "get_program_slice",
            json!({"session_id": sid, "params": params, "async": true}),
        )
        .await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(accepted["status"], "accepted");
    let job = h.wait_job(accepted["job_id"].as_str().unwrap()).await;
    assert_eq!(job["state"], "done");
    assert_eq!(job["tool"], "get_program_slice");
    assert_eq!(job["session_id"].as_str(), Some(sid.as_str()));
    assert_eq!(
        serde_json::to_string(&job["result"]).unwrap(),
        serde_json::to_string(&sync["result"]).unwrap()
    );
}

#[tokio::test]
async fn async_session_build() {
    let h = start();
    let source = h.src.path().to_str().unwrap();
    let (status, body) = h
        .call(
            "create_cpg_session",
            json!({"params": {"source": source}, "async": true}),
        )
        .await;
    assert_eq!(status, StatusCode::ACCEPTED, "{body}");
    let job = h.wait_job(body["job_id"].as_str().unwrap()).await;
    assert_eq!(job["state"], "done", "{job}");
    let sid = job["result"]["session_id"].as_str().unwrap();
    let (status, body) = h.call("list_methods", json!({"session_id": sid})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["result"]["total"], 2);
}

#[tokio::test]
async fn unknown_job_is_404() {
    let h = start();
    let (status, body) = h.get("/jobs/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "unknown_job");
    let (status, body) = h.call("poll_job", json!({"params": {"job_id": "nope"}})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "unknown_job");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_agree() {
    let h = std::sync::Arc::new(start());
    let sid = h.session().await;
    let other = h.session().await;
    assert_ne!(sid, other);
    let mut tasks = Vec::new();
    for i in 0..16 {
        let h = h.clone();
        let id = if i % 2 == 0 { sid.clone() } else { other.clone() };
        tasks.push(tokio::spawn(async move {
            let (_, body) = h.call("find_taint_flows", json!({"session_id": id})).await;
            serde_json::to_string(&body).unwrap()
        }));
    }
    let mut bodies = Vec::new();
    for t in tasks {
        bodies.push(t.await.unwrap());
    }
    assert!(bodies.iter().all(|b| b == &bodies[0]));
}

fn sample_value(ty: &str, choices: &Value) -> Value {
    if let Some(first) = choices.as_array().and_then(|c| c.first()) {
        return first.clone();
    }
    match ty {
        "integer" => json!(1),
        "boolean" => json!(true),
        "object" => json!({}),
        _ => json!("x"),
    }
}

#[tokio::test]
async fn schema_honesty() {
    let h = start();
    let sid = h.session().await;
    let (_, manifest_body) = h.get("/tools").await;
    for tool in manifest_body["tools"].as_array().unwrap() {
        let name = tool["name"].as_str().unwrap();
        if name == "create_cpg_session" || name == "close_session" {
            continue;
        }
        let props = tool["params"]["properties"].as_object().unwrap();
        // Every declared parameter is accepted by name.
        for (pname, schema) in props {
            let mut params = serde_json::Map::new();
            for req in tool["params"]["required"].as_array().unwrap() {
                let r = req.as_str().unwrap();
                params.insert(
                    r.into(),
                    sample_value(props[r]["type"].as_str().unwrap(), &props[r]["enum"]),
                );
            }
            params.insert(
                pname.clone(),
                sample_value(schema["type"].as_str().unwrap(), &schema["enum"]),
            );
            let (_, body) = h.call(name, json!({"session_id": sid, "params": params})).await;
            let err = &body["error"];
            assert!(
                !(err["code"] == "invalid_params" && err["message"].as_str().unwrap().contains("unknown parameter")),
                "{name}.{pname}: {body}"
            );
            assert!(body["status"] == "ok" || err["code"].is_string(), "{body}");
        }
        // Anything undeclared is rejected.
        let (status, body) = h.call(name, json!({"session_id": sid, "params": {"bogus": 1}})).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{name}");
        assert_eq!(body["error"]["detail"]["field"], "bogus");
    }
    // Declared types are enforced.
    let (_, body) = h
        .call(
            "find_taint_flows",
            json!({"session_id": sid, "params": {"max_paths": "many"}}),
        )
        .await;
    assert_eq!(body["error"]["detail"]["field"], "max_paths");
}

#[tokio::test]
async fn manifest_mirrors_core() {
    let h = start();
    let (_, body) = h.get("/tools").await;
    let names: Vec<&str> = body["tools"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["name"].as_str().unwrap())
        .collect();
    let core: Vec<&str> = manifest().iter().map(|t| t.name).collect();
    assert_eq!(names, core);
}

#[tokio::test]
async fn occupied_port_fails_with_diagnostic() {
    let first = Server::bind(Config {
        port: 0,
        ..Config::default()
    })
    .await
    .unwrap();
    let port = first.local_addr().port();
    let err = Server::bind(Config {
        port,
        ..Config::default()
    })
    .await
    .err()
    .unwrap();
    assert!(matches!(err, ServerError::Bind { .. }));
    assert!(err.to_string().contains(&port.to_string()));
}

#[tokio::test]
async fn build_failure_is_reported() {
    let h = start();
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.c"), "int f( {").unwrap();
    let (status, body) = h
        .call(
            "create_cpg_session",
            json!({"params": {"source": dir.path().to_str().unwrap()}}),
        )
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert_eq!(body["error"]["code"], "build_failed");
    let (_, body) = h
        .call(
            "create_cpg_session",
            json!({"params": {"source": "/definitely/not/here"}}),
        )
        .await;
    assert_eq!(body["error"]["code"], "io_error");
    assert!(!Path::new("/definitely/not/here").exists());
}
