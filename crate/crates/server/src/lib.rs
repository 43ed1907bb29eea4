//! HTTP+JSON front end for the tool surface.
//!
//! | Route              | Purpose                                 |
//! |--------------------|-----------------------------------------|
//! | `POST /tools/{name}` | invoke a tool with a `ToolRequest` body |
//! | `GET /tools`       | manifest with per-tool parameter schemas |
//! | `GET /jobs/{id}`   | poll an asynchronous job                 |
//! | `GET /health`      | liveness                                 |
//!
//! Every tool response is a `ToolResponse` envelope whose HTTP status
//! follows the error code.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use codebadger_core::config::Config;
use codebadger_core::session::SessionManager;
use codebadger_core::tools::{self, find_tool, ToolError, ToolRequest, ToolResponse};
use serde_json::{json, Value};
use tokio::net::TcpListener;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server stopped: {0}")]
    Io(#[from] std::io::Error),
}

fn json_response<T: serde::Serialize>(status: u16, body: &T) -> Response {
    let bytes = serde_json::to_vec(body).unwrap_or_else(|_| b"{}".to_vec());
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn envelope(resp: ToolResponse) -> Response {
    json_response(resp.http_status(), &resp)
}

fn error(e: ToolError) -> Response {
    envelope(ToolResponse::Error { error: e })
}

fn parse_request(body: &[u8]) -> Result<ToolRequest, ToolError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(ToolRequest::default());
    }
    serde_json::from_slice(body).map_err(|e| {
        let code = match e.classify() {
            serde_json::error::Category::Data => "invalid_params",
            _ => "parse_error",
        };
        ToolError::new(code, format!("malformed request body: {e}"))
    })
}

async fn invoke(State(manager): State<Arc<SessionManager>>, Path(name): Path<String>, body: Bytes) -> Response {
    if find_tool(&name).is_none() {
        return error(ToolError::unknown_tool(&name));
    }
    let request = match parse_request(&body) {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let resp = tokio::task::spawn_blocking(move || tools::dispatch(&manager, &name, request))
        .await
        .unwrap_or_else(|_| ToolResponse::Error {
            error: ToolError::internal("tool execution panicked"),
        });
    envelope(resp)
}

async fn list_tools() -> Response {
    json_response(200, &tools::manifest_json())
}

async fn poll(State(manager): State<Arc<SessionManager>>, Path(id): Path<String>) -> Response {
    let result = manager
        .poll_job(&id)
        .and_then(|job| serde_json::to_value(job).map_err(|e| ToolError::internal(e.to_string())));
    envelope(ToolResponse::from_result(result))
}

async fn health() -> Response {
    json_response(200, &json!({ "status": "ok" }))
}

async fn not_found() -> Response {
    let body: Value = json!({
        "status": "error",
        "error": { "code": "unknown_tool", "message": "no such endpoint", "detail": null },
    });
    json_response(404, &body)
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/tools", get(list_tools))
        .route("/tools/{name}", post(invoke))
        .route("/jobs/{id}", get(poll))
        .route("/health", get(health))
        .fallback(not_found)
        .with_state(manager)
}

/// A bound but not yet running server.
pub struct Server {
    listener: TcpListener,
    manager: Arc<SessionManager>,
}

impl Server {
    /// Binds `config.host:config.port`; port 0 picks a free port.
    pub async fn bind(config: Config) -> Result<Server, ServerError> {
        let addr = format!("{}:{}", config.host, config.port);
        let listener = TcpListener::bind(&addr)
            .await
            .map_err(|source| ServerError::Bind { addr, source })?;
        Ok(Server {
            listener,
            manager: SessionManager::new(config),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    pub fn manager(&self) -> Arc<SessionManager> {
        self.manager.clone()
    }

    pub async fn run(self) -> Result<(), ServerError> {
        axum::serve(self.listener, router(self.manager)).await?;
        Ok(())
    }

    pub async fn run_until(
        self,
        shutdown: impl std::future::Future<Output = ()> + Send + 'static,
    ) -> Result<(), ServerError> {
        axum::serve(self.listener, router(self.manager))
            .with_graceful_shutdown(shutdown)
            .await?;
        Ok(())
    }
}

/// Serves until interrupted.
pub async fn serve(config: Config) -> Result<(), ServerError> {
    let server = Server::bind(config).await?;
    eprintln!("codebadger listening on http://{}", server.local_addr());
    server
        .run_until(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Starts a server on a background runtime and returns its address.
/// Intended for tests and embedding; the server lives until the process
/// exits.
pub fn spawn(config: Config) -> Result<SocketAddr, ServerError> {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::Builder::new()
        .name("codebadger-server".into())
        .spawn(move || {
            let rt = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
                Ok(rt) => rt,
                Err(e) => {
                    let _ = tx.send(Err(ServerError::Io(e)));
                    return;
                }
            };
            rt.block_on(async move {
                match Server::bind(config).await {
                    Ok(server) => {
                        let _ = tx.send(Ok(server.local_addr()));
                        let _ = server.run().await;
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                    }
                }
            });
        })?;
    rx.recv()
        .unwrap_or_else(|_| Err(ServerError::Io(std::io::Error::other("server thread exited"))))
}
