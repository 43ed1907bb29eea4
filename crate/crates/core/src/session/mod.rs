//! Analysis sessions: a registry binding session ids to built graphs, the
//! source-hash keyed graph cache, and the asynchronous job pool.

mod cache;
mod hash;
mod jobs;

pub use cache::{CacheOutcome, CpgCache};
pub use hash::source_hash;
pub use jobs::{Job, JobQueue, JobResult, JobState};

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::cpg::{AnalysisWarning, Cpg};
use crate::frontend::{load_sources, FrontendError, SourceFile};
use crate::tools::ToolError;

pub const SUPPORTED_LANGUAGES: [&str; 1] = ["c"];

/// Result of creating a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionInfo {
    pub session_id: Option<String>,
    pub status: &'static str,
    pub source_hash: String,
    pub language: String,
    pub cache_hit: bool,
    pub files: usize,
    pub methods: usize,
    pub errors: Vec<FrontendError>,
    pub warnings: Vec<AnalysisWarning>,
}

enum Status {
    Building,
    Ready(Arc<Cpg>),
    Failed(ToolError),
}

struct Session {
    last_used: Instant,
    status: Status,
}

/// Loaded sources with their content hash.
pub struct Snapshot {
    pub root: PathBuf,
    pub files: Vec<SourceFile>,
    pub hash: String,
    pub language: String,
}

fn is_git_url(source: &str) -> bool {
    ["http://", "https://", "git://", "ssh://", "git@"]
        .iter()
        .any(|p| source.starts_with(p))
        || (source.ends_with(".git") && !Path::new(source).exists())
}

/// Reads the sources at `source` (a directory, a single file, or, when
/// `config.allow_git` is set, a git URL cloned under the cache root).
pub fn snapshot(config: &Config, source: &str, language: &str) -> Result<Snapshot, ToolError> {
    if !SUPPORTED_LANGUAGES.contains(&language) {
        return Err(ToolError::invalid_params(format!("unsupported language '{language}'")));
    }
    let root = if is_git_url(source) {
        if !config.allow_git {
            return Err(ToolError::new(
                "config_error",
                "git sources are disabled; set allow_git: true to enable them",
            ));
        }
        clone_repo(config, source)?
    } else {
        PathBuf::from(source)
    };
    let meta = std::fs::metadata(&root)
        .map_err(|e| ToolError::new("io_error", format!("cannot read source '{source}': {e}")))?;
    let files = if meta.is_file() {
        let content = std::fs::read_to_string(&root)
            .map_err(|e| ToolError::new("io_error", format!("cannot read '{source}': {e}")))?;
        let name = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        vec![SourceFile::new(name, content)]
    } else {
        load_sources(&root, &config.file_glob)
            .map_err(|e| ToolError::new("io_error", format!("cannot read source tree '{source}': {e}")))?
    };
    let hash = source_hash(&files, language);
    Ok(Snapshot {
        root,
        files,
        hash,
        language: language.to_string(),
    })
}

fn clone_repo(config: &Config, url: &str) -> Result<PathBuf, ToolError> {
    let target = config
        .cache_root
        .join("checkouts")
        .join(uuid::Uuid::new_v4().to_string());
    std::fs::create_dir_all(target.parent().expect("has parent"))
        .map_err(|e| ToolError::new("io_error", e.to_string()))?;
    let out = Command::new("git")
        .args(["clone", "--quiet", "--depth", "1", "--"])
        .arg(url)
        .arg(&target)
        .output()
        .map_err(|e| ToolError::new("io_error", format!("cannot run git: {e}")))?;
    if !out.status.success() {
        return Err(ToolError::new(
            "io_error",
            format!("git clone failed: {}", String::from_utf8_lossy(&out.stderr).trim()),
        ));
    }
    Ok(target)
}

/// Loads a snapshot's graph through `cache`. Fails with `build_failed` when
/// there were files and none of them parsed.
pub fn open_graph(cache: &CpgCache, snap: Snapshot) -> Result<(Arc<Cpg>, SessionInfo), ToolError> {
    let n_files = snap.files.len();
    let (cpg, outcome) = cache.get_or_build(snap.files, &snap.hash, &snap.language);
    let report = cpg.report();
    if n_files > 0 && report.errors.len() == n_files {
        return Err(ToolError::new("build_failed", "no source file could be parsed")
            .with_detail(json!({ "errors": report.errors })));
    }
    let info = SessionInfo {
        session_id: None,
        status: "ready",
        source_hash: snap.hash,
        language: snap.language,
        cache_hit: outcome.is_hit(),
        files: n_files,
        methods: cpg.methods().len(),
        errors: report.errors.clone(),
        warnings: report.warnings.clone(),
    };
    Ok((cpg, info))
}

/// Registry of live sessions. Safe to share across request handlers.
pub struct SessionManager {
    config: Config,
    cache: CpgCache,
    sessions: Mutex<HashMap<String, Session>>,
    jobs: JobQueue,
}

impl SessionManager {
    pub fn new(config: Config) -> Arc<Self> {
        Arc::new(SessionManager {
            cache: CpgCache::new(&config.cache_root, config.cache_entries),
            jobs: JobQueue::new(config.worker_count, Duration::from_secs(config.job_ttl_seconds)),
            sessions: Mutex::new(HashMap::new()),
            config,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn cache(&self) -> &CpgCache {
        &self.cache
    }

    pub fn jobs(&self) -> &JobQueue {
        &self.jobs
    }

    fn purge_idle(&self, sessions: &mut HashMap<String, Session>) {
        let ttl = self.config.session_ttl_seconds;
        if ttl > 0 {
            let ttl = Duration::from_secs(ttl);
            sessions.retain(|_, s| s.last_used.elapsed() <= ttl);
        }
    }

    fn register(&self) -> String {
        let id = uuid::Uuid::new_v4().to_string();
        let mut sessions = self.sessions.lock().unwrap();
        self.purge_idle(&mut sessions);
        sessions.insert(
            id.clone(),
            Session {
                last_used: Instant::now(),
                status: Status::Building,
            },
        );
        id
    }

    fn set_status(&self, id: &str, status: Status) {
        if let Some(s) = self.sessions.lock().unwrap().get_mut(id) {
            s.status = status;
            s.last_used = Instant::now();
        }
    }

    fn build(&self, id: &str, snap: Snapshot) -> Result<Value, ToolError> {
        match open_graph(&self.cache, snap) {
            Ok((cpg, mut info)) => {
                self.set_status(id, Status::Ready(cpg));
                info.session_id = Some(id.to_string());
                Ok(serde_json::to_value(info).expect("serializable"))
            }
            Err(e) => {
                self.set_status(id, Status::Failed(e.clone()));
                Err(e)
            }
        }
    }

    /// Creates a session and builds (or loads) its graph before returning.
    pub fn create_session(&self, source: &str, language: &str) -> Result<Value, ToolError> {
        let snap = snapshot(&self.config, source, language)?;
        let id = self.register();
        let result = self.build(&id, snap);
        if result.is_err() {
            self.sessions.lock().unwrap().remove(&id);
        }
        result
    }

    /// Creates a session whose graph is built by a background job. Returns
    /// the job id; the session id is recorded on the job.
    pub fn create_session_async(
        self: &Arc<Self>,
        source: &str,
        language: &str,
        params: Value,
    ) -> Result<String, ToolError> {
        let snap = snapshot(&self.config, source, language)?;
        let id = self.register();
        let me = self.clone();
        let sid = id.clone();
        Ok(self
            .jobs
            .submit(Some(id), "create_cpg_session", params, move || me.build(&sid, snap)))
    }

    /// The ready graph of a session.
    pub fn graph(&self, session_id: &str) -> Result<Arc<Cpg>, ToolError> {
        let mut sessions = self.sessions.lock().unwrap();
        self.purge_idle(&mut sessions);
        let s = sessions
            .get_mut(session_id)
            .ok_or_else(|| ToolError::unknown_session(session_id))?;
        s.last_used = Instant::now();
        match &s.status {
            Status::Ready(cpg) => Ok(cpg.clone()),
            Status::Building => Err(ToolError::new(
                "session_not_ready",
                format!("session '{session_id}' is still building"),
            )),
            Status::Failed(e) => Err(e.clone()),
        }
    }

    /// Checks that a session exists, whatever its status.
    pub fn exists(&self, session_id: &str) -> bool {
        let mut sessions = self.sessions.lock().unwrap();
        self.purge_idle(&mut sessions);
        sessions.contains_key(session_id)
    }

    pub fn close_session(&self, session_id: &str) -> Result<Value, ToolError> {
        let mut sessions = self.sessions.lock().unwrap();
        self.purge_idle(&mut sessions);
        sessions
            .remove(session_id)
            .map(|_| json!({ "session_id": session_id, "closed": true }))
            .ok_or_else(|| ToolError::unknown_session(session_id))
    }

    pub fn poll_job(&self, job_id: &str) -> Result<Job, ToolError> {
        self.jobs.poll(job_id).ok_or_else(|| {
            ToolError::new("unknown_job", format!("unknown job '{job_id}'")).with_detail(json!({ "job_id": job_id }))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manager(dir: &Path) -> Arc<SessionManager> {
        SessionManager::new(Config {
            cache_root: dir.join("cache"),
            worker_count: 2,
            ..Config::default()
        })
    }

    fn tree(dir: &Path, body: &str) -> String {
        let src = dir.join("src");
        std::fs::create_dir_all(&src).unwrap();
        std::fs::write(src.join("main.c"), body).unwrap();
        src.to_string_lossy().into_owned()
    }

    #[test]
    fn second_session_hits_cache() {
        let dir = tempfile::tempdir().unwrap();
        let m = manager(dir.path());
        let src = tree(dir.path(), "int main() { return 0; }");
        let a = m.create_session(&src, "c").unwrap();
        assert_eq!(m.cache().builds(), 1);
        assert_eq!(a["cache_hit"], false);
        let b = m.create_session(&src, "c").unwrap();
        assert_eq!(m.cache().builds(), 1);
        assert_eq!(b["cache_hit"], true);
        assert_ne!(a["session_id"], b["session_id"]);
        assert_eq!(a["source_hash"], b["source_hash"]);

        std::fs::write(Path::new(&src).join("main.c"), "int main() { return 1; }").unwrap();
        let c = m.create_session(&src, "c").unwrap();
        assert_eq!(c["cache_hit"], false);
        assert_eq!(m.cache().builds(), 2);
    }

    #[test]
    fn close_semantics() {
        let dir = tempfile::tempdir().unwrap();
        let m = manager(dir.path());
        let src = tree(dir.path(), "int main() { return 0; }");
        let s = m.create_session(&src, "c").unwrap();
        let id = s["session_id"].as_str().unwrap();
        assert!(m.graph(id).is_ok());
        m.close_session(id).unwrap();
        assert_eq!(m.graph(id).unwrap_err().code, "unknown_session");
        assert_eq!(m.close_session(id).unwrap_err().code, "unknown_session");
        let again = m.create_session(&src, "c").unwrap();
        assert_eq!(again["cache_hit"], true);
    }

    #[test]
    fn errors() {
        let dir = tempfile::tempdir().unwrap();
        let m = manager(dir.path());
        let missing = dir.path().join("missing");
        assert_eq!(
            m.create_session(missing.to_str().unwrap(), "c").unwrap_err().code,
            "io_error"
        );
        let src = tree(dir.path(), "int main( {");
        let err = m.create_session(&src, "c").unwrap_err();
        assert_eq!(err.code, "build_failed");
        assert_eq!(err.detail["errors"].as_array().unwrap().len(), 1);
        assert_eq!(m.create_session(&src, "java").unwrap_err().code, "invalid_params");
        assert_eq!(
            m.create_session("https://example.com/x.git", "c").unwrap_err().code,
            "config_error"
        );
        assert_eq!(m.poll_job("nope").unwrap_err().code, "unknown_job");
    }

    #[test]
    fn partial_parse_failure_is_ready() {
        let dir = tempfile::tempdir().unwrap();
        let m = manager(dir.path());
        let src = tree(dir.path(), "int main() { return 0; }");
        std::fs::write(Path::new(&src).join("bad.c"), "int f( {").unwrap();
        let s = m.create_session(&src, "c").unwrap();
        assert_eq!(s["status"], "ready");
        assert_eq!(s["errors"].as_array().unwrap().len(), 1);
        assert_eq!(s["files"], 2);
    }

    #[test]
    fn async_create_reports_session_on_job() {
        let dir = tempfile::tempdir().unwrap();
        let m = manager(dir.path());
        let src = tree(dir.path(), "int main() { return 0; }");
        let job_id = m.create_session_async(&src, "c", json!({})).unwrap();
        let job = m.jobs().wait(&job_id, Duration::from_secs(10)).unwrap();
        let sid = job.session_id.clone().unwrap();
        match job.state {
            JobState::Done { result } => assert_eq!(result["session_id"], sid.as_str()),
            other => panic!("{other:?}"),
        }
        assert!(m.graph(&sid).is_ok());
    }

    #[test]
    fn idle_sessions_expire() {
        let dir = tempfile::tempdir().unwrap();
        let m = SessionManager::new(Config {
            cache_root: dir.path().join("cache"),
            session_ttl_seconds: 1,
            ..Config::default()
        });
        let src = tree(dir.path(), "int main() { return 0; }");
        let s = m.create_session(&src, "c").unwrap();
        let id = s["session_id"].as_str().unwrap().to_string();
        std::thread::sleep(Duration::from_millis(1100));
        assert_eq!(m.graph(&id).unwrap_err().code, "unknown_session");
    }
}
