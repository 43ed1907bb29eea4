use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{channel, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::tools::ToolError;

pub type JobResult = Result<Value, ToolError>;
type Task = Box<dyn FnOnce() + Send>;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done { result: Value },
    Failed { error: ToolError },
}

impl JobState {
    fn is_finished(&self) -> bool {
        matches!(self, JobState::Done { .. } | JobState::Failed { .. })
    }
}

/// Snapshot of a job as returned by polling. Timestamps are Unix
/// milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Job {
    pub job_id: String,
    pub session_id: Option<String>,
    pub tool: String,
    pub params: Value,
    #[serde(flatten)]
    pub state: JobState,
    pub created_at: u64,
    pub started_at: Option<u64>,
    pub finished_at: Option<u64>,
}

struct Record {
    job: Job,
    finished: Option<Instant>,
}

struct Shared {
    jobs: Mutex<HashMap<String, Record>>,
    ttl: Duration,
}

impl Shared {
    fn update(&self, id: &str, f: impl FnOnce(&mut Record)) {
        if let Some(r) = self.jobs.lock().unwrap().get_mut(id) {
            f(r);
        }
    }

    fn purge(&self) {
        let ttl = self.ttl;
        self.jobs
            .lock()
            .unwrap()
            .retain(|_, r| r.finished.is_none_or(|t| t.elapsed() <= ttl));
    }
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// A fixed pool of worker threads running submitted jobs. Finished jobs stay
/// pollable for the configured TTL.
pub struct JobQueue {
    shared: Arc<Shared>,
    sender: Mutex<Option<Sender<Task>>>,
    workers: Vec<JoinHandle<()>>,
}

impl JobQueue {
    pub fn new(workers: usize, ttl: Duration) -> Self {
        let (tx, rx) = channel::<Task>();
        let rx = Arc::new(Mutex::new(rx));
        let workers = (0..workers.max(1))
            .map(|i| {
                let rx = rx.clone();
                std::thread::Builder::new()
                    .name(format!("job-worker-{i}"))
                    .spawn(move || loop {
                        let task = rx.lock().unwrap().recv();
                        match task {
                            Ok(task) => task(),
                            Err(_) => break,
                        }
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        JobQueue {
            shared: Arc::new(Shared {
                jobs: Mutex::new(HashMap::new()),
                ttl,
            }),
            sender: Mutex::new(Some(tx)),
            workers,
        }
    }

    pub fn submit(
        &self,
        session_id: Option<String>,
        tool: &str,
        params: Value,
        work: impl FnOnce() -> JobResult + Send + 'static,
    ) -> String {
        self.shared.purge();
        let id = uuid::Uuid::new_v4().to_string();
        let job = Job {
            job_id: id.clone(),
            session_id,
            tool: tool.to_string(),
            params,
            state: JobState::Queued,
            created_at: now_millis(),
            started_at: None,
            finished_at: None,
        };
        self.shared
            .jobs
            .lock()
            .unwrap()
            .insert(id.clone(), Record { job, finished: None });
        let shared = self.shared.clone();
        let job_id = id.clone();
        let task: Task = Box::new(move || {
            shared.update(&job_id, |r| {
                r.job.state = JobState::Running;
                r.job.started_at = Some(now_millis());
            });
            let outcome =
                catch_unwind(AssertUnwindSafe(work)).unwrap_or_else(|_| Err(ToolError::internal("job panicked")));
            shared.update(&job_id, |r| {
                r.job.state = match outcome {
                    Ok(result) => JobState::Done { result },
                    Err(error) => JobState::Failed { error },
                };
                r.job.finished_at = Some(now_millis());
                r.finished = Some(Instant::now());
            });
        });
        let sender = self.sender.lock().unwrap();
        if let Some(tx) = sender.as_ref() {
            let _ = tx.send(task);
        }
        id
    }

    pub fn poll(&self, job_id: &str) -> Option<Job> {
        self.shared.purge();
        self.shared.jobs.lock().unwrap().get(job_id).map(|r| r.job.clone())
    }

    /// Polls until the job finishes or `timeout` elapses.
    pub fn wait(&self, job_id: &str, timeout: Duration) -> Option<Job> {
        let deadline = Instant::now() + timeout;
        loop {
            let job = self.poll(job_id)?;
            if job.state.is_finished() || Instant::now() >= deadline {
                return Some(job);
            }
            std::thread::sleep(Duration::from_millis(2));
        }
    }
}

impl Drop for JobQueue {
    fn drop(&mut self) {
        self.sender.lock().unwrap().take();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}
