//! Server and analysis configuration.
//!
//! The file format is line-oriented `key: value`, with `#` starting a
//! comment. List values (`sources`, `sinks`) are comma separated; sinks may
//! name their relevant argument positions as `memcpy:1|2` or `sprintf:*`.
//!
//! ```text
//! host: 127.0.0.1
//! port: 4242
//! cache_root: /var/cache/codebadger
//! sinks: system:0, memcpy:1|2, sprintf:*
//! ```

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analyses::{SinkSpec, SourceSinkConfig};
use crate::glob::Glob;

pub const CONFIG_ENV: &str = "CODEBADGER_CONFIG";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub host: String,
    pub port: u16,
    pub cache_root: PathBuf,
    /// Maximum number of graphs kept in the on-disk cache.
    pub cache_entries: usize,
    pub worker_count: usize,
    pub job_ttl_seconds: u64,
    pub session_ttl_seconds: u64,
    pub allow_git: bool,
    pub taint: SourceSinkConfig,
    /// File-name pattern selecting source files.
    pub file_glob: Glob,
    pub max_response_bytes: usize,
    /// Default result cap for structured queries.
    pub query_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            host: "127.0.0.1".into(),
            port: 4242,
            cache_root: std::env::temp_dir().join("codebadger-cache"),
            cache_entries: 64,
            worker_count: 4,
            job_ttl_seconds: 3600,
            session_ttl_seconds: 3600,
            allow_git: false,
            taint: SourceSinkConfig::default(),
            file_glob: Glob::new("*.c"),
            max_response_bytes: 1 << 20,
            query_limit: 500,
        }
    }
}

fn list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

impl Config {
    /// Parses configuration text; unspecified keys keep their defaults.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let invalid = |message: String| ConfigError::Invalid { line: i + 1, message };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| invalid(format!("expected 'key: value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| invalid(format!("{key} must be a non-negative integer, got '{v}'")))
            };
            match key {
                "host" => cfg.host = value.to_string(),
                "port" => {
                    cfg.port = value
                        .parse()
                        .map_err(|_| invalid(format!("port must be 0-65535, got '{value}'")))?
                }
                "cache_root" => cfg.cache_root = PathBuf::from(value),
                "cache_entries" => cfg.cache_entries = number(value)? as usize,
                "worker_count" => cfg.worker_count = number(value)? as usize,
                "job_ttl_seconds" => cfg.job_ttl_seconds = number(value)?,
                "session_ttl_seconds" => cfg.session_ttl_seconds = number(value)?,
                "allow_git" => {
                    cfg.allow_git = match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(invalid(format!("allow_git must be true or false, got '{value}'"))),
                    }
                }
                "sources" => cfg.taint.sources = list(value).into_iter().map(Glob::new).collect(),
                "sinks" => {
                    cfg.taint.sinks = list(value)
                        .into_iter()
                        .map(SinkSpec::parse)
                        .collect::<Result<_, _>>()
                        .map_err(invalid)?
                }
                "file_glob" => cfg.file_glob = Glob::new(value),
                "max_response_bytes" => cfg.max_response_bytes = number(value)? as usize,
                "query_limit" => cfg.query_limit = number(value)? as usize,
                _ => return Err(invalid(format!("unknown key '{key}'"))),
            }
            if key == "sources" && cfg.taint.sources.is_empty() || key == "sinks" && cfg.taint.sinks.is_empty() {
                return Err(invalid(format!("{key} must not be empty")));
            }
            if key == "worker_count" && cfg.worker_count == 0 {
                return Err(invalid("worker_count must be at least 1".into()));
            }
            if key == "cache_entries" && cfg.cache_entries == 0 {
                return Err(invalid("cache_entries must be at least 1".into()));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Config::parse(&text).map_err(|e| match e {
            ConfigError::Invalid { line, message } => ConfigError::Read {
                path: path.display().to_string(),
                message: format!("line {line}: {message}"),
            },
            other => other,
        })
    }

    /// Loads from `flag` if given, else from `$CODEBADGER_CONFIG`, else
    /// returns the defaults.
    pub fn resolve(flag: Option<&Path>) -> Result<Config, ConfigError> {
        let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match flag.map(Path::to_path_buf).or(env) {
            Some(path) => Config::load(&path),
            None => Ok(Config::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyses::ArgSelector;

    #[test]
    fn parses_all_keys() {
        let text = "# comment\nhost: 0.0.0.0\nport: 9000  # trailing\ncache_root: /tmp/x\ncache_entries: 3\nworker_count: 2\njob_ttl_seconds: 5\nsession_ttl_seconds: 6\nallow_git: true\nsources: read, my_*\nsinks: system:0, sprintf:*, memcpy:1|2\nfile_glob: *.mc\nmax_response_bytes: 100\nquery_limit: 7\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.host, "0.0.0.0");
        assert_eq!(c.port, 9000);
        assert_eq!(c.cache_root, PathBuf::from("/tmp/x"));
        assert_eq!((c.cache_entries, c.worker_count), (3, 2));
        assert_eq!((c.job_ttl_seconds, c.session_ttl_seconds), (5, 6));
        assert!(c.allow_git);
        assert_eq!(c.taint.sources.len(), 2);
        assert_eq!(c.taint.sinks[1].args, ArgSelector::All);
        assert_eq!(c.taint.sinks[2].to_string(), "memcpy:1|2");
        assert_eq!(c.file_glob.as_str(), "*.mc");
        assert_eq!((c.max_response_bytes, c.query_limit), (100, 7));
    }

    #[test]
    fn empty_text_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "port: 99999",
            "bogus: 1",
            "no colon here",
            "sources: ,",
            "sinks: memcpy:x",
            "worker_count: 0",
            "allow_git: maybe",
        ] {
            let err = Config::parse(text).unwrap_err();
            assert!(matches!(err, ConfigError::Invalid { line: 1, .. }), "{text}");
        }
    }

    #[test]
    fn load_reports_path() {
        let err = Config::load(Path::new("/nonexistent/cb.conf")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/cb.conf"));
    }
}
