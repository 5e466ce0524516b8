//! File-backed storage under a data directory:
//!
//! ```text
//! sites/<site>.json                 site description, theory and activities
//! templates/<site>/<template>.json  stored templates
//! sessions/<session>.log            append-only session log (JSON lines)
//! sessions/<session>.snapshot.json  latest snapshot
//! traces/<site>.jsonl               exported traces
//! users/<site>/<user>.json          the user's remembered template
//! ```
//!
//! Whole-file records are written to a temporary file and renamed into place.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use personable_core::ebg::{parse_traces, write_traces, Template, Trace};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::session::{LogEntry, Session};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },
    #[error("corrupt record {path}: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error("storage I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: String,
    /// Site description text.
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activities: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Derived,
    Remembered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub id: String,
    pub site: String,
    pub origin: Origin,
    pub template: Template,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Number of log entries the snapshot covers.
    pub entries: usize,
    pub session: Session,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ids become file names, so only a conservative alphabet is accepted.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        && !id.starts_with('.')
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in ["sites", "templates", "sessions", "traces", "users"] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(io_err(&p))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let tmp = path.with_extension("tmp");
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(value).expect("store records serialize");
        self.write_atomic(path, &bytes)
    }

    fn read_json<T: DeserializeOwned>(&self, path: &Path, kind: &'static str, id: &str) -> Result<T, StoreError> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound {
                    kind,
                    id: id.to_string(),
                })
            }
            Err(e) => return Err(io_err(path)(e)),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }

    fn ids_in(&self, dir: &Path, suffix: &str) -> Result<Vec<String>, StoreError> {
        let entries = match fs::read_dir(dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(dir)(e)),
        };
        let mut out = Vec::new();
        for entry in entries {
            let name = entry.map_err(io_err(dir))?.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(suffix)) {
                out.push(id.to_string());
            }
        }
        out.sort();
        Ok(out)
    }

    // Sites

    fn site_path(&self, id: &str) -> PathBuf {
        self.root.join("sites").join(format!("{id}.json"))
    }

    pub fn put_site(&self, record: &SiteRecord) -> Result<(), StoreError> {
        self.write_json(&self.site_path(&record.id), record)
    }

    pub fn get_site(&self, id: &str) -> Result<SiteRecord, StoreError> {
        self.read_json(&self.site_path(id), "site", id)
    }

    pub fn site_ids(&self) -> Result<Vec<String>, StoreError> {
        self.ids_in(&self.root.join("sites"), ".json")
    }

    // Templates

    fn template_path(&self, site: &str, id: &str) -> PathBuf {
        self.root.join("templates").join(site).join(format!("{id}.json"))
    }

    pub fn put_template(&self, record: &TemplateRecord) -> Result<(), StoreError> {
        self.write_json(&self.template_path(&record.site, &record.id), record)
    }

    pub fn get_template(&self, site: &str, id: &str) -> Result<TemplateRecord, StoreError> {
        self.read_json(&self.template_path(site, id), "template", id)
    }

    pub fn delete_template(&self, site: &str, id: &str) -> Result<(), StoreError> {
        let p = self.template_path(site, id);
        match fs::remove_file(&p) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => Err(io_err(&p)(e)),
            _ => Ok(()),
        }
    }

    pub fn templates(&self, site: &str) -> Result<Vec<TemplateRecord>, StoreError> {
        self.ids_in(&self.root.join("templates").join(site), ".json")?
            .iter()
            .map(|id| self.get_template(site, id))
            .collect()
    }

    // Sessions

    fn log_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.log"))
    }

    fn snapshot_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.snapshot.json"))
    }

    pub fn append_log(&self, id: &str, entry: &LogEntry) -> Result<(), StoreError> {
        let path = self.log_path(id);
        let mut line = serde_json::to_string(entry).expect("log entries serialize");
        line.push('\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        f.write_all(line.as_bytes()).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }

    /// Reads the whole log. A final line cut short by a crash is dropped;
    /// any other unreadable line makes the log corrupt.
    pub fn read_log(&self, id: &str) -> Result<Vec<LogEntry>, StoreError> {
        let path = self.log_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound {
                    kind: "session",
                    id: id.to_string(),
                })
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        let torn_tail = !text.is_empty() && !text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut out = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            match serde_json::from_str(line) {
                Ok(e) => out.push(e),
                Err(_) if torn_tail && i + 1 == lines.len() => break,
                Err(e) => {
                    return Err(StoreError::Corrupt {
                        path,
                        detail: format!("line {}: {e}", i + 1),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Cuts off a final line left incomplete by a crash so later appends
    /// start on a fresh line. Returns whether anything was removed.
    pub fn repair_log(&self, id: &str) -> Result<bool, StoreError> {
        let path = self.log_path(id);
        let text = fs::read(&path).map_err(io_err(&path))?;
        if text.is_empty() || text.ends_with(b"\n") {
            return Ok(false);
        }
        let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let f = OpenOptions::new().write(true).open(&path).map_err(io_err(&path))?;
        f.set_len(keep as u64).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))?;
        Ok(true)
    }

    pub fn put_snapshot(&self, snapshot: &Snapshot) -> Result<(), StoreError> {
        self.write_json(&self.snapshot_path(&snapshot.session.id), snapshot)
    }

    pub fn get_snapshot(&self, id: &str) -> Result<Option<Snapshot>, StoreError> {
        match self.read_json(&self.snapshot_path(id), "snapshot", id) {
            Ok(s) => Ok(Some(s)),
            Err(StoreError::NotFound { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn session_ids(&self) -> Result<Vec<String>, StoreError> {
        self.ids_in(&self.root.join("sessions"), ".log")
    }

    // Traces and remembrance

    fn traces_path(&self, site: &str) -> PathBuf {
        self.root.join("traces").join(format!("{site}.jsonl"))
    }

    pub fn append_trace(&self, site: &str, trace: &Trace) -> Result<(), StoreError> {
        let path = self.traces_path(site);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        f.write_all(write_traces([trace]).as_bytes())
            .map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }

    pub fn traces(&self, site: &str) -> Result<Vec<Trace>, StoreError> {
        let path = self.traces_path(site);
        match fs::read_to_string(&path) {
            Ok(text) => parse_traces(&text).map_err(|e| StoreError::Corrupt {
                path,
                detail: e.to_string(),
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    fn user_path(&self, site: &str, user: &str) -> PathBuf {
        self.root.join("users").join(site).join(format!("{user}.json"))
    }

    pub fn put_remembered(&self, site: &str, user: &str, template: &str) -> Result<(), StoreError> {
        self.write_json(&self.user_path(site, user), &template)
    }

    pub fn get_remembered(&self, site: &str, user: &str) -> Result<Option<String>, StoreError> {
        match self.read_json(&self.user_path(site, user), "user", user) {
            Ok(t) => Ok(Some(t)),
            Err(StoreError::NotFound { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}
