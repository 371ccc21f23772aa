//! JSONL persistence for event logs.
//!
//! One object per line: `{"seq":int,"ts":int,"kind":string,"payload":{...}}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};
use thiserror::Error;

use super::event::{AgentId, EventPayload, PlatformEvent, PostId};
use super::{EventLog, LogError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed JSON: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    SchemaError { line: usize, field: String, message: String },
    #[error("line {line}: {source}")]
    OrderError { line: usize, source: LogError },
    #[error("line {line}: {source}")]
    InvalidEvent { line: usize, source: LogError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Unknown fields are an error.
    Strict,
    /// Unknown fields are ignored with a warning.
    #[default]
    Lenient,
}

pub fn ingest_jsonl(path: impl AsRef<Path>, mode: Strictness) -> Result<EventLog, IngestError> {
    let file = File::open(path)?;
    ingest_reader(BufReader::new(file), mode)
}

pub fn ingest_reader(reader: impl BufRead, mode: Strictness) -> Result<EventLog, IngestError> {
    let mut log = EventLog::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = parse_line(&line, line_no, mode)?;
        log.append(event).map_err(|source| match source {
            LogError::OutOfOrder { .. } => IngestError::OrderError { line: line_no, source },
            other => IngestError::InvalidEvent { line: line_no, source: other },
        })?;
    }
    Ok(log)
}

pub fn parse_line(line: &str, line_no: usize, mode: Strictness) -> Result<PlatformEvent, IngestError> {
    let value: Value = serde_json::from_str(line)
        .map_err(|e| IngestError::ParseError { line: line_no, message: e.to_string() })?;
    let obj = value.as_object().ok_or_else(|| IngestError::SchemaError {
        line: line_no,
        field: "<root>".into(),
        message: "expected an object".into(),
    })?;
    let mut fields = Fields { obj, line: line_no, path: "" };
    fields.allow_only(&["seq", "ts", "kind", "payload"], mode)?;
    let seq = fields.u64("seq")?;
    let ts = fields.i64("ts")?;
    let kind = fields.string("kind")?;
    let payload_obj = obj.get("payload").and_then(Value::as_object).ok_or_else(|| IngestError::SchemaError {
        line: line_no,
        field: "payload".into(),
        message: "missing or not an object".into(),
    })?;
    let mut p = Fields { obj: payload_obj, line: line_no, path: "payload." };
    let payload = match kind.as_str() {
        "AgentCreated" => {
            p.allow_only(&["agent_id", "backstory", "display_name"], mode)?;
            EventPayload::AgentCreated {
                agent_id: AgentId(p.string("agent_id")?),
                backstory: p.opt_string("backstory")?,
                display_name: p.string("display_name")?,
            }
        }
        "Posted" => {
            p.allow_only(&["post_id", "author_id", "text", "reply_to", "likes", "views", "comments"], mode)?;
            EventPayload::Posted {
                post_id: PostId(p.string("post_id")?),
                author_id: AgentId(p.string("author_id")?),
                text: p.string("text")?,
                reply_to: p.opt_string("reply_to")?.map(PostId),
                likes: p.opt_u64("likes")?,
                views: p.opt_u64("views")?,
                comments: p.opt_u64("comments")?,
            }
        }
        "Liked" | "Disliked" => {
            p.allow_only(&["actor_id", "post_id"], mode)?;
            let actor_id = AgentId(p.string("actor_id")?);
            let post_id = PostId(p.string("post_id")?);
            if kind == "Liked" {
                EventPayload::Liked { actor_id, post_id }
            } else {
                EventPayload::Disliked { actor_id, post_id }
            }
        }
        "Commented" => {
            p.allow_only(&["actor_id", "post_id", "text", "comment_id"], mode)?;
            EventPayload::Commented {
                actor_id: AgentId(p.string("actor_id")?),
                post_id: PostId(p.string("post_id")?),
                text: p.string("text")?,
                comment_id: PostId(p.string("comment_id")?),
            }
        }
        "Followed" | "Unfollowed" => {
            p.allow_only(&["follower_id", "followee_id"], mode)?;
            let follower_id = AgentId(p.string("follower_id")?);
            let followee_id = AgentId(p.string("followee_id")?);
            if kind == "Followed" {
                EventPayload::Followed { follower_id, followee_id }
            } else {
                EventPayload::Unfollowed { follower_id, followee_id }
            }
        }
        other => {
            return Err(IngestError::SchemaError {
                line: line_no,
                field: "kind".into(),
                message: format!("unknown event kind `{other}`"),
            })
        }
    };
    Ok(PlatformEvent::new(seq, ts, payload))
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    line: usize,
    path: &'static str,
}

impl Fields<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> IngestError {
        IngestError::SchemaError { line: self.line, field: format!("{}{}", self.path, field), message: message.into() }
    }

    fn allow_only(&mut self, known: &[&str], mode: Strictness) -> Result<(), IngestError> {
        for key in self.obj.keys() {
            if !known.contains(&key.as_str()) {
                match mode {
                    Strictness::Strict => return Err(self.err(key, "unknown field")),
                    Strictness::Lenient => {
                        log::warn!("line {}: ignoring unknown field `{}{}`", self.line, self.path, key)
                    }
                }
            }
        }
        Ok(())
    }

    fn string(&self, field: &str) -> Result<String, IngestError> {
        match self.obj.get(field) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(self.err(field, "expected a string")),
            None => Err(self.err(field, "missing")),
        }
    }

    fn opt_string(&self, field: &str) -> Result<Option<String>, IngestError> {
        match self.obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.err(field, "expected a string")),
        }
    }

    fn u64(&self, field: &str) -> Result<u64, IngestError> {
        self.opt_u64(field)?.ok_or_else(|| self.err(field, "missing"))
    }

    fn opt_u64(&self, field: &str) -> Result<Option<u64>, IngestError> {
        match self.obj.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => match n.as_u64() {
                Some(v) => Ok(Some(v)),
                None => Err(self.err(field, format!("expected a non-negative integer, got {n}"))),
            },
            Some(_) => Err(self.err(field, "expected a non-negative integer")),
        }
    }

    fn i64(&self, field: &str) -> Result<i64, IngestError> {
        match self.obj.get(field) {
            Some(Value::Number(n)) => n.as_i64().ok_or_else(|| self.err(field, "expected an integer")),
            Some(_) => Err(self.err(field, "expected an integer")),
            None => Err(self.err(field, "missing")),
        }
    }
}

/// Render one event as its canonical JSONL line (without newline).
pub fn event_to_line(event: &PlatformEvent) -> String {
    serde_json::to_string(event).expect("events always serialize")
}

pub fn export_writer(log: &EventLog, mut w: impl Write) -> std::io::Result<()> {
    for e in log.events() {
        w.write_all(event_to_line(e).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn export_jsonl(log: &EventLog, path: impl AsRef<Path>) -> std::io::Result<()> {
    let file = File::create(path)?;
    export_writer(log, BufWriter::new(file))
}

pub fn export_string(log: &EventLog) -> String {
    let mut buf = Vec::new();
    export_writer(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
