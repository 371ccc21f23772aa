use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use serde_json::{json, Value};

use super::action::Action;
use super::policy::{DecisionContext, PolicyError, PolicyPort};
use crate::adapters::{JsonTransport, TransportError};
use crate::util::{content_hash, Rng};

/// Text completion backend.
pub trait CompletionPort: Send {
    fn complete(&mut self, prompt: &str) -> Result<String, TransportError>;
}

/// `POST {model, prompt, max_tokens, temperature: 0}`; reads `completion`,
/// `choices[0].text` or `choices[0].message.content` from the response.
pub struct HttpCompletion {
    pub url: String,
    pub model: String,
    pub max_tokens: u32,
    transport: Arc<dyn JsonTransport>,
}

impl HttpCompletion {
    pub fn new(url: impl Into<String>, model: impl Into<String>, transport: Arc<dyn JsonTransport>) -> Self {
        Self { url: url.into(), model: model.into(), max_tokens: 128, transport }
    }
}

fn completion_text(v: &Value) -> Option<String> {
    v.get("completion")
        .or_else(|| v.pointer("/choices/0/text"))
        .or_else(|| v.pointer("/choices/0/message/content"))
        .and_then(Value::as_str)
        .map(str::to_owned)
}

impl CompletionPort for Box<dyn CompletionPort> {
    fn complete(&mut self, prompt: &str) -> Result<String, TransportError> {
        (**self).complete(prompt)
    }
}

impl CompletionPort for HttpCompletion {
    fn complete(&mut self, prompt: &str) -> Result<String, TransportError> {
        let body = json!({
            "model": self.model,
            "prompt": prompt,
            "max_tokens": self.max_tokens,
            "temperature": 0,
        });
        let resp = self.transport.post_json(&self.url, &body)?;
        completion_text(&resp).ok_or_else(|| TransportError::BadResponse("no completion text".into()))
    }
}

/// Replays recorded completions from `<dir>/<sha256(prompt)>.txt`.
pub struct FixtureCompletion {
    dir: PathBuf,
}

impl FixtureCompletion {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(dir: &std::path::Path, prompt: &str) -> PathBuf {
        dir.join(format!("{}.txt", content_hash(prompt.as_bytes())))
    }
}

impl CompletionPort for FixtureCompletion {
    fn complete(&mut self, prompt: &str) -> Result<String, TransportError> {
        let path = Self::path_for(&self.dir, prompt);
        std::fs::read_to_string(&path)
            .map_err(|e| TransportError::BadResponse(format!("no fixture at {}: {e}", path.display())))
    }
}

/// Passes calls through and stores every completion as a fixture.
pub struct RecordingCompletion<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: CompletionPort> RecordingCompletion<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        Self { inner, dir: dir.into() }
    }
}

impl<C: CompletionPort> CompletionPort for RecordingCompletion<C> {
    fn complete(&mut self, prompt: &str) -> Result<String, TransportError> {
        let out = self.inner.complete(prompt)?;
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(FixtureCompletion::path_for(&self.dir, prompt), &out)?;
        Ok(out)
    }
}

/// Canned responses in order; repeats the last one when exhausted.
pub struct ScriptedCompletion {
    responses: VecDeque<String>,
    last: Option<String>,
}

impl ScriptedCompletion {
    pub fn new(responses: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { responses: responses.into_iter().map(Into::into).collect(), last: None }
    }
}

impl CompletionPort for ScriptedCompletion {
    fn complete(&mut self, _prompt: &str) -> Result<String, TransportError> {
        if let Some(r) = self.responses.pop_front() {
            self.last = Some(r.clone());
            return Ok(r);
        }
        self.last.clone().ok_or_else(|| TransportError::BadResponse("no scripted responses".into()))
    }
}

const GRAMMAR: &str = "\
Reply with exactly one line in one of these forms:
POST <text>
SEARCH_WEB <query>
FETCH_TAGGED
SEARCH_POSTS <query>
TRENDING
LIKE <post_id>
DISLIKE <post_id>
REPLY <post_id> <text>
FOLLOW <agent_id>
UNFOLLOW <agent_id>";

const RETRY_NOTE: &str = "Your previous reply did not match the required format. Answer with one action line only.";

/// Deterministic prompt: backstory, recent memory, what the agent sees, and the grammar.
pub fn build_prompt(ctx: &DecisionContext<'_>) -> String {
    let mut p = String::new();
    let _ = writeln!(p, "You are {} ({}) on a social platform.", ctx.agent.display_name, ctx.agent.agent_id);
    if let Some(b) = ctx.memory.backstory() {
        let _ = writeln!(p, "<backstory>{b}</backstory>");
    }
    p.push_str("<memory>\n");
    let n = ctx.memory.len();
    for e in ctx.memory.entries().skip(n.saturating_sub(10)) {
        let _ = writeln!(p, "- {}", e.text);
    }
    p.push_str("</memory>\n<feed>\n");
    for post in ctx.obs.trending.iter().take(5) {
        let _ = writeln!(p, "trending {} by {}: {}", post.post_id, post.author_id, post.text);
    }
    for post in &ctx.obs.tagged {
        let _ = writeln!(p, "tagged {} by {}: {}", post.post_id, post.author_id, post.text);
    }
    for d in &ctx.obs.following {
        for post in &d.recent {
            let _ = writeln!(p, "following {} by {}: {}", post.post_id, d.agent_id, post.text);
        }
    }
    for d in &ctx.obs.suggestions {
        let _ = writeln!(p, "suggested agent {} ({})", d.agent_id, d.display_name);
    }
    p.push_str("</feed>\n");
    p.push_str(GRAMMAR);
    p
}

/// First non-empty line of the completion, parsed with the action grammar.
pub fn parse_completion(text: &str) -> Option<Action> {
    text.lines().map(str::trim).find(|l| !l.is_empty()).and_then(Action::parse_line)
}

/// Policy that asks a language model for each action.
pub struct LlmPolicy {
    client: Box<dyn CompletionPort>,
    retries: usize,
    fallbacks: u64,
}

impl LlmPolicy {
    pub const DEFAULT_RETRIES: usize = 2;

    pub fn new(client: Box<dyn CompletionPort>) -> Self {
        Self { client, retries: Self::DEFAULT_RETRIES, fallbacks: 0 }
    }

    pub fn with_retries(mut self, retries: usize) -> Self {
        self.retries = retries;
        self
    }
}

impl PolicyPort for LlmPolicy {
    fn decide(&mut self, ctx: &DecisionContext<'_>, _rng: &mut Rng) -> Result<Option<Action>, PolicyError> {
        let base = build_prompt(ctx);
        for attempt in 0..=self.retries {
            let prompt = if attempt == 0 { base.clone() } else { format!("{base}\n{RETRY_NOTE}") };
            let out = self.client.complete(&prompt)?;
            if let Some(action) = parse_completion(&out) {
                return Ok(Some(action));
            }
            log::debug!("unparseable completion for {}: {out:?}", ctx.agent.agent_id);
        }
        self.fallbacks += 1;
        Ok(None)
    }

    fn parse_fallbacks(&self) -> u64 {
        self.fallbacks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AgentRecord;
    use crate::sim::memory::Memory;
    use crate::sim::observation::Observation;

    fn ctx_parts() -> (AgentRecord, Memory, Observation) {
        let agent = AgentRecord { agent_id: "a1".into(), backstory: Some("likes cats".into()), created_at: 0, display_name: "Ann".into() };
        (agent, Memory::new(Some("likes cats".into()), 50), Observation::default())
    }

    #[test]
    fn parses_post() {
        let (agent, memory, obs) = ctx_parts();
        let ctx = DecisionContext { agent: &agent, memory: &memory, obs: &obs, tick: 0 };
        let mut p = LlmPolicy::new(Box::new(ScriptedCompletion::new(["POST hello"])));
        let a = p.decide(&ctx, &mut crate::util::rng(0)).unwrap();
        assert_eq!(a, Some(Action::Post { text: "hello".into() }));
        assert_eq!(p.parse_fallbacks(), 0);
    }

    #[test]
    fn garbage_falls_back_after_retries() {
        let (agent, memory, obs) = ctx_parts();
        let ctx = DecisionContext { agent: &agent, memory: &memory, obs: &obs, tick: 0 };
        let mut p = LlmPolicy::new(Box::new(ScriptedCompletion::new(["hmm", "I think", "let me see", "POST late"])));
        assert_eq!(p.decide(&ctx, &mut crate::util::rng(0)).unwrap(), None);
        assert_eq!(p.parse_fallbacks(), 1);
        // the fourth response is consumed by the next decision
        assert_eq!(p.decide(&ctx, &mut crate::util::rng(0)).unwrap(), Some(Action::Post { text: "late".into() }));
    }

    #[test]
    fn prompt_carries_backstory_and_grammar() {
        let (agent, memory, obs) = ctx_parts();
        let ctx = DecisionContext { agent: &agent, memory: &memory, obs: &obs, tick: 0 };
        let prompt = build_prompt(&ctx);
        assert!(prompt.contains("<backstory>likes cats</backstory>"));
        assert!(prompt.ends_with("UNFOLLOW <agent_id>"));
    }

    #[test]
    fn completion_text_shapes() {
        assert_eq!(completion_text(&json!({"completion": "POST a"})).as_deref(), Some("POST a"));
        assert_eq!(completion_text(&json!({"choices": [{"text": "TRENDING"}]})).as_deref(), Some("TRENDING"));
        assert_eq!(
            completion_text(&json!({"choices": [{"message": {"content": "FETCH_TAGGED"}}]})).as_deref(),
            Some("FETCH_TAGGED")
        );
        assert_eq!(completion_text(&json!({"other": 1})), None);
    }
}
