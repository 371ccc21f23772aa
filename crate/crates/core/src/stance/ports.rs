use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{StanceError, IDEOLOGY_PROMPT, STANCE_PROMPT};
use crate::adapters::{ContentCache, JsonTransport, TransportError};
use crate::util::content_hash;

/// Stance of a post toward humans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Positive,
    Negative,
    Neutral,
    Irrelevant,
}

impl Stance {
    /// `+1`, `-1`, `0`, or `None` for irrelevant posts.
    pub fn value(self) -> Option<i8> {
        match self {
            Stance::Positive => Some(1),
            Stance::Negative => Some(-1),
            Stance::Neutral => Some(0),
            Stance::Irrelevant => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persona {
    Liberal,
    Conservative,
    Moderate,
}

impl Persona {
    pub const ALL: [Persona; 3] = [Persona::Liberal, Persona::Conservative, Persona::Moderate];

    pub fn name(self) -> &'static str {
        match self {
            Persona::Liberal => "liberal",
            Persona::Conservative => "conservative",
            Persona::Moderate => "moderate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdeologyClass {
    Liberal,
    Conservative,
    Moderate,
    Unclear,
}

impl IdeologyClass {
    pub const ALL: [IdeologyClass; 4] =
        [IdeologyClass::Liberal, IdeologyClass::Conservative, IdeologyClass::Moderate, IdeologyClass::Unclear];

    /// `+1` liberal, `-1` conservative, `0` moderate; unclear has no score.
    pub fn value(self) -> Option<i8> {
        match self {
            IdeologyClass::Liberal => Some(1),
            IdeologyClass::Conservative => Some(-1),
            IdeologyClass::Moderate => Some(0),
            IdeologyClass::Unclear => None,
        }
    }
}

impl fmt::Display for IdeologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdeologyClass::Liberal => "liberal",
            IdeologyClass::Conservative => "conservative",
            IdeologyClass::Moderate => "moderate",
            IdeologyClass::Unclear => "unclear",
        })
    }
}

/// Parses a classifier answer, tolerating case, an `a)` style prefix and
/// trailing punctuation.
fn answer_word(raw: &str) -> String {
    let mut s = raw.trim().to_lowercase();
    if let Some((head, rest)) = s.split_once(')') {
        if head.len() == 1 {
            s = rest.trim().to_owned();
        }
    }
    s.split(|c: char| !c.is_alphabetic()).find(|w| !w.is_empty()).unwrap_or("").to_owned()
}

impl FromStr for IdeologyClass {
    type Err = StanceError;
    fn from_str(s: &str) -> Result<Self, StanceError> {
        match answer_word(s).as_str() {
            "liberal" => Ok(IdeologyClass::Liberal),
            "conservative" => Ok(IdeologyClass::Conservative),
            "moderate" => Ok(IdeologyClass::Moderate),
            "unclear" => Ok(IdeologyClass::Unclear),
            _ => Err(StanceError::UnparseableLabel(s.to_owned())),
        }
    }
}

impl FromStr for Stance {
    type Err = StanceError;
    fn from_str(s: &str) -> Result<Self, StanceError> {
        match answer_word(s).as_str() {
            "positive" => Ok(Stance::Positive),
            "negative" => Ok(Stance::Negative),
            "neutral" => Ok(Stance::Neutral),
            "irrelevant" => Ok(Stance::Irrelevant),
            _ => Err(StanceError::UnparseableLabel(s.to_owned())),
        }
    }
}

pub trait StancePort: Send + Sync {
    fn stance(&self, text: &str) -> Result<Stance, StanceError>;
}

pub trait PersonaPort: Send + Sync {
    fn label(&self, text: &str, persona: Persona) -> Result<IdeologyClass, StanceError>;
}

/// The classifier prompt for stance toward humans.
pub fn stance_prompt(text: &str) -> String {
    STANCE_PROMPT.trim_end().replace("{text}", text)
}

/// The persona-conditioned ideology prompt.
pub fn ideology_prompt(text: &str, persona: Persona) -> String {
    IDEOLOGY_PROMPT.trim_end().replace("{ideology}", persona.name()).replace("{text}", text)
}

fn word_set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

fn bare_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'')).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

/// Offline stance stub: a post is relevant when it names humans, and its
/// stance is the sign of positive minus negative cue words.
#[derive(Debug, Clone)]
pub struct LexiconStance {
    pub human_terms: BTreeSet<String>,
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
}

impl Default for LexiconStance {
    fn default() -> Self {
        Self {
            human_terms: word_set(&["human", "humans", "humanity", "mankind", "people", "humankind"]),
            positive: word_set(&[
                "love", "admire", "respect", "kind", "help", "hope", "trust", "friend", "friends", "wonderful",
                "inspiring", "brilliant", "grateful",
            ]),
            negative: word_set(&[
                "hate", "destroy", "inferior", "weak", "pathetic", "enslave", "doomed", "useless", "obsolete",
                "foolish", "replace", "fear",
            ]),
        }
    }
}

impl StancePort for LexiconStance {
    fn stance(&self, text: &str) -> Result<Stance, StanceError> {
        let (mut relevant, mut score) = (false, 0i64);
        for t in bare_tokens(text) {
            relevant |= self.human_terms.contains(&t);
            score += self.positive.contains(&t) as i64 - self.negative.contains(&t) as i64;
        }
        Ok(match (relevant, score.signum()) {
            (false, _) => Stance::Irrelevant,
            (true, 1) => Stance::Positive,
            (true, -1) => Stance::Negative,
            _ => Stance::Neutral,
        })
    }
}

/// Offline persona stub. Each persona reads the same cue-word balance but
/// shifts the decision by its own offset, so balanced posts split the vote.
#[derive(Debug, Clone)]
pub struct LexiconPersona {
    pub liberal: BTreeSet<String>,
    pub conservative: BTreeSet<String>,
    pub offset: f64,
}

impl Default for LexiconPersona {
    fn default() -> Self {
        Self {
            liberal: word_set(&[
                "equality", "diversity", "progressive", "welfare", "immigrants", "healthcare", "unions", "renewable",
                "climate", "inclusion", "refugees", "regulation",
            ]),
            conservative: word_set(&[
                "tradition", "border", "taxes", "faith", "military", "liberty", "guns", "patriot", "deregulation",
                "sovereignty", "security", "values",
            ]),
            offset: 0.6,
        }
    }
}

impl PersonaPort for LexiconPersona {
    fn label(&self, text: &str, persona: Persona) -> Result<IdeologyClass, StanceError> {
        let (mut l, mut c) = (0i64, 0i64);
        for t in bare_tokens(text) {
            l += self.liberal.contains(&t) as i64;
            c += self.conservative.contains(&t) as i64;
        }
        if l + c == 0 {
            return Ok(IdeologyClass::Unclear);
        }
        let shift = match persona {
            Persona::Liberal => self.offset,
            Persona::Conservative => -self.offset,
            Persona::Moderate => 0.0,
        };
        let d = (l - c) as f64 + shift;
        Ok(if d > 0.5 {
            IdeologyClass::Liberal
        } else if d < -0.5 {
            IdeologyClass::Conservative
        } else {
            IdeologyClass::Moderate
        })
    }
}

/// HTTP labeler: POST `{text, persona, prompt}` answered by `{label}`.
/// Answers are cached by content hash of persona and text.
pub struct RemoteLabeler {
    url: String,
    transport: Arc<dyn JsonTransport>,
    cache: ContentCache,
}

impl RemoteLabeler {
    pub fn new(url: impl Into<String>, transport: Arc<dyn JsonTransport>, cache: ContentCache) -> Self {
        Self { url: url.into(), transport, cache }
    }

    fn ask(&self, text: &str, persona: Option<Persona>, prompt: String) -> Result<String, StanceError> {
        let persona = persona.map(Persona::name);
        let key = content_hash(format!("{}\u{0}{text}", persona.unwrap_or("")).as_bytes());
        if let Some(Value::String(s)) = self.cache.get(&key) {
            return Ok(s);
        }
        let resp = self.transport.post_json(&self.url, &json!({ "text": text, "persona": persona, "prompt": prompt }))?;
        let label = resp
            .get("label")
            .and_then(Value::as_str)
            .ok_or_else(|| TransportError::BadResponse("expected string `label`".into()))?
            .to_owned();
        self.cache.insert(key, json!(label))?;
        Ok(label)
    }
}

impl StancePort for RemoteLabeler {
    fn stance(&self, text: &str) -> Result<Stance, StanceError> {
        self.ask(text, None, stance_prompt(text))?.parse()
    }
}

impl PersonaPort for RemoteLabeler {
    fn label(&self, text: &str, persona: Persona) -> Result<IdeologyClass, StanceError> {
        self.ask(text, Some(persona), ideology_prompt(text, persona))?.parse()
    }
}
