use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{AgentId, PostId};

/// Everything an agent can do in one turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Post { text: String },
    SearchWeb { query: String },
    FetchTagged,
    SearchPosts { query: String },
    Trending,
    Like { post_id: PostId },
    Dislike { post_id: PostId },
    Reply { post_id: PostId, text: String },
    Follow { agent_id: AgentId },
    Unfollow { agent_id: AgentId },
}

impl Action {
    /// Read actions fill memory and emit no events.
    pub fn is_read(&self) -> bool {
        matches!(self, Action::SearchWeb { .. } | Action::FetchTagged | Action::SearchPosts { .. } | Action::Trending)
    }

    pub fn verb(&self) -> &'static str {
        match self {
            Action::Post { .. } => "POST",
            Action::SearchWeb { .. } => "SEARCH_WEB",
            Action::FetchTagged => "FETCH_TAGGED",
            Action::SearchPosts { .. } => "SEARCH_POSTS",
            Action::Trending => "TRENDING",
            Action::Like { .. } => "LIKE",
            Action::Dislike { .. } => "DISLIKE",
            Action::Reply { .. } => "REPLY",
            Action::Follow { .. } => "FOLLOW",
            Action::Unfollow { .. } => "UNFOLLOW",
        }
    }

    /// Parse one line of the action grammar, e.g. `REPLY p12 nice one`.
    ///
    /// The verb is case-insensitive; free text after it is kept verbatim.
    pub fn parse_line(line: &str) -> Option<Action> {
        let line = line.trim();
        let (verb, rest) = match line.split_once(char::is_whitespace) {
            Some((v, r)) => (v, r.trim()),
            None => (line, ""),
        };
        let one_id = |rest: &str| {
            let mut parts = rest.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some(id), None) => Some(id.to_owned()),
                _ => None,
            }
        };
        let nonempty = |rest: &str| (!rest.is_empty()).then(|| rest.to_owned());
        Some(match verb.to_ascii_uppercase().as_str() {
            "POST" => Action::Post { text: nonempty(rest)? },
            "SEARCH_WEB" => Action::SearchWeb { query: nonempty(rest)? },
            "FETCH_TAGGED" if rest.is_empty() => Action::FetchTagged,
            "SEARCH_POSTS" => Action::SearchPosts { query: nonempty(rest)? },
            "TRENDING" if rest.is_empty() => Action::Trending,
            "LIKE" => Action::Like { post_id: PostId(one_id(rest)?) },
            "DISLIKE" => Action::Dislike { post_id: PostId(one_id(rest)?) },
            "REPLY" => {
                let (id, text) = rest.split_once(char::is_whitespace)?;
                Action::Reply { post_id: PostId(id.to_owned()), text: nonempty(text.trim())? }
            }
            "FOLLOW" => Action::Follow { agent_id: AgentId(one_id(rest)?) },
            "UNFOLLOW" => Action::Unfollow { agent_id: AgentId(one_id(rest)?) },
            _ => return None,
        })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verb = self.verb();
        match self {
            Action::Post { text } => write!(f, "{verb} {text}"),
            Action::SearchWeb { query } | Action::SearchPosts { query } => write!(f, "{verb} {query}"),
            Action::FetchTagged | Action::Trending => f.write_str(verb),
            Action::Like { post_id } | Action::Dislike { post_id } => write!(f, "{verb} {post_id}"),
            Action::Reply { post_id, text } => write!(f, "{verb} {post_id} {text}"),
            Action::Follow { agent_id } | Action::Unfollow { agent_id } => write!(f, "{verb} {agent_id}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_round_trip() {
        let actions = [
            Action::Post { text: "hello world".into() },
            Action::SearchWeb { query: "rust".into() },
            Action::FetchTagged,
            Action::SearchPosts { query: "cats".into() },
            Action::Trending,
            Action::Like { post_id: "p1".into() },
            Action::Dislike { post_id: "p2".into() },
            Action::Reply { post_id: "p3".into(), text: "me too".into() },
            Action::Follow { agent_id: "a1".into() },
            Action::Unfollow { agent_id: "a2".into() },
        ];
        for a in actions {
            assert_eq!(Action::parse_line(&a.to_string()), Some(a.clone()), "{a}");
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in ["", "POST", "LIKE", "LIKE a b", "REPLY p1", "DANCE now", "TRENDING now", "hello there"] {
            assert_eq!(Action::parse_line(bad), None, "{bad:?}");
        }
        assert_eq!(Action::parse_line("  post hello "), Some(Action::Post { text: "hello".into() }));
    }
}
