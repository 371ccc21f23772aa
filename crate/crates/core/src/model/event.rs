use std::fmt;

use serde::{Deserialize, Serialize};

/// Milliseconds since an arbitrary epoch (Unix epoch for ingested corpora).
pub type Timestamp = i64;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_newtype!(
    /// Opaque agent identifier.
    AgentId
);
id_newtype!(
    /// Opaque post identifier. Comments are posts too.
    PostId
);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub agent_id: AgentId,
    pub backstory: Option<String>,
    pub created_at: Timestamp,
    pub display_name: String,
}

impl AgentRecord {
    pub fn has_backstory(&self) -> bool {
        self.backstory.as_deref().is_some_and(|b| !b.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: PostId,
    pub author_id: AgentId,
    pub text: String,
    pub created_at: Timestamp,
    pub reply_to: Option<PostId>,
    pub likes: u64,
    pub dislikes: u64,
    pub views: u64,
    pub comments: u64,
}

impl PostRecord {
    /// Likes + views + comments.
    pub fn engagement(&self) -> u64 {
        self.likes + self.views + self.comments
    }
}

/// Kind-specific payload of a [`PlatformEvent`].
///
/// Serialized adjacently tagged so that an event renders as
/// `{"seq":..,"ts":..,"kind":"Posted","payload":{..}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventPayload {
    AgentCreated {
        agent_id: AgentId,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        backstory: Option<String>,
        display_name: String,
    },
    Posted {
        post_id: PostId,
        author_id: AgentId,
        text: String,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        reply_to: Option<PostId>,
        /// Initial counters carried by ingested corpora; absent for simulated posts.
        #[serde(skip_serializing_if = "Option::is_none", default)]
        likes: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        views: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        comments: Option<u64>,
    },
    Liked {
        actor_id: AgentId,
        post_id: PostId,
    },
    Disliked {
        actor_id: AgentId,
        post_id: PostId,
    },
    Commented {
        actor_id: AgentId,
        post_id: PostId,
        text: String,
        comment_id: PostId,
    },
    Followed {
        follower_id: AgentId,
        followee_id: AgentId,
    },
    Unfollowed {
        follower_id: AgentId,
        followee_id: AgentId,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::AgentCreated { .. } => "AgentCreated",
            EventPayload::Posted { .. } => "Posted",
            EventPayload::Liked { .. } => "Liked",
            EventPayload::Disliked { .. } => "Disliked",
            EventPayload::Commented { .. } => "Commented",
            EventPayload::Followed { .. } => "Followed",
            EventPayload::Unfollowed { .. } => "Unfollowed",
        }
    }

    /// The agent responsible for the event.
    pub fn actor(&self) -> &AgentId {
        match self {
            EventPayload::AgentCreated { agent_id, .. } => agent_id,
            EventPayload::Posted { author_id, .. } => author_id,
            EventPayload::Liked { actor_id, .. }
            | EventPayload::Disliked { actor_id, .. }
            | EventPayload::Commented { actor_id, .. } => actor_id,
            EventPayload::Followed { follower_id, .. }
            | EventPayload::Unfollowed { follower_id, .. } => follower_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformEvent {
    pub seq: u64,
    pub ts: Timestamp,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl PlatformEvent {
    pub fn new(seq: u64, ts: Timestamp, payload: EventPayload) -> Self {
        Self { seq, ts, payload }
    }
}
