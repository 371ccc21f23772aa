use std::collections::BTreeMap;

use super::event::{AgentId, AgentRecord, EventPayload, PlatformEvent, PostId, PostRecord, Timestamp};
use super::LogError;

/// Materialized platform state at a point in time.
///
/// Built by replaying an [`EventLog`](super::EventLog) prefix; immutable once
/// handed out, so it can be shared freely between threads.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub at: Timestamp,
    pub agents: BTreeMap<AgentId, AgentRecord>,
    /// Live follow edges `(follower, followee)` with the creation time of the
    /// current spell.
    pub follows: BTreeMap<(AgentId, AgentId), Timestamp>,
    /// Posts and comments in creation order.
    posts: Vec<PostRecord>,
    post_index: BTreeMap<PostId, usize>,
    posts_by_author: BTreeMap<AgentId, Vec<usize>>,
    /// `(followee, follower)` mirror of `follows`.
    followed_by: BTreeMap<(AgentId, AgentId), Timestamp>,
}

impl Snapshot {
    pub fn empty() -> Self {
        Self { at: Timestamp::MIN, ..Default::default() }
    }

    /// Posts in creation order.
    pub fn posts_in_order(&self) -> impl DoubleEndedIterator<Item = &PostRecord> + ExactSizeIterator + '_ {
        self.posts.iter()
    }

    pub fn post(&self, id: &PostId) -> Option<&PostRecord> {
        self.post_index.get(id).map(|&i| &self.posts[i])
    }

    pub fn contains_post(&self, id: &PostId) -> bool {
        self.post_index.contains_key(id)
    }

    pub fn post_count(&self) -> usize {
        self.posts.len()
    }

    fn post_mut(&mut self, id: &PostId) -> Option<&mut PostRecord> {
        self.post_index.get(id).map(|&i| &mut self.posts[i])
    }

    /// Posts authored by `agent`, oldest first.
    pub fn posts_by(&self, agent: &AgentId) -> impl DoubleEndedIterator<Item = &PostRecord> + '_ {
        self.posts_by_author
            .get(agent)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.posts[i])
    }

    pub fn post_count_by(&self, agent: &AgentId) -> usize {
        self.posts_by_author.get(agent).map_or(0, Vec::len)
    }

    pub fn is_following(&self, follower: &AgentId, followee: &AgentId) -> bool {
        self.follows.contains_key(&(follower.clone(), followee.clone()))
    }

    /// Agents followed by `agent`.
    pub fn following<'a>(&'a self, agent: &'a AgentId) -> impl Iterator<Item = &'a AgentId> + 'a {
        self.follows
            .range((agent.clone(), AgentId::new(""))..)
            .take_while(move |((f, _), _)| f == agent)
            .map(|((_, t), _)| t)
    }

    /// Agents following `agent`.
    pub fn followers<'a>(&'a self, agent: &'a AgentId) -> impl Iterator<Item = &'a AgentId> + 'a {
        self.followed_by
            .range((agent.clone(), AgentId::new(""))..)
            .take_while(move |((t, _), _)| t == agent)
            .map(|((_, f), _)| f)
    }

    /// Posts created at or after `since`, newest first.
    pub fn recent_posts(&self, since: Timestamp) -> impl Iterator<Item = &PostRecord> + '_ {
        self.posts_in_order().rev().take_while(move |p| p.created_at >= since)
    }

    /// Validate `event` against the current state without applying it.
    pub fn check(&self, event: &PlatformEvent) -> Result<(), LogError> {
        let agent = |id: &AgentId| {
            if self.agents.contains_key(id) {
                Ok(())
            } else {
                Err(LogError::DanglingReference { seq: event.seq, what: "agent", id: id.to_string() })
            }
        };
        let post = |id: &PostId| {
            if self.contains_post(id) {
                Ok(())
            } else {
                Err(LogError::DanglingReference { seq: event.seq, what: "post", id: id.to_string() })
            }
        };
        let fresh_post = |id: &PostId| {
            if self.contains_post(id) {
                Err(LogError::DuplicateId { seq: event.seq, id: id.to_string() })
            } else {
                Ok(())
            }
        };
        match &event.payload {
            EventPayload::AgentCreated { agent_id, .. } => {
                if self.agents.contains_key(agent_id) {
                    return Err(LogError::DuplicateId { seq: event.seq, id: agent_id.to_string() });
                }
            }
            EventPayload::Posted { post_id, author_id, reply_to, .. } => {
                agent(author_id)?;
                fresh_post(post_id)?;
                if let Some(parent) = reply_to {
                    post(parent)?;
                }
            }
            EventPayload::Liked { actor_id, post_id } | EventPayload::Disliked { actor_id, post_id } => {
                agent(actor_id)?;
                post(post_id)?;
            }
            EventPayload::Commented { actor_id, post_id, comment_id, .. } => {
                agent(actor_id)?;
                post(post_id)?;
                fresh_post(comment_id)?;
            }
            EventPayload::Followed { follower_id, followee_id } => {
                agent(follower_id)?;
                agent(followee_id)?;
                if follower_id == followee_id {
                    return Err(LogError::SelfFollow { seq: event.seq, id: follower_id.to_string() });
                }
                if self.is_following(follower_id, followee_id) {
                    return Err(LogError::DuplicateFollow {
                        seq: event.seq,
                        follower: follower_id.to_string(),
                        followee: followee_id.to_string(),
                    });
                }
            }
            EventPayload::Unfollowed { follower_id, followee_id } => {
                agent(follower_id)?;
                agent(followee_id)?;
                if follower_id == followee_id {
                    return Err(LogError::SelfFollow { seq: event.seq, id: follower_id.to_string() });
                }
                if !self.is_following(follower_id, followee_id) {
                    return Err(LogError::InvalidUnfollow {
                        seq: event.seq,
                        follower: follower_id.to_string(),
                        followee: followee_id.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Apply an already validated event.
    pub(crate) fn apply_unchecked(&mut self, event: &PlatformEvent) {
        let ts = event.ts;
        self.at = self.at.max(ts);
        match &event.payload {
            EventPayload::AgentCreated { agent_id, backstory, display_name } => {
                self.agents.insert(
                    agent_id.clone(),
                    AgentRecord {
                        agent_id: agent_id.clone(),
                        backstory: backstory.clone(),
                        created_at: ts,
                        display_name: display_name.clone(),
                    },
                );
            }
            EventPayload::Posted { post_id, author_id, text, reply_to, likes, views, comments } => {
                self.insert_post(PostRecord {
                    post_id: post_id.clone(),
                    author_id: author_id.clone(),
                    text: text.clone(),
                    created_at: ts,
                    reply_to: reply_to.clone(),
                    likes: likes.unwrap_or(0),
                    dislikes: 0,
                    views: views.unwrap_or(0),
                    comments: comments.unwrap_or(0),
                });
                if let Some(parent) = reply_to {
                    if let Some(p) = self.post_mut(parent) {
                        p.comments += 1;
                    }
                }
            }
            EventPayload::Liked { post_id, .. } => {
                if let Some(p) = self.post_mut(post_id) {
                    p.likes += 1;
                }
            }
            EventPayload::Disliked { post_id, .. } => {
                if let Some(p) = self.post_mut(post_id) {
                    p.dislikes += 1;
                }
            }
            EventPayload::Commented { actor_id, post_id, text, comment_id } => {
                if let Some(p) = self.post_mut(post_id) {
                    p.comments += 1;
                }
                self.insert_post(PostRecord {
                    post_id: comment_id.clone(),
                    author_id: actor_id.clone(),
                    text: text.clone(),
                    created_at: ts,
                    reply_to: Some(post_id.clone()),
                    likes: 0,
                    dislikes: 0,
                    views: 0,
                    comments: 0,
                });
            }
            EventPayload::Followed { follower_id, followee_id } => {
                self.follows.insert((follower_id.clone(), followee_id.clone()), ts);
                self.followed_by.insert((followee_id.clone(), follower_id.clone()), ts);
            }
            EventPayload::Unfollowed { follower_id, followee_id } => {
                self.follows.remove(&(follower_id.clone(), followee_id.clone()));
                self.followed_by.remove(&(followee_id.clone(), follower_id.clone()));
            }
        }
    }

    fn insert_post(&mut self, post: PostRecord) {
        let i = self.posts.len();
        self.posts_by_author.entry(post.author_id.clone()).or_default().push(i);
        self.post_index.insert(post.post_id.clone(), i);
        self.posts.push(post);
    }
}
