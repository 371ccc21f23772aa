//! Domain types, the append-only event log, snapshots and corpus I/O.

mod event;
pub mod jsonl;
mod lexical;
mod log;
mod snapshot;

use thiserror::Error;

pub use event::{AgentId, AgentRecord, EventPayload, PlatformEvent, PostId, PostRecord, Timestamp};
pub use jsonl::{export_jsonl, export_string, ingest_jsonl, ingest_reader, IngestError, Strictness};
pub use lexical::{hashtags, is_emoji, lexical_features, mentions, FeatureRecord};
pub use log::EventLog;
pub use snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("event seq {seq} at ts {ts} does not follow seq {last_seq} at ts {last_ts}")]
    OutOfOrder { seq: u64, ts: Timestamp, last_seq: u64, last_ts: Timestamp },
    #[error("event seq {seq} references unknown {what} `{id}`")]
    DanglingReference { seq: u64, what: &'static str, id: String },
    #[error("event seq {seq}: {follower} does not follow {followee}")]
    InvalidUnfollow { seq: u64, follower: String, followee: String },
    #[error("event seq {seq}: {follower} already follows {followee}")]
    DuplicateFollow { seq: u64, follower: String, followee: String },
    #[error("event seq {seq}: agent {id} cannot follow itself")]
    SelfFollow { seq: u64, id: String },
    #[error("event seq {seq}: id `{id}` already exists")]
    DuplicateId { seq: u64, id: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn created(id: &str) -> EventPayload {
        EventPayload::AgentCreated { agent_id: id.into(), backstory: None, display_name: id.into() }
    }

    fn follow(a: &str, b: &str) -> EventPayload {
        EventPayload::Followed { follower_id: a.into(), followee_id: b.into() }
    }

    fn unfollow(a: &str, b: &str) -> EventPayload {
        EventPayload::Unfollowed { follower_id: a.into(), followee_id: b.into() }
    }

    fn two_agents() -> EventLog {
        let mut log = EventLog::new();
        log.record(0, created("a1")).unwrap();
        log.record(0, created("a2")).unwrap();
        log
    }

    #[test]
    fn first_event_is_accepted() {
        let mut log = EventLog::new();
        log.record(0, created("a1")).unwrap();
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn follow_then_unfollow() {
        let mut log = two_agents();
        log.record(5, follow("a1", "a2")).unwrap();
        log.record(9, unfollow("a1", "a2")).unwrap();
        assert!(log.snapshot_at(10).follows.is_empty());
        assert_eq!(log.snapshot_at(6).follows.len(), 1);
    }

    #[test]
    fn unfollow_without_edge() {
        let mut log = two_agents();
        let err = log.record(3, unfollow("a1", "a2")).unwrap_err();
        assert!(matches!(err, LogError::InvalidUnfollow { .. }));
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn timestamp_regression_rejected() {
        let mut log = two_agents();
        log.record(10, follow("a1", "a2")).unwrap();
        let err = log.record(9, follow("a2", "a1")).unwrap_err();
        assert!(matches!(err, LogError::OutOfOrder { .. }));
        let err = log.append(PlatformEvent::new(2, 11, follow("a2", "a1"))).unwrap_err();
        assert!(matches!(err, LogError::OutOfOrder { .. }), "seq must increase");
    }

    #[test]
    fn dangling_references_rejected() {
        let mut log = two_agents();
        let err = log.record(1, follow("a1", "zz")).unwrap_err();
        assert!(matches!(err, LogError::DanglingReference { what: "agent", .. }));
        let err = log
            .record(1, EventPayload::Liked { actor_id: "a1".into(), post_id: "p9".into() })
            .unwrap_err();
        assert!(matches!(err, LogError::DanglingReference { what: "post", .. }));
        let err = log
            .record(
                1,
                EventPayload::Posted {
                    post_id: "p1".into(),
                    author_id: "a1".into(),
                    text: "x".into(),
                    reply_to: Some("nope".into()),
                    likes: None,
                    views: None,
                    comments: None,
                },
            )
            .unwrap_err();
        assert!(matches!(err, LogError::DanglingReference { .. }));
    }

    #[test]
    fn self_and_duplicate_follow_rejected() {
        let mut log = two_agents();
        assert!(matches!(log.record(1, follow("a1", "a1")), Err(LogError::SelfFollow { .. })));
        log.record(1, follow("a1", "a2")).unwrap();
        assert!(matches!(log.record(2, follow("a1", "a2")), Err(LogError::DuplicateFollow { .. })));
        assert!(matches!(log.record(2, created("a1")), Err(LogError::DuplicateId { .. })));
    }

    #[test]
    fn snapshot_excludes_later_events() {
        let mut log = two_agents();
        log.record(3, follow("a1", "a2")).unwrap();
        assert!(log.snapshot_at(2).follows.is_empty());
    }

    #[test]
    fn refollow_resets_creation_time() {
        let mut log = two_agents();
        log.record(3, follow("a1", "a2")).unwrap();
        log.record(7, unfollow("a1", "a2")).unwrap();
        log.record(9, follow("a1", "a2")).unwrap();
        assert!(log.snapshot_at(8).follows.is_empty());
        let snap = log.snapshot_at(9);
        assert_eq!(snap.follows.get(&("a1".into(), "a2".into())), Some(&9));
    }

    #[test]
    fn comments_become_posts_and_bump_counters() {
        let mut log = two_agents();
        log.record(
            1,
            EventPayload::Posted {
                post_id: "p1".into(),
                author_id: "a1".into(),
                text: "hello".into(),
                reply_to: None,
                likes: None,
                views: Some(4),
                comments: None,
            },
        )
        .unwrap();
        log.record(2, EventPayload::Liked { actor_id: "a2".into(), post_id: "p1".into() }).unwrap();
        log.record(
            3,
            EventPayload::Commented {
                actor_id: "a2".into(),
                post_id: "p1".into(),
                text: "hi back".into(),
                comment_id: "c1".into(),
            },
        )
        .unwrap();
        let snap = log.head();
        let p1 = snap.post(&PostId::from("p1")).unwrap();
        assert_eq!((p1.likes, p1.views, p1.comments), (1, 4, 1));
        assert_eq!(p1.engagement(), 6);
        let c1 = snap.post(&PostId::from("c1")).unwrap();
        assert_eq!(c1.reply_to, Some(PostId::from("p1")));
        assert_eq!(snap.post_count_by(&"a2".into()), 1);
    }
}
