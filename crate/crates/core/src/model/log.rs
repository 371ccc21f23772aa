use super::event::{EventPayload, PlatformEvent, Timestamp};
use super::snapshot::Snapshot;
use super::LogError;

/// Append-only, totally ordered event log.
///
/// The log keeps the fully materialized head state alongside the events so
/// that appends can be validated in O(log n).
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    events: Vec<PlatformEvent>,
    head: Snapshot,
}

impl EventLog {
    pub fn new() -> Self {
        Self { events: Vec::new(), head: Snapshot::empty() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[PlatformEvent] {
        &self.events
    }

    /// State after every event in the log.
    pub fn head(&self) -> &Snapshot {
        &self.head
    }

    pub fn last_timestamp(&self) -> Option<Timestamp> {
        self.events.last().map(|e| e.ts)
    }

    pub fn first_timestamp(&self) -> Option<Timestamp> {
        self.events.first().map(|e| e.ts)
    }

    /// Append a fully specified event.
    ///
    /// `(ts, seq)` must be strictly greater than the last event's pair, with
    /// `ts` never regressing.
    pub fn append(&mut self, event: PlatformEvent) -> Result<(), LogError> {
        if let Some(last) = self.events.last() {
            if event.ts < last.ts || event.seq <= last.seq {
                return Err(LogError::OutOfOrder {
                    seq: event.seq,
                    ts: event.ts,
                    last_seq: last.seq,
                    last_ts: last.ts,
                });
            }
        }
        self.head.check(&event)?;
        self.head.apply_unchecked(&event);
        self.events.push(event);
        Ok(())
    }

    /// Append with the next sequence number.
    pub fn record(&mut self, ts: Timestamp, payload: EventPayload) -> Result<&PlatformEvent, LogError> {
        let seq = self.events.last().map_or(0, |e| e.seq + 1);
        self.append(PlatformEvent::new(seq, ts, payload))?;
        Ok(self.events.last().expect("just pushed"))
    }

    /// State containing exactly the effects of events with `ts <= t`.
    pub fn snapshot_at(&self, t: Timestamp) -> Snapshot {
        let mut snap = Snapshot::empty();
        for e in self.events.iter().take_while(|e| e.ts <= t) {
            snap.apply_unchecked(e);
        }
        snap.at = t;
        snap
    }

    /// A new log holding the events with `ts <= t`.
    pub fn truncated(&self, t: Timestamp) -> EventLog {
        let mut out = EventLog::new();
        for e in self.events.iter().take_while(|e| e.ts <= t) {
            out.head.apply_unchecked(e);
            out.events.push(e.clone());
        }
        out
    }
}
