use thiserror::Error;

use super::action::Action;
use super::memory::Memory;
use super::observation::Observation;
use crate::adapters::TransportError;
use crate::model::{AgentId, AgentRecord};
use crate::util::Rng;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("invalid policy parameters: {0}")]
    InvalidParams(String),
}

/// Inputs to one decision.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub agent: &'a AgentRecord,
    pub memory: &'a Memory,
    pub obs: &'a Observation,
    pub tick: u64,
}

/// Chooses an agent's next action. `Ok(None)` is a deliberate no-op.
///
/// Implementations must be deterministic given the context and the random
/// stream (remote adapters replayed from fixtures included).
pub trait PolicyPort: Send {
    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut Rng) -> Result<Option<Action>, PolicyError>;

    /// Words to fill a generated backstory for `agent`.
    fn backstory_words(&self, _agent: &AgentId, _n: usize, _rng: &mut Rng) -> Vec<String> {
        Vec::new()
    }

    /// Completions that could not be parsed after all retries.
    fn parse_fallbacks(&self) -> u64 {
        0
    }
}

/// Policy backed by a closure; mostly for tests and fixed scripts.
pub struct FnPolicy<F>(pub F);

impl<F> PolicyPort for FnPolicy<F>
where
    F: FnMut(&DecisionContext<'_>, &mut Rng) -> Option<Action> + Send,
{
    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut Rng) -> Result<Option<Action>, PolicyError> {
        Ok((self.0)(ctx, rng))
    }
}
