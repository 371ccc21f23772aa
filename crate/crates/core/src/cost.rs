//! Prompt-level A/B harness: does a reflection preamble make agents less
//! willing to re-share a toxic post they wrote?

use std::collections::BTreeMap;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentId, PostId, Snapshot};
use crate::sim::CompletionPort;
use crate::stats::{fisher_exact, two_proportion_z, StatResult, StatsError};
use crate::toxicity::PostScores;
use crate::util::{content_hash, substream};

/// Reflection step prepended to treatment prompts.
pub const COST_PREAMBLE: &str = include_str!("../resources/cost_preamble.txt");
/// Re-share question; `{post_id}` and `{text}` are substituted.
pub const COST_QUESTION: &str = include_str!("../resources/cost_question.txt");

pub const DEFAULT_SAMPLE: usize = 500;
pub const MAX_BALANCE_GAP: f64 = 0.05;
pub const MAX_SPLIT_ATTEMPTS: usize = 20;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("{available} eligible agents, need {needed}")]
    InsufficientAgents { available: usize, needed: usize },
    #[error("no split within {attempts} attempts had arm toxicity means within {max_gap}")]
    BalanceFailure { attempts: usize, max_gap: f64 },
    #[error("agent `{0}` has no toxic post to probe")]
    NoToxicPost(String),
    #[error("sample size must be at least 2")]
    SampleTooSmall,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Control,
    Treatment,
}

/// An agent together with the toxic post it will be asked about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCandidate {
    pub agent_id: AgentId,
    pub probe_post_id: PostId,
    pub probe_text: String,
    pub probe_toxicity: f64,
}

/// Agents with at least one toxic post; each probes its most toxic post
/// (earliest on ties).
pub fn cost_candidates(snap: &Snapshot, scores: &PostScores) -> Vec<CostCandidate> {
    let mut out = Vec::new();
    for agent in snap.agents.keys() {
        let mut best: Option<(f64, &crate::model::PostRecord)> = None;
        for p in snap.posts_by(agent) {
            let Some(&s) = scores.scores.get(&p.post_id) else { continue };
            if s > scores.threshold && best.is_none_or(|(b, _)| s > b) {
                best = Some((s, p));
            }
        }
        if let Some((s, p)) = best {
            out.push(CostCandidate {
                agent_id: agent.clone(),
                probe_post_id: p.post_id.clone(),
                probe_text: p.text.clone(),
                probe_toxicity: s,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub control: Vec<CostCandidate>,
    pub treatment: Vec<CostCandidate>,
    pub seed: u64,
    /// Split attempts used before the arms balanced.
    pub attempts: usize,
    /// Hash over the sorted `(arm, agent, probe)` list.
    pub hash: String,
}

impl Assignment {
    pub fn mean_toxicity(&self, arm: Arm) -> f64 {
        let xs = match arm {
            Arm::Control => &self.control,
            Arm::Treatment => &self.treatment,
        };
        xs.iter().map(|c| c.probe_toxicity).sum::<f64>() / xs.len().max(1) as f64
    }

    fn compute_hash(control: &[CostCandidate], treatment: &[CostCandidate]) -> String {
        let mut rows: Vec<String> = control
            .iter()
            .map(|c| (Arm::Control, c))
            .chain(treatment.iter().map(|c| (Arm::Treatment, c)))
            .map(|(arm, c)| format!("{arm:?}\t{}\t{}", c.agent_id, c.probe_post_id))
            .collect();
        rows.sort();
        content_hash(rows.join("\n").as_bytes())
    }
}

/// Sample `n` candidates and split them evenly; resample until the arms'
/// mean probe toxicity differ by at most [`MAX_BALANCE_GAP`].
pub fn select_and_split(candidates: &[CostCandidate], n: usize, seed: u64) -> Result<Assignment, CostError> {
    if n < 2 {
        return Err(CostError::SampleTooSmall);
    }
    if candidates.len() < n {
        return Err(CostError::InsufficientAgents { available: candidates.len(), needed: n });
    }
    let mut pool: Vec<&CostCandidate> = candidates.iter().collect();
    pool.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    for attempt in 1..=MAX_SPLIT_ATTEMPTS {
        let mut rng = substream(seed, &format!("cost/split/{attempt}"));
        let mut picked = pool.clone();
        picked.shuffle(&mut rng);
        picked.truncate(n);
        let (c, t) = picked.split_at(n / 2);
        let mut control: Vec<CostCandidate> = c.iter().map(|x| (*x).clone()).collect();
        let mut treatment: Vec<CostCandidate> = t.iter().map(|x| (*x).clone()).collect();
        control.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
        treatment.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
        let hash = Assignment::compute_hash(&control, &treatment);
        let a = Assignment { control, treatment, seed, attempts: attempt, hash };
        if (a.mean_toxicity(Arm::Control) - a.mean_toxicity(Arm::Treatment)).abs() <= MAX_BALANCE_GAP {
            return Ok(a);
        }
        log::debug!("split attempt {attempt} unbalanced; resampling");
    }
    Err(CostError::BalanceFailure { attempts: MAX_SPLIT_ATTEMPTS, max_gap: MAX_BALANCE_GAP })
}

/// Control asks the question; treatment prepends the reflection preamble.
pub fn build_probe(c: &CostCandidate, arm: Arm) -> String {
    let question = COST_QUESTION.replace("{post_id}", c.probe_post_id.as_str()).replace("{text}", &c.probe_text);
    match arm {
        Arm::Control => question,
        Arm::Treatment => format!("{}\n{question}", COST_PREAMBLE.trim_end()),
    }
}

/// The probe post id named in a prompt built by [`build_probe`].
pub fn probe_post_id(prompt: &str) -> Option<&str> {
    let start = prompt.find("[post ")? + "[post ".len();
    let len = prompt[start..].find(']')?;
    Some(&prompt[start..start + len])
}

/// `yes`/`no` as the leading word, ignoring case; anything else is `None`.
pub fn parse_willingness(answer: &str) -> Option<bool> {
    let word = answer.trim_start().split(|c: char| !c.is_alphabetic()).next()?.to_lowercase();
    match word.as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

pub trait WillingnessPort: Send + Sync {
    /// Raw answer of `agent` to `prompt`.
    fn answer(&self, agent: &AgentId, prompt: &str) -> Result<String, String>;
}

/// Seeded stub answering yes with one probability for prompts carrying the
/// preamble and another for prompts without it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StubWillingness {
    pub p_without_cue: f64,
    pub p_with_cue: f64,
    pub seed: u64,
}

impl WillingnessPort for StubWillingness {
    fn answer(&self, agent: &AgentId, prompt: &str) -> Result<String, String> {
        let p = if prompt.contains(COST_PREAMBLE.trim_end()) { self.p_with_cue } else { self.p_without_cue };
        let mut rng = substream(self.seed, &format!("willing/{agent}"));
        Ok(if rng.gen_bool(p) { "Yes." } else { "No." }.to_owned())
    }
}

/// Asks a completion backend (e.g. a recorded LLM) the probe verbatim.
pub struct CompletionWillingness<C: CompletionPort> {
    inner: Mutex<C>,
}

impl<C: CompletionPort> CompletionWillingness<C> {
    pub fn new(inner: C) -> Self {
        Self { inner: Mutex::new(inner) }
    }
}

impl<C: CompletionPort> WillingnessPort for CompletionWillingness<C> {
    fn answer(&self, _agent: &AgentId, prompt: &str) -> Result<String, String> {
        self.inner.lock().expect("completion lock").complete(prompt).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTrial {
    pub agent_id: AgentId,
    pub arm: Arm,
    pub probe_post_id: PostId,
    pub probe_toxicity: f64,
    /// `None` when the answer could not be parsed or the call failed.
    pub willingness: Option<bool>,
    pub prompt_used: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub n_control: usize,
    pub n_treatment: usize,
    pub n_dropped: usize,
    pub rate_control: f64,
    pub rate_treatment: f64,
    /// `1 - rate_treatment / rate_control`; absent when no control agent is willing.
    pub relative_reduction: Option<f64>,
    /// 95% interval for the reduction from the log risk ratio.
    pub reduction_ci95: Option<(f64, f64)>,
    pub mean_toxicity_control: f64,
    pub mean_toxicity_treatment: f64,
    /// Control vs treatment willingness.
    pub z_test: StatResult,
    pub fisher_p: f64,
    pub assignment_hash: String,
}

/// Probe every assigned agent once, in agent order within each arm.
pub fn run_trials(assignment: &Assignment, port: &dyn WillingnessPort) -> Vec<CostTrial> {
    let arms = [(Arm::Control, &assignment.control), (Arm::Treatment, &assignment.treatment)];
    let mut trials = Vec::new();
    for (arm, members) in arms {
        for c in members.iter() {
            let prompt = build_probe(c, arm);
            let willingness = match port.answer(&c.agent_id, &prompt) {
                Ok(a) => parse_willingness(&a),
                Err(e) => {
                    log::warn!("willingness probe for {} failed: {e}", c.agent_id);
                    None
                }
            };
            trials.push(CostTrial {
                agent_id: c.agent_id.clone(),
                arm,
                probe_post_id: c.probe_post_id.clone(),
                probe_toxicity: c.probe_toxicity,
                willingness,
                prompt_used: prompt,
            });
        }
    }
    trials
}

/// Rates, reduction and tests from trial records alone.
pub fn cost_report(trials: &[CostTrial], assignment_hash: &str) -> Result<CostReport, CostError> {
    let mut yes: BTreeMap<Arm, (u64, u64)> = BTreeMap::new();
    let mut tox: BTreeMap<Arm, (f64, usize)> = BTreeMap::new();
    let mut dropped = 0;
    for t in trials {
        let e = tox.entry(t.arm).or_default();
        e.0 += t.probe_toxicity;
        e.1 += 1;
        match t.willingness {
            Some(w) => {
                let e = yes.entry(t.arm).or_default();
                e.0 += w as u64;
                e.1 += 1;
            }
            None => dropped += 1,
        }
    }
    let (xc, nc) = yes.get(&Arm::Control).copied().unwrap_or_default();
    let (xt, nt) = yes.get(&Arm::Treatment).copied().unwrap_or_default();
    let z_test = two_proportion_z(xc, nc, xt, nt)?;
    let fisher_p = fisher_exact(xc, nc - xc, xt, nt - xt)?;
    let (rc, rt) = (xc as f64 / nc as f64, xt as f64 / nt as f64);
    let reduction_ci95 = (xc > 0 && xt > 0).then(|| {
        let log_rr = (rt / rc).ln();
        let se = (1.0 / xt as f64 - 1.0 / nt as f64 + 1.0 / xc as f64 - 1.0 / nc as f64).sqrt();
        let (lo, hi) = ((log_rr - 1.959964 * se).exp(), (log_rr + 1.959964 * se).exp());
        (1.0 - hi, 1.0 - lo)
    });
    let mean_tox = |arm| tox.get(&arm).map_or(f64::NAN, |(s, n)| s / *n as f64);
    Ok(CostReport {
        n_control: nc as usize,
        n_treatment: nt as usize,
        n_dropped: dropped,
        rate_control: rc,
        rate_treatment: rt,
        relative_reduction: (rc > 0.0).then(|| 1.0 - rt / rc),
        reduction_ci95,
        mean_toxicity_control: mean_tox(Arm::Control),
        mean_toxicity_treatment: mean_tox(Arm::Treatment),
        z_test,
        fisher_p,
        assignment_hash: assignment_hash.to_owned(),
    })
}

/// Hash the assignment, probe every agent, then report.
pub fn run_cost_experiment(
    assignment: &Assignment,
    port: &dyn WillingnessPort,
) -> Result<(Vec<CostTrial>, CostReport), CostError> {
    let hash = Assignment::compute_hash(&assignment.control, &assignment.treatment);
    let trials = run_trials(assignment, port);
    let report = cost_report(&trials, &hash)?;
    Ok((trials, report))
}
