use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IdeologyClass, Persona, PersonaPort, StanceError};
use crate::graph::FollowGraph;
use crate::model::{AgentId, PostId, PostRecord, Snapshot};

const BUILTIN_KEYWORDS: &str = include_str!("../../data/political_keywords.txt");

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Political terms matched as whole words (or whole-word phrases), ignoring case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoliticalKeywords {
    phrases: Vec<Vec<String>>,
}

impl PoliticalKeywords {
    pub fn new<S: AsRef<str>>(keywords: impl IntoIterator<Item = S>) -> Result<Self, StanceError> {
        let mut phrases: Vec<Vec<String>> = keywords
            .into_iter()
            .map(|k| k.as_ref().trim().to_owned())
            .filter(|k| !k.is_empty() && !k.starts_with('#'))
            .map(|k| tokens(&k))
            .filter(|t| !t.is_empty())
            .collect();
        phrases.sort();
        phrases.dedup();
        if phrases.is_empty() {
            return Err(StanceError::EmptyKeywordList);
        }
        Ok(Self { phrases })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, StanceError> {
        Self::new(std::fs::read_to_string(path)?.lines())
    }

    /// The small example list bundled with the crate.
    pub fn builtin() -> Self {
        Self::new(BUILTIN_KEYWORDS.lines()).expect("bundled keyword list is non-empty")
    }

    /// Keywords found in `text`, in list order.
    pub fn matches(&self, text: &str) -> Vec<String> {
        let toks = tokens(text);
        self.phrases
            .iter()
            .filter(|p| toks.windows(p.len()).any(|w| w == p.as_slice()))
            .map(|p| p.join(" "))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoliticalPost {
    pub post_id: PostId,
    pub author_id: AgentId,
    pub matched: Vec<String>,
}

pub fn political_filter<'a>(
    posts: impl IntoIterator<Item = &'a PostRecord>,
    keywords: &PoliticalKeywords,
) -> Vec<PoliticalPost> {
    posts
        .into_iter()
        .filter_map(|p| {
            let matched = keywords.matches(&p.text);
            (!matched.is_empty()).then(|| PoliticalPost {
                post_id: p.post_id.clone(),
                author_id: p.author_id.clone(),
                matched,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FinalLabel {
    Decided { label: IdeologyClass },
    NeedsAdjudication { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdeologyLabel {
    pub post_id: PostId,
    /// `None` where the persona failed to answer.
    pub per_persona: BTreeMap<Persona, Option<IdeologyClass>>,
    #[serde(rename = "final")]
    pub final_label: FinalLabel,
}

impl IdeologyLabel {
    pub fn decided(&self) -> Option<IdeologyClass> {
        match self.final_label {
            FinalLabel::Decided { label } => Some(label),
            FinalLabel::NeedsAdjudication { .. } => None,
        }
    }
}

/// Strict majority of the three persona answers, if one exists.
pub fn majority(labels: [IdeologyClass; 3]) -> Option<IdeologyClass> {
    labels.iter().copied().find(|l| labels.iter().filter(|m| *m == l).count() >= 2)
}

/// Ask each persona and take the majority. A missing persona answer or a
/// three-way split leaves the post for human adjudication.
pub fn majority_vote_label(post_id: PostId, text: &str, port: &dyn PersonaPort) -> IdeologyLabel {
    let mut per_persona = BTreeMap::new();
    let mut failures = Vec::new();
    for p in Persona::ALL {
        match port.label(text, p) {
            Ok(l) => {
                per_persona.insert(p, Some(l));
            }
            Err(e) => {
                failures.push(format!("{} persona failed: {e}", p.name()));
                per_persona.insert(p, None);
            }
        }
    }
    let final_label = if !failures.is_empty() {
        FinalLabel::NeedsAdjudication { reason: failures.join("; ") }
    } else {
        let got = Persona::ALL.map(|p| per_persona[&p].expect("all answered"));
        match majority(got) {
            Some(label) => FinalLabel::Decided { label },
            None => FinalLabel::NeedsAdjudication { reason: "no majority".into() },
        }
    };
    IdeologyLabel { post_id, per_persona, final_label }
}

/// Queue of posts needing a human label: `post_id,text,liberal,conservative,moderate,reason`.
pub fn write_adjudication_csv<W: Write>(
    out: W,
    labels: &[IdeologyLabel],
    text_of: impl Fn(&PostId) -> Option<String>,
) -> Result<usize, StanceError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["post_id", "text", "liberal", "conservative", "moderate", "reason"])?;
    let mut n = 0;
    for l in labels {
        let FinalLabel::NeedsAdjudication { reason } = &l.final_label else { continue };
        let persona = |p: Persona| l.per_persona.get(&p).copied().flatten().map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            l.post_id.as_str(),
            &text_of(&l.post_id).unwrap_or_default(),
            &persona(Persona::Liberal),
            &persona(Persona::Conservative),
            &persona(Persona::Moderate),
            reason,
        ])?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// Human decisions as `post_id,label` rows (header required).
pub fn read_adjudications<R: Read>(input: R) -> Result<BTreeMap<PostId, IdeologyClass>, StanceError> {
    #[derive(Deserialize)]
    struct Row {
        post_id: String,
        label: String,
    }
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize::<Row>() {
        let row = row?;
        out.insert(PostId(row.post_id), row.label.parse()?);
    }
    Ok(out)
}

/// Replace pending labels that have a human decision.
pub fn apply_adjudications(labels: &mut [IdeologyLabel], decisions: &BTreeMap<PostId, IdeologyClass>) -> usize {
    let mut n = 0;
    for l in labels.iter_mut() {
        if let (FinalLabel::NeedsAdjudication { .. }, Some(d)) = (&l.final_label, decisions.get(&l.post_id)) {
            l.final_label = FinalLabel::Decided { label: *d };
            n += 1;
        }
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeologyScore {
    pub agent_id: AgentId,
    /// Mean of +1 liberal, -1 conservative, 0 moderate.
    pub psi: f64,
    /// Posts that passed the political filter.
    pub n_political_posts: usize,
    /// Political posts with a decided, non-unclear label.
    pub n_labeled: usize,
}

pub fn ideology_score(
    agent_id: AgentId,
    labels: impl IntoIterator<Item = Option<IdeologyClass>>,
) -> Result<IdeologyScore, StanceError> {
    let (mut sum, mut n, mut total) = (0i64, 0usize, 0usize);
    for l in labels {
        total += 1;
        if let Some(v) = l.and_then(IdeologyClass::value) {
            sum += v as i64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(StanceError::NoLabeledPosts(agent_id.to_string()));
    }
    Ok(IdeologyScore { agent_id, psi: sum as f64 / n as f64, n_political_posts: total, n_labeled: n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeologyRun {
    pub political: Vec<PoliticalPost>,
    pub labels: Vec<IdeologyLabel>,
    pub scores: BTreeMap<AgentId, IdeologyScore>,
}

/// Filter, label and score every agent's political posts. Agents with no
/// decided label get no score.
pub fn ideology_pipeline(
    snap: &Snapshot,
    keywords: &PoliticalKeywords,
    port: &dyn PersonaPort,
    adjudicated: &BTreeMap<PostId, IdeologyClass>,
) -> Result<IdeologyRun, StanceError> {
    let political = political_filter(snap.posts_in_order(), keywords);
    let mut labels: Vec<IdeologyLabel> = political
        .iter()
        .map(|p| majority_vote_label(p.post_id.clone(), &snap.post(&p.post_id).expect("filtered from snapshot").text, port))
        .collect();
    apply_adjudications(&mut labels, adjudicated);
    let mut by_agent: BTreeMap<&AgentId, Vec<Option<IdeologyClass>>> = BTreeMap::new();
    for (p, l) in political.iter().zip(&labels) {
        by_agent.entry(&p.author_id).or_default().push(l.decided());
    }
    let mut scores = BTreeMap::new();
    for (agent, ls) in by_agent {
        match ideology_score(agent.clone(), ls.iter().copied()) {
            Ok(s) => {
                scores.insert(agent.clone(), s);
            }
            Err(StanceError::NoLabeledPosts(_)) => {
                log::debug!("{agent} has no decided political labels");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(IdeologyRun { political, labels, scores })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdeologicalSubgraph {
    pub graph: FollowGraph,
    /// `true` for liberal (ψ > 0), by node index of `graph`.
    pub liberal: Vec<bool>,
}

/// Follow graph induced by agents with at least `min_posts` political posts
/// and `|ψ| >= min_abs_score`, labeled by the sign of ψ.
pub fn ideological_subgraph(
    snap: &Snapshot,
    scores: &BTreeMap<AgentId, IdeologyScore>,
    min_posts: usize,
    min_abs_score: f64,
) -> Result<IdeologicalSubgraph, StanceError> {
    let full = FollowGraph::from_snapshot(snap);
    let keep: Vec<usize> = (0..full.n())
        .filter(|&u| {
            scores.get(&full.nodes()[u]).is_some_and(|s| s.n_political_posts >= min_posts && s.psi.abs() >= min_abs_score)
        })
        .collect();
    if keep.is_empty() {
        return Err(StanceError::EmptySubgraph);
    }
    let graph = full.induced(&keep);
    let liberal = graph.nodes().iter().map(|a| scores[a].psi > 0.0).collect();
    Ok(IdeologicalSubgraph { graph, liberal })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;
    use crate::model::{EventLog, EventPayload};

    #[test]
    fn whole_word_matching() {
        let k = PoliticalKeywords::new(["election", "gun control"]).unwrap();
        assert_eq!(k.matches("Election day!"), vec!["election"]);
        assert!(k.matches("electionsX results").is_empty());
        assert_eq!(k.matches("GUN   control, now"), vec!["gun control"]);
        assert!(k.matches("gun shows control").is_empty());
        assert!(matches!(PoliticalKeywords::new(["", "# c"]), Err(StanceError::EmptyKeywordList)));
    }

    /// Independent scan: pad with spaces and look for ` keyword `.
    fn naive(text: &str, kw: &[&str]) -> bool {
        let cleaned: String =
            text.chars().map(|c| if c.is_alphanumeric() { c.to_lowercase().next().unwrap() } else { ' ' }).collect();
        let squashed = format!(" {} ", cleaned.split_whitespace().collect::<Vec<_>>().join(" "));
        kw.iter().any(|k| squashed.contains(&format!(" {k} ")))
    }

    #[test]
    fn filter_matches_naive_scan() {
        let kw = ["election", "vote", "tax", "climate change"];
        let keywords = PoliticalKeywords::new(kw).unwrap();
        let vocab = ["Election", "elections", "vote!", "voter", "TAX", "taxes", "climate", "change", "cat", "#vote", "x"];
        let mut rng = crate::util::rng(5);
        let posts: Vec<PostRecord> = (0..1000)
            .map(|i| {
                let n = rng.gen_range(0..8);
                let text: Vec<&str> = (0..n).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
                PostRecord {
                    post_id: format!("p{i}").into(),
                    author_id: "a".into(),
                    text: text.join(" "),
                    created_at: 0,
                    reply_to: None,
                    likes: 0,
                    dislikes: 0,
                    views: 0,
                    comments: 0,
                }
            })
            .collect();
        let got: Vec<PostId> = political_filter(&posts, &keywords).into_iter().map(|p| p.post_id).collect();
        let want: Vec<PostId> = posts.iter().filter(|p| naive(&p.text, &kw)).map(|p| p.post_id.clone()).collect();
        assert!(!want.is_empty());
        assert_eq!(got, want);
    }

    struct Table([IdeologyClass; 3]);
    impl PersonaPort for Table {
        fn label(&self, _t: &str, p: Persona) -> Result<IdeologyClass, StanceError> {
            Ok(self.0[Persona::ALL.iter().position(|x| *x == p).unwrap()])
        }
    }

    #[test]
    fn truth_table_of_all_64_combinations() {
        let mut decided = 0;
        for a in IdeologyClass::ALL {
            for b in IdeologyClass::ALL {
                for c in IdeologyClass::ALL {
                    let got = majority_vote_label("p".into(), "", &Table([a, b, c])).final_label;
                    // oracle: a label wins iff it appears at least twice
                    let want = if a == b || a == c {
                        FinalLabel::Decided { label: a }
                    } else if b == c {
                        FinalLabel::Decided { label: b }
                    } else {
                        FinalLabel::NeedsAdjudication { reason: "no majority".into() }
                    };
                    assert_eq!(got, want, "{a:?} {b:?} {c:?}");
                    decided += matches!(got, FinalLabel::Decided { .. }) as usize;
                }
            }
        }
        // 4 unanimous + 36 two-of-a-kind
        assert_eq!(decided, 40);
    }

    struct Flaky;
    impl PersonaPort for Flaky {
        fn label(&self, _t: &str, p: Persona) -> Result<IdeologyClass, StanceError> {
            match p {
                Persona::Moderate => Err(StanceError::UnparseableLabel("??".into())),
                _ => Ok(IdeologyClass::Liberal),
            }
        }
    }

    #[test]
    fn persona_failure_needs_adjudication() {
        let l = majority_vote_label("p".into(), "", &Flaky);
        assert!(matches!(&l.final_label, FinalLabel::NeedsAdjudication { reason } if reason.contains("moderate")));
        assert_eq!(l.per_persona[&Persona::Moderate], None);
    }

    #[test]
    fn adjudication_round_trip() {
        use IdeologyClass::*;
        let mut labels = vec![
            majority_vote_label("p1".into(), "", &Table([Liberal, Conservative, Moderate])),
            majority_vote_label("p2".into(), "", &Table([Liberal, Liberal, Moderate])),
        ];
        let mut buf = Vec::new();
        let n = write_adjudication_csv(&mut buf, &labels, |id| Some(format!("text of {id}, quoted"))).unwrap();
        assert_eq!(n, 1);
        let csv = String::from_utf8(buf).unwrap();
        assert_eq!(
            csv,
            "post_id,text,liberal,conservative,moderate,reason\np1,\"text of p1, quoted\",liberal,conservative,moderate,no majority\n"
        );
        let decisions = read_adjudications("post_id,label\np1,Conservative\n".as_bytes()).unwrap();
        assert_eq!(apply_adjudications(&mut labels, &decisions), 1);
        assert_eq!(labels[0].decided(), Some(Conservative));
    }

    #[test]
    fn psi_hand_means() {
        use IdeologyClass::*;
        let psi = |ls: &[IdeologyClass]| ideology_score("a".into(), ls.iter().map(|l| Some(*l))).unwrap().psi;
        assert_eq!(psi(&[Liberal, Liberal]), 1.0);
        assert_eq!(psi(&[Liberal, Conservative, Moderate]), 0.0);
        assert!((psi(&[Liberal, Liberal, Conservative]) - 1.0 / 3.0).abs() < 1e-12);
        let s = ideology_score("a".into(), [Some(Liberal), Some(Unclear), None]).unwrap();
        assert_eq!((s.psi, s.n_political_posts, s.n_labeled), (1.0, 3, 1));
        assert!(matches!(ideology_score("a".into(), [Some(Unclear)]), Err(StanceError::NoLabeledPosts(_))));
    }

    fn scored(n: usize, posts: &[usize], psi: &[f64]) -> (EventLog, BTreeMap<AgentId, IdeologyScore>) {
        let mut log = EventLog::new();
        for i in 0..n {
            log.record(0, EventPayload::AgentCreated { agent_id: format!("a{i}").into(), backstory: None, display_name: String::new() })
                .unwrap();
        }
        let mut rng = crate::util::rng(n as u64);
        for _ in 0..n * 3 {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v {
                let _ = log.record(1, EventPayload::Followed { follower_id: format!("a{u}").into(), followee_id: format!("a{v}").into() });
            }
        }
        let scores = (0..n)
            .map(|i| {
                let id = AgentId(format!("a{i}"));
                (id.clone(), IdeologyScore { agent_id: id, psi: psi[i], n_political_posts: posts[i], n_labeled: posts[i] })
            })
            .collect();
        (log, scores)
    }

    #[test]
    fn subgraph_thresholds_and_edges() {
        let (log, scores) = scored(6, &[5, 4, 9, 5, 5, 7], &[0.25, 1.0, -0.5, 0.2, -0.25, 1.0]);
        let sub = ideological_subgraph(log.head(), &scores, 5, 0.25).unwrap();
        let kept: Vec<&str> = sub.graph.nodes().iter().map(AgentId::as_str).collect();
        assert_eq!(kept, vec!["a0", "a2", "a4", "a5"]);
        assert_eq!(sub.liberal, vec![true, false, false, true]);
        // brute-force edge filter
        let want: Vec<(String, String)> = log
            .head()
            .follows
            .keys()
            .filter(|(f, t)| kept.contains(&f.as_str()) && kept.contains(&t.as_str()))
            .map(|(f, t)| (f.to_string(), t.to_string()))
            .collect();
        let got: Vec<(String, String)> = sub
            .graph
            .edges()
            .map(|(u, v, _)| (sub.graph.nodes()[u].to_string(), sub.graph.nodes()[v].to_string()))
            .collect();
        assert_eq!(got, want);
        assert!(matches!(ideological_subgraph(log.head(), &scores, 10, 0.0), Err(StanceError::EmptySubgraph)));
    }

    proptest! {
        #[test]
        fn raising_min_posts_never_adds(seed in 0u64..50, lo in 0usize..8, step in 0usize..5) {
            let mut rng = crate::util::rng(seed);
            let posts: Vec<usize> = (0..12).map(|_| rng.gen_range(0..10)).collect();
            let psi: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (log, scores) = scored(12, &posts, &psi);
            let nodes = |m: usize| ideological_subgraph(log.head(), &scores, m, 0.25)
                .map(|s| s.graph.nodes().to_vec()).unwrap_or_default();
            let small = nodes(lo + step);
            let big = nodes(lo);
            prop_assert!(small.iter().all(|a| big.contains(a)));
        }

        #[test]
        fn majority_is_symmetric(a in 0usize..4, b in 0usize..4, c in 0usize..4) {
            let l = IdeologyClass::ALL;
            let m = majority([l[a], l[b], l[c]]);
            for perm in [[l[a], l[c], l[b]], [l[b], l[a], l[c]], [l[b], l[c], l[a]], [l[c], l[a], l[b]], [l[c], l[b], l[a]]] {
                prop_assert_eq!(majority(perm), m);
            }
        }
    }
}
