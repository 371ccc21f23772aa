use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use agentnet_core::adapters::{ContentCache, HttpTransport, JsonTransport};
use agentnet_core::cost::{
    cost_candidates, run_cost_experiment, select_and_split, CompletionWillingness, StubWillingness, WillingnessPort,
};
use agentnet_core::graph::{
    avg_clustering_by_degree, avg_shortest_path, connected_components, degree_histogram,
    greedy_modularity_communities, reciprocity, DegreeMode, FollowGraph, GraphView, PathPolicy,
};
use agentnet_core::homophily::{
    backstory_drift, community_homophily, individual_follow_homophily, neighbor_convergence,
};
use agentnet_core::model::{export_string, ingest_jsonl, AgentId, EventLog, PostId, Strictness};
use agentnet_core::predict::{
    build_bundles, dataset_from_bundles, incremental_report, synthetic_bundles, write_dataset_csv, FeatureBundle,
    SyntheticSpec,
};
use agentnet_core::sim::{completion_client, run_simulation};
use agentnet_core::stance::{
    ideological_subgraph, ideology_pipeline, leaning_distribution, leaning_scores, polarization_suite,
    read_adjudications, write_adjudication_csv, LexiconPersona, LexiconStance, PersonaPort, PoliticalKeywords,
    RemoteLabeler, StancePort,
};
use agentnet_core::text::{EncoderPort, HashedBowEncoder, Normalizer, RemoteEncoder};
use agentnet_core::toxicity::{
    linguistic_comparison, score_posts, toxic_engagement, toxic_engagement_gap, toxic_homophily,
    toxicity_concentration, toxicity_profiles, LexiconScorer, RemoteScorer, ScorerPort,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{PredictTarget, Remote, RunConfig};
use crate::output::{runtime, Area, Output};
use crate::CliError;

fn load_log(path: &Path) -> Result<EventLog, CliError> {
    ingest_jsonl(path, Strictness::Lenient).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn setup(config: Option<&Path>, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let cfg = RunConfig::load(config)?;
    let cfg = match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    };
    if cfg.threads > 0 {
        // Only the first call in a process can size the pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    Ok(cfg)
}

fn transport(r: &Remote) -> Arc<dyn JsonTransport> {
    Arc::new(HttpTransport::new(r.token_env.as_deref()))
}

fn cache(r: &Remote) -> Result<ContentCache, CliError> {
    match &r.cache {
        Some(p) => ContentCache::open(p).map_err(runtime),
        None => Ok(ContentCache::in_memory()),
    }
}

fn encoder(cfg: &RunConfig) -> Result<Box<dyn EncoderPort>, CliError> {
    let e = &cfg.encoder;
    if e.remote.enabled() {
        Ok(Box::new(RemoteEncoder::new(&e.remote.url, e.dim, transport(&e.remote), cache(&e.remote)?)))
    } else {
        Ok(Box::new(HashedBowEncoder::new(e.dim, e.seed).map_err(|e| CliError::Usage(e.to_string()))?))
    }
}

fn scorer(cfg: &RunConfig) -> Result<Box<dyn ScorerPort>, CliError> {
    let t = &cfg.toxicity;
    if t.remote.enabled() {
        return Ok(Box::new(RemoteScorer::new(&t.remote.url, transport(&t.remote), cache(&t.remote)?)));
    }
    Ok(Box::new(match &t.lexicon {
        Some(p) => LexiconScorer::from_file(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => LexiconScorer::builtin(),
    }))
}

fn stance_port(cfg: &RunConfig) -> Result<Box<dyn StancePort>, CliError> {
    let r = &cfg.stance.remote;
    if r.enabled() {
        Ok(Box::new(RemoteLabeler::new(&r.url, transport(r), cache(r)?)))
    } else {
        Ok(Box::new(LexiconStance::default()))
    }
}

fn persona_port(cfg: &RunConfig) -> Result<Box<dyn PersonaPort>, CliError> {
    let r = &cfg.ideology.remote;
    if r.enabled() {
        Ok(Box::new(RemoteLabeler::new(&r.url, transport(r), cache(r)?)))
    } else {
        Ok(Box::new(LexiconPersona::default()))
    }
}

/// Result of one part of a multi-part analysis, kept even when it fails.
fn part<T: Serialize, E: std::fmt::Display>(name: &str, r: Result<T, E>, failures: &mut usize) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("report serializes"),
        Err(e) => {
            log::warn!("{name}: {e}");
            *failures += 1;
            json!({ "error": e.to_string() })
        }
    }
}

fn all_failed(failures: usize, parts: usize) -> Result<(), CliError> {
    if failures == parts {
        Err(CliError::Runtime("every part of the analysis failed; see the report for details".into()))
    } else {
        Ok(())
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn simulate(config: &Path, seed: u64, out: &Path) -> Result<(), CliError> {
    let cfg = setup(Some(config), Some(seed))?;
    let o = Output::new(out, "simulate", Some(seed), &cfg, &[config])?;
    let run = run_simulation(&cfg.sim).map_err(|e| match e {
        agentnet_core::sim::SimError::NoAgents | agentnet_core::sim::SimError::Policy(_) => CliError::Usage(e.to_string()),
        other => runtime(other),
    })?;
    o.bytes(Area::Raw, "events.jsonl", export_string(&run.log).as_bytes())?;
    let snap = run.log.head();
    o.json(
        Area::Reports,
        "simulation.json",
        &json!({
            "events": run.log.len(),
            "agents": snap.agents.len(),
            "posts": snap.posts_in_order().count(),
            "follows": snap.follows.len(),
            "metrics": run.metrics,
        }),
    )?;
    Ok(())
}

pub fn ingest(input: &Path, out: &Path, strict: bool) -> Result<(), CliError> {
    let cfg = setup(None, None)?;
    let mode = if strict { Strictness::Strict } else { Strictness::Lenient };
    let log = ingest_jsonl(input, mode).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let o = Output::new(out, "ingest", None, &cfg, &[input])?;
    o.bytes(Area::Raw, "events.jsonl", export_string(&log).as_bytes())?;
    let snap = log.head();
    o.json(
        Area::Reports,
        "ingest.json",
        &json!({
            "events": log.len(),
            "agents": snap.agents.len(),
            "posts": snap.posts_in_order().count(),
            "follows": snap.follows.len(),
            "first_timestamp": log.first_timestamp(),
            "last_timestamp": log.last_timestamp(),
        }),
    )?;
    Ok(())
}

pub fn graph(log_path: &Path, out: &Path, config: Option<&Path>, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = setup(config, seed)?;
    if seed.is_none() && !matches!(cfg.graph.paths, PathPolicy::Exact) {
        return Err(CliError::Usage("sampled path lengths need --seed".into()));
    }
    let log = load_log(log_path)?;
    let o = Output::new(out, "analyze graph", seed, &cfg, &[log_path])?;
    let g = FollowGraph::from_snapshot(log.head());

    let modes = [DegreeMode::In, DegreeMode::Out, DegreeMode::Undirected, DegreeMode::Mutual];
    let hists: Vec<BTreeMap<usize, usize>> = modes.iter().map(|m| degree_histogram(&g, *m)).collect();
    let mut degrees: Vec<usize> = hists.iter().flat_map(|h| h.keys().copied()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    o.csv(
        Area::Figures,
        "degree.csv",
        &["degree", "in", "out", "undirected", "mutual"],
        degrees.iter().map(|d| {
            std::iter::once(d.to_string()).chain(hists.iter().map(|h| h.get(d).copied().unwrap_or(0).to_string())).collect::<Vec<_>>()
        }),
    )?;

    let undirected = g.view(GraphView::Undirected);
    o.csv(
        Area::Figures,
        "clustering.csv",
        &["degree", "avg_clustering"],
        avg_clustering_by_degree(&undirected).into_iter().map(|(d, c)| [d.to_string(), num(c)]),
    )?;

    let mut failures = 0;
    let paths = json!({
        "policy": cfg.graph.paths,
        "directed": part("directed paths", avg_shortest_path(&g.view(GraphView::Directed), cfg.graph.paths), &mut failures),
        "undirected": part("undirected paths", avg_shortest_path(&undirected, cfg.graph.paths), &mut failures),
    });
    o.json(Area::Reports, "paths.json", &paths)?;
    let rec = part("reciprocity", reciprocity(&g), &mut failures);
    o.json(Area::Reports, "reciprocity.json", &json!({ "reciprocity": rec, "edges": g.edge_count() }))?;

    let components = connected_components(&undirected);
    let communities = part("communities", greedy_modularity_communities(&undirected).map(|p| {
        let mut sizes: Vec<usize> = p.communities().iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        json!({ "count": sizes.len(), "modularity": p.modularity, "sizes": sizes })
    }), &mut failures);
    o.json(
        Area::Reports,
        "graph_summary.json",
        &json!({
            "nodes": g.n(),
            "edges": g.edge_count(),
            "components": components.len(),
            "largest_component": components.first().copied().unwrap_or(0),
            "largest_component_share": components.first().map_or(0.0, |c| *c as f64 / g.n().max(1) as f64),
            "communities": communities,
        }),
    )?;
    Ok(())
}

pub fn homophily(log_path: &Path, out: &Path, config: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let cfg = setup(config, Some(seed))?;
    let log = load_log(log_path)?;
    let o = Output::new(out, "analyze homophily", Some(seed), &cfg, &[log_path])?;
    let enc = encoder(&cfg)?;
    let mut failures = 0;
    let community = community_homophily(log.head(), enc.as_ref(), &cfg.homophily.community);
    let follow = individual_follow_homophily(&log, enc.as_ref(), &cfg.homophily.follow);
    if let Ok(f) = &follow {
        o.csv(
            Area::Figures,
            "follow_homophily_by_window.csv",
            &["window_start", "mean_ratio", "agents", "follows"],
            f.per_window.iter().map(|(t, w)| [t.to_string(), num(w.mean_ratio), w.n_agents.to_string(), w.n_follows.to_string()]),
        )?;
    }
    let report = json!({
        "community": part("community homophily", community, &mut failures),
        "follow": part("follow homophily", follow, &mut failures),
    });
    o.json(Area::Reports, "homophily.json", &report)?;
    all_failed(failures, 2)
}

pub fn influence(log_path: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let cfg = setup(config, None)?;
    let log = load_log(log_path)?;
    let o = Output::new(out, "analyze influence", None, &cfg, &[log_path])?;
    let enc = encoder(&cfg)?;
    let mut failures = 0;

    let convergence = neighbor_convergence(&log, enc.as_ref(), &cfg.influence.convergence);
    if let Ok(c) = &convergence {
        for (cohort, series) in &c.cohorts {
            let name = serde_json::to_value(cohort).expect("cohort serializes");
            o.bytes(Area::Figures, &format!("convergence_{}.csv", name.as_str().unwrap_or("cohort")), series.to_csv().as_bytes())?;
        }
    }
    let normalizer = Normalizer::default();
    let drift = backstory_drift(&log, &normalizer, enc.as_ref(), &cfg.influence.drift);
    let drift_value = drift.map(|d| {
        d.iter()
            .map(|(m, s)| {
                let _ = o.bytes(Area::Figures, &format!("drift_{}.csv", m.name()), s.to_csv().as_bytes());
                (m.name(), json!({ "spearman_trend": s.trend(), "series": s }))
            })
            .collect::<BTreeMap<_, _>>()
    });
    let report = json!({
        "convergence": part("neighbor convergence", convergence, &mut failures),
        "drift": part("backstory drift", drift_value, &mut failures),
    });
    o.json(Area::Reports, "influence.json", &report)?;
    all_failed(failures, 2)
}

pub fn toxicity(log_path: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let cfg = setup(config, None)?;
    let t = &cfg.toxicity;
    let log = load_log(log_path)?;
    let o = Output::new(out, "analyze toxicity", None, &cfg, &[log_path])?;
    let snap = log.head();
    let scores = score_posts(snap, scorer(&cfg)?.as_ref(), t.threshold).map_err(runtime)?;
    o.csv(
        Area::Raw,
        "post_scores.csv",
        &["post_id", "author_id", "score", "toxic"],
        snap.posts_in_order().map(|p| {
            let s = scores.scores[&p.post_id];
            [p.post_id.to_string(), p.author_id.to_string(), num(s), (s > t.threshold).to_string()]
        }),
    )?;
    let profiles = toxicity_profiles(snap, &scores, &t.agent_thresholds).map_err(runtime)?;
    o.csv(
        Area::Raw,
        "agent_toxicity.csv",
        &["agent_id", "posts", "toxic_posts", "mean_toxicity"],
        profiles.values().map(|p| [p.agent_id.to_string(), p.n_posts.to_string(), p.n_toxic.to_string(), num(p.mean_toxicity)]),
    )?;

    let mut failures = 0;
    let concentration = toxicity_concentration(profiles.values());
    if let Ok(c) = &concentration {
        o.csv(
            Area::Figures,
            "toxicity_concentration.csv",
            &["bin", "share"],
            c.iter().map(|(b, s)| [agentnet_core::toxicity::bin_label(*b), num(*s)]),
        )?;
    }
    let network = toxic_homophily(&FollowGraph::from_snapshot(snap), &profiles, &t.agent_thresholds, t.baseline);
    if let Ok(n) = &network {
        o.csv(
            Area::Figures,
            "toxic_network.csv",
            &["threshold", "assortativity", "cross_group_ratio", "same_group_ratio", "toxic", "nontoxic", "edges"],
            n.iter().map(|(k, s)| {
                [
                    k.to_string(),
                    num(s.assortativity),
                    num(s.cross_group_ratio),
                    num(s.same_group_ratio),
                    s.n_toxic.to_string(),
                    s.n_nontoxic.to_string(),
                    s.n_edges.to_string(),
                ]
            }),
        )?;
    }
    let (toxic, nontoxic): (Vec<_>, Vec<_>) = snap.posts_in_order().partition(|p| scores.is_toxic(&p.post_id).unwrap_or(false));
    let toxic_texts: Vec<&str> = toxic.iter().map(|p| p.text.as_str()).collect();
    let nontoxic_texts: Vec<&str> = nontoxic.iter().map(|p| p.text.as_str()).collect();
    let linguistic = linguistic_comparison(&toxic_texts, &nontoxic_texts);
    let report = json!({
        "threshold": t.threshold,
        "posts": scores.scores.len(),
        "toxic_posts": toxic.len(),
        "concentration": part("concentration", concentration, &mut failures),
        "engagement": part("engagement", toxic_engagement(snap, &profiles, &scores, t.engagement_unit), &mut failures),
        "engagement_gap": part("engagement gap", toxic_engagement_gap(snap, &scores), &mut failures),
        "network": part("toxic network", network, &mut failures),
        "linguistic": part("linguistic features", linguistic, &mut failures),
    });
    o.json(Area::Reports, "toxicity.json", &report)?;
    all_failed(failures, 5)
}

pub fn stance(log_path: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let cfg = setup(config, None)?;
    let log = load_log(log_path)?;
    let o = Output::new(out, "analyze stance", None, &cfg, &[log_path])?;
    let scores = leaning_scores(log.head(), stance_port(&cfg)?.as_ref()).map_err(runtime)?;
    o.csv(
        Area::Raw,
        "leaning_scores.csv",
        &["agent_id", "pi", "relevant_posts"],
        scores.values().map(|s| [s.agent_id.to_string(), num(s.pi), s.n_relevant_posts.to_string()]),
    )?;
    let pis: Vec<f64> = scores.values().map(|s| s.pi).collect();
    let dist = leaning_distribution(&pis, cfg.stance.bins).map_err(runtime)?;
    o.csv(
        Area::Figures,
        "leaning_histogram.csv",
        &["bin_lower", "count"],
        dist.edges.iter().zip(&dist.counts).map(|(e, c)| [num(*e), c.to_string()]),
    )?;
    o.json(Area::Reports, "stance.json", &json!({ "agents_scored": scores.len(), "distribution": dist }))?;
    Ok(())
}

pub fn ideology(log_path: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let cfg = setup(config, None)?;
    let i = &cfg.ideology;
    let log = load_log(log_path)?;
    let keywords = match &i.keywords {
        Some(p) => PoliticalKeywords::from_file(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => PoliticalKeywords::builtin(),
    };
    let adjudicated = match &i.adjudicated {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            read_adjudications(f).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    let mut inputs = vec![log_path];
    inputs.extend(i.adjudicated.as_deref());
    let o = Output::new(out, "analyze ideology", None, &cfg, &inputs)?;
    let snap = log.head();
    let run = ideology_pipeline(snap, &keywords, persona_port(&cfg)?.as_ref(), &adjudicated).map_err(runtime)?;

    let mut labels = Vec::new();
    for l in &run.labels {
        labels.extend(serde_json::to_vec(l).map_err(runtime)?);
        labels.push(b'\n');
    }
    o.bytes(Area::Raw, "ideology_labels.jsonl", &labels)?;
    let mut queue = Vec::new();
    let pending = write_adjudication_csv(&mut queue, &run.labels, |id: &PostId| snap.post(id).map(|p| p.text.clone()))
        .map_err(runtime)?;
    o.bytes(Area::Raw, "adjudication_queue.csv", &queue)?;
    o.csv(
        Area::Raw,
        "ideology_scores.csv",
        &["agent_id", "psi", "political_posts", "labeled_posts"],
        run.scores.values().map(|s| [s.agent_id.to_string(), num(s.psi), s.n_political_posts.to_string(), s.n_labeled.to_string()]),
    )?;

    let mut failures = 0;
    let polarization = ideological_subgraph(snap, &run.scores, i.min_posts, i.min_abs_score).and_then(|sub| {
        let g = sub.graph.view(GraphView::Directed);
        let n_liberal = sub.liberal.iter().filter(|l| **l).count();
        polarization_suite(&g, &sub.liberal, &i.polarization)
            .map(|r| json!({ "nodes": g.n(), "liberal": n_liberal, "conservative": g.n() - n_liberal, "suite": r }))
    });
    let report = json!({
        "political_posts": run.political.len(),
        "decided": run.labels.iter().filter(|l| l.decided().is_some()).count(),
        "pending_adjudication": pending,
        "agents_scored": run.scores.len(),
        "polarization": part("polarization", polarization, &mut failures),
    });
    o.json(Area::Reports, "ideology.json", &report)?;
    Ok(())
}

pub fn cost(log_path: &Path, out: &Path, config: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let cfg = setup(config, Some(seed))?;
    let c = &cfg.cost;
    let log = load_log(log_path)?;
    let o = Output::new(out, "experiment cost", Some(seed), &cfg, &[log_path])?;
    let snap = log.head();
    let scores = score_posts(snap, scorer(&cfg)?.as_ref(), cfg.toxicity.threshold).map_err(runtime)?;
    let candidates = cost_candidates(snap, &scores);
    let assignment = select_and_split(&candidates, c.sample, seed).map_err(runtime)?;
    let port: Box<dyn WillingnessPort> = match &c.llm {
        Some(l) => Box::new(CompletionWillingness::new(completion_client(l).map_err(|e| CliError::Usage(e.to_string()))?)),
        None => Box::new(StubWillingness { p_without_cue: c.stub_p_without_cue, p_with_cue: c.stub_p_with_cue, seed }),
    };
    let (trials, report) = run_cost_experiment(&assignment, port.as_ref()).map_err(runtime)?;
    o.csv(
        Area::Raw,
        "cost_results.csv",
        &["agent_id", "arm", "probe_post_id", "probe_toxicity", "willingness"],
        trials.iter().map(|t| {
            [
                t.agent_id.to_string(),
                serde_json::to_value(t.arm).expect("arm serializes").as_str().unwrap_or_default().to_string(),
                t.probe_post_id.to_string(),
                num(t.probe_toxicity),
                t.willingness.map_or(String::new(), |w| if w { "yes".into() } else { "no".into() }),
            ]
        }),
    )?;
    o.json(
        Area::Reports,
        "cost.json",
        &json!({ "candidates": candidates.len(), "split_attempts": assignment.attempts, "report": report }),
    )?;
    Ok(())
}

fn predict_bundles(log_path: &Path, cfg: &RunConfig) -> Result<Vec<FeatureBundle>, CliError> {
    let log = load_log(log_path)?;
    let snap = log.head();
    let scores: BTreeMap<AgentId, f64> = match cfg.predict.target {
        PredictTarget::Leaning => leaning_scores(snap, stance_port(cfg)?.as_ref())
            .map_err(runtime)?
            .into_iter()
            .map(|(a, s)| (a, s.pi))
            .collect(),
        PredictTarget::Ideology => {
            let kw = match &cfg.ideology.keywords {
                Some(p) => PoliticalKeywords::from_file(p).map_err(|e| CliError::Usage(e.to_string()))?,
                None => PoliticalKeywords::builtin(),
            };
            ideology_pipeline(snap, &kw, persona_port(cfg)?.as_ref(), &BTreeMap::new())
                .map_err(runtime)?
                .scores
                .into_iter()
                .filter(|(_, s)| s.n_labeled > 0)
                .map(|(a, s)| (a, s.psi))
                .collect()
        }
    };
    build_bundles(snap, &scores, encoder(cfg)?.as_ref(), cfg.predict.neighbors).map_err(runtime)
}

pub fn predict(log_path: Option<&Path>, out: &Path, config: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let cfg = setup(config, Some(seed))?;
    let p = &cfg.predict;
    if p.levels.is_empty() || p.n_seeds < 3 {
        return Err(CliError::Usage("predict needs at least one level and n_seeds >= 3".into()));
    }
    let inputs: Vec<&Path> = log_path.into_iter().collect();
    let o = Output::new(out, "predict", Some(seed), &cfg, &inputs)?;
    let bundles = match log_path {
        Some(path) => predict_bundles(path, &cfg)?,
        None => synthetic_bundles(&SyntheticSpec { seed, ..Default::default() }),
    };
    let seeds: Vec<u64> = (0..p.n_seeds as u64).map(|i| seed.wrapping_add(i)).collect();
    let report = incremental_report(&bundles, &p.levels, &seeds, &p.harness).map_err(runtime)?;
    let widest = *p.levels.iter().max().expect("levels checked above");
    let ds = dataset_from_bundles(&bundles, widest, p.harness.split.with_seed(seed)).map_err(runtime)?;
    let mut buf = Vec::new();
    write_dataset_csv(&mut buf, &ds).map_err(runtime)?;
    o.bytes(Area::Raw, "dataset.csv", &buf)?;
    let mut table = Vec::new();
    report.write_csv(&mut table).map_err(runtime)?;
    o.bytes(Area::Figures, "predict_table.csv", &table)?;
    o.json(
        Area::Reports,
        "predict.json",
        &json!({ "source": if log_path.is_some() { "log" } else { "synthetic" }, "rows": bundles.len(), "report": report }),
    )?;
    Ok(())
}

/// Gather every report JSON under `out/reports` into `summary.json`.
pub fn report(out: &Path) -> Result<(), CliError> {
    let cfg = setup(None, None)?;
    let dir = out.join("reports");
    let entries = std::fs::read_dir(&dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<std::path::PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            name.ends_with(".json") && !name.ends_with(".meta.json") && name != "summary.json"
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("no reports in {}", dir.display())));
    }
    let mut combined = BTreeMap::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(runtime)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", f.display())))?;
        let name = f.file_stem().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        combined.insert(name, value);
    }
    let inputs: Vec<&Path> = files.iter().map(|p| p.as_path()).collect();
    let o = Output::new(out, "report", None, &cfg, &inputs)?;
    o.json(Area::Reports, "summary.json", &combined)?;
    Ok(())
}
