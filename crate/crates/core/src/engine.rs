//! Simulation lifecycle: initialization, the synchronous stepping loop,
//! trend collection and the event log.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{GraphKind, SimulationConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::{
    bm_step_node_detailed, seiz_step_node, sm_step, BmParams, Hop, InterventionOutcome,
    ModeratorLedger, NodeOutcome, SeizParams, SmParams, UserState, Variant,
};
use crate::profiles::ProfileTable;
use crate::rng::{stream_rng, StepRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Seiz(SeizParams),
    Basic(BmParams),
    Smart(SmParams),
}

impl Model {
    pub fn from_config(config: &SimulationConfig) -> Self {
        let m = &config.model;
        match m.variant {
            Variant::Seiz => Model::Seiz(m.seiz()),
            Variant::BasicModerator => Model::Basic(m.basic()),
            Variant::SmartModerator => Model::Smart(m.smart()),
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Model::Seiz(_) => Variant::Seiz,
            Model::Basic(_) => Variant::BasicModerator,
            Model::Smart(_) => Variant::SmartModerator,
        }
    }
}

/// Per-iteration state counts, `S, E, I, Z` order. Index 0 is the initial
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub node_count: usize,
    pub counts: Vec<[usize; 4]>,
}

impl TrendSeries {
    fn new(node_count: usize) -> Self {
        Self {
            node_count,
            counts: Vec::new(),
        }
    }

    fn record(&mut self, states: &[UserState]) {
        self.counts.push(count_states(states));
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn fractions(&self, iteration: usize) -> [f64; 4] {
        let n = self.node_count as f64;
        self.counts[iteration].map(|c| c as f64 / n)
    }

    pub fn fraction(&self, iteration: usize, state: UserState) -> f64 {
        self.counts[iteration][state.index()] as f64 / self.node_count as f64
    }

    /// Fraction of `state` for every iteration.
    pub fn series(&self, state: UserState) -> Vec<f64> {
        (0..self.len()).map(|t| self.fraction(t, state)).collect()
    }

    /// `iteration,S,E,I,Z,frac_S,frac_E,frac_I,frac_Z` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,S,E,I,Z,frac_S,frac_E,frac_I,frac_Z\n");
        for (t, c) in self.counts.iter().enumerate() {
            let f = self.fractions(t);
            out.push_str(&format!(
                "{t},{},{},{},{},{},{},{},{}\n",
                c[0], c[1], c[2], c[3], f[0], f[1], f[2], f[3]
            ));
        }
        out
    }
}

pub fn count_states(states: &[UserState]) -> [usize; 4] {
    let mut c = [0usize; 4];
    for s in states {
        c[s.index()] += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Messages {
        sent: usize,
        toxic: usize,
        toxic_senders: usize,
    },
    Intervention {
        node: usize,
        outcome: InterventionOutcome,
    },
    Transition {
        node: usize,
        from: UserState,
        to: UserState,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub iteration: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: SimulationConfig,
    pub trends: TrendSeries,
    pub events: Vec<Event>,
    pub initial_states: Vec<UserState>,
    pub final_states: Vec<UserState>,
}

impl RunResult {
    pub fn transitions(&self) -> impl Iterator<Item = (u64, Hop)> + '_ {
        self.events.iter().filter_map(|e| match e.kind {
            EventKind::Transition { node, from, to } => Some((e.iteration, Hop { node, from, to })),
            _ => None,
        })
    }

    pub fn intervention_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Intervention { .. }))
            .count()
    }

    /// Digest of the full state sequence, see [`trajectory_hash`].
    pub fn trajectory_hash(&self) -> u64 {
        trajectory_hash(self)
    }
}

/// Live simulation state.
pub struct Simulation {
    config: SimulationConfig,
    graph: Graph,
    profiles: ProfileTable,
    model: Model,
    states: Vec<UserState>,
    ledger: ModeratorLedger,
    iteration: u64,
}

impl Simulation {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn profiles(&self) -> &ProfileTable {
        &self.profiles
    }

    pub fn states(&self) -> &[UserState] {
        &self.states
    }

    pub fn ledger(&self) -> &ModeratorLedger {
        &self.ledger
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Advances one synchronous step, appending events to `log` when given.
    pub fn step(&mut self, mut log: Option<&mut EventLog>) {
        self.iteration += 1;
        let it = self.iteration;
        let rng = StepRng::new(self.config.run.seed, it);
        let snapshot = &self.states;
        let g = &self.graph;

        let next = match &self.model {
            Model::Smart(params) => {
                let out = sm_step(snapshot, &self.profiles, g, params, &mut self.ledger, rng);
                if let Some(log) = log.as_deref_mut() {
                    let toxic: Vec<usize> = out.messages.iter().filter(|m| m.is_toxic).map(|m| m.sender).collect();
                    let mut senders = toxic.clone();
                    senders.sort_unstable();
                    senders.dedup();
                    log.push(
                        it,
                        EventKind::Messages {
                            sent: out.messages.len(),
                            toxic: toxic.len(),
                            toxic_senders: senders.len(),
                        },
                    );
                    let mut hops = out.hops.iter().peekable();
                    for rec in &out.interventions {
                        while let Some(h) = hops.next_if(|h| h.node < rec.node) {
                            log.push_hop(it, h);
                        }
                        log.push(
                            it,
                            EventKind::Intervention {
                                node: rec.node,
                                outcome: rec.outcome,
                            },
                        );
                    }
                    for h in hops {
                        log.push_hop(it, h);
                    }
                }
                out.next
            }
            model => {
                let outcomes: Vec<NodeOutcome> = (0..snapshot.len())
                    .into_par_iter()
                    .map(|u| {
                        let mut r = rng.node(u);
                        match model {
                            Model::Seiz(p) => NodeOutcome::plain(seiz_step_node(u, snapshot, g, p, &mut r)),
                            Model::Basic(p) => {
                                let (next, intervention) = bm_step_node_detailed(u, snapshot, g, p, &mut r);
                                NodeOutcome {
                                    next,
                                    via: None,
                                    intervention,
                                }
                            }
                            Model::Smart(_) => unreachable!(),
                        }
                    })
                    .collect();
                if let Some(log) = log {
                    let mut hops = Vec::new();
                    for (u, o) in outcomes.iter().enumerate() {
                        if let Some(outcome) = o.intervention {
                            log.push(it, EventKind::Intervention { node: u, outcome });
                        }
                        hops.clear();
                        o.push_hops(u, snapshot[u], &mut hops);
                        for h in &hops {
                            log.push_hop(it, h);
                        }
                    }
                }
                outcomes.into_iter().map(|o| o.next).collect()
            }
        };
        self.states = next;
    }
}

/// Append-only event log with a global sequence number.
#[derive(Debug, Default)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    fn push(&mut self, iteration: u64, kind: EventKind) {
        let seq = self.events.len() as u64;
        self.events.push(Event {
            seq,
            iteration,
            kind,
        });
    }

    fn push_hop(&mut self, iteration: u64, h: &Hop) {
        self.push(
            iteration,
            EventKind::Transition {
                node: h.node,
                from: h.from,
                to: h.to,
            },
        );
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

/// Builds the graph, samples profiles and seeds the initial infected set.
pub fn initialize(config: &SimulationConfig) -> Result<Simulation> {
    config.validate()?;
    let seed = config.run.seed;
    let graph = match config.graph.kind {
        GraphKind::ErdosRenyi => Graph::erdos_renyi(config.graph.nodes, config.graph.edge_prob, seed)?,
        GraphKind::EdgeList => {
            let path = config
                .graph
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("graph.path is required".into()))?;
            Graph::read_edge_list(path)?
        }
    };
    let n = graph.node_count();

    let profiles = match &config.model.profiles.csv {
        Some(path) => ProfileTable::read_csv(path, n)?,
        None => ProfileTable::sample(
            n,
            config.model.profiles.trait_distribution(),
            &mut stream_rng(seed, Stream::Profiles, 0, 0),
        )?,
    };

    let infected = (config.run.initial_infected_fraction * n as f64).round() as usize;
    let mut states = vec![UserState::Susceptible; n];
    for u in index::sample(&mut stream_rng(seed, Stream::InitialState, 0, 0), n, infected.min(n)) {
        states[u] = UserState::Infected;
    }

    Ok(Simulation {
        config: config.clone(),
        model: Model::from_config(config),
        ledger: ModeratorLedger::new(n),
        graph,
        profiles,
        states,
        iteration: 0,
    })
}

/// Runs `max_iterations` steps with full event logging.
pub fn run(config: &SimulationConfig) -> Result<RunResult> {
    let mut sim = initialize(config)?;
    let initial_states = sim.states.clone();
    let mut trends = TrendSeries::new(initial_states.len());
    trends.record(&sim.states);
    let mut log = EventLog::default();
    for _ in 0..config.run.max_iterations {
        sim.step(Some(&mut log));
        trends.record(&sim.states);
    }
    Ok(RunResult {
        config: config.clone(),
        trends,
        events: log.into_events(),
        initial_states,
        final_states: sim.states,
    })
}

/// Same dynamics as [`run`] without the event log.
pub fn run_trends(config: &SimulationConfig) -> Result<TrendSeries> {
    let mut sim = initialize(config)?;
    let mut trends = TrendSeries::new(sim.states.len());
    trends.record(&sim.states);
    for _ in 0..config.run.max_iterations {
        sim.step(None);
        trends.record(&sim.states);
    }
    Ok(trends)
}

/// FNV-1a digest over every iteration's full state vector, rebuilt from the
/// initial states and the logged transitions.
pub fn trajectory_hash(result: &RunResult) -> u64 {
    let mut h = FnvHasher::default();
    let mut states = result.initial_states.clone();
    let feed = |h: &mut FnvHasher, t: u64, states: &[UserState]| {
        h.write_u64(t);
        for s in states {
            h.write_u8(*s as u8);
        }
    };
    feed(&mut h, 0, &states);
    let mut transitions = result.transitions().peekable();
    for t in 1..result.trends.len() as u64 {
        while let Some((_, hop)) = transitions.next_if(|(it, _)| *it == t) {
            states[hop.node] = hop.to;
        }
        feed(&mut h, t, &states);
    }
    debug_assert_eq!(states, result.final_states);
    h.finish()
}
