use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seiz::{step_exposed, step_susceptible};
use super::{DiffusionSource, Hop, NodeOutcome, SmParams, UserState};
use crate::graph::Graph;
use crate::profiles::{classify_toxic, ProfileTable};
use crate::rng::StepRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: usize,
    pub timestep: u64,
    pub score: f64,
    pub is_toxic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterventionOutcome {
    /// The user left the infected state.
    Reverted,
    /// The user stayed infected.
    Resisted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionRecord {
    pub iteration: u64,
    pub node: usize,
    pub outcome: InterventionOutcome,
}

/// Toxic-message counters and intervention history of the smart moderator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModeratorLedger {
    pub toxic_count: Vec<u32>,
    pub interventions: Vec<InterventionRecord>,
}

impl ModeratorLedger {
    pub fn new(node_count: usize) -> Self {
        Self {
            toxic_count: vec![0; node_count],
            interventions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmStepOutcome {
    pub next: Vec<UserState>,
    pub messages: Vec<Message>,
    /// Interventions made during this step, in node order.
    pub interventions: Vec<InterventionRecord>,
    /// State changes in node order; a node may contribute two hops.
    pub hops: Vec<Hop>,
}

/// Draws `n_messages` senders uniformly with replacement. Only infected
/// senders carry a toxicity score; everyone else sends a safe message.
pub fn sm_generate_messages<R: Rng + ?Sized>(
    snapshot: &[UserState],
    profiles: &ProfileTable,
    params: &SmParams,
    timestep: u64,
    rng: &mut R,
) -> Vec<Message> {
    let n = snapshot.len();
    assert!(n > 0, "population must be nonempty");
    (0..params.n_messages)
        .map(|_| {
            let sender = rng.gen_range(0..n);
            if snapshot[sender] == UserState::Infected {
                let score = profiles.darkness(sender);
                Message {
                    sender,
                    timestep,
                    score,
                    is_toxic: classify_toxic(score, params.toxicity_threshold),
                }
            } else {
                Message {
                    sender,
                    timestep,
                    score: 0.0,
                    is_toxic: false,
                }
            }
        })
        .collect()
}

/// One synchronous smart-moderator step.
///
/// Order: message generation and counter update, diffusion from this step's
/// active senders (see [`DiffusionSource`]), threshold-triggered moderation,
/// then `E -> Z` for nodes that were exposed at the start of the step or were
/// demoted by the moderator in this step.
pub fn sm_step(
    snapshot: &[UserState],
    profiles: &ProfileTable,
    g: &Graph,
    params: &SmParams,
    ledger: &mut ModeratorLedger,
    rng: StepRng,
) -> SmStepOutcome {
    let n = snapshot.len();
    let messages = sm_generate_messages(snapshot, profiles, params, rng.iteration, &mut rng.messages());
    let mut active = vec![false; n];
    for msg in &messages {
        if msg.is_toxic {
            ledger.toxic_count[msg.sender] += 1;
        }
        active[msg.sender] |= match params.diffusion_source {
            DiffusionSource::InfectedSenders => snapshot[msg.sender] == UserState::Infected,
            DiffusionSource::FlaggedSenders => msg.is_toxic,
        };
    }

    let counts = &ledger.toxic_count;
    let outcomes: Vec<NodeOutcome> = (0..n)
        .into_par_iter()
        .map(|u| sm_node(u, snapshot, profiles, g, params, &active, counts[u], rng))
        .collect();

    let mut next = Vec::with_capacity(n);
    let mut hops = Vec::new();
    let mut interventions = Vec::new();
    for (u, o) in outcomes.iter().enumerate() {
        if let Some(outcome) = o.intervention {
            ledger.toxic_count[u] = 0;
            let rec = InterventionRecord {
                iteration: rng.iteration,
                node: u,
                outcome,
            };
            ledger.interventions.push(rec);
            interventions.push(rec);
        }
        o.push_hops(u, snapshot[u], &mut hops);
        next.push(o.next);
    }
    SmStepOutcome {
        next,
        messages,
        interventions,
        hops,
    }
}

#[allow(clippy::too_many_arguments)]
fn sm_node(
    u: usize,
    snapshot: &[UserState],
    profiles: &ProfileTable,
    g: &Graph,
    params: &SmParams,
    active: &[bool],
    toxic_count: u32,
    rng: StepRng,
) -> NodeOutcome {
    let mut rng = rng.node(u);
    let darkness = profiles.darkness(u);
    let scale = params.infection_scale(darkness);
    let is_source = |v: usize| active[v];
    match snapshot[u] {
        UserState::Susceptible => NodeOutcome::plain(step_susceptible(
            u, snapshot, g, &params.base, is_source, scale, &mut rng,
        )),
        UserState::Exposed => {
            match step_exposed(u, g, &params.base, is_source, scale, &mut rng) {
                UserState::Exposed if rng.gen_bool(params.lambda) => {
                    NodeOutcome::plain(UserState::Skeptic)
                }
                s => NodeOutcome::plain(s),
            }
        }
        UserState::Infected if toxic_count >= params.theta => {
            if rng.gen_bool(params.reversion_probability(darkness)) {
                let skeptic = rng.gen_bool(params.lambda);
                NodeOutcome {
                    next: if skeptic { UserState::Skeptic } else { UserState::Exposed },
                    via: skeptic.then_some(UserState::Exposed),
                    intervention: Some(InterventionOutcome::Reverted),
                }
            } else {
                NodeOutcome {
                    next: UserState::Infected,
                    via: None,
                    intervention: Some(InterventionOutcome::Resisted),
                }
            }
        }
        s => NodeOutcome::plain(s),
    }
}
