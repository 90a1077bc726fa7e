use rand::Rng;

use super::seiz::seiz_step_node;
use super::smart::InterventionOutcome;
use super::{BmParams, UserState};
use crate::graph::Graph;

/// Next state of `u` under SEIZ with a profile-agnostic moderator.
pub fn bm_step_node<R: Rng + ?Sized>(
    u: usize,
    snapshot: &[UserState],
    g: &Graph,
    params: &BmParams,
    rng: &mut R,
) -> UserState {
    bm_step_node_detailed(u, snapshot, g, params, rng).0
}

/// Like [`bm_step_node`], also reporting whether the moderator intervened.
pub fn bm_step_node_detailed<R: Rng + ?Sized>(
    u: usize,
    snapshot: &[UserState],
    g: &Graph,
    params: &BmParams,
    rng: &mut R,
) -> (UserState, Option<InterventionOutcome>) {
    if snapshot[u] != UserState::Infected {
        return (seiz_step_node(u, snapshot, g, &params.base, rng), None);
    }
    if !rng.gen_bool(params.mu) {
        return (UserState::Infected, None);
    }
    if rng.gen_bool(params.m) {
        (UserState::Susceptible, Some(InterventionOutcome::Reverted))
    } else {
        (UserState::Infected, Some(InterventionOutcome::Resisted))
    }
}
