use rand::seq::SliceRandom;
use rand::Rng;

use super::{SeizParams, UserState};
use crate::graph::Graph;

/// Next state of `u` under baseline SEIZ. Infected and Skeptic are absorbing.
pub fn seiz_step_node<R: Rng + ?Sized>(
    u: usize,
    snapshot: &[UserState],
    g: &Graph,
    params: &SeizParams,
    rng: &mut R,
) -> UserState {
    let source = |v: usize| snapshot[v] == UserState::Infected;
    match snapshot[u] {
        UserState::Susceptible => step_susceptible(u, snapshot, g, params, source, 1.0, rng),
        UserState::Exposed => step_exposed(u, g, params, source, 1.0, rng),
        s => s,
    }
}

/// Susceptible contact rule. Eligible neighbors (infected sources and
/// skeptics) are visited in random order, each contact is an independent
/// trial and the first trial that fires decides the outcome.
///
/// `is_source` gates which infected neighbors can transmit; `infect_scale`
/// multiplies the direct-infection probability `p`.
pub(crate) fn step_susceptible<R, F>(
    u: usize,
    snapshot: &[UserState],
    g: &Graph,
    params: &SeizParams,
    is_source: F,
    infect_scale: f64,
    rng: &mut R,
) -> UserState
where
    R: Rng + ?Sized,
    F: Fn(usize) -> bool,
{
    let mut contacts: Vec<usize> = g
        .adj(u)
        .iter()
        .copied()
        .filter(|&v| match snapshot[v] {
            UserState::Infected => is_source(v),
            UserState::Skeptic => true,
            _ => false,
        })
        .collect();
    if contacts.is_empty() {
        return UserState::Susceptible;
    }
    contacts.shuffle(rng);
    for v in contacts {
        if snapshot[v] == UserState::Infected {
            if rng.gen_bool(params.beta) {
                return if rng.gen_bool(params.p * infect_scale) {
                    UserState::Infected
                } else {
                    UserState::Exposed
                };
            }
        } else if rng.gen_bool(params.b) {
            return if rng.gen_bool(params.l) {
                UserState::Skeptic
            } else {
                UserState::Exposed
            };
        }
    }
    UserState::Susceptible
}

/// Exposed rule: one `rho` trial per infected source neighbor, then the
/// spontaneous `epsilon` fallback. Every trigger leads to Infected, so the
/// visiting order does not matter.
pub(crate) fn step_exposed<R, F>(
    u: usize,
    g: &Graph,
    params: &SeizParams,
    is_source: F,
    infect_scale: f64,
    rng: &mut R,
) -> UserState
where
    R: Rng + ?Sized,
    F: Fn(usize) -> bool,
{
    let rho = params.rho * infect_scale;
    for &v in g.adj(u) {
        if is_source(v) && rng.gen_bool(rho) {
            return UserState::Infected;
        }
    }
    if rng.gen_bool(params.epsilon * infect_scale) {
        UserState::Infected
    } else {
        UserState::Exposed
    }
}
