//! Per-timestep transition rules for SEIZ and its two moderated variants.
//!
//! All rules are synchronous: every node reads the previous-iteration
//! snapshot and the new assignment is committed at once.

mod basic;
mod seiz;
mod smart;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

pub use basic::{bm_step_node, bm_step_node_detailed};
pub use seiz::seiz_step_node;
pub use smart::{
    sm_generate_messages, sm_step, InterventionOutcome, InterventionRecord, Message,
    ModeratorLedger, SmStepOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserState {
    #[serde(rename = "S")]
    Susceptible,
    #[serde(rename = "E")]
    Exposed,
    #[serde(rename = "I")]
    Infected,
    #[serde(rename = "Z")]
    Skeptic,
}

impl UserState {
    pub const ALL: [UserState; 4] = [
        UserState::Susceptible,
        UserState::Exposed,
        UserState::Infected,
        UserState::Skeptic,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> &'static str {
        match self {
            UserState::Susceptible => "S",
            UserState::Exposed => "E",
            UserState::Infected => "I",
            UserState::Skeptic => "Z",
        }
    }
}

impl fmt::Display for UserState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "seiz")]
    Seiz,
    #[serde(rename = "seiz-bm")]
    BasicModerator,
    #[serde(rename = "seiz-sm")]
    SmartModerator,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Seiz => "seiz",
            Variant::BasicModerator => "seiz-bm",
            Variant::SmartModerator => "seiz-sm",
        }
    }

    /// Whether a single logged hop `from -> to` is permitted.
    pub fn is_legal(self, from: UserState, to: UserState) -> bool {
        use UserState::*;
        let base = matches!(
            (from, to),
            (Susceptible, Exposed) | (Susceptible, Infected) | (Susceptible, Skeptic) | (Exposed, Infected)
        );
        base || match self {
            Variant::Seiz => false,
            Variant::BasicModerator => (from, to) == (Infected, Susceptible),
            Variant::SmartModerator => matches!((from, to), (Infected, Exposed) | (Exposed, Skeptic)),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seiz" => Ok(Variant::Seiz),
            "seiz-bm" => Ok(Variant::BasicModerator),
            "seiz-sm" => Ok(Variant::SmartModerator),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

/// Baseline SEIZ rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeizParams {
    /// S-I contact rate.
    pub beta: f64,
    /// S-Z contact rate.
    pub b: f64,
    /// E-I contact rate.
    pub rho: f64,
    /// P(S -> I | S-I contact); the complement goes to E.
    pub p: f64,
    /// P(S -> Z | S-Z contact); the complement goes to E.
    pub l: f64,
    /// Spontaneous E -> I rate.
    pub epsilon: f64,
}

impl SeizParams {
    /// The fixed rates used throughout the reference experiments.
    pub const REFERENCE: SeizParams = SeizParams {
        beta: 0.3,
        b: 0.3,
        rho: 0.3,
        p: 0.3,
        l: 0.9,
        epsilon: 0.3,
    };

    pub fn validate(&self) -> Result<()> {
        check_unit("beta", self.beta)?;
        check_unit("b", self.b)?;
        check_unit("rho", self.rho)?;
        check_unit("p", self.p)?;
        check_unit("l", self.l)?;
        check_unit("epsilon", self.epsilon)
    }
}

impl Default for SeizParams {
    fn default() -> Self {
        Self::REFERENCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmParams {
    pub base: SeizParams,
    /// Per-step probability that the moderator messages an infected user.
    pub mu: f64,
    /// P(I -> S | intervention).
    pub m: f64,
}

impl BmParams {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        check_unit("mu", self.mu)?;
        check_unit("m", self.m)
    }
}

/// Which message senders act as infection sources in the smart-moderator
/// variant during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionSource {
    /// Every infected user selected as a sender; the toxicity threshold only
    /// drives the moderator's classifier.
    #[default]
    InfectedSenders,
    /// Only senders of messages classified as toxic.
    FlaggedSenders,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmParams {
    pub base: SeizParams,
    /// Messages generated per timestep.
    pub n_messages: usize,
    /// Toxic-message count that triggers an intervention.
    pub theta: u32,
    /// Toxicity classification threshold.
    pub toxicity_threshold: f64,
    /// Base P(I -> E | intervention).
    pub eta: f64,
    /// Per-step P(E -> Z).
    pub lambda: f64,
    /// Scale infection and reversion probabilities by user darkness.
    pub modulation: bool,
    pub diffusion_source: DiffusionSource,
}

impl SmParams {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.n_messages == 0 {
            return Err(Error::ParamDomain {
                name: "n_messages".into(),
                range: "[1, inf)",
                value: 0.0,
            });
        }
        if self.theta == 0 {
            return Err(Error::ParamDomain {
                name: "theta".into(),
                range: "[1, inf)",
                value: 0.0,
            });
        }
        check_unit("toxicity_threshold", self.toxicity_threshold)?;
        check_unit("eta", self.eta)?;
        check_unit("lambda", self.lambda)
    }

    /// Multiplier on infection probabilities for a node with darkness `d`.
    #[inline]
    pub fn infection_scale(&self, darkness: f64) -> f64 {
        if self.modulation {
            (1.0 + darkness) / 2.0
        } else {
            1.0
        }
    }

    /// Effective reversion probability after an intervention.
    #[inline]
    pub fn reversion_probability(&self, darkness: f64) -> f64 {
        if self.modulation {
            self.eta * (1.0 - darkness)
        } else {
            self.eta
        }
    }
}

/// One state change of one node. A node may log up to two hops in a single
/// step (smart moderator: `I -> E` followed by `E -> Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub node: usize,
    pub from: UserState,
    pub to: UserState,
}

/// Per-node result of a synchronous step, before commit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NodeOutcome {
    pub next: UserState,
    /// Intermediate state when the node made two hops.
    pub via: Option<UserState>,
    pub intervention: Option<InterventionOutcome>,
}

impl NodeOutcome {
    pub fn plain(next: UserState) -> Self {
        Self {
            next,
            via: None,
            intervention: None,
        }
    }

    pub fn push_hops(&self, node: usize, from: UserState, out: &mut Vec<Hop>) {
        let mut cur = from;
        for to in self.via.into_iter().chain(std::iter::once(self.next)) {
            if to != cur {
                out.push(Hop { node, from: cur, to });
                cur = to;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use UserState::*;

    #[test]
    fn legal_sets() {
        let all = UserState::ALL;
        let count = |v: Variant| {
            all.iter()
                .flat_map(|&a| all.iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| v.is_legal(a, b))
                .count()
        };
        assert_eq!(count(Variant::Seiz), 4);
        assert_eq!(count(Variant::BasicModerator), 5);
        assert_eq!(count(Variant::SmartModerator), 6);
        assert!(Variant::BasicModerator.is_legal(Infected, Susceptible));
        assert!(!Variant::SmartModerator.is_legal(Infected, Susceptible));
        assert!(!Variant::SmartModerator.is_legal(Infected, Skeptic));
        for v in [Variant::Seiz, Variant::BasicModerator, Variant::SmartModerator] {
            for to in all {
                assert!(!v.is_legal(Skeptic, to));
            }
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [Variant::Seiz, Variant::BasicModerator, Variant::SmartModerator] {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("sir".parse::<Variant>().is_err());
    }

    #[test]
    fn hops_expand_two_step_path() {
        let mut out = Vec::new();
        let o = NodeOutcome {
            next: Skeptic,
            via: Some(Exposed),
            intervention: None,
        };
        o.push_hops(4, Infected, &mut out);
        assert_eq!(
            out,
            vec![
                Hop { node: 4, from: Infected, to: Exposed },
                Hop { node: 4, from: Exposed, to: Skeptic }
            ]
        );
        out.clear();
        NodeOutcome::plain(Infected).push_hops(1, Infected, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn sm_validation() {
        let mut p = SmParams {
            base: SeizParams::REFERENCE,
            n_messages: 150,
            theta: 2,
            toxicity_threshold: 0.5,
            eta: 0.9,
            lambda: 0.05,
            modulation: true,
            diffusion_source: DiffusionSource::InfectedSenders,
        };
        assert!(p.validate().is_ok());
        p.theta = 0;
        assert!(p.validate().is_err());
        p.theta = 1;
        p.toxicity_threshold = 1.2;
        assert!(p.validate().is_err());
    }
}
