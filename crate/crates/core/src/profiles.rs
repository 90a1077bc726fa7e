//! Dark Triad user profiles and message toxicity.

use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// Narcissism, Machiavellianism and Psychopathy scores, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkTriadProfile {
    pub narcissism: f64,
    pub machiavellianism: f64,
    pub psychopathy: f64,
}

impl DarkTriadProfile {
    pub fn new(narcissism: f64, machiavellianism: f64, psychopathy: f64) -> Result<Self> {
        check_unit("narcissism", narcissism)?;
        check_unit("machiavellianism", machiavellianism)?;
        check_unit("psychopathy", psychopathy)?;
        Ok(Self {
            narcissism,
            machiavellianism,
            psychopathy,
        })
    }

    /// Mean of the three traits. Same value as [`message_toxicity`].
    pub fn darkness(&self) -> f64 {
        message_toxicity(self)
    }
}

/// Toxicity score of any message sent by a user with this profile.
pub fn message_toxicity(profile: &DarkTriadProfile) -> f64 {
    (profile.narcissism + profile.machiavellianism + profile.psychopathy) / 3.0
}

/// Inclusive threshold test: `score >= threshold`.
pub fn classify_toxic(score: f64, threshold: f64) -> bool {
    score >= threshold
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraitDistribution {
    #[default]
    Uniform,
    Beta { alpha: f64, beta: f64 },
}

impl TraitDistribution {
    pub fn validate(&self) -> Result<()> {
        if let TraitDistribution::Beta { alpha, beta } = *self {
            for (name, v) in [("alpha", alpha), ("beta", beta)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::ParamDomain {
                        name: name.to_string(),
                        range: "(0, inf)",
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Reusable trait sampler; build once per population.
#[derive(Debug, Clone, Copy)]
pub enum TraitSampler {
    Uniform,
    Beta(Beta<f64>),
}

impl TraitSampler {
    pub fn new(dist: TraitDistribution) -> Result<Self> {
        dist.validate()?;
        Ok(match dist {
            TraitDistribution::Uniform => TraitSampler::Uniform,
            TraitDistribution::Beta { alpha, beta } => TraitSampler::Beta(
                Beta::new(alpha, beta).map_err(|e| Error::Config(format!("profiles: {e}")))?,
            ),
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TraitSampler::Uniform => rng.gen::<f64>(),
            TraitSampler::Beta(b) => b.sample(rng),
        }
    }

    /// Draws the three traits independently.
    pub fn sample_profile<R: Rng + ?Sized>(&self, rng: &mut R) -> DarkTriadProfile {
        DarkTriadProfile {
            narcissism: self.draw(rng),
            machiavellianism: self.draw(rng),
            psychopathy: self.draw(rng),
        }
    }
}

/// Fixed per-node profiles with their cached darkness scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    profiles: Vec<DarkTriadProfile>,
    darkness: Vec<f64>,
}

impl ProfileTable {
    pub fn new(profiles: Vec<DarkTriadProfile>) -> Self {
        let darkness = profiles.iter().map(message_toxicity).collect();
        Self { profiles, darkness }
    }

    pub fn sample<R: Rng + ?Sized>(
        node_count: usize,
        dist: TraitDistribution,
        rng: &mut R,
    ) -> Result<Self> {
        let sampler = TraitSampler::new(dist)?;
        Ok(Self::new(
            (0..node_count).map(|_| sampler.sample_profile(rng)).collect(),
        ))
    }

    /// Every node gets the same profile.
    pub fn uniform(node_count: usize, profile: DarkTriadProfile) -> Self {
        Self::new(vec![profile; node_count])
    }

    /// Reads a `node,p1,p2,p3` CSV that lists every node exactly once.
    pub fn read_csv(path: &Path, node_count: usize) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, node_count)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R, node_count: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            node: usize,
            p1: f64,
            p2: f64,
            p3: f64,
        }

        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != ["node", "p1", "p2", "p3"] {
            return Err(Error::Parse {
                line: 1,
                message: "expected header node,p1,p2,p3".into(),
            });
        }
        let mut slots: Vec<Option<DarkTriadProfile>> = vec![None; node_count];
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let profile = DarkTriadProfile::new(row.p1, row.p2, row.p3)
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let slot = slots.get_mut(row.node).ok_or(Error::NodeOutOfRange {
                node: row.node,
                node_count,
            })?;
            if slot.replace(profile).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate profile for node {}", row.node),
                });
            }
        }
        let profiles = slots
            .into_iter()
            .enumerate()
            .map(|(node, p)| {
                p.ok_or_else(|| Error::Validation(format!("no profile for node {node}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(profiles))
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profile(&self, node: usize) -> &DarkTriadProfile {
        &self.profiles[node]
    }

    #[inline]
    pub fn darkness(&self, node: usize) -> f64 {
        self.darkness[node]
    }

    pub fn profiles(&self) -> &[DarkTriadProfile] {
        &self.profiles
    }
}
