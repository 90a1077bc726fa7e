//! TOML configuration for single runs and sweeps.
//!
//! A file has up to four sections: `[graph]`, `[model]`, `[run]` and
//! `[sweep]`. Every key has a default and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::models::{BmParams, DiffusionSource, SeizParams, SmParams, Variant};
use crate::profiles::TraitDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    ErdosRenyi,
    EdgeList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub nodes: usize,
    pub edge_prob: f64,
    /// Edge-list file, required when `kind = "edge-list"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            kind: GraphKind::ErdosRenyi,
            nodes: 1000,
            edge_prob: 0.01,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Uniform,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub distribution: DistributionKind,
    pub alpha: f64,
    pub beta: f64,
    /// `node,p1,p2,p3` file; overrides sampling when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            distribution: DistributionKind::Uniform,
            alpha: 1.0,
            beta: 1.0,
            csv: None,
        }
    }
}

impl ProfileConfig {
    pub fn trait_distribution(&self) -> TraitDistribution {
        match self.distribution {
            DistributionKind::Uniform => TraitDistribution::Uniform,
            DistributionKind::Beta => TraitDistribution::Beta {
                alpha: self.alpha,
                beta: self.beta,
            },
        }
    }
}

/// Union of all variant parameters; `variant` selects which are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    pub beta: f64,
    pub b: f64,
    pub rho: f64,
    pub p: f64,
    pub l: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub m: f64,
    pub n_messages: usize,
    pub theta: u32,
    pub toxicity_threshold: f64,
    pub eta: f64,
    pub lambda: f64,
    pub modulation: bool,
    pub diffusion_source: DiffusionSource,
    pub profiles: ProfileConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let base = SeizParams::REFERENCE;
        Self {
            variant: Variant::Seiz,
            beta: base.beta,
            b: base.b,
            rho: base.rho,
            p: base.p,
            l: base.l,
            epsilon: base.epsilon,
            mu: 0.9,
            m: 0.3,
            n_messages: 150,
            theta: 2,
            toxicity_threshold: 0.5,
            eta: 0.9,
            lambda: 0.05,
            modulation: true,
            diffusion_source: DiffusionSource::InfectedSenders,
            profiles: ProfileConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn seiz(&self) -> SeizParams {
        SeizParams {
            beta: self.beta,
            b: self.b,
            rho: self.rho,
            p: self.p,
            l: self.l,
            epsilon: self.epsilon,
        }
    }

    pub fn basic(&self) -> BmParams {
        BmParams {
            base: self.seiz(),
            mu: self.mu,
            m: self.m,
        }
    }

    pub fn smart(&self) -> SmParams {
        SmParams {
            base: self.seiz(),
            n_messages: self.n_messages,
            theta: self.theta,
            toxicity_threshold: self.toxicity_threshold,
            eta: self.eta,
            lambda: self.lambda,
            modulation: self.modulation,
            diffusion_source: self.diffusion_source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub initial_infected_fraction: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            initial_infected_fraction: 0.05,
            max_iterations: 200,
            seed: 0,
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub graph: GraphSpec,
    pub model: ModelConfig,
    pub run: RunConfig,
}

impl SimulationConfig {
    /// Range checks; error messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        match g.kind {
            GraphKind::ErdosRenyi => {
                if g.nodes == 0 {
                    return Err(Error::Config("graph.nodes must be at least 1".into()));
                }
                in_section("graph", check_unit("edge_prob", g.edge_prob))?;
            }
            GraphKind::EdgeList => {
                if g.path.is_none() {
                    return Err(Error::Config(
                        "graph.path is required when graph.kind = \"edge-list\"".into(),
                    ));
                }
            }
        }

        let m = &self.model;
        in_section("model", m.seiz().validate())?;
        in_section("model", m.basic().validate())?;
        in_section("model", m.smart().validate())?;
        in_section("model.profiles", m.profiles.trait_distribution().validate())?;

        in_section(
            "run",
            check_unit("initial_infected_fraction", self.run.initial_infected_fraction),
        )?;
        if self.run.max_iterations == 0 {
            return Err(Error::Config("run.max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Sets a dotted parameter path such as `model.mu`. The path must name
    /// an existing key.
    pub fn set_param(&mut self, path: &str, value: &toml::Value) -> Result<()> {
        let mut root = toml::Value::try_from(&*self)
            .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
        let mut slot = &mut root;
        for key in path.split('.') {
            slot = slot
                .as_table_mut()
                .and_then(|t| t.get_mut(key))
                .ok_or_else(|| Error::Config(format!("unknown parameter path {path:?}")))?;
        }
        if slot.is_table() {
            return Err(Error::Config(format!("parameter path {path:?} names a section")));
        }
        *slot = value.clone();
        *self = root
            .try_into()
            .map_err(|e| Error::Config(format!("invalid value for {path}: {e}")))?;
        Ok(())
    }
}

fn in_section(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::ParamDomain { name, range, value } => {
            Error::Config(format!("{section}.{name} must be in {range}, got {value}"))
        }
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub param: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub replications: usize,
    pub seed_base: u64,
    pub final_window: usize,
    /// Axes combined as a cartesian product.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridAxis>,
    /// Explicit cells, each a table of `path = value` assignments. Crossed
    /// with `grid` when both are present.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<toml::Table>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            replications: 20,
            seed_base: 0,
            final_window: 50,
            grid: Vec::new(),
            cells: Vec::new(),
        }
    }
}

/// On-disk document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: GraphSpec,
    pub model: ModelConfig,
    pub run: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            graph: self.graph.clone(),
            model: self.model.clone(),
            run: self.run.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.simulation().validate()?;
        if let Some(sweep) = &self.sweep {
            crate::experiments::SweepSpec::from_config(self.simulation(), sweep)?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

impl From<SimulationConfig> for ConfigFile {
    fn from(c: SimulationConfig) -> Self {
        Self {
            graph: c.graph,
            model: c.model,
            run: c.run,
            sweep: None,
        }
    }
}
