//! Replicated parameter sweeps and cross-seed aggregation.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{GridAxis, SimulationConfig, SweepSection};
use crate::engine::{run_trends, TrendSeries};
use crate::error::{Error, Result};
use crate::models::UserState;

/// One grid point: parameter assignments applied on top of the base config.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub assignments: Vec<(String, toml::Value)>,
    pub config: SimulationConfig,
}

impl Cell {
    /// `path=value` pairs joined by `;`.
    pub fn label(&self) -> String {
        assignment_label(&self.assignments)
    }
}

fn assignment_label(assignments: &[(String, toml::Value)]) -> String {
    assignments
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SimulationConfig,
    pub cells: Vec<Cell>,
    pub replications: usize,
    pub seed_base: u64,
    pub final_window: usize,
}

impl SweepSpec {
    /// Expands explicit cells crossed with the cartesian product of the
    /// grid axes. With neither, the sweep has the base config as its only
    /// cell.
    pub fn new(
        base: SimulationConfig,
        grid: &[GridAxis],
        explicit: &[Vec<(String, toml::Value)>],
        replications: usize,
        seed_base: u64,
        final_window: usize,
    ) -> Result<Self> {
        if replications == 0 {
            return Err(Error::Config("sweep.replications must be at least 1".into()));
        }
        if final_window == 0 || final_window > base.run.max_iterations + 1 {
            return Err(Error::Config(format!(
                "sweep.final_window must be in [1, {}], got {final_window}",
                base.run.max_iterations + 1
            )));
        }
        for axis in grid {
            if axis.values.is_empty() {
                return Err(Error::Config(format!("grid axis {} has no values", axis.param)));
            }
        }

        let mut combos: Vec<Vec<(String, toml::Value)>> = if explicit.is_empty() {
            vec![Vec::new()]
        } else {
            explicit.to_vec()
        };
        for axis in grid {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |v| {
                        let mut c = prefix.clone();
                        c.push((axis.param.clone(), v.clone()));
                        c
                    })
                })
                .collect();
        }

        let cells = combos
            .into_iter()
            .enumerate()
            .map(|(id, assignments)| {
                let mut config = base.clone();
                for (path, value) in &assignments {
                    config.set_param(path, value)?;
                }
                config.validate().map_err(|e| {
                    Error::Config(format!("cell {id} ({}): {e}", assignment_label(&assignments)))
                })?;
                Ok(Cell {
                    id,
                    assignments,
                    config,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            base,
            cells,
            replications,
            seed_base,
            final_window,
        })
    }

    pub fn from_config(base: SimulationConfig, sweep: &SweepSection) -> Result<Self> {
        let explicit: Vec<Vec<(String, toml::Value)>> = sweep
            .cells
            .iter()
            .map(|t| t.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .collect();
        Self::new(
            base,
            &sweep.grid,
            &explicit,
            sweep.replications,
            sweep.seed_base,
            sweep.final_window,
        )
    }

    /// Seed of replication `r`; identical for every cell.
    pub fn seed(&self, replication: usize) -> u64 {
        self.seed_base.wrapping_add(replication as u64)
    }

    pub fn cell_config(&self, cell: &Cell, replication: usize) -> SimulationConfig {
        let mut c = cell.config.clone();
        c.run.seed = self.seed(replication);
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FinalInfected,
    FinalSkeptic,
    PeakInfected,
}

/// Mean, sample standard deviation and count of a scalar across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn standard_error(&self) -> f64 {
        self.std / (self.n as f64).sqrt()
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn summary(&self) -> Summary {
        let var = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        Summary {
            mean: self.mean,
            std: var.sqrt(),
            n: self.n,
        }
    }
}

fn summarize(xs: impl IntoIterator<Item = f64>) -> Summary {
    let mut r = Running::default();
    xs.into_iter().for_each(|x| r.push(x));
    r.summary()
}

/// Per-replication scalar outcomes of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Mean of each state fraction over the final window.
    pub final_window: [f64; 4],
    pub peak_infected: f64,
}

impl RunMetrics {
    pub fn from_trend(trend: &TrendSeries, window: usize) -> Self {
        let start = trend.len() - window;
        let mut acc = [0.0f64; 4];
        for t in start..trend.len() {
            let f = trend.fractions(t);
            for s in 0..4 {
                acc[s] += f[s];
            }
        }
        Self {
            final_window: acc.map(|a| a / window as f64),
            peak_infected: trend
                .series(UserState::Infected)
                .into_iter()
                .fold(0.0, f64::max),
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::FinalInfected => self.final_window[UserState::Infected.index()],
            Metric::FinalSkeptic => self.final_window[UserState::Skeptic.index()],
            Metric::PeakInfected => self.peak_infected,
        }
    }
}

/// Cross-replication statistics of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrend {
    pub cell_id: usize,
    pub assignments: Vec<(String, toml::Value)>,
    pub replications: usize,
    pub final_window: usize,
    /// Per iteration, per state (`S, E, I, Z`) mean fraction.
    pub mean: Vec<[f64; 4]>,
    /// Per iteration, per state sample standard deviation.
    pub std: Vec<[f64; 4]>,
    pub runs: Vec<RunMetrics>,
}

impl AggregateTrend {
    /// Streaming reduction over replication trends, in replication order.
    pub fn from_trends(
        cell_id: usize,
        assignments: Vec<(String, toml::Value)>,
        trends: &[TrendSeries],
        final_window: usize,
    ) -> Result<Self> {
        let Some(first) = trends.first() else {
            return Err(Error::Dimension("no replications to aggregate".into()));
        };
        let len = first.len();
        if trends.iter().any(|t| t.len() != len) {
            return Err(Error::Dimension("replications differ in length".into()));
        }
        let mut acc = vec![[Running::default(); 4]; len];
        for trend in trends {
            for (t, slot) in acc.iter_mut().enumerate() {
                let f = trend.fractions(t);
                for s in 0..4 {
                    slot[s].push(f[s]);
                }
            }
        }
        Ok(Self {
            cell_id,
            assignments,
            replications: trends.len(),
            final_window,
            mean: acc.iter().map(|a| a.map(|r| r.summary().mean)).collect(),
            std: acc.iter().map(|a| a.map(|r| r.summary().std)).collect(),
            runs: trends
                .iter()
                .map(|t| RunMetrics::from_trend(t, final_window))
                .collect(),
        })
    }

    pub fn label(&self) -> String {
        assignment_label(&self.assignments)
    }

    pub fn iterations(&self) -> usize {
        self.mean.len()
    }

    pub fn metric(&self, metric: Metric) -> Summary {
        summarize(self.runs.iter().map(|r| r.get(metric)))
    }

    /// Final-window mean fraction of `state`, averaged over replications.
    pub fn final_mean(&self, state: UserState) -> f64 {
        summarize(self.runs.iter().map(|r| r.final_window[state.index()])).mean
    }

    pub fn final_summary(&self, state: UserState) -> Summary {
        summarize(self.runs.iter().map(|r| r.final_window[state.index()]))
    }

    /// Looks up an assignment by path.
    pub fn assignment(&self, path: &str) -> Option<&toml::Value> {
        self.assignments.iter().find(|(k, _)| k == path).map(|(_, v)| v)
    }
}

/// Runs every cell `replications` times and aggregates. Cells and
/// replications run in parallel; results do not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<AggregateTrend>> {
    let jobs: Vec<(usize, usize)> = (0..spec.cells.len())
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    let trends = jobs
        .par_iter()
        .map(|&(c, r)| run_trends(&spec.cell_config(&spec.cells[c], r)))
        .collect::<Result<Vec<_>>>()?;
    spec.cells
        .iter()
        .zip(trends.chunks(spec.replications))
        .map(|(cell, runs)| {
            AggregateTrend::from_trends(cell.id, cell.assignments.clone(), runs, spec.final_window)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: Metric,
    pub a: Summary,
    pub b: Summary,
    /// `a.mean - b.mean`.
    pub difference: f64,
    /// `sqrt(se_a^2 + se_b^2)`.
    pub pooled_se: f64,
    pub significant: bool,
}

pub fn compare_cells(a: &AggregateTrend, b: &AggregateTrend, metric: Metric) -> Result<Comparison> {
    if a.iterations() != b.iterations() || a.replications != b.replications {
        return Err(Error::Dimension(format!(
            "cells {} and {} differ: {}x{} vs {}x{} (iterations x replications)",
            a.cell_id,
            b.cell_id,
            a.iterations(),
            a.replications,
            b.iterations(),
            b.replications
        )));
    }
    let (sa, sb) = (a.metric(metric), b.metric(metric));
    let difference = sa.mean - sb.mean;
    let pooled_se = (sa.standard_error().powi(2) + sb.standard_error().powi(2)).sqrt();
    Ok(Comparison {
        metric,
        a: sa,
        b: sb,
        difference,
        pooled_se,
        significant: difference.abs() > pooled_se,
    })
}

/// Long format: `cell_id,param_assignments,iteration,state,mean,std`.
pub fn trends_csv(cells: &[AggregateTrend]) -> String {
    let mut out = String::from("cell_id,param_assignments,iteration,state,mean,std\n");
    for cell in cells {
        let label = cell.label();
        for t in 0..cell.iterations() {
            for s in UserState::ALL {
                let i = s.index();
                let _ = writeln!(out, "{},{label},{t},{s},{},{}", cell.cell_id, cell.mean[t][i], cell.std[t][i]);
            }
        }
    }
    out
}

/// One row per cell with final-window and peak metrics.
pub fn summary_csv(cells: &[AggregateTrend]) -> String {
    let mut out = String::from("cell_id,param_assignments,replications,final_window");
    for s in UserState::ALL {
        let _ = write!(out, ",final_{s}_mean,final_{s}_std");
    }
    out.push_str(",peak_I_mean,peak_I_std\n");
    for cell in cells {
        let _ = write!(out, "{},{},{},{}", cell.cell_id, cell.label(), cell.replications, cell.final_window);
        for s in UserState::ALL {
            let sum = cell.final_summary(s);
            let _ = write!(out, ",{},{}", sum.mean, sum.std);
        }
        let peak = cell.metric(Metric::PeakInfected);
        let _ = writeln!(out, ",{},{}", peak.mean, peak.std);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Variant;

    fn base(variant: Variant) -> SimulationConfig {
        let mut c = SimulationConfig::default();
        c.model.variant = variant;
        c.graph.nodes = 200;
        c.graph.edge_prob = 0.05;
        c.run.max_iterations = 30;
        c
    }

    fn axis(param: &str, values: &[f64]) -> GridAxis {
        GridAxis {
            param: param.into(),
            values: values.iter().map(|&v| toml::Value::Float(v)).collect(),
        }
    }

    #[test]
    fn grid_expansion() {
        let spec = SweepSpec::new(
            base(Variant::BasicModerator),
            &[axis("model.mu", &[0.0, 0.5]), axis("model.m", &[0.1, 0.2, 0.3])],
            &[],
            2,
            0,
            10,
        )
        .unwrap();
        assert_eq!(spec.cells.len(), 6);
        assert_eq!(spec.cells[4].label(), "model.mu=0.5;model.m=0.2");
        assert_eq!(spec.cells[4].config.model.m, 0.2);
    }

    #[test]
    fn bad_path_is_named() {
        let err = SweepSpec::new(base(Variant::Seiz), &[axis("model.gamma", &[0.1])], &[], 1, 0, 10)
            .unwrap_err();
        assert!(err.to_string().contains("model.gamma"));
        let err = SweepSpec::new(base(Variant::Seiz), &[axis("model.beta", &[2.0])], &[], 1, 0, 10)
            .unwrap_err();
        assert!(err.to_string().contains("beta"));
        assert!(SweepSpec::new(base(Variant::Seiz), &[], &[], 0, 0, 10).is_err());
        assert!(SweepSpec::new(base(Variant::Seiz), &[], &[], 1, 0, 32).is_err());
    }

    #[test]
    fn single_run_aggregate_has_zero_std() {
        let b = base(Variant::SmartModerator);
        let spec = SweepSpec::new(b.clone(), &[], &[], 1, 42, 10).unwrap();
        let agg = run_sweep(&spec).unwrap();
        assert_eq!(agg.len(), 1);
        let mut c = b;
        c.run.seed = 42;
        let trend = run_trends(&c).unwrap();
        for t in 0..trend.len() {
            assert_eq!(agg[0].mean[t], trend.fractions(t));
            assert_eq!(agg[0].std[t], [0.0; 4]);
        }
    }

    #[test]
    fn aggregation_matches_two_pass() {
        let spec = SweepSpec::new(base(Variant::BasicModerator), &[], &[], 7, 3, 10).unwrap();
        let agg = &run_sweep(&spec).unwrap()[0];
        let runs: Vec<TrendSeries> = (0..7)
            .map(|r| run_trends(&spec.cell_config(&spec.cells[0], r)).unwrap())
            .collect();
        let n = runs.len() as f64;
        for t in 0..agg.iterations() {
            let mut total = 0.0;
            for s in 0..4 {
                let xs: Vec<f64> = runs.iter().map(|r| r.fractions(t)[s]).collect();
                let mean = xs.iter().sum::<f64>() / n;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                assert!((agg.mean[t][s] - mean).abs() < 1e-9);
                assert!((agg.std[t][s] - var.sqrt()).abs() < 1e-9);
                assert!(agg.std[t][s] >= 0.0);
                total += agg.mean[t][s];
            }
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cells_are_independent_of_grid_position() {
        let b = base(Variant::BasicModerator);
        let full = SweepSpec::new(b.clone(), &[axis("model.mu", &[0.0, 0.5, 0.9])], &[], 3, 0, 10).unwrap();
        let sub = SweepSpec::new(b, &[axis("model.mu", &[0.9])], &[], 3, 0, 10).unwrap();
        let full = run_sweep(&full).unwrap();
        let sub = run_sweep(&sub).unwrap();
        assert_eq!(full[2].mean, sub[0].mean);
        assert_eq!(full[2].runs, sub[0].runs);
    }

    #[test]
    fn comparison_properties() {
        let spec = SweepSpec::new(
            base(Variant::BasicModerator),
            &[axis("model.mu", &[0.0, 0.9])],
            &[],
            4,
            0,
            10,
        )
        .unwrap();
        let agg = run_sweep(&spec).unwrap();
        let same = compare_cells(&agg[0], &agg[0], Metric::FinalInfected).unwrap();
        assert_eq!(same.difference, 0.0);
        assert!(!same.significant);
        for metric in [Metric::FinalInfected, Metric::FinalSkeptic, Metric::PeakInfected] {
            let ab = compare_cells(&agg[0], &agg[1], metric).unwrap();
            let ba = compare_cells(&agg[1], &agg[0], metric).unwrap();
            assert_eq!(ab.difference, -ba.difference);
            assert_eq!(ab.significant, ba.significant);
        }

        let other = SweepSpec::new(base(Variant::BasicModerator), &[], &[], 2, 0, 10).unwrap();
        let other = run_sweep(&other).unwrap();
        assert!(matches!(
            compare_cells(&agg[0], &other[0], Metric::FinalInfected),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn csv_shapes() {
        let spec = SweepSpec::new(base(Variant::Seiz), &[axis("model.beta", &[0.1, 0.2])], &[], 2, 0, 5).unwrap();
        let agg = run_sweep(&spec).unwrap();
        let long = trends_csv(&agg);
        assert_eq!(long.lines().count(), 1 + 2 * 31 * 4);
        assert!(long.starts_with("cell_id,param_assignments,iteration,state,mean,std\n"));
        assert!(long.contains("\n1,model.beta=0.2,0,S,"));
        let summary = summary_csv(&agg);
        assert_eq!(summary.lines().count(), 3);
    }
}
