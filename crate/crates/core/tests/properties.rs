use proptest::prelude::*;
use toxsim::config::SimulationConfig;
use toxsim::engine::{self, count_states};
use toxsim::graph::Graph;
use toxsim::models::{
    sm_generate_messages, DiffusionSource, SeizParams, SmParams, UserState, Variant,
};
use toxsim::profiles::ProfileTable;
use toxsim::rng::SimRng;
use rand::SeedableRng;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn seiz_params() -> impl Strategy<Value = SeizParams> {
    (unit(), unit(), unit(), unit(), unit(), unit()).prop_map(|(beta, b, rho, p, l, epsilon)| SeizParams {
        beta,
        b,
        rho,
        p,
        l,
        epsilon,
    })
}

fn config(variant: Variant, base: SeizParams, nodes: usize, seed: u64) -> SimulationConfig {
    let mut c = SimulationConfig::default();
    c.model.variant = variant;
    c.model.beta = base.beta;
    c.model.b = base.b;
    c.model.rho = base.rho;
    c.model.p = base.p;
    c.model.l = base.l;
    c.model.epsilon = base.epsilon;
    c.graph.nodes = nodes;
    c.graph.edge_prob = 0.08;
    c.run.max_iterations = 30;
    c.run.seed = seed;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bm_reduces_to_seiz_when_moderation_is_inert(
        base in seiz_params(), x in unit(), zero_mu in any::<bool>(), seed in any::<u64>()
    ) {
        let mut c = config(Variant::Seiz, base, 80, seed);
        let seiz = engine::run(&c).unwrap();
        c.model.variant = Variant::BasicModerator;
        (c.model.mu, c.model.m) = if zero_mu { (0.0, x) } else { (x, 0.0) };
        let bm = engine::run(&c).unwrap();
        prop_assert_eq!(&seiz.trends, &bm.trends);
        prop_assert_eq!(seiz.trajectory_hash(), bm.trajectory_hash());
    }

    #[test]
    fn skeptics_never_leave(
        base in seiz_params(), variant in 0usize..3, lambda in unit(), seed in any::<u64>()
    ) {
        let variant = [Variant::Seiz, Variant::BasicModerator, Variant::SmartModerator][variant];
        let mut c = config(variant, base, 80, seed);
        c.model.lambda = lambda;
        let r = engine::run(&c).unwrap();
        for (_, hop) in r.transitions() {
            prop_assert_ne!(hop.from, UserState::Skeptic);
            prop_assert!(variant.is_legal(hop.from, hop.to));
        }
        for counts in &r.trends.counts {
            prop_assert_eq!(counts.iter().sum::<usize>(), 80);
        }
        let mut last_z = 0;
        for counts in &r.trends.counts {
            prop_assert!(counts[UserState::Skeptic.index()] >= last_z);
            last_z = counts[UserState::Skeptic.index()];
        }
    }

    #[test]
    fn raising_threshold_never_adds_toxic_messages(
        t_lo in unit(), t_hi in unit(), seed in any::<u64>(), frac in unit()
    ) {
        let (t_lo, t_hi) = (t_lo.min(t_hi), t_lo.max(t_hi));
        let n = 60;
        let mut rng = SimRng::seed_from_u64(seed);
        let profiles = ProfileTable::sample(n, Default::default(), &mut rng).unwrap();
        let snapshot: Vec<_> = (0..n)
            .map(|i| if (i as f64) < frac * n as f64 { UserState::Infected } else { UserState::Susceptible })
            .collect();
        let params = |t| SmParams {
            base: SeizParams::REFERENCE,
            n_messages: 100,
            theta: 1,
            toxicity_threshold: t,
            eta: 0.5,
            lambda: 0.05,
            modulation: true,
            diffusion_source: DiffusionSource::InfectedSenders,
        };
        let count = |t| {
            sm_generate_messages(&snapshot, &profiles, &params(t), 0, &mut SimRng::seed_from_u64(seed))
                .iter()
                .filter(|m| m.is_toxic)
                .count()
        };
        prop_assert!(count(t_hi) <= count(t_lo));
    }

    #[test]
    fn messages_respect_sender_state(seed in any::<u64>(), t in unit()) {
        let n = 40;
        let mut rng = SimRng::seed_from_u64(seed);
        let profiles = ProfileTable::sample(n, Default::default(), &mut rng).unwrap();
        let snapshot: Vec<_> = (0..n).map(|i| UserState::ALL[i % 4]).collect();
        let p = SmParams {
            base: SeizParams::REFERENCE,
            n_messages: 200,
            theta: 1,
            toxicity_threshold: t,
            eta: 0.5,
            lambda: 0.05,
            modulation: false,
            diffusion_source: DiffusionSource::InfectedSenders,
        };
        for m in sm_generate_messages(&snapshot, &profiles, &p, 0, &mut rng) {
            if snapshot[m.sender] == UserState::Infected {
                prop_assert_eq!(m.score, profiles.darkness(m.sender));
                prop_assert_eq!(m.is_toxic, m.score >= t);
            } else {
                prop_assert_eq!(m.score, 0.0);
                prop_assert!(!m.is_toxic);
            }
        }
    }

    #[test]
    fn er_graph_is_pure(n in 1usize..150, p in unit(), seed in any::<u64>()) {
        prop_assert_eq!(Graph::erdos_renyi(n, p, seed).unwrap(), Graph::erdos_renyi(n, p, seed).unwrap());
    }
}

#[test]
fn trend_fractions_sum_to_one() {
    let mut c = SimulationConfig::default();
    c.model.variant = Variant::SmartModerator;
    c.graph.nodes = 333;
    c.run.max_iterations = 50;
    let r = engine::run(&c).unwrap();
    for t in 0..r.trends.len() {
        let f = r.trends.fractions(t);
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert_eq!(count_states(&r.final_states), *r.trends.counts.last().unwrap());
}
