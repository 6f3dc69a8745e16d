//! Event-driven MPA growth engine.
//!
//! Time advances in unit steps; one ISP arrives per step and the other
//! event types (non-ISP arrivals, multihoming, peering, bankruptcy) fire
//! deterministically from per-rate accumulators. Only target selection
//! is random, so a run is reproducible bit-for-bit from its seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotatedGraph, GraphError, LinkKind, MpaParams, NodeClass, NodeId};
use crate::sampler::{PreferentialSampler, SamplerError};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub params: MpaParams,
    pub target_isps: usize,
    pub target_non_isps: usize,
    pub seed: u64,
    /// Collision retry cap for pair selection.
    pub max_resample: usize,
}

impl GeneratorConfig {
    pub fn new(params: MpaParams, target_isps: usize, target_non_isps: usize, seed: u64) -> Self {
        GeneratorConfig {
            params,
            target_isps,
            target_non_isps,
            seed,
            max_resample: 64,
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        self.params
            .validate()
            .map_err(|e| GeneratorError::InvalidConfig(e.to_string()))?;
        if self.target_isps < 2 {
            return Err(GeneratorError::InvalidConfig(
                "target_isps must be at least 2".into(),
            ));
        }
        if self.max_resample < 1 {
            return Err(GeneratorError::InvalidConfig(
                "max_resample must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Deterministic event pacing: after T unit ticks a rate-x accumulator
/// has emitted exactly floor(T * x) events.
#[derive(Debug, Clone)]
pub struct RateAccumulator {
    rate: f64,
    ticks: u64,
    emitted: u64,
}

impl RateAccumulator {
    pub fn new(rate: f64) -> Self {
        RateAccumulator {
            rate,
            ticks: 0,
            emitted: 0,
        }
    }

    /// Advances one unit of time and returns how many events fire.
    pub fn tick(&mut self) -> u64 {
        self.ticks += 1;
        // cumulative form keeps floor(T * rate) exact for rationals like 7/3
        let due = (self.rate * self.ticks as f64 + 1e-9).floor() as u64;
        let fired = due.saturating_sub(self.emitted);
        self.emitted = due;
        fired
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Fractional carry accumulated so far, in [0, 1).
    pub fn residual(&self) -> f64 {
        (self.rate * self.ticks as f64 - self.emitted as f64).clamp(0.0, 1.0 - f64::EPSILON)
    }
}

/// Per-step event tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    pub isp_arrivals: u64,
    pub non_isp_arrivals: u64,
    pub non_isp_links: u64,
    pub multihoming_links: u64,
    pub peering_links: u64,
    pub bankruptcy_rewires: u64,
    /// Events dropped because no valid target pair was found within
    /// the resample budget.
    pub aborted: u64,
}

impl EventLog {
    fn absorb(&mut self, other: EventLog) {
        self.isp_arrivals += other.isp_arrivals;
        self.non_isp_arrivals += other.non_isp_arrivals;
        self.non_isp_links += other.non_isp_links;
        self.multihoming_links += other.multihoming_links;
        self.peering_links += other.peering_links;
        self.bankruptcy_rewires += other.bankruptcy_rewires;
    }
}

/// Metadata needed to reproduce a run exactly. Deliberately contains no
/// timing information: a manifest is part of the deterministic output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub params: MpaParams,
    pub target_isps: usize,
    pub target_non_isps: usize,
    pub seed: u64,
    pub steps: u64,
    pub nodes: usize,
    pub links: usize,
    pub events: EventLog,
}

/// Seed topology: two ISPs, the younger a customer of the older.
pub fn seed_graph() -> AnnotatedGraph {
    let mut g = AnnotatedGraph::new();
    let root = g.add_node(NodeClass::Isp);
    let second = g.add_node(NodeClass::Isp);
    g.add_c2p(second, root).expect("seed link");
    g
}

pub struct GeneratorState {
    pub graph: AnnotatedGraph,
    sampler: PreferentialSampler,
    rng: ChaCha8Rng,
    config: GeneratorConfig,
    acc_non_isp: RateAccumulator,
    acc_multihome: RateAccumulator,
    acc_peering: RateAccumulator,
    acc_bankruptcy: RateAccumulator,
    /// Extra providers beyond the first for non-ISPs, rate m - 1.
    acc_extra_providers: RateAccumulator,
    isp_count: usize,
    non_isp_count: usize,
    steps: u64,
    pub totals: EventLog,
}

impl GeneratorState {
    pub fn new(config: GeneratorConfig) -> Result<Self, GeneratorError> {
        config.validate()?;
        let graph = seed_graph();
        let mut sampler = PreferentialSampler::new();
        for id in graph.node_ids() {
            sampler.push(graph.total_degree(id) as u64);
        }
        let p = config.params;
        Ok(GeneratorState {
            graph,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            acc_non_isp: RateAccumulator::new(p.rho),
            acc_multihome: RateAccumulator::new(p.nu),
            acc_peering: RateAccumulator::new(p.c),
            acc_bankruptcy: RateAccumulator::new(p.mu),
            acc_extra_providers: RateAccumulator::new(p.m - 1.0),
            config,
            isp_count: 2,
            non_isp_count: 0,
            steps: 0,
            totals: EventLog::default(),
        })
    }

    pub fn isp_count(&self) -> usize {
        self.isp_count
    }

    pub fn non_isp_count(&self) -> usize {
        self.non_isp_count
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Preferential draw over ISPs (weight = current total degree).
    pub fn sample_target(&mut self) -> Result<NodeId, GeneratorError> {
        Ok(self.sampler.sample(&mut self.rng)?)
    }

    fn add_link_tracked(
        &mut self,
        a: NodeId,
        b: NodeId,
        kind: LinkKind,
        customer: Option<NodeId>,
    ) -> Result<(), GeneratorError> {
        self.graph.add_link(a, b, kind, customer)?;
        self.sampler.increase(a, 1);
        self.sampler.increase(b, 1);
        Ok(())
    }

    /// One ISP arrives and becomes a customer of a preferentially
    /// sampled ISP. The target is drawn before the newcomer's own
    /// degree is registered, so self-attachment cannot happen.
    fn arrive_isp(&mut self) -> Result<(), GeneratorError> {
        let target = self.sampler.sample(&mut self.rng)?;
        let id = self.graph.add_node(NodeClass::Isp);
        self.sampler.push(0);
        self.add_link_tracked(id, target, LinkKind::C2p, Some(id))?;
        self.isp_count += 1;
        Ok(())
    }

    /// One non-ISP arrives with 1 + extra distinct providers, all drawn
    /// preferentially. Returns the number of provider links created.
    fn arrive_non_isp(&mut self) -> Result<u64, GeneratorError> {
        let providers = 1 + self.acc_extra_providers.tick();
        let id = self.graph.add_node(NodeClass::NonIsp);
        self.sampler.push(0);
        self.non_isp_count += 1;
        let mut created = 0;
        for _ in 0..providers {
            let mut placed = false;
            for _ in 0..self.config.max_resample {
                let target = self.sampler.sample(&mut self.rng)?;
                if self.graph.has_link(id, target) {
                    continue;
                }
                // non-ISP stays at weight zero: its links contribute one
                // connection (the ISP end) to the attachment pool
                self.graph.add_c2p(id, target)?;
                self.sampler.increase(target, 1);
                created += 1;
                placed = true;
                break;
            }
            if !placed {
                self.totals.aborted += 1;
            }
        }
        Ok(created)
    }

    /// Draws a pair of distinct ISPs, each endpoint proportional to its
    /// degree, rejecting already-linked pairs.
    fn sample_pair(&mut self) -> Result<Option<(NodeId, NodeId)>, GeneratorError> {
        for _ in 0..self.config.max_resample {
            let x = self.sampler.sample(&mut self.rng)?;
            let y = self.sampler.sample(&mut self.rng)?;
            if x == y || self.graph.has_link(x, y) {
                continue;
            }
            return Ok(Some((x, y)));
        }
        Ok(None)
    }

    /// ISP multihoming: degree-product pair, lower-degree endpoint is the
    /// customer; on a degree tie the older node is the provider.
    fn multihome(&mut self) -> Result<bool, GeneratorError> {
        match self.sample_pair()? {
            Some((x, y)) => {
                let (dx, dy) = (self.graph.total_degree(x), self.graph.total_degree(y));
                let customer = if dx < dy || (dx == dy && x > y) { x } else { y };
                let provider = if customer == x { y } else { x };
                self.add_link_tracked(customer, provider, LinkKind::C2p, Some(customer))?;
                Ok(true)
            }
            None => {
                self.totals.aborted += 1;
                Ok(false)
            }
        }
    }

    fn peer(&mut self) -> Result<bool, GeneratorError> {
        match self.sample_pair()? {
            Some((x, y)) => {
                self.add_link_tracked(x, y, LinkKind::P2p, None)?;
                Ok(true)
            }
            None => {
                self.totals.aborted += 1;
                Ok(false)
            }
        }
    }

    /// Bankruptcy: a uniformly chosen ISP-to-ISP customer link is
    /// re-pointed to a preferentially chosen acquiring ISP.
    pub fn bankruptcy_rewire(&mut self) -> Result<bool, GeneratorError> {
        use rand::Rng;
        // candidate victims: c2p links whose customer is an ISP
        let candidates: Vec<usize> = self
            .graph
            .links()
            .iter()
            .enumerate()
            .filter(|(_, l)| {
                l.kind == LinkKind::C2p
                    && l.customer
                        .map(|c| self.graph.node_class(c) == NodeClass::Isp)
                        .unwrap_or(false)
            })
            .map(|(i, _)| i)
            .collect();
        if candidates.is_empty() {
            self.totals.aborted += 1;
            return Ok(false);
        }
        for _ in 0..self.config.max_resample {
            let victim = candidates[self.rng.gen_range(0..candidates.len())];
            let link = self.graph.links()[victim];
            let customer = link.customer.unwrap();
            let old_provider = link.provider().unwrap();
            let acquirer = self.sampler.sample(&mut self.rng)?;
            if acquirer == customer
                || acquirer == old_provider
                || self.graph.has_link(customer, acquirer)
            {
                continue;
            }
            self.graph.rewire_provider(victim, acquirer)?;
            self.sampler.decrease(old_provider, 1);
            self.sampler.increase(acquirer, 1);
            return Ok(true);
        }
        self.totals.aborted += 1;
        Ok(false)
    }

    /// Advances one unit of time: one ISP arrival, then the accumulated
    /// non-ISP arrivals, multihoming links, peering links, and bankruptcy
    /// rewires, in that fixed order.
    pub fn step(&mut self) -> Result<EventLog, GeneratorError> {
        let aborted_before = self.totals.aborted;
        let mut log = EventLog::default();

        self.arrive_isp()?;
        log.isp_arrivals = 1;

        for _ in 0..self.acc_non_isp.tick() {
            log.non_isp_links += self.arrive_non_isp()?;
            log.non_isp_arrivals += 1;
        }
        for _ in 0..self.acc_multihome.tick() {
            if self.multihome()? {
                log.multihoming_links += 1;
            }
        }
        for _ in 0..self.acc_peering.tick() {
            if self.peer()? {
                log.peering_links += 1;
            }
        }
        if self.config.params.mu > 0.0 {
            for _ in 0..self.acc_bankruptcy.tick() {
                if self.bankruptcy_rewire()? {
                    log.bankruptcy_rewires += 1;
                }
            }
        }

        self.steps += 1;
        log.aborted = self.totals.aborted - aborted_before;
        self.totals.absorb(log); // aborted is already tracked inline
        Ok(log)
    }

    /// Runs to the configured ISP target, then tops up with plain non-ISP
    /// arrivals until the non-ISP target is met as well.
    pub fn run_to_targets(&mut self) -> Result<(), GeneratorError> {
        while self.isp_count < self.config.target_isps {
            self.step()?;
        }
        while self.non_isp_count < self.config.target_non_isps {
            let links = self.arrive_non_isp()?;
            self.totals.non_isp_arrivals += 1;
            self.totals.non_isp_links += links;
        }
        Ok(())
    }
}

/// Grows a graph to the configured targets and validates it.
pub fn run(config: &GeneratorConfig) -> Result<(AnnotatedGraph, RunManifest), GeneratorError> {
    let mut state = GeneratorState::new(config.clone())?;
    state.run_to_targets()?;
    state.graph.validate()?;
    let manifest = RunManifest {
        params: config.params,
        target_isps: config.target_isps,
        target_non_isps: config.target_non_isps,
        seed: config.seed,
        steps: state.steps,
        nodes: state.graph.node_count(),
        links: state.graph.link_count(),
        events: state.totals,
    };
    Ok((state.graph, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_graph_is_the_minimal_connected_pair() {
        let g = seed_graph();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.link_count(), 1);
        let d0 = g.degree_vector(0).unwrap();
        let d1 = g.degree_vector(1).unwrap();
        assert_eq!((d0.customers, d0.providers, d0.peers), (1, 0, 0));
        assert_eq!((d1.customers, d1.providers, d1.peers), (0, 1, 0));
        g.validate().unwrap();
    }

    #[test]
    fn accumulator_floor_accounting() {
        let mut acc = RateAccumulator::new(7.0 / 3.0);
        let mut total = 0;
        for _ in 0..3 {
            total += acc.tick();
        }
        assert_eq!(total, 7);
        for _ in 0..297 {
            acc.tick();
        }
        assert_eq!(acc.emitted(), 700);
        assert!(acc.residual() < 1.0);

        let mut zero = RateAccumulator::new(0.0);
        assert_eq!(zero.tick(), 0);
    }

    #[test]
    fn step_counts_follow_the_rates() {
        let params = MpaParams::new(7.0 / 3.0, 1.0, 0.704, 1.0, 0.0).unwrap();
        let config = GeneratorConfig::new(params, usize::MAX, 0, 11);
        let mut state = GeneratorState::new(config).unwrap();
        let mut non_isps = 0;
        let mut multi = 0;
        let mut peering = 0;
        for _ in 0..1_000 {
            let log = state.step().unwrap();
            non_isps += log.non_isp_arrivals;
            multi += log.multihoming_links;
            peering += log.peering_links;
        }
        assert_eq!(state.isp_count(), 2 + 1_000);
        assert_eq!(non_isps, (7_000f64 / 3.0).floor() as u64);
        assert_eq!(multi, 1_000);
        assert_eq!(peering, 704);
        state.graph.validate().unwrap();
    }

    #[test]
    fn no_links_disappear_without_bankruptcy() {
        let config = GeneratorConfig::new(MpaParams::internet_2007(), 200, 0, 5);
        let mut state = GeneratorState::new(config).unwrap();
        let mut last = 0;
        for _ in 0..198 {
            state.step().unwrap();
            assert!(state.graph.link_count() >= last);
            last = state.graph.link_count();
        }
    }

    #[test]
    fn sampler_weights_track_degrees_through_growth() {
        let config = GeneratorConfig::new(MpaParams::internet_2007(), 1_002, 0, 17);
        let mut state = GeneratorState::new(config).unwrap();
        for _ in 0..1_000 {
            state.step().unwrap();
        }
        for id in state.graph.node_ids() {
            let expected = match state.graph.node_class(id) {
                NodeClass::Isp => state.graph.total_degree(id) as u64,
                NodeClass::NonIsp => 0,
            };
            assert_eq!(state.sampler.weight(id), expected, "node {id}");
        }
    }

    #[test]
    fn run_hits_both_targets_exactly() {
        let config = GeneratorConfig::new(MpaParams::internet_2007(), 300, 700, 23);
        let (graph, manifest) = run(&config).unwrap();
        assert_eq!(graph.class_count(NodeClass::Isp), 300);
        assert_eq!(graph.class_count(NodeClass::NonIsp), 700);
        assert_eq!(manifest.nodes, 1_000);
        graph.validate().unwrap();
    }

    #[test]
    fn same_seed_reproduces_the_link_set() {
        let config = GeneratorConfig::new(MpaParams::internet_2007(), 400, 900, 99);
        let (g1, _) = run(&config).unwrap();
        let (g2, _) = run(&config).unwrap();
        assert_eq!(g1.links(), g2.links());
        let other = GeneratorConfig { seed: 100, ..config };
        let (g3, _) = run(&other).unwrap();
        assert_ne!(g1.links(), g3.links());
    }

    #[test]
    fn bankruptcy_preserves_link_count_and_invariants() {
        let params = MpaParams::new(1.0, 0.5, 0.3, 1.5, 0.2).unwrap();
        let config = GeneratorConfig::new(params, 1_000, 0, 31);
        let mut state = GeneratorState::new(config).unwrap();
        for _ in 0..500 {
            state.step().unwrap();
        }
        let links_before = state.graph.link_count();
        let mut done = 0;
        while done < 100 {
            if state.bankruptcy_rewire().unwrap() {
                done += 1;
            }
        }
        assert_eq!(state.graph.link_count(), links_before);
        state.graph.validate().unwrap();
    }

    #[test]
    fn config_validation_rejects_tiny_targets() {
        let config = GeneratorConfig::new(MpaParams::internet_2007(), 1, 0, 0);
        assert!(matches!(
            GeneratorState::new(config),
            Err(GeneratorError::InvalidConfig(_))
        ));
    }
}
