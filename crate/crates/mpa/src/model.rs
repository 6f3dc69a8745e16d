//! Annotated AS-graph storage: node classes, link annotations, and
//! per-node degree bookkeeping.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node identifier; equal to the node's arrival index.
pub type NodeId = usize;

/// The five model rates, all per unit time (one ISP arrival).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpaParams {
    /// Non-ISP arrival rate (non-ISPs per ISP).
    pub rho: f64,
    /// ISP multihoming-link rate.
    pub nu: f64,
    /// Peering-link rate.
    pub c: f64,
    /// Mean providers per non-ISP.
    pub m: f64,
    /// Bankruptcy rate.
    pub mu: f64,
}

impl MpaParams {
    pub fn new(rho: f64, nu: f64, c: f64, m: f64, mu: f64) -> Result<Self, GraphError> {
        let p = MpaParams { rho, nu, c, m, mu };
        p.validate()?;
        Ok(p)
    }

    /// Rates measured from the January 2007 annotated snapshot:
    /// rho = 7/3, nu = 1, c = 0.704, m = 1.86, mu = 0.
    pub fn internet_2007() -> Self {
        MpaParams {
            rho: 7.0 / 3.0,
            nu: 1.0,
            c: 0.704,
            m: 1.86,
            mu: 0.0,
        }
    }

    /// Two-class configuration: non-ISPs arrive at `rho`, nothing else.
    pub fn two_class(rho: f64) -> Self {
        MpaParams {
            rho,
            nu: 0.0,
            c: 0.0,
            m: 1.0,
            mu: 0.0,
        }
    }

    /// Classic single-class preferential attachment (one link per node).
    pub fn classic_pa() -> Self {
        Self::two_class(0.0)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let finite = [self.rho, self.nu, self.c, self.m, self.mu]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(GraphError::InvalidParams("rates must be finite".into()));
        }
        if self.rho < 0.0 || self.nu < 0.0 || self.c < 0.0 || self.mu < 0.0 {
            return Err(GraphError::InvalidParams(
                "rho, nu, c, mu must be non-negative".into(),
            ));
        }
        if self.m < 1.0 {
            return Err(GraphError::InvalidParams(
                "m must be at least 1 (every non-ISP has a provider)".into(),
            ));
        }
        if self.mu >= 1.0 {
            return Err(GraphError::InvalidParams("mu must be below 1".into()));
        }
        Ok(())
    }

    /// Share of non-ISP nodes, r = rho / (1 + rho).
    pub fn non_isp_share(&self) -> f64 {
        self.rho / (1.0 + self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    Isp,
    NonIsp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    /// Customer-to-provider; directed from the paying customer.
    C2p,
    /// Settlement-free peering between two ISPs.
    P2p,
}

/// What the neighbor is to this node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Customer,
    Provider,
    Peer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: LinkKind,
    /// For c2p links, which endpoint is the customer.
    pub customer: Option<NodeId>,
}

impl LinkRecord {
    pub fn provider(&self) -> Option<NodeId> {
        self.customer
            .map(|c| if c == self.a { self.b } else { self.a })
    }
}

/// Per-node counts of the three link roles; total degree is their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeVector {
    pub customers: u32,
    pub providers: u32,
    pub peers: u32,
}

impl DegreeVector {
    pub fn total(&self) -> u32 {
        self.customers + self.providers + self.peers
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate link {{{0}, {1}}}")]
    DuplicateLink(NodeId, NodeId),
    #[error("link kind violation: {0}")]
    KindViolation(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("graph invariant violated: {0}")]
    Invariant(String),
}

/// Node set with class and arrival annotations plus an annotated link set.
///
/// Node ids are dense integers equal to insertion order, so the id doubles
/// as the arrival index. Mutation is single-writer; reads may be shared.
#[derive(Debug, Clone, Default)]
pub struct AnnotatedGraph {
    classes: Vec<NodeClass>,
    degrees: Vec<DegreeVector>,
    adjacency: Vec<Vec<(NodeId, Rel)>>,
    links: Vec<LinkRecord>,
    link_set: HashSet<(NodeId, NodeId)>,
}

fn pair_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl AnnotatedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a node; its id is the next arrival index.
    pub fn add_node(&mut self, class: NodeClass) -> NodeId {
        let id = self.classes.len();
        self.classes.push(class);
        self.degrees.push(DegreeVector::default());
        self.adjacency.push(Vec::new());
        id
    }

    /// Inserts a link, updating adjacency and both degree vectors.
    /// Rejects the mutation atomically on any constraint violation.
    pub fn add_link(
        &mut self,
        a: NodeId,
        b: NodeId,
        kind: LinkKind,
        customer: Option<NodeId>,
    ) -> Result<usize, GraphError> {
        let n = self.classes.len();
        if a >= n {
            return Err(GraphError::UnknownNode(a));
        }
        if b >= n {
            return Err(GraphError::UnknownNode(b));
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if self.link_set.contains(&pair_key(a, b)) {
            return Err(GraphError::DuplicateLink(a, b));
        }
        match kind {
            LinkKind::P2p => {
                if self.classes[a] != NodeClass::Isp || self.classes[b] != NodeClass::Isp {
                    return Err(GraphError::KindViolation(format!(
                        "p2p link {{{a}, {b}}} touches a non-ISP"
                    )));
                }
                if customer.is_some() {
                    return Err(GraphError::KindViolation(
                        "p2p link carries a customer endpoint".into(),
                    ));
                }
            }
            LinkKind::C2p => {
                let cust = customer.ok_or_else(|| {
                    GraphError::KindViolation("c2p link without customer endpoint".into())
                })?;
                if cust != a && cust != b {
                    return Err(GraphError::KindViolation(format!(
                        "customer {cust} is not an endpoint of {{{a}, {b}}}"
                    )));
                }
                let prov = if cust == a { b } else { a };
                if self.classes[prov] != NodeClass::Isp {
                    return Err(GraphError::KindViolation(format!(
                        "provider {prov} is not an ISP"
                    )));
                }
            }
        }

        let id = self.links.len();
        self.links.push(LinkRecord {
            a,
            b,
            kind,
            customer,
        });
        self.link_set.insert(pair_key(a, b));
        match kind {
            LinkKind::P2p => {
                self.adjacency[a].push((b, Rel::Peer));
                self.adjacency[b].push((a, Rel::Peer));
                self.degrees[a].peers += 1;
                self.degrees[b].peers += 1;
            }
            LinkKind::C2p => {
                let cust = customer.unwrap();
                let prov = if cust == a { b } else { a };
                self.adjacency[cust].push((prov, Rel::Provider));
                self.adjacency[prov].push((cust, Rel::Customer));
                self.degrees[cust].providers += 1;
                self.degrees[prov].customers += 1;
            }
        }
        Ok(id)
    }

    pub fn add_c2p(&mut self, customer: NodeId, provider: NodeId) -> Result<usize, GraphError> {
        self.add_link(customer, provider, LinkKind::C2p, Some(customer))
    }

    pub fn add_p2p(&mut self, a: NodeId, b: NodeId) -> Result<usize, GraphError> {
        self.add_link(a, b, LinkKind::P2p, None)
    }

    /// Re-points the provider end of a c2p link to `new_provider`.
    /// Used by bankruptcy rewiring; the link count is unchanged.
    pub fn rewire_provider(
        &mut self,
        link_id: usize,
        new_provider: NodeId,
    ) -> Result<(), GraphError> {
        let link = *self
            .links
            .get(link_id)
            .ok_or_else(|| GraphError::Invariant(format!("no link {link_id}")))?;
        let cust = link.customer.ok_or_else(|| {
            GraphError::KindViolation("cannot rewire the provider of a p2p link".into())
        })?;
        let old_provider = link.provider().unwrap();
        if new_provider >= self.classes.len() {
            return Err(GraphError::UnknownNode(new_provider));
        }
        if new_provider == cust {
            return Err(GraphError::SelfLoop(cust));
        }
        if self.classes[new_provider] != NodeClass::Isp {
            return Err(GraphError::KindViolation(format!(
                "provider {new_provider} is not an ISP"
            )));
        }
        if self.link_set.contains(&pair_key(cust, new_provider)) {
            return Err(GraphError::DuplicateLink(cust, new_provider));
        }

        self.link_set.remove(&pair_key(cust, old_provider));
        self.link_set.insert(pair_key(cust, new_provider));
        self.links[link_id] = LinkRecord {
            a: cust,
            b: new_provider,
            kind: LinkKind::C2p,
            customer: Some(cust),
        };
        self.adjacency[cust].retain(|&(n, r)| !(n == old_provider && r == Rel::Provider));
        self.adjacency[old_provider].retain(|&(n, r)| !(n == cust && r == Rel::Customer));
        self.adjacency[cust].push((new_provider, Rel::Provider));
        self.adjacency[new_provider].push((cust, Rel::Customer));
        self.degrees[old_provider].customers -= 1;
        self.degrees[new_provider].customers += 1;
        Ok(())
    }

    /// Overwrites a node class without constraint checks. Intended for
    /// taxonomy application over ingested real-world data, which may be
    /// inconsistent with the model's class constraints.
    pub fn set_class(&mut self, node: NodeId, class: NodeClass) -> Result<(), GraphError> {
        if node >= self.classes.len() {
            return Err(GraphError::UnknownNode(node));
        }
        self.classes[node] = class;
        Ok(())
    }

    pub fn degree_vector(&self, node: NodeId) -> Result<DegreeVector, GraphError> {
        self.degrees
            .get(node)
            .copied()
            .ok_or(GraphError::UnknownNode(node))
    }

    pub fn total_degree(&self, node: NodeId) -> u32 {
        self.degrees[node].total()
    }

    pub fn node_class(&self, node: NodeId) -> NodeClass {
        self.classes[node]
    }

    pub fn node_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[LinkRecord] {
        &self.links
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, Rel)] {
        &self.adjacency[node]
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        self.link_set.contains(&pair_key(a, b))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.classes.len()
    }

    /// 2 * |links| / |nodes|.
    pub fn mean_degree(&self) -> f64 {
        if self.classes.is_empty() {
            return 0.0;
        }
        2.0 * self.links.len() as f64 / self.classes.len() as f64
    }

    /// Full invariant sweep; returns the first violation found.
    pub fn validate(&self) -> Result<(), GraphError> {
        let (mut hard, class) = self.check_invariants();
        hard.extend(class);
        match hard.into_iter().next() {
            Some(v) => Err(GraphError::Invariant(v)),
            None => Ok(()),
        }
    }

    /// Invariant sweep for ingested real-world graphs: class-consistency
    /// violations (a non-ISP acting as provider or peer) are returned as
    /// warnings instead of failing, since measured data is noisy.
    pub fn validate_lenient(&self) -> Result<Vec<String>, GraphError> {
        let (hard, class) = self.check_invariants();
        match hard.into_iter().next() {
            Some(v) => Err(GraphError::Invariant(v)),
            None => Ok(class),
        }
    }

    fn check_invariants(&self) -> (Vec<String>, Vec<String>) {
        let mut problems = Vec::new();
        let n = self.classes.len();
        let mut recomputed = vec![DegreeVector::default(); n];
        let mut seen = HashSet::new();

        for (i, link) in self.links.iter().enumerate() {
            if link.a >= n || link.b >= n {
                problems.push(format!("link {i} references a missing node"));
                continue;
            }
            if link.a == link.b {
                problems.push(format!("link {i} is a self-loop"));
                continue;
            }
            if !seen.insert(pair_key(link.a, link.b)) {
                problems.push(format!("duplicate link {{{}, {}}}", link.a, link.b));
            }
            match link.kind {
                LinkKind::P2p => {
                    recomputed[link.a].peers += 1;
                    recomputed[link.b].peers += 1;
                }
                LinkKind::C2p => match link.customer {
                    Some(cust) if cust == link.a || cust == link.b => {
                        let prov = link.provider().unwrap();
                        recomputed[cust].providers += 1;
                        recomputed[prov].customers += 1;
                    }
                    _ => problems.push(format!("c2p link {i} has no valid customer endpoint")),
                },
            }
        }
        if seen != self.link_set {
            problems.push("link pair index disagrees with link records".into());
        }
        for id in 0..n {
            if recomputed[id] != self.degrees[id] {
                problems.push(format!("degree vector of node {id} disagrees with links"));
            }
            let adj = &self.adjacency[id];
            if adj.len() as u32 != recomputed[id].total() {
                problems.push(format!("adjacency of node {id} disagrees with links"));
            }
        }
        // adjacency symmetry
        for id in 0..n {
            for &(nb, rel) in &self.adjacency[id] {
                let mirror = match rel {
                    Rel::Peer => Rel::Peer,
                    Rel::Customer => Rel::Provider,
                    Rel::Provider => Rel::Customer,
                };
                if !self.adjacency[nb].iter().any(|&(x, r)| x == id && r == mirror) {
                    problems.push(format!("asymmetric adjacency between {id} and {nb}"));
                }
            }
        }
        // class constraints; downgraded to warnings in ingest mode
        let mut class_problems = Vec::new();
        for link in &self.links {
            match link.kind {
                LinkKind::P2p => {
                    for end in [link.a, link.b] {
                        if self.classes[end] != NodeClass::Isp {
                            class_problems
                                .push(format!("p2p link touches non-ISP node {end}"));
                        }
                    }
                }
                LinkKind::C2p => {
                    if let Some(prov) = link.provider() {
                        if self.classes[prov] != NodeClass::Isp {
                            class_problems.push(format!("non-ISP node {prov} is a provider"));
                        }
                    }
                }
            }
        }
        (problems, class_problems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_node_assigns_sequential_arrival_indices() {
        let mut g = AnnotatedGraph::new();
        let first = g.add_node(NodeClass::Isp);
        assert_eq!(first, 0);
        assert_eq!(g.degree_vector(first).unwrap().total(), 0);
        g.add_node(NodeClass::Isp);
        g.add_node(NodeClass::NonIsp);
        let fourth = g.add_node(NodeClass::NonIsp);
        assert_eq!(fourth, 3);
    }

    #[test]
    fn class_counts_track_insertions() {
        let mut g = AnnotatedGraph::new();
        for _ in 0..7_200 {
            g.add_node(NodeClass::Isp);
        }
        for _ in 0..16_800 {
            g.add_node(NodeClass::NonIsp);
        }
        assert_eq!(g.class_count(NodeClass::Isp), 7_200);
        assert_eq!(g.class_count(NodeClass::NonIsp), 16_800);
    }

    #[test]
    fn c2p_updates_both_degree_vectors() {
        let mut g = AnnotatedGraph::new();
        let y = g.add_node(NodeClass::Isp);
        let x = g.add_node(NodeClass::NonIsp);
        g.add_c2p(x, y).unwrap();
        assert_eq!(g.degree_vector(x).unwrap().providers, 1);
        assert_eq!(g.degree_vector(y).unwrap().customers, 1);
        g.validate().unwrap();
    }

    #[test]
    fn p2p_increments_peers_on_both_ends() {
        let mut g = AnnotatedGraph::new();
        let y = g.add_node(NodeClass::Isp);
        let z = g.add_node(NodeClass::Isp);
        g.add_p2p(y, z).unwrap();
        assert_eq!(g.degree_vector(y).unwrap().peers, 1);
        assert_eq!(g.degree_vector(z).unwrap().peers, 1);
    }

    #[test]
    fn p2p_to_non_isp_is_rejected_atomically() {
        let mut g = AnnotatedGraph::new();
        let y = g.add_node(NodeClass::Isp);
        let x = g.add_node(NodeClass::NonIsp);
        let err = g.add_p2p(y, x).unwrap_err();
        assert!(matches!(err, GraphError::KindViolation(_)));
        assert_eq!(g.link_count(), 0);
        assert_eq!(g.degree_vector(y).unwrap().total(), 0);
    }

    #[test]
    fn non_isp_provider_is_rejected() {
        let mut g = AnnotatedGraph::new();
        let x = g.add_node(NodeClass::NonIsp);
        let y = g.add_node(NodeClass::Isp);
        assert!(matches!(
            g.add_c2p(y, x),
            Err(GraphError::KindViolation(_))
        ));
    }

    #[test]
    fn self_loops_and_duplicates_are_rejected() {
        let mut g = AnnotatedGraph::new();
        let a = g.add_node(NodeClass::Isp);
        let b = g.add_node(NodeClass::Isp);
        assert_eq!(g.add_p2p(a, a), Err(GraphError::SelfLoop(a)));
        g.add_p2p(a, b).unwrap();
        assert_eq!(g.add_p2p(b, a), Err(GraphError::DuplicateLink(b, a)));
        assert_eq!(g.add_c2p(a, b), Err(GraphError::DuplicateLink(a, b)));
    }

    #[test]
    fn degree_vector_counts_roles() {
        // peering triangle plus one provider for node 0
        let mut g = AnnotatedGraph::new();
        for _ in 0..4 {
            g.add_node(NodeClass::Isp);
        }
        g.add_p2p(0, 1).unwrap();
        g.add_p2p(0, 2).unwrap();
        g.add_p2p(1, 2).unwrap();
        g.add_c2p(0, 3).unwrap();
        assert_eq!(
            g.degree_vector(0).unwrap(),
            DegreeVector {
                customers: 0,
                providers: 1,
                peers: 2
            }
        );
        assert_eq!(g.degree_vector(9), Err(GraphError::UnknownNode(9)));
    }

    #[test]
    fn star_center_counts_customers() {
        let mut g = AnnotatedGraph::new();
        let hub = g.add_node(NodeClass::Isp);
        for _ in 0..5 {
            let leaf = g.add_node(NodeClass::NonIsp);
            g.add_c2p(leaf, hub).unwrap();
        }
        let dv = g.degree_vector(hub).unwrap();
        assert_eq!((dv.customers, dv.providers, dv.peers), (5, 0, 0));
    }

    #[test]
    fn rewire_shifts_customer_between_providers() {
        let mut g = AnnotatedGraph::new();
        for _ in 0..3 {
            g.add_node(NodeClass::Isp);
        }
        let link = g.add_c2p(1, 0).unwrap();
        g.rewire_provider(link, 2).unwrap();
        assert_eq!(g.link_count(), 1);
        assert_eq!(g.degree_vector(0).unwrap().customers, 0);
        assert_eq!(g.degree_vector(2).unwrap().customers, 1);
        assert!(g.has_link(1, 2));
        assert!(!g.has_link(0, 1));
        g.validate().unwrap();
    }

    #[test]
    fn params_reject_out_of_range_rates() {
        assert!(MpaParams::new(-0.1, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(MpaParams::new(1.0, 0.0, 0.0, 0.5, 0.0).is_err());
        assert!(MpaParams::new(1.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(MpaParams::internet_2007().validate().is_ok());
    }
}
