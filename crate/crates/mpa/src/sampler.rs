//! Degree-proportional target selection over ISP nodes.
//!
//! Weights live in a Fenwick tree so both a weighted draw and a weight
//! update cost O(log n). Node ids index the tree directly; non-ISP nodes
//! are pushed with weight zero and are therefore never selected.

use rand::Rng;
use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("no positive weight to sample from")]
    EmptySampler,
}

#[derive(Debug, Clone, Default)]
pub struct PreferentialSampler {
    // 1-based Fenwick array; tree[i] covers a power-of-two span ending at i.
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl PreferentialSampler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, node: NodeId) -> u64 {
        self.weights[node]
    }

    /// Appends a node with the given initial weight; the new slot's id must
    /// match the graph's next node id.
    pub fn push(&mut self, weight: u64) -> NodeId {
        let id = self.weights.len();
        self.weights.push(0);
        self.tree.push(0);
        // fold the sums of the spans this new slot absorbs
        let i = id + 1;
        let lsb = i & i.wrapping_neg();
        let mut j = i - 1;
        let stop = i - lsb;
        while j > stop {
            self.tree[id] += self.tree[j - 1];
            j -= j & j.wrapping_neg();
        }
        if weight > 0 {
            self.increase(id, weight);
        }
        id
    }

    pub fn increase(&mut self, node: NodeId, delta: u64) {
        self.weights[node] += delta;
        self.total += delta;
        let mut i = node + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
    }

    pub fn decrease(&mut self, node: NodeId, delta: u64) {
        debug_assert!(self.weights[node] >= delta);
        self.weights[node] -= delta;
        self.total -= delta;
        let mut i = node + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] -= delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Draws a node with probability weight / total weight.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<NodeId, SamplerError> {
        if self.total == 0 {
            return Err(SamplerError::EmptySampler);
        }
        let mut target = rng.gen_range(0..self.total);
        // descend the implicit tree from the highest power-of-two span
        let mut pos = 0usize;
        let mut span = self.tree.len().next_power_of_two();
        if span > self.tree.len() {
            span /= 2;
        }
        while span > 0 {
            let next = pos + span;
            if next <= self.tree.len() && self.tree[next - 1] <= target {
                target -= self.tree[next - 1];
                pos = next;
            }
            span /= 2;
        }
        Ok(pos)
    }
}
