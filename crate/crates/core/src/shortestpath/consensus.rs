//! Ultimatum-game consensus between two approximate Pareto archives.
//!
//! Party 1 proposes its archive members one by one. Party 2 accepts a
//! proposal at relaxation level `ε2'` when, on the box grid of base
//! `1 + ε2'`, the proposal's party-2 objectives land in the same box as some
//! member of its own archive at the same endpoint. Levels are tried from
//! `ε2` upwards in steps of the configured relax step, never past `ε2_max`.

use std::collections::BTreeMap;

use super::archive::SpEntry;
use super::boxes::{box_of, ApproxParams};

const RESPONDER: usize = 1;

/// Largest utility either party can obtain.
pub const MAX_UTILITY: f64 = 1.0;

/// Outcome of the game at one endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointConsensus {
    pub endpoint: usize,
    /// Smallest accepted relaxation; `None` when party 2 rejects everything.
    pub eps2_prime: Option<f64>,
    /// All proposals accepted at `eps2_prime`, in archive order.
    pub members: Vec<SpEntry>,
    pub proposer_utility: f64,
    pub responder_utility: f64,
}

impl EndpointConsensus {
    pub fn agreed(&self) -> bool {
        self.eps2_prime.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConsensusOutcome {
    /// One record per endpoint that party 1 proposed for, ascending.
    pub endpoints: Vec<EndpointConsensus>,
}

impl ConsensusOutcome {
    pub fn get(&self, endpoint: usize) -> Option<&EndpointConsensus> {
        self.endpoints.iter().find(|e| e.endpoint == endpoint)
    }

    /// Endpoints without agreement.
    pub fn failures(&self) -> Vec<usize> {
        self.endpoints
            .iter()
            .filter(|e| !e.agreed())
            .map(|e| e.endpoint)
            .collect()
    }

    /// Every accepted proposal across endpoints.
    pub fn members(&self) -> impl Iterator<Item = &SpEntry> {
        self.endpoints.iter().flat_map(|e| e.members.iter())
    }

    pub fn largest_relaxation(&self) -> Option<f64> {
        self.endpoints.iter().filter_map(|e| e.eps2_prime).reduce(f64::max)
    }
}

/// Indices into `p1` of proposals party 2 accepts at level `eps2_prime`.
pub fn consensus_at_level(p1: &[SpEntry], p2: &[SpEntry], eps2_prime: f64) -> Vec<usize> {
    let r = 1.0 + eps2_prime;
    let p2_boxes: Vec<(usize, Vec<u32>)> = p2
        .iter()
        .map(|z| (z.endpoint(), box_of(z.objectives.party(RESPONDER).values(), r)))
        .collect();
    p1.iter()
        .enumerate()
        .filter(|(_, x)| {
            let b = box_of(x.objectives.party(RESPONDER).values(), r);
            p2_boxes.iter().any(|(v, zb)| *v == x.endpoint() && *zb == b)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Party 2's utility for accepting at `eps2_prime`.
pub fn responder_utility(eps2_prime: f64, params: &ApproxParams) -> f64 {
    if eps2_prime <= params.eps2 || params.eps2_max <= params.eps2 {
        MAX_UTILITY
    } else {
        MAX_UTILITY * (params.eps2_max - eps2_prime) / (params.eps2_max - params.eps2)
    }
}

/// Plays the game at every endpoint party 1 has proposals for.
pub fn ultimatum_consensus(p1: &[SpEntry], p2: &[SpEntry], params: &ApproxParams) -> ConsensusOutcome {
    debug_assert!(p1.iter().all(|x| x.objectives.party_count() > RESPONDER));
    let levels = params.relaxation_levels();
    let mut by_endpoint: BTreeMap<usize, Vec<SpEntry>> = BTreeMap::new();
    for x in p1 {
        by_endpoint.entry(x.endpoint()).or_default().push(x.clone());
    }
    let endpoints = by_endpoint
        .into_iter()
        .map(|(endpoint, proposals)| {
            let peers: Vec<SpEntry> = p2.iter().filter(|z| z.endpoint() == endpoint).cloned().collect();
            let accepted = levels.iter().find_map(|&level| {
                let idx = consensus_at_level(&proposals, &peers, level);
                (!idx.is_empty()).then_some((level, idx))
            });
            match accepted {
                Some((level, idx)) => EndpointConsensus {
                    endpoint,
                    eps2_prime: Some(level),
                    members: idx.into_iter().map(|i| proposals[i].clone()).collect(),
                    proposer_utility: MAX_UTILITY,
                    responder_utility: responder_utility(level, params),
                },
                None => EndpointConsensus {
                    endpoint,
                    eps2_prime: None,
                    members: Vec::new(),
                    proposer_utility: 0.0,
                    responder_utility: 0.0,
                },
            }
        })
        .collect();
    ConsensusOutcome { endpoints }
}
