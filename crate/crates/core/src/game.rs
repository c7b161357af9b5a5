//! Orders of three parties, the order prior and the success-probability
//! functional, plus the two warm-up games that are won with certainty.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Certificate, Probability, ScenarioResult};
use crate::tensor::{rational, SpaceName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Party {
        Party::ALL[i]
    }

    pub fn input_space(self) -> SpaceName {
        match self {
            Party::A => SpaceName::AI,
            Party::B => SpaceName::BI,
            Party::C => SpaceName::CI,
        }
    }

    pub fn output_space(self) -> SpaceName {
        match self {
            Party::A => SpaceName::AO,
            Party::B => SpaceName::BO,
            Party::C => SpaceName::CO,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Party::A => 'A',
            Party::B => 'B',
            Party::C => 'C',
        }
    }
}

/// An order of the three parties: `order[0]` acts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm3 {
    order: [Party; 3],
}

impl Perm3 {
    pub fn new(order: [Party; 3]) -> Option<Self> {
        let distinct = order[0] != order[1] && order[0] != order[2] && order[1] != order[2];
        distinct.then_some(Perm3 { order })
    }

    pub fn identity() -> Self {
        Perm3 { order: Party::ALL }
    }

    pub fn order(&self) -> [Party; 3] {
        self.order
    }

    pub fn first(&self) -> Party {
        self.order[0]
    }

    /// Position (0, 1 or 2) at which `party` acts.
    pub fn position_of(&self, party: Party) -> usize {
        self.order.iter().position(|&p| p == party).unwrap()
    }

    /// Composition as maps on position indices: `(self ∘ other)[i] = self[other[i]]`.
    pub fn compose(&self, other: &Perm3) -> Perm3 {
        let order = std::array::from_fn(|i| self.order[other.order[i].index()]);
        Perm3 { order }
    }

    pub fn inverse(&self) -> Perm3 {
        let mut order = Party::ALL;
        for (i, p) in self.order.iter().enumerate() {
            order[p.index()] = Party::from_index(i);
        }
        Perm3 { order }
    }

    /// Relabels parties: `party_map[p]` replaces `p`.
    pub fn relabel(&self, party_map: &Perm3) -> Perm3 {
        let order = self.order.map(|p| party_map.order[p.index()]);
        Perm3 { order }
    }

    /// Composition written right to left, e.g. `cba` for A→B→C.
    pub fn composition_word(&self) -> String {
        self.order
            .iter()
            .rev()
            .map(|p| p.letter().to_ascii_lowercase())
            .collect()
    }
}

impl fmt::Display for Perm3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.order;
        write!(f, "({},{},{})", a.letter(), b.letter(), c.letter())
    }
}

/// All six orders, lexicographic in the party labels.
pub fn all_orders() -> Vec<Perm3> {
    use Party::*;
    [[A, B, C], [A, C, B], [B, A, C], [B, C, A], [C, A, B], [C, B, A]]
        .into_iter()
        .map(|o| Perm3 { order: o })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderPrior {
    weights: BTreeMap<Perm3, f64>,
}

impl Default for OrderPrior {
    fn default() -> Self {
        OrderPrior {
            weights: all_orders().into_iter().map(|p| (p, 1.0 / 6.0)).collect(),
        }
    }
}

impl OrderPrior {
    pub fn new(weights: BTreeMap<Perm3, f64>) -> Result<Self> {
        let sum: f64 = weights.values().sum();
        if weights.len() != 6 || weights.values().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotADistribution {
                order: Perm3::identity(),
                sum,
            });
        }
        Ok(OrderPrior { weights })
    }

    pub fn weight(&self, pi: &Perm3) -> f64 {
        self.weights.get(pi).copied().unwrap_or(0.0)
    }
}

/// `sum_π prior(π) · Pr[decoder(outcome) = π | order π]`.
///
/// `outputs[π]` is a distribution over a shared outcome set; `decoder` maps
/// outcome indices to guessed orders.
pub fn success_probability(
    outputs: &BTreeMap<Perm3, Vec<f64>>,
    decoder: &dyn Fn(usize) -> Perm3,
    prior: &OrderPrior,
) -> Result<f64> {
    let mut total = 0.0;
    for (pi, dist) in outputs {
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || dist.iter().any(|&p| p < -1e-12) {
            return Err(Error::NotADistribution { order: *pi, sum });
        }
        let correct: f64 = dist
            .iter()
            .enumerate()
            .filter(|&(k, _)| decoder(k) == *pi)
            .map(|(_, p)| p)
            .sum();
        total += prior.weight(pi) * correct;
    }
    Ok(total)
}

/// Optimal decoder for deterministic outputs: each observed outcome is
/// assigned to the lexicographically smallest order producing it.
pub fn optimal_decoder<K: Ord + Clone>(outcomes: &BTreeMap<Perm3, K>) -> BTreeMap<K, Perm3> {
    let mut dec = BTreeMap::new();
    for (pi, k) in outcomes {
        dec.entry(k.clone()).or_insert(*pi);
    }
    dec
}

/// Exact success probability of deterministic outputs under the uniform prior
/// and the optimal decoder: `|distinct outcomes| / 6`.
pub fn deterministic_success<K: Ord + Clone>(outcomes: &BTreeMap<Perm3, K>) -> BigRational {
    let distinct: BTreeSet<&K> = outcomes.values().collect();
    rational(distinct.len() as i64, 6)
}

/// Two parties, one bit: Alice always sends 1, Bob negates.
pub fn two_party_game() -> ScenarioResult {
    let alice = |_x: u8| 1u8;
    let bob = |x: u8| 1 - x;
    let ba = bob(alice(0));
    let ab = alice(bob(0));
    let distinct = if ba != ab { 2 } else { 1 };
    ScenarioResult {
        scenario: "two-party".into(),
        probability: Probability::Exact(rational(distinct, 2)),
        strategy: "rho=0, a(x)=1, b(x)=1-x; read the final bit".into(),
        certificate: Some(Certificate::Transcript(vec![
            format!("ba(0) = b(a(0)) = {ba}"),
            format!("ab(0) = a(b(0)) = {ab}"),
        ])),
    }
}

/// Three parties sharing a trit: each records its input and sends input+1 mod 3.
pub fn trit_game() -> ScenarioResult {
    let step = |x: u8| (x + 1) % 3;
    let mut transcript = Vec::new();
    let mut runs = BTreeMap::new();
    for pi in all_orders() {
        let mut state = 0u8;
        let mut records = [0u8; 3];
        let mut line = format!("{pi}:");
        for party in pi.order() {
            records[party.index()] = state;
            let sent = step(state);
            line.push_str(&format!(" {} registers {state} returns {sent};", party.letter()));
            state = sent;
        }
        line.push_str(&format!(" final {state}"));
        transcript.push(line);
        runs.insert(pi, (state, records));
    }
    ScenarioResult {
        scenario: "trit".into(),
        probability: Probability::Exact(deterministic_success(&runs)),
        strategy: "rho=0; every party records its input x and returns x+1 mod 3".into(),
        certificate: Some(Certificate::Transcript(transcript)),
    }
}

/// Runs the trit game for one order; returns the final state and the records.
pub fn trit_run(pi: &Perm3) -> (u8, [u8; 3]) {
    let mut state = 0u8;
    let mut records = [0u8; 3];
    for party in pi.order() {
        records[party.index()] = state;
        state = (state + 1) % 3;
    }
    (state, records)
}
