//! Exhaustive search over deterministic classical strategies, with and
//! without a one-bit memory record per party.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::game::{all_orders, deterministic_success, optimal_decoder, Party, Perm3};
use crate::report::{Certificate, Probability, ScenarioResult};
use crate::tensor::rational;

/// A deterministic map on one bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitStrategy {
    pub on_zero: u8,
    pub on_one: u8,
}

impl BitStrategy {
    pub fn new(on_zero: u8, on_one: u8) -> Self {
        BitStrategy { on_zero, on_one }
    }

    pub const IDENTITY: BitStrategy = BitStrategy { on_zero: 0, on_one: 1 };
    pub const NEGATION: BitStrategy = BitStrategy { on_zero: 1, on_one: 0 };

    pub fn constant(bit: u8) -> Self {
        BitStrategy::new(bit, bit)
    }

    pub fn apply(&self, x: u8) -> u8 {
        if x == 0 {
            self.on_zero
        } else {
            self.on_one
        }
    }

    /// The four maps in lexicographic order of `(on_zero, on_one)`.
    pub fn all() -> [BitStrategy; 4] {
        [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(z, o)| BitStrategy::new(z, o))
    }
}

/// A memory strategy: the party records the received bit and forwards
/// `on_zero`/`on_one`. Identified by its forwarding tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoryBitStrategy {
    pub on_zero: u8,
    pub on_one: u8,
}

impl MemoryBitStrategy {
    pub fn new(on_zero: u8, on_one: u8) -> Self {
        MemoryBitStrategy { on_zero, on_one }
    }

    /// Returns `(forwarded, recorded)`.
    pub fn apply(&self, x: u8) -> (u8, u8) {
        let out = if x == 0 { self.on_zero } else { self.on_one };
        (out, x)
    }

    pub fn all() -> [MemoryBitStrategy; 4] {
        BitStrategy::all().map(|b| MemoryBitStrategy::new(b.on_zero, b.on_one))
    }
}

/// Final system value and each party's recorded input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeTuple {
    pub s_out: u8,
    pub x_a: Option<u8>,
    pub x_b: Option<u8>,
    pub x_c: Option<u8>,
}

impl OutcomeTuple {
    pub fn bits(&self) -> Option<(u8, u8, u8, u8)> {
        Some((self.s_out, self.x_a?, self.x_b?, self.x_c?))
    }

    pub fn record(&self, party: Party) -> Option<u8> {
        match party {
            Party::A => self.x_a,
            Party::B => self.x_b,
            Party::C => self.x_c,
        }
    }

    fn set_record(&mut self, party: Party, bit: u8) {
        match party {
            Party::A => self.x_a = Some(bit),
            Party::B => self.x_b = Some(bit),
            Party::C => self.x_c = Some(bit),
        }
    }
}

impl std::fmt::Display for OutcomeTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |b: Option<u8>| b.map_or("-".to_string(), |b| b.to_string());
        write!(
            f,
            "({}, {}, {}, {})",
            self.s_out,
            show(self.x_a),
            show(self.x_b),
            show(self.x_c)
        )
    }
}

pub fn run_memoryless(pi: &Perm3, strategies: &[BitStrategy; 3], input: u8) -> u8 {
    pi.order()
        .iter()
        .fold(input, |x, party| strategies[party.index()].apply(x))
}

pub fn run_losr(pi: &Perm3, strategies: &[MemoryBitStrategy; 3], input: u8) -> OutcomeTuple {
    let mut tuple = OutcomeTuple {
        s_out: input,
        x_a: None,
        x_b: None,
        x_c: None,
    };
    for party in pi.order() {
        let (out, rec) = strategies[party.index()].apply(tuple.s_out);
        tuple.set_record(party, rec);
        tuple.s_out = out;
    }
    tuple
}

fn triples<S: Copy + Send + Sync>(singles: [S; 4]) -> Vec<[S; 3]> {
    let mut out = Vec::with_capacity(64);
    for a in singles {
        for b in singles {
            for c in singles {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Outcome of one exhaustive search: the best distinct-outcome count and the
/// lexicographically first witness attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptimum<S> {
    pub distinct: usize,
    pub input: u8,
    pub strategies: [S; 3],
    pub cases: usize,
}

/// Parallel max with deterministic tie-breaking on the enumeration index.
fn best_case<S, F>(cases: &[(u8, [S; 3])], count: F) -> SearchOptimum<S>
where
    S: Copy + Send + Sync,
    F: Fn(u8, &[S; 3]) -> usize + Sync,
{
    let (idx, distinct) = cases
        .par_iter()
        .enumerate()
        .map(|(i, (input, s))| (i, count(*input, s)))
        .reduce(
            || (usize::MAX, 0),
            |x, y| {
                if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) {
                    y
                } else {
                    x
                }
            },
        );
    let (input, strategies) = cases[idx];
    SearchOptimum {
        distinct,
        input,
        strategies,
        cases: cases.len(),
    }
}

pub fn memoryless_outputs(strategies: &[BitStrategy; 3], input: u8) -> BTreeMap<Perm3, u8> {
    all_orders()
        .into_iter()
        .map(|pi| (pi, run_memoryless(&pi, strategies, input)))
        .collect()
}

pub fn losr_outputs(strategies: &[MemoryBitStrategy; 3], input: u8) -> BTreeMap<Perm3, OutcomeTuple> {
    all_orders()
        .into_iter()
        .map(|pi| (pi, run_losr(&pi, strategies, input)))
        .collect()
}

fn distinct_count<K: Ord>(outputs: &BTreeMap<Perm3, K>) -> usize {
    outputs.values().collect::<BTreeSet<_>>().len()
}

/// Best memoryless triple over the given inputs (inputs outermost, then
/// strategies lexicographically).
pub fn memoryless_optimum(inputs: &[u8]) -> SearchOptimum<BitStrategy> {
    let cases: Vec<_> = inputs
        .iter()
        .flat_map(|&x| triples(BitStrategy::all()).into_iter().map(move |t| (x, t)))
        .collect();
    best_case(&cases, |x, s| distinct_count(&memoryless_outputs(s, x)))
}

pub fn losr_optimum(inputs: &[u8]) -> SearchOptimum<MemoryBitStrategy> {
    let cases: Vec<_> = inputs
        .iter()
        .flat_map(|&x| triples(MemoryBitStrategy::all()).into_iter().map(move |t| (x, t)))
        .collect();
    best_case(&cases, |x, s| distinct_count(&losr_outputs(s, x)))
}

fn describe_bits(s: &[BitStrategy; 3]) -> String {
    let names = ["a", "b", "c"];
    s.iter()
        .zip(names)
        .map(|(b, n)| format!("{n}(0)={} {n}(1)={}", b.on_zero, b.on_one))
        .collect::<Vec<_>>()
        .join(", ")
}

fn describe_memory(s: &[MemoryBitStrategy; 3]) -> String {
    let names = ["a", "b", "c"];
    s.iter()
        .zip(names)
        .map(|(m, n)| format!("{n}=({},{})", m.on_zero, m.on_one))
        .collect::<Vec<_>>()
        .join(", ")
}

/// `a ≡ 1`, `b(x) = 1 − x`, `c(x) = x`: two distinct final bits.
pub fn memoryless_witness() -> [BitStrategy; 3] {
    [BitStrategy::constant(1), BitStrategy::NEGATION, BitStrategy::IDENTITY]
}

/// All 2 × 4³ memoryless cases; the optimum is the number of distinct
/// final bits over six orders, divided by six. The transcript shows the
/// named witness, which attains the searched optimum.
pub fn search_memoryless() -> ScenarioResult {
    let best = memoryless_optimum(&[0, 1]);
    let witness = memoryless_witness();
    let outputs = memoryless_outputs(&witness, 0);
    assert_eq!(
        distinct_count(&outputs),
        best.distinct,
        "witness must attain the optimum"
    );
    let decoder = optimal_decoder(&outputs);
    let mut transcript = vec![format!(
        "{} cases searched, best: {} distinct outputs",
        best.cases, best.distinct
    )];
    for (pi, out) in &outputs {
        transcript.push(format!(
            "{}(0) = {} -> guess {}",
            pi.composition_word(),
            out,
            decoder[out]
        ));
    }
    ScenarioResult {
        scenario: "classical-memoryless".into(),
        probability: Probability::Exact(rational(best.distinct as i64, 6)),
        strategy: format!("rho=0, {}", describe_bits(&witness)),
        certificate: Some(Certificate::Transcript(transcript)),
    }
}

/// All memory triples for inputs 0 and 1.
pub fn search_losr() -> ScenarioResult {
    let best = losr_optimum(&[0, 1]);
    let outputs = losr_outputs(&best.strategies, best.input);
    let decoder = optimal_decoder(&outputs);
    let mut transcript = vec![format!("{} cases searched", best.cases)];
    for (pi, out) in &outputs {
        transcript.push(format!(
            "{}({}) = {} -> guess {}",
            pi.composition_word(),
            best.input,
            out,
            decoder[out]
        ));
    }
    ScenarioResult {
        scenario: "losr".into(),
        probability: Probability::Exact(deterministic_success(&outputs)),
        strategy: format!("rho={}, {}", best.input, describe_memory(&best.strategies)),
        certificate: Some(Certificate::Transcript(transcript)),
    }
}

/// For input 0: how many of the 64 memory triples reach each distinct-tuple
/// count `k` in 1..=6.
pub fn losr_histogram() -> BTreeMap<usize, usize> {
    let mut hist: BTreeMap<usize, usize> = (1..=6).map(|k| (k, 0)).collect();
    for t in triples(MemoryBitStrategy::all()) {
        *hist.entry(distinct_count(&losr_outputs(&t, 0))).or_default() += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rational;
    use Party::*;

    fn perm(o: [Party; 3]) -> Perm3 {
        Perm3::new(o).unwrap()
    }

    const WITNESS: [BitStrategy; 3] = [
        BitStrategy { on_zero: 1, on_one: 1 },
        BitStrategy::NEGATION,
        BitStrategy::IDENTITY,
    ];

    #[test]
    fn named_witness_matches_constant() {
        assert_eq!(memoryless_witness(), WITNESS);
    }

    fn losr_witness() -> [MemoryBitStrategy; 3] {
        [
            MemoryBitStrategy::new(0, 0),
            MemoryBitStrategy::new(1, 1),
            MemoryBitStrategy::new(1, 1),
        ]
    }

    fn tuple(s: u8, a: u8, b: u8, c: u8) -> OutcomeTuple {
        OutcomeTuple {
            s_out: s,
            x_a: Some(a),
            x_b: Some(b),
            x_c: Some(c),
        }
    }

    #[test]
    fn memoryless_runs() {
        assert_eq!(run_memoryless(&perm([A, B, C]), &WITNESS, 0), 0);
        assert_eq!(run_memoryless(&perm([B, C, A]), &WITNESS, 0), 1);
        let ids = [BitStrategy::IDENTITY; 3];
        for pi in all_orders() {
            assert_eq!(run_memoryless(&pi, &ids, 0), 0);
        }
    }

    #[test]
    fn memoryless_optimum_is_two_outputs() {
        let best = memoryless_optimum(&[0, 1]);
        assert_eq!(best.cases, 128);
        assert_eq!(best.distinct, 2);
        assert_eq!(memoryless_optimum(&[0]).distinct, 2);
        assert_eq!(memoryless_optimum(&[1]).distinct, 2);
        assert_eq!(distinct_count(&memoryless_outputs(&WITNESS, 0)), 2);
        assert_eq!(search_memoryless().probability, Probability::Exact(rational(1, 3)));
    }

    #[test]
    fn losr_runs_match_listed_tuples() {
        let w = losr_witness();
        assert_eq!(run_losr(&perm([A, B, C]), &w, 0), tuple(1, 0, 0, 1));
        assert_eq!(run_losr(&perm([A, C, B]), &w, 0), tuple(1, 0, 1, 0));
        assert_eq!(run_losr(&perm([B, A, C]), &w, 0), tuple(1, 1, 0, 0));
        assert_eq!(run_losr(&perm([C, A, B]), &w, 0), tuple(1, 1, 0, 0));
        assert_eq!(run_losr(&perm([B, C, A]), &w, 0), tuple(0, 1, 0, 1));
        assert_eq!(run_losr(&perm([C, B, A]), &w, 0), tuple(0, 1, 1, 0));
    }

    #[test]
    fn losr_optimum_is_five_sixths() {
        let best = losr_optimum(&[0]);
        assert_eq!(best.cases, 64);
        assert_eq!(best.distinct, 5);
        assert_eq!(losr_optimum(&[1]).distinct, 5);
        assert_eq!(distinct_count(&losr_outputs(&losr_witness(), 0)), 5);
        assert_eq!(search_losr().probability, Probability::Exact(rational(5, 6)));
    }

    #[test]
    fn witness_search_is_deterministic() {
        assert_eq!(losr_optimum(&[0, 1]), losr_optimum(&[0, 1]));
        assert_eq!(memoryless_optimum(&[0, 1]), memoryless_optimum(&[0, 1]));
    }

    #[test]
    fn histogram_mass() {
        let h = losr_histogram();
        assert_eq!(h.values().sum::<usize>(), 64);
        assert_eq!(h[&6], 0);
        assert!(h[&5] > 0);
    }

    /// Brute-force reference for the histogram: enumerate all 2^6 strategy
    /// bit-strings and run each order by hand with its own bit arithmetic.
    #[test]
    fn histogram_matches_independent_enumeration() {
        let mut counts = [0usize; 7];
        for bits in 0u32..64 {
            let f = |party: usize, x: u32| (bits >> (5 - (2 * party + x as usize))) & 1;
            let mut seen = Vec::new();
            for order in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let mut s = 0u32;
                let mut rec = [0u32; 3];
                for p in order {
                    rec[p] = s;
                    s = f(p, s);
                }
                let key = (s, rec);
                if !seen.contains(&key) {
                    seen.push(key);
                }
            }
            counts[seen.len()] += 1;
        }
        let h = losr_histogram();
        for k in 1..=6 {
            assert_eq!(h[&k], counts[k], "k = {k}");
        }
    }

    #[test]
    fn memory_embeds_memoryless() {
        for t in triples(BitStrategy::all()) {
            let m = t.map(|b| MemoryBitStrategy::new(b.on_zero, b.on_one));
            for pi in all_orders() {
                assert_eq!(run_losr(&pi, &m, 0).s_out, run_memoryless(&pi, &t, 0));
            }
        }
    }
}
