//! Permutation process matrices and the classical non-signaling program.
//!
//! Every operator here lives on the canonical layout
//! `(S_P, A_I, A_O, B_I, B_O, C_I, C_O, S_F)`. Because classical strategies are
//! fixed by dephasing, the strategy blocks `D_π` are diagonal and the program
//! is assembled as a linear program over their 6 × 256 diagonal entries.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::classical::{run_losr, MemoryBitStrategy};
use crate::error::{Error, Result};
use crate::game::{all_orders, optimal_decoder, Party, Perm3};
use crate::report::{Certificate, Probability, ScenarioResult, SolverSummary};
use crate::solver::{solve, Cone, ConicProblem, Sense, SolveReport, SolveStatus, SolverSettings, Triplet};
use crate::tensor::{
    kron, labels, partial_trace, permute_to_layout, rational, rational_to_f64, vectorize, CMatrix, COperator,
    LabeledOperator, Matrix, Scalar, SpaceLabel, SpaceName,
};

use SpaceName::*;

pub const CANONICAL: [SpaceName; 8] = [SP, AI, AO, BI, BO, CI, CO, SF];
/// Side of every strategy block.
pub const BLOCK: usize = 256;
/// Normalization `Σ_π tr(D_π)`.
pub const TOTAL_TRACE: i64 = 16;

pub fn canonical_layout() -> Vec<SpaceLabel> {
    labels(&CANONICAL)
}

fn canonical_position(name: SpaceName) -> usize {
    CANONICAL.iter().position(|&n| n == name).unwrap()
}

/// Value of the bit for `name` in a canonical basis index.
pub fn bit_of(index: usize, name: SpaceName) -> usize {
    (index >> (7 - canonical_position(name))) & 1
}

fn with_bit(index: usize, name: SpaceName, bit: usize) -> usize {
    let shift = 7 - canonical_position(name);
    (index & !(1 << shift)) | (bit << shift)
}

/// `|1⟩⟩⟨⟨1|` on the pair `(out, into)`.
fn wire<T: Scalar>(from: SpaceName, to: SpaceName) -> Result<LabeledOperator<T>> {
    let id = LabeledOperator::<T>::identity(labels(&[from]))?;
    let v = vectorize(&id, labels(&[to]))?;
    let d = v.data();
    let m = Matrix::from_fn(4, 4, |i, j| d[i].clone() * d[j].conj());
    LabeledOperator::new(labels(&[from, to]), m)
}

/// The order-π process matrix in any scalar type, on the canonical layout.
pub fn process_matrix<T: Scalar>(pi: &Perm3) -> Result<LabeledOperator<T>> {
    let [p1, p2, p3] = pi.order();
    let factors = [
        wire::<T>(SP, p1.input_space())?,
        wire::<T>(p1.output_space(), p2.input_space())?,
        wire::<T>(p2.output_space(), p3.input_space())?,
        wire::<T>(p3.output_space(), SF)?,
    ];
    let mut w = factors[0].clone();
    for f in &factors[1..] {
        w = kron(&w, f)?;
    }
    permute_to_layout(&w, &canonical_layout())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrixW {
    pub pi: Perm3,
    pub op: COperator,
}

impl ProcessMatrixW {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..BLOCK).map(|i| self.op.matrix()[(i, i)].re).collect()
    }
}

pub fn build_w(pi: &Perm3) -> Result<ProcessMatrixW> {
    let op = process_matrix::<Complex64>(pi)?;
    // real in the computational basis, so W = W^T and the transpose in the
    // link product can be dropped
    assert!(
        op.matrix().max_abs_diff(&op.matrix().transpose()) == 0.0,
        "process matrix is not symmetric"
    );
    Ok(ProcessMatrixW { pi: *pi, op })
}

/// One outcome block `D_π` of a strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBlock {
    pub pi: Perm3,
    pub op: COperator,
}

/// `tr(D W)`: probability weight of guessing `block.pi` when `w.pi` is the true order.
pub fn link_probability(block: &NetworkBlock, w: &ProcessMatrixW) -> Result<f64> {
    let op = if block.op.layout() == w.op.layout() {
        block.op.clone()
    } else {
        permute_to_layout(&block.op, w.op.layout())?
    };
    Ok(op.trace_product(&w.op)?.re)
}

fn owner(name: SpaceName) -> Option<(Party, bool)> {
    Some(match name {
        AI => (Party::A, true),
        AO => (Party::A, false),
        BI => (Party::B, true),
        BO => (Party::B, false),
        CI => (Party::C, true),
        CO => (Party::C, false),
        _ => return None,
    })
}

/// Renames every party-owned label through `party_map`, keeping the layout.
pub fn relabel_parties<T: Scalar>(op: &LabeledOperator<T>, party_map: &Perm3) -> Result<LabeledOperator<T>> {
    let renamed = op.relabel(|l| match owner(l.name) {
        Some((party, input)) => {
            let target = party_map.order()[party.index()];
            let name = if input {
                target.input_space()
            } else {
                target.output_space()
            };
            SpaceLabel { name, dim: l.dim }
        }
        None => l,
    })?;
    permute_to_layout(&renamed, op.layout())
}

/// The non-signaling program over the diagonals, with exact rational data.
///
/// Variable `k = 256·i + s` is entry `s` of the diagonal of `D_{π_i}`, with
/// `π_i` the `i`-th order of [`all_orders`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalProgram {
    pub orders: Vec<Perm3>,
    pub objective: Vec<BigRational>,
    pub rows: Vec<Vec<(usize, BigRational)>>,
    pub rhs: Vec<BigRational>,
}

pub fn variable_index(order_index: usize, basis_index: usize) -> usize {
    order_index * BLOCK + basis_index
}

/// Rows of `Σ_π tr_T(D_π) = I_R/2 ⊗ Σ_π tr_{T,R}(D_π)`, restricted to
/// diagonals. Rows are indexed by the bits of the labels outside `traced`.
fn marginal_rows(traced: &[SpaceName], replaced: SpaceName) -> Vec<Vec<(usize, BigRational)>> {
    let kept: Vec<SpaceName> = CANONICAL.iter().copied().filter(|n| !traced.contains(n)).collect();
    let row_of = |s: usize| kept.iter().fold(0, |acc, &n| (acc << 1) | bit_of(s, n));
    let mut rows: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); 1 << kept.len()];
    let half = rational(1, 2);
    for i in 0..6 {
        for s in 0..BLOCK {
            let var = variable_index(i, s);
            let lhs = rows[row_of(s)].entry(var).or_insert_with(BigRational::zero);
            *lhs += BigRational::from_integer(1.into());
            for r in 0..2 {
                let row = row_of(with_bit(s, replaced, r));
                let e = rows[row].entry(var).or_insert_with(BigRational::zero);
                *e -= half.clone();
            }
        }
    }
    rows.into_iter()
        .map(|r| r.into_iter().filter(|(_, v)| !v.is_zero()).collect())
        .collect()
}

pub fn nonsignaling_program_exact() -> Result<DiagonalProgram> {
    let orders = all_orders();
    let mut objective = Vec::with_capacity(6 * BLOCK);
    for pi in &orders {
        let w = process_matrix::<BigRational>(pi)?;
        for s in 0..BLOCK {
            objective.push(w.matrix()[(s, s)].clone() * rational(1, 6));
        }
    }
    let mut rows = marginal_rows(&[], SF);
    for party in Party::ALL {
        rows.extend(marginal_rows(&[SF, party.output_space()], party.input_space()));
    }
    let mut rhs = vec![BigRational::zero(); rows.len()];
    rows.push((0..6 * BLOCK).map(|k| (k, rational(1, 1))).collect());
    rhs.push(rational(TOTAL_TRACE, 1));
    Ok(DiagonalProgram {
        orders,
        objective,
        rows,
        rhs,
    })
}

/// Exact evaluation of a candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCheck {
    pub objective: BigRational,
    /// Number of equality rows not satisfied exactly.
    pub violated_rows: usize,
    pub negative_entries: usize,
}

impl ExactCheck {
    pub fn feasible(&self) -> bool {
        self.violated_rows == 0 && self.negative_entries == 0
    }
}

impl DiagonalProgram {
    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn to_conic(&self) -> ConicProblem {
        let equalities = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter().map(move |(c, v)| Triplet {
                    row: r,
                    col: *c,
                    value: rational_to_f64(v),
                })
            })
            .collect();
        ConicProblem {
            cones: vec![Cone::NonnegOrthant(self.dim())],
            sense: Sense::Maximize,
            objective: self.objective.iter().map(rational_to_f64).collect(),
            equalities,
            rhs: self.rhs.iter().map(rational_to_f64).collect(),
        }
    }

    pub fn check(&self, point: &[BigRational]) -> ExactCheck {
        let violated_rows = self
            .rows
            .iter()
            .zip(&self.rhs)
            .filter(|(row, b)| {
                let lhs = row.iter().fold(BigRational::zero(), |acc, (k, v)| acc + v * &point[*k]);
                &lhs != *b
            })
            .count();
        let objective = self
            .objective
            .iter()
            .zip(point)
            .fold(BigRational::zero(), |acc, (c, x)| acc + c * x);
        ExactCheck {
            objective,
            violated_rows,
            negative_entries: point.iter().filter(|x| x.is_negative()).count(),
        }
    }
}

pub fn assemble_nonsignaling_program() -> Result<ConicProblem> {
    Ok(nonsignaling_program_exact()?.to_conic())
}

/// The deterministic network of a memory strategy: prepare `input` on `S_P`,
/// let each party forward its strategy's output and keep its input as a
/// record, and decode `(S_F, records)` with the optimal decoder.
pub fn embed_memory_strategy(strategies: &[MemoryBitStrategy; 3], input: u8) -> Vec<BigRational> {
    let orders = all_orders();
    let outcomes: BTreeMap<Perm3, (u8, [u8; 3])> = orders
        .iter()
        .map(|pi| {
            let t = run_losr(pi, strategies, input);
            let (s, a, b, c) = t.bits().expect("all parties act");
            (*pi, (s, [a, b, c]))
        })
        .collect();
    let decoder = optimal_decoder(&outcomes);
    let mut point = vec![BigRational::zero(); 6 * BLOCK];
    for s in 0..BLOCK {
        if bit_of(s, SP) != input as usize {
            continue;
        }
        let consistent = Party::ALL.iter().all(|p| {
            let x = bit_of(s, p.input_space()) as u8;
            bit_of(s, p.output_space()) as u8 == strategies[p.index()].apply(x).0
        });
        if !consistent {
            continue;
        }
        let key = (
            bit_of(s, SF) as u8,
            Party::ALL.map(|p| bit_of(s, p.input_space()) as u8),
        );
        let guess = decoder.get(&key).copied().unwrap_or(orders[0]);
        let i = orders.iter().position(|p| *p == guess).unwrap();
        point[variable_index(i, s)] = rational(1, 1);
    }
    point
}

/// Splits a solution vector into the six diagonal blocks as operators.
pub fn blocks_from_solution(solution: &[f64]) -> Result<Vec<NetworkBlock>> {
    all_orders()
        .into_iter()
        .enumerate()
        .map(|(i, pi)| {
            let diag: Vec<Complex64> = solution[i * BLOCK..(i + 1) * BLOCK]
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect();
            Ok(NetworkBlock {
                pi,
                op: LabeledOperator::new(canonical_layout(), CMatrix::diagonal(&diag))?,
            })
        })
        .collect()
}

/// Max-norm residual of the non-signaling constraints evaluated on full
/// operators through partial traces (independent of the LP row bookkeeping).
pub fn operator_form_residual(blocks: &[NetworkBlock]) -> Result<f64> {
    let mut total = blocks[0].op.clone();
    for b in &blocks[1..] {
        total = total.add(&b.op)?;
    }
    let half_identity = |name: SpaceName| -> Result<COperator> {
        Ok(COperator::identity(labels(&[name]))?.scale(&Complex64::new(0.5, 0.0)))
    };
    let mut worst: f64 = 0.0;

    let rhs = kron(&half_identity(SF)?, &partial_trace(&total, &[SF])?)?;
    let rhs = permute_to_layout(&rhs, total.layout())?;
    worst = worst.max(total.matrix().max_abs_diff(rhs.matrix()));

    for party in Party::ALL {
        let lhs = partial_trace(&total, &[SF, party.output_space()])?;
        let inner = partial_trace(&total, &[SF, party.input_space(), party.output_space()])?;
        let rhs = kron(&half_identity(party.input_space())?, &inner)?;
        let rhs = permute_to_layout(&rhs, lhs.layout())?;
        worst = worst.max(lhs.matrix().max_abs_diff(rhs.matrix()));
    }
    worst = worst.max((total.trace().re - TOTAL_TRACE as f64).abs());
    Ok(worst)
}

/// `Σ_{π'} tr(D_{π'} W_π)` for each true order π.
pub fn total_weight_per_order(blocks: &[NetworkBlock]) -> Result<Vec<f64>> {
    all_orders()
        .iter()
        .map(|pi| {
            let w = build_w(pi)?;
            blocks.iter().map(|b| link_probability(b, &w)).sum()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct NonsignalingSolution {
    pub result: ScenarioResult,
    pub report: SolveReport,
    pub blocks: Vec<NetworkBlock>,
}

pub fn solve_nonsignaling(settings: &SolverSettings) -> Result<NonsignalingSolution> {
    let problem = assemble_nonsignaling_program()?;
    let report = solve(&problem, settings)?;
    if report.status == SolveStatus::InfeasibleSuspected {
        return Err(Error::SolverFailed {
            status: format!("{:?}", report.status),
            primal_residual: report.primal_residual,
            dual_residual: report.dual_residual,
        });
    }
    let blocks = blocks_from_solution(&report.solution)?;
    let probability = report.objective_value;
    assert!(probability <= 1.0 + 1e-6, "success probability {probability} exceeds 1");

    let weights = total_weight_per_order(&blocks)?;
    let spread = weights.iter().fold(0.0f64, |m, w| m.max((w - weights[0]).abs()));
    let min_entry = report.solution.iter().copied().fold(f64::INFINITY, f64::min);
    let mut summary = SolverSummary::from(&report);
    summary.checks = vec![
        ("min D entry".into(), min_entry),
        ("spread of sum_pi' tr(D_pi' W_pi)".into(), spread),
        ("operator-form residual".into(), operator_form_residual(&blocks)?),
    ];
    let result = ScenarioResult {
        scenario: "nonsignaling".into(),
        probability: Probability::Float(probability),
        strategy: format!(
            "LP over dephased strategy blocks ({} variables, {} independent equalities)",
            problem.dim(),
            report.constraint_rank
        ),
        certificate: Some(Certificate::Solver(summary)),
    };
    Ok(NonsignalingSolution { result, report, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::QOperator;
    use num_traits::One;

    #[test]
    fn w_trace_rank_symmetry() {
        for pi in all_orders() {
            let w = build_w(&pi).unwrap();
            assert_eq!(w.op.side(), 256);
            assert!((w.op.trace() - Complex64::new(16.0, 0.0)).norm() < 1e-12);
            assert_eq!(w.op.matrix(), &w.op.matrix().transpose());
            let exact: QOperator = process_matrix(&pi).unwrap();
            assert_eq!(exact.matrix().rank(), 1);
            // rank-1 with trace 16 and W^2 = 16 W  ⇒  PSD
            let sq = exact.matmul(&exact).unwrap();
            assert_eq!(sq, exact.scale(&rational(16, 1)));
        }
    }

    #[test]
    fn w_marginal_over_final_space() {
        // tr_{S_F} W for A→B→C = three wire projectors ⊗ I on C_O
        let pi = all_orders()[0];
        let w: QOperator = process_matrix(&pi).unwrap();
        let marginal = partial_trace(&w, &[SF]).unwrap();
        let expected = kron(
            &kron(
                &kron(&wire::<BigRational>(SP, AI).unwrap(), &wire(AO, BI).unwrap()).unwrap(),
                &wire(BO, CI).unwrap(),
            )
            .unwrap(),
            &QOperator::identity(labels(&[CO])).unwrap(),
        )
        .unwrap();
        let expected = permute_to_layout(&expected, marginal.layout()).unwrap();
        assert_eq!(marginal, expected);
    }

    #[test]
    fn w_diagonal_counts_wirings() {
        for pi in all_orders() {
            let w = build_w(&pi).unwrap();
            let d = w.diagonal();
            assert_eq!(d.iter().filter(|&&x| x == 1.0).count(), 16);
            assert_eq!(d.iter().filter(|&&x| x == 0.0).count(), 240);
        }
    }

    #[test]
    fn relabeling_parties_maps_process_matrices() {
        for rho in all_orders() {
            for pi in all_orders() {
                let w = process_matrix::<BigRational>(&pi).unwrap();
                let relabeled = relabel_parties(&w, &rho).unwrap();
                assert_eq!(relabeled, process_matrix(&rho.compose(&pi)).unwrap());
            }
        }
    }

    #[test]
    fn link_probability_examples() {
        let pi = all_orders()[2];
        let w = build_w(&pi).unwrap();
        let scaled = NetworkBlock {
            pi,
            op: w.op.scale(&Complex64::new(1.0 / 16.0, 0.0)),
        };
        assert!((link_probability(&scaled, &w).unwrap() - 16.0).abs() < 1e-12);
        let zero = NetworkBlock {
            pi,
            op: w.op.scale(&Complex64::new(0.0, 0.0)),
        };
        assert_eq!(link_probability(&zero, &w).unwrap(), 0.0);
        let mixed = NetworkBlock {
            pi,
            op: COperator::identity(canonical_layout())
                .unwrap()
                .scale(&Complex64::new(1.0 / 256.0, 0.0)),
        };
        assert!((link_probability(&mixed, &w).unwrap() - 1.0 / 16.0).abs() < 1e-14);

        let wrong = NetworkBlock {
            pi,
            op: COperator::identity(labels(&[AI])).unwrap(),
        };
        assert!(link_probability(&wrong, &w).is_err());
    }

    #[test]
    fn nonsignaling_program_shape() {
        let p = nonsignaling_program_exact().unwrap();
        assert_eq!(p.dim(), 1536);
        assert_eq!(p.rows.len(), 256 + 3 * 64 + 1);
        assert_eq!(p.rhs.last().unwrap(), &rational(16, 1));
        let conic = p.to_conic();
        assert_eq!(conic.cones, vec![Cone::NonnegOrthant(1536)]);
        conic.validate().unwrap();
    }

    #[test]
    fn uniform_point_is_feasible_with_value_one_sixth() {
        let p = nonsignaling_program_exact().unwrap();
        let point = vec![rational(1, 96); 1536];
        let check = p.check(&point);
        assert!(check.feasible());
        assert_eq!(check.objective, rational(1, 6));
    }

    #[test]
    fn losr_witness_embeds_with_five_sixths() {
        let p = nonsignaling_program_exact().unwrap();
        let w = [
            MemoryBitStrategy::new(0, 0),
            MemoryBitStrategy::new(1, 1),
            MemoryBitStrategy::new(1, 1),
        ];
        let point = embed_memory_strategy(&w, 0);
        let check = p.check(&point);
        assert!(check.feasible(), "{check:?}");
        assert_eq!(check.objective, rational(5, 6));

        // every deterministic network has unit weight against each order
        let blocks = blocks_from_solution(&point.iter().map(rational_to_f64).collect::<Vec<_>>()).unwrap();
        for w in total_weight_per_order(&blocks).unwrap() {
            assert!((w - 1.0).abs() < 1e-12);
        }
        assert!(operator_form_residual(&blocks).unwrap() < 1e-12);
    }

    #[test]
    fn every_memory_strategy_embeds_feasibly() {
        let p = nonsignaling_program_exact().unwrap();
        for a in MemoryBitStrategy::all() {
            for b in MemoryBitStrategy::all() {
                let point = embed_memory_strategy(&[a, b, MemoryBitStrategy::new(0, 1)], 1);
                let check = p.check(&point);
                assert!(check.feasible());
                assert!(check.objective <= BigRational::one());
            }
        }
    }

    #[test]
    fn tableau_dump_round_trips() {
        let conic = assemble_nonsignaling_program().unwrap();
        let back = ConicProblem::from_tableau(&conic.to_tableau()).unwrap();
        assert_eq!(back, conic);
    }
}
