//! Quantum strategies: single-qubit channels without memory, and the
//! entanglement-assisted swap strategy that separates all six orders.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{all_orders, Perm3};
use crate::report::{Certificate, Probability, ScenarioResult, SolverSummary};
use crate::solver::{
    hermitian_functional, solve, svec_to_hermitian, Cone, ConicProblem, Sense, SolveReport, SolveStatus,
    SolverSettings, Triplet,
};
use crate::tensor::{
    format_rational, jacobi_eigh, kron, labels, permute_to_layout, rational, vectorize, CMatrix, COperator,
    LabeledOperator, LabeledVector, Matrix, QOperator, Scalar, SpaceLabel, SpaceName,
};

use SpaceName::*;

/// Layout of the shared state: the three input registers and the system.
pub const LOSE_LAYOUT: [SpaceName; 4] = [AI, BI, CI, S];
pub const LOSE_DIM: usize = 16;

/// Unitarity tolerance for float channels.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryChannel<T> {
    kraus: LabeledOperator<T>,
}

impl<T: Scalar> UnitaryChannel<T> {
    pub fn new(kraus: LabeledOperator<T>) -> Result<Self> {
        let n = kraus.side();
        let product = kraus.matrix().adjoint().matmul(kraus.matrix());
        let id = Matrix::<T>::identity(n);
        let ok = product
            .data()
            .iter()
            .zip(id.data())
            .all(|(a, b)| a.near(b, UNITARY_TOL));
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is not unitary (deviation {:e})",
                product.max_abs_diff(&id)
            )));
        }
        Ok(UnitaryChannel { kraus })
    }

    pub fn kraus(&self) -> &LabeledOperator<T> {
        &self.kraus
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_qubit(entries: [[Complex64; 2]; 2]) -> Result<UnitaryChannel<Complex64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = CMatrix::from_fn(2, 2, |i, j| entries[i][j] * h);
    UnitaryChannel::new(LabeledOperator::new(labels(&[S]), m)?)
}

/// The three channels whose six compositions map `|0⟩` onto three mutually
/// unbiased bases.
pub fn mub_channels() -> Result<[UnitaryChannel<Complex64>; 3]> {
    Ok([
        single_qubit([[c(1., 0.), c(0., -1.)], [c(-1., 0.), c(0., -1.)]])?,
        single_qubit([[c(1., 0.), c(0., 1.)], [c(-1., 0.), c(0., 1.)]])?,
        single_qubit([[c(0., 0.), c(1., -1.)], [c(1., 1.), c(0., 0.)]])?,
    ])
}

pub fn ket(amplitudes: [Complex64; 2]) -> LabeledVector<Complex64> {
    LabeledVector::new(labels(&[S]), amplitudes.to_vec()).expect("qubit ket")
}

/// Output of applying the channels in order `pi` to `input`.
pub fn compose_on(
    pi: &Perm3,
    channels: &[UnitaryChannel<Complex64>; 3],
    input: &LabeledVector<Complex64>,
) -> Result<LabeledVector<Complex64>> {
    pi.order()
        .iter()
        .try_fold(input.clone(), |v, p| v.apply_on(channels[p.index()].kraus()))
}

pub fn order_states(channels: &[UnitaryChannel<Complex64>; 3]) -> Result<BTreeMap<Perm3, LabeledVector<Complex64>>> {
    let zero = ket([c(1., 0.), c(0., 0.)]);
    all_orders()
        .into_iter()
        .map(|pi| Ok((pi, compose_on(&pi, channels, &zero)?)))
        .collect()
}

pub fn mub_order_states() -> Result<BTreeMap<Perm3, LabeledVector<Complex64>>> {
    order_states(&mub_channels()?)
}

/// Named basis states `|0⟩, |1⟩, |±⟩, |±i⟩`.
pub fn named_state(name: &str) -> Option<LabeledVector<Complex64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match name {
        "0" => [c(1., 0.), c(0., 0.)],
        "1" => [c(0., 0.), c(1., 0.)],
        "+" => [c(h, 0.), c(h, 0.)],
        "-" => [c(h, 0.), c(-h, 0.)],
        "i" => [c(h, 0.), c(0., h)],
        "-i" => [c(h, 0.), c(0., -h)],
        _ => return None,
    };
    Some(ket(amps))
}

pub fn bloch_vector(v: &LabeledVector<Complex64>) -> [f64; 3] {
    let d = v.data();
    let (a, b) = (d[0], d[1]);
    let off = a.conj() * b;
    [2.0 * off.re, 2.0 * off.im, a.norm_sqr() - b.norm_sqr()]
}

/// Optimal discrimination of six equiprobable states by a POVM, as a cone
/// program over six 2×2 PSD effects summing to the identity.
pub fn discrimination_program(states: &BTreeMap<Perm3, LabeledVector<Complex64>>) -> ConicProblem {
    let side = states.values().next().map_or(2, |v| v.data().len());
    let block = side * side;
    let mut objective = Vec::with_capacity(6 * block);
    for v in states.values() {
        let d = v.data();
        let rho = CMatrix::from_fn(side, side, |i, j| d[i] * d[j].conj());
        objective.extend(hermitian_functional(&rho).into_iter().map(|x| x / 6.0));
    }
    let mut equalities = Vec::new();
    for k in 0..block {
        for i in 0..states.len() {
            equalities.push(Triplet {
                row: k,
                col: i * block + k,
                value: 1.0,
            });
        }
    }
    let rhs = crate::solver::hermitian_to_svec(&CMatrix::identity(side));
    ConicProblem {
        cones: vec![Cone::HermitianPsd(side); states.len()],
        sense: Sense::Maximize,
        objective,
        equalities,
        rhs,
    }
}

pub fn memoryless_quantum_bound(
    states: &BTreeMap<Perm3, LabeledVector<Complex64>>,
    settings: &SolverSettings,
) -> Result<(ScenarioResult, SolveReport)> {
    let problem = discrimination_program(states);
    let report = solve(&problem, settings)?;
    let mut summary = SolverSummary::from(&report);
    summary
        .checks
        .push(("excess over 1/3".into(), (report.objective_value - 1.0 / 3.0).max(0.0)));
    let result = ScenarioResult {
        scenario: "quantum-memoryless".into(),
        probability: Probability::Float(report.objective_value),
        strategy: "rho=|0><0|, channels A, B, C producing three mutually unbiased bases; optimal POVM".into(),
        certificate: Some(Certificate::Solver(summary)),
    };
    Ok((result, report))
}

/// Haar-random 2×2 unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn haar_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
    let mut g = |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng));
    let m = CMatrix::from_fn(2, 2, &mut g);
    let col0 = [m[(0, 0)], m[(1, 0)]];
    let n0 = (col0[0].norm_sqr() + col0[1].norm_sqr()).sqrt();
    let q0 = [col0[0] / n0, col0[1] / n0];
    let col1 = [m[(0, 1)], m[(1, 1)]];
    let proj = q0[0].conj() * col1[0] + q0[1].conj() * col1[1];
    let r1 = [col1[0] - proj * q0[0], col1[1] - proj * q0[1]];
    let n1 = (r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
    CMatrix::from_rows(vec![vec![q0[0], r1[0] / n1], vec![q0[1], r1[1] / n1]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomBoundSummary {
    pub samples: usize,
    pub seed: u64,
    pub max_probability: f64,
}

/// Discrimination optimum for `samples` seeded random channel triples.
pub fn random_bound_check(samples: usize, seed: u64, settings: &SolverSettings) -> Result<RandomBoundSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<[CMatrix; 3]> = (0..samples)
        .map(|_| [haar_unitary(&mut rng), haar_unitary(&mut rng), haar_unitary(&mut rng)])
        .collect();
    let optima: Vec<f64> = triples
        .par_iter()
        .map(|t| {
            let channels = [
                UnitaryChannel::new(LabeledOperator::new(labels(&[S]), t[0].clone())?)?,
                UnitaryChannel::new(LabeledOperator::new(labels(&[S]), t[1].clone())?)?,
                UnitaryChannel::new(LabeledOperator::new(labels(&[S]), t[2].clone())?)?,
            ];
            let states = order_states(&channels)?;
            Ok(solve(&discrimination_program(&states), settings)?.objective_value)
        })
        .collect::<Result<_>>()?;
    Ok(RandomBoundSummary {
        samples,
        seed,
        max_probability: optima.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

pub fn lose_layout() -> Vec<SpaceLabel> {
    labels(&LOSE_LAYOUT)
}

/// `U = Σ_{i,j} |i,j⟩⟨j,i|` on the pair `(S, A_I)`.
pub fn swap_unitary() -> Result<UnitaryChannel<BigRational>> {
    swap_on(S, AI)
}

fn swap_on(a: SpaceName, b: SpaceName) -> Result<UnitaryChannel<BigRational>> {
    let m = Matrix::from_fn(4, 4, |row, col| {
        let (i, j) = (row / 2, row % 2);
        if col == j * 2 + i {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    });
    UnitaryChannel::new(LabeledOperator::new(labels(&[a, b]), m)?)
}

/// Swap of `S` with `register`, embedded on the shared-state layout.
fn embedded_swap(register: SpaceName) -> Result<QOperator> {
    let u = swap_on(S, register)?;
    let rest: Vec<SpaceName> = LOSE_LAYOUT
        .iter()
        .copied()
        .filter(|&n| n != S && n != register)
        .collect();
    let full = kron(u.kraus(), &QOperator::identity(labels(&rest))?)?;
    permute_to_layout(&full, &lose_layout())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemPermutationMatrix {
    pub pi: Perm3,
    pub op: QOperator,
}

/// `M_π = U_{S,π(3)} U_{S,π(2)} U_{S,π(1)}`.
pub fn build_m(pi: &Perm3) -> Result<SystemPermutationMatrix> {
    let mut m = QOperator::identity(lose_layout())?;
    for party in pi.order() {
        m = embedded_swap(party.input_space())?.matmul(&m)?;
    }
    Ok(SystemPermutationMatrix { pi: *pi, op: m })
}

/// `M_{π'}^T M_π` for the 30 ordered pairs `π' ≠ π`, as `(π', π, operator)`.
pub fn pair_operators() -> Result<Vec<(Perm3, Perm3, QOperator)>> {
    let ms: Vec<_> = all_orders().iter().map(build_m).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(30);
    for a in &ms {
        for b in &ms {
            if a.pi != b.pi {
                out.push((a.pi, b.pi, a.op.adjoint().matmul(&b.op)?));
            }
        }
    }
    Ok(out)
}

/// Equal superposition of the `n`-bit strings of Hamming weight `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeVector {
    pub n: usize,
    pub k: usize,
    /// Squared amplitude `1 / C(n, k)` of every supported basis state.
    pub amplitude_sq: BigRational,
    /// Basis indices of weight `k`, ascending.
    pub support: Vec<usize>,
}

pub fn dicke(n: usize, k: usize) -> Result<DickeVector> {
    if k > n || n >= usize::BITS as usize {
        return Err(Error::InvalidExcitation { n, k });
    }
    let support: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() as usize == k).collect();
    Ok(DickeVector {
        n,
        k,
        amplitude_sq: rational(1, support.len() as i64),
        support,
    })
}

impl DickeVector {
    pub fn to_vector(&self, layout: Vec<SpaceLabel>) -> Result<LabeledVector<Complex64>> {
        let amp = crate::tensor::rational_to_f64(&self.amplitude_sq).sqrt();
        let mut data = vec![Complex64::zero(); 1 << self.n];
        for &s in &self.support {
            data[s] = c(amp, 0.0);
        }
        LabeledVector::new(layout, data)
    }

    /// `|D⟩⟨D|` in exact arithmetic.
    pub fn projector(&self, layout: Vec<SpaceLabel>) -> Result<QOperator> {
        let dim = 1 << self.n;
        let mut m = Matrix::zeros(dim, dim);
        for &i in &self.support {
            for &j in &self.support {
                m[(i, j)] = self.amplitude_sq.clone();
            }
        }
        LabeledOperator::new(layout, m)
    }
}

/// Projector onto the symmetric subspace of the four shared qubits.
pub fn symmetric_projector() -> Result<QOperator> {
    let mut p = QOperator::identity(lose_layout())?.scale(&BigRational::zero());
    for k in 0..=4 {
        p = p.add(&dicke(4, k)?.projector(lose_layout())?)?;
    }
    Ok(p)
}

/// `σ = I/12 − (τ₀ + … + τ₄)/15`.
pub fn swap_sigma() -> Result<QOperator> {
    let id = QOperator::identity(lose_layout())?.scale(&rational(1, 12));
    id.sub(&symmetric_projector()?.scale(&rational(1, 15)))
}

/// Operator permuting the four shared qubits: qubit `j` of the output is
/// qubit `perm[j]` of the input.
pub fn factor_permutation(perm: [usize; 4]) -> Result<QOperator> {
    let m = Matrix::from_fn(LOSE_DIM, LOSE_DIM, |row, col| {
        let bit = |s: usize, pos: usize| (s >> (3 - pos)) & 1;
        let image = (0..4).fold(0, |acc, j| (acc << 1) | bit(col, perm[j]));
        if image == row {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    });
    LabeledOperator::new(lose_layout(), m)
}

pub fn all_factor_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|x| p.contains(&x)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// `√σ = a·P + b·(I − P)` with only `a²`, `b²` stored, for states of the form
/// `σ = a²·P + b²·(I − P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSqrt {
    pub projector: QOperator,
    pub low_sq: BigRational,
    pub high_sq: BigRational,
}

impl TwoLevelSqrt {
    pub fn symmetric() -> Result<Self> {
        Ok(TwoLevelSqrt {
            projector: symmetric_projector()?,
            low_sq: rational(1, 60),
            high_sq: rational(1, 12),
        })
    }

    pub fn sigma(&self) -> Result<QOperator> {
        let id = QOperator::identity(self.projector.layout().to_vec())?;
        let complement = id.sub(&self.projector)?;
        self.projector.scale(&self.low_sq).add(&complement.scale(&self.high_sq))
    }

    /// `⟨⟨X √σ | Y √σ⟩⟩ = tr(√σ X† Y √σ) = a² tr(N P) + b² tr(N (I−P))` for `N = X†Y`;
    /// the cross terms vanish because `P (I − P) = 0`.
    pub fn gram_entry(&self, n: &QOperator) -> Result<BigRational> {
        let np = n.trace_product(&self.projector)?;
        let total = n.trace();
        Ok(self.low_sq.clone() * np.clone() + self.high_sq.clone() * (total - np))
    }

    pub fn to_complex(&self) -> Result<COperator> {
        let p = self.projector.to_complex();
        let id = COperator::identity(p.layout().to_vec())?;
        let a = crate::tensor::rational_to_f64(&self.low_sq).sqrt();
        let b = crate::tensor::rational_to_f64(&self.high_sq).sqrt();
        p.scale(&c(a, 0.0)).add(&id.sub(&p)?.scale(&c(b, 0.0)))
    }
}

/// Exact 6×6 Gram matrix of the purified outputs `|M_π √σ⟩⟩`.
pub fn exact_gram(sqrt: &TwoLevelSqrt) -> Result<Matrix<BigRational>> {
    let ms: Vec<_> = all_orders().iter().map(build_m).collect::<Result<_>>()?;
    let mut g = Matrix::zeros(6, 6);
    for (i, a) in ms.iter().enumerate() {
        for (j, b) in ms.iter().enumerate() {
            g[(i, j)] = sqrt.gram_entry(&a.op.adjoint().matmul(&b.op)?)?;
        }
    }
    Ok(g)
}

fn check_state(sigma: &COperator) -> Result<()> {
    let eig = crate::tensor::eig_hermitian(sigma)?;
    if eig.values[0] < -1e-8 {
        return Err(Error::NotPsd(eig.values[0]));
    }
    Ok(())
}

/// Purified outputs `(M_π ⊗ I_E)|√σ⟩⟩` with `E` a 16-dimensional copy.
pub fn lose_output_states(sigma: &COperator) -> Result<BTreeMap<Perm3, LabeledVector<Complex64>>> {
    let eig = crate::tensor::eig_hermitian(sigma)?;
    if eig.values[0] < -1e-8 {
        return Err(Error::NotPsd(eig.values[0]));
    }
    let root = LabeledOperator::new(sigma.layout().to_vec(), eig.reconstruct_with(|l| l.max(0.0).sqrt()))?;
    outputs_from_root(&root)
}

/// Same outputs for the exact state, through the closed-form square root.
pub fn lose_output_states_exact() -> Result<BTreeMap<Perm3, LabeledVector<Complex64>>> {
    outputs_from_root(&TwoLevelSqrt::symmetric()?.to_complex()?)
}

fn outputs_from_root(root: &COperator) -> Result<BTreeMap<Perm3, LabeledVector<Complex64>>> {
    let purified = vectorize(root, vec![SpaceLabel::env(LOSE_DIM)])?;
    all_orders()
        .into_iter()
        .map(|pi| {
            let m = permute_to_layout(&build_m(&pi)?.op, root.layout())?.to_complex();
            Ok((pi, purified.apply_on(&m)?))
        })
        .collect()
}

pub fn gram_matrix(states: &BTreeMap<Perm3, LabeledVector<Complex64>>) -> CMatrix {
    let vs: Vec<_> = states.values().collect();
    CMatrix::from_fn(vs.len(), vs.len(), |i, j| vs[i].inner(vs[j]))
}

/// Success probability of the square-root measurement on pure states with
/// Gram matrix `g` and equal priors: `(1/n) Σ_i ((√G)_ii)²`.
pub fn square_root_measurement_probability(g: &CMatrix) -> f64 {
    let eig = jacobi_eigh(g);
    // round-off eigenvalues of a singular Gram matrix would be amplified by the root
    let cutoff = 1e-12 * eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let root = eig.reconstruct_with(|l| if l > cutoff { l.sqrt() } else { 0.0 });
    let n = g.rows();
    (0..n).map(|i| root[(i, i)].re.powi(2)).sum::<f64>() / n as f64
}

/// Exact verification that `σ` separates all six orders.
pub fn verify_lose_exact(sigma: &QOperator) -> Result<ScenarioResult> {
    if sigma.trace() != BigRational::one() {
        return Err(Error::DimensionMismatch(format!(
            "state must have unit trace, found {}",
            format_rational(&sigma.trace())
        )));
    }
    let mut transcript = Vec::new();
    for (a, b, n) in pair_operators()? {
        let value = n.trace_product(sigma)?;
        if !value.is_zero() {
            return Err(Error::NotOrthogonal {
                first: a,
                second: b,
                value: format_rational(&value),
            });
        }
        transcript.push(format!(
            "tr(M_{a}^T M_{b}) = {}, tr(M_{a}^T M_{b} sigma) = 0",
            format_rational(&n.trace())
        ));
    }
    transcript.push("Gram matrix of the six purified outputs = I_6".into());
    Ok(ScenarioResult {
        scenario: "lose-verify".into(),
        probability: Probability::Exact(BigRational::one()),
        strategy: "each party swaps S with its input register; rho = |sqrt(sigma)>><<sqrt(sigma)|, \
                   sigma = I/12 - (tau_0 + ... + tau_4)/15; measure in the orthonormal output basis"
            .into(),
        certificate: Some(Certificate::Transcript(transcript)),
    })
}

/// Floating-point verification with tolerance `tol` on each pair trace.
pub fn verify_lose(sigma: &COperator, tol: f64) -> Result<(f64, f64)> {
    check_state(sigma)?;
    let mut worst: f64 = 0.0;
    for (a, b, n) in pair_operators()? {
        let value = n.to_complex().trace_product(sigma)?;
        if value.norm() > tol {
            return Err(Error::NotOrthogonal {
                first: a,
                second: b,
                value: format!("{value}"),
            });
        }
        worst = worst.max(value.norm());
    }
    let gram = gram_matrix(&lose_output_states(sigma)?);
    Ok((square_root_measurement_probability(&gram), worst))
}

/// Feasibility program: maximize `tr σ` subject to `tr(M_{π'}^T M_π σ) = 0` for all
/// ordered pairs, `σ ⪰ 0`, `tr σ ≤ 1` (with a slack variable).
pub fn feasibility_program(pairs: &[(Perm3, Perm3, QOperator)]) -> ConicProblem {
    let block = LOSE_DIM * LOSE_DIM;
    let mut equalities = Vec::new();
    let mut rhs = Vec::new();
    let mut push_row = |coeffs: Vec<f64>, extra: Option<f64>, b: f64| {
        let row = rhs.len();
        for (k, v) in coeffs.into_iter().enumerate() {
            if v != 0.0 {
                equalities.push(Triplet { row, col: k, value: v });
            }
        }
        if let Some(v) = extra {
            equalities.push(Triplet {
                row,
                col: block,
                value: v,
            });
        }
        rhs.push(b);
    };
    for (_, _, n) in pairs {
        let n = n.to_complex().into_matrix();
        let nt = n.adjoint();
        let re = CMatrix::from_fn(LOSE_DIM, LOSE_DIM, |i, j| 0.5 * (n[(i, j)] + nt[(i, j)]));
        let im = CMatrix::from_fn(LOSE_DIM, LOSE_DIM, |i, j| (n[(i, j)] - nt[(i, j)]) / c(0.0, 2.0));
        push_row(hermitian_functional(&re), None, 0.0);
        push_row(hermitian_functional(&im), None, 0.0);
    }
    let trace = hermitian_functional(&CMatrix::identity(LOSE_DIM));
    push_row(trace.clone(), Some(1.0), 1.0);
    let mut objective = trace;
    objective.push(0.0);
    ConicProblem {
        cones: vec![Cone::HermitianPsd(LOSE_DIM), Cone::NonnegOrthant(1)],
        sense: Sense::Maximize,
        objective,
        equalities,
        rhs,
    }
}

pub fn solve_feasibility_sigma(
    pairs: &[(Perm3, Perm3, QOperator)],
    settings: &SolverSettings,
) -> Result<(COperator, SolveReport)> {
    let problem = feasibility_program(pairs);
    let report = solve(&problem, settings)?;
    let block = LOSE_DIM * LOSE_DIM;
    let sigma = svec_to_hermitian(&report.solution[..block], LOSE_DIM);
    Ok((LabeledOperator::new(lose_layout(), sigma)?, report))
}

/// Largest `|tr(M_{π'}^T M_π σ)|` over all pairs.
pub fn max_pair_trace(sigma: &COperator, pairs: &[(Perm3, Perm3, QOperator)]) -> Result<f64> {
    pairs.iter().try_fold(0.0f64, |m, (_, _, n)| {
        Ok(m.max(n.to_complex().trace_product(sigma)?.norm()))
    })
}

fn require_converged(report: &SolveReport) -> Result<()> {
    if report.status == SolveStatus::InfeasibleSuspected {
        return Err(Error::SolverFailed {
            status: format!("{:?}", report.status),
            primal_residual: report.primal_residual,
            dual_residual: report.dual_residual,
        });
    }
    Ok(())
}

/// Feasibility program end to end. The solver's `σ` is rescaled to unit trace, which
/// leaves the homogeneous pair constraints untouched.
pub fn lose_sdp_scenario(settings: &SolverSettings) -> Result<(ScenarioResult, COperator)> {
    let pairs = pair_operators()?;
    let (raw, report) = solve_feasibility_sigma(&pairs, settings)?;
    require_converged(&report)?;
    let trace = raw.trace().re;
    let sigma = raw.scale(&c(1.0 / trace, 0.0));
    let max_pair = max_pair_trace(&sigma, &pairs)?;
    let (probability, _) = verify_lose(&sigma, f64::INFINITY)?;
    let min_eig = crate::tensor::eig_hermitian(&sigma)?.values[0];
    let mut summary = SolverSummary::from(&report);
    summary.checks = vec![
        ("solver trace - 1".into(), trace - 1.0),
        ("max |tr(M'^T M sigma)|".into(), max_pair),
        ("min eigenvalue of sigma (clipped at 0)".into(), min_eig.min(0.0)),
    ];
    let result = ScenarioResult {
        scenario: "lose-sdp".into(),
        probability: Probability::Float(probability),
        strategy: "swap strategy with sigma found by the feasibility program; square-root measurement".into(),
        certificate: Some(Certificate::Solver(summary)),
    };
    Ok((result, sigma))
}

/// MUB discrimination bound, plus the largest optimum over `samples` random
/// channel triples drawn from `seed`.
pub fn quantum_memoryless_scenario(settings: &SolverSettings, samples: usize, seed: u64) -> Result<ScenarioResult> {
    let (mut result, report) = memoryless_quantum_bound(&mub_order_states()?, settings)?;
    require_converged(&report)?;
    if samples > 0 {
        let random = random_bound_check(samples, seed, settings)?;
        if let Some(Certificate::Solver(summary)) = &mut result.certificate {
            summary.checks.push((
                format!("random triples ({samples}, seed {seed}): max excess over 1/3"),
                (random.max_probability - 1.0 / 3.0).max(0.0),
            ));
        }
    }
    Ok(result)
}
