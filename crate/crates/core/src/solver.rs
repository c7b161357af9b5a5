//! A small deterministic ADMM solver for cone programs over products of
//! nonnegative orthants and Hermitian PSD cones.
//!
//! The problem is `min/max c·x  s.t.  A x = b,  x ∈ K`. It is split as
//! `x ∈ {A x = b}`, `z ∈ K`, `x = z` and iterated with a fixed penalty and
//! over-relaxation.
//!
//! Hermitian blocks of side `n` are stored as `n²` reals: for `i ≤ j` in
//! row-major order, the diagonal entry `x_ii`, or the pair
//! `√2·Re x_ij, √2·Im x_ij`. With this scaling `tr(X Y) = svec(X)·svec(Y)`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{jacobi_eigh, CMatrix};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    NonnegOrthant(usize),
    /// Hermitian PSD matrices of the given side.
    HermitianPsd(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::NonnegOrthant(n) => n,
            Cone::HermitianPsd(side) => side * side,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub cones: Vec<Cone>,
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub equalities: Vec<Triplet>,
    pub rhs: Vec<f64>,
}

impl ConicProblem {
    pub fn dim(&self) -> usize {
        self.cones.iter().map(Cone::dim).sum()
    }

    /// Offset of each cone block in the concatenated variable.
    pub fn offsets(&self) -> Vec<usize> {
        self.cones
            .iter()
            .scan(0, |acc, c| {
                let start = *acc;
                *acc += c.dim();
                Some(start)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::ProblemMalformed("no variables".into()));
        }
        if self.objective.len() != n {
            return Err(Error::ProblemMalformed(format!(
                "objective has length {}, variable has dimension {n}",
                self.objective.len()
            )));
        }
        let m = self.rhs.len();
        for t in &self.equalities {
            if t.row >= m || t.col >= n {
                return Err(Error::ProblemMalformed(format!(
                    "triplet ({}, {}) outside {m}x{n}",
                    t.row, t.col
                )));
            }
            if !t.value.is_finite() {
                return Err(Error::ProblemMalformed("non-finite constraint coefficient".into()));
            }
        }
        if self.rhs.iter().chain(&self.objective).any(|v| !v.is_finite()) {
            return Err(Error::ProblemMalformed("non-finite data".into()));
        }
        Ok(())
    }

    /// `A x` as a dense vector.
    pub fn apply_equalities(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rhs.len()];
        for t in &self.equalities {
            out[t.row] += t.value * x[t.col];
        }
        out
    }

    pub fn equality_residual(&self, x: &[f64]) -> f64 {
        self.apply_equalities(x)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Plain-text tableau: cones, objective, constraint triplets, right-hand sides.
    pub fn to_tableau(&self) -> String {
        let mut out = String::from("tableau 1\n");
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        let _ = writeln!(out, "sense {sense}");
        for c in &self.cones {
            match c {
                Cone::NonnegOrthant(n) => writeln!(out, "cone orthant {n}"),
                Cone::HermitianPsd(s) => writeln!(out, "cone hpsd {s}"),
            }
            .unwrap();
        }
        let nz: Vec<_> = self.objective.iter().enumerate().filter(|(_, v)| **v != 0.0).collect();
        let _ = writeln!(out, "objective {}", nz.len());
        for (i, v) in nz {
            let _ = writeln!(out, "{i} {v:e}");
        }
        let _ = writeln!(out, "rows {}", self.rhs.len());
        let _ = writeln!(out, "triplets {}", self.equalities.len());
        for t in &self.equalities {
            let _ = writeln!(out, "{} {} {:e}", t.row, t.col, t.value);
        }
        let _ = writeln!(out, "rhs");
        for (i, v) in self.rhs.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "{i} {v:e}");
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_tableau(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let err = |line: usize, message: &str| Error::Tableau {
            line,
            message: message.to_string(),
        };
        fn num<T: FromStr>(line: usize, s: Option<&str>) -> Result<T> {
            s.and_then(|s| s.parse().ok()).ok_or(Error::Tableau {
                line,
                message: format!("expected a number, found {s:?}"),
            })
        }

        let (ln, header) = lines.next().ok_or_else(|| err(0, "empty tableau"))?;
        if header != "tableau 1" {
            return Err(err(ln, "expected header `tableau 1`"));
        }
        let (ln, sense_line) = lines.next().ok_or_else(|| err(ln, "missing sense"))?;
        let sense = match sense_line {
            "sense minimize" => Sense::Minimize,
            "sense maximize" => Sense::Maximize,
            _ => return Err(err(ln, "expected `sense minimize|maximize`")),
        };

        let mut cones = Vec::new();
        while let Some((ln, l)) = lines.peek().copied() {
            let mut parts = l.split_whitespace();
            if parts.next() != Some("cone") {
                break;
            }
            lines.next();
            let kind = parts.next();
            let size: usize = num(ln, parts.next())?;
            cones.push(match kind {
                Some("orthant") => Cone::NonnegOrthant(size),
                Some("hpsd") => Cone::HermitianPsd(size),
                _ => return Err(err(ln, "unknown cone kind")),
            });
        }
        let n: usize = cones.iter().map(Cone::dim).sum();

        fn section<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<usize> {
            let (ln, l) = lines.next().ok_or(Error::Tableau {
                line: 0,
                message: "unexpected end".into(),
            })?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::Tableau {
                    line: ln,
                    message: format!("expected `{name}`"),
                });
            }
            num(ln, parts.next())
        }
        let nobj = section(&mut lines, "objective")?;
        let mut entries = Vec::with_capacity(nobj);
        for _ in 0..nobj {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end"))?;
            let mut p = l.split_whitespace();
            entries.push((ln, num::<usize>(ln, p.next())?, num::<f64>(ln, p.next())?));
        }
        let mut objective = vec![0.0; n];
        for (ln, i, v) in entries {
            *objective
                .get_mut(i)
                .ok_or_else(|| err(ln, "objective index out of range"))? = v;
        }
        let m = section(&mut lines, "rows")?;
        let nnz = section(&mut lines, "triplets")?;
        let mut equalities = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "unexpected end"))?;
            let mut p = l.split_whitespace();
            equalities.push(Triplet {
                row: num(ln, p.next())?,
                col: num(ln, p.next())?,
                value: num(ln, p.next())?,
            });
        }
        match lines.next() {
            Some((_, "rhs")) => {}
            Some((ln, _)) => return Err(err(ln, "expected `rhs`")),
            None => return Err(err(0, "unexpected end")),
        }
        let mut rhs = vec![0.0; m];
        loop {
            match lines.next() {
                Some((_, "end")) => break,
                Some((ln, l)) => {
                    let mut p = l.split_whitespace();
                    let i: usize = num(ln, p.next())?;
                    let v: f64 = num(ln, p.next())?;
                    *rhs.get_mut(i).ok_or_else(|| err(ln, "rhs index out of range"))? = v;
                }
                None => return Err(err(0, "missing `end`")),
            }
        }
        let problem = ConicProblem {
            cones,
            sense,
            objective,
            equalities,
            rhs,
        };
        problem.validate()?;
        Ok(problem)
    }
}

/// Index of entry `(i, j)`, `i <= j`, of a side-`n` Hermitian block in its svec.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    assert!(i <= j && j < n);
    // entries before row i: sum over rows r < i of (1 + 2(n - r - 1))
    let before = i * (2 * n - i);
    if i == j {
        before
    } else {
        before + 1 + 2 * (j - i - 1)
    }
}

pub fn hermitian_to_svec(m: &CMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in i + 1..n {
            out.push(SQRT2 * m[(i, j)].re);
            out.push(SQRT2 * m[(i, j)].im);
        }
    }
    out
}

pub fn svec_to_hermitian(v: &[f64], n: usize) -> CMatrix {
    assert_eq!(v.len(), n * n);
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = Complex64::new(v[k], 0.0);
        k += 1;
        for j in i + 1..n {
            let z = Complex64::new(v[k], v[k + 1]) / SQRT2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Coefficients of the real functional `X ↦ tr(C X)` for Hermitian `C`.
pub fn hermitian_functional(c: &CMatrix) -> Vec<f64> {
    hermitian_to_svec(c)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean projection onto the cone product.
pub fn project_cone(x: &[f64], cones: &[Cone]) -> Vec<f64> {
    let mut out = x.to_vec();
    project_cone_in_place(&mut out, cones);
    out
}

fn project_cone_in_place(x: &mut [f64], cones: &[Cone]) {
    let mut offset = 0;
    for cone in cones {
        let d = cone.dim();
        let block = &mut x[offset..offset + d];
        match *cone {
            Cone::NonnegOrthant(_) => {
                for v in block.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            Cone::HermitianPsd(n) => {
                let projected = project_psd_block(block, n);
                block.copy_from_slice(&projected);
            }
        }
        offset += d;
    }
}

fn project_psd_block(v: &[f64], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![v[0].max(0.0)];
    }
    let m = svec_to_hermitian(v, n);
    let eig = jacobi_eigh(&m);
    if eig.values[0] >= 0.0 {
        return v.to_vec();
    }
    hermitian_to_svec(&eig.reconstruct_with(|l| l.max(0.0)))
}

/// Orthonormal basis of the constraint row space, with the right-hand side
/// expressed in that basis; redundant rows are dropped.
struct AffineProjector {
    basis: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl AffineProjector {
    fn new(problem: &ConicProblem) -> Result<Self> {
        let n = problem.dim();
        let m = problem.rhs.len();
        let mut rows = vec![vec![0.0; n]; m];
        for t in &problem.equalities {
            rows[t.row][t.col] += t.value;
        }
        let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max).max(1.0);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for (mut row, b) in rows.into_iter().zip(&problem.rhs) {
            let original = norm(&row);
            let mut b = *b;
            // two Gram-Schmidt passes
            for _ in 0..2 {
                for (q, d) in basis.iter().zip(&rhs) {
                    let c = dot(q, &row);
                    if c != 0.0 {
                        for (r, qv) in row.iter_mut().zip(q) {
                            *r -= c * qv;
                        }
                        b -= c * d;
                    }
                }
            }
            let len = norm(&row);
            if len > 1e-9 * original.max(1e-300) && len > 1e-12 * scale {
                for r in row.iter_mut() {
                    *r /= len;
                }
                basis.push(row);
                rhs.push(b / len);
            } else if b.abs() > 1e-8 * (1.0 + original) {
                return Err(Error::ProblemMalformed(format!(
                    "equality constraints are inconsistent (dependent row leaves residual {b:e})"
                )));
            }
        }
        Ok(AffineProjector { basis, rhs })
    }

    fn project(&self, v: &mut [f64]) {
        for (q, d) in self.basis.iter().zip(&self.rhs) {
            let c = dot(q, v) - d;
            if c != 0.0 {
                for (x, qv) in v.iter_mut().zip(q) {
                    *x -= c * qv;
                }
            }
        }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iters: usize,
    /// ADMM penalty.
    pub rho: f64,
    /// Over-relaxation factor in (0, 2).
    pub alpha: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-8,
            max_iters: 200_000,
            rho: 1.0,
            alpha: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    InfeasibleSuspected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective in the problem's own sense, evaluated at `solution`.
    pub objective_value: f64,
    /// `‖x − z‖₂` between the affine and the cone iterate.
    pub primal_residual: f64,
    /// `ρ‖z − z_prev‖₂`.
    pub dual_residual: f64,
    /// Max-norm of `A z − b` at the returned point.
    pub equality_residual: f64,
    pub iterations: usize,
    /// The cone iterate `z` (always inside the cone).
    pub solution: Vec<f64>,
    /// The affine iterate `x` (satisfies `A x = b` to rounding).
    pub affine_solution: Vec<f64>,
    pub constraint_rank: usize,
}

/// Residual beyond which a run that hit `max_iters` is flagged as likely infeasible.
const INFEASIBLE_RESIDUAL: f64 = 1e-3;

pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<SolveReport> {
    problem.validate()?;
    let positive = |x: f64| x > 0.0;
    if !positive(settings.tolerance) || settings.max_iters == 0 || !positive(settings.rho) {
        return Err(Error::ProblemMalformed("invalid solver settings".into()));
    }
    let projector = AffineProjector::new(problem)?;
    let n = problem.dim();
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let step: Vec<f64> = problem.objective.iter().map(|c| sign * c / settings.rho).collect();
    let alpha = settings.alpha;

    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut xhat = vec![0.0; n];
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIters;

    while iterations < settings.max_iters {
        iterations += 1;
        for i in 0..n {
            x[i] = z[i] - u[i] - step[i];
        }
        projector.project(&mut x);
        for i in 0..n {
            xhat[i] = alpha * x[i] + (1.0 - alpha) * z[i] + u[i];
        }
        let z_prev = std::mem::replace(&mut z, project_cone(&xhat, &problem.cones));
        let (mut p2, mut d2) = (0.0, 0.0);
        for i in 0..n {
            // u <- u + alpha x + (1 - alpha) z_prev - z
            u[i] = xhat[i] - z[i];
            p2 += (x[i] - z[i]).powi(2);
            d2 += (z[i] - z_prev[i]).powi(2);
        }
        primal = p2.sqrt();
        dual = settings.rho * d2.sqrt();
        if primal <= settings.tolerance && dual <= settings.tolerance {
            status = SolveStatus::Optimal;
            break;
        }
    }
    if status == SolveStatus::MaxIters && primal > INFEASIBLE_RESIDUAL {
        status = SolveStatus::InfeasibleSuspected;
    }
    Ok(SolveReport {
        status,
        objective_value: problem.objective_at(&z),
        primal_residual: primal,
        dual_residual: dual,
        equality_residual: problem.equality_residual(&z),
        iterations,
        solution: z,
        affine_solution: x,
        constraint_rank: projector.rank(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Scalar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        CMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
    }

    #[test]
    fn svec_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..6 {
            let a = random_hermitian(&mut rng, n);
            let b = random_hermitian(&mut rng, n);
            let (va, vb) = (hermitian_to_svec(&a), hermitian_to_svec(&b));
            assert!((dot(&va, &vb) - a.trace_product(&b).re).abs() < 1e-12);
            assert!(svec_to_hermitian(&va, n).max_abs_diff(&a) < 1e-15);
            for i in 0..n {
                for j in i..n {
                    let k = svec_index(n, i, j);
                    assert!((va[k] - if i == j { a[(i, i)].re } else { SQRT2 * a[(i, j)].re }).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let cones = [Cone::HermitianPsd(2)];
        let diag =
            |a: f64, b: f64| hermitian_to_svec(&CMatrix::diagonal(&[Complex64::new(a, 0.), Complex64::new(b, 0.)]));
        assert_eq!(project_cone(&diag(1.0, -1.0), &cones), diag(1.0, 0.0));
        let psd = diag(0.3, 0.7);
        assert_eq!(project_cone(&psd, &cones), psd);
        assert_eq!(project_cone(&[-1.0, 2.0], &[Cone::NonnegOrthant(2)]), vec![0.0, 2.0]);
    }

    /// Oracle: PSD projection from a real symmetric 2n×2n embedding,
    /// diagonalized with a separately implemented real Jacobi routine.
    fn oracle_psd_projection(h: &CMatrix) -> CMatrix {
        let n = h.rows();
        let m = 2 * n;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                a[i][j] = z.re;
                a[i + n][j + n] = z.re;
                a[i][j + n] = -z.im;
                a[i + n][j] = z.im;
            }
        }
        let mut v: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        for _ in 0..200 {
            let off: f64 = (0..m)
                .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-28 {
                break;
            }
            for p in 0..m {
                for q in p + 1..m {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
                    let (s, c) = theta.sin_cos();
                    for k in 0..m {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..m {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for k in 0..m {
                        let (vkp, vkq) = (v[k][p], v[k][q]);
                        v[k][p] = c * vkp - s * vkq;
                        v[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut out = vec![vec![0.0; m]; m];
        for k in 0..m {
            let lam = a[k][k].max(0.0);
            for i in 0..m {
                for j in 0..m {
                    out[i][j] += lam * v[i][k] * v[j][k];
                }
            }
        }
        CMatrix::from_fn(n, n, |i, j| Complex64::new(out[i][j], out[i + n][j]))
    }

    #[test]
    fn psd_projection_matches_real_embedding_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [2, 3, 4, 6] {
            let h = random_hermitian(&mut rng, n);
            let ours = svec_to_hermitian(&project_cone(&hermitian_to_svec(&h), &[Cone::HermitianPsd(n)]), n);
            let oracle = oracle_psd_projection(&h);
            assert!(ours.max_abs_diff(&oracle) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn projection_idempotent_and_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=4);
            let cones = [Cone::HermitianPsd(n), Cone::NonnegOrthant(3)];
            let dim = n * n + 3;
            let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let pa = project_cone(&a, &cones);
            let pb = project_cone(&b, &cones);
            let ppa = project_cone(&pa, &cones);
            let diff: Vec<f64> = pa.iter().zip(&ppa).map(|(x, y)| x - y).collect();
            assert!(norm(&diff) < 1e-10);
            let dp: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x - y).collect();
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            assert!(norm(&dp) <= norm(&d) + 1e-10);
        }
    }

    #[test]
    fn trivial_lp() {
        let problem = ConicProblem {
            cones: vec![Cone::NonnegOrthant(1)],
            sense: Sense::Maximize,
            objective: vec![1.0],
            equalities: vec![Triplet {
                row: 0,
                col: 0,
                value: 1.0,
            }],
            rhs: vec![1.0],
        };
        let r = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn small_sdp_with_trace_bound() {
        // maximize tr(ρ) s.t. tr(Zρ) = 0, tr(ρ) + s = 1, ρ ⪰ 0, s ≥ 0
        let z = CMatrix::diagonal(&[Complex64::new(1., 0.), Complex64::new(-1., 0.)]);
        let id = CMatrix::identity(2);
        let fz = hermitian_functional(&z);
        let fi = hermitian_functional(&id);
        let mut equalities = Vec::new();
        for (k, (a, b)) in fz.iter().zip(&fi).enumerate() {
            equalities.push(Triplet {
                row: 0,
                col: k,
                value: *a,
            });
            equalities.push(Triplet {
                row: 1,
                col: k,
                value: *b,
            });
        }
        equalities.push(Triplet {
            row: 1,
            col: 4,
            value: 1.0,
        });
        let mut objective = fi.clone();
        objective.push(0.0);
        let problem = ConicProblem {
            cones: vec![Cone::HermitianPsd(2), Cone::NonnegOrthant(1)],
            sense: Sense::Maximize,
            objective,
            equalities,
            rhs: vec![0.0, 1.0],
        };
        let r = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_value - 1.0).abs() < 1e-7);
        let rho = svec_to_hermitian(&r.solution[..4], 2);
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-7);
        assert!((rho[(1, 1)].re - 0.5).abs() < 1e-7);
    }

    #[test]
    fn redundant_rows_are_dropped_and_inconsistency_detected() {
        let mut problem = ConicProblem {
            cones: vec![Cone::NonnegOrthant(2)],
            sense: Sense::Minimize,
            objective: vec![1.0, 2.0],
            equalities: vec![
                Triplet {
                    row: 0,
                    col: 0,
                    value: 1.0,
                },
                Triplet {
                    row: 0,
                    col: 1,
                    value: 1.0,
                },
                Triplet {
                    row: 1,
                    col: 0,
                    value: 2.0,
                },
                Triplet {
                    row: 1,
                    col: 1,
                    value: 2.0,
                },
            ],
            rhs: vec![1.0, 2.0],
        };
        let r = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(r.constraint_rank, 1);
        assert!((r.objective_value - 1.0).abs() < 1e-7);
        problem.rhs[1] = 3.0;
        assert!(matches!(
            solve(&problem, &SolverSettings::default()),
            Err(Error::ProblemMalformed(_))
        ));
    }

    #[test]
    fn malformed_problems_rejected() {
        let problem = ConicProblem {
            cones: vec![Cone::NonnegOrthant(1)],
            sense: Sense::Minimize,
            objective: vec![1.0, 0.0],
            equalities: vec![],
            rhs: vec![],
        };
        assert!(matches!(problem.validate(), Err(Error::ProblemMalformed(_))));
        let problem = ConicProblem {
            cones: vec![Cone::NonnegOrthant(1)],
            sense: Sense::Minimize,
            objective: vec![1.0],
            equalities: vec![Triplet {
                row: 3,
                col: 0,
                value: 1.0,
            }],
            rhs: vec![0.0],
        };
        assert!(problem.validate().is_err());
    }

    #[test]
    fn infeasible_is_flagged() {
        // x ≥ 0, x = -1
        let problem = ConicProblem {
            cones: vec![Cone::NonnegOrthant(1)],
            sense: Sense::Minimize,
            objective: vec![0.0],
            equalities: vec![Triplet {
                row: 0,
                col: 0,
                value: 1.0,
            }],
            rhs: vec![-1.0],
        };
        let settings = SolverSettings {
            max_iters: 500,
            ..Default::default()
        };
        let r = solve(&problem, &settings).unwrap();
        assert_eq!(r.status, SolveStatus::InfeasibleSuspected);
    }

    #[test]
    fn solves_are_deterministic() {
        let problem = ConicProblem {
            cones: vec![Cone::NonnegOrthant(3)],
            sense: Sense::Maximize,
            objective: vec![1.0, 2.0, 3.0],
            equalities: vec![
                Triplet {
                    row: 0,
                    col: 0,
                    value: 1.0,
                },
                Triplet {
                    row: 0,
                    col: 1,
                    value: 1.0,
                },
                Triplet {
                    row: 0,
                    col: 2,
                    value: 1.0,
                },
            ],
            rhs: vec![1.0],
        };
        let a = solve(&problem, &SolverSettings::default()).unwrap();
        let b = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        assert!((a.objective_value - 3.0).abs() < 1e-7);
    }

    #[test]
    fn tableau_round_trip() {
        let problem = ConicProblem {
            cones: vec![Cone::HermitianPsd(2), Cone::NonnegOrthant(1)],
            sense: Sense::Maximize,
            objective: vec![1.0, 0.0, 0.0, 1.0 / 3.0, 0.0],
            equalities: vec![
                Triplet {
                    row: 0,
                    col: 0,
                    value: 0.5,
                },
                Triplet {
                    row: 1,
                    col: 4,
                    value: -1.0 / 7.0,
                },
            ],
            rhs: vec![0.0, 16.0],
        };
        let text = problem.to_tableau();
        assert_eq!(ConicProblem::from_tableau(&text).unwrap(), problem);
        assert!(matches!(
            ConicProblem::from_tableau("tableau 2\n"),
            Err(Error::Tableau { .. })
        ));
    }

    #[test]
    fn complex_scalar_near() {
        assert!(Complex64::new(1.0, 0.0).near(&Complex64::new(1.0, 1e-13), 1e-12));
    }
}
