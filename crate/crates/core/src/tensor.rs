//! Dense matrices over complex floats or exact rationals, with named tensor
//! factors.
//!
//! Basis convention: the first label of a layout is the most significant
//! tensor factor, so the basis state `|i_1 ... i_k>` has index
//! `sum_j i_j * (product of the dims after j)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance used for Hermiticity checks of float operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Scalars the dense kernels operate on.
///
/// Float and rational operators never mix; use [`LabeledOperator::to_complex`]
/// to convert explicitly.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn conj(&self) -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn to_complex(&self) -> Complex64;
    /// Exact equality for rationals, absolute tolerance for floats.
    fn near(&self, other: &Self, tol: f64) -> bool;
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Complex64::new(numer as f64 / denom as f64, 0.0)
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn near(&self, other: &Self, tol: f64) -> bool {
        (self - other).norm() <= tol
    }
}

impl Scalar for BigRational {
    fn conj(&self) -> Self {
        self.clone()
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn near(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::from_ratio(numer, denom)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Names of the tensor factors appearing in the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpaceName {
    /// Output of the initial state preparation.
    SP,
    /// Input of the final measurement.
    SF,
    /// The shared system passed between parties.
    S,
    AI,
    AO,
    BI,
    BO,
    CI,
    CO,
    /// Purifying environment.
    E,
    /// Measurement outcome register, one level per order.
    O,
}

impl SpaceName {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceName::SP => "S_P",
            SpaceName::SF => "S_F",
            SpaceName::S => "S",
            SpaceName::AI => "A_I",
            SpaceName::AO => "A_O",
            SpaceName::BI => "B_I",
            SpaceName::BO => "B_O",
            SpaceName::CI => "C_I",
            SpaceName::CO => "C_O",
            SpaceName::E => "E",
            SpaceName::O => "O",
        }
    }
}

impl fmt::Display for SpaceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub name: SpaceName,
    pub dim: usize,
}

impl SpaceLabel {
    /// A label with its fixed dimension: 2 for every bit/qubit space, 6 for `O`.
    ///
    /// # Panics
    /// For `E`, whose dimension must be chosen with [`SpaceLabel::env`].
    pub fn new(name: SpaceName) -> Self {
        let dim = match name {
            SpaceName::O => 6,
            SpaceName::E => panic!("the environment label needs an explicit dimension"),
            _ => 2,
        };
        SpaceLabel { name, dim }
    }

    pub fn env(dim: usize) -> Self {
        SpaceLabel {
            name: SpaceName::E,
            dim,
        }
    }
}

impl fmt::Display for SpaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

pub fn labels(names: &[SpaceName]) -> Vec<SpaceLabel> {
    names.iter().map(|&n| SpaceLabel::new(n)).collect()
}

fn layout_dim(layout: &[SpaceLabel]) -> usize {
    layout.iter().map(|l| l.dim).product()
}

fn check_distinct(layout: &[SpaceLabel]) -> Result<()> {
    for (i, a) in layout.iter().enumerate() {
        if layout[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::LabelCollision(a.name.to_string()));
        }
    }
    Ok(())
}

/// Mixed-radix digits of `index` for the given dims, most significant first.
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let cur = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (other.rows, other.cols);
        Self::from_fn(self.rows * r, self.cols * c, |i, j| {
            self[(i / r, j / c)].clone() * other[(i % r, j % c)].clone()
        })
    }

    /// Trace of `self * other` without forming the product.
    pub fn trace_product(&self, other: &Self) -> T {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = T::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                acc = acc + a.clone() * other[(k, i)].clone();
            }
        }
        acc
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_complex).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).to_complex().norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && {
            let adj = self.adjoint();
            self.data.iter().zip(&adj.data).all(|(a, b)| a.near(b, tol))
        }
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix<BigRational> {
    /// Rank by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                m.data.swap(pivot * m.cols + j, rank * m.cols + j);
            }
            let p = m[(rank, col)].clone();
            for r in 0..m.rows {
                if r == rank || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone() / p.clone();
                for j in col..m.cols {
                    let delta = factor.clone() * m[(rank, j)].clone();
                    let cur = std::mem::replace(&mut m[(r, j)], BigRational::zero());
                    m[(r, j)] = cur - delta;
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

/// A square operator whose basis is the tensor product of `layout`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator<T> {
    layout: Vec<SpaceLabel>,
    data: Matrix<T>,
}

pub type CMatrix = Matrix<Complex64>;
pub type COperator = LabeledOperator<Complex64>;
pub type QOperator = LabeledOperator<BigRational>;

impl<T: Scalar> LabeledOperator<T> {
    pub fn new(layout: Vec<SpaceLabel>, data: Matrix<T>) -> Result<Self> {
        check_distinct(&layout)?;
        let side = layout_dim(&layout);
        if data.rows() != side || data.cols() != side {
            return Err(Error::DimensionMismatch(format!(
                "layout needs side {side}, matrix is {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        Ok(LabeledOperator { layout, data })
    }

    pub fn identity(layout: Vec<SpaceLabel>) -> Result<Self> {
        let side = layout_dim(&layout);
        Self::new(layout, Matrix::identity(side))
    }

    pub fn layout(&self) -> &[SpaceLabel] {
        &self.layout
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.data
    }

    pub fn side(&self) -> usize {
        self.data.rows()
    }

    pub fn trace(&self) -> T {
        self.data.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.data.is_hermitian(tol)
    }

    pub fn to_complex(&self) -> COperator {
        LabeledOperator {
            layout: self.layout.clone(),
            data: self.data.to_complex(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        LabeledOperator {
            layout: self.layout.clone(),
            data: self.data.scale(s),
        }
    }

    fn same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{} vs {}",
                layout_string(&self.layout),
                layout_string(&other.layout)
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(LabeledOperator {
            layout: self.layout.clone(),
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(LabeledOperator {
            layout: self.layout.clone(),
            data: &self.data - &other.data,
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(LabeledOperator {
            layout: self.layout.clone(),
            data: self.data.matmul(&other.data),
        })
    }

    pub fn adjoint(&self) -> Self {
        LabeledOperator {
            layout: self.layout.clone(),
            data: self.data.adjoint(),
        }
    }

    /// `tr(self * other)` for operators on the same layout.
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        self.same_layout(other)?;
        Ok(self.data.trace_product(&other.data))
    }

    /// Renames the factors label by label; dimensions must be preserved.
    pub fn relabel(&self, f: impl Fn(SpaceLabel) -> SpaceLabel) -> Result<Self> {
        let layout: Vec<_> = self.layout.iter().map(|&l| f(l)).collect();
        if layout.iter().zip(&self.layout).any(|(a, b)| a.dim != b.dim) {
            return Err(Error::LayoutMismatch("relabeling changed a dimension".into()));
        }
        LabeledOperator::new(layout, self.data.clone())
    }

    pub fn position(&self, name: SpaceName) -> Option<usize> {
        self.layout.iter().position(|l| l.name == name)
    }
}

fn layout_string(layout: &[SpaceLabel]) -> String {
    let names: Vec<_> = layout.iter().map(|l| l.name.as_str()).collect();
    format!("({})", names.join(", "))
}

/// Tensor product; the result layout is `a` followed by `b`.
pub fn kron<T: Scalar>(a: &LabeledOperator<T>, b: &LabeledOperator<T>) -> Result<LabeledOperator<T>> {
    let layout: Vec<_> = a.layout.iter().chain(&b.layout).copied().collect();
    check_distinct(&layout)?;
    Ok(LabeledOperator {
        layout,
        data: a.data.kron(&b.data),
    })
}

/// Traces out `traced`, keeping the remaining labels in their original order.
pub fn partial_trace<T: Scalar>(op: &LabeledOperator<T>, traced: &[SpaceName]) -> Result<LabeledOperator<T>> {
    for name in traced {
        if op.position(*name).is_none() {
            return Err(Error::UnknownLabel(name.to_string()));
        }
    }
    let dims: Vec<usize> = op.layout.iter().map(|l| l.dim).collect();
    let is_traced: Vec<bool> = op.layout.iter().map(|l| traced.contains(&l.name)).collect();
    let kept_layout: Vec<_> = op
        .layout
        .iter()
        .zip(&is_traced)
        .filter(|(_, &t)| !t)
        .map(|(l, _)| *l)
        .collect();
    let traced_dim: usize = dims
        .iter()
        .zip(&is_traced)
        .filter(|(_, &t)| t)
        .map(|(d, _)| d)
        .product();
    let kept_dim = layout_dim(&kept_layout);

    // groups[t] lists (kept index, full index) of basis states whose traced digits equal t
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for full in 0..op.side() {
        let ds = digits(full, &dims);
        let (mut kept, mut tr) = (0, 0);
        for ((&d, &dim), &t) in ds.iter().zip(&dims).zip(&is_traced) {
            if t {
                tr = tr * dim + d;
            } else {
                kept = kept * dim + d;
            }
        }
        groups[tr].push((kept, full));
    }

    let mut out = Matrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(ki, fi) in group {
            for &(kj, fj) in group {
                let v = &op.data[(fi, fj)];
                if v.is_zero() {
                    continue;
                }
                let cur = std::mem::replace(&mut out[(ki, kj)], T::zero());
                out[(ki, kj)] = cur + v.clone();
            }
        }
    }
    LabeledOperator::new(kept_layout, out)
}

/// Index map sending a basis index of `from` to the index of the same basis
/// state in `to`, which must be a reordering of `from`.
fn reorder_map(from: &[SpaceLabel], to: &[SpaceLabel]) -> Result<Vec<usize>> {
    let mismatch = || {
        Error::LayoutMismatch(format!(
            "{} is not a reordering of {}",
            layout_string(to),
            layout_string(from)
        ))
    };
    if from.len() != to.len() {
        return Err(mismatch());
    }
    check_distinct(to)?;
    let source_pos: Vec<usize> = to
        .iter()
        .map(|l| from.iter().position(|f| f == l).ok_or_else(mismatch))
        .collect::<Result<_>>()?;
    let dims: Vec<usize> = from.iter().map(|l| l.dim).collect();
    Ok((0..layout_dim(from))
        .map(|i| {
            let ds = digits(i, &dims);
            source_pos.iter().zip(to).fold(0, |acc, (&p, l)| acc * l.dim + ds[p])
        })
        .collect())
}

/// Reorders the tensor factors of `op` to `target`.
pub fn permute_to_layout<T: Scalar>(op: &LabeledOperator<T>, target: &[SpaceLabel]) -> Result<LabeledOperator<T>> {
    let map = reorder_map(&op.layout, target)?;
    let n = op.side();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = op.data[(i, j)].clone();
        }
    }
    LabeledOperator::new(target.to_vec(), out)
}

/// Completely dephasing map: keeps only the diagonal.
pub fn dephase<T: Scalar>(op: &LabeledOperator<T>) -> LabeledOperator<T> {
    let n = op.side();
    let data = Matrix::from_fn(n, n, |i, j| if i == j { op.data[(i, i)].clone() } else { T::zero() });
    LabeledOperator {
        layout: op.layout.clone(),
        data,
    }
}

/// A column vector whose basis is the tensor product of `layout`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector<T> {
    layout: Vec<SpaceLabel>,
    data: Vec<T>,
}

impl<T: Scalar> LabeledVector<T> {
    pub fn new(layout: Vec<SpaceLabel>, data: Vec<T>) -> Result<Self> {
        check_distinct(&layout)?;
        if data.len() != layout_dim(&layout) {
            return Err(Error::DimensionMismatch(format!(
                "layout needs length {}, got {}",
                layout_dim(&layout),
                data.len()
            )));
        }
        Ok(LabeledVector { layout, data })
    }

    pub fn layout(&self) -> &[SpaceLabel] {
        &self.layout
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc + a.conj() * b.clone())
    }

    pub fn norm_sqr(&self) -> T {
        self.inner(self)
    }

    /// Applies `op` to the factors `op.layout()`, acting as identity elsewhere.
    pub fn apply_on(&self, op: &LabeledOperator<T>) -> Result<Self> {
        let k = op.layout.len();
        if self.layout.len() < k || self.layout[..k] != op.layout[..] {
            return Err(Error::LayoutMismatch(format!(
                "operator on {} must act on the leading factors of {}",
                layout_string(&op.layout),
                layout_string(&self.layout)
            )));
        }
        let side = op.side();
        let rest = self.data.len() / side;
        let mut out = vec![T::zero(); self.data.len()];
        for i in 0..side {
            for j in 0..side {
                let a = &op.data[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for r in 0..rest {
                    let cur = std::mem::replace(&mut out[i * rest + r], T::zero());
                    out[i * rest + r] = cur + a.clone() * self.data[j * rest + r].clone();
                }
            }
        }
        Ok(LabeledVector {
            layout: self.layout.clone(),
            data: out,
        })
    }
}

/// `|M>> = (M ⊗ I) sum_i |i,i>`: the result layout is the operator layout
/// (output space) followed by `input_layout`.
pub fn vectorize<T: Scalar>(op: &LabeledOperator<T>, input_layout: Vec<SpaceLabel>) -> Result<LabeledVector<T>> {
    if layout_dim(&input_layout) != op.side() {
        return Err(Error::DimensionMismatch(format!(
            "input layout {} has dimension {}, operator side is {}",
            layout_string(&input_layout),
            layout_dim(&input_layout),
            op.side()
        )));
    }
    let layout: Vec<_> = op.layout.iter().chain(&input_layout).copied().collect();
    LabeledVector::new(layout, op.data.data().to_vec())
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in fv.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * lam;
                if vi == Complex64::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub fn eig_hermitian<T: Scalar>(op: &LabeledOperator<T>) -> Result<HermitianEigen> {
    let m = op.data.to_complex();
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(jacobi_eigh(&m))
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix. Only the upper triangle
/// (made Hermitian by averaging) is used.
pub fn jacobi_eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.rows();
    assert!(m.is_square(), "eigendecomposition needs a square matrix");
    let mut a = CMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = CMatrix::identity(n);

    let frob: f64 = a.data().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let threshold = (f64::EPSILON * frob).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // phase that makes the (p, q) entry real
                let phase = apq / mag;
                // J = [[c, s], [-s·conj(phase), c·conj(phase)]] acting on columns p, q
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -s * phase.conj();
                let j_qq = c * phase.conj();

                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = Complex64::zero();
                a[(q, p)] = Complex64::zero();
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}

/// Serializable form of a matrix: float entries as `[re, im]` pairs, rational
/// entries as `"p/q"` strings, plus the ordered label names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedOperator<E> {
    pub layout: Vec<String>,
    pub data: Vec<Vec<E>>,
}

impl COperator {
    pub fn to_serialized(&self) -> SerializedOperator<[f64; 2]> {
        SerializedOperator {
            layout: self.layout.iter().map(|l| l.name.to_string()).collect(),
            data: (0..self.side())
                .map(|i| self.data.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl QOperator {
    pub fn to_serialized(&self) -> SerializedOperator<String> {
        SerializedOperator {
            layout: self.layout.iter().map(|l| l.name.to_string()).collect(),
            data: (0..self.side())
                .map(|i| self.data.row(i).iter().map(format_rational).collect())
                .collect(),
        }
    }

    pub fn is_psd_exact_diagonal(&self) -> bool {
        (0..self.side()).all(|i| !self.data[(i, i)].is_negative())
    }
}
