//! Finite-dimensional tracial algebras.
//!
//! A [`TracialAlgebra`] is a direct sum of full matrix blocks `M_{d_1} + ... + M_{d_k}`
//! with trace `tau(A) = sum_b c_b Tr(A_b)`. All operators are bounded here, so
//! the measurable-operator closure coincides with the algebra itself.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::OrliczFunction;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues of `A*A` this far below zero (relative to its largest) are noise.
pub const PSD_CLAMP: f64 = 1e-12;
/// Singular values below this fraction of the largest one count as kernel.
const RANK_RTOL: f64 = 1e-13;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub dim: usize,
    pub trace_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraRepr", into = "AlgebraRepr")]
pub struct TracialAlgebra {
    blocks: Vec<Block>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraRepr {
    blocks: Vec<Block>,
}

impl TryFrom<AlgebraRepr> for TracialAlgebra {
    type Error = Error;
    fn try_from(r: AlgebraRepr) -> Result<Self> {
        TracialAlgebra::new(r.blocks)
    }
}

impl From<TracialAlgebra> for AlgebraRepr {
    fn from(a: TracialAlgebra) -> Self {
        AlgebraRepr { blocks: a.blocks }
    }
}

impl TracialAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::input("an algebra needs at least one block"));
        }
        for b in &blocks {
            if b.dim == 0 {
                return Err(Error::input("block dimension must be positive"));
            }
            if !(b.trace_scale > 0.0) || !b.trace_scale.is_finite() {
                return Err(Error::input(format!("trace scale must be positive, got {}", b.trace_scale)));
            }
        }
        Ok(Self { blocks })
    }

    /// `M_dim` with the standard (unnormalized) trace.
    pub fn matrix(dim: usize) -> Self {
        Self::new(vec![Block { dim, trace_scale: 1.0 }]).expect("dim must be positive")
    }

    /// `M_dim` with the normalized trace `Tr / dim`.
    pub fn normalized(dim: usize) -> Self {
        Self::new(vec![Block { dim, trace_scale: 1.0 / dim as f64 }]).expect("dim must be positive")
    }

    /// Direct sum of blocks with unit trace scale.
    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        Self::new(dims.iter().map(|&dim| Block { dim, trace_scale: 1.0 }).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Same blocks with every trace scale multiplied by `factor`.
    pub fn with_scaled_trace(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.blocks
                .iter()
                .map(|b| Block { dim: b.dim, trace_scale: b.trace_scale * factor })
                .collect(),
        )
    }

    pub fn zero(&self) -> Operator {
        Operator {
            algebra: self.clone(),
            blocks: self.blocks.iter().map(|b| CMatrix::zeros(b.dim, b.dim)).collect(),
        }
    }

    pub fn identity(&self) -> Operator {
        Operator {
            algebra: self.clone(),
            blocks: self.blocks.iter().map(|b| CMatrix::identity(b.dim, b.dim)).collect(),
        }
    }
}

/// Kinds of random operators produced by [`random_operator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    General,
    Hermitian,
    Positive,
    Unitary,
}

/// An element of a [`TracialAlgebra`], stored as one dense complex matrix per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct Operator {
    algebra: TracialAlgebra,
    blocks: Vec<CMatrix>,
}

/// Weighted singular values: `tau(f(|A|)) = sum_i weight_i f(value_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(weights: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(weights.len(), values.len());
        Self { weights, values }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `tau(phi(factor |A|))`.
    pub fn modular(&self, phi: &OrliczFunction, factor: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(&self.values) {
            acc += w * phi.eval(factor * v)?;
        }
        Ok(acc)
    }

    /// `tau(|A|^p)`.
    pub fn power_sum(&self, p: f64) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v.powf(p)).sum()
    }
}

/// Per-block Hermitian eigendecomposition `H_b = V_b diag(lambda_b) V_b^*`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<DVector<f64>>,
    pub vectors: Vec<CMatrix>,
}

impl Operator {
    pub fn new(algebra: TracialAlgebra, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.blocks.len() {
            return Err(Error::shape(format!(
                "operator has {} blocks, algebra has {}",
                blocks.len(),
                algebra.blocks.len()
            )));
        }
        for (m, b) in blocks.iter().zip(&algebra.blocks) {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::shape(format!(
                    "block is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::input("operator entries must be finite"));
            }
        }
        Ok(Self { algebra, blocks })
    }

    /// Single real block in `M_n` with unit trace scale, from row-major rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::shape("rows must form a square matrix"));
        }
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(TracialAlgebra::matrix(n), vec![m])
    }

    /// Diagonal operator: one slice of diagonal entries per block.
    pub fn diagonal(algebra: &TracialAlgebra, diag: &[&[f64]]) -> Result<Self> {
        let blocks = diag
            .iter()
            .map(|d| CMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0)))))
            .collect();
        Self::new(algebra.clone(), blocks)
    }

    pub fn algebra(&self) -> &TracialAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    fn same_shape(&self, other: &Operator) -> Result<()> {
        let dims = |a: &TracialAlgebra| a.blocks.iter().map(|b| b.dim).collect::<Vec<_>>();
        if dims(&self.algebra) != dims(&other.algebra) {
            return Err(Error::shape("operators live in algebras with different block structure"));
        }
        Ok(())
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Operator {
        Operator { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip_blocks(&self, other: &Operator, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Operator> {
        self.same_shape(other)?;
        Ok(Operator {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn adjoint(&self) -> Operator {
        self.map_blocks(|m| m.adjoint())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.zip_blocks(other, |a, b| a - b)
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Operator {
        self.map_blocks(|m| m * c)
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        self.map_blocks(|m| m * C64::new(c, 0.0))
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &Operator, b: C64) -> Result<Operator> {
        self.zip_blocks(other, |x, y| x * a + y * b)
    }

    /// `tau(A) = sum_b c_b Tr(A_b)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(&self.algebra.blocks)
            .map(|(m, b)| m.trace() * b.trace_scale)
            .sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks.iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Unweighted Frobenius norm over all blocks.
    pub fn frobenius(&self) -> f64 {
        self.blocks.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, rtol: f64) -> bool {
        let scale = self.max_abs_entry();
        self.blocks
            .iter()
            .all(|m| (m - m.adjoint()).iter().all(|z| z.norm() <= rtol * scale))
    }

    /// Hermitian eigendecomposition, block by block. Symmetrizes first.
    pub fn eigen(&self) -> Result<Eigen> {
        let mut values = Vec::with_capacity(self.blocks.len());
        let mut vectors = Vec::with_capacity(self.blocks.len());
        for m in &self.blocks {
            let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
            let norm = h.norm();
            let eig = SymmetricEigen::try_new(h, f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
                Error::numeric(format!(
                    "Hermitian eigensolver did not converge ({}x{} block, Frobenius norm {norm:e})",
                    m.nrows(),
                    m.ncols()
                ))
            })?;
            values.push(eig.eigenvalues);
            vectors.push(eig.eigenvectors);
        }
        Ok(Eigen { values, vectors })
    }

    /// Weighted singular values of the operator (eigenvalues of `|A|`).
    pub fn singular_spectrum(&self) -> Result<Spectrum> {
        let mut weights = Vec::with_capacity(self.algebra.total_dim());
        let mut values = Vec::with_capacity(self.algebra.total_dim());
        for (m, b) in self.blocks.iter().zip(&self.algebra.blocks) {
            let sv = singular_values(m)?;
            for v in sv.iter() {
                weights.push(b.trace_scale);
                values.push(*v);
            }
        }
        Ok(Spectrum { weights, values })
    }

    /// Largest singular value over all blocks.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.singular_spectrum()?.max_value())
    }

    /// `|A| = (A^* A)^{1/2}` through the eigendecomposition of `A^* A`.
    pub fn abs(&self) -> Result<Operator> {
        let gram = self.adjoint().mul(self)?;
        positive_calculus(|x| Ok(x.sqrt()), &gram)
    }

    /// Polar decomposition `A = U |A|`, with `U` vanishing on the kernel of `|A|`.
    pub fn polar(&self) -> Result<(Operator, Operator)> {
        let p = self.abs()?;
        let mut us = Vec::with_capacity(self.blocks.len());
        for m in &self.blocks {
            let n = m.nrows();
            let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, EIGEN_MAX_ITER)
                .ok_or_else(|| Error::numeric("SVD did not converge in polar decomposition"))?;
            let (w, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
            let mut u = CMatrix::zeros(n, n);
            for (k, s) in svd.singular_values.iter().enumerate() {
                if *s > RANK_RTOL * top * n as f64 {
                    u += w.column(k) * vt.row(k);
                }
            }
            us.push(u);
        }
        Ok((Operator { algebra: self.algebra.clone(), blocks: us }, p))
    }

    /// Support projection of `|A|` (projection onto the orthogonal complement of the kernel).
    pub fn support_projection(&self) -> Result<Operator> {
        let eig = self.adjoint().mul(self)?.eigen()?;
        let top = eig.values.iter().flat_map(|v| v.iter()).copied().fold(0.0, f64::max);
        let blocks = eig
            .values
            .iter()
            .zip(&eig.vectors)
            .map(|(vals, vecs)| {
                let n = vals.len();
                let mut pr = CMatrix::zeros(n, n);
                for k in 0..n {
                    // eigenvalues of A*A carry absolute noise near eps * top
                    if vals[k] > PSD_CLAMP * top {
                        let col = vecs.column(k);
                        pr += col * col.adjoint();
                    }
                }
                pr
            })
            .collect();
        Ok(Operator { algebra: self.algebra.clone(), blocks })
    }
}

fn singular_values(m: &CMatrix) -> Result<DVector<f64>> {
    if m.nrows() == 1 {
        return Ok(DVector::from_element(1, m[(0, 0)].norm()));
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::numeric(format!("SVD did not converge on a {}x{} block", m.nrows(), m.ncols())))?;
    Ok(svd.singular_values)
}

/// `f(H) = sum_k f(alpha_k) e_k` for Hermitian `H`, any real spectrum.
pub fn hermitian_calculus<F>(f: F, h: &Operator) -> Result<Operator>
where
    F: Fn(f64) -> Result<f64>,
{
    if !h.is_hermitian(1e-10) {
        return Err(Error::input("functional calculus needs a Hermitian operator"));
    }
    let eig = h.eigen()?;
    assemble(&f, h, &eig, Ok)
}

/// `f(H)` for positive semidefinite `H`; eigenvalues slightly below zero are
/// clamped to zero before `f` is applied.
pub fn positive_calculus<F>(f: F, h: &Operator) -> Result<Operator>
where
    F: Fn(f64) -> Result<f64>,
{
    if !h.is_hermitian(1e-10) {
        return Err(Error::input("functional calculus needs a Hermitian operator"));
    }
    let eig = h.eigen()?;
    let top = eig.values.iter().flat_map(|v| v.iter()).map(|x| x.abs()).fold(0.0, f64::max);
    let floor = -PSD_CLAMP * top.max(1.0);
    assemble(&f, h, &eig, |x| {
        if x >= 0.0 {
            Ok(x)
        } else if x >= floor {
            Ok(0.0)
        } else {
            Err(Error::input(format!("operator is not positive semidefinite (eigenvalue {x:e})")))
        }
    })
}

/// Alias of [`positive_calculus`], the functional calculus used for `Phi(|A|)`.
pub fn functional_calculus<F>(f: F, h: &Operator) -> Result<Operator>
where
    F: Fn(f64) -> Result<f64>,
{
    positive_calculus(f, h)
}

fn assemble<F, G>(f: &F, h: &Operator, eig: &Eigen, clamp: G) -> Result<Operator>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    let mut blocks = Vec::with_capacity(eig.values.len());
    for (vals, vecs) in eig.values.iter().zip(&eig.vectors) {
        let mapped = vals.iter().map(|&x| clamp(x).and_then(f)).collect::<Result<Vec<_>>>()?;
        let d = CMatrix::from_diagonal(&DVector::from_iterator(mapped.len(), mapped.iter().map(|&x| C64::new(x, 0.0))));
        blocks.push(vecs * d * vecs.adjoint());
    }
    Ok(Operator { algebra: h.algebra.clone(), blocks })
}

/// The modular `tau(phi(|A|))`.
pub fn modular(phi: &OrliczFunction, a: &Operator) -> Result<f64> {
    a.singular_spectrum()?.modular(phi, 1.0)
}

/// Seeded random operator; identical `(algebra, kind, scale, seed)` give identical bits.
pub fn random_operator(alg: &TracialAlgebra, kind: OperatorKind, scale: f64, seed: u64) -> Result<Operator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_operator_with(&mut rng, alg, kind, scale)
}

/// Like [`random_operator`] but drawing from a caller-owned generator.
pub fn random_operator_with<R: Rng + ?Sized>(
    rng: &mut R,
    alg: &TracialAlgebra,
    kind: OperatorKind,
    scale: f64,
) -> Result<Operator> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::input(format!("scale must be positive, got {scale}")));
    }
    let g = ginibre(rng, alg, scale);
    match kind {
        OperatorKind::General => Ok(g),
        OperatorKind::Hermitian => Ok(g.add(&g.adjoint())?.scale_real(0.5)),
        OperatorKind::Positive => {
            let p = g.adjoint().mul(&g)?;
            let top = p.eigen()?.values.iter().flat_map(|v| v.iter()).copied().fold(0.0, f64::max);
            let p = p.scale_real(scale / top);
            // exact Hermitian symmetry after rounding
            Ok(p.add(&p.adjoint())?.scale_real(0.5))
        }
        OperatorKind::Unitary => Ok(g.polar()?.0),
    }
}

/// Complex Gaussian entries with mean 0 and `E|z|^2 = scale^2`.
fn ginibre<R: Rng + ?Sized>(rng: &mut R, alg: &TracialAlgebra, scale: f64) -> Operator {
    let sd = scale / std::f64::consts::SQRT_2;
    let blocks = alg
        .blocks
        .iter()
        .map(|b| {
            CMatrix::from_fn(b.dim, b.dim, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(sd * re, sd * im)
            })
        })
        .collect();
    Operator { algebra: alg.clone(), blocks }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorRepr {
    algebra: TracialAlgebra,
    entries: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TryFrom<OperatorRepr> for Operator {
    type Error = Error;
    fn try_from(r: OperatorRepr) -> Result<Self> {
        let mut blocks = Vec::with_capacity(r.entries.len());
        for rows in r.entries {
            let n = rows.len();
            if rows.iter().any(|row| row.len() != n) {
                return Err(Error::shape("operator block rows must form a square matrix"));
            }
            blocks.push(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])));
        }
        Operator::new(r.algebra, blocks)
    }
}

impl From<Operator> for OperatorRepr {
    fn from(op: Operator) -> Self {
        let entries = op
            .blocks
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        OperatorRepr { algebra: op.algebra, entries }
    }
}
