//! Dense complex linear algebra over small, multipartite Hilbert spaces.
//!
//! Every vector and operator carries the list of subsystem dimensions it is
//! defined over. Indices are big-endian in that list: the first subsystem is
//! the most significant digit, matching the Kronecker product order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest number of amplitudes a state (or side of an operator) may have.
pub const MAX_AMPLITUDES: usize = 1 << 10;

/// Default tolerance for merging nearly equal eigenvalues into one eigenspace.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;

/// Maximum element-wise deviation from `A = A†` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn checked_total(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::BadDimension(0));
    }
    let mut total = 1usize;
    for &d in dims {
        if d == 0 {
            return Err(Error::BadDimension(d));
        }
        total = total.saturating_mul(d);
    }
    if total > MAX_AMPLITUDES {
        return Err(Error::DimensionCap {
            total,
            cap: MAX_AMPLITUDES,
        });
    }
    Ok(total)
}

/// Column vector of amplitudes over a product of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
    dims: Vec<usize>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let total = checked_total(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::DimMismatch {
                expected: total,
                found: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NotNormalized { norm: f64::NAN });
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
            dims,
        })
    }

    /// A single-system ket.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        Self::new(amplitudes, vec![n])
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = checked_total(&dims)?;
        if index >= total {
            return Err(Error::BadSubsystem {
                index,
                count: total,
            });
        }
        let mut amps = vec![ZERO; total];
        amps[index] = ONE;
        Self::new(amps, dims)
    }

    pub(crate) fn from_vector(amplitudes: DVector<C64>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(amplitudes.len(), dims.iter().product::<usize>());
        Self { amplitudes, dims }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(c(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_vector(&self.amplitudes * factor, self.dims.clone())
    }

    /// Complex conjugate of every amplitude.
    pub fn conjugate(&self) -> Self {
        Self::from_vector(self.amplitudes.conjugate(), self.dims.clone())
    }

    /// Hermitian inner product `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Same amplitudes, reinterpreted over a different subsystem layout.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.amplitudes.as_slice().to_vec(), dims)
    }

    /// Largest absolute amplitude difference.
    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Square operator over a product of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOp {
    matrix: DMatrix<C64>,
    dims: Vec<usize>,
}

impl LinearOp {
    pub fn new(matrix: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        let total = checked_total(&dims)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimMismatch {
                expected: total,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { matrix, dims })
    }

    /// Builds a single-system operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimMismatch {
                expected: n,
                found: rows.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
            });
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(matrix, vec![n])
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub(crate) fn from_matrix(matrix: DMatrix<C64>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let total = checked_total(&dims)?;
        Ok(Self::from_matrix(DMatrix::identity(total, total), dims))
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let total = checked_total(&dims)?;
        Ok(Self::from_matrix(DMatrix::zeros(total, total), dims))
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(Self::from_matrix(
            a.vector() * b.vector().adjoint(),
            a.dims().to_vec(),
        ))
    }

    /// Rank-one projector `|k⟩⟨k|` onto the normalized direction of `k`.
    pub fn projector(k: &Ket) -> Result<Self> {
        let k = k.normalized()?;
        Self::outer(&k, &k)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.matrix.clone(), dims)
    }

    pub fn dagger(&self) -> Self {
        Self::from_matrix(self.matrix.adjoint(), self.dims.clone())
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_matrix(&self.matrix * factor, self.dims.clone())
    }

    fn check_same_side(&self, other: &LinearOp) -> Result<()> {
        if self.side() != other.side() {
            return Err(Error::DimMismatch {
                expected: self.side(),
                found: other.side(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &LinearOp) -> Result<Self> {
        self.check_same_side(other)?;
        Ok(Self::from_matrix(
            &self.matrix + &other.matrix,
            self.dims.clone(),
        ))
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &LinearOp) -> Result<Self> {
        self.check_same_side(other)?;
        Ok(Self::from_matrix(
            &self.matrix * &other.matrix,
            self.dims.clone(),
        ))
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.side() != ket.len() {
            return Err(Error::DimMismatch {
                expected: self.side(),
                found: ket.len(),
            });
        }
        Ok(Ket::from_vector(
            &self.matrix * ket.vector(),
            ket.dims().to_vec(),
        ))
    }

    /// Applies this operator to the listed subsystems of `ket`, in the order
    /// given, leaving the others untouched.
    pub fn apply_on(&self, targets: &[usize], ket: &Ket) -> Result<Ket> {
        let target_dims = target_dims(ket.dims(), targets)?;
        let needed: usize = target_dims.iter().product();
        if needed != self.side() {
            return Err(Error::DimMismatch {
                expected: needed,
                found: self.side(),
            });
        }
        let out = apply_local(&self.matrix, targets, ket.dims(), ket.amplitudes());
        Ok(Ket::from_vector(
            DVector::from_vec(out),
            ket.dims().to_vec(),
        ))
    }

    /// Maximum element-wise `|self − other|`.
    pub fn max_abs_diff(&self, other: &LinearOp) -> f64 {
        if self.side() != other.side() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Max deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let id = DMatrix::<C64>::identity(self.side(), self.side());
        let prod = self.matrix.adjoint() * &self.matrix;
        prod.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Conjugation `U · self · U†`.
    pub fn conjugated_by(&self, u: &LinearOp) -> Result<Self> {
        self.check_same_side(u)?;
        Ok(Self::from_matrix(
            &u.matrix * &self.matrix * u.matrix.adjoint(),
            self.dims.clone(),
        ))
    }

    /// Traces out every subsystem not listed in `keep`. The result keeps the
    /// retained subsystems in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let count = self.dims.len();
        if let Some(&index) = keep.iter().find(|&&k| k >= count) {
            return Err(Error::BadSubsystem { index, count });
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() {
            return Err(Error::BadDimension(0));
        }
        let traced: Vec<usize> = (0..count).filter(|i| !kept.contains(i)).collect();

        let kept_offsets = offsets(&self.dims, &kept);
        let traced_offsets = if traced.is_empty() {
            vec![0]
        } else {
            offsets(&self.dims, &traced)
        };
        let n = kept_offsets.len();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (r, &ro) in kept_offsets.iter().enumerate() {
            for (col, &co) in kept_offsets.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &traced_offsets {
                    acc += self.matrix[(ro + t, co + t)];
                }
                out[(r, col)] = acc;
            }
        }
        let dims = kept.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_matrix(out, dims))
    }
}

/// Kronecker product; subsystem dims are concatenated in argument order.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Ket {
    fn tensor(&self, other: &Ket) -> Ket {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ket::from_vector(self.amplitudes.kronecker(&other.amplitudes), dims)
    }
}

impl Tensor for LinearOp {
    fn tensor(&self, other: &LinearOp) -> LinearOp {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        LinearOp::from_matrix(self.matrix.kronecker(&other.matrix), dims)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Tensor product of a non-empty list.
pub fn tensor_all<T: Tensor + Clone>(items: &[T]) -> Option<T> {
    let (first, rest) = items.split_first()?;
    Some(rest.iter().fold(first.clone(), |acc, x| acc.tensor(x)))
}

/// Grouped spectral decomposition of a Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianEigensystem {
    eigenvalues: Vec<f64>,
    projectors: Vec<LinearOp>,
}

impl HermitianEigensystem {
    /// Eigenvalues in ascending order, one per eigenspace.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[LinearOp] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Σ λ_k P_k`.
    pub fn reconstruct(&self) -> LinearOp {
        let dims = self.projectors[0].dims().to_vec();
        let side = self.projectors[0].side();
        let mut m = DMatrix::<C64>::zeros(side, side);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p.matrix() * c(*l, 0.0);
        }
        LinearOp::from_matrix(m, dims)
    }

    /// Projectors are stored exactly Hermitian (entry `(j, i)` is the
    /// conjugate of `(i, j)` bit for bit).
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, projectors: Vec<LinearOp>) -> Self {
        Self {
            eigenvalues,
            projectors: projectors
                .into_iter()
                .map(|p| {
                    let m = (p.matrix() + p.matrix().adjoint()) * c(0.5, 0.0);
                    LinearOp::from_matrix(m, p.dims)
                })
                .collect(),
        }
    }
}

/// Diagonalizes a Hermitian operator, merging eigenvalues that lie within
/// `group_tol` of their neighbour into a single eigenspace.
pub fn eigensystem(op: &LinearOp, group_tol: f64) -> Result<HermitianEigensystem> {
    let deviation = op.hermiticity_defect();
    if deviation > HERMITIAN_TOL || !deviation.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (op.matrix() + op.matrix().adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    // Single-linkage grouping over the sorted spectrum.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &i in &order {
        let value = eig.eigenvalues[i];
        match groups.last_mut() {
            Some(g) if value - last <= group_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
        last = value;
    }

    let side = op.side();
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64;
        let mut p = DMatrix::<C64>::zeros(side, side);
        for &i in &g {
            let v = eig.eigenvectors.column(i);
            p += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(LinearOp::from_matrix(p, op.dims().to_vec()));
    }
    Ok(HermitianEigensystem::from_parts(eigenvalues, projectors))
}

pub(crate) fn target_dims(dims: &[usize], targets: &[usize]) -> Result<Vec<usize>> {
    let count = dims.len();
    let mut seen = vec![false; count];
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if t >= count || seen[t] {
            return Err(Error::BadSubsystem { index: t, count });
        }
        seen[t] = true;
        out.push(dims[t]);
    }
    if out.is_empty() {
        return Err(Error::BadDimension(0));
    }
    Ok(out)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Full-space index offsets for every configuration of the `subset` digits,
/// enumerated big-endian in the order the subset is listed.
pub(crate) fn offsets(dims: &[usize], subset: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in subset {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &o in &out {
            for digit in 0..dims[k] {
                next.push(o + digit * st[k]);
            }
        }
        out = next;
    }
    out
}

/// `(M ⊗ I) v` with `M` acting on `targets` (in the listed order).
pub(crate) fn apply_local(
    matrix: &DMatrix<C64>,
    targets: &[usize],
    dims: &[usize],
    v: &[C64],
) -> Vec<C64> {
    let st = strides(dims);
    let target_offsets = offsets(dims, targets);
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let rest_offsets = if rest.is_empty() {
        vec![0]
    } else {
        offsets(dims, &rest)
    };
    debug_assert_eq!(st.len(), dims.len());
    let dt = target_offsets.len();
    let mut out = vec![ZERO; v.len()];
    let mut local = vec![ZERO; dt];
    for &base in &rest_offsets {
        for (r, &o) in target_offsets.iter().enumerate() {
            local[r] = v[base + o];
        }
        if local.iter().all(|a| *a == ZERO) {
            continue;
        }
        for (rp, &op) in target_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (r, a) in local.iter().enumerate() {
                acc += matrix[(rp, r)] * a;
            }
            out[base + op] = acc;
        }
    }
    out
}

/// Contracts the `targets` subsystems of `v` with the linear functional
/// `Σ coeffs_j ⟨j|` (no conjugation), returning a vector over the remaining
/// subsystems.
pub(crate) fn contract_functional(
    coeffs: &[C64],
    targets: &[usize],
    dims: &[usize],
    v: &[C64],
) -> Vec<C64> {
    let target_offsets = offsets(dims, targets);
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let rest_offsets = if rest.is_empty() {
        vec![0]
    } else {
        offsets(dims, &rest)
    };
    rest_offsets
        .iter()
        .map(|&base| {
            target_offsets
                .iter()
                .zip(coeffs)
                .map(|(&o, &cf)| cf * v[base + o])
                .sum()
        })
        .collect()
}
