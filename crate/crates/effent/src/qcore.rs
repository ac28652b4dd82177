//! Dense complex linear algebra with subsystem bookkeeping.
//!
//! Everything downstream (channels, entanglement measures, games, the BEC
//! simulation) is built on the types here: row-major dense complex matrices
//! plus an explicit list of subsystem dimensions. Subsystem ordering is never
//! implicit; every composite object carries its `dims`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default absolute tolerance for validity checks (Hermiticity, positivity,
/// trace normalization). Chosen to absorb double-precision eigensolver noise.
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Identity matrix of dimension `d`.
pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Max-norm of the difference of two matrices.
pub fn max_norm_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_norm_diff(m, &m.adjoint()) <= tol
}

/// Kronecker product with `a`'s indices as the slower-varying block index.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn tensor_all(ms: &[&CMat]) -> CMat {
    let mut out = ms[0].clone();
    for m in &ms[1..] {
        out = tensor(&out, m);
    }
    out
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Partial trace of `m` (a square matrix on the composite space described by
/// `dims`), keeping the subsystems listed in `keep` (in their original order).
///
/// Works on raw matrices so it can also contract non-Hermitian operators; the
/// [`DensityMatrix`] wrapper delegates here.
pub fn partial_trace_mat(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimMismatch(format!(
            "matrix is {}x{} but dims product is {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "keep index out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let d_keep: usize = keep.iter().map(|&i| dims[i]).product();
    let d_traced: usize = traced.iter().map(|&i| dims[i]).product();

    // strides of each subsystem index in the flat row-major composite index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let flat = |subsys: &[usize], multi: &[usize]| -> usize {
        subsys.iter().zip(multi).map(|(&s, &x)| strides[s] * x).sum()
    };
    let unrank = |subsys: &[usize], mut r: usize| -> Vec<usize> {
        let mut out = vec![0usize; subsys.len()];
        for (pos, &s) in subsys.iter().enumerate().rev() {
            out[pos] = r % dims[s];
            r /= dims[s];
        }
        out
    };

    let mut out = CMat::zeros(d_keep, d_keep);
    for rk in 0..d_keep {
        let mk = unrank(&keep, rk);
        let base_r = flat(&keep, &mk);
        for ck in 0..d_keep {
            let mc = unrank(&keep, ck);
            let base_c = flat(&keep, &mc);
            let mut acc = C64::new(0.0, 0.0);
            for rt in 0..d_traced {
                let mt = unrank(&traced, rt);
                let off = flat(&traced, &mt);
                acc += m[(base_r + off, base_c + off)];
            }
            out[(rk, ck)] = acc;
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition with eigenvalues sorted descending and the
/// eigenvector columns permuted to match.
pub fn eig_hermitian(m: &CMat, tol: f64) -> Result<(Vec<f64>, CMat)> {
    if !is_hermitian(m, tol) {
        return Err(Error::InvalidArgument(
            "eig_hermitian: matrix is not Hermitian within tolerance".into(),
        ));
    }
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Hermitian matrix function: applies `f` to each eigenvalue.
pub fn herm_func(m: &CMat, tol: f64, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (vals, vecs) = eig_hermitian(m, tol)?;
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        let col = vecs.column(i);
        let fv = f(v);
        out += (col * col.adjoint()).scale(1.0) * fv;
    }
    Ok(out)
}

/// PSD square root, clamping small negative eigenvalues to zero.
pub fn psd_sqrt(m: &CMat, tol: f64) -> Result<CMat> {
    herm_func(m, tol, |v| cr(v.max(0.0).sqrt()))
}

/// exp(-i t H) for Hermitian H, via eigendecomposition.
pub fn expm_i_hermitian(h: &CMat, t: f64, tol: f64) -> Result<CMat> {
    herm_func(h, tol, |v| (-C64::i() * (v * t)).exp())
}

fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// A density matrix together with the ordered subsystem dimensions of the
/// composite space it lives on.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace within `tol`.
    pub fn new(mat: CMat, dims: Vec<usize>, tol: f64) -> Result<Self> {
        let total: usize = dims.iter().product();
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimMismatch(format!(
                "matrix is {}x{} but dims {:?} give {total}",
                mat.nrows(),
                mat.ncols(),
                dims
            )));
        }
        if !is_hermitian(&mat, tol) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = trace(&mat);
        if (tr - cr(1.0)).norm() > tol {
            return Err(Error::InvalidState(format!(
                "density matrix has trace {tr} (expected 1)"
            )));
        }
        let (vals, _) = eig_hermitian(&mat, tol)?;
        if let Some(&min) = vals.last() {
            if min < -tol {
                return Err(Error::InvalidState(format!(
                    "density matrix has negative eigenvalue {min}"
                )));
            }
        }
        Ok(Self { mat, dims })
    }

    pub fn with_default_tol(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        Self::new(mat, dims, DEFAULT_TOL)
    }

    /// Skips validation. For internal construction where validity is
    /// guaranteed by the producing operation.
    pub fn new_unchecked(mat: CMat, dims: Vec<usize>) -> Self {
        Self { mat, dims }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Reinterprets the same matrix with a different subsystem split.
    pub fn reshaped(&self, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(Error::DimMismatch(format!(
                "dims {:?} do not match dimension {}",
                dims,
                self.dim()
            )));
        }
        Ok(Self {
            mat: self.mat.clone(),
            dims,
        })
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.mat * &self.mat)).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// Largest-eigenvalue eigenvector; the state itself when pure.
    pub fn principal_component(&self) -> Result<PureState> {
        let (_, vecs) = eig_hermitian(&self.mat, DEFAULT_TOL)?;
        let amps: CVec = vecs.column(0).into();
        PureState::new(amps, self.dims.clone(), 1e-6)
    }

    pub fn eigen_decomposition(&self, cutoff: f64) -> Result<Vec<(f64, CVec)>> {
        let (vals, vecs) = eig_hermitian(&self.mat, DEFAULT_TOL)?;
        Ok(vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > cutoff)
            .map(|(i, &v)| (v, vecs.column(i).into()))
            .collect())
    }
}

/// Trace over the complement of `keep`; the result's `dims` are the kept
/// subsystem dimensions in their original order.
pub fn partial_trace(m: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let out = partial_trace_mat(&m.mat, &m.dims, keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let dims: Vec<usize> = keep.iter().map(|&i| m.dims[i]).collect();
    Ok(DensityMatrix::new_unchecked(out, dims))
}

/// A normalized pure state with subsystem dimensions.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: CVec,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amps: CVec, dims: Vec<usize>, tol: f64) -> Result<Self> {
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::DimMismatch(format!(
                "amplitude count {} does not match dims {:?}",
                amps.len(),
                dims
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!(
                "state has norm {norm} (expected 1)"
            )));
        }
        Ok(Self { amps, dims })
    }

    pub fn from_amplitudes(amps: &[C64], dims: Vec<usize>) -> Result<Self> {
        Self::new(CVec::from_row_slice(amps), dims, DEFAULT_TOL)
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(amps: CVec, dims: Vec<usize>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amps.unscale(norm), dims, 1e-9)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let mat = &self.amps * self.amps.adjoint();
        DensityMatrix::new_unchecked(mat, self.dims.clone())
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = tensor_vec(&self.amps, &other.amps);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amps, dims }
    }
}

/// |φ_d⟩ = Σ_k |kk⟩/√d, the maximally entangled state on d×d.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "max_entangled requires d >= 2, got {d}"
        )));
    }
    let mut amps = CVec::zeros(d * d);
    let a = cr(1.0 / (d as f64).sqrt());
    for k in 0..d {
        amps[k * d + k] = a;
    }
    Ok(PureState {
        amps,
        dims: vec![d, d],
    })
}

/// Coefficient matrix A with ψ = Σ A[i][j] |i⟩⊗|j⟩.
pub fn coefficient_matrix(psi: &PureState, d_a: usize, d_b: usize) -> Result<CMat> {
    if d_a * d_b != psi.dim() {
        return Err(Error::DimMismatch(format!(
            "dA*dB = {} but state has {} amplitudes",
            d_a * d_b,
            psi.dim()
        )));
    }
    Ok(CMat::from_fn(d_a, d_b, |i, j| psi.amps[i * d_b + j]))
}

/// ½ Σ |eigenvalues of ρ − σ|.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "trace_distance: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = &rho.mat - &sigma.mat;
    let (vals, _) = eig_hermitian(&diff, 1e-8)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

/// R_x(θ) = exp(-iθσ_x/2).
pub fn rot_x(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[cr(co), c(0.0, -s), c(0.0, -s), cr(co)])
}

/// R_z(θ) = exp(-iθσ_z/2).
pub fn rot_z(theta: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            (-C64::i() * (theta / 2.0)).exp(),
            cr(0.0),
            cr(0.0),
            (C64::i() * (theta / 2.0)).exp(),
        ],
    )
}
