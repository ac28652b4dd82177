//! Completely positive maps in Kraus form, their Heisenberg adjoints, the
//! Choi state, and the named channel constructors used throughout.

use crate::qcore::{
    self, cr, eig_hermitian, identity, is_hermitian, max_entangled, max_norm_diff, tensor, CMat,
    DensityMatrix,
};
use crate::{Error, Result};

/// A CPM as a list of Kraus operators, each `d_out x d_in`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
    cptp: bool,
}

impl KrausChannel {
    /// Builds a channel, checking operator shapes. When `cptp` is declared,
    /// also checks ‖Σ K†K − I‖_max ≤ tol.
    pub fn new(kraus: Vec<CMat>, cptp: bool, tol: f64) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("channel needs at least one Kraus operator".into()));
        }
        let d_out = kraus[0].nrows();
        let d_in = kraus[0].ncols();
        for k in &kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::InvalidChannel(
                    "Kraus operators must all share dimensions".into(),
                ));
            }
        }
        let ch = Self { kraus, d_in, d_out, cptp };
        if cptp {
            let defect = ch.cptp_defect();
            if defect > tol {
                return Err(Error::InvalidChannel(format!(
                    "channel declared CPTP but ‖ΣK†K − I‖_max = {defect:.3e}"
                )));
            }
        }
        Ok(ch)
    }

    pub fn cptp(kraus: Vec<CMat>) -> Result<Self> {
        Self::new(kraus, true, 1e-9)
    }

    pub fn kraus_ops(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn is_cptp(&self) -> bool {
        self.cptp
    }

    pub fn cptp_defect(&self) -> f64 {
        let mut sum = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_norm_diff(&sum, &identity(self.d_in))
    }

    /// True when the channel acts as the identity map (Choi state equals
    /// |φ_d⟩⟨φ_d| within `tol`).
    pub fn is_identity(&self, tol: f64) -> bool {
        if self.d_in != self.d_out {
            return false;
        }
        match choi_state(self) {
            Ok(choi) => {
                let phi = max_entangled(self.d_in).unwrap().density();
                max_norm_diff(choi.matrix(), phi.matrix()) <= tol
            }
            Err(_) => false,
        }
    }
}

/// Schrödinger-picture action: $[ρ] = Σ K_j ρ K_j†.
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.d_in {
        return Err(Error::DimMismatch(format!(
            "channel expects dimension {}, state has {}",
            ch.d_in,
            rho.dim()
        )));
    }
    let mut out = CMat::zeros(ch.d_out, ch.d_out);
    for k in &ch.kraus {
        out += k * rho.matrix() * k.adjoint();
    }
    let dims = if ch.d_in == ch.d_out {
        rho.dims().to_vec()
    } else {
        vec![ch.d_out]
    };
    Ok(DensityMatrix::new_unchecked(out, dims))
}

/// Heisenberg-picture action on an observable: $†[P] = Σ K_j† P K_j.
pub fn adjoint_apply(ch: &KrausChannel, p: &CMat) -> Result<CMat> {
    if p.nrows() != ch.d_out || p.ncols() != ch.d_out {
        return Err(Error::DimMismatch(format!(
            "adjoint expects {0}x{0}, got {1}x{2}",
            ch.d_out,
            p.nrows(),
            p.ncols()
        )));
    }
    if !is_hermitian(p, 1e-8) {
        return Err(Error::InvalidArgument("adjoint_apply: operator is not Hermitian".into()));
    }
    let mut out = CMat::zeros(ch.d_in, ch.d_in);
    for k in &ch.kraus {
        out += k.adjoint() * p * k;
    }
    Ok(out)
}

/// Tensor product channel with Kraus set {K_i ⊗ L_j}.
pub fn tensor_channels(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for ka in &a.kraus {
        for kb in &b.kraus {
            kraus.push(tensor(ka, kb));
        }
    }
    KrausChannel {
        kraus,
        d_in: a.d_in * b.d_in,
        d_out: a.d_out * b.d_out,
        cptp: a.cptp && b.cptp,
    }
}

/// Choi state (1 ⊗ $)|φ_d⟩⟨φ_d| with the channel on the second subsystem.
///
/// The transposed convention ($ ⊗ 1) yields a Choi state of identical
/// entanglement by the |i⟩|j⟩ ↔ |j⟩|i⟩ symmetry of |φ_d⟩; see the swap test.
pub fn choi_state(ch: &KrausChannel) -> Result<DensityMatrix> {
    if ch.d_in != ch.d_out {
        return Err(Error::InvalidChannel(
            "choi_state requires a square channel".into(),
        ));
    }
    let d = ch.d_in;
    let phi = max_entangled(d)?.density();
    let id = identity_channel(d);
    let joint = tensor_channels(&id, ch);
    apply(&joint, &phi)
}

/// Choi state with the channel on the first subsystem: ($ ⊗ 1)|φ_d⟩⟨φ_d|.
pub fn choi_state_first(ch: &KrausChannel) -> Result<DensityMatrix> {
    if ch.d_in != ch.d_out {
        return Err(Error::InvalidChannel(
            "choi_state requires a square channel".into(),
        ));
    }
    let d = ch.d_in;
    let phi = max_entangled(d)?.density();
    let id = identity_channel(d);
    let joint = tensor_channels(ch, &id);
    apply(&joint, &phi)
}

/// A finite POVM {P_k} on a declared composite space.
#[derive(Debug, Clone)]
pub struct PovmSet {
    elements: Vec<CMat>,
    space_dims: Vec<usize>,
}

impl PovmSet {
    pub fn new(elements: Vec<CMat>, space_dims: Vec<usize>, tol: f64) -> Result<Self> {
        let d: usize = space_dims.iter().product();
        if elements.is_empty() {
            return Err(Error::InvalidArgument("POVM needs at least one element".into()));
        }
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimMismatch(format!(
                    "POVM element is {}x{} on a dimension-{d} space",
                    e.nrows(),
                    e.ncols()
                )));
            }
            if !is_hermitian(e, tol) {
                return Err(Error::InvalidArgument("POVM element is not Hermitian".into()));
            }
            let (vals, _) = eig_hermitian(e, tol)?;
            if let Some(&min) = vals.last() {
                if min < -tol {
                    return Err(Error::InvalidArgument(format!(
                        "POVM element has negative eigenvalue {min:.3e}"
                    )));
                }
            }
            sum += e;
        }
        let defect = max_norm_diff(&sum, &identity(d));
        if defect > tol {
            return Err(Error::InvalidArgument(format!(
                "POVM elements sum to identity with defect {defect:.3e}"
            )));
        }
        Ok(Self { elements, space_dims })
    }

    pub fn new_unchecked(elements: Vec<CMat>, space_dims: Vec<usize>) -> Self {
        Self { elements, space_dims }
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn space_dims(&self) -> &[usize] {
        &self.space_dims
    }

    pub fn dim(&self) -> usize {
        self.space_dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMat::zeros(d, d);
        for e in &self.elements {
            sum += e;
        }
        max_norm_diff(&sum, &identity(d))
    }
}

/// The identity channel on dimension d.
pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel {
        kraus: vec![identity(d)],
        d_in: d,
        d_out: d,
        cptp: true,
    }
}

/// Amplitude damping with photon loss rate γ:
/// E₀ = |0⟩⟨0| + √(1−γ)|1⟩⟨1|, E₁ = √γ|0⟩⟨1|.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "amplitude damping rate must be in [0,1], got {gamma}"
        )));
    }
    let e0 = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - gamma).sqrt())]);
    let e1 = CMat::from_row_slice(2, 2, &[cr(0.0), cr(gamma.sqrt()), cr(0.0), cr(0.0)]);
    KrausChannel::new(vec![e0, e1], true, 1e-12)
}

/// Phase damping with rate λ:
/// E₀ = |0⟩⟨0| + √(1−λ)|1⟩⟨1|, E₁ = √λ|1⟩⟨1|.
pub fn phase_damping(lambda: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "phase damping rate must be in [0,1], got {lambda}"
        )));
    }
    let e0 = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - lambda).sqrt())]);
    let e1 = CMat::from_row_slice(2, 2, &[cr(0.0), cr(0.0), cr(0.0), cr(lambda.sqrt())]);
    KrausChannel::new(vec![e0, e1], true, 1e-12)
}

/// Superselection-rule dephasing ρ ↦ Σ_n Π_n ρ Π_n, where each Π_n projects
/// onto the basis indices in `blocks[n]`. The blocks must partition the basis.
pub fn ssr_dephasing(blocks: &[Vec<usize>]) -> Result<KrausChannel> {
    let d: usize = blocks.iter().map(|b| b.len()).sum();
    let mut seen = vec![false; d];
    for b in blocks {
        for &i in b {
            if i >= d || seen[i] {
                return Err(Error::InvalidArgument(
                    "ssr_dephasing blocks must partition the basis".into(),
                ));
            }
            seen[i] = true;
        }
    }
    let mut kraus = Vec::with_capacity(blocks.len());
    for b in blocks {
        let mut p = CMat::zeros(d, d);
        for &i in b {
            p[(i, i)] = cr(1.0);
        }
        kraus.push(p);
    }
    KrausChannel::new(kraus, true, 1e-12)
}

/// Channel ρ ↦ UρU†.
pub fn unitary_channel(u: &CMat) -> Result<KrausChannel> {
    if !u.is_square() {
        return Err(Error::InvalidChannel("unitary_channel requires a square matrix".into()));
    }
    let defect = max_norm_diff(&(u.adjoint() * u), &identity(u.nrows()));
    if defect > 1e-9 {
        return Err(Error::InvalidChannel(format!(
            "matrix is not unitary, ‖U†U − I‖_max = {defect:.3e}"
        )));
    }
    KrausChannel::new(vec![u.clone()], true, 1e-9)
}

/// Qubit depolarizing channel ρ ↦ (1−p)ρ + p·I/2.
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing probability must be in [0,1], got {p}"
        )));
    }
    let k0 = identity(2).scale((1.0 - 3.0 * p / 4.0).sqrt());
    let kx = qcore::pauli_x().scale((p / 4.0).sqrt());
    let ky = qcore::pauli_y().scale((p / 4.0).sqrt());
    let kz = qcore::pauli_z().scale((p / 4.0).sqrt());
    KrausChannel::new(vec![k0, kx, ky, kz], true, 1e-12)
}
