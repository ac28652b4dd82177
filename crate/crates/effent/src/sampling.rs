//! Deterministic random generation of states, unitaries, POVMs and CPTP
//! channels. All consumers seed a [`rand_chacha::ChaCha8Rng`] explicitly so
//! results are reproducible across runs and platforms.

use rand::Rng;

use crate::qcore::{c, CMat, CVec, DensityMatrix, PureState};
use crate::channels::{KrausChannel, PovmSet};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(gauss(rng), gauss(rng))
    })
}

fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fixing.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random isometry (d_total x d) with orthonormal columns.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    assert!(rows >= cols);
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    qr.q()
}

/// Haar-random pure state on the given subsystem dimensions.
pub fn random_pure(rng: &mut impl Rng, dims: &[usize]) -> PureState {
    let d: usize = dims.iter().product();
    let v = CVec::from_fn(d, |_, _| c(gauss(rng), gauss(rng)));
    PureState::normalized(v, dims.to_vec()).unwrap()
}

/// Full-rank random density matrix (Ginibre ensemble).
pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    random_density_rank(rng, d, d)
}

/// Random density matrix of rank at most `rank`.
pub fn random_density_rank(rng: &mut impl Rng, d: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, d, rank);
    let m = &g * g.adjoint();
    let tr = m.diagonal().sum().re;
    DensityMatrix::new_unchecked(m.unscale(tr), vec![d])
}

/// Random PSD operator with operator norm at most ~1 (unnormalized POVM-like).
pub fn random_psd(rng: &mut impl Rng, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let scale = m.diagonal().sum().re;
    m.unscale(scale)
}

/// Random CPTP channel with `n_kraus` Kraus operators via a Haar-random
/// Stinespring isometry.
pub fn random_cptp_channel(rng: &mut impl Rng, d: usize, n_kraus: usize) -> KrausChannel {
    let v = random_isometry(rng, d * n_kraus, d);
    let mut kraus = Vec::with_capacity(n_kraus);
    for j in 0..n_kraus {
        kraus.push(CMat::from_fn(d, d, |r, cc| v[(j * d + r, cc)]));
    }
    KrausChannel::new(kraus, true, 1e-9).expect("Stinespring blocks form a CPTP channel")
}

/// Random POVM with `n` elements: squares of Ginibre matrices, symmetrized by
/// the inverse square root of their sum.
pub fn random_povm(rng: &mut impl Rng, dims: &[usize], n: usize) -> PovmSet {
    let d: usize = dims.iter().product();
    let raw: Vec<CMat> = (0..n)
        .map(|_| {
            let g = ginibre(rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    let mut sum = CMat::zeros(d, d);
    for m in &raw {
        sum += m;
    }
    // S^{-1/2} M_k S^{-1/2} sums to identity
    let s_inv_sqrt = inv_sqrt(&sum);
    let elements: Vec<CMat> = raw.iter().map(|m| &s_inv_sqrt * m * &s_inv_sqrt).collect();
    PovmSet::new(elements, dims.to_vec(), 1e-8)
        .expect("symmetrized POVM must be valid")
}

/// Inverse PSD square root, pseudo-inverting eigenvalues below 1e-14.
pub fn inv_sqrt(m: &CMat) -> CMat {
    let s = crate::qcore::herm_func(m, 1e-8, |v| {
        if v > 1e-14 {
            crate::qcore::cr(1.0 / v.sqrt())
        } else {
            crate::qcore::cr(0.0)
        }
    })
    .expect("inv_sqrt of a Hermitian matrix");
    s
}
