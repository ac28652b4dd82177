//! Entanglement measures: pure-state G-concurrence, the Wootters closed form
//! for two qubits, the convex-roof extension by optimization over
//! decomposition isometries, and the two-qubit entanglement of formation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::qcore::{
    coefficient_matrix, cr, eig_hermitian, pauli_y, tensor, CMat, DensityMatrix, PureState, C64,
};
use crate::sampling;
use crate::{Error, Result};

/// G-concurrence of a pure bipartite state: G_d = d·(det[A†A])^{1/d} with A
/// the coefficient matrix and d = min(dA, dB).
///
/// For dA ≠ dB the determinant is taken of the smaller Gram matrix; the
/// measure vanishes beyond Schmidt rank d.
pub fn g_concurrence_pure(psi: &PureState, d_a: usize, d_b: usize) -> Result<f64> {
    let a = coefficient_matrix(psi, d_a, d_b)?;
    let d = d_a.min(d_b);
    let sv = a.svd(false, false).singular_values;
    // det(A†A) = ∏ σ_i² over the d largest singular values; computed from the
    // SVD for stability near singularity
    let mut log_prod = 0.0;
    for i in 0..d {
        let s = sv[i];
        if s <= 1e-300 {
            return Ok(0.0);
        }
        log_prod += 2.0 * s.ln();
    }
    Ok(d as f64 * (log_prod / d as f64).exp())
}

/// Wootters' closed-form concurrence of a two-qubit density matrix:
/// C = max(0, λ₁−λ₂−λ₃−λ₄) with λᵢ the decreasing square roots of the
/// eigenvalues of ρ(σ_y⊗σ_y)ρ*(σ_y⊗σ_y).
pub fn concurrence_wootters(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimMismatch(format!(
            "concurrence_wootters needs a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    let yy = tensor(&pauli_y(), &pauli_y());
    // λ_i are the singular values of B = √ρ (σ_y⊗σ_y) √ρ^T, since
    // √ρ ρ̃ √ρ = B B†. Computing them as singular values avoids the square
    // root of near-zero eigenvalues, which would amplify solver noise.
    let sqrt_rho = psd_sqrt_thresholded(rho.matrix())?;
    let b = &sqrt_rho * &yy * sqrt_rho.transpose();
    let lam = b.svd(false, false).singular_values;
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

/// PSD square root that zeroes eigenvalues below a relative cutoff, so that
/// rank-deficient inputs do not leak √(solver noise) into the result.
fn psd_sqrt_thresholded(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eig_hermitian(m, 1e-8)?;
    let cutoff = 1e-13 * vals.first().copied().unwrap_or(0.0).max(1.0);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > cutoff {
            let col = vecs.column(i);
            out += (col * col.adjoint()) * cr(v.sqrt());
        }
    }
    Ok(out)
}

fn binary_entropy(x: f64) -> f64 {
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.log2();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).log2();
    }
    h
}

/// Entanglement of formation of a two-qubit state:
/// E_F = h((1+√(1−C²))/2) with C the Wootters concurrence.
pub fn entanglement_of_formation_2q(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence_wootters(rho)?;
    Ok(eof_from_concurrence(c))
}

pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

/// Options for the convex-roof optimizer.
#[derive(Debug, Clone)]
pub struct RoofOpts {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Number of decomposition terms; defaults to 2r for rank r when `None`.
    pub ensemble_size: Option<usize>,
}

impl Default for RoofOpts {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 500,
            tol: 1e-8,
            seed: 0,
            ensemble_size: None,
        }
    }
}

/// Outcome of the convex-roof optimization.
#[derive(Debug, Clone)]
pub struct RoofResult {
    /// Upper bound on the convex roof G_d(ρ).
    pub value: f64,
    /// Total optimizer iterations across restarts.
    pub iters: usize,
}

/// Upper bound on the convex-roof G-concurrence of a mixed state on dA×dB,
/// by random-restart projected gradient descent over decomposition isometries
/// |ψ̃_i⟩ = Σ_j V_ij √λ_j |e_j⟩ with V having orthonormal columns.
pub fn g_concurrence_mixed(rho: &DensityMatrix, d_a: usize, d_b: usize, opts: &RoofOpts) -> Result<RoofResult> {
    if d_a * d_b != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "dA·dB = {} but state has dimension {}",
            d_a * d_b,
            rho.dim()
        )));
    }
    if opts.restarts == 0 || opts.max_iters == 0 {
        return Err(Error::InvalidArgument("roof optimizer needs restarts ≥ 1 and iters ≥ 1".into()));
    }
    let pairs = rho.eigen_decomposition(1e-12)?;
    let r = pairs.len();
    if r == 0 {
        return Err(Error::InvalidState("state has no support".into()));
    }
    // coefficient matrices of the scaled eigenvectors √λ_j |e_j⟩
    let basis: Vec<CMat> = pairs
        .iter()
        .map(|(lam, v)| {
            let scaled = v.scale(lam.sqrt());
            CMat::from_fn(d_a, d_b, |i, j| scaled[i * d_b + j])
        })
        .collect();

    if r == 1 {
        // rank-1 roof: the pure-state value is exact
        let psi = PureState::normalized(pairs[0].1.scale(pairs[0].0.sqrt()), rho.dims().to_vec())
            .or_else(|_| PureState::normalized(pairs[0].1.clone(), vec![d_a, d_b]))?;
        let v = g_concurrence_pure(&psi, d_a, d_b)?;
        return Ok(RoofResult { value: v, iters: 0 });
    }

    let m = opts.ensemble_size.unwrap_or(2 * r).max(r).min(2 * r * r);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = f64::INFINITY;
    let mut total_iters = 0usize;
    for restart in 0..opts.restarts {
        let v0 = if restart == 0 {
            // eigendecomposition itself, embedded in the first r rows
            let mut v = CMat::zeros(m, r);
            for j in 0..r {
                v[(j, j)] = cr(1.0);
            }
            v
        } else {
            sampling::random_isometry(&mut rng, m, r)
        };
        let (val, iters) = descend(&basis, v0, opts.max_iters, opts.tol);
        total_iters += iters;
        // deterministic merge: strict minimum keeps the earliest restart on ties
        if val < best {
            best = val;
        }
    }
    Ok(RoofResult { value: best.max(0.0), iters: total_iters })
}

/// Objective Σ_i d·(det Ã_i†Ã_i)^{1/d} where Ã_i = Σ_j V_ij M_j; the ensemble
/// weights cancel because G_d is homogeneous of the right degree.
fn roof_objective(basis: &[CMat], v: &CMat) -> f64 {
    let d = basis[0].nrows().min(basis[0].ncols());
    let mut total = 0.0;
    for i in 0..v.nrows() {
        let a = mix(basis, v, i);
        let g = gram(&a);
        let det = det_hermitian(&g).max(0.0);
        total += d as f64 * det.powf(1.0 / d as f64);
    }
    total
}

fn mix(basis: &[CMat], v: &CMat, row: usize) -> CMat {
    let mut a = CMat::zeros(basis[0].nrows(), basis[0].ncols());
    for (j, m) in basis.iter().enumerate() {
        a += m * v[(row, j)];
    }
    a
}

/// Gram matrix of size d = min(rows, cols).
fn gram(a: &CMat) -> CMat {
    if a.nrows() >= a.ncols() {
        a.adjoint() * a
    } else {
        a * a.adjoint()
    }
}

fn det_hermitian(g: &CMat) -> f64 {
    g.determinant().re
}

/// Adjugate of a Hermitian PSD matrix (small dimensions only).
fn adjugate(g: &CMat) -> CMat {
    let n = g.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, cr(1.0));
    }
    let mut adj = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = minor_det(g, j, i);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(i, j)] = minor * cr(sign);
        }
    }
    adj
}

fn minor_det(g: &CMat, skip_row: usize, skip_col: usize) -> C64 {
    let n = g.nrows();
    let rows: Vec<usize> = (0..n).filter(|&r| r != skip_row).collect();
    let cols: Vec<usize> = (0..n).filter(|&c| c != skip_col).collect();
    let sub = CMat::from_fn(n - 1, n - 1, |i, j| g[(rows[i], cols[j])]);
    sub.determinant()
}

/// Wirtinger gradient of the objective with respect to V̄.
fn roof_gradient(basis: &[CMat], v: &CMat) -> CMat {
    let d = basis[0].nrows().min(basis[0].ncols());
    let tall = basis[0].nrows() >= basis[0].ncols();
    let mut grad = CMat::zeros(v.nrows(), v.ncols());
    for i in 0..v.nrows() {
        let a = mix(basis, v, i);
        let g = gram(&a);
        let u = det_hermitian(&g).max(0.0);
        if u < 1e-30 {
            continue; // subgradient 0 at the det = 0 kink
        }
        let adj = adjugate(&g);
        // ∂det(G)/∂Ā = A·adj(G) for G = A†A (or adj(G)·A for G = AA†)
        let ddet = if tall { &a * &adj } else { &adj * &a };
        let factor = u.powf(1.0 / d as f64 - 1.0);
        for (j, mj) in basis.iter().enumerate() {
            let inner: C64 = mj
                .iter()
                .zip(ddet.iter())
                .map(|(m, dd)| m.conj() * dd)
                .sum();
            grad[(i, j)] += inner * cr(factor);
        }
    }
    grad
}

/// Projected gradient descent on the Stiefel manifold with a QR retraction
/// and backtracking line search. Returns (best objective, iterations used).
fn descend(basis: &[CMat], mut v: CMat, max_iters: usize, tol: f64) -> (f64, usize) {
    let mut obj = roof_objective(basis, &v);
    let mut step = 0.1;
    let mut iters = 0;
    let mut stall = 0usize;
    for _ in 0..max_iters {
        iters += 1;
        let grad = roof_gradient(basis, &v);
        // tangent projection: G − V·herm(V†G)
        let vg = v.adjoint() * &grad;
        let herm = (&vg + vg.adjoint()).unscale(2.0);
        let tangent = &grad - &v * herm;
        let tnorm = tangent.norm();
        if tnorm < 1e-14 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = retract(&(&v - tangent.scale(step / tnorm.max(1.0))));
            let cand_obj = roof_objective(basis, &candidate);
            if cand_obj < obj - 1e-16 {
                let improvement = obj - cand_obj;
                v = candidate;
                obj = cand_obj;
                step = (step * 1.3).min(1.0);
                accepted = true;
                if improvement < tol {
                    stall += 1;
                } else {
                    stall = 0;
                }
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
        if !accepted || stall >= 5 {
            break;
        }
    }
    (obj, iters)
}

fn retract(v: &CMat) -> CMat {
    v.clone().qr().q()
}

/// Convex-roof value of a state declared on square d×d.
pub fn g_concurrence_mixed_square(rho: &DensityMatrix, d: usize, opts: &RoofOpts) -> Result<RoofResult> {
    g_concurrence_mixed(rho, d, d, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{identity, max_entangled, tensor_vec, DensityMatrix};

    fn werner(p: f64) -> DensityMatrix {
        let bell = max_entangled(2).unwrap().density();
        let m = bell.matrix().scale(p) + identity(4).scale((1.0 - p) / 4.0);
        DensityMatrix::new(m, vec![2, 2], 1e-9).unwrap()
    }

    #[test]
    fn pure_g_concurrence_maximally_entangled() {
        for d in 2..=4 {
            let phi = max_entangled(d).unwrap();
            let g = g_concurrence_pure(&phi, d, d).unwrap();
            assert!((g - 1.0).abs() < 1e-12, "d={d}: got {g}");
        }
    }

    #[test]
    fn pure_g_concurrence_product_state() {
        let psi = PureState::from_amplitudes(
            &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)],
            vec![2, 2],
        )
        .unwrap();
        assert_eq!(g_concurrence_pure(&psi, 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn pure_g_concurrence_known_value() {
        // √0.9|00⟩ + √0.1|11⟩ → 2√(0.9·0.1) = 0.6
        let psi = PureState::from_amplitudes(
            &[cr(0.9f64.sqrt()), cr(0.0), cr(0.0), cr(0.1f64.sqrt())],
            vec![2, 2],
        )
        .unwrap();
        let g = g_concurrence_pure(&psi, 2, 2).unwrap();
        assert!((g - 0.6).abs() < 1e-12);
    }

    #[test]
    fn pure_g_concurrence_local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let psi = sampling::random_pure(&mut rng, &[3, 3]);
            let u = sampling::random_unitary(&mut rng, 3);
            let w = sampling::random_unitary(&mut rng, 3);
            let rotated = PureState::normalized(
                tensor(&u, &w) * psi.amplitudes(),
                vec![3, 3],
            )
            .unwrap();
            let g1 = g_concurrence_pure(&psi, 3, 3).unwrap();
            let g2 = g_concurrence_pure(&rotated, 3, 3).unwrap();
            assert!((g1 - g2).abs() < 1e-10);
        }
    }

    #[test]
    fn wootters_bell_state() {
        let bell = max_entangled(2).unwrap().density();
        assert!((concurrence_wootters(&bell).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wootters_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = sampling::random_pure(&mut rng, &[2]);
        let b = sampling::random_pure(&mut rng, &[2]);
        let prod = PureState::normalized(
            tensor_vec(a.amplitudes(), b.amplitudes()),
            vec![2, 2],
        )
        .unwrap();
        assert!(concurrence_wootters(&prod.density()).unwrap() < 1e-10);
    }

    #[test]
    fn wootters_werner_states() {
        for p in [0.2, 0.5, 0.8] {
            let expect = (0.0f64).max((3.0 * p - 1.0) / 2.0);
            let c = concurrence_wootters(&werner(p)).unwrap();
            assert!((c - expect).abs() < 1e-10, "p={p}: {c} vs {expect}");
        }
    }

    #[test]
    fn eof_values() {
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-12);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        // C = 0.6 → h(0.9)
        let expect = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert!((eof_from_concurrence(0.6) - expect).abs() < 1e-12);
        assert!((expect - 0.4690).abs() < 1e-4);
    }

    #[test]
    fn eof_monotone_in_concurrence() {
        let mut prev = -1.0;
        for i in 0..=20 {
            let c = i as f64 / 20.0;
            let e = eof_from_concurrence(c);
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn roof_pure_state_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let psi = sampling::random_pure(&mut rng, &[2, 2]);
        let rho = psi.density();
        let exact = g_concurrence_pure(&psi, 2, 2).unwrap();
        let roof = g_concurrence_mixed(&rho, 2, 2, &RoofOpts::default()).unwrap();
        assert!((roof.value - exact).abs() < 1e-6);
    }

    #[test]
    fn roof_separable_diagonal_state() {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = cr(0.3);
        m[(3, 3)] = cr(0.7);
        let rho = DensityMatrix::new(m, vec![2, 2], 1e-9).unwrap();
        let roof = g_concurrence_mixed(&rho, 2, 2, &RoofOpts::default()).unwrap();
        assert!(roof.value < 1e-6, "got {}", roof.value);
    }

    #[test]
    fn roof_matches_wootters_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for trial in 0..10 {
            let rho = sampling::random_density_rank(&mut rng, 4, 1 + trial % 4)
                .reshaped(vec![2, 2])
                .unwrap();
            let wootters = concurrence_wootters(&rho).unwrap();
            let roof = g_concurrence_mixed(&rho, 2, 2, &RoofOpts::default()).unwrap();
            assert!(
                roof.value >= wootters - 1e-9 && roof.value <= wootters + 1e-3,
                "trial {trial}: roof {} vs wootters {wootters}",
                roof.value
            );
        }
    }

    #[test]
    fn roof_werner_state() {
        let rho = werner(0.8).reshaped(vec![2, 2]).unwrap();
        let roof = g_concurrence_mixed(&rho, 2, 2, &RoofOpts::default()).unwrap();
        let expect = (3.0 * 0.8 - 1.0) / 2.0;
        assert!((roof.value - expect).abs() < 1e-3, "roof {} vs {}", roof.value, expect);
    }

    #[test]
    fn roof_convexity_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let opts = RoofOpts::default();
        for _ in 0..4 {
            let r1 = sampling::random_density_rank(&mut rng, 4, 2).reshaped(vec![2, 2]).unwrap();
            let r2 = sampling::random_density_rank(&mut rng, 4, 2).reshaped(vec![2, 2]).unwrap();
            let p = 0.4;
            let mixed = DensityMatrix::new(
                r1.matrix().scale(p) + r2.matrix().scale(1.0 - p),
                vec![2, 2],
                1e-8,
            )
            .unwrap();
            let gm = g_concurrence_mixed(&mixed, 2, 2, &opts).unwrap().value;
            let g1 = g_concurrence_mixed(&r1, 2, 2, &opts).unwrap().value;
            let g2 = g_concurrence_mixed(&r2, 2, 2, &opts).unwrap().value;
            assert!(gm <= p * g1 + (1.0 - p) * g2 + 2e-3);
        }
    }

    #[test]
    fn roof_noise_mixing_does_not_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let rho = sampling::random_density_rank(&mut rng, 4, 2).reshaped(vec![2, 2]).unwrap();
        let mut noise = CMat::zeros(4, 4);
        noise[(0, 0)] = cr(0.5);
        noise[(3, 3)] = cr(0.5);
        let opts = RoofOpts::default();
        let base = g_concurrence_mixed(&rho, 2, 2, &opts).unwrap().value;
        let eps = 0.3;
        let noisy = DensityMatrix::new(
            rho.matrix().scale(1.0 - eps) + noise.scale(eps),
            vec![2, 2],
            1e-8,
        )
        .unwrap();
        let degraded = g_concurrence_mixed(&noisy, 2, 2, &opts).unwrap().value;
        assert!(degraded <= base + 1e-3);
    }

    #[test]
    fn roof_deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2]).unwrap();
        let opts = RoofOpts { restarts: 4, ..Default::default() };
        let a = g_concurrence_mixed(&rho, 2, 2, &opts).unwrap().value;
        let b = g_concurrence_mixed(&rho, 2, 2, &opts).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn roof_rejects_bad_options() {
        let rho = werner(0.5).reshaped(vec![2, 2]).unwrap();
        let opts = RoofOpts { restarts: 0, ..Default::default() };
        assert!(g_concurrence_mixed(&rho, 2, 2, &opts).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2]).unwrap();
        let pairs = rho.eigen_decomposition(1e-12).unwrap();
        let basis: Vec<CMat> = pairs
            .iter()
            .map(|(lam, v)| {
                let s = v.scale(lam.sqrt());
                CMat::from_fn(2, 2, |i, j| s[i * 2 + j])
            })
            .collect();
        let v = sampling::random_isometry(&mut rng, 8, 4);
        let grad = roof_gradient(&basis, &v);
        let h = 1e-6;
        for (i, j) in [(0, 0), (3, 2), (7, 1)] {
            // real part
            let mut vp = v.clone();
            vp[(i, j)] += cr(h);
            let mut vm = v.clone();
            vm[(i, j)] -= cr(h);
            let fd_re = (roof_objective(&basis, &vp) - roof_objective(&basis, &vm)) / (2.0 * h);
            // imaginary part
            let mut vp = v.clone();
            vp[(i, j)] += C64::i() * h;
            let mut vm = v.clone();
            vm[(i, j)] -= C64::i() * h;
            let fd_im = (roof_objective(&basis, &vp) - roof_objective(&basis, &vm)) / (2.0 * h);
            // Wirtinger: df/dRe = 2·Re(∂f/∂V̄), df/dIm = 2·Im(∂f/∂V̄)
            assert!((fd_re - 2.0 * grad[(i, j)].re).abs() < 1e-5, "re ({i},{j})");
            assert!((fd_im - 2.0 * grad[(i, j)].im).abs() < 1e-5, "im ({i},{j})");
        }
    }
}
