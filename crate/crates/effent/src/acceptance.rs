//! Self-test suite: ten numbered checks covering the closed forms, dualities,
//! bounds and property guarantees the crate is built around. Run via
//! `effent selftest` or the `acceptance` integration test.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bec::{
    g_factor, g_factor_quadrature, simulate_bec_exact, ssr_lifting_channel, bec_limit_unitary,
    BecParams, PhaseDistribution,
};
use crate::channels::{adjoint_apply, amplitude_damping, apply, identity_channel, phase_damping};
use crate::effective::{effective_state, quality_factor, wiseman_vaccaro, BlockMeasure};
use crate::entanglement::{
    concurrence_wootters, g_concurrence_mixed, g_concurrence_pure, RoofOpts,
};
use crate::games::{
    bell_statistics_game, maximize_payoff, payoff, restricted_payoff, GameSpec, SeesawOpts,
};
use crate::qcore::{cr, identity, max_entangled, trace_distance, DensityMatrix, PureState};
use crate::sampling;
use crate::Result;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    fn new(id: usize, name: &'static str, passed: bool, detail: String) -> Self {
        Self { id, name, passed, detail }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:2} [{}] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Runs all ten criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ]
}

fn report_err(id: usize, name: &'static str, e: crate::Error) -> CriterionReport {
    CriterionReport::new(id, name, false, format!("errored: {e}"))
}

/// 1. Quality-factor closed forms: Q(amplitude_damping(γ)) = √(1−γ) and
/// Q(phase_damping(λ)) = √(1−λ) on the grid {0, 0.1, ..., 1}, within 1e−9.
pub fn criterion_1() -> CriterionReport {
    const NAME: &str = "quality-factor closed forms";
    let inner = || -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            let expect = (1.0 - x).sqrt();
            let q_ad = quality_factor(&amplitude_damping(x)?, 2)?;
            let q_pd = quality_factor(&phase_damping(x)?, 2)?;
            worst = worst.max((q_ad - expect).abs()).max((q_pd - expect).abs());
        }
        Ok(worst)
    };
    match inner() {
        Ok(worst) => CriterionReport::new(
            1,
            NAME,
            worst < 1e-9,
            format!("max |Q − √(1−x)| = {worst:.2e} (tol 1e-9)"),
        ),
        Err(e) => report_err(1, NAME, e),
    }
}

/// 2. Heisenberg duality: |Tr($†[P]ρ) − Tr(P$[ρ])| < 1e−12 on 1000 random
/// (channel, POVM element, state) triples at dimensions 2–4.
pub fn criterion_2() -> CriterionReport {
    const NAME: &str = "Heisenberg duality";
    let inner = || -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for trial in 0..1000 {
            let d = 2 + trial % 3;
            let ch = sampling::random_cptp_channel(&mut rng, d, 2 + trial % 2);
            let povm = sampling::random_povm(&mut rng, &[d], 3);
            let p = &povm.elements()[trial % 3];
            let rho = sampling::random_density(&mut rng, d);
            let lhs = (adjoint_apply(&ch, p)? * rho.matrix()).trace().re;
            let rhs = (p * apply(&ch, &rho)?.matrix()).trace().re;
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    };
    match inner() {
        Ok(worst) => CriterionReport::new(
            2,
            NAME,
            worst < 1e-12,
            format!("max duality defect = {worst:.2e} over 1000 triples (tol 1e-12)"),
        ),
        Err(e) => report_err(2, NAME, e),
    }
}

/// 3. Convex-roof oracle agreement: on 100 random two-qubit mixed states the
/// roof optimizer lands in [Wootters − 1e−9, Wootters + 1e−3].
pub fn criterion_3() -> CriterionReport {
    const NAME: &str = "convex roof vs Wootters";
    let inner = || -> Result<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = RoofOpts::default();
        let (mut worst_low, mut worst_high) = (0.0f64, 0.0f64);
        for trial in 0..100 {
            let rho = sampling::random_density_rank(&mut rng, 4, 1 + trial % 4)
                .reshaped(vec![2, 2])?;
            let wootters = concurrence_wootters(&rho)?;
            let roof = g_concurrence_mixed(&rho, 2, 2, &opts)?.value;
            worst_low = worst_low.max(wootters - roof);
            worst_high = worst_high.max(roof - wootters);
        }
        Ok((worst_low, worst_high))
    };
    match inner() {
        Ok((low, high)) => CriterionReport::new(
            3,
            NAME,
            low < 1e-9 && high < 1e-3,
            format!("roof−Wootters ∈ [−{low:.2e}, +{high:.2e}] over 100 states (tol −1e-9 / +1e-3)"),
        ),
        Err(e) => report_err(3, NAME, e),
    }
}

/// 4. One-sided pure-state exactness: |C(ρ̄) − Q·C(ψ)| < 1e−9 for 50 random
/// pure two-qubit states under random one-sided channels.
pub fn criterion_4() -> CriterionReport {
    const NAME: &str = "one-sided pure-state exactness";
    let inner = || -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let id = identity_channel(2);
        let mut worst = 0.0f64;
        for trial in 0..50 {
            let psi = sampling::random_pure(&mut rng, &[2, 2]);
            let ch = sampling::random_cptp_channel(&mut rng, 2, 1 + trial % 4);
            let q = quality_factor(&ch, 2)?;
            let eff = effective_state(&psi.density(), &ch, &id)?;
            let lhs = concurrence_wootters(&eff)?;
            let rhs = q * concurrence_wootters(&psi.density())?;
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    };
    match inner() {
        Ok(worst) => CriterionReport::new(
            4,
            NAME,
            worst < 1e-9,
            format!("max |C(ρ̄) − Q·C(ψ)| = {worst:.2e} over 50 states (tol 1e-9)"),
        ),
        Err(e) => report_err(4, NAME, e),
    }
}

/// 5. Two-sided upper bound: G_roof(ρ̄) ≤ Q(chA)Q(chB)G(ψ) + 2e−3 on 50
/// random (pure ψ, chA, chB) triples.
pub fn criterion_5() -> CriterionReport {
    const NAME: &str = "two-sided upper bound";
    let inner = || -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let opts = RoofOpts::default();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..50 {
            let psi = sampling::random_pure(&mut rng, &[2, 2]);
            let ch_a = sampling::random_cptp_channel(&mut rng, 2, 2);
            let ch_b = sampling::random_cptp_channel(&mut rng, 2, 2);
            let eff = effective_state(&psi.density(), &ch_a, &ch_b)?;
            let roof = g_concurrence_mixed(&eff, 2, 2, &opts)?.value;
            let bound = quality_factor(&ch_a, 2)?
                * quality_factor(&ch_b, 2)?
                * g_concurrence_pure(&psi, 2, 2)?;
            worst = worst.max(roof - bound);
        }
        Ok(worst)
    };
    match inner() {
        Ok(worst) => CriterionReport::new(
            5,
            NAME,
            worst < 2e-3,
            format!("max G(ρ̄) − Q·Q·G(ψ) = {worst:.2e} over 50 triples (tol 2e-3)"),
        ),
        Err(e) => report_err(5, NAME, e),
    }
}

/// 6. BEC g-factors: closed form vs 2048-point quadrature within 1e−8 for
/// wrapped normals σ ∈ {0.1, 0.5, 1, 2}; uniform and the antipodal delta
/// mixture give |g| < 1e−14.
pub fn criterion_6() -> CriterionReport {
    const NAME: &str = "BEC g-factors";
    let inner = || -> Result<(f64, f64)> {
        let mut worst = 0.0f64;
        for sigma in [0.1, 0.5, 1.0, 2.0] {
            let dist = PhaseDistribution::WrappedNormal { mu: 0.0, sigma };
            let diff = (g_factor(&dist)? - g_factor_quadrature(&dist, 2048)?).norm();
            worst = worst.max(diff);
        }
        let mut residual = g_factor(&PhaseDistribution::Uniform)?.norm();
        let antipodal = PhaseDistribution::DeltaMixture {
            peaks: vec![(0.3, 0.5), (0.3 + std::f64::consts::PI, 0.5)],
        };
        residual = residual.max(g_factor(&antipodal)?.norm());
        Ok((worst, residual))
    };
    match inner() {
        Ok((worst, residual)) => CriterionReport::new(
            6,
            NAME,
            worst < 1e-8 && residual < 1e-14,
            format!(
                "max closed-form vs quadrature = {worst:.2e} (tol 1e-8); \
                 symmetric |g| = {residual:.2e} (tol 1e-14)"
            ),
        ),
        Err(e) => report_err(6, NAME, e),
    }
}

/// 7. SSR-lifting channel quality: Q($) = |g| within 1e−6 across 20
/// (distribution, θ) pairs, and θ-independence within 1e−9.
pub fn criterion_7() -> CriterionReport {
    const NAME: &str = "SSR-lifting channel quality";
    let inner = || -> Result<(f64, f64)> {
        let dists = [
            PhaseDistribution::Delta { phi0: 0.4 },
            PhaseDistribution::Uniform,
            PhaseDistribution::WrappedNormal { mu: 0.0, sigma: 0.5 },
            PhaseDistribution::WrappedNormal { mu: 1.0, sigma: 1.5 },
            PhaseDistribution::DoubleRect { w: 0.6, delta: 0.4 },
        ];
        let thetas = [0.0, 0.7, 1.5, 2.9];
        let mut worst = 0.0f64;
        let mut worst_theta = 0.0f64;
        for dist in &dists {
            let g = g_factor(dist)?.norm();
            let mut q_first = None;
            for &theta in &thetas {
                let q = quality_factor(&ssr_lifting_channel(dist, theta, false)?, 2)?;
                worst = worst.max((q - g).abs());
                match q_first {
                    None => q_first = Some(q),
                    Some(q0) => worst_theta = worst_theta.max((q - q0).abs()),
                }
            }
        }
        Ok((worst, worst_theta))
    };
    match inner() {
        Ok((worst, worst_theta)) => CriterionReport::new(
            7,
            NAME,
            worst < 1e-6 && worst_theta < 1e-9,
            format!(
                "max |Q − |g|| = {worst:.2e} over 20 pairs (tol 1e-6); \
                 θ-dependence = {worst_theta:.2e} (tol 1e-9)"
            ),
        ),
        Err(e) => report_err(7, NAME, e),
    }
}

/// 8. Exact-Fock convergence: trace distance between the exact simulation
/// and the limit unitary < 1e−2 at α² = 100, θ = π/4, φ = 0, and monotone
/// decreasing over α² ∈ {25, 100, 400}.
pub fn criterion_8() -> CriterionReport {
    const NAME: &str = "exact-Fock convergence";
    let inner = || -> Result<(f64, bool)> {
        let theta = std::f64::consts::FRAC_PI_4;
        let phi = 0.0;
        let input = PureState::from_amplitudes(&[cr(1.0), cr(0.0)], vec![2])?.density();
        let u = bec_limit_unitary(theta, phi);
        let target =
            DensityMatrix::new_unchecked(&u * input.matrix() * u.adjoint(), vec![2]);
        let mut distances = Vec::new();
        for (alpha_sq, trunc) in [(25.0, 80), (100.0, 170), (400.0, 540)] {
            let params = BecParams::new(alpha_sq, theta)?;
            let out = simulate_bec_exact(&params, phi, trunc, &input)?;
            distances.push(trace_distance(&out.state, &target)?);
        }
        let monotone = distances.windows(2).all(|w| w[1] < w[0]);
        Ok((distances[1], monotone))
    };
    match inner() {
        Ok((d100, monotone)) => CriterionReport::new(
            8,
            NAME,
            d100 < 1e-2 && monotone,
            format!(
                "distance at α²=100: {d100:.2e} (tol 1e-2); monotone over {{25,100,400}}: {monotone}"
            ),
        ),
        Err(e) => report_err(8, NAME, e),
    }
}

/// 9. Strict SSR single-particle entanglement: the Wiseman–Vaccaro measure of
/// |Ψ⁺⟩ vanishes exactly, and the effective concurrence under the lifting
/// channel equals |g| within 1e−6 across the σ-grid.
pub fn criterion_9() -> CriterionReport {
    const NAME: &str = "strict SSR single-particle entanglement";
    let inner = || -> Result<(f64, f64)> {
        let s = 1.0 / 2f64.sqrt();
        let psi = PureState::from_amplitudes(
            &[cr(0.0), cr(s), cr(s), cr(0.0)],
            vec![2, 2],
        )?
        .density();
        let blocks = [vec![0], vec![1]];
        let wv = wiseman_vaccaro(&psi, &blocks, &blocks, BlockMeasure::Auto, &RoofOpts::default())?;
        let id = identity_channel(2);
        let mut worst = 0.0f64;
        for sigma in [0.1, 0.5, 1.0, 2.0] {
            let dist = PhaseDistribution::WrappedNormal { mu: 0.0, sigma };
            let ch = ssr_lifting_channel(&dist, 0.9, false)?;
            let conc = concurrence_wootters(&effective_state(&psi, &ch, &id)?)?;
            worst = worst.max((conc - g_factor(&dist)?.norm()).abs());
        }
        Ok((wv.value, worst))
    };
    match inner() {
        Ok((wv, worst)) => CriterionReport::new(
            9,
            NAME,
            wv == 0.0 && worst < 1e-6,
            format!(
                "Wiseman–Vaccaro(|Ψ⁺⟩) = {wv:e} (must be 0); \
                 max |C(ρ̄) − |g|| = {worst:.2e} over σ-grid (tol 1e-6)"
            ),
        ),
        Err(e) => report_err(9, NAME, e),
    }
}

/// 10. Game payoff properties: constant games return the constant within
/// 1e−12; seesaw value traces are monotone non-decreasing; the shipped
/// Bell-statistics game separates |φ₂⟩ from I/4 with the fixed seed; and
/// restricted play under one-sided phase_damping(1) equals direct play on the
/// dephased state within 1e−6.
pub fn criterion_10() -> CriterionReport {
    const NAME: &str = "game payoff properties";
    let inner = || -> Result<(f64, bool, f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(10);

        // constant payoff with random POVMs
        let c_value = 1.75;
        let zeta: Vec<_> = (0..2).map(|_| sampling::random_density(&mut rng, 2)).collect();
        let eta = zeta.clone();
        let constant = GameSpec::new_flat(
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            zeta,
            eta,
            2,
            2,
            vec![c_value; 16],
        )?;
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2])?;
        let alice = sampling::random_povm(&mut rng, &[4], 2);
        let bob = sampling::random_povm(&mut rng, &[4], 2);
        let const_err = (payoff(&constant, &rho, &alice, &bob)? - c_value).abs();

        // monotone seesaw trace + Bell-statistics gap, fixed seed
        let game = bell_statistics_game();
        let opts = SeesawOpts { restarts: 3, seesaw_rounds: 15, ..SeesawOpts::default() };
        let phi2 = max_entangled(2)?.density();
        let mixed = DensityMatrix::new_unchecked(identity(4).unscale(4.0), vec![2, 2]);
        let run_phi = maximize_payoff(&game, &phi2, &opts)?;
        let run_mixed = maximize_payoff(&game, &mixed, &opts)?;
        let monotone = [&run_phi, &run_mixed].iter().all(|r| {
            r.value_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12)
        });
        let gap = run_phi.value - run_mixed.value;

        // restricted play under one-sided full phase damping
        let pd = phase_damping(1.0)?;
        let id = identity_channel(2);
        let restricted = restricted_payoff(&game, &phi2, &pd, &id, &opts, true)?;
        let dephased = effective_state(&phi2, &pd, &id)?;
        let direct = maximize_payoff(&game, &dephased, &opts)?;
        let pd_err = (restricted.value - direct.value).abs();

        Ok((const_err, monotone, gap, pd_err))
    };
    match inner() {
        Ok((const_err, monotone, gap, pd_err)) => CriterionReport::new(
            10,
            NAME,
            const_err < 1e-12 && monotone && gap > 0.0 && pd_err < 1e-6,
            format!(
                "constant-game error {const_err:.2e} (tol 1e-12); monotone {monotone}; \
                 Bell gap {gap:.4} (> 0); phase-damping agreement {pd_err:.2e} (tol 1e-6)"
            ),
        ),
        Err(e) => report_err(10, NAME, e),
    }
}
