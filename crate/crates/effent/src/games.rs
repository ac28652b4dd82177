//! Semiquantum nonlocal games: payoff evaluation, effective-POVM reduction,
//! seesaw payoff maximization, and restricted-measurement payoff via CPMs.
//!
//! The composite space is always ordered (question_A, ρ_A, ρ_B, question_B).
//! Alice's POVM acts on the first two factors, Bob's on the last two. This
//! ordering is a convention of this crate, not a mathematical necessity, and
//! every operation states it explicitly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{adjoint_apply, identity_channel, tensor_channels, KrausChannel, PovmSet};
use crate::effective::effective_state;
use crate::qcore::{
    cr, eig_hermitian, identity, max_entangled, partial_trace_mat, tensor, C64, CMat,
    DensityMatrix,
};
use crate::sampling;
use crate::{Error, Result};

/// A semiquantum nonlocal game: question priors p(s), q(t), question states
/// ζˢ, ηᵗ, outcome counts, and the payoff tensor 𝔭(s,t,x,y).
#[derive(Debug, Clone)]
pub struct GameSpec {
    p: Vec<f64>,
    q: Vec<f64>,
    zeta: Vec<DensityMatrix>,
    eta: Vec<DensityMatrix>,
    n_x: usize,
    n_y: usize,
    /// Flattened s-major: index ((s·n_t + t)·n_x + x)·n_y + y.
    payoff: Vec<f64>,
}

impl GameSpec {
    pub fn new(
        p: Vec<f64>,
        q: Vec<f64>,
        zeta: Vec<DensityMatrix>,
        eta: Vec<DensityMatrix>,
        payoff_nested: &[Vec<Vec<Vec<f64>>>],
    ) -> Result<Self> {
        let (n_s, n_t) = (p.len(), q.len());
        if payoff_nested.len() != n_s {
            return Err(Error::InvalidArgument(format!(
                "payoff tensor has {} s-slices, expected {n_s}",
                payoff_nested.len()
            )));
        }
        let n_x = payoff_nested
            .first()
            .and_then(|t| t.first())
            .map(|x| x.len())
            .ok_or_else(|| Error::InvalidArgument("empty payoff tensor".into()))?;
        let n_y = payoff_nested[0][0]
            .first()
            .map(|y| y.len())
            .ok_or_else(|| Error::InvalidArgument("empty payoff tensor".into()))?;
        let mut flat = Vec::with_capacity(n_s * n_t * n_x * n_y);
        for slice_t in payoff_nested {
            if slice_t.len() != n_t {
                return Err(Error::InvalidArgument("ragged payoff tensor".into()));
            }
            for slice_x in slice_t {
                if slice_x.len() != n_x {
                    return Err(Error::InvalidArgument("ragged payoff tensor".into()));
                }
                for slice_y in slice_x {
                    if slice_y.len() != n_y {
                        return Err(Error::InvalidArgument("ragged payoff tensor".into()));
                    }
                    flat.extend_from_slice(slice_y);
                }
            }
        }
        Self::new_flat(p, q, zeta, eta, n_x, n_y, flat)
    }

    pub fn new_flat(
        p: Vec<f64>,
        q: Vec<f64>,
        zeta: Vec<DensityMatrix>,
        eta: Vec<DensityMatrix>,
        n_x: usize,
        n_y: usize,
        payoff: Vec<f64>,
    ) -> Result<Self> {
        check_prior(&p, "p")?;
        check_prior(&q, "q")?;
        if zeta.len() != p.len() || eta.len() != q.len() {
            return Err(Error::InvalidArgument(format!(
                "{} Alice / {} Bob question states for {} / {} priors",
                zeta.len(),
                eta.len(),
                p.len(),
                q.len()
            )));
        }
        check_uniform_dim(&zeta, "zeta")?;
        check_uniform_dim(&eta, "eta")?;
        if n_x == 0 || n_y == 0 {
            return Err(Error::InvalidArgument("need at least one outcome per party".into()));
        }
        if payoff.len() != p.len() * q.len() * n_x * n_y {
            return Err(Error::InvalidArgument(format!(
                "payoff tensor has {} entries, expected {}",
                payoff.len(),
                p.len() * q.len() * n_x * n_y
            )));
        }
        if payoff.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("payoff tensor has non-finite entries".into()));
        }
        Ok(Self { p, q, zeta, eta, n_x, n_y, payoff })
    }

    pub fn n_s(&self) -> usize {
        self.p.len()
    }

    pub fn n_t(&self) -> usize {
        self.q.len()
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn zeta(&self) -> &[DensityMatrix] {
        &self.zeta
    }

    pub fn eta(&self) -> &[DensityMatrix] {
        &self.eta
    }

    /// Alice question dimension dζ.
    pub fn d_zeta(&self) -> usize {
        self.zeta[0].dim()
    }

    /// Bob question dimension dη.
    pub fn d_eta(&self) -> usize {
        self.eta[0].dim()
    }

    pub fn payoff_at(&self, s: usize, t: usize, x: usize, y: usize) -> f64 {
        self.payoff[((s * self.n_t() + t) * self.n_x + x) * self.n_y + y]
    }

    pub fn payoff_flat(&self) -> &[f64] {
        &self.payoff
    }
}

fn check_prior(p: &[f64], name: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidArgument(format!("prior {name} is empty")));
    }
    if p.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("prior {name} has negative entries")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "prior {name} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn check_uniform_dim(states: &[DensityMatrix], name: &str) -> Result<()> {
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::DimMismatch(format!(
            "question states {name} have mixed dimensions"
        )));
    }
    Ok(())
}

/// Tr[AB] without forming the product.
fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Effective POVM on sys2 induced by a joint POVM on sys1⊗sys2 when sys1 is
/// fed the fixed state ρ₁: E_k = Tr₁[P_k(ρ₁ ⊗ I)]. Outcome probabilities
/// against any ρ₂ equal the joint probabilities against ρ₁⊗ρ₂.
pub fn effective_povm(joint: &PovmSet, rho1: &DensityMatrix) -> Result<PovmSet> {
    if joint.space_dims().len() != 2 {
        return Err(Error::DimMismatch(format!(
            "effective_povm expects a POVM on two factors, got dims {:?}",
            joint.space_dims()
        )));
    }
    let (d1, d2) = (joint.space_dims()[0], joint.space_dims()[1]);
    if rho1.dim() != d1 {
        return Err(Error::DimMismatch(format!(
            "ρ₁ has dimension {}, POVM factor 1 has {d1}",
            rho1.dim()
        )));
    }
    let pad = tensor(rho1.matrix(), &identity(d2));
    let elements = joint
        .elements()
        .iter()
        .map(|pk| {
            let prod = pk * &pad;
            let e = partial_trace_mat(&prod, &[d1, d2], &[1])?;
            // symmetrize away the ~1e-16 anti-Hermitian residue of the product
            Ok((&e + e.adjoint()).unscale(2.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PovmSet::new_unchecked(elements, vec![d2]))
}

/// Effective element on factor 1 when factor 2 is fed a fixed state:
/// F_k = Tr₂[P_k(I ⊗ ρ₂)].
fn effective_element_first(pk: &CMat, d1: usize, d2: usize, rho2: &CMat) -> Result<CMat> {
    let prod = pk * tensor(&identity(d1), rho2);
    let f = partial_trace_mat(&prod, &[d1, d2], &[0])?;
    Ok((&f + f.adjoint()).unscale(2.0))
}

fn effective_element_second(pk: &CMat, d1: usize, d2: usize, rho1: &CMat) -> Result<CMat> {
    let prod = pk * tensor(rho1, &identity(d2));
    let e = partial_trace_mat(&prod, &[d1, d2], &[1])?;
    Ok((&e + e.adjoint()).unscale(2.0))
}

/// Dimension bookkeeping shared by payoff and seesaw.
struct GameDims {
    d_zeta: usize,
    d_a: usize,
    d_b: usize,
    d_eta: usize,
}

fn check_spaces(
    game: &GameSpec,
    rho: &DensityMatrix,
    d_alice: usize,
    d_bob: usize,
) -> Result<GameDims> {
    if rho.dims().len() != 2 {
        return Err(Error::DimMismatch(format!(
            "resource state must be bipartite, got dims {:?}",
            rho.dims()
        )));
    }
    let dims = GameDims {
        d_zeta: game.d_zeta(),
        d_a: rho.dims()[0],
        d_b: rho.dims()[1],
        d_eta: game.d_eta(),
    };
    if d_alice != dims.d_zeta * dims.d_a {
        return Err(Error::DimMismatch(format!(
            "Alice POVM lives on dimension {d_alice}, expected dζ·dA = {}",
            dims.d_zeta * dims.d_a
        )));
    }
    if d_bob != dims.d_b * dims.d_eta {
        return Err(Error::DimMismatch(format!(
            "Bob POVM lives on dimension {d_bob}, expected dB·dη = {}",
            dims.d_b * dims.d_eta
        )));
    }
    Ok(dims)
}

/// Alice-side reduced POVM elements F_{s,x} = Tr_ζ[P^A_x(ζˢ ⊗ I)], indexed
/// s-major. Tr[(F_{s,x} ⊗ E_{t,y})ρ] reproduces the four-factor trace.
fn alice_reductions(game: &GameSpec, alice: &PovmSet, d: &GameDims) -> Result<Vec<CMat>> {
    let mut out = Vec::with_capacity(game.n_s() * game.n_x());
    for zeta in game.zeta() {
        for px in alice.elements() {
            out.push(effective_element_second(px, d.d_zeta, d.d_a, zeta.matrix())?);
        }
    }
    Ok(out)
}

/// Bob-side reduced POVM elements E_{t,y} = Tr_η[P^B_y(I ⊗ ηᵗ)], t-major.
fn bob_reductions(game: &GameSpec, bob: &PovmSet, d: &GameDims) -> Result<Vec<CMat>> {
    let mut out = Vec::with_capacity(game.n_t() * game.n_y());
    for eta in game.eta() {
        for py in bob.elements() {
            out.push(effective_element_first(py, d.d_b, d.d_eta, eta.matrix())?);
        }
    }
    Ok(out)
}

/// Average payoff ℘ = Σ p(s)q(t)𝔭(s,t,x,y)μ(x,y|s,t) with
/// μ(x,y|s,t) = Tr[(P^A_x ⊗ P^B_y)(ζˢ ⊗ ρ ⊗ ηᵗ)] on the composite space
/// ordered (question_A, ρ_A, ρ_B, question_B).
///
/// Evaluated by reducing each party's POVM against its question state, which
/// is algebraically identical to the four-factor trace but never builds the
/// composite space.
pub fn payoff(
    game: &GameSpec,
    rho: &DensityMatrix,
    alice: &PovmSet,
    bob: &PovmSet,
) -> Result<f64> {
    if alice.len() != game.n_x() || bob.len() != game.n_y() {
        return Err(Error::DimMismatch(format!(
            "POVMs have {}/{} outcomes, game declares {}/{}",
            alice.len(),
            bob.len(),
            game.n_x(),
            game.n_y()
        )));
    }
    let dims = check_spaces(game, rho, alice.dim(), bob.dim())?;
    let f = alice_reductions(game, alice, &dims)?;
    let e = bob_reductions(game, bob, &dims)?;
    let mut total = 0.0;
    for s in 0..game.n_s() {
        for t in 0..game.n_t() {
            let w = game.p()[s] * game.q()[t];
            if w == 0.0 {
                continue;
            }
            for x in 0..game.n_x() {
                let fsx = &f[s * game.n_x() + x];
                for y in 0..game.n_y() {
                    let ety = &e[t * game.n_y() + y];
                    let mu = trace_product(&tensor(fsx, ety), rho.matrix()).re;
                    total += w * game.payoff_at(s, t, x, y) * mu;
                }
            }
        }
    }
    Ok(total)
}

/// Options for the seesaw payoff maximization.
#[derive(Debug, Clone)]
pub struct SeesawOpts {
    pub seesaw_rounds: usize,
    pub inner_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SeesawOpts {
    fn default() -> Self {
        Self {
            seesaw_rounds: 30,
            inner_iters: 40,
            restarts: 6,
            seed: 0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// A lower bound on the optimal payoff ℘*(ρ).
    pub value: f64,
    pub alice: PovmSet,
    pub bob: PovmSet,
    /// Seesaw rounds actually performed by the winning restart.
    pub rounds: usize,
    pub restarts_used: usize,
    /// Value after each round of the winning restart; non-decreasing.
    pub value_trace: Vec<f64>,
}

/// Seesaw maximization of the payoff over both parties' POVMs.
///
/// Alternates fixed-point updates of one party's POVM with the other held
/// fixed (the payoff is linear in each party separately). The result is a
/// lower bound on the optimum, not a certificate. Deterministic under a fixed
/// seed; restart 0 starts from the identity-split POVM, later restarts from
/// random projective seeds. Ties across restarts break toward the lower index.
pub fn maximize_payoff(
    game: &GameSpec,
    rho: &DensityMatrix,
    opts: &SeesawOpts,
) -> Result<SeesawResult> {
    let d_alice = game.d_zeta() * rho.dims().first().copied().unwrap_or(0);
    let d_bob = rho.dims().get(1).copied().unwrap_or(0) * game.d_eta();
    let dims = check_spaces(game, rho, d_alice, d_bob)?;
    let restarts = opts.restarts.max(1);

    let mut best: Option<SeesawResult> = None;
    for r in 0..restarts {
        let (alice0, bob0) = initial_povms(game, &dims, opts.seed, r);
        let run = seesaw_run(game, rho, &dims, alice0, bob0, opts)?;
        let better = match &best {
            None => true,
            Some(b) => run.value > b.value, // ties keep the earlier restart
        };
        if better {
            best = Some(run);
        }
    }
    let mut result = best.expect("at least one restart");
    result.restarts_used = restarts;
    Ok(result)
}

fn initial_povms(game: &GameSpec, dims: &GameDims, seed: u64, restart: usize) -> (PovmSet, PovmSet) {
    let d_alice = dims.d_zeta * dims.d_a;
    let d_bob = dims.d_b * dims.d_eta;
    if restart == 0 {
        // identity-split POVM: P_x = I/n
        let split = |d: usize, n: usize| {
            let el = identity(d).unscale(n as f64);
            PovmSet::new_unchecked(vec![el; n], vec![d])
        };
        return (split(d_alice, game.n_x()), split(d_bob, game.n_y()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((restart as u64) << 32));
    (
        projective_seed(&mut rng, d_alice, game.n_x()),
        projective_seed(&mut rng, d_bob, game.n_y()),
    )
}

/// Haar-random projective seed: basis projectors of a random unitary grouped
/// round-robin into n outcomes. Falls back to a symmetrized random POVM when
/// there are more outcomes than dimensions.
fn projective_seed(rng: &mut ChaCha8Rng, d: usize, n: usize) -> PovmSet {
    if n > d {
        return sampling::random_povm(rng, &[d], n);
    }
    let u = sampling::random_unitary(rng, d);
    let mut elements = vec![CMat::zeros(d, d); n];
    for k in 0..d {
        let col = u.column(k);
        let proj = CMat::from_fn(d, d, |i, j| col[i] * col[j].conj());
        elements[k % n] += proj;
    }
    PovmSet::new_unchecked(elements, vec![d])
}

fn seesaw_run(
    game: &GameSpec,
    rho: &DensityMatrix,
    dims: &GameDims,
    mut alice: PovmSet,
    mut bob: PovmSet,
    opts: &SeesawOpts,
) -> Result<SeesawResult> {
    let mut value = payoff(game, rho, &alice, &bob)?;
    let mut trace = Vec::with_capacity(opts.seesaw_rounds);
    let mut rounds = 0;
    for _ in 0..opts.seesaw_rounds {
        rounds += 1;
        let coeffs = alice_coefficients(game, rho, dims, &bob)?;
        let (a_new, v_a) = linear_povm_max(&coeffs, &alice, value, opts.inner_iters, opts.tol);
        alice = a_new;
        value = v_a;
        let coeffs = bob_coefficients(game, rho, dims, &alice)?;
        let (b_new, v_b) = linear_povm_max(&coeffs, &bob, value, opts.inner_iters, opts.tol);
        bob = b_new;
        let improved = v_b - trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        value = v_b;
        trace.push(value);
        if improved.abs() < opts.tol && rounds > 1 {
            break;
        }
    }
    Ok(SeesawResult {
        value,
        alice,
        bob,
        rounds,
        restarts_used: 1,
        value_trace: trace,
    })
}

/// Coefficient operators R_x on Alice's (question_A, ρ_A) space with Bob
/// fixed: ℘ = Σ_x Tr[P^A_x R_x].
fn alice_coefficients(
    game: &GameSpec,
    rho: &DensityMatrix,
    dims: &GameDims,
    bob: &PovmSet,
) -> Result<Vec<CMat>> {
    let e = bob_reductions(game, bob, dims)?;
    // N_{t,y} = Tr_B[(I ⊗ E_{t,y})ρ] on ρ_A
    let mut n_ops = Vec::with_capacity(game.n_t() * game.n_y());
    for ety in &e {
        let prod = tensor(&identity(dims.d_a), ety) * rho.matrix();
        let n = partial_trace_mat(&prod, &[dims.d_a, dims.d_b], &[0])?;
        n_ops.push((&n + n.adjoint()).unscale(2.0));
    }
    let d_alice = dims.d_zeta * dims.d_a;
    let mut out = vec![CMat::zeros(d_alice, d_alice); game.n_x()];
    for s in 0..game.n_s() {
        for t in 0..game.n_t() {
            let w = game.p()[s] * game.q()[t];
            if w == 0.0 {
                continue;
            }
            for y in 0..game.n_y() {
                let block = tensor(game.zeta()[s].matrix(), &n_ops[t * game.n_y() + y]);
                for x in 0..game.n_x() {
                    let c = w * game.payoff_at(s, t, x, y);
                    if c != 0.0 {
                        out[x] += block.scale(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Coefficient operators S_y on Bob's (ρ_B, question_B) space with Alice
/// fixed: ℘ = Σ_y Tr[P^B_y S_y].
fn bob_coefficients(
    game: &GameSpec,
    rho: &DensityMatrix,
    dims: &GameDims,
    alice: &PovmSet,
) -> Result<Vec<CMat>> {
    let f = alice_reductions(game, alice, dims)?;
    // M_{s,x} = Tr_A[(F_{s,x} ⊗ I)ρ] on ρ_B
    let mut m_ops = Vec::with_capacity(game.n_s() * game.n_x());
    for fsx in &f {
        let prod = tensor(fsx, &identity(dims.d_b)) * rho.matrix();
        let m = partial_trace_mat(&prod, &[dims.d_a, dims.d_b], &[1])?;
        m_ops.push((&m + m.adjoint()).unscale(2.0));
    }
    let d_bob = dims.d_b * dims.d_eta;
    let mut out = vec![CMat::zeros(d_bob, d_bob); game.n_y()];
    for s in 0..game.n_s() {
        for t in 0..game.n_t() {
            let w = game.p()[s] * game.q()[t];
            if w == 0.0 {
                continue;
            }
            for x in 0..game.n_x() {
                let block = tensor(&m_ops[s * game.n_x() + x], game.eta()[t].matrix());
                for y in 0..game.n_y() {
                    let c = w * game.payoff_at(s, t, x, y);
                    if c != 0.0 {
                        out[y] += block.scale(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Maximizes Σ_k Tr[P_k R_k] over POVMs {P_k} by the fixed-point iteration
/// P_k ← S^{-1/2} R'_k P_k R'_k S^{-1/2} with R'_k = R_k + shift·I kept PSD
/// and S the completeness normalizer. Reverts and stops on any decrease, so
/// the returned value never drops below the starting one.
fn linear_povm_max(
    coeffs: &[CMat],
    start: &PovmSet,
    start_value: f64,
    inner_iters: usize,
    tol: f64,
) -> (PovmSet, f64) {
    let d = start.dim();
    // PSD shift: the added constant shift·d cancels in the argmax
    let mut min_eig = 0.0f64;
    let mut max_abs = 0.0f64;
    for r in coeffs {
        if let Ok((vals, _)) = eig_hermitian(r, 1e-6) {
            if let Some(&lo) = vals.last() {
                min_eig = min_eig.min(lo);
            }
            if let Some(&hi) = vals.first() {
                max_abs = max_abs.max(hi.abs());
            }
        }
    }
    let shift = -min_eig + 1e-6 * max_abs.max(1.0);
    let shifted: Vec<CMat> = coeffs
        .iter()
        .map(|r| r + identity(d).scale(shift))
        .collect();

    let objective = |els: &[CMat]| -> f64 {
        els.iter()
            .zip(coeffs)
            .map(|(p, r)| trace_product(p, r).re)
            .sum()
    };

    let mut elements = start.elements().to_vec();
    let mut value = start_value;
    for _ in 0..inner_iters {
        let moved = pairwise_sweep(&mut elements, coeffs, tol);
        if moved {
            value = objective(&elements).max(value);
        }
        let cand: Vec<CMat> = elements
            .iter()
            .zip(&shifted)
            .map(|(p, r)| r * p * r)
            .collect();
        let mut sum = CMat::zeros(d, d);
        for m in &cand {
            sum += m;
        }
        let s_inv = sampling::inv_sqrt(&sum);
        let cand: Vec<CMat> = cand
            .iter()
            .map(|m| {
                let p = &s_inv * m * &s_inv;
                (&p + p.adjoint()).unscale(2.0)
            })
            .collect();
        // a near-singular normalizer can break completeness; reject that step
        let mut total = CMat::zeros(d, d);
        for m in &cand {
            total += m;
        }
        if crate::qcore::max_norm_diff(&total, &identity(d)) > 1e-8 {
            break;
        }
        let v = objective(&cand);
        if v < value - 1e-15 {
            break; // revert-on-decrease keeps the value sequence monotone
        }
        let gain = v - value;
        elements = cand;
        value = v;
        if gain < tol {
            break;
        }
    }
    (PovmSet::new_unchecked(elements, start.space_dims().to_vec()), value)
}

/// One sweep of exact pairwise exchanges: for each outcome pair (x, x') the
/// redistribution of T = P_x + P_x' that maximizes Tr[P_x R_x] + Tr[P_x' R_x']
/// is P_x = T^{1/2} Π₊ T^{1/2}, with Π₊ the positive-eigenspace projector of
/// T^{1/2}(R_x − R_x')T^{1/2} on the support of T. Every exchange is optimal
/// for its pair, so the objective never decreases. Returns whether any pair
/// moved by more than `tol`.
fn pairwise_sweep(elements: &mut [CMat], coeffs: &[CMat], tol: f64) -> bool {
    let n = elements.len();
    let mut moved = false;
    for x in 0..n {
        for xp in (x + 1)..n {
            let delta = &coeffs[x] - &coeffs[xp];
            let t = &elements[x] + &elements[xp];
            let Ok((tvals, tvecs)) = eig_hermitian(&t, 1e-8) else {
                continue;
            };
            // square root of T restricted to its support
            let support: Vec<usize> = (0..tvals.len()).filter(|&k| tvals[k] > 1e-12).collect();
            if support.is_empty() {
                continue;
            }
            let half = CMat::from_fn(t.nrows(), support.len(), |i, k| {
                tvecs[(i, support[k])] * cr(tvals[support[k]].sqrt())
            });
            let w = half.adjoint() * &delta * &half;
            let Ok((wvals, wvecs)) = eig_hermitian(&w, 1e-8) else {
                continue;
            };
            let r = support.len();
            let pi_pos = {
                let mut acc = CMat::zeros(r, r);
                for k in 0..r {
                    if wvals[k] > 0.0 {
                        let col = wvecs.column(k);
                        acc += CMat::from_fn(r, r, |i, j| col[i] * col[j].conj());
                    }
                }
                acc
            };
            let px_new = &half * pi_pos * half.adjoint();
            let px_new = (&px_new + px_new.adjoint()).unscale(2.0);
            let gain = trace_product(&(&px_new - &elements[x]), &delta).re;
            if gain > tol.max(1e-14) {
                elements[xp] = &t - &px_new;
                elements[x] = px_new;
                moved = true;
            }
        }
    }
    moved
}

/// Payoff under measurement restrictions modeled by local CPMs: unrestricted
/// play on the effective state ρ̄ = ($_A ⊗ $_B)[ρ] (the Heisenberg-picture
/// equivalence of restricting the POVMs themselves).
///
/// With `verify` set, one sampled POVM pair is re-evaluated through the
/// adjoint channels on the original state and the two payoffs are required to
/// agree within 1e-10.
pub fn restricted_payoff(
    game: &GameSpec,
    rho: &DensityMatrix,
    ch_a: &KrausChannel,
    ch_b: &KrausChannel,
    opts: &SeesawOpts,
    verify: bool,
) -> Result<SeesawResult> {
    if ch_a.d_in() != ch_a.d_out() || ch_b.d_in() != ch_b.d_out() {
        return Err(Error::DimMismatch(
            "restricted play needs square channels on the resource factors".into(),
        ));
    }
    let eff = effective_state(rho, ch_a, ch_b)?;
    let result = maximize_payoff(game, &eff, opts)?;
    if verify {
        verify_duality(game, rho, &eff, ch_a, ch_b, opts.seed)?;
    }
    Ok(result)
}

/// Checks ℘(ρ̄; P) = ℘(ρ; $†-pulled-back P) on one sampled POVM pair.
fn verify_duality(
    game: &GameSpec,
    rho: &DensityMatrix,
    eff: &DensityMatrix,
    ch_a: &KrausChannel,
    ch_b: &KrausChannel,
    seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed_d0a1));
    let d_alice = game.d_zeta() * ch_a.d_out();
    let d_bob = ch_b.d_out() * game.d_eta();
    let alice = sampling::random_povm(&mut rng, &[d_alice], game.n_x());
    let bob = sampling::random_povm(&mut rng, &[d_bob], game.n_y());
    let forward = payoff(game, eff, &alice, &bob)?;

    // pull the POVMs back through the channels (adjoint is unital, so the
    // pulled-back elements still form a POVM)
    let lift_a = tensor_channels(&identity_channel(game.d_zeta()), ch_a);
    let lift_b = tensor_channels(ch_b, &identity_channel(game.d_eta()));
    let pull = |ch: &KrausChannel, povm: &PovmSet| -> Result<PovmSet> {
        let els = povm
            .elements()
            .iter()
            .map(|p| adjoint_apply(ch, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PovmSet::new_unchecked(els, povm.space_dims().to_vec()))
    };
    let backward = payoff(game, rho, &pull(&lift_a, &alice)?, &pull(&lift_b, &bob)?)?;
    if (forward - backward).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "CPM duality check failed: {forward} vs {backward}"
        )));
    }
    Ok(())
}

/// Projectors onto the Bell basis of C²⊗C², ordered Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_povm() -> PovmSet {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let basis: [[f64; 4]; 4] = [
        [s, 0.0, 0.0, s],
        [s, 0.0, 0.0, -s],
        [0.0, s, s, 0.0],
        [0.0, s, -s, 0.0],
    ];
    let elements = basis
        .iter()
        .map(|v| CMat::from_fn(4, 4, |i, j| cr(v[i] * v[j])))
        .collect();
    PovmSet::new_unchecked(elements, vec![2, 2])
}

/// The shipped teleportation-style game at d = 2: both referees send one of
/// the four states {|0⟩, |1⟩, |+⟩, |+i⟩} uniformly, both players answer one
/// of four outcomes, and 𝔭(s,t,x,y) is the Bell-measurement statistic that
/// the maximally entangled state produces on those questions. Matching the
/// ideal statistics is rewarded, so value(|φ₂⟩⟨φ₂|) exceeds value(I/4).
pub fn bell_statistics_game() -> GameSpec {
    let questions = standard_questions();
    let phi = max_entangled(2)
        .expect("d=2 maximally entangled state")
        .density();
    let bell = bell_povm();
    let n = questions.len();
    let mut payoff_flat = vec![0.0; n * n * 4 * 4];
    for (s, zeta) in questions.iter().enumerate() {
        for (t, eta) in questions.iter().enumerate() {
            for x in 0..4 {
                for y in 0..4 {
                    // μ_ideal on the full (qA, ρA, ρB, qB) space
                    let joint = tensor(
                        &tensor(zeta.matrix(), phi.matrix()),
                        eta.matrix(),
                    );
                    let op = tensor(&bell.elements()[x], &bell.elements()[y]);
                    let mu = trace_product(&op, &joint).re;
                    payoff_flat[((s * n + t) * 4 + x) * 4 + y] = 4.0 * mu;
                }
            }
        }
    }
    let p = vec![1.0 / n as f64; n];
    GameSpec::new_flat(
        p.clone(),
        p,
        questions.clone(),
        questions,
        4,
        4,
        payoff_flat,
    )
    .expect("shipped game is valid")
}

/// The four single-qubit question states |0⟩, |1⟩, |+⟩, |+i⟩.
fn standard_questions() -> Vec<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let vecs = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(s, 0.0), C64::new(s, 0.0)],
        [C64::new(s, 0.0), C64::new(0.0, s)],
    ];
    vecs.iter()
        .map(|v| {
            DensityMatrix::new_unchecked(
                CMat::from_fn(2, 2, |i, j| v[i] * v[j].conj()),
                vec![2],
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::phase_damping;
    use crate::qcore::max_norm_diff;

    fn uniform_game(
        n_s: usize,
        n_t: usize,
        n_x: usize,
        n_y: usize,
        rng: &mut ChaCha8Rng,
    ) -> GameSpec {
        use rand::Rng;
        let zeta: Vec<_> = (0..n_s).map(|_| sampling::random_density(rng, 2)).collect();
        let eta: Vec<_> = (0..n_t).map(|_| sampling::random_density(rng, 2)).collect();
        let payoff: Vec<f64> = (0..n_s * n_t * n_x * n_y).map(|_| rng.gen::<f64>()).collect();
        GameSpec::new_flat(
            vec![1.0 / n_s as f64; n_s],
            vec![1.0 / n_t as f64; n_t],
            zeta,
            eta,
            n_x,
            n_y,
            payoff,
        )
        .unwrap()
    }

    fn random_setup(seed: u64) -> (GameSpec, DensityMatrix, PovmSet, PovmSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = uniform_game(2, 2, 2, 3, &mut rng);
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2]).unwrap();
        let alice = sampling::random_povm(&mut rng, &[4], 2);
        let bob = sampling::random_povm(&mut rng, &[4], 3);
        (game, rho, alice, bob)
    }

    /// Exhaustive four-factor oracle: μ via explicit kron on the
    /// (qA, ρA, ρB, qB) composite space.
    fn payoff_direct(game: &GameSpec, rho: &DensityMatrix, alice: &PovmSet, bob: &PovmSet) -> f64 {
        let mut total = 0.0;
        for s in 0..game.n_s() {
            for t in 0..game.n_t() {
                let w = game.p()[s] * game.q()[t];
                let state = tensor(
                    &tensor(game.zeta()[s].matrix(), rho.matrix()),
                    game.eta()[t].matrix(),
                );
                for x in 0..game.n_x() {
                    for y in 0..game.n_y() {
                        let op = tensor(&alice.elements()[x], &bob.elements()[y]);
                        let mu = trace_product(&op, &state).re;
                        total += w * game.payoff_at(s, t, x, y) * mu;
                    }
                }
            }
        }
        total
    }

    #[test]
    fn payoff_matches_four_factor_oracle() {
        for seed in 0..5 {
            let (game, rho, alice, bob) = random_setup(seed);
            let fast = payoff(&game, &rho, &alice, &bob).unwrap();
            let direct = payoff_direct(&game, &rho, &alice, &bob);
            assert!((fast - direct).abs() < 1e-12, "seed {seed}: {fast} vs {direct}");
        }
    }

    #[test]
    fn constant_payoff_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut game = uniform_game(2, 3, 2, 2, &mut rng);
        game.payoff.iter_mut().for_each(|v| *v = 2.5);
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2]).unwrap();
        let alice = sampling::random_povm(&mut rng, &[4], 2);
        let bob = sampling::random_povm(&mut rng, &[4], 2);
        let v = payoff(&game, &rho, &alice, &bob).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn single_element_povms() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let game = uniform_game(2, 2, 1, 1, &mut rng);
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2]).unwrap();
        let alice = PovmSet::new_unchecked(vec![identity(4)], vec![4]);
        let bob = PovmSet::new_unchecked(vec![identity(4)], vec![4]);
        let v = payoff(&game, &rho, &alice, &bob).unwrap();
        let expect: f64 = (0..2)
            .flat_map(|s| (0..2).map(move |t| (s, t)))
            .map(|(s, t)| game.p()[s] * game.q()[t] * game.payoff_at(s, t, 0, 0))
            .sum();
        assert!((v - expect).abs() < 1e-12);
    }

    fn discrimination_game() -> GameSpec {
        // referee sends |0⟩ or |1⟩; reward 1 when Alice names it; Bob trivial
        let zeta = vec![
            DensityMatrix::new_unchecked(CMat::from_fn(2, 2, |i, j| cr(((i == 0 && j == 0) as u32) as f64)), vec![2]),
            DensityMatrix::new_unchecked(CMat::from_fn(2, 2, |i, j| cr(((i == 1 && j == 1) as u32) as f64)), vec![2]),
        ];
        let eta = vec![DensityMatrix::new_unchecked(identity(1), vec![1])];
        let payoff = vec![
            1.0, 0.0, // s=0: x=0 rewarded
            0.0, 1.0, // s=1: x=1 rewarded
        ];
        GameSpec::new_flat(vec![0.5, 0.5], vec![1.0], zeta, eta, 2, 1, payoff).unwrap()
    }

    #[test]
    fn discrimination_with_question_basis_povm() {
        // Alice measures the question qubit in its own basis: reward 1
        let game = discrimination_game();
        let rho = DensityMatrix::new_unchecked(identity(4).unscale(4.0), vec![2, 2]);
        let mut p0 = CMat::zeros(4, 4);
        let mut p1 = CMat::zeros(4, 4);
        for k in 0..2 {
            p0[(k, k)] = cr(1.0); // |0⟩⟨0| ⊗ I
            p1[(2 + k, 2 + k)] = cr(1.0);
        }
        let alice = PovmSet::new(vec![p0, p1], vec![4], 1e-12).unwrap();
        let bob = PovmSet::new_unchecked(vec![identity(2)], vec![2]);
        let v = payoff(&game, &rho, &alice, &bob).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_povm_product_elements() {
        // P_k = Q_k ⊗ I reduces to Tr[Q_kρ₁]·I
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let q = sampling::random_povm(&mut rng, &[3], 2);
        let rho1 = sampling::random_density(&mut rng, 3);
        let joint = PovmSet::new_unchecked(
            q.elements().iter().map(|e| tensor(e, &identity(2))).collect(),
            vec![3, 2],
        );
        let eff = effective_povm(&joint, &rho1).unwrap();
        for (e, qk) in eff.elements().iter().zip(q.elements()) {
            let w = trace_product(qk, rho1.matrix()).re;
            assert!(max_norm_diff(e, &identity(2).scale(w)) < 1e-12);
        }
    }

    #[test]
    fn effective_povm_two_path_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let joint = sampling::random_povm(&mut rng, &[2, 3], 4);
        let rho1 = sampling::random_density(&mut rng, 2);
        let rho2 = sampling::random_density(&mut rng, 3);
        let eff = effective_povm(&joint, &rho1).unwrap();
        assert!(eff.completeness_defect() < 1e-10);
        let product = tensor(rho1.matrix(), rho2.matrix());
        for (e, p) in eff.elements().iter().zip(joint.elements()) {
            let via_eff = trace_product(e, rho2.matrix()).re;
            let via_joint = trace_product(p, &product).re;
            assert!((via_eff - via_joint).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_is_normalized() {
        // Σ_{x,y} μ(x,y|s,t) = 1: encode as a constant-1 payoff tensor
        for seed in 40..44 {
            let (game, rho, alice, bob) = random_setup(seed);
            let ones = GameSpec::new_flat(
                game.p().to_vec(),
                game.q().to_vec(),
                game.zeta().to_vec(),
                game.eta().to_vec(),
                game.n_x(),
                game.n_y(),
                vec![1.0; game.payoff_flat().len()],
            )
            .unwrap();
            let v = payoff(&ones, &rho, &alice, &bob).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "seed {seed}: {v}");
        }
    }

    #[test]
    fn seesaw_constant_game() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let mut game = uniform_game(2, 2, 2, 2, &mut rng);
        game.payoff.iter_mut().for_each(|v| *v = 0.75);
        let rho = sampling::random_density(&mut rng, 4).reshaped(vec![2, 2]).unwrap();
        let opts = SeesawOpts { restarts: 2, ..SeesawOpts::default() };
        let out = maximize_payoff(&game, &rho, &opts).unwrap();
        assert!((out.value - 0.75).abs() < 1e-10);
    }

    #[test]
    fn seesaw_finds_perfect_discrimination() {
        // optimal strategy (measure the question basis) scores exactly 1,
        // which equals the best deterministic projective assignment
        let game = discrimination_game();
        let rho = DensityMatrix::new_unchecked(identity(4).unscale(4.0), vec![2, 2]);
        let opts = SeesawOpts { restarts: 4, ..SeesawOpts::default() };
        let out = maximize_payoff(&game, &rho, &opts).unwrap();
        assert!(out.value > 1.0 - 1e-6, "got {}", out.value);
        assert!(out.value < 1.0 + 1e-9);
    }

    #[test]
    fn seesaw_trace_is_monotone() {
        for seed in 50..53 {
            let (game, rho, _, _) = random_setup(seed);
            let opts = SeesawOpts { restarts: 3, seed, ..SeesawOpts::default() };
            let out = maximize_payoff(&game, &rho, &opts).unwrap();
            for w in out.value_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "trace not monotone: {:?}", out.value_trace);
            }
            assert!(out.alice.completeness_defect() < 1e-8);
            assert!(out.bob.completeness_defect() < 1e-8);
        }
    }

    #[test]
    fn seesaw_is_deterministic() {
        let (game, rho, _, _) = random_setup(60);
        let opts = SeesawOpts { restarts: 3, ..SeesawOpts::default() };
        let a = maximize_payoff(&game, &rho, &opts).unwrap();
        let b = maximize_payoff(&game, &rho, &opts).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.value_trace, b.value_trace);
    }

    #[test]
    fn bell_statistics_entangled_beats_mixed() {
        let game = bell_statistics_game();
        let phi = max_entangled(2).unwrap().density();
        let mixed = DensityMatrix::new_unchecked(identity(4).unscale(4.0), vec![2, 2]);
        let opts = SeesawOpts { restarts: 3, seesaw_rounds: 15, ..SeesawOpts::default() };
        let v_phi = maximize_payoff(&game, &phi, &opts).unwrap().value;
        let v_mixed = maximize_payoff(&game, &mixed, &opts).unwrap().value;
        // observed gap is 11/32 − 21/64 = 1/64 for this game
        assert!(
            v_phi > v_mixed + 0.01,
            "entangled {v_phi} vs mixed {v_mixed}"
        );
    }

    #[test]
    fn restricted_identity_equals_unrestricted() {
        let (game, rho, _, _) = random_setup(61);
        let opts = SeesawOpts { restarts: 2, ..SeesawOpts::default() };
        let id = identity_channel(2);
        let a = restricted_payoff(&game, &rho, &id, &id, &opts, true).unwrap();
        let b = maximize_payoff(&game, &rho, &opts).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn restriction_never_helps() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for seed in 0..3 {
            let (game, rho, _, _) = random_setup(70 + seed);
            let ch_a = sampling::random_cptp_channel(&mut rng, 2, 2);
            let ch_b = sampling::random_cptp_channel(&mut rng, 2, 2);
            let opts = SeesawOpts { restarts: 6, ..SeesawOpts::default() };
            let restricted = restricted_payoff(&game, &rho, &ch_a, &ch_b, &opts, false).unwrap();
            let free = maximize_payoff(&game, &rho, &opts).unwrap();
            assert!(
                restricted.value <= free.value + 2.0 * opts.tol + 1e-6,
                "restricted {} vs free {}",
                restricted.value,
                free.value
            );
        }
    }

    #[test]
    fn restricted_phase_damping_matches_dephased_state() {
        let game = bell_statistics_game();
        let phi = max_entangled(2).unwrap().density();
        let opts = SeesawOpts { restarts: 2, seesaw_rounds: 15, ..SeesawOpts::default() };
        let pd = phase_damping(1.0).unwrap();
        let id = identity_channel(2);
        let restricted = restricted_payoff(&game, &phi, &pd, &id, &opts, true).unwrap();
        let dephased = effective_state(&phi, &pd, &id).unwrap();
        let direct = maximize_payoff(&game, &dephased, &opts).unwrap();
        assert!((restricted.value - direct.value).abs() < 1e-6);
    }

    #[test]
    fn breaking_channels_capped_by_separable_ansatz() {
        // depolarizing(1) on both sides leaves I/4 — a product state — so the
        // restricted value cannot exceed the best sampled product-state value
        let game = bell_statistics_game();
        let phi = max_entangled(2).unwrap().density();
        let opts = SeesawOpts { restarts: 2, seesaw_rounds: 12, ..SeesawOpts::default() };
        let dep = crate::channels::depolarizing(1.0).unwrap();
        let restricted = restricted_payoff(&game, &phi, &dep, &dep, &opts, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let mut best_sep = f64::NEG_INFINITY;
        for _ in 0..4 {
            let a = sampling::random_density(&mut rng, 2);
            let b = sampling::random_density(&mut rng, 2);
            let prod = DensityMatrix::new_unchecked(
                tensor(a.matrix(), b.matrix()),
                vec![2, 2],
            );
            best_sep = best_sep.max(maximize_payoff(&game, &prod, &opts).unwrap().value);
        }
        let mixed = DensityMatrix::new_unchecked(identity(4).unscale(4.0), vec![2, 2]);
        best_sep = best_sep.max(maximize_payoff(&game, &mixed, &opts).unwrap().value);
        assert!(
            restricted.value <= best_sep + 2.0 * opts.tol + 1e-6,
            "restricted {} vs separable {}",
            restricted.value,
            best_sep
        );
    }

    #[test]
    fn game_validation_rejects_bad_priors() {
        let zeta = vec![DensityMatrix::new_unchecked(identity(2).unscale(2.0), vec![2]); 2];
        assert!(GameSpec::new_flat(
            vec![0.6, 0.6],
            vec![1.0],
            zeta.clone(),
            vec![zeta[0].clone()],
            1,
            1,
            vec![0.0, 0.0],
        )
        .is_err());
        assert!(GameSpec::new_flat(
            vec![0.5, 0.5],
            vec![1.0],
            zeta.clone(),
            vec![zeta[0].clone()],
            2,
            1,
            vec![0.0; 3],
        )
        .is_err());
    }

    #[test]
    fn bell_povm_is_projective_and_complete() {
        let bell = bell_povm();
        assert!(bell.completeness_defect() < 1e-14);
        for e in bell.elements() {
            assert!(max_norm_diff(&(e * e), e) < 1e-14);
        }
    }
}
