//! Effective entanglement under measurement restrictions described by CPMs:
//! the quality factor of a channel, the effective state, the product-form
//! effective G-concurrence, the Wiseman–Vaccaro superselection-rule measure,
//! and an entanglement-breaking probe.

use crate::channels::{apply, choi_state, tensor_channels, KrausChannel};
use crate::entanglement::{
    concurrence_wootters, entanglement_of_formation_2q, g_concurrence_mixed, g_concurrence_pure,
    RoofOpts,
};
use crate::qcore::{eig_hermitian, CMat, DensityMatrix};
use crate::{Error, Result};

/// Quality factor Q($) = G_d of the channel's Choi state.
///
/// For d = 2 the Wootters closed form is exact; for d ≥ 3 the convex-roof
/// optimizer provides an upper estimate.
pub fn quality_factor(ch: &KrausChannel, d: usize) -> Result<f64> {
    quality_factor_opts(ch, d, &RoofOpts::default())
}

pub fn quality_factor_opts(ch: &KrausChannel, d: usize, opts: &RoofOpts) -> Result<f64> {
    if ch.d_in() != d || ch.d_out() != d {
        return Err(Error::DimMismatch(format!(
            "quality_factor: channel is {}→{}, expected square on d={d}",
            ch.d_in(),
            ch.d_out()
        )));
    }
    let choi = choi_state(ch)?.reshaped(vec![d, d])?;
    if d == 2 {
        concurrence_wootters(&choi)
    } else if choi.is_pure(1e-9) {
        g_concurrence_pure(&choi.principal_component()?, d, d)
    } else {
        Ok(g_concurrence_mixed(&choi, d, d, opts)?.value)
    }
}

/// The effective state ρ̄ = ($_A ⊗ $_B)[ρ].
pub fn effective_state(
    rho: &DensityMatrix,
    ch_a: &KrausChannel,
    ch_b: &KrausChannel,
) -> Result<DensityMatrix> {
    if rho.dims().len() != 2 {
        return Err(Error::DimMismatch(format!(
            "effective_state expects a bipartite state, got dims {:?}",
            rho.dims()
        )));
    }
    if rho.dims()[0] != ch_a.d_in() || rho.dims()[1] != ch_b.d_in() {
        return Err(Error::DimMismatch(format!(
            "channels expect {}x{}, state is {}x{}",
            ch_a.d_in(),
            ch_b.d_in(),
            rho.dims()[0],
            rho.dims()[1]
        )));
    }
    let joint = tensor_channels(ch_a, ch_b);
    let out = apply(&joint, rho)?;
    out.reshaped(vec![ch_a.d_out(), ch_b.d_out()])
}

/// Whether the effective G-concurrence value is exact or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    UpperBound,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::UpperBound => "upper_bound",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveValue {
    pub value: f64,
    pub kind: BoundKind,
    pub q_a: f64,
    pub q_b: f64,
}

/// Effective G-concurrence Q($_A)·Q($_B)·G_d(ρ).
///
/// Exact when ρ is pure and at most one channel is non-identity; otherwise an
/// upper bound (convexity of the roof).
pub fn effective_g_concurrence(
    rho: &DensityMatrix,
    ch_a: &KrausChannel,
    ch_b: &KrausChannel,
    d: usize,
    opts: &RoofOpts,
) -> Result<EffectiveValue> {
    if rho.dim() != d * d {
        return Err(Error::DimMismatch(format!(
            "state has dimension {}, expected {}",
            rho.dim(),
            d * d
        )));
    }
    let q_a = quality_factor_opts(ch_a, d, opts)?;
    let q_b = quality_factor_opts(ch_b, d, opts)?;
    let rho_dd = rho.reshaped(vec![d, d])?;
    let pure = rho_dd.is_pure(1e-9);
    let g = if pure {
        g_concurrence_pure(&rho_dd.principal_component()?, d, d)?
    } else if d == 2 {
        concurrence_wootters(&rho_dd)?
    } else {
        g_concurrence_mixed(&rho_dd, d, d, opts)?.value
    };
    let n_nonid = [ch_a, ch_b]
        .iter()
        .filter(|c| !c.is_identity(1e-9))
        .count();
    let kind = if pure && n_nonid <= 1 {
        BoundKind::Exact
    } else {
        BoundKind::UpperBound
    };
    Ok(EffectiveValue {
        value: q_a * q_b * g,
        kind,
        q_a,
        q_b,
    })
}

/// Base entanglement measure for the Wiseman–Vaccaro sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMeasure {
    /// Entanglement of formation for 2x2 blocks, G-concurrence otherwise.
    Auto,
    Eof2q,
    GConcurrence,
}

#[derive(Debug, Clone)]
pub struct WisemanVaccaroResult {
    pub value: f64,
    /// Exact for pure input; an upper bound for mixed input.
    pub kind: BoundKind,
    /// (nA, nB, p_n, block value) for each retained block.
    pub blocks: Vec<(usize, usize, f64, f64)>,
}

/// Wiseman–Vaccaro superselection-rule restricted entanglement:
/// Σ_n p_n E(ρ_n/p_n) with ρ_n = (Π^A_{nA} ⊗ Π^B_{nB}) ρ (·) and blocks of
/// local particle number. Requires a globally fixed total particle number, so
/// only the matching (nA, nB) pairs carry weight. Blocks with p_n < 1e−12 are
/// skipped.
pub fn wiseman_vaccaro(
    rho: &DensityMatrix,
    blocks_a: &[Vec<usize>],
    blocks_b: &[Vec<usize>],
    measure: BlockMeasure,
    opts: &RoofOpts,
) -> Result<WisemanVaccaroResult> {
    if rho.dims().len() != 2 {
        return Err(Error::DimMismatch(format!(
            "wiseman_vaccaro expects a bipartite state, got dims {:?}",
            rho.dims()
        )));
    }
    let (d_a, d_b) = (rho.dims()[0], rho.dims()[1]);
    check_partition(blocks_a, d_a)?;
    check_partition(blocks_b, d_b)?;

    let mut total = 0.0;
    let mut blocks = Vec::new();
    for (na, ba) in blocks_a.iter().enumerate() {
        for (nb, bb) in blocks_b.iter().enumerate() {
            // compress the (nA, nB) block to its local supports
            let sub = block_submatrix(rho.matrix(), d_b, ba, bb);
            let p: f64 = sub.diagonal().sum().re;
            if p < 1e-12 {
                continue;
            }
            let block_rho = DensityMatrix::new_unchecked(
                sub.unscale(p),
                vec![ba.len(), bb.len()],
            );
            let e = block_entanglement(&block_rho, ba.len(), bb.len(), measure, opts)?;
            total += p * e;
            blocks.push((na, nb, p, e));
        }
    }
    let kind = if rho.is_pure(1e-9) {
        BoundKind::Exact
    } else {
        BoundKind::UpperBound
    };
    Ok(WisemanVaccaroResult {
        value: total,
        kind,
        blocks,
    })
}

fn check_partition(blocks: &[Vec<usize>], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    let mut count = 0usize;
    for b in blocks {
        for &i in b {
            if i >= d || seen[i] {
                return Err(Error::InvalidArgument(
                    "number blocks must partition the local basis".into(),
                ));
            }
            seen[i] = true;
            count += 1;
        }
    }
    if count != d {
        return Err(Error::InvalidArgument(
            "number blocks must cover the local basis".into(),
        ));
    }
    Ok(())
}

/// Extracts the submatrix of a bipartite operator on (A-block) ⊗ (B-block).
fn block_submatrix(m: &CMat, d_b: usize, ba: &[usize], bb: &[usize]) -> CMat {
    let rows: Vec<usize> = ba
        .iter()
        .flat_map(|&ia| bb.iter().map(move |&ib| ia * d_b + ib))
        .collect();
    CMat::from_fn(rows.len(), rows.len(), |i, j| m[(rows[i], rows[j])])
}

fn block_entanglement(
    rho: &DensityMatrix,
    d_a: usize,
    d_b: usize,
    measure: BlockMeasure,
    opts: &RoofOpts,
) -> Result<f64> {
    if d_a == 1 || d_b == 1 {
        return Ok(0.0); // a one-dimensional side cannot be entangled
    }
    let use_eof = match measure {
        BlockMeasure::Eof2q => true,
        BlockMeasure::GConcurrence => false,
        BlockMeasure::Auto => d_a == 2 && d_b == 2,
    };
    if use_eof {
        if d_a != 2 || d_b != 2 {
            return Err(Error::InvalidArgument(format!(
                "EoF base measure needs 2x2 blocks, got {d_a}x{d_b}"
            )));
        }
        entanglement_of_formation_2q(rho)
    } else if rho.is_pure(1e-9) {
        g_concurrence_pure(&rho.principal_component()?, d_a, d_b)
    } else {
        Ok(g_concurrence_mixed(rho, d_a, d_b, opts)?.value)
    }
}

#[derive(Debug, Clone)]
pub struct BreakingProbe {
    pub q: f64,
    /// d = 2 only: whether the Choi state has a PSD partial transpose, which
    /// at 2x2 is exact separability (entanglement breaking).
    pub ppt_separable_hint: Option<bool>,
}

/// Quality factor plus, at d = 2, the exact PPT separability verdict on the
/// Choi state.
pub fn entanglement_breaking_probe(ch: &KrausChannel, d: usize) -> Result<BreakingProbe> {
    let q = quality_factor(ch, d)?;
    let hint = if d == 2 {
        let choi = choi_state(ch)?;
        let pt = partial_transpose_second(choi.matrix(), 2, 2);
        let (vals, _) = eig_hermitian(&pt, 1e-8)?;
        Some(vals.last().map(|&v| v >= -1e-9).unwrap_or(false))
    } else {
        None
    };
    Ok(BreakingProbe {
        q,
        ppt_separable_hint: hint,
    })
}

/// Partial transpose on the second factor of a dA×dB bipartite operator.
pub fn partial_transpose_second(m: &CMat, d_a: usize, d_b: usize) -> CMat {
    CMat::from_fn(d_a * d_b, d_a * d_b, |r, c| {
        let (ia, ib) = (r / d_b, r % d_b);
        let (ja, jb) = (c / d_b, c % d_b);
        m[(ia * d_b + jb, ja * d_b + ib)]
    })
}
