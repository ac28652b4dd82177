//! Command-line front end: channel/distribution spec parsing, subcommand
//! dispatch, JSON/CSV emission and deterministic seeding.

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bec::{
    g_factor, g_sweep, simulate_bec_exact, ssr_lifting_channel, bec_limit_unitary, BecParams,
    PhaseDistribution,
};
use crate::channels::{
    amplitude_damping, depolarizing, identity_channel, phase_damping, ssr_dephasing, KrausChannel,
};
use crate::effective::{effective_g_concurrence, quality_factor};
use crate::entanglement::{g_concurrence_mixed, g_concurrence_pure, RoofOpts};
use crate::games::{maximize_payoff, restricted_payoff, SeesawOpts};
use crate::io::{round_sig, read_json, ChannelJson, DensityJson, GameJson};
use crate::qcore::{cr, trace_distance, DensityMatrix, PureState};
use crate::{acceptance, Error, Result};

/// Effective entanglement under imperfect or restricted measurements.
#[derive(Debug, Parser)]
#[command(name = "effent", version, about)]
pub struct Cli {
    /// Seed for all stochastic components (overrides EFFENT_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Global numerical tolerance for input validation.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quality factor Q of a channel.
    Quality {
        /// Channel spec: name:params or a JSON file path.
        #[arg(long)]
        channel: String,
        /// Hilbert-space dimension the channel acts on.
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[command(flatten)]
        roof: RoofArgs,
    },
    /// G-concurrence of a state (pure closed form or convex roof).
    Gconc {
        /// Density-matrix JSON file.
        #[arg(long)]
        state: String,
        #[command(flatten)]
        roof: RoofArgs,
    },
    /// Effective G-concurrence Ē = Q_A·Q_B·G of a bipartite state.
    Effective {
        #[arg(long)]
        state: String,
        #[arg(long)]
        channel_a: String,
        #[arg(long)]
        channel_b: String,
        #[command(flatten)]
        roof: RoofArgs,
    },
    /// Seesaw payoff of a semiquantum nonlocal game.
    Game {
        /// Game JSON file.
        #[arg(long)]
        game: String,
        /// Resource-state JSON file.
        #[arg(long)]
        state: String,
        /// Optional restriction channel on Alice's share.
        #[arg(long)]
        channel_a: Option<String>,
        /// Optional restriction channel on Bob's share.
        #[arg(long)]
        channel_b: Option<String>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// g-factor and lifting-channel quality of a BEC phase distribution.
    Bec {
        /// Distribution spec, e.g. wrapped-normal:0,1.0.
        #[arg(long)]
        dist: String,
        /// Target rotation angle θ = ωt.
        #[arg(long)]
        theta: f64,
        /// Also run the exact truncated-Fock simulation.
        #[arg(long)]
        exact: bool,
        /// Mean BEC occupation |α|² for the exact simulation.
        #[arg(long, default_value_t = 100.0)]
        alpha_sq: f64,
        /// Fock cutoff of the BEC mode.
        #[arg(long, default_value_t = 170)]
        trunc: usize,
        /// BEC phase used by the exact simulation.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Sweep a distribution family, writing CSV (param, g_abs, q_factor).
    Sweep {
        /// Family: wrapped-normal, double-rect or delta.
        #[arg(long)]
        family: String,
        /// σ grid start:stop:step (wrapped-normal).
        #[arg(long)]
        sigma: Option<String>,
        /// δ grid start:stop:step (double-rect).
        #[arg(long)]
        delta: Option<String>,
        /// Block width w (double-rect).
        #[arg(long, default_value_t = 0.4)]
        w: f64,
        /// φ₀ grid start:stop:step (delta).
        #[arg(long)]
        phi0: Option<String>,
        /// Rotation angle for the constructed lifting channel.
        #[arg(long, default_value_t = 0.7)]
        theta: f64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run the built-in acceptance suite.
    Selftest,
}

/// Convex-roof optimizer knobs shared by several subcommands.
#[derive(Debug, Args)]
pub struct RoofArgs {
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl RoofArgs {
    fn to_opts(&self, seed: u64) -> RoofOpts {
        let mut opts = RoofOpts { seed, ..RoofOpts::default() };
        if let Some(r) = self.restarts {
            opts.restarts = r;
        }
        if let Some(m) = self.max_iters {
            opts.max_iters = m;
        }
        opts
    }
}

/// Parses a channel spec: a named constructor (`identity[:d]`,
/// `amplitude-damping:γ`, `phase-damping:λ`, `depolarizing:p`, `ssr`,
/// `bec:<dist>,<theta>`) or a path to a channel JSON file.
pub fn parse_channel_spec(spec: &str, tol: f64) -> Result<KrausChannel> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    match name {
        "identity" => {
            let d = match params {
                None => 2,
                Some(p) => parse_field::<usize>(p, "identity dimension")?,
            };
            Ok(identity_channel(d))
        }
        "amplitude-damping" => {
            amplitude_damping(required_param(params, "amplitude-damping", "γ")?)
        }
        "phase-damping" => phase_damping(required_param(params, "phase-damping", "λ")?),
        "depolarizing" => depolarizing(required_param(params, "depolarizing", "p")?),
        "ssr" => ssr_dephasing(&[vec![0], vec![1]]),
        "bec" => {
            let rest = params.ok_or_else(|| {
                Error::InvalidArgument("bec channel needs `bec:<dist>,<theta>`".into())
            })?;
            let (dist_spec, theta) = rest.rsplit_once(',').ok_or_else(|| {
                Error::InvalidArgument("bec channel needs `bec:<dist>,<theta>`".into())
            })?;
            let dist = parse_dist_spec(dist_spec)?;
            ssr_lifting_channel(&dist, parse_field(theta, "bec theta")?, false)
        }
        _ => {
            // not a known name: treat as a file path
            if std::path::Path::new(spec).exists() {
                read_json::<ChannelJson>(spec)?.to_channel(tol)
            } else {
                Err(Error::InvalidArgument(format!(
                    "field `channel`: unknown channel `{spec}` (not a named \
                     constructor, and no such file)"
                )))
            }
        }
    }
}

/// Parses a phase-distribution spec: `uniform`, `delta:φ₀`,
/// `wrapped-normal:μ,σ`, `double-rect:w,δ` or
/// `delta-mixture:φ₁,w₁;φ₂,w₂;...`.
pub fn parse_dist_spec(spec: &str) -> Result<PhaseDistribution> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let dist = match name {
        "uniform" => PhaseDistribution::Uniform,
        "delta" => PhaseDistribution::Delta {
            phi0: required_param(params, "delta", "φ₀")?,
        },
        "wrapped-normal" => {
            let [mu, sigma] = parse_pair(params, "wrapped-normal", "μ,σ")?;
            PhaseDistribution::WrappedNormal { mu, sigma }
        }
        "double-rect" => {
            let [w, delta] = parse_pair(params, "double-rect", "w,δ")?;
            PhaseDistribution::DoubleRect { w, delta }
        }
        "delta-mixture" => {
            let body = params.ok_or_else(|| {
                Error::InvalidArgument("delta-mixture needs `φ₁,w₁;φ₂,w₂;...`".into())
            })?;
            let peaks = body
                .split(';')
                .map(|pair| {
                    let (phi, wt) = pair.split_once(',').ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "delta-mixture entry `{pair}` must be `φ,weight`"
                        ))
                    })?;
                    Ok((
                        parse_field(phi, "delta-mixture phase")?,
                        parse_field(wt, "delta-mixture weight")?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            PhaseDistribution::DeltaMixture { peaks }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "field `dist`: unknown distribution `{spec}`"
            )))
        }
    };
    dist.validate()?;
    Ok(dist)
}

fn required_param<T: std::str::FromStr>(
    params: Option<&str>,
    name: &str,
    what: &str,
) -> Result<T> {
    let p = params.ok_or_else(|| {
        Error::InvalidArgument(format!("channel `{name}` needs a parameter `{what}`"))
    })?;
    parse_field(p, what)
}

fn parse_field<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim().parse().map_err(|_| {
        Error::InvalidArgument(format!("field `{what}`: cannot parse `{text}`"))
    })
}

fn parse_pair(params: Option<&str>, name: &str, what: &str) -> Result<[f64; 2]> {
    let p = params.ok_or_else(|| {
        Error::InvalidArgument(format!("`{name}` needs parameters `{what}`"))
    })?;
    let (a, b) = p.split_once(',').ok_or_else(|| {
        Error::InvalidArgument(format!("`{name}` needs two parameters `{what}`"))
    })?;
    Ok([parse_field(a, what)?, parse_field(b, what)?])
}

/// Parses an inclusive `start:stop:step` grid.
fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "field `{what}`: grid must be `start:stop:step`, got `{text}`"
        )));
    }
    let start: f64 = parse_field(parts[0], what)?;
    let stop: f64 = parse_field(parts[1], what)?;
    let step: f64 = parse_field(parts[2], what)?;
    if !(step > 0.0) || stop < start {
        return Err(Error::InvalidArgument(format!(
            "field `{what}`: need step > 0 and stop ≥ start"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("EFFENT_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn load_bipartite_state(path: &str, tol: f64) -> Result<DensityMatrix> {
    let rho = read_json::<DensityJson>(path)?.to_density(tol)?;
    if rho.dims().len() != 2 {
        return Err(Error::InvalidState(format!(
            "field `dims`: expected a bipartite state, got {:?}",
            rho.dims()
        )));
    }
    Ok(rho)
}

/// Recursively rounds every JSON number to 12 significant digits.
fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
            }
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Runs one parsed command; returns the process exit code. All structured
/// output goes to standard output, human-readable errors to standard error.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let seed = resolve_seed(cli.seed);
    let tol = cli.tol;
    let output = match cli.command {
        Command::Quality { channel, d, roof } => {
            let ch = parse_channel_spec(&channel, tol)?;
            let q = crate::effective::quality_factor_opts(&ch, d, &roof.to_opts(seed))?;
            json!({ "q": q })
        }
        Command::Gconc { state, roof } => {
            let rho = load_bipartite_state(&state, tol)?;
            let (d_a, d_b) = (rho.dims()[0], rho.dims()[1]);
            if rho.is_pure(tol.max(1e-12)) {
                let value = g_concurrence_pure(&rho.principal_component()?, d_a, d_b)?;
                json!({ "value": value, "method": "pure", "iters": 0 })
            } else {
                let result = g_concurrence_mixed(&rho, d_a, d_b, &roof.to_opts(seed))?;
                json!({ "value": result.value, "method": "roof", "iters": result.iters })
            }
        }
        Command::Effective { state, channel_a, channel_b, roof } => {
            let rho = load_bipartite_state(&state, tol)?;
            if rho.dims()[0] != rho.dims()[1] {
                return Err(Error::InvalidState(format!(
                    "field `dims`: effective G-concurrence needs equal local \
                     dimensions, got {:?}",
                    rho.dims()
                )));
            }
            let d = rho.dims()[0];
            let ch_a = parse_channel_spec(&channel_a, tol)?;
            let ch_b = parse_channel_spec(&channel_b, tol)?;
            let out = effective_g_concurrence(&rho, &ch_a, &ch_b, d, &roof.to_opts(seed))?;
            json!({
                "value": out.value,
                "kind": out.kind.as_str(),
                "q_a": out.q_a,
                "q_b": out.q_b,
            })
        }
        Command::Game { game, state, channel_a, channel_b, restarts } => {
            let spec = read_json::<GameJson>(&game)?.to_game(tol)?;
            let rho = load_bipartite_state(&state, tol)?;
            let mut opts = SeesawOpts { seed, ..SeesawOpts::default() };
            if let Some(r) = restarts {
                opts.restarts = r;
            }
            let result = if channel_a.is_some() || channel_b.is_some() {
                let ch_a = match &channel_a {
                    Some(s) => parse_channel_spec(s, tol)?,
                    None => identity_channel(rho.dims()[0]),
                };
                let ch_b = match &channel_b {
                    Some(s) => parse_channel_spec(s, tol)?,
                    None => identity_channel(rho.dims()[1]),
                };
                restricted_payoff(&spec, &rho, &ch_a, &ch_b, &opts, false)?
            } else {
                maximize_payoff(&spec, &rho, &opts)?
            };
            json!({
                "value": result.value,
                "rounds": result.rounds,
                "restarts_used": result.restarts_used,
            })
        }
        Command::Bec { dist, theta, exact, alpha_sq, trunc, phi } => {
            let dist = parse_dist_spec(&dist)?;
            let g = g_factor(&dist)?;
            let ch = ssr_lifting_channel(&dist, theta, false)?;
            let q = quality_factor(&ch, 2)?;
            let mut out = json!({
                "g": [g.re, g.im],
                "g_abs": g.norm(),
                "q_factor": q,
            });
            if exact {
                let params = BecParams::new(alpha_sq, theta)?;
                let input = PureState::from_amplitudes(&[cr(1.0), cr(0.0)], vec![2])?.density();
                let sim = simulate_bec_exact(&params, phi, trunc, &input)?;
                let u = bec_limit_unitary(theta, phi);
                let target = DensityMatrix::new_unchecked(
                    &u * input.matrix() * u.adjoint(),
                    vec![2],
                );
                out["exact"] = json!({
                    "leakage": sim.leakage,
                    "norm_loss": sim.norm_loss,
                    "distance_to_limit": trace_distance(&sim.state, &target)?,
                });
            }
            out
        }
        Command::Sweep { family, sigma, delta, w, phi0, theta, out } => {
            let rows = match family.as_str() {
                "wrapped-normal" => {
                    let grid = parse_grid(
                        sigma.as_deref().ok_or_else(|| {
                            Error::InvalidArgument("field `sigma`: required for wrapped-normal".into())
                        })?,
                        "sigma",
                    )?;
                    g_sweep(
                        &|s| PhaseDistribution::WrappedNormal { mu: 0.0, sigma: s },
                        &grid,
                        theta,
                    )?
                }
                "double-rect" => {
                    let grid = parse_grid(
                        delta.as_deref().ok_or_else(|| {
                            Error::InvalidArgument("field `delta`: required for double-rect".into())
                        })?,
                        "delta",
                    )?;
                    g_sweep(&|d| PhaseDistribution::DoubleRect { w, delta: d }, &grid, theta)?
                }
                "delta" => {
                    let grid = parse_grid(
                        phi0.as_deref().ok_or_else(|| {
                            Error::InvalidArgument("field `phi0`: required for delta".into())
                        })?,
                        "phi0",
                    )?;
                    g_sweep(&|p| PhaseDistribution::Delta { phi0: p }, &grid, theta)?
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "field `family`: unknown family `{family}`"
                    )))
                }
            };
            let mut csv = String::from("param,g_abs,q_factor\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    round_sig(row.param),
                    round_sig(row.g_abs),
                    round_sig(row.q_factor)
                ));
            }
            match out {
                Some(path) => {
                    std::fs::write(&path, csv)?;
                    json!({ "rows": rows.len(), "out": path })
                }
                None => {
                    print!("{csv}");
                    return Ok(0);
                }
            }
        }
        Command::Selftest => {
            let reports = acceptance::run_all();
            for r in &reports {
                println!("{}", r.summary_line());
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            return if failed == 0 {
                println!("selftest: all {} criteria passed", reports.len());
                Ok(0)
            } else {
                eprintln!("selftest: {failed} criteria failed");
                Ok(3)
            };
        }
    };
    println!("{}", round_value(output));
    Ok(0)
}
