use anyhow::{bail, Result};
use clap::Args;
use cpo_core::medium::MediumParams;
use cpo_core::noise::InputPreset;
use cpo_core::oracle::{
    resolve_delta_model, run_oracle, OracleConfig, OracleMode, OracleReport, OracleTarget, Propagator, Quadrature,
};
use cpo_core::probe::DeltaModel;
use cpo_core::pump::SaturationProfile;
use serde::Serialize;
use serde_json::json;

use super::{Context, Status};
use crate::output::{Manifest, Outputs};

/// Default tolerances on `rel_error` per oracle mode.
const DETERMINISTIC_TOLERANCE: f64 = 1e-6;
const MONTE_CARLO_TOLERANCE: f64 = 0.02;

/// Grid points of the saturation profile handed to the oracle.
const PROFILE_POINTS: usize = 257;

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// deterministic or monte-carlo.
    #[arg(long, default_value = "deterministic")]
    pub mode: OracleMode,
    /// P or Q.
    #[arg(long, default_value = "P")]
    pub quadrature: Quadrature,
    /// Analysis frequencies ν/Γ₀, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub nu_over_gamma0: Vec<f64>,
    /// Entry-face saturation s(0).
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
    /// Pump depth ζ at which the spectra are compared; defaults to the
    /// medium's full depth.
    #[arg(long)]
    pub depth: Option<f64>,
    /// CPO width model: gamma0_s or saturated_ratio.
    #[arg(long)]
    pub delta_model: Option<DeltaModel>,
    /// adiabatic or exact.
    #[arg(long)]
    pub propagator: Option<Propagator>,
    #[arg(long)]
    pub n_trajectories: Option<usize>,
    #[arg(long)]
    pub spatial_steps: Option<usize>,
    /// Input state preset.
    #[arg(long, default_value = "coherent")]
    pub input: InputPreset,
    /// Switch the Langevin forces off.
    #[arg(long)]
    pub no_noise: bool,
    /// Also tabulate every CPO width model against the closed form.
    #[arg(long)]
    pub resolve_delta: bool,
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    tolerance: f64,
    reports: &'a [OracleReport],
    /// Indices into `reports` whose `rel_error` exceeds `tolerance`.
    failures: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_resolution: Option<cpo_core::oracle::DeltaResolution>,
}

pub fn run(args: &OracleArgs, ctx: &Context) -> Result<Status> {
    let params = ctx.config.medium(MediumParams::quantum_reference())?;
    params.require_quantum_regime()?;
    let cfg = &ctx.config;
    let config = OracleConfig {
        n_trajectories: args
            .n_trajectories
            .or(cfg.n_trajectories)
            .unwrap_or(OracleConfig::default().n_trajectories),
        spatial_steps: args
            .spatial_steps
            .or(cfg.spatial_steps)
            .unwrap_or(OracleConfig::default().spatial_steps),
        seed: ctx.seed.or(cfg.seed).unwrap_or(OracleConfig::default().seed),
        delta_model: match (args.delta_model, &cfg.delta_model) {
            (Some(m), _) => m,
            (None, Some(name)) => name.parse()?,
            (None, None) => DeltaModel::default(),
        },
        mode: args.mode,
        propagator: match (args.propagator, &cfg.propagator) {
            (Some(p), _) => p,
            (None, Some(name)) => name.parse()?,
            (None, None) => Propagator::default(),
        },
        noise: !args.no_noise,
    };
    config.validate()?;
    let tolerance = ctx.tolerance.or(cfg.tolerance).unwrap_or(match args.mode {
        OracleMode::Deterministic => DETERMINISTIC_TOLERANCE,
        OracleMode::MonteCarlo => MONTE_CARLO_TOLERANCE,
    });
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        bail!("tolerance must be non-negative, got {tolerance}");
    }
    if !(args.s0.is_finite() && args.s0 > 0.0) {
        bail!("s0 must be positive, got {}", args.s0);
    }
    let rate = params.zeta_rate();
    let depth = args.depth.unwrap_or(rate * params.length);
    if !(depth.is_finite() && depth >= 0.0) {
        bail!("depth must be non-negative, got {depth}");
    }
    if let Some(bad) = args.nu_over_gamma0.iter().find(|x| !x.is_finite()) {
        bail!("nu-over-gamma0 must be finite, got {bad}");
    }

    let z = depth / rate;
    let profile = SaturationProfile::with_rate(args.s0, rate, z, PROFILE_POINTS)?;
    let input = args.input.state();
    let reports = args
        .nu_over_gamma0
        .iter()
        .map(|&x| {
            let target = OracleTarget {
                quadrature: args.quadrature,
                z,
                nu: x * params.gamma0,
                input,
            };
            run_oracle(target, &profile, &params, &config)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let failures: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.rel_error <= tolerance))
        .map(|(i, _)| i)
        .collect();
    for &i in &failures {
        let r = &reports[i];
        eprintln!(
            "tolerance exceeded: {} {} at nu/gamma0 = {}: closed form {}, oracle {}, rel_error {:e} > {:e}",
            r.mode, r.quadrature, r.nu_over_gamma0, r.closed_form, r.oracle, r.rel_error, tolerance
        );
    }
    let delta_resolution = if args.resolve_delta {
        Some(resolve_delta_model(&profile, &params, &args.nu_over_gamma0, config.propagator)?)
    } else {
        None
    };

    let mut out = Outputs::new(&ctx.out)?;
    out.write_json(
        "oracle.json",
        &OracleOutput {
            tolerance,
            reports: &reports,
            failures: failures.clone(),
            delta_resolution,
        },
    )?;
    out.finish(Manifest {
        subcommand: "oracle",
        config_path: ctx.config_path.clone(),
        seed: (args.mode == OracleMode::MonteCarlo).then_some(config.seed),
        parameters: json!({
            "medium": params,
            "oracle": config,
            "quadrature": args.quadrature,
            "nu_over_gamma0": args.nu_over_gamma0,
            "s0": args.s0,
            "depth": depth,
            "z_m": z,
            "input": args.input.to_string(),
            "tolerance": tolerance,
        }),
    })?;
    Ok(if failures.is_empty() {
        Status::Success
    } else {
        Status::ToleranceExceeded
    })
}
