use anyhow::{bail, Result};
use clap::Args;
use cpo_core::fit::{log_grid, FitModel, FitParams};
use cpo_core::format_float;
use cpo_core::medium::MediumParams;
use serde_json::json;

use super::{Context, Status};
use crate::output::{csv_line, Manifest, Outputs};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Lowest pump power (mW).
    #[arg(long, default_value_t = 0.1)]
    pub power_min: f64,
    /// Highest pump power (mW).
    #[arg(long, default_value_t = 100.0)]
    pub power_max: f64,
    #[arg(long, default_value_t = 200)]
    pub n_points: usize,
    /// γ_t/Γ₀; defaults to the configured medium.
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    /// Probe depth g²NL/(2Γc); defaults to the configured medium.
    #[arg(long)]
    pub optical_depth: Option<f64>,
    /// Saturation per watt of pump (1/W).
    #[arg(long)]
    pub s_per_watt: Option<f64>,
    #[arg(long)]
    pub residual_transmission: Option<f64>,
    /// Total pump depth ζ(L); 0 keeps the pump undepleted.
    #[arg(long)]
    pub pump_depth: Option<f64>,
}

/// Medium defaults to the helium cell; the four model numbers follow the
/// flag > config > medium/default chain.
pub fn resolve_params(
    ctx: &Context,
    gamma_ratio: Option<f64>,
    optical_depth: Option<f64>,
    s_per_watt: Option<f64>,
    residual: Option<f64>,
    pump_depth: Option<f64>,
) -> Result<(MediumParams, FitParams, FitModel)> {
    let medium = ctx.config.medium(MediumParams::helium_classical())?;
    let nominal = FitParams::nominal();
    let params = FitParams {
        gamma_ratio: gamma_ratio.or(ctx.config.gamma_ratio).unwrap_or(medium.gamma_ratio()),
        optical_depth: optical_depth.or(ctx.config.optical_depth).unwrap_or(medium.optical_depth()),
        s_per_watt: s_per_watt.or(ctx.config.s_per_watt).unwrap_or(nominal.s_per_watt),
        residual_transmission: residual
            .or(ctx.config.residual_transmission)
            .unwrap_or(nominal.residual_transmission),
    };
    params.validate()?;
    let model = FitModel {
        pump_depth: pump_depth.or(ctx.config.pump_depth).unwrap_or(0.0),
    };
    Ok((medium, params, model))
}

pub fn run(args: &SweepArgs, ctx: &Context) -> Result<Status> {
    if !(args.power_min.is_finite() && args.power_min > 0.0 && args.power_max > args.power_min) {
        bail!(
            "invalid power range [{}, {}] mW: need 0 < power-min < power-max",
            args.power_min,
            args.power_max
        );
    }
    if args.n_points < 2 {
        bail!("n-points must be >= 2, got {}", args.n_points);
    }
    let (medium, params, model) = resolve_params(
        ctx,
        args.gamma_ratio,
        args.optical_depth,
        args.s_per_watt,
        args.residual_transmission,
        args.pump_depth,
    )?;

    let powers = log_grid(args.power_min * 1e-3, args.power_max * 1e-3, args.n_points);
    let mut csv = csv_line(&["power_W", "s0", "T_theta0", "T_thetaPi2"].map(String::from));
    for &p in &powers {
        let t = model.transmissions(&params, p)?;
        csv.push_str(&csv_line(&[
            format_float(p),
            format_float(params.s_per_watt * p),
            format_float(t.t_orthogonal),
            format_float(t.t_parallel),
        ]));
    }

    let mut out = Outputs::new(&ctx.out)?;
    out.write("transmission_sweep.csv", csv)?;
    out.write("transmission_sweep.py", PLOT_SCRIPT)?;
    out.finish(Manifest {
        subcommand: "transmission-sweep",
        config_path: ctx.config_path.clone(),
        seed: None,
        parameters: json!({
            "medium": medium,
            "model": params,
            "pump_depth": model.pump_depth,
            "power_min_mW": args.power_min,
            "power_max_mW": args.power_max,
            "n_points": args.n_points,
        }),
    })?;
    Ok(Status::Success)
}

const PLOT_SCRIPT: &str = r#"import csv
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "transmission_sweep.csv")) as f:
    rows = list(csv.DictReader(f))
power_mw = [1e3 * float(r["power_W"]) for r in rows]

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(power_mw, [float(r["T_thetaPi2"]) for r in rows], label=r"$\Theta = \pi/2$")
ax.plot(power_mw, [float(r["T_theta0"]) for r in rows], "--", label=r"$\Theta = 0$")
ax.set_xscale("log")
ax.set_xlabel("pump power (mW)")
ax.set_ylabel("probe transmission")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "transmission_sweep.png"), dpi=150)
"#;
