use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use cpo_core::dataset::TransmissionDataset;
use cpo_core::fit::{fit, log_grid, FitOptions};
use cpo_core::{format_float, Error};
use serde_json::json;

use super::sweep::resolve_params;
use super::{Context, Status};
use crate::output::{csv_line, Manifest, Outputs};

/// Points on the fitted-curve grid written next to the fit result.
const CURVE_POINTS: usize = 200;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Transmission data CSV: power_mW, theta, transmission[, sigma].
    #[arg(long)]
    pub data: PathBuf,
    /// Starting value for γ_t/Γ₀.
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    /// Starting value for the probe depth.
    #[arg(long)]
    pub optical_depth: Option<f64>,
    /// Starting value for the saturation per watt (1/W).
    #[arg(long)]
    pub s_per_watt: Option<f64>,
    #[arg(long)]
    pub residual_transmission: Option<f64>,
    /// Total pump depth ζ(L) held fixed during the fit.
    #[arg(long)]
    pub pump_depth: Option<f64>,
    #[arg(long, default_value_t = FitOptions::default().max_iterations)]
    pub max_iterations: usize,
}

pub fn run(args: &FitArgs, ctx: &Context) -> Result<Status> {
    let dataset = TransmissionDataset::load(&args.data)
        .with_context(|| format!("reading data {}", args.data.display()))?;
    let (_, initial, model) = resolve_params(
        ctx,
        args.gamma_ratio,
        args.optical_depth,
        args.s_per_watt,
        args.residual_transmission,
        args.pump_depth,
    )?;
    let options = FitOptions {
        max_iterations: args.max_iterations,
        ..FitOptions::default()
    };
    let result = match fit(&dataset, &initial, &model, &options) {
        Ok(r) => r,
        Err(Error::FitNotConverged {
            best,
            iterations,
            diagnostic,
        }) => anyhow::bail!(
            "fit did not converge after {iterations} iterations ({diagnostic}); best parameters {}",
            serde_json::to_string(&*best)?
        ),
        Err(e) => return Err(e.into()),
    };
    if result.degenerate {
        log::warn!(
            "data leave parameters unconstrained: {}",
            result.degenerate_parameters.join(", ")
        );
    }

    let (lo, hi) = dataset
        .rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.pump_power), hi.max(r.pump_power)));
    let mut curves = csv_line(&["power_W", "T_theta0", "T_thetaPi2"].map(String::from));
    let powers = if hi > lo {
        log_grid(lo, hi, CURVE_POINTS)
    } else {
        vec![lo]
    };
    for p in powers {
        let t = model.transmissions(&result.params, p)?;
        curves.push_str(&csv_line(&[
            format_float(p),
            format_float(t.t_orthogonal),
            format_float(t.t_parallel),
        ]));
    }

    let mut out = Outputs::new(&ctx.out)?;
    out.write_json("fit.json", &result)?;
    out.write("fit_curves.csv", curves)?;
    let mut data_copy = Vec::new();
    dataset.write_csv(&mut data_copy)?;
    out.write("fit_data.csv", data_copy)?;
    out.write("fit_overlay.py", PLOT_SCRIPT)?;
    out.finish(Manifest {
        subcommand: "fit",
        config_path: ctx.config_path.clone(),
        seed: None,
        parameters: json!({
            "data": args.data.display().to_string(),
            "initial": initial,
            "pump_depth": model.pump_depth,
            "options": options,
        }),
    })?;
    Ok(Status::Success)
}

const PLOT_SCRIPT: &str = r#"import csv
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(here, name)) as f:
        return list(csv.DictReader(f))


curves = load("fit_curves.csv")
data = load("fit_data.csv")

fig, ax = plt.subplots(figsize=(6, 4))
p_mw = [1e3 * float(r["power_W"]) for r in curves]
ax.plot(p_mw, [float(r["T_thetaPi2"]) for r in curves], "C0-", label=r"fit $\Theta = \pi/2$")
ax.plot(p_mw, [float(r["T_theta0"]) for r in curves], "C1--", label=r"fit $\Theta = 0$")
for theta, style, label in (("pi2", "C0o", r"data $\Theta = \pi/2$"), ("0", "C1s", r"data $\Theta = 0$")):
    rows = [r for r in data if r["theta"] == theta]
    ax.plot([float(r["power_mW"]) for r in rows], [float(r["transmission"]) for r in rows],
            style, ms=3, label=label)
ax.set_xscale("log")
ax.set_xlabel("pump power (mW)")
ax.set_ylabel("probe transmission")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "fit_overlay.png"), dpi=150)
"#;
