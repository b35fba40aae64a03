use anyhow::{bail, Result};
use clap::Args;
use cpo_core::noise::{variance_evolution_at, write_evolution_csv, InputPreset};
use serde_json::json;

use super::{Context, Status};
use crate::output::{Manifest, Outputs};

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Input state: coherent, p_squeezed_<dB> or q_squeezed_<dB>. Repeat for
    /// several; defaults to coherent, p_squeezed_10 and q_squeezed_10.
    #[arg(long = "preset")]
    pub presets: Vec<String>,
    /// Entry-face saturation s(0).
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
    /// Largest pump depth ζ on the grid.
    #[arg(long, default_value_t = 10.0)]
    pub zeta_max: f64,
    #[arg(long, default_value_t = 201)]
    pub n_points: usize,
    /// Analysis frequency ν/Γ₀.
    #[arg(long, default_value_t = 0.0)]
    pub nu_over_gamma0: f64,
}

pub fn run(args: &NoiseArgs, ctx: &Context) -> Result<Status> {
    let presets = if args.presets.is_empty() {
        InputPreset::standard_set().to_vec()
    } else {
        args.presets
            .iter()
            .map(|p| p.parse::<InputPreset>())
            .collect::<Result<Vec<_>, _>>()?
    };
    if !(args.s0.is_finite() && args.s0 > 0.0) {
        bail!("s0 must be positive, got {}", args.s0);
    }
    if !(args.zeta_max.is_finite() && args.zeta_max >= 0.0) {
        bail!("zeta-max must be non-negative, got {}", args.zeta_max);
    }
    if args.n_points < 2 {
        bail!("n-points must be >= 2, got {}", args.n_points);
    }
    if !args.nu_over_gamma0.is_finite() {
        bail!("nu-over-gamma0 must be finite");
    }

    let last = (args.n_points - 1) as f64;
    let grid: Vec<f64> = (0..args.n_points)
        .map(|i| args.zeta_max * i as f64 / last)
        .collect();
    let sweeps = presets
        .iter()
        .map(|p| {
            let rows = variance_evolution_at(p.state(), args.s0, &grid, args.nu_over_gamma0)?;
            Ok((p.to_string(), args.nu_over_gamma0, rows))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = Vec::new();
    write_evolution_csv(&mut csv, &sweeps)?;

    let mut out = Outputs::new(&ctx.out)?;
    out.write("noise_evolution.csv", csv)?;
    out.write("noise_evolution.py", PLOT_SCRIPT)?;
    out.finish(Manifest {
        subcommand: "noise-evolution",
        config_path: ctx.config_path.clone(),
        seed: None,
        parameters: json!({
            "presets": presets.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "s0": args.s0,
            "zeta_max": args.zeta_max,
            "n_points": args.n_points,
            "nu_over_gamma0": args.nu_over_gamma0,
        }),
    })?;
    Ok(Status::Success)
}

const PLOT_SCRIPT: &str = r#"import csv
import os
from collections import OrderedDict

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
series = OrderedDict()
with open(os.path.join(here, "noise_evolution.csv")) as f:
    for r in csv.DictReader(f):
        d = series.setdefault(r["input_preset"], {"zeta": [], "S_P": [], "S_Q": []})
        for k in d:
            d[k].append(float(r[k]))

fig, axes = plt.subplots(1, len(series), figsize=(4 * len(series), 3.5), squeeze=False)
for ax, (label, d) in zip(axes[0], series.items()):
    ax.plot(d["zeta"], d["S_P"], label=r"$S_P$")
    ax.plot(d["zeta"], d["S_Q"], "--", label=r"$S_Q$")
    ax.axhline(1.0, color="k", lw=0.8, ls=":", label="SQL")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\zeta$")
    ax.set_title(label)
    ax.legend()
axes[0][0].set_ylabel("noise spectrum")
fig.tight_layout()
fig.savefig(os.path.join(here, "noise_evolution.png"), dpi=150)
"#;
