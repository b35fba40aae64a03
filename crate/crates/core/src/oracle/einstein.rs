//! Diffusion coefficients from the generalised Einstein relation
//! `D_AB = ⟨R(AB) − A R(B) − R(A) B⟩`, where `R` is the adjoint action of
//! the spontaneous-emission dissipator on atomic operators.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::medium::{steady_state, MediumParams, EXCITED, GROUND_MINUS, GROUND_PLUS};
use crate::Result;

type Op = Matrix3<Complex64>;

/// `|i⟩⟨j|` over the basis (e, +1, −1).
fn sigma(i: usize, j: usize) -> Op {
    let mut m = Op::zeros();
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Heisenberg-picture dissipator: `Σ_k L_k† A L_k − ½{L_k† L_k, A}` with
/// `L_± = √(Γ₀/2) |±1⟩⟨e|`.
fn dissipator(a: &Op, gamma0: f64) -> Op {
    let amp = Complex64::new((0.5 * gamma0).sqrt(), 0.0);
    [GROUND_PLUS, GROUND_MINUS]
        .iter()
        .map(|&g| {
            let l = sigma(g, EXCITED) * amp;
            let ld = l.adjoint();
            let n = ld * l;
            ld * a * l - (n * a + a * n) * Complex64::new(0.5, 0.0)
        })
        .sum()
}

/// The three force combinations F_Δ, F₊, F₋ as atomic operators.
fn force_operators() -> [Op; 3] {
    [
        sigma(GROUND_PLUS, GROUND_PLUS) - sigma(GROUND_MINUS, GROUND_MINUS),
        sigma(EXCITED, GROUND_PLUS) + sigma(EXCITED, GROUND_MINUS),
        sigma(EXCITED, GROUND_PLUS) - sigma(EXCITED, GROUND_MINUS),
    ]
}

pub const FORCE_LABELS: [&str; 3] = ["delta", "plus", "minus"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinDiffusion {
    pub saturation: f64,
    /// Entry `(i, j)` is `D(F_i†, F_j)` over (F_Δ, F₊, F₋).
    pub matrix: [[Complex64; 3]; 3],
    /// `D(F_i, F_i)` without adjoint, for F₊ and F₋.
    pub anomalous: [Complex64; 2],
}

impl EinsteinDiffusion {
    pub fn d_delta_delta(&self) -> f64 {
        self.matrix[0][0].re
    }

    pub fn d_plus_plus(&self) -> f64 {
        self.matrix[1][1].re
    }

    pub fn d_minus_minus(&self) -> f64 {
        self.matrix[2][2].re
    }

    /// Largest modulus among the off-diagonal entries.
    pub fn max_cross(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst = worst.max(self.matrix[i][j].norm());
                }
            }
        }
        worst
    }
}

/// `⟨R(AB) − A R(B) − R(A) B⟩` in the given state.
fn coefficient(a: &Op, b: &Op, state: &Op, gamma0: f64) -> Complex64 {
    let drift = dissipator(&(a * b), gamma0) - a * dissipator(b, gamma0) - dissipator(a, gamma0) * b;
    (state * drift).trace()
}

/// Evaluates the Einstein relation on the pump-only steady state at
/// saturation `s`.
pub fn einstein_diffusion(s: f64, params: &MediumParams) -> Result<EinsteinDiffusion> {
    let rho = steady_state(s, params)?;
    // entries[m][n] = ⟨|m⟩⟨n|⟩ = Tr(ρ |m⟩⟨n|) = ρ[n][m].
    let state = Op::from_fn(|r, c| rho.entries[c][r]);
    let forces = force_operators();
    let mut matrix = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, fi) in forces.iter().enumerate() {
        for (j, fj) in forces.iter().enumerate() {
            matrix[i][j] = coefficient(&fi.adjoint(), fj, &state, params.gamma0);
        }
    }
    let anomalous = [
        coefficient(&forces[1], &forces[1], &state, params.gamma0),
        coefficient(&forces[2], &forces[2], &state, params.gamma0),
    ];
    Ok(EinsteinDiffusion {
        saturation: s,
        matrix,
        anomalous,
    })
}
