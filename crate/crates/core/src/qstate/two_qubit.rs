use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{density::DensityMatrix, is_finite, EXACT_TOL, ZERO};
use crate::{Error, Result};

/// `Σ Ψ_ab |ab⟩` with amplitudes ordered `uu, ud, du, dd` (index `2a + b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        if !amps.iter().all(|&c| is_finite(c)) {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let norm_sqr: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > EXACT_TOL {
            return Err(Error::domain(format!(
                "two-qubit state is not normalized: Σ|Ψ|² = {norm_sqr}"
            )));
        }
        Ok(Self { amps })
    }

    pub(crate) const fn from_parts(amps: [Complex64; 4]) -> Self {
        Self { amps }
    }

    /// `(|↑↓⟩ − |↓↑⟩)/√2`
    pub const fn singlet() -> Self {
        Self::from_parts([
            ZERO,
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
            ZERO,
        ])
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amps
    }

    /// `Ψ_ab` with `a, b ∈ {0 = u, 1 = d}`.
    pub fn amp(&self, a: usize, b: usize) -> Complex64 {
        self.amps[2 * a + b]
    }

    /// The 4×4 projector `|Ψ⟩⟨Ψ|`.
    pub fn density(&self) -> DensityMatrix {
        let mut entries = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                entries.push(self.amps[i] * self.amps[j].conj());
            }
        }
        DensityMatrix::from_entries_unchecked(4, entries).expect("4×4 shape")
    }
}

/// Reduced state of the first particle: `ρ_{aa'} = Σ_b Ψ_ab Ψ*_{a'b}`.
pub fn partial_trace_first_kept(psi: &TwoQubitState) -> DensityMatrix {
    let mut entries = vec![ZERO; 4];
    for a in 0..2 {
        for a2 in 0..2 {
            entries[2 * a + a2] = (0..2).map(|b| psi.amp(a, b) * psi.amp(a2, b).conj()).sum();
        }
    }
    DensityMatrix::from_entries_unchecked(2, entries).expect("2×2 shape")
}

/// Reduced state of the second particle: `ρ_{bb'} = Σ_a Ψ_ab Ψ*_{ab'}`.
pub fn partial_trace_second_kept(psi: &TwoQubitState) -> DensityMatrix {
    let mut entries = vec![ZERO; 4];
    for b in 0..2 {
        for b2 in 0..2 {
            entries[2 * b + b2] = (0..2).map(|a| psi.amp(a, b) * psi.amp(a, b2).conj()).sum();
        }
    }
    DensityMatrix::from_entries_unchecked(2, entries).expect("2×2 shape")
}
