use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use super::{is_finite, BlochVector, PureState, EXACT_TOL, PSD_TOL, ZERO};
use crate::{Error, Result};

/// A Hermitian, unit-trace, positive semidefinite `d×d` matrix with `d ∈ {2, 4}`.
///
/// Entries are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates and wraps row-major entries.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let rho = Self::from_entries_unchecked(dim, entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps entries after checking only the shape.
    pub(crate) fn from_entries_unchecked(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::domain(format!("unsupported dimension {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    /// `I/d`, the maximally mixed state.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self::from_entries_unchecked(dim, entries)
    }

    /// The single-qubit maximally mixed state `I/2`.
    pub fn half_identity() -> Self {
        Self::maximally_mixed(2).expect("dimension 2 is supported")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim, &self.entries)
    }

    /// `tr(ρ²)`; 1 for pure states, `1/d` for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        // ρ is Hermitian, so tr(ρ²) = Σ |ρ_ij|².
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Checks the Hermitian, unit-trace and PSD invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.entries.iter().all(|&c| is_finite(c)) {
            return Err(Error::domain("density matrix has non-finite entries"));
        }
        for i in 0..self.dim {
            for j in i..self.dim {
                let gap = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                if gap > EXACT_TOL {
                    return Err(Error::domain(format!(
                        "not Hermitian at ({i}, {j}): deviation {gap:e}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > EXACT_TOL {
            return Err(Error::domain(format!("trace is {tr}, expected 1")));
        }
        let lowest = self.eigenvalues()[0];
        if lowest < -PSD_TOL {
            return Err(Error::domain(format!(
                "not positive semidefinite: eigenvalue {lowest:e}"
            )));
        }
        Ok(())
    }

    /// Bloch vector of a single-qubit density matrix.
    pub fn bloch(&self) -> Result<BlochVector> {
        if self.dim != 2 {
            return Err(Error::domain("Bloch vectors exist only for 2×2 matrices"));
        }
        let lower = self.entry(1, 0);
        Ok(BlochVector::new(
            2.0 * lower.re,
            2.0 * lower.im,
            self.entry(0, 0).re - self.entry(1, 1).re,
        ))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_entry_diff(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::domain("dimension mismatch"));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `(1/N)·Σ |ψ⟩⟨ψ|` over a non-empty set of pure states.
    ///
    /// The sum is divided by its own trace, which equals `N` up to rounding,
    /// so long averages keep unit trace to machine precision.
    pub(crate) fn average_of_projectors<'a, I>(states: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a PureState>,
    {
        let (mut uu, mut dd) = (0.0, 0.0);
        let mut ud = ZERO;
        let mut count = 0usize;
        for s in states {
            let [a, b] = s.amplitudes();
            uu += a.norm_sqr();
            dd += b.norm_sqr();
            ud += a * b.conj();
            count += 1;
        }
        if count == 0 {
            return Err(Error::domain("cannot average an empty set of states"));
        }
        let total = uu + dd;
        let ud = ud / total;
        Self::from_entries_unchecked(
            2,
            vec![
                Complex64::new(uu / total, 0.0),
                ud,
                ud.conj(),
                Complex64::new(dd / total, 0.0),
            ],
        )
    }
}

/// Eigenvalues (ascending) of a Hermitian matrix given row-major.
///
/// The 2×2 case uses the closed form
/// `λ = (a+d)/2 ± √(((a−d)/2)² + |b|²)`.
pub(crate) fn hermitian_eigenvalues(dim: usize, m: &[Complex64]) -> Vec<f64> {
    match dim {
        2 => {
            let (a, d) = (m[0].re, m[3].re);
            let mean = 0.5 * (a + d);
            let half_gap = 0.5 * (a - d);
            let radius = half_gap.hypot(m[1].norm());
            vec![mean - radius, mean + radius]
        }
        4 => {
            let matrix = Matrix4::from_row_slice(m);
            let mut values: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
            values.sort_by(f64::total_cmp);
            values
        }
        _ => unreachable!("DensityMatrix only admits dimensions 2 and 4"),
    }
}

/// `|ψ⟩⟨ψ|`
pub fn projector(state: &PureState) -> DensityMatrix {
    let [a, b] = state.amplitudes();
    DensityMatrix {
        dim: 2,
        entries: vec![a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()],
    }
}

/// The incoherent mixture `Σ wᵢ·|ψᵢ⟩⟨ψᵢ|`.
pub fn mix(components: &[(f64, PureState)]) -> Result<DensityMatrix> {
    if components.is_empty() {
        return Err(Error::domain("mixture needs at least one component"));
    }
    if let Some((w, _)) = components
        .iter()
        .find(|(w, _)| !(w.is_finite() && *w >= 0.0))
    {
        return Err(Error::domain(format!("invalid mixture weight {w}")));
    }
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > EXACT_TOL {
        return Err(Error::domain(format!(
            "mixture weights sum to {total}, expected 1"
        )));
    }
    let mut entries = vec![ZERO; 4];
    for (w, state) in components {
        for (acc, p) in entries.iter_mut().zip(projector(state).entries) {
            *acc += p * *w;
        }
    }
    DensityMatrix::from_entries(2, entries)
}

/// `(I + r·σ)/2`, the inverse of [`DensityMatrix::bloch`].
pub fn density_from_bloch(r: BlochVector) -> Result<DensityMatrix> {
    let n = r.norm();
    if !n.is_finite() || n > 1.0 + EXACT_TOL {
        return Err(Error::domain(format!(
            "Bloch vector of norm {n} is not a physical state"
        )));
    }
    Ok(DensityMatrix {
        dim: 2,
        entries: vec![
            Complex64::new(0.5 * (1.0 + r.z), 0.0),
            Complex64::new(0.5 * r.x, -0.5 * r.y),
            Complex64::new(0.5 * r.x, 0.5 * r.y),
            Complex64::new(0.5 * (1.0 - r.z), 0.0),
        ],
    })
}

/// `½·Σ|λᵢ(ρ − σ)|`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim != sigma.dim {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            rho.dim, sigma.dim
        )));
    }
    let diff: Vec<Complex64> = rho
        .entries
        .iter()
        .zip(&sigma.entries)
        .map(|(a, b)| a - b)
        .collect();
    let total: f64 = hermitian_eigenvalues(rho.dim, &diff)
        .iter()
        .map(|l| l.abs())
        .sum();
    Ok((0.5 * total).clamp(0.0, 1.0))
}
