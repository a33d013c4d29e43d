//! Exact complex linear algebra for one and two qubits.
//!
//! Conventions: the computational axis is `|↑⟩ = (1, 0)`, `|↓⟩ = (0, 1)`.
//! Bloch coordinates satisfy `ρ = (I + x·X + y·Y + z·Z) / 2` with the usual
//! spin matrices, so `|→⟩ = (|↑⟩ + i|↓⟩)/√2` sits on `+y` and
//! `|In⟩ = (|↑⟩ + |↓⟩)/√2` sits on `+x`.

mod basis;
mod bloch;
mod density;
mod pure;
mod two_qubit;

pub use basis::{basis_from_axis, Basis, EigenIndex};
pub use bloch::{bloch_of, BlochRepresentable, BlochVector};
pub use density::{density_from_bloch, mix, projector, trace_distance, DensityMatrix};
pub use pure::{states_equal_up_to_phase, PureState};
pub use two_qubit::{partial_trace_first_kept, partial_trace_second_kept, TwoQubitState};

pub use num_complex::Complex64;

/// Tolerance for identities that hold exactly in algebra.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for composed or eigenvalue-based quantities.
pub const COMPOSED_TOL: f64 = 1e-9;
/// Lowest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn is_finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}
