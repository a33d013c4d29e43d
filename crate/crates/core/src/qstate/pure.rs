use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{is_finite, BlochVector, TwoQubitState, COMPOSED_TOL, EXACT_TOL, ONE, ZERO};
use crate::{Error, Result};

/// A normalized single-qubit state `amp_up·|↑⟩ + amp_down·|↓⟩`.
///
/// The global phase is stored as given. Compare states with
/// [`states_equal_up_to_phase`], never with raw amplitude equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureState {
    amp_up: Complex64,
    amp_down: Complex64,
}

impl PureState {
    /// Builds a state from amplitudes that are already normalized.
    pub fn new(amp_up: Complex64, amp_down: Complex64) -> Result<Self> {
        if !is_finite(amp_up) || !is_finite(amp_down) {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let norm_sqr = amp_up.norm_sqr() + amp_down.norm_sqr();
        if (norm_sqr - 1.0).abs() > EXACT_TOL {
            return Err(Error::domain(format!(
                "state is not normalized: |a|^2 + |b|^2 = {norm_sqr}"
            )));
        }
        Ok(Self { amp_up, amp_down })
    }

    /// Builds a state by rescaling arbitrary non-zero amplitudes.
    pub fn normalized(amp_up: Complex64, amp_down: Complex64) -> Result<Self> {
        if !is_finite(amp_up) || !is_finite(amp_down) {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let norm = (amp_up.norm_sqr() + amp_down.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        Ok(Self {
            amp_up: amp_up / norm,
            amp_down: amp_down / norm,
        })
    }

    pub(crate) const fn from_parts(amp_up: Complex64, amp_down: Complex64) -> Self {
        Self { amp_up, amp_down }
    }

    /// `|↑⟩`
    pub const fn up() -> Self {
        Self::from_parts(ONE, ZERO)
    }

    /// `|↓⟩`
    pub const fn down() -> Self {
        Self::from_parts(ZERO, ONE)
    }

    /// `|→⟩ = (|↑⟩ + i|↓⟩)/√2`
    pub const fn right() -> Self {
        Self::from_parts(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, FRAC_1_SQRT_2),
        )
    }

    /// `|←⟩ = (|↑⟩ − i|↓⟩)/√2`
    pub const fn left() -> Self {
        Self::from_parts(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, -FRAC_1_SQRT_2),
        )
    }

    /// `|In⟩ = (|↑⟩ + |↓⟩)/√2`
    pub const fn in_state() -> Self {
        Self::from_parts(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        )
    }

    /// `|Out⟩ = (|↑⟩ − |↓⟩)/√2`
    pub const fn out_state() -> Self {
        Self::from_parts(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        )
    }

    pub fn amp_up(&self) -> Complex64 {
        self.amp_up
    }

    pub fn amp_down(&self) -> Complex64 {
        self.amp_down
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.amp_up, self.amp_down]
    }

    /// The inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amp_up.conj() * other.amp_up + self.amp_down.conj() * other.amp_down
    }

    /// `|⟨self|other⟩|²`, the Born probability of finding `other` in `self`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Multiplies both amplitudes by `e^{i·phase}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        Self::from_parts(self.amp_up * factor, self.amp_down * factor)
    }

    pub fn bloch(&self) -> BlochVector {
        let cross = self.amp_up.conj() * self.amp_down;
        BlochVector::new(
            2.0 * cross.re,
            2.0 * cross.im,
            self.amp_up.norm_sqr() - self.amp_down.norm_sqr(),
        )
    }

    /// `|self⟩ ⊗ |other⟩`
    pub fn tensor(&self, other: &PureState) -> TwoQubitState {
        let a = self.amplitudes();
        let b = other.amplitudes();
        TwoQubitState::from_parts([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }
}

/// True iff `|⟨a|b⟩| = 1` within `1e-9`, i.e. the states differ by a global phase.
pub fn states_equal_up_to_phase(a: &PureState, b: &PureState) -> bool {
    (a.inner(b).norm() - 1.0).abs() <= COMPOSED_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn named_states_are_normalized() {
        for s in [
            PureState::up(),
            PureState::down(),
            PureState::right(),
            PureState::left(),
            PureState::in_state(),
            PureState::out_state(),
        ] {
            assert!(PureState::new(s.amp_up(), s.amp_down()).is_ok());
        }
    }

    #[test]
    fn rejects_unnormalized_and_nan() {
        assert!(PureState::new(ONE, ONE).is_err());
        assert!(PureState::new(Complex64::new(f64::NAN, 0.0), ZERO).is_err());
        assert!(PureState::normalized(ZERO, ZERO).is_err());
        let s = PureState::normalized(Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)).unwrap();
        assert!((s.amp_up().re - 0.6).abs() < 1e-15);
        assert!((s.amp_down().im - 0.8).abs() < 1e-15);
    }

    #[test]
    fn phase_equality_examples() {
        let up = PureState::up();
        assert!(states_equal_up_to_phase(
            &up,
            &up.with_global_phase(PI / 3.0)
        ));
        assert!(!states_equal_up_to_phase(&up, &PureState::down()));
        assert!(!states_equal_up_to_phase(
            &PureState::in_state(),
            &PureState::out_state()
        ));
    }

    #[test]
    fn named_bloch_directions() {
        let cases = [
            (PureState::up(), [0.0, 0.0, 1.0]),
            (PureState::down(), [0.0, 0.0, -1.0]),
            (PureState::right(), [0.0, 1.0, 0.0]),
            (PureState::left(), [0.0, -1.0, 0.0]),
            (PureState::in_state(), [1.0, 0.0, 0.0]),
            (PureState::out_state(), [-1.0, 0.0, 0.0]),
        ];
        for (state, want) in cases {
            let r = state.bloch();
            assert!((r.x - want[0]).abs() < 1e-12, "{state:?}");
            assert!((r.y - want[1]).abs() < 1e-12, "{state:?}");
            assert!((r.z - want[2]).abs() < 1e-12, "{state:?}");
        }
    }

    #[test]
    fn tensor_orders_amplitudes_uu_ud_du_dd() {
        let psi = PureState::up().tensor(&PureState::right());
        let amps = psi.amplitudes();
        assert_eq!(amps[0], Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(amps[1], Complex64::new(0.0, FRAC_1_SQRT_2));
        assert_eq!(amps[2], ZERO);
        assert_eq!(amps[3], ZERO);
    }
}
