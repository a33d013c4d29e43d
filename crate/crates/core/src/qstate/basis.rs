use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::fmt;

use super::{BlochVector, PureState};
use crate::{Error, Result};

/// Which of the two eigenstates of a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenIndex {
    Plus,
    Minus,
}

impl EigenIndex {
    pub fn opposite(self) -> Self {
        match self {
            EigenIndex::Plus => EigenIndex::Minus,
            EigenIndex::Minus => EigenIndex::Plus,
        }
    }

    /// `0` for plus, `1` for minus.
    pub fn bit(self) -> u8 {
        match self {
            EigenIndex::Plus => 0,
            EigenIndex::Minus => 1,
        }
    }

    /// `+1` for plus, `−1` for minus.
    pub fn sign(self) -> f64 {
        match self {
            EigenIndex::Plus => 1.0,
            EigenIndex::Minus => -1.0,
        }
    }
}

impl fmt::Display for EigenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EigenIndex::Plus => "+",
            EigenIndex::Minus => "-",
        })
    }
}

/// An orthonormal measurement basis, equivalently an axis of the Bloch sphere.
///
/// `plus = cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩` points along `axis`;
/// `minus = sin(θ/2)|↑⟩ − e^{iφ} cos(θ/2)|↓⟩` points along `−axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Basis {
    #[serde(skip)]
    plus: PureState,
    #[serde(skip)]
    minus: PureState,
    theta: f64,
    phi: f64,
    axis: BlochVector,
}

/// Builds the basis whose plus state has polar angle `theta ∈ [0, π]` and
/// azimuth `phi ∈ [0, 2π)`.
pub fn basis_from_axis(theta: f64, phi: f64) -> Result<Basis> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(format!("theta = {theta} is outside [0, π]")));
    }
    if !(0.0..TAU).contains(&phi) {
        return Err(Error::domain(format!("phi = {phi} is outside [0, 2π)")));
    }
    let (s, c) = (0.5 * theta).sin_cos();
    let phase = Complex64::from_polar(1.0, phi);
    let plus = PureState::from_parts(Complex64::new(c, 0.0), phase * s);
    let minus = PureState::from_parts(Complex64::new(s, 0.0), -phase * c);
    let axis = BlochVector::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    );
    Ok(Basis {
        plus,
        minus,
        theta,
        phi,
        axis,
    })
}

impl Basis {
    /// The `↑/↓` basis (polar axis).
    pub fn up_down() -> Self {
        basis_from_axis(0.0, 0.0).expect("valid angles")
    }

    /// The `→/←` basis, `|→⟩ = (|↑⟩ + i|↓⟩)/√2`.
    pub fn right_left() -> Self {
        basis_from_axis(0.5 * PI, 0.5 * PI).expect("valid angles")
    }

    /// The `In/Out` basis, `|In⟩ = (|↑⟩ + |↓⟩)/√2`.
    pub fn in_out() -> Self {
        basis_from_axis(0.5 * PI, 0.0).expect("valid angles")
    }

    /// The basis whose plus state points along the (non-zero) vector `v`.
    pub fn from_bloch_axis(v: BlochVector) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::domain("basis axis must be a finite non-zero vector"));
        }
        let theta = (v.z / n).clamp(-1.0, 1.0).acos();
        let mut phi = v.y.atan2(v.x);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        basis_from_axis(theta, phi)
    }

    pub fn plus(&self) -> &PureState {
        &self.plus
    }

    pub fn minus(&self) -> &PureState {
        &self.minus
    }

    pub fn state(&self, index: EigenIndex) -> &PureState {
        match index {
            EigenIndex::Plus => &self.plus,
            EigenIndex::Minus => &self.minus,
        }
    }

    pub fn axis(&self) -> BlochVector {
        self.axis
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Angle between the two bases' axes as lines, in `[0, π/2]`.
    pub fn axis_angle_to(&self, other: &Basis) -> f64 {
        self.axis.line_angle_to(&other.axis)
    }

    /// Probability of the plus outcome when measuring `state` in this basis.
    pub fn plus_probability(&self, state: &PureState) -> f64 {
        self.plus.overlap(state).clamp(0.0, 1.0)
    }
}
