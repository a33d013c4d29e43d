use serde::Serialize;
use std::ops::{Neg, Sub};

use super::{DensityMatrix, PureState, COMPOSED_TOL};
use crate::Result;

/// A point of the Bloch ball. Norm 1 is a pure state, norm 0 is `I/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn scale(&self, factor: f64) -> BlochVector {
        BlochVector::new(self.x * factor, self.y * factor, self.z * factor)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Angle between two vectors, in `[0, π]`.
    pub fn angle_to(&self, other: &BlochVector) -> f64 {
        self.cross(other).norm().atan2(self.dot(other))
    }

    /// Angle between the lines spanned by two vectors, in `[0, π/2]`.
    ///
    /// A basis and its flipped counterpart share one line, so this is the
    /// quantity that decides whether two preparation axes coincide.
    pub fn line_angle_to(&self, other: &BlochVector) -> f64 {
        self.cross(other).norm().atan2(self.dot(other).abs())
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - 1.0).abs() <= COMPOSED_TOL
    }

    /// The nearest point of the Bloch ball.
    pub fn project_to_ball(&self) -> BlochVector {
        let n = self.norm();
        if n > 1.0 {
            self.scale(1.0 / n)
        } else {
            *self
        }
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;

    fn neg(self) -> BlochVector {
        BlochVector::new(-self.x, -self.y, -self.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;

    fn sub(self, rhs: BlochVector) -> BlochVector {
        BlochVector::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// States with a single-qubit Bloch representation.
pub trait BlochRepresentable {
    fn to_bloch(&self) -> Result<BlochVector>;
}

impl BlochRepresentable for PureState {
    fn to_bloch(&self) -> Result<BlochVector> {
        Ok(self.bloch())
    }
}

impl BlochRepresentable for DensityMatrix {
    fn to_bloch(&self) -> Result<BlochVector> {
        self.bloch()
    }
}

/// Bloch vector of a pure state or of a 2×2 density matrix.
pub fn bloch_of<S: BlochRepresentable + ?Sized>(state: &S) -> Result<BlochVector> {
    state.to_bloch()
}
