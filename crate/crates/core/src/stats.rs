//! Estimation and hypothesis testing on measurement records.

use rand::Rng;
use serde::Serialize;
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

use crate::measurement::{joint_probabilities, measure_state};
use crate::qstate::{basis_from_axis, Basis, BlochVector, EigenIndex, PureState, TwoQubitState};
use crate::{Error, Result};

/// Significance level used when a caller does not choose one.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Plus/minus tallies along one axis. Counts may be fractional so that
/// analytic expectations can be fed through the same estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct AxisCounts {
    pub plus: f64,
    pub minus: f64,
}

impl AxisCounts {
    pub fn new(plus: u64, minus: u64) -> Self {
        Self {
            plus: plus as f64,
            minus: minus as f64,
        }
    }

    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }

    pub fn record(&mut self, index: EigenIndex) {
        match index {
            EigenIndex::Plus => self.plus += 1.0,
            EigenIndex::Minus => self.minus += 1.0,
        }
    }

    /// `(n₊ − n₋)/(n₊ + n₋)`, or `None` when the axis was never measured.
    pub fn component(&self) -> Option<f64> {
        let total = self.total();
        (total > 0.0).then(|| (self.plus - self.minus) / total)
    }
}

/// Counts along the `x`, `y` and `z` Bloch axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TomographyCounts {
    pub x: AxisCounts,
    pub y: AxisCounts,
    pub z: AxisCounts,
}

impl TomographyCounts {
    /// The three Pauli measurement bases, in `x, y, z` order.
    pub fn axis_bases() -> [Basis; 3] {
        [Basis::in_out(), Basis::right_left(), Basis::up_down()]
    }

    pub fn axis_mut(&mut self, axis: usize) -> &mut AxisCounts {
        match axis {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    /// Exact expected counts for `shots` measurements per axis of a state with
    /// Bloch vector `r`.
    pub fn expected(r: BlochVector, shots: f64) -> Self {
        let axis = |c: f64| AxisCounts {
            plus: shots * 0.5 * (1.0 + c),
            minus: shots * 0.5 * (1.0 - c),
        };
        Self {
            x: axis(r.x),
            y: axis(r.y),
            z: axis(r.z),
        }
    }

    /// Measures `shots` copies of `state` along each axis.
    pub fn simulate<R: Rng + ?Sized>(state: &PureState, shots: u64, rng: &mut R) -> Self {
        let mut counts = Self::default();
        for (axis, basis) in Self::axis_bases().iter().enumerate() {
            for _ in 0..shots {
                counts
                    .axis_mut(axis)
                    .record(measure_state(state, basis, rng).index);
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TomographyEstimate {
    /// Linear-inversion estimate; may leave the Bloch ball.
    pub raw: BlochVector,
    /// `raw` scaled back to norm ≤ 1 when needed.
    pub physical: BlochVector,
}

/// Linear-inversion tomography. Every axis needs a positive total.
pub fn tomography_estimate(counts: &TomographyCounts) -> Result<TomographyEstimate> {
    let component = |c: &AxisCounts, name: &str| {
        if !(c.plus.is_finite() && c.minus.is_finite() && c.plus >= 0.0 && c.minus >= 0.0) {
            return Err(Error::domain(format!("invalid counts on the {name} axis")));
        }
        c.component()
            .ok_or_else(|| Error::domain(format!("no measurements on the {name} axis")))
    };
    let raw = BlochVector::new(
        component(&counts.x, "x")?,
        component(&counts.y, "y")?,
        component(&counts.z, "z")?,
    );
    Ok(TomographyEstimate {
        raw,
        physical: raw.project_to_ball(),
    })
}

/// Linear inversion that tolerates unmeasured axes, which contribute 0.
///
/// Used when the shot budget is too small to cover all three axes.
pub fn tomography_estimate_partial(counts: &TomographyCounts) -> BlochVector {
    BlochVector::new(
        counts.x.component().unwrap_or(0.0),
        counts.y.component().unwrap_or(0.0),
        counts.z.component().unwrap_or(0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject_at: f64,
}

impl TestResult {
    pub fn rejected(&self) -> bool {
        self.p_value < self.reject_at
    }

    pub fn at_level(self, alpha: f64) -> Self {
        Self {
            reject_at: alpha,
            ..self
        }
    }
}

/// Two-sided `P(|Z| ≥ |z|)` for a standard normal `Z`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / SQRT_2).clamp(0.0, 1.0)
}

/// Pooled two-proportion z-test of `k1/n1` against `k2/n2`.
///
/// When every trial succeeded or every trial failed the pooled variance
/// vanishes; the result is then `z = 0`, `p = 1`.
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TestResult> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("both samples need at least one trial"));
    }
    if k1 > n1 || k2 > n2 {
        return Err(Error::domain("successes cannot exceed trials"));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1f + n2f);
    let variance = pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f);
    if variance <= 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            reject_at: DEFAULT_SIGNIFICANCE,
        });
    }
    let z = (k1 as f64 / n1f - k2 as f64 / n2f) / variance.sqrt();
    Ok(TestResult {
        statistic: z,
        p_value: normal_two_sided_p(z),
        reject_at: DEFAULT_SIGNIFICANCE,
    })
}

/// `½·Σ|p̂ᵢ − q̂ᵢ|` between two histograms over the same support.
pub fn empirical_tv_distance(hist1: &[u64], hist2: &[u64]) -> Result<f64> {
    if hist1.len() != hist2.len() {
        return Err(Error::domain("histograms have different supports"));
    }
    let (t1, t2): (u64, u64) = (hist1.iter().sum(), hist2.iter().sum());
    if t1 == 0 || t2 == 0 {
        return Err(Error::domain("histogram is empty"));
    }
    let total: f64 = hist1
        .iter()
        .zip(hist2)
        .map(|(&a, &b)| (a as f64 / t1 as f64 - b as f64 / t2 as f64).abs())
        .sum();
    Ok((0.5 * total).clamp(0.0, 1.0))
}

/// `S = E(a₁,b₁) + E(a₁,b₂) + E(a₂,b₁) − E(a₂,b₂)`, correlators given in that order.
pub fn chsh_value(correlators: [f64; 4]) -> f64 {
    correlators[0] + correlators[1] + correlators[2] - correlators[3]
}

/// Two measurement settings per side for a CHSH experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a1: Basis,
    pub a2: Basis,
    pub b1: Basis,
    pub b2: Basis,
}

impl ChshSettings {
    /// Axes in the x–z plane at 0, π/2 (Alice) and 5π/4, 3π/4 (Bob), where
    /// the singlet reaches `S = +2√2`.
    pub fn optimal() -> Self {
        Self {
            a1: basis_from_axis(0.0, 0.0).expect("valid"),
            a2: basis_from_axis(0.5 * PI, 0.0).expect("valid"),
            b1: basis_from_axis(0.75 * PI, PI).expect("valid"),
            b2: basis_from_axis(0.75 * PI, 0.0).expect("valid"),
        }
    }

    /// Setting pairs in the order expected by [`chsh_value`].
    pub fn pairs(&self) -> [(Basis, Basis); 4] {
        [
            (self.a1, self.b1),
            (self.a1, self.b2),
            (self.a2, self.b1),
            (self.a2, self.b2),
        ]
    }

    /// Exact correlators of `psi` at these settings.
    pub fn analytic_correlators(&self, psi: &TwoQubitState) -> [f64; 4] {
        self.pairs()
            .map(|(a, b)| joint_probabilities(psi, &a, &b).correlator())
    }
}

/// `S` for each of the 16 deterministic local strategies
/// `(A(a₁), A(a₂), B(b₁), B(b₂)) ∈ {±1}⁴`.
pub fn deterministic_chsh_values() -> Vec<f64> {
    let sign = |bit: u32| if bit == 0 { 1.0 } else { -1.0 };
    (0u32..16)
        .map(|s| {
            let (a1, a2, b1, b2) = (
                sign(s & 1),
                sign((s >> 1) & 1),
                sign((s >> 2) & 1),
                sign((s >> 3) & 1),
            );
            chsh_value([a1 * b1, a1 * b2, a2 * b1, a2 * b2])
        })
        .collect()
}
