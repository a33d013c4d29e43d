//! Projective measurement of single particles and of singlet pairs.
//!
//! Two routes to the statistics of a pair are provided and must agree:
//! [`joint_probabilities`] applies the Born rule to the joint state directly,
//! while [`EntangledPair`] measures the first particle, collapses the partner
//! to the opposite eigenstate of the same basis, and measures the partner
//! afterwards.
//!
//! Every sampled outcome consumes exactly one uniform draw, compared against
//! the plus probability.

use rand::Rng;
use serde::Serialize;

use crate::ensemble::Particle;
use crate::qstate::{
    partial_trace_first_kept, Basis, DensityMatrix, EigenIndex, PureState, TwoQubitState,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub index: EigenIndex,
    pub collapsed_state: PureState,
}

fn draw<R: Rng + ?Sized>(p_plus: f64, rng: &mut R) -> EigenIndex {
    if rng.random::<f64>() < p_plus {
        EigenIndex::Plus
    } else {
        EigenIndex::Minus
    }
}

/// Born-rule measurement of a bare state.
pub fn measure_state<R: Rng + ?Sized>(state: &PureState, basis: &Basis, rng: &mut R) -> Outcome {
    let index = draw(basis.plus_probability(state), rng);
    Outcome {
        index,
        collapsed_state: *basis.state(index),
    }
}

/// Measures `particle` in `basis` and leaves it in the observed eigenstate.
pub fn measure_pure<R: Rng + ?Sized>(
    particle: &mut Particle,
    basis: &Basis,
    rng: &mut R,
) -> Outcome {
    let outcome = measure_state(particle.state(), basis, rng);
    particle.collapse_to(outcome.collapsed_state);
    outcome
}

/// Outcome probabilities for a two-particle measurement, indexed
/// `[first][second]` with `0 = plus`, `1 = minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointDistribution {
    pub probs: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn get(&self, first: EigenIndex, second: EigenIndex) -> f64 {
        self.probs[first.bit() as usize][second.bit() as usize]
    }

    /// `(P(++), P(+−), P(−+), P(−−))`
    pub fn as_array(&self) -> [f64; 4] {
        let p = self.probs;
        [p[0][0], p[0][1], p[1][0], p[1][1]]
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// `(P(first = +), P(first = −))`
    pub fn first_marginal(&self) -> [f64; 2] {
        let p = self.probs;
        [p[0][0] + p[0][1], p[1][0] + p[1][1]]
    }

    /// `(P(second = +), P(second = −))`
    pub fn second_marginal(&self) -> [f64; 2] {
        let p = self.probs;
        [p[0][0] + p[1][0], p[0][1] + p[1][1]]
    }

    /// Probability that the two outcomes differ.
    pub fn anticorrelation(&self) -> f64 {
        self.probs[0][1] + self.probs[1][0]
    }

    /// `E = Σ s_a·s_b·P(a, b)` with signs `±1`.
    pub fn correlator(&self) -> f64 {
        let p = self.probs;
        p[0][0] - p[0][1] - p[1][0] + p[1][1]
    }

    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `P(a, b) = |⟨a ⊗ b|ψ⟩|²`
pub fn joint_probabilities(
    psi: &TwoQubitState,
    basis_a: &Basis,
    basis_b: &Basis,
) -> JointDistribution {
    let mut probs = [[0.0; 2]; 2];
    for (i, a) in [EigenIndex::Plus, EigenIndex::Minus]
        .into_iter()
        .enumerate()
    {
        for (j, b) in [EigenIndex::Plus, EigenIndex::Minus]
            .into_iter()
            .enumerate()
        {
            let bra = basis_a.state(a).tensor(basis_b.state(b)).amplitudes();
            let amp: num_complex::Complex64 = bra
                .iter()
                .zip(psi.amplitudes())
                .map(|(x, y)| x.conj() * y)
                .sum();
            probs[i][j] = amp.norm_sqr();
        }
    }
    JointDistribution { probs }
}

/// `⟨plus|ρ|plus⟩` for a single-qubit density matrix.
fn plus_probability_mixed(rho: &DensityMatrix, basis: &Basis) -> f64 {
    let v = basis.plus().amplitudes();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += v[i].conj() * rho.entry(i, j) * v[j];
        }
    }
    acc.re.clamp(0.0, 1.0)
}

/// Lifecycle of a singlet pair under the sequential API.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum PairStatus {
    Intact,
    /// The first particle has been measured; `remote` is the partner's pending state.
    Collapsed {
        first: Outcome,
        basis: Basis,
        remote: Particle,
    },
    BothMeasured {
        first: Outcome,
        second: Outcome,
    },
}

/// A singlet pair whose first particle must be measured before the second.
///
/// The pair is a mutable state machine and is meant to be owned by one
/// context at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledPair {
    joint: TwoQubitState,
    sequence_no: u64,
    status: PairStatus,
}

impl EntangledPair {
    pub fn singlet(sequence_no: u64) -> Self {
        Self {
            joint: TwoQubitState::singlet(),
            sequence_no,
            status: PairStatus::Intact,
        }
    }

    pub fn joint(&self) -> &TwoQubitState {
        &self.joint
    }

    pub fn status(&self) -> &PairStatus {
        &self.status
    }

    /// The partner particle, once the first particle has been measured.
    pub fn remote(&self) -> Option<&Particle> {
        match &self.status {
            PairStatus::Collapsed { remote, .. } => Some(remote),
            _ => None,
        }
    }

    /// Probability that the first particle is found in `basis.plus`, from the
    /// reduced state of the first particle.
    fn first_plus_probability(&self, basis: &Basis) -> f64 {
        plus_probability_mixed(&partial_trace_first_kept(&self.joint), basis)
    }

    /// Partner state left behind by a first-particle outcome: the opposite
    /// eigenstate of the same basis, labeled with that basis.
    fn remote_after(&self, basis: &Basis, first: EigenIndex) -> Particle {
        Particle::prepared(basis, first.opposite(), self.sequence_no)
    }

    /// Measures the first particle and collapses the partner.
    pub fn collapse_first<R: Rng + ?Sized>(
        &mut self,
        basis: &Basis,
        rng: &mut R,
    ) -> Result<Outcome> {
        if self.status != PairStatus::Intact {
            return Err(Error::state(
                "the first particle of this pair was already measured",
            ));
        }
        let index = draw(self.first_plus_probability(basis), rng);
        let first = Outcome {
            index,
            collapsed_state: *basis.state(index),
        };
        self.status = PairStatus::Collapsed {
            first,
            basis: *basis,
            remote: self.remote_after(basis, index),
        };
        Ok(first)
    }

    /// Born-rule measurement of the partner's pending state.
    pub fn measure_second<R: Rng + ?Sized>(
        &mut self,
        basis: &Basis,
        rng: &mut R,
    ) -> Result<Outcome> {
        match &mut self.status {
            PairStatus::Collapsed { first, remote, .. } => {
                let first = *first;
                let second = measure_pure(remote, basis, rng);
                self.status = PairStatus::BothMeasured { first, second };
                Ok(second)
            }
            PairStatus::Intact => Err(Error::state(
                "the second particle cannot be measured before the first",
            )),
            PairStatus::BothMeasured { .. } => {
                Err(Error::state("both particles were already measured"))
            }
        }
    }

    /// Hands the collapsed partner particle over to its receiver.
    pub fn into_remote(self) -> Result<Particle> {
        match self.status {
            PairStatus::Collapsed { remote, .. } => Ok(remote),
            _ => Err(Error::state(
                "only a collapsed, unmeasured partner can be handed over",
            )),
        }
    }

    /// The two branches `(probability, partner state)` that measuring the
    /// first particle in `basis` would produce.
    pub fn conditional_remote_states(&self, basis: &Basis) -> Result<[(f64, PureState); 2]> {
        if self.status != PairStatus::Intact {
            return Err(Error::state("conditional states need an intact pair"));
        }
        let p_plus = self.first_plus_probability(basis);
        Ok([
            (p_plus, *self.remote_after(basis, EigenIndex::Plus).state()),
            (
                1.0 - p_plus,
                *self.remote_after(basis, EigenIndex::Minus).state(),
            ),
        ])
    }

    /// Exact distribution of the sequential procedure `collapse_first` then
    /// `measure_second`, without sampling.
    pub fn sequential_probabilities(
        &self,
        basis_a: &Basis,
        basis_b: &Basis,
    ) -> Result<JointDistribution> {
        if self.status != PairStatus::Intact {
            return Err(Error::state("sequential probabilities need an intact pair"));
        }
        let p_plus = self.first_plus_probability(basis_a);
        let mut probs = [[0.0; 2]; 2];
        for (i, a) in [EigenIndex::Plus, EigenIndex::Minus]
            .into_iter()
            .enumerate()
        {
            let p_a = if i == 0 { p_plus } else { 1.0 - p_plus };
            let remote = self.remote_after(basis_a, a);
            let p_b_plus = basis_b.plus_probability(remote.state());
            probs[i][0] = p_a * p_b_plus;
            probs[i][1] = p_a * (1.0 - p_b_plus);
        }
        Ok(JointDistribution { probs })
    }
}

/// Monte-Carlo estimate of the singlet correlator `E(a, b)` from `samples`
/// fresh pairs measured sequentially.
pub fn sample_singlet_correlator<R: Rng + ?Sized>(
    basis_a: &Basis,
    basis_b: &Basis,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let mut sum = 0.0;
    for seq in 0..samples as u64 {
        let mut pair = EntangledPair::singlet(seq);
        let a = pair.collapse_first(basis_a, rng)?;
        let b = pair.measure_second(basis_b, rng)?;
        sum += a.index.sign() * b.index.sign();
    }
    Ok(sum / samples as f64)
}
