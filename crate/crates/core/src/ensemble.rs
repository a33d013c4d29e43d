//! Labeled particle ensembles realizing different preparations of `I/2`.
//!
//! Each [`Particle`] carries its physically accessible [`PureState`] and a
//! sealed [`PreparationLabel`] recording how it was made. Measurement code
//! works with the state only. The label is reachable solely through
//! [`Particle::counterfactual_label`], which exists for the oracle receivers
//! in [`crate::protocol`]: no physical apparatus can read it.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::qstate::{Basis, BlochVector, DensityMatrix, EigenIndex, PureState};
use crate::{Error, Result};

/// How an individual particle was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preparation {
    /// Drawn from the rotation-invariant distribution over pure states.
    UniformRandom,
    /// The `index` eigenstate of `basis`.
    Eigenstate { basis: Basis, index: EigenIndex },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreparationLabel {
    pub preparation: Preparation,
    pub sequence_no: u64,
}

impl PreparationLabel {
    /// The preparation basis, if the particle was made as a basis eigenstate.
    pub fn basis(&self) -> Option<&Basis> {
        match &self.preparation {
            Preparation::Eigenstate { basis, .. } => Some(basis),
            Preparation::UniformRandom => None,
        }
    }

    pub fn eigen_index(&self) -> Option<EigenIndex> {
        match self.preparation {
            Preparation::Eigenstate { index, .. } => Some(index),
            Preparation::UniformRandom => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    state: PureState,
    label: PreparationLabel,
}

impl Particle {
    /// The `index` eigenstate of `basis`, labeled accordingly.
    pub fn prepared(basis: &Basis, index: EigenIndex, sequence_no: u64) -> Self {
        Self {
            state: *basis.state(index),
            label: PreparationLabel {
                preparation: Preparation::Eigenstate {
                    basis: *basis,
                    index,
                },
                sequence_no,
            },
        }
    }

    /// An arbitrary pure state labeled as a uniform-random draw.
    pub fn uniform(state: PureState, sequence_no: u64) -> Self {
        Self {
            state,
            label: PreparationLabel {
                preparation: Preparation::UniformRandom,
                sequence_no,
            },
        }
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn sequence_no(&self) -> u64 {
        self.label.sequence_no
    }

    /// Reads the sealed preparation record.
    ///
    /// Physically impossible: reserved for the oracle receivers and for
    /// tests that audit them.
    pub fn counterfactual_label(&self) -> &PreparationLabel {
        &self.label
    }

    /// Returns `count` perfect copies of this particle's unknown state.
    ///
    /// Forbidden by the no-cloning theorem; used only by the cloning oracle.
    pub fn counterfactual_clones(&self, count: usize) -> impl Iterator<Item = PureState> + '_ {
        std::iter::repeat_n(self.state, count)
    }

    /// Replaces the state after a projective measurement. The preparation
    /// record is kept.
    pub(crate) fn collapse_to(&mut self, state: PureState) {
        self.state = state;
    }
}

/// Serializable view of a particle; the label appears only on request.
#[derive(Debug, Clone, Serialize)]
pub struct ParticleRecord {
    pub sequence_no: u64,
    pub bloch: BlochVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<PreparationLabel>,
}

/// How a basis ensemble realizes the 50/50 split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreparationMode {
    /// One fair coin per particle.
    Sampled,
    /// Exactly `n/2` of each eigenstate in shuffled order.
    ExactHalf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    particles: Vec<Particle>,
    declared_density: DensityMatrix,
}

impl Ensemble {
    pub(crate) fn new(particles: Vec<Particle>, declared_density: DensityMatrix) -> Self {
        Self {
            particles,
            declared_density,
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub(crate) fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// The ensemble-level state the preparation procedure promises.
    pub fn declared_density(&self) -> &DensityMatrix {
        &self.declared_density
    }

    pub fn records(&self, include_labels: bool) -> Vec<ParticleRecord> {
        self.particles
            .iter()
            .map(|p| ParticleRecord {
                sequence_no: p.label.sequence_no,
                bloch: p.state.bloch(),
                label: include_labels.then_some(p.label),
            })
            .collect()
    }
}

/// `n` particles in uniformly random pure states.
///
/// Each particle consumes two draws: `z = 2u − 1` (inverse CDF of the
/// uniform measure on the sphere) and then `φ = 2πv`.
pub fn prepare_uniform_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::domain("ensemble size must be at least 1"));
    }
    let particles = (0..n as u64)
        .map(|seq| {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let phi = TAU * rng.random::<f64>();
            let up = (0.5 * (1.0 + z)).sqrt();
            let down = Complex64::from_polar((0.5 * (1.0 - z)).sqrt(), phi);
            Particle::uniform(PureState::from_parts(Complex64::new(up, 0.0), down), seq)
        })
        .collect();
    Ok(Ensemble::new(particles, DensityMatrix::half_identity()))
}

/// `n` eigenstates of `basis` split 50/50 between plus and minus.
pub fn prepare_mixed<R: Rng + ?Sized>(
    n: usize,
    basis: &Basis,
    mode: PreparationMode,
    rng: &mut R,
) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::domain("ensemble size must be at least 1"));
    }
    let indices: Vec<EigenIndex> = match mode {
        PreparationMode::Sampled => (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.5 {
                    EigenIndex::Plus
                } else {
                    EigenIndex::Minus
                }
            })
            .collect(),
        PreparationMode::ExactHalf => {
            if !n.is_multiple_of(2) {
                return Err(Error::domain(format!(
                    "exact-half mode needs an even size, got {n}"
                )));
            }
            let mut v = vec![EigenIndex::Plus; n / 2];
            v.extend(std::iter::repeat_n(EigenIndex::Minus, n / 2));
            v.shuffle(rng);
            v
        }
    };
    let particles = indices
        .into_iter()
        .zip(0u64..)
        .map(|(index, seq)| Particle::prepared(basis, index, seq))
        .collect();
    Ok(Ensemble::new(particles, DensityMatrix::half_identity()))
}

/// `(1/N)·Σ |ψᵢ⟩⟨ψᵢ|` over the ensemble's current states.
pub fn empirical_density(e: &Ensemble) -> Result<DensityMatrix> {
    if e.is_empty() {
        return Err(Error::domain("empirical density of an empty ensemble"));
    }
    DensityMatrix::average_of_projectors(e.particles.iter().map(|p| &p.state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{projector, states_equal_up_to_phase, trace_distance};
    use crate::seeding::stream;

    #[test]
    fn uniform_random_mean_is_near_origin() {
        let e = prepare_uniform_random(100_000, &mut stream(11, 0)).unwrap();
        let mean = e
            .particles()
            .iter()
            .fold(BlochVector::ORIGIN, |acc, p| {
                let r = p.state().bloch();
                BlochVector::new(acc.x + r.x, acc.y + r.y, acc.z + r.z)
            })
            .scale(1.0 / e.len() as f64);
        assert!(mean.norm() <= 0.02, "mean Bloch vector {mean:?}");
        assert!(e.particles().iter().all(|p| p.state().bloch().is_pure()));
    }

    #[test]
    fn single_uniform_particle() {
        let e = prepare_uniform_random(1, &mut stream(1, 0)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.declared_density(), &DensityMatrix::half_identity());
        assert!(e.particles()[0].counterfactual_label().basis().is_none());
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(prepare_uniform_random(0, &mut stream(1, 0)).is_err());
        assert!(prepare_mixed(
            0,
            &Basis::up_down(),
            PreparationMode::Sampled,
            &mut stream(1, 0)
        )
        .is_err());
    }

    #[test]
    fn exact_half_needs_even_size() {
        let err = prepare_mixed(
            5,
            &Basis::up_down(),
            PreparationMode::ExactHalf,
            &mut stream(1, 0),
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn equal_seeds_give_identical_ensembles() {
        let a = prepare_uniform_random(64, &mut stream(5, 2)).unwrap();
        let b = prepare_uniform_random(64, &mut stream(5, 2)).unwrap();
        assert_eq!(a, b);
        let basis = Basis::in_out();
        let c = prepare_mixed(64, &basis, PreparationMode::ExactHalf, &mut stream(5, 2)).unwrap();
        let d = prepare_mixed(64, &basis, PreparationMode::ExactHalf, &mut stream(5, 2)).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn exact_half_blocks_of_four() {
        let ud = prepare_mixed(
            4,
            &Basis::up_down(),
            PreparationMode::ExactHalf,
            &mut stream(3, 0),
        )
        .unwrap();
        let rl = prepare_mixed(
            4,
            &Basis::right_left(),
            PreparationMode::ExactHalf,
            &mut stream(3, 1),
        )
        .unwrap();
        for p in ud.particles() {
            assert!(
                states_equal_up_to_phase(p.state(), &PureState::up())
                    || states_equal_up_to_phase(p.state(), &PureState::down())
            );
        }
        let rho_ud = empirical_density(&ud).unwrap();
        let rho_rl = empirical_density(&rl).unwrap();
        assert!(
            rho_ud
                .max_entry_diff(&DensityMatrix::half_identity())
                .unwrap()
                <= 1e-12
        );
        assert!(trace_distance(&rho_ud, &rho_rl).unwrap() <= 1e-12);
    }

    #[test]
    fn in_out_exact_half_density() {
        let e = prepare_mixed(
            1000,
            &Basis::in_out(),
            PreparationMode::ExactHalf,
            &mut stream(9, 0),
        )
        .unwrap();
        let rho = empirical_density(&e).unwrap();
        assert!(rho.max_entry_diff(&DensityMatrix::half_identity()).unwrap() <= 1e-12);
    }

    #[test]
    fn sampled_plus_fraction_is_fair() {
        let e = prepare_mixed(
            100_000,
            &Basis::right_left(),
            PreparationMode::Sampled,
            &mut stream(4, 0),
        )
        .unwrap();
        let plus = e
            .particles()
            .iter()
            .filter(|p| p.counterfactual_label().eigen_index() == Some(EigenIndex::Plus))
            .count();
        let frac = plus as f64 / e.len() as f64;
        assert!((frac - 0.5).abs() <= 0.01, "plus fraction {frac}");
    }

    #[test]
    fn labels_match_states() {
        let e = prepare_mixed(
            200,
            &Basis::in_out(),
            PreparationMode::Sampled,
            &mut stream(8, 0),
        )
        .unwrap();
        for p in e.particles() {
            let label = p.counterfactual_label();
            let basis = label.basis().unwrap();
            assert!(states_equal_up_to_phase(
                p.state(),
                basis.state(label.eigen_index().unwrap())
            ));
        }
    }

    #[test]
    fn single_particle_density_is_its_projector() {
        let e = Ensemble::new(
            vec![Particle::prepared(&Basis::up_down(), EigenIndex::Plus, 0)],
            DensityMatrix::half_identity(),
        );
        let rho = empirical_density(&e).unwrap();
        assert!(rho.max_entry_diff(&projector(&PureState::up())).unwrap() <= 1e-12);
        let empty = Ensemble::new(vec![], DensityMatrix::half_identity());
        assert!(empirical_density(&empty).is_err());
    }

    #[test]
    fn records_hide_labels_unless_requested() {
        let e = prepare_mixed(
            2,
            &Basis::up_down(),
            PreparationMode::ExactHalf,
            &mut stream(1, 0),
        )
        .unwrap();
        assert!(e.records(false).iter().all(|r| r.label.is_none()));
        assert!(e.records(true).iter().all(|r| r.label.is_some()));
    }
}
