//! The three-party signalling scenario.
//!
//! A source emits singlet pairs. Alice measures her halves block by block,
//! choosing `basis0` or `basis1` per message bit, which leaves Bob's halves
//! as an `I/2` ensemble built from eigenstates of Alice's basis. Bob then
//! tries to read the bit with one of three receivers:
//!
//! - [`BobDevice::Physical`]: only measurement outcomes are available. The
//!   bit error rate stays at chance level whatever the strategy.
//! - [`BobDevice::BasisOracle`]: reads the sealed preparation labels and
//!   compares preparation axes. Decoding is exact.
//! - [`BobDevice::CloneOracle`]: copies each unknown state many times and
//!   runs tomography on the copies. Accuracy grows with the number of copies.
//!
//! The two oracles are deliberately unphysical. Every random stream is
//! derived from the scenario's master seed, so a report is a pure function
//! of its [`ScenarioConfig`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use crate::ensemble::{empirical_density, prepare_mixed, Ensemble, Preparation, PreparationMode};
use crate::measurement::{measure_pure, measure_state, EntangledPair};
use crate::qstate::{mix, trace_distance, Basis, BlochVector, DensityMatrix, EigenIndex};
use crate::seeding::{stream, LabRng};
use crate::stats::{
    empirical_tv_distance, tomography_estimate_partial, two_proportion_test, TestResult,
    TomographyCounts, DEFAULT_SIGNIFICANCE,
};
use crate::{Error, Result};

/// Two preparation axes closer than this (as lines, in radians) count as equal.
pub const AXIS_TOLERANCE: f64 = 1e-6;

/// Minimum line angle between `basis0` and `basis1`.
const PARALLEL_TOLERANCE: f64 = 1e-9;

const ALICE_STREAM: u64 = 1 << 56;
const REFERENCE_STREAM: u64 = 2 << 56;
const BOB_STREAM: u64 = 3 << 56;
const NOSIGNAL_STREAM: u64 = 4 << 56;
const TRUTH_STREAM: u64 = 5 << 56;

fn rng_for(master_seed: u64, kind: u64, index: usize) -> LabRng {
    stream(master_seed, kind | index as u64)
}

/// A non-empty-or-empty string of bits, written as `0`/`1` characters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// `len` bits with exactly `len / 2` ones, in random order.
    pub fn balanced_random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut bits = vec![false; len];
        bits[..len / 2].fill(true);
        bits.shuffle(rng);
        Self(bits)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hamming(&self, other: &Bits) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::domain("bit strings differ in length"));
        }
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Built-in measurement plans for the physical receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PhysicalStrategy {
    /// Measure the first half of each block in `basis0` and the rest in
    /// `basis1`; report "different" if either arm's plus-fractions differ
    /// under a two-proportion test at level `alpha`.
    Reference { alpha: f64 },
    /// Measure everything in `basis0` and always report "different".
    AlwaysDifferent,
}

impl PhysicalStrategy {
    pub fn reference() -> Self {
        PhysicalStrategy::Reference {
            alpha: DEFAULT_SIGNIFICANCE,
        }
    }

    pub fn build(&self, basis0: Basis, basis1: Basis) -> Box<dyn BobStrategy + Send> {
        match *self {
            PhysicalStrategy::Reference { alpha } => {
                Box::new(ReferenceStrategy::new(basis0, basis1, alpha))
            }
            PhysicalStrategy::AlwaysDifferent => Box::new(AlwaysDifferent { basis: basis0 }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BobDevice {
    Physical { strategy: PhysicalStrategy },
    BasisOracle,
    CloneOracle { m_clones: usize },
}

/// Where Bob's blocks come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSource {
    /// Halves of singlet pairs whose partners Alice measured.
    Entangled,
    /// Alice prepares basis eigenstates herself and sends them.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub n_per_block: usize,
    pub message: Bits,
    pub basis0: Basis,
    pub basis1: Basis,
    pub bob_device: BobDevice,
    pub master_seed: u64,
    /// Only meaningful for [`BlockSource::Direct`]; entangled blocks inherit
    /// Born-rule randomness from Alice's outcomes.
    pub preparation_mode: PreparationMode,
    pub source: BlockSource,
    /// Encode bit `k` as "basis changed since block `k − 1`" instead of
    /// "block `k` uses `basis_k`".
    pub differential: bool,
}

impl ScenarioConfig {
    /// Entangled blocks in the `↑/↓` and `→/←` bases with absolute coding.
    pub fn new(message: Bits, n_per_block: usize, bob_device: BobDevice, master_seed: u64) -> Self {
        Self {
            n_per_block,
            message,
            basis0: Basis::up_down(),
            basis1: Basis::right_left(),
            bob_device,
            master_seed,
            preparation_mode: PreparationMode::Sampled,
            source: BlockSource::Entangled,
            differential: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, message: &str| {
            Err(Error::Config {
                field,
                message: message.to_string(),
            })
        };
        if self.n_per_block == 0 {
            return bad("n_per_block", "must be at least 1");
        }
        if self.message.is_empty() {
            return bad("message", "must contain at least one bit");
        }
        if self.basis0.axis_angle_to(&self.basis1) <= PARALLEL_TOLERANCE {
            return bad("basis1", "must not be parallel to basis0");
        }
        match self.bob_device {
            BobDevice::CloneOracle { m_clones: 0 } => return bad("m_clones", "must be at least 1"),
            BobDevice::Physical {
                strategy: PhysicalStrategy::Reference { alpha },
            } if !(alpha > 0.0 && alpha < 1.0) => {
                return bad("alpha", "significance must lie in (0, 1)")
            }
            _ => {}
        }
        match (self.source, self.preparation_mode) {
            (BlockSource::Entangled, PreparationMode::ExactHalf) => bad(
                "mode",
                "exact-half needs the direct source; entangled blocks are sampled",
            ),
            (BlockSource::Direct, PreparationMode::ExactHalf)
                if !self.n_per_block.is_multiple_of(2) =>
            {
                bad("n_per_block", "exact-half mode needs an even block size")
            }
            _ => Ok(()),
        }
    }

    /// Alice's basis for each message block.
    pub fn alice_bases(&self) -> Vec<Basis> {
        let mut current = false;
        self.message
            .as_slice()
            .iter()
            .map(|&bit| {
                current = if self.differential {
                    current ^ bit
                } else {
                    bit
                };
                if current {
                    self.basis1
                } else {
                    self.basis0
                }
            })
            .collect()
    }
}

/// One block of `n_per_block` particles as seen by both parties.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub block_index: usize,
    pub alice_basis: Basis,
    pub alice_outcomes: Vec<EigenIndex>,
    pub bob_particles: Ensemble,
    pub bob_decision: Option<bool>,
}

impl BlockRecord {
    pub fn alice_outcome_string(&self) -> String {
        self.alice_outcomes
            .iter()
            .map(|o| if o.bit() == 0 { '0' } else { '1' })
            .collect()
    }

    pub fn alice_plus_fraction(&self) -> f64 {
        let plus = self
            .alice_outcomes
            .iter()
            .filter(|&&o| o == EigenIndex::Plus)
            .count();
        plus as f64 / self.alice_outcomes.len() as f64
    }
}

/// Alice measures `n` fresh singlets in `basis`; Bob keeps the partners.
fn entangled_block<R: Rng + ?Sized>(
    block_index: usize,
    basis: &Basis,
    n: usize,
    rng: &mut R,
) -> BlockRecord {
    let mut alice_outcomes = Vec::with_capacity(n);
    let mut particles = Vec::with_capacity(n);
    for seq in 0..n as u64 {
        let mut pair = EntangledPair::singlet(seq);
        let outcome = pair
            .collapse_first(basis, rng)
            .expect("fresh pair is intact");
        alice_outcomes.push(outcome.index);
        particles.push(pair.into_remote().expect("pair was just collapsed"));
    }
    BlockRecord {
        block_index,
        alice_basis: *basis,
        alice_outcomes,
        bob_particles: Ensemble::new(particles, DensityMatrix::half_identity()),
        bob_decision: None,
    }
}

fn direct_block<R: Rng + ?Sized>(
    block_index: usize,
    basis: &Basis,
    n: usize,
    mode: PreparationMode,
    rng: &mut R,
) -> Result<BlockRecord> {
    let bob_particles = prepare_mixed(n, basis, mode, rng)?;
    let alice_outcomes = bob_particles
        .particles()
        .iter()
        .map(|p| {
            p.counterfactual_label()
                .eigen_index()
                .expect("basis preparation")
        })
        .collect();
    Ok(BlockRecord {
        block_index,
        alice_basis: *basis,
        alice_outcomes,
        bob_particles,
        bob_decision: None,
    })
}

fn build_block(
    cfg: &ScenarioConfig,
    block_index: usize,
    basis: &Basis,
    rng: &mut LabRng,
) -> Result<BlockRecord> {
    match cfg.source {
        BlockSource::Entangled => Ok(entangled_block(block_index, basis, cfg.n_per_block, rng)),
        BlockSource::Direct => direct_block(
            block_index,
            basis,
            cfg.n_per_block,
            cfg.preparation_mode,
            rng,
        ),
    }
}

/// Builds one block per message bit, each from its own stream of the
/// master seed.
pub fn run_alice_blocks(cfg: &ScenarioConfig) -> Result<Vec<BlockRecord>> {
    cfg.validate()?;
    cfg.alice_bases()
        .into_par_iter()
        .enumerate()
        .map(|(k, basis)| {
            build_block(
                cfg,
                k,
                &basis,
                &mut rng_for(cfg.master_seed, ALICE_STREAM, k),
            )
        })
        .collect()
}

/// The `basis0` block that accompanies message block `index` and gives Bob
/// something to compare against.
pub fn reference_block(cfg: &ScenarioConfig, index: usize) -> Result<BlockRecord> {
    build_block(
        cfg,
        index,
        &cfg.basis0,
        &mut rng_for(cfg.master_seed, REFERENCE_STREAM, index),
    )
}

/// One measurement made by the physical receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// `0` for the first block of the pair, `1` for the second.
    pub block: usize,
    pub particle: usize,
    pub basis: Basis,
    pub outcome: EigenIndex,
}

/// A physical receiver: it picks a basis per particle (possibly adapting to
/// earlier outcomes) and finally states whether the two blocks were prepared
/// in different bases. It never sees preparation labels.
pub trait BobStrategy {
    fn choose_basis(
        &mut self,
        block: usize,
        particle: usize,
        block_len: usize,
        history: &[Observation],
    ) -> Basis;

    /// `true` means "different bases".
    fn verdict(&mut self, history: &[Observation]) -> bool;
}

#[derive(Debug, Clone)]
pub struct ReferenceStrategy {
    basis0: Basis,
    basis1: Basis,
    alpha: f64,
    last_tests: Vec<TestResult>,
}

impl ReferenceStrategy {
    pub fn new(basis0: Basis, basis1: Basis, alpha: f64) -> Self {
        Self {
            basis0,
            basis1,
            alpha,
            last_tests: Vec::new(),
        }
    }

    /// Tests run by the latest verdict, one per measured arm.
    pub fn last_tests(&self) -> &[TestResult] {
        &self.last_tests
    }
}

impl BobStrategy for ReferenceStrategy {
    fn choose_basis(
        &mut self,
        _block: usize,
        particle: usize,
        block_len: usize,
        _history: &[Observation],
    ) -> Basis {
        if particle < block_len / 2 {
            self.basis0
        } else {
            self.basis1
        }
    }

    fn verdict(&mut self, history: &[Observation]) -> bool {
        self.last_tests.clear();
        for arm in [self.basis0, self.basis1] {
            let mut plus = [0u64; 2];
            let mut total = [0u64; 2];
            for obs in history.iter().filter(|o| o.basis == arm) {
                total[obs.block] += 1;
                plus[obs.block] += (obs.outcome == EigenIndex::Plus) as u64;
            }
            if total[0] == 0 || total[1] == 0 {
                continue;
            }
            let test = two_proportion_test(plus[0], total[0], plus[1], total[1])
                .expect("counts are consistent")
                .at_level(self.alpha);
            self.last_tests.push(test);
        }
        self.last_tests.iter().any(TestResult::rejected)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AlwaysDifferent {
    basis: Basis,
}

impl BobStrategy for AlwaysDifferent {
    fn choose_basis(&mut self, _: usize, _: usize, _: usize, _: &[Observation]) -> Basis {
        self.basis
    }

    fn verdict(&mut self, _: &[Observation]) -> bool {
        true
    }
}

/// Drives `strategy` over both blocks, measuring every particle once in the
/// basis it asks for. Particles are left collapsed.
pub fn bob_physical_decide<R: Rng + ?Sized>(
    first: &mut BlockRecord,
    second: &mut BlockRecord,
    strategy: &mut dyn BobStrategy,
    rng: &mut R,
) -> bool {
    let mut history = Vec::with_capacity(first.bob_particles.len() + second.bob_particles.len());
    for (block, record) in [first, second].into_iter().enumerate() {
        let len = record.bob_particles.len();
        for (i, particle) in record.bob_particles.particles_mut().iter_mut().enumerate() {
            let basis = strategy.choose_basis(block, i, len, &history);
            let outcome = measure_pure(particle, &basis, rng).index;
            history.push(Observation {
                block,
                particle: i,
                basis,
                outcome,
            });
        }
    }
    strategy.verdict(&history)
}

/// Preparation axis shared by every label of a block.
fn block_axis(block: &BlockRecord) -> Result<BlochVector> {
    let mut axis: Option<BlochVector> = None;
    for p in block.bob_particles.particles() {
        let label = p.counterfactual_label();
        let current = match &label.preparation {
            Preparation::Eigenstate { basis, .. } => basis.axis(),
            Preparation::UniformRandom => {
                return Err(Error::Unsupported(format!(
                    "block {} holds uniform-random particles, which have no preparation basis",
                    block.block_index
                )))
            }
        };
        match axis {
            None => axis = Some(current),
            Some(a) if a.line_angle_to(&current) > AXIS_TOLERANCE => {
                return Err(Error::MalformedBlock(format!(
                    "block {} mixes preparation axes (particle {})",
                    block.block_index, label.sequence_no
                )))
            }
            Some(_) => {}
        }
    }
    axis.ok_or_else(|| Error::MalformedBlock(format!("block {} is empty", block.block_index)))
}

/// The hypothetical basis-distinguishing device: `true` iff the two blocks
/// were prepared along different axes.
pub fn bob_basis_oracle_decide(first: &BlockRecord, second: &BlockRecord) -> Result<bool> {
    Ok(block_axis(first)?.line_angle_to(&block_axis(second)?) > AXIS_TOLERANCE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloneDecision {
    /// `false` for the first reference axis, `true` for the second.
    pub bit: bool,
    /// Per particle, `|r̂·axis₀| − |r̂·axis₁|`; positive favours the first axis.
    pub margins: Vec<f64>,
    /// Particles classified to each axis; ties abstain.
    pub votes: [usize; 2],
    /// The vote was tied and a fair coin decided.
    pub tie_broken: bool,
}

impl CloneDecision {
    pub fn mean_margin(&self) -> f64 {
        self.margins.iter().sum::<f64>() / self.margins.len() as f64
    }
}

/// The cloning device: copies each particle's unknown state `m_clones`
/// times, measures the copies round-robin along `x, y, z`, and classifies the
/// estimated Bloch vector to the nearer reference axis. The block's basis is
/// the majority vote.
pub fn bob_clone_oracle_decide<R: Rng + ?Sized>(
    block: &BlockRecord,
    m_clones: usize,
    reference_axes: (&Basis, &Basis),
    rng: &mut R,
) -> Result<CloneDecision> {
    if m_clones == 0 {
        return Err(Error::domain("m_clones must be at least 1"));
    }
    if block.bob_particles.is_empty() {
        return Err(Error::MalformedBlock(format!(
            "block {} is empty",
            block.block_index
        )));
    }
    let axis_bases = TomographyCounts::axis_bases();
    let (axis0, axis1) = (reference_axes.0.axis(), reference_axes.1.axis());
    let mut margins = Vec::with_capacity(block.bob_particles.len());
    let mut votes = [0usize; 2];
    for particle in block.bob_particles.particles() {
        let mut counts = TomographyCounts::default();
        for (j, copy) in particle.counterfactual_clones(m_clones).enumerate() {
            let axis = j % 3;
            counts
                .axis_mut(axis)
                .record(measure_state(&copy, &axis_bases[axis], rng).index);
        }
        let r = tomography_estimate_partial(&counts);
        let margin = r.dot(&axis0).abs() - r.dot(&axis1).abs();
        if margin > 0.0 {
            votes[0] += 1;
        } else if margin < 0.0 {
            votes[1] += 1;
        }
        margins.push(margin);
    }
    let (bit, tie_broken) = match votes[0].cmp(&votes[1]) {
        std::cmp::Ordering::Greater => (false, false),
        std::cmp::Ordering::Less => (true, false),
        std::cmp::Ordering::Equal => (rng.random::<f64>() < 0.5, true),
    };
    Ok(CloneDecision {
        bit,
        margins,
        votes,
        tie_broken,
    })
}

/// Per-block row of a [`ChannelReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub block_index: usize,
    pub sent_bit: u8,
    pub decoded_bit: u8,
    pub alice_axis: BlochVector,
    pub alice_outcomes: String,
    pub alice_plus_fraction: f64,
    /// Trace distance between the empirical state of Bob's block (before he
    /// measures) and `I/2`.
    pub bob_state_distance_to_irho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clone_votes: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clone_mean_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub sent_message: Bits,
    pub decoded_message: Bits,
    pub bit_error_rate: f64,
    pub per_block_statistics: Vec<BlockSummary>,
    pub device_mode: BobDevice,
    pub differential: bool,
}

/// Runs the whole scenario and decodes the message on Bob's side.
///
/// With absolute coding every message block is paired with a fresh
/// reference block; with differential coding consecutive blocks are
/// compared, starting from one reference block.
pub fn run_channel(cfg: &ScenarioConfig) -> Result<ChannelReport> {
    let mut blocks = run_alice_blocks(cfg)?;
    let distances = blocks
        .iter()
        .map(|b| {
            trace_distance(
                &empirical_density(&b.bob_particles)?,
                &DensityMatrix::half_identity(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let outputs: Vec<(bool, Option<CloneDecision>)> = if cfg.differential {
        decode_differential(cfg, &mut blocks)?
    } else {
        blocks
            .par_iter_mut()
            .map(|block| decode_absolute(cfg, block))
            .collect::<Result<Vec<_>>>()?
    };

    let decoded = Bits::new(outputs.iter().map(|(bit, _)| *bit).collect());
    let errors = decoded.hamming(&cfg.message)?;
    let per_block_statistics = blocks
        .iter_mut()
        .zip(outputs)
        .zip(distances)
        .zip(cfg.message.as_slice())
        .map(|(((block, (bit, clone)), distance), &sent)| {
            block.bob_decision = Some(bit);
            BlockSummary {
                block_index: block.block_index,
                sent_bit: sent as u8,
                decoded_bit: bit as u8,
                alice_axis: block.alice_basis.axis(),
                alice_outcomes: block.alice_outcome_string(),
                alice_plus_fraction: block.alice_plus_fraction(),
                bob_state_distance_to_irho: distance,
                clone_votes: clone.as_ref().map(|c| c.votes),
                clone_mean_margin: clone.as_ref().map(CloneDecision::mean_margin),
            }
        })
        .collect();
    Ok(ChannelReport {
        sent_message: cfg.message.clone(),
        decoded_message: decoded,
        bit_error_rate: errors as f64 / cfg.message.len() as f64,
        per_block_statistics,
        device_mode: cfg.bob_device,
        differential: cfg.differential,
    })
}

fn decode_absolute(
    cfg: &ScenarioConfig,
    block: &mut BlockRecord,
) -> Result<(bool, Option<CloneDecision>)> {
    let k = block.block_index;
    let mut rng = rng_for(cfg.master_seed, BOB_STREAM, k);
    match cfg.bob_device {
        BobDevice::BasisOracle => Ok((
            bob_basis_oracle_decide(&reference_block(cfg, k)?, block)?,
            None,
        )),
        BobDevice::Physical { strategy } => {
            let mut reference = reference_block(cfg, k)?;
            let mut bob = strategy.build(cfg.basis0, cfg.basis1);
            Ok((
                bob_physical_decide(&mut reference, block, bob.as_mut(), &mut rng),
                None,
            ))
        }
        BobDevice::CloneOracle { m_clones } => {
            let decision =
                bob_clone_oracle_decide(block, m_clones, (&cfg.basis0, &cfg.basis1), &mut rng)?;
            Ok((decision.bit, Some(decision)))
        }
    }
}

fn decode_differential(
    cfg: &ScenarioConfig,
    blocks: &mut [BlockRecord],
) -> Result<Vec<(bool, Option<CloneDecision>)>> {
    let mut reference = reference_block(cfg, 0)?;
    let mut previous_class = false;
    let mut out = Vec::with_capacity(blocks.len());
    for k in 0..blocks.len() {
        let mut rng = rng_for(cfg.master_seed, BOB_STREAM, k);
        let (head, tail) = blocks.split_at_mut(k);
        let current = &mut tail[0];
        let previous = match head.last_mut() {
            Some(b) => b,
            None => &mut reference,
        };
        let result = match cfg.bob_device {
            BobDevice::BasisOracle => (bob_basis_oracle_decide(previous, current)?, None),
            BobDevice::Physical { strategy } => {
                let mut bob = strategy.build(cfg.basis0, cfg.basis1);
                (
                    bob_physical_decide(previous, current, bob.as_mut(), &mut rng),
                    None,
                )
            }
            BobDevice::CloneOracle { m_clones } => {
                let decision = bob_clone_oracle_decide(
                    current,
                    m_clones,
                    (&cfg.basis0, &cfg.basis1),
                    &mut rng,
                )?;
                let changed = decision.bit != previous_class;
                previous_class = decision.bit;
                (changed, Some(decision))
            }
        };
        out.push(result);
    }
    Ok(out)
}

/// Bob's expected single-particle state once Alice has measured her half of
/// a singlet in `alice_basis`, averaged over her outcomes.
pub fn expected_bob_density(alice_basis: &Basis) -> Result<DensityMatrix> {
    let branches = EntangledPair::singlet(0).conditional_remote_states(alice_basis)?;
    mix(&branches)
}

/// Bob's raw outcome counts in a fixed basis, for each of Alice's two basis
/// choices, with a test of equal plus-fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignalSample {
    pub n_per_arm: u64,
    pub plus_counts: [u64; 2],
    pub test: TestResult,
    pub tv_distance: f64,
}

/// For each of Alice's bases, collapses `n_per_arm` singlets and has Bob
/// measure every partner in `bob_basis`. `run` selects independent streams.
pub fn nosignal_experiment(
    n_per_arm: u64,
    alice_bases: (&Basis, &Basis),
    bob_basis: &Basis,
    master_seed: u64,
    run: usize,
) -> Result<NoSignalSample> {
    if n_per_arm == 0 {
        return Err(Error::domain("each arm needs at least one pair"));
    }
    let mut plus_counts = [0u64; 2];
    for (arm, alice_basis) in [alice_bases.0, alice_bases.1].into_iter().enumerate() {
        let mut rng = rng_for(master_seed, NOSIGNAL_STREAM, 2 * run + arm);
        for seq in 0..n_per_arm {
            let mut pair = EntangledPair::singlet(seq);
            pair.collapse_first(alice_basis, &mut rng)?;
            if pair.measure_second(bob_basis, &mut rng)?.index == EigenIndex::Plus {
                plus_counts[arm] += 1;
            }
        }
    }
    let test = two_proportion_test(plus_counts[0], n_per_arm, plus_counts[1], n_per_arm)?;
    let tv_distance = empirical_tv_distance(
        &[plus_counts[0], n_per_arm - plus_counts[0]],
        &[plus_counts[1], n_per_arm - plus_counts[1]],
    )?;
    Ok(NoSignalSample {
        n_per_arm,
        plus_counts,
        test,
        tv_distance,
    })
}

/// `runs` independent [`nosignal_experiment`]s, in parallel, ordered by run.
pub fn nosignal_batch(
    runs: usize,
    n_per_arm: u64,
    alice_bases: (&Basis, &Basis),
    bob_basis: &Basis,
    master_seed: u64,
) -> Result<Vec<NoSignalSample>> {
    (0..runs)
        .into_par_iter()
        .map(|run| nosignal_experiment(n_per_arm, alice_bases, bob_basis, master_seed, run))
        .collect()
}

/// Ground truth and receiver output of one distinguishing trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    /// `true` when the tested block used `basis1`.
    pub truth: bool,
    pub decision: bool,
}

impl TrialOutcome {
    pub fn correct(&self) -> bool {
        self.truth == self.decision
    }
}

fn trial_truth(master_seed: u64, trial: usize) -> bool {
    rng_for(master_seed, TRUTH_STREAM, trial).random::<f64>() < 0.5
}

/// One physical same-or-different trial: a `basis0` reference block and a
/// second block whose basis is a fair coin.
pub fn physical_distinguishing_trial(
    n: usize,
    bases: (&Basis, &Basis),
    strategy: PhysicalStrategy,
    master_seed: u64,
    trial: usize,
) -> Result<TrialOutcome> {
    if n == 0 {
        return Err(Error::domain("blocks need at least one particle"));
    }
    let truth = trial_truth(master_seed, trial);
    let tested = if truth { bases.1 } else { bases.0 };
    let mut reference = entangled_block(
        trial,
        bases.0,
        n,
        &mut rng_for(master_seed, REFERENCE_STREAM, trial),
    );
    let mut block = entangled_block(
        trial,
        tested,
        n,
        &mut rng_for(master_seed, ALICE_STREAM, trial),
    );
    let mut bob = strategy.build(*bases.0, *bases.1);
    let decision = bob_physical_decide(
        &mut reference,
        &mut block,
        bob.as_mut(),
        &mut rng_for(master_seed, BOB_STREAM, trial),
    );
    Ok(TrialOutcome { truth, decision })
}

/// One cloning-oracle trial on a single block whose basis is a fair coin.
pub fn clone_oracle_trial(
    n: usize,
    m_clones: usize,
    bases: (&Basis, &Basis),
    master_seed: u64,
    trial: usize,
) -> Result<TrialOutcome> {
    if n == 0 {
        return Err(Error::domain("blocks need at least one particle"));
    }
    let truth = trial_truth(master_seed, trial);
    let tested = if truth { bases.1 } else { bases.0 };
    let block = entangled_block(
        trial,
        tested,
        n,
        &mut rng_for(master_seed, ALICE_STREAM, trial),
    );
    let decision = bob_clone_oracle_decide(
        &block,
        m_clones,
        bases,
        &mut rng_for(master_seed, BOB_STREAM, trial),
    )?;
    Ok(TrialOutcome {
        truth,
        decision: decision.bit,
    })
}

/// Runs `count` independent trials in parallel; results are ordered by trial.
pub fn run_trials<F>(count: usize, trial: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(usize) -> Result<TrialOutcome> + Sync + Send,
{
    (0..count).into_par_iter().map(trial).collect()
}

/// Fraction of correct decisions.
pub fn accuracy(outcomes: &[TrialOutcome]) -> f64 {
    outcomes.iter().filter(|o| o.correct()).count() as f64 / outcomes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{prepare_uniform_random, Particle};
    use crate::qstate::states_equal_up_to_phase;

    fn oracle_cfg(message: &str, n: usize) -> ScenarioConfig {
        ScenarioConfig::new(message.parse().unwrap(), n, BobDevice::BasisOracle, 7)
    }

    #[test]
    fn bits_parse_and_display() {
        let b: Bits = "1011".parse().unwrap();
        assert_eq!(b.to_string(), "1011");
        assert!("10x1".parse::<Bits>().is_err());
        assert_eq!(b.hamming(&"0011".parse().unwrap()).unwrap(), 1);
        let balanced = Bits::balanced_random(200, &mut stream(1, 0));
        assert_eq!(balanced.as_slice().iter().filter(|&&x| x).count(), 100);
    }

    #[test]
    fn config_validation() {
        assert!(oracle_cfg("01", 4).validate().is_ok());
        assert!(matches!(
            oracle_cfg("01", 0).validate(),
            Err(Error::Config {
                field: "n_per_block",
                ..
            })
        ));
        assert!(matches!(
            oracle_cfg("", 4).validate(),
            Err(Error::Config {
                field: "message",
                ..
            })
        ));
        let mut cfg = oracle_cfg("01", 4);
        cfg.basis1 = Basis::from_bloch_axis(BlochVector::new(0.0, 0.0, -1.0)).unwrap();
        assert!(matches!(
            cfg.validate(),
            Err(Error::Config {
                field: "basis1",
                ..
            })
        ));
        let mut cfg = oracle_cfg("01", 4);
        cfg.bob_device = BobDevice::CloneOracle { m_clones: 0 };
        assert!(cfg.validate().is_err());
        let mut cfg = oracle_cfg("01", 4);
        cfg.preparation_mode = PreparationMode::ExactHalf;
        assert!(cfg.validate().is_err());
        cfg.source = BlockSource::Direct;
        assert!(cfg.validate().is_ok());
        cfg.n_per_block = 3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn blocks_carry_alice_bases() {
        let blocks = run_alice_blocks(&oracle_cfg("01", 4)).unwrap();
        assert_eq!(blocks.len(), 2);
        for (block, basis) in blocks.iter().zip([Basis::up_down(), Basis::right_left()]) {
            assert_eq!(block.alice_outcomes.len(), 4);
            for p in block.bob_particles.particles() {
                assert_eq!(p.counterfactual_label().basis(), Some(&basis));
            }
        }
    }

    #[test]
    fn single_pair_block() {
        let blocks = run_alice_blocks(&oracle_cfg("0", 1)).unwrap();
        let block = &blocks[0];
        let bob = &block.bob_particles.particles()[0];
        let want = Basis::up_down()
            .state(block.alice_outcomes[0].opposite())
            .to_owned();
        assert!(states_equal_up_to_phase(bob.state(), &want));
    }

    #[test]
    fn differential_bases_toggle_on_ones() {
        let mut cfg = oracle_cfg("0110", 2);
        cfg.differential = true;
        let axes: Vec<_> = cfg
            .alice_bases()
            .iter()
            .map(|b| b.axis().to_array())
            .collect();
        let (ud, rl) = (
            Basis::up_down().axis().to_array(),
            Basis::right_left().axis().to_array(),
        );
        assert_eq!(axes, vec![ud, rl, ud, ud]);
    }

    #[test]
    fn basis_oracle_examples() {
        let cfg = oracle_cfg("01", 1);
        let blocks = run_alice_blocks(&cfg).unwrap();
        assert!(bob_basis_oracle_decide(&blocks[0], &blocks[1]).unwrap());
        let same = run_alice_blocks(&oracle_cfg("00", 1)).unwrap();
        assert!(!bob_basis_oracle_decide(&same[0], &same[1]).unwrap());
    }

    #[test]
    fn basis_oracle_rejects_malformed_blocks() {
        let good = run_alice_blocks(&oracle_cfg("0", 2)).unwrap().remove(0);
        let mixed = BlockRecord {
            bob_particles: Ensemble::new(
                vec![
                    Particle::prepared(&Basis::up_down(), EigenIndex::Plus, 0),
                    Particle::prepared(&Basis::in_out(), EigenIndex::Plus, 1),
                ],
                DensityMatrix::half_identity(),
            ),
            ..good.clone()
        };
        assert!(matches!(
            bob_basis_oracle_decide(&good, &mixed),
            Err(Error::MalformedBlock(_))
        ));
        let uniform = BlockRecord {
            bob_particles: prepare_uniform_random(2, &mut stream(1, 0)).unwrap(),
            ..good.clone()
        };
        assert!(matches!(
            bob_basis_oracle_decide(&uniform, &good),
            Err(Error::Unsupported(_))
        ));
        // An eigenstate and its opposite share an axis.
        let flipped = BlockRecord {
            bob_particles: Ensemble::new(
                vec![
                    Particle::prepared(&Basis::up_down(), EigenIndex::Plus, 0),
                    Particle::prepared(&Basis::up_down(), EigenIndex::Minus, 1),
                ],
                DensityMatrix::half_identity(),
            ),
            ..good.clone()
        };
        assert!(!bob_basis_oracle_decide(&good, &flipped).unwrap());
    }

    #[test]
    fn oracle_channel_is_exact() {
        let report = run_channel(&oracle_cfg("1011", 8)).unwrap();
        assert_eq!(report.decoded_message.to_string(), "1011");
        assert_eq!(report.bit_error_rate, 0.0);
        let mut cfg = oracle_cfg("1011", 8);
        cfg.differential = true;
        let report = run_channel(&cfg).unwrap();
        assert_eq!(report.decoded_message.to_string(), "1011");
    }

    #[test]
    fn direct_exact_half_blocks_are_exactly_irho() {
        let mut cfg = oracle_cfg("01", 4);
        cfg.source = BlockSource::Direct;
        cfg.preparation_mode = PreparationMode::ExactHalf;
        let report = run_channel(&cfg).unwrap();
        assert_eq!(report.bit_error_rate, 0.0);
        for row in &report.per_block_statistics {
            assert!(row.bob_state_distance_to_irho <= 1e-12);
            assert_eq!(row.alice_plus_fraction, 0.5);
        }
    }

    #[test]
    fn always_different_is_right_half_the_time() {
        let bases = (&Basis::up_down(), &Basis::right_left());
        let outcomes = run_trials(2000, |t| {
            physical_distinguishing_trial(4, bases, PhysicalStrategy::AlwaysDifferent, 3, t)
        })
        .unwrap();
        assert!(outcomes.iter().all(|o| o.decision));
        let acc = accuracy(&outcomes);
        assert!((acc - 0.5).abs() < 0.05, "accuracy {acc}");
    }

    #[test]
    fn clone_oracle_with_many_copies_finds_up_state() {
        let block = BlockRecord {
            block_index: 0,
            alice_basis: Basis::up_down(),
            alice_outcomes: vec![EigenIndex::Minus],
            bob_particles: Ensemble::new(
                vec![Particle::prepared(&Basis::up_down(), EigenIndex::Plus, 0)],
                DensityMatrix::half_identity(),
            ),
            bob_decision: None,
        };
        let d = bob_clone_oracle_decide(
            &block,
            10_000,
            (&Basis::up_down(), &Basis::right_left()),
            &mut stream(2, 0),
        )
        .unwrap();
        assert!(!d.bit);
        assert_eq!(d.votes, [1, 0]);
        assert!(d.margins[0] > 0.9);
        assert!(bob_clone_oracle_decide(
            &block,
            0,
            (&Basis::up_down(), &Basis::right_left()),
            &mut stream(2, 0)
        )
        .is_err());
    }

    #[test]
    fn expected_bob_state_ignores_alice_basis() {
        let a = expected_bob_density(&Basis::up_down()).unwrap();
        let b = expected_bob_density(&Basis::right_left()).unwrap();
        assert!(trace_distance(&a, &b).unwrap() <= 1e-12);
        assert!(a.max_entry_diff(&DensityMatrix::half_identity()).unwrap() <= 1e-12);
    }

    #[test]
    fn nosignal_sample_is_consistent() {
        let s = nosignal_experiment(
            2000,
            (&Basis::up_down(), &Basis::right_left()),
            &Basis::up_down(),
            5,
            0,
        )
        .unwrap();
        assert!(s.plus_counts.iter().all(|&k| k <= 2000));
        assert!(s.test.p_value > 0.0 && s.test.p_value <= 1.0);
        assert!(nosignal_experiment(
            0,
            (&Basis::up_down(), &Basis::right_left()),
            &Basis::up_down(),
            5,
            0
        )
        .is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let mut cfg = oracle_cfg("10", 6);
        cfg.bob_device = BobDevice::Physical {
            strategy: PhysicalStrategy::reference(),
        };
        assert_eq!(run_channel(&cfg).unwrap(), run_channel(&cfg).unwrap());
        cfg.bob_device = BobDevice::CloneOracle { m_clones: 30 };
        assert_eq!(run_channel(&cfg).unwrap(), run_channel(&cfg).unwrap());
    }
}
