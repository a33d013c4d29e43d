//! One function per subcommand. Each pushes its data records and returns
//! the headline metrics for the summary record.

use std::f64::consts::SQRT_2;

use irho_core::ensemble::prepare_uniform_random;
use irho_core::measurement::sample_singlet_correlator;
use irho_core::protocol::{
    accuracy, clone_oracle_trial, expected_bob_density, nosignal_batch, run_channel, run_trials,
    BobDevice, ScenarioConfig,
};
use irho_core::qstate::{
    mix, partial_trace_first_kept, trace_distance, Basis, DensityMatrix, TwoQubitState, EXACT_TOL,
};
use irho_core::seeding::stream;
use irho_core::stats::{
    chsh_value, deterministic_chsh_values, tomography_estimate, ChshSettings, TomographyCounts,
};
use rand::Rng;

use crate::error::Result;
use crate::output::{Record, RunOutput};
use crate::settings::{random_basis, Command, Settings};

pub fn dispatch(settings: &Settings, out: &mut RunOutput) -> Result<Record> {
    match settings.command {
        Command::PartialTrace => partial_trace(out),
        Command::RhoEquality => rho_equality(settings, out),
        Command::Nosignal => nosignal(settings, out),
        Command::FtlDemo => ftl_demo(settings, out),
        Command::FlashDemo => flash_demo(settings, out),
        Command::Chsh => chsh(settings, out),
        Command::Tomography => tomography(settings, out),
    }
}

fn density_record(kind: &'static str, rho: &DensityMatrix) -> Record {
    let e = |r, c| rho.entry(r, c);
    Record::new(kind)
        .with("rho00_re", e(0, 0).re)
        .with("rho01_re", e(0, 1).re)
        .with("rho01_im", e(0, 1).im)
        .with("rho11_re", e(1, 1).re)
}

fn partial_trace(out: &mut RunOutput) -> Result<Record> {
    let rho = partial_trace_first_kept(&TwoQubitState::singlet());
    for row in 0..2 {
        for col in 0..2 {
            let v = rho.entry(row, col);
            out.push(
                Record::new("entry")
                    .with("row_index", row)
                    .with("col_index", col)
                    .with("re", v.re)
                    .with("im", v.im),
            );
        }
    }
    let deviation = rho.max_entry_diff(&DensityMatrix::half_identity())?;
    out.check("reduced singlet equals I/2", deviation <= EXACT_TOL);
    Ok(Record::new("summary")
        .with("max_deviation_from_irho", deviation)
        .with("purity", rho.purity()))
}

fn half_half(basis: &Basis) -> Result<DensityMatrix> {
    Ok(mix(&[(0.5, *basis.plus()), (0.5, *basis.minus())])?)
}

fn rho_equality(s: &Settings, out: &mut RunOutput) -> Result<Record> {
    let irho = DensityMatrix::half_identity();
    let named = [
        ("up-down", Basis::up_down()),
        ("left-right", Basis::right_left()),
        ("in-out", Basis::in_out()),
    ];
    let mut mixtures = Vec::new();
    let mut worst = 0.0f64;
    for (name, basis) in &named {
        let rho = half_half(basis)?;
        let deviation = rho.max_entry_diff(&irho)?;
        worst = worst.max(deviation);
        out.push(
            density_record("mixture", &rho)
                .with("basis", name)
                .with("max_deviation_from_irho", deviation),
        );
        mixtures.push(rho);
    }
    let mut max_distance = 0.0f64;
    for i in 0..named.len() {
        for j in i + 1..named.len() {
            let d = trace_distance(&mixtures[i], &mixtures[j])?;
            max_distance = max_distance.max(d);
            out.push(
                Record::new("distance")
                    .with("first", named[i].0)
                    .with("second", named[j].0)
                    .with("trace_distance", d),
            );
        }
    }
    let mut rng = stream(s.seed, 0);
    let mut random_worst = 0.0f64;
    for _ in 0..s.n {
        let basis = random_basis(rng.random(), rng.random());
        random_worst = random_worst.max(trace_distance(&half_half(&basis)?, &irho)?);
    }
    out.push(
        Record::new("random_sweep")
            .with("bases", s.n)
            .with("max_trace_distance_to_irho", random_worst),
    );
    out.check("named mixtures equal I/2", worst <= EXACT_TOL);
    out.check("named mixtures coincide", max_distance <= EXACT_TOL);
    out.check("random mixtures equal I/2", random_worst <= EXACT_TOL);
    Ok(Record::new("summary")
        .with("max_entry_deviation", worst)
        .with("max_pairwise_trace_distance", max_distance)
        .with("random_bases", s.n)
        .with("random_max_trace_distance", random_worst))
}

fn nosignal(s: &Settings, out: &mut RunOutput) -> Result<Record> {
    let (b0, b1) = (&s.basis0.basis, &s.basis1.basis);
    let analytic = trace_distance(&expected_bob_density(b0)?, &expected_bob_density(b1)?)?;
    out.push(
        Record::new("analytic")
            .with("alice_basis0", &s.basis0.text)
            .with("alice_basis1", &s.basis1.text)
            .with("bob_density_trace_distance", analytic),
    );
    out.check(
        "analytic Bob state independent of Alice's basis",
        analytic <= EXACT_TOL,
    );
    let samples = nosignal_batch(s.trials, s.n as u64, (b0, b1), b0, s.seed)?;
    for (run, sample) in samples.iter().enumerate() {
        out.push(
            Record::from_struct("empirical", sample)
                .with("run", run)
                .with("bob_basis", &s.basis0.text),
        );
    }
    let min_p = samples.iter().map(|x| x.test.p_value).fold(1.0, f64::min);
    let above =
        samples.iter().filter(|x| x.test.p_value > 0.001).count() as f64 / samples.len() as f64;
    Ok(Record::new("summary")
        .with("bob_density_trace_distance", analytic)
        .with("runs", s.trials)
        .with("n_per_arm", s.n)
        .with("min_p_value", min_p)
        .with("fraction_p_above_0_001", above))
}

fn ftl_demo(s: &Settings, out: &mut RunOutput) -> Result<Record> {
    let cfg = ScenarioConfig {
        n_per_block: s.n,
        message: s.message.clone(),
        basis0: s.basis0.basis,
        basis1: s.basis1.basis,
        bob_device: s.bob_device(),
        master_seed: s.seed,
        preparation_mode: s.preparation_mode(),
        source: s.block_source(),
        differential: s.differential,
    };
    let report = run_channel(&cfg)?;
    for block in &report.per_block_statistics {
        out.push(Record::from_struct("block", block));
    }
    if cfg.bob_device == BobDevice::BasisOracle {
        out.check("basis oracle decodes exactly", report.bit_error_rate == 0.0);
    }
    Ok(Record::new("summary")
        .with("sent_message", &report.sent_message)
        .with("decoded_message", &report.decoded_message)
        .with("bit_error_rate", report.bit_error_rate)
        .with("device", report.device_mode)
        .with("differential", report.differential)
        .with("n_per_block", s.n))
}

fn flash_demo(s: &Settings, out: &mut RunOutput) -> Result<Record> {
    let bases = (&s.basis0.basis, &s.basis1.basis);
    let outcomes = run_trials(s.trials, |t| {
        clone_oracle_trial(s.n, s.m_clones, bases, s.seed, t)
    })?;
    for (trial, o) in outcomes.iter().enumerate() {
        out.push(
            Record::from_struct("trial", o)
                .with("trial", trial)
                .with("correct", o.correct()),
        );
    }
    Ok(Record::new("summary")
        .with("accuracy", accuracy(&outcomes))
        .with("trials", s.trials)
        .with("n_per_block", s.n)
        .with("m_clones", s.m_clones))
}

fn chsh(s: &Settings, out: &mut RunOutput) -> Result<Record> {
    let settings = ChshSettings::optimal();
    let analytic = settings.analytic_correlators(&TwoQubitState::singlet());
    let mut sampled = [0.0; 4];
    for (i, (a, b)) in settings.pairs().iter().enumerate() {
        sampled[i] = sample_singlet_correlator(a, b, s.n, &mut stream(s.seed, i as u64))?;
        out.push(
            Record::new("correlator")
                .with("setting", i)
                .with("alice_axis", a.axis())
                .with("bob_axis", b.axis())
                .with("analytic", analytic[i])
                .with("sampled", sampled[i]),
        );
    }
    let classical = deterministic_chsh_values();
    for (strategy, value) in classical.iter().enumerate() {
        out.push(
            Record::new("classical")
                .with("strategy", strategy)
                .with("s", value),
        );
    }
    let (s_analytic, s_sampled) = (chsh_value(analytic), chsh_value(sampled));
    let classical_max = classical.iter().map(|v| v.abs()).fold(0.0, f64::max);
    out.check(
        "analytic S equals 2√2",
        (s_analytic - 2.0 * SQRT_2).abs() <= 1e-9,
    );
    out.check(
        "deterministic strategies obey |S| ≤ 2",
        classical_max <= 2.0,
    );
    Ok(Record::new("summary")
        .with("s_analytic", s_analytic)
        .with("s_sampled", s_sampled)
        .with("samples_per_setting", s.n)
        .with("classical_max_abs_s", classical_max))
}

fn tomography(s: &Settings, out: &mut RunOutput) -> Result<Record> {
    let bound = 5.0 / (s.n as f64).sqrt();
    let mut within = 0usize;
    for run in 0..s.trials {
        let mut rng = stream(s.seed, run as u64);
        let state = *prepare_uniform_random(1, &mut rng)?.particles()[0].state();
        let estimate =
            tomography_estimate(&TomographyCounts::simulate(&state, s.n as u64, &mut rng))?;
        let truth = state.bloch();
        let error = (estimate.raw - truth).norm();
        within += (error <= bound) as usize;
        out.push(
            Record::new("run")
                .with("run", run)
                .with("true_bloch", truth)
                .with("estimate", estimate.raw)
                .with("physical_estimate", estimate.physical)
                .with("error", error),
        );
    }
    let fraction = within as f64 / s.trials as f64;
    out.check(
        "tomography error within 5/√n in at least 99% of runs",
        fraction >= 0.99,
    );
    Ok(Record::new("summary")
        .with("fraction_within_bound", fraction)
        .with("bound", bound)
        .with("shots_per_axis", s.n)
        .with("runs", s.trials))
}
