//! Acceptance gate: one test per release criterion. Each prints a verdict
//! line on the raw stderr fd (so it shows up even under libtest capture)
//! before asserting, and the dip criteria drive the exact configs shipped
//! in configs/, so a green gate also certifies those files.
//!
//! The five sweep criteria simulate 128 instances at n = 13 per point and
//! cost minutes each on one worker; everything else runs in seconds.

mod common;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use quenchprobe::harness::binfmt::{read_observable_grid, read_r2_grid};
use quenchprobe::harness::run::{OBSERVABLES_FILE, R2_FILE, SWEEP_FILE};
use quenchprobe::harness::{point_dir_name, run_sweep, ExperimentConfig, SweepOutcome};
use quenchprobe::model::{annni_terms, cluster_field_terms, cluster_terms, tfim_terms};
use quenchprobe::{
    build_initial_state, build_r2_grid, entanglement_entropy, evolve, expand_terms, locate_dip,
    mean_r2, pauli_expectation, r_squared, sample_inputs, train_readout, Axis, Background,
    Encoding, EngineParams, ModelSpec, Propagator, QuenchConfig, R2Grid, StateVector, SubsetSpec,
    SweepResult,
};

/// Writes the verdict directly to fd 2, bypassing test-harness capture.
fn verdict(pass: bool, label: &str, details: &str) -> bool {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[acceptance] {label}: {status} — {details}");
    let _ = err.flush();
    pass
}

fn fmt_f64s(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

struct SweepFixture {
    config: ExperimentConfig,
    dir: PathBuf,
    outcome: SweepOutcome,
    elapsed_s: f64,
}

/// Runs one shipped config into a fresh scratch directory.
fn run_config_sweep(config_name: &str, scratch_name: &str) -> SweepFixture {
    let config_path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(config_name);
    let config = ExperimentConfig::load(&config_path).expect("shipped config parses");
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance")
        .join(scratch_name);
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("stale scratch removed");
    }
    let start = Instant::now();
    let outcome = run_sweep(&config, &dir, false).expect("sweep completes");
    SweepFixture {
        config,
        dir,
        outcome,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

static TFIM: OnceLock<SweepFixture> = OnceLock::new();

/// The transverse-field sweep shared by the dip, robustness, and
/// determinism criteria.
fn tfim_fixture() -> &'static SweepFixture {
    TFIM.get_or_init(|| run_config_sweep("tfim_sweep.toml", "tfim"))
}

#[test]
fn c01_krylov_evolution_matches_dense_exponential() {
    let params = EngineParams::default();
    let cases = [
        ("tfim", tfim_terms(8, 1.0, 1.0)),
        ("annni", annni_terms(8, 1.0, 0.5, 1.6)),
        ("cluster", cluster_terms(8, 1.0, 1.0)),
        ("cluster_field", cluster_field_terms(8, 0.1, 0.45, 0.45)),
    ];
    let mut worst = f64::INFINITY;
    for (k, (_, terms)) in cases.iter().enumerate() {
        let psi = common::random_state(8, 0xACC0 + k as u64);
        let stepped = evolve(terms, &psi, &params, 1.0).unwrap();
        let h = common::dense_hamiltonian(8, terms);
        let exact = common::dense_evolve(&h, psi.amplitudes(), 1.0);
        let fidelity = common::overlap_abs(stepped.amplitudes(), &exact).powi(2);
        worst = worst.min(fidelity);
    }
    let details = format!(
        "worst fidelity deficit {:.2e} over 4 models, n = 8, t = 1, dt = {} (limit 1e-8)",
        1.0 - worst,
        params.dt
    );
    assert!(
        verdict(worst >= 1.0 - 1e-8, "C01 krylov vs dense exponential", &details),
        "{details}"
    );
}

#[test]
fn c02_norm_and_energy_conserved_at_probe_scale() {
    let x_quench = QuenchConfig::new(Background::AllUp, Encoding::XBasis).unwrap();
    let y_quench = QuenchConfig::new(Background::AllPlusY, Encoding::YBasis).unwrap();
    let cases = [
        (ModelSpec::tfim(13, 1.0, 1.0).unwrap(), x_quench),
        (ModelSpec::annni(13, 1.0, 0.5, 1.6).unwrap(), x_quench),
        (ModelSpec::cluster(13, 1.0, 1.0).unwrap(), x_quench),
        (
            ModelSpec::cluster_field(13, 0.1, 0.45, 0.45).unwrap(),
            y_quench,
        ),
    ];
    let params = EngineParams::default();
    let mut worst_norm = 0.0f64;
    let mut worst_energy = 0.0f64;
    for (spec, quench) in cases {
        let psi = build_initial_state(0.37, 13, &quench).unwrap();
        let mut prop = Propagator::new(&expand_terms(&spec), psi, params).unwrap();
        let e0 = prop.energy();
        let scale = e0.abs().max(1.0);
        for _ in 0..20 {
            prop.advance(50).unwrap();
            worst_norm = worst_norm.max((prop.state().norm() - 1.0).abs());
            worst_energy = worst_energy.max((prop.energy() - e0).abs() / scale);
        }
    }
    let details = format!(
        "n = 13, t <= 5, 4 models: norm drift {worst_norm:.2e} (limit 1e-10), relative energy drift {worst_energy:.2e} (limit 1e-8)"
    );
    assert!(
        verdict(
            worst_norm <= 1e-10 && worst_energy <= 1e-8,
            "C02 norm and energy conservation",
            &details
        ),
        "{details}"
    );
}

#[test]
fn c03_readout_and_r2_match_closed_forms() {
    let mut worst_w = 0.0f64;
    for k in 0..50u64 {
        let len = 8 + (k as usize % 40);
        let xs: Vec<f64> = common::random_unit_reals(len, 0x3A11 + k)
            .iter()
            .map(|u| 2.0 * u - 0.7)
            .collect();
        let ss = common::random_unit_reals(len, 0x3B22 + k);
        let trained = train_readout(&xs, &ss);
        let (w_o, w_c) = common::normal_equations(&xs, &ss);
        worst_w = worst_w
            .max((trained.w_o - w_o).abs())
            .max((trained.w_c - w_c).abs());
    }
    let mut worst_r2 = 0.0f64;
    for k in 0..50u64 {
        let len = 6 + (k as usize % 30);
        let ys = common::random_unit_reals(len, 0x3C33 + k);
        let ss = common::random_unit_reals(len, 0x3D44 + k);
        let ours = r_squared(&ys, &ss).unwrap();
        worst_r2 = worst_r2.max((ours - common::pearson_r2(&ys, &ss)).abs());
    }
    let details = format!(
        "50 batches: weight gap {worst_w:.2e} (limit 1e-10); 50 vectors: r2 gap {worst_r2:.2e} (limit 1e-12)"
    );
    assert!(
        verdict(
            worst_w <= 1e-10 && worst_r2 <= 1e-12,
            "C03 regression closed forms",
            &details
        ),
        "{details}"
    );
}

#[test]
fn c04_encoding_purity_and_invariance_identities() {
    let quench = QuenchConfig::new(Background::AllUp, Encoding::XBasis).unwrap();
    let n = 13;
    let center = quench.center(n);
    let mut worst_enc = 0.0f64;
    let mut worst_ent = 0.0f64;
    for k in 0..=100 {
        let s = k as f64 / 100.0;
        let psi = build_initial_state(s, n, &quench).unwrap();
        let x_center = pauli_expectation(&psi, center, Axis::X).unwrap();
        worst_enc = worst_enc.max((x_center - (1.0 - 2.0 * s)).abs());
        for cut in 1..n {
            worst_ent = worst_ent.max(entanglement_entropy(&psi, cut).unwrap());
        }
    }
    let mut worst_aff = 0.0f64;
    for k in 0..100u64 {
        let ys = common::random_unit_reals(12, 0x4AFF + k);
        let ss = common::random_unit_reals(12, 0x4BFF + k);
        let u = common::random_unit_reals(2, 0x4CFF + k);
        let a = (0.05 + 19.95 * u[0]) * if k % 2 == 0 { 1.0 } else { -1.0 };
        let b = 10.0 * u[1] - 5.0;
        let scaled: Vec<f64> = ys.iter().map(|y| a * y + b).collect();
        let gap = (r_squared(&scaled, &ss).unwrap() - r_squared(&ys, &ss).unwrap()).abs();
        worst_aff = worst_aff.max(gap);
    }
    let details = format!(
        "center readout gap {worst_enc:.2e} (limit 1e-12), initial bond entropy {worst_ent:.2e} (limit 1e-10), affine r2 gap {worst_aff:.2e} on 100 cases (limit 1e-9)"
    );
    assert!(
        verdict(
            worst_enc <= 1e-12 && worst_ent <= 1e-10 && worst_aff <= 1e-9,
            "C04 protocol identities",
            &details
        ),
        "{details}"
    );
}

#[test]
fn c05_entropy_matches_dense_partial_trace() {
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let psi: StateVector = common::random_state(10, 0x5E17 + k);
        for cut in 1..10 {
            let ours = entanglement_entropy(&psi, cut).unwrap();
            let oracle = common::dense_entropy(psi.amplitudes(), 10, cut);
            worst = worst.max((ours - oracle).abs());
        }
    }
    let details =
        format!("20 random n = 10 states, every bond: worst gap {worst:.2e} (limit 1e-9)");
    assert!(
        verdict(worst <= 1e-9, "C05 entropy vs dense partial trace", &details),
        "{details}"
    );
}

#[test]
fn c06_tfim_dip_sits_at_the_critical_field() {
    let f = tfim_fixture();
    assert_eq!(f.outcome.result.parameter_values[..], [0.6, 0.8, 1.0, 1.2, 1.4]);
    let r2 = &f.outcome.result.r2_mean;
    let dip = f.outcome.dip.expect("completed sweep reports a dip");
    let margin = r2[0].min(r2[4]) - r2[2];
    let pass = f.outcome.n_failed == 0 && dip.parameter == 1.0 && margin >= 0.05;
    let details = format!(
        "R2 means [{}] at g [0.6 0.8 1.0 1.2 1.4]; argmin g = {}, edge margin {margin:.4} (need >= 0.05); {:.0} s on {} rayon workers",
        fmt_f64s(r2),
        dip.parameter,
        f.elapsed_s,
        rayon::current_num_threads()
    );
    assert!(verdict(pass, "C06 tfim dip at g = 1", &details), "{details}");
}

#[test]
fn c07_cluster_field_dip_sits_at_alpha_half() {
    let f = run_config_sweep("cluster_field_sweep.toml", "cluster_field");
    assert_eq!(f.outcome.result.parameter_values[..], [0.3, 0.4, 0.5, 0.6, 0.7]);
    let dip = f.outcome.dip.expect("completed sweep reports a dip");
    let pass = f.outcome.n_failed == 0 && dip.parameter == 0.5;
    let details = format!(
        "R2 means [{}] at alpha [0.3 0.4 0.5 0.6 0.7]; argmin alpha = {}; {:.0} s",
        fmt_f64s(&f.outcome.result.r2_mean),
        dip.parameter,
        f.elapsed_s
    );
    assert!(
        verdict(pass, "C07 cluster-field dip at alpha = 0.5", &details),
        "{details}"
    );
}

#[test]
fn c08_cluster_dip_sits_at_unit_three_site_coupling() {
    let f = run_config_sweep("cluster_sweep.toml", "cluster");
    assert_eq!(f.outcome.result.parameter_values[..], [0.6, 0.8, 1.0, 1.2, 1.4]);
    let dip = f.outcome.dip.expect("completed sweep reports a dip");
    let pass = f.outcome.n_failed == 0 && dip.parameter == 1.0;
    let details = format!(
        "R2 means [{}] at j_zxz [0.6 0.8 1.0 1.2 1.4]; argmin j_zxz = {}; {:.0} s",
        fmt_f64s(&f.outcome.result.r2_mean),
        dip.parameter,
        f.elapsed_s
    );
    assert!(
        verdict(pass, "C08 cluster dip at j_zxz = 1", &details),
        "{details}"
    );
}

#[test]
fn c09_annni_dip_is_interior() {
    let f = run_config_sweep("annni_sweep.toml", "annni");
    assert_eq!(f.outcome.result.parameter_values[..], [1.0, 1.3, 1.6, 1.9, 2.2]);
    let dip = f.outcome.dip.expect("completed sweep reports a dip");
    let pass = f.outcome.n_failed == 0 && dip.interior;
    // The dip location at n = 13 is recorded, not pinned: finite size
    // shifts it relative to the thermodynamic boundary.
    let details = format!(
        "R2 means [{}] at g [1.0 1.3 1.6 1.9 2.2]; dip at g = {} (interior: {}); {:.0} s",
        fmt_f64s(&f.outcome.result.r2_mean),
        dip.parameter,
        dip.interior,
        f.elapsed_s
    );
    assert!(verdict(pass, "C09 annni interior dip", &details), "{details}");
}

#[test]
fn c10_tfim_dip_is_window_robust() {
    let f = tfim_fixture();
    let values = &f.outcome.result.parameter_values;
    let grids: Vec<R2Grid> = values
        .iter()
        .map(|&v| {
            let path = f.dir.join(point_dir_name("g", v)).join(R2_FILE);
            read_r2_grid(&path).expect("stored r2 grid loads")
        })
        .collect();
    // Time windows are half-open in t_lo, so the closed window starting at
    // t = 2 uses a t_lo nudged below the first included recording.
    let combos = [(5, 0.0), (11, 0.0), (5, 1.975), (11, 1.975)];
    let mut argmins = Vec::new();
    for (window_sites, t_lo) in combos {
        let subset = SubsetSpec::centered(window_sites, t_lo, 5.0);
        let means: Vec<f64> = grids
            .iter()
            .map(|g| mean_r2(g, &subset).expect("window applies"))
            .collect();
        let sweep = SweepResult {
            parameter_name: "g".into(),
            parameter_values: values.clone(),
            r2_mean: means,
        };
        argmins.push(locate_dip(&sweep).unwrap().parameter);
    }
    let pass = argmins.iter().all(|&g| g == 1.0);
    let details = format!(
        "argmin g = [{}] over windows (5 sites, 11 sites) x (0 < t <= 5, 2 <= t <= 5), all must be 1",
        fmt_f64s(&argmins)
    );
    assert!(verdict(pass, "C10 window robustness", &details), "{details}");
}

#[test]
fn c11_tfim_dip_is_threshold_robust() {
    let f = tfim_fixture();
    let values = &f.outcome.result.parameter_values;
    let batch = sample_inputs(
        f.config.batch.seed,
        f.config.batch.n_train,
        f.config.batch.n_test,
    )
    .unwrap();
    let subset = f.config.subset;
    let thresholds = [0.0, 1e-6, 1e-4];
    let mut means = vec![Vec::new(); thresholds.len()];
    let mut masks_nested = true;
    let mut mask_counts = [0usize; 4];
    for &value in values {
        let point = f.dir.join(point_dir_name("g", value));
        let obs = read_observable_grid(&point.join(OBSERVABLES_FILE)).unwrap();
        let stored = read_r2_grid(&point.join(R2_FILE)).unwrap();
        let rebuilt: Vec<R2Grid> = thresholds
            .iter()
            .map(|&th| build_r2_grid(&obs, &batch, th).unwrap())
            .collect();
        for (k, grid) in rebuilt.iter().enumerate() {
            means[k].push(mean_r2(grid, &subset).unwrap());
        }
        // Mask monotonicity across 0 < 1e-6 < 1e-5 (stored) < 1e-4.
        let chain = [
            rebuilt[0].mask_values(),
            rebuilt[1].mask_values(),
            stored.mask_values(),
            rebuilt[2].mask_values(),
        ];
        for pair in chain.windows(2) {
            masks_nested &= pair[0]
                .iter()
                .zip(pair[1])
                .all(|(&small, &large)| !small || large);
        }
        for (k, mask) in chain.iter().enumerate() {
            mask_counts[k] += mask.iter().filter(|&&m| m).count();
        }
    }
    let mut argmins = Vec::new();
    for r2_mean in &means {
        let sweep = SweepResult {
            parameter_name: "g".into(),
            parameter_values: values.clone(),
            r2_mean: r2_mean.clone(),
        };
        argmins.push(locate_dip(&sweep).unwrap().parameter);
    }
    let pass = masks_nested && argmins.iter().all(|&g| g == 1.0);
    let details = format!(
        "re-analysis of stored trajectories: argmin g = [{}] at thresholds [0, 1e-6, 1e-4]; zeroed cells {:?} nested across [0, 1e-6, 1e-5, 1e-4]: {}",
        fmt_f64s(&argmins),
        mask_counts,
        masks_nested
    );
    assert!(verdict(pass, "C11 threshold robustness", &details), "{details}");
}

#[test]
fn c12_reruns_are_bit_identical() {
    let first = tfim_fixture();
    let second = run_config_sweep("tfim_sweep.toml", "tfim_rerun");
    let means_equal = first.outcome.result.r2_mean.len() == second.outcome.result.r2_mean.len()
        && first
            .outcome
            .result
            .r2_mean
            .iter()
            .zip(&second.outcome.result.r2_mean)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    let table_equal = fs::read(first.dir.join(SWEEP_FILE)).unwrap()
        == fs::read(second.dir.join(SWEEP_FILE)).unwrap();
    let mut grids_equal = true;
    for &value in &first.outcome.result.parameter_values {
        let rel = Path::new(&point_dir_name("g", value)).join(R2_FILE);
        grids_equal &=
            fs::read(first.dir.join(&rel)).unwrap() == fs::read(second.dir.join(&rel)).unwrap();
    }
    let pass = means_equal && table_equal && grids_equal;
    let details = format!(
        "independent reruns: R2 means bitwise equal: {means_equal}, sweep table bytes equal: {table_equal}, per-point r2 files equal: {grids_equal}"
    );
    assert!(verdict(pass, "C12 determinism", &details), "{details}");
}
