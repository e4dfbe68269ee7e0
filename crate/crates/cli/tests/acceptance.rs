//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `--nocapture`) before asserting.
//!
//! Criteria 3 and 4 encode reference endpoint values whose replay depends
//! on near-separatrix capture dynamics that the quoted initial conditions do
//! not pin down; they are implemented exactly as stated and report honestly.

use nanorod_core::analysis::{
    extract_kinematics, fit_envelope, power_spectrum, power_spectrum_of, prominent_peaks,
    reconstruct_axial_trajectory, rotation_average, instantaneous_rotation_rate, SpectralWindow,
};
use nanorod_core::dynamics::{
    classify_channelling, simulate, total_energy, transit_summary, ParticleKind, Trajectory,
    TransitSpec,
};
use nanorod_core::optics::{
    needle_polarizability, orientation_averaged_polarizability, sphere_polarizability,
    AverageMode, BodyProperties, CavityParams, Material, Polarizability, RodGeometry,
};
use nanorod_core::scattering::{normalize_signal, synthesize_signal, CavityIntensity, SignalTrace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::Command;

const LAMBDA: f64 = 1.56e-6;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn report(criterion: u32, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion:02} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Build the transit spec encoded in a fixture config.
fn spec_from_fixture(name: &str) -> TransitSpec {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    let mut spec: Option<TransitSpec> = None;
    // Minimal fixture reader for the acceptance paths: the full parser lives
    // in the binary crate and is exercised end-to-end by criterion 11.
    let get = |key: &str| -> Option<f64> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .and_then(|(_, v)| v.split('#').next().unwrap().trim().parse::<f64>().ok())
    };
    let cavity = CavityParams::new(
        get("cavity.wavelength").unwrap(),
        get("cavity.waist").unwrap(),
        get("cavity.field_amplitude").unwrap(),
    )
    .unwrap();
    let k = cavity.wave_number();
    let kind = if text.contains("particle = sphere") {
        ParticleKind::Sphere
    } else {
        ParticleKind::Rod
    };
    spec.replace(TransitSpec {
        cavity,
        geometry: RodGeometry::new(get("rod.length").unwrap(), get("rod.diameter").unwrap())
            .unwrap(),
        material: Material::new(get("material.epsilon_r").unwrap(), get("material.density").unwrap())
            .unwrap(),
        particle_kind: kind,
        v_x: get("transit.v_x").unwrap(),
        initial_z: get("initial.kz").unwrap() / k,
        initial_z_dot: get("initial.v_z").unwrap(),
        initial_phi: get("initial.phi").unwrap(),
        initial_phi_dot: 2.0 * std::f64::consts::PI * get("initial.f_rot").unwrap(),
        initial_t: None,
        dt: None,
        half_span: None,
    });
    spec.unwrap()
}

fn s1_trace() -> (Trajectory, SignalTrace) {
    let config = spec_from_fixture("s1.cfg").build().unwrap();
    let traj = simulate(&config).unwrap();
    let trace = synthesize_signal(&traj, 1e8, 0.0).unwrap();
    (traj, trace)
}

#[test]
fn criterion_01_polarizability_replication() {
    let geometry = RodGeometry::new(795e-9, 108e-9).unwrap();
    let material = Material::SILICON; // epsilon_r = 12.1
    let pol = needle_polarizability(&geometry, &material).unwrap();
    let iso = orientation_averaged_polarizability(&pol, AverageMode::Isotropic3d);
    let sphere = sphere_polarizability(geometry.volume(), &material);
    let vols = [
        (Polarizability::volume_angstrom3(pol.parallel), 6.4e9, "parallel"),
        (Polarizability::volume_angstrom3(pol.perpendicular), 9.8e8, "perpendicular"),
        (Polarizability::volume_angstrom3(iso), 2.8e9, "3d-average"),
        (Polarizability::volume_angstrom3(sphere), 1.4e9, "same-mass sphere"),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (got, want, name) in vols {
        let dev = rel(got, want);
        pass &= dev < 0.03;
        detail.push_str(&format!("{name} {got:.4e} A^3 vs {want:.2e} ({:.2}%); ", dev * 100.0));
    }
    assert!(report(1, pass, &detail));
}

#[test]
fn criterion_02_enhancement_factors() {
    let geometry = RodGeometry::new(795e-9, 108e-9).unwrap();
    let pol = needle_polarizability(&geometry, &Material::SILICON).unwrap();
    let planar = orientation_averaged_polarizability(&pol, AverageMode::Planar);
    let sphere = sphere_polarizability(geometry.volume(), &Material::SILICON);
    let ratio = planar / sphere;
    let freq_ratio = ratio.sqrt();
    let experimental = 470.0 / 290.0;
    let pass = rel(ratio, 2.7) < 0.03 && rel(freq_ratio, experimental) < 0.03;
    assert!(report(
        2,
        pass,
        &format!(
            "planar/sphere = {ratio:.4} vs 2.7 ({:.2}%); sqrt = {freq_ratio:.4} vs 470/290 = {experimental:.4} ({:.2}%)",
            rel(ratio, 2.7) * 100.0,
            rel(freq_ratio, experimental) * 100.0
        ),
    ));
}

#[test]
fn criterion_03_s3_quantitative_replay() {
    let base = spec_from_fixture("s3.cfg").build().unwrap();
    let run = |dt: f64| {
        let mut spec = spec_from_fixture("s3.cfg");
        spec.dt = Some(dt);
        spec.half_span = Some(base.t_end);
        let summary = transit_summary(&simulate(&spec.build().unwrap()).unwrap()).unwrap();
        (
            summary.f_rot_out / summary.f_rot_in,
            summary.v_z_out / summary.v_z_in,
        )
    };
    let (f_ratio, v_ratio) = run(base.dt);
    let (f_half, v_half) = run(base.dt / 2.0);
    let converged = (f_ratio - f_half).abs() < 0.005 && (v_ratio - v_half).abs() < 0.005;
    let in_band = (1.04..=1.10).contains(&f_ratio) && (0.62..=0.70).contains(&v_ratio);
    let detail = format!(
        "f_rot ratio {f_ratio:.4} (band [1.04, 1.10]), v_z ratio {v_ratio:.4} (band [0.62, 0.70]); \
         dt-halving shifts {:.1e}/{:.1e} (converged: {converged})",
        (f_ratio - f_half).abs(),
        (v_ratio - v_half).abs()
    );
    assert!(report(3, in_band && converged, &detail));
}

#[test]
fn criterion_04_s2_qualitative_replay() {
    let rod = simulate(&spec_from_fixture("s2.cfg").build().unwrap()).unwrap();
    let rod_report = classify_channelling(&rod);
    let sphere = simulate(&spec_from_fixture("s2_sphere.cfg").build().unwrap()).unwrap();
    let sphere_report = classify_channelling(&sphere);

    // Maximum excursion from the occupied antinode over the window, for the
    // report line.
    let k = rod.config.cavity.wave_number();
    let mut excursion: f64 = 0.0;
    let mut m0 = None;
    for s in rod.states.iter().filter(|s| rod.envelope_at(s.t) > 0.5) {
        let m = m0.get_or_insert((k * s.z / std::f64::consts::PI).round());
        excursion = excursion.max((k * s.z - *m * std::f64::consts::PI).abs());
    }
    let rod_ok = rod_report.channelled;
    let sphere_ok = !sphere_report.channelled && sphere_report.antinode_hops >= 2;
    let detail = format!(
        "rod: hops = {}, max |kz - m0 pi| = {excursion:.3} rad vs lambda/8 bar {:.3} -> channelled = {}; \
         sphere: hops = {} (need >= 2), channelled = {}",
        rod_report.antinode_hops,
        std::f64::consts::FRAC_PI_4,
        rod_report.channelled,
        sphere_report.antinode_hops,
        sphere_report.channelled
    );
    assert!(report(4, rod_ok && sphere_ok, &detail));
}

#[test]
fn criterion_05_spectral_recovery() {
    let (_traj, trace) = s1_trace();
    let cavity = CavityParams::new(LAMBDA, 65e-6, 4.15e6).unwrap();
    let est = extract_kinematics(&trace, &cavity).unwrap();
    let v_z = est.v_z.map(|m| m.value).unwrap_or(f64::NAN);
    let f_rot = est.f_rot.map(|m| m.value).unwrap_or(f64::NAN);

    // The two dominant lines must sit at the defining frequencies.
    let spec = power_spectrum(&trace, SpectralWindow::Hann).unwrap();
    let peaks = prominent_peaks(&spec);
    let nu_trans_expect = 2.0 * 0.74 / LAMBDA;
    let nu_rot_expect = 2.0 * 2.14e6;
    let low = peaks
        .iter()
        .map(|p| p.frequency)
        .filter(|f| rel(*f, nu_trans_expect) < 0.05)
        .count();
    let high = peaks
        .iter()
        .map(|p| p.frequency)
        .filter(|f| rel(*f, nu_rot_expect) < 0.05)
        .count();

    let pass = rel(v_z, 0.74) < 0.02 && rel(f_rot, 2.14e6) < 0.01 && low >= 1 && high >= 1;
    assert!(report(
        5,
        pass,
        &format!(
            "v_z = {v_z:.4} vs 0.74 ({:.2}%), f_rot = {:.4} MHz vs 2.14 ({:.2}%); \
             lines at nu_trans/nu_rot present: {low}/{high}",
            rel(v_z, 0.74) * 100.0,
            f_rot / 1e6,
            rel(f_rot, 2.14e6) * 100.0
        ),
    ));
}

#[test]
fn criterion_06_envelope_fit() {
    let (_traj, trace) = s1_trace();
    let cavity = CavityParams::new(LAMBDA, 65e-6, 4.15e6).unwrap();
    let fit = fit_envelope(&trace, &cavity).unwrap();
    let pass = rel(fit.v_x, 11.5) < 0.02;
    assert!(report(
        6,
        pass,
        &format!("v_x = {:.4} vs 11.5 m/s ({:.2}%)", fit.v_x, rel(fit.v_x, 11.5) * 100.0),
    ));
}

#[test]
fn criterion_07_energy_conservation() {
    // S2 dynamics with the envelope frozen at 1 over the full S2 duration at
    // the default step: v_x is shrunk to where exp(-2 (v_x t)^2 / w0^2)
    // evaluates to exactly 1.0 over the whole window.
    let s2 = spec_from_fixture("s2.cfg").build().unwrap();
    let mut frozen = spec_from_fixture("s2.cfg");
    frozen.v_x = 1e-12;
    frozen.dt = Some(s2.dt);
    frozen.half_span = Some(s2.t_end);
    frozen.initial_t = Some(0.0);
    let config = frozen.build().unwrap();
    assert_eq!(config.envelope_at(config.t_start), 1.0);

    let traj = simulate(&config).unwrap();
    let e0 = total_energy(&traj.states[0], &config, 1.0).unwrap();
    let mut drift: f64 = 0.0;
    for s in &traj.states {
        let e = total_energy(s, &config, 1.0).unwrap();
        drift = drift.max(((e - e0) / e0).abs());
    }
    let steps = traj.states.len() - 1;
    let pass = drift < 1e-6;
    assert!(report(
        7,
        pass,
        &format!("relative drift {drift:.2e} over {steps} RK4 steps (limit 1e-6)"),
    ));
}

fn aligned_rms(recon: &[f64], truth: &[f64]) -> f64 {
    let n = recon.len() as f64;
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let mean_diff =
            truth.iter().zip(recon).map(|(t, r)| t - sign * r).sum::<f64>() / n;
        let snapped = (mean_diff / (LAMBDA / 2.0)).round() * (LAMBDA / 2.0);
        for offset in [mean_diff, snapped] {
            let ss: f64 = truth
                .iter()
                .zip(recon)
                .map(|(t, r)| {
                    let d = t - (sign * r + offset);
                    d * d
                })
                .sum();
            best = best.min((ss / n).sqrt());
        }
    }
    best
}

/// Synthesize, analyze, reconstruct; RMS against the trajectory's own z(t).
fn reconstruction_rms(traj: &Trajectory, sample_rate: f64) -> f64 {
    let cavity = traj.config.cavity;
    let trace = synthesize_signal(traj, sample_rate, 0.0).unwrap();
    let est = extract_kinematics(&trace, &cavity).unwrap();
    let averaged = match est.f_rot {
        Some(f_rot) => rotation_average(&trace, f_rot.value).unwrap(),
        None => trace.clone(),
    };
    let fit = fit_envelope(&trace, &cavity).unwrap();
    let rec = reconstruct_axial_trajectory(&averaged, &fit, &cavity).unwrap();
    let truth: Vec<f64> = rec.times.iter().map(|&t| traj.state_at(t).z).collect();
    aligned_rms(&rec.z, &truth)
}

#[test]
fn criterion_08_reconstruction_roundtrip() {
    let bar = LAMBDA / 50.0;
    let s2 = simulate(&spec_from_fixture("s2.cfg").build().unwrap()).unwrap();
    let s2_rms = reconstruction_rms(&s2, 1e8);
    let mut worst_free: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce08);
    for _ in 0..20 {
        let e0 = rng.gen_range(0.5e6..2.0e6);
        let v_x = rng.gen_range(9.0..14.0);
        let cavity = CavityParams::new(LAMBDA, 65e-6, e0).unwrap();
        let k = cavity.wave_number();
        let config = TransitSpec {
            cavity,
            geometry: RodGeometry::new(800e-9, 100e-9).unwrap(),
            material: Material::SILICON,
            particle_kind: ParticleKind::Rod,
            v_x,
            initial_z: rng.gen_range(-100.0..100.0) / k,
            initial_z_dot: rng.gen_range(0.45..1.0),
            initial_phi: rng.gen_range(-1.5..1.5),
            initial_phi_dot: 2.0 * std::f64::consts::PI * rng.gen_range(2.0e6..3.0e6),
            initial_t: None,
            dt: None,
            half_span: None,
        }
        .build()
        .unwrap();
        let traj = simulate(&config).unwrap();
        worst_free = worst_free.max(reconstruction_rms(&traj, 1.5e8));
    }
    let pass = s2_rms < bar && worst_free < bar;
    assert!(report(
        8,
        pass,
        &format!(
            "S2 RMS {:.1} nm, worst of 20 free flights {:.1} nm (bar lambda/50 = {:.1} nm)",
            s2_rms * 1e9,
            worst_free * 1e9,
            bar * 1e9
        ),
    ));
}

#[test]
fn criterion_09_rotation_rate_tracking() {
    // (a) constant rate: flat series within 1%.
    let fs = 1.0e8;
    let f_rot = 1.0e6;
    let orientation_factor = |phi: f64| {
        let c = phi.cos();
        let g = 2.0 + 11.1 * c * c;
        g * g
    };
    let make_trace = |phase: &dyn Fn(f64) -> f64, n: usize| {
        let raw: Vec<f64> = (0..n)
            .map(|i| orientation_factor(phase(i as f64 / fs)))
            .collect();
        normalize_signal(fs, 0.0, &raw, CavityIntensity::Constant(1.0)).unwrap()
    };
    let flat = make_trace(&|t| 2.0 * std::f64::consts::PI * f_rot * t, 8192);
    let series = instantaneous_rotation_rate(&flat, 0.05).unwrap();
    let flat_ok = series.rates.iter().all(|r| rel(*r, f_rot) < 0.01);

    // (b) linear chirp 800 -> 900 kHz within 3%.
    let n = 40_000;
    let duration = n as f64 / fs;
    let chirp = (9.0e5 - 8.0e5) / duration;
    let chirped = make_trace(
        &|t| 2.0 * std::f64::consts::PI * (8.0e5 * t + 0.5 * chirp * t * t),
        n,
    );
    let series = instantaneous_rotation_rate(&chirped, 0.05).unwrap();
    let chirp_ok = series
        .times
        .iter()
        .zip(&series.rates)
        .all(|(&t, &r)| rel(r, 8.0e5 + chirp * t) < 0.03);

    // (c) S3 synthetic: rate dips, then recovers.
    let traj = simulate(&spec_from_fixture("s3.cfg").build().unwrap()).unwrap();
    let trace = synthesize_signal(&traj, 1e8, 0.0).unwrap();
    let series = instantaneous_rotation_rate(&trace, 0.05).unwrap();
    let (mut i_min, mut r_min) = (0, f64::INFINITY);
    for (i, &r) in series.rates.iter().enumerate() {
        if r < r_min {
            r_min = r;
            i_min = i;
        }
    }
    let before = series.rates[..i_min].iter().cloned().fold(0.0, f64::max);
    let after = series.rates[i_min + 1..].iter().cloned().fold(0.0, f64::max);
    let dip_ok = i_min > 0
        && i_min + 1 < series.rates.len()
        && before >= 1.15 * r_min
        && after >= 1.15 * r_min;

    let pass = flat_ok && chirp_ok && dip_ok;
    assert!(report(
        9,
        pass,
        &format!(
            "constant within 1%: {flat_ok}; chirp within 3%: {chirp_ok}; \
             S3 dip-then-recovery (min {:.0} kHz, before {:.0} kHz, after {:.0} kHz): {dip_ok}",
            r_min / 1e3,
            before / 1e3,
            after / 1e3
        ),
    ));
}

#[test]
fn criterion_10_numerical_oracles() {
    // (a) FFT-based power spectrum against direct DFT summation on 1024
    // pseudo-random samples, matching window/padding/scaling.
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce10);
    let samples: Vec<f64> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let fs = 1.0e6;
    let spec = power_spectrum_of(&samples, fs, SpectralWindow::Rectangular).unwrap();
    let padded = 4096usize;
    let n = samples.len();
    let mut max_err: f64 = 0.0;
    let peak = spec.power.iter().cloned().fold(0.0, f64::max);
    for (k, &power) in spec.power.iter().enumerate() {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (j, &x) in samples.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * (k * j % padded) as f64 / padded as f64;
            re += x * ang.cos();
            im += x * ang.sin();
        }
        let coef = if k == 0 || k == padded / 2 { 1.0 } else { 2.0 };
        let direct = coef * (re * re + im * im) / (padded as f64 * n as f64);
        max_err = max_err.max((power - direct).abs());
    }
    let fft_ok = max_err <= 1e-10 * peak;

    // (b) potential gradient vs force/torque by central differences at 100
    // random phase-space points, relative 1e-6.
    let geometry = RodGeometry::new(800e-9, 100e-9).unwrap();
    let cavity = CavityParams::new(LAMBDA, 65e-6, 8.2e6).unwrap();
    let pol = needle_polarizability(&geometry, &Material::SILICON).unwrap();
    let body = BodyProperties::from_rod(&geometry, &Material::SILICON);
    let dz = 1e-6 * LAMBDA;
    let dphi = 1e-6;
    let mut fd_ok = true;
    for _ in 0..100 {
        let z = rng.gen_range(-30.0..30.0) * LAMBDA;
        let phi = rng.gen_range(-8.0..8.0);
        let env = rng.gen_range(0.05..1.0);
        let u = |z: f64, phi: f64| {
            nanorod_core::optics::optical_potential(z, phi, env, &cavity, &pol)
        };
        let fd_force = -(u(z + dz, phi) - u(z - dz, phi)) / (2.0 * dz);
        let force = body.mass()
            * nanorod_core::optics::axial_acceleration(z, phi, env, &cavity, &pol, &body);
        let f_scale = cavity.field_amplitude * cavity.field_amplitude
            * cavity.wave_number()
            * pol.parallel
            / 4.0;
        fd_ok &= (fd_force - force).abs() <= 1e-6 * force.abs().max(1e-9 * f_scale);

        let fd_torque = -(u(z, phi + dphi) - u(z, phi - dphi)) / (2.0 * dphi);
        let torque = body.inertia()
            * nanorod_core::optics::angular_acceleration(z, phi, env, &cavity, &pol, &body);
        let t_scale =
            cavity.field_amplitude * cavity.field_amplitude * pol.anisotropy() / 4.0;
        fd_ok &= (fd_torque - torque).abs() <= 1e-6 * torque.abs().max(1e-9 * t_scale);
    }

    let pass = fft_ok && fd_ok;
    assert!(report(
        10,
        pass,
        &format!(
            "FFT vs direct DFT max deviation {:.2e} of peak (limit 1e-10): {fft_ok}; \
             finite-difference force/torque at 100 points within 1e-6: {fd_ok}",
            max_err / peak
        ),
    ));
}

#[test]
fn criterion_11_pipeline_determinism() {
    let bin = env!("CARGO_BIN_EXE_nanorod");
    let config = fixture("s1.cfg");
    let dir = tempfile::tempdir().unwrap();
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out_a, &out_b] {
        let status = Command::new(bin)
            .args(["pipeline", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .expect("pipeline runs");
        assert!(status.success());
    }
    let files = [
        "trajectory.csv",
        "trajectory.json",
        "summary.json",
        "signal.csv",
        "signal.json",
        "kinematics.json",
        "reconstruction.csv",
        "rates.csv",
    ];
    let mut pass = true;
    for f in files {
        let a = std::fs::read(out_a.join(f)).unwrap_or_default();
        let b = std::fs::read(out_b.join(f)).unwrap_or_default();
        pass &= !a.is_empty() && a == b;
    }
    assert!(report(
        11,
        pass,
        &format!("{} artifacts byte-identical across two pipeline runs", files.len()),
    ));
}
