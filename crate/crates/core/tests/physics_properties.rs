//! Randomized invariants of the force/potential layer and the integrator.

use core::f64::consts::PI;
use nanorod_core::dynamics::{simulate, ParticleKind, TransitSpec};
use nanorod_core::optics::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup() -> (CavityParams, Polarizability, BodyProperties) {
    let geometry = RodGeometry::new(800e-9, 100e-9).unwrap();
    let material = Material::SILICON;
    let cavity = CavityParams::new(1.56e-6, 65e-6, 8.2e6).unwrap();
    let pol = needle_polarizability(&geometry, &material).unwrap();
    let body = BodyProperties::from_rod(&geometry, &material);
    (cavity, pol, body)
}

#[test]
fn potential_gradient_matches_forces_at_random_points() {
    let (cavity, pol, body) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9d2f01);
    let lambda = cavity.wavelength;
    let dz = 1e-6 * lambda;
    let dphi = 1e-6;
    for _ in 0..100 {
        let z = rng.gen_range(-30.0..30.0) * lambda;
        let phi = rng.gen_range(-8.0..8.0);
        let env = rng.gen_range(0.05..1.0);

        let u = |z: f64, phi: f64| optical_potential(z, phi, env, &cavity, &pol);
        let fd_force = -(u(z + dz, phi) - u(z - dz, phi)) / (2.0 * dz);
        let force = body.mass() * axial_acceleration(z, phi, env, &cavity, &pol, &body);
        let force_scale = cavity.field_amplitude * cavity.field_amplitude
            * cavity.wave_number()
            * pol.parallel
            / 4.0;
        let tol = 1e-6 * force.abs().max(1e-9 * force_scale);
        assert!(
            (fd_force - force).abs() <= tol,
            "force mismatch at z={z:e}, phi={phi}: fd {fd_force:e} vs {force:e}"
        );

        let fd_torque = -(u(z, phi + dphi) - u(z, phi - dphi)) / (2.0 * dphi);
        let torque = body.inertia() * angular_acceleration(z, phi, env, &cavity, &pol, &body);
        let torque_scale =
            cavity.field_amplitude * cavity.field_amplitude * pol.anisotropy() / 4.0;
        let tol = 1e-6 * torque.abs().max(1e-9 * torque_scale);
        assert!(
            (fd_torque - torque).abs() <= tol,
            "torque mismatch at z={z:e}, phi={phi}: fd {fd_torque:e} vs {torque:e}"
        );
    }
}

#[test]
fn acceleration_parity_about_wells_and_alignment() {
    let (cavity, pol, body) = setup();
    let k = cavity.wave_number();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9d2f02);
    for _ in 0..200 {
        let dz = rng.gen_range(-0.4..0.4) / k;
        let phi = rng.gen_range(-8.0..8.0);
        let env = rng.gen_range(0.0..1.0);
        // Odd in z about each antinode (z = mπ/k) and node ((m+1/2)π/k).
        for center in [0.0, PI / k, -3.0 * PI / k, PI / (2.0 * k), 5.0 * PI / (2.0 * k)] {
            let plus = axial_acceleration(center + dz, phi, env, &cavity, &pol, &body);
            let minus = axial_acceleration(center - dz, phi, env, &cavity, &pol, &body);
            assert!(
                (plus + minus).abs() <= 1e-9 * plus.abs().max(minus.abs()).max(1e-12),
                "axial parity about {center:e}"
            );
        }
        // Odd in φ about 0 and π/2.
        let z = rng.gen_range(-20.0..20.0) / k;
        let dphi = rng.gen_range(-0.7..0.7);
        for center in [0.0, PI / 2.0] {
            let plus = angular_acceleration(z, center + dphi, env, &cavity, &pol, &body);
            let minus = angular_acceleration(z, center - dphi, env, &cavity, &pol, &body);
            assert!(
                (plus + minus).abs() <= 1e-9 * plus.abs().max(minus.abs()).max(1e-3),
                "angular parity about {center}"
            );
        }
    }
}

#[test]
fn libration_frequency_matches_linearized_formula() {
    // Small-angle libration at an antinode measured from φ zero crossings,
    // with a slow transit so the envelope stays at 1 over the window.
    let geometry = RodGeometry::new(800e-9, 100e-9).unwrap();
    let material = Material::SILICON;
    let cavity = CavityParams::new(1.56e-6, 65e-6, 8.2e6).unwrap();
    let pol = needle_polarizability(&geometry, &material).unwrap();
    let body = BodyProperties::from_rod(&geometry, &material);
    let f_expected = libration_frequency(&cavity, &pol, &body);

    let config = TransitSpec {
        cavity,
        geometry,
        material,
        particle_kind: ParticleKind::Rod,
        v_x: 0.05,
        initial_z: 0.0,
        initial_z_dot: 0.0,
        initial_phi: 1e-3,
        initial_phi_dot: 0.0,
        initial_t: Some(0.0),
        dt: None,
        half_span: Some(8.0 / f_expected),
    }
    .build()
    .unwrap();
    let traj = simulate(&config).unwrap();
    let mut crossings = Vec::new();
    for w in traj.states.windows(2) {
        if w[0].phi.signum() != w[1].phi.signum() {
            // Linear interpolation of the crossing time.
            let f = w[0].phi / (w[0].phi - w[1].phi);
            crossings.push(w[0].t + f * (w[1].t - w[0].t));
        }
    }
    assert!(crossings.len() >= 10);
    let n = crossings.len();
    let f_measured = (n - 1) as f64 / (2.0 * (crossings[n - 1] - crossings[0]));
    assert!(
        (f_measured / f_expected - 1.0).abs() < 1e-3,
        "measured {f_measured} vs {f_expected}"
    );
}

#[test]
fn trap_frequency_scales_with_field_amplitude() {
    let geometry = RodGeometry::new(800e-9, 100e-9).unwrap();
    let material = Material::SILICON;
    let pol = needle_polarizability(&geometry, &material).unwrap();
    let body = BodyProperties::from_rod(&geometry, &material);
    let f1 = axial_trap_frequency(
        &CavityParams::new(1.56e-6, 65e-6, 4.0e6).unwrap(),
        pol.parallel,
        &body,
    );
    let f2 = axial_trap_frequency(
        &CavityParams::new(1.56e-6, 65e-6, 8.0e6).unwrap(),
        pol.parallel,
        &body,
    );
    assert!((f2 / f1 - 2.0).abs() < 1e-12);
}

#[test]
fn zero_field_energy_is_pure_kinetic() {
    let geometry = RodGeometry::new(800e-9, 100e-9).unwrap();
    let material = Material::SILICON;
    let config = TransitSpec {
        cavity: CavityParams::new(1.56e-6, 65e-6, 0.0).unwrap(),
        geometry,
        material,
        particle_kind: ParticleKind::Rod,
        v_x: 11.5,
        initial_z: 1.3e-6,
        initial_z_dot: 0.6,
        initial_phi: 0.2,
        initial_phi_dot: 2.0e6,
        initial_t: None,
        dt: Some(1e-8),
        half_span: None,
    }
    .build()
    .unwrap();
    let body = BodyProperties::from_rod(&geometry, &material);
    let e = nanorod_core::dynamics::total_energy(&config.initial, &config, 1.0).unwrap();
    let kinetic = 0.5 * body.mass() * 0.6 * 0.6 + 0.5 * body.inertia() * 2.0e6 * 2.0e6;
    assert!((e / kinetic - 1.0).abs() < 1e-15);
}

#[test]
fn long_frozen_envelope_integration_conserves_energy() {
    // One million fixed steps at dt = 1/(100 max(f_trap, f_rot)) with the
    // envelope frozen at 1: relative drift of the total energy < 1e-6.
    // The envelope is pinned by a transit velocity so small that
    // exp(-2 (v_x t)^2 / w0^2) evaluates to exactly 1.0 over the window.
    let geometry = RodGeometry::new(800e-9, 100e-9).unwrap();
    let material = Material::SILICON;
    let cavity = CavityParams::new(1.56e-6, 65e-6, 8.2e6).unwrap();
    let pol = needle_polarizability(&geometry, &material).unwrap();
    let body = BodyProperties::from_rod(&geometry, &material);
    let f_rot: f64 = 1.685e6;
    let f_trap = axial_trap_frequency(&cavity, pol.parallel, &body);
    let dt = 1.0 / (100.0 * f_rot.max(f_trap));
    let steps = 1_000_000usize;
    let k = cavity.wave_number();
    let config = TransitSpec {
        cavity,
        geometry,
        material,
        particle_kind: ParticleKind::Rod,
        v_x: 1e-12,
        initial_z: -91.0 / k,
        initial_z_dot: 0.28,
        initial_phi: -0.4,
        initial_phi_dot: 2.0 * PI * f_rot,
        initial_t: Some(0.0),
        dt: Some(dt),
        half_span: Some(steps as f64 * dt / 2.0),
    }
    .build()
    .unwrap();
    assert_eq!(config.envelope_at(config.t_start), 1.0);
    assert_eq!(config.envelope_at(config.t_end), 1.0);
    let traj = simulate(&config).unwrap();
    assert!(traj.states.len() > steps);
    let e0 = nanorod_core::dynamics::total_energy(&traj.states[0], &config, 1.0).unwrap();
    let mut drift: f64 = 0.0;
    for s in traj.states.iter().step_by(997) {
        let e = nanorod_core::dynamics::total_energy(s, &config, 1.0).unwrap();
        drift = drift.max(((e - e0) / e0).abs());
    }
    let last = traj.states.last().unwrap();
    let e_last = nanorod_core::dynamics::total_energy(last, &config, 1.0).unwrap();
    drift = drift.max(((e_last - e0) / e0).abs());
    assert!(drift < 1e-6, "drift {drift:e} over {steps} steps");
}
