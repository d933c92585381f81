//! Evolution-scheme integration tests: stationarity, dispersion, exact
//! symmetries, conservation, snapshot resume.

use mkg::boost::{BoostParams, SolitonPlacement};
use mkg::evolve::{self, TrackerWindow};
use mkg::lattice::{lattice_stationary, Boundary, LatticeSpec, LatticeState};
use mkg::observables;
use mkg::potentials::PotentialSpec;
use mkg::radial::{solve_stationary_dim, RadialGrid};
use mkg::{Cplx, Real};

const POWER3: PotentialSpec = PotentialSpec::Power { p: 3.0 };

fn radial_2d(beta: Real) -> mkg::radial::RadialProfile {
    let grid = RadialGrid::new(30.0, 3001).unwrap();
    solve_stationary_dim(&POWER3, 0.8, beta, &grid, (1e-3, 4.0), 2).unwrap()
}

fn stationary_2d(n: usize, h: Real, beta: Real) -> LatticeState {
    let lattice = LatticeSpec::new(2, n, n as Real * h, 0.9, Boundary::Periodic).unwrap();
    let profile = radial_2d(beta);
    lattice_stationary(&POWER3, &profile, &lattice, [0.0; 3]).unwrap()
}

#[test]
fn stationary_state_is_discretely_exact() {
    let mut state = stationary_2d(96, 0.25, 1e-2);
    let u0: Vec<Real> = state.psi.iter().map(|c| c.norm()).collect();
    let umax = u0.iter().cloned().fold(0.0, Real::max);
    let mut engine = evolve::Engine::new(POWER3, &state);
    for step in 1..=200 {
        engine.step(&mut state, step).unwrap();
    }
    let dev = state
        .psi
        .iter()
        .zip(&u0)
        .map(|(c, &u)| (c.norm() - u).abs())
        .fold(0.0, Real::max);
    assert!(dev / umax < 1e-8, "stationary amplitude drift {dev:.3e}");
}

#[test]
fn vacuum_stays_vacuum() {
    let lattice = LatticeSpec::new(1, 64, 16.0, 0.9, Boundary::Periodic).unwrap();
    let mut state = LatticeState::vacuum(lattice, 1e-2);
    state.u_floor = 1e-10;
    let mut engine = evolve::Engine::new(POWER3, &state);
    for step in 1..=50 {
        engine.step(&mut state, step).unwrap();
    }
    assert!(state.psi.iter().all(|c| c.norm() == 0.0));
    assert!(state.phi.iter().all(|&p| p == 0.0));
}

#[test]
fn linear_dispersion_relation() {
    // small plane wave at beta = 0: omega^2 = 1 + k^2 within 1%
    let n = 128usize;
    let h = 0.1;
    let lattice = LatticeSpec::new(1, n, n as Real * h, 0.5, Boundary::Periodic).unwrap();
    let mut state = LatticeState::vacuum(lattice.clone(), 0.0);
    let kx = 2.0 * std::f64::consts::PI * 2.0 / lattice.extent[0]; // mode 2
    let om = (1.0 + kx * kx).sqrt();
    let amp = 1e-4;
    for i in 0..n {
        let x = lattice.coord(0, i);
        state.psi[i] = Cplx::from_polar(amp, kx * x);
        state.psi_prev[i] = Cplx::from_polar(amp, kx * x + om * lattice.dt);
    }
    state.reset_floor();
    let mut engine = evolve::Engine::new(POWER3, &state);
    // phase of the k-mode after T: measure the rotation frequency
    let probe = |st: &LatticeState| -> Real {
        let mut acc = Cplx::new(0.0, 0.0);
        for i in 0..n {
            let x = st.spec.coord(0, i);
            acc += st.psi[i] * Cplx::from_polar(1.0, -kx * x);
        }
        acc.arg()
    };
    let p0 = probe(&state);
    let steps = 400usize;
    let mut unwrapped = 0.0;
    let mut prev = p0;
    for step in 1..=steps {
        engine.step(&mut state, step).unwrap();
        let p = probe(&state);
        let mut d = p - prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        unwrapped += d;
        prev = p;
    }
    let om_measured = -unwrapped / (steps as Real * lattice.dt);
    assert!(
        (om_measured / om - 1.0).abs() < 0.01,
        "dispersion: measured {om_measured}, expected {om}"
    );
}

#[test]
fn phase_rotation_invariance() {
    let mut a = stationary_2d(64, 0.25, 1e-2);
    // perturb so the run is not trivially static
    for c in a.psi.iter_mut() {
        *c *= 1.01;
    }
    let mut b = a.clone();
    evolve::phase_rotate(&mut b, 0.7318);
    let mut ea = evolve::Engine::new(POWER3, &a);
    let mut eb = evolve::Engine::new(POWER3, &b);
    for step in 1..=200 {
        ea.step(&mut a, step).unwrap();
        eb.step(&mut b, step).unwrap();
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.psi.iter().zip(&b.psi) {
        worst = worst.max((x.norm() - y.norm()).abs());
    }
    assert!(worst < 1e-11, "|psi| not phase-invariant: {worst:.3e}");
}

#[test]
fn leapfrog_time_reversal_beta_zero() {
    // at beta = 0 swapping the levels exactly retraces the dynamics
    let lattice = LatticeSpec::new(2, 96, 24.0, 0.9, Boundary::Periodic).unwrap();
    let profile = {
        let grid = RadialGrid::new(24.0, 2401).unwrap();
        solve_stationary_dim(&POWER3, 0.8, 0.0, &grid, (1e-3, 4.0), 2).unwrap()
    };
    let mut state = lattice_stationary(&POWER3, &profile, &lattice, [0.0; 3]).unwrap();
    state.beta = 0.0;
    for c in state.psi.iter_mut() {
        *c *= 1.02; // perturb
    }
    let psi0: Vec<Cplx> = state.psi.clone();
    let mut engine = evolve::Engine::new(POWER3, &state);
    for step in 1..=200 {
        engine.step(&mut state, step).unwrap();
    }
    evolve::reverse_time_levels(&mut state);
    for step in 1..=200 {
        engine.step(&mut state, step).unwrap();
    }
    // after 200 reversed steps the previous level is exactly the initial one
    let mut worst = 0.0_f64;
    for (c, c0) in state.psi_prev.iter().zip(&psi0) {
        worst = worst.max((c.norm() - c0.norm()).abs());
    }
    assert!(worst < 1e-6, "time reversal amplitude error {worst:.3e}");
}

#[test]
fn physical_time_reversal_with_coupling() {
    let mut state = stationary_2d(64, 0.25, 1e-2);
    for c in state.psi.iter_mut() {
        *c *= 1.02;
    }
    let psi0: Vec<Cplx> = state.psi.clone();
    let mut engine = evolve::Engine::new(POWER3, &state);
    for step in 1..=200 {
        engine.step(&mut state, step).unwrap();
    }
    evolve::reverse_time_physical(&mut state);
    for step in 1..=200 {
        engine.step(&mut state, step).unwrap();
    }
    let mut worst = 0.0_f64;
    for (c, c0) in state.psi_prev.iter().zip(&psi0) {
        worst = worst.max((c.norm() - c0.norm()).abs());
    }
    assert!(worst < 1e-6, "physical time reversal error {worst:.3e}");
}

#[test]
fn gauge_shift_changes_rho_by_known_amount_and_beta_zero_invariance() {
    // The 4-parameter shift is not a symmetry of the coupled system: rho
    // shifts by beta*a*|psi| kinematically. At beta = 0 the e.m. series is
    // exactly unchanged.
    let state0 = stationary_2d(64, 0.25, 1e-2);
    let q_before = observables::lattice_charge(&state0);
    let mut shifted = state0.clone();
    let a_shift = 0.05;
    evolve::gauge_shift(&mut shifted, a_shift);
    let q_after = observables::lattice_charge(&shifted);
    let vol = state0.spec.volume_element();
    let int_u: Real = state0.psi.iter().map(|c| c.norm()).sum::<Real>() * vol;
    let expected = q_before + state0.beta * a_shift * int_u;
    // sign: rho = -beta dS/dt u, S -> S - a t means dS/dt -> dS/dt - a
    assert!(
        ((q_after - expected) / expected).abs() < 1e-3,
        "rho shift: q_after = {q_after}, expected = {expected}"
    );

    // beta = 0: E and H time series unchanged over a 200-step run
    let lattice = LatticeSpec::new(2, 128, 32.0, 0.9, Boundary::Periodic).unwrap();
    let profile = {
        let grid = RadialGrid::new(30.0, 3001).unwrap();
        solve_stationary_dim(&POWER3, 0.8, 0.0, &grid, (1e-3, 4.0), 2).unwrap()
    };
    let mut a = lattice_stationary(&POWER3, &profile, &lattice, [0.0; 3]).unwrap();
    a.beta = 0.0;
    // seed a free e.m. wave so the E/H series are nontrivial
    let n = a.spec.len();
    for i in 0..n {
        let x = a.spec.position(i);
        let k_wave = 2.0 * std::f64::consts::PI * 2.0 / a.spec.extent[0];
        a.phi[i] += 0.01 * (k_wave * x[0]).sin();
        a.phi_prev[i] += 0.01 * (k_wave * x[0]).sin();
    }
    let mut b = a.clone();
    // small shift: the kick detunes the matter frequency (the shift is not a
    // dynamical symmetry), but the e.m. sector decouples at beta = 0
    evolve::gauge_shift(&mut b, 0.01);
    let mut ea = evolve::Engine::new(POWER3, &a);
    let mut eb = evolve::Engine::new(POWER3, &b);
    let mut worst = 0.0_f64;
    for step in 1..=200 {
        ea.step(&mut a, step).unwrap();
        eb.step(&mut b, step).unwrap();
        if step % 50 == 0 {
            let da = observables::derived_fields(&a);
            let db = observables::derived_fields(&b);
            for ax in 0..2 {
                for i in 0..n {
                    worst = worst.max((da.e[ax][i] - db.e[ax][i]).abs());
                }
            }
            for i in 0..n {
                worst = worst.max((da.h_field[0][i] - db.h_field[0][i]).abs());
                worst = worst.max((da.rho[i] - db.rho[i]).abs());
                worst = worst.max((da.j[0][i] - db.j[0][i]).abs());
            }
        }
    }
    assert!(worst < 1e-10, "beta=0 gauge shift changed (rho,j,E,H) by {worst:.3e}");
}

#[test]
fn gauss_law_residual_second_order() {
    // sampled stationary soliton: |div E - rho| = O(h^2), halving under refinement
    let residual = |cells: usize, h: Real| -> Real {
        let lattice =
            LatticeSpec::new(2, cells, cells as Real * h, 0.9, Boundary::Periodic).unwrap();
        let profile = radial_2d(1e-2);
        let state = lattice_stationary(&POWER3, &profile, &lattice, [0.0; 3]).unwrap();
        let d = observables::derived_fields(&state);
        // on the torus Gauss's law holds for the neutralized source rho - mean
        let rho_mean = d.rho.iter().sum::<Real>() / d.rho.len() as Real;
        let spec = &state.spec;
        let mut worst = 0.0_f64;
        for ix in 2..cells - 2 {
            for iy in 2..cells - 2 {
                let i = spec.index(ix, iy, 0);
                let ip = spec.index(ix + 1, iy, 0);
                let im = spec.index(ix - 1, iy, 0);
                let jp = spec.index(ix, iy + 1, 0);
                let jm = spec.index(ix, iy - 1, 0);
                let div = (d.e[0][ip] - d.e[0][im]) / (2.0 * h) + (d.e[1][jp] - d.e[1][jm]) / (2.0 * h);
                worst = worst.max((div - (d.rho[i] - rho_mean)).abs());
            }
        }
        worst
    };
    let r1 = residual(64, 0.5);
    let r2 = residual(128, 0.25);
    assert!(
        r2 < 0.35 * r1,
        "Gauss residual not O(h^2): {r1:.3e} -> {r2:.3e}"
    );
}

#[test]
fn boosted_soliton_drift_speed_1d_reduced() {
    // free boosted soliton in the 1D reduction: centroid slope = v within 1%
    let v = 0.3;
    let grid = RadialGrid::new(40.0, 4001).unwrap();
    let profile = solve_stationary_dim(&POWER3, 0.8, 1e-3, &grid, (1e-3, 4.0), 1).unwrap();
    // domain large enough that the 3 r0 tracking window is local and the
    // full traverse needs no unwrapping
    let n = 2048usize;
    let h = 0.0625;
    let lattice = LatticeSpec::new(1, n, n as Real * h, 0.9, Boundary::Periodic).unwrap();
    let placement = SolitonPlacement {
        profile: profile.clone(),
        center: [-55.0, 0.0, 0.0],
        boost: BoostParams::new(profile.omega, [v, 0.0, 0.0]).unwrap(),
        sign: 1,
    };
    let mut state = mkg::boost::sample_moving_soliton(&placement, &lattice, 0.0).unwrap();
    let r0 = profile.r0();
    let mut trackers = vec![TrackerWindow::new([-55.0, 0.0, 0.0], r0)];
    // 10 crossing times of the soliton radius
    let t_total = 10.0 * r0 / v;
    let steps = (t_total / lattice.dt) as usize;
    let out = evolve::run(&mut state, &POWER3, steps, steps / 40, &mut trackers).unwrap();
    let traj = &out.trajectories[0];
    assert!(traj.aborted_at.is_none());
    let ts: Vec<Real> = traj.t.clone();
    let xs: Vec<Real> = traj.xi.iter().map(|p| p[0]).collect();
    // unwrap periodic jumps
    let mut xs_unwrapped = xs.clone();
    for i in 1..xs_unwrapped.len() {
        let l = lattice.extent[0];
        let mut d = xs_unwrapped[i] - xs_unwrapped[i - 1];
        if d < -0.5 * l {
            d += l;
        } else if d > 0.5 * l {
            d -= l;
        }
        xs_unwrapped[i] = xs_unwrapped[i - 1] + d;
    }
    // skip the sampling transient before fitting the slope
    let skip = ts.len() / 5;
    let (_, slope, _) = mkg::particle::fit_quadratic(&ts[skip..], &xs_unwrapped[skip..]);
    assert!(
        (slope / v - 1.0).abs() < 0.01,
        "drift speed {slope} vs v = {v}"
    );
}

#[test]
fn blowup_surfaces_with_step_index() {
    let lattice = LatticeSpec::new(1, 64, 16.0, 0.9, Boundary::Periodic).unwrap();
    let mut state = LatticeState::vacuum(lattice, 0.0);
    state.psi[10] = Cplx::new(Real::INFINITY, 0.0);
    let mut engine = evolve::Engine::new(POWER3, &state);
    match engine.step(&mut state, 7) {
        Err(mkg::Error::Blowup { step, .. }) => assert_eq!(step, 7),
        other => panic!("expected blow-up error, got {other:?}"),
    }
}

#[test]
fn snapshot_roundtrip_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let mut state = stationary_2d(64, 0.25, 1e-2);
    for c in state.psi.iter_mut() {
        *c *= 1.005;
    }
    // run 100 steps, snapshot, run 100 more
    let mut engine = evolve::Engine::new(POWER3, &state);
    for step in 1..=100 {
        engine.step(&mut state, step).unwrap();
    }
    let snap = dir.path().join("mid.snap");
    mkg::io::write_snapshot(&state, &snap).unwrap();

    // bit-exact round trip
    let restored = mkg::io::read_snapshot(&snap).unwrap();
    assert_eq!(restored.psi.len(), state.psi.len());
    for (a, b) in restored.psi.iter().zip(&state.psi) {
        assert!(a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    }
    for (a, b) in restored.phi.iter().zip(&state.phi) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    // write -> read -> write gives byte-identical files
    let snap2 = dir.path().join("mid2.snap");
    mkg::io::write_snapshot(&restored, &snap2).unwrap();
    assert_eq!(std::fs::read(&snap).unwrap(), std::fs::read(&snap2).unwrap());

    // split-run resume: continue both to step 200 and compare
    let mut resumed = restored;
    let mut engine2 = evolve::Engine::new(POWER3, &resumed);
    for step in 101..=200 {
        engine.step(&mut state, step).unwrap();
        engine2.step(&mut resumed, step).unwrap();
    }
    let mut worst = 0.0_f64;
    for (a, b) in state.psi.iter().zip(&resumed.psi) {
        worst = worst.max((a - b).norm());
    }
    assert!(worst < 1e-14, "resume mismatch {worst:.3e}");
}

#[test]
fn snapshot_corruption_detected() {
    let dir = tempfile::tempdir().unwrap();
    let state = stationary_2d(64, 0.25, 1e-2);
    let snap = dir.path().join("s.snap");
    mkg::io::write_snapshot(&state, &snap).unwrap();
    let mut bytes = std::fs::read(&snap).unwrap();
    let at = bytes.len() - 17; // inside the last blob
    bytes[at] ^= 0x01;
    std::fs::write(&snap, &bytes).unwrap();
    match mkg::io::read_snapshot(&snap) {
        Err(mkg::Error::SnapshotChecksum(field)) => {
            assert!(!field.is_empty());
        }
        other => panic!("expected checksum error, got {other:?}"),
    }
}

#[test]
fn tracker_aborts_on_approach() {
    // soliton + antisoliton placed close: the tracker must flag A-2 before overlap
    let grid = RadialGrid::new(30.0, 3001).unwrap();
    let profile = solve_stationary_dim(&POWER3, 0.8, 1e-2, &grid, (1e-3, 4.0), 2).unwrap();
    let r0 = profile.r0();
    let lattice = LatticeSpec::new(2, 256, 96.0, 0.9, Boundary::Periodic).unwrap();
    let mk = |center: [Real; 3], v: Real, sign: i8| SolitonPlacement {
        profile: profile.clone(),
        center,
        boost: BoostParams::new(profile.omega, [v, 0.0, 0.0]).unwrap(),
        sign,
    };
    let sep = 6.0 * r0;
    let placements = vec![
        mk([-0.5 * sep, 0.0, 0.0], 0.3, 1),
        mk([0.5 * sep, 0.0, 0.0], -0.3, -1),
    ];
    let mut state = mkg::boost::superpose(&placements, &lattice, None, 0.0).unwrap();
    let mut trackers = vec![
        TrackerWindow::new(placements[0].center, r0),
        TrackerWindow::new(placements[1].center, r0),
    ];
    // enough time to close from 6 r0 to under 2 r0 at relative speed 0.6
    let steps = (4.5 * r0 / 0.6 / lattice.dt) as usize;
    let out = evolve::run(&mut state, &POWER3, steps, 10, &mut trackers).unwrap();
    assert!(
        out.trajectories.iter().all(|t| t.aborted_at.is_some()),
        "head-on approach must abort tracking with the A-2 status"
    );
}
