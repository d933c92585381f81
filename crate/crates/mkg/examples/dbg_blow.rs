use mkg::evolve;
use mkg::lattice::{lattice_stationary, Boundary, LatticeSpec};
use mkg::potentials::PotentialSpec;
use mkg::radial::{solve_stationary_dim, RadialGrid};

fn main() {
    let pot = PotentialSpec::Power { p: 3.0 };
    let lattice = LatticeSpec::new(2, 128, 32.0, 0.9, Boundary::Periodic).unwrap();
    let grid = RadialGrid::new(30.0, 3001).unwrap();
    let profile = solve_stationary_dim(&pot, 0.8, 0.0, &grid, (1e-3, 4.0), 2).unwrap();
    println!("radial u0={} residual={}", profile.u[0], profile.residual);
    let mut a = lattice_stationary(&pot, &profile, &lattice, [0.0; 3]).unwrap();
    a.beta = 0.0;
    let n = a.spec.len();
    for i in 0..n {
        let x = a.spec.position(i);
        let k_wave = 2.0 * std::f64::consts::PI * 2.0 / a.spec.extent[0];
        a.phi[i] += 0.01 * (k_wave * x[0]).sin();
        a.phi_prev[i] += 0.01 * (k_wave * x[0]).sin();
    }
    let mut e = evolve::Engine::new(pot, &a);
    for step in 1..=200 {
        match e.step(&mut a, step) {
            Ok(()) => {}
            Err(err) => {
                println!("step {step}: {err}");
                break;
            }
        }
        if step % 10 == 0 {
            println!("step {step}: max|psi| = {:.6e}", a.max_abs_psi());
        }
    }
}
