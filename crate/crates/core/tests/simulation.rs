use eit_ats::fitter::FitConfig;
use eit_ats::lineshape::{default_grid, uniform_grid};
use eit_ats::simulation::{sweep_gbc_boundary, sweep_omega, NoiseSpec};

#[test]
fn noise_erodes_weight_separation() {
    let omegas = [0.3];
    let mut gaps = Vec::new();
    for sigma in [0.0, 0.01, 0.1] {
        let noise = NoiseSpec { sigma, seed: 9, n_replicates: 20 };
        let s = sweep_omega(1.0, 0.1, &noise, &omegas, &default_grid(), &FitConfig::default()).unwrap();
        let [we, wa] = s.per_point_weights[0];
        gaps.push(we - wa);
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[0] > 0.9, "{gaps:?}");
}

#[test]
fn crossover_moves_down_as_ground_dephasing_grows() {
    let omegas = uniform_grid(0.3, 1.5, 0.05).unwrap();
    let gbc = [0.01, 0.1, 0.3];
    let b = sweep_gbc_boundary(
        1.0,
        &gbc,
        &NoiseSpec::noiseless(),
        &omegas,
        &default_grid(),
        &FitConfig::default(),
    )
    .unwrap();
    let x: Vec<f64> = b.omega_aic.iter().map(|o| o.expect("crossover inside axis")).collect();
    assert!(x.windows(2).all(|w| w[1] < w[0]), "{x:?}");
    assert!((x[1] - 0.86).abs() < 0.06, "{x:?}");
    for d in b.depth_at_crossover {
        let d = d.unwrap();
        assert!(d > 0.0 && d < 1.0);
    }
}
