use supercool::grid_solver::{run_grid, GridConfig};
use supercool::harness::compare_paths;
use supercool::particle_sim::{init_ensemble, run, Sampling};
use supercool::Density;

#[test]
fn particle_frontier_approaches_grid_as_n_grows() {
    let d = Density::piecewise_constant(vec![0.0, 2.0], vec![0.5]).unwrap();
    let dx = 0.005;
    let cfg = GridConfig {
        alpha: 1.0,
        t_end: 0.5,
        dt: 25.0 * dx * dx,
        dx,
        x_max: 6.0,
        sample_every: 400,
        jump_threshold: 0.01,
    };
    let grid = run_grid(&d, &cfg).unwrap().path;
    let sups: Vec<f64> = [(2_500, 4e-3), (10_000, 2e-3), (40_000, 1e-3)]
        .iter()
        .map(|&(n, dt)| {
            let e = init_ensemble(&d, n, 5, Sampling::Stratified).unwrap().with_alpha(1.0);
            let (p, _) = run(e, 0.5, dt, 1, 0.01).unwrap();
            compare_paths(&p, &grid, dt, 1.0 / n as f64 + dx).unwrap().sup
        })
        .collect();
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
    assert!(sups[2] < 0.5 * sups[0], "{sups:?}");
}
