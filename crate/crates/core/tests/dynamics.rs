use filament_ns::domain_fields::{lp_norm, Filament, FilamentConfig, Grid, ScalarField, VectorField};
use filament_ns::dynamics::operators::diffusion_limit;
use filament_ns::dynamics::staging::restrict_to;
use filament_ns::dynamics::{advect_diffuse_mild, DiffusionMode, SimulationState, SolverParams};
use filament_ns::selfsim::{oseen_distance, RescaledFrame};
use filament_ns::Error;
use proptest::prelude::*;

fn params(t0: f64) -> SolverParams {
    SolverParams { t_start: t0, ..SolverParams::default() }
}

fn three_rings() -> FilamentConfig {
    FilamentConfig::new(vec![
        Filament { alpha: 1.0, r: 1.0, z: 0.0 },
        Filament { alpha: 0.5, r: 1.3, z: 0.3 },
        Filament { alpha: 2.0, r: 0.8, z: 0.35 },
    ])
    .unwrap()
}

#[test]
fn initial_ring_has_unit_mass_and_oseen_profile() {
    let cfg = FilamentConfig::single(1.0, 1.0, 0.0).unwrap();
    let st = SimulationState::initialize_filaments(&cfg, 1e-4, &params(1e-4)).unwrap();
    assert!((lp_norm(&st.omega_total, 1.0).unwrap() - 1.0).abs() <= 1e-4);
    let frame = RescaledFrame::from_state(&st, 0, 10.0, 256).unwrap();
    let dist = oseen_distance(&frame);
    assert!(dist <= 1e-3, "initial Oseen distance {dist}");
}

#[test]
fn separated_rings_do_not_overlap() {
    let cfg = FilamentConfig::new(vec![
        Filament { alpha: 1.0, r: 1.0, z: -0.5 },
        Filament { alpha: 1.0, r: 1.0, z: 0.5 },
    ])
    .unwrap();
    let st = SimulationState::initialize_filaments(&cfg, 1e-4, &params(1e-4)).unwrap();
    let g = *st.grid();
    let (a, b) = (&st.omega_parts[0], &st.omega_parts[1]);
    let cross: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x.min(*y)).sum::<f64>() * g.cell_area();
    assert!(cross < 1e-8, "cross mass {cross}");
}

#[test]
fn unresolvable_or_wide_initial_data_is_rejected() {
    let cfg = FilamentConfig::single(1.0, 1.0, 0.0).unwrap();
    let coarse = Grid::new(0.5, 1.5, -0.5, 0.5, 16, 16).unwrap();
    let err = SimulationState::initialize_on_grid(&cfg, 1e-4, coarse, &params(1e-4)).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)), "{err}");
    // sqrt(t0) = 0.2 > d/8
    let err = SimulationState::initialize_filaments(&cfg, 0.04, &SolverParams { t_end: 1.0, ..params(0.04) })
        .unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)), "{err}");
}

#[test]
fn zero_vorticity_only_advances_time() {
    let cfg = FilamentConfig::single(1.0, 1.0, 0.0).unwrap();
    let mut st = SimulationState::initialize_filaments(&cfg, 1e-4, &params(1e-4)).unwrap();
    st.clear_part(0).unwrap();
    let dt = st.max_dt();
    st.step(dt).unwrap();
    st.step(dt).unwrap();
    assert!((st.t - (1e-4 + 2.0 * dt)).abs() < 1e-18);
    assert_eq!(st.omega_total.max_abs(), 0.0);
    assert_eq!(st.omega_parts[0].max_abs(), 0.0);
}

#[test]
fn steps_keep_parts_consistent_positive_and_bounded() {
    let t0 = 4e-4;
    let mut st = SimulationState::initialize_filaments(&three_rings(), t0, &params(t0)).unwrap();
    let mass0 = lp_norm(&st.omega_total, 1.0).unwrap();
    let mut prev = mass0;
    for _ in 0..20 {
        let dt = st.max_dt();
        st.step(dt).unwrap();
        assert!(st.part_sum_defect() <= 1e-7, "defect {}", st.part_sum_defect());
        assert!(st.omega_total.min() >= -1e-12 * st.omega_total.max_abs());
        let m = lp_norm(&st.omega_total, 1.0).unwrap();
        assert!(m <= prev * (1.0 + 1e-3));
        prev = m;
    }
    assert!(prev <= 3.5 * 1.001);
}

fn run_on(n: usize, t0: f64, t1: f64) -> ScalarField {
    let half = 0.08;
    let g = Grid::new(1.0 - half, 1.0 + half, -half, half, n, n).unwrap();
    let cfg = FilamentConfig::single(1.0, 1.0, 0.0).unwrap();
    let mut st = SimulationState::initialize_on_grid(&cfg, t0, g, &params(t0)).unwrap();
    st.advance_to(t1).unwrap();
    st.omega_total
}

#[test]
fn refinement_in_space_and_time_converges() {
    let (t0, t1) = (1e-4, 2e-4);
    let reference = run_on(128, t0, t1);
    let mid = run_on(64, t0, t1);
    let coarse = run_on(32, t0, t1);
    let ref64 = restrict_to(&reference, mid.grid()).unwrap();
    let ref32 = restrict_to(&ref64, coarse.grid()).unwrap();
    let e_mid = lp_norm(&mid.sub(&ref64).unwrap(), 1.0).unwrap();
    let e_coarse = lp_norm(&coarse.sub(&ref32).unwrap(), 1.0).unwrap();
    assert!(e_coarse >= 3.0 * e_mid, "errors {e_coarse:.3e} -> {e_mid:.3e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transport_step_preserves_positivity(
        seed in proptest::collection::vec(0.0f64..1.0, 64),
        ur in -1.0f64..1.0,
        uz in -1.0f64..1.0,
        frac in 0.05f64..1.0,
        implicit in any::<bool>(),
    ) {
        let g = Grid::new(0.5, 1.5, -0.5, 0.5, 16, 16).unwrap();
        // blocky non-negative data with sharp edges
        let f = ScalarField::from_fn(g, |r, z| {
            let i = (((r - 0.5) * 8.0) as usize).min(7);
            let j = (((z + 0.5) * 8.0) as usize).min(7);
            let v = seed[i * 8 + j];
            if v > 0.5 { v } else { 0.0 }
        });
        let mut u = VectorField::zeros(g);
        for i in 0..g.n_r() {
            for j in 0..g.n_z() {
                let s = 1.0 + 0.5 * (g.r(i) * 7.0 + g.z(j) * 3.0).sin();
                u.u_r.set(i, j, ur * s);
                u.u_z.set(i, j, uz * s);
            }
        }
        let mode = if implicit { DiffusionMode::ImplicitSplitting } else { DiffusionMode::Explicit };
        let h = g.h_r();
        let speed = u.max_speed().max(1e-12);
        let mut dt = 0.4 * h / speed;
        if !implicit {
            dt = dt.min(0.4 * diffusion_limit(&g));
        }
        let out = advect_diffuse_mild(&f, &u, frac * dt, mode, 0.4, true).unwrap();
        prop_assert!(out.min() >= -1e-12 * f.max_abs().max(1e-300));
    }
}
