use flrw_boltzmann::collision::KernelSpec;
use flrw_boltzmann::config::RunConfig;
use flrw_boltzmann::diagnostics::{run_cutoff_study, run_kinematics_suite, run_symmetry_suite, KinematicsSuiteConfig};
use flrw_boltzmann::state::InitFamily;

fn tiny(kernel: KernelSpec<f64>) -> RunConfig<f64> {
    let mut c = RunConfig::with_kernel(kernel);
    c.grid.radial_nodes = 16;
    c.grid.direction_degree = 3;
    c.grid.q_radial_nodes = 8;
    c.grid.q_degree = 5;
    c.grid.omega_degree = 7;
    c.integrator.t_end = 2.0;
    c
}

#[test]
fn kinematics_report_is_reproducible() {
    let mut cfg = KinematicsSuiteConfig::new(11, 500);
    cfg.monte_carlo_samples = 10_000;
    let a = run_kinematics_suite::<f64>(&cfg).unwrap().to_text(&[]);
    let b = run_kinematics_suite::<f64>(&cfg).unwrap().to_text(&[]);
    assert_eq!(a, b);
    cfg.seed = 12;
    assert_ne!(a, run_kinematics_suite::<f64>(&cfg).unwrap().to_text(&[]));
    cfg.trials = 0;
    assert!(run_kinematics_suite::<f64>(&cfg).is_err());
}

#[test]
fn kinematics_suite_in_single_precision() {
    let mut cfg = KinematicsSuiteConfig::new(3, 200);
    cfg.monte_carlo_samples = 1000;
    cfg.omega_degree = 17;
    let r = run_kinematics_suite::<f32>(&cfg).unwrap();
    assert!(r.energy < 1e-5, "{}", r.energy);
    assert!(r.angular.iter().all(|&e| e < 1e-4), "{:?}", r.angular);
}

#[test]
fn cutoff_study_matrix_invariants() {
    let cfg = tiny(KernelSpec::soft(0.5, 1000.0).unwrap());
    let r = run_cutoff_study(&cfg, &[8.0, 2.0, 4.0]).unwrap();
    assert_eq!(r.cutoffs, vec![2.0, 4.0, 8.0]);
    let m = &r.pairwise_dist;
    for (i, row) in m.iter().enumerate() {
        assert_eq!(row[i], 0.0);
        for (j, &d) in row.iter().enumerate() {
            assert_eq!(d, m[j][i]);
            assert!(d >= 0.0);
        }
    }
    assert_eq!(r.distances[2], 0.0);
    assert_eq!(r.reference_rate, -0.5);
    let csv = r.matrix_csv(&["hdr".into()]);
    assert!(csv.starts_with("# hdr\nk,"));
    assert!(r.to_text(&[]).contains("[cutoff_study.pairwise]"));
}

#[test]
fn cutoff_study_preconditions() {
    let cfg = tiny(KernelSpec::hard(0.0, 1000.0).unwrap());
    assert!(run_cutoff_study(&cfg, &[2.0, 4.0]).is_err());
    assert!(run_cutoff_study(&cfg, &[2.0, 4.0, 5.0]).is_err());
    assert!(run_cutoff_study(&cfg, &[0.0, 4.0, 8.0]).is_err());
}

#[test]
fn identical_runs_are_at_distance_zero() {
    let cfg = tiny(KernelSpec::hard(0.0, 8.0).unwrap());
    let problem = cfg.problem().unwrap();
    let a = problem.simulate(cfg.initial_state().unwrap()).unwrap().final_state;
    let b = problem.simulate(cfg.initial_state().unwrap()).unwrap().final_state;
    assert_eq!(a.distance_l1r(&b, 0.0).unwrap(), 0.0);
    assert_eq!(a.distance_l1r(&b, 1.0).unwrap(), 0.0);
}

#[test]
fn symmetry_suite_on_a_small_grid() {
    let mut cfg = tiny(KernelSpec::hard(1.0, 1000.0).unwrap());
    cfg.grid.q_degree = 3;
    cfg.grid.omega_degree = 3;
    cfg.integrator.t_end = 0.5;
    cfg.init = InitFamily::CanonicalSmall { epsilon: 0.02 };
    let r = run_symmetry_suite(&cfg).unwrap();
    assert!(r.isotropy_variance <= 1e-8, "{}", r.isotropy_variance);
    assert!(r.equivariance_error <= 1e-6, "{}", r.equivariance_error);
    assert!(r.beta_zero_identical);
    assert!(r.to_text(&[]).contains("beta_zero_identical = true"));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let mut cfg = tiny(KernelSpec::soft(0.5, 100.0).unwrap());
    cfg.init = InitFamily::Anisotropic {
        epsilon: 0.01,
        beta: 0.5,
        axis: flrw_boltzmann::kinematics::MomentumVector::new(1.0, 2.0, 2.0),
    };
    cfg.integrator.t_end = 0.5;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let r = cfg.problem().unwrap().simulate(cfg.initial_state().unwrap()).unwrap();
            (r.series.to_csv(&[]), r.final_state.g)
        })
    };
    let (csv1, g1) = run(1);
    let (csv3, g3) = run(3);
    assert_eq!(csv1, csv3);
    assert!(g1.iter().zip(&g3).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn single_precision_simulation_runs() {
    let mut c = RunConfig::<f32>::with_kernel(KernelSpec::hard(1.0, 10.0).unwrap());
    c.grid.radial_nodes = 16;
    c.grid.direction_degree = 3;
    c.grid.q_radial_nodes = 8;
    c.grid.q_degree = 5;
    c.grid.omega_degree = 7;
    c.integrator.t_end = 1.0;
    let r = c.problem().unwrap().simulate(c.initial_state().unwrap()).unwrap();
    let recs = &r.series.records;
    let drift = (recs.last().unwrap().number / recs[0].number - 1.0).abs();
    assert!(drift < 1e-3, "{drift}");
}
