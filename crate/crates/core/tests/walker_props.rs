use fsplab::field::{Grid, ScalarField};
use fsplab::params::ModelParams;
use fsplab::walkers::{advance, local_tau, AdvanceOptions, Ensemble, JumpDistribution, JumpLaw, WeightRule};
use proptest::prelude::*;

fn heat() -> ModelParams {
    ModelParams { alpha: 0.0, beta: 0.0, k2: 0.5, domain_half_width: 8.0, ..ModelParams::default() }
}

fn law(p: &ModelParams, tau_ref: f64) -> JumpLaw {
    JumpLaw::einstein(JumpDistribution::GaussianIsotropic, p, tau_ref, &vec![0.0; p.dim]).unwrap()
}

fn bump(grid: &Grid) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |x| (1.0 - x[0] * x[0]).max(0.0).powi(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weight_is_conserved_without_reaction(seed in any::<u64>(), alpha in 0.0f64..2.0, conserved in any::<bool>()) {
        let grid = Grid::centered_box(1, 8.0, 0.05).unwrap();
        let p = ModelParams { alpha, ..heat() };
        let mut opts = AdvanceOptions::new(grid.clone(), 1e-3);
        // reweighting by arrival rate changes weight unless the rate is constant
        opts.weight_rule = if conserved || alpha == 0.0 { WeightRule::Conserved } else { WeightRule::ArrivalRate };
        let p = if opts.weight_rule == WeightRule::ArrivalRate { ModelParams { alpha: 0.0, ..p } } else { p };
        let mut ens = Ensemble::from_field(&bump(&grid), 2000, seed).unwrap();
        let before = ens.total_weight();
        let rep = advance(&mut ens, &law(&p, 1e-3), &p, 0.05, &opts).unwrap();
        prop_assert_eq!(rep.boundary_absorbed, 0);
        prop_assert_eq!(ens.total_weight(), before);
    }

    #[test]
    fn identical_seeds_give_identical_trajectories(seed in any::<u64>(), alpha in 0.0f64..2.0) {
        let grid = Grid::centered_box(1, 3.0, 0.05).unwrap();
        let p = ModelParams { alpha, domain_half_width: 3.0, ..heat() };
        let opts = AdvanceOptions::new(grid.clone(), 1e-3);
        let run = || {
            let mut ens = Ensemble::from_field(&bump(&grid), 500, seed).unwrap();
            let rep = advance(&mut ens, &law(&p, 1e-3), &p, 0.02, &opts).unwrap();
            (rep, ens.positions, ens.weights, ens.events, ens.alive)
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(a.0, b.0);
        prop_assert!(a.1.iter().zip(&b.1).all(|(x, y)| x[0].to_bits() == y[0].to_bits() && x[1].to_bits() == y[1].to_bits()));
        prop_assert!(a.2.iter().zip(&b.2).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert_eq!(a.3, b.3);
        prop_assert_eq!(a.4, b.4);
    }

    #[test]
    fn empty_cells_freeze_at_tau_max(
        x in -2.0f64..2.0, alpha in 0.1f64..3.0, beta in 0.0f64..2.0, tau_ref in 1e-4f64..1.0, cap in 1.0f64..1e4,
    ) {
        let grid = Grid::centered_box(1, 3.0, 0.1).unwrap();
        let p = ModelParams { alpha, beta, epsilon_reg: 0.0, ..ModelParams::default() };
        let zero = ScalarField::zeros(grid.clone());
        let grad = vec![0.0; grid.len()];
        prop_assert_eq!(local_tau(&[x], &p, &zero, Some(&grad), tau_ref, cap * tau_ref), cap * tau_ref);
    }
}

#[test]
fn symmetric_law_keeps_the_mean() {
    let p = heat();
    let grid = Grid::centered_box(1, 8.0, 0.1).unwrap();
    let opts = AdvanceOptions::new(grid, 0.01);
    let mut exceed = 0;
    for seed in 0..200 {
        let mut ens = Ensemble::point_source(1, 2000, &[0.0], 1.0, seed);
        advance(&mut ens, &law(&p, 0.01), &p, 0.2, &opts).unwrap();
        let (mean, _) = ens.moments(0);
        let (se, _) = ens.moment_standard_errors(0);
        if (mean / se).abs() > 3.0 {
            exceed += 1;
        }
    }
    assert!(exceed < 2, "{exceed} of 200 runs had |t| > 3");
}
