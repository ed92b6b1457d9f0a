use proptest::prelude::*;

use apsn::angular::AngularQuadrature;
use apsn::assembly::Scheme;
use apsn::cases::{planar_quadrature, Discretization, SolverOptions};
use apsn::mesh::{build_operators, build_uniform_1d, sigma_tilde, SquareMeshBuilder};
use apsn::problem::{BcMode, Inflow, ProblemSpec, Side};
use apsn::solver::SolveMethod;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn quadratures_satisfy_identities(half in 1usize..=6, n in 1usize..=8) {
        for q in [
            AngularQuadrature::triangular_sn(2 * half).unwrap(),
            planar_quadrature(2 * half).unwrap(),
            AngularQuadrature::slab(2 * n).unwrap(),
        ] {
            prop_assert!(q.validate().is_ok(), "{:?}", q.defects());
        }
    }

    #[test]
    fn operator_row_sums_vanish(n in 3usize..14, seed in any::<u64>(), jitter in 0.0f64..0.3, side in 0.1f64..50.0) {
        let mesh = SquareMeshBuilder::new(n).seed(seed).jitter(jitter).side(side).build().unwrap();
        let cells: Vec<f64> = (0..mesh.n_cells()).map(|c| (c % 5) as f64).collect();
        let ops = build_operators(&mesh, &sigma_tilde(&cells, mesh.diameter())).unwrap();
        let cmax = ops.c.iter().fold(0.0f64, |a, v| a.max(v.max_abs()));
        let dmax = ops.c_diff.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..ops.n_dofs() {
            let s = ops.row(i).fold(apsn::Vec3::ZERO, |acc, e| acc + ops.c[e]);
            prop_assert!(s.max_abs() <= 1e-12 * cmax);
            let sd: f64 = ops.row(i).map(|e| ops.c_diff[e]).sum();
            prop_assert!(sd.abs() <= 1e-12 * dmax);
        }
        let mass: f64 = ops.m.iter().sum();
        prop_assert!((mass - side * side).abs() <= 1e-10 * side * side);
    }

    #[test]
    fn absorbing_2d_solutions_obey_bounds(
        sigma_t in 0.1f64..20.0,
        ratio in 0.0f64..0.95,
        q in 0.0f64..5.0,
        inflow in 0.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let mesh = SquareMeshBuilder::new(7).seed(seed).build().unwrap();
        let spec = ProblemSpec::homogeneous(sigma_t, ratio * sigma_t, q).with_inflow(Inflow::Isotropic(inflow));
        let disc = Discretization::new(mesh, spec, planar_quadrature(4).unwrap()).unwrap();
        for scheme in [Scheme::Ap, Scheme::GraphViscosity] {
            let sol = disc.solve(scheme, &SolverOptions::default()).unwrap();
            let b = disc.bounds(scheme, &sol.field).unwrap();
            prop_assert!(b.passed(), "{scheme:?}: {:?}", b.violations);
            prop_assert!(b.lower.is_some() && b.upper.is_some());
        }
    }

    #[test]
    fn scattering_slabs_stay_nonnegative(
        sigma_t in 0.01f64..200.0,
        ratio in 0.0f64..=1.0,
        q in 0.0f64..2.0,
        beam in 0.0f64..2.0,
        length in 0.1f64..100.0,
        strong in any::<bool>(),
    ) {
        let mesh = build_uniform_1d(&[length], &[30]).unwrap();
        let mode = if strong { BcMode::Strong } else { BcMode::WeakPenalty };
        let spec = ProblemSpec::homogeneous(sigma_t, ratio * sigma_t, q)
            .with_inflow(Inflow::Beam { direction: 5, value: beam, side: Some(Side::Left) })
            .with_bc_mode(mode);
        let disc = Discretization::new(mesh, spec, AngularQuadrature::slab(8).unwrap()).unwrap();
        let sol = disc.solve(Scheme::Ap, &SolverOptions::default()).unwrap();
        prop_assert!(sol.field.min() >= -1e-10 * sol.field.max_abs().max(1e-300));
        prop_assert!(disc.bounds(Scheme::Ap, &sol.field).unwrap().passed());
    }

    #[test]
    fn source_iteration_matches_direct_on_thin_slabs(
        sigma_t in 0.1f64..5.0,
        ratio in 0.0f64..0.8,
        q in 0.1f64..2.0,
    ) {
        let mesh = build_uniform_1d(&[2.0], &[25]).unwrap();
        let spec = ProblemSpec::homogeneous(sigma_t, ratio * sigma_t, q);
        let disc = Discretization::new(mesh, spec, AngularQuadrature::slab(4).unwrap()).unwrap();
        let direct = disc.solve(Scheme::Ap, &SolverOptions::default()).unwrap().field;
        let opts = SolverOptions { method: SolveMethod::SourceIteration, tolerance: 1e-12, ..SolverOptions::default() };
        let si = disc.solve(Scheme::Ap, &opts).unwrap().field;
        let scale = direct.max_abs();
        for (a, b) in direct.values.iter().zip(&si.values) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }
}
