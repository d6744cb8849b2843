mod common;

use std::f64::consts::PI;

use pbounds::analytic::upper_bounds_2d;
use pbounds::cli::parse_grid;
use pbounds::constants::ConstantKind;
use pbounds::eigen::{BasisSpec, RayleighRitz};
use pbounds::eigenfunctions::compare_functions;
use pbounds::error::Error;
use pbounds::geometry::Triangle2D;
use pbounds::majorant::{report, FieldsSpec, MajorantOptions, Violation};
use pbounds::report::format_number;
use proptest::prelude::*;

const UNIT: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];

fn smooth(a: f64, b: f64) -> impl Fn([f64; 2]) -> f64 {
    move |p: [f64; 2]| (a * p[0]).sin() + b * p[1] * p[1] + p[0] * p[1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compare_is_symmetric_and_scale_invariant(a in 0.5f64..3.0, b in -2.0f64..2.0, s in prop::sample::select(vec![-3.0, -0.5, 0.25, 7.0])) {
        let u = smooth(a, b);
        let v = smooth(a + 0.7, -b);
        let d_uv = compare_functions(&u, &v, &UNIT, 8).unwrap();
        let d_vu = compare_functions(&v, &u, &UNIT, 8).unwrap();
        let d_scaled = compare_functions(&u, |p| s * v(p), &UNIT, 8).unwrap();
        prop_assert!((d_uv - d_vu).abs() < 1e-12);
        prop_assert!((d_uv - d_scaled).abs() < 1e-9);
        prop_assert!(compare_functions(&u, |p| s * u(p), &UNIT, 8).unwrap() < 1e-6);
    }

    #[test]
    fn lower_bounds_grow_with_degree_and_stay_below_upper(rho in 0.4f64..2.0, alpha in 0.3f64..2.8) {
        let t = Triangle2D::new(1.0, rho, alpha).unwrap();
        let up = upper_bounds_2d(&t).unwrap();
        let coarse = RayleighRitz::new(t, BasisSpec::monomial(2, 2)).unwrap();
        let fine = RayleighRitz::new(t, BasisSpec::monomial(2, 3)).unwrap();
        for kind in [ConstantKind::CpT, ConstantKind::CpGamma, ConstantKind::CtrGamma] {
            let lo = coarse.lower_bound(kind).unwrap().constant_lower_bound;
            let hi = fine.lower_bound(kind).unwrap().constant_lower_bound;
            let bound = match kind {
                ConstantKind::CpT => up.cp_classical,
                _ => up.get(kind),
            };
            prop_assert!(lo <= hi * (1.0 + 1e-12), "{kind:?}: {lo} > {hi}");
            prop_assert!(hi <= bound * (1.0 + 1e-12), "{kind:?}: {hi} > {bound}");
        }
    }

    #[test]
    fn majorant_dominates_true_error(
        cu in prop::array::uniform3(-1.0f64..1.0),
        cq in prop::array::uniform4(prop::array::uniform6(-1.0f64..1.0)),
        amp in 0.0f64..2.0,
    ) {
        let fields = FieldsSpec {
            v: vec![common::perturbed_u(cu); 4],
            q: common::perturbed_flux(&cq, amp),
            u_exact: Some(common::exact_u()),
        };
        let rep = report(&common::square_mesh(), &fields, MajorantOptions::default()).unwrap();
        let err = rep.true_error.unwrap();
        prop_assert!(rep.total >= err, "majorant {} < error {}", rep.total, err);
    }

    #[test]
    fn formatted_numbers_round_trip(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn grids_are_evenly_spaced(a in 0.01f64..1.5, b in 1.6f64..3.1, k in 2usize..40) {
        let g = parse_grid(&format!("{a}:{b}:{k}")).unwrap();
        prop_assert_eq!(g.len(), k);
        prop_assert!((g[0] - a).abs() < 1e-15 && (g[k - 1] - b).abs() < 1e-12);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0] && w[1] < PI));
    }
}

#[test]
fn exact_pair_has_vanishing_majorant() {
    let rep = report(&common::square_mesh(), &common::exact_fields(), MajorantOptions::default()).unwrap();
    assert!(rep.total < 1e-12, "{}", rep.total);
    assert_eq!(rep.true_error, Some(0.0));
}

#[test]
fn uncorrected_flux_is_rejected_with_the_failing_edge() {
    let mut fields = common::exact_fields();
    fields.q[0][0].push((0, 0, 0.3));
    match report(&common::square_mesh(), &fields, MajorantOptions::default()) {
        Err(Error::Inadmissible(v)) => {
            // A constant shift on subdomain 0 changes the flux through both of
            // its slanted interior edges.
            let edges: Vec<usize> = v
                .iter()
                .filter_map(|x| match x {
                    Violation::InteriorFluxMean { edge, .. } => Some(*edge),
                    _ => None,
                })
                .collect();
            assert_eq!(edges, vec![4, 5]);
        }
        other => panic!("expected rejection, got {other:?}"),
    }
}
