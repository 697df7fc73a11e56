use num_complex::Complex64;
use proptest::prelude::*;

use utm_qp::fdm::fd_weights;
use utm_qp::profiles::{DataProfile, ForcingProfile, Pde, ProblemSpec};
use utm_qp::quadrature::QuadConfig;
use utm_qp::reductions::{oblique_phi_check, robin_map, robin_phi_check, RobinSpec};
use utm_qp::solvers::{solve, SolverConfig};
use utm_qp::transforms::{half_line_fourier, half_line_fourier_quadrature};
use utm_qp::verification::FnField;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_is_conjugate_symmetric(re in -5.0f64..5.0, im in -3.0f64..0.0, a in 0.5f64..3.0) {
        let u0 = DataProfile::exp_decay(a);
        let cfg = QuadConfig::default();
        let l = Complex64::new(re, im);
        let v = half_line_fourier(&u0, l, &cfg).unwrap();
        let w = half_line_fourier(&u0, -l.conj(), &cfg).unwrap();
        prop_assert!((w - v.conj()).norm() <= 1e-12 * (1.0 + v.norm()));
        let (q, _) = half_line_fourier_quadrature(&u0, l, &cfg).unwrap();
        prop_assert!((q - v).norm() <= 1e-8 * (1.0 + v.norm()));
    }

    #[test]
    fn fd_weights_are_exact_on_polynomials(deriv in 1usize..4, x0 in -1.0f64..1.0) {
        let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(&offsets, deriv);
        for p in 0..offsets.len() {
            let approx: f64 = offsets.iter().zip(&w).map(|(o, c)| c * (x0 + o).powi(p as i32)).sum();
            let exact = if p < deriv {
                0.0
            } else {
                (0..deriv).map(|j| (p - j) as f64).product::<f64>() * x0.powi((p - deriv) as i32)
            };
            prop_assert!((approx - exact).abs() <= 1e-9 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn robin_map_is_linear(a in -2.0f64..2.0, b in 0.1f64..2.0, s in -3.0f64..3.0, x in 0.5f64..2.0, t in 0.1f64..1.0) {
        let r = RobinSpec::new(a, b, 0.0).unwrap();
        let f = FnField(|x: f64, t: f64| Ok((-x).exp() * (1.0 + t)));
        let g = FnField(|x: f64, t: f64| Ok((x * t).sin()));
        let h = FnField(move |x: f64, t: f64| Ok((-x).exp() * (1.0 + t) + s * (x * t).sin()));
        let lhs = robin_map(&h, &r, x, t).unwrap();
        let rhs = robin_map(&f, &r, x, t).unwrap() + s * robin_map(&g, &r, x, t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_vanishes_for_positive_parameters(a in 0.05f64..5.0, b in 0.05f64..5.0, c in 0.05f64..5.0) {
        prop_assert!(robin_phi_check(a, b).unwrap().phi_vanishes);
        prop_assert!(oblique_phi_check(a, b, c).unwrap().phi_vanishes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solution_is_linear_in_data(s in -2.0f64..2.0, x in 0.2f64..2.0, t in 0.1f64..1.5, kdv in any::<bool>()) {
        let pde = if kdv { Pde::Kdv } else { Pde::Heat };
        let cfg = SolverConfig::default();
        let p1 = ProblemSpec::new(pde, DataProfile::exp_decay(1.0), DataProfile::exp_of_t(-1.0), ForcingProfile::zero());
        let p2 = ProblemSpec::new(pde, DataProfile::gaussian(1.0), DataProfile::sin_of_t(1.0), ForcingProfile::zero());
        let p12 = ProblemSpec::new(
            pde,
            p1.u0.combine(1.0, &p2.u0, s),
            p1.g0.combine(1.0, &p2.g0, s),
            ForcingProfile::zero(),
        );
        let u1 = solve(&p1, x, t, &cfg).unwrap().value;
        let u2 = solve(&p2, x, t, &cfg).unwrap().value;
        let u12 = solve(&p12, x, t, &cfg).unwrap().value;
        prop_assert!((u12 - (u1 + s * u2)).abs() <= 1e-8 * (1.0 + u12.abs()));
    }
}
