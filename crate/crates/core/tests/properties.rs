use std::f64::consts::TAU;

use proptest::prelude::*;
use wcomp_core::criteria::{ahern_clark_sum, jc_quotient_probe};
use wcomp_core::functions::{emit_spec, parse_spec, Atom, Cplx, FunctionSpec, InnerFunctionData};
use wcomp_core::operators::{build_operator_matrix, schatten_from_singular_values};
use wcomp_core::series::{
    compose, default_radius, taylor_coefficients, taylor_coefficients_sampled, BoundarySamples, PowerSeries,
};
use wcomp_core::spaces::{inner_product, kernel_coeffs, kphi_project, norm, KernelFamily, KernelKind, SpaceSpec};
use wcomp_core::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn point(rmax: f64) -> impl Strategy<Value = C64> {
    (0.0..rmax, 0.0..TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), 1..=max_len)
}

fn zeros(max: usize, rmax: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((0.05..rmax, 0.0..TAU).prop_map(|(r, t)| C64::from_polar(r, t)), 0..=max)
}

fn atoms(max: usize) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec((0.0..TAU, 0.05..2.0f64).prop_map(|(angle, mass)| Atom { angle, mass }), 0..=max)
}

fn self_maps() -> Vec<FunctionSpec> {
    vec![
        FunctionSpec::monomial(3),
        FunctionSpec::Icecream,
        FunctionSpec::ExpOfMoebius,
        FunctionSpec::automorphism(c(0.3, -0.4)),
        FunctionSpec::Blaschke(InnerFunctionData::blaschke(1, &[c(0.5, 0.0)])),
        FunctionSpec::SingularInner { atoms: vec![Atom { angle: 2.0, mass: 0.7 }] },
        FunctionSpec::dilation(0.5),
    ]
}

fn weights() -> Vec<FunctionSpec> {
    let mut v = vec![
        FunctionSpec::frac_power(0.375),
        FunctionSpec::frac_power(-0.1),
        FunctionSpec::affine(c(1.0, 0.0), c(0.5, 0.0), FunctionSpec::identity()),
        FunctionSpec::product(vec![FunctionSpec::frac_power(0.25), FunctionSpec::automorphism(c(0.0, 0.5))]),
        FunctionSpec::series(PowerSeries::from_real(&[1.0, 0.5, 0.25, 0.125]).unwrap()),
    ];
    v.extend(self_maps());
    v
}

fn leaf_spec() -> impl Strategy<Value = FunctionSpec> {
    prop_oneof![
        (0u32..6).prop_map(FunctionSpec::monomial),
        (-2.0..2.0f64).prop_map(FunctionSpec::frac_power),
        point(0.95).prop_map(FunctionSpec::automorphism),
        Just(FunctionSpec::ExpOfMoebius),
        Just(FunctionSpec::Icecream),
        (0.0..TAU, 0u32..3, zeros(3, 0.95), atoms(2)).prop_map(|(rotation, n, z, a)| {
            let mut d = InnerFunctionData::blaschke(n, &z);
            d.rotation = rotation;
            d.atoms = a;
            FunctionSpec::Blaschke(d)
        }),
        coeffs(6).prop_map(|v| FunctionSpec::series(PowerSeries::new(v).unwrap())),
    ]
}

fn spec() -> impl Strategy<Value = FunctionSpec> {
    leaf_spec().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (point(2.0), point(2.0), inner.clone()).prop_map(|(a, b, g)| FunctionSpec::affine(a, b, g)),
            prop::collection::vec(inner.clone(), 1..3).prop_map(FunctionSpec::product),
            prop::collection::vec(inner, 1..3).prop_map(FunctionSpec::composition),
        ]
    })
}

/// `|φ′(ζ)|` of `z^n ∏ (a − z)/(1 − āz)·|a|/a` at a boundary point.
fn blaschke_boundary_derivative(n: u32, zeros: &[C64], zeta: C64) -> f64 {
    n as f64 + zeros.iter().map(|a| (1.0 - a.norm_sqr()) / (zeta - a).norm_sqr()).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polynomial_coefficients_round_trip(v in coeffs(65)) {
        let order = 64;
        let p = PowerSeries::new(v.clone()).unwrap();
        let f = FunctionSpec::series(p);
        let exact = taylor_coefficients(&f, order, default_radius(order)).unwrap();
        let sampled = taylor_coefficients_sampled(&f, order, default_radius(order)).unwrap();
        let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
        for n in 0..=order {
            let want = v.get(n).copied().unwrap_or_default();
            prop_assert!((exact.coeff(n) - want).norm() <= 1e-12);
            prop_assert!((sampled.coeff(n) - want).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn parseval_for_bounded_inner_symbols(z in zeros(4, 0.8), a in point(0.8), rot in 0.0..TAU) {
        let mut d = InnerFunctionData::blaschke(0, &z);
        d.rotation = rot;
        let f = FunctionSpec::product(vec![FunctionSpec::Blaschke(d), FunctionSpec::automorphism(a)]);
        let order = 256;
        let s = taylor_coefficients(&f, order, default_radius(order)).unwrap();
        let samples = BoundarySamples::from_fn(1.0, 4 * 256, |w| f.eval(w)).unwrap();
        prop_assert!((s.l2_norm_sq() - samples.mean_abs_sq()).abs() < 1e-10);
        prop_assert!((s.l2_norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn compose_then_eval_matches_eval_of_eval(fi in 0usize..12, pi in 0usize..7, z in point(0.5)) {
        let (f, phi) = (&weights()[fi], &self_maps()[pi]);
        let order = 256;
        let fs = taylor_coefficients(f, order, default_radius(order)).unwrap();
        let ps = taylor_coefficients(phi, order, default_radius(order)).unwrap();
        let got = compose(&fs, &ps).unwrap().series.eval(z);
        let want = f.eval(phi.eval(z).unwrap()).unwrap();
        prop_assert!((got - want).norm() <= 1e-8 * want.norm().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn spec_wire_format_round_trips(s in spec()) {
        let text = emit_spec(&s);
        match parse_spec(&text) {
            Ok(back) => {
                prop_assert_eq!(&back, &s);
                prop_assert_eq!(emit_spec(&back), text);
            }
            Err(_) => prop_assert!(s.validate().is_err()),
        }
    }

    #[test]
    fn kernels_reproduce_point_values(v in coeffs(21), w in point(0.9), alpha in -0.9..3.0f64, bergman in any::<bool>()) {
        let order = 64;
        let space = if bergman { SpaceSpec::bergman(alpha).unwrap() } else { SpaceSpec::Hardy };
        let f = PowerSeries::new(v).unwrap().resized(order);
        let k = kernel_coeffs(&KernelFamily::new(space, KernelKind::Standard, w), order).unwrap();
        let got = inner_product(space, &f, &k);
        prop_assert!((got - f.eval(w)).norm() <= 1e-10 * norm(space, &f).max(1e-300));
        let kn = kernel_coeffs(&KernelFamily::new(space, KernelKind::Normalized, w), 4096).unwrap();
        prop_assert!((norm(space, &kn) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn model_space_projection_is_idempotent_and_contractive(v in coeffs(9), z in zeros(3, 0.9)) {
        let phi = FunctionSpec::Blaschke(InnerFunctionData::blaschke(1, &z));
        let order = 512;
        let h = PowerSeries::new(v).unwrap().resized(order);
        let p = kphi_project(&h, &phi, order).unwrap();
        let pp = kphi_project(&p, &phi, order).unwrap();
        let diff: f64 = p.coeffs().iter().zip(pp.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-8);
        prop_assert!(p.l2_norm_sq() <= h.l2_norm_sq() * (1.0 + 1e-12));
    }

    #[test]
    fn truncation_norms_are_monotone_and_ordered(
        v in coeffs(4), s in 0.2..0.9f64, a in point(0.7), p in 1.0..4.0f64, dq in 0.0..4.0f64,
    ) {
        let h = FunctionSpec::series(PowerSeries::new(v).unwrap());
        let phi = FunctionSpec::composition(vec![FunctionSpec::automorphism(a), FunctionSpec::dilation(s)]);
        let m = build_operator_matrix(&h, &phi, SpaceSpec::Hardy, 32).unwrap();
        let sv = m.singular_values().unwrap().to_vec();
        prop_assert!(schatten_from_singular_values(&sv, p) >= schatten_from_singular_values(&sv, p + dq) * (1.0 - 1e-12));
        let tops: Vec<f64> = [8, 16, 32].iter().map(|&k| m.compression(k).singular_values().unwrap()[0]).collect();
        prop_assert!(tops[0] <= tops[1] * (1.0 + 1e-12) && tops[1] <= tops[2] * (1.0 + 1e-12));
    }

    #[test]
    fn ahern_clark_is_permutation_invariant_and_additive(
        z in zeros(8, 0.95), a in atoms(3), b in atoms(3), theta in 0.0..TAU, n in 0u32..3, seed in any::<u64>(),
    ) {
        let zeta = C64::from_polar(1.0, theta);
        prop_assume!(a.iter().chain(&b).all(|t| (t.point() - zeta).norm() > 1e-2));
        let mut d = InnerFunctionData::blaschke(n, &z);
        d.atoms = a.clone();
        let base = ahern_clark_sum(&d, zeta, None).unwrap();

        let mut shuffled = d.clone();
        let k = shuffled.zeros.len();
        if k > 1 {
            shuffled.zeros.rotate_left((seed as usize) % k);
            shuffled.zeros.swap(0, k - 1);
        }
        let perm = ahern_clark_sum(&shuffled, zeta, None).unwrap();
        prop_assert_eq!(perm.value().is_some(), base.value().is_some());

        let mut joined = d.clone();
        joined.atoms.extend(b.iter().cloned());
        let extra = ahern_clark_sum(&InnerFunctionData::singular(b.clone()), zeta, None).unwrap().value().unwrap();
        let total = ahern_clark_sum(&joined, zeta, None).unwrap();
        prop_assert_eq!(total.value().is_some(), base.value().is_some());
        if let (Some(base), Some(perm), Some(total)) = (base.value(), perm.value(), total.value()) {
            prop_assert!((perm - base).abs() <= 1e-12 * base.max(1.0));
            prop_assert!((total - (base + extra)).abs() <= 1e-12 * total.max(1.0));
        }
    }

    #[test]
    fn inner_functions_stay_inside_the_disc(z in zeros(4, 0.95), a in atoms(2), w in point(0.999), rot in 0.0..TAU) {
        let mut d = InnerFunctionData::blaschke(0, &z);
        d.atoms = a;
        d.rotation = rot;
        prop_assert!(d.inner_eval(w).unwrap().norm() < 1.0 || (d.zeros.is_empty() && d.atoms.is_empty()));
    }

    #[test]
    fn angular_quotient_of_finite_blaschke_is_boundary_derivative(z in zeros(3, 0.9), n in 0u32..3, theta in 0.0..TAU) {
        prop_assume!(n > 0 || !z.is_empty());
        let phi = FunctionSpec::Blaschke(InnerFunctionData::blaschke(n, &z));
        let probe = jc_quotient_probe(&phi, theta).unwrap();
        let exact = blaschke_boundary_derivative(n, &z, C64::from_polar(1.0, theta));
        let limit = probe.limit.expect("finite Blaschke quotients converge");
        prop_assert!((limit - exact).abs() <= 0.01 * exact, "{limit} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn singular_inner_ratio_matches_closed_form(r in 0.0..0.999f64, alpha in 0.0..TAU) {
        let w = C64::from_polar(r, alpha);
        let v = FunctionSpec::ExpOfMoebius.eval(w).unwrap();
        let got = (1.0 - v.norm_sqr()) / (1.0 - w.norm_sqr());
        let want = (1.0 - (-2.0 * (1.0 - r * r) / (1.0 - w).norm_sqr()).exp()) / (1.0 - r * r);
        prop_assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    }
}

#[test]
fn wire_complex_is_stable() {
    let z = Cplx(c(0.1, -0.2));
    let s = serde_json::to_string(&z).unwrap();
    assert_eq!(serde_json::from_str::<Cplx>(&s).unwrap(), z);
}
