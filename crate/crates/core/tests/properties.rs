use hdirac_core::algebra::{beta, max_entry, projector, propagator_symbol, FrequencyPoint, Mat4, Sign};
use hdirac_core::estimates::random_annulus_spinor;
use hdirac_core::grid::{
    cap_set, make_grid, mixed_norm, sobolev_norm, Direction, Exponent, Representation, SpinorField, Trajectory,
};
use hdirac_core::illposed::{kernel_bounds, kernel_entry_check, AnnulusSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = [f64; 3]> {
    [lo..hi, lo..hi, lo..hi]
}

fn random_field(n: usize, length: f64, seed: u64) -> SpinorField {
    let g = make_grid(n, length).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpinorField::zeros(g, Representation::Physical);
    for i in 0..g.len() {
        f.set(i, [0; 4].map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)));
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projectors_split_identity(xi in vec3(-30.0, 30.0), m in 0.0f64..4.0) {
        prop_assume!(xi.iter().any(|x| x.abs() > 1e-3) || m > 0.0);
        let p = FrequencyPoint::new(xi, m);
        let plus = projector(&p, Sign::Plus).unwrap().entries;
        let minus = projector(&p, Sign::Minus).unwrap().entries;
        prop_assert!(max_entry(&(plus * plus - plus)) <= 1e-12);
        prop_assert!(max_entry(&(plus + minus - Mat4::identity())) <= 1e-12);
        prop_assert!(max_entry(&(plus * minus)) <= 1e-12);
        if m == 0.0 {
            prop_assert!(max_entry(&(plus * beta() * plus)) <= 1e-14);
        }
    }

    #[test]
    fn propagator_group_law(xi in vec3(-30.0, 30.0), m in 0.0f64..4.0, s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let p = FrequencyPoint::new(xi, m);
        let lhs = propagator_symbol(s, &p).entries * propagator_symbol(t, &p).entries;
        prop_assert!(max_entry(&(lhs - propagator_symbol(s + t, &p).entries)) <= 1e-10);
        let u = propagator_symbol(t, &p).entries;
        prop_assert!(max_entry(&(u * u.adjoint() - Mat4::identity())) <= 1e-10);
    }

    #[test]
    fn kernel_entry_bounds_hold(
        lam in 4.0f64..64.0, eps in 0.01f64..0.2, m in 0.0f64..2.0,
        u in vec3(-1.0, 1.0), v in vec3(-1.0, 1.0), r1 in 1.0f64..2.0, r2 in 1.0f64..2.0,
        a in -1.0f64..1.0, b in -1.0f64..1.0,
    ) {
        let norm = |w: [f64; 3]| (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        prop_assume!(norm(u) > 1e-3 && norm(v) > 1e-3);
        let xi = u.map(|x| x * lam * r1 / norm(u));
        let eta = v.map(|x| x * lam * r2 / norm(v));
        let ann = AnnulusSpec::new(lam, eps);
        let k = kernel_entry_check(&ann, a * ann.time(), xi, b * ann.time(), eta, m).unwrap();
        prop_assert!(k.matrix_gap <= 1e-12);
        let (lo, hi) = kernel_bounds(lam, eps, m);
        for z in [k.direct, k.transposed] {
            prop_assert!(z.re >= lo && z.im.abs() <= hi);
        }
    }

    #[test]
    fn angular_symbols_are_degree_zero(xi in vec3(-10.0, 10.0), j in -6i32..6, l in 1u32..5) {
        prop_assume!(xi.iter().any(|x| x.abs() > 1e-6));
        let caps = cap_set(l).unwrap();
        let c = 2f64.powi(j);
        let scaled = xi.map(|x| x * c);
        for nu in caps.active(xi) {
            prop_assert_eq!(caps.kappa(nu, xi), caps.kappa(nu, scaled));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_is_unitary(seed in any::<u64>()) {
        let f = random_field(8, 2.5, seed);
        let h = f.transformed(Direction::Forward);
        prop_assert!((h.l2_norm() / f.l2_norm() - 1.0).abs() <= 1e-12);
        let back = h.transformed(Direction::Inverse);
        prop_assert!(back.sub(&f).l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn mixed_norm_is_a_norm(seed in any::<u64>(), scale in 0.01f64..100.0, p in 2.0f64..8.0, q in 1.0f64..8.0) {
        let times = vec![0.0, 0.5, 1.0];
        let a: Vec<SpinorField> = (0..3).map(|j| random_field(8, 2.0, seed.wrapping_add(j))).collect();
        let b: Vec<SpinorField> = (0..3).map(|j| random_field(8, 2.0, seed.wrapping_add(100 + j))).collect();
        let (p, q) = (Exponent::finite(p).unwrap(), Exponent::finite(q).unwrap());
        let norm = |fs: Vec<SpinorField>| mixed_norm(&Trajectory::new(times.clone(), fs).unwrap(), p, q).unwrap();
        let na = norm(a.clone());
        let nb = norm(b.clone());
        let scaled = norm(a.iter().map(|f| f.scaled(scale.into())).collect());
        prop_assert!((scaled / (scale * na) - 1.0).abs() <= 1e-10);
        let sum = norm(a.iter().zip(&b).map(|(x, y)| x.add(y)).collect());
        prop_assert!(sum <= (na + nb) * (1.0 + 1e-10));
    }

    #[test]
    fn annulus_data_is_deterministic(seed in any::<u64>(), k in 0i32..3) {
        let g = make_grid(16, 3.0).unwrap();
        let a = random_annulus_spinor(&g, k, Some(Sign::Plus), 1.0, seed).unwrap();
        let b = random_annulus_spinor(&g, k, Some(Sign::Plus), 1.0, seed).unwrap();
        prop_assert_eq!(a.sub(&b).max_abs(), 0.0);
        prop_assert!((sobolev_norm(&a, 0.0, 1.0).unwrap() - 1.0).abs() <= 1e-12);
    }
}
