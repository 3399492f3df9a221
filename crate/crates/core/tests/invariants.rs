//! Property tests. Each property is stated against an oracle that does not
//! reuse the code path under test: ring axioms, a direct sum over modes, a
//! determinant identity, or a parse of the printed form.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qws::lattice::{lattice_qgauge, random_lattice_unipotent};
use qws::loop_sl::{det, is_in_mcell, matrix_from_json, matrix_to_json, qgauge, random_mcell, random_unipotent};
use qws::ring::rat;
use qws::{Cyclo, CycloRat, Field, LatticeConnection, LatticeR, LaurentSeries, Poly, Ring};

const CONDUCTORS: [u32; 5] = [1, 3, 4, 5, 6];

fn cyclo() -> impl Strategy<Value = Cyclo> {
    (prop::sample::select(CONDUCTORS.to_vec()), prop::collection::vec((-4i64..=4, 1i64..=3), 1..5))
        .prop_map(|(h, cs)| Cyclo::from_poly(h, Poly::from_coeffs(cs.into_iter().map(|(n, d)| rat(n, d)).collect())))
}

fn poly() -> impl Strategy<Value = Poly<Cyclo>> {
    prop::collection::vec((-3i64..=3).prop_map(Cyclo::from_int), 1..4).prop_map(Poly::from_coeffs)
}

fn ratfunc() -> impl Strategy<Value = CycloRat> {
    (poly(), poly()).prop_filter_map("nonzero denominator", |(n, d)| CycloRat::new(n, d).ok())
}

fn series() -> impl Strategy<Value = LaurentSeries> {
    (-3i64..=1, prop::collection::vec(-3i64..=3, 1..5))
        .prop_map(|(lo, cs)| LaurentSeries::exact(lo, cs.into_iter().map(CycloRat::from_i64).collect()))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cyclotomic_field_axioms(a in cyclo(), b in cyclo(), c in cyclo()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        if let Some(i) = a.inv() {
            prop_assert!(a.mul(&i).is_one());
        } else {
            prop_assert!(a.is_zero());
        }
    }

    #[test]
    fn galois_action_is_a_ring_homomorphism(a in cyclo(), b in cyclo(), k in prop::sample::select(vec![1i64, 7, 11, 13])) {
        // k is prime to every conductor a product can reach (divisors of 60).
        prop_assert_eq!(a.mul(&b).galois(k), a.galois(k).mul(&b.galois(k)));
        prop_assert_eq!(a.add(&b).galois(k), a.galois(k).add(&b.galois(k)));
    }

    #[test]
    fn rational_function_field_axioms(a in ratfunc(), b in ratfunc(), c in ratfunc()) {
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        if let Some(q) = a.div(&b) {
            prop_assert_eq!(q.mul(&b), a);
        }
    }

    #[test]
    fn rational_function_text_round_trip(a in ratfunc(), h in prop::sample::select(CONDUCTORS.to_vec())) {
        let zeta = CycloRat::from_cyclo(Cyclo::root_of_unity(h, 1));
        let x = a.mul(&zeta);
        prop_assert_eq!(CycloRat::parse(&x.to_text(), h).unwrap(), x);
    }

    #[test]
    fn substituting_a_power_of_q_is_a_homomorphism(a in ratfunc(), b in ratfunc(), k in -3i64..=3) {
        prop_assume!(k != 0);
        let s = |x: &CycloRat| x.subs_power(k);
        if let (Some(sa), Some(sb), Some(sab)) = (s(&a), s(&b), s(&a.mul(&b))) {
            prop_assert_eq!(sab, sa.mul(&sb));
        }
    }

    #[test]
    fn series_ring_axioms_and_tau(x in series(), y in series(), z in series(), k in -2i64..=2) {
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y).tau(k), x.tau(k).mul(&y.tau(k)));
        prop_assert_eq!(x.tau(k).tau(-k), x);
    }

    #[test]
    fn residue_pairing_is_a_direct_sum_and_tau_invariant(x in series(), y in series(), k in -2i64..=2) {
        let mut direct = CycloRat::zero();
        for m in -8..=8 {
            if let (Some(a), Some(b)) = (x.coeff(m), y.coeff(-m)) {
                direct = direct.add(&a.mul(&b));
            }
        }
        let p = x.residue_pairing(&y).unwrap();
        prop_assert_eq!(&p, &direct);
        prop_assert_eq!(x.tau(k).residue_pairing(&y.tau(k)).unwrap(), p);
    }

    #[test]
    fn series_json_round_trip(x in series()) {
        let t = x.truncate(x.hi() - 1);
        for s in [x, t] {
            let back = LaurentSeries::from_json(&s.to_json(), 1).unwrap();
            prop_assert_eq!(back.is_exact(), s.is_exact());
            prop_assert_eq!(back.precision(), s.precision());
            prop_assert_eq!(back, s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qgauge_preserves_the_cell_and_the_determinant(seed in any::<u64>(), n in 2usize..=4) {
        let mut g = rng(seed);
        let l = random_mcell(&mut g, n, -1, 1);
        let v = random_unipotent(&mut g, n, -1, 1);
        let moved = qgauge(&v, &l).unwrap();
        prop_assert!(is_in_mcell(&moved));
        // det(v^τ) = det(v) = 1, so the determinant is unchanged.
        prop_assert!(det(&moved).agrees_on_common_window(&det(&l)));
    }

    #[test]
    fn loop_matrix_json_round_trip(seed in any::<u64>(), n in 2usize..=3) {
        let l = random_mcell(&mut rng(seed), n, -1, 1);
        let back = matrix_from_json(&matrix_to_json(&l), 1).unwrap();
        prop_assert_eq!(back, l);
    }

    #[test]
    fn lattice_gauge_preserves_site_determinants(seed in any::<u64>(), n in 2usize..=3, len in 1usize..=4) {
        let mut g = rng(seed);
        let l = LatticeConnection::random_mcell(&mut g, n, len);
        let moved = lattice_qgauge(&random_lattice_unipotent(&mut g, n, len), &l).unwrap();
        prop_assert!(moved.is_in_mcell());
        for (a, b) in moved.sites().iter().zip(l.sites()) {
            prop_assert_eq!(a.det(), b.det());
        }
        prop_assert_eq!(LatticeConnection::from_json(&l.to_json()).unwrap(), l);
    }

    #[test]
    fn lattice_bracket_is_antisymmetric(seed in any::<u64>(), len in prop::sample::select(vec![1usize, 3, 5])) {
        let mut g = rng(seed);
        let r = LatticeR::new(2, len).unwrap();
        let l = LatticeConnection::random_sl(&mut g, 2, len);
        let p = r.bivector(l.sites());
        prop_assert_eq!(p.add(&p.transpose()), qws::Matrix::zeros(p.rows(), p.cols()));
    }
}
