mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use tamelift::charp::{center_bracket, phi_p};
use tamelift::morphism::{check_symplecto, truncated_inverse};
use tamelift::singlift::hn_scan;
use tamelift::tame::{evaluate, invert_word, random_tame};
use tamelift::text::{parse_terms, print_terms};
use tamelift::*;

fn flavor_of(code: u8, n: usize) -> Flavor {
    flavors(n)[code as usize % 3]
}

fn int(c: &Rational) -> i128 {
    c.numer().to_string().parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(seed in any::<u64>(), code in 0u8..3, n in 1usize..=2) {
        let fl = flavor_of(code, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Poly::new(fl, (), random_terms::<Rational>(&fl, &(), 3, 3, &mut rng));
        let g = Poly::new(fl, (), random_terms::<Rational>(&fl, &(), 3, 3, &mut rng));
        let k = Poly::new(fl, (), random_terms::<Rational>(&fl, &(), 3, 3, &mut rng));
        prop_assert!(f.bracket(&g).unwrap().add(&g.bracket(&f).unwrap()).unwrap().is_zero());
        let j = f.bracket(&g.bracket(&k).unwrap()).unwrap()
            .add(&g.bracket(&k.bracket(&f).unwrap()).unwrap()).unwrap()
            .add(&k.bracket(&f.bracket(&g).unwrap()).unwrap()).unwrap();
        prop_assert!(j.is_zero());
    }

    #[test]
    fn weyl_product_matches_rewriting(seed in any::<u64>(), code in 0u8..3, n in 1usize..=2) {
        let fl = flavor_of(code, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = WeylElt::new(fl, (), random_terms::<Rational>(&fl, &(), 3, 3, &mut rng));
        let b = WeylElt::new(fl, (), random_terms::<Rational>(&fl, &(), 3, 3, &mut rng));
        let nc = nc_mul(&terms_to_nc(&fl, &a.terms, int), &terms_to_nc(&fl, &b.terms, int), 0);
        prop_assert_eq!(nc_to_terms::<Rational>(&fl, &(), &rewrite_normal(&fl, &nc, 0)), a.mul(&b).unwrap().terms);
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), code in 0u8..3, n in 1usize..=2, weyl in any::<bool>()) {
        let fl = flavor_of(code, n).with_aux();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_terms::<Rational>(&fl, &(), 4, 4, &mut rng);
        let side = if weyl { NameSide::W } else { NameSide::P };
        let text = print_terms(&t, &fl, side);
        prop_assert_eq!(parse_terms::<Rational>(&text, fl, &(), side).unwrap(), t);
    }

    #[test]
    fn center_bracket_is_the_standard_poisson_bracket(seed in any::<u64>(), pi in 0usize..3, n in 1usize..=2) {
        let p = [2u64, 3, 5][pi];
        let spec = GfSpec::prime(p).unwrap();
        let fl = Flavor::standard(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Poly::new(fl, spec.clone(), random_terms::<Gf>(&fl, &spec, 3, 3, &mut rng));
        let b = Poly::new(fl, spec.clone(), random_terms::<Gf>(&fl, &spec, 3, 3, &mut rng));
        prop_assert_eq!(center_bracket(&a, &b).unwrap(), a.bracket(&b).unwrap());
    }

    #[test]
    fn tame_words_invert_and_are_symplectic(seed in any::<u64>(), n in 1usize..=2, len in 1usize..=2) {
        let w = random_tame::<Rational>(n, len, 3, seed, &());
        let e = w.eval(&()).unwrap();
        prop_assert!(check_symplecto(&e));
        let inv = invert_word(&w, &()).unwrap().eval(&()).unwrap();
        prop_assert!(e.compose(&inv).unwrap().is_identity());
        prop_assert!(inv.compose(&e).unwrap().is_identity());
        let j = e.to_json();
        prop_assert_eq!(Endo::<Rational>::from_json(&j).unwrap(), e);
    }

    #[test]
    fn truncated_inverse_inverts(seed in any::<u64>(), n in 1usize..=2, order in 2i64..=6) {
        let mut w = random_tame::<Rational>(n, 2, 3, seed, &());
        w.gens.retain(|g| !matches!(g, ElementaryGen::LinearSymplectic(_)));
        let e = evaluate(&w, Side::W, w.flavor.with_kind(BracketKind::HAugmented), &()).unwrap();
        let g = Grading::quantum();
        let inv = truncated_inverse(&e, order, &g).unwrap();
        prop_assert!(e.compose_truncated(&inv.endo, &g, order).unwrap().is_identity());
    }

    #[test]
    fn phi_p_is_multiplicative(seed in any::<u64>(), pi in 0usize..2) {
        let p = [3u64, 5][pi];
        let spec = GfSpec::prime(p).unwrap();
        let a = random_tame::<Rational>(1, 1, 2, seed, &());
        let b = random_tame::<Rational>(1, 1, 2, seed ^ 0x5bd1, &());
        let ea = evaluate(&a, Side::W, a.flavor, &()).unwrap();
        let eb = evaluate(&b, Side::W, b.flavor, &()).unwrap();
        let lhs = phi_p(&ea.compose(&eb).unwrap(), &spec).unwrap();
        let rhs = phi_p(&ea, &spec).unwrap().compose(&phi_p(&eb, &spec).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn scan_is_seed_deterministic(seed in any::<u64>()) {
        let w = random_tame::<Rational>(1, 2, 3, seed, &());
        let e = w.eval(&()).unwrap();
        prop_assert_eq!(hn_scan(&e, 3, 10, seed).unwrap(), hn_scan(&e, 3, 10, seed).unwrap());
    }
}

#[test]
fn pth_power_oracle_agrees_on_generators() {
    let fl = Flavor::standard(1);
    for p in [2i128, 3, 5, 7] {
        let x = pth_power_oracle(&fl, &nc_word(&fl, vec![0], 1), p);
        assert_eq!(x, nc_word(&fl, vec![0; p as usize], 1));
        let mut a = nc_word(&fl, vec![0], 1);
        a.extend(nc_word(&fl, vec![1], 1));
        let read = center_read(&fl, &pth_power_oracle(&fl, &a, p), p).unwrap();
        assert_eq!(read.get(&vec![1, 0]), Some(&1));
        assert_eq!(read.get(&vec![0, 1]), Some(&1));
    }
}
