//! Test-side oracles, written without the library's closed-form products.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tamelift::{BracketKind, Field, Flavor, Mono, Terms};

/// A noncommutative word: main generator indices read left to right.
pub type Word = Vec<usize>;

/// Noncommutative polynomial: (word, central exponents of h and k) ↦ coefficient.
pub type Nc = BTreeMap<(Word, Vec<i32>), i128>;

fn reduce(c: i128, p: i128) -> i128 {
    if p > 0 {
        c.rem_euclid(p)
    } else {
        c
    }
}

fn bump(map: &mut Nc, key: (Word, Vec<i32>), c: i128, p: i128) {
    let e = map.entry(key.clone()).or_insert(0);
    *e = reduce(*e + c, p);
    if *e == 0 {
        map.remove(&key);
    }
}

/// The commutator b·a − a·b for main generators a > b, as
/// (sign, uses h, k slot) with the relation a·b = b·a + sign·h^?·k?.
fn swap_rule(flavor: &Flavor, a: usize, b: usize) -> Option<(i128, bool, Option<usize>)> {
    let m = flavor.pairs();
    match flavor.kind {
        BracketKind::Standard => (a == b + m).then_some((1, false, None)),
        BracketKind::HAugmented => (a == b + m).then_some((1, true, None)),
        BracketKind::Skew => Some((-1, true, Some(flavor.k_slot(b, a)))),
    }
}

/// Normal orders by one adjacent swap at a time, merging equal words after
/// every round. Coefficients are reduced mod p when p > 0.
pub fn rewrite_normal(flavor: &Flavor, input: &Nc, p: i128) -> Nc {
    let mut pending = input.clone();
    let mut done = Nc::new();
    while !pending.is_empty() {
        let mut next = Nc::new();
        for ((w, cen), c) in pending {
            let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1]) else {
                bump(&mut done, (w, cen), c, p);
                continue;
            };
            let (a, b) = (w[i], w[i + 1]);
            let mut swapped = w.clone();
            swapped.swap(i, i + 1);
            bump(&mut next, (swapped, cen.clone()), c, p);
            if let Some((sign, h, k)) = swap_rule(flavor, a, b) {
                let mut shorter = w.clone();
                shorter.drain(i..i + 2);
                let mut cen2 = cen.clone();
                if h {
                    cen2[0] += 1;
                }
                if let Some(slot) = k {
                    cen2[slot - flavor.main_count()] += 1;
                }
                bump(&mut next, (shorter, cen2), sign * c, p);
            }
        }
        pending = next;
    }
    done
}

pub fn central_zero(flavor: &Flavor) -> Vec<i32> {
    vec![0; flavor.width() - flavor.main_count()]
}

pub fn nc_word(flavor: &Flavor, w: Word, c: i128) -> Nc {
    let mut m = Nc::new();
    m.insert((w, central_zero(flavor)), c);
    m
}

/// Concatenation product.
pub fn nc_mul(a: &Nc, b: &Nc, p: i128) -> Nc {
    let mut out = Nc::new();
    for ((wa, ca), xa) in a {
        for ((wb, cb), xb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let cen = ca.iter().zip(cb).map(|(x, y)| x + y).collect();
            bump(&mut out, (w, cen), xa * xb, p);
        }
    }
    out
}

/// A normal-ordered word list read as library terms.
pub fn nc_to_terms<F: Field>(flavor: &Flavor, spec: &F::Spec, nc: &Nc) -> Terms<F> {
    let mut t = Terms::zero();
    let m = flavor.main_count();
    for ((w, cen), c) in nc {
        let mut mono = Mono::one(flavor);
        for &g in w {
            mono.e[g] += 1;
        }
        for (s, e) in cen.iter().enumerate() {
            mono.e[m + s] += e;
        }
        t.add_term(mono, F::from_bigint(spec, &BigInt::from(*c)));
    }
    t
}

/// Library terms as a sum of sorted words (their own normal form).
pub fn terms_to_nc<F: Field>(flavor: &Flavor, t: &Terms<F>, coeff: impl Fn(&F) -> i128) -> Nc {
    let m = flavor.main_count();
    let mut nc = Nc::new();
    for (mono, c) in t.iter() {
        let mut w = Word::new();
        for g in 0..m {
            w.extend(std::iter::repeat_n(g, mono.e[g] as usize));
        }
        nc.insert((w, mono.e[m..].to_vec()), coeff(c));
    }
    nc
}

/// Brute-force a^p: expand all p-fold concatenations, then normal order mod p.
pub fn pth_power_oracle(flavor: &Flavor, a: &Nc, p: i128) -> Nc {
    let mut acc = nc_word(flavor, Word::new(), 1);
    for _ in 0..p {
        acc = nc_mul(&acc, a, p);
    }
    rewrite_normal(flavor, &acc, p)
}

/// Reads a normal-ordered central element in center coordinates z_i, w_i:
/// every exponent must be a multiple of p. Prime field only.
pub fn center_read(flavor: &Flavor, nc: &Nc, p: i128) -> Option<BTreeMap<Vec<i32>, i128>> {
    let m = flavor.main_count();
    let mut out = BTreeMap::new();
    for ((w, _), c) in nc {
        let mut e = vec![0i32; m];
        for &g in w {
            e[g] += 1;
        }
        if e.iter().any(|x| (*x as i128) % p != 0) {
            return None;
        }
        out.insert(e.iter().map(|x| x / p as i32).collect(), *c);
    }
    Some(out)
}

/// Exponent vector ↦ coefficient of a center-side image, for comparison with [`center_read`].
pub fn center_terms_map<F: Field>(flavor: &Flavor, t: &Terms<F>, coeff: impl Fn(&F) -> i128) -> BTreeMap<Vec<i32>, i128> {
    let m = flavor.main_count();
    t.iter().map(|(mono, c)| (mono.e[..m].to_vec(), coeff(c))).collect()
}

/// Random element with main degree ≤ `maxdeg`; h and k exponents are
/// included when the flavor has them.
pub fn random_terms<F: Field>(flavor: &Flavor, spec: &F::Spec, maxdeg: i32, max_terms: usize, rng: &mut ChaCha8Rng) -> Terms<F> {
    let m = flavor.main_count();
    let mut t = Terms::zero();
    for _ in 0..rng.gen_range(1..=max_terms) {
        let mut mono = Mono::one(flavor);
        let deg = rng.gen_range(0..=maxdeg);
        for _ in 0..deg {
            mono.e[rng.gen_range(0..m)] += 1;
        }
        if flavor.has_h() && rng.gen_bool(0.3) {
            mono.e[flavor.h_slot()] += 1;
        }
        if flavor.k_count() > 0 && rng.gen_bool(0.3) {
            mono.e[m + 1 + rng.gen_range(0..flavor.k_count())] += 1;
        }
        let c = rng.gen_range(-3..=3);
        t.add_term(mono, F::from_i64(spec, c));
    }
    t
}

pub fn flavors(n: usize) -> [Flavor; 3] {
    [Flavor::standard(n), Flavor::h_augmented(n), Flavor::skew(n)]
}
