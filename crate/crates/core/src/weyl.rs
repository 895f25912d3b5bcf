//! Normal-ordered arithmetic in W_n, W^h_n and W^h_n[k_ij].
//!
//! Monomials are stored in the fixed generator order (all x's before all d's
//! for the canonical flavors, ξ_1 < ξ_2 < … for the skew flavor). Products of
//! canonical flavors use the closed-form reordering
//! `d^b x^c = Σ_k k!·C(b,k)·C(c,k)·μ^k·x^{c−k} d^{b−k}` per pair; the skew
//! flavor moves one generator at a time, picking up central corrections.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::algebra::{accumulate, BracketKind, Flavor, Grading, Mono, Terms};
use crate::error::{Error, Result};
use crate::poisson::Poly;
use crate::scalars::Field;

/// Default cap on the number of terms in intermediate p-th power expansions.
pub const DEFAULT_EXPANSION_BOUND: usize = 200_000;

/// Normal-ordered element of a Weyl-type algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElt<F: Field> {
    pub flavor: Flavor,
    pub spec: F::Spec,
    pub terms: Terms<F>,
}

/// A central element read in the coordinates z_i = x_i^p, w_i = d_i^p.
pub type CenterElt<F> = Poly<F>;

impl<F: Field> WeylElt<F> {
    pub fn new(flavor: Flavor, spec: F::Spec, terms: Terms<F>) -> Self {
        WeylElt { flavor, spec, terms }
    }

    pub fn zero(flavor: Flavor, spec: F::Spec) -> Self {
        WeylElt::new(flavor, spec, Terms::zero())
    }

    pub fn one(flavor: Flavor, spec: F::Spec) -> Self {
        let t = Terms::constant(&flavor, F::one(&spec));
        WeylElt::new(flavor, spec, t)
    }

    pub fn generator(flavor: Flavor, spec: F::Spec, i: usize) -> Self {
        let t = Terms::generator(&flavor, &spec, i);
        WeylElt::new(flavor, spec, t)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    fn like(&self, terms: Terms<F>) -> Self {
        WeylElt::new(self.flavor, self.spec.clone(), terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.flavor.check_same(&other.flavor)?;
        Ok(self.like(self.terms.add(&other.terms)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.flavor.check_same(&other.flavor)?;
        Ok(self.like(self.terms.sub(&other.terms)))
    }

    pub fn neg(&self) -> Self {
        self.like(self.terms.neg())
    }

    pub fn scale(&self, s: &F) -> Self {
        self.like(self.terms.scale(s))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        weyl_mul(self, other)
    }

    pub fn degree(&self, g: &Grading) -> Option<i64> {
        self.terms.degree(&self.flavor, g)
    }

    pub fn height(&self, g: &Grading) -> Option<i64> {
        self.terms.height(&self.flavor, g)
    }
}

/// Normal-ordered product.
pub fn weyl_mul<F: Field>(a: &WeylElt<F>, b: &WeylElt<F>) -> Result<WeylElt<F>> {
    a.flavor.check_same(&b.flavor)?;
    Ok(a.like(mul_terms(&a.terms, &b.terms, &a.flavor, &a.spec, None)))
}

/// ab − ba.
pub fn commutator<F: Field>(a: &WeylElt<F>, b: &WeylElt<F>) -> Result<WeylElt<F>> {
    a.flavor.check_same(&b.flavor)?;
    Ok(a.like(commutator_terms(&a.terms, &b.terms, &a.flavor, &a.spec)))
}

pub(crate) fn commutator_terms<F: Field>(a: &Terms<F>, b: &Terms<F>, flavor: &Flavor, spec: &F::Spec) -> Terms<F> {
    let ab = mul_terms(a, b, flavor, spec, None);
    let ba = mul_terms(b, a, flavor, spec, None);
    ab.sub(&ba)
}

/// Extremal weighted degree of a normal-ordered element.
pub fn weyl_degree_height<F: Field>(a: &WeylElt<F>, g: &Grading, degree: bool) -> Option<i64> {
    if degree {
        a.degree(g)
    } else {
        a.height(g)
    }
}

thread_local! {
    static REORDER: RefCell<HashMap<(u32, u32, u32), BigInt>> = RefCell::new(HashMap::new());
}

/// k!·C(b,k)·C(c,k), the coefficient of μ^k x^{c−k} d^{b−k} in d^b x^c.
pub fn reorder_coeff(b: u32, c: u32, k: u32) -> BigInt {
    REORDER.with(|cache| {
        if let Some(v) = cache.borrow().get(&(b, c, k)) {
            return v.clone();
        }
        let mut v = BigInt::one();
        // C(b,k)·C(c,k)·k! = b!/(b−k)! · C(c,k)
        for i in 0..k {
            v *= b - i;
        }
        let mut binom = BigInt::one();
        for i in 0..k {
            binom = binom * (c - i) / (i + 1);
        }
        v *= binom;
        cache.borrow_mut().insert((b, c, k), v.clone());
        v
    })
}

/// Normal-ordered product of term maps, optionally truncated by a grading that
/// is multiplicative for this flavor (see [`Grading::graded_for_weyl`]).
pub(crate) fn mul_terms<F: Field>(
    a: &Terms<F>,
    b: &Terms<F>,
    flavor: &Flavor,
    spec: &F::Spec,
    trunc: Option<(&Grading, i64)>,
) -> Terms<F> {
    if a.is_zero() || b.is_zero() {
        return Terms::zero();
    }
    match flavor.kind {
        BracketKind::Skew => mul_skew(a, b, flavor, spec, trunc),
        _ => mul_canonical(a, b, flavor, spec, trunc),
    }
}

fn mul_canonical<F: Field>(
    a: &Terms<F>,
    b: &Terms<F>,
    flavor: &Flavor,
    spec: &F::Spec,
    trunc: Option<(&Grading, i64)>,
) -> Terms<F> {
    let m = flavor.pairs();
    let h_slot = flavor.h_slot();
    let with_h = flavor.kind == BracketKind::HAugmented;
    let mut acc: HashMap<Mono, F> = HashMap::with_capacity(a.len() * b.len());
    let wb: Vec<i64> = match trunc {
        Some((g, _)) => b.monos().map(|mb| mb.weight(flavor, g)).collect(),
        None => Vec::new(),
    };
    // Reused buffers for the per-pair reorder coefficients.
    let mut coeffs: Vec<Vec<F>> = vec![Vec::new(); m];
    for (ma, ca) in a.iter() {
        let wa = trunc.map(|(g, _)| ma.weight(flavor, g));
        for (idx, (mb, cb)) in b.iter().enumerate() {
            if let (Some(wa), Some((_, max))) = (wa, trunc) {
                if wa + wb[idx] > max {
                    continue;
                }
            }
            let base = ma.mul(mb);
            let c0 = ca.mul(cb);
            let mut active = Vec::new();
            for (i, slot) in coeffs.iter_mut().enumerate() {
                let bd = ma.e[m + i] as u32;
                let cx = mb.e[i] as u32;
                let top = bd.min(cx);
                slot.clear();
                if top > 0 {
                    for k in 0..=top {
                        slot.push(F::from_bigint(spec, &reorder_coeff(bd, cx, k)));
                    }
                    active.push(i);
                }
            }
            if active.is_empty() {
                accumulate(&mut acc, base, c0);
                continue;
            }
            // Odometer over k_i in 0..=top_i for the active pairs.
            let mut ks = vec![0u32; active.len()];
            loop {
                let mut c = c0.clone();
                let mut mono = base.clone();
                let mut total = 0;
                for (pos, &i) in active.iter().enumerate() {
                    let k = ks[pos];
                    if k > 0 {
                        c = c.mul(&coeffs[i][k as usize]);
                        mono.e[i] -= k as i32;
                        mono.e[m + i] -= k as i32;
                        total += k as i32;
                    }
                }
                if with_h {
                    mono.e[h_slot] += total;
                }
                if !c.is_zero() {
                    accumulate(&mut acc, mono, c);
                }
                let mut pos = 0;
                loop {
                    if pos == active.len() {
                        break;
                    }
                    let top = (coeffs[active[pos]].len() - 1) as u32;
                    if ks[pos] < top {
                        ks[pos] += 1;
                        break;
                    }
                    ks[pos] = 0;
                    pos += 1;
                }
                if pos == active.len() {
                    break;
                }
            }
        }
    }
    Terms::from_map(acc)
}

fn mul_skew<F: Field>(
    a: &Terms<F>,
    b: &Terms<F>,
    flavor: &Flavor,
    spec: &F::Spec,
    trunc: Option<(&Grading, i64)>,
) -> Terms<F> {
    let main = flavor.main_count();
    let mut acc: HashMap<Mono, F> = HashMap::new();
    for (mb, cb) in b.iter() {
        let wb = trunc.map(|(g, _)| mb.weight(flavor, g));
        let mut current: HashMap<Mono, F> = HashMap::new();
        for (ma, ca) in a.iter() {
            if let (Some(wb), Some((g, max))) = (wb, trunc) {
                if ma.weight(flavor, g) + wb > max {
                    continue;
                }
            }
            accumulate(&mut current, ma.clone(), ca.mul(cb));
        }
        for j in 0..main {
            for _ in 0..mb.e[j] {
                current = mul_skew_gen(current, j, flavor, spec);
            }
        }
        // central part of b
        let mut central = mb.clone();
        for e in central.e[..main].iter_mut() {
            *e = 0;
        }
        for (m, c) in current {
            if !c.is_zero() {
                accumulate(&mut acc, m.mul(&central), c);
            }
        }
    }
    Terms::from_map(acc)
}

/// m·ξ_j for every m: ξ_j moves left past ξ_i (i > j), each crossing adding
/// a_i·[ξ_i, ξ_j]·m/ξ_i with [ξ_i, ξ_j] = −h k_ji.
fn mul_skew_gen<F: Field>(input: HashMap<Mono, F>, j: usize, flavor: &Flavor, spec: &F::Spec) -> HashMap<Mono, F> {
    let main = flavor.main_count();
    let h = flavor.h_slot();
    let mut out: HashMap<Mono, F> = HashMap::with_capacity(input.len() * 2);
    for (m, c) in input {
        if c.is_zero() {
            continue;
        }
        for i in j + 1..main {
            let a = m.e[i];
            if a == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.e[i] -= 1;
            m2.e[h] += 1;
            m2.e[flavor.k_slot(j, i)] += 1;
            accumulate(&mut out, m2, c.mul(&F::from_i64(spec, -(a as i64))));
        }
        let mut m1 = m;
        m1.e[j] += 1;
        accumulate(&mut out, m1, c);
    }
    out
}

/// a^p by binary exponentiation, failing once an intermediate exceeds `bound` terms.
pub fn pth_power<F: Field>(a: &WeylElt<F>, bound: usize) -> Result<WeylElt<F>> {
    let p = F::characteristic(&a.spec);
    if p == 0 {
        return Err(Error::NotFiniteField);
    }
    Ok(a.like(power_terms(&a.terms, p, &a.flavor, &a.spec, bound, None)?))
}

pub(crate) fn power_terms<F: Field>(
    t: &Terms<F>,
    mut e: u64,
    flavor: &Flavor,
    spec: &F::Spec,
    bound: usize,
    trunc: Option<(&Grading, i64)>,
) -> Result<Terms<F>> {
    let mut base = t.clone();
    let mut acc = Terms::constant(flavor, F::one(spec));
    let check = |x: &Terms<F>| {
        if x.len() > bound {
            Err(Error::ExpansionBoundExceeded { bound })
        } else {
            Ok(())
        }
    };
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_terms(&acc, &base, flavor, spec, trunc);
            check(&acc)?;
        }
        e >>= 1;
        if e > 0 {
            base = mul_terms(&base, &base, flavor, spec, trunc);
            check(&base)?;
        }
    }
    Ok(acc)
}

/// True iff a commutes with every main generator.
pub fn is_central<F: Field>(a: &WeylElt<F>) -> bool {
    is_central_terms(&a.terms, &a.flavor, &a.spec)
}

pub(crate) fn is_central_terms<F: Field>(t: &Terms<F>, flavor: &Flavor, spec: &F::Spec) -> bool {
    (0..flavor.main_count()).all(|i| {
        let g = Terms::generator(flavor, spec, i);
        commutator_terms(t, &g, flavor, spec).is_zero()
    })
}

/// Reads a central element in the coordinates z_i = x_i^p, w_i = d_i^p.
pub fn center_coordinates<F: Field>(a: &WeylElt<F>) -> Result<CenterElt<F>> {
    if !is_central(a) {
        return Err(Error::NotCentral);
    }
    Ok(Poly::new(a.flavor, a.spec.clone(), divide_exponents(&a.terms, &a.flavor, F::characteristic(&a.spec))?))
}

pub(crate) fn divide_exponents<F: Field>(t: &Terms<F>, flavor: &Flavor, p: u64) -> Result<Terms<F>> {
    if p == 0 {
        return Err(Error::NotFiniteField);
    }
    let main = flavor.main_count();
    let p = p as i32;
    let mut out = Terms::zero();
    for (m, c) in t.iter() {
        let mut m2 = m.clone();
        for e in m2.e[..main].iter_mut() {
            if *e % p != 0 {
                return Err(Error::NotInPthPowerForm);
            }
            *e /= p;
        }
        out.add_term(m2, c.clone());
    }
    Ok(out)
}
