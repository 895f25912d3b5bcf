//! Shared sparse representation for commutative and normal-ordered elements.
//!
//! A [`Mono`] is a fixed-width exponent vector laid out as
//! `[main generators.., h, k_ij (i<j)..]`. The same layout serves the Poisson
//! side (commutative monomials) and the Weyl side (normal-ordered words in
//! generator order). Only the h slot may be negative.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalars::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BracketKind {
    Standard,
    HAugmented,
    Skew,
}

/// Generator layout and bracket structure.
///
/// Standard and h-augmented flavors order the main generators as
/// `x_1..x_n, [u], p_1..p_n, [v]`; the skew flavor as `ξ_1..ξ_{2n}, [u, v]`.
/// With `aux` set, the auxiliary pair (u, v) satisfies `{v, u} = h`
/// (or `h k` in the skew flavor).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flavor {
    pub kind: BracketKind,
    pub n: usize,
    #[serde(default)]
    pub aux: bool,
}

impl Flavor {
    pub fn standard(n: usize) -> Self {
        Flavor { kind: BracketKind::Standard, n, aux: false }
    }

    pub fn h_augmented(n: usize) -> Self {
        Flavor { kind: BracketKind::HAugmented, n, aux: false }
    }

    pub fn skew(n: usize) -> Self {
        Flavor { kind: BracketKind::Skew, n, aux: false }
    }

    pub fn with_aux(self) -> Self {
        Flavor { aux: true, ..self }
    }

    pub fn without_aux(self) -> Self {
        Flavor { aux: false, ..self }
    }

    pub fn with_kind(self, kind: BracketKind) -> Self {
        Flavor { kind, ..self }
    }

    /// Number of canonical pairs, counting the auxiliary one.
    pub fn pairs(&self) -> usize {
        self.n + usize::from(self.aux)
    }

    pub fn main_count(&self) -> usize {
        2 * self.pairs()
    }

    pub fn has_h(&self) -> bool {
        self.kind != BracketKind::Standard
    }

    pub fn k_count(&self) -> usize {
        match self.kind {
            BracketKind::Skew => {
                let m = self.main_count();
                m * (m - 1) / 2
            }
            _ => 0,
        }
    }

    pub fn width(&self) -> usize {
        self.main_count() + 1 + self.k_count()
    }

    pub fn h_slot(&self) -> usize {
        self.main_count()
    }

    /// Slot of k_ij for i < j.
    pub fn k_slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.main_count());
        let m = self.main_count();
        // pairs (0,1),(0,2)..(0,m-1),(1,2)..
        let before: usize = (0..i).map(|r| m - 1 - r).sum();
        self.main_count() + 1 + before + (j - i - 1)
    }

    /// (i, j) for the k-slot index counted from 0.
    pub fn k_pair(&self, idx: usize) -> (usize, usize) {
        let m = self.main_count();
        let mut rest = idx;
        for i in 0..m {
            let row = m - 1 - i;
            if rest < row {
                return (i, i + 1 + rest);
            }
            rest -= row;
        }
        panic!("k index {idx} out of range");
    }

    /// Conjugate index of a canonical pair (x_a ↔ p_a); None for the skew flavor.
    pub fn partner(&self, i: usize) -> Option<usize> {
        if self.kind == BracketKind::Skew {
            return None;
        }
        let m = self.pairs();
        Some(if i < m { i + m } else { i - m })
    }

    /// True for the coordinate block (x's and u).
    pub fn is_position(&self, i: usize) -> bool {
        i < self.pairs()
    }

    /// Structure constant {g_i, g_j} (equivalently [g_i, g_j] on the Weyl side)
    /// as a coefficient sign, an h power, and an optional k slot.
    pub fn structure(&self, i: usize, j: usize) -> Option<(i64, bool, Option<usize>)> {
        if i == j {
            return None;
        }
        match self.kind {
            BracketKind::Standard | BracketKind::HAugmented => {
                let m = self.pairs();
                let h = self.kind == BracketKind::HAugmented;
                if i >= m && i - m == j {
                    Some((1, h, None))
                } else if j >= m && j - m == i {
                    Some((-1, h, None))
                } else {
                    None
                }
            }
            BracketKind::Skew => {
                if i < j {
                    Some((1, true, Some(self.k_slot(i, j))))
                } else {
                    Some((-1, true, Some(self.k_slot(j, i))))
                }
            }
        }
    }

    pub fn structure_terms<F: Field>(&self, spec: &F::Spec, i: usize, j: usize) -> Terms<F> {
        match self.structure(i, j) {
            None => Terms::zero(),
            Some((sign, h, k)) => {
                let mut m = Mono::one(self);
                if h {
                    m.e[self.h_slot()] = 1;
                }
                if let Some(slot) = k {
                    m.e[slot] = 1;
                }
                Terms::from_term(m, F::from_i64(spec, sign))
            }
        }
    }

    /// Pairs (i, j) with i < j and a nonzero structure constant.
    pub fn structure_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.main_count();
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if self.structure(i, j).is_some() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Text name of main generator `i` on the given side.
    pub fn gen_name(&self, i: usize, side: NameSide) -> String {
        let m = self.pairs();
        match self.kind {
            BracketKind::Skew => {
                let base = 2 * self.n;
                if self.aux && i == base {
                    "u".into()
                } else if self.aux && i == base + 1 {
                    "v".into()
                } else {
                    format!("xi{}", i + 1)
                }
            }
            _ => {
                let (x, p) = match side {
                    NameSide::P => ("x", "p"),
                    NameSide::W => ("x", "d"),
                    NameSide::Center => ("z", "w"),
                };
                if i < m {
                    if self.aux && i == self.n {
                        "u".into()
                    } else {
                        format!("{x}{}", i + 1)
                    }
                } else if self.aux && i - m == self.n {
                    "v".into()
                } else {
                    format!("{p}{}", i - m + 1)
                }
            }
        }
    }

    pub fn check_same(&self, other: &Flavor) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FlavorMismatch)
        }
    }
}

/// Naming scheme for printing/parsing main generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NameSide {
    P,
    W,
    Center,
}

/// Weights per generator class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grading {
    pub main: i64,
    pub h: i64,
    pub k: i64,
}

impl Grading {
    pub fn new(main: i64, h: i64, k: i64) -> Self {
        Grading { main, h, k }
    }

    /// Main generators weight 1, h weight 0, k_ij weight 2.
    pub fn standard() -> Self {
        Grading { main: 1, h: 0, k: 2 }
    }

    /// Weight 2 on h: the Weyl product of the h-augmented algebra is graded.
    pub fn quantum() -> Self {
        Grading { main: 1, h: 2, k: 0 }
    }

    /// Whether truncating by this grading commutes with Weyl multiplication.
    pub fn graded_for_weyl(&self, flavor: &Flavor) -> bool {
        match flavor.kind {
            BracketKind::Standard => false,
            BracketKind::HAugmented => self.h == 2 * self.main,
            BracketKind::Skew => self.h + self.k == 2 * self.main,
        }
    }
}

impl Default for Grading {
    fn default() -> Self {
        Grading::standard()
    }
}

/// Exponent vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub e: SmallVec<[i32; 12]>,
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.e.as_slice())
    }
}

impl Mono {
    pub fn one(flavor: &Flavor) -> Self {
        Mono { e: SmallVec::from_elem(0, flavor.width()) }
    }

    pub fn generator(flavor: &Flavor, i: usize) -> Self {
        let mut m = Mono::one(flavor);
        m.e[i] = 1;
        m
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono { e: self.e.iter().zip(other.e.iter()).map(|(a, b)| a + b).collect() }
    }

    pub fn is_one(&self) -> bool {
        self.e.iter().all(|&v| v == 0)
    }

    pub fn main<'a>(&'a self, flavor: &Flavor) -> &'a [i32] {
        &self.e[..flavor.main_count()]
    }

    pub fn h(&self, flavor: &Flavor) -> i32 {
        self.e[flavor.h_slot()]
    }

    pub fn main_degree(&self, flavor: &Flavor) -> i64 {
        self.main(flavor).iter().map(|&v| v as i64).sum()
    }

    pub fn weight(&self, flavor: &Flavor, g: &Grading) -> i64 {
        let m = flavor.main_count();
        let main: i64 = self.e[..m].iter().map(|&v| v as i64).sum();
        let k: i64 = self.e[m + 1..].iter().map(|&v| v as i64).sum();
        g.main * main + g.h * self.e[m] as i64 + g.k * k
    }

    /// Sum of all exponents, used for graded-lex printing order.
    pub fn total(&self) -> i64 {
        self.e.iter().map(|&v| v as i64).sum()
    }
}

/// Sparse linear combination of monomials with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Terms<F: Field> {
    map: BTreeMap<Mono, F>,
}

impl<F: Field> Default for Terms<F> {
    fn default() -> Self {
        Terms::zero()
    }
}

impl<F: Field> Terms<F> {
    pub fn zero() -> Self {
        Terms { map: BTreeMap::new() }
    }

    pub fn from_term(m: Mono, c: F) -> Self {
        let mut t = Terms::zero();
        t.add_term(m, c);
        t
    }

    pub fn constant(flavor: &Flavor, c: F) -> Self {
        Terms::from_term(Mono::one(flavor), c)
    }

    pub fn generator(flavor: &Flavor, spec: &F::Spec, i: usize) -> Self {
        Terms::from_term(Mono::generator(flavor, i), F::one(spec))
    }

    pub fn from_map(map: HashMap<Mono, F>) -> Self {
        Terms { map: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &F)> {
        self.map.iter()
    }

    pub fn coeff(&self, m: &Mono) -> Option<&F> {
        self.map.get(m)
    }

    pub fn add_term(&mut self, m: Mono, c: F) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.map.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.iter() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.iter() {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Terms { map: self.map.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, s: &F) -> Self {
        if s.is_zero() {
            return Terms::zero();
        }
        Terms { map: self.map.iter().map(|(m, c)| (m.clone(), c.mul(s))).collect() }
    }

    pub fn map_coeffs<G: Field>(&self, mut f: impl FnMut(&F) -> Result<G>) -> Result<Terms<G>> {
        let mut out = Terms::zero();
        for (m, c) in self.iter() {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Mono) -> bool) -> Self {
        Terms { map: self.map.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    /// Multiplies every monomial by `m`.
    pub fn shift(&self, m: &Mono) -> Self {
        Terms { map: self.map.iter().map(|(k, c)| (k.mul(m), c.clone())).collect() }
    }

    /// Max weighted degree; None for zero (−∞).
    pub fn degree(&self, flavor: &Flavor, g: &Grading) -> Option<i64> {
        self.map.keys().map(|m| m.weight(flavor, g)).max()
    }

    /// Min weighted degree; None for zero (+∞).
    pub fn height(&self, flavor: &Flavor, g: &Grading) -> Option<i64> {
        self.map.keys().map(|m| m.weight(flavor, g)).min()
    }

    pub fn homogeneous(&self, flavor: &Flavor, g: &Grading, d: i64) -> Self {
        self.filter(|m| m.weight(flavor, g) == d)
    }

    pub fn truncate(&self, flavor: &Flavor, g: &Grading, max: i64) -> Self {
        self.filter(|m| m.weight(flavor, g) <= max)
    }

    /// Commutative product, optionally dropping terms above a weighted degree.
    pub fn mul_commutative(&self, other: &Self, flavor: &Flavor, trunc: Option<(&Grading, i64)>) -> Self {
        let mut acc: HashMap<Mono, F> = HashMap::with_capacity(self.len() * other.len());
        let wb: Vec<i64> = match trunc {
            Some((g, _)) => other.map.keys().map(|m| m.weight(flavor, g)).collect(),
            None => Vec::new(),
        };
        for (ma, ca) in self.iter() {
            let wa = trunc.map(|(g, _)| ma.weight(flavor, g));
            for (idx, (mb, cb)) in other.iter().enumerate() {
                if let (Some(wa), Some((_, max))) = (wa, trunc) {
                    if wa + wb[idx] > max {
                        continue;
                    }
                }
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                accumulate(&mut acc, m, c);
            }
        }
        Terms::from_map(acc)
    }

    /// Terms sorted by descending graded-lex order (printing order).
    pub fn sorted_desc(&self) -> Vec<(&Mono, &F)> {
        let mut v: Vec<_> = self.map.iter().collect();
        v.sort_by(|a, b| b.0.total().cmp(&a.0.total()).then_with(|| b.0.cmp(a.0)));
        v
    }

    pub fn monos(&self) -> impl Iterator<Item = &Mono> {
        self.map.keys()
    }

    pub fn into_iter_terms(self) -> impl Iterator<Item = (Mono, F)> {
        self.map.into_iter()
    }
}

pub(crate) fn accumulate<F: Field>(acc: &mut HashMap<Mono, F>, m: Mono, c: F) {
    use std::collections::hash_map::Entry;
    match acc.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let s = o.get().add(&c);
            *o.get_mut() = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_slots_roundtrip() {
        let f = Flavor::skew(2).with_aux();
        let m = f.main_count();
        for idx in 0..f.k_count() {
            let (i, j) = f.k_pair(idx);
            assert_eq!(f.k_slot(i, j), m + 1 + idx);
        }
    }

    #[test]
    fn standard_structure_signs() {
        let f = Flavor::standard(2);
        // {p_1, x_1} = 1, {x_1, p_1} = -1
        assert_eq!(f.structure(2, 0), Some((1, false, None)));
        assert_eq!(f.structure(0, 2), Some((-1, false, None)));
        assert_eq!(f.structure(0, 3), None);
    }

    #[test]
    fn names() {
        let f = Flavor::h_augmented(1).with_aux();
        let names: Vec<_> = (0..4).map(|i| f.gen_name(i, NameSide::P)).collect();
        assert_eq!(names, ["x1", "u", "p1", "v"]);
    }
}
