//! Endomorphisms given by generator images, on either side.
//!
//! Composition follows the algebra-map convention: `compose(φ, ψ)` has images
//! `apply(φ, ψ(g))`, so `apply(compose(φ, ψ), f) = apply(φ, apply(ψ, f))`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::algebra::{BracketKind, Flavor, Grading, Mono, NameSide, Terms};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::poisson::{poisson_bracket, Poly};
use crate::scalars::{Field, FieldSpec};
use crate::text::{parse_terms, parse_weyl, print_terms};
use crate::weyl::{commutator_terms, mul_terms, WeylElt};

/// Which algebra the images live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Commutative Poisson algebra (x, p).
    P,
    /// Normal-ordered Weyl algebra (x, d).
    W,
    /// Commutative center coordinates (z, w).
    Center,
}

impl Side {
    pub fn commutative(&self) -> bool {
        *self != Side::W
    }

    pub fn names(&self) -> NameSide {
        match self {
            Side::P => NameSide::P,
            Side::W => NameSide::W,
            Side::Center => NameSide::Center,
        }
    }
}

/// Endomorphism: images of the main generators, h ↦ λh, and images of each k_ij.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endo<F: Field> {
    pub side: Side,
    pub flavor: Flavor,
    pub spec: F::Spec,
    pub images: Vec<Terms<F>>,
    pub h_action: F,
    /// One entry per k slot (empty outside the skew flavor).
    pub k_images: Vec<Terms<F>>,
}

/// An endomorphism known modulo terms of weighted degree above `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedEndo<F: Field> {
    pub endo: Endo<F>,
    pub order: i64,
    pub grading: Grading,
}

fn k_identity<F: Field>(flavor: &Flavor, spec: &F::Spec) -> Vec<Terms<F>> {
    let m = flavor.main_count();
    (0..flavor.k_count())
        .map(|idx| {
            let mut mono = Mono::one(flavor);
            mono.e[m + 1 + idx] = 1;
            Terms::from_term(mono, F::one(spec))
        })
        .collect()
}

impl<F: Field> Endo<F> {
    pub fn identity(side: Side, flavor: Flavor, spec: F::Spec) -> Self {
        let images = (0..flavor.main_count()).map(|i| Terms::generator(&flavor, &spec, i)).collect();
        let k_images = k_identity(&flavor, &spec);
        let h_action = F::one(&spec);
        Endo { side, flavor, spec, images, h_action, k_images }
    }

    pub fn new(side: Side, flavor: Flavor, spec: F::Spec, images: Vec<Terms<F>>) -> Result<Self> {
        let expected = flavor.main_count();
        if images.len() != expected {
            return Err(Error::WrongArity { expected, got: images.len() });
        }
        let mut e = Endo::identity(side, flavor, spec);
        e.images = images;
        Ok(e)
    }

    pub fn with_h_action(mut self, lambda: F) -> Self {
        self.h_action = lambda;
        self
    }

    /// Builds a linear endomorphism g_i ↦ Σ_j a_ij g_j.
    pub fn from_linear(side: Side, flavor: Flavor, spec: F::Spec, a: &Matrix<F>) -> Result<Self> {
        let m = flavor.main_count();
        if a.len() != m || a.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!("expected a {m}×{m} matrix")));
        }
        let images = a
            .iter()
            .map(|row| {
                let mut t = Terms::zero();
                for (j, c) in row.iter().enumerate() {
                    t.add_term(Mono::generator(&flavor, j), c.clone());
                }
                t
            })
            .collect();
        Endo::new(side, flavor, spec, images)
    }

    pub fn image(&self, i: usize) -> &Terms<F> {
        &self.images[i]
    }

    pub fn image_poly(&self, i: usize) -> Poly<F> {
        Poly::new(self.flavor, self.spec.clone(), self.images[i].clone())
    }

    pub fn image_weyl(&self, i: usize) -> WeylElt<F> {
        WeylElt::new(self.flavor, self.spec.clone(), self.images[i].clone())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return Err(Error::SideMismatch);
        }
        self.flavor.check_same(&other.flavor)
    }

    pub(crate) fn product(&self, a: &Terms<F>, b: &Terms<F>, trunc: Option<(&Grading, i64)>) -> Terms<F> {
        if self.side.commutative() {
            a.mul_commutative(b, &self.flavor, trunc)
        } else {
            mul_terms(a, b, &self.flavor, &self.spec, trunc)
        }
    }

    /// Substitutes the images into `t`. With `trunc`, terms above the given
    /// weighted degree are discarded throughout; on the Weyl side this needs a
    /// grading for which the product is graded.
    pub fn apply_terms(&self, t: &Terms<F>, trunc: Option<(&Grading, i64)>) -> Terms<F> {
        let main = self.flavor.main_count();
        let h_slot = self.flavor.h_slot();
        let mut powers: HashMap<(usize, i32), Terms<F>> = HashMap::new();
        let mut out = Terms::zero();
        for (m, c) in t.iter() {
            let mut acc = Terms::constant(&self.flavor, c.clone());
            let mut central = Mono::one(&self.flavor);
            let mut scale = F::one(&self.spec);
            let h = m.e[h_slot];
            if h != 0 {
                central.e[h_slot] = h;
                let lam = if h > 0 { self.h_action.pow(h as u64) } else { self.h_action.inv().expect("h action is a dilation").pow((-h) as u64) };
                scale = scale.mul(&lam);
            }
            acc = acc.scale(&scale).shift(&central);
            for idx in 0..self.flavor.k_count() {
                let e = m.e[main + 1 + idx];
                if e > 0 {
                    let p = self.cached_power(&mut powers, main + 1 + idx, e, &self.k_images[idx], trunc);
                    acc = self.product(&acc, &p, trunc);
                }
            }
            for i in 0..main {
                let e = m.e[i];
                if e > 0 {
                    let p = self.cached_power(&mut powers, i, e, &self.images[i], trunc);
                    acc = self.product(&acc, &p, trunc);
                    if acc.is_zero() {
                        break;
                    }
                }
            }
            out = out.add(&acc);
        }
        match trunc {
            Some((g, max)) => out.truncate(&self.flavor, g, max),
            None => out,
        }
    }

    fn cached_power(
        &self,
        cache: &mut HashMap<(usize, i32), Terms<F>>,
        slot: usize,
        e: i32,
        base: &Terms<F>,
        trunc: Option<(&Grading, i64)>,
    ) -> Terms<F> {
        if let Some(v) = cache.get(&(slot, e)) {
            return v.clone();
        }
        let v = if e == 1 {
            match trunc {
                Some((g, max)) => base.truncate(&self.flavor, g, max),
                None => base.clone(),
            }
        } else {
            let prev = self.cached_power(cache, slot, e - 1, base, trunc);
            let one = self.cached_power(cache, slot, 1, base, trunc);
            self.product(&prev, &one, trunc)
        };
        cache.insert((slot, e), v.clone());
        v
    }

    pub fn apply_poly(&self, f: &Poly<F>) -> Result<Poly<F>> {
        if !self.side.commutative() {
            return Err(Error::SideMismatch);
        }
        self.flavor.check_same(&f.flavor)?;
        Ok(Poly::new(self.flavor, self.spec.clone(), self.apply_terms(&f.terms, None)))
    }

    pub fn apply_weyl(&self, a: &WeylElt<F>) -> Result<WeylElt<F>> {
        if self.side != Side::W {
            return Err(Error::SideMismatch);
        }
        self.flavor.check_same(&a.flavor)?;
        Ok(WeylElt::new(self.flavor, self.spec.clone(), self.apply_terms(&a.terms, None)))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.compose_with(other, None)
    }

    /// Composition modulo weighted degree above `max`.
    pub fn compose_truncated(&self, other: &Self, g: &Grading, max: i64) -> Result<Self> {
        if self.side == Side::W && !g.graded_for_weyl(&self.flavor) {
            return Err(Error::IncompatibleGrading);
        }
        self.compose_with(other, Some((g, max)))
    }

    fn compose_with(&self, other: &Self, trunc: Option<(&Grading, i64)>) -> Result<Self> {
        self.check_compatible(other)?;
        let images = other.images.iter().map(|t| self.apply_terms(t, trunc)).collect();
        let k_images = other.k_images.iter().map(|t| self.apply_terms(t, trunc)).collect();
        Ok(Endo {
            side: self.side,
            flavor: self.flavor,
            spec: self.spec.clone(),
            images,
            h_action: self.h_action.mul(&other.h_action),
            k_images,
        })
    }

    pub fn truncate(&self, g: &Grading, max: i64) -> Self {
        let mut out = self.clone();
        for t in out.images.iter_mut().chain(out.k_images.iter_mut()) {
            *t = t.truncate(&self.flavor, g, max);
        }
        out
    }

    /// Generator-wise differences, including the h and k_ij actions.
    pub fn deviation(&self, other: &Self) -> Result<Vec<Terms<F>>> {
        self.check_compatible(other)?;
        let mut out: Vec<Terms<F>> = self.images.iter().zip(&other.images).map(|(a, b)| a.sub(b)).collect();
        let mut hm = Mono::one(&self.flavor);
        hm.e[self.flavor.h_slot()] = 1;
        if self.flavor.has_h() {
            out.push(Terms::from_term(hm, self.h_action.sub(&other.h_action)));
        }
        out.extend(self.k_images.iter().zip(&other.k_images).map(|(a, b)| a.sub(b)));
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        *self == Endo::identity(self.side, self.flavor, self.spec.clone())
    }

    /// Coefficients of the degree-one main-generator monomials of each image.
    pub fn linear_matrix(&self) -> Matrix<F> {
        let m = self.flavor.main_count();
        self.images
            .iter()
            .map(|t| (0..m).map(|j| t.coeff(&Mono::generator(&self.flavor, j)).cloned().unwrap_or_else(|| F::zero(&self.spec))).collect())
            .collect()
    }

    /// The linear part as an endomorphism (h and k actions kept).
    pub fn linear_part(&self) -> Self {
        let mut l = Endo::from_linear(self.side, self.flavor, self.spec.clone(), &self.linear_matrix()).expect("square");
        l.h_action = self.h_action.clone();
        l.k_images = self.k_images.clone();
        l
    }

    /// Moves the images to another side without changing coordinates.
    pub fn relabel(&self, side: Side) -> Self {
        Endo { side, ..self.clone() }
    }

    pub fn map_coeffs<G: Field>(&self, spec: G::Spec, mut f: impl FnMut(&F) -> Result<G>) -> Result<Endo<G>> {
        let images = self.images.iter().map(|t| t.map_coeffs(&mut f)).collect::<Result<Vec<_>>>()?;
        let k_images = self.k_images.iter().map(|t| t.map_coeffs(&mut f)).collect::<Result<Vec<_>>>()?;
        let h_action = f(&self.h_action)?;
        Ok(Endo { side: self.side, flavor: self.flavor, spec, images, h_action, k_images })
    }
}

/// Parses text on the given side; Weyl text keeps its written product order.
pub fn parse_side<F: Field>(text: &str, flavor: Flavor, spec: &F::Spec, side: Side) -> Result<Terms<F>> {
    match side {
        Side::W => Ok(parse_weyl::<F>(text, flavor, spec)?.terms),
        _ => parse_terms(text, flavor, spec, side.names()),
    }
}

/// Substitution of generator images.
pub fn apply<F: Field>(phi: &Endo<F>, f: &Terms<F>) -> Terms<F> {
    phi.apply_terms(f, None)
}

pub fn compose<F: Field>(phi: &Endo<F>, psi: &Endo<F>) -> Result<Endo<F>> {
    phi.compose(psi)
}

/// Generator pairs (i, j), i < j, whose image bracket/commutator differs from
/// the transformed structure constant.
pub fn relation_violations<F: Field>(phi: &Endo<F>) -> Vec<(usize, usize)> {
    let m = phi.flavor.main_count();
    let mut bad = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let lhs = match phi.side {
                Side::W => commutator_terms(&phi.images[i], &phi.images[j], &phi.flavor, &phi.spec),
                _ => {
                    let a = phi.image_poly(i);
                    let b = phi.image_poly(j);
                    poisson_bracket(&a, &b).expect("same flavor").terms
                }
            };
            let rhs = phi.apply_terms(&phi.flavor.structure_terms::<F>(&phi.spec, i, j), None);
            if lhs != rhs {
                bad.push((i, j));
            }
        }
    }
    bad
}

/// {φ(g_i), φ(g_j)} = φ({g_i, g_j}) for all pairs.
pub fn check_symplecto<F: Field>(phi: &Endo<F>) -> bool {
    phi.side.commutative() && relation_violations(phi).is_empty()
}

/// [φ(g_i), φ(g_j)] = φ([g_i, g_j]) for all pairs.
pub fn check_weyl_endo<F: Field>(phi: &Endo<F>) -> bool {
    phi.side == Side::W && relation_violations(phi).is_empty()
}

/// Height of φ − Id; None means +∞.
pub fn rank<F: Field>(phi: &Endo<F>, g: &Grading) -> Option<i64> {
    let id = Endo::identity(phi.side, phi.flavor, phi.spec.clone());
    height_of_difference(phi, &id, g).expect("same shape")
}

fn height_of_difference<F: Field>(a: &Endo<F>, b: &Endo<F>, g: &Grading) -> Result<Option<i64>> {
    Ok(a.deviation(b)?.iter().filter_map(|t| t.height(&a.flavor, g)).min())
}

/// exp(−Ht(φ − ψ)), 0 when φ = ψ.
pub fn metric<F: Field>(phi: &Endo<F>, psi: &Endo<F>, g: &Grading) -> Result<f64> {
    Ok(match height_of_difference(phi, psi, g)? {
        None => 0.0,
        Some(h) => (-(h as f64)).exp(),
    })
}

/// Every generator deviation (h and k_ij included) has height ≥ N.
pub fn in_hn<F: Field>(phi: &Endo<F>, n: i64, g: &Grading) -> bool {
    rank(phi, g).is_none_or(|r| r >= n)
}

fn invert_k_action<F: Field>(phi: &Endo<F>) -> Result<Vec<Terms<F>>> {
    let id = k_identity::<F>(&phi.flavor, &phi.spec);
    if phi.k_images == id {
        return Ok(id);
    }
    let kc = phi.flavor.k_count();
    let base = phi.flavor.main_count() + 1;
    let mut mat = vec![vec![F::zero(&phi.spec); kc]; kc];
    for (a, t) in phi.k_images.iter().enumerate() {
        for (m, c) in t.iter() {
            let mut probe = m.clone();
            let Some(b) = (0..kc).find(|&b| probe.e[base + b] == 1) else {
                return Err(Error::Invalid("k action is not linear in the k_ij".into()));
            };
            probe.e[base + b] = 0;
            if !probe.is_one() {
                return Err(Error::Invalid("k action is not linear in the k_ij".into()));
            }
            mat[a][b] = c.clone();
        }
    }
    let inv = linalg::mat_inv(&mat, &phi.spec)?;
    Ok(inv
        .iter()
        .map(|row| {
            let mut t = Terms::zero();
            for (b, c) in row.iter().enumerate() {
                let mut m = Mono::one(&phi.flavor);
                m.e[base + b] = 1;
                t.add_term(m, c.clone());
            }
            t
        })
        .collect())
}

/// ψ with compose(φ, ψ) ≡ Id modulo weighted degree above `order`, by
/// successive substitution starting from the inverse linear part.
pub fn truncated_inverse<F: Field>(phi: &Endo<F>, order: i64, g: &Grading) -> Result<TruncatedEndo<F>> {
    if phi.side == Side::W && !g.graded_for_weyl(&phi.flavor) {
        return Err(Error::IncompatibleGrading);
    }
    let linv = linalg::mat_inv(&phi.linear_matrix(), &phi.spec)?;
    let mut lin = Endo::from_linear(phi.side, phi.flavor, phi.spec.clone(), &linv)?;
    lin.h_action = phi.h_action.inv().map_err(|_| Error::SingularLinearPart)?;
    lin.k_images = invert_k_action(phi)?;
    let id = Endo::identity(phi.side, phi.flavor, phi.spec.clone());
    let mut psi = lin.clone();
    for _ in 0..=(order + 2).max(2) {
        let err = phi.compose_truncated(&psi, g, order)?;
        let dev: Vec<Terms<F>> = err.images.iter().zip(&id.images).map(|(a, b)| a.sub(b)).collect();
        let kdev: Vec<Terms<F>> = err.k_images.iter().zip(&id.k_images).map(|(a, b)| a.sub(b)).collect();
        if dev.iter().chain(&kdev).all(|t| t.is_zero()) {
            return Ok(TruncatedEndo { endo: psi, order, grading: *g });
        }
        for (i, d) in dev.iter().enumerate() {
            let corr = lin.apply_terms(d, Some((g, order)));
            psi.images[i] = psi.images[i].sub(&corr);
        }
        for (i, d) in kdev.iter().enumerate() {
            let corr = lin.apply_terms(d, Some((g, order)));
            psi.k_images[i] = psi.k_images[i].sub(&corr);
        }
    }
    Err(Error::Invalid("truncated inverse did not converge; the nonlinear part must have height at least 2".into()))
}

/// Substitutes h = value, giving a standard-flavor endomorphism.
pub fn specialize_h<F: Field>(phi: &Endo<F>, value: &F) -> Result<Endo<F>> {
    if phi.flavor.kind != BracketKind::HAugmented {
        return Err(Error::IncompatibleFlavor("h specialization needs the h-augmented flavor".into()));
    }
    let flavor = phi.flavor.with_kind(BracketKind::Standard);
    let h_slot = phi.flavor.h_slot();
    let spec_terms = |t: &Terms<F>| -> Result<Terms<F>> {
        let mut out = Terms::zero();
        for (m, c) in t.iter() {
            let e = m.e[h_slot];
            if e < 0 {
                return Err(Error::NegativeHExponent);
            }
            let mut m2 = m.clone();
            m2.e[h_slot] = 0;
            out.add_term(m2, c.mul(&value.pow(e as u64)));
        }
        Ok(out)
    };
    let images = phi.images.iter().map(spec_terms).collect::<Result<Vec<_>>>()?;
    Endo::new(phi.side, flavor, phi.spec.clone(), images)
}

/// Coefficients of a Laurent polynomial in a parameter t, keyed by t-exponent.
pub type LaurentTerms<F> = BTreeMap<i64, Terms<F>>;

/// Endomorphism whose coefficients are Laurent polynomials in t.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentEndo<F: Field> {
    pub side: Side,
    pub flavor: Flavor,
    pub spec: F::Spec,
    pub images: Vec<LaurentTerms<F>>,
    pub k_images: Vec<LaurentTerms<F>>,
    pub h_action: F,
}

impl<F: Field> LaurentEndo<F> {
    /// Splits a term map by a t-exponent assigned to each monomial.
    pub fn split(t: &Terms<F>, mut exponent: impl FnMut(&Mono) -> i64) -> LaurentTerms<F> {
        let mut out: LaurentTerms<F> = BTreeMap::new();
        for (m, c) in t.iter() {
            out.entry(exponent(m)).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    /// max(−min t-exponent, 0) over all coefficients.
    pub fn pole_order(&self) -> i64 {
        self.images
            .iter()
            .chain(&self.k_images)
            .filter_map(|l| l.iter().find(|(_, t)| !t.is_zero()).map(|(e, _)| *e))
            .map(|e| (-e).max(0))
            .max()
            .unwrap_or(0)
    }

    /// Specializes t to a nonzero value.
    pub fn at(&self, t: &F) -> Result<Endo<F>> {
        let eval = |l: &LaurentTerms<F>| -> Result<Terms<F>> {
            let mut out = Terms::zero();
            for (e, terms) in l {
                let s = if *e >= 0 { t.pow(*e as u64) } else { t.inv()?.pow((-*e) as u64) };
                out = out.add(&terms.scale(&s));
            }
            Ok(out)
        };
        let images = self.images.iter().map(eval).collect::<Result<Vec<_>>>()?;
        let k_images = self.k_images.iter().map(eval).collect::<Result<Vec<_>>>()?;
        Ok(Endo { side: self.side, flavor: self.flavor, spec: self.spec.clone(), images, h_action: self.h_action.clone(), k_images })
    }

    /// The t^0 coefficient endomorphism (the limit t → 0 when there is no pole).
    pub fn constant_part(&self) -> Endo<F> {
        let pick = |l: &LaurentTerms<F>| l.get(&0).cloned().unwrap_or_default();
        Endo {
            side: self.side,
            flavor: self.flavor,
            spec: self.spec.clone(),
            images: self.images.iter().map(pick).collect(),
            h_action: self.h_action.clone(),
            k_images: self.k_images.iter().map(pick).collect(),
        }
    }
}

/// Conjugation by the dilation g ↦ t^{w(g)}·g: a monomial of weight m in the
/// image of a weight-w generator acquires t^{m−w}.
pub fn dilation_conjugate<F: Field>(phi: &Endo<F>, g: &Grading) -> LaurentEndo<F> {
    let flavor = phi.flavor;
    let images = phi.images.iter().map(|t| LaurentEndo::split(t, |m| m.weight(&flavor, g) - g.main)).collect();
    let k_images = phi.k_images.iter().map(|t| LaurentEndo::split(t, |m| m.weight(&flavor, g) - g.k)).collect();
    LaurentEndo { side: phi.side, flavor, spec: phi.spec.clone(), images, k_images, h_action: phi.h_action.clone() }
}

/// kAction induced by a linear change of main generators g_a ↦ Σ_c A_ac g_c:
/// k_ab ↦ Σ_{c<d} (A_ac A_bd − A_ad A_bc) k_cd.
pub fn k_action_from_linear<F: Field>(flavor: &Flavor, a: &Matrix<F>) -> Vec<Terms<F>> {
    let base = flavor.main_count() + 1;
    (0..flavor.k_count())
        .map(|idx| {
            let (i, j) = flavor.k_pair(idx);
            let mut t = Terms::zero();
            for other in 0..flavor.k_count() {
                let (c, d) = flavor.k_pair(other);
                let v = a[i][c].mul(&a[j][d]).sub(&a[i][d].mul(&a[j][c]));
                let mut m = Mono::one(flavor);
                m.e[base + other] = 1;
                t.add_term(m, v);
            }
            t
        })
        .collect()
}

/// JSON form of an endomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoJson {
    pub side: Side,
    pub flavor: Flavor,
    pub field: FieldSpec,
    pub images: Vec<String>,
    #[serde(rename = "hAction", default = "one_text")]
    pub h_action: String,
    #[serde(rename = "kAction", default, skip_serializing_if = "Option::is_none")]
    pub k_action: Option<Vec<String>>,
}

fn one_text() -> String {
    "1".into()
}

impl<F: Field> Endo<F> {
    pub fn to_json(&self) -> EndoJson {
        let names = self.side.names();
        let k_action = (self.k_images != k_identity::<F>(&self.flavor, &self.spec))
            .then(|| self.k_images.iter().map(|t| print_terms(t, &self.flavor, names)).collect());
        EndoJson {
            side: self.side,
            flavor: self.flavor,
            field: F::describe(&self.spec),
            images: self.images.iter().map(|t| print_terms(t, &self.flavor, names)).collect(),
            h_action: print_terms(&Terms::constant(&self.flavor, self.h_action.clone()), &self.flavor, names),
            k_action,
        }
    }

    pub fn from_json(j: &EndoJson) -> Result<Self> {
        let spec = F::spec_from(&j.field)?;
        let parse = |s: &String| parse_side::<F>(s, j.flavor, &spec, j.side);
        let images = j.images.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let mut e = Endo::new(j.side, j.flavor, spec.clone(), images)?;
        let h = parse(&j.h_action)?;
        e.h_action = match h.iter().next() {
            None => return Err(Error::Invalid("h action must be nonzero".into())),
            Some((m, c)) if m.is_one() && h.len() == 1 => c.clone(),
            _ => return Err(Error::Invalid("h action must be a scalar".into())),
        };
        if let Some(k) = &j.k_action {
            if k.len() != j.flavor.k_count() {
                return Err(Error::WrongArity { expected: j.flavor.k_count(), got: k.len() });
            }
            e.k_images = k.iter().map(parse).collect::<Result<Vec<_>>>()?;
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(&(), v)
    }

    pub(crate) fn endo(side: Side, flavor: Flavor, imgs: &[&str]) -> Endo<Rational> {
        let images = imgs.iter().map(|s| parse_side::<Rational>(s, flavor, &(), side).unwrap()).collect();
        Endo::new(side, flavor, (), images).unwrap()
    }

    fn terms(flavor: Flavor, side: Side, s: &str) -> Terms<Rational> {
        parse_side::<Rational>(s, flavor, &(), side).unwrap()
    }

    #[test]
    fn apply_examples() {
        let f = Flavor::standard(1);
        let phi = endo(Side::P, f, &["x1 + p1^2", "p1"]);
        assert_eq!(apply(&phi, &terms(f, Side::P, "x1*p1")), terms(f, Side::P, "(x1 + p1^2)*p1"));
        let w = endo(Side::W, f, &["x1 + d1", "d1"]);
        assert_eq!(apply(&w, &terms(f, Side::W, "d1*x1")), terms(f, Side::W, "x1*d1 + d1^2 + 1"));
        let id = Endo::<Rational>::identity(Side::P, f, ());
        let g = terms(f, Side::P, "x1^3 - 2*p1*x1");
        assert_eq!(apply(&id, &g), g);
    }

    #[test]
    fn compose_examples() {
        let f = Flavor::standard(1);
        let a = endo(Side::P, f, &["x1 + p1^2", "p1"]);
        let b = endo(Side::P, f, &["x1", "p1 + x1^3"]);
        assert_eq!(compose(&b, &a).unwrap(), endo(Side::P, f, &["x1 + (p1 + x1^3)^2", "p1 + x1^3"]));
        let id = Endo::identity(Side::P, f, ());
        assert_eq!(compose(&a, &id).unwrap(), a);
        let h = Flavor::h_augmented(1);
        let d2 = Endo::<Rational>::identity(Side::P, h, ()).with_h_action(q(2));
        let d3 = Endo::<Rational>::identity(Side::P, h, ()).with_h_action(q(3));
        assert_eq!(compose(&d2, &d3).unwrap().h_action, q(6));
    }

    #[test]
    fn symplecto_examples() {
        let f = Flavor::standard(1);
        assert!(check_symplecto(&endo(Side::P, f, &["x1 + p1^2", "p1"])));
        assert!(!check_symplecto(&endo(Side::P, f, &["2*x1", "p1"])));
        let h = Flavor::h_augmented(1);
        assert!(check_symplecto(&endo(Side::P, h, &["2*x1", "p1"]).with_h_action(q(2))));
    }

    #[test]
    fn weyl_relation_examples() {
        let f = Flavor::standard(1);
        assert!(check_weyl_endo(&endo(Side::W, f, &["x1 + d1", "d1"])));
        assert!(!check_weyl_endo(&endo(Side::W, f, &["x1", "x1"])));
        assert!(check_weyl_endo(&endo(Side::W, f, &["x1 + d1^2", "d1"])));
    }

    #[test]
    fn rank_metric_hn_examples() {
        let g = Grading::standard();
        let f = Flavor::standard(1);
        let id = Endo::<Rational>::identity(Side::P, f, ());
        assert_eq!(rank(&id, &g), None);
        let a = endo(Side::P, f, &["x1 + p1^2", "p1"]);
        assert_eq!(rank(&a, &g), Some(2));
        assert_eq!(rank(&endo(Side::P, f, &["x1 + p1^2 + p1^5", "p1 + x1^3"]), &g), Some(2));
        assert_eq!(metric(&a, &a, &g).unwrap(), 0.0);
        assert!((metric(&id, &a, &g).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        let c = endo(Side::P, f, &["x1 + p1^3", "p1"]);
        assert!(in_hn(&c, 3, &g));
        assert!(!in_hn(&c, 4, &g));
        assert!(in_hn(&id, 17, &g));
    }

    #[test]
    fn truncated_inverse_examples() {
        let g = Grading::standard();
        let f = Flavor::standard(1);
        let a = endo(Side::P, f, &["x1 + p1^2", "p1"]);
        let inv = truncated_inverse(&a, 5, &g).unwrap();
        assert_eq!(inv.endo, endo(Side::P, f, &["x1 - p1^2", "p1"]));
        let lin = endo(Side::P, f, &["2*x1 + p1", "x1 + p1"]);
        assert_eq!(truncated_inverse(&lin, 3, &g).unwrap().endo, endo(Side::P, f, &["x1 - p1", "-x1 + 2*p1"]));
        let b = endo(Side::P, f, &["x1 + x1*p1", "p1"]);
        let binv = truncated_inverse(&b, 3, &g).unwrap();
        let c = compose(&b, &binv.endo).unwrap();
        assert!(in_hn(&c, 4, &g));
        assert!(matches!(truncated_inverse(&endo(Side::P, f, &["x1", "x1"]), 3, &g), Err(Error::SingularLinearPart)));
    }

    #[test]
    fn specialize_examples() {
        let h = Flavor::h_augmented(1);
        let f = Flavor::standard(1);
        let a = endo(Side::P, h, &["x1 + h*p1^2", "p1"]);
        assert_eq!(specialize_h(&a, &q(1)).unwrap(), endo(Side::P, f, &["x1 + p1^2", "p1"]));
        let id = Endo::<Rational>::identity(Side::W, h, ());
        assert_eq!(specialize_h(&id, &q(1)).unwrap(), Endo::identity(Side::W, f, ()));
        let w = endo(Side::W, h, &["x1 + h^2*d1", "d1"]);
        assert_eq!(specialize_h(&w, &q(1)).unwrap(), endo(Side::W, f, &["x1 + d1", "d1"]));
        let bad = endo(Side::W, h, &["x1 + h^-1*d1^2", "d1"]);
        assert!(matches!(specialize_h(&bad, &q(1)), Err(Error::NegativeHExponent)));
    }

    #[test]
    fn dilation_examples() {
        let g = Grading::standard();
        let f = Flavor::standard(1);
        let a = endo(Side::P, f, &["x1 + p1^2", "p1"]);
        let d = dilation_conjugate(&a, &g);
        assert_eq!(d.images[0].get(&1), Some(&terms(f, Side::P, "p1^2")));
        assert_eq!(d.images[0].get(&0), Some(&terms(f, Side::P, "x1")));
        let lin = endo(Side::P, f, &["x1 + 3*p1", "p1"]);
        assert_eq!(dilation_conjugate(&lin, &g).constant_part(), lin);
        let c = dilation_conjugate(&endo(Side::P, f, &["x1 + p1^3", "p1"]), &g);
        assert_eq!(c.images[0].get(&2), Some(&terms(f, Side::P, "p1^3")));
    }

    #[test]
    fn k_action_congruence() {
        let s = Flavor::skew(1);
        // swap ξ1 and ξ2 flips k12
        let a = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        let k = k_action_from_linear::<Rational>(&s, &a);
        assert_eq!(k[0], terms(s, Side::P, "-k12"));
        let mut phi = Endo::from_linear(Side::P, s, (), &a).unwrap();
        phi.k_images = k;
        assert!(check_symplecto(&phi));
    }

    #[test]
    fn json_roundtrip() {
        let h = Flavor::h_augmented(1);
        let a = endo(Side::W, h, &["x1 + 1/2*h*d1^2", "d1"]).with_h_action(q(3));
        let j = serde_json::to_string(&a.to_json()).unwrap();
        let back: EndoJson = serde_json::from_str(&j).unwrap();
        assert_eq!(Endo::<Rational>::from_json(&back).unwrap(), a);
    }
}
