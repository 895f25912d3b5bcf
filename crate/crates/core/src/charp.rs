//! The fixed-prime center map Φ_p.
//!
//! A Weyl endomorphism over F_{p^k} sends the center F[x^p, d^p] to itself.
//! Reading p-th powers of the generator images in the coordinates z = x^p,
//! w = d^p and undoing Frobenius on the coefficients gives a polynomial map
//! of the center, which is symplectic for the bracket −[a₀, b₀]/p.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BracketKind, Grading, Mono, Terms};
use crate::error::{Error, Result};
use crate::morphism::{check_weyl_endo, specialize_h, Endo, Side};
use crate::scalars::{frobenius, lift_residue, reduce_mod_p, Field, Gf, GfSpec, Rational};
use crate::weyl::{
    center_coordinates, commutator_terms, divide_exponents, is_central_terms, pth_power, power_terms,
    CenterElt, WeylElt, DEFAULT_EXPANSION_BOUND,
};

/// Polynomial map of the center, images in z_i, w_i.
pub type CenterEndo = Endo<Gf>;

/// Largest candidate count tried by [`central_pth_root`].
pub const ROOT_SEARCH_LIMIT: usize = 50_000;

/// Coefficient-wise reduction of a rational endomorphism.
pub fn reduce_endo_mod_p(phi: &Endo<Rational>, spec: &Arc<GfSpec>) -> Result<Endo<Gf>> {
    phi.map_coeffs(spec.clone(), |q| reduce_mod_p(q, spec))
}

fn check_standard_weyl<F: Field>(phi: &Endo<F>) -> Result<()> {
    if phi.side != Side::W {
        return Err(Error::SideMismatch);
    }
    if phi.flavor.kind != BracketKind::Standard {
        return Err(Error::IncompatibleFlavor("the center map needs the standard Weyl flavor".into()));
    }
    Ok(())
}

/// Images c_i = center_coordinates(φ(g_i)^p).
pub fn restrict_to_center(phi: &Endo<Gf>, bound: usize) -> Result<CenterEndo> {
    check_standard_weyl(phi)?;
    if !check_weyl_endo(phi) {
        return Err(Error::Invalid("not a Weyl endomorphism".into()));
    }
    let images = (0..phi.flavor.main_count())
        .map(|i| {
            let pw = pth_power(&phi.image_weyl(i), bound)?;
            center_coordinates(&pw).map(|c| c.terms).map_err(|e| match e {
                Error::NotCentral | Error::NotInPthPowerForm => Error::InternalCentralityFailure,
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Endo::new(Side::Center, phi.flavor, phi.spec.clone(), images)
}

/// Inverse Frobenius on every coefficient.
pub fn frobenius_twist(psi: &CenterEndo) -> CenterEndo {
    psi.map_coeffs(psi.spec.clone(), |c| Ok(frobenius(c, true))).expect("infallible")
}

/// Φ_p of a finite-field Weyl endomorphism; h-augmented input is specialized at h = 1.
pub fn phi_p_gf(phi: &Endo<Gf>) -> Result<CenterEndo> {
    let phi = if phi.flavor.kind == BracketKind::HAugmented {
        specialize_h(phi, &Gf::one(&phi.spec))?
    } else {
        phi.clone()
    };
    Ok(frobenius_twist(&restrict_to_center(&phi, DEFAULT_EXPANSION_BOUND)?))
}

/// Φ_p of a rational Weyl endomorphism at the field `spec`.
pub fn phi_p(phi: &Endo<Rational>, spec: &Arc<GfSpec>) -> Result<CenterEndo> {
    let phi = if phi.flavor.kind == BracketKind::HAugmented {
        specialize_h(phi, &Rational::from_i64(&(), 1))?
    } else {
        phi.clone()
    };
    phi_p_gf(&reduce_endo_mod_p(&phi, spec)?)
}

/// p-th powers of the images of an h-augmented Weyl endomorphism known up to
/// quantum degree `order`, in coordinates z, w, h. Terms are exact up to
/// degree order + p − 1; centrality is checked on that range.
pub fn phi_p_truncated(phi: &Endo<Gf>, order: i64, bound: usize) -> Result<Vec<Terms<Gf>>> {
    if phi.side != Side::W || phi.flavor.kind != BracketKind::HAugmented {
        return Err(Error::IncompatibleFlavor("truncated center map needs the h-augmented Weyl flavor".into()));
    }
    let p = Gf::characteristic(&phi.spec);
    let g = Grading::quantum();
    let known = order + p as i64 - 1;
    let flavor = phi.flavor;
    phi.images
        .iter()
        .map(|t| {
            let pw = power_terms(t, p, &flavor, &phi.spec, bound, Some((&g, known)))?;
            for i in 0..flavor.main_count() {
                let gen = Terms::generator(&flavor, &phi.spec, i);
                let c = commutator_terms(&pw, &gen, &flavor, &phi.spec);
                if !c.truncate(&flavor, &g, known + 1).is_zero() {
                    return Err(Error::InternalCentralityFailure);
                }
            }
            let z = divide_exponents(&pw, &flavor, p).map_err(|_| Error::InternalCentralityFailure)?;
            z.map_coeffs(|c| Ok(frobenius(c, true)))
        })
        .collect()
}

fn lift_center(a: &CenterElt<Gf>, p: u64, shifted: &BTreeSet<Mono>) -> Result<Terms<Rational>> {
    let main = a.flavor.main_count();
    let pq = Rational::from_i64(&(), p as i64);
    let mut out = Terms::zero();
    for (m, c) in a.terms.iter() {
        let mut v = lift_residue(c)?;
        if shifted.contains(m) {
            v += &pq;
        }
        let mut raised = m.clone();
        for e in raised.e[..main].iter_mut() {
            *e *= p as i32;
        }
        out.add_term(raised, v);
    }
    Ok(out)
}

fn bracket_with_lifts(a: &CenterElt<Gf>, b: &CenterElt<Gf>, sa: &BTreeSet<Mono>, sb: &BTreeSet<Mono>) -> Result<CenterElt<Gf>> {
    a.flavor.check_same(&b.flavor)?;
    if a.flavor.kind != BracketKind::Standard {
        return Err(Error::IncompatibleFlavor("center bracket needs the standard flavor".into()));
    }
    let spec = a.spec.clone();
    if spec.k() != 1 {
        return Err(Error::InvalidField("center bracket lifts need a prime field".into()));
    }
    let p = spec.p();
    let a0 = lift_center(a, p, sa)?;
    let b0 = lift_center(b, p, sb)?;
    let comm = commutator_terms(&a0, &b0, &a.flavor, &());
    let pz = num_bigint::BigInt::from(p);
    let mut reduced = Terms::zero();
    for (m, c) in comm.iter() {
        if !c.is_integer() || !c.numer().is_multiple_of(&pz) {
            return Err(Error::NotDivisibleByP);
        }
        let q = Rational::from_integer(-(c.numer() / &pz));
        let r = reduce_mod_p(&q, &spec)?;
        if !r.is_zero() {
            reduced.add_term(m.clone(), r);
        }
    }
    let z = divide_exponents(&reduced, &a.flavor, p).map_err(|_| Error::NotDivisibleByP)?;
    Ok(CenterElt::new(a.flavor, spec, z))
}

/// {a, b} = −ρ([a₀, b₀]/p) with lifts z ↦ x^p, w ↦ d^p and coefficients in 0..p.
pub fn center_bracket(a: &CenterElt<Gf>, b: &CenterElt<Gf>) -> Result<CenterElt<Gf>> {
    bracket_with_lifts(a, b, &BTreeSet::new(), &BTreeSet::new())
}

/// The bracket computed with +p added to a seeded random subset of the lifted coefficients.
pub fn center_bracket_shifted(a: &CenterElt<Gf>, b: &CenterElt<Gf>, seed: u64) -> Result<CenterElt<Gf>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |t: &Terms<Gf>| -> BTreeSet<Mono> { t.sorted_desc().into_iter().map(|(m, _)| m).filter(|_| rng.gen_bool(0.5)).cloned().collect() };
    let sa = pick(&a.terms);
    let sb = pick(&b.terms);
    bracket_with_lifts(a, b, &sa, &sb)
}

/// Pairs (i, j) where {ψ(g_i), ψ(g_j)} differs from the standard constant.
pub fn center_relation_violations(psi: &CenterEndo) -> Result<Vec<(usize, usize)>> {
    let m = psi.flavor.main_count();
    let mut bad = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let lhs = center_bracket(&psi.image_poly(i), &psi.image_poly(j))?;
            let rhs = psi.flavor.structure_terms::<Gf>(&psi.spec, i, j);
            if lhs.terms != rhs {
                bad.push((i, j));
            }
        }
    }
    Ok(bad)
}

/// True when ψ preserves the center bracket on all generator pairs.
pub fn check_center_symplecto(psi: &CenterEndo) -> Result<bool> {
    Ok(psi.side == Side::Center && center_relation_violations(psi)?.is_empty())
}

/// The unique Ĝ with Fr⁻¹(center coordinates of Ĝ^p) = H.
///
/// The top homogeneous part of Ĝ equals that of H. Lower coefficients are
/// searched over the monomials lying below the support of H, and every
/// candidate is verified by recomputing its p-th power.
pub fn central_pth_root(h: &CenterElt<Gf>) -> Result<WeylElt<Gf>> {
    let flavor = h.flavor;
    let spec = h.spec.clone();
    if flavor.kind != BracketKind::Standard {
        return Err(Error::IncompatibleFlavor("p-th roots need the standard flavor".into()));
    }
    let g = Grading::standard();
    let Some(top) = h.terms.degree(&flavor, &g) else {
        return Ok(WeylElt::zero(flavor, spec));
    };
    let fixed = h.terms.homogeneous(&flavor, &g, top);
    let main = flavor.main_count();
    let mut below: BTreeSet<Mono> = BTreeSet::new();
    for m in h.terms.monos() {
        let mut stack = vec![m.clone()];
        while let Some(cur) = stack.pop() {
            if !below.insert(cur.clone()) {
                continue;
            }
            for i in 0..main {
                if cur.e[i] > 0 {
                    let mut next = cur.clone();
                    next.e[i] -= 1;
                    stack.push(next);
                }
            }
        }
    }
    let unknown: Vec<Mono> = below.into_iter().filter(|m| m.main_degree(&flavor) < top).collect();
    let elems = Gf::all(&spec);
    let q = elems.len();
    let total = (0..unknown.len()).try_fold(1usize, |acc, _| acc.checked_mul(q)).filter(|&t| t <= ROOT_SEARCH_LIMIT);
    let Some(total) = total else {
        return Err(Error::Invalid(format!("p-th root search over {} unknown coefficients is too large", unknown.len())));
    };
    let mut found: Option<WeylElt<Gf>> = None;
    for idx in 0..total {
        let mut cand = fixed.clone();
        let mut r = idx;
        for m in &unknown {
            cand.add_term(m.clone(), elems[r % q].clone());
            r /= q;
        }
        let cand = WeylElt::new(flavor, spec.clone(), cand);
        let pw = pth_power(&cand, DEFAULT_EXPANSION_BOUND)?;
        if !is_central_terms(&pw.terms, &flavor, &spec) {
            continue;
        }
        let coords = center_coordinates(&pw)?.terms.map_coeffs(|c| Ok(frobenius(c, true)))?;
        if coords == h.terms {
            if found.is_some() {
                return Err(Error::Ambiguous);
            }
            found = Some(cand);
        }
    }
    found.ok_or(Error::NoRoot)
}
