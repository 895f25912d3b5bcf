//! Tame approximation of symplectomorphisms with identity linear part.
//!
//! Each stage reads the lowest deviation of the residual as a Hamiltonian
//! vector field, splits the Hamiltonian into powers of linear forms, and
//! appends one exact corrector flow per power. Vector fields follow
//! X_H(ζ_j) = Σ_i ω_ji ∂H/∂ζ_i, so X_H(x_a) = −∂H/∂p_a and X_H(p_a) = ∂H/∂x_a.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{BracketKind, Flavor, Grading, Mono, Terms};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::morphism::{check_symplecto, rank, Endo, Side};
use crate::poisson::{jacobian, partial_terms, Poly};
use crate::scalars::Field;
use crate::tame::{evaluate_truncated, invert_word, ElementaryGen, TameWord};

/// A term λ·(c·ζ)^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaringTerm<F: Field> {
    pub lambda: F,
    pub c: Vec<F>,
    pub d: u32,
}

/// Order in which a stage's correctors are appended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// Descending lexicographic order on the covectors.
    #[default]
    Forward,
    /// The reverse of `Forward`.
    Reverse,
}

/// Progress record of one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub k: i64,
    pub terms: usize,
    /// Rank of the residual after the stage (lower bound when truncated).
    pub rank_after: i64,
}

/// Result of [`approximate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximation<F: Field> {
    pub word: TameWord<F>,
    /// Every residual deviation has degree ≥ this value.
    pub residual_rank: i64,
    pub stages: Vec<Stage>,
    /// The deviation Hamiltonian of each stage and its Waring terms, in word order.
    pub stage_terms: Vec<(Poly<F>, Vec<WaringTerm<F>>)>,
}

fn require_char0<F: Field>(spec: &F::Spec) -> Result<()> {
    if F::characteristic(spec) != 0 {
        Err(Error::PositiveCharacteristic)
    } else {
        Ok(())
    }
}

/// Hamiltonian vector field of H in the fixed sign convention.
pub fn hamiltonian_field<F: Field>(h: &Terms<F>, flavor: &Flavor, spec: &F::Spec) -> Vec<Terms<F>> {
    let pairs = flavor.pairs();
    (0..flavor.main_count())
        .map(|j| if j < pairs { partial_terms(h, j + pairs, spec).neg() } else { partial_terms(h, j - pairs, spec) })
        .collect()
}

/// The homogeneous H of degree k+1 whose field equals the degree-k part of σ − Id.
pub fn deviation_hamiltonian<F: Field>(sigma: &Endo<F>, k: i64) -> Result<Poly<F>> {
    require_char0::<F>(&sigma.spec)?;
    if sigma.side != Side::P || sigma.flavor.kind != BracketKind::Standard {
        return Err(Error::IncompatibleFlavor("Hamiltonian extraction needs a standard Poisson endomorphism".into()));
    }
    if !check_symplecto(sigma) {
        return Err(Error::NotSymplectic);
    }
    residual_hamiltonian(sigma, k)
}

/// [`deviation_hamiltonian`] without the symplecticity check, for truncated residuals.
fn residual_hamiltonian<F: Field>(sigma: &Endo<F>, k: i64) -> Result<Poly<F>> {
    let flavor = sigma.flavor;
    let g = Grading::standard();
    let pairs = flavor.pairs();
    let dk: Vec<Terms<F>> = sigma
        .images
        .iter()
        .enumerate()
        .map(|(j, t)| t.sub(&Terms::generator(&flavor, &sigma.spec, j)).homogeneous(&flavor, &g, k))
        .collect();
    // ∂H/∂x_a = D(p_a), ∂H/∂p_a = −D(x_a); Euler: (k+1)H = Σ ζ_i ∂H/∂ζ_i.
    let mut h = Terms::zero();
    for a in 0..pairs {
        h = h.add(&dk[pairs + a].shift(&Mono::generator(&flavor, a)));
        h = h.sub(&dk[a].shift(&Mono::generator(&flavor, pairs + a)));
    }
    let h = h.scale(&F::from_i64(&sigma.spec, k + 1).inv()?);
    if hamiltonian_field(&h, &flavor, &sigma.spec) != dk {
        return Err(Error::DeviationNotHamiltonian(k));
    }
    Ok(Poly::new(flavor, sigma.spec.clone(), h))
}

fn lex_desc<F: Field>(a: &[F], b: &[F]) -> std::cmp::Ordering {
    // Nonzero before zero, then by printed form; deterministic and field-agnostic.
    for (x, y) in a.iter().zip(b) {
        let o = y.is_zero().cmp(&x.is_zero()).then_with(|| x.to_string().cmp(&y.to_string()));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Powers of linear forms summing to H, via the polarization identity.
pub fn waring_decompose<F: Field>(h: &Poly<F>) -> Result<Vec<WaringTerm<F>>> {
    require_char0::<F>(&h.spec)?;
    let spec = &h.spec;
    let m = h.flavor.main_count();
    let mut acc: BTreeMap<Vec<String>, WaringTerm<F>> = BTreeMap::new();
    for (mono, coeff) in h.terms.iter() {
        let mut idx = Vec::new();
        for (i, &e) in mono.e[..m].iter().enumerate() {
            idx.extend(std::iter::repeat_n(i, e as usize));
        }
        let d = idx.len() as u32;
        if d == 0 {
            continue;
        }
        let mut fact = F::one(spec);
        for i in 1..=d as i64 {
            fact = fact.mul(&F::from_i64(spec, i));
        }
        let norm = F::from_i64(spec, 1i64 << (d - 1)).mul(&fact).inv()?;
        let base = coeff.mul(&norm);
        for mask in 0u64..(1u64 << (d - 1)) {
            let mut c = vec![F::zero(spec); m];
            c[idx[0]] = F::one(spec);
            let mut sign = 1i64;
            for (bit, &i) in idx[1..].iter().enumerate() {
                let eps = if mask >> bit & 1 == 1 { -1 } else { 1 };
                sign *= eps;
                c[i] = c[i].add(&F::from_i64(spec, eps));
            }
            let Some(first) = c.iter().find(|x| !x.is_zero()).cloned() else { continue };
            let inv = first.inv()?;
            let c: Vec<F> = c.iter().map(|x| x.mul(&inv)).collect();
            let lambda = base.mul(&F::from_i64(spec, sign)).mul(&first.pow(d as u64));
            let key: Vec<String> = c.iter().map(|x| x.to_string()).chain(std::iter::once(d.to_string())).collect();
            match acc.get_mut(&key) {
                Some(t) => t.lambda = t.lambda.add(&lambda),
                None => {
                    acc.insert(key, WaringTerm { lambda, c, d });
                }
            }
        }
    }
    let mut out: Vec<WaringTerm<F>> = acc.into_values().filter(|t| !t.lambda.is_zero()).collect();
    out.sort_by(|a, b| b.d.cmp(&a.d).then_with(|| lex_desc(&a.c, &b.c)));
    Ok(out)
}

/// Σ λ (c·ζ)^d as a polynomial.
pub fn expand_waring<F: Field>(terms: &[WaringTerm<F>], flavor: Flavor, spec: &F::Spec) -> Poly<F> {
    let mut acc = Poly::zero(flavor, spec.clone());
    for t in terms {
        let mut lin = Terms::zero();
        for (i, c) in t.c.iter().enumerate() {
            lin.add_term(Mono::generator(&flavor, i), c.clone());
        }
        let p = Poly::new(flavor, spec.clone(), lin).pow(t.d).scale(&t.lambda);
        acc = acc.add(&p).expect("same flavor");
    }
    acc
}

fn form_bracket<F: Field>(a: &[F], b: &[F], n: usize, spec: &F::Spec) -> F {
    // {a·ζ, b·ζ} = Σ_a (a_{p_a} b_{x_a} − a_{x_a} b_{p_a})
    let mut s = F::zero(spec);
    for i in 0..n {
        s = s.add(&a[n + i].mul(&b[i])).sub(&a[i].mul(&b[n + i]));
    }
    s
}

/// A ∈ Sp(2n) whose p_1 row is c, so the linear map sends p_1 to c·ζ.
pub fn symplectic_completion<F: Field>(c: &[F], spec: &F::Spec) -> Result<Matrix<F>> {
    require_char0::<F>(spec)?;
    let m = c.len();
    let n = m / 2;
    if m == 0 || m % 2 != 0 {
        return Err(Error::DimensionMismatch("covector length must be even".into()));
    }
    if c.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroCovector);
    }
    let unit = |i: usize| -> Vec<F> { (0..m).map(|j| if i == j { F::one(spec) } else { F::zero(spec) }).collect() };
    // momenta first, then positions
    let order: Vec<usize> = (n..m).chain(0..n).collect();
    let x_order: Vec<usize> = (0..n).chain(n..m).collect();
    let mut rows: Vec<Option<Vec<F>>> = vec![None; m];
    let mut pool: Vec<Vec<F>> = (0..m).map(unit).collect();
    let project = |v: &Vec<F>, p: &Vec<F>, x: &Vec<F>| -> Vec<F> {
        let vx = form_bracket(v, x, n, spec);
        let vp = form_bracket(v, p, n, spec);
        v.iter().zip(p).zip(x).map(|((vi, pi), xi)| vi.sub(&vx.mul(pi)).add(&vp.mul(xi))).collect()
    };
    for a in 0..n {
        let p: Vec<F> = if a == 0 {
            c.to_vec()
        } else {
            order.iter().map(|&i| pool[i].clone()).find(|v| v.iter().any(|x| !x.is_zero())).ok_or(Error::NotSymplectic)?
        };
        let (x, s) = x_order
            .iter()
            .map(|&i| {
                let v = pool[i].clone();
                let s = form_bracket(&p, &v, n, spec);
                (v, s)
            })
            .find(|(_, s)| !s.is_zero())
            .ok_or(Error::NotSymplectic)?;
        let sinv = s.inv()?;
        let x: Vec<F> = x.iter().map(|v| v.mul(&sinv)).collect();
        for v in pool.iter_mut() {
            *v = project(v, &p, &x);
        }
        rows[n + a] = Some(p);
        rows[a] = Some(x);
    }
    let a: Matrix<F> = rows.into_iter().map(|r| r.expect("filled")).collect();
    debug_assert!(linalg::is_symplectic(&a, spec));
    if !linalg::is_symplectic(&a, spec) {
        return Err(Error::NotSymplectic);
    }
    Ok(a)
}

/// Word whose evaluation is exactly the time-one flow of λ(c·ζ)^d, i.e.
/// Id + X_{λ(c·ζ)^d}.
pub fn corrector<F: Field>(t: &WaringTerm<F>, flavor: Flavor, spec: &F::Spec) -> Result<TameWord<F>> {
    if t.d < 2 {
        return Err(Error::Invalid("corrector needs degree at least 2".into()));
    }
    let a = symplectic_completion(&t.c, spec)?;
    let pairs = flavor.pairs();
    let mut f = Terms::zero();
    let mut mono = Mono::one(&flavor);
    mono.e[pairs] = (t.d - 1) as i32;
    f.add_term(mono, t.lambda.mul(&F::from_i64(spec, t.d as i64)).neg());
    let shift = ElementaryGen::XShift(0, f);
    let gens = if a == linalg::identity::<F>(spec, a.len()) {
        vec![shift]
    } else {
        let ainv = linalg::mat_inv(&a, spec)?;
        vec![ElementaryGen::LinearSymplectic(a), shift, ElementaryGen::LinearSymplectic(ainv)]
    };
    Ok(TameWord::new(Side::P, flavor, gens))
}

/// Options for [`approximate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ApproxOptions {
    pub tie_break: TieBreak,
}

/// Tame word w with rank(evaluate(w)⁻¹ ∘ σ) ≥ N.
pub fn approximate<F: Field>(sigma: &Endo<F>, n: i64, opts: ApproxOptions) -> Result<Approximation<F>> {
    let spec = &sigma.spec;
    require_char0::<F>(spec)?;
    if sigma.side != Side::P || sigma.flavor.kind != BracketKind::Standard {
        return Err(Error::IncompatibleFlavor("approximation needs a standard Poisson endomorphism".into()));
    }
    if !check_symplecto(sigma) {
        return Err(Error::NotSymplectic);
    }
    let flavor = sigma.flavor;
    let polys: Vec<Poly<F>> = (0..flavor.main_count()).map(|i| sigma.image_poly(i)).collect();
    if !jacobian(&polys)?.terms.eq(&Terms::constant(&flavor, F::one(spec))) {
        return Err(Error::NonUnitJacobian);
    }
    let g = Grading::standard();
    let mut word = TameWord::identity(Side::P, flavor);
    let lin = sigma.linear_matrix();
    let mut residual = sigma.truncate(&g, n);
    if lin != linalg::identity::<F>(spec, lin.len()) {
        if !linalg::is_symplectic(&lin, spec) {
            return Err(Error::NotSymplectic);
        }
        let lw = TameWord::new(Side::P, flavor, vec![ElementaryGen::LinearSymplectic(lin)]);
        residual = invert_word(&lw, spec)?.eval(spec)?.compose_truncated(&residual, &g, n)?;
        word = lw;
    }
    let current_rank = |r: &Endo<F>| rank(r, &g).unwrap_or(n + 1).min(n + 1);
    let mut k = current_rank(&residual);
    let mut stages = Vec::new();
    let mut stage_terms = Vec::new();
    while k < n {
        let h = residual_hamiltonian(&residual, k)?;
        let mut terms = waring_decompose(&h)?;
        if opts.tie_break == TieBreak::Reverse {
            terms.reverse();
        }
        let mut stage_word = TameWord::identity(Side::P, flavor);
        for t in &terms {
            stage_word = stage_word.concat(&corrector(t, flavor, spec)?);
        }
        let inv = evaluate_truncated(&invert_word(&stage_word, spec)?, Side::P, flavor, spec, &g, n)?;
        residual = inv.compose_truncated(&residual, &g, n)?;
        word = word.concat(&stage_word);
        let next = current_rank(&residual);
        if next <= k {
            return Err(Error::StageStall(k));
        }
        stages.push(Stage { k, terms: terms.len(), rank_after: next });
        stage_terms.push((h, terms));
        k = next;
    }
    Ok(Approximation { word, residual_rank: k, stages, stage_terms })
}
