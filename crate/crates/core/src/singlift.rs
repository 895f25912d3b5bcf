//! Diagonal-curve pole tests for the rank filtration, the lifting pipeline
//! from symplectomorphisms to Weyl endomorphisms, and the h-power twists.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{BracketKind, Flavor, Grading, Mono, Terms};
use crate::approx::{approximate, ApproxOptions, TieBreak};
use crate::charp::{phi_p_truncated, reduce_endo_mod_p};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::morphism::{k_action_from_linear, rank, specialize_h, truncated_inverse, Endo, LaurentEndo, Side};
use crate::scalars::{reduce_mod_p, Field, GfSpec, Rational};
use crate::tame::{evaluate_truncated, transport, TameWord};
use crate::weyl::{commutator_terms, WeylElt, DEFAULT_EXPANSION_BOUND};

/// Λ(t) = diag(t^{m_1}, …, t^{m_k}) on the main generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagonalCurve {
    pub m: Vec<i64>,
}

impl DiagonalCurve {
    pub fn new(m: Vec<i64>) -> Result<Self> {
        if m.is_empty() || m.iter().any(|&v| v < 1) {
            return Err(Error::Invalid("curve exponents must be positive".into()));
        }
        Ok(DiagonalCurve { m })
    }

    fn min(&self) -> i64 {
        *self.m.iter().min().expect("nonempty")
    }

    fn max(&self) -> i64 {
        *self.m.iter().max().expect("nonempty")
    }

    /// floor(m_max / m_min).
    pub fn order(&self) -> i64 {
        self.max() / self.min()
    }

    /// m_max ≤ N·m_min: the curves whose conjugates keep H_N pole-free.
    pub fn admissible(&self, n: i64) -> bool {
        self.max() <= n * self.min()
    }
}

pub fn curve_order(c: &DiagonalCurve) -> i64 {
    c.order()
}

/// Λ(t)∘φ∘Λ(t)⁻¹: a monomial ξ^l in the image of ξ_i carries
/// t^{Σ m_j l_j + Σ (m_a + m_b) e_ab − m_i}; k_ab images shift by −(m_a + m_b).
pub fn conjugate_by_curve<F: Field>(phi: &Endo<F>, c: &DiagonalCurve) -> Result<LaurentEndo<F>> {
    let flavor = phi.flavor;
    let main = flavor.main_count();
    if c.m.len() != main {
        return Err(Error::DimensionMismatch(format!("curve has {} exponents, flavor has {main} generators", c.m.len())));
    }
    let kw: Vec<i64> = (0..flavor.k_count())
        .map(|idx| {
            let (a, b) = flavor.k_pair(idx);
            c.m[a] + c.m[b]
        })
        .collect();
    let weight = |m: &Mono| -> i64 {
        let mut w: i64 = (0..main).map(|j| c.m[j] * m.e[j] as i64).sum();
        for (idx, k) in kw.iter().enumerate() {
            w += k * m.e[main + 1 + idx] as i64;
        }
        w
    };
    let images = phi.images.iter().enumerate().map(|(i, t)| LaurentEndo::split(t, |m| weight(m) - c.m[i])).collect();
    let k_images = phi.k_images.iter().enumerate().map(|(idx, t)| LaurentEndo::split(t, |m| weight(m) - kw[idx])).collect();
    Ok(LaurentEndo { side: phi.side, flavor, spec: phi.spec.clone(), images, k_images, h_action: phi.h_action.clone() })
}

pub fn pole_order<F: Field>(psi: &LaurentEndo<F>) -> i64 {
    psi.pole_order()
}

/// A curve under which the conjugate has a pole, with the general-position
/// constants (λ, δ) applied first when the witness needed them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub curve: DiagonalCurve,
    pub reduction: Option<(i64, i64)>,
    pub pole_order: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanVerdict {
    ConsistentWithHN,
    PoleWitness(Witness),
}

/// m_1 = N·m_2 at one generator position and m_2 elsewhere, for m_2 = 1..=N+1.
pub fn witness_family(main: usize, n: i64) -> Vec<DiagonalCurve> {
    let mut out = Vec::new();
    for i in 0..main {
        for m2 in 1..=n + 1 {
            let mut m = vec![m2; main];
            m[i] = n * m2;
            out.push(DiagonalCurve { m });
        }
    }
    out
}

/// A random admissible curve: exponents in [m_min, N·m_min] with m_min attained.
pub fn random_admissible_curve(main: usize, n: i64, rng: &mut impl Rng) -> DiagonalCurve {
    let lo = rng.gen_range(1..=4i64);
    let mut m: Vec<i64> = (0..main).map(|_| rng.gen_range(lo..=n.max(1) * lo)).collect();
    let at = rng.gen_range(0..main);
    m[at] = lo;
    DiagonalCurve { m }
}

/// Linear change (T, T⁻¹) moving φ into general position. With the auxiliary
/// pair of the skew flavor this is ξ_1 ↦ ξ_1 + λu + δv with the induced k
/// action; otherwise each canonical pair gets the shear
/// x ↦ (1+λδ)x + λp, p ↦ δx + p.
pub fn reduction_transform<F: Field>(flavor: Flavor, side: Side, spec: &F::Spec, lambda: i64, delta: i64) -> Result<(Endo<F>, Endo<F>)> {
    let main = flavor.main_count();
    let mut a: Matrix<F> = linalg::identity(spec, main);
    let l = F::from_i64(spec, lambda);
    let d = F::from_i64(spec, delta);
    if flavor.kind == BracketKind::Skew {
        if !flavor.aux {
            return Err(Error::IncompatibleFlavor("skew reduction needs the auxiliary pair".into()));
        }
        a[0][main - 2] = l;
        a[0][main - 1] = d;
    } else {
        let pairs = flavor.pairs();
        for i in 0..pairs {
            a[i][i] = F::one(spec).add(&l.mul(&d));
            a[i][pairs + i] = l.clone();
            a[pairs + i][i] = d.clone();
        }
    }
    let ainv = linalg::mat_inv(&a, spec)?;
    let build = |m: &Matrix<F>| -> Result<Endo<F>> {
        let mut e = Endo::from_linear(side, flavor, spec.clone(), m)?;
        if flavor.kind == BracketKind::Skew {
            e.k_images = k_action_from_linear(&flavor, m);
        }
        Ok(e)
    };
    Ok((build(&a)?, build(&ainv)?))
}

fn special_position<F: Field>(phi: &Endo<F>, g: &Grading) -> bool {
    let Some(r) = rank(phi, g) else { return true };
    phi.images.iter().enumerate().any(|(i, t)| {
        let dev = t.sub(&Terms::generator(&phi.flavor, &phi.spec, i)).homogeneous(&phi.flavor, g, r);
        let free = dev.monos().any(|m| m.e[i] == 0);
        free
    })
}

fn scan_curves<F: Field>(phi: &Endo<F>, curves: &[DiagonalCurve], reduction: Option<(i64, i64)>) -> Result<Option<Witness>> {
    for c in curves {
        let po = conjugate_by_curve(phi, c)?.pole_order();
        if po > 0 {
            return Ok(Some(Witness { curve: c.clone(), reduction, pole_order: po }));
        }
    }
    Ok(None)
}

/// Searches for a pole under the witness family and `samples` seeded random
/// admissible curves of order ≤ N.
pub fn hn_scan<F: Field>(phi: &Endo<F>, n: i64, samples: usize, seed: u64) -> Result<ScanVerdict> {
    let main = phi.flavor.main_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = witness_family(main, n);
    curves.extend((0..samples).map(|_| random_admissible_curve(main, n, &mut rng)));
    if let Some(w) = scan_curves(phi, &curves, None)? {
        return Ok(ScanVerdict::PoleWitness(w));
    }
    let g = Grading::standard();
    if special_position(phi, &g) {
        return Ok(ScanVerdict::ConsistentWithHN);
    }
    for lambda in 1..=3 {
        for delta in 1..=3 {
            let (t, tinv) = reduction_transform::<F>(phi.flavor, phi.side, &phi.spec, lambda, delta)?;
            let conj = tinv.compose(phi)?.compose(&t)?;
            if !special_position(&conj, &g) {
                continue;
            }
            if let Some(w) = scan_curves(&conj, &curves, Some((lambda, delta)))? {
                return Ok(ScanVerdict::PoleWitness(w));
            }
            return Ok(ScanVerdict::ConsistentWithHN);
        }
    }
    Ok(ScanVerdict::ConsistentWithHN)
}

/// Commutator table of the lifted images against the structure constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub checked: usize,
    pub violations: Vec<(usize, usize)>,
}

impl CommutationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn commutation_table<F: Field>(images: &[WeylElt<F>], flavor: &Flavor, known: Option<(&Grading, i64)>) -> CommutationReport {
    let mut violations = Vec::new();
    let mut checked = 0;
    let Some(first) = images.first() else { return CommutationReport { checked, violations } };
    let spec = first.spec.clone();
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            checked += 1;
            let mut c = commutator_terms(&images[i].terms, &images[j].terms, flavor, &spec);
            if let Some((g, max)) = known {
                c = c.truncate(flavor, g, max);
            }
            if c != flavor.structure_terms::<F>(&spec, i, j) {
                violations.push((i, j));
            }
        }
    }
    CommutationReport { checked, violations }
}

/// All pairwise commutators [φ̂(g_i), φ̂(g_j)] compared with the flavor's structure constants.
pub fn lifted_commutation_check<F: Field>(images: &[WeylElt<F>], flavor: &Flavor) -> CommutationReport {
    commutation_table(images, flavor, None)
}

/// As [`lifted_commutation_check`] for images known modulo weight above
/// `order`; commutators are compared up to weight order + 1.
pub fn truncated_commutation_check<F: Field>(images: &[WeylElt<F>], flavor: &Flavor, g: &Grading, order: i64) -> CommutationReport {
    commutation_table(images, flavor, Some((g, order + 1)))
}

/// Knobs for [`lift`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftOptions {
    pub order: i64,
    pub primes: Vec<u64>,
    pub margin: i64,
}

impl LiftOptions {
    pub fn new(order: i64, primes: Vec<u64>) -> Self {
        LiftOptions { order, primes, margin: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCheck {
    pub p: u64,
    pub consistent: bool,
    /// h-dependent center terms (the small-p corrections).
    pub corrections: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftCertificate {
    pub order: i64,
    pub residual_rank: i64,
    pub stable_height: i64,
    pub stabilization: bool,
    pub primes: Vec<PrimeCheck>,
    pub canonicity: bool,
    pub commutation_h: CommutationReport,
    pub commutation_specialized: CommutationReport,
    pub inverse_certified: bool,
}

impl LiftCertificate {
    pub fn passed(&self) -> bool {
        self.stabilization
            && self.primes.iter().all(|p| p.consistent)
            && self.canonicity
            && self.commutation_h.ok()
            && self.commutation_specialized.ok()
            && self.inverse_certified
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    /// The lift at h = 1, known modulo terms above the order.
    pub lifted: Endo<Rational>,
    /// The h-augmented lift modulo quantum weight above the order.
    pub lifted_h: Endo<Rational>,
    pub word: TameWord<Rational>,
    pub certificate: LiftCertificate,
}

/// Truncated evaluation of a P-side word transported into W^h.
pub fn evaluate_h_truncated(word: &TameWord<Rational>, order: i64) -> Result<Endo<Rational>> {
    let fl = word.flavor.with_kind(BracketKind::HAugmented);
    evaluate_truncated(&transport(word), Side::W, fl, &(), &Grading::quantum(), order)
}

fn approx_word(sigma: &Endo<Rational>, n: i64, tie: TieBreak) -> Result<(TameWord<Rational>, i64)> {
    let a = approximate(sigma, n, ApproxOptions { tie_break: tie })?;
    Ok((a.word, a.residual_rank))
}

fn prime_check(sigma: &Endo<Rational>, lifted_h: &Endo<Rational>, order: i64, p: u64) -> PrimeCheck {
    let run = || -> Result<(bool, usize)> {
        let spec: Arc<GfSpec> = GfSpec::prime(p)?;
        let red = reduce_endo_mod_p(lifted_h, &spec)?;
        let center = phi_p_truncated(&red, order, DEFAULT_EXPANSION_BOUND)?;
        let flavor = lifted_h.flavor;
        let h_slot = flavor.h_slot();
        let reach = (order + p as i64 - 1) / p as i64;
        let std = Grading::standard();
        let mut ok = true;
        let mut corrections = 0;
        for (i, c) in center.iter().enumerate() {
            let free = c.filter(|m| m.e[h_slot] == 0);
            corrections += c.len() - free.len();
            let expect = sigma.images[i].truncate(&flavor, &std, reach).map_coeffs(|q| reduce_mod_p(q, &spec))?;
            ok &= free == expect;
        }
        Ok((ok, corrections))
    };
    match run() {
        Ok((consistent, corrections)) => PrimeCheck { p, consistent, corrections, error: None },
        Err(e) => PrimeCheck { p, consistent: false, corrections: 0, error: Some(e.to_string()) },
    }
}

/// Θ: approximates σ by a tame word to rank N, transports it to W^h, and
/// certifies the truncated composite.
pub fn lift(sigma: &Endo<Rational>, opts: &LiftOptions) -> Result<Lift> {
    let n = opts.order;
    if n < 2 {
        return Err(Error::Invalid("lift order must be at least 2".into()));
    }
    let g = Grading::quantum();
    let (word, residual_rank) = approx_word(sigma, n, TieBreak::Forward)?;
    let lifted_h = evaluate_h_truncated(&word, n)?;
    let fl = lifted_h.flavor;

    let (word_prev, _) = approx_word(sigma, n - 1, TieBreak::Forward)?;
    let prev = evaluate_h_truncated(&word_prev, n - 1)?;
    let deg = sigma.images.iter().filter_map(|t| t.degree(&sigma.flavor, &Grading::standard())).max().unwrap_or(1);
    let stable_height = (n - 1).min(2 * deg + opts.margin);
    let stabilization = lifted_h.truncate(&g, stable_height - 1) == prev.truncate(&g, stable_height - 1);

    let primes = opts.primes.iter().map(|&p| prime_check(sigma, &lifted_h, n, p)).collect();

    let (word_rev, _) = approx_word(sigma, n, TieBreak::Reverse)?;
    let rev = evaluate_h_truncated(&word_rev, n)?;
    let canonicity = rev.truncate(&g, n - 1) == lifted_h.truncate(&g, n - 1);

    let images_h: Vec<WeylElt<Rational>> = (0..fl.main_count()).map(|i| lifted_h.image_weyl(i)).collect();
    let commutation_h = truncated_commutation_check(&images_h, &fl, &g, n);
    let commutation_specialized = specialized_commutation(&images_h, &fl, n)?;
    let inverse_certified = truncated_inverse(&lifted_h, n, &g).is_ok();
    let lifted = specialize_h(&lifted_h, &Rational::from_i64(&(), 1))?;
    if !stabilization {
        return Err(Error::StabilizationFailure(format!("terms below height {stable_height} changed between orders {} and {n}", n - 1)));
    }
    Ok(Lift {
        lifted,
        lifted_h,
        word,
        certificate: LiftCertificate {
            order: n,
            residual_rank,
            stable_height,
            stabilization,
            primes,
            canonicity,
            commutation_h,
            commutation_specialized,
            inverse_certified,
        },
    })
}

/// Commutators at h = 1, read from the exactly known range of the h-augmented ones.
fn specialized_commutation(images: &[WeylElt<Rational>], fl: &Flavor, order: i64) -> Result<CommutationReport> {
    let g = Grading::quantum();
    let std = fl.with_kind(BracketKind::Standard);
    let one = Rational::from_i64(&(), 1);
    let mut violations = Vec::new();
    let mut checked = 0;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            checked += 1;
            let c = commutator_terms(&images[i].terms, &images[j].terms, fl, &()).truncate(fl, &g, order + 1);
            let mut e = Endo::identity(Side::W, *fl, ());
            e.images[0] = c;
            let s = specialize_h(&e, &one)?.images[0].clone();
            if s != std.structure_terms::<Rational>(&(), i, j) {
                violations.push((i, j));
            }
        }
    }
    Ok(CommutationReport { checked, violations })
}

/// ψ_λ with λ = h^k: u ↦ u + λx_i, p_i ↦ p_i − λv (0-based pair index i).
pub fn twist_psi_lambda<F: Field>(i: usize, k: i32, flavor: Flavor, spec: &F::Spec) -> Result<Endo<F>> {
    if flavor.kind != BracketKind::HAugmented || !flavor.aux {
        return Err(Error::IncompatibleFlavor("the twist needs the h-augmented flavor with the auxiliary pair".into()));
    }
    if i >= flavor.n {
        return Err(Error::IndexOutOfRange(i));
    }
    let pairs = flavor.pairs();
    let u = flavor.n;
    let v = pairs + flavor.n;
    let mut lam = Mono::one(&flavor);
    lam.e[flavor.h_slot()] = k;
    let mut e = Endo::identity(Side::P, flavor, spec.clone());
    e.images[u].add_term(lam.mul(&Mono::generator(&flavor, i)), F::one(spec));
    e.images[pairs + i].add_term(lam.mul(&Mono::generator(&flavor, v)), F::one(spec).neg());
    Ok(e)
}

/// The same generator word read in the flavor with the auxiliary pair.
pub fn extend_to_aux<F: Field>(phi: &Endo<F>) -> Result<Endo<F>> {
    let from = phi.flavor;
    if from.aux || from.kind == BracketKind::Skew {
        return Err(Error::IncompatibleFlavor("extension needs a canonical flavor without the auxiliary pair".into()));
    }
    let to = from.with_aux();
    let n = from.n;
    let slot = |i: usize| if i < n { i } else { i + 1 };
    let remap = |t: &Terms<F>| -> Terms<F> {
        let mut out = Terms::zero();
        for (m, c) in t.iter() {
            let mut m2 = Mono::one(&to);
            for i in 0..from.main_count() {
                m2.e[slot(i)] = m.e[i];
            }
            m2.e[to.h_slot()] = m.e[from.h_slot()];
            out.add_term(m2, c.clone());
        }
        out
    };
    let mut e = Endo::identity(phi.side, to, phi.spec.clone()).with_h_action(phi.h_action.clone());
    for (i, t) in phi.images.iter().enumerate() {
        e.images[slot(i)] = remap(t);
    }
    Ok(e)
}

/// φ∘ψ∘φ⁻¹, which must be polynomial in h.
pub fn twist_conjugate<F: Field>(phi: &Endo<F>, phi_inv: &Endo<F>, psi: &Endo<F>) -> Result<Endo<F>> {
    let out = phi.compose(psi)?.compose(phi_inv)?;
    let h = out.flavor.h_slot();
    if out.images.iter().any(|t| t.monos().any(|m| m.e[h] < 0)) {
        return Err(Error::InsufficientK);
    }
    Ok(out)
}
