//! Elementary generators and tame words, evaluable on either side.
//!
//! A word is a side-agnostic list of coordinates (matrix entries and shift
//! polynomials); `transport` only flips the side tag, so the same coordinates
//! read p_i on the Poisson side and d_i on the Weyl side.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{BracketKind, Flavor, Grading, Mono, Terms};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::morphism::{parse_side, Endo, Side};
use crate::scalars::Field;
use crate::text::{parse_terms, print_terms};

/// One elementary automorphism. Indices count canonical pairs from 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementaryGen<F: Field> {
    /// g_i ↦ Σ_j A_ij g_j with A symplectic.
    LinearSymplectic(Matrix<F>),
    /// x_k ↦ x_k + f(p_k).
    XShift(usize, Terms<F>),
    /// p_k ↦ p_k + g(x_k).
    PShift(usize, Terms<F>),
    /// Arbitrary invertible linear change (plain polynomial algebra only).
    LinearGL(Matrix<F>),
}

/// A composable list of elementary generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TameWord<F: Field> {
    pub side: Side,
    pub flavor: Flavor,
    pub gens: Vec<ElementaryGen<F>>,
}

impl<F: Field> ElementaryGen<F> {
    pub fn inverse(&self, spec: &F::Spec) -> Result<Self> {
        Ok(match self {
            ElementaryGen::LinearSymplectic(a) => ElementaryGen::LinearSymplectic(linalg::mat_inv(a, spec)?),
            ElementaryGen::LinearGL(a) => ElementaryGen::LinearGL(linalg::mat_inv(a, spec)?),
            ElementaryGen::XShift(k, f) => ElementaryGen::XShift(*k, f.neg()),
            ElementaryGen::PShift(k, g) => ElementaryGen::PShift(*k, g.neg()),
        })
    }

    /// Checks the block and matrix conditions for a flavor.
    pub fn validate(&self, flavor: &Flavor, spec: &F::Spec) -> Result<()> {
        let m = flavor.main_count();
        let pairs = flavor.pairs();
        let shift_ok = |k: usize, f: &Terms<F>, positions: bool| -> Result<()> {
            if k >= pairs {
                return Err(Error::IndexOutOfRange(k));
            }
            // x_k may only move by a polynomial in p_k (and p_k by one in x_k).
            let allowed = if positions { pairs + k } else { k };
            for mono in f.monos() {
                let bad_block = (0..m).any(|i| mono.e[i] != 0 && i != allowed);
                let k_part = mono.e[m + 1..].iter().any(|&e| e != 0);
                if bad_block || k_part || mono.main_degree(flavor) == 0 || mono.e[m] < 0 {
                    return Err(Error::IncompatibleFlavor("shift polynomial uses a forbidden variable or has a constant term".into()));
                }
            }
            Ok(())
        };
        match self {
            ElementaryGen::XShift(k, f) => shift_ok(*k, f, true),
            ElementaryGen::PShift(k, g) => shift_ok(*k, g, false),
            ElementaryGen::LinearSymplectic(a) => {
                if a.len() != m || !linalg::is_symplectic(a, spec) {
                    return Err(Error::NotSymplectic);
                }
                Ok(())
            }
            ElementaryGen::LinearGL(a) => {
                if a.len() != m {
                    return Err(Error::DimensionMismatch(format!("expected a {m}×{m} matrix")));
                }
                linalg::mat_inv(a, spec).map(|_| ())
            }
        }
    }

    /// The elementary endomorphism on a side.
    pub fn to_endo(&self, side: Side, flavor: Flavor, spec: &F::Spec) -> Result<Endo<F>> {
        if flavor.kind == BracketKind::Skew {
            return Err(Error::IncompatibleFlavor("tame words act on the canonical flavors".into()));
        }
        self.validate(&flavor, spec)?;
        let pairs = flavor.pairs();
        Ok(match self {
            ElementaryGen::LinearSymplectic(a) => Endo::from_linear(side, flavor, spec.clone(), a)?,
            ElementaryGen::LinearGL(a) => {
                if side != Side::P || flavor.kind != BracketKind::Standard {
                    return Err(Error::IncompatibleFlavor("general linear generators need the plain polynomial algebra".into()));
                }
                Endo::from_linear(side, flavor, spec.clone(), a)?
            }
            ElementaryGen::XShift(k, f) => {
                let mut e = Endo::identity(side, flavor, spec.clone());
                e.images[*k] = e.images[*k].add(f);
                e
            }
            ElementaryGen::PShift(k, g) => {
                let mut e = Endo::identity(side, flavor, spec.clone());
                e.images[pairs + *k] = e.images[pairs + *k].add(g);
                e
            }
        })
    }
}

impl<F: Field> TameWord<F> {
    pub fn identity(side: Side, flavor: Flavor) -> Self {
        TameWord { side, flavor, gens: Vec::new() }
    }

    pub fn new(side: Side, flavor: Flavor, gens: Vec<ElementaryGen<F>>) -> Self {
        TameWord { side, flavor, gens }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        TameWord { side: self.side, flavor: self.flavor, gens }
    }

    /// Evaluates on the word's own side and flavor.
    pub fn eval(&self, spec: &F::Spec) -> Result<Endo<F>> {
        evaluate(self, self.side, self.flavor, spec)
    }
}

/// Left-to-right composition of the elementary endomorphisms.
pub fn evaluate<F: Field>(w: &TameWord<F>, side: Side, flavor: Flavor, spec: &F::Spec) -> Result<Endo<F>> {
    if flavor.pairs() != w.flavor.pairs() {
        return Err(Error::IncompatibleFlavor(format!("word has {} pairs, flavor has {}", w.flavor.pairs(), flavor.pairs())));
    }
    let mut acc = Endo::identity(side, flavor, spec.clone());
    for g in &w.gens {
        acc = acc.compose(&g.to_endo(side, flavor, spec)?)?;
    }
    Ok(acc)
}

/// [`evaluate`] modulo weighted degree above `max`.
pub fn evaluate_truncated<F: Field>(w: &TameWord<F>, side: Side, flavor: Flavor, spec: &F::Spec, g: &Grading, max: i64) -> Result<Endo<F>> {
    if flavor.pairs() != w.flavor.pairs() {
        return Err(Error::IncompatibleFlavor(format!("word has {} pairs, flavor has {}", w.flavor.pairs(), flavor.pairs())));
    }
    let mut acc = Endo::identity(side, flavor, spec.clone());
    for gen in &w.gens {
        acc = acc.compose_truncated(&gen.to_endo(side, flavor, spec)?, g, max)?;
    }
    Ok(acc)
}

/// Reversed word of inverted generators.
pub fn invert_word<F: Field>(w: &TameWord<F>, spec: &F::Spec) -> Result<TameWord<F>> {
    let gens = w.gens.iter().rev().map(|g| g.inverse(spec)).collect::<Result<Vec<_>>>()?;
    Ok(TameWord { side: w.side, flavor: w.flavor, gens })
}

/// The same coordinates read on the other side (p_i ↔ d_i).
pub fn transport<F: Field>(w: &TameWord<F>) -> TameWord<F> {
    let side = match w.side {
        Side::P => Side::W,
        _ => Side::P,
    };
    TameWord { side, ..w.clone() }
}

/// Shape parameters for random words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomTameConfig {
    pub n: usize,
    pub length: usize,
    pub min_degree: u32,
    pub max_degree: u32,
    pub max_terms: usize,
    /// Coefficients are drawn from ±1..=coeff_bound.
    pub coeff_bound: i64,
    /// Whether linear symplectic shears may appear.
    pub linear: bool,
}

impl RandomTameConfig {
    pub fn new(n: usize, length: usize, max_degree: u32) -> Self {
        RandomTameConfig { n, length, min_degree: 1, max_degree, max_terms: 2, coeff_bound: 2, linear: true }
    }
}

/// Reproducible word with integer coefficients (p-integral at every prime).
pub fn random_tame<F: Field>(n: usize, length: usize, maxdeg: u32, seed: u64, spec: &F::Spec) -> TameWord<F> {
    random_tame_with(&RandomTameConfig::new(n, length, maxdeg), seed, spec)
}

pub fn random_tame_with<F: Field>(cfg: &RandomTameConfig, seed: u64, spec: &F::Spec) -> TameWord<F> {
    let flavor = Flavor::standard(cfg.n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens = Vec::with_capacity(cfg.length);
    let coeff = |rng: &mut ChaCha8Rng| {
        let c = rng.gen_range(1..=cfg.coeff_bound.max(1));
        if rng.gen_bool(0.5) {
            -c
        } else {
            c
        }
    };
    for _ in 0..cfg.length {
        let choice = if cfg.linear { rng.gen_range(0..5) } else { rng.gen_range(0..4) };
        if choice == 4 {
            let c = coeff(&mut rng);
            gens.push(ElementaryGen::LinearSymplectic(random_shear(cfg.n, &mut rng, spec, c)));
            continue;
        }
        let positions = choice < 2;
        let k = rng.gen_range(0..cfg.n);
        let mut f = Terms::zero();
        let terms = rng.gen_range(1..=cfg.max_terms.max(1));
        for _ in 0..terms {
            let deg = rng.gen_range(cfg.min_degree.max(1)..=cfg.max_degree.max(cfg.min_degree.max(1)));
            let mut m = Mono::one(&flavor);
            m.e[if positions { cfg.n + k } else { k }] = deg as i32;
            f.add_term(m, F::from_i64(spec, coeff(&mut rng)));
        }
        if f.is_zero() {
            continue;
        }
        gens.push(if positions { ElementaryGen::XShift(k, f) } else { ElementaryGen::PShift(k, f) });
    }
    TameWord { side: Side::P, flavor, gens }
}

/// Seeded corpus of words with n ∈ {1, 2}, length 1..=4 and shift degree ≤ 3.
pub fn random_corpus<F: Field>(count: usize, seed: u64, spec: &F::Spec) -> Vec<TameWord<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=2);
            let length = rng.gen_range(1..=4);
            random_tame_with(&RandomTameConfig::new(n, length, 3), rng.gen(), spec)
        })
        .collect()
}

/// A symplectic shear: x_i ↦ x_i + c p_j + c p_i-type blocks, or p ↦ p + c x.
fn random_shear<F: Field>(n: usize, rng: &mut ChaCha8Rng, spec: &F::Spec, c: i64) -> Matrix<F> {
    let mut a = linalg::identity::<F>(spec, 2 * n);
    let i = rng.gen_range(0..n);
    let j = rng.gen_range(0..n);
    let c = F::from_i64(spec, c);
    if rng.gen_bool(0.5) {
        // x_i += c p_j, x_j += c p_i (symmetric block)
        a[i][n + j] = a[i][n + j].add(&c);
        if i != j {
            a[j][n + i] = a[j][n + i].add(&c);
        }
    } else {
        a[n + i][j] = a[n + i][j].add(&c);
        if i != j {
            a[n + j][i] = a[n + j][i].add(&c);
        }
    }
    a
}

/// JSON form of one generator; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
}

/// JSON form of a word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameWordJson {
    pub side: Side,
    pub flavor: Flavor,
    pub word: Vec<GenJson>,
}

impl<F: Field> TameWord<F> {
    pub fn to_json(&self) -> TameWordJson {
        let names = self.side.names();
        let mat = |a: &Matrix<F>| Some(a.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect());
        let word = self
            .gens
            .iter()
            .map(|g| match g {
                ElementaryGen::LinearSymplectic(a) => GenJson { kind: "LinearSymplectic".into(), index: None, poly: None, matrix: mat(a) },
                ElementaryGen::LinearGL(a) => GenJson { kind: "LinearGL".into(), index: None, poly: None, matrix: mat(a) },
                ElementaryGen::XShift(k, f) => GenJson {
                    kind: "XShift".into(),
                    index: Some(k + 1),
                    poly: Some(print_terms(f, &self.flavor, names)),
                    matrix: None,
                },
                ElementaryGen::PShift(k, f) => GenJson {
                    kind: "PShift".into(),
                    index: Some(k + 1),
                    poly: Some(print_terms(f, &self.flavor, names)),
                    matrix: None,
                },
            })
            .collect();
        TameWordJson { side: self.side, flavor: self.flavor, word }
    }

    pub fn from_json(j: &TameWordJson, spec: &F::Spec) -> Result<Self> {
        let scalar = |s: &str| -> Result<F> {
            let t = parse_terms::<F>(s, j.flavor, spec, j.side.names())?;
            let out = match t.iter().next() {
                None => Ok(F::zero(spec)),
                Some((m, c)) if m.is_one() && t.len() == 1 => Ok(c.clone()),
                _ => Err(Error::Invalid(format!("matrix entry {s} is not a scalar"))),
            };
            out
        };
        let mut gens = Vec::new();
        for g in &j.word {
            let poly = || -> Result<(usize, Terms<F>)> {
                let k = g.index.ok_or_else(|| Error::Invalid("shift needs an index".into()))?;
                if k == 0 {
                    return Err(Error::IndexOutOfRange(0));
                }
                let text = g.poly.as_deref().ok_or_else(|| Error::Invalid("shift needs a poly".into()))?;
                Ok((k - 1, parse_side::<F>(text, j.flavor, spec, j.side)?))
            };
            let matrix = || -> Result<Matrix<F>> {
                let rows = g.matrix.as_ref().ok_or_else(|| Error::Invalid("linear generator needs a matrix".into()))?;
                rows.iter().map(|r| r.iter().map(|c| scalar(c)).collect()).collect()
            };
            let gen = match g.kind.as_str() {
                "XShift" => {
                    let (k, f) = poly()?;
                    ElementaryGen::XShift(k, f)
                }
                "PShift" => {
                    let (k, f) = poly()?;
                    ElementaryGen::PShift(k, f)
                }
                "LinearSymplectic" => ElementaryGen::LinearSymplectic(matrix()?),
                "LinearGL" => ElementaryGen::LinearGL(matrix()?),
                other => return Err(Error::Invalid(format!("unknown generator kind {other}"))),
            };
            gen.validate(&j.flavor, spec)?;
            gens.push(gen);
        }
        Ok(TameWord { side: j.side, flavor: j.flavor, gens })
    }
}
