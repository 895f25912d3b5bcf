//! Commutative polynomials in the generators of P_n, P^h_n and P^h_n[k_ij],
//! with their Poisson brackets.

use crate::algebra::{Flavor, Grading, Mono, Terms};
use crate::error::{Error, Result};
use crate::scalars::Field;

/// Sparse commutative polynomial over `F` in a given bracket flavor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<F: Field> {
    pub flavor: Flavor,
    pub spec: F::Spec,
    pub terms: Terms<F>,
}

impl<F: Field> Poly<F> {
    pub fn new(flavor: Flavor, spec: F::Spec, terms: Terms<F>) -> Self {
        Poly { flavor, spec, terms }
    }

    pub fn zero(flavor: Flavor, spec: F::Spec) -> Self {
        Poly::new(flavor, spec, Terms::zero())
    }

    pub fn constant(flavor: Flavor, spec: F::Spec, c: F) -> Self {
        let terms = Terms::constant(&flavor, c);
        Poly::new(flavor, spec, terms)
    }

    pub fn generator(flavor: Flavor, spec: F::Spec, i: usize) -> Self {
        let terms = Terms::generator(&flavor, &spec, i);
        Poly::new(flavor, spec, terms)
    }

    /// The central parameter h.
    pub fn h(flavor: Flavor, spec: F::Spec) -> Self {
        let mut m = Mono::one(&flavor);
        m.e[flavor.h_slot()] = 1;
        let terms = Terms::from_term(m, F::one(&spec));
        Poly::new(flavor, spec, terms)
    }

    /// The central symbol k_ij (i ≠ j), sign-normalized to i < j.
    pub fn k(flavor: Flavor, spec: F::Spec, i: usize, j: usize) -> Self {
        match flavor.structure(i, j) {
            Some((sign, _, Some(slot))) => {
                let mut m = Mono::one(&flavor);
                m.e[slot] = 1;
                let terms = Terms::from_term(m, F::from_i64(&spec, sign));
                Poly::new(flavor, spec, terms)
            }
            _ => Poly::zero(flavor, spec),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    fn like(&self, terms: Terms<F>) -> Self {
        Poly::new(self.flavor, self.spec.clone(), terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.flavor.check_same(&other.flavor)?;
        Ok(self.like(self.terms.add(&other.terms)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.flavor.check_same(&other.flavor)?;
        Ok(self.like(self.terms.sub(&other.terms)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.flavor.check_same(&other.flavor)?;
        Ok(self.like(self.terms.mul_commutative(&other.terms, &self.flavor, None)))
    }

    pub fn neg(&self) -> Self {
        self.like(self.terms.neg())
    }

    pub fn scale(&self, s: &F) -> Self {
        self.like(self.terms.scale(s))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Poly::constant(self.flavor, self.spec.clone(), F::one(&self.spec));
        for _ in 0..e {
            acc = acc.mul(self).expect("same flavor");
        }
        acc
    }

    pub fn partial(&self, gen: usize) -> Self {
        self.like(partial_terms(&self.terms, gen, &self.spec))
    }

    pub fn degree(&self, g: &Grading) -> Option<i64> {
        self.terms.degree(&self.flavor, g)
    }

    pub fn height(&self, g: &Grading) -> Option<i64> {
        self.terms.height(&self.flavor, g)
    }

    pub fn bracket(&self, other: &Self) -> Result<Self> {
        poisson_bracket(self, other)
    }
}

pub(crate) fn partial_terms<F: Field>(t: &Terms<F>, gen: usize, spec: &F::Spec) -> Terms<F> {
    let mut out = Terms::zero();
    for (m, c) in t.iter() {
        let e = m.e[gen];
        if e == 0 {
            continue;
        }
        let mut m2 = m.clone();
        m2.e[gen] -= 1;
        out.add_term(m2, c.mul(&F::from_i64(spec, e as i64)));
    }
    out
}

/// Formal partial derivative with respect to main generator `gen`.
pub fn partial_derivative<F: Field>(f: &Poly<F>, gen: usize) -> Result<Poly<F>> {
    if gen >= f.flavor.main_count() {
        return Err(Error::IndexOutOfRange(gen));
    }
    Ok(f.partial(gen))
}

/// {f, g} = Σ_{i<j} B_ij (∂_i f ∂_j g − ∂_j f ∂_i g).
pub fn poisson_bracket<F: Field>(f: &Poly<F>, g: &Poly<F>) -> Result<Poly<F>> {
    f.flavor.check_same(&g.flavor)?;
    let flavor = f.flavor;
    let m = flavor.main_count();
    let df: Vec<Terms<F>> = (0..m).map(|i| partial_terms(&f.terms, i, &f.spec)).collect();
    let dg: Vec<Terms<F>> = (0..m).map(|i| partial_terms(&g.terms, i, &f.spec)).collect();
    let mut acc = Terms::zero();
    for (i, j) in flavor.structure_pairs() {
        let b = flavor.structure_terms::<F>(&f.spec, i, j);
        let left = df[i].mul_commutative(&dg[j], &flavor, None);
        let right = df[j].mul_commutative(&dg[i], &flavor, None);
        let diff = left.sub(&right);
        if diff.is_zero() {
            continue;
        }
        acc = acc.add(&diff.mul_commutative(&b, &flavor, None));
    }
    Ok(Poly::new(flavor, f.spec.clone(), acc))
}

/// Determinant of the matrix of partials ∂φ(z_i)/∂z_j over a characteristic-0 field.
pub fn jacobian<F: Field>(images: &[Poly<F>]) -> Result<Poly<F>> {
    let first = images.first().ok_or(Error::WrongArity { expected: 2, got: 0 })?;
    let m = first.flavor.main_count();
    if images.len() != m {
        return Err(Error::WrongArity { expected: m, got: images.len() });
    }
    if F::characteristic(&first.spec) != 0 {
        return Err(Error::PositiveCharacteristic);
    }
    let mut mat: Vec<Vec<Terms<F>>> = Vec::with_capacity(m);
    for img in images {
        first.flavor.check_same(&img.flavor)?;
        mat.push((0..m).map(|j| partial_terms(&img.terms, j, &first.spec)).collect());
    }
    let det = determinant(&mat, &first.flavor, &first.spec);
    Ok(Poly::new(first.flavor, first.spec.clone(), det))
}

/// Cofactor expansion along the first row; sizes here are at most 2n ≤ 8.
fn determinant<F: Field>(mat: &[Vec<Terms<F>>], flavor: &Flavor, spec: &F::Spec) -> Terms<F> {
    let n = mat.len();
    let cols: Vec<usize> = (0..n).collect();
    det_rec(mat, 0, &cols, flavor, spec)
}

fn det_rec<F: Field>(mat: &[Vec<Terms<F>>], row: usize, cols: &[usize], flavor: &Flavor, spec: &F::Spec) -> Terms<F> {
    if cols.is_empty() {
        return Terms::constant(flavor, F::one(spec));
    }
    let mut acc = Terms::zero();
    for (pos, &c) in cols.iter().enumerate() {
        let entry = &mat[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(mat, row + 1, &rest, flavor, spec);
        let prod = entry.mul_commutative(&minor, flavor, None);
        if pos % 2 == 0 {
            acc = acc.add(&prod);
        } else {
            acc = acc.sub(&prod);
        }
    }
    acc
}
