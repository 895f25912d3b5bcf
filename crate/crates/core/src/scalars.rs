//! Exact coefficient fields: the rationals and small finite fields F_{p^k}.
//!
//! Everything above this module is generic over [`Field`]. Rationals carry no
//! runtime context; finite-field elements share an `Arc<GfSpec>` describing
//! the prime and the defining modulus.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational numbers, always in lowest terms.
pub type Rational = BigRational;

/// Largest extension degree supported.
pub const MAX_EXT_DEGREE: usize = 3;

/// An exact coefficient field element.
///
/// The associated `Spec` is the runtime description of the field (unit for
/// the rationals). Binary operations assume both operands live in the same
/// field; [`field_arith`] is the checked entry point.
pub trait Field: Clone + fmt::Debug + fmt::Display + PartialEq + Eq + Hash + Send + Sync + 'static {
    type Spec: Clone + fmt::Debug + PartialEq + Eq + Send + Sync;

    fn spec(&self) -> Self::Spec;
    fn zero(spec: &Self::Spec) -> Self;
    fn one(spec: &Self::Spec) -> Self;
    fn from_bigint(spec: &Self::Spec, n: &BigInt) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    /// 0 for the rationals.
    fn characteristic(spec: &Self::Spec) -> u64;
    fn describe(spec: &Self::Spec) -> FieldSpec;
    /// Runtime field context from its serialized description.
    fn spec_from(desc: &FieldSpec) -> Result<Self::Spec>;
    /// True if this element belongs to the field described by `spec`.
    fn in_field(&self, spec: &Self::Spec) -> bool;

    fn from_i64(spec: &Self::Spec, n: i64) -> Self {
        Self::from_bigint(spec, &BigInt::from(n))
    }

    /// Named field constants accepted by the expression parser ("a" for α).
    fn named_constant(_spec: &Self::Spec, _name: &str) -> Option<Self> {
        None
    }

    /// Printing hook: true for values shown with a leading minus sign.
    fn is_negative(&self) -> bool {
        false
    }

    fn is_one(&self) -> bool {
        *self == Self::one(&self.spec())
    }

    fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.spec());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// Binary arithmetic selector for [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked field arithmetic: rejects operands from different fields.
pub fn field_arith<F: Field>(a: &F, b: &F, op: ArithOp) -> Result<F> {
    if !b.in_field(&a.spec()) {
        return Err(Error::FieldMismatch);
    }
    match op {
        ArithOp::Add => Ok(a.add(b)),
        ArithOp::Sub => Ok(a.sub(b)),
        ArithOp::Mul => Ok(a.mul(b)),
        ArithOp::Div => a.div(b),
    }
}

/// Serializable field description used in the JSON interfaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldSpec {
    #[serde(rename = "Q")]
    Rationals,
    #[serde(rename = "Fp")]
    FiniteField {
        p: u64,
        #[serde(default = "one_usize")]
        k: usize,
        /// Low-to-high coefficients of the monic modulus (length k+1), absent for k = 1.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<Vec<u64>>,
    },
}

fn one_usize() -> usize {
    1
}

impl FieldSpec {
    pub fn gf(&self) -> Result<Arc<GfSpec>> {
        match self {
            FieldSpec::Rationals => Err(Error::NotFiniteField),
            FieldSpec::FiniteField { p, k, modulus } => match (k, modulus) {
                (1, None) => GfSpec::prime(*p),
                (_, Some(m)) => GfSpec::extension(*p, m.clone()),
                (_, None) => Err(Error::InvalidField(format!("extension degree {k} needs a modulus"))),
            },
        }
    }
}

impl Field for Rational {
    type Spec = ();

    fn spec(&self) {}
    fn zero(_: &()) -> Self {
        Zero::zero()
    }
    fn one(_: &()) -> Self {
        One::one()
    }
    fn from_bigint(_: &(), n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.recip())
        }
    }
    fn characteristic(_: &()) -> u64 {
        0
    }
    fn spec_from(desc: &FieldSpec) -> Result<()> {
        match desc {
            FieldSpec::Rationals => Ok(()),
            _ => Err(Error::InvalidField("expected the rationals".into())),
        }
    }

    fn describe(_: &()) -> FieldSpec {
        FieldSpec::Rationals
    }
    fn is_negative(&self) -> bool {
        num_traits::Signed::is_negative(self)
    }

    fn in_field(&self, _: &()) -> bool {
        true
    }
}

/// Parameters of F_{p^k} = F_p[α]/(modulus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GfSpec {
    p: u64,
    k: usize,
    /// Monic modulus, low-to-high, length k+1. For k = 1 this is α (unused).
    modulus: Vec<u64>,
}

impl GfSpec {
    pub fn prime(p: u64) -> Result<Arc<Self>> {
        check_prime(p)?;
        Ok(Arc::new(GfSpec { p, k: 1, modulus: vec![0, 1] }))
    }

    /// F_{p^k} with the given monic modulus (low-to-high coefficients).
    pub fn extension(p: u64, modulus: Vec<u64>) -> Result<Arc<Self>> {
        check_prime(p)?;
        let k = modulus.len().checked_sub(1).ok_or_else(|| Error::InvalidField("empty modulus".into()))?;
        if k == 0 || k > MAX_EXT_DEGREE {
            return Err(Error::InvalidField(format!("extension degree {k} outside 1..={MAX_EXT_DEGREE}")));
        }
        let modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        if modulus[k] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if k == 1 {
            return Self::prime(p);
        }
        // For k <= 3, irreducible iff no root in F_p.
        for r in 0..p {
            let mut v = 0u128;
            for &c in modulus.iter().rev() {
                v = (v * r as u128 + c as u128) % p as u128;
            }
            if v == 0 {
                return Err(Error::InvalidField(format!("modulus has root {r} mod {p}")));
            }
        }
        Ok(Arc::new(GfSpec { p, k, modulus }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p < 2 || p > (1u64 << 31) {
        return Err(Error::InvalidField(format!("p = {p} outside 2..=2^31")));
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        d += 1;
    }
    Ok(())
}

/// An element of F_{p^k}, stored as coefficients of 1, α, α² over F_p.
#[derive(Clone, Debug)]
pub struct Gf {
    spec: Arc<GfSpec>,
    c: [u64; MAX_EXT_DEGREE],
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && (Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec)
    }
}

impl Eq for Gf {}

impl Hash for Gf {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl Gf {
    pub fn new(spec: &Arc<GfSpec>, coeffs: &[u64]) -> Self {
        let mut c = [0u64; MAX_EXT_DEGREE];
        for (i, &v) in coeffs.iter().enumerate().take(spec.k) {
            c[i] = v % spec.p;
        }
        Gf { spec: spec.clone(), c }
    }

    /// The generator α of the extension (equals 0 only if k = 1 makes α meaningless).
    pub fn alpha(spec: &Arc<GfSpec>) -> Self {
        if spec.k == 1 {
            // α is a root of the formal modulus x, i.e. zero.
            return Gf::new(spec, &[0]);
        }
        Gf::new(spec, &[0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c[..self.spec.k]
    }

    pub fn gf_spec(&self) -> &Arc<GfSpec> {
        &self.spec
    }

    /// Residue of a prime-field element in 0..p, None for elements outside F_p.
    pub fn residue(&self) -> Option<u64> {
        if self.c[1..].iter().all(|&v| v == 0) {
            Some(self.c[0])
        } else {
            None
        }
    }

    /// Enumerates every element of the field.
    pub fn all(spec: &Arc<GfSpec>) -> Vec<Gf> {
        let mut out = Vec::with_capacity(spec.order() as usize);
        for idx in 0..spec.order() {
            let mut rest = idx;
            let mut coeffs = [0u64; MAX_EXT_DEGREE];
            for slot in coeffs.iter_mut().take(spec.k) {
                *slot = rest % spec.p;
                rest /= spec.p;
            }
            out.push(Gf { spec: spec.clone(), c: coeffs });
        }
        out
    }

    fn with(&self, c: [u64; MAX_EXT_DEGREE]) -> Self {
        Gf { spec: self.spec.clone(), c }
    }
}

impl Field for Gf {
    type Spec = Arc<GfSpec>;

    fn spec(&self) -> Arc<GfSpec> {
        self.spec.clone()
    }
    fn zero(spec: &Arc<GfSpec>) -> Self {
        Gf { spec: spec.clone(), c: [0; MAX_EXT_DEGREE] }
    }
    fn one(spec: &Arc<GfSpec>) -> Self {
        let mut c = [0; MAX_EXT_DEGREE];
        c[0] = 1;
        Gf { spec: spec.clone(), c }
    }
    fn from_bigint(spec: &Arc<GfSpec>, n: &BigInt) -> Self {
        let p = BigInt::from(spec.p);
        let r = n.mod_floor(&p).to_u64().expect("residue fits");
        Gf::new(spec, &[r])
    }
    fn from_i64(spec: &Arc<GfSpec>, n: i64) -> Self {
        let r = n.rem_euclid(spec.p as i64) as u64;
        Gf::new(spec, &[r])
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }
    fn add(&self, other: &Self) -> Self {
        debug_assert!(self.spec.p == other.spec.p);
        let p = self.spec.p;
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(other.c.iter()) {
            *a = (*a + *b) % p;
        }
        self.with(c)
    }
    fn sub(&self, other: &Self) -> Self {
        let p = self.spec.p;
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(other.c.iter()) {
            *a = (*a + p - *b) % p;
        }
        self.with(c)
    }
    fn mul(&self, other: &Self) -> Self {
        let spec = &self.spec;
        let p = spec.p as u128;
        if spec.k == 1 {
            let mut c = [0; MAX_EXT_DEGREE];
            c[0] = ((self.c[0] as u128 * other.c[0] as u128) % p) as u64;
            return self.with(c);
        }
        let k = spec.k;
        let mut prod = [0u128; 2 * MAX_EXT_DEGREE];
        for i in 0..k {
            for j in 0..k {
                prod[i + j] = (prod[i + j] + self.c[i] as u128 * other.c[j] as u128) % p;
            }
        }
        // α^k = -(m_0 + m_1 α + ... + m_{k-1} α^{k-1})
        for deg in (k..2 * k - 1).rev() {
            let top = prod[deg];
            if top == 0 {
                continue;
            }
            prod[deg] = 0;
            for (i, &m) in spec.modulus[..k].iter().enumerate() {
                let slot = deg - k + i;
                prod[slot] = (prod[slot] + (p - (m as u128)) * top) % p;
            }
        }
        let mut c = [0u64; MAX_EXT_DEGREE];
        for i in 0..k {
            c[i] = prod[i] as u64;
        }
        self.with(c)
    }
    fn neg(&self) -> Self {
        let p = self.spec.p;
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = (p - *a) % p;
        }
        self.with(c)
    }
    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // a^(q-2) in the multiplicative group of order q-1.
        Ok(self.pow(self.spec.order() - 2))
    }
    fn characteristic(spec: &Arc<GfSpec>) -> u64 {
        spec.p
    }
    fn spec_from(desc: &FieldSpec) -> Result<Arc<GfSpec>> {
        desc.gf()
    }

    fn describe(spec: &Arc<GfSpec>) -> FieldSpec {
        FieldSpec::FiniteField {
            p: spec.p,
            k: spec.k,
            modulus: if spec.k > 1 { Some(spec.modulus.clone()) } else { None },
        }
    }
    fn named_constant(spec: &Arc<GfSpec>, name: &str) -> Option<Self> {
        (name == "a" && spec.k > 1).then(|| Gf::alpha(spec))
    }

    fn in_field(&self, spec: &Arc<GfSpec>) -> bool {
        Arc::ptr_eq(&self.spec, spec) || *self.spec == **spec
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.k == 1 {
            return write!(f, "{}", self.c[0]);
        }
        let mut parts = Vec::new();
        for (i, &v) in self.coeffs().iter().enumerate().rev() {
            if v == 0 {
                continue;
            }
            let s = match (i, v) {
                (0, v) => v.to_string(),
                (1, 1) => "a".to_string(),
                (1, v) => format!("{v}*a"),
                (i, 1) => format!("a^{i}"),
                (i, v) => format!("{v}*a^{i}"),
            };
            parts.push(s);
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// Frobenius a ↦ a^p, or its inverse a ↦ a^(p^(k-1)).
pub fn frobenius(a: &Gf, inverse: bool) -> Gf {
    let spec = a.gf_spec();
    if !inverse {
        return a.pow(spec.p);
    }
    // Fr^(k-1) = Fr^(-1) on F_{p^k}.
    let mut out = a.clone();
    for _ in 1..spec.k {
        out = out.pow(spec.p);
    }
    out
}

/// Frobenius on a generic scalar; errors for characteristic-zero fields.
pub fn frobenius_generic<F: Field>(a: &F, inverse: bool) -> Result<F>
where
    F: AsGf,
{
    match a.as_gf() {
        Some(g) => Ok(F::from_gf(frobenius(g, inverse))),
        None => Err(Error::NotFiniteField),
    }
}

/// Downcast hook so generic code can reach Frobenius on finite fields.
pub trait AsGf: Sized {
    fn as_gf(&self) -> Option<&Gf>;
    fn from_gf(g: Gf) -> Self;
}

impl AsGf for Gf {
    fn as_gf(&self) -> Option<&Gf> {
        Some(self)
    }
    fn from_gf(g: Gf) -> Self {
        g
    }
}

impl AsGf for Rational {
    fn as_gf(&self) -> Option<&Gf> {
        None
    }
    fn from_gf(_: Gf) -> Self {
        unreachable!("rationals have no finite-field embedding")
    }
}

/// Image of a p-integral rational in the prime subfield of `spec`.
pub fn reduce_mod_p(q: &Rational, spec: &Arc<GfSpec>) -> Result<Gf> {
    let p = BigInt::from(spec.p);
    if q.denom().is_multiple_of(&p) {
        return Err(Error::NotPIntegral { value: q.to_string(), p: spec.p });
    }
    let num = Gf::from_bigint(spec, q.numer());
    let den = Gf::from_bigint(spec, q.denom());
    num.div(&den)
}

/// Integer lift of a prime-field element into 0..p.
pub fn lift_residue(a: &Gf) -> Result<Rational> {
    a.residue()
        .map(|r| Rational::from_integer(BigInt::from(r)))
        .ok_or_else(|| Error::InvalidField("element is not in the prime field".into()))
}

/// Parses a rational literal "a" or "a/b".
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

/// True if the rational has an integer value.
pub fn is_integral(q: &Rational) -> bool {
    q.denom().is_one()
}

/// Absolute value helper used in printing.
pub fn rational_abs(q: &Rational) -> Rational {
    q.abs()
}
