//! Coefficient fields used inside the engine.
//!
//! Public polynomials carry [`GaussianRational`] coefficients. When every
//! input coefficient is real the engine runs over [`Rat`] instead, which keeps
//! machine-word fractions unboxed and only falls back to big rationals on
//! overflow.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::exactnum::GaussianRational;

pub(crate) trait Field: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Panics on zero.
    fn inv(&self) -> Self;
    fn from_gaussian(v: &GaussianRational) -> Option<Self>;
    fn to_gaussian(&self) -> GaussianRational;

    /// `self - a * b`.
    fn sub_mul(&self, a: &Self, b: &Self) -> Self {
        self.sub(&a.mul(b))
    }
}

impl Field for GaussianRational {
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        GaussianRational::inv(self)
    }
    fn from_gaussian(v: &GaussianRational) -> Option<Self> {
        Some(v.clone())
    }
    fn to_gaussian(&self) -> GaussianRational {
        self.clone()
    }
}

/// Rational number; `Small` whenever numerator and denominator fit in `i64`.
#[derive(Clone, PartialEq, Eq)]
pub(crate) enum Rat {
    /// Lowest terms, positive denominator.
    Small(i64, i64),
    Big(BigRational),
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(n, 1) => write!(f, "{n}"),
            Rat::Small(n, d) => write!(f, "{n}/{d}"),
            Rat::Big(r) => write!(f, "{r}"),
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    fn from_i128(num: i128, den: i128) -> Rat {
        debug_assert!(den != 0);
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        if num == 0 {
            return Rat::Small(0, 1);
        }
        let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
        let (n, d) = (num / g, den / g);
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat::Small(n, d),
            _ => Rat::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(r: BigRational) -> Rat {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rat::Small(n, d),
            _ => Rat::Big(r),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(r) => r.clone(),
        }
    }

    fn big_op(&self, rhs: &Rat, op: impl Fn(&BigRational, &BigRational) -> BigRational) -> Rat {
        Rat::from_big(op(&self.to_big(), &rhs.to_big()))
    }
}

impl Field for Rat {
    fn one() -> Self {
        Rat::Small(1, 1)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }
    fn add(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                if b == d {
                    return Rat::from_i128(*a as i128 + *c as i128, *b as i128);
                }
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                match (a.checked_mul(d), c.checked_mul(b), b.checked_mul(d)) {
                    (Some(x), Some(y), Some(den)) => match x.checked_add(y) {
                        Some(num) => Rat::from_i128(num, den),
                        None => self.big_op(rhs, |x, y| x + y),
                    },
                    _ => self.big_op(rhs, |x, y| x + y),
                }
            }
            _ => self.big_op(rhs, |x, y| x + y),
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
    fn mul(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Rat::from_i128(a * c, b * d)
            }
            _ => self.big_op(rhs, |x, y| x * y),
        }
    }
    fn neg(&self) -> Self {
        match self {
            Rat::Small(n, d) => match n.checked_neg() {
                Some(m) => Rat::Small(m, *d),
                None => Rat::Big(-self.to_big()),
            },
            Rat::Big(r) => Rat::from_big(-r),
        }
    }
    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero");
        match self {
            Rat::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Rat::Big(r) => Rat::from_big(r.recip()),
        }
    }
    fn from_gaussian(v: &GaussianRational) -> Option<Self> {
        v.is_real().then(|| Rat::from_big(v.re().clone()))
    }
    fn to_gaussian(&self) -> GaussianRational {
        GaussianRational::from_rational(self.to_big())
    }
}

/// Residues modulo the prime `P < 2^63`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fp<const P: u64>(u64);

impl<const P: u64> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Fp<P> {
    fn reduce_big(v: &BigInt) -> u64 {
        let r = v % BigInt::from(P);
        let r = if r.sign() == num_bigint::Sign::Minus { r + BigInt::from(P) } else { r };
        r.to_u64().expect("residue fits")
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl<const P: u64> Field for Fp<P> {
    fn one() -> Self {
        Fp(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, rhs: &Self) -> Self {
        let s = self.0 + rhs.0;
        Fp(if s >= P { s - P } else { s })
    }
    fn sub(&self, rhs: &Self) -> Self {
        Fp(if self.0 >= rhs.0 { self.0 - rhs.0 } else { self.0 + P - rhs.0 })
    }
    fn mul(&self, rhs: &Self) -> Self {
        Fp(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
    }
    fn neg(&self) -> Self {
        Fp(if self.0 == 0 { 0 } else { P - self.0 })
    }
    fn inv(&self) -> Self {
        assert!(self.0 != 0, "division by zero");
        self.pow(P - 2)
    }
    fn from_gaussian(v: &GaussianRational) -> Option<Self> {
        if !v.is_real() {
            return None;
        }
        let den = Self::reduce_big(v.re().denom());
        if den == 0 {
            return None;
        }
        Some(Fp(Self::reduce_big(v.re().numer())).mul(&Fp(den).inv()))
    }
    fn to_gaussian(&self) -> GaussianRational {
        let v = if self.0 > P / 2 { self.0 as i128 - P as i128 } else { self.0 as i128 };
        GaussianRational::from_rational(BigRational::from_integer(BigInt::from(v)))
    }
}
