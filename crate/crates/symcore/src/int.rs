//! Arbitrary precision integers with an inline fast path for values that fit in `i64`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Integer coefficient. `Big` is only used when the value does not fit in an `i64`,
/// so derived equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Int {
    Small(i64),
    Big(BigInt),
}

impl Int {
    pub fn zero() -> Int {
        Int::Small(0)
    }

    pub fn one() -> Int {
        Int::Small(1)
    }

    pub fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Int::Small(1))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Int::Small(v) => *v < 0,
            Int::Big(b) => b.is_negative(),
        }
    }

    pub fn neg(&self) -> Int {
        match self {
            Int::Small(v) => match v.checked_neg() {
                Some(r) => Int::Small(r),
                None => Int::from_big(-BigInt::from(*v)),
            },
            Int::Big(b) => Int::from_big(-b),
        }
    }

    pub fn abs(&self) -> Int {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, o: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, o) {
            if let Some(r) = a.checked_add(*b) {
                return Int::Small(r);
            }
        }
        Int::from_big(self.to_big() + o.to_big())
    }

    pub fn sub(&self, o: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, o) {
            if let Some(r) = a.checked_sub(*b) {
                return Int::Small(r);
            }
        }
        Int::from_big(self.to_big() - o.to_big())
    }

    pub fn mul(&self, o: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, o) {
            if let Some(r) = a.checked_mul(*b) {
                return Int::Small(r);
            }
        }
        Int::from_big(self.to_big() * o.to_big())
    }

    /// Exact quotient; the caller guarantees divisibility.
    pub fn div_exact(&self, o: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, o) {
            if let Some(r) = a.checked_div(*b) {
                debug_assert_eq!(a.checked_rem(*b), Some(0));
                return Int::Small(r);
            }
        }
        let (q, r) = self.to_big().div_rem(&o.to_big());
        debug_assert!(r.is_zero());
        Int::from_big(q)
    }

    /// True when `self` divides `o`.
    pub fn divides(&self, o: &Int) -> bool {
        if self.is_zero() {
            return o.is_zero();
        }
        if let (Int::Small(a), Int::Small(b)) = (self, o) {
            if let Some(r) = b.checked_rem(*a) {
                return r == 0;
            }
        }
        (o.to_big() % self.to_big()).is_zero()
    }

    /// Non-negative greatest common divisor.
    pub fn gcd(&self, o: &Int) -> Int {
        if let (Int::Small(a), Int::Small(b)) = (self, o) {
            if *a != i64::MIN && *b != i64::MIN {
                let (mut x, mut y) = (a.abs(), b.abs());
                while y != 0 {
                    let t = x % y;
                    x = y;
                    y = t;
                }
                return Int::Small(x);
            }
        }
        Int::from_big(self.to_big().gcd(&o.to_big()))
    }

    pub fn pow(&self, e: u32) -> Int {
        let mut acc = Int::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn from_i64(v: i64) -> Int {
        Int::Small(v)
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Int {
        Int::Small(v)
    }
}

impl From<BigInt> for Int {
    fn from(b: BigInt) -> Int {
        Int::from_big(b)
    }
}

impl Ord for Int {
    fn cmp(&self, o: &Int) -> Ordering {
        match (self, o) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, o: &Int) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Default for Int {
    fn default() -> Int {
        Int::zero()
    }
}
