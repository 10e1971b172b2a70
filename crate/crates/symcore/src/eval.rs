//! Exact evaluation at rational points and the randomized zero test.

use crate::atom::{self, AtomData, Symbol};
use crate::expr::Expr;
use crate::poly::Var;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

/// Number of random points used to confirm that a nonzero normal form is nonzero.
pub const ZERO_TEST_POINTS: usize = 20;

/// Assigns exact rational values to atoms, drawing unassigned symbols at random.
///
/// Opaque atoms receive a pseudo-random value determined by their name, derivative
/// index and the values of their arguments, so the same atom always evaluates the
/// same way within one evaluator.
pub struct Evaluator {
    values: HashMap<Var, BigRational>,
    rng: ChaCha8Rng,
    seed: u64,
}

pub fn random_rational(rng: &mut impl Rng) -> BigRational {
    let n: i64 = rng.gen_range(-97..=97);
    let d: i64 = rng.gen_range(1..=13);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Evaluator {
    pub fn new(seed: u64) -> Evaluator {
        Evaluator {
            values: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn set(&mut self, s: Symbol, value: BigRational) {
        self.values.insert(s.var(), value);
    }

    pub fn value_of(&mut self, s: Symbol) -> BigRational {
        self.atom_value(s.var()).expect("symbol values are always defined")
    }

    /// Forgets all assignments and draws a fresh point on the next evaluation.
    pub fn reset(&mut self) {
        self.values.clear();
    }

    fn atom_value(&mut self, v: Var) -> Option<BigRational> {
        if let Some(x) = self.values.get(&v) {
            return Some(x.clone());
        }
        let x = match atom::atom(v) {
            AtomData::Symbol { .. } => random_rational(&mut self.rng),
            AtomData::Opaque { name, derivs, args } => {
                let mut h = DefaultHasher::new();
                self.seed.hash(&mut h);
                name.hash(&mut h);
                derivs.hash(&mut h);
                for a in &args {
                    self.eval(a)?.to_string().hash(&mut h);
                }
                let mut r = ChaCha8Rng::seed_from_u64(h.finish());
                random_rational(&mut r)
            }
        };
        self.values.insert(v, x.clone());
        Some(x)
    }

    /// Exact value, or `None` when a denominator vanishes at the current point.
    pub fn eval(&mut self, e: &Expr) -> Option<BigRational> {
        let mut vals = HashMap::new();
        for v in e.vars() {
            vals.insert(v, self.atom_value(v)?);
        }
        let d = e.den().eval_map(&vals);
        if d.is_zero() {
            return None;
        }
        Some(e.num().eval_map(&vals) / d)
    }
}

/// Nonnegative square root of a rational that is a perfect square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q < &BigRational::zero() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

/// Zero test combining the canonical form with evaluation at random exact points.
///
/// A nonzero canonical form must evaluate to a nonzero value at one of
/// `ZERO_TEST_POINTS` random points; failure to find one means the kernel is
/// inconsistent and is reported by a panic.
pub fn is_zero(e: &Expr) -> bool {
    if e.is_zero() {
        return true;
    }
    if e.is_constant() {
        return false;
    }
    let mut h = DefaultHasher::new();
    e.hash(&mut h);
    let mut ev = Evaluator::new(h.finish());
    let mut tried = 0;
    let mut attempts = 0;
    while tried < ZERO_TEST_POINTS && attempts < 10 * ZERO_TEST_POINTS {
        attempts += 1;
        ev.reset();
        match ev.eval(e) {
            None => continue,
            Some(x) => {
                if !x.is_zero() {
                    return false;
                }
                tried += 1;
            }
        }
    }
    panic!("zero test disagreement: nonzero normal form vanished at {tried} random points");
}
