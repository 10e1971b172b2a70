//! Helpers for checks at random exact rational points.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symcore::eval::random_rational;
use symcore::{BigRational, Evaluator, Expr, Symbol};

/// Default seed for randomized verification.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Number of random samples used by sampled identity checks.
pub const SAMPLES: usize = 20;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rational(rng: &mut impl Rng) -> BigRational {
    random_rational(rng)
}

/// Small nonzero integer, handy for sample points that should stay cheap.
pub fn small_int(rng: &mut impl Rng) -> BigRational {
    let mut k: i64 = 0;
    while k == 0 {
        k = rng.gen_range(-9..=9);
    }
    BigRational::from_integer(k.into())
}

/// Evaluates `e` with the given assignments; other symbols are drawn by `ev`.
pub fn eval_at(ev: &mut Evaluator, point: &[(Symbol, BigRational)], e: &Expr) -> Option<BigRational> {
    for (s, v) in point {
        ev.set(*s, v.clone());
    }
    ev.eval(e)
}

/// Indices of a maximal set of linearly independent rows, chosen greedily.
pub fn independent_rows(rows: &[Vec<BigRational>]) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut picked = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for (p, b) in &basis {
            if !v[*p].is_zero() {
                let f = v[*p].clone() / b[*p].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= f.clone() * y;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            basis.push((p, v));
            picked.push(idx);
        }
    }
    picked
}
