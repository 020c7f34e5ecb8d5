//! Sums of nested adjoint actions over integer compositions.
//!
//! Every recursion in the expansion engines has the shape
//! `Σ_{k_1+…+k_p=n} ad_{Y_{k_1}} ⋯ ad_{Y_{k_p}} X`, for operators,
//! trigonometric polynomials or secular polynomials alike. The routine here
//! builds those sums for all part counts `p` at once, reusing the inner
//! (right-most) portion of each chain.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Operator;

/// Minimal Lie-algebra surface needed by the composition sums.
pub trait Bracket: Clone {
    /// `[self, other]`
    fn bracket(&self, other: &Self) -> Result<Self>;
    /// `self += z * other`
    fn add_scaled(&mut self, z: Complex64, other: &Self) -> Result<()>;
    /// Additive identity with the same shape as `self`.
    fn zero_like(&self) -> Self;
}

impl Bracket for Operator {
    fn bracket(&self, other: &Self) -> Result<Self> {
        self.commutator(other)
    }

    fn add_scaled(&mut self, z: Complex64, other: &Self) -> Result<()> {
        self.check_same_dim(other)?;
        self.axpy(z, other);
        Ok(())
    }

    fn zero_like(&self) -> Self {
        Operator::zeros(self.dim())
    }
}

/// Nested-commutator sums grouped by number of parts.
///
/// `chain[k - 1]` plays the role of `Y_k`. Returns `S` with `S[p]` equal to
/// the sum over compositions of `total` into exactly `p` parts, for
/// `min_parts <= p <= total` (entries below `min_parts` are `None`).
pub fn composition_sums<T: Bracket>(
    x: &T,
    chain: &[T],
    total: usize,
    min_parts: usize,
) -> Result<Vec<Option<T>>> {
    let min_parts = min_parts.max(1);
    if total == 0 {
        return Ok(vec![None]);
    }
    // With at least two parts no single part exceeds total - 1.
    let needed = if min_parts <= 1 { total } else { total - 1 };
    if chain.len() < needed {
        return Err(Error::ChainLength { needed, got: chain.len() });
    }

    // memo[k][p]: sum over compositions of k into p parts applied to x.
    let mut memo: Vec<Vec<Option<T>>> = vec![vec![None; total + 1]; total + 1];
    memo[0][0] = Some(x.clone());
    for k in 1..=total {
        for p in 1..=k {
            // Only states that can still reach (total, >= min_parts) matter.
            let remaining = total - k;
            if p + remaining < min_parts {
                continue;
            }
            let mut acc: Option<T> = None;
            for first in 1..=(k - p + 1) {
                if first > chain.len() {
                    break;
                }
                let Some(inner) = memo[k - first][p - 1].as_ref() else { continue };
                let term = chain[first - 1].bracket(inner)?;
                match acc.as_mut() {
                    Some(a) => a.add_scaled(Complex64::new(1.0, 0.0), &term)?,
                    None => acc = Some(term),
                }
            }
            memo[k][p] = acc;
        }
    }

    let mut out: Vec<Option<T>> = vec![None; total + 1];
    for p in min_parts..=total {
        out[p] = memo[total][p].take().or_else(|| Some(x.zero_like()));
    }
    Ok(out)
}

/// `i^p / p!`
pub fn i_pow_over_factorial(p: usize) -> Complex64 {
    let mut z = Complex64::new(1.0, 0.0);
    for k in 1..=p {
        z *= Complex64::new(0.0, 1.0 / k as f64);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::*;

    fn compositions(n: usize, p: usize) -> Vec<Vec<usize>> {
        if p == 0 {
            return if n == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for first in 1..=n {
            for mut rest in compositions(n - first, p - 1) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn matches_explicit_enumeration() {
        let mut r = rng(5);
        let x = random_operator(&mut r, 3);
        let chain: Vec<Operator> = (0..5).map(|_| random_operator(&mut r, 3)).collect();
        for total in 1..=5 {
            let sums = composition_sums(&x, &chain, total, 1).unwrap();
            for p in 1..=total {
                let mut brute = Operator::zeros(3);
                for comp in compositions(total, p) {
                    let mut v = x.clone();
                    for &k in comp.iter().rev() {
                        v = chain[k - 1].commutator(&v).unwrap();
                    }
                    brute += &v;
                }
                assert!(sums[p].as_ref().unwrap().distance(&brute) < 1e-12);
            }
        }
    }

    #[test]
    fn min_parts_allows_short_chain() {
        let mut r = rng(6);
        let x = random_operator(&mut r, 2);
        let chain: Vec<Operator> = (0..2).map(|_| random_operator(&mut r, 2)).collect();
        let sums = composition_sums(&x, &chain, 3, 2).unwrap();
        assert!(sums[1].is_none());
        assert!(sums[2].is_some() && sums[3].is_some());
        assert!(matches!(composition_sums(&x, &chain, 3, 1), Err(Error::ChainLength { .. })));
    }

    #[test]
    fn i_pow_factorial() {
        assert_eq!(i_pow_over_factorial(0), Complex64::new(1.0, 0.0));
        assert!((i_pow_over_factorial(2) - Complex64::new(-0.5, 0.0)).norm() < 1e-16);
        assert!((i_pow_over_factorial(3) - Complex64::new(0.0, -1.0 / 6.0)).norm() < 1e-16);
    }
}
