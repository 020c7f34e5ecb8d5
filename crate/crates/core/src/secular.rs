//! Trigonometric polynomials with polynomial-in-time coefficients,
//! `F(t) = Σ_{ω,p} A_{ω,p} t^p e^{iωt}`.
//!
//! These appear as soon as a constant (nonzero-mean) term is integrated, as
//! in the Magnus mode or the `𝔠 ↔ C` conversions. Degrees are capped at
//! [`MAX_SECULAR_DEGREE`]; anything beyond raises [`Error::DegreeOverflow`].

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, re, Operator, C64};
use crate::nested::Bracket;
use crate::trigpoly::{max_norm, prune_map, Frequency, FrequencyBasis, TrigPoly};

/// Highest supported power of `t`.
pub const MAX_SECULAR_DEGREE: u32 = 3;

type Key = (Frequency, u32);

#[derive(Clone, Debug, PartialEq)]
pub struct SecularPoly {
    basis: FrequencyBasis,
    dim: usize,
    terms: BTreeMap<Key, Operator>,
}

impl From<&TrigPoly> for SecularPoly {
    fn from(f: &TrigPoly) -> Self {
        let terms = f.terms().map(|(k, a)| ((k.clone(), 0), a.clone())).collect();
        SecularPoly { basis: f.basis().clone(), dim: f.dim(), terms }
    }
}

impl SecularPoly {
    pub fn zero(basis: FrequencyBasis, dim: usize) -> Self {
        SecularPoly { basis, dim, terms: BTreeMap::new() }
    }

    /// `A t^power`
    pub fn monomial(basis: FrequencyBasis, a: Operator, power: u32) -> Result<Self> {
        if power > MAX_SECULAR_DEGREE {
            return Err(Error::DegreeOverflow { degree: power, max: MAX_SECULAR_DEGREE });
        }
        let key = (Frequency::zero(basis.len()), power);
        let dim = a.dim();
        let mut terms = BTreeMap::new();
        if a.norm() > 0.0 {
            terms.insert(key, a);
        }
        Ok(SecularPoly { basis, dim, terms })
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Frequency, u32, &Operator)> {
        self.terms.iter().map(|((k, p), a)| (k, *p, a))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(_, p)| *p).max().unwrap_or(0)
    }

    pub fn largest_coefficient(&self) -> f64 {
        max_norm(self.terms.values())
    }

    /// Back to a plain trigonometric polynomial when no `t` powers remain.
    pub fn to_trig(&self) -> Option<TrigPoly> {
        if self.degree() > 0 {
            return None;
        }
        let terms = self.terms.iter().map(|((k, _), a)| (k.clone(), a.clone()));
        TrigPoly::from_terms(self.basis.clone(), self.dim, terms).ok()
    }

    fn check_compatible(&self, other: &SecularPoly) -> Result<()> {
        self.basis.check_same(&other.basis)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// `a F + b G`
    pub fn combine(a: C64, f: &SecularPoly, b: C64, g: &SecularPoly) -> Result<SecularPoly> {
        f.check_compatible(g)?;
        let mut map: BTreeMap<Key, Operator> = f.terms.iter().map(|(k, x)| (k.clone(), x.scale(a))).collect();
        for (k, y) in &g.terms {
            match map.get_mut(k) {
                Some(x) => x.axpy(b, y),
                None => {
                    map.insert(k.clone(), y.scale(b));
                }
            }
        }
        let scale = (a.norm() * f.largest_coefficient()).max(b.norm() * g.largest_coefficient());
        prune_map(&mut map, scale);
        Ok(SecularPoly { basis: f.basis.clone(), dim: f.dim, terms: map })
    }

    pub fn scale(&self, z: C64) -> SecularPoly {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a = a.scale(z);
        }
        if z == C64::new(0.0, 0.0) {
            out.terms.clear();
        }
        out
    }

    pub fn add(&self, other: &SecularPoly) -> Result<SecularPoly> {
        Self::combine(re(1.0), self, re(1.0), other)
    }

    pub fn sub(&self, other: &SecularPoly) -> Result<SecularPoly> {
        Self::combine(re(1.0), self, re(-1.0), other)
    }

    fn bilinear(
        f: &SecularPoly,
        g: &SecularPoly,
        op: impl Fn(&Operator, &Operator) -> Result<Operator>,
    ) -> Result<SecularPoly> {
        f.check_compatible(g)?;
        let mut map: BTreeMap<Key, Operator> = BTreeMap::new();
        for ((kf, pf), a) in &f.terms {
            for ((kg, pg), b) in &g.terms {
                let p = pf + pg;
                let ab = op(a, b)?;
                if ab.norm() == 0.0 {
                    continue;
                }
                if p > MAX_SECULAR_DEGREE {
                    return Err(Error::DegreeOverflow { degree: p, max: MAX_SECULAR_DEGREE });
                }
                let key = (kf.add(kg), p);
                match map.get_mut(&key) {
                    Some(x) => *x += &ab,
                    None => {
                        map.insert(key, ab);
                    }
                }
            }
        }
        prune_map(&mut map, f.largest_coefficient() * g.largest_coefficient());
        Ok(SecularPoly { basis: f.basis.clone(), dim: f.dim, terms: map })
    }

    pub fn product(f: &SecularPoly, g: &SecularPoly) -> Result<SecularPoly> {
        Self::bilinear(f, g, |a, b| Ok(a * b))
    }

    pub fn commutator(f: &SecularPoly, g: &SecularPoly) -> Result<SecularPoly> {
        Self::bilinear(f, g, |a, b| a.commutator(b))
    }

    pub fn evaluate(&self, t: f64) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for ((k, p), a) in &self.terms {
            let w = self.basis.value(k);
            out.axpy(C64::from_polar(t.powi(*p as i32), w * t), a);
        }
        out
    }

    /// `∫₀ᵗ F`, including the secular growth of the constant terms.
    pub fn primitive(&self) -> Result<SecularPoly> {
        let zero = Frequency::zero(self.basis.len());
        let mut map: BTreeMap<Key, Operator> = BTreeMap::new();
        let mut push = |key: Key, a: Operator| match map.get_mut(&key) {
            Some(x) => *x += &a,
            None => {
                map.insert(key, a);
            }
        };
        for ((k, p), a) in &self.terms {
            if k.is_zero() {
                let q = p + 1;
                if q > MAX_SECULAR_DEGREE {
                    return Err(Error::DegreeOverflow { degree: q, max: MAX_SECULAR_DEGREE });
                }
                push((zero.clone(), q), a.scale_real(1.0 / q as f64));
                continue;
            }
            let (oscillating, constant) = power_exp_integral(self.basis.value(k), *p);
            for (q, z) in oscillating.into_iter().enumerate() {
                if z != C64::new(0.0, 0.0) {
                    push((k.clone(), q as u32), a.scale(z));
                }
            }
            push((zero.clone(), 0), a.scale(constant));
        }
        let scale = max_norm(map.values());
        prune_map(&mut map, scale);
        Ok(SecularPoly { basis: self.basis.clone(), dim: self.dim, terms: map })
    }

    pub fn derivative(&self) -> SecularPoly {
        let mut map: BTreeMap<Key, Operator> = BTreeMap::new();
        for ((k, p), a) in &self.terms {
            let w = self.basis.value(k);
            if w != 0.0 {
                let key = (k.clone(), *p);
                let x = a.scale(c(0.0, w));
                match map.get_mut(&key) {
                    Some(y) => *y += &x,
                    None => {
                        map.insert(key, x);
                    }
                }
            }
            if *p > 0 {
                let key = (k.clone(), p - 1);
                let x = a.scale_real(*p as f64);
                match map.get_mut(&key) {
                    Some(y) => *y += &x,
                    None => {
                        map.insert(key, x);
                    }
                }
            }
        }
        let scale = max_norm(map.values());
        prune_map(&mut map, scale);
        SecularPoly { basis: self.basis.clone(), dim: self.dim, terms: map }
    }
}

/// `∫₀ᵗ s^p e^{iωs} ds = Σ_q c_q t^q e^{iωt} + c` for `ω ≠ 0`, as `(c_0..c_p, c)`.
fn power_exp_integral(omega: f64, p: u32) -> (Vec<C64>, C64) {
    let inv = c(0.0, -1.0 / omega); // 1/(iω)
    let mut osc = vec![inv];
    let mut constant = -inv;
    for q in 1..=p as usize {
        // J_q = t^q e^{iωt}/(iω) - (q/(iω)) J_{q-1}
        let factor = -inv * q as f64;
        let mut next: Vec<C64> = osc.iter().map(|z| z * factor).collect();
        next.push(inv);
        osc = next;
        constant *= factor;
    }
    (osc, constant)
}

impl Bracket for SecularPoly {
    fn bracket(&self, other: &Self) -> Result<Self> {
        SecularPoly::commutator(self, other)
    }

    fn add_scaled(&mut self, z: Complex64, other: &Self) -> Result<()> {
        *self = SecularPoly::combine(re(1.0), self, z, other)?;
        Ok(())
    }

    fn zero_like(&self) -> Self {
        SecularPoly::zero(self.basis.clone(), self.dim)
    }
}
