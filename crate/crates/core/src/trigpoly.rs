//! Operator-valued trigonometric polynomials `F(t) = Σ_ω A_ω e^{iωt}`.
//!
//! Frequencies are integer combinations of a declared list of positive base
//! frequencies, so matching (and in particular the zero frequency carrying
//! the mean value) is exact. The base frequencies are assumed rationally
//! independent; that is a contract on the caller and is not checked.
//!
//! The algebra is closed under linear combinations, products, commutators,
//! derivatives and essential primitives. A primitive of a polynomial with
//! nonzero mean grows linearly in time and is rejected; see
//! [`crate::secular::SecularPoly`] for the extension that carries such terms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, re, Operator, C64};
use crate::nested::Bracket;

/// Relative pruning threshold for coefficients.
pub const PRUNE_TOL: f64 = 1e-14;

/// Tolerance on `|<F>|_F` for the zero-mean precondition.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Declared base frequencies (rad/time), shared between polynomials.
#[derive(Clone, PartialEq)]
pub struct FrequencyBasis(Arc<[f64]>);

impl fmt::Debug for FrequencyBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrequencyBasis({:?})", &self.0[..])
    }
}

impl FrequencyBasis {
    pub fn new(base: &[f64]) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidBasis("at least one base frequency is required".into()));
        }
        if let Some(w) = base.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidBasis(format!("base frequency {w} must be positive and finite")));
        }
        Ok(FrequencyBasis(base.into()))
    }

    pub fn single(omega: f64) -> Result<Self> {
        Self::new(&[omega])
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, key: &Frequency) -> f64 {
        key.0.iter().zip(self.0.iter()).map(|(&k, &w)| k as f64 * w).sum()
    }

    pub fn check_same(&self, other: &FrequencyBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch { left: self.0.to_vec(), right: other.0.to_vec() });
        }
        Ok(())
    }

    /// Common period when there is a single base frequency.
    pub fn period(&self) -> Option<f64> {
        (self.0.len() == 1).then(|| 2.0 * std::f64::consts::PI / self.0[0])
    }
}

/// Integer coefficient vector over a [`FrequencyBasis`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(Vec<i64>);

impl Frequency {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Frequency(coeffs)
    }

    pub fn zero(arity: usize) -> Self {
        Frequency(vec![0; arity])
    }

    /// `k` times the single base frequency.
    pub fn harmonic(k: i64) -> Self {
        Frequency(vec![k])
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn neg(&self) -> Frequency {
        Frequency(self.0.iter().map(|k| -k).collect())
    }

    pub fn add(&self, other: &Frequency) -> Frequency {
        Frequency(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Finite sum `Σ_ω A_ω e^{iωt}` with operator coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    basis: FrequencyBasis,
    dim: usize,
    terms: BTreeMap<Frequency, Operator>,
}

pub(crate) fn max_norm<'a>(ops: impl Iterator<Item = &'a Operator>) -> f64 {
    ops.map(Operator::norm).fold(0.0, f64::max)
}

pub(crate) fn prune_map<K: Ord>(terms: &mut BTreeMap<K, Operator>, scale: f64) {
    let cut = PRUNE_TOL * scale;
    terms.retain(|_, a| a.norm() > cut);
}

impl TrigPoly {
    pub fn zero(basis: FrequencyBasis, dim: usize) -> Self {
        TrigPoly { basis, dim, terms: BTreeMap::new() }
    }

    pub fn constant(basis: FrequencyBasis, a: Operator) -> Self {
        let key = Frequency::zero(basis.len());
        Self::from_terms(basis, a.dim(), vec![(key, a)]).expect("constant polynomial is well formed")
    }

    /// Builds a polynomial from `(frequency, coefficient)` pairs; repeated
    /// frequencies are summed.
    pub fn from_terms(
        basis: FrequencyBasis,
        dim: usize,
        terms: impl IntoIterator<Item = (Frequency, Operator)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Frequency, Operator> = BTreeMap::new();
        for (k, a) in terms {
            if k.0.len() != basis.len() {
                return Err(Error::FrequencyArity { expected: basis.len(), got: k.0.len() });
            }
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: a.dim() });
            }
            match map.get_mut(&k) {
                Some(existing) => *existing += &a,
                None => {
                    map.insert(k, a);
                }
            }
        }
        let scale = max_norm(map.values());
        prune_map(&mut map, scale);
        Ok(TrigPoly { basis, dim, terms: map })
    }

    /// Single-base convenience: `Σ_k A_k e^{i k ω t}`.
    pub fn from_harmonics(omega: f64, dim: usize, terms: impl IntoIterator<Item = (i64, Operator)>) -> Result<Self> {
        let basis = FrequencyBasis::single(omega)?;
        Self::from_terms(basis, dim, terms.into_iter().map(|(k, a)| (Frequency::harmonic(k), a)))
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

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Frequency, &Operator)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &Frequency) -> Option<&Operator> {
        self.terms.get(key)
    }

    /// Coefficient at `k` times the first base frequency (other components zero).
    pub fn harmonic(&self, k: i64) -> Option<&Operator> {
        let mut v = vec![0; self.basis.len()];
        v[0] = k;
        self.terms.get(&Frequency(v))
    }

    pub fn frequency_values(&self) -> Vec<f64> {
        self.terms.keys().map(|k| self.basis.value(k)).collect()
    }

    pub fn largest_coefficient(&self) -> f64 {
        max_norm(self.terms.values())
    }

    fn check_compatible(&self, other: &TrigPoly) -> Result<()> {
        self.basis.check_same(&other.basis)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// `a F + b G`
    pub fn combine(a: C64, f: &TrigPoly, b: C64, g: &TrigPoly) -> Result<TrigPoly> {
        f.check_compatible(g)?;
        let mut map: BTreeMap<Frequency, Operator> = BTreeMap::new();
        for (k, x) in &f.terms {
            map.insert(k.clone(), x.scale(a));
        }
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
        Ok(TrigPoly { basis: f.basis.clone(), dim: f.dim, terms: map })
    }

    pub fn scale(&self, z: C64) -> TrigPoly {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a = a.scale(z);
        }
        if z == C64::new(0.0, 0.0) {
            out.terms.clear();
        }
        out
    }

    pub fn add(&self, other: &TrigPoly) -> Result<TrigPoly> {
        Self::combine(re(1.0), self, re(1.0), other)
    }

    pub fn sub(&self, other: &TrigPoly) -> Result<TrigPoly> {
        Self::combine(re(1.0), self, re(-1.0), other)
    }

    /// Pointwise product; coefficients convolve over frequencies.
    pub fn product(f: &TrigPoly, g: &TrigPoly) -> Result<TrigPoly> {
        f.check_compatible(g)?;
        let mut map: BTreeMap<Frequency, Operator> = BTreeMap::new();
        for (kf, a) in &f.terms {
            for (kg, b) in &g.terms {
                let k = kf.add(kg);
                let ab = a * b;
                match map.get_mut(&k) {
                    Some(x) => *x += &ab,
                    None => {
                        map.insert(k, ab);
                    }
                }
            }
        }
        prune_map(&mut map, f.largest_coefficient() * g.largest_coefficient());
        Ok(TrigPoly { basis: f.basis.clone(), dim: f.dim, terms: map })
    }

    /// `FG - GF`
    pub fn commutator(f: &TrigPoly, g: &TrigPoly) -> Result<TrigPoly> {
        f.check_compatible(g)?;
        let mut map: BTreeMap<Frequency, Operator> = BTreeMap::new();
        for (kf, a) in &f.terms {
            for (kg, b) in &g.terms {
                let k = kf.add(kg);
                let ab = a.commutator(b)?;
                match map.get_mut(&k) {
                    Some(x) => *x += &ab,
                    None => {
                        map.insert(k, ab);
                    }
                }
            }
        }
        prune_map(&mut map, f.largest_coefficient() * g.largest_coefficient());
        Ok(TrigPoly { basis: f.basis.clone(), dim: f.dim, terms: map })
    }

    /// Left multiplication of every coefficient by a constant operator.
    pub fn left_mul(&self, x: &Operator) -> Result<TrigPoly> {
        self.map_coefficients(|a| x * a, x)
    }

    /// Right multiplication of every coefficient by a constant operator.
    pub fn right_mul(&self, x: &Operator) -> Result<TrigPoly> {
        self.map_coefficients(|a| a * x, x)
    }

    fn map_coefficients(&self, f: impl Fn(&Operator) -> Operator, x: &Operator) -> Result<TrigPoly> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        let mut map: BTreeMap<Frequency, Operator> =
            self.terms.iter().map(|(k, a)| (k.clone(), f(a))).collect();
        prune_map(&mut map, self.largest_coefficient() * x.norm());
        Ok(TrigPoly { basis: self.basis.clone(), dim: self.dim, terms: map })
    }

    /// `Σ_ω A_ω e^{iωt}`
    pub fn evaluate(&self, t: f64) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for (k, a) in &self.terms {
            let w = self.basis.value(k);
            out.axpy(C64::from_polar(1.0, w * t), a);
        }
        out
    }

    /// Pointwise adjoint `F(t)^dag = Σ A_ω^dag e^{-iωt}`.
    pub fn adjoint(&self) -> TrigPoly {
        let terms = self.terms.iter().map(|(k, a)| (k.neg(), a.adjoint())).collect();
        TrigPoly { basis: self.basis.clone(), dim: self.dim, terms }
    }

    /// `max_ω |A_{-ω} - A_ω^dag|_F`; zero for Hermitian-valued polynomials.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut keys: Vec<&Frequency> = self.terms.keys().collect();
        keys.extend(adj.terms.keys());
        keys.into_iter()
            .map(|k| match (self.terms.get(k), adj.terms.get(k)) {
                (Some(a), Some(b)) => a.distance(b),
                (Some(a), None) | (None, Some(a)) => a.norm(),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// `F(t)` Hermitian for all real `t`, i.e. `A_{-ω} = A_ω^dag`.
    pub fn is_hermitian_valued(&self) -> bool {
        self.hermiticity_defect() <= 1e-12 * self.largest_coefficient().max(1.0)
    }

    /// `(F + F^dag) / 2`, pointwise.
    pub fn hermitian_part(&self) -> TrigPoly {
        TrigPoly::combine(re(0.5), self, re(0.5), &self.adjoint()).expect("adjoint shares the basis")
    }

    /// Mean value `<F>`: the zero-frequency coefficient.
    pub fn mean(&self) -> Operator {
        self.terms
            .get(&Frequency::zero(self.basis.len()))
            .cloned()
            .unwrap_or_else(|| Operator::zeros(self.dim))
    }

    /// Mean value and essential primitive `∫₀ᵗ (F - <F>)`.
    pub fn mean_and_essential_primitive(&self) -> (Operator, TrigPoly) {
        let zero = Frequency::zero(self.basis.len());
        let mut map: BTreeMap<Frequency, Operator> = BTreeMap::new();
        let mut offset = Operator::zeros(self.dim);
        for (k, a) in &self.terms {
            if k.is_zero() {
                continue;
            }
            // A e^{iωt} / (iω) - A / (iω)
            let inv = c(0.0, -1.0 / self.basis.value(k));
            let b = a.scale(inv);
            offset -= &b;
            map.insert(k.clone(), b);
        }
        if !map.is_empty() {
            map.insert(zero, offset);
        }
        let scale = max_norm(map.values());
        prune_map(&mut map, scale);
        (self.mean(), TrigPoly { basis: self.basis.clone(), dim: self.dim, terms: map })
    }

    /// Essential primitive alone.
    pub fn essential_primitive(&self) -> TrigPoly {
        self.mean_and_essential_primitive().1
    }

    /// `∫₀ᵗ F`; only defined (as a trigonometric polynomial) when `<F> = 0`.
    pub fn zero_mean_primitive(&self) -> Result<TrigPoly> {
        let m = self.mean().norm();
        if m > ZERO_MEAN_TOL * self.largest_coefficient().max(1.0) {
            return Err(Error::NonzeroMean { norm: m });
        }
        Ok(self.essential_primitive())
    }

    /// `Σ_ω (iω) A_ω e^{iωt}`
    pub fn derivative(&self) -> TrigPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| !k.is_zero())
            .map(|(k, a)| (k.clone(), a.scale(c(0.0, self.basis.value(k)))))
            .collect();
        TrigPoly { basis: self.basis.clone(), dim: self.dim, terms }
    }

    /// Drops the zero-frequency coefficient.
    pub fn without_mean(&self) -> TrigPoly {
        let mut out = self.clone();
        out.terms.remove(&Frequency::zero(self.basis.len()));
        out
    }

    /// Adds a constant operator to the zero-frequency coefficient.
    pub fn add_constant(&self, a: &Operator) -> Result<TrigPoly> {
        self.add(&TrigPoly::constant(self.basis.clone(), a.clone()))
    }
}

impl Bracket for TrigPoly {
    fn bracket(&self, other: &Self) -> Result<Self> {
        TrigPoly::commutator(self, other)
    }

    fn add_scaled(&mut self, z: Complex64, other: &Self) -> Result<()> {
        *self = TrigPoly::combine(re(1.0), self, z, other)?;
        Ok(())
    }

    fn zero_like(&self) -> Self {
        TrigPoly::zero(self.basis.clone(), self.dim)
    }
}

/// `avxp(iθ) = (e^{iθ} - 1)/(iθ)`, with `avxp(0) = 1`.
pub fn avxp_imag(theta: f64) -> C64 {
    if theta == 0.0 {
        return re(1.0);
    }
    let half = (0.5 * theta).sin();
    c(theta.sin() / theta, 2.0 * half * half / theta)
}

/// `∫₀ᵗ e^{iωs} ds`
pub fn exp_integral(omega: f64, t: f64) -> C64 {
    avxp_imag(omega * t) * t
}

/// Mean value and essential primitive; see [`TrigPoly::mean_and_essential_primitive`].
pub fn mean_and_essential_primitive(f: &TrigPoly) -> (Operator, TrigPoly) {
    f.mean_and_essential_primitive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::*;
    use std::f64::consts::PI;

    const NU: f64 = 1.3;

    fn poly(terms: Vec<(i64, Operator)>) -> TrigPoly {
        let dim = terms.first().map(|(_, a)| a.dim()).unwrap_or(2);
        TrigPoly::from_harmonics(NU, dim, terms).unwrap()
    }

    fn random_poly(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> TrigPoly {
        poly((-2..=2).map(|k| (k, random_operator(r, n))).collect())
    }

    fn random_hermitian_poly(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> TrigPoly {
        let mut terms = vec![(0, random_hermitian(r, n))];
        for k in 1..=2 {
            let a = random_operator(r, n);
            terms.push((-k, a.adjoint()));
            terms.push((k, a));
        }
        poly(terms)
    }

    #[test]
    fn basis_validation() {
        assert!(FrequencyBasis::new(&[]).is_err());
        assert!(FrequencyBasis::new(&[1.0, -2.0]).is_err());
        assert!(FrequencyBasis::new(&[1.0, f64::NAN]).is_err());
        let b = FrequencyBasis::new(&[1.0, 2f64.sqrt()]).unwrap();
        assert_eq!(b.value(&Frequency::new(vec![0, 0])), 0.0);
        assert!((b.value(&Frequency::new(vec![2, -1])) - (2.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn combine_examples() {
        let mut r = rng(1);
        let f = random_poly(&mut r, 3);
        assert!(TrigPoly::combine(re(1.0), &f, re(-1.0), &f).unwrap().is_empty());

        let a = random_operator(&mut r, 3);
        let b = random_operator(&mut r, 3);
        let s = TrigPoly::combine(re(1.0), &poly(vec![(1, a.clone())]), re(1.0), &poly(vec![(1, b.clone())])).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.harmonic(1).unwrap().distance(&(&a + &b)) < 1e-15);

        let id = poly(vec![(0, Operator::identity(2))]);
        let s = TrigPoly::combine(re(2.0), &id, re(3.0), &id).unwrap();
        assert!(s.harmonic(0).unwrap().distance(&Operator::identity(2).scale_real(5.0)) < 1e-15);

        let other = TrigPoly::from_harmonics(2.0, 2, vec![(0, Operator::identity(2))]).unwrap();
        assert!(matches!(TrigPoly::combine(re(1.0), &id, re(1.0), &other), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn product_examples() {
        let mut r = rng(2);
        let a = random_operator(&mut r, 3);
        let b = random_operator(&mut r, 3);
        let p = TrigPoly::product(&poly(vec![(1, a.clone())]), &poly(vec![(-1, b.clone())])).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.harmonic(0).unwrap().distance(&(&a * &b)) < 1e-15);

        let g = random_poly(&mut r, 3);
        let id = poly(vec![(0, Operator::identity(3))]);
        let p = TrigPoly::product(&id, &g).unwrap();
        for (k, x) in g.terms() {
            assert!(p.coefficient(k).unwrap().distance(x) < 1e-15);
        }

        let f = random_poly(&mut r, 4);
        let g = random_poly(&mut r, 4);
        let lhs = TrigPoly::product(&f, &g).unwrap().evaluate(0.37);
        let rhs = &f.evaluate(0.37) * &g.evaluate(0.37);
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn commutator_examples() {
        let mut r = rng(3);
        let f = random_poly(&mut r, 3);
        assert!(TrigPoly::commutator(&f, &f).unwrap().is_empty());

        let comm = TrigPoly::commutator(&poly(vec![(1, sigma_plus())]), &poly(vec![(-1, sigma_minus())])).unwrap();
        assert_eq!(comm.len(), 1);
        assert!(comm.harmonic(0).unwrap().distance(&sigma_z()) < 1e-15);

        let (f, g, h) = (random_poly(&mut r, 3), random_poly(&mut r, 3), random_poly(&mut r, 3));
        let (a, b) = (c(0.3, -1.1), c(-0.7, 0.2));
        let lhs = TrigPoly::commutator(&TrigPoly::combine(a, &f, b, &g).unwrap(), &h).unwrap();
        let rhs = TrigPoly::combine(
            a,
            &TrigPoly::commutator(&f, &h).unwrap(),
            b,
            &TrigPoly::commutator(&g, &h).unwrap(),
        )
        .unwrap();
        for t in [0.0, 0.4, 2.9] {
            assert!(lhs.evaluate(t).distance(&rhs.evaluate(t)) < 1e-12);
        }
    }

    #[test]
    fn evaluate_examples() {
        let mut r = rng(4);
        let f = random_poly(&mut r, 3);
        let mut sum = Operator::zeros(3);
        for (_, a) in f.terms() {
            sum += a;
        }
        assert!(f.evaluate(0.0).distance(&sum) < 1e-15);

        let a = random_operator(&mut r, 3);
        let single = poly(vec![(1, a.clone())]);
        assert!(single.evaluate(2.0 * PI / NU).distance(&a) < 1e-14);
    }

    #[test]
    fn mean_and_primitive_examples() {
        let mut r = rng(5);
        let a = random_operator(&mut r, 2);
        let (m, esp) = poly(vec![(0, a.clone())]).mean_and_essential_primitive();
        assert_eq!(m, a);
        assert!(esp.is_empty());

        let (m, esp) = poly(vec![(1, a.clone())]).mean_and_essential_primitive();
        assert!(m.is_zero(0.0));
        let expect = a.scale(c(0.0, -1.0 / NU)); // A / (iν)
        assert!(esp.harmonic(1).unwrap().distance(&expect) < 1e-15);
        assert!(esp.harmonic(0).unwrap().distance(&expect.scale_real(-1.0)) < 1e-15);
        assert!(esp.mean().distance(&expect.scale_real(-1.0)) < 1e-15);
        let centered = esp.sub(&TrigPoly::constant(esp.basis().clone(), esp.mean())).unwrap();
        assert!(centered.mean().is_zero(0.0));
    }

    #[test]
    fn zero_mean_primitive_examples() {
        let empty = TrigPoly::zero(FrequencyBasis::single(NU).unwrap(), 2);
        assert!(empty.zero_mean_primitive().unwrap().is_empty());

        let mut r = rng(6);
        let a = random_operator(&mut r, 2);
        let f = poly(vec![(1, a.clone()), (-1, a.adjoint())]);
        let p = f.zero_mean_primitive().unwrap();
        let inv = c(0.0, -1.0 / NU);
        assert!(p.harmonic(1).unwrap().distance(&a.scale(inv)) < 1e-15);
        assert!(p.harmonic(-1).unwrap().distance(&a.adjoint().scale(-inv)) < 1e-15);
        let offset = &a.scale(-inv) + &a.adjoint().scale(inv);
        assert!(p.harmonic(0).unwrap().distance(&offset) < 1e-15);

        assert!(matches!(poly(vec![(0, a)]).zero_mean_primitive(), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn derivative_examples() {
        let mut r = rng(7);
        let a = random_operator(&mut r, 2);
        assert!(poly(vec![(0, a.clone())]).derivative().is_empty());
        let d = poly(vec![(1, a.clone())]).derivative();
        assert!(d.harmonic(1).unwrap().distance(&a.scale(c(0.0, NU))) < 1e-15);

        let f = random_poly(&mut r, 3).without_mean();
        let round = f.zero_mean_primitive().unwrap().derivative();
        for t in [0.1, 1.7, -3.0] {
            assert!(round.evaluate(t).distance(&f.evaluate(t)) < 1e-12);
        }
    }

    #[test]
    fn avxp_examples() {
        assert_eq!(avxp_imag(0.0), re(1.0));
        for theta in [1e-9, 0.3, -2.0, 40.0] {
            let direct = (C64::new(0.0, theta).exp() - re(1.0)) / C64::new(0.0, theta);
            assert!((avxp_imag(theta) - direct).norm() < 1e-9 * (1.0 + 1.0 / theta.abs()).min(1e3));
        }
        assert!((exp_integral(NU, 2.0 * PI / NU)).norm() < 1e-15);
        assert_eq!(exp_integral(0.0, 2.5), re(2.5));
    }

    #[test]
    fn mean_is_linear() {
        let mut r = rng(8);
        let (f, g) = (random_poly(&mut r, 3), random_poly(&mut r, 3));
        let (a, b) = (c(1.5, 0.5), c(-0.25, 2.0));
        let lhs = TrigPoly::combine(a, &f, b, &g).unwrap().mean();
        let mut rhs = f.mean().scale(a);
        rhs.axpy(b, &g.mean());
        assert!(lhs.distance(&rhs) < 1e-15);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn pointwise_faithful(seed in 0u64..100_000) {
            let mut r = rng(seed);
            let f = random_poly(&mut r, 3);
            let g = random_poly(&mut r, 3);
            let (a, b) = (c(0.4, -0.9), c(1.2, 0.3));
            let sum = TrigPoly::combine(a, &f, b, &g).unwrap();
            let prod = TrigPoly::product(&f, &g).unwrap();
            let comm = TrigPoly::commutator(&f, &g).unwrap();
            let deriv = f.derivative();
            for j in 0..10 {
                let t = -5.0 + 1.37 * j as f64 + (seed % 97) as f64 * 0.01;
                let (ft, gt) = (f.evaluate(t), g.evaluate(t));
                let mut s = ft.scale(a);
                s.axpy(b, &gt);
                proptest::prop_assert!(sum.evaluate(t).distance(&s) < 1e-11);
                proptest::prop_assert!(prod.evaluate(t).distance(&(&ft * &gt)) < 1e-11);
                proptest::prop_assert!(comm.evaluate(t).distance(&ft.commutator(&gt).unwrap()) < 1e-11);
                let h = 1e-5;
                let fd = (&f.evaluate(t + h) - &f.evaluate(t - h)).scale_real(0.5 / h);
                proptest::prop_assert!(deriv.evaluate(t).distance(&fd) < 1e-7);
            }
        }

        #[test]
        fn periodic_with_single_base(seed in 0u64..100_000, t in -20.0f64..20.0) {
            let mut r = rng(seed);
            let f = random_poly(&mut r, 3);
            let period = f.basis().period().unwrap();
            proptest::prop_assert!(f.evaluate(t + period).distance(&f.evaluate(t)) < 1e-12);
        }

        #[test]
        fn hermitian_closure(seed in 0u64..100_000) {
            let mut r = rng(seed);
            let f = random_hermitian_poly(&mut r, 3);
            let g = random_hermitian_poly(&mut r, 3);
            proptest::prop_assert!(f.is_hermitian_valued() && g.is_hermitian_valued());
            let h = TrigPoly::commutator(&f, &g).unwrap().scale(c(0.0, 1.0));
            proptest::prop_assert!(h.is_hermitian_valued());
            proptest::prop_assert!(h.evaluate(0.83).is_hermitian());
        }
    }
}
