//! Time-independent perturbations `H(λ) = H₀ + Σ λⁿ Hₙ`.
//!
//! The propagator is written as `e^{-iZ(λ)} e^{-i(H₀+C(λ))t} e^{iZ(λ)}` with
//! `[C, H₀] = 0`. Order by order, `Cₙ - i[Zₙ, H₀]` equals a known operator
//! built from lower orders; its block-diagonal part (with respect to the
//! eigenprojectors of `H₀`) is `Cₙ` and its off-diagonal part fixes `Zₙ` up
//! to a block-diagonal gauge.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_exponential, re, spectral_decompose, unitarity_defect, Operator, Spectrum, C64,
    DEFAULT_CLUSTER_TOL,
};
use crate::nested::{composition_sums, i_pow_over_factorial};

/// Divisors below this multiple of the clustering gap are rejected.
pub const ILL_CONDITIONED_FACTOR: f64 = 1e3;

/// Tolerance for block diagonality of user-supplied gauges, relative to `max(1, |gauge|)`.
pub const GAUGE_TOL: f64 = 1e-10;

/// Block-diagonal part, off-diagonal part and Sylvester inverse of an operator.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    pub diag: Operator,
    pub offdiag: Operator,
    /// `i Σ_{j≠l} (E_l - E_j)^{-1} P_j X P_l`, so that `-i[sylvester, H₀] = offdiag`.
    pub sylvester: Operator,
    /// Smallest `|E_l - E_j|` over the blocks where `P_j X P_l` is nonzero.
    pub min_divisor: Option<f64>,
}

fn cluster_labels(spec: &Spectrum) -> Vec<usize> {
    let mut label = vec![0; spec.dim];
    for (m, cl) in spec.clusters.iter().enumerate() {
        for &k in &cl.members {
            label[k] = m;
        }
    }
    label
}

/// Splits `X` with respect to the eigenprojectors in `spec`.
pub fn block_split(x: &Operator, spec: &Spectrum) -> Result<BlockSplit> {
    if x.dim() != spec.dim {
        return Err(Error::DimensionMismatch { left: spec.dim, right: x.dim() });
    }
    let v = &spec.eigenvectors;
    let label = cluster_labels(spec);
    let energy: Vec<f64> = spec.clusters.iter().map(|c| c.energy).collect();
    let xe = v.adjoint() * x.matrix() * v;
    let n = spec.dim;
    let zero = C64::new(0.0, 0.0);
    let mut diag = DMatrix::from_element(n, n, zero);
    let mut syl = DMatrix::from_element(n, n, zero);
    // Entries below this are treated as structurally absent when tracking divisors.
    let negligible = 1e-14 * xe.norm().max(1e-300);
    let mut min_divisor: Option<f64> = None;
    for a in 0..n {
        for b in 0..n {
            let (j, l) = (label[a], label[b]);
            if j == l {
                diag[(a, b)] = xe[(a, b)];
            } else {
                let gap = energy[l] - energy[j];
                syl[(a, b)] = C64::new(0.0, 1.0 / gap) * xe[(a, b)];
                if xe[(a, b)].norm() > negligible {
                    min_divisor = Some(min_divisor.map_or(gap.abs(), |d: f64| d.min(gap.abs())));
                }
            }
        }
    }
    let diag = Operator::from(v * diag * v.adjoint());
    let sylvester = Operator::from(v * syl * v.adjoint());
    let offdiag = x - &diag;
    Ok(BlockSplit { diag, offdiag, sylvester, min_divisor })
}

/// `𝒢ₙ(X; Z₁..Zₙ) = Σ_p (i^p/p!) Σ_{k₁+…+k_p=n} ad_{Z_{k₁}} ⋯ ad_{Z_{k_p}} X`.
pub fn g_script(x: &Operator, z_chain: &[Operator], n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let sums = composition_sums(x, z_chain, n, 1)?;
    let mut out = Operator::zeros(x.dim());
    for (p, s) in sums.iter().enumerate() {
        if let Some(s) = s {
            out.axpy(i_pow_over_factorial(p), s);
        }
    }
    Ok(out)
}

/// The part of the order-`n` condition that does not involve `Zₙ`.
///
/// `h_list` holds `H₀..Hₙ` and `z_chain` holds `Z₁..Z_{n-1}`. The solver sets
/// `Cₙ - i[Zₙ, H₀]` equal to the returned operator.
pub fn g_big(h_list: &[Operator], z_chain: &[Operator], n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    if h_list.len() < n + 1 {
        return Err(Error::ChainLength { needed: n + 1, got: h_list.len() });
    }
    if z_chain.len() < n - 1 {
        return Err(Error::ChainLength { needed: n - 1, got: z_chain.len() });
    }
    let mut out = h_list[n].clone();
    if n >= 2 {
        let sums = composition_sums(&h_list[0], &z_chain[..n - 1], n, 2)?;
        for (p, s) in sums.iter().enumerate() {
            if let Some(s) = s {
                out.axpy(i_pow_over_factorial(p), s);
            }
        }
        for m in 1..n {
            out += &g_script(&h_list[m], &z_chain[..n - m], n - m)?;
        }
    }
    Ok(out)
}

/// Per-order generators of a time-independent expansion.
#[derive(Debug, Clone)]
pub struct TISolution {
    pub order: usize,
    pub h0: Operator,
    /// `H₁..H_N` (zero-padded when fewer were supplied).
    pub h_list: Vec<Operator>,
    pub spectrum: Spectrum,
    pub c_list: Vec<Operator>,
    pub z_list: Vec<Operator>,
    /// Block-diagonal parts `⌊Zₙ⌋` that were imposed.
    pub gauge: Vec<Operator>,
    /// Smallest eigenvalue gap that was divided by, if any.
    pub min_divisor: Option<f64>,
}

/// Options for [`solve_ti_with`].
#[derive(Debug, Clone)]
pub struct TIOptions {
    pub cluster_tol: f64,
    /// `⌊Zₙ⌋` per order; missing entries are zero (the minimal solution).
    pub gauge: Vec<Operator>,
}

impl Default for TIOptions {
    fn default() -> Self {
        TIOptions { cluster_tol: DEFAULT_CLUSTER_TOL, gauge: Vec::new() }
    }
}

/// Minimal solution (`⌊Zₙ⌋ = 0`) or, with `gauge`, the gauged one.
pub fn solve_ti(h0: &Operator, h_list: &[Operator], order: usize, gauge: Option<&[Operator]>) -> Result<TISolution> {
    let opts = TIOptions { gauge: gauge.map(<[Operator]>::to_vec).unwrap_or_default(), ..TIOptions::default() };
    solve_ti_with(h0, h_list, order, &opts)
}

pub fn solve_ti_with(h0: &Operator, h_list: &[Operator], order: usize, opts: &TIOptions) -> Result<TISolution> {
    if order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    h0.ensure_hermitian()?;
    let dim = h0.dim();
    for h in h_list {
        h0.check_same_dim(h)?;
        h.ensure_hermitian()?;
    }
    let spectrum = spectral_decompose(h0, opts.cluster_tol)?;
    let threshold = ILL_CONDITIONED_FACTOR * spectrum.cluster_gap;

    let mut full_h = vec![h0.clone()];
    full_h.extend(h_list.iter().take(order).cloned());
    full_h.resize(order + 1, Operator::zeros(dim));

    let mut gauge = Vec::with_capacity(order);
    for n in 1..=order {
        let g = opts.gauge.get(n - 1).cloned().unwrap_or_else(|| Operator::zeros(dim));
        h0.check_same_dim(&g)?;
        g.ensure_hermitian()?;
        let off = block_split(&g, &spectrum)?.offdiag.norm();
        if off > GAUGE_TOL * g.norm().max(1.0) {
            return Err(Error::GaugeNotBlockDiagonal { order: n, residual: off });
        }
        gauge.push(g);
    }

    let mut c_list = Vec::with_capacity(order);
    let mut z_list: Vec<Operator> = Vec::with_capacity(order);
    let mut min_divisor: Option<f64> = None;
    for n in 1..=order {
        let g = g_big(&full_h, &z_list, n)?;
        let split = block_split(&g, &spectrum)?;
        if let Some(d) = split.min_divisor {
            if d < threshold {
                return Err(Error::IllConditioned { divisor: d, threshold });
            }
            min_divisor = Some(min_divisor.map_or(d, |m: f64| m.min(d)));
        }
        c_list.push(split.diag.hermitian_part());
        z_list.push((&gauge[n - 1] + &split.sylvester).hermitian_part());
    }

    Ok(TISolution {
        order,
        h0: h0.clone(),
        h_list: full_h[1..].to_vec(),
        spectrum,
        c_list,
        z_list,
        gauge,
        min_divisor,
    })
}

fn power_sum(list: &[Operator], lambda: f64, dim: usize) -> Operator {
    let mut out = Operator::zeros(dim);
    let mut lp = 1.0;
    for x in list {
        lp *= lambda;
        out.axpy(re(lp), x);
    }
    out
}

impl TISolution {
    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `Z_[N](λ) = Σ λⁿ Zₙ`
    pub fn z_total(&self, lambda: f64) -> Operator {
        power_sum(&self.z_list, lambda, self.dim())
    }

    /// `C_[N](λ) = Σ λⁿ Cₙ`
    pub fn c_total(&self, lambda: f64) -> Operator {
        power_sum(&self.c_list, lambda, self.dim())
    }

    /// `H₀ + Σ λⁿ Hₙ`
    pub fn hamiltonian(&self, lambda: f64) -> Operator {
        &self.h0 + &power_sum(&self.h_list, lambda, self.dim())
    }

    /// `|Cₙ - i[Zₙ, H₀] - 𝖦ₙ|_F` for each order.
    pub fn recursion_residuals(&self) -> Result<Vec<f64>> {
        let mut full_h = vec![self.h0.clone()];
        full_h.extend(self.h_list.iter().cloned());
        (1..=self.order)
            .map(|n| {
                let g = g_big(&full_h, &self.z_list, n)?;
                let lhs = &self.c_list[n - 1] - &self.z_list[n - 1].commutator(&self.h0)?.scale(C64::new(0.0, 1.0));
                Ok(lhs.distance(&g))
            })
            .collect()
    }

    /// `|[C_[N](λ), H₀]|_F`
    pub fn commutation_residual(&self, lambda: f64) -> f64 {
        self.c_total(lambda).commutator(&self.h0).map(|x| x.norm()).unwrap_or(f64::NAN)
    }
}

/// `e^{-iZ_[N](λ)} e^{-i(H₀+C_[N](λ))t} e^{iZ_[N](λ)}`
pub fn evolution_ti(sol: &TISolution, lambda: f64, t: f64) -> Result<Operator> {
    let w = hermitian_exponential(&sol.z_total(lambda), 1.0)?;
    let core = hermitian_exponential(&(&sol.h0 + &sol.c_total(lambda)), t)?;
    Ok(&(&w * &core) * &w.adjoint())
}

/// Same propagator assembled as `e^{-iZ} Σ_m e^{-iE_m t} e^{-iP_m C P_m t} P_m e^{iZ}`.
pub fn reduced_rank_form(sol: &TISolution, lambda: f64, t: f64) -> Result<Operator> {
    let dim = sol.dim();
    let c = sol.c_total(lambda);
    let mut core = Operator::zeros(dim);
    for cl in &sol.spectrum.clusters {
        let p = &cl.projector;
        let block = (&(p * &c) * p).hermitian_part();
        let phase = C64::from_polar(1.0, -cl.energy * t);
        core.axpy(phase, &(&hermitian_exponential(&block, t)? * p));
    }
    let w = hermitian_exponential(&sol.z_total(lambda), 1.0)?;
    Ok(&(&w * &core) * &w.adjoint())
}

/// `|⌈e^{iZ_[N](λ)} H(λ) e^{-iZ_[N](λ)}⌉|_F` with `H(λ) = H₀ + Σ λⁿ Hₙ`.
pub fn block_diag_residual(sol: &TISolution, h0: &Operator, h_list: &[Operator], lambda: f64) -> Result<f64> {
    sol.h0.check_same_dim(h0)?;
    let h = h0 + &power_sum(h_list, lambda, h0.dim());
    let w = hermitian_exponential(&sol.z_total(lambda), 1.0)?;
    let rotated = &(&w.adjoint() * &h) * &w;
    Ok(block_split(&rotated, &sol.spectrum)?.offdiag.norm())
}

/// Unitarity defect of [`evolution_ti`], for reporting.
pub fn evolution_defect(sol: &TISolution, lambda: f64, t: f64) -> Result<f64> {
    Ok(unitarity_defect(&evolution_ti(sol, lambda, t)?))
}
