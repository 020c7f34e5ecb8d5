//! Laser-driven trapped ion with a number-dependent coupling profile.
//!
//! State space is `Fock(N_F) ⊗ C²` with basis index `2n + s`, where `s = 0`
//! is `|+⟩ = (1, 0)` and `s = 1` is `|−⟩`; `σ₊ = |+⟩⟨−|`.
//!
//! The drive is `λν(e^{iαt}(g(n̂) + e^{iφ}(a_f + a_f†)) ⊗ σ₋ + h.c.)` with the
//! deformed ladder operator `a_f = a f(n̂)`. The linearised Lamb–Dicke model
//! is `g ≡ 1`, `f ≡ η`, `e^{iφ} = −i`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_exponential, re, spectral_decompose, Operator, Spectrum, C64, DEFAULT_CLUSTER_TOL};
use crate::trigpoly::{avxp_imag, Frequency, FrequencyBasis, TrigPoly};

pub const MIN_CUTOFF: usize = 4;

/// Relative tolerance for detecting `δ = mν`.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Coupling functions `g(n)` and `f(n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `g ≡ 1`, `f ≡ η`.
    Linearized,
    /// `g(n) = e^{-η²/2} Φ₀(η; n)`, `f(n+1) = η e^{-η²/2} Φ₁(η; n)`.
    LambDicke,
    /// Explicit tables indexed by `n`; `f[0]` is ignored.
    Table { g: Vec<f64>, f: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonTrapParams {
    /// Trap frequency ν (rad/time).
    pub nu: f64,
    /// Internal splitting ε (rad/time).
    pub epsilon: f64,
    /// Laser frequency α (rad/time).
    pub alpha: f64,
    /// Rabi frequency over trap frequency.
    pub lambda: f64,
    /// Lamb–Dicke parameter.
    pub eta: f64,
    /// Coupling phase φ (rad).
    pub phi: f64,
    pub profile: Profile,
    /// Number of Fock levels kept.
    pub cutoff: usize,
}

impl Default for IonTrapParams {
    fn default() -> Self {
        IonTrapParams::linearized(0.1, 12)
    }
}

impl IonTrapParams {
    /// Resonant (`δ = ν`) linearised model with `ν = 1`, `α = 4ν`.
    pub fn linearized(eta: f64, cutoff: usize) -> Self {
        let nu = 1.0;
        let alpha = 4.0 * nu;
        IonTrapParams {
            nu,
            epsilon: alpha + nu,
            alpha,
            lambda: 0.05,
            eta,
            phi: -FRAC_PI_2,
            profile: Profile::Linearized,
            cutoff,
        }
    }

    /// Resonant model with the Lamb–Dicke coupling profile.
    pub fn lamb_dicke(eta: f64, cutoff: usize) -> Self {
        IonTrapParams { profile: Profile::LambDicke, ..IonTrapParams::linearized(eta, cutoff) }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// `δ = ε − α`
    pub fn delta(&self) -> f64 {
        self.epsilon - self.alpha
    }

    pub fn is_resonant(&self) -> bool {
        (self.delta() - self.nu).abs() <= RESONANCE_TOL * self.nu
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu, self.epsilon, self.alpha, self.lambda, self.eta, self.phi];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if self.nu <= 0.0 {
            return Err(Error::InvalidParameter(format!("trap frequency {} must be positive", self.nu)));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("laser frequency {} must be non-negative", self.alpha)));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidParameter(format!("Lamb-Dicke parameter {} must be non-negative", self.eta)));
        }
        if self.cutoff < MIN_CUTOFF {
            return Err(Error::InvalidParameter(format!(
                "Fock cutoff {} is below the minimum {MIN_CUTOFF}",
                self.cutoff
            )));
        }
        if let Profile::Table { g, f } = &self.profile {
            if g.len() < self.cutoff || f.len() < self.cutoff {
                return Err(Error::InvalidParameter(format!(
                    "coupling tables need {} entries (g has {}, f has {})",
                    self.cutoff,
                    g.len(),
                    f.len()
                )));
            }
            if g.iter().chain(f.iter()).any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("coupling tables must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn g(&self, n: usize) -> f64 {
        match &self.profile {
            Profile::Linearized => 1.0,
            Profile::LambDicke => (-0.5 * self.eta * self.eta).exp() * phi_m(self.eta, 0, n as u32),
            Profile::Table { g, .. } => g[n],
        }
    }

    /// `f(n)` with `f(0) = 1`.
    pub fn f(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        match &self.profile {
            Profile::Linearized => self.eta,
            Profile::LambDicke => self.eta * (-0.5 * self.eta * self.eta).exp() * phi_m(self.eta, 1, n as u32 - 1),
            Profile::Table { f, .. } => f[n],
        }
    }

    /// `𝖿(n) = f(n)√n` inside the truncated space, zero at `n = 0` and `n = N_F`.
    pub fn f_sqrt(&self, n: usize) -> f64 {
        if n == 0 || n >= self.cutoff {
            0.0
        } else {
            self.f(n) * (n as f64).sqrt()
        }
    }
}

/// `Φ_m(η; n) = Σ_l (−η²)^l [n]_l / (l! (l+m)!)`, a terminating series.
pub fn phi_m(eta: f64, m: u32, n: u32) -> f64 {
    let z = -eta * eta;
    // term_l = z^l [n]_l / (l! (l+m)!)
    let mut term = 1.0 / factorial(m);
    let mut sum = term;
    for l in 0..n {
        term *= z * (n - l) as f64 / ((l + 1) as f64 * (l + 1 + m) as f64);
        sum += term;
    }
    sum
}

/// `n!/(m+n)! · L_n^m(η²)`, evaluated with the three-term Laguerre recurrence.
pub fn phi_m_laguerre(eta: f64, m: u32, n: u32) -> f64 {
    let z = eta * eta;
    let mf = m as f64;
    let (mut prev, mut cur) = (1.0, 1.0 + mf - z);
    let lag = if n == 0 {
        1.0
    } else {
        for k in 1..n {
            let k = k as f64;
            let next = ((2.0 * k + 1.0 + mf - z) * cur - (k + mf) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    let ratio: f64 = (1..=m).map(|j| 1.0 / (n + j) as f64).product();
    ratio * lag
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

/// Truncated operators on `Fock(N_F) ⊗ C²`.
#[derive(Debug, Clone)]
pub struct ModelOperators {
    pub a: Operator,
    pub a_dag: Operator,
    pub n_hat: Operator,
    pub a_f: Operator,
    pub a_f_dag: Operator,
    /// `g(n̂) ⊗ I`
    pub g_op: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
    pub sigma_z: Operator,
    /// `D(iη) = exp(iη(a + a†))`
    pub d_plus: Operator,
    pub d_minus: Operator,
    pub h0: Operator,
}

fn fock_from_fn(cutoff: usize, f: impl Fn(usize, usize) -> C64) -> Operator {
    Operator::from_fn(cutoff, f)
}

fn fock_diag(cutoff: usize, f: impl Fn(usize) -> f64) -> Operator {
    Operator::real_diagonal(&(0..cutoff).map(f).collect::<Vec<_>>())
}

fn fock_lowering(cutoff: usize) -> Operator {
    fock_from_fn(cutoff, |i, j| if j == i + 1 { re((j as f64).sqrt()) } else { re(0.0) })
}

fn spin(entries: [f64; 4]) -> Operator {
    Operator::from_rows(2, &entries.map(re))
}

/// `|+⟩⟨−|`
pub fn spin_plus() -> Operator {
    spin([0.0, 1.0, 0.0, 0.0])
}

pub fn spin_minus() -> Operator {
    spin([0.0, 0.0, 1.0, 0.0])
}

pub fn spin_z() -> Operator {
    spin([1.0, 0.0, 0.0, -1.0])
}

/// Fock-space `g(n̂)`, `𝖿(n̂)`-type diagonal functions lifted to the full space.
pub fn number_function(p: &IonTrapParams, f: impl Fn(usize) -> f64) -> Operator {
    fock_diag(p.cutoff, f).kron(&Operator::identity(2))
}

pub fn build_operators(p: &IonTrapParams) -> Result<ModelOperators> {
    p.validate()?;
    let nf = p.cutoff;
    let id2 = Operator::identity(2);
    let idf = Operator::identity(nf);
    let a_fock = fock_lowering(nf);
    let f_diag = fock_diag(nf, |n| p.f(n));
    let a_f_fock = &a_fock * &f_diag;

    let a = a_fock.kron(&id2);
    let x = (&a + &a.adjoint()).scale_real(p.eta);
    let d_plus = hermitian_exponential(&x, -1.0)?;
    let d_minus = d_plus.adjoint();
    let n_hat = fock_diag(nf, |n| n as f64).kron(&id2);
    let sigma_z = idf.kron(&spin_z());
    let h0 = &n_hat.scale_real(p.nu) + &sigma_z.scale_real(0.5 * p.epsilon);
    Ok(ModelOperators {
        a_dag: a.adjoint(),
        a,
        n_hat,
        a_f: a_f_fock.kron(&id2),
        a_f_dag: a_f_fock.adjoint().kron(&id2),
        g_op: number_function(p, |n| p.g(n)),
        sigma_plus: idf.kron(&spin_plus()),
        sigma_minus: idf.kron(&spin_minus()),
        sigma_z,
        d_plus,
        d_minus,
        h0,
    })
}

/// `D(−iη)` on the Fock space from the normal-ordered `Φ_m` expansion.
///
/// Matrix elements are exact for the infinite-dimensional operator; the
/// truncated matrix is therefore not exactly unitary near the cutoff.
pub fn displacement_series(eta: f64, cutoff: usize) -> Operator {
    let pref = (-0.5 * eta * eta).exp();
    fock_from_fn(cutoff, |i, j| {
        // ⟨i| Φ_m(n̂) a^m |j⟩ with m = j − i, or ⟨i| a†^m Φ_m(n̂) |j⟩ with m = i − j.
        let (m, low, high) = if j >= i { (j - i, i, j) } else { (i - j, j, i) };
        let ladder: f64 = ((low + 1)..=high).map(|k| (k as f64).sqrt()).product();
        let amp = phi_m(eta, m as u32, low as u32) * ladder;
        // (−iη)^m
        let phase = C64::new(0.0, -eta).powu(m as u32);
        phase * (pref * amp)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianForm {
    /// `λν(e^{iαt} D(−iη) σ₋ + h.c.)` with `D` from the `Φ_m` series.
    FullD,
    /// `λν(e^{iαt}(1 − iη(a + a†)) σ₋ + h.c.)`.
    Linearized,
    /// `λν(e^{iαt}(g(n̂) + e^{iφ}(a_f + a_f†)) σ₋ + h.c.)` from the profile.
    Generalized,
}

fn drive_poly(p: &IonTrapParams, coupling: &Operator, ops: &ModelOperators) -> Result<TrigPoly> {
    let dim = p.dim();
    let minus = (coupling * &ops.sigma_minus).scale_real(p.lambda * p.nu);
    let plus = minus.adjoint();
    if p.alpha > 0.0 {
        let basis = FrequencyBasis::single(p.alpha)?;
        TrigPoly::from_terms(basis, dim, vec![(Frequency::harmonic(1), minus), (Frequency::harmonic(-1), plus)])
    } else {
        let basis = FrequencyBasis::single(p.nu)?;
        TrigPoly::from_terms(basis, dim, vec![(Frequency::harmonic(0), &minus + &plus)])
    }
}

/// `(H₀, H_drive(t))` in the laboratory frame.
pub fn build_hamiltonian(p: &IonTrapParams, form: HamiltonianForm) -> Result<(Operator, TrigPoly)> {
    let ops = build_operators(p)?;
    let dim = p.dim();
    let coupling = match form {
        HamiltonianForm::FullD => displacement_series(p.eta, p.cutoff).kron(&Operator::identity(2)),
        HamiltonianForm::Linearized => {
            let mut x = Operator::identity(dim);
            x.axpy(c(0.0, -p.eta), &(&ops.a + &ops.a_dag));
            x
        }
        HamiltonianForm::Generalized => {
            let mut x = ops.g_op.clone();
            x.axpy(C64::from_polar(1.0, p.phi), &(&ops.a_f + &ops.a_f_dag));
            x
        }
    };
    let h = drive_poly(p, &coupling, &ops)?;
    Ok((ops.h0, h))
}

/// `e^{iH₀t} H_drive(t) e^{−iH₀t}` as a trigonometric polynomial.
///
/// `H₀` must be diagonal in the product basis. Frequencies of the result are
/// `Δn·ν + Δs·δ`; when `δ` is an integer multiple of `ν` the base is `{ν}`,
/// otherwise `{ν, |δ|}`.
pub fn interaction_picture(p: &IonTrapParams, h0: &Operator, h_int: &TrigPoly) -> Result<TrigPoly> {
    p.validate()?;
    let dim = p.dim();
    if h0.dim() != dim || h_int.dim() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: h0.dim().max(h_int.dim()) });
    }
    let off_diagonal = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).filter(|(i, j)| i != j);
    let scale = h0.max_abs().max(1.0);
    if off_diagonal.map(|(i, j)| h0.get(i, j).norm()).fold(0.0, f64::max) > 1e-12 * scale {
        return Err(Error::Unsupported("interaction picture requires a diagonal H0".into()));
    }

    let delta = p.delta();
    let ratio = delta / p.nu;
    let m = ratio.round();
    let integer = (delta - m * p.nu).abs() <= RESONANCE_TOL * p.nu;
    if !integer && (ratio - m).abs() < 1e-6 {
        log::warn!(
            "detuning {delta} is within {:.1e} of {m}ν; frequencies ν and |δ| nearly collide",
            (ratio - m).abs() * p.nu
        );
    }
    let basis = if integer || delta == 0.0 {
        FrequencyBasis::single(p.nu)?
    } else {
        FrequencyBasis::new(&[p.nu, delta.abs()])?
    };
    let sign = if delta < 0.0 { -1 } else { 1 };

    let mut terms: Vec<(Frequency, Operator)> = Vec::new();
    for (key, a) in h_int.terms() {
        let w_drive = h_int.basis().value(key);
        for i in 0..dim {
            for j in 0..dim {
                let z = a.get(i, j);
                if z.norm() == 0.0 {
                    continue;
                }
                let (ni, si) = (i / 2, i % 2);
                let (nj, sj) = (j / 2, j % 2);
                let dn = ni as i64 - nj as i64;
                // s index 0 is |+⟩, so Δs = (sj − si) in units of the spin flip.
                let ds = sj as i64 - si as i64;
                if (w_drive + ds as f64 * p.alpha).abs() > 1e-9 * (p.alpha + p.nu) {
                    return Err(Error::Unsupported(format!(
                        "drive frequency {w_drive} does not cancel against the laser frequency on element ({i}, {j})"
                    )));
                }
                let key = if basis.len() == 1 {
                    Frequency::harmonic(dn + m as i64 * ds)
                } else {
                    Frequency::new(vec![dn, sign * ds])
                };
                let mut e = Operator::zeros(dim);
                e.set(i, j, z);
                terms.push((key, e));
            }
        }
    }
    TrigPoly::from_terms(basis, dim, terms)
}

/// Interaction-picture drive per unit `λ`, `H̃₁(t)`, for the given form.
pub fn unit_drive(p: &IonTrapParams, form: HamiltonianForm) -> Result<TrigPoly> {
    let unit = p.clone().with_lambda(1.0);
    let (h0, h) = build_hamiltonian(&unit, form)?;
    interaction_picture(&unit, &h0, &h)
}

/// `(𝔥₀, 𝔥₁)` with `𝔥₀ = νn̂ + (δ/2)σ_z` and `𝔥₁ = ν((g(n̂) + e^{iφ}(a_f + a_f†)) ⊗ σ₋ + h.c.)`.
pub fn rotating_frame(p: &IonTrapParams) -> Result<(Operator, Operator)> {
    if !p.is_resonant() {
        return Err(Error::OffResonance { delta: p.delta(), nu: p.nu });
    }
    let ops = build_operators(p)?;
    let h0 = &ops.n_hat.scale_real(p.nu) + &ops.sigma_z.scale_real(0.5 * p.delta());
    let mut coupling = ops.g_op.clone();
    coupling.axpy(C64::from_polar(1.0, p.phi), &(&ops.a_f + &ops.a_f_dag));
    let minus = (&coupling * &ops.sigma_minus).scale_real(p.nu);
    let h1 = &minus + &minus.adjoint();
    Ok((h0, h1))
}

/// Clustered spectrum of `𝔥₀`.
pub fn rotating_frame_spectrum(p: &IonTrapParams) -> Result<Spectrum> {
    spectral_decompose(&rotating_frame(p)?.0, DEFAULT_CLUSTER_TOL)
}

/// `R_t = exp(−(i/2) α σ_z t)`, linking the rotating and laboratory frames.
pub fn frame_rotation(p: &IonTrapParams, t: f64) -> Operator {
    let diag: Vec<C64> = (0..p.dim())
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            C64::from_polar(1.0, -0.5 * p.alpha * s * t)
        })
        .collect();
    Operator::diagonal(&diag)
}

/// `e^{−iH₀t}` for the diagonal laboratory `H₀`.
pub fn free_evolution(p: &IonTrapParams, t: f64) -> Operator {
    let diag: Vec<C64> = (0..p.dim())
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            let e = p.nu * (i / 2) as f64 + 0.5 * p.epsilon * s;
            C64::from_polar(1.0, -e * t)
        })
        .collect();
    Operator::diagonal(&diag)
}

/// Which rotating-wave resonance to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resonance {
    /// `δ ≈ 0`
    Carrier,
    /// `δ ≈ −ν`
    Red,
    /// `δ ≈ +ν`
    Blue,
}

impl Resonance {
    pub fn detuning(self, nu: f64) -> f64 {
        match self {
            Resonance::Carrier => 0.0,
            Resonance::Red => -nu,
            Resonance::Blue => nu,
        }
    }
}

/// Rotating-wave effective Hamiltonian of the linearised model.
pub fn rwa_effective(p: &IonTrapParams, resonance: Resonance) -> Result<Operator> {
    let ops = build_operators(p)?;
    let scale = p.lambda * p.nu;
    let out = match resonance {
        Resonance::Carrier => (&ops.sigma_minus + &ops.sigma_plus).scale_real(scale),
        Resonance::Red => {
            (&(&ops.a_dag * &ops.sigma_plus) - &(&ops.a * &ops.sigma_minus)).scale(c(0.0, scale * p.eta))
        }
        Resonance::Blue => {
            (&(&ops.a * &ops.sigma_plus) - &(&ops.a_dag * &ops.sigma_minus)).scale(c(0.0, scale * p.eta))
        }
    };
    Ok(out)
}

/// `νn̂ + (δ/2)σ_z` at the detuning of `resonance`.
pub fn rwa_reference(p: &IonTrapParams, resonance: Resonance) -> Result<Operator> {
    let ops = build_operators(p)?;
    Ok(&ops.n_hat.scale_real(p.nu) + &ops.sigma_z.scale_real(0.5 * resonance.detuning(p.nu)))
}

/// `∞C₁ = ν(e^{iφ} a_f† ⊗ σ₋ + e^{−iφ} a_f ⊗ σ₊)`, assembled directly.
pub fn closed_form_c1(p: &IonTrapParams) -> Result<Operator> {
    let ops = build_operators(p)?;
    let x = (&ops.a_f_dag * &ops.sigma_minus).scale(C64::from_polar(p.nu, p.phi));
    Ok(&x + &x.adjoint())
}

/// `Z₁(t) = i g(n̂)⊗(e^{−iνt}σ₋ − e^{iνt}σ₊) + (i/2)(e^{−i(2νt−φ)} a_f⊗σ₋ − e^{i(2νt−φ)} a_f†⊗σ₊)`.
pub fn closed_form_z1(p: &IonTrapParams) -> Result<TrigPoly> {
    let ops = build_operators(p)?;
    let i = c(0.0, 1.0);
    let half_i = c(0.0, 0.5);
    let terms = vec![
        (Frequency::harmonic(-1), (&ops.g_op * &ops.sigma_minus).scale(i)),
        (Frequency::harmonic(1), (&ops.g_op * &ops.sigma_plus).scale(-i)),
        (Frequency::harmonic(-2), (&ops.a_f * &ops.sigma_minus).scale(half_i * C64::from_polar(1.0, p.phi))),
        (Frequency::harmonic(2), (&ops.a_f_dag * &ops.sigma_plus).scale(-half_i * C64::from_polar(1.0, -p.phi))),
    ];
    TrigPoly::from_terms(FrequencyBasis::single(p.nu)?, p.dim(), terms)
}

/// `∞Z₁ = Z₁(0) = i g(n̂)⊗(σ₋ − σ₊) + (i/2)(e^{iφ} a_f⊗σ₋ − e^{−iφ} a_f†⊗σ₊)`.
pub fn closed_form_z1_infinity(p: &IonTrapParams) -> Result<Operator> {
    let ops = build_operators(p)?;
    let mut z = (&ops.g_op * &(&ops.sigma_minus - &ops.sigma_plus)).scale(c(0.0, 1.0));
    let x = (&ops.a_f * &ops.sigma_minus).scale(c(0.0, 0.5) * C64::from_polar(1.0, p.phi));
    z += &x;
    z += &x.adjoint();
    Ok(z)
}

/// `sin(x)/x` with the limit 1 at the origin.
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `(exp(−iλ∞C₁t), V₁, V₂)` from their cosine/sine closed forms.
///
/// `V₁ = exp(−iλ·[g-part of Z₁(t)])` and `V₂ = exp(−iλ·[a_f-part of Z₁(t)])`,
/// so `V₁V₂ = exp(−iλZ₁(t)) + O(λ²)`.
pub fn first_order_closed_forms(p: &IonTrapParams, lambda: f64, t: f64) -> Result<(Operator, Operator, Operator)> {
    if !p.is_resonant() {
        return Err(Error::OffResonance { delta: p.delta(), nu: p.nu });
    }
    p.validate()?;
    let dim = p.dim();
    let nf = p.cutoff;
    let idx = |n: usize, s: usize| 2 * n + s; // s = 0: |+⟩, s = 1: |−⟩
    let (plus, minus) = (0, 1);

    let mut exp_c = Operator::zeros(dim);
    let mut v1 = Operator::zeros(dim);
    let mut v2 = Operator::zeros(dim);
    let e_phi = C64::from_polar(1.0, p.phi);
    let w2 = C64::from_polar(1.0, -(2.0 * p.nu * t - p.phi));
    let w1 = C64::from_polar(1.0, -p.nu * t);

    for n in 0..nf {
        let fs_n = p.f_sqrt(n);
        let fs_n1 = p.f_sqrt(n + 1);

        // cos(λν𝖿(n̂)t)⊗|−⟩⟨−| + cos(λν𝖿(n̂+1)t)⊗|+⟩⟨+|
        exp_c.set(idx(n, minus), idx(n, minus), re((lambda * p.nu * fs_n * t).cos()));
        exp_c.set(idx(n, plus), idx(n, plus), re((lambda * p.nu * fs_n1 * t).cos()));
        if n + 1 < nf {
            // −i e^{iφ} sin(λν𝖿(n̂)t)/𝖿(n̂) a_f† ⊗ σ₋ maps |n,+⟩ to |n+1,−⟩.
            let theta = lambda * p.nu * fs_n1 * t;
            let amp = sinc(theta) * lambda * p.nu * t * fs_n1;
            exp_c.set(idx(n + 1, minus), idx(n, plus), c(0.0, -1.0) * e_phi * amp);
            exp_c.set(idx(n, plus), idx(n + 1, minus), c(0.0, -1.0) * e_phi.conj() * amp);
        }

        // cos(λg)⊗I + sin(λg)⊗(e^{−iνt}σ₋ − e^{iνt}σ₊)
        let lg = lambda * p.g(n);
        v1.set(idx(n, plus), idx(n, plus), re(lg.cos()));
        v1.set(idx(n, minus), idx(n, minus), re(lg.cos()));
        v1.set(idx(n, minus), idx(n, plus), w1 * lg.sin());
        v1.set(idx(n, plus), idx(n, minus), -w1.conj() * lg.sin());

        // cos(½λ𝖿(n̂+1))⊗|−⟩⟨−| + cos(½λ𝖿(n̂))⊗|+⟩⟨+| + sine terms coupling |n,+⟩ and |n−1,−⟩.
        v2.set(idx(n, minus), idx(n, minus), re((0.5 * lambda * fs_n1).cos()));
        v2.set(idx(n, plus), idx(n, plus), re((0.5 * lambda * fs_n).cos()));
        if n >= 1 {
            let s = (0.5 * lambda * fs_n).sin();
            v2.set(idx(n - 1, minus), idx(n, plus), w2 * s);
            v2.set(idx(n, plus), idx(n - 1, minus), -w2.conj() * s);
        }
    }
    Ok((exp_c, v1, v2))
}

/// `(1/τ)∫₀^τ H̃ = Σ_ω A_ω avxp(iωτ)`.
pub fn windowed_average(h: &TrigPoly, tau: f64) -> Result<Operator> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!("window {tau} must be positive")));
    }
    let mut out = Operator::zeros(h.dim());
    for (k, a) in h.terms() {
        out.axpy(avxp_imag(h.basis().value(k) * tau), a);
    }
    Ok(out)
}

/// Basis indices `2n + s` with `n ≤ n_max`.
pub fn interior_indices(n_max: usize) -> Vec<usize> {
    (0..=n_max).flat_map(|n| [2 * n, 2 * n + 1]).collect()
}
