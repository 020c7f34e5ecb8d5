use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unipert::expansion_td::{interaction_factor, solve_td_gauged, solve_td_mean, ConstantChoice};
use unipert::expansion_ti::{evolution_ti, reduced_rank_form, solve_ti};
use unipert::linalg::{adjoint_conjugate, hermitian_exponential, unitarity_defect, C64};
use unipert::models::{
    build_hamiltonian, closed_form_c1, phi_m, phi_m_laguerre, rotating_frame, unit_drive, HamiltonianForm,
    IonTrapParams,
};
use unipert::oracle::integrate_at;
use unipert::{Operator, TrigPoly};

fn random_operator(r: &mut ChaCha8Rng, n: usize) -> Operator {
    Operator::from_fn(n, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn random_drive(seed: u64, n: usize, nu: f64) -> TrigPoly {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let h0 = random_operator(&mut r, n);
    let mut terms = vec![(0, &h0 + &h0.adjoint())];
    for k in 1..=2 {
        let a = random_operator(&mut r, n);
        terms.push((-k, a.adjoint()));
        terms.push((k, a));
    }
    TrigPoly::from_harmonics(nu, n, terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phi_series_matches_laguerre(eta in 0.0f64..1.5, m in 0u32..4, n in 0u32..14) {
        let a = phi_m(eta, m, n);
        let b = phi_m_laguerre(eta, m, n);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn td_factors_are_unitary(seed in any::<u64>(), lambda in 0.0f64..0.5, t in 0.0f64..20.0, order in 1usize..=3) {
        let drive = random_drive(seed, 3, 1.1);
        let mean = solve_td_mean(&[drive.clone()], order).unwrap();
        let fm = solve_td_gauged(&[drive], order, &[], &ConstantChoice::Mean).unwrap();
        prop_assert!(unitarity_defect(&interaction_factor(&mean, lambda, t).unwrap()) < 1e-11);
        prop_assert!(unitarity_defect(&interaction_factor(&fm, lambda, t).unwrap()) < 1e-11);
    }

    #[test]
    fn interaction_picture_of_full_displacement(t in 0.0f64..10.0, eta in 0.05f64..0.4) {
        let p = IonTrapParams { eta, ..IonTrapParams::lamb_dicke(eta, 6) };
        let drive = unit_drive(&p, HamiltonianForm::FullD).unwrap();
        let unit = p.clone().with_lambda(1.0);
        let (h0, h) = build_hamiltonian(&unit, HamiltonianForm::FullD).unwrap();
        let u = hermitian_exponential(&h0, -t).unwrap();
        let direct = adjoint_conjugate(&u, &h.evaluate(t)).unwrap();
        prop_assert!(direct.distance(&drive.evaluate(t)) < 1e-10);
    }

    #[test]
    fn lamb_dicke_first_order_agrees(eta in 0.05f64..0.6) {
        let p = IonTrapParams::lamb_dicke(eta, 8);
        let drive = unit_drive(&p, HamiltonianForm::Generalized).unwrap();
        let td = solve_td_mean(&[drive], 1).unwrap();
        let (h0, h1) = rotating_frame(&p).unwrap();
        let ti = solve_ti(&h0, &[h1], 1, None).unwrap();
        let c1 = closed_form_c1(&p).unwrap();
        prop_assert!(td.constants().unwrap()[0].distance(&c1) < 1e-12);
        prop_assert!(ti.c_list[0].distance(&c1) < 1e-10);
        prop_assert!(ti.z_list[0].distance(&td.z0_list[0]) < 1e-10);
    }

    #[test]
    fn ti_forms_agree(lambda in 0.0f64..0.3, t in 0.0f64..15.0) {
        let p = IonTrapParams::linearized(0.1, 6);
        let (h0, h1) = rotating_frame(&p).unwrap();
        let sol = solve_ti(&h0, &[h1], 2, None).unwrap();
        let a = evolution_ti(&sol, lambda, t).unwrap();
        let b = reduced_rank_form(&sol, lambda, t).unwrap();
        prop_assert!(a.distance(&b) < 1e-10);
    }
}

#[test]
fn frames_give_the_same_propagator() {
    // e^{iH₀t} U_lab(t) = e^{i𝔥₀t} e^{-i(𝔥₀+λ𝔥₁)t} for the resonant ion trap.
    let p = IonTrapParams::linearized(0.1, 6);
    let lambda = 0.07;
    let (h0r, h1r) = rotating_frame(&p).unwrap();
    let drive = unit_drive(&p, HamiltonianForm::Generalized).unwrap().scale(C64::new(lambda, 0.0));
    let times = [0.9, 4.0];
    let trace = integrate_at(&drive, &times, 1e-12).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let full = &h0r + &h1r.scale_real(lambda);
        let frame = &hermitian_exponential(&h0r, -t).unwrap() * &hermitian_exponential(&full, t).unwrap();
        assert!(frame.distance(&trace.u_values[i + 1]) < 1e-9);
    }
}
