//! Oracle-route validations: convergence of the finite-kappa model to the
//! effective kernels, cross-checks between the two finite-kappa routes, and
//! convergence order of the brute-force two-photon quadrature.

use qndsim::one_photon::{absorbed_amplitude, one_photon_output, CavityParams};
use qndsim::oracle::{
    brute_force_two_photon, finite_kappa_output, full_model_propagate, suggested_t_final,
};
use qndsim::pulses::{default_grid, Grid, PulseSpec};
use qndsim::quad::simpson;
use qndsim::two_photon::{two_photon_amplitude, Channel};

/// L2 distance between the exact finite-kappa output and the effective
/// kernels for a d = 40 Gaussian pulse.
fn effective_kernel_distance(kappa_over_g: f64) -> f64 {
    let spec = PulseSpec::gaussian(40.0).unwrap();
    let grid = Grid::new(-220.0, 220.0, 4401).unwrap();
    let params = CavityParams::new(kappa_over_g, kappa_over_g * kappa_over_g).unwrap();
    let out = finite_kappa_output(&params, &spec, &grid).unwrap();
    let h = grid.spacing();
    let sq: Vec<f64> = (0..grid.n())
        .map(|i| {
            let eff_l = absorbed_amplitude(&spec, grid.x(i)).unwrap();
            let eff_r = spec.amplitude(grid.x(i)) + eff_l;
            (out.psi_l[i] - eff_l).powi(2) + (out.phi_r[i] - eff_r).powi(2)
        })
        .collect();
    simpson(&sq, h).sqrt()
}

#[test]
fn effective_kernel_convergence_ladder() {
    // distance to the effective kernels falls monotonically as the cavity
    // gets worse at fixed Gamma
    let distances: Vec<f64> = [4.0, 8.0, 16.0].iter().map(|&r| effective_kernel_distance(r)).collect();
    println!("kappa/g ladder L2 distances: {distances:?}");
    assert!(distances[0] > distances[1] && distances[1] > distances[2], "{distances:?}");
    assert!(distances[2] < 1e-5);
}

#[test]
fn full_model_agrees_with_analytic_reduction() {
    // same Hamiltonian, independent numerics: mode-resolved propagation vs
    // the eliminated-bath ODE, kappa/g = 10 on a short pulse. The bath
    // truncation perturbs the response by ~omega/(pi K), so the short pulse
    // (bandwidth ~1) needs a cutoff well above the pulse band.
    let params = CavityParams::new(10.0, 100.0).unwrap();
    let spec = PulseSpec::gaussian(2.0).unwrap();
    let run = full_model_propagate(&params, &spec, suggested_t_final(&spec), 64.0, 2561).unwrap();

    let grid = Grid::new(-30.0, 30.0, 1201).unwrap();
    let reduced = finite_kappa_output(&params, &spec, &grid).unwrap();
    let h = grid.spacing();
    let pr_sq: Vec<f64> = reduced.phi_r.iter().map(|v| v * v).collect();
    let p_r_reduced = simpson(&pr_sq, h);
    let rel = (run.p_r - p_r_reduced).abs() / p_r_reduced;
    println!("p_R mode-resolved {} vs reduced {} (rel {rel:.2e})", run.p_r, p_r_reduced);
    assert!(rel < 0.02, "relative disagreement {rel}");
}

#[test]
fn short_pulse_regime_deviates_more() {
    // d kappa = 50 (marginal) deviates from the effective kernel more than
    // d kappa = 4000 (deep in the slow-pulse regime)
    let params = CavityParams::new(10.0, 100.0).unwrap();

    let slow = PulseSpec::gaussian(40.0).unwrap();
    let g_slow = default_grid(&slow, &slow);
    let eff_slow = one_photon_output(&slow, &g_slow).unwrap().p_r();
    let run_slow =
        full_model_propagate(&params, &slow, suggested_t_final(&slow), 2.0, 1601).unwrap();
    let dev_slow = (run_slow.p_r - eff_slow).abs() / eff_slow;

    let fast = PulseSpec::gaussian(0.5).unwrap();
    let g_fast = default_grid(&fast, &fast);
    let eff_fast = one_photon_output(&fast, &g_fast).unwrap().p_r();
    let run_fast =
        full_model_propagate(&params, &fast, suggested_t_final(&fast), 40.0, 401).unwrap();
    let dev_fast = (run_fast.p_r - eff_fast).abs() / eff_fast;

    println!("relative deviation: d=40 {dev_slow:.4e}, d=0.5 {dev_fast:.4e}");
    assert!(dev_fast > dev_slow, "expected d=0.5 ({dev_fast}) above d=40 ({dev_slow})");
}

#[test]
fn brute_force_quadrature_convergence_order() {
    let s = PulseSpec::gaussian(10.0).unwrap();
    let fast = two_photon_amplitude(&s, &s, Channel::RR, 0.0, 0.0).unwrap();
    let errs: Vec<f64> = [500usize, 1000, 2000]
        .iter()
        .map(|&n| (brute_force_two_photon(&s, &s, Channel::RR, 0.0, 0.0, n).unwrap() - fast).abs())
        .collect();
    println!("brute-force errors vs n: {errs:?}");
    let order01 = (errs[0] / errs[1]).log2();
    let order12 = (errs[1] / errs[2]).log2();
    assert!(order01 >= 1.0 && order12 >= 1.0, "orders {order01}, {order12}");
}

#[test]
fn brute_force_linear_term_factorizes() {
    // subtracting the closed-form blockade term from the brute-force total
    // must leave the product of one-photon outputs, i.e. the Riemann pieces
    // reproduce the closed-form factors independently on every channel
    let s1 = PulseSpec::gaussian(8.0).unwrap();
    let s2 = PulseSpec::gaussian(12.0).unwrap();
    for ch in Channel::ALL {
        for &(x1, x2) in &[(-3.0, 1.0), (0.5, 0.5), (2.0, -6.0)] {
            let total = brute_force_two_photon(&s1, &s2, ch, x1, x2, 6000).unwrap();
            let n = qndsim::two_photon::nonlinear_amplitude(&s1, &s2, x1, x2).unwrap();
            let lin = qndsim::two_photon::linear_amplitude(&s1, &s2, ch, x1, x2).unwrap();
            assert!(
                (total - n - lin).abs() < 2e-6,
                "{:?} ({x1},{x2}): {} vs {}",
                ch,
                total - n,
                lin
            );
        }
    }
}
