//! Independent ground-truth computations used to validate the effective
//! kernels: finite-kappa one-photon dynamics and direct Riemann quadrature
//! of the two-photon kernel integrals.
//!
//! Two finite-kappa routes are provided. [`full_model_propagate`] integrates
//! the mode-resolved field-atom-cavity Schroedinger dynamics on a symmetric
//! k grid (diagonal plus rank-one structure, no spatial boundary artifacts).
//! [`finite_kappa_output`] eliminates the flat-coupling continuum exactly,
//! leaving a two-variable driven ODE; it makes neither the bad-cavity nor the
//! slow-pulse approximation and carries no bath-discretization error, which
//! matters when scanning kappa upward at fixed cutoff.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::one_photon::CavityParams;
use crate::pulses::{Grid, PulseSpec, Shape};
use crate::two_photon::{Channel, Side};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const TWO_PI: f64 = std::f64::consts::TAU;

/// Step-halving acceptance threshold for the propagator.
pub const DEFAULT_STEP_TOL: f64 = 1e-8;
/// Allowed closed-system norm drift.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Symmetric wavenumber grid with `n` modes on `[-cutoff, cutoff]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    cutoff: f64,
    n: usize,
}

impl KGrid {
    pub fn new(cutoff: f64, n: usize) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) || n < 16 {
            return Err(Error::KResolution(format!(
                "need positive cutoff and at least 16 modes, got K={cutoff}, n={n}"
            )));
        }
        Ok(Self { cutoff, n })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.cutoff / (self.n - 1) as f64
    }

    pub fn k(&self, i: usize) -> f64 {
        -self.cutoff + self.spacing() * i as f64
    }
}

/// State of the one-photon field-atom-cavity system on the k grid.
#[derive(Debug, Clone)]
pub struct FullModelState {
    pub excited_amp: Complex64,
    pub cavity_amp: Complex64,
    pub field_l: Vec<Complex64>,
    pub field_r: Vec<Complex64>,
    pub k_grid: KGrid,
}

impl FullModelState {
    /// Closed-system norm `|Phi|^2 + |Lambda|^2 + sum (|psi|^2+|phi|^2) dk`.
    pub fn norm(&self) -> f64 {
        let dk = self.k_grid.spacing();
        let fields: f64 = self
            .field_l
            .iter()
            .zip(&self.field_r)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        self.excited_amp.norm_sqr() + self.cavity_amp.norm_sqr() + fields * dk
    }
}

/// Result of a full-model propagation.
#[derive(Debug, Clone)]
pub struct FullModelRun {
    pub state: FullModelState,
    /// Left/right field occupation at `t_final` (all of it outgoing once the
    /// pulse has fully scattered).
    pub p_l: f64,
    pub p_r: f64,
    pub norm_drift: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Initial pulse-center position (negative, incoming region).
    pub pulse_offset: f64,
}

impl FullModelRun {
    /// Outgoing real-space amplitudes in the pulse-centered co-moving
    /// coordinate, reconstructed with the mirror pi phase flip.
    pub fn reconstruct_output(&self, grid: &Grid) -> (Vec<Complex64>, Vec<Complex64>) {
        let kg = &self.state.k_grid;
        let dk = kg.spacing();
        let coef = dk / TWO_PI.sqrt();
        let mut out_l = Vec::with_capacity(grid.n());
        let mut out_r = Vec::with_capacity(grid.n());
        for i in 0..grid.n() {
            let r = grid.x(i) + self.t_final + self.pulse_offset;
            let mut sl = Complex64::new(0.0, 0.0);
            let mut sr = Complex64::new(0.0, 0.0);
            for j in 0..kg.n() {
                let phase = Complex64::from_polar(1.0, kg.k(j) * r);
                sl += phase * self.state.field_l[j];
                sr += phase * self.state.field_r[j];
            }
            out_l.push(-coef * sl);
            out_r.push(-coef * sr);
        }
        (out_l, out_r)
    }
}

/// Momentum-space amplitude of the input pulse, `(2 pi)^{-1/2} FT`;
/// unit-normalized, `int |spectrum|^2 dk = 1`.
fn pulse_spectrum(spec: &PulseSpec, k: f64) -> f64 {
    let d = spec.duration();
    match spec.shape() {
        Shape::Gaussian => (d / (2.0 * SQRT_PI)).sqrt() * (-d * d * k * k / 8.0).exp(),
        Shape::Rectangular => {
            if k.abs() < 1e-12 {
                (d / TWO_PI).sqrt()
            } else {
                (1.0 / d.sqrt()) * 2.0 * (0.5 * k * d).sin() / k / TWO_PI.sqrt()
            }
        }
    }
}

/// Suggested propagation time: the pulse starts at `-(2.5 d + 5)` and must
/// clear the cavity and travel out again.
pub fn suggested_t_final(spec: &PulseSpec) -> f64 {
    2.0 * (2.5 * spec.duration() + 5.0) + 10.0
}

struct OdeSystem {
    g: f64,
    coupling: f64, // sqrt(kappa / pi)
    ks: Vec<f64>,
    dk: f64,
}

impl OdeSystem {
    fn n(&self) -> usize {
        self.ks.len()
    }

    #[inline]
    fn deriv(&self, y: &[Complex64], out: &mut [Complex64]) {
        let n = self.n();
        let phi = y[0];
        let lam = y[1];
        let mut field_sum = Complex64::new(0.0, 0.0);
        for v in &y[2..] {
            field_sum += v;
        }
        let i_g = Complex64::new(0.0, self.g);
        out[0] = -i_g * lam;
        out[1] = -i_g * phi - self.coupling * self.dk * field_sum;
        let drive = self.coupling * lam;
        for j in 0..n {
            let rot = Complex64::new(0.0, -self.ks[j]);
            out[2 + j] = rot * y[2 + j] + drive;
            out[2 + n + j] = rot * y[2 + n + j] + drive;
        }
    }
}

fn rk4_propagate(sys: &OdeSystem, y0: &[Complex64], t_final: f64, dt_target: f64) -> Vec<Complex64> {
    let steps = (t_final / dt_target).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for _ in 0..steps {
        sys.deriv(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        sys.deriv(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        sys.deriv(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3[i];
        }
        sys.deriv(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
    y
}

/// Propagate the mode-resolved one-photon dynamics from a pulse incoming on
/// the left field, with step-halving error control on the fixed-step RK4.
///
/// The grid must resolve the pulse spectrum (`dk <= 0.1/d`, `K >= 20/d`).
/// Cutoffs far below `10 kappa/c` leave a small non-Markovian truncation
/// imprint on the bath (sub-percent on detection probabilities in the
/// bad-cavity runs used here); push `k_cutoff` up when that matters.
pub fn full_model_propagate(
    params: &CavityParams,
    spec: &PulseSpec,
    t_final: f64,
    k_cutoff: f64,
    n_modes: usize,
) -> Result<FullModelRun> {
    let kg = KGrid::new(k_cutoff, n_modes)?;
    let d = spec.duration();
    if kg.spacing() > 0.1 / d {
        return Err(Error::KResolution(format!(
            "dk = {:.3e} exceeds 0.1/d = {:.3e}",
            kg.spacing(),
            0.1 / d
        )));
    }
    if k_cutoff < 20.0 / d {
        return Err(Error::KResolution(format!(
            "cutoff {k_cutoff} below 20/d = {}",
            20.0 / d
        )));
    }
    let r0 = -(2.5 * d + 5.0);
    if !(t_final.is_finite() && t_final >= 2.0 * r0.abs()) {
        return Err(Error::InvalidParameter(format!(
            "t_final must be at least {} so the pulse fully scatters",
            2.0 * r0.abs()
        )));
    }

    let n = kg.n();
    let sys = OdeSystem {
        g: params.g(),
        coupling: (params.kappa() / std::f64::consts::PI).sqrt(),
        ks: (0..n).map(|i| kg.k(i)).collect(),
        dk: kg.spacing(),
    };
    let mut y0 = vec![Complex64::new(0.0, 0.0); 2 + 2 * n];
    for j in 0..n {
        let k = kg.k(j);
        y0[2 + j] = pulse_spectrum(spec, k) * Complex64::from_polar(1.0, -k * r0);
    }
    let norm0 = state_norm(&y0, kg.spacing());

    let mut dt = (0.2 / (2.0 * params.kappa())).min(0.3 / k_cutoff).min(2e-3);
    let mut result = None;
    for _ in 0..4 {
        let coarse = rk4_propagate(&sys, &y0, t_final, dt);
        let fine = rk4_propagate(&sys, &y0, t_final, 0.5 * dt);
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max);
        if diff / 15.0 <= DEFAULT_STEP_TOL {
            result = Some((fine, 0.5 * dt, diff / 15.0));
            break;
        }
        dt *= 0.5;
    }
    let (y, dt_used, _err) = result.ok_or(Error::Convergence {
        context: "full-model step halving",
        achieved: f64::NAN,
        required: DEFAULT_STEP_TOL,
    })?;

    let dk = kg.spacing();
    let norm_t = state_norm(&y, dk);
    let drift = (norm_t - norm0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift { drift, limit: NORM_DRIFT_LIMIT });
    }
    let p_l: f64 = y[2..2 + n].iter().map(|v| v.norm_sqr()).sum::<f64>() * dk;
    let p_r: f64 = y[2 + n..].iter().map(|v| v.norm_sqr()).sum::<f64>() * dk;
    let state = FullModelState {
        excited_amp: y[0],
        cavity_amp: y[1],
        field_l: y[2..2 + n].to_vec(),
        field_r: y[2 + n..].to_vec(),
        k_grid: kg,
    };
    Ok(FullModelRun { state, p_l, p_r, norm_drift: drift, dt: dt_used, t_final, pulse_offset: r0 })
}

fn state_norm(y: &[Complex64], dk: f64) -> f64 {
    let fields: f64 = y[2..].iter().map(|v| v.norm_sqr()).sum();
    y[0].norm_sqr() + y[1].norm_sqr() + fields * dk
}

/// Outgoing amplitudes of the exact finite-kappa model (continuum bath
/// eliminated analytically), in the pulse-centered co-moving coordinate.
#[derive(Debug, Clone)]
pub struct FiniteKappaOutput {
    pub psi_l: Vec<f64>,
    pub phi_r: Vec<f64>,
}

/// Exact finite-kappa one-photon output on `grid`.
///
/// The cavity amplitude obeys `Lam' = -i g Phi - 2 kappa Lam - sqrt(2 kappa)
/// psi_in(t)`; the outgoing amplitudes are the reflected pulse plus the
/// re-emission `-sqrt(2 kappa) Lam` evaluated at the retarded time. With a
/// real input pulse `Lam` stays real and `Phi` purely imaginary.
pub fn finite_kappa_output(
    params: &CavityParams,
    spec: &PulseSpec,
    grid: &Grid,
) -> Result<FiniteKappaOutput> {
    let g = params.g();
    let kappa = params.kappa();
    let d = spec.duration();
    let r0 = -(2.5 * d + 5.0);
    let t_end = r0.abs() + grid.hi().abs().max(grid.lo().abs()) + 5.0;
    let dt = (0.05 / (2.0 * kappa)).min(2e-4);
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let sq = (2.0 * kappa).sqrt();

    // lam real, phi = i * p with p real
    let mut lam_hist = Vec::with_capacity(steps + 1);
    let (mut lam, mut p) = (0.0_f64, 0.0_f64);
    lam_hist.push(lam);
    let drive = |t: f64| spec.amplitude(-t - r0);
    let f = |t: f64, lam: f64, p: f64| -> (f64, f64) {
        (g * p - 2.0 * kappa * lam - sq * drive(t), -g * lam)
    };
    let mut t = 0.0;
    for _ in 0..steps {
        let (l1, p1) = f(t, lam, p);
        let (l2, p2) = f(t + 0.5 * dt, lam + 0.5 * dt * l1, p + 0.5 * dt * p1);
        let (l3, p3) = f(t + 0.5 * dt, lam + 0.5 * dt * l2, p + 0.5 * dt * p2);
        let (l4, p4) = f(t + dt, lam + dt * l3, p + dt * p3);
        lam += dt / 6.0 * (l1 + 2.0 * (l2 + l3) + l4);
        p += dt / 6.0 * (p1 + 2.0 * (p2 + p3) + p4);
        t += dt;
        lam_hist.push(lam);
    }

    let lam_at = |tau: f64| -> f64 {
        if tau <= 0.0 || tau >= t_end {
            return 0.0;
        }
        let s = tau / dt;
        let i = s.floor() as usize;
        let frac = s - i as f64;
        lam_hist[i] * (1.0 - frac) + lam_hist[(i + 1).min(steps)] * frac
    };

    let mut psi_l = Vec::with_capacity(grid.n());
    let mut phi_r = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let xi = grid.x(i);
        let reemit = -sq * lam_at(-(xi + r0));
        psi_l.push(-spec.amplitude(xi) + reemit);
        phi_r.push(reemit);
    }
    Ok(FiniteKappaOutput { psi_l, phi_r })
}

/// Two-photon output amplitude by direct Riemann quadrature of the kernel
/// integrals, without the separable-factorization shortcut: the re-emission
/// pieces come from midpoint sums and the blockade term from a genuine
/// double sum over `x1', x2' > max(x1, x2)`. `n` is the point count per axis.
pub fn brute_force_two_photon(
    spec1: &PulseSpec,
    spec2: &PulseSpec,
    ch: Channel,
    x1: f64,
    x2: f64,
    n: usize,
) -> Result<f64> {
    if !x1.is_finite() {
        return Err(Error::NonFinite { name: "x1", value: x1 });
    }
    if !x2.is_finite() {
        return Err(Error::NonFinite { name: "x2", value: x2 });
    }
    if n < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 points per axis, got {n}")));
    }
    let upper = (spec1.center() + 2.5 * spec1.duration())
        .max(spec2.center() + 2.5 * spec2.duration())
        + 30.0;

    let abs_brute = |spec: &PulseSpec, x: f64| -> f64 {
        if x >= upper {
            return 0.0;
        }
        let h = (upper - x) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let xp = x + (i as f64 + 0.5) * h;
            acc += (-0.5 * (xp - x)).exp() * spec.amplitude(xp);
        }
        -0.5 * acc * h
    };
    let side_brute = |spec: &PulseSpec, side: Side, x: f64| -> f64 {
        match side {
            Side::L => abs_brute(spec, x),
            Side::R => spec.amplitude(x) + abs_brute(spec, x),
        }
    };

    let lin = side_brute(spec1, ch.side1(), x1) * side_brute(spec2, ch.side2(), x2);

    let m = x1.max(x2);
    let mut nonlin = 0.0;
    if m < upper {
        let h = (upper - m) / n as f64;
        for i in 0..n {
            let x1p = m + (i as f64 + 0.5) * h;
            let w1 = (-0.5 * (x1p - x1)).exp() * spec1.amplitude(x1p);
            if w1 == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for j in 0..n {
                let x2p = m + (j as f64 + 0.5) * h;
                inner += (-0.5 * (x2p - x2)).exp() * spec2.amplitude(x2p);
            }
            nonlin += w1 * inner;
        }
        nonlin *= -0.25 * h * h;
    }
    Ok(lin + nonlin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::default_grid;
    use crate::quad::simpson;
    use crate::two_photon::two_photon_amplitude;
    use crate::one_photon::absorbed_amplitude;

    #[test]
    fn k_resolution_validated() {
        let params = CavityParams::new(10.0, 100.0).unwrap();
        let spec = PulseSpec::gaussian(40.0).unwrap();
        // dk too coarse
        assert!(full_model_propagate(&params, &spec, 220.0, 2.0, 101).is_err());
        // cutoff too small
        assert!(full_model_propagate(&params, &spec, 220.0, 0.2, 801).is_err());
        // t_final too small
        assert!(full_model_propagate(&params, &spec, 50.0, 2.0, 1601).is_err());
    }

    #[test]
    fn full_model_short_pulse_norm_conserved() {
        let params = CavityParams::new(10.0, 100.0).unwrap();
        let spec = PulseSpec::gaussian(2.0).unwrap();
        let run =
            full_model_propagate(&params, &spec, suggested_t_final(&spec), 10.0, 801).unwrap();
        assert!(run.norm_drift < 1e-6, "drift = {:e}", run.norm_drift);
        assert!((run.state.norm() - 1.0).abs() < 1e-6);
        assert!((run.p_l + run.p_r - 1.0).abs() < 1e-6);
        // atom and cavity have decayed
        assert!(run.state.excited_amp.norm() < 1e-4);
        assert!(run.state.cavity_amp.norm() < 1e-4);
    }

    #[test]
    fn finite_kappa_matches_effective_at_large_kappa() {
        let spec = PulseSpec::gaussian(40.0).unwrap();
        let grid = Grid::new(-220.0, 220.0, 2001).unwrap();
        let params = CavityParams::new(40.0, 1600.0).unwrap(); // kappa/g = 40, Gamma = 1
        let out = finite_kappa_output(&params, &spec, &grid).unwrap();
        let h = grid.spacing();
        let diff: Vec<f64> = (0..grid.n())
            .map(|i| {
                let a = absorbed_amplitude(&spec, grid.x(i)).unwrap();
                (out.psi_l[i] - a).powi(2)
            })
            .collect();
        let l2 = simpson(&diff, h).sqrt();
        assert!(l2 < 1e-5, "L2 distance = {l2:e}");
        // unitarity of the reduction
        let pl: Vec<f64> = out.psi_l.iter().map(|v| v * v).collect();
        let pr: Vec<f64> = out.phi_r.iter().map(|v| v * v).collect();
        let total = simpson(&pl, h) + simpson(&pr, h);
        assert!((total - 1.0).abs() < 1e-6, "total = {total}");
    }

    #[test]
    fn brute_force_matches_fast_path_spot_check() {
        let s1 = PulseSpec::gaussian(10.0).unwrap();
        let s2 = PulseSpec::gaussian(10.0).unwrap();
        let fast = two_photon_amplitude(&s1, &s2, Channel::RL, -1.0, 0.5).unwrap();
        let brute = brute_force_two_photon(&s1, &s2, Channel::RL, -1.0, 0.5, 4000).unwrap();
        assert!((fast - brute).abs() < 2e-6, "{fast} vs {brute}");
        assert!(brute_force_two_photon(&s1, &s2, Channel::RL, 0.0, 0.0, 10).is_err());
    }

    #[test]
    fn default_grid_is_simpson_ready_for_oracle_use() {
        let spec = PulseSpec::gaussian(40.0).unwrap();
        let g = default_grid(&spec, &spec);
        assert_eq!(g.n() % 4, 1);
    }
}
