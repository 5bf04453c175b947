//! One-photon response of the two-sided atom-cavity system in the bad-cavity
//! limit: the absorbed/re-emitted amplitude, side-resolved output amplitudes
//! and detection probabilities, and the analytic spectral coefficients.
//!
//! The effective kernels act on the co-moving coordinate x. The reflection
//! side carries only the re-emitted amplitude; the transmission side is the
//! interference of the directly transmitted pulse with the re-emitted one:
//!
//! ```text
//! amp_L(x) = a(x)
//! amp_R(x) = psi_in(x) + a(x)
//! a(x)     = -(1/2) Int_x^inf exp(-(x'-x)/2) psi_in(x') dx'
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulses::{Grid, PulseSpec, Shape};
use crate::quad::{erfcx, simpson_with_estimate};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Default absolute tolerance on the Richardson error estimate of the
/// one-photon detection probabilities.
pub const DEFAULT_ONE_PHOTON_TOL: f64 = 1e-6;

/// Physical cavity parameters. Rates share one unit (e.g. GHz); the derived
/// dipole relaxation rate is `gamma = g^2 / kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    g: f64,
    kappa: f64,
}

impl CavityParams {
    pub fn new(g: f64, kappa: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter(format!("coupling g must be positive, got {g}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cavity decay kappa must be positive, got {kappa}"
            )));
        }
        Ok(Self { g, kappa })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.g * self.g / self.kappa
    }

    /// Bad-cavity check, `kappa >= 4 g`.
    pub fn is_bad_cavity(&self) -> bool {
        self.kappa >= 4.0 * self.g
    }
}

/// Absorbed/re-emitted amplitude `a(x)`, evaluated in closed form.
///
/// Gaussian pulses use the scaled complementary error function; rectangular
/// pulses integrate the exponential kernel piecewise. Both match the adaptive
/// quadrature of the defining integral to better than 1e-10.
pub(crate) fn absorbed(spec: &PulseSpec, x: f64) -> f64 {
    let d = spec.duration();
    let u = x - spec.center();
    match spec.shape() {
        Shape::Gaussian => {
            let b = SQRT_2 * u / d + SQRT_2 * d / 8.0;
            let coef = d * SQRT_PI / (4.0 * SQRT_2);
            if b >= 0.0 {
                -coef * erfcx(b) * spec.amplitude(x)
            } else {
                // erfcx reflection, grouped so no factor overflows
                let amp = (2.0 / (d * SQRT_PI)).sqrt();
                -coef
                    * amp
                    * (2.0 * (0.5 * u + d * d / 32.0).exp()
                        - erfcx(-b) * (-2.0 * u * u / (d * d)).exp())
            }
        }
        Shape::Rectangular => {
            let lo = -0.5 * d;
            let hi = 0.5 * d;
            let amp = 1.0 / d.sqrt();
            if u >= hi {
                0.0
            } else if u >= lo {
                -amp * (1.0 - (-0.5 * (hi - u)).exp())
            } else {
                -amp * ((0.5 * (u - lo)).exp() - (0.5 * (u - hi)).exp())
            }
        }
    }
}

/// Spec-level absorbed-amplitude evaluation; rejects non-finite coordinates.
pub fn absorbed_amplitude(spec: &PulseSpec, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { name: "x", value: x });
    }
    Ok(absorbed(spec, x))
}

/// Side-resolved one-photon output sampled on a grid.
#[derive(Debug, Clone)]
pub struct OnePhotonResult {
    grid: Grid,
    amp_l: Vec<f64>,
    amp_r: Vec<f64>,
    p_l: f64,
    p_r: f64,
    err_est: f64,
}

impl OnePhotonResult {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Reflection-side amplitude samples.
    pub fn amp_l(&self) -> &[f64] {
        &self.amp_l
    }

    /// Transmission-side amplitude samples.
    pub fn amp_r(&self) -> &[f64] {
        &self.amp_r
    }

    pub fn p_l(&self) -> f64 {
        self.p_l
    }

    pub fn p_r(&self) -> f64 {
        self.p_r
    }

    /// Richardson estimate of the quadrature error on the probabilities.
    pub fn error_estimate(&self) -> f64 {
        self.err_est
    }
}

/// One-photon output amplitudes and detection probabilities.
pub fn one_photon_output(spec: &PulseSpec, grid: &Grid) -> Result<OnePhotonResult> {
    one_photon_output_tol(spec, grid, DEFAULT_ONE_PHOTON_TOL)
}

/// Same as [`one_photon_output`] with an explicit convergence tolerance.
pub fn one_photon_output_tol(spec: &PulseSpec, grid: &Grid, tol: f64) -> Result<OnePhotonResult> {
    let n = grid.n();
    if n < 5 || n % 4 != 1 {
        return Err(Error::InvalidGrid(format!(
            "probability quadrature needs n = 1 (mod 4) grid points, got {n}"
        )));
    }
    let h = grid.spacing();
    let mut amp_l = Vec::with_capacity(n);
    let mut amp_r = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.x(i);
        let a = absorbed(spec, x);
        amp_l.push(a);
        amp_r.push(spec.amplitude(x) + a);
    }
    let sq_l: Vec<f64> = amp_l.iter().map(|v| v * v).collect();
    let sq_r: Vec<f64> = amp_r.iter().map(|v| v * v).collect();
    let (p_l, err_l) = simpson_with_estimate(&sq_l, h)?;
    let (p_r, err_r) = simpson_with_estimate(&sq_r, h)?;
    let err = err_l.max(err_r);
    if err > tol {
        return Err(Error::Convergence { context: "one-photon probability quadrature", achieved: err, required: tol });
    }
    Ok(OnePhotonResult { grid: *grid, amp_l, amp_r, p_l, p_r, err_est: err })
}

/// Analytic reflection and transmission coefficients of the effective
/// one-photon kernels, `r(k) = -(1/2)/(1/2 + ik)` and `t(k) = ik/(1/2 + ik)`
/// in `Gamma = c = 1` units. Used for invariant checks.
pub fn spectral_coefficients(k: f64) -> Result<(Complex64, Complex64)> {
    if !k.is_finite() {
        return Err(Error::NonFinite { name: "k", value: k });
    }
    let denom = Complex64::new(0.5, k);
    let r = Complex64::new(-0.5, 0.0) / denom;
    let t = Complex64::new(0.0, k) / denom;
    Ok((r, t))
}
