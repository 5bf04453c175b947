//! Normalized single-photon input wave packets in the co-moving coordinate
//! and the discretization grid they are sampled on.
//!
//! Working units throughout the crate: `c = 1` and `Gamma = 1`, so durations
//! are in `1/Gamma` and coordinates in `c/Gamma`. Input amplitudes are real
//! and positive; global phases drop out of every probability.

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Supported wave-packet shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Gaussian,
    Rectangular,
}

/// A normalized single-photon wave packet: `duration` is the pulse length d
/// (units of 1/Gamma), `center` its position in the co-moving coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    shape: Shape,
    duration: f64,
    center: f64,
}

impl PulseSpec {
    pub fn new(shape: Shape, duration: f64) -> Result<Self> {
        Self::with_center(shape, duration, 0.0)
    }

    pub fn gaussian(duration: f64) -> Result<Self> {
        Self::new(Shape::Gaussian, duration)
    }

    pub fn rectangular(duration: f64) -> Result<Self> {
        Self::new(Shape::Rectangular, duration)
    }

    pub fn with_center(shape: Shape, duration: f64, center: f64) -> Result<Self> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::InvalidPulse(format!(
                "duration must be positive and finite, got {duration}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::NonFinite { name: "center", value: center });
        }
        Ok(Self { shape, duration, center })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Wave-packet amplitude at `x`. Unit L2 norm over the real line:
    /// Gaussian `sqrt(2/(d sqrt(pi))) exp(-2(x-c)^2/d^2)`, rectangular
    /// `1/sqrt(d)` on a width-d support.
    pub fn amplitude(&self, x: f64) -> f64 {
        let d = self.duration;
        let u = x - self.center;
        match self.shape {
            Shape::Gaussian => (2.0 / (d * SQRT_PI)).sqrt() * (-2.0 * u * u / (d * d)).exp(),
            Shape::Rectangular => {
                if u.abs() <= 0.5 * d {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Spec-level amplitude evaluation; rejects non-finite coordinates.
pub fn pulse_amplitude(spec: &PulseSpec, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { name: "x", value: x });
    }
    Ok(spec.amplitude(x))
}

/// Uniform sampling grid on `[lo, hi]` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidGrid(format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2, got {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.lo + self.spacing() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| self.lo + h * i as f64).collect()
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.lo) / self.spacing()).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }
}

/// Default co-moving grid covering both input pulses and the `exp(-x/2)`
/// re-emission tails of the outputs.
///
/// Domain is `[-(5 max(d) + 20), 5 max(d) + 20]` (widened by the pulse
/// centers if nonzero); spacing is at most `min(0.05, min(d)/50)`. The point
/// count is rounded up to 1 (mod 4) so that probability integrals can carry
/// the stride-2 convergence check.
pub fn default_grid(spec_s: &PulseSpec, spec_a: &PulseSpec) -> Grid {
    let dmax = spec_s.duration().max(spec_a.duration());
    let dmin = spec_s.duration().min(spec_a.duration());
    let offset = spec_s.center().abs().max(spec_a.center().abs());
    let half = 5.0 * dmax + 20.0 + offset;
    let target = 0.05_f64.min(dmin / 50.0);
    let mut n = ((2.0 * half) / target).ceil() as usize + 1;
    while n % 4 != 1 {
        n += 1;
    }
    Grid::new(-half, half, n).expect("default grid parameters are always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn gaussian_peak_value() {
        // sqrt(2/sqrt(pi)) for d = 1
        let p = PulseSpec::gaussian(1.0).unwrap();
        assert!((p.amplitude(0.0) - 1.062_251_932_027_196_8).abs() < 1e-14);
    }

    #[test]
    fn rectangular_outside_support_is_zero() {
        let p = PulseSpec::rectangular(4.0).unwrap();
        assert_eq!(p.amplitude(5.0), 0.0);
        assert!((p.amplitude(1.9) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_norm_unit_by_quadrature() {
        let p = PulseSpec::gaussian(40.0).unwrap();
        let r = quad::integrate(|x| p.amplitude(x).powi(2), -200.0, 200.0, 1e-12, 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "norm = {}", r.value);
    }

    #[test]
    fn default_grid_domains() {
        let a = PulseSpec::gaussian(40.0).unwrap();
        let s = PulseSpec::gaussian(40.0).unwrap();
        let g = default_grid(&s, &a);
        assert_eq!(g.lo(), -220.0);
        assert_eq!(g.hi(), 220.0);
        assert!(g.spacing() <= 0.05);
        assert_eq!(g.n() % 4, 1);

        let s2 = PulseSpec::gaussian(12.5).unwrap();
        let g2 = default_grid(&s2, &a);
        assert_eq!(g2.lo(), -220.0);
        assert_eq!(g2.hi(), 220.0);
    }

    #[test]
    fn gaussian_tail_mass_below_budget() {
        // mass of |psi|^2 outside [-220, 220] for d = 40
        let p = PulseSpec::gaussian(40.0).unwrap();
        let tail = quad::integrate_to_infinity(|x| p.amplitude(x).powi(2), 220.0, 1e-10, 1e-18)
            .unwrap()
            .value;
        assert!(2.0 * tail < 1e-10, "tail mass = {:e}", 2.0 * tail);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(PulseSpec::gaussian(0.0).is_err());
        assert!(PulseSpec::gaussian(-3.0).is_err());
        assert!(PulseSpec::gaussian(f64::NAN).is_err());
        assert!(pulse_amplitude(&PulseSpec::gaussian(1.0).unwrap(), f64::INFINITY).is_err());
        assert!(Grid::new(1.0, 1.0, 5).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }
}
