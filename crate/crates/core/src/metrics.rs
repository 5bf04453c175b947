//! QND figures of merit built from the one- and two-photon channel
//! probabilities: heralding success probability, efficiency, duration
//! root-finding on the trade-off curve, conditional signal shapes after a
//! heralding detection, weak-light scaling, and physical-unit scenarios.
//!
//! The heralding convention: photon 1 is the ancillary photon (transmission
//! to the right heralds the signal), photon 2 is the signal photon, so
//!
//! ```text
//! P_suc = P(R1, R2) + P(R1, L2)
//! EQND  = P_suc / (P_1ph(R; d_ancilla) + P_suc)
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::one_photon::one_photon_output;
use crate::pulses::{default_grid, Grid, PulseSpec};
use crate::quad::simpson;
use crate::two_photon::{
    two_photon_amplitude, two_photon_probabilities_tol, Channel, DEFAULT_TWO_PHOTON_TOL,
};

/// Tolerance on `|P_suc(d) - target|` for the duration root-finder.
pub const DEFAULT_ROOT_TOL: f64 = 1e-4;

/// QND efficiency and success probability at one duration pair. Durations in
/// units of `1/Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QndMetrics {
    pub d_signal: f64,
    pub d_ancilla: f64,
    pub p_suc: f64,
    pub eqnd: f64,
    pub p1r_ancilla: f64,
}

/// Weight of the one-photon component when the ancilla is weak light
/// (vacuum + one-photon superposition).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLightSpec {
    weight: f64,
}

impl WeakLightSpec {
    pub fn new(one_photon_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&one_photon_weight) || !one_photon_weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "one-photon weight must lie in [0, 1], got {one_photon_weight}"
            )));
        }
        Ok(Self { weight: one_photon_weight })
    }

    pub fn one_photon_weight(&self) -> f64 {
        self.weight
    }
}

/// Cavity rates in GHz plus a pulse duration in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScenario {
    pub g_ghz: f64,
    pub kappa_ghz: f64,
    pub pulse_seconds: f64,
}

impl PhysicalScenario {
    pub fn new(g_ghz: f64, kappa_ghz: f64, pulse_seconds: f64) -> Result<Self> {
        for (name, v) in [("g_ghz", g_ghz), ("kappa_ghz", kappa_ghz), ("pulse_seconds", pulse_seconds)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { g_ghz, kappa_ghz, pulse_seconds })
    }

    /// Dipole relaxation rate `g^2 / kappa` in GHz.
    pub fn gamma_ghz(&self) -> f64 {
        self.g_ghz * self.g_ghz / self.kappa_ghz
    }

    /// Dimensionless pulse duration `Gamma * T`; rates are taken as given
    /// (GHz x ns), so 33 GHz times 500 ps gives d = 16.5.
    pub fn dimensionless_duration(&self) -> f64 {
        self.gamma_ghz() * self.pulse_seconds * 1e9
    }

    /// Bad-cavity condition `kappa >= 4 g`; violated scenarios still compute
    /// but the effective theory degrades.
    pub fn bad_cavity_ok(&self) -> bool {
        self.kappa_ghz >= 4.0 * self.g_ghz
    }
}

/// Sweep/root-finding mode: equal durations, or signal duration varying with
/// the ancilla fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    Symmetric,
    AsymmetricFixedAncilla(f64),
}

/// QND metrics for Gaussian pulses of the given durations on the default grid.
pub fn qnd_metrics(d_signal: f64, d_ancilla: f64) -> Result<QndMetrics> {
    let signal = PulseSpec::gaussian(d_signal)?;
    let ancilla = PulseSpec::gaussian(d_ancilla)?;
    let grid = default_grid(&signal, &ancilla);
    qnd_metrics_with(&signal, &ancilla, &grid, DEFAULT_TWO_PHOTON_TOL)
}

/// QND metrics on a caller-supplied grid and quadrature tolerance.
pub fn qnd_metrics_with(
    signal: &PulseSpec,
    ancilla: &PulseSpec,
    grid: &Grid,
    tol: f64,
) -> Result<QndMetrics> {
    Ok(qnd_metrics_detailed(signal, ancilla, grid, tol)?.metrics)
}

/// [`QndMetrics`] together with the achieved quadrature error estimates.
#[derive(Debug, Clone, Copy)]
pub struct MetricsComputation {
    pub metrics: QndMetrics,
    /// Worst per-channel Richardson estimate of the 2-D quadrature.
    pub two_photon_error: f64,
    /// Richardson estimate of the ancilla transmittance quadrature.
    pub one_photon_error: f64,
}

/// QND metrics plus achieved quadrature errors.
pub fn qnd_metrics_detailed(
    signal: &PulseSpec,
    ancilla: &PulseSpec,
    grid: &Grid,
    tol: f64,
) -> Result<MetricsComputation> {
    let two = two_photon_probabilities_tol(ancilla, signal, grid, tol)?;
    let one = one_photon_output(ancilla, grid)?;
    let p_suc = two.probability(Channel::RR) + two.probability(Channel::RL);
    let p1r = one.p_r();
    let two_err = Channel::ALL.iter().map(|&c| two.error_estimate(c)).fold(0.0, f64::max);
    Ok(MetricsComputation {
        metrics: QndMetrics {
            d_signal: signal.duration(),
            d_ancilla: ancilla.duration(),
            p_suc,
            eqnd: p_suc / (p1r + p_suc),
            p1r_ancilla: p1r,
        },
        two_photon_error: two_err,
        one_photon_error: one.error_estimate(),
    })
}

/// Metrics when the ancillary photon is replaced by weak light: both herald
/// rates scale by the one-photon weight, so the efficiency is unchanged. A
/// zero weight leaves the efficiency undefined (NaN).
pub fn weak_light_metrics(base: &QndMetrics, weak: &WeakLightSpec) -> QndMetrics {
    let w = weak.weight;
    let p_suc = w * base.p_suc;
    let p1r = w * base.p1r_ancilla;
    let denom = p1r + p_suc;
    QndMetrics {
        d_signal: base.d_signal,
        d_ancilla: base.d_ancilla,
        p_suc,
        eqnd: if denom > 0.0 { p_suc / denom } else { f64::NAN },
        p1r_ancilla: p1r,
    }
}

/// Convert a physical scenario to dimensionless units and evaluate the
/// symmetric-duration metrics.
pub fn physical_scenario(s: &PhysicalScenario) -> Result<QndMetrics> {
    let d = s.dimensionless_duration();
    qnd_metrics(d, d)
}

/// Metrics at each duration in `d_values` (positive, ascending). Points are
/// independent and evaluated in parallel; output order follows the input.
pub fn sweep(mode: SweepMode, d_values: &[f64]) -> Result<Vec<QndMetrics>> {
    if d_values.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one duration".into()));
    }
    for w in d_values.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidParameter("sweep durations must be strictly ascending".into()));
        }
    }
    if d_values[0] <= 0.0 || !d_values.iter().all(|d| d.is_finite()) {
        return Err(Error::InvalidParameter("sweep durations must be positive and finite".into()));
    }
    d_values
        .par_iter()
        .map(|&d| match mode {
            SweepMode::Symmetric => qnd_metrics(d, d),
            SweepMode::AsymmetricFixedAncilla(da) => qnd_metrics(d, da),
        })
        .collect()
}

fn metrics_at(mode: SweepMode, d: f64) -> Result<QndMetrics> {
    match mode {
        SweepMode::Symmetric => qnd_metrics(d, d),
        SweepMode::AsymmetricFixedAncilla(da) => qnd_metrics(d, da),
    }
}

/// Bisection for the duration at which `P_suc` equals `target`, relying on
/// the monotone decrease of the success probability with duration.
pub fn find_duration_for_success(target: f64, mode: SweepMode) -> Result<(f64, QndMetrics)> {
    find_duration_for_success_tol(target, mode, DEFAULT_ROOT_TOL)
}

/// Same as [`find_duration_for_success`] with an explicit target tolerance.
pub fn find_duration_for_success_tol(
    target: f64,
    mode: SweepMode,
    tol: f64,
) -> Result<(f64, QndMetrics)> {
    if !(target.is_finite() && target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("target must lie in (0, 1), got {target}")));
    }
    let mut lo = 1.0;
    let mut hi = 100.0;
    let mut m_lo = metrics_at(mode, lo)?;
    while m_lo.p_suc < target {
        lo *= 0.5;
        if lo < 0.2 {
            return Err(Error::NoBracket { target });
        }
        m_lo = metrics_at(mode, lo)?;
    }
    let mut m_hi = metrics_at(mode, hi)?;
    while m_hi.p_suc > target {
        hi *= 2.0;
        if hi > 3200.0 {
            return Err(Error::NoBracket { target });
        }
        m_hi = metrics_at(mode, hi)?;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let m = metrics_at(mode, mid)?;
        if (m.p_suc - target).abs() < tol {
            return Ok((mid, m));
        }
        if m.p_suc > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence { context: "duration bisection", achieved: (hi - lo).abs(), required: tol })
}

/// Heralded signal pulse shape: the (R1, L2) output amplitude sliced at the
/// ancilla detection coordinate, sampled in `delta = x_signal - x_detect` and
/// normalized to unit L2 norm over the window.
#[derive(Debug, Clone)]
pub struct ConditionalShape {
    pub deltas: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Squared peak of the normalized slice; 1/2 for the ideal
    /// `exp(-Gamma |delta| / 2)` shape.
    pub aleph: f64,
}

const SHAPE_WINDOW: f64 = 8.0;
const SHAPE_SAMPLES: usize = 641;

/// Conditional signal shape after detecting the ancilla at `x_detect`.
///
/// Valid in the long-pulse regime where the heralded channels are dominated
/// by the blockade term. The trailing side (`delta <= 0`, signal re-emitted
/// after the detection) decays at exactly `Gamma/2` and is independent of
/// the detection coordinate; the leading side carries the signal pulse's own
/// envelope.
pub fn conditional_signal_shape(
    signal: &PulseSpec,
    ancilla: &PulseSpec,
    x_detect: f64,
) -> Result<ConditionalShape> {
    if !x_detect.is_finite() {
        return Err(Error::NonFinite { name: "x_detect", value: x_detect });
    }
    let n = SHAPE_SAMPLES;
    let h = 2.0 * SHAPE_WINDOW / (n - 1) as f64;
    let deltas: Vec<f64> = (0..n).map(|i| -SHAPE_WINDOW + h * i as f64).collect();
    let mut raw = Vec::with_capacity(n);
    for &dl in &deltas {
        raw.push(two_photon_amplitude(ancilla, signal, Channel::RL, x_detect, x_detect + dl)?);
    }
    let peak = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = (signal.duration() * ancilla.duration()).sqrt();
    if peak * scale < 1e-8 {
        return Err(Error::DetectionOutOfRange { x_detect });
    }
    let sq: Vec<f64> = raw.iter().map(|v| v * v).collect();
    let norm = simpson(&sq, h).sqrt();
    let amplitude: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let aleph = amplitude[n / 2] * amplitude[n / 2];
    Ok(ConditionalShape { deltas, amplitude, aleph })
}

/// Least-squares exponential decay rate of `|amplitude|` against `|delta|`
/// over the sub-window `lo <= delta <= hi`. Returns `None` with fewer than
/// two usable samples.
pub fn fit_exponential_decay(
    deltas: &[f64],
    amplitude: &[f64],
    lo: f64,
    hi: f64,
) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&d, &a) in deltas.iter().zip(amplitude) {
        if d >= lo && d <= hi && a.abs() > 1e-300 {
            xs.push(d.abs());
            ys.push(a.abs().ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some(-(n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::Shape;

    #[test]
    fn symmetric_d40_headline_numbers() {
        let m = qnd_metrics(40.0, 40.0).unwrap();
        // frozen from the validated quadrature; paper quotes 8% and 0.49%
        assert!((m.p_suc - 0.082_81).abs() < 5e-4, "p_suc = {}", m.p_suc);
        assert!((m.eqnd - 0.943_84).abs() < 5e-4, "eqnd = {}", m.eqnd);
        assert!((m.p1r_ancilla - 4.926_8e-3).abs() < 1e-6);
        // defining identity holds to rounding
        assert!((m.eqnd * (m.p1r_ancilla + m.p_suc) - m.p_suc).abs() < 1e-15);
    }

    #[test]
    fn weak_light_scaling() {
        let base = QndMetrics {
            d_signal: 40.0,
            d_ancilla: 40.0,
            p_suc: 0.08,
            eqnd: 0.08 / 0.0849,
            p1r_ancilla: 0.0049,
        };
        let w1 = weak_light_metrics(&base, &WeakLightSpec::new(1.0).unwrap());
        assert_eq!(w1, base);
        let w01 = weak_light_metrics(&base, &WeakLightSpec::new(0.1).unwrap());
        assert!((w01.p_suc - 0.008).abs() < 1e-15);
        assert!((w01.eqnd - base.eqnd).abs() < 1e-15);
        let w0 = weak_light_metrics(&base, &WeakLightSpec::new(0.0).unwrap());
        assert_eq!(w0.p_suc, 0.0);
        assert!(w0.eqnd.is_nan());
        assert!(WeakLightSpec::new(1.5).is_err());
        assert!(WeakLightSpec::new(-0.1).is_err());
    }

    #[test]
    fn physical_scenario_conversion() {
        let s = PhysicalScenario::new(132.0, 4.0 * 132.0, 500e-12).unwrap();
        assert_eq!(s.gamma_ghz(), 33.0);
        assert!((s.dimensionless_duration() - 16.5).abs() < 1e-12);
        assert!(s.bad_cavity_ok());
        assert!(PhysicalScenario::new(132.0, 528.0, 0.0).is_err());
        let tight = PhysicalScenario::new(132.0, 3.0 * 132.0, 500e-12).unwrap();
        assert!(!tight.bad_cavity_ok());
    }

    #[test]
    fn conditional_shape_rectangular_trailing_decay() {
        let signal = PulseSpec::new(Shape::Rectangular, 5.0).unwrap();
        let ancilla = PulseSpec::new(Shape::Rectangular, 80.0).unwrap();
        let shape = conditional_signal_shape(&signal, &ancilla, 0.0).unwrap();
        let rate = fit_exponential_decay(&shape.deltas, &shape.amplitude, -6.0, -0.25).unwrap();
        assert!((rate - 0.5).abs() < 1e-3, "rate = {rate}");
        assert!(shape.aleph > 0.3 && shape.aleph < 0.7, "aleph = {}", shape.aleph);
    }

    #[test]
    fn conditional_shape_detection_must_be_significant() {
        let signal = PulseSpec::new(Shape::Rectangular, 5.0).unwrap();
        let ancilla = PulseSpec::new(Shape::Rectangular, 80.0).unwrap();
        assert!(matches!(
            conditional_signal_shape(&signal, &ancilla, -200.0),
            Err(Error::DetectionOutOfRange { .. })
        ));
    }

    #[test]
    fn sweep_validates_input() {
        assert!(sweep(SweepMode::Symmetric, &[]).is_err());
        assert!(sweep(SweepMode::Symmetric, &[10.0, 5.0]).is_err());
        assert!(sweep(SweepMode::Symmetric, &[-1.0, 5.0]).is_err());
    }

    #[test]
    fn root_target_validated() {
        assert!(find_duration_for_success(0.0, SweepMode::Symmetric).is_err());
        assert!(find_duration_for_success(1.2, SweepMode::Symmetric).is_err());
    }
}
