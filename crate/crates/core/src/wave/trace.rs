use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Spectrum;

/// Gaussian-smoothed wave trace `Σ_j w(k_j) cos(k_j t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrace {
    pub t: Vec<f64>,
    pub trace: Vec<f64>,
    /// `|Σ_j w(k_j) e^{ik_j t}|`, the phase-free envelope used for peak detection.
    pub envelope: Vec<f64>,
    /// Full width `W` of the time-domain kernel (`±2σ`).
    pub width: f64,
    /// Centre `k_c` of the frequency band.
    pub center: f64,
}

/// Frequency weight `exp(−½((k − k_c)W/4)²)`: a Gaussian band of standard
/// deviation `4/W`, so the time kernel has standard deviation `W/4`.
pub fn window_weight(k: f64, center: f64, width: f64) -> f64 {
    (-0.5 * ((k - center) * width / 4.0).powi(2)).exp()
}

/// Band centre for a spectrum whose top frequency is `k_top`: four band
/// deviations below the top, so the hard cut there is invisible, and never
/// below zero. Pushing the band up uses the high modes, where the trace is
/// closest to its singularity asymptotics.
pub fn band_center(k_top: f64, width: f64) -> f64 {
    (k_top - 16.0 / width).max(0.0)
}

/// A width resolving `W = 24/k_top`, which puts the band centre at `k_top/3`.
pub fn default_width(spec: &Spectrum) -> f64 {
    24.0 / spec.eigenvalues.last().map_or(1.0, |e| e.k)
}

pub fn wave_trace(spec: &Spectrum, width: f64, t: &[f64]) -> WaveTrace {
    let center = band_center(spec.eigenvalues.last().map_or(0.0, |e| e.k), width);
    let ks: Vec<(f64, f64)> = spec.eigenvalues.iter().map(|e| (e.k, window_weight(e.k, center, width))).collect();
    let mut trace = Vec::with_capacity(t.len());
    let mut envelope = Vec::with_capacity(t.len());
    for &tt in t {
        let z: Complex64 = ks.iter().map(|&(k, w)| Complex64::from_polar(w, k * tt)).sum();
        trace.push(z.re);
        envelope.push(z.norm());
    }
    WaveTrace { t: t.to_vec(), trace, envelope, width, center }
}

/// Uniform grid `0, dt, …` up to `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|i| i as f64 * dt).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub t: f64,
    pub height: f64,
    /// Full width at half maximum of the envelope.
    pub fwhm: f64,
    /// No other detected peak within the window width.
    pub isolated: bool,
}

/// Local maxima of the envelope beyond `t = W` whose height is at least
/// `threshold` times the tallest such maximum, refined by a parabola through
/// the three samples around each maximum.
pub fn detect_lengths(trace: &WaveTrace, threshold: f64) -> Vec<Peak> {
    let e = &trace.envelope;
    let t = &trace.t;
    if e.len() < 3 {
        return Vec::new();
    }
    let mut cand = Vec::new();
    for i in 1..e.len() - 1 {
        if t[i] <= trace.width || !(e[i] > e[i - 1] && e[i] >= e[i + 1]) {
            continue;
        }
        let (a, b, c) = (e[i - 1], e[i], e[i + 1]);
        let den = a - 2.0 * b + c;
        let shift = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
        let dt = t[i + 1] - t[i];
        let height = b - 0.25 * (a - c) * shift;
        let half = 0.5 * height;
        let cross = |dir: isize| -> f64 {
            let mut j = i as isize;
            while j + dir >= 0 && ((j + dir) as usize) < e.len() && e[(j + dir) as usize] > half {
                j += dir;
            }
            let (j0, j1) = (j as usize, (j + dir).clamp(0, e.len() as isize - 1) as usize);
            if j0 == j1 || e[j0] == e[j1] {
                return t[j0];
            }
            t[j0] + (t[j1] - t[j0]) * (e[j0] - half) / (e[j0] - e[j1])
        };
        cand.push(Peak { t: t[i] + shift * dt, height, fwhm: cross(1) - cross(-1), isolated: true });
    }
    let top = cand.iter().map(|p| p.height).fold(0.0, f64::max);
    let mut peaks: Vec<Peak> = cand.into_iter().filter(|p| p.height >= threshold * top).collect();
    let positions: Vec<f64> = peaks.iter().map(|p| p.t).collect();
    for p in &mut peaks {
        p.isolated = positions.iter().filter(|&&q| (q - p.t).abs() < trace.width).count() == 1;
    }
    peaks
}
