//! Ambiguity function of the unit-energy waveform
//!
//! ```text
//! A(tau, omega) = int s(u) s*(u - tau) exp(j omega u) du
//! ```
//!
//! in closed form as a double sum over pulse pairs, plus a quadrature oracle
//! that integrates the definition directly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lehmer::Permutation;
use crate::special::{sinc, Quadrature};
use crate::waveform::{evaluate, tone_frequencies, tone_omegas, WaveformParams};

/// Ambiguity function of a single rectangular pulse of width `T`:
/// `int_0^T rect(v - tau) exp(j omega v) dv` over the overlap of `[0, T)` and
/// `[tau, tau + T)`.
///
/// Evaluated as `exp(j omega (a+b)/2) (b - a) sinc(omega (b - a) / 2)` on the
/// overlap `[a, b]`, which has no singularity at `omega = 0`.
pub fn pulse_af(tau: f64, omega: f64, pulse_width: f64) -> Complex64 {
    let a = tau.max(0.0);
    let b = (pulse_width + tau).min(pulse_width);
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let len = b - a;
    Complex64::from_polar(len * sinc(0.5 * omega * len), 0.5 * omega * (a + b))
}

fn check_perm(perm: &Permutation, params: &WaveformParams) -> Result<()> {
    if perm.len() != params.m {
        return Err(Error::Mismatch(format!(
            "permutation has {} entries, waveform has M={}",
            perm.len(),
            params.m
        )));
    }
    Ok(())
}

/// Precomputed tone data for repeated evaluation.
#[derive(Debug, Clone)]
pub struct AfEvaluator {
    omegas: Vec<f64>,
    pulse_width: f64,
}

impl AfEvaluator {
    pub fn new(perm: &Permutation, params: &WaveformParams) -> Result<Self> {
        params.validate()?;
        check_perm(perm, params)?;
        Ok(Self {
            omegas: tone_omegas(perm, params)?,
            pulse_width: params.pulse_width,
        })
    }

    pub fn m(&self) -> usize {
        self.omegas.len()
    }

    /// Complex ambiguity function at `(tau, omega)`; energy is normalized to
    /// one regardless of the waveform parameters.
    pub fn eval(&self, tau: f64, omega: f64) -> Complex64 {
        let m_len = self.m();
        let t = self.pulse_width;
        let mut acc = Complex64::new(0.0, 0.0);
        // Only pulse offsets d = n - m with |tau + d T| < T overlap.
        let d_lo = ((-tau / t).floor() as i64 - 1).max(-(m_len as i64 - 1));
        let d_hi = ((-tau / t).ceil() as i64 + 1).min(m_len as i64 - 1);
        for d in d_lo..=d_hi {
            let shift = tau + d as f64 * t;
            if shift.abs() >= t {
                continue;
            }
            for m in 0..m_len {
                let n = m as i64 + d;
                if n < 0 || n >= m_len as i64 {
                    continue;
                }
                let n = n as usize;
                let (wm, wn) = (self.omegas[m], self.omegas[n]);
                let p = pulse_af(shift, omega - wn + wm, t);
                let phase = omega * m as f64 * t - wn * ((m as f64 - n as f64) * t - tau);
                acc += p * Complex64::from_polar(1.0, phase);
            }
        }
        acc / (m_len as f64 * t)
    }
}

pub fn complex_af(
    perm: &Permutation,
    params: &WaveformParams,
    tau: f64,
    omega: f64,
) -> Result<Complex64> {
    Ok(AfEvaluator::new(perm, params)?.eval(tau, omega))
}

/// Direct quadrature of the defining integral, on the continuous waveform.
///
/// The integrand is smooth between the pulse boundaries of `s(u)` and of
/// `s(u - tau)`, so each such segment is integrated with composite
/// Gauss-Legendre.
pub fn af_numeric_oracle(
    perm: &Permutation,
    params: &WaveformParams,
    tau: f64,
    omega: f64,
) -> Result<Complex64> {
    let unit = params.clone().with_energy(1.0)?;
    let freqs = tone_frequencies(perm, &unit)?;
    let t = unit.pulse_width;
    let total = unit.duration();
    let lo = tau.max(0.0);
    let hi = (total + tau).min(total);
    if hi <= lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut cuts: Vec<f64> = (0..=unit.m)
        .flat_map(|k| [k as f64 * t, tau + k as f64 * t])
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);

    let quad = Quadrature::new(24);
    // Enough panels to resolve the largest phase rate over a pulse.
    let max_rate = omega.abs()
        + 2.0 * freqs.iter().fold(0.0f64, |a, f| a.max(f.abs())) * std::f64::consts::PI * 2.0;
    let panels = 2 + (max_rate * t / 8.0).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        acc += quad.integrate(a, b, panels, |u| {
            evaluate(&freqs, &unit, u)
                * evaluate(&freqs, &unit, u - tau).conj()
                * Complex64::from_polar(1.0, omega * u)
        });
    }
    Ok(acc)
}

/// `|A|` on a delay-Doppler grid. `values[i * omega_axis.len() + j]` holds
/// the cell at `(tau_axis[i], omega_axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct AFGrid {
    /// Delays in seconds.
    pub tau_axis: Vec<f64>,
    /// Doppler shifts in rad/s.
    pub omega_axis: Vec<f64>,
    pub values: Vec<f64>,
}

impl AFGrid {
    pub fn get(&self, i_tau: usize, i_omega: usize) -> f64 {
        self.values[i_tau * self.omega_axis.len() + i_omega]
    }

    /// Largest cell as `(i_tau, i_omega, value)`.
    pub fn argmax(&self) -> Option<(usize, usize, f64)> {
        let w = self.omega_axis.len();
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, &v)| (k / w, k % w, v))
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let w = self.omega_axis.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.tau_axis[k / w], self.omega_axis[k % w], v))
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `|A|` over the grid, evaluated in parallel on the current rayon pool.
pub fn af_grid(
    perm: &Permutation,
    params: &WaveformParams,
    tau_axis: &[f64],
    omega_axis: &[f64],
) -> Result<AFGrid> {
    let af = AfEvaluator::new(perm, params)?;
    let w = omega_axis.len();
    let values = (0..tau_axis.len() * w)
        .into_par_iter()
        .map(|k| af.eval(tau_axis[k / w], omega_axis[k % w]).norm())
        .collect();
    Ok(AFGrid {
        tau_axis: tau_axis.to_vec(),
        omega_axis: omega_axis.to_vec(),
        values,
    })
}

/// `|A(tau, 0)|`, the matched-filter output without Doppler mismatch.
pub fn zero_doppler_cut(
    perm: &Permutation,
    params: &WaveformParams,
    tau_axis: &[f64],
) -> Result<Vec<f64>> {
    let af = AfEvaluator::new(perm, params)?;
    Ok(tau_axis.iter().map(|&tau| af.eval(tau, 0.0).norm()).collect())
}

/// `|A(0, omega)|`, the zero-delay response.
pub fn zero_delay_cut(
    perm: &Permutation,
    params: &WaveformParams,
    omega_axis: &[f64],
) -> Result<Vec<f64>> {
    let af = AfEvaluator::new(perm, params)?;
    Ok(omega_axis.iter().map(|&w| af.eval(0.0, w).norm()).collect())
}

/// Closed form of the zero-delay cut, `|sinc(omega M T / 2)|`. The envelope
/// is constant, so this holds for every permutation.
pub fn zero_delay_closed_form(params: &WaveformParams, omega: f64) -> f64 {
    sinc(0.5 * omega * params.duration()).abs()
}

/// Signed covariance of the cells with `|A| > threshold`, in normalized
/// coordinates `(-tau / T, omega T)`.
///
/// The first coordinate is the echo delay: `A(tau, omega)` is the response
/// to an echo delayed by `-tau` under the defining integral's lag sign, so a
/// positive value means the ridge runs through the quadrants where a later
/// echo pairs with a higher Doppler. Returns `None` if no cell qualifies.
pub fn ridge_covariance(grid: &AFGrid, params: &WaveformParams, threshold: f64) -> Option<f64> {
    let t = params.pulse_width;
    let pts: Vec<(f64, f64)> = grid
        .cells()
        .filter(|&(_, _, v)| v > threshold)
        .map(|(tau, w, _)| (-tau / t, w * t))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / n)
}

/// First and second time moments of `|s(u)|^2` for the unit-energy waveform,
/// by quadrature.
pub fn time_moments(perm: &Permutation, params: &WaveformParams) -> Result<(f64, f64)> {
    let unit = params.clone().with_energy(1.0)?;
    let freqs = tone_frequencies(perm, &unit)?;
    let t = unit.pulse_width;
    let quad = Quadrature::new(8);
    let mut first = 0.0;
    let mut second = 0.0;
    for m in 0..unit.m {
        let (a, b) = (m as f64 * t, (m + 1) as f64 * t);
        first += quad.integrate(a, b, 1, |u| u * evaluate(&freqs, &unit, u).norm_sqr());
        second += quad.integrate(a, b, 1, |u| u * u * evaluate(&freqs, &unit, u).norm_sqr());
    }
    Ok((first, second))
}
