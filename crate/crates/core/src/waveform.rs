//! Stepped-frequency waveform synthesis.
//!
//! The waveform for permutation `pi` is a train of `M` rectangular pulses of
//! width `T`; pulse `m` carries the tone `f0 + pi[m] * delta_f`, restarted in
//! phase at the pulse boundary:
//!
//! ```text
//! s(t) = sqrt(E / (M T)) * sum_m rect(t - mT) * exp(j 2 pi f_m (t - mT))
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lehmer::Permutation;

/// Relative tolerance used when checking that `delta_f * T` is an integer.
const ORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformParams {
    /// Number of tones (and pulses).
    pub m: usize,
    /// Pulse width in seconds.
    pub pulse_width: f64,
    /// Tone spacing in Hz.
    pub delta_f: f64,
    /// Frequency of tone index 0, Hz.
    pub f0: f64,
    /// Total waveform energy.
    pub energy: f64,
    /// Samples per pulse.
    pub oversampling: usize,
}

impl WaveformParams {
    /// Parameters with the default oversampling of `8 * M * (delta_f T)`.
    pub fn new(m: usize, pulse_width: f64, delta_f: f64, f0: f64, energy: f64) -> Result<Self> {
        let mut p = Self {
            m,
            pulse_width,
            delta_f,
            f0,
            energy,
            oversampling: 0,
        };
        let step = p.checked_tone_step()?;
        p.oversampling = 8 * m * step;
        p.validate()?;
        Ok(p)
    }

    /// Unit-energy waveform at baseband with `delta_f = 1/T`.
    pub fn unit(m: usize, pulse_width: f64) -> Result<Self> {
        Self::new(m, pulse_width, 1.0 / pulse_width, 0.0, 1.0)
    }

    pub fn with_oversampling(mut self, oversampling: usize) -> Result<Self> {
        self.oversampling = oversampling;
        self.validate()?;
        Ok(self)
    }

    pub fn with_energy(mut self, energy: f64) -> Result<Self> {
        self.energy = energy;
        self.validate()?;
        Ok(self)
    }

    /// The integer `n = delta_f * T`.
    pub fn tone_step(&self) -> usize {
        (self.delta_f * self.pulse_width).round() as usize
    }

    fn checked_tone_step(&self) -> Result<usize> {
        if !(self.pulse_width > 0.0 && self.pulse_width.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "pulse width must be positive, got {}",
                self.pulse_width
            )));
        }
        let x = self.delta_f * self.pulse_width;
        let n = x.round();
        if !(n >= 1.0 && (x - n).abs() <= ORTHOGONALITY_TOL * n) {
            return Err(Error::InvalidParams(format!(
                "tone spacing times pulse width must be a positive integer for orthogonal tones, got {x}"
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParams("M must be at least 1".into()));
        }
        let step = self.checked_tone_step()?;
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "energy must be positive, got {}",
                self.energy
            )));
        }
        if !self.f0.is_finite() {
            return Err(Error::InvalidParams("f0 must be finite".into()));
        }
        let nyquist = 2 * self.m * step;
        if self.oversampling < nyquist {
            return Err(Error::InvalidParams(format!(
                "oversampling {} below the Nyquist minimum {nyquist} samples per pulse",
                self.oversampling
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.m as f64 * self.pulse_width
    }

    pub fn sample_interval(&self) -> f64 {
        self.pulse_width / self.oversampling as f64
    }

    pub fn sample_rate(&self) -> f64 {
        self.oversampling as f64 / self.pulse_width
    }

    /// Constant envelope `sqrt(E / (M T))`.
    pub fn amplitude(&self) -> f64 {
        (self.energy / self.duration()).sqrt()
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.f0
    }

    fn check_perm(&self, perm: &Permutation) -> Result<()> {
        if perm.len() != self.m {
            return Err(Error::Mismatch(format!(
                "permutation has {} entries but M = {}",
                perm.len(),
                self.m
            )));
        }
        Ok(())
    }
}

/// Uniformly sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub t0: f64,
}

impl ComplexSignal {
    pub fn zeros(len: usize, sample_rate: f64, t0: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            sample_rate,
            t0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt()
    }

    /// Riemann-sum energy `sum |s|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt()
    }

    pub fn same_grid(&self, other: &ComplexSignal) -> bool {
        self.len() == other.len()
            && (self.sample_rate - other.sample_rate).abs() <= 1e-12 * self.sample_rate
            && (self.t0 - other.t0).abs() <= 1e-12 * self.dt()
    }
}

/// Per-pulse tone frequencies `f_m = f0 + perm[m] * delta_f`.
pub fn tone_frequencies(perm: &Permutation, params: &WaveformParams) -> Result<Vec<f64>> {
    params.checked_tone_step()?;
    params.check_perm(perm)?;
    Ok(perm
        .as_slice()
        .iter()
        .map(|&q| params.f0 + q as f64 * params.delta_f)
        .collect())
}

/// Angular tone frequencies `omega_m = 2 pi f_m`.
pub fn tone_omegas(perm: &Permutation, params: &WaveformParams) -> Result<Vec<f64>> {
    Ok(tone_frequencies(perm, params)?
        .into_iter()
        .map(|f| 2.0 * PI * f)
        .collect())
}

/// Continuous-time evaluation of the waveform. Pulse boundaries are
/// left-closed: `t = mT` belongs to pulse `m`, and `s(MT) = 0`.
pub fn evaluate(freqs: &[f64], params: &WaveformParams, t: f64) -> Complex64 {
    let pulse = (t / params.pulse_width).floor();
    if pulse < 0.0 || pulse >= params.m as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let m = pulse as usize;
    let local = t - m as f64 * params.pulse_width;
    Complex64::from_polar(params.amplitude(), 2.0 * PI * freqs[m] * local)
}

/// Samples the waveform on `[0, MT)` at `oversampling` samples per pulse.
pub fn synthesize(perm: &Permutation, params: &WaveformParams) -> Result<ComplexSignal> {
    params.validate()?;
    let freqs = tone_frequencies(perm, params)?;
    let os = params.oversampling;
    let dt = params.sample_interval();
    let amp = params.amplitude();
    let mut samples = Vec::with_capacity(params.m * os);
    for &f in &freqs {
        for k in 0..os {
            // Local time within the pulse, computed per pulse to avoid drift.
            let local = k as f64 * dt;
            samples.push(Complex64::from_polar(amp, 2.0 * PI * f * local));
        }
    }
    Ok(ComplexSignal {
        samples,
        sample_rate: params.sample_rate(),
        t0: 0.0,
    })
}
