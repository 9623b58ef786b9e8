//! Fisher information for joint delay and Doppler estimation and the
//! resulting Cramer-Rao bounds.
//!
//! With `C = (2 / N0) / (1 + N0)` and a receiver of bandwidth `B`:
//!
//! ```text
//! J11 = (2 B C / T) (1 - ((M - 1) / M) cos(omega0 T))
//! J12 = -(C T^2 / 2) sum_m (2m + 1) omega_m
//! J22 = C M^2 T^2 / 12
//! ```
//!
//! `J11` is a large-`BT` approximation. `J12` grows with the absolute tone
//! frequencies, so at baseband with `f0 = 0` the matrix is usually not
//! positive definite; centering the tone set around zero keeps it small.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lehmer::Permutation;
use crate::special::Quadrature;
use crate::waveform::{tone_frequencies, tone_omegas, WaveformParams};

/// Bandwidth-time product used when none is given.
pub const DEFAULT_BT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix {
    pub j11: f64,
    pub j12: f64,
    pub j22: f64,
    /// `(2 / N0) / (1 + N0)`.
    pub c: f64,
    /// Receiver bandwidth in Hz.
    pub b: f64,
    /// `2 pi f0` in rad/s.
    pub omega0: f64,
}

impl FisherMatrix {
    pub fn determinant(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.j11 > 0.0 && self.determinant() > 0.0
    }

    /// Inverse as `[[a, b], [b, d]]`.
    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let det = self.determinant();
        if !(self.j11 > 0.0 && det > 0.0 && det.is_finite()) {
            return Err(Error::SingularFisher {
                j11: self.j11,
                j12: self.j12,
                j22: self.j22,
                det,
            });
        }
        Ok([
            [self.j22 / det, -self.j12 / det],
            [-self.j12 / det, self.j11 / det],
        ])
    }
}

/// `C = (2 / N0) / (1 + N0)`.
pub fn snr_constant(n0: f64) -> f64 {
    (2.0 / n0) / (1.0 + n0)
}

/// Bounds on the delay variance (s^2) and Doppler variance ((rad/s)^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crlb {
    pub tau: f64,
    pub omega: f64,
}

fn check(params: &WaveformParams, n0: f64, b: f64) -> Result<()> {
    params.validate()?;
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidParams(format!("N0 must be positive, got {n0}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "receiver bandwidth must be positive, got {b}"
        )));
    }
    Ok(())
}

/// `1 - ((M - 1) / M) cos(omega0 T)`.
fn phase_factor(params: &WaveformParams) -> f64 {
    let m = params.m as f64;
    1.0 - ((m - 1.0) / m) * (params.omega0() * params.pulse_width).cos()
}

/// `sum_m (2m + 1) omega_m` over the permutation's tone order.
pub fn weighted_tone_sum(perm: &Permutation, params: &WaveformParams) -> Result<f64> {
    Ok(tone_omegas(perm, params)?
        .iter()
        .enumerate()
        .map(|(m, w)| (2 * m + 1) as f64 * w)
        .sum())
}

/// Whether `B T` is below the range where the `J11` approximation is meant
/// to hold.
pub fn bandwidth_is_small(params: &WaveformParams, b: f64) -> bool {
    b * params.pulse_width < 10.0
}

pub fn fisher_matrix(
    perm: &Permutation,
    params: &WaveformParams,
    n0: f64,
    b: f64,
) -> Result<FisherMatrix> {
    check(params, n0, b)?;
    let c = snr_constant(n0);
    let t = params.pulse_width;
    let m = params.m as f64;
    Ok(FisherMatrix {
        j11: 2.0 * b * c / t * phase_factor(params),
        j12: -0.5 * c * t * t * weighted_tone_sum(perm, params)?,
        j22: c * m * m * t * t / 12.0,
        c,
        b,
        omega0: params.omega0(),
    })
}

/// Diagonal of `J^-1`.
pub fn crlb_full(perm: &Permutation, params: &WaveformParams, n0: f64, b: f64) -> Result<Crlb> {
    let inv = fisher_matrix(perm, params, n0, b)?.inverse()?;
    Ok(Crlb {
        tau: inv[0][0],
        omega: inv[1][1],
    })
}

/// The same bounds through the expanded ratios
///
/// ```text
/// tau:   C^-1 M^2 T / (2 M^2 B X - 3 T^3 S^2)
/// omega: C^-1 (2B/T) X / (M^2 B T X / 6 - T^4 S^2 / 4)
/// ```
///
/// with `X` the cosine factor of `J11` and `S = sum (2m+1) omega_m`.
pub fn crlb_expanded(
    perm: &Permutation,
    params: &WaveformParams,
    n0: f64,
    b: f64,
) -> Result<Crlb> {
    let f = fisher_matrix(perm, params, n0, b)?;
    f.inverse()?;
    let t = params.pulse_width;
    let m2 = (params.m * params.m) as f64;
    let x = phase_factor(params);
    let s = weighted_tone_sum(perm, params)?;
    let c_inv = 1.0 / f.c;
    Ok(Crlb {
        tau: c_inv * m2 * t / (2.0 * m2 * b * x - 3.0 * t.powi(3) * s * s),
        omega: c_inv * (2.0 * b / t) * x / (m2 * b * t * x / 6.0 - t.powi(4) * s * s / 4.0),
    })
}

/// Bounds with the delay-Doppler cross term dropped; independent of the
/// tone order.
pub fn crlb_simplified(params: &WaveformParams, n0: f64, b: f64) -> Result<Crlb> {
    check(params, n0, b)?;
    let c_inv = 1.0 / snr_constant(n0);
    let t = params.pulse_width;
    let m = params.m as f64;
    let cos = (params.omega0() * t).cos();
    Ok(Crlb {
        tau: c_inv * m * t / (2.0 * b * (m - (m - 1.0) * cos)),
        omega: c_inv * 12.0 / (m * m * t * t),
    })
}

/// Smooth stand-in for the rectangular pulse: `sin^2` ramps of width `ramp`
/// at both ends, flat in between, scaled so that `int p^2 = T`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedPulse {
    width: f64,
    ramp: f64,
    scale: f64,
}

impl SmoothedPulse {
    pub fn new(width: f64, ramp: f64) -> Result<Self> {
        if !(ramp > 0.0 && 2.0 * ramp <= width) {
            return Err(Error::InvalidParams(format!(
                "ramp width {ramp} must lie in (0, T/2] for T={width}"
            )));
        }
        // int sin^4 over a ramp is 3 ramp / 8.
        let energy = width - 2.0 * ramp + 0.75 * ramp;
        Ok(Self {
            width,
            ramp,
            scale: (width / energy).sqrt(),
        })
    }

    /// `(p(v), p'(v))`.
    pub fn eval(&self, v: f64) -> (f64, f64) {
        let (t, r) = (self.width, self.ramp);
        if !(0.0..=t).contains(&v) {
            return (0.0, 0.0);
        }
        let k = PI / (2.0 * r);
        let (x, sign) = if v < r {
            (v, 1.0)
        } else if v > t - r {
            (t - v, -1.0)
        } else {
            return (self.scale, 0.0);
        };
        let s = (k * x).sin();
        let c = (k * x).cos();
        (self.scale * s * s, sign * self.scale * 2.0 * k * s * c)
    }

    /// Breakpoints of the piecewise definition on `[0, T]`.
    fn knots(&self) -> [f64; 4] {
        [0.0, self.ramp, self.width - self.ramp, self.width]
    }
}

/// `Im int u s(u) ds*(u)/du du` for the pulse train built from
/// [`SmoothedPulse`], with unit amplitude on each pulse.
///
/// As the ramps shrink this tends to `sum_m (2m+1) omega_m` times `-T^2/2`,
/// i.e. `J12 / C`.
pub fn smoothed_cross_moment(
    perm: &Permutation,
    params: &WaveformParams,
    ramp: f64,
) -> Result<f64> {
    let pulse = SmoothedPulse::new(params.pulse_width, ramp)?;
    let freqs = tone_frequencies(perm, params)?;
    let t = params.pulse_width;
    let quad = Quadrature::new(20);
    let mut acc = 0.0;
    for (m, &f) in freqs.iter().enumerate() {
        let w = 2.0 * PI * f;
        let start = m as f64 * t;
        let knots = pulse.knots();
        for seg in knots.windows(2) {
            let panels = 4 + (w.abs() * (seg[1] - seg[0]) / 4.0).ceil() as usize;
            let phi: Complex64 = quad.integrate(start + seg[0], start + seg[1], panels, |u| {
                let (p, dp) = pulse.eval(u - start);
                let s = Complex64::from_polar(p, w * u);
                let ds_conj = Complex64::new(dp, -w * p) * Complex64::from_polar(1.0, -w * u);
                s * ds_conj * u
            });
            acc += phi.im;
        }
    }
    Ok(acc)
}
