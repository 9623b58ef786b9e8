//! Coherent ML detection of the transmitted permutation.
//!
//! The receiver correlates the channel-combined signal `h^H r(t)` in each
//! pulse slot `n` against each tone `m`, producing an `M x M` matrix `R`.
//! The ML decision is the permutation `pi` maximizing `sum_n R[n][pi(n)]`, an
//! assignment problem.

mod hungarian;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::FadingRealization;
use crate::error::{Error, Result};
use crate::lehmer::Permutation;
use crate::waveform::{ComplexSignal, WaveformParams};

pub use hungarian::{solve_min, HungarianTrace};

/// Largest block size accepted by [`exhaustive_detect`].
pub const EXHAUSTIVE_LIMIT: usize = 10;

/// Square matrix of per-slot, per-tone correlation statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    m: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![0.0; m * m],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidParams("empty correlation matrix".into()));
        }
        let mut data = Vec::with_capacity(m * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::Mismatch(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("matrix entries must be finite".into()));
        }
        Ok(Self { m, data })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.m + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.m + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `sum_n R[n][perm(n)]`.
    pub fn objective(&self, perm: &Permutation) -> f64 {
        perm.as_slice()
            .iter()
            .enumerate()
            .map(|(n, &m)| self.get(n, m))
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            m: self.m,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }
}

/// Correlator bank over sampled antenna signals.
///
/// Each template is one pulse of the transmitted waveform for tone `m`,
/// `sqrt(E/(MT)) exp(j 2 pi f_m t)` on `[0, T)`, so a noiseless unit-gain
/// match yields `E/M`. Entries are `Re(sum_k y_k conj(phi_m(t_k)) dt)` with
/// `y = h^H r` restricted to slot `n`.
pub fn correlation_matrix(
    received: &[ComplexSignal],
    fading: &FadingRealization,
    params: &WaveformParams,
) -> Result<CorrelationMatrix> {
    params.validate()?;
    if received.len() != fading.n_antennas() {
        return Err(Error::Mismatch(format!(
            "{} received signals for {} antennas",
            received.len(),
            fading.n_antennas()
        )));
    }
    let m = params.m;
    let os = params.oversampling;
    let len = m * os;
    for (k, r) in received.iter().enumerate() {
        let rate_ok = (r.sample_rate - params.sample_rate()).abs() <= 1e-9 * params.sample_rate();
        if r.len() != len || !rate_ok || r.t0.abs() > 1e-12 * params.pulse_width {
            return Err(Error::Mismatch(format!(
                "antenna {k}: expected {len} samples at {} Hz from t=0",
                params.sample_rate()
            )));
        }
    }

    let mut combined = vec![Complex64::new(0.0, 0.0); len];
    for (r, hk) in received.iter().zip(&fading.h) {
        let w = hk.conj();
        for (y, s) in combined.iter_mut().zip(&r.samples) {
            *y += w * s;
        }
    }

    let dt = params.sample_interval();
    let amp = params.amplitude();
    let templates: Vec<Vec<Complex64>> = (0..m)
        .map(|tone| {
            let f = params.f0 + tone as f64 * params.delta_f;
            (0..os)
                .map(|k| Complex64::from_polar(amp, -2.0 * PI * f * k as f64 * dt))
                .collect()
        })
        .collect();

    let mut out = CorrelationMatrix::zeros(m);
    for (slot, chunk) in combined.chunks_exact(os).enumerate() {
        for (tone, tpl) in templates.iter().enumerate() {
            let acc: f64 = chunk.iter().zip(tpl).map(|(y, p)| (y * p).re).sum();
            out.set(slot, tone, acc * dt);
        }
    }
    Ok(out)
}

/// Draws the correlation matrix directly from its sufficient-statistic
/// distribution:
/// `R[n][m] = (E/M) g 1{m = pi(n)} + N(0, E N0 g / (2M))`, `g = ||h||^2`.
pub fn statistic_matrix<R: Rng + ?Sized>(
    perm: &Permutation,
    fading: &FadingRealization,
    energy: f64,
    n0: f64,
    rng: &mut R,
) -> CorrelationMatrix {
    let m = perm.len();
    let g = fading.gain;
    let signal = energy / m as f64 * g;
    let sigma = (energy * n0 * g / (2.0 * m as f64)).sqrt();
    let mut out = CorrelationMatrix::zeros(m);
    for n in 0..m {
        for tone in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            out.set(n, tone, sigma * z);
        }
        let tone = perm.as_slice()[n];
        out.set(n, tone, out.get(n, tone) + signal);
    }
    out
}

/// Optimal detection via the Hungarian method on `-R`.
pub fn hungarian_detect(r: &CorrelationMatrix) -> Permutation {
    hungarian_detect_traced(r).0
}

pub fn hungarian_detect_traced(r: &CorrelationMatrix) -> (Permutation, HungarianTrace) {
    let neg: Vec<f64> = r.data.iter().map(|x| -x).collect();
    let (assignment, trace) = solve_min(&neg, r.m);
    let perm = Permutation::new(assignment).expect("assignment is a permutation");
    (perm, trace)
}

/// Reference detector: scans all `M!` permutations in lexicographic order
/// and keeps the first one attaining the maximum.
pub fn exhaustive_detect(r: &CorrelationMatrix) -> Result<Permutation> {
    let m = r.m;
    if m > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            m,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut current: Vec<usize> = (0..m).collect();
    let mut best = current.clone();
    let mut best_val = f64::NEG_INFINITY;
    loop {
        let val: f64 = current.iter().enumerate().map(|(n, &t)| r.get(n, t)).sum();
        if val > best_val {
            best_val = val;
            best.copy_from_slice(&current);
        }
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(Permutation::new(best).expect("valid permutation"))
}

/// Advances `v` to the next permutation in lexicographic order; returns
/// `false` once `v` is the last one.
pub fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detector {
    #[default]
    Hungarian,
    Exhaustive,
}

impl Detector {
    pub fn detect(self, r: &CorrelationMatrix) -> Result<Permutation> {
        match self {
            Detector::Hungarian => Ok(hungarian_detect(r)),
            Detector::Exhaustive => exhaustive_detect(r),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Hungarian => "hungarian",
            Detector::Exhaustive => "exhaustive",
        })
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hungarian" => Ok(Detector::Hungarian),
            "exhaustive" => Ok(Detector::Exhaustive),
            other => Err(Error::InvalidParams(format!(
                "unknown receiver '{other}' (expected hungarian or exhaustive)"
            ))),
        }
    }
}
