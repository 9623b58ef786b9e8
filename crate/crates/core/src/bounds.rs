//! Closed-form block error probability: union bounds and nearest-neighbour
//! approximations for AWGN, Rician and Rayleigh channels.
//!
//! A rival permutation that differs from the transmitted one in `l` slots is
//! mistaken for it with probability `P[sqrt(g) < alpha_l Z]`, where
//! `g = ||h||^2`, `Z ~ N(0, 1)` and `alpha_l^2 = M / (snr * l)`. There are
//! `!l * C(M, l)` such rivals; the union bound sums over all of them and the
//! nearest-neighbour approximation keeps only `l = 2`.
//!
//! For Rician fading `2(K+1) g` is noncentral chi-squared, which expands
//! into a Poisson(NK) mixture of central chi-squared laws with `2(N+j)`
//! degrees of freedom. Each mixture component has the closed form
//!
//! ```text
//! 1/2 + sum_{n=1}^{L} (-1)^n C(L, n) nu_n(c),   L = N + j,  c = 2 alpha^2 (K+1)
//! ```
//!
//! which is evaluated here through the equivalent positive-term expression
//! `((1-mu)/2)^L sum_{k<L} C(L-1+k, k) ((1+mu)/2)^k`, `mu = 1/sqrt(1+c)`;
//! the alternating sum loses all precision once `C(L, L/2)` approaches
//! `1/eps`. [`nu`] and [`mixture_component_alternating`] keep the
//! alternating form available for cross-checks.

use std::fmt;

use crate::channel::ChannelKind;
use crate::error::{Error, Result};
use crate::special::{binomial, factorial, q_function};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Relative truncation threshold for the Poisson series.
    pub series_tol: f64,
    /// Hard cap on the number of Poisson terms.
    pub j_max: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            series_tol: 1e-12,
            j_max: 200,
        }
    }
}

/// Union bound and nearest-neighbour value at one operating point. Both are
/// unclamped; the union bound can exceed one at low SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockErrorBounds {
    pub union_bound: f64,
    pub nearest_neighbour: f64,
}

impl BlockErrorBounds {
    pub fn union_bound_display(&self) -> f64 {
        self.union_bound.min(1.0)
    }

    pub fn nearest_neighbour_display(&self) -> f64 {
        self.nearest_neighbour.min(1.0)
    }
}

impl fmt::Display for BlockErrorBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ub={:e} nn={:e}", self.union_bound, self.nearest_neighbour)
    }
}

/// Number of derangements `!x`, via `!x = x * !(x-1) + (-1)^x`.
pub fn subfactorial(x: usize) -> Result<u64> {
    if x > 20 {
        return Err(Error::InvalidParams(format!(
            "subfactorial argument {x} exceeds 20"
        )));
    }
    let mut d: i64 = 1;
    for i in 1..=x as i64 {
        d = i * d + if i % 2 == 0 { 1 } else { -1 };
    }
    Ok(d as u64)
}

/// Number of rivals differing from a fixed permutation in exactly `l` slots.
pub fn rivals_at_distance(m: usize, l: usize) -> Result<f64> {
    Ok(subfactorial(l)? as f64 * binomial(m as u64, l as u64))
}

fn check(m: usize, n: usize, snr: f64) -> Result<()> {
    if !(2..=20).contains(&m) {
        return Err(Error::InvalidParams(format!(
            "bounds need 2 <= M <= 20, got M={m}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParams("need at least one antenna".into()));
    }
    if snr.is_nan() || snr <= 0.0 {
        return Err(Error::InvalidParams(format!("snr must be positive, got {snr}")));
    }
    Ok(())
}

/// `alpha_l^2 = M / (snr * l)`, with `snr = E / N0`.
pub fn alpha_sq(l: usize, m: usize, snr: f64) -> f64 {
    m as f64 / (snr * l as f64)
}

fn pairwise_awgn(l: usize, m: usize, n: usize, snr: f64) -> f64 {
    q_function((n as f64 / alpha_sq(l, m, snr)).sqrt())
}

pub fn union_bound_awgn(m: usize, n: usize, snr: f64) -> Result<f64> {
    check(m, n, snr)?;
    let mut acc = 0.0;
    for l in 2..=m {
        acc += rivals_at_distance(m, l)? * pairwise_awgn(l, m, n, snr);
    }
    Ok(acc)
}

pub fn nn_awgn(m: usize, n: usize, snr: f64) -> Result<f64> {
    check(m, n, snr)?;
    Ok(nn_count(m) * pairwise_awgn(2, m, n, snr))
}

/// `M (M - 1) / 2` rivals at distance two.
fn nn_count(m: usize) -> f64 {
    (m * (m - 1)) as f64 / 2.0
}

/// `nu_n(c) = (1 / (2 (1+c)^(n - 1/2))) sum_{q<n} C(n-1, q) C(2q, q) (c/4)^q`.
pub fn nu(n: usize, c: f64) -> f64 {
    let n64 = n as u64;
    let s: f64 = (0..n64)
        .map(|q| binomial(n64 - 1, q) * binomial(2 * q, q) * (c / 4.0).powi(q as i32))
        .sum();
    s / (2.0 * (1.0 + c).powf(n as f64 - 0.5))
}

/// `P[sqrt(chi^2_{2L}) < sqrt(c) Z]` by the alternating `nu_n` sum. Accurate
/// only for small `L`.
pub fn mixture_component_alternating(l_dof: usize, c: f64) -> f64 {
    let mut acc = 0.5;
    for k in 1..=l_dof {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(l_dof as u64, k as u64) * nu(k, c);
    }
    acc
}

/// `P[sqrt(chi^2_{2L}) < sqrt(c) Z]`, central chi-squared with `2L` degrees
/// of freedom, in positive-term form.
pub fn mixture_component(l_dof: usize, c: f64) -> f64 {
    if l_dof == 0 {
        return 0.5;
    }
    let root = (1.0 + c).sqrt();
    // (1 - mu)/2 without cancellation for small c.
    let low = c / (2.0 * root * (root + 1.0));
    let high = 0.5 * (1.0 + 1.0 / root);
    let l = l_dof as f64;
    let ln_low = low.ln();
    let ln_high = high.ln();
    let mut ln_binom = 0.0;
    let mut acc = 0.0;
    for k in 0..l_dof {
        if k > 0 {
            ln_binom += ((l - 1.0 + k as f64) / k as f64).ln();
        }
        acc += (l * ln_low + ln_binom + k as f64 * ln_high).exp();
    }
    acc
}

fn check_rician(k: f64, cfg: &SeriesConfig) -> Result<()> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "Rician K must be finite and non-negative, got {k}"
        )));
    }
    if cfg.series_tol.is_nan() || cfg.series_tol <= 0.0 {
        return Err(Error::InvalidParams("series_tol must be positive".into()));
    }
    Ok(())
}

/// Pairwise error probability against a rival at distance `l` under Rician
/// fading.
pub fn pairwise_rician(
    l: usize,
    m: usize,
    n: usize,
    k: f64,
    snr: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    check(m, n, snr)?;
    check_rician(k, cfg)?;
    if !(2..=m).contains(&l) {
        return Err(Error::InvalidParams(format!(
            "distance l={l} outside 2..={m}"
        )));
    }
    let c = 2.0 * alpha_sq(l, m, snr) * (k + 1.0);
    let nk = n as f64 * k;
    if nk == 0.0 {
        return Ok(mixture_component(n, c));
    }
    let ln_nk = nk.ln();
    let mut ln_weight = -nk;
    let mut sum = 0.0;
    let mut last = f64::NAN;
    for j in 0..=cfg.j_max {
        if j > 0 {
            ln_weight += ln_nk - (j as f64).ln();
        }
        let term = ln_weight.exp() * mixture_component(n + j, c);
        sum += term;
        last = term;
        if j as f64 >= nk && term <= cfg.series_tol * sum {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNotConverged {
        terms: cfg.j_max + 1,
        last_term: last,
        partial_sum: sum,
    })
}

pub fn union_bound_rician(
    m: usize,
    n: usize,
    k: f64,
    snr: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    let mut acc = 0.0;
    for l in 2..=m.max(2) {
        acc += rivals_at_distance(m, l)? * pairwise_rician(l, m, n, k, snr, cfg)?;
    }
    Ok(acc)
}

pub fn nn_rician(m: usize, n: usize, k: f64, snr: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok(nn_count(m) * pairwise_rician(2, m, n, k, snr, cfg)?)
}

fn pairwise_rayleigh(l: usize, m: usize, n: usize, snr: f64) -> f64 {
    mixture_component(n, 2.0 * alpha_sq(l, m, snr))
}

pub fn union_bound_rayleigh(m: usize, n: usize, snr: f64) -> Result<f64> {
    check(m, n, snr)?;
    let mut acc = 0.0;
    for l in 2..=m {
        acc += rivals_at_distance(m, l)? * pairwise_rayleigh(l, m, n, snr);
    }
    Ok(acc)
}

pub fn nn_rayleigh(m: usize, n: usize, snr: f64) -> Result<f64> {
    check(m, n, snr)?;
    Ok(nn_count(m) * pairwise_rayleigh(2, m, n, snr))
}

/// Both analytic curves for the given channel at linear `snr = E/N0`.
pub fn block_error_bounds(
    kind: ChannelKind,
    m: usize,
    n: usize,
    k: f64,
    snr: f64,
    cfg: &SeriesConfig,
) -> Result<BlockErrorBounds> {
    let (union_bound, nearest_neighbour) = match kind {
        ChannelKind::Awgn => (union_bound_awgn(m, n, snr)?, nn_awgn(m, n, snr)?),
        ChannelKind::Rayleigh => (union_bound_rayleigh(m, n, snr)?, nn_rayleigh(m, n, snr)?),
        ChannelKind::Rician => (
            union_bound_rician(m, n, k, snr, cfg)?,
            nn_rician(m, n, k, snr, cfg)?,
        ),
    };
    Ok(BlockErrorBounds {
        union_bound,
        nearest_neighbour,
    })
}

/// Sanity identity: the union bound counts every rival exactly once.
pub fn rival_count(m: usize) -> Result<u64> {
    let total: f64 = (2..=m).map(|l| rivals_at_distance(m, l)).sum::<Result<f64>>()?;
    Ok(total as u64)
}

/// `M! - 1`.
pub fn expected_rival_count(m: usize) -> Option<u64> {
    factorial(m).map(|f| f - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enumerate_derangements(x: usize) -> u64 {
        fn go(i: usize, x: usize, used: &mut Vec<bool>) -> u64 {
            if i == x {
                return 1;
            }
            let mut c = 0;
            for j in 0..x {
                if !used[j] && j != i {
                    used[j] = true;
                    c += go(i + 1, x, used);
                    used[j] = false;
                }
            }
            c
        }
        go(0, x, &mut vec![false; x])
    }

    #[test]
    fn subfactorial_values() {
        assert_eq!(subfactorial(0).unwrap(), 1);
        assert_eq!(subfactorial(1).unwrap(), 0);
        assert_eq!(subfactorial(2).unwrap(), 1);
        assert_eq!(subfactorial(4).unwrap(), 9);
        for x in 0..=8 {
            assert_eq!(subfactorial(x).unwrap(), enumerate_derangements(x));
        }
        assert_eq!(subfactorial(20).unwrap(), 895_014_631_192_902_121);
        assert!(subfactorial(21).is_err());
    }

    #[test]
    fn rival_count_identity() {
        for m in 2..=8 {
            assert_eq!(rival_count(m).unwrap(), expected_rival_count(m).unwrap());
        }
    }

    #[test]
    fn awgn_two_tone_zero_db() {
        let ub = union_bound_awgn(2, 1, 1.0).unwrap();
        assert!((ub - 0.158_655_253_931_457).abs() < 1e-12);
        assert_eq!(ub, nn_awgn(2, 1, 1.0).unwrap());
    }

    #[test]
    fn awgn_nn_example() {
        // 6 Q(sqrt(10)) with Q(sqrt(10)) = 7.827011290012740e-4.
        let nn = nn_awgn(4, 2, 10.0).unwrap();
        assert!((nn / (6.0 * 7.827_011_290_012_74e-4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn awgn_limits_and_ordering() {
        assert_eq!(union_bound_awgn(4, 2, 1e30).unwrap(), 0.0);
        for db in -10..30 {
            let snr = 10f64.powf(db as f64 / 10.0);
            for m in 2..=8 {
                let ub = union_bound_awgn(m, 2, snr).unwrap();
                let nn = nn_awgn(m, 2, snr).unwrap();
                assert!(nn <= ub);
            }
        }
        assert!(union_bound_awgn(8, 1, 0.1).unwrap() > 1.0);
    }

    #[test]
    fn rayleigh_single_antenna_closed_form() {
        // c_2 = 2 * M / (snr * l) = 0.2.
        let nn = nn_rayleigh(2, 1, 10.0).unwrap();
        let want = 0.5 * (1.0 - 1.0 / 1.2f64.sqrt());
        assert!((nn - want).abs() < 1e-15);
        assert!((nn - 0.043_564_535_412_361_55).abs() < 1e-15);
    }

    #[test]
    fn component_forms_agree() {
        for l in 1..=12 {
            for &c in &[1e-3, 0.05, 0.2, 1.0, 4.0, 50.0] {
                let a = mixture_component_alternating(l, c);
                let b = mixture_component(l, c);
                assert!((a - b).abs() < 1e-11, "L={l} c={c}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn component_matches_craig_integral() {
        // (1/pi) int_0^{pi/2} (sin^2 / (1/c + sin^2))^L dtheta by quadrature.
        let q = crate::special::Quadrature::new(40);
        for l in [1usize, 3, 9, 40, 120] {
            for &c in &[0.01, 0.3, 2.0] {
                let integral: f64 = q.integrate(0.0, std::f64::consts::FRAC_PI_2, 64, |t| {
                    let s2 = t.sin().powi(2);
                    (s2 / (1.0 / c + s2)).powi(l as i32)
                }) / std::f64::consts::PI;
                let closed = mixture_component(l, c);
                assert!(
                    (closed - integral).abs() <= 1e-12 * integral.max(1e-300) + 1e-300,
                    "L={l} c={c}: {closed} vs {integral}"
                );
            }
        }
    }

    #[test]
    fn rician_zero_k_is_rayleigh() {
        let cfg = SeriesConfig::default();
        for (m, n) in [(2, 4), (4, 4), (3, 1)] {
            for db in -5..15 {
                let snr = 10f64.powf(db as f64 / 10.0);
                let a = union_bound_rician(m, n, 0.0, snr, &cfg).unwrap();
                let b = union_bound_rayleigh(m, n, snr).unwrap();
                assert!((a - b).abs() <= 1e-12 * b);
                let a = nn_rician(m, n, 0.0, snr, &cfg).unwrap();
                let b = nn_rayleigh(m, n, snr).unwrap();
                assert!((a - b).abs() <= 1e-12 * b);
            }
        }
    }

    #[test]
    fn rician_improves_with_k() {
        let cfg = SeriesConfig::default();
        for db in [0.0, 5.0, 10.0, 15.0] {
            let snr = 10f64.powf(db / 10.0);
            let mut prev = f64::INFINITY;
            for k in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
                let p = union_bound_rician(4, 4, k, snr, &cfg).unwrap();
                assert!(p < prev, "K={k} snr={db}dB");
                prev = p;
            }
        }
    }

    #[test]
    fn rician_large_k_tends_to_awgn() {
        let cfg = SeriesConfig {
            j_max: 2000,
            ..Default::default()
        };
        let snr = 10f64.powf(0.5);
        let awgn = union_bound_awgn(4, 2, snr).unwrap();
        let ric = union_bound_rician(4, 2, 150.0, snr, &cfg).unwrap();
        assert!((ric / awgn - 1.0).abs() < 0.05, "{ric} vs {awgn}");
    }

    #[test]
    fn series_is_stable_in_j_max() {
        let small = SeriesConfig::default();
        let big = SeriesConfig {
            j_max: 400,
            ..small
        };
        for k in [0.5, 1.0, 4.0, 10.0] {
            for db in [0.0, 10.0, 20.0] {
                let snr = 10f64.powf(db / 10.0);
                let a = union_bound_rician(4, 4, k, snr, &small).unwrap();
                let b = union_bound_rician(4, 4, k, snr, &big).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn series_cap_reports_non_convergence() {
        let cfg = SeriesConfig {
            j_max: 3,
            ..Default::default()
        };
        let err = pairwise_rician(2, 4, 4, 4.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::SeriesNotConverged { terms: 4, .. }));
        assert!(err.is_numeric());
    }

    #[test]
    fn two_tone_union_equals_nn() {
        let cfg = SeriesConfig::default();
        for snr in [0.5, 2.0, 20.0] {
            assert_eq!(
                union_bound_rician(2, 3, 1.5, snr, &cfg).unwrap(),
                nn_rician(2, 3, 1.5, snr, &cfg).unwrap()
            );
            assert_eq!(
                union_bound_rayleigh(2, 3, snr).unwrap(),
                nn_rayleigh(2, 3, snr).unwrap()
            );
        }
    }

    #[test]
    fn rayleigh_monotone_in_snr() {
        let mut prev = f64::INFINITY;
        for db in -10..40 {
            let p = union_bound_rayleigh(4, 2, 10f64.powf(db as f64 / 10.0)).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(union_bound_awgn(1, 1, 1.0).is_err());
        assert!(union_bound_awgn(2, 0, 1.0).is_err());
        assert!(union_bound_awgn(2, 1, 0.0).is_err());
        assert!(pairwise_rician(5, 4, 1, 1.0, 1.0, &SeriesConfig::default()).is_err());
        assert!(pairwise_rician(2, 4, 1, -1.0, 1.0, &SeriesConfig::default()).is_err());
    }

    #[test]
    fn display_clamps() {
        let b = block_error_bounds(ChannelKind::Awgn, 8, 1, 0.0, 0.1, &SeriesConfig::default())
            .unwrap();
        assert!(b.union_bound > 1.0);
        assert_eq!(b.union_bound_display(), 1.0);
    }
}
