//! Analytical beamspace variances and sum-rate upper bounds for grid-aligned
//! dense-scattering clusters on a ULA.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arrays::dirichlet_kernel;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

const ABS_TOL: f64 = 1e-10;
const MAX_SEGMENTS: usize = 200_000;

fn squared_kernel(n: usize) -> impl Fn(f64) -> f64 {
    let nf = n as f64;
    move |x| {
        let d = nf * dirichlet_kernel(n, x);
        d * d
    }
}

/// Breakpoints `a, k/N…, b` covering `[a, b]`, where `a` and `b` need not lie
/// on the `1/N` lattice.
fn lattice_breakpoints(n: usize, a: f64, b: f64) -> Vec<f64> {
    let nf = n as f64;
    let mut out = vec![a];
    let first = (a * nf).floor() as i64 + 1;
    let last = (b * nf).ceil() as i64 - 1;
    for k in first..=last {
        let x = k as f64 / nf;
        if x > a && x < b {
            out.push(x);
        }
    }
    out.push(b);
    out
}

/// Variance of the real (or imaginary) part of beamspace element `i`, per unit
/// `Nμ/N_cl`, for paths uniform on the grid-aligned window `[S0/N, S1/N]`:
/// `σ²_i = 1/(2N(S1-S0)) ∫_{(i-S1)/N}^{(i-S0)/N} sin²(Nπx)/sin²(πx) dx`.
pub fn central_variance_exact(n: usize, s0: i64, s1: i64, i: i64) -> Result<f64> {
    if s1 <= s0 {
        return Err(Error::Domain(format!("cluster edges out of order: S0={s0}, S1={s1}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("array size {n} too small")));
    }
    let nf = n as f64;
    let a = (i - s1) as f64 / nf;
    let b = (i - s0) as f64 / nf;
    let integral = integrate(squared_kernel(n), &lattice_breakpoints(n, a, b), ABS_TOL, MAX_SEGMENTS)?;
    Ok(integral.value / (2.0 * nf * (s1 - s0) as f64))
}

/// Mean exact variance over the central elements `S0+1 … S1-1`.
pub fn central_variance_mean(n: usize, s0: i64, s1: i64) -> Result<f64> {
    if s1 - s0 < 2 {
        return Err(Error::Domain(format!("no central elements between {s0} and {s1}")));
    }
    let sum = ((s0 + 1)..s1)
        .map(|i| central_variance_exact(n, s0, s1, i))
        .sum::<Result<f64>>()?;
    Ok(sum / (s1 - s0 - 1) as f64)
}

/// `4 / (π² (S1 - S0))`.
pub fn central_variance_approx(s0: i64, s1: i64) -> Result<f64> {
    if s1 <= s0 {
        return Err(Error::Domain(format!("cluster edges out of order: S0={s0}, S1={s1}")));
    }
    Ok(4.0 / (PI * PI * (s1 - s0) as f64))
}

/// Share of the squared kernel's period energy inside the main lobe `|x| < 1/N`.
pub fn kernel_concentration(n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::Domain(format!("kernel concentration needs N >= 4, got {n}")));
    }
    let nf = n as f64;
    let f = squared_kernel(n);
    let lobe = integrate(&f, &lattice_breakpoints(n, -1.0 / nf, 1.0 / nf), ABS_TOL, MAX_SEGMENTS)?;
    let period = integrate(&f, &lattice_breakpoints(n, -0.5, 0.5), ABS_TOL, MAX_SEGMENTS)?;
    Ok(lobe.value / period.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Central variance by quadrature.
    #[default]
    Exact,
    /// Central variance `4/(π²(S1-S0))`.
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserBound {
    pub s0: i64,
    pub s1: i64,
    /// Beams per user; may be fractional when it is an average.
    pub beams: f64,
    /// Large-scale gain (linear).
    pub mu: f64,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub p_t: f64,
    pub sigma2: f64,
    pub users: Vec<UserBound>,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::Domain("bound needs at least one user".into()));
        }
        if !(self.p_t > 0.0 && self.sigma2 > 0.0) {
            return Err(Error::Domain("transmit and noise power must be positive".into()));
        }
        for (k, u) in self.users.iter().enumerate() {
            if u.s1 - u.s0 <= 2 {
                return Err(Error::Domain(format!("user {k}: S1-S0 must exceed 2")));
            }
            if !(u.beams >= 1.0) || u.clusters == 0 || !(u.mu > 0.0) {
                return Err(Error::Domain(format!("user {k}: invalid bound parameters {u:?}")));
            }
        }
        Ok(())
    }

    /// `γ_k = P_T N μ_k / (K N_cl)`.
    pub fn gamma(&self, k: usize) -> f64 {
        let u = &self.users[k];
        self.p_t * self.n as f64 * u.mu / (self.users.len() as f64 * u.clusters as f64)
    }

    fn variance(&self, k: usize, mode: BoundMode) -> Result<f64> {
        let u = &self.users[k];
        match mode {
            BoundMode::Exact => central_variance_mean(self.n, u.s0, u.s1),
            BoundMode::Approx => central_variance_approx(u.s0, u.s1),
        }
    }

    fn sum_over_users(&self, mode: BoundMode, gain: impl Fn(f64) -> f64) -> Result<f64> {
        self.validate()?;
        let mut total = 0.0;
        for k in 0..self.users.len() {
            let snr = self.gamma(k) * self.variance(k, mode)? / self.sigma2;
            total += (1.0 + gain(self.users[k].beams) * snr).log2();
        }
        Ok(total)
    }
}

/// Upper bound on the ergodic BA sum rate:
/// `Σ_k log2(1 + γ_k σ²_k (πB_k + 4 - π) / (2σ²))`.
pub fn ba_rate_bound(p: &BoundParams, mode: BoundMode) -> Result<f64> {
    p.sum_over_users(mode, |b| (PI * b + 4.0 - PI) / 2.0)
}

/// Upper bound on the ergodic MBMRF sum rate: `Σ_k log2(1 + 2B_k γ_k σ²_k / σ²)`.
pub fn mbmrf_rate_bound(p: &BoundParams, mode: BoundMode) -> Result<f64> {
    p.sum_over_users(mode, |b| 2.0 * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateGap {
    /// MBMRF bound minus BA bound.
    pub gap: f64,
    /// High-SNR ceiling `K log2(4/π)`.
    pub cap: f64,
}

pub fn rate_gap(p: &BoundParams, mode: BoundMode) -> Result<RateGap> {
    Ok(RateGap {
        gap: mbmrf_rate_bound(p, mode)? - ba_rate_bound(p, mode)?,
        cap: gap_cap(p.users.len()),
    })
}

pub fn gap_cap(k: usize) -> f64 {
    k as f64 * (4.0 / PI).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, beams: usize, snr: f64) -> BoundParams {
        BoundParams {
            n: 512,
            p_t: 1.0,
            sigma2: 1.0 / snr,
            users: vec![
                UserBound {
                    s0: 100,
                    s1: 110,
                    beams: beams as f64,
                    mu: 1.0 / 512.0,
                    clusters: 1,
                };
                k
            ],
        }
    }

    #[test]
    fn approx_values() {
        assert!((central_variance_approx(0, 10).unwrap() - 0.04053).abs() < 1e-5);
        assert!((central_variance_approx(3, 7).unwrap() - 0.10132).abs() < 1e-5);
        let a = central_variance_approx(0, 8).unwrap();
        assert!((central_variance_approx(0, 4).unwrap() - 2.0 * a).abs() < 1e-15);
        assert!(central_variance_approx(2, 2).is_err());
    }

    #[test]
    fn variances_over_a_period_sum_to_one_half() {
        let n = 64;
        let total: f64 = (0..n as i64)
            .map(|i| central_variance_exact(n, 5, 12, i).unwrap())
            .sum();
        assert!((total - 0.5).abs() < 1e-9, "{total}");
    }

    #[test]
    fn central_variance_tracks_the_approximation() {
        let approx = central_variance_approx(0, 10).unwrap();
        for i in 1..10 {
            let exact = central_variance_exact(512, 0, 10, i).unwrap();
            let ratio = exact / approx;
            assert!((1.10..1.25).contains(&ratio), "i={i}: {exact} vs {approx}");
        }
        assert!(central_variance_exact(512, 10, 0, 3).is_err());
    }

    #[test]
    fn far_elements_are_small() {
        let central = central_variance_exact(512, 0, 10, 5).unwrap();
        for i in [60, 200, -150] {
            assert!(central_variance_exact(512, 0, 10, i).unwrap() < 1e-3 * central);
        }
    }

    #[test]
    fn concentration() {
        assert!(kernel_concentration(512).unwrap() > 0.90);
        let c8 = kernel_concentration(8).unwrap();
        assert!(c8 > 0.0 && c8 < 1.0);
        let sweep: Vec<f64> = [8, 16, 32, 64, 128, 256, 512, 1024]
            .iter()
            .map(|&n| kernel_concentration(n).unwrap())
            .collect();
        assert!(sweep.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{sweep:?}");
        assert!(kernel_concentration(3).is_err());
    }

    #[test]
    fn single_beam_bounds_coincide() {
        for mode in [BoundMode::Exact, BoundMode::Approx] {
            let p = params(4, 1, 100.0);
            assert_eq!(ba_rate_bound(&p, mode).unwrap(), mbmrf_rate_bound(&p, mode).unwrap());
            assert_eq!(rate_gap(&p, mode).unwrap().gap, 0.0);
        }
    }

    #[test]
    fn gap_stays_under_cap() {
        assert!((gap_cap(8) - 2.79).abs() < 0.005);
        for b in 1..=8 {
            let g = rate_gap(&params(8, b, 1e6), BoundMode::Exact).unwrap();
            assert!(g.gap >= 0.0 && g.gap < g.cap);
        }
    }

    #[test]
    fn bounds_vanish_with_noise_and_grow_with_beams() {
        let p = params(2, 5, 1e-12);
        assert!(ba_rate_bound(&p, BoundMode::Exact).unwrap() < 1e-9);
        let rates: Vec<f64> = (1..=8)
            .map(|b| mbmrf_rate_bound(&params(2, b, 10.0), BoundMode::Approx).unwrap())
            .collect();
        assert!(rates.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn exact_and_approx_rates_differ_by_at_most_the_variance_ratio() {
        // the log compresses the 10-beam variance gap of roughly 18%
        let ratio = central_variance_mean(512, 100, 110).unwrap() / central_variance_approx(100, 110).unwrap();
        for b in [1, 4, 8] {
            let p = params(8, b, 250.0);
            let e = ba_rate_bound(&p, BoundMode::Exact).unwrap();
            let a = ba_rate_bound(&p, BoundMode::Approx).unwrap();
            assert!(e > a && e / a <= ratio, "B={b}: {e} vs {a}");
        }
    }

    #[test]
    fn narrow_clusters_are_rejected() {
        let mut p = params(1, 1, 1.0);
        p.users[0].s1 = p.users[0].s0 + 2;
        assert!(ba_rate_bound(&p, BoundMode::Exact).is_err());
    }
}
