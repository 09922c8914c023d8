//! Sum rate, noise power, hardware power consumption and energy efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, CMatrix};
use crate::precoders::{PrecoderPair, Scheme};

/// Thermal noise power in watts for a bandwidth and a noise density in dBm/Hz.
pub fn noise_power(bandwidth_hz: f64, psd_dbm_per_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(dbm_to_watts(psd_dbm_per_hz + 10.0 * bandwidth_hz.log10()))
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub per_user_rate: Vec<f64>,
    pub sum_rate: f64,
    pub sinr: Vec<f64>,
}

/// `SINR_k = |h̄_k^H p_k|² / (σ² + Σ_{i≠k} |h̄_k^H p_i|²)` with `h̄ = P_RF^H H̊`.
pub fn sum_rate(hb: &CMatrix, pair: &PrecoderPair, sigma2: f64) -> Result<RateResult> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {sigma2}")));
    }
    let eq = pair.equivalent_channel(hb)?;
    let k = eq.cols();
    let sinr: Vec<f64> = (0..k)
        .map(|u| {
            let h = eq.col(u);
            let mut signal = 0.0;
            let mut interference = 0.0;
            for i in 0..k {
                let g = inner(h, pair.bb.col(i)).norm_sqr();
                if i == u {
                    signal = g;
                } else {
                    interference += g;
                }
            }
            signal / (sigma2 + interference)
        })
        .collect();
    let per_user_rate: Vec<f64> = sinr.iter().map(|s| (1.0 + s).log2()).collect();
    Ok(RateResult {
        sum_rate: per_user_rate.iter().sum(),
        per_user_rate,
        sinr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SwitchConvention {
    /// One switch per RF chain (single beam) or per selected beam.
    PerBeam,
    /// Every RF chain reaches all `N` beams through its own crossbar row.
    #[default]
    FullCrossbar,
}

/// Hardware power figures in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerModel {
    pub p_ref: f64,
    pub p_bb: f64,
    pub p_rf: f64,
    pub p_sw: f64,
    pub p_ps: f64,
    pub p_t: f64,
    pub convention: SwitchConvention,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self::from_reference(0.020)
    }
}

impl PowerModel {
    pub fn from_reference(p_ref: f64) -> Self {
        Self {
            p_ref,
            p_bb: 10.0 * p_ref,
            p_rf: 12.0 * p_ref,
            p_sw: 0.25 * p_ref,
            p_ps: 1.5 * p_ref,
            p_t: 25.0 * p_ref,
            convention: SwitchConvention::FullCrossbar,
        }
    }

    pub fn with_convention(mut self, convention: SwitchConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_transmit_power(mut self, p_t: f64) -> Self {
        self.p_t = p_t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p_ref, self.p_bb, self.p_rf, self.p_sw, self.p_ps, self.p_t];
        if all.iter().all(|p| *p > 0.0 && p.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain(format!("power model entries must be positive: {self:?}")))
        }
    }
}

/// Total consumed power of a scheme.
///
/// The fully digital baseline is charged one RF chain per antenna and no
/// switching network.
pub fn power_consumption(scheme: Scheme, k: usize, n: usize, b_total: usize, model: &PowerModel) -> Result<f64> {
    if k == 0 || n == 0 || b_total == 0 {
        return Err(Error::Domain(format!(
            "counts must be positive: K={k}, N={n}, B_T={b_total}"
        )));
    }
    model.validate()?;
    let (k, n, b) = (k as f64, n as f64, b_total as f64);
    let fanout = match model.convention {
        SwitchConvention::PerBeam => 1.0,
        SwitchConvention::FullCrossbar => n,
    };
    let base = model.p_t + model.p_bb;
    Ok(match scheme {
        Scheme::Sb => base + k * model.p_rf + k * fanout * model.p_sw,
        Scheme::Mbmrf => base + b * model.p_rf + b * fanout * model.p_sw,
        Scheme::Ba => base + k * model.p_rf + k * fanout * model.p_sw + b * model.p_ps,
        Scheme::Ideal => base + n * model.p_rf,
    })
}

/// Energy efficiency in (bps/Hz)/W.
pub fn energy_efficiency(rate: &RateResult, power_w: f64) -> Result<f64> {
    if !(power_w > 0.0) {
        return Err(Error::Domain(format!("power must be positive, got {power_w}")));
    }
    Ok(rate.sum_rate / power_w)
}

/// Energy efficiency in bits per joule.
pub fn energy_efficiency_bits_per_joule(rate: &RateResult, power_w: f64, bandwidth_hz: f64) -> Result<f64> {
    Ok(bandwidth_hz * energy_efficiency(rate, power_w)?)
}
