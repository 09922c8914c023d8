use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepPoint};
use super::output::mean_stderr;
use super::runner::TrialRecord;
use crate::bounds::{ba_rate_bound, gap_cap, mbmrf_rate_bound, BoundMode, BoundParams, UserBound};
use crate::channel::large_scale_fading;
use crate::error::{Error, Result};
use crate::precoders::Scheme;

/// Bound parameters of a grid-aligned ULA experiment at one sweep point, with
/// `μ` replaced by its mean under shadowing.
pub fn bound_params(cfg: &ExperimentConfig, point: &SweepPoint, beams_per_user: f64) -> Result<BoundParams> {
    if cfg.geometry.is_planar() {
        return Err(Error::Unsupported("sum-rate bounds are derived for ULAs only".into()));
    }
    let scenario = cfg.scenario();
    if !scenario.grid_aligned {
        return Err(Error::Unsupported("sum-rate bounds need grid-aligned clusters".into()));
    }
    let n = cfg.geometry.num_elements();
    let width = scenario.spread_az * n as f64;
    let s1 = width.round() as i64;
    if (width - s1 as f64).abs() > 1e-9 || s1 <= 2 {
        return Err(Error::Unsupported(format!(
            "cluster width {width} beams must be an integer greater than 2"
        )));
    }
    let mu = large_scale_fading(scenario.distance_m, 0.0)? * scenario.shadowing.mean_linear_factor();
    Ok(BoundParams {
        n,
        p_t: point.p_t,
        sigma2: cfg.noise_power(),
        users: vec![
            UserBound {
                s0: 0,
                s1,
                beams: beams_per_user,
                mu,
                clusters: scenario.clusters_per_user,
            };
            cfg.users
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub scheme: Scheme,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub beams_per_user: f64,
    pub bound_exact: f64,
    pub bound_approx: f64,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub count: usize,
    pub gap_cap: f64,
}

/// Bounds next to Monte Carlo means for the schemes they cover (single beam is
/// the one-beam case of both bounds). Without a fixed beam count the mean
/// selected count per user is used.
pub fn bounds_report(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for s in 0..cfg.sweep.len() {
        let point = cfg.sweep_point(s);
        let cell: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| r.sweep_index == s && !r.is_flagged())
            .collect();
        let mean_beams = {
            let b: Vec<f64> = cell
                .iter()
                .filter(|r| r.scheme == Scheme::Ba || r.scheme == Scheme::Mbmrf)
                .filter_map(|r| r.b_total.map(|b| b as f64 / cfg.users as f64))
                .collect();
            mean_stderr(&b).0.unwrap_or(1.0)
        };
        for scheme in [Scheme::Ba, Scheme::Mbmrf, Scheme::Sb] {
            if !cfg.schemes.contains(&scheme) {
                continue;
            }
            let beams = match scheme {
                Scheme::Sb => 1.0,
                _ => point.fixed_beams.map_or(mean_beams, |b| b as f64),
            };
            let params = bound_params(cfg, &point, beams)?;
            let bound = |mode| match scheme {
                Scheme::Mbmrf => mbmrf_rate_bound(&params, mode),
                _ => ba_rate_bound(&params, mode),
            };
            let rates: Vec<f64> = cell
                .iter()
                .filter(|r| r.scheme == scheme)
                .filter_map(|r| r.sum_rate_bpshz)
                .collect();
            let (mc_mean, mc_stderr) = mean_stderr(&rates);
            rows.push(BoundRow {
                scheme,
                sweep_name: cfg.sweep.name().to_string(),
                sweep_value: point.value,
                beams_per_user: beams,
                bound_exact: bound(BoundMode::Exact)?,
                bound_approx: bound(BoundMode::Approx)?,
                mc_mean,
                mc_stderr,
                count: rates.len(),
                gap_cap: gap_cap(cfg.users),
            });
        }
    }
    Ok(rows)
}

pub fn write_bounds_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "sweep_name",
        "sweep_value",
        "beams_per_user",
        "bound_exact",
        "bound_approx",
        "mc_mean",
        "mc_stderr",
        "count",
        "gap_cap",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.scheme.name().to_string(),
            r.sweep_name.clone(),
            r.sweep_value.to_string(),
            r.beams_per_user.to_string(),
            r.bound_exact.to_string(),
            r.bound_approx.to_string(),
            opt(r.mc_mean),
            opt(r.mc_stderr),
            r.count.to_string(),
            r.gap_cap.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
