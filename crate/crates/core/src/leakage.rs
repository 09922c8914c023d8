//! Power leakage of off-grid paths in beamspace.

use std::f64::consts::PI;

use serde::Serialize;

use crate::arrays::{ArrayGeometry, Direction, LensTransform, SpatialDirection};
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    /// Fraction of the total power outside the strongest beam.
    pub eta: f64,
    pub peak_index: usize,
    pub per_beam_power: Vec<f64>,
}

/// Leakage ratio `η = 1 - max_i |h_i|² / Σ_i |h_i|²` of a beamspace vector.
///
/// Ties between equally strong beams resolve to the lowest index.
pub fn leakage_ratio(hb: &[C64]) -> Result<LeakageReport> {
    let per_beam_power: Vec<f64> = hb.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = per_beam_power.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("leakage of a zero beamspace vector is undefined".into()));
    }
    let (peak_index, peak) =
        per_beam_power.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, p)| if p > best.1 { (i, p) } else { best },
        );
    Ok(LeakageReport {
        eta: (1.0 - peak / total).clamp(0.0, 1.0),
        peak_index,
        per_beam_power,
    })
}

/// Folded sum `Σ_{i=1}^{N/2} sin²(π/2N) / sin²((2i-1)π/2N)`.
fn half_offset_sum(n: usize) -> Result<f64> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "worst-case leakage needs an even array size, got {n}"
        )));
    }
    let nf = n as f64;
    let num = (PI / (2.0 * nf)).sin().powi(2);
    Ok((1..=n / 2)
        .map(|i| num / ((2 * i - 1) as f64 * PI / (2.0 * nf)).sin().powi(2))
        .sum())
}

/// Worst-case (half-grid offset) leakage of a single path on an `n`-element ULA.
pub fn worst_case_leakage_ula(n: usize) -> Result<f64> {
    Ok(1.0 - 1.0 / (2.0 * half_offset_sum(n)?))
}

/// Worst-case leakage on an `n1 × n2` UPA, offset by half a beam in both
/// dimensions.
pub fn worst_case_leakage_upa(n1: usize, n2: usize) -> Result<f64> {
    Ok(1.0 - 1.0 / (4.0 * half_offset_sum(n1)? * half_offset_sum(n2)?))
}

/// Beamspace response of a single unit-gain path placed `offset` beam widths
/// (per dimension) away from grid beam `beam`.
pub fn single_path_beamspace(geometry: ArrayGeometry, beam: usize, offset: f64) -> Result<Vec<C64>> {
    let dir = match geometry.grid_direction(beam) {
        Direction::Linear(p) => {
            Direction::Linear(SpatialDirection::wrapped(p.value() + offset / geometry.dims().0 as f64))
        }
        Direction::Planar { az, el } => {
            let (n1, n2) = geometry.dims();
            Direction::Planar {
                az: SpatialDirection::wrapped(az.value() + offset / n1 as f64),
                el: SpatialDirection::wrapped(el.value() + offset / n2 as f64),
            }
        }
    };
    Ok(LensTransform::new(geometry).apply(&geometry.steering_vector(dir)?))
}

/// One row of the leakage sweep: offset as a fraction of the beam spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakagePoint {
    pub offset: f64,
    pub eta: f64,
}

/// Empirical leakage for `points` offsets evenly spread over `[0, 1/2]` beam
/// widths (the last one is the worst case).
pub fn leakage_sweep(geometry: ArrayGeometry, points: usize) -> Result<Vec<LeakagePoint>> {
    if points == 0 {
        return Err(Error::Domain("sweep needs at least one offset".into()));
    }
    let beam = geometry.flat_index(geometry.dims().0 / 2, geometry.dims().1 / 2);
    (0..points)
        .map(|j| {
            let offset = if points == 1 {
                0.5
            } else {
                0.5 * j as f64 / (points - 1) as f64
            };
            let eta = leakage_ratio(&single_path_beamspace(geometry, beam, offset)?)?.eta;
            Ok(LeakagePoint { offset, eta })
        })
        .collect()
}
