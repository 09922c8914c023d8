use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepPoint};
use crate::channel::ScenarioGenerator;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::metrics::{energy_efficiency, power_consumption, sum_rate};
use crate::precoders::{
    ba_from_assignment, ideal_precoder, iui_aware_select, mbmrf_from_assignment, sb_precoder, select_beams,
    BeamAssignment, PrecoderPair, Scheme,
};

/// Identifies the per-trial generator so results can be replicated elsewhere.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9): seed_from_u64(master_seed), set_stream(sweep_index << 32 | trial_index)";

/// Generator for one (sweep point, trial) cell.
pub fn trial_rng(master_seed: u64, sweep_index: usize, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(((sweep_index as u64) << 32) | trial as u64);
    rng
}

/// FNV-1a over the bit patterns of a matrix, as 16 hex digits.
pub fn channel_hash(m: &CMatrix) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for z in m.as_slice() {
        for bits in [z.re.to_bits(), z.im.to_bits()] {
            for byte in bits.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scheme: Scheme,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub sweep_index: usize,
    pub trial: usize,
    pub sum_rate_bpshz: Option<f64>,
    pub per_user_rates: Vec<f64>,
    pub b_total: Option<usize>,
    pub power_w: Option<f64>,
    pub ee_bpshz_per_w: Option<f64>,
    pub channel_hash: String,
    /// Why the scheme produced no result on this realization.
    pub flag: Option<String>,
}

impl TrialRecord {
    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }
}

fn build_pair(
    scheme: Scheme,
    hb: &CMatrix,
    p_t: f64,
    assignment: &Option<Result<BeamAssignment>>,
) -> Result<PrecoderPair> {
    let assigned = || match assignment {
        Some(Ok(a)) => Ok(a.clone()),
        Some(Err(e)) => Err(Error::Domain(e.to_string())),
        None => unreachable!("assignment computed for beam-set schemes"),
    };
    match scheme {
        Scheme::Ba => ba_from_assignment(hb, assigned()?, p_t),
        Scheme::Mbmrf => mbmrf_from_assignment(hb, assigned()?, p_t),
        Scheme::Sb => sb_precoder(hb, p_t),
        Scheme::Ideal => ideal_precoder(hb, p_t),
    }
}

/// Runs every requested scheme on one channel realization.
pub fn run_trial(
    cfg: &ExperimentConfig,
    generator: &ScenarioGenerator,
    point: &SweepPoint,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let mut rng = trial_rng(cfg.seed, point.index, trial);
    let channel = generator.generate(&mut rng)?;
    let hb = &channel.beamspace;
    let hash = channel_hash(hb);
    let sigma2 = cfg.noise_power();
    let model = cfg.power.with_transmit_power(point.p_t);
    let needs_sets = cfg.schemes.iter().any(|s| matches!(s, Scheme::Ba | Scheme::Mbmrf));
    let assignment = needs_sets.then(|| match cfg.iui_options(point.fixed_beams) {
        Some(opts) => iui_aware_select(hb, &cfg.geometry, &opts),
        None => select_beams(hb, &cfg.geometry, &cfg.selection_options(point.fixed_beams)),
    });
    let k = hb.cols();
    let n = hb.rows();
    cfg.schemes
        .iter()
        .map(|&scheme| {
            let mut rec = TrialRecord {
                scheme,
                sweep_name: cfg.sweep.name().to_string(),
                sweep_value: point.value,
                sweep_index: point.index,
                trial,
                sum_rate_bpshz: None,
                per_user_rates: Vec::new(),
                b_total: None,
                power_w: None,
                ee_bpshz_per_w: None,
                channel_hash: hash.clone(),
                flag: None,
            };
            match build_pair(scheme, hb, point.p_t, &assignment) {
                Ok(pair) => {
                    let rate = sum_rate(hb, &pair, sigma2)?;
                    let b_total = pair.total_beams();
                    let power = power_consumption(scheme, k, n, b_total, &model)?;
                    rec.ee_bpshz_per_w = Some(energy_efficiency(&rate, power)?);
                    rec.sum_rate_bpshz = Some(rate.sum_rate);
                    rec.per_user_rates = rate.per_user_rate;
                    rec.b_total = Some(b_total);
                    rec.power_w = Some(power);
                }
                Err(e) => rec.flag = Some(e.to_string()),
            }
            Ok(rec)
        })
        .collect()
}

/// Runs all sweep points and trials. Records are ordered by sweep point, trial
/// and the configured scheme order, whatever the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let generator = ScenarioGenerator::new(cfg.scenario())?;
    let points: Vec<SweepPoint> = (0..cfg.sweep.len()).map(|i| cfg.sweep_point(i)).collect();
    let cells: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(s, t)| run_trial(cfg, &generator, &points[s], t))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}
