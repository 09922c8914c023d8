//! Interference-aware beam selection next to the magnitude rule.

use beamspace::arrays::ArrayGeometry;
use beamspace::channel::{ScenarioConfig, ScenarioGenerator};
use beamspace::metrics::{dbm_to_watts, noise_power, sum_rate};
use beamspace::precoders::{ba_from_assignment, iui_aware_select, select_beams, IuiAwareOptions, SelectionOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> beamspace::Result<()> {
    let g = ArrayGeometry::ula(64)?;
    let mut cfg = ScenarioConfig::new(g, 6, 10);
    cfg.min_separation = Some(0.02);
    let ch = ScenarioGenerator::new(cfg)?.generate(&mut ChaCha20Rng::seed_from_u64(2))?;
    let hb = &ch.beamspace;
    let sigma2 = noise_power(500e6, -174.0)?;
    let p_t = dbm_to_watts(30.0);

    let plain = select_beams(hb, &g, &SelectionOptions::threshold(0.1))?;
    let aware = iui_aware_select(
        hb,
        &g,
        &IuiAwareOptions {
            selection: SelectionOptions::threshold(0.1),
            sigma2,
            eta_min: 1.0,
            eta_min_decay: 1.0,
        },
    )?;
    for (name, a) in [("magnitude", plain), ("iui-aware", aware)] {
        let rate = sum_rate(hb, &ba_from_assignment(hb, a.clone(), p_t)?, sigma2)?.sum_rate;
        println!("{name}: {} beams, sum rate {rate:.2}", a.total_beams());
    }
    Ok(())
}
