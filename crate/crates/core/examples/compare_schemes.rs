//! Sum rate of the four precoders on the same channel.

use beamspace::arrays::ArrayGeometry;
use beamspace::channel::{ScenarioConfig, ScenarioGenerator};
use beamspace::metrics::{dbm_to_watts, noise_power, sum_rate};
use beamspace::precoders::{
    ba_from_assignment, ideal_precoder, mbmrf_from_assignment, sb_precoder, select_beams, SelectionOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> beamspace::Result<()> {
    let g = ArrayGeometry::ula(256)?;
    let ch = ScenarioGenerator::new(ScenarioConfig::new(g, 8, 10))?.generate(&mut ChaCha20Rng::seed_from_u64(3))?;
    let hb = &ch.beamspace;
    let sigma2 = noise_power(500e6, -174.0)?;
    let assignment = select_beams(hb, &g, &SelectionOptions::default())?;
    println!(
        "beams per user: {:?}",
        assignment.per_user().iter().map(Vec::len).collect::<Vec<_>>()
    );

    for dbm in [0.0, 20.0, 40.0] {
        let p_t = dbm_to_watts(dbm);
        let pairs = [
            ideal_precoder(hb, p_t)?,
            mbmrf_from_assignment(hb, assignment.clone(), p_t)?,
            ba_from_assignment(hb, assignment.clone(), p_t)?,
            sb_precoder(hb, p_t)?,
        ];
        let rates: Vec<String> = pairs
            .iter()
            .map(|p| Ok(format!("{} {:.2}", p.scheme, sum_rate(hb, p, sigma2)?.sum_rate)))
            .collect::<beamspace::Result<_>>()?;
        println!("{dbm:>4} dBm: {}", rates.join(", "));
    }
    Ok(())
}
