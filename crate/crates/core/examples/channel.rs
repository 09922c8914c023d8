//! Draw a multiuser clustered channel and look at its beamspace.

use beamspace::arrays::ArrayGeometry;
use beamspace::channel::{min_user_separation, ScenarioConfig, ScenarioGenerator};
use beamspace::leakage::leakage_ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> beamspace::Result<()> {
    let cfg = ScenarioConfig::new(ArrayGeometry::ula(128)?, 4, 10);
    let generator = ScenarioGenerator::new(cfg)?;
    let ch = generator.generate(&mut ChaCha20Rng::seed_from_u64(1))?;

    println!("Parseval error: {:.2e}", ch.parseval_error());
    println!("min cluster separation: {:.4}", min_user_separation(&ch).unwrap_or(0.0));
    for (k, p) in ch.params.iter().enumerate() {
        let col = ch.beamspace.col(k);
        let r = leakage_ratio(col)?;
        println!(
            "user {k}: mean AoD {:+.4}, mu {:.3e}, peak beam {}, eta {:.3}",
            p.clusters[0].mean.azimuth().value(),
            p.mu,
            r.peak_index,
            r.eta
        );
    }
    Ok(())
}
