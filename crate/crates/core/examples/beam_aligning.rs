//! Beam selection and phase alignment for one realization.

use beamspace::arrays::ArrayGeometry;
use beamspace::channel::{ScenarioConfig, ScenarioGenerator};
use beamspace::linalg::inner;
use beamspace::precoders::{ba_precoder, SelectionOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> beamspace::Result<()> {
    let g = ArrayGeometry::ula(64)?;
    let ch = ScenarioGenerator::new(ScenarioConfig::new(g, 3, 20))?.generate(&mut ChaCha20Rng::seed_from_u64(7))?;
    let p_t = 0.1;

    for eps in [0.5, 0.25, 0.1] {
        let pair = ba_precoder(&ch.beamspace, &g, p_t, &SelectionOptions::threshold(eps))?;
        let a = pair.assignment.as_ref().unwrap();
        println!("epsilon {eps}: {:?}", a.per_user());
    }

    let pair = ba_precoder(&ch.beamspace, &g, p_t, &SelectionOptions::default())?;
    pair.check_constraints(p_t, 1e-9)?;
    let dense = pair.rf.to_dense();
    for (k, beams) in pair.assignment.as_ref().unwrap().per_user().iter().enumerate() {
        let h = ch.beamspace.col(k);
        let gain = inner(dense.col(k), h);
        let sum: f64 = beams.iter().map(|&b| h[b].norm()).sum::<f64>() / (beams.len() as f64).sqrt();
        println!(
            "user {k}: combined gain {gain:.4e}, sum|h|/sqrt(B) {sum:.4e}, power {:.4}",
            pair.user_power(k)
        );
    }
    Ok(())
}
