//! Write a channel and its BA precoder as JSON, then read them back.

use beamspace::arrays::ArrayGeometry;
use beamspace::channel::{MultiuserChannel, ScenarioConfig, ScenarioGenerator};
use beamspace::export::{read_json, write_json, ChannelDump, PrecoderDump};
use beamspace::precoders::{ba_precoder, SelectionOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> beamspace::Result<()> {
    let g = ArrayGeometry::upa(8, 4)?;
    let ch = ScenarioGenerator::new(ScenarioConfig::new(g, 2, 5))?.generate(&mut ChaCha20Rng::seed_from_u64(5))?;
    let pair = ba_precoder(&ch.beamspace, &g, 1.0, &SelectionOptions::default())?;

    let dir = std::env::temp_dir();
    let (ch_path, pre_path) = (dir.join("beamspace_channel.json"), dir.join("beamspace_precoder.json"));
    write_json(&ChannelDump::from(&ch), &ch_path)?;
    write_json(&PrecoderDump::from(&pair), &pre_path)?;

    let back: ChannelDump = read_json(&ch_path)?;
    let same = MultiuserChannel::try_from(&back)? == ch;
    let pre: PrecoderDump = read_json(&pre_path)?;
    println!("{} and {}", ch_path.display(), pre_path.display());
    println!("channel round trip exact: {same}, assignment {:?}", pre.assignment);
    Ok(())
}
