//! Power consumption and energy efficiency of each architecture.

use beamspace::metrics::{power_consumption, PowerModel, SwitchConvention};
use beamspace::precoders::Scheme;

fn main() -> beamspace::Result<()> {
    let (k, n) = (8, 512);
    for convention in [SwitchConvention::FullCrossbar, SwitchConvention::PerBeam] {
        let model = PowerModel::default().with_convention(convention);
        println!("{convention:?}");
        for beams in [1, 3, 5] {
            let b_total = k * beams;
            let row: Vec<String> = Scheme::ALL
                .iter()
                .map(|&s| Ok(format!("{s} {:.2} W", power_consumption(s, k, n, b_total, &model)?)))
                .collect::<beamspace::Result<_>>()?;
            println!("  {beams} beams/user: {}", row.join(", "));
        }
        let ratio = power_consumption(Scheme::Mbmrf, k, n, 5 * k, &model)?
            / power_consumption(Scheme::Ba, k, n, 5 * k, &model)?;
        println!("  MBMRF/BA at 5 beams/user: {ratio:.3}");
    }
    Ok(())
}
