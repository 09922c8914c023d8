//! Power leakage of an off-grid path, closed form and empirical.

use beamspace::arrays::ArrayGeometry;
use beamspace::leakage::{
    leakage_ratio, leakage_sweep, single_path_beamspace, worst_case_leakage_ula, worst_case_leakage_upa,
};

fn main() -> beamspace::Result<()> {
    for n in [16, 64, 256, 1024] {
        println!("ULA {n:>4}: worst-case eta = {:.4}", worst_case_leakage_ula(n)?);
    }
    println!("UPA 16x16: worst-case eta = {:.4}", worst_case_leakage_upa(16, 16)?);

    let g: ArrayGeometry = "ula:256".parse()?;
    for p in leakage_sweep(g, 6)? {
        println!("offset {:.2} beams -> eta {:.4}", p.offset, p.eta);
    }

    let report = leakage_ratio(&single_path_beamspace(g, 40, 0.3)?)?;
    let top: Vec<String> = (report.peak_index - 2..=report.peak_index + 2)
        .map(|i| format!("{:.3}", report.per_beam_power[i]))
        .collect();
    println!("beam powers around the peak ({}): {}", report.peak_index, top.join(" "));
    Ok(())
}
