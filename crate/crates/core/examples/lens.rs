//! Steering vectors, the lens (DFT) transform and the Dirichlet kernel.

use beamspace::arrays::{dirichlet_kernel, ArrayGeometry, Direction, LensTransform, SpatialDirection};

fn main() -> beamspace::Result<()> {
    let g = ArrayGeometry::ula(8)?;
    let lens = LensTransform::new(g);

    let on_grid = lens.apply(&g.steering_vector(g.grid_direction(3))?);
    println!(
        "grid beam 3 -> |hb| = {:?}",
        on_grid
            .iter()
            .map(|z| (z.norm() * 1e3).round() / 1e3)
            .collect::<Vec<_>>()
    );

    let phi = 0.07;
    let off_grid = lens.apply(&g.steering_vector(Direction::Linear(SpatialDirection::new(phi)?))?);
    for (i, z) in off_grid.iter().enumerate() {
        let dir = g.grid_direction(i).azimuth().value();
        println!(
            "beam {i} at {dir:+.4}: {:+.4} (kernel {:+.4})",
            z.re,
            dirichlet_kernel(8, dir - phi)
        );
    }

    let upa = ArrayGeometry::upa(4, 2)?;
    let (az, el) = upa.beam_coords(5);
    println!(
        "{upa}: flat 5 is (az {az}, el {el}), back to {}",
        upa.flat_index(az, el)
    );
    Ok(())
}
