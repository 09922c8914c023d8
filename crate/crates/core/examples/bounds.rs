//! Central beamspace variances and sum-rate upper bounds.

use beamspace::bounds::{
    ba_rate_bound, central_variance_approx, central_variance_exact, kernel_concentration, mbmrf_rate_bound, rate_gap,
    BoundMode, BoundParams, UserBound,
};
use beamspace::channel::large_scale_fading;
use beamspace::metrics::{dbm_to_watts, noise_power};

fn main() -> beamspace::Result<()> {
    let n = 512;
    for size in [64, 512, 1024] {
        println!("kernel concentration N={size}: {:.4}", kernel_concentration(size)?);
    }
    println!(
        "approx central variance (width 10): {:.5}",
        central_variance_approx(0, 10)?
    );
    for i in [1, 5, 9, 10, 15] {
        println!("  element {i:>2}: {:.5}", central_variance_exact(n, 0, 10, i)?);
    }

    for beams in [1.0, 4.0, 8.0] {
        let params = BoundParams {
            n,
            p_t: dbm_to_watts(10.0),
            sigma2: noise_power(500e6, -174.0)?,
            users: vec![
                UserBound {
                    s0: 0,
                    s1: 10,
                    beams,
                    mu: large_scale_fading(10.0, 0.0)?,
                    clusters: 1
                };
                8
            ],
        };
        let gap = rate_gap(&params, BoundMode::Exact)?;
        println!(
            "B={beams}: BA {:.2}, MBMRF {:.2}, gap {:.3} (cap {:.3}), approx BA {:.2}",
            ba_rate_bound(&params, BoundMode::Exact)?,
            mbmrf_rate_bound(&params, BoundMode::Exact)?,
            gap.gap,
            gap.cap,
            ba_rate_bound(&params, BoundMode::Approx)?
        );
    }
    Ok(())
}
