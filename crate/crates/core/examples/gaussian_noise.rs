//! Loss plus excess Gaussian noise: tolerable loss and comparison with the
//! continuous-variable upper bound.

use hetbb84::channels::{cv_upper_bound, eta_from_db, gaussian_stats};
use hetbb84::sweep::{gaussian_optimal_rate, gaussian_tau_ceiling, zero_crossing_db};

fn main() -> hetbb84::Result<()> {
    let hi = gaussian_tau_ceiling()?;
    println!("tail bound holds for tau up to {hi:.4}");

    let stats = gaussian_stats(0.5, 1e-3)?;
    println!(
        "photon statistics at eta = 0.5, N = 1e-3: P = {:.3?}, f = {:.4?}",
        &stats.p[..4],
        &stats.f[..4]
    );

    for n in [1e-6, 1e-4, 1e-3] {
        println!("\nN = {n:e}");
        for db in [0.0, 5.0, 10.0, 15.0] {
            let eta = eta_from_db(db);
            let r = gaussian_optimal_rate(eta, n, 0.1, hi)?;
            println!(
                "  {db:>4} dB: rate {:.4e} at tau {:.3}, upper bound {:.4e}",
                r.rate,
                r.tau,
                cv_upper_bound(eta, n)?
            );
        }
        let zero = zero_crossing_db(
            |db| Ok(gaussian_optimal_rate(eta_from_db(db), n, 0.1, hi)?.rate_signed),
            0.0,
            40.0,
            0.05,
        )?;
        println!("  rate vanishes at {zero:.2?} dB");
    }
    Ok(())
}
