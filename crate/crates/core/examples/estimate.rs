//! Worst-case key rate from measured gain, error parameter and photon
//! statistics.

use hetbb84::channels::{gaussian_rate, gaussian_stats};
use hetbb84::numerics::lambda_coeffs;
use hetbb84::rates::{
    constrained_min_rate, tail_bounds, ConstraintMode, EstimateSet, Target, TAIL_HORIZON,
};
use hetbb84::sweep::format_estimate;

fn main() -> hetbb84::Result<()> {
    // estimates a noisy channel would produce
    let (eta, n, tau) = (0.3, 1e-3, 1.4);
    let coeffs = lambda_coeffs(tau, TAIL_HORIZON + 1)?;
    let stats = gaussian_stats(eta, n)?;
    let tail = tail_bounds(&stats.p[..4], &coeffs)?;
    let plug_in = gaussian_rate(eta, n, &coeffs)?;

    let est = EstimateSet {
        q_hat: tail.q_k,
        target: Target::C(plug_in.c),
        p_hat: stats.p[..4].to_vec(),
    };
    let worst = constrained_min_rate(&est, &coeffs, ConstraintMode::Inequality)?;
    print!("{}", format_estimate(&worst));
    println!("rate with the true mixing parameters: {:.6e}", plug_in.rate);

    // an error parameter no passive attack can produce
    let bad = EstimateSet {
        target: Target::C(0.0),
        ..est
    };
    match constrained_min_rate(&bad, &coeffs, ConstraintMode::Equality) {
        Err(e) => println!("rejected: {e}"),
        Ok(r) => println!("unexpectedly feasible: rate {:.3e}", r.breakdown.rate),
    }
    Ok(())
}
