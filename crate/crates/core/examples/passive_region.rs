//! The (Q, c) region reachable by passive attacks, and recovering the
//! attack parameters from a point inside it.

use hetbb84::channels::{feasible_region, passive_attack_params, passive_rate};
use hetbb84::numerics::lambda_coeffs;

fn main() -> hetbb84::Result<()> {
    let coeffs = lambda_coeffs(1.0, 1)?;
    let region = feasible_region(&coeffs)?;
    println!("Q ranges over [{:.5}, {:.5}]", region.q_min, region.q_max);
    println!("{:>5} {:>9} {:>9} {:>9}", "eta", "Q", "c_min", "c_max");
    for i in 0..=5 {
        let eta = i as f64 / 5.0;
        println!(
            "{eta:>5.2} {:>9.5} {:>9.5} {:>9.5}",
            region.q_of(eta),
            region.c_min(eta),
            region.c_max(eta)
        );
    }

    let attack = passive_rate(0.8, 0.97, &coeffs)?;
    let (eta, f1) = passive_attack_params(attack.q, attack.c, &coeffs)?;
    println!(
        "\nQ = {:.6}, c = {:.6} -> eta = {eta:.6}, f1 = {f1:.6}, rate {:.6}",
        attack.q, attack.c, attack.rate
    );
    Ok(())
}
