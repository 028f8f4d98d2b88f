//! Builds rotation-invariant sector states and checks their defining
//! properties.

use hetbb84::fock::{schwinger_total, Generator};
use hetbb84::invariant::{invariant_state, mixing_parameter, sector_summary};
use hetbb84::numerics::lambda_coeffs;

fn main() -> hetbb84::Result<()> {
    let s = invariant_state(1, 0.3)?;
    println!("one-photon state at f = 0.3:\n{}", s.rho);

    for j in 0..=6 {
        let s = invariant_state(j, 0.7)?;
        let dense = s.rho.to_dense();
        let comm = [Generator::ZTot, Generator::PlusTot]
            .iter()
            .map(|&g| schwinger_total(j, g).commutator(&dense).frobenius())
            .fold(0.0, f64::max);
        let f = if j > 0 {
            mixing_parameter(&s.rho, j)?
        } else {
            f64::NAN
        };
        println!(
            "j = {j}: trace {:.3}, recovered f {f:.6}, max commutator {comm:.1e}",
            s.rho.trace()
        );
    }

    let coeffs = lambda_coeffs(1.0, 3)?;
    println!("\n   j   yield   c(f) = c0 + slope f");
    for j in 0..=3 {
        let s = sector_summary(&coeffs, j)?;
        println!(
            "{j:>4} {:>7.5} {:>8.5} + {:>8.5} f",
            s.yield_, s.c_const, s.c_slope
        );
    }
    Ok(())
}
