//! Closed-form relative entropies per photon sector next to the eigenvalue
//! computation on the full key-map output.

use hetbb84::invariant::invariant_state;
use hetbb84::keymap::{rel_entropy, rel_entropy_closed, rel_entropy_numeric};
use hetbb84::numerics::lambda_coeffs;

fn main() -> hetbb84::Result<()> {
    let coeffs = lambda_coeffs(1.0, 6)?;
    println!("  j     f     closed      numeric     difference");
    for j in 0..=3 {
        for f in [0.0, 0.5, 1.0] {
            let closed = rel_entropy_closed(j, f, &coeffs)?;
            let numeric = rel_entropy_numeric(&invariant_state(j, f)?, &coeffs)?;
            println!(
                "{j:>3} {f:>5.2} {closed:>10.7} {numeric:>12.7} {:>12.1e}",
                closed - numeric
            );
        }
    }
    // beyond three photons only the numeric path exists
    for j in 4..=6 {
        println!("j = {j}, f = 0.5: {:.7}", rel_entropy(j, 0.5, &coeffs)?);
    }
    Ok(())
}
