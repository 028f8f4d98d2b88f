//! Prints the click probabilities lambda_n for a few thresholds.

use hetbb84::numerics::lambda_coeffs;

fn main() -> hetbb84::Result<()> {
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "tau", "lambda_0", "lambda_1", "lambda_2", "lambda_3"
    );
    for tau in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
        let c = lambda_coeffs(tau, 3)?;
        println!(
            "{tau:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            c.lambda(0),
            c.lambda(1),
            c.lambda(2),
            c.lambda(3)
        );
    }
    Ok(())
}
