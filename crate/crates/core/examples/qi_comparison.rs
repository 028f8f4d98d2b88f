//! Misalignment errors: our passive-attack bound against the
//! virtual-detector model, both with optimized thresholds.

use hetbb84::channels::{eta_from_db, passive_rate, qi_equivalent_f1, qi_rate};
use hetbb84::numerics::lambda_coeffs;
use hetbb84::rates::optimize_tau;
use hetbb84::sweep::{qi_compare_table, zero_crossing_db};

fn best(rate: impl Fn(f64) -> hetbb84::Result<f64>) -> hetbb84::Result<f64> {
    Ok(optimize_tau(rate, 0.1, 5.0)?.rate)
}

fn main() -> hetbb84::Result<()> {
    let table = qi_compare_table(&[0.0, 0.01], &[0.0, 5.0, 10.0], 0.1, 5.0)?;
    print!("{}", table.to_csv());

    for ed in [0.01, 0.05] {
        let f1 = qi_equivalent_f1(ed);
        let ours = zero_crossing_db(
            |db| {
                best(|t| Ok(passive_rate(eta_from_db(db), f1, &lambda_coeffs(t, 1)?)?.rate_signed))
            },
            0.0,
            40.0,
            0.01,
        )?;
        let theirs = zero_crossing_db(
            |db| best(|t| Ok(qi_rate(eta_from_db(db), ed, &lambda_coeffs(t, 1)?)?.rate_signed)),
            0.0,
            40.0,
            0.01,
        )?;
        println!("Ed = {ed}: rate vanishes at {ours:.2?} dB (ours) vs {theirs:.2?} dB");
    }
    Ok(())
}
