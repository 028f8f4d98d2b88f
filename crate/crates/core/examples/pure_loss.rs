//! Optimal threshold and key rate over a pure-loss channel, and the
//! long-distance scaling of the rate.

use hetbb84::channels::{eta_from_db, pure_loss_asymptote, pure_loss_rate};
use hetbb84::numerics::lambda_coeffs;
use hetbb84::rates::optimize_tau;

fn main() -> hetbb84::Result<()> {
    println!("{:>6} {:>8} {:>12}", "eta", "tau_opt", "rate");
    for eta in [1.0, 0.8, 0.6, 0.4, 0.2] {
        let opt = optimize_tau(
            |t| Ok(pure_loss_rate(eta, &lambda_coeffs(t, 1)?)?.rate_signed),
            0.05,
            5.0,
        )?;
        println!("{eta:>6.2} {:>8.4} {:>12.6e}", opt.tau, opt.rate);
    }

    let eta = eta_from_db(30.0);
    let tau = 1.59;
    let r = pure_loss_rate(eta, &lambda_coeffs(tau, 1)?)?;
    println!(
        "\nat 30 dB and tau = {tau}: rate/eta^2 = {:.6}, asymptote = {:.6}",
        r.rate / (eta * eta),
        pure_loss_asymptote(tau)
    );
    Ok(())
}
