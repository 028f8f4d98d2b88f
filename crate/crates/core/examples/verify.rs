//! Runs the self-check suites, then again with a corrupted coefficient to
//! show the closed-form checks notice.

use hetbb84::verify::{report, run_all, VerifyOptions};

fn main() {
    print!("{}", report(&run_all(&VerifyOptions::default())));
    println!();
    let corrupted = VerifyOptions {
        perturb_lambda: Some((1, 1e-6)),
    };
    print!("{}", report(&run_all(&corrupted)));
}
