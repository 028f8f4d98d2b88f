//! Writes the pure-loss sweep as CSV, the same table the command-line tool
//! emits.

use hetbb84::sweep::{etas_from, parse_grid, pure_loss_table, TauChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let losses = parse_grid("0:30:7")?;
    let etas = etas_from(None, Some(losses))?;
    let table = pure_loss_table(&etas, &TauChoice::Optimize { lo: 0.05, hi: 5.0 })?;
    print!("{}", table.to_csv());
    Ok(())
}
