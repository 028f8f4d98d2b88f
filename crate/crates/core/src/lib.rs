pub mod channels;
pub mod error;
pub mod fock;
pub mod invariant;
pub mod keymap;
pub mod numerics;
pub mod rates;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
