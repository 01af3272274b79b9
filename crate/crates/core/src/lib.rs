//! Two-strata persistent gambler's ruin.
//!
//! A walk on the integers whose next increment repeats the previous one with
//! probability `a` at levels `|X| < f` and `b` at levels `f <= |X| < N`,
//! absorbed at `|X| = N`. The crate provides
//!
//! * [`ring`]: exact rationals, complex numbers and truncated trivariate
//!   series behind one [`ring::Ring`] trait;
//! * [`fib`]: Fibonacci-type polynomial sequences and the stratified
//!   denominator/numerator arrays `w̄_{m,n}`, `q̄_n`;
//! * [`ruin`]: exact one-sided passage probabilities and the excursion
//!   height law;
//! * [`gf`]: first-passage, excursion, meander and last-visit generating
//!   functions for (runs, short runs, steps);
//! * [`oracle`]: brute-force weighted path enumeration used as ground truth;
//! * [`sim`]: a Monte Carlo engine (data-parallel with the `parallel`
//!   feature);
//! * [`limits`]: limiting characteristic functions and Fourier inversion.

pub mod error;
pub mod fib;
pub mod gf;
pub mod limits;
pub mod oracle;
pub mod params;
pub mod ring;
pub mod ruin;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use params::ModelParams;
