//! Certified asymptotic integration of `y^(n) + sum (a_i + r_i(t)) y^(i) = 0`
//! with almost periodic and decaying perturbations.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::manual_range_contains,
    clippy::type_complexity,
    clippy::map_entry,
    clippy::manual_is_multiple_of
)]

pub mod algebra;
pub mod appoly;
pub mod bell;
pub mod conditions;
pub mod error;
pub mod example_n3;
pub mod greenops;
pub mod riccati;
pub mod solver;
pub mod verify;

pub use error::{ApError, Result};
pub use num_complex::Complex64;
