//! Numerics for the negative-cone σ_k Loewner–Nirenberg problem: elementary
//! symmetric functions and Gårding cones, the conformal Schouten tensor in
//! `w`-form, the radial annulus solver, singular-sphere diagnostics and the
//! local expansion near a singular hypersurface.

pub mod conformal;
pub mod error;
pub mod expansion;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod poly;
pub mod radial;
pub mod singular;
pub mod symmetric;

pub use error::{Error, Result};
