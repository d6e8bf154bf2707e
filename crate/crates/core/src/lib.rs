//! Fixed-energy inverse scattering in three dimensions through Faddeev's
//! generalized scattering amplitude and a nonlinear ∂̄ fixed-point equation.
//!
//! The crate turns scattering amplitude samples `f(k,l)` on the energy
//! shell into approximations `v̂±(p)` of the potential's Fourier transform on
//! the ball `|p| < 2τ√E`, and from there into a band-limited real-space
//! reconstruction. See the `examples/` directory for one runnable program
//! per stage.

pub mod coords;
pub mod dbar;
pub mod domain;
pub mod extract;
pub mod error;
pub mod faddeev;
pub mod forward;
pub mod pipeline;
pub mod io_formats;
pub mod potentials;
pub mod quad;
pub mod vec3;
pub mod verify;

pub use error::{Error, Result};
pub use vec3::{CVec3, Vec3};
