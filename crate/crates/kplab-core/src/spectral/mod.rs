//! Mode grids, spectra, dispersion relations, exact linear propagators,
//! physical/spectral transforms and bicharacteristic ray flows.
//!
//! Fourier convention, fixed for the whole crate:
//!
//! ```text
//!     f(x) = Σ_k f̂(k) e^{ikx},     f̂(k) = (1/2π) ∫_T f(x) e^{-ikx} dx,
//! ```
//!
//! so that ‖f‖²_{L²(T)} = 2π Σ|f̂(k)|² and ‖f‖²_{L²(T²)} = 4π² Σ|f̂(k,l)|².

mod dispersion;
mod grid;
mod ray;
mod spectrum;
mod transform;

pub use dispersion::{omega_1d, omega_2d, propagate_1d, propagate_2d, DispersionVariant};
pub use grid::{ModeGrid1D, ModeGrid2D};
pub use ray::{ray_flow, wrap_angle, RayBranch, RayState};
pub use spectrum::{NormKind, Spectrum1D, Spectrum2D};
pub use transform::{
    from_physical_1d, from_physical_2d, physical_to_csv, to_physical_1d, to_physical_2d, x_grid,
};
