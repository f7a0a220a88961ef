//! Reusable numerical kernels: normal distribution functions, Bachelier
//! pricing, Simpson quadrature, moment matching of Gaussian maxima and
//! correlation-matrix validation.

pub mod clark;
pub mod corrmatrix;
pub mod normal;
pub mod quadrature;

pub use clark::{clark_max_moments, clark_running_corr, clark_running_max};
pub use corrmatrix::{min_eigenvalue, validate_correlation_matrix, CorrelationRepairReport};
pub use normal::{bachelier, bachelier_invert_center, norm_cdf, norm_inv_cdf, norm_pdf, NormalLaw};
pub use quadrature::{
    gaussian_expectation, gaussian_grid, simpson_1d, simpson_2d, PiecewiseLinear, QuadratureGrid,
    DEFAULT_HALF_WIDTH, DEFAULT_NODES,
};
