//! Objective functions and the two optimizers used for fitting: a
//! Nelder–Mead simplex search and a box-constrained projected-gradient descent.

mod descent;
mod likelihood;
mod objective;
mod reaction_fit;
mod simplex;

pub use descent::{bounded_descent, finite_difference_gradient};
pub use likelihood::{corrected_path_loglik, gaussian_path_score, paper_path_loglik, CorrectedScore, DEFAULT_VARIANCE_FLOOR};
pub use objective::{CalibrationResult, Objective, OptimizerOptions, OptimizerResult, Param, Termination};
pub use reaction_fit::{calibrate_reaction_model, calibrate_reaction_series, ReactionFitOptions, DEFAULT_RATE_BOUNDS, AAPL_REFERENCE_RATES};
pub use simplex::simplex_minimize;
