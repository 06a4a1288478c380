//! Densities, moment generating functions and MGF-based symbol error rates
//! for generalized wireless fading models.

pub mod cli;
pub mod error;
pub mod errorrates;
pub mod expfit;
pub mod mgf;
pub mod models;
pub mod specfun;

pub use error::{Error, Result};
pub use errorrates::{aser, aser_sweep, modulation_spec, ModulationSpec, Scheme, SerCurve};
pub use expfit::{eval_exp_sum, fit_exp_sum, ExpSumFit, FitCache, GridSpec};
pub use mgf::{mgf, MgfEvaluator, MgfStrategy};
pub use models::{CompactParams, FadingModel, Family};
