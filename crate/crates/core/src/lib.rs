//! Ising/QUBO models, benchmark problems, anneal schedules, a closed-system
//! annealing simulator and a Bayesian optimizer for schedule tuning.

pub mod annealer;
pub mod bayesopt;
pub mod error;
pub mod ising;
pub mod problems;
pub mod samples;
pub mod schedules;

pub use error::{Error, Result};
pub use ising::{Domain, IsingModel, QuboModel, SpinConfig};
pub use samples::{SampleMeta, SampleRecord, SampleSet};
