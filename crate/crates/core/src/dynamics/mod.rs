//! Time integration of the coupled bulk/boundary problem with memory, its
//! memoryless limit and the split systems of a difference of two solutions.

mod config;
mod init;
mod nonlinearity;
mod report;
mod simulate;
mod stepper;

pub use config::{
    ConfigIssue, Generator, GridConfig, HistoryMode, HistoryProfileKind, InitialConfig, IntegrationConfig,
    KernelConfig, NonlinearityConfig, PhysicsConfig, Problem, RunConfig, SolverKind,
};
pub use init::{band_limited, initial_field, initial_history, MAX_WAVENUMBER, MAX_Y_DEGREE};
pub use nonlinearity::{make_nonlinearity, NonlinearConstants, Nonlinearity, Polynomial};
pub use report::{EnergyReport, Trajectory};
pub use simulate::{
    initial_data, run, simulate, simulate_memoryless, simulate_split, SplitNorms, SplitRow, SplitTrajectory,
};
pub use stepper::{MemorylessForm, Simulation};
