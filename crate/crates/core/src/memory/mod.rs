//! History variable in two interchangeable representations, with the memory
//! load, the M-norms, the tail function and the transport pairing.

mod direct;
mod expint;
mod modes;
mod oracle;
mod profile;
mod spec;
mod tail;

pub use direct::{DirectHistory, HistoryProfiles};
pub use expint::{exp_poly_integral, moments, relaxation_gain};
pub use modes::{ModeHistory, RegionModes};
pub use oracle::{exact_history_oracle, InputSeries};
pub use profile::{PiecewiseLinear, PiecewiseQuadratic, Segment};
pub use spec::HistorySpec;
pub use tail::{default_taus, tail_and_norms, tr_pairing, TailReport};

use crate::discretization::WentzellOperator;
use crate::error::Result;
use crate::kernels::MemoryKernel;
use crate::scalar::Real;

/// Both representations of the same initial history.
pub fn init_history<T: Real>(
    op: &WentzellOperator<T>,
    kernel_bulk: &MemoryKernel<T>,
    kernel_boundary: &MemoryKernel<T>,
    spec: &HistorySpec<T>,
    s_max: T,
) -> Result<(ModeHistory<T>, DirectHistory<T>)> {
    let modes = ModeHistory::init(op, kernel_bulk, kernel_boundary, spec)?;
    let direct = DirectHistory::new(op.grid(), spec.clone(), s_max)?;
    Ok((modes, direct))
}
