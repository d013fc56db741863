//! The Weinstein space in section coordinates: cotangent maps, reduced
//! derivatives, the reduced bracket and Hamiltonian flows, and the
//! canonical-bracket oracle on `T*Q`.

mod bracket;
mod derivatives;
mod flow;
mod observable;
mod oracle;
mod point;

pub use bracket::BracketBreakdown;
pub use derivatives::{ReducedDerivatives, INVARIANCE_TOL};
pub use flow::{Trajectory, TrajectoryRecord};
pub use observable::{fd_point_gradient, FnObservable, Observable, PointGradient};
pub use oracle::UpstairsGradient;
pub use point::{CotangentVector, PointRecord, WeinsteinPoint, WeinsteinTangent, ANN_H_TOL};
