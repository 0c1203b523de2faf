//! One-dimensional profile theory for `|∇u|^α F̃(D²u) + f(u) = 0`.
//!
//! * [`nonlinearity`]: `f`, the reduced `f_{a,A}`, `δ₁`, `θ±`, and the existence gate.
//! * [`pucci`]: Pucci extremal operators and `F(p, M) = |p|^α F̃(M)`.
//! * [`profile`]: phase-plane integration, the first integral, heteroclinic profiles.
//! * [`shooting`]: regime classification of the Cauchy problem by initial slope.
//! * [`strip`]: pseudo-time relaxation on a periodic strip and its diagnostics.

pub mod error;
pub mod export;
pub mod nonlinearity;
pub mod numeric;
pub mod profile;
pub mod pucci;
pub mod shooting;
pub mod strip;
pub mod tol;

pub use error::{Error, Result};
pub use nonlinearity::{GateReport, GateVerdict, NonlinearitySpec, PucciParams, ReducedNonlinearity};
pub use profile::{PhaseState, ProfileGrid, ProfileSolution, Trajectory};
pub use pucci::{OperatorSpec, SymMatrix};
pub use shooting::{ClassificationResult, Regime};
pub use strip::{Field2D, Grid2D};
