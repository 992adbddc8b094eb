//! Symbolic-numeric engine for kth-order Lagrangian and Hamiltonian mechanics.

pub mod cli;
pub mod dynamics;
mod error;
pub mod hamiltonian;
pub mod jet;
pub mod lagrangian;
pub mod linalg;
pub mod symbolic;
pub mod triple;

pub use error::{Error, Result};
pub use hamiltonian::{HamiltonianSystem, LegendreInverse};
pub use jet::{Chart, ChartKind, StatePoint};
pub use lagrangian::{LagrangianSystem, LegendreMap, MomentaTable};
pub use symbolic::{Expr, VarKind, VarRef};
