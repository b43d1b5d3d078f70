//! Desk-scale cardiac circulation toolkit: a closed-loop 0D lumped-parameter
//! circulation coupled to a volume-driven four-chamber heart surrogate with
//! switched-resistance valves, plus the supporting geometric, registration,
//! contact and energetics numerics.

pub mod circuit;
pub mod contact;
pub mod energetics;
pub mod geometry;
pub mod heartnet;

pub use circuit::{
    boundary_pressures, lpn_rhs, rk4_step, BoundaryFlows, BoundaryPressures, CircuitError,
    LpnDerivative, LpnParameters, LpnState,
};
