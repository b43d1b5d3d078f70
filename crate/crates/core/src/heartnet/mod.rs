//! Volume-driven four-chamber heart surrogate closing the circulation loop:
//! prescribed chamber volume waveforms act as flow sources, valves are
//! switched resistances with pressure/backflow triggers, optional septal
//! shunts realize the CHD topology.

use thiserror::Error;

pub mod calibrate;
pub mod network;
pub mod presets;
pub mod simulate;
pub mod valve;
pub mod waveform;

pub use calibrate::{
    calibrate, CalibrationResult, CalibrationSettings, PressureTarget, Statistic, TargetQuantity,
};
pub use network::{
    solve_chamber_pressures, solve_flow_balance, solve_network, BoundaryEdge, BoundarySources,
    ChamberPressures, EdgeFlows, HeartNetwork, InternalEdge, Shunt,
};
pub use simulate::{
    simulate, SimulationOptions, SimulationResult, StepRecord, ValveEvent, ValveTransition,
};
pub use valve::{ValveModel, ValveState};
pub use waveform::{AtriumSpec, ChamberWaveform, PeriodicSpline, VentricleSpec};

use crate::circuit::CircuitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChamberId {
    La = 0,
    Lv = 1,
    Ra = 2,
    Rv = 3,
}

impl ChamberId {
    pub fn as_str(self) -> &'static str {
        match self {
            ChamberId::La => "la",
            ChamberId::Lv => "lv",
            ChamberId::Ra => "ra",
            ChamberId::Rv => "rv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "la" => ChamberId::La,
            "lv" => ChamberId::Lv,
            "ra" => ChamberId::Ra,
            "rv" => ChamberId::Rv,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValveId {
    Mv = 0,
    Av = 1,
    Tv = 2,
    Pv = 3,
}

pub const VALVE_IDS: [ValveId; 4] = [ValveId::Mv, ValveId::Av, ValveId::Tv, ValveId::Pv];

impl ValveId {
    pub fn as_str(self) -> &'static str {
        match self {
            ValveId::Mv => "mv",
            ValveId::Av => "av",
            ValveId::Tv => "tv",
            ValveId::Pv => "pv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mv" => ValveId::Mv,
            "av" => ValveId::Av,
            "tv" => ValveId::Tv,
            "pv" => ValveId::Pv,
            _ => return None,
        })
    }
}

/// Network node: a chamber or one of the two arterial couplings to the
/// circulation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Chamber(ChamberId),
    SystemicArtery,
    PulmonaryArtery,
}

impl Node {
    pub fn parse(s: &str) -> Option<Self> {
        if let Some(c) = ChamberId::parse(s) {
            return Some(Node::Chamber(c));
        }
        match s {
            "systemic_artery" | "aorta" => Some(Node::SystemicArtery),
            "pulmonary_artery" | "pa" => Some(Node::PulmonaryArtery),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Node::Chamber(c) => c.as_str(),
            Node::SystemicArtery => "systemic_artery",
            Node::PulmonaryArtery => "pulmonary_artery",
        }
    }
}

#[derive(Debug, Error)]
pub enum HeartnetError {
    #[error("waveform error: {0}")]
    Waveform(String),
    #[error("valve error: {0}")]
    Valve(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<HeartnetError>,
    },
    #[error("circuit error: {0}")]
    Circuit(#[from] CircuitError),
    #[error("calibration error: {0}")]
    Calibration(String),
}

impl HeartnetError {
    pub fn at_step(self, step: usize) -> Self {
        HeartnetError::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
