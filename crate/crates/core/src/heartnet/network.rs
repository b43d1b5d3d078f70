//! Four-chamber resistive network and its algebraic flow-balance solve.
//!
//! Chamber pressures are algebraic unknowns: at every instant each chamber
//! satisfies sum over incident edges of (p_neighbor - p_chamber)/R = dV/dt,
//! with edges formed by valves, septal shunts and the venous/arterial
//! couplings to the circulation model.

use super::valve::{ValveModel, ValveState};
use super::waveform::ChamberWaveform;
use super::{ChamberId, HeartnetError, Node, ValveId};
use crate::circuit::BoundaryPressures;

pub const CHAMBER_IDS: [ChamberId; 4] = [
    ChamberId::La,
    ChamberId::Lv,
    ChamberId::Ra,
    ChamberId::Rv,
];

/// Septal defect between two chambers, modeled as a fixed resistance.
#[derive(Debug, Clone, Copy)]
pub struct Shunt {
    pub a: ChamberId,
    pub b: ChamberId,
    pub resistance: f64,
}

/// Volume-driven four-chamber surrogate: prescribed chamber waveforms,
/// four switched-resistance valves, optional shunts.
#[derive(Debug, Clone)]
pub struct HeartNetwork {
    pub chambers: [ChamberWaveform; 4],
    pub valves: [ValveModel; 4],
    pub shunts: Vec<Shunt>,
    /// Suppress prescribed ventricular volume changes while both valves of a
    /// ventricle are away from Open, leaving a bounded residual drive.
    pub clamp_enabled: bool,
    /// Residual drive cap [mL/s] under the clamp while the prescribed volume
    /// falls (isovolumetric contraction). The upward pressure crossing to
    /// the arterial diastolic level needs an order of magnitude more drive
    /// than the downward crossing to atrial pressure, hence two caps.
    pub clamp_leak_contract: f64,
    /// Residual drive cap [mL/s] under the clamp while the prescribed volume
    /// rises (isovolumetric relaxation).
    pub clamp_leak_relax: f64,
    /// Flow threshold [mL/s] below which an open valve starts closing.
    pub backflow_threshold: f64,
}

impl HeartNetwork {
    pub fn validate(&self) -> Result<(), HeartnetError> {
        for v in &self.valves {
            v.validate()?;
        }
        for s in &self.shunts {
            if !(s.resistance > 0.0) {
                return Err(HeartnetError::Config(format!(
                    "shunt {:?}-{:?} resistance must be > 0",
                    s.a, s.b
                )));
            }
            if s.a == s.b {
                return Err(HeartnetError::Config("shunt endpoints equal".into()));
            }
        }
        if !(self.clamp_leak_contract >= 0.0 && self.clamp_leak_relax >= 0.0) {
            return Err(HeartnetError::Config("clamp leaks must be >= 0".into()));
        }
        Ok(())
    }

    pub fn waveform(&self, c: ChamberId) -> &ChamberWaveform {
        &self.chambers[c as usize]
    }

    pub fn valve(&self, v: ValveId) -> &ValveModel {
        &self.valves[v as usize]
    }

    /// Valves incident to a chamber (either endpoint).
    pub fn valves_of(&self, c: ChamberId) -> Vec<ValveId> {
        self.valves
            .iter()
            .filter(|v| v.upstream == Node::Chamber(c) || v.downstream == Node::Chamber(c))
            .map(|v| v.id)
            .collect()
    }

    /// Per-chamber volume rates at time t: the raw waveform derivative and
    /// the effective drive after the isovolumetric clamp.
    pub fn volume_rates(&self, t: f64, valve_states: &[ValveState; 4]) -> VolumeRates {
        const DEADBAND: f64 = 2.0; // mL/s
        let mut out = VolumeRates::default();
        for (i, c) in CHAMBER_IDS.iter().enumerate() {
            let raw = self.chambers[i].flow_source(t);
            out.raw[i] = raw;
            out.eff[i] = raw;
            let is_ventricle = matches!(c, ChamberId::Lv | ChamberId::Rv);
            if self.clamp_enabled && is_ventricle && self.all_valves_non_open(*c, valve_states) {
                out.clamped[i] = true;
                // bounded residual drive keeping the waveform's direction so
                // pressure still crosses the valve-trigger thresholds; rates
                // inside the dead band count as zero (spline derivatives
                // wiggle by a fraction of a mL/s around flat segments)
                out.eff[i] = if raw < -DEADBAND {
                    -self.clamp_leak_contract
                } else if raw > DEADBAND {
                    self.clamp_leak_relax
                } else {
                    0.0
                };
            }
        }
        out
    }

    fn all_valves_non_open(&self, c: ChamberId, valve_states: &[ValveState; 4]) -> bool {
        self.valves
            .iter()
            .filter(|v| v.upstream == Node::Chamber(c) || v.downstream == Node::Chamber(c))
            .all(|v| valve_states[v.id as usize] != ValveState::Open)
    }
}

/// Raw and clamp-adjusted chamber volume rates [mL/s].
#[derive(Debug, Clone, Copy, Default)]
pub struct VolumeRates {
    pub raw: [f64; 4],
    pub eff: [f64; 4],
    pub clamped: [bool; 4],
}

/// Edge between two chambers.
#[derive(Debug, Clone, Copy)]
pub struct InternalEdge {
    pub a: usize,
    pub b: usize,
    pub resistance: f64,
}

/// Edge from a chamber to a node of known pressure.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub chamber: usize,
    pub pressure: f64,
    pub resistance: f64,
}

/// Solves the linear flow-balance system for `n` chamber pressures.
///
/// Unknown pressures p satisfy, for each chamber c:
///   sum_internal G (p_other - p_c) + sum_boundary G (P_b - p_c) = dvdt[c].
pub fn solve_flow_balance(
    n: usize,
    internal: &[InternalEdge],
    boundary: &[BoundaryEdge],
    dvdt: &[f64],
) -> Result<Vec<f64>, HeartnetError> {
    assert_eq!(dvdt.len(), n);
    let mut a = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    for e in internal {
        let g = 1.0 / e.resistance;
        a[e.a][e.a] += g;
        a[e.b][e.b] += g;
        a[e.a][e.b] -= g;
        a[e.b][e.a] -= g;
    }
    for e in boundary {
        let g = 1.0 / e.resistance;
        a[e.chamber][e.chamber] += g;
        rhs[e.chamber] += g * e.pressure;
    }
    for c in 0..n {
        rhs[c] -= dvdt[c];
    }

    // Gaussian elimination with partial pivoting. The independent oracle for
    // this solve lives in the test suite.
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    for col in 0..n {
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .fold((col, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pivot_val <= scale.max(1.0) * 1e-14 {
            return Err(HeartnetError::DegenerateConfiguration(
                "flow-balance system is singular (chamber with no conducting edge)".into(),
            ));
        }
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c2 in col..n {
                    a[r][c2] -= f * a[col][c2];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut p = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c2 in r + 1..n {
            acc -= a[r][c2] * p[c2];
        }
        p[r] = acc / a[r][r];
    }
    Ok(p)
}

/// Per-chamber boundary couplings used by the network solve: effective
/// source pressure and series resistance of the atrial venous inlets, and
/// the arterial reference pressure plus series resistance added beyond each
/// semilunar valve.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySources {
    pub la_inlet: (f64, f64),
    pub ra_inlet: (f64, f64),
    pub systemic_artery: (f64, f64),
    pub pulmonary_artery: (f64, f64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ChamberPressures {
    pub p_la: f64,
    pub p_lv: f64,
    pub p_ra: f64,
    pub p_rv: f64,
}

impl ChamberPressures {
    pub fn get(&self, c: ChamberId) -> f64 {
        match c {
            ChamberId::La => self.p_la,
            ChamberId::Lv => self.p_lv,
            ChamberId::Ra => self.p_ra,
            ChamberId::Rv => self.p_rv,
        }
    }

    fn from_vec(p: &[f64]) -> Self {
        Self {
            p_la: p[0],
            p_lv: p[1],
            p_ra: p[2],
            p_rv: p[3],
        }
    }
}

/// Flows through every edge of the network [mL/s]. Valve and shunt flows are
/// positive from upstream/`a` to downstream/`b`; venous flows are positive
/// into the atria; arterial flows positive out of the heart.
#[derive(Debug, Clone, Default)]
pub struct EdgeFlows {
    pub valve: [f64; 4],
    pub shunt: Vec<f64>,
    pub q_ven_pul: f64,
    pub q_ven_sys: f64,
    pub q_ao: f64,
    pub q_pa: f64,
}

/// Assembles the four-chamber system with the given per-valve resistances
/// and solves for pressures and all edge flows.
pub fn solve_network(
    net: &HeartNetwork,
    sources: &BoundarySources,
    valve_resistances: &[f64; 4],
    dvdt: &[f64; 4],
) -> Result<(ChamberPressures, EdgeFlows), HeartnetError> {
    let mut internal = Vec::with_capacity(6);
    let mut boundary = Vec::with_capacity(4);

    // venous inlets
    boundary.push(BoundaryEdge {
        chamber: ChamberId::La as usize,
        pressure: sources.la_inlet.0,
        resistance: sources.la_inlet.1,
    });
    boundary.push(BoundaryEdge {
        chamber: ChamberId::Ra as usize,
        pressure: sources.ra_inlet.0,
        resistance: sources.ra_inlet.1,
    });

    for v in &net.valves {
        let r = valve_resistances[v.id as usize];
        match (v.upstream, v.downstream) {
            (Node::Chamber(a), Node::Chamber(b)) => internal.push(InternalEdge {
                a: a as usize,
                b: b as usize,
                resistance: r,
            }),
            (Node::Chamber(c), Node::SystemicArtery) | (Node::SystemicArtery, Node::Chamber(c)) => {
                boundary.push(BoundaryEdge {
                    chamber: c as usize,
                    pressure: sources.systemic_artery.0,
                    resistance: r + sources.systemic_artery.1,
                })
            }
            (Node::Chamber(c), Node::PulmonaryArtery)
            | (Node::PulmonaryArtery, Node::Chamber(c)) => boundary.push(BoundaryEdge {
                chamber: c as usize,
                pressure: sources.pulmonary_artery.0,
                resistance: r + sources.pulmonary_artery.1,
            }),
            _ => {
                return Err(HeartnetError::Config(format!(
                    "valve {:?} must connect a chamber to a chamber or artery",
                    v.id
                )))
            }
        }
    }
    for s in &net.shunts {
        internal.push(InternalEdge {
            a: s.a as usize,
            b: s.b as usize,
            resistance: s.resistance,
        });
    }

    let p = solve_flow_balance(4, &internal, &boundary, dvdt)?;
    let pressures = ChamberPressures::from_vec(&p);

    let mut flows = EdgeFlows {
        shunt: Vec::with_capacity(net.shunts.len()),
        ..Default::default()
    };
    let node_pressure = |n: Node, arterial: &BoundarySources| -> (f64, f64) {
        // (pressure, extra series resistance on this side)
        match n {
            Node::Chamber(c) => (p[c as usize], 0.0),
            Node::SystemicArtery => (arterial.systemic_artery.0, arterial.systemic_artery.1),
            Node::PulmonaryArtery => (arterial.pulmonary_artery.0, arterial.pulmonary_artery.1),
        }
    };
    for v in &net.valves {
        let r = valve_resistances[v.id as usize];
        let (p_up, r_up) = node_pressure(v.upstream, sources);
        let (p_down, r_down) = node_pressure(v.downstream, sources);
        let q = (p_up - p_down) / (r + r_up + r_down);
        flows.valve[v.id as usize] = q;
        match v.downstream {
            Node::SystemicArtery => flows.q_ao += q,
            Node::PulmonaryArtery => flows.q_pa += q,
            Node::Chamber(_) => {}
        }
        match v.upstream {
            Node::SystemicArtery => flows.q_ao -= q,
            Node::PulmonaryArtery => flows.q_pa -= q,
            Node::Chamber(_) => {}
        }
    }
    for s in &net.shunts {
        flows
            .shunt
            .push((p[s.a as usize] - p[s.b as usize]) / s.resistance);
    }
    flows.q_ven_pul =
        (sources.la_inlet.0 - p[ChamberId::La as usize]) / sources.la_inlet.1;
    flows.q_ven_sys =
        (sources.ra_inlet.0 - p[ChamberId::Ra as usize]) / sources.ra_inlet.1;

    Ok((pressures, flows))
}

/// Spec-level algebraic closure: chamber pressures given fixed boundary
/// pressures (the circulation feedback values), an inlet edge resistance and
/// frozen valve resistances.
pub fn solve_chamber_pressures(
    net: &HeartNetwork,
    bp: &BoundaryPressures,
    inlet_resistance: f64,
    t: f64,
    valve_resistances: &[f64; 4],
) -> Result<(ChamberPressures, EdgeFlows), HeartnetError> {
    let states = [
        net.valves[0].state,
        net.valves[1].state,
        net.valves[2].state,
        net.valves[3].state,
    ];
    let dvdt = net.volume_rates(t, &states).eff;
    let sources = BoundarySources {
        la_inlet: (bp.p_la_in, inlet_resistance),
        ra_inlet: (bp.p_ra_in, inlet_resistance),
        systemic_artery: (bp.p_ao_out, 0.0),
        pulmonary_artery: (bp.p_pa_out, 0.0),
    };
    solve_network(net, &sources, valve_resistances, &dvdt)
}
