//! Coupled time stepping of the four-chamber network and the circulation
//! ODEs.
//!
//! Per step: valve resistances are frozen, the algebraic network is
//! re-solved at every RK4 stage to supply boundary flows, valve triggers are
//! evaluated on the step-start solution and state changes take effect on the
//! next step. Venous inductors are treated implicitly: the L·dQ/dt term is
//! folded into the inlet edge resistance as L/dt against the previous step's
//! flow.

use super::network::{
    solve_network, BoundarySources, ChamberPressures, EdgeFlows, HeartNetwork,
};
use super::valve::ValveState;
use super::{HeartnetError, Node, ValveId, VALVE_IDS};
use crate::circuit::{
    boundary_pressures, rk4_step, BoundaryFlows, BoundaryPressures, CircuitError, LpnParameters,
    LpnState,
};

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub cycles: usize,
    /// Nominal step [s]; snapped to an exact divisor of the period.
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t: f64,
    pub state: LpnState,
    pub chamber_pressures: ChamberPressures,
    pub boundary_pressures: BoundaryPressures,
    pub boundary_flows: BoundaryFlows,
    pub volumes: [f64; 4],
    pub dvdt: [f64; 4],
    pub valve_states: [ValveState; 4],
    pub valve_progress: [f64; 4],
    pub flows: EdgeFlows,
}

/// Direction of a valve status change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValveTransition {
    Open,
    Close,
}

impl ValveTransition {
    pub fn as_str(self) -> &'static str {
        match self {
            ValveTransition::Open => "open",
            ValveTransition::Close => "close",
        }
    }
}

/// A triggered valve status change (the start of the prescribed motion).
#[derive(Debug, Clone, Copy)]
pub struct ValveEvent {
    pub valve: ValveId,
    pub transition: ValveTransition,
    pub time: f64,
    pub cycle: usize,
    pub pct_of_cycle: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub records: Vec<StepRecord>,
    pub events: Vec<ValveEvent>,
    pub dt: f64,
    pub steps_per_cycle: usize,
    pub cycles: usize,
    pub period: f64,
}

impl SimulationResult {
    /// Step records belonging to one cycle (0-based).
    pub fn cycle_records(&self, cycle: usize) -> &[StepRecord] {
        let a = cycle * self.steps_per_cycle;
        let b = ((cycle + 1) * self.steps_per_cycle).min(self.records.len());
        &self.records[a..b]
    }

    pub fn last_cycle(&self) -> &[StepRecord] {
        self.cycle_records(self.cycles - 1)
    }
}

struct StageSolution {
    pressures: ChamberPressures,
    flows: EdgeFlows,
    boundary_flows: BoundaryFlows,
    dvdt: [f64; 4],
    raw_dvdt: [f64; 4],
    clamped: [bool; 4],
}

/// Solves the network at one stage time against the stage circulation state.
#[allow(clippy::too_many_arguments)]
fn solve_stage(
    net: &HeartNetwork,
    params: &LpnParameters,
    t: f64,
    state: &LpnState,
    valve_r: &[f64; 4],
    valve_states: &[ValveState; 4],
    repay: &[f64; 4],
    q_ven_prev: (f64, f64),
    dt: f64,
) -> Result<StageSolution, HeartnetError> {
    let rates = net.volume_rates(t, valve_states);
    let mut dvdt = rates.eff;
    for i in 0..4 {
        if !rates.clamped[i] {
            dvdt[i] += repay[i];
        }
    }

    // Venous inlet chains p_ven -> [r_ven + r_min + L/dt] -> cap -> [r_min]
    // -> atrium, with the inductor's backward difference folded into the
    // source pressure and series resistance.
    let (q_vp_prev, q_vs_prev) = q_ven_prev;
    let la_inlet = (
        state.p_ven_pul + params.l_ven_pul / dt * q_vp_prev,
        params.r_ven_pul + 2.0 * params.r_min + params.l_ven_pul / dt,
    );
    let ra_inlet = (
        state.p_ven_sys + params.l_ven_sys / dt * q_vs_prev,
        params.r_ven_sys + 2.0 * params.r_min + params.l_ven_sys / dt,
    );
    let sources = BoundarySources {
        la_inlet,
        ra_inlet,
        systemic_artery: (state.p_ar_sys, params.r_min),
        pulmonary_artery: (state.p_ar_pul, params.r_min),
    };

    let (pressures, flows) = solve_network(net, &sources, valve_r, &dvdt)?;
    let boundary_flows = BoundaryFlows {
        q_ao: flows.q_ao,
        q_pa: flows.q_pa,
        q_ven_sys: flows.q_ven_sys,
        q_ven_pul: flows.q_ven_pul,
        dq_ven_sys_dt: (flows.q_ven_sys - q_vs_prev) / dt,
        dq_ven_pul_dt: (flows.q_ven_pul - q_vp_prev) / dt,
    };
    Ok(StageSolution {
        pressures,
        flows,
        boundary_flows,
        dvdt,
        raw_dvdt: rates.raw,
        clamped: rates.clamped,
    })
}

/// Pressure seen by a valve endpoint: chamber pressure for chamber nodes,
/// the coupled boundary pressure for artery nodes.
fn endpoint_pressure(
    node: Node,
    pressures: &ChamberPressures,
    bp: &BoundaryPressures,
) -> f64 {
    match node {
        Node::Chamber(c) => pressures.get(c),
        Node::SystemicArtery => bp.p_ao_out,
        Node::PulmonaryArtery => bp.p_pa_out,
    }
}

/// Runs the coupled simulation for `cycles` cardiac cycles.
pub fn simulate(
    net: &HeartNetwork,
    params: &LpnParameters,
    init: &LpnState,
    options: &SimulationOptions,
) -> Result<SimulationResult, HeartnetError> {
    net.validate()?;
    params.validate().map_err(HeartnetError::Circuit)?;
    let period = net.chambers[0].period;
    for c in &net.chambers {
        if (c.period - period).abs() > 1e-12 {
            return Err(HeartnetError::Config(
                "all chamber waveforms must share one period".into(),
            ));
        }
    }
    if !(options.dt > 0.0) || options.dt > period / 500.0 {
        return Err(HeartnetError::Config(format!(
            "dt = {} must be positive and at most period/500 = {}",
            options.dt,
            period / 500.0
        )));
    }

    let steps_per_cycle = (period / options.dt).round() as usize;
    let dt = period / steps_per_cycle as f64;
    let total_steps = steps_per_cycle * options.cycles;

    let mut net = net.clone();
    let mut state = *init;
    let mut q_ven_prev = (0.0, 0.0);
    let mut backflow_streak = [0u32; 4];
    // volume withheld from each chamber by the clamp, repaid as a bounded
    // extra flow once a valve is open again so the effective volume tracks
    // the prescribed curve over every cycle
    let mut volume_deficit = [0.0f64; 4];
    const REPAY_MAX: f64 = 10.0; // mL/s
    let repay_steps = 20.0;
    let mut records = Vec::with_capacity(total_steps);
    let mut events = Vec::new();

    for step in 0..total_steps {
        let t = step as f64 * dt;
        let valve_r = [
            net.valves[0].resistance(),
            net.valves[1].resistance(),
            net.valves[2].resistance(),
            net.valves[3].resistance(),
        ];
        let valve_states = [
            net.valves[0].state,
            net.valves[1].state,
            net.valves[2].state,
            net.valves[3].state,
        ];

        // fixed per-step repayment rates for currently unclamped chambers
        let probe = net.volume_rates(t, &valve_states);
        let mut repay = [0.0f64; 4];
        for i in 0..4 {
            if !probe.clamped[i] && volume_deficit[i] != 0.0 {
                repay[i] = (volume_deficit[i] / (repay_steps * dt)).clamp(-REPAY_MAX, REPAY_MAX);
            }
        }

        // stage-1 solution doubles as the step output and trigger input
        let first = solve_stage(
            &net,
            params,
            t,
            &state,
            &valve_r,
            &valve_states,
            &repay,
            q_ven_prev,
            dt,
        )
        .map_err(|e| e.at_step(step))?;

        let bp = boundary_pressures(&state, &first.boundary_flows, params);
        let volumes = [
            net.chambers[0].volume(t),
            net.chambers[1].volume(t),
            net.chambers[2].volume(t),
            net.chambers[3].volume(t),
        ];
        records.push(StepRecord {
            t,
            state,
            chamber_pressures: first.pressures,
            boundary_pressures: bp,
            boundary_flows: first.boundary_flows,
            volumes,
            dvdt: first.dvdt,
            valve_states,
            valve_progress: [
                net.valves[0].progress,
                net.valves[1].progress,
                net.valves[2].progress,
                net.valves[3].progress,
            ],
            flows: first.flows.clone(),
        });

        // advance the circulation state with per-stage network re-solves
        let mut stage_count = 0usize;
        let mut first_flows = Some(first.boundary_flows);
        let mut provider = |ts: f64, s: &LpnState| -> Result<BoundaryFlows, CircuitError> {
            stage_count += 1;
            if stage_count == 1 {
                if let Some(f) = first_flows.take() {
                    return Ok(f);
                }
            }
            let sol = solve_stage(
                &net,
                params,
                ts,
                s,
                &valve_r,
                &valve_states,
                &repay,
                q_ven_prev,
                dt,
            )
            .map_err(|e| CircuitError::External(e.to_string()))?;
            Ok(sol.boundary_flows)
        };
        state = rk4_step(&state, t, dt, params, &mut provider)
            .map_err(|e| HeartnetError::Circuit(e).at_step(step))?;

        // valve triggers from the step-start solution; effect next step
        let t_next = (step + 1) as f64 * dt;
        let cycle = step / steps_per_cycle;
        for id in VALVE_IDS {
            let i = id as usize;
            let v = &net.valves[i];
            let q = first.flows.valve[i];
            match v.state {
                ValveState::Open => {
                    if q < net.backflow_threshold {
                        backflow_streak[i] += 1;
                    } else {
                        backflow_streak[i] = 0;
                    }
                    // one-step debounce against chatter at the zero crossing
                    if backflow_streak[i] >= 2 {
                        net.valves[i].begin(ValveState::Closing);
                        backflow_streak[i] = 0;
                        events.push(ValveEvent {
                            valve: id,
                            transition: ValveTransition::Close,
                            time: t_next,
                            cycle,
                            pct_of_cycle: (t_next / period).fract() * 100.0,
                        });
                    }
                }
                ValveState::Closed => {
                    backflow_streak[i] = 0;
                    let p_up = endpoint_pressure(v.upstream, &first.pressures, &bp);
                    let p_down = endpoint_pressure(v.downstream, &first.pressures, &bp);
                    if v.next_state(p_up, p_down, q, net.backflow_threshold)
                        == ValveState::Opening
                    {
                        net.valves[i].begin(ValveState::Opening);
                        events.push(ValveEvent {
                            valve: id,
                            transition: ValveTransition::Open,
                            time: t_next,
                            cycle,
                            pct_of_cycle: (t_next / period).fract() * 100.0,
                        });
                    }
                }
                _ => net.valves[i].advance(dt),
            }
        }

        // deficit bookkeeping from the step-start rates
        for i in 0..4 {
            if first.clamped[i] {
                volume_deficit[i] += (first.raw_dvdt[i] - first.dvdt[i]) * dt;
            } else {
                volume_deficit[i] -= repay[i] * dt;
            }
        }

        q_ven_prev = (first.flows.q_ven_pul, first.flows.q_ven_sys);
    }

    Ok(SimulationResult {
        records,
        events,
        dt,
        steps_per_cycle,
        cycles: options.cycles,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heartnet::presets;
    use crate::heartnet::ChamberId;

    fn healthy_params() -> LpnParameters {
        LpnParameters {
            r_ar_sys: 0.677,
            c_ar_sys: 0.925,
            l_ar_sys: 0.005,
            r_ven_sys: 0.064,
            c_ven_sys: 60.0,
            l_ven_sys: 0.0005,
            r_ar_pul: 0.032,
            c_ar_pul: 10.0,
            l_ar_pul: 0.0005,
            r_ven_pul: 0.035,
            c_ven_pul: 16.0,
            l_ven_pul: 0.0005,
            r_min: 0.002,
        }
    }

    fn healthy_init() -> LpnState {
        LpnState {
            p_ar_sys: 87.25,
            p_ven_sys: 14.703,
            p_ar_pul: 17.73,
            p_ven_pul: 13.83,
            q_ar_sys: 110.9,
            q_ar_pul: 123.5,
        }
    }

    #[test]
    fn healthy_two_cycles_runs_and_conserves_mass() {
        let net = presets::healthy_network().unwrap();
        let result = simulate(
            &net,
            &healthy_params(),
            &healthy_init(),
            &SimulationOptions {
                cycles: 2,
                dt: 6.896e-4,
            },
        )
        .unwrap();

        for r in &result.records {
            let net_inflow = r.boundary_flows.q_ven_pul + r.boundary_flows.q_ven_sys
                - r.boundary_flows.q_ao
                - r.boundary_flows.q_pa;
            let total_dvdt: f64 = r.dvdt.iter().sum();
            assert!(
                (net_inflow - total_dvdt).abs() < 1e-9,
                "mass residual {} at t = {}",
                net_inflow - total_dvdt,
                r.t
            );
            // boundary pressure consistency with the inlet chain:
            // p_la_in - p_la = r_min * q_ven_pul
            let gap = r.boundary_pressures.p_la_in
                - r.chamber_pressures.p_la
                - 0.002 * r.boundary_flows.q_ven_pul;
            assert!(gap.abs() < 1e-8, "inlet chain inconsistency {gap}");
        }
    }

    #[test]
    fn healthy_valve_event_order() {
        let net = presets::healthy_network().unwrap();
        let result = simulate(
            &net,
            &healthy_params(),
            &healthy_init(),
            &SimulationOptions {
                cycles: 3,
                dt: 6.896e-4,
            },
        )
        .unwrap();

        // in the last cycle: MV close < AV open < AV close < MV open
        let cycle = result.cycles - 1;
        let find = |valve: ValveId, tr: ValveTransition| -> f64 {
            result
                .events
                .iter()
                .find(|e| e.valve == valve && e.transition == tr && e.cycle == cycle)
                .map(|e| e.time)
                .unwrap_or(f64::NAN)
        };
        let mv_close = find(ValveId::Mv, ValveTransition::Close);
        let av_open = find(ValveId::Av, ValveTransition::Open);
        let av_close = find(ValveId::Av, ValveTransition::Close);
        let mv_open = find(ValveId::Mv, ValveTransition::Open);
        assert!(
            mv_close < av_open && av_open < av_close && av_close < mv_open,
            "left events: mv_close {mv_close}, av_open {av_open}, av_close {av_close}, mv_open {mv_open}\nevents: {:?}",
            result.events
        );

        let tv_close = find(ValveId::Tv, ValveTransition::Close);
        let pv_open = find(ValveId::Pv, ValveTransition::Open);
        let pv_close = find(ValveId::Pv, ValveTransition::Close);
        let tv_open = find(ValveId::Tv, ValveTransition::Open);
        assert!(
            tv_close < pv_open && pv_open < pv_close && pv_close < tv_open,
            "right events: tv_close {tv_close}, pv_open {pv_open}, pv_close {pv_close}, tv_open {tv_open}"
        );
    }

    #[test]
    fn healthy_no_cross_side_flow_and_valve_flow_signs() {
        let net = presets::healthy_network().unwrap();
        let result = simulate(
            &net,
            &healthy_params(),
            &healthy_init(),
            &SimulationOptions {
                cycles: 2,
                dt: 6.896e-4,
            },
        )
        .unwrap();
        for r in &result.records {
            assert!(r.flows.shunt.is_empty());
            // flow through any open valve has the sign of the pressure drop
            for id in VALVE_IDS {
                let i = id as usize;
                if r.valve_states[i] == ValveState::Open {
                    let v = net.valve(id);
                    let p_up =
                        endpoint_pressure(v.upstream, &r.chamber_pressures, &r.boundary_pressures);
                    let p_down = endpoint_pressure(
                        v.downstream,
                        &r.chamber_pressures,
                        &r.boundary_pressures,
                    );
                    let q = r.flows.valve[i];
                    if (p_up - p_down).abs() > 1e-9 {
                        assert!(
                            q * (p_up - p_down) >= 0.0,
                            "open {id:?}: q = {q}, dp = {}",
                            p_up - p_down
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_amplitude_waveforms_relax() {
        use crate::heartnet::waveform::ChamberWaveform;
        let mut net = presets::healthy_network().unwrap();
        let period = presets::HEALTHY_PERIOD;
        let times: Vec<f64> = (0..=64).map(|i| i as f64 * period / 64.0).collect();
        for (i, c) in [ChamberId::La, ChamberId::Lv, ChamberId::Ra, ChamberId::Rv]
            .into_iter()
            .enumerate()
        {
            let volumes = vec![60.0; 65];
            net.chambers[i] = ChamberWaveform::from_samples(c, &times, &volumes, period).unwrap();
        }
        // symmetric initial state
        let init = LpnState {
            p_ar_sys: 20.0,
            p_ven_sys: 20.0,
            p_ar_pul: 20.0,
            p_ven_pul: 20.0,
            q_ar_sys: 0.0,
            q_ar_pul: 0.0,
        };
        let result = simulate(
            &net,
            &healthy_params(),
            &init,
            &SimulationOptions {
                cycles: 8,
                dt: 1e-3,
            },
        )
        .unwrap();
        let early = &result.records[10];
        let late = result.records.last().unwrap();
        let flow_mag = |r: &StepRecord| {
            r.boundary_flows.q_ao.abs()
                + r.boundary_flows.q_pa.abs()
                + r.boundary_flows.q_ven_pul.abs()
                + r.boundary_flows.q_ven_sys.abs()
        };
        assert!(flow_mag(late) < flow_mag(early).max(1e-6));
        assert!(flow_mag(late) < 1e-3, "flows did not decay: {}", flow_mag(late));
    }

    #[test]
    fn valve_state_machine_never_skips() {
        let net = presets::healthy_network().unwrap();
        let result = simulate(
            &net,
            &healthy_params(),
            &healthy_init(),
            &SimulationOptions {
                cycles: 3,
                dt: 6.896e-4,
            },
        )
        .unwrap();
        let order = |s: ValveState| s.code();
        for w in result.records.windows(2) {
            for i in 0..4 {
                let a = w[0].valve_states[i];
                let b = w[1].valve_states[i];
                if a != b {
                    // legal successors only, one change per step
                    let legal = matches!(
                        (a, b),
                        (ValveState::Closed, ValveState::Opening)
                            | (ValveState::Opening, ValveState::Open)
                            | (ValveState::Open, ValveState::Closing)
                            | (ValveState::Closing, ValveState::Closed)
                    );
                    assert!(legal, "illegal transition {:?} -> {:?}", order(a), order(b));
                }
            }
        }
    }
}
