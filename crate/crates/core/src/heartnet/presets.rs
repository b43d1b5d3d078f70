//! Built-in healthy and CHD network configurations with synthetic waveforms.
//!
//! The CHD topology follows congenitally corrected transposition: the right
//! atrium fills the morphological LV through the mitral valve, which ejects
//! into the pulmonary artery through a narrowed pulmonary valve; the left
//! atrium fills the morphological RV through the tricuspid valve, which
//! ejects into the aorta. Atrial and ventricular septal defects connect the
//! two sides.

use super::network::{HeartNetwork, Shunt};
use super::valve::{ValveModel, ValveState};
use super::waveform::{AtriumSpec, VentricleSpec};
use super::{ChamberId, HeartnetError, Node, ValveId};

pub const HEALTHY_PERIOD: f64 = 0.690;
pub const CHD_PERIOD: f64 = 0.496;
const WAVEFORM_SAMPLES: usize = 512;

fn valve(
    id: ValveId,
    upstream: Node,
    downstream: Node,
    r_open: f64,
    r_closed: f64,
    transition: f64,
    initially_open: bool,
) -> ValveModel {
    ValveModel {
        id,
        state: if initially_open {
            ValveState::Open
        } else {
            ValveState::Closed
        },
        progress: 1.0,
        r_open,
        r_closed,
        transition,
        upstream,
        downstream,
    }
}

/// Healthy adult: two disconnected sides, atrioventricular valves open at
/// the end-diastolic start phase, semilunar valves closed.
pub fn healthy_network() -> Result<HeartNetwork, HeartnetError> {
    let period = HEALTHY_PERIOD;
    let lv = VentricleSpec {
        edv: 130.0,
        esv: 56.0,
        a_kick: 11.0,
        creep: 1.5,
        t_a_end: 0.13,
        t_sys_start: 0.26,
        t_sys_end: 0.655,
        t_fill_start: 0.69,
    };
    let rv = VentricleSpec {
        edv: 150.0,
        esv: 76.0,
        a_kick: 11.0,
        creep: 1.5,
        t_a_end: 0.13,
        t_sys_start: 0.26,
        t_sys_end: 0.70,
        t_fill_start: 0.735,
    };
    // atrial a-wave ejection matches the ventricular a-kick so the venous
    // lines see no reflux spike during atrial contraction
    let la = AtriumSpec {
        v_min: 38.0,
        v_max: 78.0,
        v_pre_a: 49.0,
        t_a_end: 0.13,
        t_res_start: 0.22,
        t_res_end: 0.70,
        t_conduit_start: 0.715,
    };
    let ra = AtriumSpec {
        v_min: 40.0,
        v_max: 92.0,
        v_pre_a: 51.0,
        t_a_end: 0.13,
        t_res_start: 0.22,
        t_res_end: 0.745,
        t_conduit_start: 0.765,
    };

    let chambers = [
        la.build(ChamberId::La, period, WAVEFORM_SAMPLES)?,
        lv.build(ChamberId::Lv, period, WAVEFORM_SAMPLES)?,
        ra.build(ChamberId::Ra, period, WAVEFORM_SAMPLES)?,
        rv.build(ChamberId::Rv, period, WAVEFORM_SAMPLES)?,
    ];

    let av_transition = 0.010 * period;
    let tv_transition = 0.020 * period;
    let sl_transition = 0.005 * period;
    let valves = [
        valve(
            ValveId::Mv,
            Node::Chamber(ChamberId::La),
            Node::Chamber(ChamberId::Lv),
            0.005,
            5e3,
            av_transition,
            true,
        ),
        valve(
            ValveId::Av,
            Node::Chamber(ChamberId::Lv),
            Node::SystemicArtery,
            0.005,
            5e4,
            sl_transition,
            false,
        ),
        valve(
            ValveId::Tv,
            Node::Chamber(ChamberId::Ra),
            Node::Chamber(ChamberId::Rv),
            0.005,
            1e3,
            tv_transition,
            true,
        ),
        valve(
            ValveId::Pv,
            Node::Chamber(ChamberId::Rv),
            Node::PulmonaryArtery,
            0.005,
            5e4,
            sl_transition,
            false,
        ),
    ];

    let net = HeartNetwork {
        chambers,
        valves,
        shunts: Vec::new(),
        clamp_enabled: true,
        clamp_leak_contract: 0.02,
        clamp_leak_relax: 0.003,
        backflow_threshold: 0.0,
    };
    net.validate()?;
    Ok(net)
}

/// Pediatric CHD case: rewired valve connections, narrowed pulmonary valve
/// and septal shunts. The morphological LV contracts slightly earlier than
/// the morphological RV.
pub fn chd_network() -> Result<HeartNetwork, HeartnetError> {
    let period = CHD_PERIOD;
    // morphological LV: functional RV, ejects into the PA
    let mlv = VentricleSpec {
        edv: 34.0,
        esv: 17.0,
        a_kick: 3.0,
        creep: 0.5,
        t_a_end: 0.10,
        t_sys_start: 0.185,
        t_sys_end: 0.78,
        t_fill_start: 0.83,
    };
    // morphological RV: functional LV, ejects into the aorta
    let mrv = VentricleSpec {
        edv: 36.0,
        esv: 19.0,
        a_kick: 3.0,
        creep: 0.5,
        t_a_end: 0.10,
        t_sys_start: 0.225,
        t_sys_end: 0.645,
        t_fill_start: 0.825,
    };
    // small LA, enlarged RA; a-wave volumes match the ventricular kicks
    let la = AtriumSpec {
        v_min: 10.0,
        v_max: 17.0,
        v_pre_a: 13.0,
        t_a_end: 0.10,
        t_res_start: 0.23,
        t_res_end: 0.835,
        t_conduit_start: 0.835,
    };
    let ra = AtriumSpec {
        v_min: 27.0,
        v_max: 40.0,
        v_pre_a: 30.0,
        t_a_end: 0.10,
        t_res_start: 0.20,
        t_res_end: 0.84,
        t_conduit_start: 0.84,
    };

    let chambers = [
        la.build(ChamberId::La, period, WAVEFORM_SAMPLES)?,
        mlv.build(ChamberId::Lv, period, WAVEFORM_SAMPLES)?,
        ra.build(ChamberId::Ra, period, WAVEFORM_SAMPLES)?,
        mrv.build(ChamberId::Rv, period, WAVEFORM_SAMPLES)?,
    ];

    let av_transition = 0.010 * period;
    let mv_transition = 0.020 * period;
    let sl_transition = 0.005 * period;
    let valves = [
        // RA -> morphological LV
        valve(
            ValveId::Mv,
            Node::Chamber(ChamberId::Ra),
            Node::Chamber(ChamberId::Lv),
            0.005,
            1e3,
            mv_transition,
            true,
        ),
        // morphological RV -> aorta
        valve(
            ValveId::Av,
            Node::Chamber(ChamberId::Rv),
            Node::SystemicArtery,
            0.005,
            5e4,
            sl_transition,
            false,
        ),
        // LA -> morphological RV
        valve(
            ValveId::Tv,
            Node::Chamber(ChamberId::La),
            Node::Chamber(ChamberId::Rv),
            0.005,
            2.5e3,
            av_transition,
            true,
        ),
        // morphological LV -> PA through the stenotic pulmonary valve
        valve(
            ValveId::Pv,
            Node::Chamber(ChamberId::Lv),
            Node::PulmonaryArtery,
            0.38,
            5e4,
            sl_transition,
            false,
        ),
    ];

    let net = HeartNetwork {
        chambers,
        valves,
        shunts: vec![
            Shunt {
                a: ChamberId::La,
                b: ChamberId::Ra,
                resistance: 0.005,
            },
            Shunt {
                a: ChamberId::Lv,
                b: ChamberId::Rv,
                resistance: 0.005,
            },
        ],
        clamp_enabled: true,
        clamp_leak_contract: 0.02,
        clamp_leak_relax: 0.003,
        backflow_threshold: 0.0,
    };
    net.validate()?;
    Ok(net)
}
