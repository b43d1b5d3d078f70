//! Diagnostic trace of the CHD run: valve events, last-cycle snapshots and
//! convergence.

use corflow::circuit::{LpnParameters, LpnState};
use corflow::heartnet::{presets, simulate, SimulationOptions};

fn main() {
    let net = presets::chd_network().unwrap();
    let params = LpnParameters {
        r_ar_sys: 1.578,
        c_ar_sys: 0.290,
        l_ar_sys: 0.6,
        r_ven_sys: 0.315,
        c_ven_sys: 120.0,
        l_ven_sys: 5e-5,
        r_ar_pul: 0.136,
        c_ar_pul: 4.0,
        l_ar_pul: 0.02,
        r_ven_pul: 0.05,
        c_ven_pul: 160.0,
        l_ven_pul: 1.25e-5,
        r_min: 0.002,
    };
    let init = LpnState {
        p_ar_sys: 60.0,
        p_ven_sys: 7.70,
        p_ar_pul: 11.50,
        p_ven_pul: 10.0,
        q_ar_sys: 40.0,
        q_ar_pul: 35.0,
    };
    let cycles: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(6);
    let result = simulate(
        &net,
        &params,
        &init,
        &SimulationOptions {
            cycles,
            dt: 4.276e-4,
        },
    )
    .unwrap();

    println!("== events (last cycle) ==");
    for e in result
        .events
        .iter()
        .filter(|e| e.cycle + 1 == result.cycles)
    {
        println!(
            "{:>3} {:>6} at {:6.2}%",
            e.valve.as_str(),
            e.transition.as_str(),
            e.pct_of_cycle
        );
    }

    println!("\n== last-cycle trace (every 2%) ==");
    println!(
        "{:>5} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}  states",
        "pct", "p_la", "p_mlv", "p_ra", "p_mrv", "p_ao", "p_pa", "q_mv", "q_av", "q_tv", "q_pv", "q_asd", "q_vsd"
    );
    let last = result.last_cycle();
    let n = last.len();
    for i in (0..n).step_by(n / 50) {
        let r = &last[i];
        println!(
            "{:5.1} {:7.2} {:7.2} {:7.2} {:7.2} {:7.2} {:7.2} {:8.1} {:8.1} {:8.1} {:8.1} {:8.1} {:8.1}   {}{}{}{}",
            100.0 * i as f64 / n as f64,
            r.chamber_pressures.p_la,
            r.chamber_pressures.p_lv,
            r.chamber_pressures.p_ra,
            r.chamber_pressures.p_rv,
            r.boundary_pressures.p_ao_out,
            r.boundary_pressures.p_pa_out,
            r.flows.valve[0],
            r.flows.valve[1],
            r.flows.valve[2],
            r.flows.valve[3],
            r.flows.shunt[0],
            r.flows.shunt[1],
            &r.valve_states[0].as_str()[..2],
            &r.valve_states[1].as_str()[..2],
            &r.valve_states[2].as_str()[..2],
            &r.valve_states[3].as_str()[..2],
        );
    }

    println!("\n== cycle-to-cycle convergence ==");
    let spc = result.steps_per_cycle;
    for c in 1..result.cycles {
        let mut max_diff = [0.0f64; 6];
        let mut range = [(f64::MAX, f64::MIN); 6];
        for i in 0..spc {
            let a = result.records[c * spc + i].state.to_array();
            let b = result.records[(c - 1) * spc + i].state.to_array();
            for j in 0..6 {
                max_diff[j] = max_diff[j].max((a[j] - b[j]).abs());
                range[j].0 = range[j].0.min(a[j]);
                range[j].1 = range[j].1.max(a[j]);
            }
        }
        let rel: Vec<String> = (0..6)
            .map(|j| format!("{:.4}", max_diff[j] / (range[j].1 - range[j].0)))
            .collect();
        println!("cycle {c}: rel diffs {}", rel.join(" "));
    }

    let last = result.last_cycle();
    let max_of = |f: &dyn Fn(&corflow::heartnet::StepRecord) -> f64| {
        last.iter().map(|r| f(r)).fold(f64::MIN, f64::max)
    };
    let mean_of = |f: &dyn Fn(&corflow::heartnet::StepRecord) -> f64| {
        last.iter().map(|r| f(r)).sum::<f64>() / last.len() as f64
    };
    println!(
        "\nfLV(=mRV) sys {:.1}  fRV(=mLV) sys {:.1}  AO sys {:.1}  PA sys {:.1}  gradient {:.1}",
        max_of(&|r| r.chamber_pressures.p_rv),
        max_of(&|r| r.chamber_pressures.p_lv),
        max_of(&|r| r.boundary_pressures.p_ao_out),
        max_of(&|r| r.boundary_pressures.p_pa_out),
        max_of(&|r| r.chamber_pressures.p_lv) - max_of(&|r| r.boundary_pressures.p_pa_out),
    );
    println!(
        "LA mean {:.1}  RA mean {:.1}  AO dia {:.1}  PA dia {:.1}",
        mean_of(&|r| r.chamber_pressures.p_la),
        mean_of(&|r| r.chamber_pressures.p_ra),
        last.iter()
            .map(|r| r.boundary_pressures.p_ao_out)
            .fold(f64::MAX, f64::min),
        last.iter()
            .map(|r| r.boundary_pressures.p_pa_out)
            .fold(f64::MAX, f64::min),
    );
    // flow split
    let (mut ao, mut pa) = (0.0, 0.0);
    for r in last {
        ao += r.boundary_flows.q_ao * result.dt;
        pa += r.boundary_flows.q_pa * result.dt;
    }
    println!("per-cycle AO {:.2} mL  PA {:.2} mL  Qp:Qs {:.2}", ao, pa, pa / ao);
}
