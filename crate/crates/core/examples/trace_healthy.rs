//! Diagnostic trace of the healthy run: valve events plus coarse pressure
//! and flow snapshots over the last cycle.

use corflow::circuit::{LpnParameters, LpnState};
use corflow::heartnet::{presets, simulate, SimulationOptions};

fn main() {
    let net = presets::healthy_network().unwrap();
    let params = LpnParameters {
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
    };
    let init = LpnState {
        p_ar_sys: 87.25,
        p_ven_sys: 14.703,
        p_ar_pul: 17.73,
        p_ven_pul: 13.83,
        q_ar_sys: 110.9,
        q_ar_pul: 123.5,
    };
    let cycles: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let result = simulate(
        &net,
        &params,
        &init,
        &SimulationOptions {
            cycles,
            dt: 6.896e-4,
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
        "{:>5} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} V:{:>4}{:>4}{:>4}{:>4}",
        "pct", "p_la", "p_lv", "p_ra", "p_rv", "p_ao", "p_pa", "p_vs", "q_mv", "q_av", "q_tv", "q_pv", "mv", "av", "tv", "pv"
    );
    let last = result.last_cycle();
    let n = last.len();
    for i in (0..n).step_by(n / 50) {
        let r = &last[i];
        println!(
            "{:5.1} {:7.2} {:7.2} {:7.2} {:7.2} {:7.2} {:7.2} {:7.2} {:8.1} {:8.1} {:8.1} {:8.1}   {:>4}{:>4}{:>4}{:>4}",
            100.0 * i as f64 / n as f64,
            r.chamber_pressures.p_la,
            r.chamber_pressures.p_lv,
            r.chamber_pressures.p_ra,
            r.chamber_pressures.p_rv,
            r.boundary_pressures.p_ao_out,
            r.boundary_pressures.p_pa_out,
            r.state.p_ven_sys,
            r.flows.valve[0],
            r.flows.valve[1],
            r.flows.valve[2],
            r.flows.valve[3],
            &r.valve_states[0].as_str()[..2],
            &r.valve_states[1].as_str()[..2],
            &r.valve_states[2].as_str()[..2],
            &r.valve_states[3].as_str()[..2],
        );
    }

    if let Ok(window) = std::env::var("TRACE_WINDOW") {
        let mut parts = window.split(',');
        let a: f64 = parts.next().unwrap().parse().unwrap();
        let b: f64 = parts.next().unwrap().parse().unwrap();
        println!("\n== step window {a}%..{b}% of last cycle ==");
        let last = result.last_cycle();
        let n = last.len();
        for (i, r) in last.iter().enumerate() {
            let pct = 100.0 * i as f64 / n as f64;
            if pct >= a && pct <= b {
                println!(
                    "{:6.2}% p_ra {:7.3} p_rv {:7.3} p_pa {:7.3} p_la {:7.3} p_lv {:7.3} p_ao {:7.3} | dvdt {:8.3} {:8.3} {:8.3} {:8.3} | q_tv {:8.3} q_pv {:8.3} | tv {}:{:.2} pv {}:{:.2}",
                    pct,
                    r.chamber_pressures.p_ra,
                    r.chamber_pressures.p_rv,
                    r.boundary_pressures.p_pa_out,
                    r.chamber_pressures.p_la,
                    r.chamber_pressures.p_lv,
                    r.boundary_pressures.p_ao_out,
                    r.dvdt[0], r.dvdt[1], r.dvdt[2], r.dvdt[3],
                    r.flows.valve[2],
                    r.flows.valve[3],
                    &r.valve_states[2].as_str()[..2],
                    r.valve_progress[2],
                    &r.valve_states[3].as_str()[..2],
                    r.valve_progress[3],
                );
            }
        }
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

    println!("\n== per-cycle state means ==");
    for c in 0..result.cycles {
        let recs = result.cycle_records(c);
        let mut mean = [0.0f64; 6];
        for r in recs {
            let a = r.state.to_array();
            for j in 0..6 {
                mean[j] += a[j];
            }
        }
        let strs: Vec<String> = mean
            .iter()
            .map(|m| format!("{:8.4}", m / recs.len() as f64))
            .collect();
        println!("cycle {c}: {}", strs.join(" "));
    }

    // net volume exchanged with each side per cycle (mass bookkeeping)
    println!("\n== per-cycle boundary volume integrals ==");
    for c in 0..result.cycles {
        let recs = result.cycle_records(c);
        let (mut ao, mut pa, mut vs, mut vp) = (0.0, 0.0, 0.0, 0.0);
        for r in recs {
            ao += r.boundary_flows.q_ao * result.dt;
            pa += r.boundary_flows.q_pa * result.dt;
            vs += r.boundary_flows.q_ven_sys * result.dt;
            vp += r.boundary_flows.q_ven_pul * result.dt;
        }
        println!(
            "cycle {c}: ao {ao:8.3} pa {pa:8.3} ven_sys {vs:8.3} ven_pul {vp:8.3}  sys-net {:8.4} pul-net {:8.4}",
            ao - vs,
            pa - vp
        );
    }

    // systolic stats
    let last = result.last_cycle();
    let max_of = |f: &dyn Fn(&corflow::heartnet::StepRecord) -> f64| {
        last.iter().map(|r| f(r)).fold(f64::MIN, f64::max)
    };
    println!("\nLV sys {:.1}  RV sys {:.1}  AO sys {:.1}  PA sys {:.1}",
        max_of(&|r| r.chamber_pressures.p_lv),
        max_of(&|r| r.chamber_pressures.p_rv),
        max_of(&|r| r.boundary_pressures.p_ao_out),
        max_of(&|r| r.boundary_pressures.p_pa_out),
    );
}
