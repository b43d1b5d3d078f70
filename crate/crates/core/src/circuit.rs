//! Closed-loop 0D lumped parameter network of the systemic and pulmonary
//! circulations.
//!
//! Four capacitor-resistor-inductor compartments (systemic arteries, systemic
//! veins, pulmonary arteries, pulmonary veins) are driven by four boundary
//! flows (aortic and pulmonary outflow, systemic and pulmonary venous return)
//! and integrated with classical RK4. Units are mmHg, mL and s throughout.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("non-finite value in field `{0}`")]
    NonFinite(&'static str),
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("flow provider failed at RK4 stage {stage}: {source}")]
    Provider {
        stage: usize,
        #[source]
        source: Box<CircuitError>,
    },
    #[error("invalid time step dt = {0}; must be > 0 and finite")]
    InvalidTimeStep(f64),
    #[error("{0}")]
    External(String),
}

/// Resistances [mmHg·s/mL], capacitances [mL/mmHg] and inductances
/// [mmHg·s²/mL] of the four compartments, plus the 3D/0D coupling
/// resistance `r_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpnParameters {
    pub r_ar_sys: f64,
    pub c_ar_sys: f64,
    pub l_ar_sys: f64,
    pub r_ven_sys: f64,
    pub c_ven_sys: f64,
    pub l_ven_sys: f64,
    pub r_ar_pul: f64,
    pub c_ar_pul: f64,
    pub l_ar_pul: f64,
    pub r_ven_pul: f64,
    pub c_ven_pul: f64,
    pub l_ven_pul: f64,
    pub r_min: f64,
}

impl LpnParameters {
    /// Checks positivity of resistances/capacitances and non-negativity of
    /// inductances.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let strictly_positive = [
            ("r_ar_sys", self.r_ar_sys),
            ("c_ar_sys", self.c_ar_sys),
            ("r_ven_sys", self.r_ven_sys),
            ("c_ven_sys", self.c_ven_sys),
            ("r_ar_pul", self.r_ar_pul),
            ("c_ar_pul", self.c_ar_pul),
            ("r_ven_pul", self.r_ven_pul),
            ("c_ven_pul", self.c_ven_pul),
            ("r_min", self.r_min),
        ];
        for (name, value) in strictly_positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(CircuitError::InvalidParameter {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        let non_negative = [
            ("l_ar_sys", self.l_ar_sys),
            ("l_ven_sys", self.l_ven_sys),
            ("l_ar_pul", self.l_ar_pul),
            ("l_ven_pul", self.l_ven_pul),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(CircuitError::InvalidParameter {
                    name,
                    value,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "r_ar_sys" => self.r_ar_sys,
            "c_ar_sys" => self.c_ar_sys,
            "l_ar_sys" => self.l_ar_sys,
            "r_ven_sys" => self.r_ven_sys,
            "c_ven_sys" => self.c_ven_sys,
            "l_ven_sys" => self.l_ven_sys,
            "r_ar_pul" => self.r_ar_pul,
            "c_ar_pul" => self.c_ar_pul,
            "l_ar_pul" => self.l_ar_pul,
            "r_ven_pul" => self.r_ven_pul,
            "c_ven_pul" => self.c_ven_pul,
            "l_ven_pul" => self.l_ven_pul,
            "r_min" => self.r_min,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "r_ar_sys" => &mut self.r_ar_sys,
            "c_ar_sys" => &mut self.c_ar_sys,
            "l_ar_sys" => &mut self.l_ar_sys,
            "r_ven_sys" => &mut self.r_ven_sys,
            "c_ven_sys" => &mut self.c_ven_sys,
            "l_ven_sys" => &mut self.l_ven_sys,
            "r_ar_pul" => &mut self.r_ar_pul,
            "c_ar_pul" => &mut self.c_ar_pul,
            "l_ar_pul" => &mut self.l_ar_pul,
            "r_ven_pul" => &mut self.r_ven_pul,
            "c_ven_pul" => &mut self.c_ven_pul,
            "l_ven_pul" => &mut self.l_ven_pul,
            "r_min" => &mut self.r_min,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// The six unknowns of the circulation ODE system: compartment pressures
/// [mmHg] and the two arterial inductor flows [mL/s].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LpnState {
    pub p_ar_sys: f64,
    pub p_ven_sys: f64,
    pub p_ar_pul: f64,
    pub p_ven_pul: f64,
    pub q_ar_sys: f64,
    pub q_ar_pul: f64,
}

impl LpnState {
    pub fn to_array(self) -> [f64; 6] {
        [
            self.p_ar_sys,
            self.p_ven_sys,
            self.p_ar_pul,
            self.p_ven_pul,
            self.q_ar_sys,
            self.q_ar_pul,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            p_ar_sys: a[0],
            p_ven_sys: a[1],
            p_ar_pul: a[2],
            p_ven_pul: a[3],
            q_ar_sys: a[4],
            q_ar_pul: a[5],
        }
    }

    fn check_finite(&self) -> Result<(), CircuitError> {
        let fields = [
            ("p_ar_sys", self.p_ar_sys),
            ("p_ven_sys", self.p_ven_sys),
            ("p_ar_pul", self.p_ar_pul),
            ("p_ven_pul", self.p_ven_pul),
            ("q_ar_sys", self.q_ar_sys),
            ("q_ar_pul", self.q_ar_pul),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(CircuitError::NonFinite(name));
            }
        }
        Ok(())
    }
}

/// Boundary flows exchanged with the heart model [mL/s], plus derivative
/// estimates for the two venous flows [mL/s²] used by the inductor terms of
/// the boundary-pressure equations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryFlows {
    pub q_ao: f64,
    pub q_pa: f64,
    pub q_ven_sys: f64,
    pub q_ven_pul: f64,
    pub dq_ven_sys_dt: f64,
    pub dq_ven_pul_dt: f64,
}

impl BoundaryFlows {
    fn check_finite(&self) -> Result<(), CircuitError> {
        let fields = [
            ("q_ao", self.q_ao),
            ("q_pa", self.q_pa),
            ("q_ven_sys", self.q_ven_sys),
            ("q_ven_pul", self.q_ven_pul),
            ("dq_ven_sys_dt", self.dq_ven_sys_dt),
            ("dq_ven_pul_dt", self.dq_ven_pul_dt),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(CircuitError::NonFinite(name));
            }
        }
        Ok(())
    }
}

/// Pressures [mmHg] imposed at the four coupling interfaces (atrial inlets,
/// aortic and pulmonary outlets).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryPressures {
    pub p_la_in: f64,
    pub p_ra_in: f64,
    pub p_ao_out: f64,
    pub p_pa_out: f64,
}

/// Time derivatives of [`LpnState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LpnDerivative {
    pub dp_ar_sys: f64,
    pub dp_ven_sys: f64,
    pub dp_ar_pul: f64,
    pub dp_ven_pul: f64,
    pub dq_ar_sys: f64,
    pub dq_ar_pul: f64,
}

impl LpnDerivative {
    pub fn to_array(self) -> [f64; 6] {
        [
            self.dp_ar_sys,
            self.dp_ven_sys,
            self.dp_ar_pul,
            self.dp_ven_pul,
            self.dq_ar_sys,
            self.dq_ar_pul,
        ]
    }
}

/// Right-hand side of the circulation ODE system:
///
/// ```text
/// dp_ar_sys/dt  = (q_ao     - q_ar_sys) / c_ar_sys
/// dp_ven_sys/dt = (q_ar_sys - q_ven_sys) / c_ven_sys
/// dp_ar_pul/dt  = (q_pa     - q_ar_pul) / c_ar_pul
/// dp_ven_pul/dt = (q_ar_pul - q_ven_pul) / c_ven_pul
/// dq_ar_sys/dt  = -(r_ar_sys/l_ar_sys) q_ar_sys - (p_ven_sys - p_ar_sys)/l_ar_sys
/// dq_ar_pul/dt  = -(r_ar_pul/l_ar_pul) q_ar_pul - (p_ven_pul - p_ar_pul)/l_ar_pul
/// ```
pub fn lpn_rhs(
    state: &LpnState,
    flows: &BoundaryFlows,
    params: &LpnParameters,
) -> Result<LpnDerivative, CircuitError> {
    params.validate()?;
    state.check_finite()?;
    flows.check_finite()?;

    Ok(LpnDerivative {
        dp_ar_sys: (flows.q_ao - state.q_ar_sys) / params.c_ar_sys,
        dp_ven_sys: (state.q_ar_sys - flows.q_ven_sys) / params.c_ven_sys,
        dp_ar_pul: (flows.q_pa - state.q_ar_pul) / params.c_ar_pul,
        dp_ven_pul: (state.q_ar_pul - flows.q_ven_pul) / params.c_ven_pul,
        dq_ar_sys: -(params.r_ar_sys / params.l_ar_sys) * state.q_ar_sys
            - (state.p_ven_sys - state.p_ar_sys) / params.l_ar_sys,
        dq_ar_pul: -(params.r_ar_pul / params.l_ar_pul) * state.q_ar_pul
            - (state.p_ven_pul - state.p_ar_pul) / params.l_ar_pul,
    })
}

/// Supplies boundary flows at an RK4 stage time given the stage state.
///
/// The coupled heart model re-solves its algebraic system at every stage, so
/// the exchange happens per stage rather than once per step.
pub trait FlowProvider {
    fn flows(&mut self, t: f64, state: &LpnState) -> Result<BoundaryFlows, CircuitError>;
}

impl<F> FlowProvider for F
where
    F: FnMut(f64, &LpnState) -> Result<BoundaryFlows, CircuitError>,
{
    fn flows(&mut self, t: f64, state: &LpnState) -> Result<BoundaryFlows, CircuitError> {
        self(t, state)
    }
}

fn axpy(y: &[f64; 6], a: f64, x: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = y[i] + a * x[i];
    }
    out
}

/// One classical fourth-order Runge–Kutta step of size `dt` from time `t`,
/// with boundary flows evaluated at the stage times t, t+dt/2 and t+dt.
pub fn rk4_step<P: FlowProvider>(
    state: &LpnState,
    t: f64,
    dt: f64,
    params: &LpnParameters,
    provider: &mut P,
) -> Result<LpnState, CircuitError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CircuitError::InvalidTimeStep(dt));
    }

    let stage = |stage_idx: usize,
                 ts: f64,
                 s: &LpnState,
                 provider: &mut P|
     -> Result<[f64; 6], CircuitError> {
        let flows = provider
            .flows(ts, s)
            .map_err(|e| CircuitError::Provider {
                stage: stage_idx,
                source: Box::new(e),
            })?;
        Ok(lpn_rhs(s, &flows, params)?.to_array())
    };

    let y0 = state.to_array();
    let k1 = stage(1, t, state, provider)?;
    let s2 = LpnState::from_array(axpy(&y0, dt / 2.0, &k1));
    let k2 = stage(2, t + dt / 2.0, &s2, provider)?;
    let s3 = LpnState::from_array(axpy(&y0, dt / 2.0, &k2));
    let k3 = stage(3, t + dt / 2.0, &s3, provider)?;
    let s4 = LpnState::from_array(axpy(&y0, dt, &k3));
    let k4 = stage(4, t + dt, &s4, provider)?;

    let mut y1 = [0.0; 6];
    for i in 0..6 {
        y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(LpnState::from_array(y1))
}

/// Pressures fed back to the heart model:
///
/// ```text
/// p_la_in  = p_ven_pul - r_ven_pul q_ven_pul - l_ven_pul dq_ven_pul/dt - r_min q_ven_pul
/// p_ao_out = p_ar_sys  + r_min q_ao
/// p_ra_in  = p_ven_sys - r_ven_sys q_ven_sys - l_ven_sys dq_ven_sys/dt - r_min q_ven_sys
/// p_pa_out = p_ar_pul  + r_min q_pa
/// ```
pub fn boundary_pressures(
    state: &LpnState,
    flows: &BoundaryFlows,
    params: &LpnParameters,
) -> BoundaryPressures {
    BoundaryPressures {
        p_la_in: state.p_ven_pul
            - params.r_ven_pul * flows.q_ven_pul
            - params.l_ven_pul * flows.dq_ven_pul_dt
            - params.r_min * flows.q_ven_pul,
        p_ao_out: state.p_ar_sys + params.r_min * flows.q_ao,
        p_ra_in: state.p_ven_sys
            - params.r_ven_sys * flows.q_ven_sys
            - params.l_ven_sys * flows.dq_ven_sys_dt
            - params.r_min * flows.q_ven_sys,
        p_pa_out: state.p_ar_pul + params.r_min * flows.q_pa,
    }
}

/// Boundary flows read from a sampled time series. Venous flow derivatives
/// use centered differences in the interior and one-sided stencils at the
/// series ends.
#[derive(Debug, Clone)]
pub struct FlowSeries {
    pub times: Vec<f64>,
    pub q_ao: Vec<f64>,
    pub q_pa: Vec<f64>,
    pub q_ven_sys: Vec<f64>,
    pub q_ven_pul: Vec<f64>,
}

impl FlowSeries {
    pub fn new(
        times: Vec<f64>,
        q_ao: Vec<f64>,
        q_pa: Vec<f64>,
        q_ven_sys: Vec<f64>,
        q_ven_pul: Vec<f64>,
    ) -> Result<Self, CircuitError> {
        let n = times.len();
        if n < 2 {
            return Err(CircuitError::External(
                "flow series needs at least two samples".into(),
            ));
        }
        if [q_ao.len(), q_pa.len(), q_ven_sys.len(), q_ven_pul.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(CircuitError::External(
                "flow series columns have mismatched lengths".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CircuitError::External(
                "flow series times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            q_ao,
            q_pa,
            q_ven_sys,
            q_ven_pul,
        })
    }

    fn interp(&self, col: &[f64], t: f64) -> f64 {
        let times = &self.times;
        if t <= times[0] {
            return col[0];
        }
        if t >= *times.last().unwrap() {
            return *col.last().unwrap();
        }
        let i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return col[i],
            Err(i) => i,
        };
        let (t0, t1) = (times[i - 1], times[i]);
        let a = (t - t0) / (t1 - t0);
        col[i - 1] * (1.0 - a) + col[i] * a
    }

    /// Sample-point derivative: centered in the interior, one-sided at the
    /// ends; evaluated at arbitrary t by linear interpolation of the
    /// sample-point derivatives.
    fn deriv(&self, col: &[f64], t: f64) -> f64 {
        let times = &self.times;
        let n = times.len();
        let d_at = |i: usize| -> f64 {
            if i == 0 {
                (col[1] - col[0]) / (times[1] - times[0])
            } else if i == n - 1 {
                (col[n - 1] - col[n - 2]) / (times[n - 1] - times[n - 2])
            } else {
                (col[i + 1] - col[i - 1]) / (times[i + 1] - times[i - 1])
            }
        };
        if t <= times[0] {
            return d_at(0);
        }
        if t >= times[n - 1] {
            return d_at(n - 1);
        }
        let i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return d_at(i),
            Err(i) => i,
        };
        let (t0, t1) = (times[i - 1], times[i]);
        let a = (t - t0) / (t1 - t0);
        d_at(i - 1) * (1.0 - a) + d_at(i) * a
    }

    pub fn at(&self, t: f64) -> BoundaryFlows {
        BoundaryFlows {
            q_ao: self.interp(&self.q_ao, t),
            q_pa: self.interp(&self.q_pa, t),
            q_ven_sys: self.interp(&self.q_ven_sys, t),
            q_ven_pul: self.interp(&self.q_ven_pul, t),
            dq_ven_sys_dt: self.deriv(&self.q_ven_sys, t),
            dq_ven_pul_dt: self.deriv(&self.q_ven_pul, t),
        }
    }
}

impl FlowProvider for FlowSeries {
    fn flows(&mut self, t: f64, _state: &LpnState) -> Result<BoundaryFlows, CircuitError> {
        Ok(self.at(t))
    }
}
