//! Switched-resistance valve state machine. A valve cycles
//! Closed → Opening → Open → Closing → Closed; settled states switch on the
//! pressure-gradient (opening) and backflow (closing) triggers, transitional
//! states ramp their resistance log-linearly until the motion completes.

use super::{HeartnetError, Node, ValveId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValveState {
    Closed,
    Opening,
    Open,
    Closing,
}

impl ValveState {
    pub fn is_settled(self) -> bool {
        matches!(self, ValveState::Open | ValveState::Closed)
    }

    pub fn code(self) -> u8 {
        match self {
            ValveState::Closed => 0,
            ValveState::Opening => 1,
            ValveState::Open => 2,
            ValveState::Closing => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ValveState::Closed => "closed",
            ValveState::Opening => "opening",
            ValveState::Open => "open",
            ValveState::Closing => "closing",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValveModel {
    pub id: ValveId,
    pub state: ValveState,
    /// Fraction of the current transition completed, in [0, 1].
    pub progress: f64,
    pub r_open: f64,
    pub r_closed: f64,
    /// Transition duration [s] for both the opening and closing motions.
    pub transition: f64,
    pub upstream: Node,
    pub downstream: Node,
}

impl ValveModel {
    pub fn validate(&self) -> Result<(), HeartnetError> {
        if !(self.r_open > 0.0 && self.r_closed.is_finite()) {
            return Err(HeartnetError::Valve(format!(
                "{:?}: resistances must be positive and finite",
                self.id
            )));
        }
        if self.r_closed < 1e3 * self.r_open {
            return Err(HeartnetError::Valve(format!(
                "{:?}: r_closed = {} must be at least 1e3 x r_open = {}",
                self.id, self.r_closed, self.r_open
            )));
        }
        if !(self.transition > 0.0) {
            return Err(HeartnetError::Valve(format!(
                "{:?}: transition duration must be > 0",
                self.id
            )));
        }
        if !(0.0..=1.0).contains(&self.progress) {
            return Err(HeartnetError::Valve(format!(
                "{:?}: progress {} outside [0, 1]",
                self.id, self.progress
            )));
        }
        Ok(())
    }

    /// Instantaneous resistance: r_open when open, r_closed when closed,
    /// log-linear in progress during transitions (Opening ramps from
    /// r_closed down to r_open).
    pub fn resistance(&self) -> f64 {
        let log_interp = |from: f64, to: f64, s: f64| -> f64 {
            10f64.powf((1.0 - s) * from.log10() + s * to.log10())
        };
        match self.state {
            ValveState::Open => self.r_open,
            ValveState::Closed => self.r_closed,
            ValveState::Opening => log_interp(self.r_closed, self.r_open, self.progress),
            ValveState::Closing => log_interp(self.r_open, self.r_closed, self.progress),
        }
    }

    /// Trigger rule for settled states: a closed valve starts opening when
    /// the upstream pressure exceeds the downstream pressure; an open valve
    /// starts closing when its flow drops below the backflow threshold.
    /// Transitional states complete their motion regardless.
    pub fn next_state(
        &self,
        p_up: f64,
        p_down: f64,
        q_valve: f64,
        backflow_threshold: f64,
    ) -> ValveState {
        match self.state {
            ValveState::Closed if p_up > p_down => ValveState::Opening,
            ValveState::Open if q_valve < backflow_threshold => ValveState::Closing,
            s => s,
        }
    }

    /// Starts the given transition (progress 0).
    pub fn begin(&mut self, state: ValveState) {
        debug_assert!(!state.is_settled());
        self.state = state;
        self.progress = 0.0;
    }

    /// Advances a transitional state by dt; settles at progress 1.
    pub fn advance(&mut self, dt: f64) {
        match self.state {
            ValveState::Opening => {
                self.progress += dt / self.transition;
                if self.progress >= 1.0 {
                    self.state = ValveState::Open;
                    self.progress = 1.0;
                }
            }
            ValveState::Closing => {
                self.progress += dt / self.transition;
                if self.progress >= 1.0 {
                    self.state = ValveState::Closed;
                    self.progress = 1.0;
                }
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heartnet::ChamberId;
    use approx::assert_relative_eq;

    fn mv() -> ValveModel {
        ValveModel {
            id: ValveId::Mv,
            state: ValveState::Closed,
            progress: 1.0,
            r_open: 0.01,
            r_closed: 1e5,
            transition: 0.01,
            upstream: Node::Chamber(ChamberId::La),
            downstream: Node::Chamber(ChamberId::Lv),
        }
    }

    #[test]
    fn closed_opens_on_forward_gradient() {
        let v = mv();
        assert_eq!(v.next_state(10.0, 5.0, 0.0, 0.0), ValveState::Opening);
        assert_eq!(v.next_state(5.0, 10.0, 0.0, 0.0), ValveState::Closed);
    }

    #[test]
    fn open_closes_on_backflow() {
        let mut v = mv();
        v.state = ValveState::Open;
        assert_eq!(v.next_state(10.0, 5.0, 3.0, 0.0), ValveState::Open);
        assert_eq!(v.next_state(10.0, 5.0, -0.5, 0.0), ValveState::Closing);
    }

    #[test]
    fn resistance_endpoints_and_log_midpoint() {
        let mut v = mv();
        v.state = ValveState::Open;
        assert_eq!(v.resistance(), 0.01);
        v.state = ValveState::Closed;
        assert_eq!(v.resistance(), 1e5);
        v.state = ValveState::Opening;
        v.progress = 0.5;
        // geometric midpoint of 0.01 and 1e5
        assert_relative_eq!(v.resistance(), (0.01f64 * 1e5).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn opening_ramp_monotone_decreasing() {
        let mut v = mv();
        v.state = ValveState::Opening;
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            v.progress = i as f64 / 10.0;
            let r = v.resistance();
            assert!(r < prev, "resistance not decreasing at progress {}", v.progress);
            prev = r;
        }
    }

    #[test]
    fn transitions_follow_the_cycle_and_never_skip() {
        let mut v = mv();
        let dt = v.transition / 4.0;
        assert_eq!(v.state, ValveState::Closed);
        v.begin(ValveState::Opening);
        let mut seen = vec![v.state];
        for _ in 0..6 {
            v.advance(dt);
            if *seen.last().unwrap() != v.state {
                seen.push(v.state);
            }
        }
        assert_eq!(seen, vec![ValveState::Opening, ValveState::Open]);
        v.begin(ValveState::Closing);
        for _ in 0..6 {
            v.advance(dt);
        }
        assert_eq!(v.state, ValveState::Closed);
    }

    #[test]
    fn validate_enforces_resistance_ratio() {
        let mut v = mv();
        v.r_closed = 5.0;
        assert!(v.validate().is_err());
    }
}
