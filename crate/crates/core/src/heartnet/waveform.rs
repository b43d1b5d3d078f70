//! Prescribed chamber volume waveforms: periodic cubic-spline interpolation
//! of sampled volume curves, plus synthetic ventricular and atrial profiles
//! for running without patient data.

use nalgebra::{DMatrix, DVector};

use super::{ChamberId, HeartnetError};

/// Periodic C² cubic spline through samples (t_i, v_i) on [0, period).
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second_derivs: Vec<f64>,
    period: f64,
}

impl PeriodicSpline {
    /// Knots must be strictly increasing, start at 0 and stay below the
    /// period; the curve wraps from the last knot back to the first.
    pub fn new(knots: Vec<f64>, values: Vec<f64>, period: f64) -> Result<Self, HeartnetError> {
        let n = knots.len();
        if n < 3 {
            return Err(HeartnetError::Waveform("need at least 3 samples".into()));
        }
        if values.len() != n {
            return Err(HeartnetError::Waveform(
                "sample times and volumes differ in length".into(),
            ));
        }
        if !(period > 0.0) || knots[0] != 0.0 || *knots.last().unwrap() >= period {
            return Err(HeartnetError::Waveform(
                "knots must start at 0 and end before the period".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HeartnetError::Waveform(
                "sample times must be strictly increasing".into(),
            ));
        }

        // cyclic tridiagonal system for the knot second derivatives
        let h = |i: usize| -> f64 {
            if i + 1 < n {
                knots[i + 1] - knots[i]
            } else {
                period - knots[n - 1]
            }
        };
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            let h_prev = h(prev);
            let h_i = h(i);
            a[(i, prev)] += h_prev / 6.0;
            a[(i, i)] += (h_prev + h_i) / 3.0;
            a[(i, next)] += h_i / 6.0;
            rhs[i] = (values[next] - values[i]) / h_i - (values[i] - values[prev]) / h_prev;
        }
        let m = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| HeartnetError::Waveform("singular spline system".into()))?;

        Ok(Self {
            knots,
            values,
            second_derivs: m.iter().copied().collect(),
            period,
        })
    }

    fn locate(&self, t: f64) -> (usize, usize, f64, f64) {
        let tau = t.rem_euclid(self.period);
        let n = self.knots.len();
        let i = match self
            .knots
            .binary_search_by(|x| x.partial_cmp(&tau).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let next = (i + 1) % n;
        let t_i = self.knots[i];
        let h = if i + 1 < n {
            self.knots[i + 1] - t_i
        } else {
            self.period - t_i
        };
        (i, next, tau - t_i, h)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (i, next, s, h) = self.locate(t);
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[next]);
        let (v0, v1) = (self.values[i], self.values[next]);
        let a = (h - s) / h;
        let b = s / h;
        a * v0 + b * v1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (i, next, s, h) = self.locate(t);
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[next]);
        let (v0, v1) = (self.values[i], self.values[next]);
        let a = (h - s) / h;
        let b = s / h;
        (v1 - v0) / h + ((3.0 * b * b - 1.0) * m1 - (3.0 * a * a - 1.0) * m0) * h / 6.0
    }
}

/// Volume waveform [mL] of one chamber over the cardiac cycle.
#[derive(Debug, Clone)]
pub struct ChamberWaveform {
    pub chamber: ChamberId,
    pub period: f64,
    spline: PeriodicSpline,
}

impl ChamberWaveform {
    /// Builds from samples whose first and last rows describe the same cycle
    /// phase: times[0] = 0, times[last] = period, volumes[last] equal to
    /// volumes[0] within 1e-9 mL.
    pub fn from_samples(
        chamber: ChamberId,
        times: &[f64],
        volumes: &[f64],
        period: f64,
    ) -> Result<Self, HeartnetError> {
        if times.len() != volumes.len() || times.len() < 4 {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: need matching time/volume samples (got {} / {})",
                times.len(),
                volumes.len()
            )));
        }
        if (times[0]).abs() > 1e-12 || (times[times.len() - 1] - period).abs() > 1e-9 {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: samples must span exactly one period starting at t = 0"
            )));
        }
        if (volumes[0] - volumes[volumes.len() - 1]).abs() > 1e-9 {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: waveform not periodic: first {} vs last {} mL",
                volumes[0],
                volumes[volumes.len() - 1]
            )));
        }
        if volumes.iter().any(|&v| !(v > 0.0)) {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: volumes must be strictly positive"
            )));
        }
        let spline = PeriodicSpline::new(
            times[..times.len() - 1].to_vec(),
            volumes[..volumes.len() - 1].to_vec(),
            period,
        )?;
        Ok(Self {
            chamber,
            period,
            spline,
        })
    }

    pub fn volume(&self, t: f64) -> f64 {
        self.spline.value(t)
    }

    /// Net inflow implied by volume conservation: dV/dt at t mod period.
    pub fn flow_source(&self, t: f64) -> f64 {
        self.spline.derivative(t)
    }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Cubic Hermite on u in [0,1] with endpoint values v0, v1 and endpoint
/// slopes m0, m1 expressed in du units.
fn hermite(v0: f64, v1: f64, m0: f64, m1: f64, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * v0
        + (u3 - 2.0 * u2 + u) * m0
        + (-2.0 * u3 + 3.0 * u2) * v1
        + (u3 - u2) * m1
}

/// Two-phase ventricular profile: a-wave top-up, slow diastasis creep to
/// EDV, ejection, end-systolic plateau, early filling. All times are
/// fractions of the cycle; the cycle starts just before atrial contraction.
/// The creep keeps inflow-valve flow slightly positive between the a-wave
/// and systole so the backflow trigger only fires at ejection onset.
#[derive(Debug, Clone, Copy)]
pub struct VentricleSpec {
    pub edv: f64,
    pub esv: f64,
    pub a_kick: f64,
    pub creep: f64,
    pub t_a_end: f64,
    pub t_sys_start: f64,
    pub t_sys_end: f64,
    pub t_fill_start: f64,
}

impl VentricleSpec {
    fn volume_at(&self, x: f64) -> f64 {
        let base = self.edv - self.a_kick - self.creep;
        // diastasis creep slope per cycle fraction; segments join with this
        // slope so the volume curve is C1 everywhere
        let gap = self.t_sys_start - self.t_a_end;
        let c = if gap > 0.0 && self.creep > 0.0 {
            self.creep / gap
        } else {
            0.0
        };
        if x < self.t_a_end {
            let l = self.t_a_end;
            hermite(
                base,
                self.edv - self.creep,
                c * l,
                c * l,
                x / l,
            )
        } else if x < self.t_sys_start {
            let u = (x - self.t_a_end) / gap.max(1e-12);
            self.edv - self.creep + self.creep * u
        } else if x < self.t_sys_end {
            let l = self.t_sys_end - self.t_sys_start;
            hermite(self.edv, self.esv, c * l, 0.0, (x - self.t_sys_start) / l)
        } else if x < self.t_fill_start {
            self.esv
        } else {
            let l = 1.0 - self.t_fill_start;
            hermite(self.esv, base, 0.0, c * l, (x - self.t_fill_start) / l)
        }
    }

    pub fn build(
        &self,
        chamber: ChamberId,
        period: f64,
        samples: usize,
    ) -> Result<ChamberWaveform, HeartnetError> {
        if !(self.esv > 0.0 && self.edv > self.esv && self.a_kick >= 0.0 && self.creep >= 0.0) {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: need 0 < esv < edv, a_kick >= 0, creep >= 0"
            )));
        }
        if !(0.0 < self.t_a_end
            && self.t_a_end <= self.t_sys_start
            && self.t_sys_start < self.t_sys_end
            && self.t_sys_end <= self.t_fill_start
            && self.t_fill_start < 1.0)
        {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: phase fractions out of order"
            )));
        }
        sample_profile(chamber, period, samples, |x| self.volume_at(x))
    }
}

/// Two-bump atrial profile: contraction (a-wave), reservoir filling during
/// ventricular systole, plateau, conduit emptying back to the pre-a volume.
#[derive(Debug, Clone, Copy)]
pub struct AtriumSpec {
    pub v_min: f64,
    pub v_max: f64,
    pub v_pre_a: f64,
    pub t_a_end: f64,
    pub t_res_start: f64,
    pub t_res_end: f64,
    pub t_conduit_start: f64,
}

impl AtriumSpec {
    fn volume_at(&self, x: f64) -> f64 {
        if x < self.t_a_end {
            self.v_pre_a - (self.v_pre_a - self.v_min) * smoothstep(x / self.t_a_end)
        } else if x < self.t_res_start {
            self.v_min
        } else if x < self.t_res_end {
            let u = (x - self.t_res_start) / (self.t_res_end - self.t_res_start);
            self.v_min + (self.v_max - self.v_min) * smoothstep(u)
        } else if x < self.t_conduit_start {
            self.v_max
        } else {
            let u = (x - self.t_conduit_start) / (1.0 - self.t_conduit_start);
            self.v_max - (self.v_max - self.v_pre_a) * smoothstep(u)
        }
    }

    pub fn build(
        &self,
        chamber: ChamberId,
        period: f64,
        samples: usize,
    ) -> Result<ChamberWaveform, HeartnetError> {
        if !(self.v_min > 0.0 && self.v_min < self.v_pre_a && self.v_pre_a < self.v_max) {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: need 0 < v_min < v_pre_a < v_max"
            )));
        }
        if !(0.0 < self.t_a_end
            && self.t_a_end <= self.t_res_start
            && self.t_res_start < self.t_res_end
            && self.t_res_end <= self.t_conduit_start
            && self.t_conduit_start < 1.0)
        {
            return Err(HeartnetError::Waveform(format!(
                "{chamber:?}: phase fractions out of order"
            )));
        }
        sample_profile(chamber, period, samples, |x| self.volume_at(x))
    }
}

fn sample_profile<F: Fn(f64) -> f64>(
    chamber: ChamberId,
    period: f64,
    samples: usize,
    f: F,
) -> Result<ChamberWaveform, HeartnetError> {
    let n = samples.max(64);
    let mut times = Vec::with_capacity(n + 1);
    let mut volumes = Vec::with_capacity(n + 1);
    for i in 0..n {
        let x = i as f64 / n as f64;
        times.push(x * period);
        volumes.push(f(x));
    }
    times.push(period);
    volumes.push(volumes[0]);
    ChamberWaveform::from_samples(chamber, &times, &volumes, period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_waveform_zero_flow() {
        let times: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let volumes = vec![50.0; 33];
        let w = ChamberWaveform::from_samples(ChamberId::La, &times, &volumes, 1.0).unwrap();
        for i in 0..20 {
            assert!(w.flow_source(i as f64 * 0.37).abs() < 1e-10);
        }
    }

    #[test]
    fn sine_waveform_derivative_within_one_percent() {
        let n = 128;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let volumes: Vec<f64> = times
            .iter()
            .map(|&t| 50.0 + 10.0 * (2.0 * std::f64::consts::PI * t).sin())
            .collect();
        let w = ChamberWaveform::from_samples(ChamberId::Lv, &times, &volumes, 1.0).unwrap();
        let expected = 20.0 * std::f64::consts::PI;
        let got = w.flow_source(0.0);
        assert!(
            (got - expected).abs() / expected < 0.01,
            "dV/dt(0) = {got}, expected {expected}"
        );
        // derivative matches analytic value across the cycle too
        for i in 0..50 {
            let t = i as f64 / 50.0;
            let analytic =
                20.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * t).cos();
            assert!((w.flow_source(t) - analytic).abs() < 0.01 * expected);
        }
    }

    #[test]
    fn waveform_is_periodic_and_c1() {
        let spec = VentricleSpec {
            edv: 130.0,
            esv: 56.0,
            a_kick: 11.0,
            creep: 1.5,
            t_a_end: 0.13,
            t_sys_start: 0.26,
            t_sys_end: 0.655,
            t_fill_start: 0.69,
        };
        let w = spec.build(ChamberId::Lv, 0.69, 256).unwrap();
        assert_relative_eq!(w.volume(0.0), w.volume(0.69), max_relative = 1e-9);
        // continuous first derivative across the wrap
        let eps = 1e-6;
        let d_before = w.flow_source(0.69 - eps);
        let d_after = w.flow_source(0.69 + eps);
        assert!((d_before - d_after).abs() < 1e-2, "{d_before} vs {d_after}");
    }

    #[test]
    fn ventricle_stroke_volume() {
        let spec = VentricleSpec {
            edv: 130.0,
            esv: 56.0,
            a_kick: 11.0,
            creep: 1.5,
            t_a_end: 0.13,
            t_sys_start: 0.26,
            t_sys_end: 0.655,
            t_fill_start: 0.69,
        };
        let w = spec.build(ChamberId::Lv, 0.69, 256).unwrap();
        let vmax = (0..1000)
            .map(|i| w.volume(i as f64 * 0.69 / 1000.0))
            .fold(f64::MIN, f64::max);
        let vmin = (0..1000)
            .map(|i| w.volume(i as f64 * 0.69 / 1000.0))
            .fold(f64::MAX, f64::min);
        assert_relative_eq!(vmax, 130.0, max_relative = 1e-3);
        assert_relative_eq!(vmin, 56.0, max_relative = 1e-3);
    }

    #[test]
    fn atrium_two_bump_shape() {
        let spec = AtriumSpec {
            v_min: 32.0,
            v_max: 68.0,
            v_pre_a: 52.0,
            t_a_end: 0.13,
            t_res_start: 0.26,
            t_res_end: 0.655,
            t_conduit_start: 0.70,
        };
        let w = spec.build(ChamberId::La, 0.69, 256).unwrap();
        // contraction empties toward v_min, reservoir refills to v_max
        assert!(w.volume(0.13 * 0.69) < 33.0);
        assert!(w.volume(0.66 * 0.69) > 67.0);
        assert!(w.flow_source(0.45 * 0.69) > 0.0);
    }

    #[test]
    fn non_periodic_samples_rejected() {
        let times: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let mut volumes = vec![50.0; 9];
        volumes[8] = 51.0;
        assert!(ChamberWaveform::from_samples(ChamberId::Ra, &times, &volumes, 1.0).is_err());
    }

    #[test]
    fn negative_volume_rejected() {
        let times: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let mut volumes = vec![50.0; 9];
        volumes[4] = -1.0;
        assert!(ChamberWaveform::from_samples(ChamberId::Ra, &times, &volumes, 1.0).is_err());
    }
}
