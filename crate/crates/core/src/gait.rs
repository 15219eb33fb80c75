//! Periodic leg-tip program.
//!
//! Each leg alternates a stance stroke (tip moves from the anterior extreme
//! position to the posterior one at constant speed, parallel to its module)
//! and a swing return. Phase 0 is stance onset; the left leg of the front
//! module starts its stance at t = 0.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    /// Lateral direction in the module frame (+y is left).
    pub fn lateral_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn mirrored(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LegId {
    pub module: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaitSchedule {
    /// Swing duration, s.
    pub t_swing: f64,
    /// Stance duration, s.
    pub t_stance: f64,
    /// AEP–PEP distance, m.
    pub stride: f64,
    /// Phase lag between ipsilateral legs of adjacent modules, rad.
    pub phase_lag: f64,
    /// Phase lag between left and right legs of one module, rad.
    pub lr_lag: f64,
    /// Yaw of the front module's left and right stance strokes, rad.
    pub steer: [f64; 2],
    pub steer_limit: f64,
}

impl Default for GaitSchedule {
    fn default() -> Self {
        Self {
            t_swing: 0.29,
            t_stance: 0.31,
            stride: 0.03,
            phase_lag: 2.0 * PI / 3.0,
            lr_lag: PI,
            steer: [0.0; 2],
            steer_limit: 5f64.to_radians(),
        }
    }
}

/// Kinematic state of one leg at a given phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StanceInfo {
    pub in_stance: bool,
    /// Longitudinal tip offset from the hip in the module frame, m.
    pub tip_offset: f64,
    /// Tip speed relative to the module along its x-axis, m/s.
    pub tip_relvel: f64,
}

/// A leg in stance during one integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveLeg {
    pub leg: LegId,
    /// Time at which this stance stroke began.
    pub t_onset: f64,
}

impl GaitSchedule {
    /// Gait cycle τ.
    pub fn period(&self) -> f64 {
        self.t_swing + self.t_stance
    }

    /// Tip speed relative to the body during stance.
    pub fn speed(&self) -> f64 {
        self.stride / self.t_stance
    }

    pub fn duty(&self) -> f64 {
        self.t_stance / self.period()
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("t_swing_s", self.t_swing),
            ("t_stance_s", self.t_stance),
            ("stride_cm", self.stride),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        if !self.phase_lag.is_finite() || !self.lr_lag.is_finite() {
            return Err(invalid("phase_lag_deg", "must be finite"));
        }
        if !(self.steer_limit.is_finite() && self.steer_limit >= 0.0) {
            return Err(invalid("steer_limit_deg", "must be non-negative"));
        }
        for (i, s) in self.steer.iter().enumerate() {
            if !(s.abs() <= self.steer_limit + 1e-12) {
                return Err(invalid(&format!("steer{}_deg", i + 1), "exceeds steer limit"));
            }
        }
        Ok(())
    }

    /// Phase offset of a leg in cycles, in [0, 1).
    fn phase_offset(&self, module: usize, side: Side) -> f64 {
        let cycles = module as f64 * self.phase_lag / TAU + side.index() as f64 * self.lr_lag / TAU;
        frac(cycles)
    }

    /// Leg phase in [0, 1); 0 is stance onset at the AEP.
    pub fn leg_phase(&self, t: f64, module: usize, side: Side) -> f64 {
        frac(t / self.period() - self.phase_offset(module, side))
    }

    pub fn stance_info(&self, phase: f64) -> StanceInfo {
        let elapsed = phase * self.period();
        if elapsed < self.t_stance {
            StanceInfo {
                in_stance: true,
                tip_offset: self.tip_offset(elapsed),
                tip_relvel: -self.speed(),
            }
        } else {
            StanceInfo { in_stance: false, tip_offset: 0.0, tip_relvel: 0.0 }
        }
    }

    /// Tip offset after `elapsed` seconds of stance.
    pub fn tip_offset(&self, elapsed: f64) -> f64 {
        0.5 * self.stride - self.speed() * elapsed
    }

    /// Stance onset time of a leg within [0, τ).
    pub fn onset_time(&self, leg: LegId) -> f64 {
        self.phase_offset(leg.module, leg.side) * self.period()
    }

    /// Swing onset (tip at the PEP) within [0, τ).
    pub fn swing_onset_time(&self, leg: LegId) -> f64 {
        let tau = self.period();
        (self.onset_time(leg) + self.t_stance).rem_euclid(tau)
    }

    /// Relative tip velocity of a stance leg in its module frame.
    ///
    /// Front-module strokes are yawed by the steering angle of that leg.
    pub fn relative_velocity(&self, leg: LegId, steer: [f64; 2]) -> [f64; 2] {
        let v = self.speed();
        if leg.module == 0 {
            let a = steer[leg.side.index()];
            [-v * a.cos(), -v * a.sin()]
        } else {
            [-v, 0.0]
        }
    }

    /// All distinct stance onset/offset times within [0, τ), sorted.
    pub fn stance_events(&self, n_modules: usize) -> Vec<f64> {
        let tau = self.period();
        let mut events = Vec::with_capacity(4 * n_modules);
        for module in 0..n_modules {
            for side in Side::BOTH {
                let on = self.onset_time(LegId { module, side });
                events.push(snap(on, tau));
                events.push(snap((on + self.t_stance).rem_euclid(tau), tau));
            }
        }
        dedup_sorted(events)
    }

    /// Legs in stance at time `t`. `t` should not sit on an event; the
    /// integrator passes interval midpoints.
    pub fn active_legs(&self, t: f64, n_modules: usize) -> Vec<ActiveLeg> {
        let tau = self.period();
        let mut legs = Vec::with_capacity(2 * n_modules);
        for module in 0..n_modules {
            for side in Side::BOTH {
                let phase = self.leg_phase(t, module, side);
                let elapsed = phase * tau;
                if elapsed < self.t_stance {
                    legs.push(ActiveLeg { leg: LegId { module, side }, t_onset: t - elapsed });
                }
            }
        }
        legs
    }

    pub fn stance_count(&self, t: f64, n_modules: usize) -> usize {
        (0..n_modules)
            .flat_map(|m| Side::BOTH.map(|s| (m, s)))
            .filter(|&(m, s)| self.stance_info(self.leg_phase(t, m, s)).in_stance)
            .count()
    }
}

pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Rounds event times that differ from τ-multiples only by float noise.
fn snap(t: f64, tau: f64) -> f64 {
    let t = if (tau - t).abs() < 1e-12 { 0.0 } else { t };
    (t * 1e12).round() / 1e12
}

pub(crate) fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    v
}
