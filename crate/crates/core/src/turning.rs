//! Approaching a target that lies off the initial heading.
//!
//! The front module carries a feedback steering controller on its two leg
//! yaw joints. Each leg, once per gait cycle, samples the target bearing
//! shortly after lifting off and ramps its stroke direction toward it
//! while still in the air, so the direction seen during stance is constant.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::bifurcation::{BifurcationDiagram, Perturbation};
use crate::dynamics::State;
use crate::error::{invalid, Error, Result};
use crate::gait::{GaitSchedule, LegId, Side};
use crate::params::ModelParams;
use crate::sim::{simulate, SimOptions, Steering, Trace};

/// Radius of the circle tangent to the initial heading that passes
/// through a target at bearing `psi` and distance `distance`. `None` when
/// the target is straight ahead.
pub fn required_radius(psi: f64, distance: f64) -> Option<f64> {
    let s = psi.sin().abs();
    if s < 1e-9 {
        None
    } else {
        Some(distance / (2.0 * s))
    }
}

/// Outcome of inverting a diagram's radius curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalK1 {
    /// N·mm/deg.
    pub k1: f64,
    /// False when `r̂` lies outside the diagram and the nearest end was used.
    pub in_range: bool,
}

/// Inverts the radius curve `r(1/k₁)` at `r_hat` by monotone piecewise
/// linear interpolation in `1/k₁`.
pub fn optimal_k1(r_hat: f64, diagram: &BifurcationDiagram) -> Result<OptimalK1> {
    let mut pts: Vec<(f64, f64)> = diagram
        .rows
        .iter()
        .filter_map(|row| row.radius.map(|r| (row.inv_k1(), r)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.is_empty() {
        return Err(invalid("diagram", "no curved-walk rows to interpolate"));
    }
    if pts.windows(2).any(|w| w[1].1 >= w[0].1) {
        return Err(invalid("diagram", "radius is not strictly decreasing in 1/k1"));
    }
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if r_hat >= first.1 {
        return Ok(OptimalK1 { k1: 1.0 / first.0, in_range: r_hat == first.1 });
    }
    if r_hat <= last.1 {
        return Ok(OptimalK1 { k1: 1.0 / last.0, in_range: r_hat == last.1 });
    }
    let w = pts.windows(2).find(|w| r_hat <= w[0].1 && r_hat >= w[1].1).expect("bracketed above");
    let f = (w[0].1 - r_hat) / (w[0].1 - w[1].1);
    let x = w[0].0 + f * (w[1].0 - w[0].0);
    Ok(OptimalK1 { k1: 1.0 / x, in_range: true })
}

/// Timing and limits of the steering controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Sampling instant after swing onset, s.
    pub t_start: f64,
    /// End of the ramp after swing onset, s.
    pub t_end: f64,
    /// Largest per-cycle change, rad.
    pub max_step: f64,
    /// Joint limit on ψ̂, rad.
    pub max_angle: f64,
    /// Standard deviation of the bearing measurement noise, rad.
    pub noise_sigma: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let five = 5f64.to_radians();
        Self { t_start: 0.12, t_end: 0.23, max_step: five, max_angle: five, noise_sigma: 0.0 }
    }
}

/// One ramp of one leg: ψ̂ goes linearly from `from` to `to` over
/// `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub t0: f64,
    pub t1: f64,
    pub from: f64,
    pub to: f64,
}

impl Ramp {
    fn value(&self, t: f64) -> f64 {
        if t <= self.t0 {
            self.from
        } else if t >= self.t1 {
            self.to
        } else {
            self.from + (self.to - self.from) * (t - self.t0) / (self.t1 - self.t0)
        }
    }
}

/// Per-leg controller state and history.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub cfg: ControllerConfig,
    /// Swing onsets of the two front legs within a cycle, s.
    anchors: [f64; 2],
    pub ramps: [Vec<Ramp>; 2],
    target: [f64; 2],
    rng: ChaCha8Rng,
}

impl ControllerState {
    pub fn new(cfg: ControllerConfig, g: &GaitSchedule, target: [f64; 2], seed: u64) -> Self {
        let anchors = Side::BOTH.map(|side| g.swing_onset_time(LegId { module: 0, side }));
        Self { cfg, anchors, ramps: [Vec::new(), Vec::new()], target, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// ψ̂ᵢ at time `t`.
    pub fn psi_hat(&self, leg: usize, t: f64) -> f64 {
        let ramps = &self.ramps[leg];
        // the last ramp starting at or before t governs
        match ramps.iter().rposition(|r| r.t0 <= t) {
            Some(i) => ramps[i].value(t),
            None => 0.0,
        }
    }

    /// Pure update rule: increment for measured bearing `psi` when the
    /// current command is `current`.
    pub fn increment(&self, psi: f64, current: f64) -> f64 {
        let want = (psi - current).clamp(-self.cfg.max_step, self.cfg.max_step);
        (current + want).clamp(-self.cfg.max_angle, self.cfg.max_angle) - current
    }

    fn measure(&mut self, s: &State) -> f64 {
        let mut psi = bearing(s, self.target);
        if self.cfg.noise_sigma > 0.0 {
            let n = Normal::new(0.0, self.cfg.noise_sigma).expect("sigma checked positive");
            psi += n.sample(&mut self.rng);
        }
        psi
    }

    /// `∫(ψ̂₁² + ψ̂₂²) dt` over `[0, t_stop]`, exact for the piecewise linear
    /// command.
    pub fn effort(&self, t_stop: f64) -> f64 {
        let mut total = 0.0;
        for leg in 0..2 {
            let mut knots = vec![0.0];
            for r in &self.ramps[leg] {
                knots.push(r.t0);
                knots.push(r.t1);
            }
            knots.push(t_stop);
            knots.retain(|&t| t <= t_stop);
            knots.sort_by(f64::total_cmp);
            for w in knots.windows(2) {
                let (a, b) = (self.psi_hat(leg, w[0]), self.psi_hat(leg, w[1]));
                total += (w[1] - w[0]) * (a * a + a * b + b * b) / 3.0;
            }
        }
        total
    }
}

/// Target bearing relative to the front-module heading, wrapped to (−π, π].
pub fn bearing(s: &State, target: [f64; 2]) -> f64 {
    let a = (target[1] - s.q[1]).atan2(target[0] - s.q[0]) - s.q[2];
    wrap_angle(a)
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

pub fn distance_to(s: &State, target: [f64; 2]) -> f64 {
    (target[0] - s.q[0]).hypot(target[1] - s.q[1])
}

/// Steering driven by the controller, or held at zero when off.
struct TurningSteering {
    ctrl: Option<ControllerState>,
    period: f64,
    /// Target and radius when the run ends on arrival.
    stop_at: Option<([f64; 2], f64)>,
}

impl Steering for TurningSteering {
    fn breakpoints(&self, _g: &GaitSchedule) -> Vec<f64> {
        let Some(c) = &self.ctrl else { return Vec::new() };
        c.anchors
            .iter()
            .flat_map(|&a| [a, a + c.cfg.t_start, a + c.cfg.t_end])
            .map(|t| t.rem_euclid(self.period))
            .collect()
    }

    fn update(&mut self, t: f64, s: &State, _g: &GaitSchedule) -> [f64; 2] {
        let Some(c) = self.ctrl.as_mut() else { return [0.0; 2] };
        for leg in 0..2 {
            let phase = (t - c.anchors[leg] - c.cfg.t_start).rem_euclid(self.period);
            let at_sample = phase < 1e-9 || self.period - phase < 1e-9;
            if at_sample && c.ramps[leg].last().map_or(true, |r| r.t0 < t - 1e-9) {
                let psi = c.measure(s);
                let current = c.psi_hat(leg, t);
                let delta = c.increment(psi, current);
                let t1 = t + (c.cfg.t_end - c.cfg.t_start);
                c.ramps[leg].push(Ramp { t0: t, t1, from: current, to: current + delta });
            }
        }
        // during a ramp the leg is airborne, so the held value is irrelevant
        // to the dynamics; after it the held value is exact
        [c.psi_hat(0, t), c.psi_hat(1, t)]
    }

    fn finished(&self, s: &State) -> bool {
        self.stop_at.is_some_and(|(target, radius)| distance_to(s, target) < radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurningTask {
    /// Initial bearing of the target, rad; positive is to the left.
    pub psi: f64,
    /// Initial distance, m.
    pub distance: f64,
    pub controller_on: bool,
    pub controller: ControllerConfig,
    pub success_radius: f64,
    /// End the run once the target is reached.
    pub stop_on_arrival: bool,
    pub t_max: f64,
    pub eval_time: f64,
    pub perturbation: Perturbation,
    pub dt: f64,
    pub dt_out: f64,
}

impl Default for TurningTask {
    fn default() -> Self {
        Self {
            psi: 45f64.to_radians(),
            distance: 1.3,
            controller_on: true,
            controller: ControllerConfig::default(),
            success_radius: 0.15,
            stop_on_arrival: true,
            t_max: 30.0,
            eval_time: 23.0,
            perturbation: Perturbation::default(),
            dt: 2e-4,
            dt_out: 0.01,
        }
    }
}

impl TurningTask {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) {
            return Err(invalid("distance_m", "must be positive"));
        }
        if !(self.psi.abs() > 0.0 && self.psi.abs() < PI / 2.0) {
            return Err(invalid("psi_deg", "must satisfy 0 < |psi| < 90"));
        }
        if !(self.success_radius > 0.0) {
            return Err(invalid("success_radius_m", "must be positive"));
        }
        if !(self.eval_time > 0.0 && self.t_max >= self.eval_time) {
            return Err(invalid("t_max_s", "must be at least eval_time_s"));
        }
        if !(self.controller.noise_sigma >= 0.0) {
            return Err(invalid("sensor_noise_deg", "must be non-negative"));
        }
        Ok(())
    }

    pub fn target(&self) -> [f64; 2] {
        [self.distance * self.psi.cos(), self.distance * self.psi.sin()]
    }

    pub fn mirrored(&self) -> Self {
        Self { psi: -self.psi, perturbation: self.perturbation.mirrored(), ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct TurningOutcome {
    pub trace: Trace,
    pub target: [f64; 2],
    pub distance: Vec<f64>,
    /// Target bearing relative to θ₀, rad.
    pub bearing: Vec<f64>,
    /// Distance at the evaluation time, or at arrival when the run stopped
    /// there, m.
    pub eps1: f64,
    /// |bearing| at the same instant, rad.
    pub eps2: f64,
    /// Steering effort, rad²·s.
    pub eps3: f64,
    pub success: bool,
    pub time_to_target: Option<f64>,
    /// Controller ramps of both legs, empty when off.
    pub ramps: [Vec<Ramp>; 2],
}

impl TurningOutcome {
    /// Final heading change, rad; its sign gives the turn direction.
    pub fn heading_change(&self) -> f64 {
        self.trace.last().q[2] - self.trace.samples[0].q[2]
    }
}

pub fn run_turning(task: &TurningTask, p: &ModelParams, g: &GaitSchedule, seed: u64) -> Result<TurningOutcome> {
    task.validate()?;
    let target = task.target();
    let init = task.perturbation.apply(&State::straight_walk(p, g, 0.0, 0.0, 0.0));
    let mut gs = g.clone();
    gs.steer = [0.0; 2];
    let mut steering = TurningSteering {
        ctrl: task
            .controller_on
            .then(|| ControllerState::new(task.controller.clone(), &gs, target, seed)),
        period: g.period(),
        stop_at: task.stop_on_arrival.then_some((target, task.success_radius)),
    };
    let opts = SimOptions { t_end: task.t_max, dt: task.dt, dt_out: task.dt_out, ..Default::default() };
    let trace = simulate(p, &gs, &init, &opts, &mut steering)?;
    if let Some(why) = &trace.aborted {
        return Err(Error::BlowUp { t: trace.last().t, what: why.clone() });
    }
    let distance: Vec<f64> = trace.samples.iter().map(|s| distance_to(s, target)).collect();
    let bearing: Vec<f64> = trace.samples.iter().map(|s| bearing(s, target)).collect();
    // a run that stopped on arrival is evaluated at its last sample
    let i_eval = ((task.eval_time / task.dt_out).round() as usize).min(distance.len() - 1);
    let t_eval = trace.samples[i_eval].t;
    let first_hit = distance.iter().position(|&d| d < task.success_radius);
    let time_to_target = first_hit.map(|i| trace.samples[i].t);
    let (eps3, ramps) = match &steering.ctrl {
        Some(c) => (c.effort(t_eval), c.ramps.clone()),
        None => (0.0, [Vec::new(), Vec::new()]),
    };
    Ok(TurningOutcome {
        eps1: distance[i_eval],
        eps2: bearing[i_eval].abs(),
        eps3,
        success: first_hit.is_some(),
        time_to_target,
        distance,
        bearing,
        target,
        trace,
        ramps,
    })
}

/// Which springs the swept value sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// k₁ only, the rest at their configured values.
    Pitchfork,
    /// All joints equal.
    Hopf,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pitchfork => "pitchfork",
            Strategy::Hopf => "hopf",
        }
    }

    pub fn apply(self, p: &ModelParams, k: f64) -> ModelParams {
        match self {
            Strategy::Pitchfork => p.clone().with_k1_nmm_deg(k),
            Strategy::Hopf => p.clone().with_uniform_k_nmm_deg(k),
        }
    }
}

/// Hopf-mode stiffness values swept in the comparison, N·mm/deg.
pub const HOPF_SWEEP: [f64; 5] = [8.7, 11.0, 15.0, 21.0, 41.0];

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub k: f64,
    pub outcome: Result<TurningOutcome>,
}

/// Per-criterion argmin and minimum over the successful rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionMin {
    pub k: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct TurningSweep {
    pub strategy: Strategy,
    pub entries: Vec<SweepEntry>,
}

impl TurningSweep {
    /// Minima of ε₁, ε₂, ε₃ over rows that ran to completion.
    pub fn minima(&self) -> [Option<CriterionMin>; 3] {
        let mut out = [None; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = self
                .entries
                .iter()
                .filter_map(|e| {
                    let o = e.outcome.as_ref().ok()?;
                    Some(CriterionMin { k: e.k, value: [o.eps1, o.eps2, o.eps3][c] })
                })
                .min_by(|a, b| a.value.total_cmp(&b.value));
        }
        out
    }
}

pub fn turning_sweep(
    task: &TurningTask,
    p: &ModelParams,
    g: &GaitSchedule,
    strategy: Strategy,
    ks: &[f64],
    seed: u64,
) -> TurningSweep {
    let entries = ks
        .par_iter()
        .map(|&k| SweepEntry { k, outcome: run_turning(task, &strategy.apply(p, k), g, seed) })
        .collect();
    TurningSweep { strategy, entries }
}

/// Pitchfork-mode sweep over `k1_list` and Hopf-mode sweep over
/// `hopf_list`, same task.
pub fn strategy_comparison(
    task: &TurningTask,
    p: &ModelParams,
    g: &GaitSchedule,
    k1_list: &[f64],
    hopf_list: &[f64],
    seed: u64,
) -> (TurningSweep, TurningSweep) {
    rayon::join(
        || turning_sweep(task, p, g, Strategy::Pitchfork, k1_list, seed),
        || turning_sweep(task, p, g, Strategy::Hopf, hopf_list, seed),
    )
}
