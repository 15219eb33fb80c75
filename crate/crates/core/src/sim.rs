//! Nonlinear time stepping of the chain with optional front-leg steering.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use crate::dynamics::{state_derivative, State};
use crate::error::{invalid, Error, Result};
use crate::gait::GaitSchedule;
use crate::integrate::{rk4_step, CycleGrid};
use crate::params::ModelParams;

/// Adjusts the front-module stroke directions while walking.
pub trait Steering {
    /// Extra per-cycle breakpoints (offsets in [0, τ)) at which `update`
    /// must be called.
    fn breakpoints(&self, g: &GaitSchedule) -> Vec<f64>;

    /// Called at the start of every grid piece; returns the steering
    /// angles held over that piece.
    fn update(&mut self, t: f64, s: &State, g: &GaitSchedule) -> [f64; 2];

    /// Checked at every output sample; returning true ends the run there.
    fn finished(&self, _s: &State) -> bool {
        false
    }
}

/// Keeps whatever steering the schedule carries.
pub struct FixedSteering;

impl Steering for FixedSteering {
    fn breakpoints(&self, _g: &GaitSchedule) -> Vec<f64> {
        Vec::new()
    }

    fn update(&mut self, _t: f64, _s: &State, g: &GaitSchedule) -> [f64; 2] {
        g.steer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub t_end: f64,
    /// Maximum RK4 step, s.
    pub dt: f64,
    /// Output sample interval, s. Must divide the gait cycle.
    pub dt_out: f64,
    /// Abort once any |θᵢ| exceeds this, rad.
    pub max_joint_angle: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { t_end: 60.0, dt: 2e-4, dt_out: 0.01, max_joint_angle: FRAC_PI_2 }
    }
}

/// Uniformly sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt_out: f64,
    pub samples: Vec<State>,
    /// Steering angles held at each sample.
    pub steer: Vec<[f64; 2]>,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
}

impl Trace {
    pub fn last(&self) -> &State {
        self.samples.last().expect("trace always holds the initial state")
    }

    pub fn duration(&self) -> f64 {
        self.last().t - self.samples[0].t
    }

    /// Series of joint `i` (1-based) in radians.
    pub fn joint_series(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.q[2 + i]).collect()
    }
}

fn sample_offsets(g: &GaitSchedule, dt_out: f64) -> Result<Vec<f64>> {
    let tau = g.period();
    let per_cycle = tau / dt_out;
    if !(dt_out > 0.0) || (per_cycle - per_cycle.round()).abs() > 1e-6 {
        return Err(invalid("dt_out_s", format!("must divide the gait cycle {tau} s")));
    }
    Ok((0..per_cycle.round() as usize).map(|k| k as f64 * dt_out).collect())
}

pub fn simulate(
    p: &ModelParams,
    g: &GaitSchedule,
    init: &State,
    opts: &SimOptions,
    steering: &mut dyn Steering,
) -> Result<Trace> {
    p.validate()?;
    g.validate()?;
    if init.q.len() != p.dof() || !init.is_finite() {
        return Err(invalid("initial_state", "wrong length or non-finite values"));
    }
    if !(opts.t_end > 0.0) {
        return Err(invalid("t_sim_s", "must be positive"));
    }
    let mut breaks = sample_offsets(g, opts.dt_out)?;
    breaks.extend(steering.breakpoints(g));
    let grid = CycleGrid::new(g, p.n_modules, &breaks, opts.dt)?;
    let pieces = grid.pieces_until(init.t + opts.t_end);

    let mut gs = g.clone();
    let mut z = init.to_z();
    let mut t = init.t;
    let mut trace = Trace { dt_out: opts.dt_out, samples: vec![init.clone()], steer: vec![g.steer], aborted: None };
    let mut next_sample = 1usize;
    let dof = p.dof();

    for pc in pieces.iter().filter(|pc| pc.end > init.t + 1e-12) {
        let state = State::from_z(&z, t);
        gs.steer = steering.update(t, &state, &gs);
        let legs = gs.active_legs(pc.midpoint(), p.n_modules);
        let mut f = |y: &DVector<f64>, tt: f64| state_derivative(y, tt, p, &gs, &legs);
        for k in 1..=pc.steps {
            let t0 = pc.time_at(k - 1);
            let t1 = pc.time_at(k);
            z = rk4_step(&mut f, &z, t0, t1 - t0)?;
            t = t1;
        }
        let bad = (3..dof).find(|&i| !(z[i].abs() <= opts.max_joint_angle));
        if bad.is_some() || !z.iter().all(|v| v.is_finite()) {
            let what = match bad {
                Some(i) => format!("|θ{}| exceeded {:.3} rad", i - 2, opts.max_joint_angle),
                None => "non-finite state".to_string(),
            };
            trace.aborted = Some(format!("t = {t:.4} s: {what}"));
            return Ok(trace);
        }
        let target = init.t + next_sample as f64 * opts.dt_out;
        if (t - target).abs() < 1e-9 {
            let sample = State::from_z(&z, target);
            let done = steering.finished(&sample);
            trace.samples.push(sample);
            trace.steer.push(gs.steer);
            next_sample += 1;
            if done {
                break;
            }
        }
    }
    Ok(trace)
}

/// Bails with an error instead of a flagged trace.
pub fn require_complete(trace: Trace) -> Result<Trace> {
    match &trace.aborted {
        Some(why) => Err(Error::BlowUp { t: trace.last().t, what: why.clone() }),
        None => Ok(trace),
    }
}
