//! Fixed-step RK4 on a grid aligned with the gait's discontinuities.
//!
//! One gait cycle is cut at every stance onset/offset (plus any extra
//! per-cycle breakpoints a caller needs, e.g. output samples). Each piece is
//! split into equal steps no longer than `dt_max`, so no step straddles a
//! change of the stance set and the grid repeats bit-exactly every cycle.

use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::gait::{dedup_sorted, GaitSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct CycleGrid {
    period: f64,
    /// Breakpoints in [0, τ), starting at 0.
    breaks: Vec<f64>,
    /// Step count per piece.
    steps: Vec<usize>,
}

/// One grid piece in absolute time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Piece {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    /// Time at the end of step `k` (1-based); the last one is exactly `end`.
    pub fn time_at(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.start + k as f64 * self.step()
        }
    }
}

impl CycleGrid {
    pub fn new(g: &GaitSchedule, n_modules: usize, extra: &[f64], dt_max: f64) -> Result<Self> {
        if !(dt_max.is_finite() && dt_max > 0.0) {
            return Err(invalid("dt_s", "step must be positive"));
        }
        let period = g.period();
        let mut breaks = g.stance_events(n_modules);
        breaks.push(0.0);
        breaks.extend(extra.iter().map(|t| t.rem_euclid(period)).filter(|t| (period - t).abs() > 1e-9));
        let breaks = dedup_sorted(breaks);
        let steps = breaks
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let next = breaks.get(i + 1).copied().unwrap_or(period);
                (((next - b) / dt_max) - 1e-9).ceil().max(1.0) as usize
            })
            .collect();
        Ok(Self { period, breaks, steps })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn steps_per_cycle(&self) -> usize {
        self.steps.iter().sum()
    }

    /// Pieces covering one cycle starting at `cycle · τ`.
    pub fn cycle_pieces(&self, cycle: usize) -> impl Iterator<Item = Piece> + '_ {
        let base = cycle as f64 * self.period;
        let cycle_end = (cycle + 1) as f64 * self.period;
        self.breaks.iter().enumerate().map(move |(i, &b)| {
            let end = self.breaks.get(i + 1).map_or(cycle_end, |next| base + next);
            Piece { start: base + b, end, steps: self.steps[i] }
        })
    }

    /// Pieces covering `[0, t_end]`; the last piece is truncated at `t_end`.
    pub fn pieces_until(&self, t_end: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        let mut cycle = 0;
        'outer: loop {
            for pc in self.cycle_pieces(cycle) {
                if pc.start >= t_end - 1e-12 {
                    break 'outer;
                }
                if pc.end > t_end + 1e-12 {
                    let frac = (t_end - pc.start) / (pc.end - pc.start);
                    let steps = ((pc.steps as f64 * frac) - 1e-9).ceil().max(1.0) as usize;
                    out.push(Piece { start: pc.start, end: t_end, steps });
                    break 'outer;
                }
                out.push(pc);
            }
            cycle += 1;
        }
        out
    }
}

/// One classical RK4 step of `ẏ = f(y, t)`.
pub fn rk4_step<F>(f: &mut F, y: &DVector<f64>, t: f64, h: f64) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>, f64) -> Result<DVector<f64>>,
{
    let k1 = f(y, t)?;
    let k2 = f(&(y + &k1 * (0.5 * h)), t + 0.5 * h)?;
    let k3 = f(&(y + &k2 * (0.5 * h)), t + 0.5 * h)?;
    let k4 = f(&(y + &k3 * h), t + h)?;
    Ok(y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}
