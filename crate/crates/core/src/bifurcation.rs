//! Nonlinear walking experiments: emergence of curved walking below the
//! critical stiffness, steady joint angles, radius of curvature and the
//! square-root fit of the bifurcation diagram.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::dynamics::State;
use crate::error::{invalid, Error, Result};
use crate::gait::GaitSchedule;
use crate::params::{si_to_nmm_deg, ModelParams};
use crate::sim::{simulate, FixedSteering, SimOptions, Trace};

/// Initial disturbance applied to the straight walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    /// Added to θ₁, rad.
    pub theta1: f64,
    /// Standard deviation of an extra Gaussian kick on every joint, rad.
    pub random_sigma: f64,
    pub seed: u64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self { theta1: 1e-3, random_sigma: 0.0, seed: 0 }
    }
}

impl Perturbation {
    pub fn mirrored(&self) -> Self {
        Self { theta1: -self.theta1, ..self.clone() }
    }

    /// Applies the disturbance to a copy of `s`.
    pub fn apply(&self, s: &State) -> State {
        let mut out = s.clone();
        out.q[3] += self.theta1;
        if self.random_sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let normal = Normal::new(0.0, self.random_sigma).expect("sigma checked positive");
            for i in 3..out.q.len() {
                out.q[i] += normal.sample(&mut rng);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub t_sim: f64,
    pub dt: f64,
    pub dt_out: f64,
    pub perturbation: Perturbation,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { t_sim: 60.0, dt: 2e-4, dt_out: 0.01, perturbation: Perturbation::default() }
    }
}

impl WalkConfig {
    pub fn sim_options(&self) -> SimOptions {
        SimOptions { t_end: self.t_sim, dt: self.dt, dt_out: self.dt_out, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct WalkTrace {
    pub trace: Trace,
    pub params: ModelParams,
    pub gait: GaitSchedule,
    pub perturbation: Perturbation,
}

/// Straight walk started with all segments aligned, then disturbed.
pub fn simulate_walk(p: &ModelParams, g: &GaitSchedule, cfg: &WalkConfig) -> Result<WalkTrace> {
    if !(cfg.perturbation.random_sigma >= 0.0) {
        return Err(invalid("perturbation_sigma_rad", "must be non-negative"));
    }
    let init = cfg.perturbation.apply(&State::straight_walk(p, g, 0.0, 0.0, 0.0));
    let trace = simulate(p, g, &init, &cfg.sim_options(), &mut FixedSteering)?;
    Ok(WalkTrace { trace, params: p.clone(), gait: g.clone(), perturbation: cfg.perturbation.clone() })
}

/// Mean joint angles over the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyAngles {
    /// θ₁…θ_{n−1}, rad.
    pub means: Vec<f64>,
    /// Least-squares slope of the per-cycle means over the window, rad/cycle.
    pub drift: Vec<f64>,
    pub converged: bool,
}

/// Default drift threshold for `steady_angles`, rad/cycle.
pub const DRIFT_TOL: f64 = 0.05 * std::f64::consts::PI / 180.0;

/// Averages each joint over the last whole gait cycles spanning about
/// `window` seconds.
pub fn steady_angles(tr: &Trace, tau: f64, window: f64) -> Result<SteadyAngles> {
    let per_cycle = (tau / tr.dt_out).round() as usize;
    let cycles = ((window / tau).round() as usize).max(2);
    let needed = cycles * per_cycle;
    if tr.samples.len() < needed + 1 {
        return Err(invalid("window_s", format!("trace shorter than {cycles} cycles")));
    }
    let n_joints = tr.samples[0].q.len() - 3;
    let tail = &tr.samples[tr.samples.len() - needed..];
    let mut means = Vec::with_capacity(n_joints);
    let mut drift = Vec::with_capacity(n_joints);
    for j in 0..n_joints {
        let cycle_means: Vec<f64> = tail
            .chunks(per_cycle)
            .map(|c| c.iter().map(|s| s.q[3 + j]).sum::<f64>() / per_cycle as f64)
            .collect();
        means.push(cycle_means.iter().sum::<f64>() / cycles as f64);
        drift.push(slope(&cycle_means));
    }
    let converged = drift.iter().all(|d| d.abs() < DRIFT_TOL);
    Ok(SteadyAngles { means, drift, converged })
}

fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Below this total bend (rad) the walk counts as straight.
pub const STRAIGHT_THRESHOLD: f64 = 0.1 * std::f64::consts::PI / 180.0;

/// `r = 5L / Σ|θᵢ|` for the six-module chain, generalised to `(n−1)L`;
/// `None` marks a straight walk.
pub fn curvature_radius(means: &[f64], seg_length: f64) -> Option<f64> {
    let total: f64 = means.iter().map(|t| t.abs()).sum();
    if total < STRAIGHT_THRESHOLD {
        None
    } else {
        Some(means.len() as f64 * seg_length / total)
    }
}

#[derive(Debug, Clone)]
pub struct DiagramRow {
    /// N·mm/deg.
    pub k1: f64,
    pub steady: Option<SteadyAngles>,
    pub radius: Option<f64>,
    /// Set when the run blew up or the window was unavailable.
    pub failure: Option<String>,
}

impl DiagramRow {
    pub fn inv_k1(&self) -> f64 {
        1.0 / self.k1
    }

    pub fn theta1(&self) -> Option<f64> {
        self.steady.as_ref().map(|s| s.means[0])
    }
}

/// `|θ₁| = a · sqrt(max(0, 1/k₁ − 1/k_c))`, angles in rad, k in N·mm/deg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtFit {
    pub a: f64,
    pub k_c: f64,
    /// Root-mean-square residual, rad.
    pub residual: f64,
}

/// `|θ₁| = a · (1/k₁ − 1/k_c)^β` over supercritical points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub a: f64,
    pub k_c: f64,
    pub beta: f64,
    /// Root-mean-square residual of `ln |θ₁|`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram {
    /// Sorted by increasing 1/k₁.
    pub rows: Vec<DiagramRow>,
    pub fit: Result<SqrtFit>,
}

/// Minimizes a unimodal `f` on `[lo, hi]` by golden-section search after a
/// coarse scan picks the starting bracket.
fn minimize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    const SCAN: usize = 200;
    let h = (hi - lo) / SCAN as f64;
    let best = (0..=SCAN)
        .map(|i| lo + i as f64 * h)
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(lo);
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Least-squares sqrt-law fit over `(x = 1/k₁, y = |θ₁|)` pairs.
pub fn fit_sqrt(points: &[(f64, f64)]) -> Result<SqrtFit> {
    let supercritical = points.iter().filter(|p| p.1 > STRAIGHT_THRESHOLD).count();
    if supercritical < 4 {
        return Err(Error::Fit(format!("{supercritical} supercritical points, need at least 4")));
    }
    // for fixed x_c the optimal a is linear least squares
    let solve = |xc: f64| -> (f64, f64) {
        let (mut sgy, mut sgg) = (0.0, 0.0);
        for &(x, y) in points {
            let g = (x - xc).max(0.0).sqrt();
            sgy += g * y;
            sgg += g * g;
        }
        let a = if sgg > 0.0 { sgy / sgg } else { 0.0 };
        let sse = points.iter().map(|&(x, y)| (y - a * (x - xc).max(0.0).sqrt()).powi(2)).sum();
        (a, sse)
    };
    let x_first = points
        .iter()
        .filter(|p| p.1 > STRAIGHT_THRESHOLD)
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min);
    let x_lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).min(0.5 * x_first);
    let xc = minimize_1d(|xc| solve(xc).1, x_lo, x_first);
    let (a, sse) = solve(xc);
    if !(xc > 0.0) {
        return Err(Error::Fit("critical point not bracketed by the data".into()));
    }
    Ok(SqrtFit { a, k_c: 1.0 / xc, residual: (sse / points.len() as f64).sqrt() })
}

/// Free-exponent fit of the supercritical points, linear in log space for
/// fixed `x_c`.
pub fn fit_power(points: &[(f64, f64)]) -> Result<PowerFit> {
    let sup: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > STRAIGHT_THRESHOLD).collect();
    if sup.len() < 4 {
        return Err(Error::Fit(format!("{} supercritical points, need at least 4", sup.len())));
    }
    let regress = |xc: f64| -> (f64, f64, f64) {
        let pts: Vec<(f64, f64)> = sup.iter().map(|&(x, y)| ((x - xc).ln(), y.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let beta = sxy / sxx;
        let ln_a = my - beta * mx;
        let sse = pts.iter().map(|p| (p.1 - ln_a - beta * p.0).powi(2)).sum();
        (ln_a.exp(), beta, sse)
    };
    let x_min = sup.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    // the largest subcritical x bounds x_c from below
    let x_floor = points
        .iter()
        .filter(|p| p.1 <= STRAIGHT_THRESHOLD && p.0 < x_min)
        .map(|p| p.0)
        .fold(0.2 * x_min, f64::max);
    let gap = x_min - x_floor;
    let xc = minimize_1d(|xc| regress(xc).2, x_floor, x_min - 1e-6 * gap);
    let (a, beta, sse) = regress(xc);
    Ok(PowerFit { a, k_c: 1.0 / xc, beta, residual: (sse / sup.len() as f64).sqrt() })
}

fn diagram_row(p: &ModelParams, g: &GaitSchedule, k1: f64, cfg: &WalkConfig, window: f64) -> DiagramRow {
    let p = p.clone().with_k1_nmm_deg(k1);
    let run = simulate_walk(&p, g, cfg).and_then(|w| {
        if let Some(why) = &w.trace.aborted {
            return Err(Error::BlowUp { t: w.trace.last().t, what: why.clone() });
        }
        steady_angles(&w.trace, g.period(), window)
    });
    match run {
        Ok(steady) => {
            let radius = curvature_radius(&steady.means, p.seg_length);
            DiagramRow { k1, steady: Some(steady), radius, failure: None }
        }
        Err(e) => DiagramRow { k1, steady: None, radius: None, failure: Some(e.to_string()) },
    }
}

/// Runs one walk per k₁ (in parallel) and fits the sqrt law to |θ₁|.
pub fn sweep_diagram(
    p: &ModelParams,
    g: &GaitSchedule,
    k1_list: &[f64],
    cfg: &WalkConfig,
    window: f64,
) -> BifurcationDiagram {
    let mut rows: Vec<DiagramRow> = k1_list.par_iter().map(|&k1| diagram_row(p, g, k1, cfg, window)).collect();
    rows.sort_by(|a, b| a.inv_k1().total_cmp(&b.inv_k1()));
    let fit = fit_sqrt(&diagram_points(&rows));
    BifurcationDiagram { rows, fit }
}

/// `(1/k₁, |θ₁|)` of the rows that produced steady angles.
pub fn diagram_points(rows: &[DiagramRow]) -> Vec<(f64, f64)> {
    rows.iter().filter_map(|r| r.theta1().map(|t| (r.inv_k1(), t.abs()))).collect()
}

/// Condition varied in `variation_study`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variation {
    Baseline,
    SofterRest,
    ShortStride,
    PhaseHalf,
}

impl Variation {
    pub const ALL: [Variation; 4] =
        [Variation::Baseline, Variation::SofterRest, Variation::ShortStride, Variation::PhaseHalf];

    pub fn name(self) -> &'static str {
        match self {
            Variation::Baseline => "baseline",
            Variation::SofterRest => "k2345_28",
            Variation::ShortStride => "stride_1.8cm",
            Variation::PhaseHalf => "phase_pi",
        }
    }

    pub fn apply(self, p: &ModelParams, g: &GaitSchedule) -> (ModelParams, GaitSchedule) {
        let (mut p, mut g) = (p.clone(), g.clone());
        match self {
            Variation::Baseline => {}
            Variation::SofterRest => {
                let k1 = p.k1_nmm_deg();
                p.set_springs_nmm_deg(k1, 28.0);
            }
            Variation::ShortStride => g.stride = 0.018,
            Variation::PhaseHalf => g.phase_lag = std::f64::consts::PI,
        }
        (p, g)
    }
}

/// Baseline plus the three conditions of the parameter-variation study.
pub fn variation_study(
    p: &ModelParams,
    g: &GaitSchedule,
    k1_list: &[f64],
    cfg: &WalkConfig,
    window: f64,
) -> Vec<(Variation, BifurcationDiagram)> {
    Variation::ALL
        .iter()
        .map(|&v| {
            let (pv, gv) = v.apply(p, g);
            (v, sweep_diagram(&pv, &gv, k1_list, cfg, window))
        })
        .collect()
}

/// Stiffness of joint 1 in N·mm/deg, for reporting.
pub fn k1_of(p: &ModelParams) -> f64 {
    si_to_nmm_deg(p.k[0])
}
