//! Floquet analysis of the straight walk.
//!
//! The equations of motion are linearized about the analytic straight walk
//! `ẑ(t)`, giving `δż = A(t) δz` with `A(t + τ) = A(t)`. The fundamental
//! matrix is integrated over one gait cycle from `Z(0) = I`; the Floquet
//! exponents are `ln(μ)/τ` for the eigenvalues `μ` of the monodromy `Z(τ)`.
//!
//! Forces never depend on `(x, y)` and the dynamics are invariant under a
//! rigid rotation, so in coordinates where the front-module velocity is
//! expressed in its own frame the monodromy is block triangular: the
//! `(x, y, θ₀)` block is unipotent and contributes three exact unit
//! multipliers. The remaining "shape" block carries every non-neutral
//! exponent and is the one handed to the eigen-solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{state_derivative, State};
use crate::eigen::eigenpairs;
use crate::error::{Error, Result};
use crate::gait::{ActiveLeg, GaitSchedule};
use crate::integrate::{CycleGrid, Piece};
use crate::params::{nmm_deg_to_si, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetConfig {
    /// Maximum RK4 step for the variational equation, s.
    pub dt: f64,
    /// Central-difference step for `A(t)`.
    pub fd_step: f64,
    /// Exponents with `|Λ|` below this are neutral, 1/s.
    pub tol_zero: f64,
    /// Leading exponents with `|Im Λ|` below this are real, 1/s.
    pub tol_real: f64,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self { dt: 5e-4, fd_step: 1e-6, tol_zero: 1e-4, tol_real: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossingType {
    None,
    /// A real exponent in the right half-plane (pitchfork).
    Real,
    /// A complex-conjugate pair in the right half-plane (Hopf).
    ComplexPair,
}

impl CrossingType {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossingType::None => "none",
            CrossingType::Real => "real",
            CrossingType::ComplexPair => "complex-pair",
        }
    }
}

impl std::fmt::Display for CrossingType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct FloquetMode {
    pub multiplier: Complex64,
    pub exponent: Complex64,
    /// Eigenvector of the monodromy in `z = [q; q̇]` coordinates.
    pub vector: DVector<Complex64>,
    pub neutral: bool,
    /// Multiplier on the negative real axis.
    pub period_doubling: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct FloquetResult {
    pub period: f64,
    pub monodromy: DMatrix<f64>,
    /// Sorted by descending real part of the exponent.
    pub modes: Vec<FloquetMode>,
    pub n_zero: usize,
    /// Index into `modes` of the non-neutral exponent with largest real part.
    pub leading: Option<usize>,
    pub crossing_type: CrossingType,
    /// Set when some eigenpair residual is large (defective eigenstructure).
    pub defective: bool,
}

impl FloquetResult {
    pub fn exponents(&self) -> Vec<Complex64> {
        self.modes.iter().map(|m| m.exponent).collect()
    }

    pub fn leading_mode(&self) -> Option<&FloquetMode> {
        self.leading.map(|i| &self.modes[i])
    }

    pub fn leading_exponent(&self) -> Complex64 {
        self.leading_mode().map_or(Complex64::new(f64::NEG_INFINITY, 0.0), |m| m.exponent)
    }

    /// Kind of the leading exponent regardless of its sign.
    pub fn leading_kind(&self, tol_real: f64) -> CrossingType {
        match self.leading_mode() {
            None => CrossingType::None,
            Some(m) if m.exponent.im.abs() < tol_real => CrossingType::Real,
            Some(_) => CrossingType::ComplexPair,
        }
    }

    /// Joint-angle components θ₁…θ_{n−1} of the leading eigenvector, unit
    /// norm, signed so the first component is positive.
    pub fn leading_joint_components(&self) -> Option<Vec<f64>> {
        let m = self.leading_mode()?;
        let dof = self.monodromy.nrows() / 2;
        let raw: Vec<Complex64> = (3..dof).map(|i| m.vector[i]).collect();
        // rotate the complex vector so its largest component is real
        let pivot = raw.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
        let mut v: Vec<f64> = raw.iter().map(|c| (c * phase).re).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign / norm);
        Some(v)
    }

    /// Analysis of an arbitrary monodromy matrix without symmetry reduction.
    pub fn from_monodromy(monodromy: DMatrix<f64>, period: f64, cfg: &FloquetConfig) -> Self {
        let modes = eigenpairs(&monodromy)
            .into_iter()
            .map(|p| make_mode(p.value, p.vector, p.residual, period, cfg))
            .collect();
        Self::assemble(monodromy, period, modes, cfg)
    }

    fn assemble(monodromy: DMatrix<f64>, period: f64, mut modes: Vec<FloquetMode>, cfg: &FloquetConfig) -> Self {
        modes.sort_by(|a, b| {
            b.exponent
                .re
                .total_cmp(&a.exponent.re)
                .then(b.exponent.im.total_cmp(&a.exponent.im))
        });
        let n_zero = modes.iter().filter(|m| m.neutral).count();
        let leading = modes.iter().position(|m| !m.neutral);
        let scale = monodromy.amax().max(1.0);
        let defective = modes.iter().any(|m| m.residual > 1e-6 * scale);
        let mut out = Self {
            period,
            monodromy,
            modes,
            n_zero,
            leading,
            crossing_type: CrossingType::None,
            defective,
        };
        if out.leading_exponent().re > 0.0 {
            out.crossing_type = out.leading_kind(cfg.tol_real);
        }
        out
    }
}

fn make_mode(mu: Complex64, vector: DVector<Complex64>, residual: f64, period: f64, cfg: &FloquetConfig) -> FloquetMode {
    let period_doubling = mu.re < 0.0 && mu.im.abs() <= 1e-12 * mu.norm();
    let mut exponent = Complex64::new(mu.norm().ln(), mu.arg()) / period;
    if period_doubling {
        exponent.im = std::f64::consts::PI / period;
    }
    FloquetMode {
        multiplier: mu,
        exponent,
        vector,
        neutral: exponent.norm() < cfg.tol_zero,
        period_doubling,
        residual,
    }
}

/// Integrates `Ż = A(t) Z`, `Z(0) = I` over the given pieces. `a_of(t, piece)`
/// evaluates `A` at `t` with the piece fixing any discontinuous data.
pub fn fundamental_matrix<F>(dim: usize, pieces: &[Piece], mut a_of: F) -> Result<DMatrix<f64>>
where
    F: FnMut(f64, &Piece) -> Result<DMatrix<f64>>,
{
    let mut z = DMatrix::<f64>::identity(dim, dim);
    for pc in pieces {
        let h = pc.step();
        let mut a_start = a_of(pc.start, pc)?;
        for k in 1..=pc.steps {
            let t0 = pc.time_at(k - 1);
            let t1 = pc.time_at(k);
            let a_mid = a_of(t0 + 0.5 * (t1 - t0), pc)?;
            let a_end = a_of(t1, pc)?;
            let k1 = &a_start * &z;
            let k2 = &a_mid * (&z + &k1 * (0.5 * h));
            let k3 = &a_mid * (&z + &k2 * (0.5 * h));
            let k4 = &a_end * (&z + &k3 * h);
            z += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
            a_start = a_end;
        }
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { t: pc.end, what: "variational equation".into() });
        }
    }
    Ok(z)
}

/// `A(t)` of the first-order dynamics at the straight-walk point `ẑ(t)`,
/// by central differences with the stance set `legs`.
pub fn jacobian_with(
    p: &ModelParams,
    g: &GaitSchedule,
    legs: &[ActiveLeg],
    t: f64,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    let base = State::straight_walk(p, g, t, 0.0, 0.0).to_z();
    let dim = base.len();
    let dof = dim / 2;
    let mut a = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        // position-independent forces: the x and y columns vanish identically
        if col < 2 {
            continue;
        }
        let mut zp = base.clone();
        let mut zm = base.clone();
        zp[col] += fd_step;
        zm[col] -= fd_step;
        let fp = state_derivative(&zp, t, p, g, legs)?;
        let fm = state_derivative(&zm, t, p, g, legs)?;
        let d = (fp - fm) / (2.0 * fd_step);
        a.set_column(col, &d);
    }
    // position rows are exactly the velocity selector
    for i in 0..dof {
        for j in 0..dim {
            a[(i, j)] = if j == dof + i { 1.0 } else { 0.0 };
        }
    }
    Ok(a)
}

/// `A(t)` with the stance set taken from the schedule at `t`.
pub fn jacobian_at(p: &ModelParams, g: &GaitSchedule, t: f64, cfg: &FloquetConfig) -> Result<DMatrix<f64>> {
    let legs = g.active_legs(t, p.n_modules);
    jacobian_with(p, g, &legs, t, cfg.fd_step)
}

/// Monodromy `Z(τ)` of the straight walk.
pub fn monodromy_matrix(p: &ModelParams, g: &GaitSchedule, cfg: &FloquetConfig) -> Result<DMatrix<f64>> {
    p.validate()?;
    g.validate()?;
    let grid = CycleGrid::new(g, p.n_modules, &[], cfg.dt)?;
    let pieces: Vec<Piece> = grid.cycle_pieces(0).collect();
    let mut cached: Option<(f64, Vec<ActiveLeg>)> = None;
    fundamental_matrix(2 * p.dof(), &pieces, |t, pc| {
        let mid = pc.midpoint();
        if cached.as_ref().map_or(true, |(m, _)| *m != mid) {
            cached = Some((mid, g.active_legs(mid, p.n_modules)));
        }
        let legs = &cached.as_ref().unwrap().1;
        jacobian_with(p, g, legs, t, cfg.fd_step)
    })
    .map_err(|e| match e {
        Error::BlowUp { t, .. } => Error::BlowUp {
            t,
            what: format!("variational equation, k = {:?} N·m/rad", p.k),
        },
        other => other,
    })
}

/// Floquet analysis of the straight walk.
pub fn monodromy(p: &ModelParams, g: &GaitSchedule, cfg: &FloquetConfig) -> Result<FloquetResult> {
    let z = monodromy_matrix(p, g, cfg)?;
    Ok(analyze_straight_walk(z, p, g, cfg))
}

/// Splits off the three symmetry multipliers and eigen-solves the shape block.
pub fn analyze_straight_walk(z: DMatrix<f64>, p: &ModelParams, g: &GaitSchedule, cfg: &FloquetConfig) -> FloquetResult {
    let dof = p.dof();
    let dim = 2 * dof;
    let tau = g.period();
    let v = g.speed();
    // w = T δz: replace δẏ by the body-frame lateral velocity δẏ − v δθ₀
    let mut t = DMatrix::<f64>::identity(dim, dim);
    t[(dof + 1, 2)] = -v;
    let mut t_inv = DMatrix::<f64>::identity(dim, dim);
    t_inv[(dof + 1, 2)] = v;
    let zw = &t * &z * &t_inv;

    let group = [0usize, 1, 2];
    let shape: Vec<usize> = (0..dim).filter(|i| !group.contains(i)).collect();
    let zs = zw.select_rows(&shape).select_columns(&shape);
    let z11 = zw.select_rows(&group).select_columns(&group);
    let z12 = zw.select_rows(&group).select_columns(&shape);

    let mut modes: Vec<FloquetMode> = Vec::with_capacity(dim);
    for i in 0..3 {
        let mut vec = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        vec[i] = Complex64::new(1.0, 0.0);
        if i == 2 {
            // rotated straight walk: δθ₀ = 1, δẏ = v
            vec[dof + 1] = Complex64::new(v, 0.0);
            let n = vec.norm();
            vec /= Complex64::new(n, 0.0);
        }
        modes.push(make_mode(Complex64::new(1.0, 0.0), vec, 0.0, tau, cfg));
    }

    let z11c = z11.map(|x| Complex64::new(x, 0.0));
    let z12c = z12.map(|x| Complex64::new(x, 0.0));
    let t_inv_c = t_inv.map(|x| Complex64::new(x, 0.0));
    for pair in eigenpairs(&zs) {
        let mu = pair.value;
        let ws = &pair.vector;
        // group components: (μ I − Z₁₁) a = Z₁₂ w
        let rhs = &z12c * ws;
        let lhs = DMatrix::<Complex64>::identity(3, 3) * mu - &z11c;
        let a = if (mu - 1.0).norm() > 1e-8 {
            lhs.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(3))
        } else {
            DVector::zeros(3)
        };
        let mut w = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for (k, &gi) in group.iter().enumerate() {
            w[gi] = a[k];
        }
        for (k, &si) in shape.iter().enumerate() {
            w[si] = ws[k];
        }
        let mut vec = &t_inv_c * w;
        let n = vec.norm();
        if n > 0.0 {
            vec /= Complex64::new(n, 0.0);
        }
        modes.push(make_mode(mu, vec, pair.residual, tau, cfg));
    }
    FloquetResult::assemble(z, tau, modes, cfg)
}

/// Bisection result for the critical spring constant.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    /// Critical k₁, N·mm/deg.
    pub k_crit: f64,
    pub crossing_type: CrossingType,
    /// Leading exponent at the returned point.
    pub leading: Complex64,
    /// Joint components of the destabilizing eigenvector, evaluated just
    /// inside the unstable side.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
}

/// Which spring constants a scalar `k` (N·mm/deg) controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpringMode {
    /// Only k₁; the others keep their values.
    FirstJoint,
    /// All joints set to `k`.
    Uniform,
}

impl SpringMode {
    pub fn apply(self, p: &ModelParams, k: f64) -> ModelParams {
        let mut q = p.clone();
        match self {
            SpringMode::FirstJoint => q.k[0] = nmm_deg_to_si(k),
            SpringMode::Uniform => q.k.iter_mut().for_each(|ki| *ki = nmm_deg_to_si(k)),
        }
        q
    }
}

/// Bisects on the real part of the leading exponent. Stability is expected
/// on the stiff end of the bracket.
pub fn critical_k(
    p: &ModelParams,
    g: &GaitSchedule,
    mode: SpringMode,
    bracket: (f64, f64),
    cfg: &FloquetConfig,
) -> Result<CriticalPoint> {
    let eval = |k: f64| -> Result<FloquetResult> { monodromy(&mode.apply(p, k), g, cfg) };
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let (r_lo, r_hi) = rayon::join(|| eval(lo), || eval(hi));
    let mut unstable = r_lo?;
    let mut f_lo = unstable.leading_exponent().re;
    let f_hi = r_hi?.leading_exponent().re;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi, re_lo: f_lo, re_hi: f_hi });
    }
    let mut iterations = 0;
    while hi - lo > 1e-3 && f_lo.abs() >= 1e-5 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let r = eval(mid)?;
        let f = r.leading_exponent().re;
        if !f.is_finite() {
            return Err(Error::BlowUp { t: g.period(), what: format!("non-finite exponent at k = {mid}") });
        }
        if f > 0.0 {
            lo = mid;
            f_lo = f;
            unstable = r;
        } else {
            hi = mid;
        }
    }
    let k_crit = if f_lo.abs() < 1e-5 { lo } else { 0.5 * (lo + hi) };
    Ok(CriticalPoint {
        k_crit,
        crossing_type: unstable.leading_kind(cfg.tol_real),
        leading: unstable.leading_exponent(),
        eigenvector: unstable.leading_joint_components().unwrap_or_default(),
        iterations,
    })
}

/// One row of a critical-value table.
#[derive(Debug, Clone)]
pub struct CriticalRow {
    pub value: f64,
    pub result: Result<CriticalPoint>,
}

/// Critical k for several parameter sets, evaluated in parallel.
pub fn critical_table(
    cases: Vec<(f64, ModelParams, GaitSchedule)>,
    mode: SpringMode,
    bracket: (f64, f64),
    cfg: &FloquetConfig,
) -> Vec<CriticalRow> {
    cases
        .into_par_iter()
        .map(|(value, p, g)| CriticalRow { value, result: critical_k(&p, &g, mode, bracket, cfg) })
        .collect()
}

/// One row of an exponent-locus sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub k: f64,
    pub result: Result<FloquetResult>,
}

pub fn sweep(p: &ModelParams, g: &GaitSchedule, mode: SpringMode, ks: &[f64], cfg: &FloquetConfig) -> Vec<SweepRow> {
    ks.par_iter()
        .map(|&k| SweepRow { k, result: monodromy(&mode.apply(p, k), g, cfg) })
        .collect()
}
