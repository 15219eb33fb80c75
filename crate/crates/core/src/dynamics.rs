//! Equations of motion of the planar chain,
//! `K(q) q̈ + h(q, q̇) = u(q, q̇) + λ(q, q̇, t)`.
//!
//! Segments are uniform rods of length `L` joined end-to-end at the yaw
//! joints. `q = [x, y, θ₀, θ₁ … θ_{n−1}]` where `(x, y)` is the center of the
//! front module, `θ₀` its heading and `θᵢ` the relative joint angles, so the
//! heading of module `j` is `θ₀ + θ₁ + … + θⱼ`. Legs are massless; a stance
//! leg tip receives a viscous force `−c · v_tip` where `v_tip` is its velocity
//! relative to the floor.
//!
//! Nothing here reads `x` or `y`: every force depends on orientation and
//! rates only.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gait::{ActiveLeg, GaitSchedule};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    pub t: f64,
}

impl State {
    pub fn new(q: DVector<f64>, qdot: DVector<f64>, t: f64) -> Self {
        debug_assert_eq!(q.len(), qdot.len());
        Self { q, qdot, t }
    }

    /// Chain at rest, aligned with the x-axis.
    pub fn at_rest(p: &ModelParams) -> Self {
        Self::new(DVector::zeros(p.dof()), DVector::zeros(p.dof()), 0.0)
    }

    /// The analytic straight walk `q̂ = [v t + x₀, y₀, 0, …]`, `q̂̇ = [v, 0, …]`.
    pub fn straight_walk(p: &ModelParams, g: &GaitSchedule, t: f64, x0: f64, y0: f64) -> Self {
        let mut s = Self::at_rest(p);
        let v = g.speed();
        s.q[0] = v * t + x0;
        s.q[1] = y0;
        s.qdot[0] = v;
        s.t = t;
        s
    }

    pub fn n_modules(&self) -> usize {
        self.q.len() - 2
    }

    /// Relative joint angles θ₁…θ_{n−1}.
    pub fn joint_angles(&self) -> &[f64] {
        &self.q.as_slice()[3..]
    }

    pub fn heading(&self) -> f64 {
        self.q[2]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }

    /// Packs `[q; q̇]`.
    pub fn to_z(&self) -> DVector<f64> {
        let n = self.q.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.q[i] } else { self.qdot[i - n] })
    }

    pub fn from_z(z: &DVector<f64>, t: f64) -> Self {
        let n = z.len() / 2;
        Self::new(z.rows(0, n).into_owned(), z.rows(n, n).into_owned(), t)
    }

    /// Reflection about the world x-axis.
    pub fn mirrored(&self) -> Self {
        let mut s = self.clone();
        for i in 1..self.q.len() {
            s.q[i] = -s.q[i];
            s.qdot[i] = -s.qdot[i];
        }
        s
    }
}

/// Per-evaluation cache of segment orientations.
struct ChainKinematics {
    /// Absolute heading rate of each segment.
    phidot: Vec<f64>,
    /// Unit axis and left normal of each segment.
    axis: Vec<[f64; 2]>,
    normal: Vec<[f64; 2]>,
}

impl ChainKinematics {
    fn new(q: &[f64], qdot: &[f64]) -> Self {
        let n = q.len() - 2;
        let mut phi = q[2];
        let mut phidot = qdot[2];
        let mut out = Self {
            phidot: Vec::with_capacity(n),
            axis: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
        };
        for j in 0..n {
            if j > 0 {
                phi += q[2 + j];
                phidot += qdot[2 + j];
            }
            let (s, c) = phi.sin_cos();
            out.phidot.push(phidot);
            out.axis.push([c, s]);
            out.normal.push([-s, c]);
        }
        out
    }
}

/// Jacobian of a body-fixed point together with its velocity-product
/// acceleration `J̇ q̇`.
struct PointJacobian {
    /// Columns `∂p/∂q`, one `[dx, dy]` per generalized coordinate.
    cols: Vec<[f64; 2]>,
    bias_acc: [f64; 2],
    /// Position relative to `(x, y)`.
    rel_pos: [f64; 2],
}

impl PointJacobian {
    /// Point on segment `j` at body-frame offset `(s, l)` from its center.
    fn new(kin: &ChainKinematics, half: f64, j: usize, s: f64, l: f64) -> Self {
        let dof = kin.axis.len() + 2;
        let mut cols = vec![[0.0; 2]; dof];
        cols[0] = [1.0, 0.0];
        cols[1] = [0.0, 1.0];
        let mut bias_acc = [0.0; 2];
        let mut rel_pos = [0.0; 2];
        // p = (x, y) + Σ_m (α_m e_m + β_m n_m); ∂/∂φ_m = α_m n_m − β_m e_m
        let mut suffix = [0.0; 2];
        for m in (0..=j).rev() {
            let (alpha, beta) = if m == j {
                (if j == 0 { s } else { s - half }, l)
            } else if m == 0 {
                (-half, 0.0)
            } else {
                (-2.0 * half, 0.0)
            };
            let e = kin.axis[m];
            let nrm = kin.normal[m];
            let d = [alpha * nrm[0] - beta * e[0], alpha * nrm[1] - beta * e[1]];
            suffix[0] += d[0];
            suffix[1] += d[1];
            cols[2 + m] = suffix;
            let w2 = kin.phidot[m] * kin.phidot[m];
            let r = [alpha * e[0] + beta * nrm[0], alpha * e[1] + beta * nrm[1]];
            rel_pos[0] += r[0];
            rel_pos[1] += r[1];
            bias_acc[0] -= w2 * r[0];
            bias_acc[1] -= w2 * r[1];
        }
        Self { cols, bias_acc, rel_pos }
    }

    fn velocity(&self, qdot: &[f64]) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (c, &qd) in self.cols.iter().zip(qdot) {
            v[0] += c[0] * qd;
            v[1] += c[1] * qd;
        }
        v
    }

    /// Accumulates `Jᵀ f` into `out`.
    fn add_transpose_times(&self, f: [f64; 2], out: &mut DVector<f64>) {
        for (i, c) in self.cols.iter().enumerate() {
            out[i] += c[0] * f[0] + c[1] * f[1];
        }
    }
}

/// Inertia matrix `K(q)`.
pub fn mass_matrix(q: &DVector<f64>, p: &ModelParams) -> DMatrix<f64> {
    let zeros = DVector::zeros(q.len());
    let kin = ChainKinematics::new(q.as_slice(), zeros.as_slice());
    mass_matrix_with(&kin, p)
}

fn mass_matrix_with(kin: &ChainKinematics, p: &ModelParams) -> DMatrix<f64> {
    let n = kin.axis.len();
    let dof = n + 2;
    let half = 0.5 * p.seg_length;
    let mut k = DMatrix::zeros(dof, dof);
    for j in 0..n {
        let jac = PointJacobian::new(kin, half, j, 0.0, 0.0);
        // translational part; columns beyond 2 + j vanish
        let last = 2 + j;
        for a in 0..=last {
            let ca = jac.cols[a];
            for b in a..=last {
                let cb = jac.cols[b];
                let v = p.seg_mass * (ca[0] * cb[0] + ca[1] * cb[1]);
                k[(a, b)] += v;
            }
        }
        // rotational part: ∂φ_j/∂θ_k = 1 for k ≤ j
        for a in 2..=last {
            for b in a..=last {
                k[(a, b)] += p.seg_inertia;
            }
        }
    }
    for a in 0..dof {
        for b in 0..a {
            k[(a, b)] = k[(b, a)];
        }
    }
    k
}

/// Velocity-product term `h` and spring (plus optional damping) torques `u`.
pub fn bias_spring_terms(s: &State, p: &ModelParams) -> (DVector<f64>, DVector<f64>) {
    let kin = ChainKinematics::new(s.q.as_slice(), s.qdot.as_slice());
    (bias_with(&kin, p), spring_torques(s, p))
}

fn bias_with(kin: &ChainKinematics, p: &ModelParams) -> DVector<f64> {
    let n = kin.axis.len();
    let half = 0.5 * p.seg_length;
    let mut h = DVector::zeros(n + 2);
    for j in 0..n {
        let jac = PointJacobian::new(kin, half, j, 0.0, 0.0);
        let f = [p.seg_mass * jac.bias_acc[0], p.seg_mass * jac.bias_acc[1]];
        jac.add_transpose_times(f, &mut h);
    }
    h
}

fn spring_torques(s: &State, p: &ModelParams) -> DVector<f64> {
    let mut u = DVector::zeros(s.q.len());
    for (i, &ki) in p.k.iter().enumerate() {
        let idx = 3 + i;
        u[idx] = -ki * s.q[idx] - p.joint_damping * s.qdot[idx];
    }
    u
}

/// World position and velocity of a stance tip and the friction force on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipForce {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub force: [f64; 2],
}

fn tip_forces_with(
    kin: &ChainKinematics,
    s: &State,
    p: &ModelParams,
    g: &GaitSchedule,
    legs: &[ActiveLeg],
    mut visit: impl FnMut(&PointJacobian, TipForce),
) {
    let half = 0.5 * p.seg_length;
    let qdot = s.qdot.as_slice();
    for a in legs {
        let j = a.leg.module;
        let offset = p.hip_offset + g.tip_offset(s.t - a.t_onset);
        let jac = PointJacobian::new(kin, half, j, offset, a.leg.side.lateral_sign() * p.d_leg);
        let body = jac.velocity(qdot);
        let rel = g.relative_velocity(a.leg, g.steer);
        let (e, nrm) = (kin.axis[j], kin.normal[j]);
        let vel = [
            body[0] + rel[0] * e[0] + rel[1] * nrm[0],
            body[1] + rel[0] * e[1] + rel[1] * nrm[1],
        ];
        let force = [-p.c_fric * vel[0], -p.c_fric * vel[1]];
        let position = [s.q[0] + jac.rel_pos[0], s.q[1] + jac.rel_pos[1]];
        visit(&jac, TipForce { position, velocity: vel, force });
    }
}

/// Per-leg tip forces for the given stance set.
pub fn tip_forces(s: &State, p: &ModelParams, g: &GaitSchedule, legs: &[ActiveLeg]) -> Vec<TipForce> {
    let kin = ChainKinematics::new(s.q.as_slice(), s.qdot.as_slice());
    let mut out = Vec::with_capacity(legs.len());
    tip_forces_with(&kin, s, p, g, legs, |_, tf| out.push(tf));
    out
}

/// Generalized reaction force `λ` for an explicit stance set.
pub fn reaction_forces_with(
    s: &State,
    p: &ModelParams,
    g: &GaitSchedule,
    legs: &[ActiveLeg],
) -> DVector<f64> {
    let kin = ChainKinematics::new(s.q.as_slice(), s.qdot.as_slice());
    reaction_with(&kin, s, p, g, legs)
}

fn reaction_with(
    kin: &ChainKinematics,
    s: &State,
    p: &ModelParams,
    g: &GaitSchedule,
    legs: &[ActiveLeg],
) -> DVector<f64> {
    let mut lambda = DVector::zeros(s.q.len());
    tip_forces_with(kin, s, p, g, legs, |jac, tf| jac.add_transpose_times(tf.force, &mut lambda));
    lambda
}

/// Generalized reaction force `λ` with the stance set taken from the
/// schedule at `s.t`.
pub fn reaction_forces(s: &State, p: &ModelParams, g: &GaitSchedule) -> DVector<f64> {
    let legs = g.active_legs(s.t, p.n_modules);
    reaction_forces_with(s, p, g, &legs)
}

/// `q̈ = K⁻¹(u + λ − h)` for an explicit stance set.
pub fn acceleration_with(
    s: &State,
    p: &ModelParams,
    g: &GaitSchedule,
    legs: &[ActiveLeg],
) -> Result<DVector<f64>> {
    let kin = ChainKinematics::new(s.q.as_slice(), s.qdot.as_slice());
    let k = mass_matrix_with(&kin, p);
    let rhs = spring_torques(s, p) + reaction_with(&kin, s, p, g, legs) - bias_with(&kin, p);
    let chol = k.cholesky().ok_or(Error::SingularMass { t: s.t })?;
    Ok(chol.solve(&rhs))
}

/// `q̈` with the stance set taken from the schedule at `s.t`.
pub fn acceleration(s: &State, p: &ModelParams, g: &GaitSchedule) -> Result<DVector<f64>> {
    let legs = g.active_legs(s.t, p.n_modules);
    acceleration_with(s, p, g, &legs)
}

/// First-order form `ż = f(z, t)`.
pub fn state_derivative(
    z: &DVector<f64>,
    t: f64,
    p: &ModelParams,
    g: &GaitSchedule,
    legs: &[ActiveLeg],
) -> Result<DVector<f64>> {
    let s = State::from_z(z, t);
    let qdd = acceleration_with(&s, p, g, legs)?;
    let n = s.q.len();
    Ok(DVector::from_fn(2 * n, |i, _| if i < n { s.qdot[i] } else { qdd[i - n] }))
}

/// World positions of the segment centers.
pub fn segment_centers(q: &DVector<f64>, p: &ModelParams) -> Vec<[f64; 2]> {
    let zeros = DVector::zeros(q.len());
    let kin = ChainKinematics::new(q.as_slice(), zeros.as_slice());
    (0..p.n_modules)
        .map(|j| {
            let jac = PointJacobian::new(&kin, 0.5 * p.seg_length, j, 0.0, 0.0);
            [q[0] + jac.rel_pos[0], q[1] + jac.rel_pos[1]]
        })
        .collect()
}

/// Total linear momentum `Σ m ċⱼ`.
pub fn linear_momentum(s: &State, p: &ModelParams) -> [f64; 2] {
    let kin = ChainKinematics::new(s.q.as_slice(), s.qdot.as_slice());
    let mut mom = [0.0; 2];
    for j in 0..p.n_modules {
        let v = PointJacobian::new(&kin, 0.5 * p.seg_length, j, 0.0, 0.0).velocity(s.qdot.as_slice());
        mom[0] += p.seg_mass * v[0];
        mom[1] += p.seg_mass * v[1];
    }
    mom
}

pub fn kinetic_energy(s: &State, p: &ModelParams) -> f64 {
    let k = mass_matrix(&s.q, p);
    0.5 * s.qdot.dot(&(k * &s.qdot))
}
