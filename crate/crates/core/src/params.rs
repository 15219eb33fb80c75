//! Physical constants of the planar chain and unit helpers.
//!
//! Spring constants are given in N·mm/deg in configuration files and
//! converted to N·m/rad for all internal computation.

use crate::error::{invalid, Result};

/// N·mm/deg → N·m/rad.
pub const NMM_PER_DEG_TO_NM_PER_RAD: f64 = 1e-3 * 180.0 / std::f64::consts::PI;

pub fn nmm_deg_to_si(k: f64) -> f64 {
    k * NMM_PER_DEG_TO_NM_PER_RAD
}

pub fn si_to_nmm_deg(k: f64) -> f64 {
    k / NMM_PER_DEG_TO_NM_PER_RAD
}

pub const TOTAL_LENGTH: f64 = 1.35;
pub const TOTAL_MASS: f64 = 8.5;

/// Default per-joint stiffness in N·mm/deg.
pub const DEFAULT_K_NMM_DEG: f64 = 41.0;

/// Stance friction coefficient (N·s/m). Together with the leg geometry
/// below it places the k₁-only loss of stability near 12–14 N·mm/deg.
pub const DEFAULT_C_FRIC: f64 = 200.0;

/// Lateral distance of a stance tip from the body midline, m.
pub const DEFAULT_D_LEG: f64 = 0.05;

/// Hips sit this far ahead of the segment center, m.
pub const DEFAULT_HIP_OFFSET: f64 = 0.08;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n_modules: usize,
    /// Segment length, m.
    pub seg_length: f64,
    /// Segment mass, kg.
    pub seg_mass: f64,
    /// Segment yaw inertia about its center, kg·m².
    pub seg_inertia: f64,
    /// Joint stiffness, N·m/rad, one per yaw joint (`n_modules - 1`).
    pub k: Vec<f64>,
    /// Optional viscous joint damping, N·m·s/rad. Zero by default.
    pub joint_damping: f64,
    /// Stance friction coefficient, N·s/m.
    pub c_fric: f64,
    /// Lateral offset of the leg tips from the body midline, m.
    pub d_leg: f64,
    /// Longitudinal position of the hips ahead of the segment center, m.
    pub hip_offset: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::with_modules(6)
    }
}

impl ModelParams {
    /// Chain of `n` modules keeping the per-module length and mass of the
    /// six-module robot; every joint at 41 N·mm/deg.
    pub fn with_modules(n: usize) -> Self {
        let seg_length = TOTAL_LENGTH / 6.0;
        let seg_mass = TOTAL_MASS / 6.0;
        Self {
            n_modules: n,
            seg_length,
            seg_mass,
            seg_inertia: seg_mass * seg_length * seg_length / 12.0,
            k: vec![nmm_deg_to_si(DEFAULT_K_NMM_DEG); n.saturating_sub(1)],
            joint_damping: 0.0,
            c_fric: DEFAULT_C_FRIC,
            d_leg: DEFAULT_D_LEG,
            hip_offset: DEFAULT_HIP_OFFSET,
        }
    }

    /// Number of generalized coordinates, `n_modules + 2`.
    pub fn dof(&self) -> usize {
        self.n_modules + 2
    }

    pub fn total_mass(&self) -> f64 {
        self.seg_mass * self.n_modules as f64
    }

    /// Sets k₁ and k₂…k_{n−1} from values in N·mm/deg.
    pub fn set_springs_nmm_deg(&mut self, k1: f64, k_rest: f64) {
        let n = self.n_modules - 1;
        self.k = (0..n).map(|i| nmm_deg_to_si(if i == 0 { k1 } else { k_rest })).collect();
    }

    pub fn with_k1_nmm_deg(mut self, k1: f64) -> Self {
        self.k[0] = nmm_deg_to_si(k1);
        self
    }

    pub fn with_uniform_k_nmm_deg(mut self, k: f64) -> Self {
        self.k.iter_mut().for_each(|ki| *ki = nmm_deg_to_si(k));
        self
    }

    pub fn k1_nmm_deg(&self) -> f64 {
        si_to_nmm_deg(self.k[0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modules < 2 {
            return Err(invalid("n_modules", "at least two modules are required"));
        }
        let positive = [
            ("segment_length_m", self.seg_length),
            ("segment_mass_kg", self.seg_mass),
            ("segment_inertia_kgm2", self.seg_inertia),
            ("c_fric_Ns_m", self.c_fric),
            ("d_leg_m", self.d_leg),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.hip_offset.abs() <= 0.5 * self.seg_length) {
            return Err(invalid("hip_offset_m", "must lie within the segment"));
        }
        if !(self.joint_damping.is_finite() && self.joint_damping >= 0.0) {
            return Err(invalid("joint_damping", "must be non-negative"));
        }
        if self.k.len() != self.n_modules - 1 {
            return Err(invalid(
                "k",
                format!("expected {} joint springs, got {}", self.n_modules - 1, self.k.len()),
            ));
        }
        for (i, &ki) in self.k.iter().enumerate() {
            if !(ki.is_finite() && ki > 0.0) {
                return Err(invalid(&format!("k{}", i + 1), format!("must be positive, got {ki}")));
            }
        }
        Ok(())
    }
}
