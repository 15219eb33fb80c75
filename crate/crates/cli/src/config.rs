//! Run configuration: a sectioned `key = value` file whose keys carry their
//! units. Every key is optional; unknown keys are rejected.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use legchain::bifurcation::{Perturbation, WalkConfig};
use legchain::floquet::{FloquetConfig, SpringMode};
use legchain::gait::GaitSchedule;
use legchain::params::{nmm_deg_to_si, ModelParams, TOTAL_LENGTH, TOTAL_MASS};
use legchain::turning::{ControllerConfig, TurningTask, HOPF_SWEEP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_modules: usize,
    pub k1_nmm_deg: f64,
    /// Stiffness of joints 2 and up.
    pub k_rest_nmm_deg: f64,
    pub segment_length_cm: f64,
    pub segment_mass_kg: f64,
    /// Defaults to a uniform rod, `m L² / 12`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_inertia_kgm2: Option<f64>,
    pub c_fric_ns_per_m: f64,
    pub d_leg_cm: f64,
    pub hip_offset_cm: f64,
    pub joint_damping_nms_per_rad: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            n_modules: p.n_modules,
            k1_nmm_deg: p.k1_nmm_deg(),
            k_rest_nmm_deg: p.k1_nmm_deg(),
            segment_length_cm: 100.0 * TOTAL_LENGTH / 6.0,
            segment_mass_kg: TOTAL_MASS / 6.0,
            segment_inertia_kgm2: None,
            c_fric_ns_per_m: p.c_fric,
            d_leg_cm: 100.0 * p.d_leg,
            hip_offset_cm: 100.0 * p.hip_offset,
            joint_damping_nms_per_rad: p.joint_damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSection {
    pub t_swing_s: f64,
    pub t_stance_s: f64,
    pub stride_cm: f64,
    pub phase_lag_deg: f64,
    pub lr_lag_deg: f64,
}

impl Default for GaitSection {
    fn default() -> Self {
        let g = GaitSchedule::default();
        Self {
            t_swing_s: g.t_swing,
            t_stance_s: g.t_stance,
            stride_cm: 100.0 * g.stride,
            phase_lag_deg: g.phase_lag.to_degrees(),
            lr_lag_deg: g.lr_lag.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub t_sim_s: f64,
    pub dt_s: f64,
    pub dt_out_s: f64,
    pub perturbation_rad: f64,
    pub perturbation_sigma_rad: f64,
    /// When set, every joint gets this stiffness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_k_nmm_deg: Option<f64>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        let w = WalkConfig::default();
        Self {
            t_sim_s: w.t_sim,
            dt_s: w.dt,
            dt_out_s: w.dt_out,
            perturbation_rad: w.perturbation.theta1,
            perturbation_sigma_rad: 0.0,
            uniform_k_nmm_deg: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKey {
    FirstJoint,
    Uniform,
}

impl ModeKey {
    pub fn spring_mode(self) -> SpringMode {
        match self {
            ModeKey::FirstJoint => SpringMode::FirstJoint,
            ModeKey::Uniform => SpringMode::Uniform,
        }
    }
}

/// Quantity varied in the critical-value table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VaryKey {
    None,
    /// Stiffness of joints 2 and up, N·mm/deg.
    K2345,
    /// Stroke length, cm; sets the walking speed.
    #[serde(alias = "gait_speed")]
    Stride,
    /// Ipsilateral phase lag, deg.
    PhaseLag,
    NModules,
}

impl VaryKey {
    pub fn as_str(self) -> &'static str {
        match self {
            VaryKey::None => "none",
            VaryKey::K2345 => "k2345",
            VaryKey::Stride => "stride",
            VaryKey::PhaseLag => "phase_lag",
            VaryKey::NModules => "n_modules",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetSection {
    pub dt_s: f64,
    pub fd_step: f64,
    pub tol_zero_per_s: f64,
    pub tol_real_per_s: f64,
    pub mode: ModeKey,
    pub k_list_nmm_deg: Vec<f64>,
    pub bracket_nmm_deg: [f64; 2],
    pub vary: VaryKey,
    pub vary_values: Vec<f64>,
}

impl Default for FloquetSection {
    fn default() -> Self {
        let c = FloquetConfig::default();
        Self {
            dt_s: c.dt,
            fd_step: c.fd_step,
            tol_zero_per_s: c.tol_zero,
            tol_real_per_s: c.tol_real,
            mode: ModeKey::FirstJoint,
            k_list_nmm_deg: vec![41.0, 30.0, 20.0, 16.0, 15.0, 14.0, 13.0, 12.0, 10.0, 8.0],
            bracket_nmm_deg: [3.0, 40.0],
            vary: VaryKey::None,
            vary_values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagramSection {
    pub k1_list_nmm_deg: Vec<f64>,
    pub t_sim_s: f64,
    pub dt_s: f64,
    pub dt_out_s: f64,
    pub window_s: f64,
    pub perturbation_rad: f64,
    pub perturbation_sigma_rad: f64,
    /// Also run the softer-rest, short-stride and phase-π conditions.
    pub variations: bool,
}

impl Default for DiagramSection {
    fn default() -> Self {
        Self {
            k1_list_nmm_deg: vec![20.0, 16.0, 15.0, 13.8, 13.5, 13.0, 12.5, 12.0, 11.0, 10.0],
            t_sim_s: 200.0,
            dt_s: 2e-4,
            dt_out_s: 0.01,
            window_s: 5.0,
            perturbation_rad: 0.1,
            perturbation_sigma_rad: 0.0,
            variations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurningSection {
    pub psi_deg: f64,
    pub distance_m: f64,
    pub controller: bool,
    pub success_radius_m: f64,
    pub stop_on_arrival: bool,
    pub t_max_s: f64,
    pub eval_time_s: f64,
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub max_step_deg: f64,
    pub max_angle_deg: f64,
    pub sensor_noise_deg: f64,
    pub perturbation_rad: f64,
    pub dt_s: f64,
    pub dt_out_s: f64,
    pub k1_list_nmm_deg: Vec<f64>,
    pub hopf_list_nmm_deg: Vec<f64>,
    /// Reference Hopf point of the comparison plot, N·mm/deg.
    pub hopf_reference_nmm_deg: f64,
    pub write_traces: bool,
}

impl Default for TurningSection {
    fn default() -> Self {
        let t = TurningTask::default();
        let c = ControllerConfig::default();
        Self {
            psi_deg: t.psi.to_degrees(),
            distance_m: t.distance,
            controller: t.controller_on,
            success_radius_m: t.success_radius,
            stop_on_arrival: t.stop_on_arrival,
            t_max_s: t.t_max,
            eval_time_s: t.eval_time,
            t_start_s: c.t_start,
            t_end_s: c.t_end,
            max_step_deg: c.max_step.to_degrees(),
            max_angle_deg: c.max_angle.to_degrees(),
            sensor_noise_deg: 0.0,
            perturbation_rad: t.perturbation.theta1,
            dt_s: t.dt,
            dt_out_s: t.dt_out,
            k1_list_nmm_deg: vec![11.0, 12.0, 13.0, 14.0, 16.0],
            hopf_list_nmm_deg: HOPF_SWEEP.to_vec(),
            hopf_reference_nmm_deg: 18.0,
            write_traces: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub model: ModelSection,
    pub gait: GaitSection,
    pub simulate: SimulateSection,
    pub floquet: FloquetSection,
    pub diagram: DiagramSection,
    pub turning: TurningSection,
}

fn positive(key: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!("{key}: must be positive, got {v}");
    }
    Ok(())
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        bail!("{key}: must be non-negative, got {v}");
    }
    Ok(())
}

fn finite(key: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        bail!("{key}: must be finite, got {v}");
    }
    Ok(())
}

fn positive_list(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        bail!("{key}: must not be empty");
    }
    for (i, &x) in v.iter().enumerate() {
        positive(&format!("{key}[{i}]"), x)?;
    }
    Ok(())
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).context("parsing config")?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Fills derived defaults so the serialized form is complete.
    pub fn resolve(&mut self) {
        let m = &mut self.model;
        if m.segment_inertia_kgm2.is_none() {
            let l = m.segment_length_cm / 100.0;
            m.segment_inertia_kgm2 = Some(m.segment_mass_kg * l * l / 12.0);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n_modules < 2 {
            bail!("model.n_modules: at least two modules are required, got {}", m.n_modules);
        }
        positive("model.k1_nmm_deg", m.k1_nmm_deg)?;
        positive("model.k_rest_nmm_deg", m.k_rest_nmm_deg)?;
        positive("model.segment_length_cm", m.segment_length_cm)?;
        positive("model.segment_mass_kg", m.segment_mass_kg)?;
        positive("model.segment_inertia_kgm2", m.segment_inertia_kgm2.unwrap_or(f64::NAN))?;
        positive("model.c_fric_ns_per_m", m.c_fric_ns_per_m)?;
        positive("model.d_leg_cm", m.d_leg_cm)?;
        finite("model.hip_offset_cm", m.hip_offset_cm)?;
        if m.hip_offset_cm.abs() > 0.5 * m.segment_length_cm {
            bail!("model.hip_offset_cm: must lie within the segment (|offset| <= {})", 0.5 * m.segment_length_cm);
        }
        non_negative("model.joint_damping_nms_per_rad", m.joint_damping_nms_per_rad)?;

        let g = &self.gait;
        positive("gait.t_swing_s", g.t_swing_s)?;
        positive("gait.t_stance_s", g.t_stance_s)?;
        positive("gait.stride_cm", g.stride_cm)?;
        finite("gait.phase_lag_deg", g.phase_lag_deg)?;
        finite("gait.lr_lag_deg", g.lr_lag_deg)?;

        let s = &self.simulate;
        positive("simulate.t_sim_s", s.t_sim_s)?;
        positive("simulate.dt_s", s.dt_s)?;
        positive("simulate.dt_out_s", s.dt_out_s)?;
        finite("simulate.perturbation_rad", s.perturbation_rad)?;
        non_negative("simulate.perturbation_sigma_rad", s.perturbation_sigma_rad)?;
        if let Some(k) = s.uniform_k_nmm_deg {
            positive("simulate.uniform_k_nmm_deg", k)?;
        }

        let f = &self.floquet;
        positive("floquet.dt_s", f.dt_s)?;
        positive("floquet.fd_step", f.fd_step)?;
        positive("floquet.tol_zero_per_s", f.tol_zero_per_s)?;
        positive("floquet.tol_real_per_s", f.tol_real_per_s)?;
        positive_list("floquet.k_list_nmm_deg", &f.k_list_nmm_deg)?;
        positive_list("floquet.bracket_nmm_deg", &f.bracket_nmm_deg)?;
        if f.bracket_nmm_deg[0] >= f.bracket_nmm_deg[1] {
            bail!("floquet.bracket_nmm_deg: lower end must be below upper end");
        }
        match f.vary {
            VaryKey::None => {}
            VaryKey::PhaseLag => {
                if f.vary_values.is_empty() {
                    bail!("floquet.vary_values: must not be empty when vary = \"phase_lag\"");
                }
                for (i, &v) in f.vary_values.iter().enumerate() {
                    finite(&format!("floquet.vary_values[{i}]"), v)?;
                }
            }
            VaryKey::NModules => {
                positive_list("floquet.vary_values", &f.vary_values)?;
                for (i, &v) in f.vary_values.iter().enumerate() {
                    if v.fract() != 0.0 || v < 2.0 {
                        bail!("floquet.vary_values[{i}]: module count must be an integer >= 2, got {v}");
                    }
                }
            }
            _ => positive_list("floquet.vary_values", &f.vary_values)?,
        }

        let d = &self.diagram;
        positive_list("diagram.k1_list_nmm_deg", &d.k1_list_nmm_deg)?;
        positive("diagram.t_sim_s", d.t_sim_s)?;
        positive("diagram.dt_s", d.dt_s)?;
        positive("diagram.dt_out_s", d.dt_out_s)?;
        positive("diagram.window_s", d.window_s)?;
        if d.window_s >= d.t_sim_s {
            bail!("diagram.window_s: must be shorter than diagram.t_sim_s");
        }
        finite("diagram.perturbation_rad", d.perturbation_rad)?;
        non_negative("diagram.perturbation_sigma_rad", d.perturbation_sigma_rad)?;

        let t = &self.turning;
        if !(t.psi_deg.abs() > 0.0 && t.psi_deg.abs() < 90.0) {
            bail!("turning.psi_deg: must satisfy 0 < |psi| < 90, got {}", t.psi_deg);
        }
        positive("turning.distance_m", t.distance_m)?;
        positive("turning.success_radius_m", t.success_radius_m)?;
        positive("turning.eval_time_s", t.eval_time_s)?;
        if !(t.t_max_s >= t.eval_time_s) {
            bail!("turning.t_max_s: must be at least turning.eval_time_s");
        }
        non_negative("turning.t_start_s", t.t_start_s)?;
        if !(t.t_end_s > t.t_start_s) {
            bail!("turning.t_end_s: must exceed turning.t_start_s");
        }
        positive("turning.max_step_deg", t.max_step_deg)?;
        positive("turning.max_angle_deg", t.max_angle_deg)?;
        non_negative("turning.sensor_noise_deg", t.sensor_noise_deg)?;
        finite("turning.perturbation_rad", t.perturbation_rad)?;
        positive("turning.dt_s", t.dt_s)?;
        positive("turning.dt_out_s", t.dt_out_s)?;
        positive_list("turning.k1_list_nmm_deg", &t.k1_list_nmm_deg)?;
        positive_list("turning.hopf_list_nmm_deg", &t.hopf_list_nmm_deg)?;
        positive("turning.hopf_reference_nmm_deg", t.hopf_reference_nmm_deg)?;

        // the model's own checks catch combinations the per-key checks miss
        self.params().validate().context("model")?;
        self.gait().validate().context("gait")?;
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        let m = &self.model;
        let mut p = ModelParams::with_modules(m.n_modules);
        p.seg_length = m.segment_length_cm / 100.0;
        p.seg_mass = m.segment_mass_kg;
        p.seg_inertia = m.segment_inertia_kgm2.unwrap_or(p.seg_mass * p.seg_length * p.seg_length / 12.0);
        p.c_fric = m.c_fric_ns_per_m;
        p.d_leg = m.d_leg_cm / 100.0;
        p.hip_offset = m.hip_offset_cm / 100.0;
        p.joint_damping = m.joint_damping_nms_per_rad;
        p.set_springs_nmm_deg(m.k1_nmm_deg, m.k_rest_nmm_deg);
        p
    }

    pub fn gait(&self) -> GaitSchedule {
        let g = &self.gait;
        GaitSchedule {
            t_swing: g.t_swing_s,
            t_stance: g.t_stance_s,
            stride: g.stride_cm / 100.0,
            phase_lag: g.phase_lag_deg.to_radians(),
            lr_lag: g.lr_lag_deg.to_radians(),
            ..GaitSchedule::default()
        }
    }

    /// Parameters for `simulate`, with the optional uniform stiffness.
    pub fn simulate_params(&self) -> ModelParams {
        let mut p = self.params();
        if let Some(k) = self.simulate.uniform_k_nmm_deg {
            p.k.iter_mut().for_each(|ki| *ki = nmm_deg_to_si(k));
        }
        p
    }

    pub fn simulate_walk(&self) -> WalkConfig {
        let s = &self.simulate;
        WalkConfig {
            t_sim: s.t_sim_s,
            dt: s.dt_s,
            dt_out: s.dt_out_s,
            perturbation: Perturbation {
                theta1: s.perturbation_rad,
                random_sigma: s.perturbation_sigma_rad,
                seed: self.run.seed,
            },
        }
    }

    pub fn floquet_config(&self) -> FloquetConfig {
        let f = &self.floquet;
        FloquetConfig { dt: f.dt_s, fd_step: f.fd_step, tol_zero: f.tol_zero_per_s, tol_real: f.tol_real_per_s }
    }

    pub fn diagram_walk(&self) -> WalkConfig {
        let d = &self.diagram;
        WalkConfig {
            t_sim: d.t_sim_s,
            dt: d.dt_s,
            dt_out: d.dt_out_s,
            perturbation: Perturbation {
                theta1: d.perturbation_rad,
                random_sigma: d.perturbation_sigma_rad,
                seed: self.run.seed,
            },
        }
    }

    pub fn turning_task(&self) -> TurningTask {
        let t = &self.turning;
        TurningTask {
            psi: t.psi_deg.to_radians(),
            distance: t.distance_m,
            controller_on: t.controller,
            controller: ControllerConfig {
                t_start: t.t_start_s,
                t_end: t.t_end_s,
                max_step: t.max_step_deg.to_radians(),
                max_angle: t.max_angle_deg.to_radians(),
                noise_sigma: t.sensor_noise_deg.to_radians(),
            },
            success_radius: t.success_radius_m,
            stop_on_arrival: t.stop_on_arrival,
            t_max: t.t_max_s,
            eval_time: t.eval_time_s,
            perturbation: Perturbation { theta1: t.perturbation_rad, ..Perturbation::default() },
            dt: t.dt_s,
            dt_out: t.dt_out_s,
        }
    }
}
