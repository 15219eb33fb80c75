//! One function per subcommand. Each writes its files and returns whether
//! every run in it completed.

use anyhow::Result;

use legchain::bifurcation::{
    fit_power, simulate_walk, steady_angles, sweep_diagram, variation_study, BifurcationDiagram, Variation,
};
use legchain::floquet::{critical_table, sweep, CrossingType, FloquetResult};
use legchain::gait::GaitSchedule;
use legchain::params::ModelParams;
use legchain::turning::{
    optimal_k1, required_radius, strategy_comparison, turning_sweep, Strategy, TurningOutcome, TurningSweep,
};

use crate::config::{Config, VaryKey};
use crate::output::{num, opt, OutDir};

fn status<T>(r: &legchain::Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

fn joint_columns(n_joints: usize, suffix: &str) -> Vec<String> {
    (1..=n_joints).map(|i| format!("th{i}{suffix}")).collect()
}

pub fn simulate(cfg: &Config, out: &OutDir) -> Result<bool> {
    let p = cfg.simulate_params();
    let g = cfg.gait();
    let walk = simulate_walk(&p, &g, &cfg.simulate_walk())?;
    let trace = &walk.trace;
    let mut columns = vec!["t_s".to_string(), "x_m".into(), "y_m".into(), "theta0_deg".into()];
    columns.extend((1..p.n_modules).map(|i| format!("theta{i}_deg")));
    let rows: Vec<Vec<String>> = trace
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![num(s.t), num(s.q[0]), num(s.q[1]), num(s.q[2].to_degrees())];
            r.extend(s.joint_angles().iter().map(|a| num(a.to_degrees())));
            r
        })
        .collect();
    let state = trace.aborted.as_deref().map_or("ok".to_string(), |w| format!("aborted, {w}"));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let path = out.csv("trace.csv", &[format!("status = {state}")], &cols, &rows)?;
    println!("wrote {} ({} samples, status {state})", path.display(), rows.len());
    if trace.aborted.is_none() && trace.duration() > 10.0 {
        if let Ok(s) = steady_angles(trace, g.period(), 5.0) {
            let means: Vec<String> = s.means.iter().map(|m| format!("{:.3}", m.to_degrees())).collect();
            println!("final 5 s mean joint angles (deg): {} converged = {}", means.join(", "), s.converged);
        }
    }
    Ok(trace.aborted.is_none())
}

fn leading_cells(r: &FloquetResult) -> [String; 4] {
    let e = r.leading_exponent();
    let kind = if e.re > 0.0 { r.crossing_type } else { CrossingType::None };
    [num(e.re), num(e.im), kind.to_string(), r.n_zero.to_string()]
}

fn vary_cases(cfg: &Config) -> Vec<(f64, ModelParams, GaitSchedule)> {
    let f = &cfg.floquet;
    let (p, g) = (cfg.params(), cfg.gait());
    if f.vary == VaryKey::None {
        return vec![(f64::NAN, p, g)];
    }
    f.vary_values
        .iter()
        .map(|&v| {
            let (mut pv, mut gv) = (p.clone(), g.clone());
            match f.vary {
                VaryKey::None => {}
                VaryKey::K2345 => pv.set_springs_nmm_deg(cfg.model.k1_nmm_deg, v),
                VaryKey::Stride => gv.stride = v / 100.0,
                VaryKey::PhaseLag => gv.phase_lag = v.to_radians(),
                VaryKey::NModules => {
                    let mut c = cfg.clone();
                    c.model.n_modules = v as usize;
                    pv = c.params();
                }
            }
            (v, pv, gv)
        })
        .collect()
}

pub fn floquet(cfg: &Config, out: &OutDir) -> Result<bool> {
    let f = &cfg.floquet;
    let fc = cfg.floquet_config();
    let mode = f.mode.spring_mode();
    let (p, g) = (cfg.params(), cfg.gait());
    let rows = sweep(&p, &g, mode, &f.k_list_nmm_deg, &fc);
    let mut ok = true;
    let mut table = Vec::new();
    let mut locus = Vec::new();
    for r in &rows {
        ok &= r.result.is_ok();
        let mut line = vec![num(r.k), num(1.0 / r.k)];
        match &r.result {
            Ok(res) => {
                line.extend(leading_cells(res));
                for (i, m) in res.modes.iter().enumerate() {
                    locus.push(vec![
                        num(r.k),
                        i.to_string(),
                        num(m.exponent.re),
                        num(m.exponent.im),
                        num(m.multiplier.norm()),
                        m.neutral.to_string(),
                    ]);
                }
            }
            Err(_) => line.extend(std::iter::repeat_n(String::new(), 4)),
        }
        line.push(status(&r.result));
        table.push(line);
    }
    let mode_note = format!("spring_mode = {:?}", f.mode);
    let path = out.csv(
        "floquet_sweep.csv",
        &[mode_note.clone()],
        &["k1_Nmm_deg", "inv_k1", "re_leading", "im_leading", "crossing_type", "n_zero", "status"],
        &table,
    )?;
    println!("wrote {}", path.display());
    let path = out.csv(
        "floquet_exponents.csv",
        &[mode_note.clone()],
        &["k1_Nmm_deg", "index", "re", "im", "multiplier_abs", "neutral"],
        &locus,
    )?;
    println!("wrote {}", path.display());

    let bracket = (f.bracket_nmm_deg[0], f.bracket_nmm_deg[1]);
    let critical = critical_table(vary_cases(cfg), mode, bracket, &fc);
    let mut crit_rows = Vec::new();
    for r in &critical {
        ok &= r.result.is_ok();
        let value = if r.value.is_nan() { String::new() } else { num(r.value) };
        let mut line = vec![f.vary.as_str().to_string(), value];
        match &r.result {
            Ok(c) => {
                let v: Vec<String> = c.eigenvector.iter().map(|x| num(*x)).collect();
                line.extend([num(c.k_crit), c.crossing_type.to_string(), num(c.leading.re), num(c.leading.im), v.join(";")]);
                println!("{} {} k_c = {:.4} N·mm/deg ({})", f.vary.as_str(), line[1], c.k_crit, c.crossing_type);
            }
            Err(e) => {
                line.extend(std::iter::repeat_n(String::new(), 5));
                println!("{} {}: {e}", f.vary.as_str(), line[1]);
            }
        }
        line.push(status(&r.result));
        crit_rows.push(line);
    }
    let path = out.csv(
        "floquet_critical.csv",
        &[mode_note],
        &["vary", "value", "k_c_Nmm_deg", "crossing_type", "re_leading", "im_leading", "eigenvector", "status"],
        &crit_rows,
    )?;
    println!("wrote {}", path.display());
    Ok(ok)
}

fn write_diagram(cfg: &Config, out: &OutDir, stem: &str, d: &BifurcationDiagram, n_joints: usize) -> Result<bool> {
    let mut columns = vec!["k1_Nmm_deg".to_string(), "inv_k1".into()];
    columns.extend(joint_columns(n_joints, "_deg"));
    columns.extend(["radius_m".to_string(), "converged".into(), "status".into()]);
    let mut ok = true;
    let rows: Vec<Vec<String>> = d
        .rows
        .iter()
        .map(|r| {
            let mut line = vec![num(r.k1), num(r.inv_k1())];
            match &r.steady {
                Some(s) => {
                    line.extend(s.means.iter().map(|m| num(m.to_degrees())));
                    line.push(opt(r.radius));
                    line.push(s.converged.to_string());
                }
                None => line.extend(std::iter::repeat_n(String::new(), n_joints + 2)),
            }
            ok &= r.failure.is_none();
            line.push(r.failure.clone().unwrap_or_else(|| "ok".into()));
            line
        })
        .collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let path = out.csv(&format!("{stem}.csv"), &[], &cols, &rows)?;
    println!("wrote {}", path.display());

    let mut pairs = Vec::new();
    match &d.fit {
        Ok(f) => {
            pairs.push(("a".to_string(), num(f.a)));
            pairs.push(("k_c".to_string(), num(f.k_c)));
            pairs.push(("residual".to_string(), num(f.residual)));
            println!("{stem}: sqrt fit k_c = {:.4} N·mm/deg, a = {:.4}", f.k_c, f.a);
        }
        Err(e) => pairs.push(("fit_error".to_string(), e.to_string())),
    }
    if let Ok(pf) = fit_power(&legchain::bifurcation::diagram_points(&d.rows)) {
        pairs.push(("power_beta".to_string(), num(pf.beta)));
        pairs.push(("power_k_c".to_string(), num(pf.k_c)));
        pairs.push(("power_residual".to_string(), num(pf.residual)));
    }
    let t = &cfg.turning;
    if let Some(r_hat) = required_radius(t.psi_deg.to_radians(), t.distance_m) {
        pairs.push(("r_hat_m".to_string(), num(r_hat)));
        if let Ok(k) = optimal_k1(r_hat, d) {
            pairs.push(("k_hat_nmm_deg".to_string(), num(k.k1)));
            pairs.push(("k_hat_in_range".to_string(), k.in_range.to_string()));
        }
    }
    let path = out.summary(&format!("{stem}_fit.txt"), &pairs)?;
    println!("wrote {}", path.display());
    Ok(ok)
}

pub fn diagram(cfg: &Config, out: &OutDir) -> Result<bool> {
    let d = &cfg.diagram;
    let (p, g) = (cfg.params(), cfg.gait());
    let walk = cfg.diagram_walk();
    let results = if d.variations {
        variation_study(&p, &g, &d.k1_list_nmm_deg, &walk, d.window_s)
    } else {
        vec![(Variation::Baseline, sweep_diagram(&p, &g, &d.k1_list_nmm_deg, &walk, d.window_s))]
    };
    let mut ok = true;
    for (v, diag) in &results {
        let stem = match v {
            Variation::Baseline => "diagram".to_string(),
            other => format!("diagram_{}", other.name()),
        };
        ok &= write_diagram(cfg, out, &stem, diag, p.n_modules - 1)?;
    }
    Ok(ok)
}

fn outcome_cells(o: &legchain::Result<TurningOutcome>) -> Vec<String> {
    match o {
        Ok(o) => vec![
            num(o.eps1),
            num(o.eps2.to_degrees()),
            num(o.eps3),
            o.success.to_string(),
            opt(o.time_to_target),
        ],
        Err(_) => vec![String::new(); 5],
    }
}

fn write_trace(out: &OutDir, name: &str, o: &TurningOutcome) -> Result<()> {
    let rows: Vec<Vec<String>> = o
        .trace
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let steer = o.trace.steer[i];
            vec![
                num(s.t),
                num(s.q[0]),
                num(s.q[1]),
                num(s.q[2]),
                num(o.bearing[i].to_degrees()),
                num(o.distance[i]),
                num(steer[0].to_degrees()),
                num(steer[1].to_degrees()),
            ]
        })
        .collect();
    out.csv(
        name,
        &[format!("target = ({}, {}) m", o.target[0], o.target[1])],
        &["t", "x", "y", "theta0", "psi_deg", "distance_m", "psihat1_deg", "psihat2_deg"],
        &rows,
    )?;
    Ok(())
}

fn minima_lines(s: &TurningSweep) -> Vec<String> {
    let names = ["eps1_m", "eps2_deg", "eps3"];
    s.minima()
        .iter()
        .zip(names)
        .map(|(m, n)| match m {
            Some(m) => {
                let value = if n == "eps2_deg" { m.value.to_degrees() } else { m.value };
                format!("min {n} = {value} at k = {}", m.k)
            }
            None => format!("min {n}: no completed runs"),
        })
        .collect()
}

pub fn turning(cfg: &Config, out: &OutDir) -> Result<bool> {
    let (p, g) = (cfg.params(), cfg.gait());
    let task = cfg.turning_task();
    let s = turning_sweep(&task, &p, &g, Strategy::Pitchfork, &cfg.turning.k1_list_nmm_deg, cfg.run.seed);
    let mut ok = true;
    let rows: Vec<Vec<String>> = s
        .entries
        .iter()
        .map(|e| {
            ok &= e.outcome.is_ok();
            let mut line = vec![num(e.k), num(1.0 / e.k)];
            line.extend(outcome_cells(&e.outcome));
            line.push(status(&e.outcome));
            line
        })
        .collect();
    let mut extra = vec![format!("r_hat_m = {}", opt(required_radius(task.psi, task.distance)))];
    extra.extend(minima_lines(&s));
    let path = out.csv(
        "turning_summary.csv",
        &extra,
        &["k1", "inv_k1", "eps1_m", "eps2_deg", "eps3", "success", "time_to_target_s", "status"],
        &rows,
    )?;
    println!("wrote {}", path.display());
    for line in &extra {
        println!("{line}");
    }
    if cfg.turning.write_traces {
        for e in &s.entries {
            if let Ok(o) = &e.outcome {
                write_trace(out, &format!("turning_k{}.csv", e.k), o)?;
            }
        }
    }
    Ok(ok)
}

pub fn compare(cfg: &Config, out: &OutDir) -> Result<bool> {
    let (p, g) = (cfg.params(), cfg.gait());
    let task = cfg.turning_task();
    let t = &cfg.turning;
    let (pf, hopf) = strategy_comparison(&task, &p, &g, &t.k1_list_nmm_deg, &t.hopf_list_nmm_deg, cfg.run.seed);
    let mut ok = true;
    let mut rows = Vec::new();
    let mut minima = Vec::new();
    for s in [&pf, &hopf] {
        for e in &s.entries {
            ok &= e.outcome.is_ok();
            let mut line = vec![s.strategy.name().to_string(), num(e.k), num(1.0 / e.k)];
            line.extend(outcome_cells(&e.outcome));
            line.push(status(&e.outcome));
            rows.push(line);
        }
        for (m, name) in s.minima().iter().zip(["eps1_m", "eps2_deg", "eps3"]) {
            if let Some(m) = m {
                let value = if name == "eps2_deg" { m.value.to_degrees() } else { m.value };
                minima.push(vec![s.strategy.name().to_string(), name.to_string(), num(m.k), num(value)]);
            }
        }
    }
    let extra = [format!("hopf_reference_nmm_deg = {}", t.hopf_reference_nmm_deg)];
    let path = out.csv(
        "compare.csv",
        &extra,
        &["strategy", "k_Nmm_deg", "inv_k", "eps1_m", "eps2_deg", "eps3", "success", "time_to_target_s", "status"],
        &rows,
    )?;
    println!("wrote {}", path.display());
    let path = out.csv("compare_minima.csv", &extra, &["strategy", "criterion", "argmin_k_Nmm_deg", "min_value"], &minima)?;
    println!("wrote {}", path.display());
    for m in &minima {
        println!("{} {}: min {} at k = {}", m[0], m[1], m[3], m[2]);
    }
    Ok(ok)
}
