//! One driver per subcommand. Each writes its data files through an
//! [`OutputDir`] and finishes with the manifest.

use crate::acceptance;
use crate::config::RunConfig;
use crate::fieldio::{field_csv, encode_field, read_field};
use crate::manifest::{config_hash, OutputDir, RunManifest};
use hartree::coercivity::{coercivity_constant, Subspace, SubspaceProjector};
use hartree::eigen::{compute_eigenpair_with, EigenOptions};
use hartree::evolution::{evolve, virial_first, virial_second, virial_value, Direction, EvolutionConfig, EvolutionContext, VirialProfile};
use hartree::ground_state::{integral_system_residual, tail_asymptotics};
use hartree::special::{wpm_initial_data, WpmOptions};
use hartree::{
    assemble_kernel, energy, fit_modulation, hls_functional, kelvin_transform, scale_phase_apply, grad_norm_sq, HartreeError,
    Lab, RadialField, Result, ScalarReport,
};
use std::path::Path;

pub const SUBCOMMANDS: [&str; 8] =
    ["ground-state", "spectrum", "modulate", "evolve", "construct-wpm", "virial", "kelvin-check", "acceptance"];

fn lab(cfg: &RunConfig) -> Result<Lab> {
    Lab::new(cfg.grid_spec()?)
}

/// Initial data from `physics.initial`, then amplitude, phase and scale.
pub fn initial_data(cfg: &RunConfig, lab: &Lab) -> Result<RadialField> {
    let p = &cfg.physics;
    let base = match p.initial.as_str() {
        "w" => lab.ground.w().clone(),
        "wpm" => {
            let sys = lab.linearized()?;
            let pair = lab.eigenpair_fast(&sys)?;
            let opts = WpmOptions { k: p.k, t0_factor: p.t0_factor, ..Default::default() };
            wpm_initial_data(p.a, &sys, &pair, opts)?.u0
        }
        _ => read_field(Path::new(&p.input), Some(&lab.grid))?,
    };
    let u = if p.theta != 0.0 || p.mu != 1.0 { scale_phase_apply(&base, p.theta, p.mu)? } else { base };
    Ok(u.scale_real(p.amplitude))
}

fn report(cfg: &RunConfig, rows: &[(&str, f64)]) -> Result<ScalarReport> {
    let mut r = ScalarReport::new(config_hash(cfg));
    for (k, v) in rows {
        r.push(k, *v)?;
    }
    Ok(r)
}

fn ground_state(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let g = &lab.ground;
    let e = energy(g.w(), &lab.k4)?;
    let rep = report(
        cfg,
        &[
            ("c0", g.c0()),
            ("i_d", g.i_d()),
            ("elliptic_residual", g.residual()),
            ("grad_norm_sq", g.grad_norm_sq()),
            ("quartic", g.quartic()),
            ("energy", e),
            ("hls", hls_functional(g.w(), g, &lab.k4)?),
        ],
    )?;
    out.write("ground_state.csv", rep.to_csv().as_bytes())?;
    out.write("w.field", &encode_field(g.w()))?;
    out.write("w.csv", field_csv(g.w()).as_bytes())?;
    out.derive("c0", g.c0());
    out.derive("grad_norm_sq_w", g.grad_norm_sq());
    out.derive("energy_w", e);
    Ok(())
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let sys = lab.linearized()?;
    let pair = compute_eigenpair_with(&sys, EigenOptions::for_size(lab.grid.len()))?;
    let (nm, np) = sys.null_residuals();
    let (unc, hp, gp) = (
        coercivity_constant(&sys, Subspace::Unconstrained)?,
        coercivity_constant(&sys, Subspace::HPerp)?,
        coercivity_constant(&sys, Subspace::GPerp(&pair))?,
    );
    let mut rows = vec![
        ("e0", pair.e0),
        ("e0_symmetric", pair.oracles.symmetric),
        ("eigen_residual", pair.residual),
        ("tail_r2", pair.tail_r2),
        ("b_normalization", sys.bilinear_b(&pair.y_plus(), &pair.y_minus())?),
        ("null_residual_minus", nm),
        ("null_residual_plus", np),
        ("coercivity_unconstrained", unc),
        ("coercivity_h_perp", hp),
        ("coercivity_g_perp", gp),
        ("phi_w", sys.phi(lab.ground.w())?),
    ];
    if let Some(b) = pair.oracles.block {
        rows.push(("e0_block", b));
    }
    if let Some(p) = pair.oracles.pencil {
        rows.push(("e0_pencil", p));
    }
    out.write("spectrum.csv", report(cfg, &rows)?.to_csv().as_bytes())?;
    out.write("y_plus.field", &encode_field(&pair.y_plus()))?;
    out.write("y_plus.csv", field_csv(&pair.y_plus()).as_bytes())?;
    out.derive("e0", pair.e0);
    out.derive("coercivity_h_perp", hp);
    out.derive("coercivity_g_perp", gp);
    Ok(())
}

fn modulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let u = initial_data(cfg, &lab)?;
    let f = fit_modulation(&u, &lab.ground)?;
    let rep = report(
        cfg,
        &[
            ("theta", f.theta),
            ("mu", f.mu),
            ("alpha", f.alpha),
            ("delta", f.delta),
            ("residual_phase", f.residual_phase),
            ("residual_scale", f.residual_scale),
            ("reconstruction", f.reconstruction),
            ("iterations", f.iterations as f64),
        ],
    )?;
    out.write("modulation.csv", rep.to_csv().as_bytes())?;
    out.write_json("modulation.json", &f)?;
    out.write("h.field", &encode_field(&f.h))?;
    Ok(())
}

fn evolution_config(cfg: &RunConfig) -> EvolutionConfig {
    let i = &cfg.integrator;
    EvolutionConfig {
        dt: i.dt,
        t_end: i.t_end,
        cadence: i.cadence,
        virial_radii: cfg.physics.virial_radii.clone(),
        adaptive: i.adaptive,
        direction: if cfg.backward() { Direction::Backward } else { Direction::Forward },
        ..Default::default()
    }
}

fn evolve_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let u0 = initial_data(cfg, &lab)?;
    let sys = lab.linearized()?;
    let pair = lab.eigenpair_fast(&sys)?;
    let projector = Some(SubspaceProjector::g_perp(&sys, &pair)?);
    let ctx = EvolutionContext { k4: lab.k4.clone(), ground: lab.ground.clone(), projector };
    let rec = evolve(&u0, &evolution_config(cfg), &ctx)?;
    out.write("trajectory.csv", rec.to_csv().as_bytes())?;
    out.write_json("trajectory.json", &rec)?;
    if let Some(f) = &rec.final_state {
        out.write("final.field", &encode_field(f))?;
    }
    out.derive("energy_drift", rec.energy_drift);
    out.derive("mass_drift", rec.mass_drift);
    out.derive("e0", pair.e0);
    Ok(())
}

fn construct_wpm(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let sys = lab.linearized()?;
    let pair = lab.eigenpair_fast(&sys)?;
    let p = &cfg.physics;
    let data = wpm_initial_data(p.a, &sys, &pair, WpmOptions { k: p.k, t0_factor: p.t0_factor, ..Default::default() })?;
    out.write("wpm.field", &encode_field(&data.u0))?;
    out.write("wpm.csv", field_csv(&data.u0).as_bytes())?;
    out.write_json("residuals.json", &data)?;
    out.derive("e0", pair.e0);
    out.derive("energy_error", data.energy_error());
    out.derive("t0", data.t0);
    Ok(())
}

fn virial(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let u = initial_data(cfg, &lab)?;
    let mut s = String::from("R,V_R,dtV_R,d2tV_R,A_R,gradient_term,bilaplacian_term,nonlocal_term\n");
    for &r in &cfg.physics.virial_radii {
        let p = VirialProfile::new(&lab.grid, r)?;
        let v2 = virial_second(&u, &p, &lab.k4)?;
        s.push_str(&format!(
            "{r:.6e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            virial_value(&u, &p),
            virial_first(&u, &p),
            v2.d2,
            v2.a_r,
            v2.gradient_term,
            v2.bilaplacian_term,
            v2.nonlocal_term
        ));
    }
    out.write("virial.csv", s.as_bytes())?;
    Ok(())
}

fn kelvin_check(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let lab = lab(cfg)?;
    let w = lab.ground.w();
    let kw = kelvin_transform(w)?;
    let kkw = kelvin_transform(&kw)?;
    let nw = grad_norm_sq(w).sqrt();
    let kk = grad_norm_sq(&kkw.sub(w)).sqrt() / nw;
    let fixed = grad_norm_sq(&kw.sub(w)).sqrt() / nw;
    let kd2 = assemble_kernel(&lab.grid, (cfg.d - 2) as f64)?;
    let w2: Vec<f64> = w.re().iter().map(|x| x * x).collect();
    let v = RadialField::from_real(lab.grid.clone(), &lab.k4.apply(&w2));
    let pairres = integral_system_residual(w, &v, &lab.k4, &kd2)?;
    let tail = tail_asymptotics(w)?;
    let rep = report(
        cfg,
        &[
            ("kelvin_involution", kk),
            ("kelvin_fixed_point", fixed),
            ("integral_first", pairres.first),
            ("integral_second", pairres.second),
            ("integral_constant", pairres.constant),
            ("tail_constant", tail.omega_inf),
            ("tail_constant_rel_c0", (tail.omega_inf / lab.ground.c0() - 1.0).abs()),
            ("tail_fit_residual", tail.residual),
        ],
    )?;
    out.write("kelvin.csv", rep.to_csv().as_bytes())?;
    Ok(())
}

fn acceptance_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let res = acceptance::run_all(&acceptance::AcceptanceOptions { seed: cfg.seed, ..Default::default() }, |r| {
        println!("{}", r.line())
    });
    let mut s = String::from("id,name,pass,seconds,detail\n");
    for r in &res {
        s.push_str(&format!("{},{},{},{:.2},\"{}\"\n", r.id, r.name, r.pass, r.seconds, r.detail.replace('"', "'")));
    }
    out.write("acceptance.csv", s.as_bytes())?;
    let failed = res.iter().filter(|r| !r.pass).count();
    out.derive("passed", (res.len() - failed) as f64);
    out.derive("failed", failed as f64);
    Ok(())
}

/// Run one subcommand with outputs under `out_dir`; the manifest is written last.
pub fn run_subcommand(name: &str, cfg: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let mut out = OutputDir::create(out_dir)?;
    out.write("config.txt", cfg.to_text().as_bytes())?;
    match name {
        "ground-state" => ground_state(cfg, &mut out)?,
        "spectrum" => spectrum(cfg, &mut out)?,
        "modulate" => modulate(cfg, &mut out)?,
        "evolve" => evolve_cmd(cfg, &mut out)?,
        "construct-wpm" => construct_wpm(cfg, &mut out)?,
        "virial" => virial(cfg, &mut out)?,
        "kelvin-check" => kelvin_check(cfg, &mut out)?,
        "acceptance" => acceptance_cmd(cfg, &mut out)?,
        other => return Err(HartreeError::ConfigInvalid(format!("unknown subcommand '{other}'"))),
    }
    out.finish(name, cfg)
}
