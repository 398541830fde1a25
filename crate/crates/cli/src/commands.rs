use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use serde_json::json;

use biharm::certificates::*;
use biharm::dynamics::*;
use biharm::flow::{cubic_initial_data, evolve, init_flow, FlowOptions, Scheme};
use biharm::io::{map_table, orbit_table, profile_table, Table};
use biharm::maps::*;
use biharm::reduction::{cross_validate, FdOrder, TestProfile};
use biharm::{FlowParams, RadialGrid};

use crate::args::*;
use crate::output::OutputDir;
use crate::CliError;

/// Outcome of a subcommand: whether its checks passed.
pub type Outcome = Result<bool, CliError>;

fn table(mut t: Table, rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Table, CliError> {
    for r in rows {
        t.push(r)?;
    }
    Ok(t)
}

pub fn reduce_check(c: &ReduceCheck, out: &mut OutputDir) -> Outcome {
    let order = match c.order {
        Order::Second => FdOrder::Second,
        Order::Fourth => FdOrder::Fourth,
    };
    let profiles = vec![
        TestProfile::new("sin", |r: f64| (FRAC_PI_2 * r).sin()),
        TestProfile::new("cubic", |r: f64| r * (1.0 - 0.5 * r * r)),
        TestProfile::new("bubble", |r: f64| 2.0 * r.atan()),
    ];
    let rep = cross_validate(FlowParams::biharmonic(), &profiles, &c.grids, order, (c.band_lo, c.band_hi))?;
    let names: Vec<&str> = profiles.iter().map(|p| p.name.as_str()).collect();
    let mut cols = vec!["n", "h"];
    cols.extend(&names);
    let rows = c.grids.iter().map(|&n| {
        let mut row = vec![n as f64, 1.0 / (n - 1) as f64];
        for name in &names {
            let d = rep.rows.iter().find(|r| r.n == n && r.profile == *name).map_or(f64::NAN, |r| r.discrepancy);
            row.push(d);
        }
        row
    });
    out.write("reduce_check.csv", &table(Table::new(cols), rows)?.to_csv())?;
    let pass = rep.pass && rep.rates.iter().all(|(_, r)| r.map_or(true, |r| r >= c.min_rate));
    out.json("reduce_check.json", &json!({ "report": rep, "min_rate": c.min_rate, "pass": pass }))?;
    for (name, rate) in &rep.rates {
        match rate {
            Some(r) => println!("{name}: order {r:.4}"),
            None => println!("{name}: no discrepancy"),
        }
    }
    Ok(pass)
}

#[derive(Serialize)]
struct OrbitSummary<'a> {
    seed: &'a SeedDescriptor,
    seed_state: [f64; 4],
    class: Option<OrbitClass>,
    events: &'a [OrbitEvent],
    stop_reason: String,
    s_end: f64,
    final_state: [f64; 4],
    accepted_steps: usize,
    rejected_steps: usize,
}

fn orbit_summary(o: &Orbit) -> OrbitSummary<'_> {
    let stats = o.trajectory.stats();
    OrbitSummary {
        seed: &o.seed,
        seed_state: o.seed_state.phi,
        class: o.class,
        events: &o.events,
        stop_reason: format!("{:?}", o.trajectory.stop_reason()),
        s_end: o.trajectory.last().s,
        final_state: o.trajectory.last().phi,
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
    }
}

pub fn orbit(c: &OrbitCmd, out: &mut OutputDir) -> Outcome {
    let (seed, desc) = match c.seed {
        SeedKind::Unstable => (seed_unstable(c.phi1, c.phi3)?, SeedDescriptor::Unstable { phi1: c.phi1, phi3: c.phi3 }),
        SeedKind::Heteroclinic => (heteroclinic(c.s0), SeedDescriptor::Heteroclinic { s: c.s0 }),
    };
    let opts = OrbitOptions { blowup_norm: c.blowup_norm, ..OrbitOptions::with_tol(c.tol) };
    let o = integrate_orbit_with(seed, desc, c.span, &opts)?;
    out.write("orbit.csv", &orbit_table(&o).to_csv())?;
    out.json("orbit.json", &orbit_summary(&o))?;
    println!("{:?}, s_end {}, {} events", o.class, o.trajectory.last().s, o.events.len());
    Ok(true)
}

pub fn classify_sweep(c: &ClassifySweep, out: &mut OutputDir) -> Outcome {
    let seeds = circle_seeds(c.eps, c.seeds)?;
    let sweep = biharm::dynamics::classify_sweep(&seeds, c.span, c.max_span, &OrbitOptions::with_tol(c.tol))?;
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for e in &sweep {
        let (label, sign, blow) = match e.orbit.class {
            Some(OrbitClass::Blowup { sign, .. }) => ("blowup", sign as f64, 1.0),
            Some(OrbitClass::HeteroclinicShadow { sign, .. }) => ("shadow", sign as f64, 0.0),
            None => ("undecided", f64::NAN, f64::NAN),
        };
        *counts.entry(label.to_string()).or_default() += 1;
        let shadow = shadow_distance(&e.orbit, 3.0).map_or(f64::NAN, |(_, d)| d);
        let slope = if blow == 1.0 { blowup_diagnostics(&e.orbit).map_or(f64::NAN, |d| d.slope) } else { f64::NAN };
        rows.push(vec![e.index as f64, e.angle, sign, blow, shadow, e.orbit.trajectory.last().s, slope]);
        entries.push(json!({ "index": e.index, "angle": e.angle, "class": e.orbit.class }));
    }
    let cols = ["index", "angle", "sign", "blowup", "shadow_distance", "s_end", "phi4_slope"];
    out.write("sweep.csv", &table(Table::new(cols), rows)?.to_csv())?;
    let undecided = counts.get("undecided").copied().unwrap_or(0);
    out.json("sweep.json", &json!({ "counts": counts, "entries": entries }))?;
    println!("{counts:?}");
    Ok(undecided == 0)
}

pub fn certify(c: &Certify, out: &mut OutputDir) -> Outcome {
    match c.kind {
        CertKind::Qgrad => {
            let range = match c.fy_range {
                FyRangeArg::Tight => FyRange::Tight,
                FyRangeArg::Coarse => FyRange::Coarse,
            };
            let rep = verify_qgrad_bound(c.grid, c.fy_grid, range)?;
            out.json("certificate.json", &rep)?;
            println!("max dQ/dx = {} (bound {}): {}", rep.bound_observed, rep.bound_claimed, verdict(rep.pass));
            Ok(rep.pass)
        }
        CertKind::Cones => {
            let opts = ConeRunOptions::with_tol(c.tol);
            let samples = draw_cone_samples(c.samples, c.rng_seed);
            let outcomes = run_cone_suite(&samples, &opts)?;
            let cones = cone_report(&outcomes, &opts);
            let exits = check_exit_bound(&outcomes, 1e-8);
            let rows = outcomes.iter().map(|o| {
                vec![
                    o.sample.key as f64,
                    if o.mirrored { 1.0 } else { 0.0 },
                    o.sample.x[2],
                    o.s_exit.unwrap_or(f64::NAN),
                    o.exit_bound,
                    o.min_ineq_margin,
                ]
            });
            let cols = ["key", "mirrored", "x3", "s_exit", "exit_bound", "min_ineq_margin"];
            out.write("cone_samples.csv", &table(Table::new(cols), rows)?.to_csv())?;
            let pass = cones.pass && exits.pass;
            out.json("certificate.json", &json!({ "cones": cones, "exits": exits, "pass": pass }))?;
            println!("{} runs, cones {}, exit bound {}", outcomes.len(), verdict(cones.pass), verdict(exits.pass));
            Ok(pass)
        }
        CertKind::Blowup => {
            let orbit = integrate_orbit(seed_unstable(c.eps, 9.0 * c.eps)?, 60.0, c.tol)?;
            let d = blowup_diagnostics(&orbit)?;
            let pass = (-3.15..=-2.85).contains(&d.slope) && d.z_confined();
            out.json("certificate.json", &json!({ "diagnostics": d, "slope_window": [-3.15, -2.85], "pass": pass }))?;
            println!("phi4 slope {:.4}, z confined {}: {}", d.slope, d.z_confined(), verdict(pass));
            Ok(pass)
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass { "pass" } else { "FAIL" }
}

pub fn map(c: &MapCmd, out: &mut OutputDir) -> Outcome {
    let opts = MapOptions {
        grid_nodes: c.nodes,
        crossing: match c.crossing {
            CrossingArg::First => CrossingChoice::First,
            CrossingArg::Last => CrossingChoice::Last,
        },
        integrator_tol: c.tol,
        seed_eps: c.seed_eps,
        ..MapOptions::default()
    };
    let m = construct_map_with(c.target, &opts)?;
    let res = ode_residual(&m, (0.05, 0.95))?;
    let rate = origin_rate(&m, 1e-6, 1e-4);
    out.write("map.csv", &map_table(&m).to_csv())?;
    out.json(
        "map.json",
        &json!({
            "target": c.target,
            "boundary": [m.boundary.0, m.boundary.1],
            "provenance": m.provenance,
            "residual_max": res.max_abs,
            "residual_band": [res.band.0, res.band.1],
            "origin_rate": rate,
        }),
    )?;
    println!("psi(1) = {}, dpsi(1) = {}, residual {:.3e}", m.boundary.0, m.boundary.1, res.max_abs);
    Ok(true)
}

pub fn energy(c: &EnergyCmd, out: &mut OutputDir) -> Outcome {
    let domain = match c.domain.as_str() {
        "all" => Domain::AllSpace,
        r => Domain::Ball(r.parse().map_err(|_| CliError::Usage(format!("--domain: expected `all` or a radius, got {r:?}")))?),
    };
    let (profile, source) = match (c.bubble, c.target) {
        (true, None) => (bubble(c.lambda, RadialGrid::uniform(65, 1.0)?)?, json!({ "bubble": { "lambda": c.lambda } })),
        (false, Some(a)) => (construct_map(a)?, json!({ "map": { "target": a } })),
        _ => return Err(CliError::Usage("energy needs exactly one of --bubble or --target".into())),
    };
    let rep = bi_energy(&profile, domain, c.tol)?;
    let multiple = rep.value / VOL_S3;
    out.json("energy.json", &json!({ "report": rep, "source": source, "vol_s3_multiple": multiple }))?;
    println!("bi-energy {} = {multiple} vol(S^3)", rep.value);
    Ok(true)
}

pub fn flow(c: &FlowCmd, out: &mut OutputDir) -> Outcome {
    let (p, slope) = cubic_initial_data(c.nodes, c.a0, c.a1)?;
    let st = init_flow(&p, slope, c.a0, c.a1, c.dim)?;
    let opts = FlowOptions {
        scheme: match c.scheme {
            SchemeArg::Implicit => Scheme::Implicit,
            SchemeArg::Explicit => Scheme::Explicit { c_safety: c.c_safety },
        },
        steady_tol: c.steady_tol,
        gradient_cap: c.gradient_cap,
        err_tol: c.err_tol,
        fixed_dt: c.fixed_dt,
        max_steps: c.max_steps,
        snapshot_every: c.snapshot_every,
        ..FlowOptions::default()
    };
    let (end, diag) = evolve(&st, c.t_end, &opts)?;
    let rows = (0..diag.t.len()).map(|i| vec![i as f64, diag.t[i], diag.energy[i], diag.max_gradient[i], diag.residual[i]]);
    out.write("flow_trace.csv", &table(Table::new(["step", "t", "energy", "max_gradient", "residual"]), rows)?.to_csv())?;
    out.write("flow_final.csv", &profile_table(&end.profile).to_csv())?;
    if !diag.snapshots.is_empty() {
        let mut cols = vec!["t".to_string()];
        cols.extend((0..c.nodes).map(|j| format!("psi_{j}")));
        let rows = diag.snapshots.iter().map(|(t, v)| std::iter::once(*t).chain(v.iter().copied()).collect());
        out.write("flow_snapshots.csv", &table(Table::new(cols), rows)?.to_csv())?;
    }
    out.json(
        "flow.json",
        &json!({
            "verdict": diag.verdict,
            "steps": diag.steps,
            "t_final": end.t,
            "max_energy_increase": diag.max_energy_increase(),
            "final_energy": diag.energy.last(),
            "final_max_gradient": diag.max_gradient.last(),
            "final_residual": diag.residual.last(),
        }),
    )?;
    println!("{:?} at t = {} after {} steps", diag.verdict, end.t, diag.steps);
    Ok(true)
}

pub fn k_estimate(c: &KEstimateCmd, out: &mut OutputDir) -> Outcome {
    let opts = KOptions {
        family: match c.family {
            FamilyArg::Uniform => SeedFamily::UniformAngles,
            FamilyArg::Resonant => SeedFamily::ResonantScaled,
        },
        span: c.span,
        tol: c.tol,
        ..KOptions::default()
    };
    let est = estimate_k(&c.eps, c.angles, &opts)?;
    let rows = est
        .rungs
        .iter()
        .map(|r| vec![r.eps, r.k_emp, r.k_angle, r.c_emp, r.c_angle, r.zero_events as f64, r.exits as f64]);
    let cols = ["eps", "k_emp", "k_angle", "c_emp", "c_angle", "zero_events", "exits"];
    out.write("k_rungs.csv", &table(Table::new(cols), rows)?.to_csv())?;
    out.json("k_estimate.json", &est)?;
    for r in &est.rungs {
        println!("eps {:e}: K {}, exit speed {}", r.eps, r.k_emp, r.c_emp);
    }
    println!("{}", verdict(est.report.pass));
    Ok(est.report.pass)
}
