//! The five subcommands: scatter | states | arrival | sweep | verify.

use rayon::prelude::*;
use serde_json::{json, Value};

use bandtime::arrival::{
    analysis_with_table, arrival_state, project_right, reconstruct_position, traversal_time,
    ArrivalReport, XGrid,
};
use bandtime::band::Channel;
use bandtime::oracle::{
    brute_force_overlaps, delta_jump_residual, evolution_overlap_check, ode_scattering,
    schrodinger_residual, PacketOracle,
};
use bandtime::scattering::{amplitudes, scattering_table, PotentialSpec};
use bandtime::timeop::{
    distribution, eigenfunction, eigenstate_overlap, expectation_energy_rep,
};
use bandtime::{Error, Result};

use crate::config::RunConfig;
use crate::output::{json_float, OutputWriter};

/// Default u sweep covering the resonant, broad and opaque regimes.
pub const DEFAULT_SWEEP_U: [f64; 5] = [0.1, 0.3, 0.53, 0.55, 0.65];

/// scatter: band-resolved transmission data with the Larmor curve and
/// resonance flags.
pub fn cmd_scatter(config: &RunConfig) -> Result<()> {
    let potential = config.potential()?;
    let band = config.band()?;
    let table = scattering_table(&potential, &band)?;
    let larmor = traversal_time(&table);
    let maxima = table.transmission_maxima();

    let rows: Vec<Vec<f64>> = (0..band.len())
        .map(|i| {
            vec![
                band.energy(i),
                table.abs_t[i],
                table.theta[i],
                table.dtheta[i],
                table.dabs_t[i],
                larmor[i].unwrap_or(f64::NAN),
                if maxima.contains(&i) { 1.0 } else { 0.0 },
            ]
        })
        .collect();

    let mut writer = OutputWriter::new(config)?;
    writer.write_table(
        "scatter",
        &[
            "epsilon",
            "abs_t",
            "arg_t_unwrapped",
            "dtheta_deps",
            "abs_t_prime",
            "larmor_z",
            "t_peak",
        ],
        &rows,
    )?;
    writer.write_json(
        "scatter_summary",
        &json!({
            "resonance_count": table.resonance_count,
            "resonance_energies": maxima
                .iter()
                .map(|&i| json_float(band.energy(i)))
                .collect::<Vec<Value>>(),
            "max_abs_t_squared": json_float(
                table.abs_t.iter().map(|a| a * a).fold(0.0_f64, f64::max)
            ),
        }),
    )?;
    writer.finish("scatter", config)?;
    println!(
        "scatter: {} grid points, {} transmission maxima",
        band.len(),
        table.resonance_count
    );
    Ok(())
}

/// states: |phi(x)|^2 of the unprojected and projected states on a window
/// derived from x_R.
pub fn cmd_states(config: &RunConfig) -> Result<()> {
    let scenario = config.scenario()?;
    let band = *scenario.band();
    let table = scattering_table(scenario.potential(), &band)?;
    let projected = project_right(&scenario, &table)?;
    let split = scenario.potential().support().unwrap_or((0.0, 0.0));

    let half = 3.0 * scenario.x_r().abs().max(50.0);
    let mut n = (2.0 * half / 0.1).round() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let xgrid = XGrid::new(-half, half, n + 1)?;

    let unprojected = arrival_state(&band, scenario.x_r());
    let dens_u = reconstruct_position(&unprojected, &PotentialSpec::free(), split, &xgrid)?;
    let dens_p = reconstruct_position(&projected.amplitude, scenario.potential(), split, &xgrid)?;

    let rows: Vec<Vec<f64>> = (0..xgrid.n)
        .map(|i| vec![xgrid.point(i), dens_u.density[i], dens_p.density[i]])
        .collect();

    let mut writer = OutputWriter::new(config)?;
    writer.write_table(
        "states",
        &["x", "prob_density_unprojected", "prob_density_projected"],
        &rows,
    )?;
    writer.write_json(
        "states_summary",
        &json!({
            "mean_transmission": json_float(projected.mean_transmission),
            "unprojected": {
                "captured_mass": json_float(dens_u.captured_mass),
                "weight_left": json_float(dens_u.weight_left),
                "weight_interior": json_float(dens_u.weight_interior),
                "weight_right": json_float(dens_u.weight_right),
            },
            "projected": {
                "captured_mass": json_float(dens_p.captured_mass),
                "weight_left": json_float(dens_p.weight_left),
                "weight_interior": json_float(dens_p.weight_interior),
                "weight_right": json_float(dens_p.weight_right),
            },
        }),
    )?;
    writer.finish("states", config)?;
    println!(
        "states: window [{:.1}, {:.1}], projected mass captured {:.6}",
        -half, half, dens_p.captured_mass
    );
    if dens_p.captured_mass < 0.998 {
        eprintln!(
            "warning: spatial window captures only {:.6} of the projected state \
             (long tails outside [{:.1}, {:.1}])",
            dens_p.captured_mass, -half, half
        );
    }
    Ok(())
}

fn report_rows(report: &ArrivalReport) -> Vec<Vec<f64>> {
    report
        .distribution
        .entries()
        .map(|(m, tau, p)| vec![m as f64, tau, p])
        .collect()
}

fn report_summary(u: f64, report: &ArrivalReport) -> Value {
    json!({
        "u": json_float(u),
        "mean_T": json_float(report.mean_transmission),
        "tau_bar": json_float(report.mean_time),
        "tau_bar_energy_rep": json_float(report.mean_time_energy_rep),
        "terms": {
            "phase_time": json_float(report.phase_time_term),
            "ballistic": json_float(report.ballistic_term),
            "gauge": json_float(report.gauge_term),
        },
        "delta_tau": json_float(report.std_dev),
        "modulus_term": json_float(report.variance.modulus_term),
        "phase_term": json_float(report.variance.phase_term),
        "segment_count": report.variance.segment_count,
        "captured_mass": json_float(report.distribution.captured()),
        "time_quantum": json_float(report.distribution.time_grid().quantum()),
        "free_tau_bar": json_float(report.free_mean_time),
        "hartman_earlier_than_free": report.hartman_earlier_than_free,
        "keldysh_band_center": match report.keldysh_band_center {
            Some(v) => json_float(v),
            None => Value::Null,
        },
        "keldysh_reason": match report.keldysh_band_center {
            Some(_) => Value::Null,
            None => Value::String("band center not under a barrier segment".into()),
        },
    })
}

/// arrival: the quantized arrival-time distribution and its summary for
/// the configured potential.
pub fn cmd_arrival(config: &RunConfig) -> Result<()> {
    let scenario = config.scenario()?;
    let table = scattering_table(scenario.potential(), scenario.band())?;
    let report = analysis_with_table(&scenario, &table)?;

    let mut writer = OutputWriter::new(config)?;
    writer.write_table("arrival", &["m", "tau_m", "p_m"], &report_rows(&report))?;
    writer.write_json("arrival_summary", &report_summary(config.u, &report))?;
    writer.finish("arrival", config)?;
    println!(
        "arrival: <T> = {:.6e}, tau_bar = {:.4}, delta_tau = {:.4}, captured {:.6}",
        report.mean_transmission,
        report.mean_time,
        report.std_dev,
        report.distribution.captured()
    );
    Ok(())
}

/// sweep: arrival analyses across barrier heights, dispatched in parallel,
/// written sequentially in u order.
pub fn cmd_sweep(config: &RunConfig, u_values: &[f64]) -> Result<()> {
    let us: Vec<f64> = if u_values.is_empty() {
        DEFAULT_SWEEP_U.to_vec()
    } else {
        u_values.to_vec()
    };
    let results: Vec<(f64, Result<ArrivalReport>)> = us
        .par_iter()
        .map(|&u| {
            let report = config
                .scenario_with_u(u)
                .and_then(|s| analysis_with_table(&s, &scattering_table(s.potential(), s.band())?));
            (u, report)
        })
        .collect();

    let mut writer = OutputWriter::new(config)?;
    let mut summaries = Vec::new();
    for (u, result) in &results {
        let report = result.as_ref().map_err(|e| e.clone())?;
        writer.write_table(
            &format!("arrival_u{u}"),
            &["m", "tau_m", "p_m"],
            &report_rows(report),
        )?;
        summaries.push(report_summary(*u, report));
        println!(
            "sweep u = {u}: <T> = {:.6e}, tau_bar = {:.4}, delta_tau = {:.4}",
            report.mean_transmission, report.mean_time, report.std_dev
        );
    }
    writer.write_json("sweep_summary", &Value::Array(summaries))?;
    writer.finish("sweep", config)?;
    Ok(())
}

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.measured < self.tolerance
    }
}

/// verify: the oracle + invariant suite on the configured model, with a
/// machine-readable report. Any failed check is a numerical failure.
pub fn cmd_verify(config: &RunConfig) -> Result<()> {
    let potential = config.potential()?;
    let band = config.band()?;
    let scenario = config.scenario()?;
    let mut checks: Vec<Check> = Vec::new();

    // flux unitarity across the band
    let table = scattering_table(&potential, &band)?;
    let flux_dev = (0..band.len())
        .map(|i| {
            (table.reflection[i].norm_sqr() + table.transmission[i].norm_sqr() - 1.0).abs()
        })
        .fold(0.0_f64, f64::max);
    checks.push(Check {
        name: "flux_unitarity",
        measured: flux_dev,
        tolerance: 1e-10,
    });

    // transfer matrix vs RK4 integration at 9 energies
    let ode_dev = (0..9)
        .map(|i| {
            let eps = band.eps0() + band.delta_eps() * i as f64 / 8.0;
            let (t_ode, _) = ode_scattering(&potential, eps, config.ode_step)?;
            let t_tm = amplitudes(&potential, eps)?.transmission;
            Ok((t_ode - t_tm).norm() / t_tm.norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    checks.push(Check {
        name: "ode_vs_transfer_matrix",
        measured: ode_dev,
        tolerance: 1e-6,
    });

    // single-delta closed form
    let delta_dev = (0..10)
        .map(|i| {
            let eps = 0.1 + 0.9 * i as f64 / 9.0;
            let k2 = 2.0 * eps;
            let t2 = amplitudes(&PotentialSpec::single_delta(0.0, 1.0), eps)
                .map(|s| s.transmission.norm_sqr())?;
            Ok((t2 - k2 / (k2 + 1.0)).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    checks.push(Check {
        name: "single_delta_closed_form",
        measured: delta_dev,
        tolerance: 1e-10,
    });

    // eigenstate residuals at three energies
    let mut fd_dev = 0.0_f64;
    let mut jump_dev = 0.0_f64;
    for frac in [0.1, 0.5, 0.9] {
        let eps = band.eps0() + band.delta_eps() * frac;
        let sol = amplitudes(&potential, eps)?;
        fd_dev = fd_dev.max(schrodinger_residual(&sol, &potential, 0.01));
        jump_dev = jump_dev.max(delta_jump_residual(&sol, &potential));
    }
    checks.push(Check {
        name: "schrodinger_fd_residual",
        measured: fd_dev,
        tolerance: 1e-6,
    });
    checks.push(Check {
        name: "delta_jump_condition",
        measured: jump_dev,
        tolerance: 1e-8,
    });

    // mirror reciprocity of t
    let mirrored = potential.mirrored();
    let recip_dev = [0.25, 0.5, 0.75]
        .iter()
        .map(|frac| {
            let eps = band.eps0() + band.delta_eps() * frac;
            let t1 = amplitudes(&potential, eps)?.transmission;
            let t2 = amplitudes(&mirrored, eps)?.transmission;
            Ok((t1 - t2).norm() / t1.norm().max(1e-300))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    checks.push(Check {
        name: "mirror_reciprocity",
        measured: recip_dev,
        tolerance: 1e-10,
    });

    // time-basis orthonormality on the configured grid
    let gauge = scenario.gauge_phase();
    let mut gram_dev = 0.0_f64;
    for m in -8_i64..=8 {
        let gm = eigenfunction(&band, Channel::Right, m, &gauge)?;
        for n in -8_i64..=8 {
            let c = eigenstate_overlap(&gm, n, &gauge)?;
            let expected = if m == n { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((c - expected).norm());
        }
    }
    checks.push(Check {
        name: "time_basis_orthonormality",
        measured: gram_dev,
        tolerance: 1e-6,
    });

    // projected distribution: captured mass and moment consistency
    let projected = project_right(&scenario, &table)?;
    let dist = distribution(&projected.amplitude, &gauge, scenario.options())?;
    checks.push(Check {
        name: "distribution_captured_mass",
        measured: 1.0 - dist.captured(),
        tolerance: config.tail_tol,
    });
    let erep = expectation_energy_rep(&projected.amplitude, &gauge)?;
    checks.push(Check {
        name: "moment_consistency",
        measured: (dist.mean() - erep.time).abs() / erep.time.abs(),
        tolerance: 1e-3,
    });

    // brute-force overlap agreement
    let ms: Vec<i64> = (-16..=32).collect();
    let brute = brute_force_overlaps(&projected.amplitude, &gauge, &ms)?;
    let mut bf_dev = 0.0_f64;
    for (m, cb) in ms.iter().zip(&brute) {
        let c = eigenstate_overlap(&projected.amplitude, *m, &gauge)?;
        bf_dev = bf_dev.max((c.norm_sqr() - cb.norm_sqr()).abs());
    }
    checks.push(Check {
        name: "brute_force_overlaps",
        measured: bf_dev,
        tolerance: 1e-5,
    });

    // evolution identity on the projected state
    let evo_dev = [-5_i64, 0, 7]
        .iter()
        .map(|&m| evolution_overlap_check(&projected.amplitude, &gauge, m))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    checks.push(Check {
        name: "evolution_identity",
        measured: evo_dev,
        tolerance: 1e-9,
    });

    // free-particle projection shortcut is exact
    let oracle = PacketOracle::new(&band, scenario.x_r(), 10.0 * scenario.x_r().abs(), 0.05)?;
    let mid = band.len() / 2;
    let free_sol = amplitudes(&PotentialSpec::free(), band.energy(mid))?;
    let exact = oracle.exact_overlap(&free_sol);
    let asym = oracle.asymptotic_overlap(&free_sol);
    checks.push(Check {
        name: "free_projection_shortcut",
        measured: (exact - asym).norm() / asym.norm(),
        tolerance: 1e-6,
    });

    let all_passed = checks.iter().all(Check::passed);
    for c in &checks {
        println!(
            "[{}] {}: measured {:.3e}, tolerance {:.1e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        );
    }

    let mut writer = OutputWriter::new(config)?;
    writer.write_json(
        "verify_report",
        &json!({
            "passed": all_passed,
            "checks": checks
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "passed": c.passed(),
                        "measured": json_float(c.measured),
                        "tolerance": json_float(c.tolerance),
                    })
                })
                .collect::<Vec<Value>>(),
        }),
    )?;
    writer.finish("verify", config)?;

    if all_passed {
        println!("verify: all {} checks passed", checks.len());
        Ok(())
    } else {
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name)
            .collect();
        Err(Error::numerical(format!(
            "verification failed: {}",
            failed.join(", ")
        )))
    }
}
