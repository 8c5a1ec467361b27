//! Command implementations. Every command resolves the effective
//! configuration first, computes, then writes files and a stdout summary;
//! rows are always emitted in deterministic order regardless of the worker
//! pool.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use wcnet::connectivity::Connectivity;
use wcnet::hopf::{self, CurveMethod, HopfCurve};
use wcnet::kernels::{DelayKernel, KernelSpec};
use wcnet::model::ModelParams;
use wcnet::simulate::{self, InitialData, SimConfig, SweepConfig};
use wcnet::spectral;

use crate::config::RunConfig;
use crate::output::{g12, header_line, write_file};
use crate::CliError;

pub struct Context {
    pub params: ModelParams,
    pub kernel: DelayKernel,
    pub conn: Connectivity,
    pub hash: String,
}

impl Context {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            params: cfg.model_params()?,
            kernel: cfg.kernel()?,
            conn: cfg.connectivity()?,
            hash: cfg.hash(),
        })
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<u8, CliError> {
    let ctx = Context::from_config(cfg)?;
    let section = cfg.stability.clone().unwrap_or_default();
    if section.nx < 2 || section.ny < 2 {
        return Err(CliError::Config("stability: nx, ny must be >= 2".into()));
    }
    let xs = hopf::linspace(section.w_ie_range.0, section.w_ie_range.1, section.nx);
    let ys = hopf::linspace(section.w_e_range.0, section.w_e_range.1, section.ny);
    let cells: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let rows: Result<Vec<String>, CliError> = cells
        .par_iter()
        .map(|&(w_ie, w_e)| {
            let params = ctx.params.with_weights(w_ie, w_e);
            let report = spectral::stability_test(&params, ctx.kernel, &ctx.conn, section.radius)
                .map_err(numeric)?;
            Ok(format!(
                "{},{},{},{},{}",
                g12(w_ie),
                g12(w_e),
                g12(report.max_real_part),
                g12(report.worst_eigenvalue.re),
                g12(report.worst_eigenvalue.im)
            ))
        })
        .collect();
    let mut out = String::new();
    out.push_str(&header_line(&ctx.hash));
    out.push('\n');
    out.push_str("w_ie,w_e,max_re,worst_rk_re,worst_rk_im\n");
    for row in rows? {
        out.push_str(&row);
        out.push('\n');
    }
    write_file(&section.out, &out)?;
    println!(
        "stability grid {}x{} written to {}",
        section.nx, section.ny, section.out
    );
    Ok(0)
}

fn curve_rows(curve: &HopfCurve, out: &mut String) {
    let branch = match curve.branch {
        hopf::Branch::Synchronous => "synchronous",
        hopf::Branch::Asynchronous => "asynchronous",
    };
    let method = match curve.method {
        CurveMethod::ClosedForm => "closed_form",
        CurveMethod::GridBoundary => "grid_boundary",
    };
    for s in &curve.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            g12(s.w_ie),
            g12(s.w_e),
            g12(s.omega),
            g12(curve.rk.re),
            g12(curve.rk.im),
            branch,
            method
        ));
    }
}

pub fn cmd_hopf(cfg: &RunConfig) -> Result<u8, CliError> {
    let ctx = Context::from_config(cfg)?;
    let section = cfg.hopf.clone().unwrap_or_default();
    let grid = hopf::linspace(
        section.w_ie_range.0,
        section.w_ie_range.1,
        section.samples.max(2),
    );
    let dominant = ctx.conn.dominant_nontrivial().map_err(numeric)?;
    // one representative per conjugate pair; asynchronous_curves adds the
    // partner back
    let rep = dominant
        .iter()
        .map(|(ev, _)| Complex64::new(ev.re, ev.im.abs()))
        .next()
        .ok_or_else(|| CliError::Numeric("no nontrivial eigenvalue".into()))?;

    let (sync, asyncs) = match section.method.as_str() {
        "closed" => {
            let sync = hopf::sync_curve(&ctx.params, ctx.kernel, &grid).map_err(numeric)?;
            let asyncs =
                hopf::asynchronous_curves(&ctx.params, rep, ctx.kernel, &grid).map_err(numeric)?;
            (sync, asyncs)
        }
        "grid" => {
            let mut sync_curves = hopf::hopf_curve_grid(
                &ctx.params,
                Complex64::new(1.0, 0.0),
                ctx.kernel,
                section.w_ie_range,
                section.w_e_range,
                section.nx,
                section.ny,
            )
            .map_err(numeric)?;
            if sync_curves.is_empty() {
                return Err(CliError::Numeric(
                    "no synchronous boundary found in the grid window".into(),
                ));
            }
            let mut asyncs = hopf::hopf_curve_grid(
                &ctx.params,
                rep,
                ctx.kernel,
                section.w_ie_range,
                section.w_e_range,
                section.nx,
                section.ny,
            )
            .map_err(numeric)?;
            if rep.im.abs() > 1e-12 {
                asyncs.extend(
                    hopf::hopf_curve_grid(
                        &ctx.params,
                        rep.conj(),
                        ctx.kernel,
                        section.w_ie_range,
                        section.w_e_range,
                        section.nx,
                        section.ny,
                    )
                    .map_err(numeric)?,
                );
            }
            (sync_curves.remove(0), asyncs)
        }
        other => {
            return Err(CliError::Config(format!(
                "hopf.method: `{other}` is not \"closed\" or \"grid\""
            )))
        }
    };

    let mut csv = String::new();
    csv.push_str(&header_line(&ctx.hash));
    csv.push('\n');
    csv.push_str("w_ie,w_e,omega,rk_re,rk_im,branch,method\n");
    curve_rows(&sync, &mut csv);
    for c in &asyncs {
        curve_rows(c, &mut csv);
    }
    write_file(&section.out_curves, &csv)?;

    let lower = asyncs.iter().find(|c| !c.samples.is_empty());
    let (points, order) = match lower {
        Some(lower) => {
            let points = hopf::find_double_hopf(&ctx.params, &sync, lower).map_err(numeric)?;
            let order = hopf::curve_order_check(&sync, lower, &ctx.params)
                .ok()
                .map(|r| {
                    json!({
                        "async_above_everywhere": r.async_above_everywhere(),
                        "async_below_intervals": r.async_below,
                        "bound_violations": r.bound_violations,
                    })
                });
            (points, order)
        }
        None => (Vec::new(), None),
    };
    let doc = json!({
        "header": header_line(&ctx.hash),
        "rk_sync": [1.0, 0.0],
        "rk_async": [rep.re, rep.im],
        "intersections": points,
        "order": order,
    });
    let rendered = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    write_file(&section.out_intersections, &rendered)?;
    println!("{}", serde_json::to_string_pretty(&json!({
        "curves": 1 + asyncs.len(),
        "intersections": points,
    })).expect("json"));
    Ok(0)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<u8, CliError> {
    let ctx = Context::from_config(cfg)?;
    let section = cfg.simulate.clone().unwrap_or_default();
    let params = ctx.params;
    let initial = match section.history.as_str() {
        "equilibrium" => InitialData::at_equilibrium(&params, ctx.conn.n, ctx.kernel),
        "perturbed" => InitialData::perturbed_equilibrium_seeded(
            &params,
            ctx.conn.n,
            ctx.kernel,
            section.perturbation,
            section.seed,
        ),
        other => {
            return Err(CliError::Config(format!(
                "simulate.history: `{other}` is not \"equilibrium\" or \"perturbed\""
            )))
        }
    };
    let traj = simulate::integrate_with(
        &params,
        ctx.kernel,
        &ctx.conn,
        &initial,
        section.t_end,
        section.dt,
        section.quad_nodes,
    )
    .map_err(numeric)?;
    let verdict =
        simulate::classify_sync(&traj, section.settle, section.threshold).map_err(numeric)?;

    let n = ctx.conn.n;
    let mut csv = String::new();
    csv.push_str(&header_line(&ctx.hash));
    csv.push('\n');
    csv.push('t');
    for prefix in ["E", "I", "WEI"] {
        for i in 1..=n {
            csv.push_str(&format!(",{prefix}_{i}"));
        }
    }
    csv.push('\n');
    let stride = section.out_stride.max(1);
    for (k, &t) in traj.times.iter().enumerate().step_by(stride) {
        csv.push_str(&g12(t));
        let s = &traj.states[k];
        for block in 0..3 {
            for i in 0..n {
                csv.push(',');
                csv.push_str(&g12(s[block * n + i]));
            }
        }
        csv.push('\n');
    }
    write_file(&section.out, &csv)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&verdict).expect("verdict json")
    );
    Ok(0)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<u8, CliError> {
    let ctx = Context::from_config(cfg)?;
    let section = cfg.sweep.clone().unwrap_or_default();
    if section.t_end <= section.settle {
        return Err(CliError::Config(
            "sweep: t_end must exceed settle".into(),
        ));
    }
    let sweep_cfg = SweepConfig {
        w_ie_range: section.w_ie_range,
        w_e_range: section.w_e_range,
        points: section.points,
        seed: section.seed,
        skip_stable: true,
        radius: section.radius,
        sim: SimConfig {
            dt: section.dt,
            settle_time: section.settle,
            eval_window: section.t_end - section.settle,
            quad_nodes: section.quad_nodes,
            perturbation: section.perturbation,
            sync_threshold: section.threshold,
        },
    };
    let rows = simulate::sweep(&ctx.params, ctx.kernel, &ctx.conn, &sweep_cfg);

    let mut csv = String::new();
    csv.push_str(&header_line(&ctx.hash));
    csv.push('\n');
    csv.push_str("w_ie,w_e,stable,max_re,a,synchronized,pattern,seed\n");
    let mut stable_count = 0usize;
    let mut sim_count = 0usize;
    let mut sync_count = 0usize;
    let mut desync_count = 0usize;
    let mut error_count = 0usize;
    let mut patterns: std::collections::BTreeMap<&'static str, usize> = Default::default();
    for row in &rows {
        let stable_s = row.stable.map(|s| s.to_string()).unwrap_or_default();
        let max_re_s = row.max_re.map(g12).unwrap_or_default();
        let (a_s, sync_s, pat_s) = match &row.verdict {
            Some(v) => (
                g12(v.a),
                v.synchronized.to_string(),
                v.pattern.as_str().to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            g12(row.w_ie),
            g12(row.w_e),
            stable_s,
            max_re_s,
            a_s,
            sync_s,
            pat_s,
            row.sub_seed
        ));
        if row.error.is_some() {
            error_count += 1;
        } else if row.stable == Some(true) {
            stable_count += 1;
        } else if let Some(v) = &row.verdict {
            sim_count += 1;
            if v.synchronized {
                sync_count += 1;
            } else {
                desync_count += 1;
            }
            *patterns.entry(v.pattern.as_str()).or_default() += 1;
        }
    }
    write_file(&section.out, &csv)?;

    println!("points:         {}", rows.len());
    println!("stable:         {stable_count}");
    println!("simulated:      {sim_count}");
    println!("synchronized:   {sync_count}");
    println!("desynchronized: {desync_count}");
    for (pattern, count) in &patterns {
        println!("  {pattern}: {count}");
    }
    println!("errors:         {error_count}");

    if error_count == rows.len() && !rows.is_empty() {
        Err(CliError::Numeric("every sweep point failed".into()))
    } else if error_count > 0 {
        Ok(4)
    } else {
        Ok(0)
    }
}

pub fn cmd_kernels_show(cfg: &RunConfig, kernel_flag: Option<&KernelSpec>) -> Result<u8, CliError> {
    let kernel = match kernel_flag {
        Some(spec) => {
            DelayKernel::try_from(spec).map_err(|e| CliError::Config(format!("kernel: {e}")))?
        }
        None => cfg.kernel()?,
    };
    let spec = KernelSpec::from(&kernel);
    let g1 = kernel
        .laplace(Complex64::new(0.0, 1.0))
        .map_err(numeric)?;
    let doc = json!({
        "spec": spec,
        "mean_delay": kernel.mean_delay(),
        "variance": kernel.variance(),
        "history_span": kernel.history_span(),
        "laplace_at_i": [g1.re, g1.im],
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(0)
}

pub fn cmd_connectivity_show(cfg: &RunConfig) -> Result<u8, CliError> {
    let conn = cfg.connectivity()?;
    let dominant = conn.dominant_nontrivial().map_err(numeric)?;
    let doc = json!({
        "n": conn.n,
        "is_circulant": conn.is_circulant,
        "first_row": conn.first_row,
        "eigenvalues": conn
            .eigenvalues
            .iter()
            .map(|e| json!([e.re, e.im]))
            .collect::<Vec<_>>(),
        "dominant_nontrivial": dominant
            .iter()
            .map(|(e, mult)| json!({"re": e.re, "im": e.im, "multiplicity": mult}))
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(0)
}
