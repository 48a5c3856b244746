use std::path::Path;

use anyhow::{bail, Context, Result};
use catrep::analytic::{link_fidelity, link_state, link_success_probability, link_time, swap_outcome, swap_stage};
use catrep::chain_sim::simulate_chain;
use catrep::optimizer::{optimize, single_photon_endpoint, Optimum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::table::{num, Table};

fn write_json<T: Serialize>(dir: Option<&Path>, enabled: bool, name: &str, value: &T) -> Result<()> {
    if let (Some(d), true) = (dir, enabled) {
        let path = d.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn link(cfg: &RunConfig, sweep: Option<usize>, out: Option<&Path>) -> Result<()> {
    if cfg.is_zero_length() {
        println!("degenerate: zero-length link, T0 = 0 s (no transmission loss or travel time)");
        return Ok(());
    }
    let p = cfg.link_params();
    println!("F0 = {}", link_fidelity(&p));
    println!("P0 = {}", link_success_probability(&p));
    println!("T0_s = {}", link_time(&p));
    if let Some(n) = sweep {
        if n < 2 {
            bail!("--sweep needs at least 2 points");
        }
        let mut t = Table::new("link_sweep", &["tap", "F0", "P0", "T0_s"]);
        for i in 0..n {
            // tap in (0, 0.5]
            let tap = 0.5 * (i + 1) as f64 / n as f64;
            let q = p.with_tap(tap);
            t.push(vec![num(tap), num(link_fidelity(&q)), num(link_success_probability(&q)), num(link_time(&q))]);
        }
        t.emit(out)?;
    }
    Ok(())
}

pub fn swap(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let p = cfg.link_params();
    let levels = cfg.chain_model().levels()?;
    let mut state = link_state(&p);
    let mut counts = Table::new("swap_counts", &["level", "n", "parity", "P_n", "F_n"]);
    for level in 1..=levels {
        for n in 1..=8 {
            let o = swap_outcome(&state, &p, n)?;
            counts.push(vec![
                level.to_string(),
                n.to_string(),
                format!("{:?}", o.parity).to_lowercase(),
                num(o.p_success),
                num(o.fidelity),
            ]);
        }
        let stage = swap_stage(&state, &p, cfg.chain.acceptance);
        println!("P{level} = {}", stage.probability);
        println!("F{level} = {}", stage.state_after.f_minus);
        state = stage.state_after;
    }
    counts.emit(out)
}

pub fn chain(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let config = cfg.chain_config();
    let r = simulate_chain(&config)?;
    println!("n_links = {}", r.n_links);
    println!("n_trials = {}", r.n_trials);
    println!("rng_seed = {}", r.rng_seed);
    println!("mean_time_s = {}", r.mean_time);
    println!("std_error_s = {}", r.std_error);
    println!("formula_time_s = {}", r.formula_time);
    println!("relative_deviation = {}", r.relative_deviation);
    println!("final_fidelity = {}", r.final_fidelity);
    if let Some(a) = &r.analytic {
        println!("analytic_time_s = {}", a.total_time);
        println!("analytic_time_swap_waits_only_s = {}", a.time_swap_waits_only);
    }
    let mut t = Table::new("chain_times", &["trial", "T_seconds"]);
    for (i, x) in r.times.iter().enumerate() {
        t.push(vec![i.to_string(), num(*x)]);
    }
    if let Some(d) = out {
        t.emit(Some(d))?;
        if config.keep_records {
            let path = d.join("chain_records.jsonl");
            let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            r.write_records_jsonl(std::io::BufWriter::new(file))?;
        }
    }
    let mut summary = r.clone();
    summary.times.clear();
    summary.records = None;
    write_json(out, cfg.output.json, "chain_summary", &summary)
}

pub fn optimize_cmd(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let spec = cfg.search_spec();
    let r = optimize(&spec)?;
    match &r.optimum {
        Optimum::Feasible { point, report } => {
            println!("alpha_sq = {}", point.alpha_sq);
            println!("tap = {}", point.tap);
            println!("T_seconds = {}", point.time);
            println!("fidelity = {}", point.fidelity);
            println!("T_swap_waits_only_seconds = {}", report.time_swap_waits_only);
            if let Ok(end) = single_photon_endpoint(&spec) {
                println!("single_photon_T_seconds = {}", end.time);
                println!("single_photon_fidelity = {}", end.fidelity);
            }
        }
        Optimum::Infeasible { best_fidelity } => {
            println!("infeasible: no grid point reaches fidelity {}", spec.fidelity_floor);
            println!(
                "best_fidelity = {} at alpha_sq = {}, tap = {}",
                best_fidelity.fidelity, best_fidelity.alpha_sq, best_fidelity.tap
            );
        }
    }
    let mut t = Table::new("surface", &["alpha_sq", "tap", "T_seconds", "fidelity", "feasible"]);
    for s in &r.surface {
        t.push(vec![num(s.alpha_sq), num(s.tap), num(s.time), num(s.fidelity), s.feasible.to_string()]);
    }
    if out.is_some() {
        t.emit(out)?;
    }
    write_json(out, cfg.output.json, "optimum", &r.optimum)
}
