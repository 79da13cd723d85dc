use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::config::{Config, ConfigError};
use super::output::{float, CsvTable, OutputSet, RunContext};
use super::{CliError, Command};
use crate::edges::{sample_graph, SamplingMode};
use crate::error::Error;
use crate::lattice::BoxSpec;
use crate::metrics::{
    box_theorem_check, degree_histogram, distance_scaling_report, estimate_lambda_c, loglog_tail_slope,
    tail_exponent, theta_curve_with, LambdaCConfig, ThetaOptions, ThetaProxy, DEFAULT_RHO0,
};
use crate::oracle::run_bundled_suite;
use crate::params::{classify_phase, ModelParams, PhaseClass};
use crate::renorm::{estimate_psi, psi_bound, renorm_schedule, DEFAULT_PAIR_BUDGET};
use crate::rng::replicate_seeds;
use crate::weights::sample_weights;

/// Tables and documents produced by one command.
#[derive(Default)]
pub struct Outputs {
    tables: Vec<(String, CsvTable)>,
    documents: Vec<(String, Value)>,
    pub failure: Option<String>,
}

impl Outputs {
    fn table(&mut self, name: &str, t: CsvTable) {
        self.tables.push((name.into(), t));
    }

    fn document(&mut self, name: &str, v: Value) {
        self.documents.push((name.into(), v));
    }

    pub fn into_files(self, ctx: &RunContext) -> OutputSet {
        let mut set = OutputSet::new();
        for (name, t) in &self.tables {
            set.csv(name, t, ctx);
        }
        for (name, v) in &self.documents {
            set.json(name, v);
        }
        set
    }
}

fn model_err(cfg: &Config, section: &str, source: Error) -> CliError {
    let context = match cfg.section_line(section) {
        Some(l) => format!("[{section}] (config line {l})"),
        None => format!("[{section}]"),
    };
    CliError::Model { context, source }
}

fn read_model(cfg: &Config, with_lambda: bool) -> Result<ModelParams, CliError> {
    let d = cfg.get::<usize>("model", "d", None)?;
    let alpha = cfg.get::<f64>("model", "alpha", None)?;
    let beta = cfg.get::<f64>("model", "beta", None)?;
    let lambda = if with_lambda { cfg.get::<f64>("model", "lambda", None)? } else { 1.0 };
    ModelParams::new(d, alpha, beta, lambda).map_err(|e| model_err(cfg, "model", e))
}

fn positive(cfg: &Config, section: &str, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError { line: cfg.line_of(section, key), msg: format!("{key} must be positive, got {v}") })
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_else(|| "none".into())
}

/// Settings of one command, read and validated before any sampling.
pub enum Plan {
    Phase { d: usize, alphas: Vec<f64>, betas: Vec<f64> },
    Theta { params: ModelParams, grid: Vec<f64>, radius: usize, replicates: u64, opts: ThetaOptions },
    LambdaC { params: ModelParams, radii: Vec<usize>, cfg: LambdaCConfig },
    Degree { params: ModelParams, side: usize, mode: SamplingMode, margin: usize, k_top: Option<usize> },
    Distance { params: ModelParams, radii: Vec<usize>, replicates: u64 },
    Boxes { params: ModelParams, alpha_prime: f64, rhos: Vec<f64>, sides: Vec<usize>, replicates: u64 },
    Renorm { params: ModelParams, a0: u64, level: usize, replicates: u64, budget: u64 },
    OracleCheck { replicates: u64, z_limit: f64 },
}

impl Plan {
    pub fn read(command: Command, cfg: &Config) -> Result<Plan, CliError> {
        Ok(match command {
            Command::Phase => {
                let d = cfg.get::<usize>("phase", "d", None)?;
                let alphas = cfg.get_list::<f64>("phase", "alpha_grid", None)?;
                let betas = cfg.get_list::<f64>("phase", "beta_grid", None)?;
                for (key, grid) in [("alpha_grid", &alphas), ("beta_grid", &betas)] {
                    for &v in grid.iter() {
                        positive(cfg, "phase", key, v)?;
                    }
                }
                if d == 0 {
                    return Err(ConfigError { line: cfg.line_of("phase", "d"), msg: "d must be at least 1".into() }.into());
                }
                Plan::Phase { d, alphas, betas }
            }
            Command::Theta => {
                let params = read_model(cfg, false)?;
                let grid = cfg.get_list::<f64>("theta", "lambda_grid", None)?;
                let radius = cfg.get::<usize>("theta", "box_radius", None)?;
                let replicates = cfg.get::<u64>("theta", "replicates", Some(200))?;
                let proxy = cfg.get::<String>("theta", "proxy", Some("BoundaryReach".into()))?;
                let rho0 = cfg.get::<f64>("theta", "rho0", Some(DEFAULT_RHO0))?;
                let confidence = cfg.get::<f64>("theta", "confidence", Some(0.95))?;
                let proxy = match proxy.as_str() {
                    "BoundaryReach" => ThetaProxy::BoundaryReach,
                    "LargestClusterMembership" => ThetaProxy::LargestClusterMembership { rho0 },
                    other => {
                        return Err(ConfigError {
                            line: cfg.line_of("theta", "proxy"),
                            msg: format!("unknown proxy {other:?} (BoundaryReach or LargestClusterMembership)"),
                        }
                        .into())
                    }
                };
                if !(confidence > 0.0 && confidence < 1.0) {
                    return Err(ConfigError { line: cfg.line_of("theta", "confidence"), msg: "confidence must lie in (0, 1)".into() }.into());
                }
                Plan::Theta { params, grid, radius, replicates, opts: ThetaOptions { proxy, confidence } }
            }
            Command::LambdaC => {
                let params = read_model(cfg, false)?;
                let d = LambdaCConfig::default();
                let radii = cfg.get_list::<usize>("lambda_c", "radii", None)?;
                let lc = LambdaCConfig {
                    crossing_level: cfg.get("lambda_c", "crossing_level", Some(d.crossing_level))?,
                    tol: cfg.get("lambda_c", "tol", Some(d.tol))?,
                    replicates: cfg.get("lambda_c", "replicates", Some(d.replicates))?,
                    initial_upper: cfg.get("lambda_c", "initial_upper", Some(d.initial_upper))?,
                    max_doublings: cfg.get("lambda_c", "max_doublings", Some(d.max_doublings))?,
                    base_seed: 0,
                };
                Plan::LambdaC { params, radii, cfg: lc }
            }
            Command::Degree => {
                let params = read_model(cfg, true)?;
                let side = cfg.get::<usize>("degree", "side", None)?;
                let mode = cfg.get::<String>("degree", "mode", Some("exact".into()))?;
                let radius = cfg.get::<f64>("degree", "truncation_radius", Some(0.0))?;
                let margin = cfg.get::<usize>("degree", "interior_margin", Some(0))?;
                let k_top = cfg.get::<usize>("degree", "k_top", Some(0))?;
                let mode = match mode.as_str() {
                    "exact" => SamplingMode::Exact,
                    "truncated" => SamplingMode::Truncated { radius: positive(cfg, "degree", "truncation_radius", radius)? },
                    other => {
                        return Err(ConfigError {
                            line: cfg.line_of("degree", "mode"),
                            msg: format!("unknown mode {other:?} (exact or truncated)"),
                        }
                        .into())
                    }
                };
                Plan::Degree { params, side, mode, margin, k_top: (k_top > 0).then_some(k_top) }
            }
            Command::Distance => Plan::Distance {
                params: read_model(cfg, true)?,
                radii: cfg.get_list("distance", "radii", None)?,
                replicates: cfg.get("distance", "replicates", Some(50))?,
            },
            Command::Boxes => Plan::Boxes {
                params: read_model(cfg, true)?,
                alpha_prime: cfg.get("boxes", "alpha_prime", None)?,
                rhos: cfg.get_list("boxes", "rho_grid", None)?,
                sides: cfg.get_list("boxes", "m_list", None)?,
                replicates: cfg.get("boxes", "replicates", Some(200))?,
            },
            Command::Renorm => Plan::Renorm {
                params: read_model(cfg, true)?,
                a0: cfg.get("renorm", "a0", None)?,
                level: cfg.get("renorm", "level", Some(0))?,
                replicates: cfg.get("renorm", "replicates", Some(1000))?,
                budget: cfg.get("renorm", "pair_budget", Some(DEFAULT_PAIR_BUDGET))?,
            },
            Command::OracleCheck => Plan::OracleCheck {
                replicates: cfg.get("oracle", "replicates", Some(100_000))?,
                z_limit: cfg.get("oracle", "z_limit", Some(3.0))?,
            },
        })
    }

    pub fn run(self, seed: u64) -> Result<Outputs, CliError> {
        let mut out = Outputs::default();
        let e = |section: &'static str| {
            move |source: Error| CliError::Model { context: format!("[{section}]"), source }
        };
        match self {
            Plan::Phase { d, alphas, betas } => {
                let mut t = CsvTable::new(&["alpha", "beta", "alpha_beta", "class"]);
                let mut counts: BTreeMap<&str, u64> = PhaseClass::ALL.iter().map(|c| (c.as_str(), 0)).collect();
                for &a in &alphas {
                    for &b in &betas {
                        let p = ModelParams::new(d, a, b, 1.0).map_err(e("phase"))?;
                        let class = classify_phase(&p);
                        *counts.get_mut(class.as_str()).unwrap() += 1;
                        t.push(vec![float(a), float(b), float(a * b), class.as_str().into()]);
                    }
                }
                out.table("phase.csv", t);
                out.document("phase.json", json!({ "d": d, "points": alphas.len() * betas.len(), "counts": counts }));
            }
            Plan::Theta { params, grid, radius, replicates, opts } => {
                let curve = theta_curve_with(&params, &grid, radius, replicates, seed, opts).map_err(e("theta"))?;
                let mut t = CsvTable::new(&["lambda", "estimate", "ci_low", "ci_high", "replicates", "box_radius", "proxy"]);
                for c in &curve {
                    t.push(vec![
                        float(c.lambda),
                        float(c.estimate),
                        float(c.ci_low),
                        float(c.ci_high),
                        c.replicates.to_string(),
                        c.box_radius.to_string(),
                        c.proxy.name().into(),
                    ]);
                }
                out.table("theta.csv", t);
            }
            Plan::LambdaC { params, radii, cfg } => {
                let cfg = LambdaCConfig { base_seed: seed, ..cfg };
                let rep = estimate_lambda_c(&params, &radii, &cfg).map_err(e("lambda_c"))?;
                let mut t = CsvTable::new(&["box_radius", "lambda_lo", "lambda_hi", "freq_lo", "freq_hi", "probes"]);
                for b in &rep.brackets {
                    t.push(vec![
                        b.box_radius.to_string(),
                        float(b.lo),
                        float(b.hi),
                        float(b.freq_lo),
                        float(b.freq_hi),
                        b.probes.to_string(),
                    ]);
                }
                out.table("lambda_c.csv", t);
                let fb = rep.final_bracket();
                out.document(
                    "lambda_c.json",
                    json!({
                        "class": rep.class.as_str(),
                        "crossing_level": rep.crossing_level,
                        "replicates": rep.replicates,
                        "final_bracket": [fb.lo, fb.hi],
                        "brackets_overlap": rep.all_overlap(),
                        "note": "finite-size surrogate: boundary-reach crossing, not a consistent estimator",
                    }),
                );
            }
            Plan::Degree { params, side, mode, margin, k_top } => {
                let region = BoxSpec::at_origin(params.d(), side).map_err(e("degree"))?;
                let (ws, es) = replicate_seeds(seed, 0);
                let w = sample_weights(&region, params.beta(), ws).map_err(e("degree"))?;
                let sample = sample_graph(&w, &params, mode, es).map_err(e("degree"))?;
                let hist = degree_histogram(&sample.edges, (margin > 0).then_some(margin));
                let mut t = CsvTable::new(&["vertex", "degree"]);
                let kept: Vec<usize> = (0..region.len())
                    .filter(|&v| {
                        region.coord(v).iter().all(|&c| c >= margin as i64 && c < (side - margin.min(side)) as i64)
                    })
                    .collect();
                for (v, k) in kept.iter().zip(&hist.degrees) {
                    t.push(vec![v.to_string(), k.to_string()]);
                }
                out.table("degree.csv", t);
                let mut h = CsvTable::new(&["degree", "count"]);
                for (k, c) in &hist.counts {
                    h.push(vec![k.to_string(), c.to_string()]);
                }
                out.table("degree_histogram.csv", h);
                let tail = match tail_exponent(&hist, k_top) {
                    Ok(est) => json!({ "tau_hat": est.tau_hat, "k_top": est.k_top, "ci": [est.ci.0, est.ci.1] }),
                    Err(err) => json!({ "unavailable": err.to_string() }),
                };
                let slope = loglog_tail_slope(&hist, 0.01).ok();
                out.document(
                    "degree.json",
                    json!({
                        "vertices": hist.vertex_count(),
                        "edges": sample.edges.len(),
                        "theoretical_tau": params.tau(),
                        "hill": tail,
                        "loglog_slope_top_1pct": slope,
                        "truncation_bound": sample.truncation_bound,
                    }),
                );
            }
            Plan::Distance { params, radii, replicates } => {
                let rep = distance_scaling_report(&params, &radii, replicates, seed).map_err(e("distance"))?;
                let mut t = CsvTable::new(&[
                    "regime", "radius", "q25", "median", "q75", "n_conditioned", "theory_upper", "median_hops",
                ]);
                for s in &rep.stats {
                    t.push(vec![
                        rep.regime.as_str().into(),
                        s.radius.to_string(),
                        float(s.q25),
                        float(s.median),
                        float(s.q75),
                        s.n_conditioned.to_string(),
                        opt(rep.theory_upper),
                        float(s.median_hops),
                    ]);
                }
                out.table("distance.csv", t);
                out.document(
                    "distance.json",
                    json!({ "regime": rep.regime.as_str(), "conditioning": rep.conditioning, "replicates": replicates }),
                );
            }
            Plan::Boxes { params, alpha_prime, rhos, sides, replicates } => {
                let rep = box_theorem_check(&params, alpha_prime, &rhos, &sides, replicates, seed).map_err(e("boxes"))?;
                let mut t = CsvTable::new(&["m", "rho", "frequency", "ci_low", "ci_high", "bound", "flagged"]);
                for r in &rep.rows {
                    t.push(vec![
                        r.m.to_string(),
                        float(r.rho),
                        float(r.frequency.estimate),
                        float(r.frequency.ci_low),
                        float(r.frequency.ci_high),
                        float(r.bound),
                        r.flagged.to_string(),
                    ]);
                }
                out.table("boxes.csv", t);
                out.document(
                    "boxes.json",
                    json!({ "unflagged_rho": rep.unflagged_rhos(), "dominating_rho": rep.dominating_rhos() }),
                );
            }
            Plan::Renorm { params, a0, level, replicates, budget } => {
                let schedule = renorm_schedule(a0, level).map_err(e("renorm"))?;
                let est = estimate_psi(&params, &schedule, level, replicates, seed, budget).map_err(e("renorm"))?;
                let mut t = CsvTable::new(&["level", "a0", "m", "psi_hat", "ci_low", "ci_high", "replicates", "psi_bound"]);
                t.push(vec![
                    level.to_string(),
                    a0.to_string(),
                    est.m.to_string(),
                    float(est.bad.estimate),
                    float(est.bad.ci_low),
                    float(est.bad.ci_high),
                    replicates.to_string(),
                    float(psi_bound(level, params.d())),
                ]);
                out.table("renorm.csv", t);
                out.document("renorm.json", json!({ "scales": schedule.scales(), "warning": est.warning }));
            }
            Plan::OracleCheck { replicates, z_limit } => {
                let mut t = CsvTable::new(&["case", "target", "index", "exact", "monte_carlo", "z"]);
                let mut failed = Vec::new();
                for (case, rep) in run_bundled_suite(replicates, seed).map_err(e("oracle"))? {
                    for i in 0..rep.exact.len() {
                        t.push(vec![
                            case.name.into(),
                            case.target.name().into(),
                            i.to_string(),
                            float(rep.exact[i]),
                            float(rep.monte_carlo[i]),
                            float(rep.z[i]),
                        ]);
                    }
                    if !rep.passes(z_limit) {
                        failed.push(format!("{} (max |z| = {:.3})", case.name, rep.max_abs_z()));
                    }
                }
                out.table("oracle.csv", t);
                out.document("oracle.json", json!({ "z_limit": z_limit, "replicates": replicates, "failed": failed }));
                if !failed.is_empty() {
                    out.failure = Some(failed.join(", "));
                }
            }
        }
        Ok(out)
    }
}
