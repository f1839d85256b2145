//! Command-line front end: simulate, estimate, oracle, experiment, diagnose.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use gibbsbox::estimate::{self, EstimationResult, TestFunction};
use gibbsbox::experiment::{self, ExperimentReport, Plan, Sampling};
use gibbsbox::germ_grain::germ_grain_summary;
use gibbsbox::io::config::{self, Command, EstimatorMethod, Format, RunConfig, SamplerMethod};
use gibbsbox::io::manifest::{ReplicateRecord, RunManifest};
use gibbsbox::io::{pattern, svg};
use gibbsbox::sampler::{self, Chain, Schedule};
use gibbsbox::{energy, oracle, EnergyModel, PointConfiguration, Window};

#[derive(Parser)]
#[command(name = "gibbsbox", version, about = "Finite-range Gibbs point processes: simulation and inference")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the model of a config and write patterns plus a run manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit (z, beta) to a pattern; prints an EstimationResult as JSON.
    Estimate {
        #[arg(long)]
        pattern: PathBuf,
        /// Window sidecar; defaults to `<pattern>.window.json`.
        #[arg(long)]
        window: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Also write the result to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Series reference value of a statistic on a small window.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a canned experiment: gnz_residual, hardcore_bounds,
    /// phase_transition, uniqueness_probe, ruelle_tail or mean_energy.
    Experiment {
        #[arg(long)]
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Diagnostics of an observed pattern: `gnz` residuals or the
    /// `germ_grain` summary.
    Diagnose {
        #[arg(long)]
        name: String,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        window: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Cmd::Simulate { config, out, seed } => simulate(&config, out, seed),
        Cmd::Estimate {
            pattern,
            window,
            config,
            out,
        } => estimate_cmd(&pattern, window.as_deref(), &config, out.as_deref()),
        Cmd::Oracle { config, out } => oracle_cmd(&config, out.as_deref()),
        Cmd::Experiment {
            name,
            config,
            out,
            seed,
            replicates,
        } => experiment_cmd(&name, config.as_deref(), out, seed, replicates),
        Cmd::Diagnose {
            name,
            pattern,
            window,
            config,
            out,
        } => diagnose(&name, &pattern, window.as_deref(), &config, out.as_deref()),
    }
}

/// Sizes the worker pool from `GIBBSBOX_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("GIBBSBOX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("GIBBSBOX_THREADS must be a positive integer, got `{v}`"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn load_config(path: &Path, command: Command) -> Result<(RunConfig, Value)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = config::parse_config(&text)?;
    cfg.require_for(command)?;
    let raw: Value = serde_json::from_str(&text)?;
    Ok((cfg, raw))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let (mut cfg, raw) = load_config(path, Command::Simulate)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let model = &cfg.model.as_ref().expect("checked").energy;
    let window = cfg.window.expect("checked");
    let sc = cfg.sampler_config().expect("checked");
    let bc = cfg.boundary.build()?;
    let radius = ball_radius(model);

    let mut manifest = RunManifest::new("simulate", cfg.seed, raw);
    for r in 0..cfg.sampler.replicates {
        let stream = r as u64;
        let (states, record) = match cfg.sampler.method {
            SamplerMethod::Mh => {
                let mut chain = Chain::new(model, &window, &sc, &bc, stream)?;
                let states = chain.sample(&cfg.sampler.schedule);
                let st = chain.state();
                let record = ReplicateRecord {
                    stream,
                    final_count: st.config.len(),
                    final_energy: st.energy,
                    retained: states.len(),
                    proposed: st.proposed,
                    accepted: st.accepted,
                    acceptance_rates: st.acceptance_rates(),
                    rejection_proposals: None,
                };
                (states, record)
            }
            SamplerMethod::Rejection => {
                let mut rng = sampler::rng_for(cfg.seed, stream);
                let (c, tries) = sampler::rejection_draw(model, &window, sc.z, sc.beta, &bc, &mut rng)?;
                let record = ReplicateRecord {
                    stream,
                    final_count: c.len(),
                    final_energy: energy::total_energy(model, &c, &bc),
                    retained: 1,
                    proposed: [0; 3],
                    accepted: [0; 3],
                    acceptance_rates: [0.0; 3],
                    rejection_proposals: Some(tries),
                };
                (vec![c], record)
            }
        };
        let last = states.last().cloned().unwrap_or_else(|| PointConfiguration::empty(window, 1.0));
        if cfg.output.formats.contains(&Format::Csv) {
            if cfg.sampler.save_states {
                for (k, s) in states.iter().enumerate() {
                    let name = format!("replicate_{r}_state_{k}.csv");
                    pattern::save_pattern(s, &dir.join(&name))?;
                    manifest.files.push(name);
                }
            } else {
                let name = format!("replicate_{r}.csv");
                pattern::save_pattern(&last, &dir.join(&name))?;
                manifest.files.push(name);
            }
        }
        if cfg.output.formats.contains(&Format::Svg) {
            let name = format!("replicate_{r}.svg");
            write(&dir.join(&name), &svg::render_svg(&last, &window, radius))?;
            manifest.files.push(name);
        }
        manifest.replicates.push(record);
    }
    manifest.files.push("manifest.json".into());
    write(&dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;
    for rec in &manifest.replicates {
        println!(
            "replicate {}: {} points, energy {:.6}, acceptance {:?}",
            rec.stream, rec.final_count, rec.final_energy, rec.acceptance_rates
        );
    }
    println!("wrote {} files to {}", manifest.files.len(), dir.display());
    Ok(())
}

/// Ball radius to draw for germ-grain models.
fn ball_radius(model: &EnergyModel) -> Option<f64> {
    match model {
        EnergyModel::Area { radius, .. } => Some(*radius),
        EnergyModel::RandomCluster { radius, .. } => Some(0.5 * radius),
        EnergyModel::Pairwise { .. } => None,
    }
}

fn default_test_functions(model: &EnergyModel) -> Vec<TestFunction> {
    vec![
        TestFunction::ConstantOne,
        TestFunction::LocalEnergy,
        TestFunction::NeighborCount {
            radius: 1.5 * model.range(),
        },
    ]
}

fn run_estimator(cfg: &RunConfig, model: &EnergyModel, pat: &PointConfiguration) -> Result<EstimationResult> {
    let e = &cfg.estimator;
    let oc = &e.optimizer;
    Ok(match e.method {
        EstimatorMethod::Tf => {
            let fs = if e.test_functions.is_empty() {
                default_test_functions(model)
            } else {
                e.test_functions.clone()
            };
            estimate::takacs_fiksel_estimate(&fs, model, pat, oc, e.border_correct)?
        }
        EstimatorMethod::Mple => estimate::mple_estimate(model, pat, oc, e.border_correct)?,
        EstimatorMethod::Mcmle => {
            let reference = match e.reference {
                Some([z, b]) => (z, b),
                None => {
                    let start = if model.is_hard_core() {
                        estimate::takacs_fiksel_estimate(&default_test_functions(model), model, pat, oc, e.border_correct)?
                    } else {
                        estimate::mple_estimate(model, pat, oc, e.border_correct)?
                    };
                    (start.z_hat, start.beta_hat)
                }
            };
            let mut budget = e.mcmc;
            budget.seed = cfg.seed;
            estimate::mc_mle_estimate(model, pat, reference, &budget, oc)?
        }
        EstimatorMethod::Variational => {
            estimate::variational_estimate(model, pat, e.border_correct, oc.quadrature_nodes)?
        }
        EstimatorMethod::GermGrain => match model {
            EnergyModel::Area { radius, .. } => estimate::germ_grain_fit(pat, *radius, oc, e.border_correct)?,
            _ => bail!("the germ-grain estimator needs an area model"),
        },
    })
}

fn estimate_cmd(pattern_path: &Path, window: Option<&Path>, config_path: &Path, out: Option<&Path>) -> Result<()> {
    let (cfg, _) = load_config(config_path, Command::Estimate)?;
    let model = &cfg.model.as_ref().expect("checked").energy;
    let pat = pattern::load_pattern(pattern_path, window, model.range())
        .with_context(|| format!("loading pattern {}", pattern_path.display()))?;
    let result = run_estimator(&cfg, model, &pat)?;
    let text = serde_json::to_string_pretty(&result)?;
    println!("{text}");
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(p) = out {
        write(p, &text)?;
    }
    Ok(())
}

fn oracle_cmd(config_path: &Path, out: Option<&Path>) -> Result<()> {
    let (cfg, _) = load_config(config_path, Command::Oracle)?;
    let spec = cfg.model.as_ref().expect("checked");
    let (z, beta) = (spec.z.expect("checked"), spec.beta.expect("checked"));
    let window = cfg.window.expect("checked");
    let bc = cfg.boundary.build()?;
    let mut oc = cfg.oracle.config;
    oc.seed = cfg.seed;
    let z_fn = oracle::partition_function(&spec.energy, &window, z, beta, &bc, &oc)?;
    let value = oracle::oracle_expectation(cfg.oracle.statistic, &spec.energy, &window, z, beta, &bc, &oc)?;
    let record = json!({
        "statistic": cfg.oracle.statistic,
        "estimate": value.estimate,
        "std_error": value.std_error,
        "truncation_bound": value.truncation_bound,
        "partition_function": z_fn,
        "n_max": oc.n_max,
        "mc_samples": oc.mc_samples,
        "seed": oc.seed,
    });
    let text = serde_json::to_string_pretty(&record)?;
    println!("{text}");
    if let Some(p) = out {
        write(p, &text)?;
    }
    Ok(())
}

fn experiment_cmd(
    name: &str,
    config_path: Option<&Path>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    replicates: Option<usize>,
) -> Result<()> {
    let cfg = match config_path {
        Some(p) => Some(load_config(p, Command::Experiment)?.0),
        None => None,
    };
    let seed = seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let section = cfg.as_ref().map(|c| c.experiment.clone()).unwrap_or_default();
    if let Some(n) = &section.name {
        if n != name {
            bail!("config names experiment `{n}` but `{name}` was requested");
        }
    }
    let model_or = |default: EnergyModel| cfg.as_ref().and_then(|c| c.model.clone()).map(|m| m.energy).unwrap_or(default);
    let zb = |z: f64, b: f64| {
        let m = cfg.as_ref().and_then(|c| c.model.as_ref());
        (m.and_then(|m| m.z).unwrap_or(z), m.and_then(|m| m.beta).unwrap_or(b))
    };
    let window_or = |side: f64| -> Result<Window> {
        Ok(match cfg.as_ref().and_then(|c| c.window) {
            Some(w) => w,
            None => Window::square(side)?,
        })
    };
    let plan = |default_reps: usize, default_sampling: Sampling| -> Plan {
        let mut p = section.plan(default_reps, seed);
        if section.sampling.is_none() {
            p = p.with_sampling(default_sampling);
        }
        if let Some(r) = replicates {
            p.replicates = r;
        }
        p
    };
    let chain = |b: usize, s: usize, t: usize| Sampling::Chain {
        schedule: Schedule::new(b, s, t),
    };
    let report: ExperimentReport = match name {
        "gnz_residual" => {
            let model = model_or(EnergyModel::strauss(0.5)?);
            let (z, beta) = zb(1.0, 1.0);
            let fs = if section.test_functions.is_empty() {
                vec![TestFunction::ConstantOne, TestFunction::LocalEnergy]
            } else {
                section.test_functions.clone()
            };
            experiment::gnz_residual_test(
                &model,
                z,
                beta,
                &window_or(30.0)?,
                &fs,
                section.beta_shift.unwrap_or(0.5),
                &plan(50, chain(200, 100, 50)),
            )?
        }
        "hardcore_bounds" => {
            let radius = match cfg.as_ref().and_then(|c| c.model.as_ref()).map(|m| &m.energy) {
                Some(m) if m.is_hard_core() => m.range(),
                Some(_) => bail!("hardcore_bounds needs a hard_core model"),
                None => 0.5,
            };
            let (z, _) = zb(1.0, 1.0);
            experiment::hardcore_bounds_check(z, radius, &window_or(30.0)?, &plan(20, chain(200, 200, 20)))?
        }
        "phase_transition" => {
            let radius = match cfg.as_ref().and_then(|c| c.model.as_ref()).map(|m| &m.energy) {
                Some(EnergyModel::Area { radius, .. }) => *radius,
                Some(_) => bail!("phase_transition needs an area model"),
                None => 1.0,
            };
            let zs = section.z_values.clone().unwrap_or_else(|| vec![0.2, 2.0]);
            experiment::phase_transition_experiment(&zs, radius, &window_or(20.0)?, &plan(50, chain(100, 100, 10)))?
        }
        "uniqueness_probe" => {
            let model = model_or(EnergyModel::strauss(0.5)?);
            let (z, beta) = zb(0.5, 1.0);
            experiment::uniqueness_regime_probe(&model, z, beta, &window_or(20.0)?, &plan(40, chain(200, 200, 20)))?
        }
        "ruelle_tail" => {
            let model = model_or(EnergyModel::strauss(0.5)?);
            let (z, beta) = zb(1.0, 1.0);
            let window = window_or(3.0)?;
            let sub = section.subwindow.unwrap_or(window);
            experiment::ruelle_tail_report(&model, z, beta, &window, &sub, &plan(1000, Sampling::Exact))?
        }
        "mean_energy" => {
            let model = model_or(EnergyModel::strauss(0.5)?);
            let (z, beta) = zb(1.0, 1.0);
            let sides = section.sides.clone().unwrap_or_else(|| vec![20.0, 40.0, 60.0]);
            experiment::empirical_mean_energy(&model, z, beta, &sides, &plan(10, chain(200, 100, 20)))?
        }
        other => bail!(
            "unknown experiment `{other}` (gnz_residual, hardcore_bounds, phase_transition, uniqueness_probe, \
             ruelle_tail, mean_energy)"
        ),
    };
    print!("{}", report.summary());
    let dir = out
        .or_else(|| cfg.as_ref().and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let formats = cfg.as_ref().map(|c| c.output.formats.clone()).unwrap_or_default();
    if formats.contains(&Format::Json) {
        write(&dir.join(format!("{name}.json")), &report.to_json())?;
    }
    if formats.contains(&Format::Csv) {
        write(&dir.join(format!("{name}.csv")), &report.to_csv())?;
    }
    Ok(())
}

fn diagnose(name: &str, pattern_path: &Path, window: Option<&Path>, config_path: &Path, out: Option<&Path>) -> Result<()> {
    let (cfg, _) = load_config(config_path, Command::Diagnose)?;
    let spec = cfg.model.as_ref().expect("checked");
    let model = &spec.energy;
    let pat = pattern::load_pattern(pattern_path, window, model.range())
        .with_context(|| format!("loading pattern {}", pattern_path.display()))?;
    let record = match name {
        "gnz" => {
            let (z, beta) = (spec.z.expect("checked"), spec.beta.expect("checked"));
            let fs = if cfg.estimator.test_functions.is_empty() {
                vec![TestFunction::ConstantOne, TestFunction::LocalEnergy]
            } else {
                cfg.estimator.test_functions.clone()
            };
            let border = cfg.estimator.border_correct;
            let mut rows = Vec::new();
            for f in &fs {
                let margin = if border { f.radius(model).max(model.range()) } else { 0.0 };
                let area = pat.window().erode(margin).map(|w| w.area()).unwrap_or(f64::NAN);
                let c = estimate::gnz_statistic(f, model, z, beta, &pat, border, cfg.estimator.optimizer.quadrature_nodes)?;
                rows.push(json!({"test_function": f.name(), "residual": c, "residual_per_area": c / area}));
            }
            json!({"diagnostic": "gnz", "z": z, "beta": beta, "border_corrected": border, "points": pat.len(), "residuals": rows})
        }
        "germ_grain" => {
            let radius = match model {
                EnergyModel::Area { radius, .. } => *radius,
                _ => bail!("the germ_grain diagnostic needs an area model"),
            };
            let w = *pat.window();
            let s = germ_grain_summary(&pat, radius, &w);
            json!({
                "diagnostic": "germ_grain", "R": radius, "points": pat.len(),
                "exposed_length": s.exposed_length, "isolated_count": s.isolated_count, "union_area": s.union_area,
            })
        }
        other => bail!("unknown diagnostic `{other}` (gnz, germ_grain)"),
    };
    let text = serde_json::to_string_pretty(&record)?;
    println!("{text}");
    if let Some(p) = out {
        write(p, &text)?;
    }
    Ok(())
}
