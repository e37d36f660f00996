//! Subcommand bodies. Each writes its files under the output directory and a
//! `manifest.json` echoing the resolved config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use colored_ldp::graphs::{empirical_measures, sample_colored_graph, sample_conditional, ColoredGraph, ModelParams};
use colored_ldp::math::icbrt;
use colored_ldp::mcharness::{
    estimate_tail_exponent, exact_er_edge_exponent, fit_inverse_n, Sampling, TailEvent, TailExperiment,
};
use colored_ldp::measures::{
    cap_degrees, consistify, degree_distribution, is_consistent, quantize, total_variation, ColorCounts, ColorMeasure,
    DegreeDistribution, EmpiricalMeasures, NeighborhoodMeasure, PairCounts, PairMeasure,
};
use colored_ldp::oracles::ising_oracle;
use colored_ldp::rates::{rate_delta_detailed, rate_i, rate_i_omega, rate_j, rate_j_tilde, rate_zeta, rate_zeta_er};
use colored_ldp::validation::{run_suites, ValidationConfig, PUBLISHED_SEED};
use colored_ldp::varsolve::ising_annealed;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, Config, CountTarget, Model, RateFunction, SamplingChoice};
use crate::{CliError, Command, Status};

pub struct Run {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub suites: Vec<String>,
}

/// Output directory plus the list of files written so far.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        self.text(name, &s)
    }
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    block.as_ref().ok_or_else(|| CliError::Config(format!("config has no `{name}` block")))
}

fn model(cfg: &Config) -> Result<Model, CliError> {
    require(&cfg.model, "model")?.build()
}

pub fn run(run: &Run) -> Result<Status, CliError> {
    let (mut cfg, base) = config::load(run.config.as_deref())?;
    if run.seed.is_some() {
        cfg.seed = run.seed;
    }
    // every command but validate defaults to seed 0
    let seed = cfg.seed.unwrap_or(if run.command == Command::Validate { PUBLISHED_SEED } else { 0 });
    cfg.seed = Some(seed);
    if run.command == Command::Validate {
        let v = cfg.validate.get_or_insert_with(Default::default);
        if !run.suites.is_empty() {
            v.suites = run.suites.clone();
        }
    }
    let mut out = Output::new(&run.out)?;
    let status = match run.command {
        Command::Generate => generate(&cfg, seed, &mut out),
        Command::Measure => measure(&cfg, &base, &mut out),
        Command::Rate => rate(&cfg, &base, &mut out),
        Command::DegreeRate => degree_rate(&cfg, &base, &mut out),
        Command::EdgeRate => edge_rate(&cfg, seed, &mut out),
        Command::Ising => ising(&cfg, &mut out),
        Command::SampleConditional => conditional(&cfg, &base, seed, &mut out),
        Command::Approximate => approximate(&cfg, &base, seed, &mut out),
        Command::Validate => validate(&cfg, seed, &mut out),
    }?;
    let manifest = json!({
        "command": run.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": cfg,
        "outputs": out.files,
    });
    out.json("manifest.json", &manifest)?;
    Ok(status)
}

fn load_graph(path: &Path) -> Result<ColoredGraph, CliError> {
    let text = config::read(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        ColoredGraph::parse_edge_list(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Writes `graph.txt`, the three measures and `degrees.csv`.
fn write_graph(out: &mut Output, g: &ColoredGraph) -> Result<EmpiricalMeasures, CliError> {
    out.text("graph.txt", &g.to_edge_list())?;
    let emp = empirical_measures(g);
    let (colors, pairs, neighborhoods) = emp.to_measures();
    out.json("colors.json", &colors)?;
    out.json("pairs.json", &pairs)?;
    out.json("neighborhoods.json", &neighborhoods)?;
    let degrees = g.degrees();
    let max = degrees.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; max + 1];
    for d in degrees {
        hist[d as usize] += 1;
    }
    let mut csv = String::from("degree,vertices,fraction\n");
    for (k, &v) in hist.iter().enumerate() {
        let _ = writeln!(csv, "{k},{v},{}", v as f64 / g.n() as f64);
    }
    out.text("degrees.csv", &csv)?;
    out.json(
        "summary.json",
        &json!({
            "n": g.n(),
            "m": g.m(),
            "edges": g.edge_count(),
            "consistent": emp.is_consistent(),
            "max_degree": max,
        }),
    )?;
    Ok(emp)
}

fn generate(cfg: &Config, seed: u64, out: &mut Output) -> Result<Status, CliError> {
    let model = model(cfg)?;
    let block = require(&cfg.generate, "generate")?;
    let params = ModelParams::new(model.mu, model.kernel, block.n)?;
    let g = sample_colored_graph(&params, seed);
    write_graph(out, &g)?;
    println!("generated n = {}, |E| = {}", g.n(), g.edge_count());
    Ok(Status::Ok)
}

fn measure(cfg: &Config, base: &Path, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.measure, "measure")?;
    let g = load_graph(&base.join(&block.graph))?;
    let emp = write_graph(out, &g)?;
    println!("n = {}, |E| = {}, consistent = {}", g.n(), g.edge_count(), emp.is_consistent());
    Ok(Status::Ok)
}

fn rate(cfg: &Config, base: &Path, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.rate, "rate")?;
    let model = model(cfg)?;
    let need = |s: &Option<config::Source>, what: &str| -> Result<config::Source, CliError> {
        s.clone().ok_or_else(|| CliError::Config(format!("rate {:?} needs `{what}`", block.function)))
    };
    let colors = || -> Result<ColorMeasure, CliError> { need(&block.colors, "colors")?.load(base, "colors") };
    let pairs = || -> Result<PairMeasure, CliError> { need(&block.pairs, "pairs")?.load(base, "pairs") };
    let nbhd = || -> Result<NeighborhoodMeasure, CliError> {
        need(&block.neighborhoods, "neighborhoods")?.load(base, "neighborhoods")
    };
    let scalar = |name: &str, v: f64| json!({ "function": name, "value": v.to_string() });
    let report = match block.function {
        RateFunction::J => serde_json::to_value(rate_j(&pairs()?, &nbhd()?, &model.mu, &model.kernel)?),
        RateFunction::I => serde_json::to_value(rate_i(&colors()?, &pairs()?, &model.mu, &model.kernel)?),
        RateFunction::IOmega => Ok(scalar("I_omega", rate_i_omega(&pairs()?, &colors()?, &model.kernel)?)),
        RateFunction::JTilde => Ok(scalar("J_tilde", rate_j_tilde(&nbhd()?, &colors()?, &pairs()?)?)),
        RateFunction::Zeta => return zeta(block.x.as_slice(), &model, out),
    }
    .map_err(|e| CliError::Io(e.to_string()))?;
    println!("{report}");
    out.json("rate.json", &report)?;
    Ok(Status::Ok)
}

fn zeta(xs: &[f64], model: &Model, out: &mut Output) -> Result<Status, CliError> {
    if xs.is_empty() {
        return Err(CliError::Config("rate zeta needs a nonempty `x` list".into()));
    }
    let constant = model.kernel.as_constant();
    let mut csv = String::from("x,zeta,closed_form,converged\n");
    let mut failed = Vec::new();
    for &x in xs {
        let r = rate_zeta(x, &model.mu, &model.kernel)?;
        let closed = constant.map(|c| rate_zeta_er(x, c).to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{x},{},{closed},{}", r.value, r.converged);
        if !r.converged {
            failed.push(x);
        }
    }
    print!("{csv}");
    out.text("zeta.csv", &csv)?;
    Ok(if failed.is_empty() { Status::Ok } else { Status::NotConverged(format!("zeta at x = {failed:?}")) })
}

fn degree_rate(cfg: &Config, base: &Path, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.degree_rate, "degree_rate")?;
    let c = match block.c {
        Some(c) => c,
        None => model(cfg)?
            .kernel
            .as_constant()
            .ok_or_else(|| CliError::Config("degree_rate needs `c` unless the model kernel is constant".into()))?,
    };
    let mut csv = String::from("name,mean,branch,x,delta\n");
    let mut rows = Vec::new();
    for law in &block.laws {
        let d = match (&law.probs, law.poisson, &law.graph) {
            (Some(p), None, None) => DegreeDistribution::new(p.clone())?,
            (None, Some(l), None) => DegreeDistribution::poisson(l, 1e-16)?,
            (None, None, Some(path)) => {
                degree_distribution(&empirical_measures(&load_graph(&base.join(path))?).neighborhoods.to_measure())
            }
            _ => {
                return Err(CliError::Config(format!("law `{}` needs exactly one of probs, poisson, graph", law.name)))
            }
        };
        let r = rate_delta_detailed(&d, c)?;
        let branch = serde_json::to_value(r.branch).map_err(|e| CliError::Io(e.to_string()))?;
        let _ =
            writeln!(csv, "{},{},{},{},{}", law.name, d.mean(), branch.as_str().unwrap_or_default(), r.x.0, r.value.0);
        rows.push(json!({ "name": law.name, "mean": d.mean(), "rate": r }));
    }
    print!("{csv}");
    out.text("degree_rate.csv", &csv)?;
    out.json("degree_rate.json", &json!({ "c": c, "laws": rows }))?;
    Ok(Status::Ok)
}

fn edge_rate(cfg: &Config, seed: u64, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.edge_rate, "edge_rate")?;
    let model = model(cfg)?;
    let x = block.x;
    let zeta = rate_zeta(x, &model.mu, &model.kernel)?;
    let constant = model.kernel.as_constant();
    let mut report = json!({ "x": x, "zeta": zeta });
    if let Some(c) = constant {
        report["zeta_closed_form"] = json!(rate_zeta_er(x, c));
    }

    if !block.sizes.is_empty() {
        let c = constant.ok_or_else(|| CliError::Config("exact edge exponents need a constant kernel".into()))?;
        let mut csv = String::from("n,exact_exponent\n");
        let mut points = Vec::new();
        for &n in &block.sizes {
            let e = exact_er_edge_exponent(n as u64, c, x)?;
            let _ = writeln!(csv, "{n},{e}");
            points.push((n, e));
        }
        out.text("edge_rate.csv", &csv)?;
        if points.len() >= 2 {
            report["exact_fit"] =
                serde_json::to_value(fit_inverse_n(&points)?).map_err(|e| CliError::Io(e.to_string()))?;
        }
        report["exact"] = json!(points);
    }

    if let Some(mc) = &block.monte_carlo {
        let sampling = match mc.sampling {
            SamplingChoice::Plain => Sampling::Plain,
            SamplingChoice::Tilt => Sampling::edge_tilt(x, &model.mu, &model.kernel),
        };
        let exp = TailExperiment {
            mu: model.mu.clone(),
            kernel: model.kernel.clone(),
            event: TailEvent::EdgesAtLeast { x },
            sizes: mc.sizes.clone(),
            replicas: mc.replicas.clone(),
            sampling,
            seed,
        };
        let est = estimate_tail_exponent(&exp)?;
        out.text("monte_carlo.csv", &est.to_csv(Some(zeta.value)))?;
        report["monte_carlo"] = serde_json::to_value(&est).map_err(|e| CliError::Io(e.to_string()))?;
    }
    println!("zeta({x}) = {}", zeta.value);
    out.json("edge_rate.json", &report)?;
    Ok(if zeta.converged { Status::Ok } else { Status::NotConverged(format!("zeta at x = {x}")) })
}

fn ising(cfg: &Config, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.ising, "ising")?;
    let mut csv = String::from("beta,c,free_energy,oracle,abs_diff,converged\n");
    let mut failed = Vec::new();
    for &beta in &block.betas {
        for &c in &block.cs {
            let v = ising_annealed(beta, c)?;
            let o = ising_oracle(beta, c)?;
            let _ = writeln!(csv, "{beta},{c},{},{},{},{}", v.value, o.value, (v.value - o.value).abs(), v.converged);
            if !v.converged {
                failed.push((beta, c));
            }
        }
    }
    print!("{csv}");
    out.text("ising.csv", &csv)?;
    Ok(if failed.is_empty() { Status::Ok } else { Status::NotConverged(format!("ising at (beta, c) = {failed:?}")) })
}

fn target_counts(t: &CountTarget, base: &Path) -> Result<(ColorCounts, PairCounts), CliError> {
    match (&t.graph, &t.colors, &t.edges) {
        (Some(path), None, None) => {
            let emp = empirical_measures(&load_graph(&base.join(path))?);
            Ok((emp.colors, emp.pairs))
        }
        (None, Some(colors), Some(edges)) => {
            let colors = ColorCounts::new(colors.clone())?;
            let m = colors.alphabet().size();
            if edges.len() != m || edges.iter().any(|r| r.len() != m) {
                return Err(CliError::Config(format!("`edges` must be a {m}x{m} matrix")));
            }
            let flat: Vec<u64> = edges.concat();
            let pairs = PairCounts::from_edge_numbers(colors.n(), m, &flat)?;
            Ok((colors, pairs))
        }
        _ => Err(CliError::Config("target needs either `graph` or both `colors` and `edges`".into())),
    }
}

fn conditional(cfg: &Config, base: &Path, seed: u64, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.sample_conditional, "sample_conditional")?;
    let (colors, pairs) = target_counts(&block.target, base)?;
    // counts that parse but admit no graph are an infeasible model
    let g = sample_conditional(&colors, &pairs, seed, block.retries).map_err(|e| match e {
        colored_ldp::Error::Domain(msg) => CliError::Infeasible(msg),
        e => e.into(),
    })?;
    let emp = write_graph(out, &g)?;
    let exact = emp.colors == colors && emp.pairs == pairs;
    println!("sampled n = {}, |E| = {}, targets met: {exact}", g.n(), g.edge_count());
    Ok(Status::Ok)
}

fn approximate(cfg: &Config, base: &Path, seed: u64, out: &mut Output) -> Result<Status, CliError> {
    let block = require(&cfg.approximate, "approximate")?;
    let pair: PairMeasure = block.pairs.load(base, "pairs")?;
    let nu: NeighborhoodMeasure = block.neighborhoods.load(base, "neighborhoods")?;
    let c = consistify(&pair, &nu, block.eps)?;
    let mut report = json!({
        "eps": block.eps,
        "consistify": {
            "scale": c.scale,
            "pair_error": pair.matrix().max_abs_diff(&c.pairs)?,
            "tv": total_variation(&nu, &c.neighborhoods)?,
            "consistent": is_consistent(&c.pairs, &c.neighborhoods, 1e-12)?,
        }
    });
    out.json("consistified.json", &json!({ "pairs": c.pairs, "neighborhoods": c.neighborhoods }))?;
    if let Some(t) = &block.quantize {
        let (colors, pairs) = target_counts(t, base)?;
        let nu_n = quantize(&colors, &pairs, &c.neighborhoods, seed)?;
        let capped = cap_degrees(&nu_n)?;
        report["quantize"] = json!({
            "n": nu_n.n(),
            "matches_targets": nu_n.matches(&colors, &pairs),
            "tv": total_variation(&nu_n.to_measure(), &c.neighborhoods)?,
            "max_magnitude": nu_n.max_magnitude(),
        });
        report["cap"] = json!({
            "bound": icbrt(capped.n()),
            "max_magnitude": capped.max_magnitude(),
            "phi_preserved": capped.phi_counts() == nu_n.phi_counts(),
            "tv": total_variation(&capped.to_measure(), &c.neighborhoods)?,
        });
        out.json("quantized.json", &nu_n.to_measure())?;
        out.json("capped.json", &capped.to_measure())?;
    }
    println!("{report}");
    out.json("approximation.json", &report)?;
    Ok(Status::Ok)
}

fn validate(cfg: &Config, seed: u64, out: &mut Output) -> Result<Status, CliError> {
    let block = cfg.validate.clone().unwrap_or_default();
    let vcfg = ValidationConfig { seed: Some(seed), tolerances: block.tolerances, budget: block.budget };
    let reports = run_suites(&block.suites, &vcfg)?;
    for r in &reports {
        println!("{}", r.line());
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.as_str()).collect();
    out.json("validation.json", &json!({ "passed": failed.is_empty(), "criteria": reports }))?;
    Ok(if failed.is_empty() { Status::Ok } else { Status::ValidationFailed(failed.join(", ")) })
}
