//! Command-line front end: argument parsing, the run manifest and one
//! subcommand per module. Every command prints a JSON document (or a text
//! summary) that starts with the resolved configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::chain_operads::{
    differential, differential_sum, parse_tree, print_tree, Corolla, Family, OperadError,
    ParseError, Tree,
};
use crate::exec::Exec;
use crate::graph_core::{compose, enumerate, ArrowMode, FeynmanGraph, GraphError};
use crate::quantize::{associativity_residual, build_mu, star_product, QuantizeError, Weigher};
use crate::rational::format_q;
use crate::schouten::{AlgebraSpec, GradedPoly, SchoutenError};
use crate::verify::{run_suite, Suite, SuiteReport, VerifyConfig};
use crate::weights::{snap_rational, Propagator, WeightCache, WeightError, WeightOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("JSON input `{0}`: {1}")]
    Json(String, serde_json::Error),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Schouten(#[from] SchoutenError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Free,
    Down,
    Up,
}

impl From<Mode> for ArrowMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Free => ArrowMode::Free,
            Mode::Down => ArrowMode::Down,
            Mode::Up => ArrowMode::Up,
        }
    }
}

/// Accepts plain integers and float notation such as `5e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "opk",
    version,
    about = "Feynman-graph operads, configuration-space chain operads and graph-weight quantization"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Monte-Carlo seed.
    #[arg(long, global = true, env = "OPK_SEED", default_value = "42", value_parser = parse_count)]
    pub seed: u64,
    /// Monte-Carlo samples per weight.
    #[arg(long, global = true, env = "OPK_SAMPLES", default_value = "100000", value_parser = parse_count)]
    pub samples: u64,
    /// Largest denominator accepted when snapping weights to rationals.
    #[arg(long, global = true, default_value = "16", value_parser = parse_count)]
    pub snap_denominator: u64,
    /// Weight cache directory.
    #[arg(long, global = true, env = "OPK_CACHE", default_value = ".opk-cache")]
    pub cache: PathBuf,
    /// Disable the weight cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Run data-parallel loops sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Also write the JSON document to this file.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Show check details in text output even when they pass.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites; exit status 0 iff every check passes.
    Verify {
        /// Suites to run (all when omitted).
        #[arg(value_enum)]
        suites: Vec<Suite>,
    },
    /// List the nonzero canonical graphs with given vertex and edge counts.
    Enumerate {
        #[arg(long)]
        aerial: u32,
        #[arg(long, default_value = "0")]
        ground: u32,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value = "2")]
        d: u32,
        #[arg(long, value_enum, default_value = "free")]
        mode: Mode,
    },
    /// Boundary differential of a generator or of an S-expression tree.
    Diff {
        /// ass, morass, lie, ocha, morlie or morocha.
        #[arg(long)]
        family: String,
        /// Main input count of the generator.
        #[arg(long)]
        n: Option<u32>,
        /// Ground input count (OCHA-type generators).
        #[arg(long, default_value = "0")]
        m: u32,
        /// Ambient dimension for lie/ocha.
        #[arg(long, default_value = "2")]
        d: u32,
        /// Corolla head such as `b3` or `tri1.2`, when the family has several glyphs.
        #[arg(long)]
        gen: Option<String>,
        /// A tree in S-expression form instead of a generator.
        #[arg(long, conflicts_with_all = ["n", "gen"])]
        tree: Option<String>,
        /// Also report ∂².
        #[arg(long)]
        square: bool,
    },
    /// Operadic composition of graphs.
    Compose {
        /// Outer graph (JSON literal or file).
        #[arg(long)]
        g0: String,
        /// One graph per vertex of g0, in order (JSON literal or file).
        #[arg(long = "part", required = true)]
        parts: Vec<String>,
        /// Blocks of final labels, e.g. `1,2;3`.
        #[arg(long)]
        partition: String,
    },
    /// Monte-Carlo weight of one graph.
    Weight {
        /// Graph (JSON literal or file).
        #[arg(long)]
        graph: String,
        /// sphere, angle, kontsevich or anti_kontsevich.
        #[arg(long)]
        prop: String,
    },
    /// Truncated star product of a bivector.
    Star {
        /// Bivector γ (JSON term array or {"spec", "terms"} object; literal or file).
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value = "kontsevich")]
        prop: String,
        #[arg(long, default_value = "2")]
        order: u32,
        /// dimV when γ is a bare term array.
        #[arg(long, default_value = "2")]
        dim: usize,
        /// Evaluate f ⋆ g.
        #[arg(long, num_args = 2, value_names = ["F", "G"])]
        apply: Option<Vec<String>>,
        /// Associator (f⋆g)⋆h − f⋆(g⋆h) per ħ power; exit 1 when nonzero.
        #[arg(long, num_args = 3, value_names = ["F", "G", "H"])]
        check_assoc: Option<Vec<String>>,
    },
    /// The induced operation μ_n for a propagator.
    Mu {
        #[arg(long, default_value = "2")]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "sphere")]
        prop: String,
    },
}

/// The resolved configuration echoed at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub samples: u64,
    pub snap_denominator: u64,
    pub exec: &'static str,
    pub cache: Option<PathBuf>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub verbosity: u8,
}

impl RunConfig {
    pub fn resolve(g: &GlobalArgs, command: &Command) -> Self {
        let exec = if g.sequential || !cfg!(feature = "parallel") {
            "sequential"
        } else {
            "parallel"
        };
        RunConfig {
            version: env!("CARGO_PKG_VERSION"),
            command: command_name(command).to_string(),
            seed: g.seed,
            samples: g.samples,
            snap_denominator: g.snap_denominator,
            exec,
            cache: (!g.no_cache).then(|| g.cache.clone()),
            format: g.format,
            output: g.output.clone(),
            verbosity: g.verbose,
        }
    }

    fn exec(&self) -> Exec {
        if self.exec == "sequential" {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn weight_options(&self) -> WeightOptions {
        WeightOptions {
            samples: self.samples,
            seed: self.seed,
            exec: self.exec(),
        }
    }

    fn weigher(&self) -> Result<Weigher, CliError> {
        let w = Weigher::new(self.weight_options(), self.snap_denominator);
        Ok(match &self.cache {
            Some(dir) => w.with_cache(Some(dir))?,
            None => w,
        })
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Enumerate { .. } => "enumerate",
        Command::Diff { .. } => "diff",
        Command::Compose { .. } => "compose",
        Command::Weight { .. } => "weight",
        Command::Star { .. } => "star",
        Command::Mu { .. } => "mu",
    }
}

/// A command's result: JSON payload, text rendering and exit status.
pub struct Outcome {
    pub result: Value,
    pub text: String,
    pub success: bool,
}

/// Reads JSON from a literal (starting with `{` or `[`) or a file path.
fn read_json(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    let src = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Io(PathBuf::from(arg), e))?
    };
    serde_json::from_str(&src).map_err(|e| CliError::Json(arg.chars().take(60).collect(), e))
}

fn read_graph(arg: &str) -> Result<FeynmanGraph, CliError> {
    let g: FeynmanGraph = serde_json::from_value(read_json(arg)?)
        .map_err(|e| CliError::Json(arg.chars().take(60).collect(), e))?;
    g.validate()?;
    Ok(g)
}

/// A polynomial as a bare term array over g(V) with d = 2, or an object
/// with its own `spec`.
fn read_poly(arg: &str, default_spec: &Arc<AlgebraSpec>) -> Result<GradedPoly, CliError> {
    let v = read_json(arg)?;
    match v.get("terms") {
        Some(terms) => {
            let spec = match v.get("spec") {
                Some(s) => AlgebraSpec::from_json(s)?,
                None => default_spec.clone(),
            };
            Ok(GradedPoly::from_json(&spec, terms)?)
        }
        None => Ok(GradedPoly::from_json(default_spec, &v)?),
    }
}

fn parse_partition(s: &str) -> Result<Vec<Vec<u32>>, CliError> {
    s.split(';')
        .map(|block| {
            block
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| CliError::Input(format!("bad label `{t}` in partition `{s}`")))
                })
                .collect()
        })
        .collect()
}

fn family(name: &str, d: u32) -> Result<Family, CliError> {
    Family::from_name(name, d).ok_or_else(|| CliError::Input(format!("unknown family `{name}`")))
}

fn generator(
    family: Family,
    n: Option<u32>,
    m: u32,
    gen: Option<&str>,
) -> Result<Corolla, CliError> {
    if let Some(head) = gen {
        let c = Corolla::from_head(family, head)
            .ok_or_else(|| CliError::Input(format!("unknown generator `{head}` for {family}")))?;
        c.check(family)?;
        return Ok(c);
    }
    let n = n.ok_or_else(|| CliError::Input("give --n, --gen or --tree".into()))?;
    family
        .glyphs()
        .iter()
        .map(|&g| Corolla::new(g, n, m))
        .find(|c| c.check(family).is_ok())
        .ok_or_else(|| CliError::Input(format!("{family} has no generator with n={n}, m={m}")))
}

fn graph_list(gs: &[FeynmanGraph]) -> String {
    gs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_verify(suites: &[Suite], cfg: &RunConfig) -> Outcome {
    let vcfg = VerifyConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        snap_denominator: cfg.snap_denominator,
        exec: cfg.exec(),
        cache: cfg.cache.clone(),
    };
    let all = [
        Suite::D2,
        Suite::Graphs,
        Suite::Schouten,
        Suite::Bernoulli,
        Suite::Weights,
        Suite::Star,
    ];
    let suites = if suites.is_empty() { &all[..] } else { suites };
    let reports: Vec<SuiteReport> = suites.iter().map(|&s| run_suite(s, &vcfg)).collect();
    let success = reports.iter().all(|r| r.passed);
    let mut text = String::new();
    for r in &reports {
        for c in &r.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            text.push_str(&format!(
                "[{}] {status} {} ({:.2}s)",
                r.suite, c.name, c.seconds
            ));
            if cfg.verbosity > 0 || !c.passed {
                text.push_str(&format!(": {}", c.detail));
            }
            text.push('\n');
        }
    }
    let passed = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| c.passed)
        .count();
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    text.push_str(&format!("{passed}/{total} checks passed"));
    Outcome {
        result: json!({ "passed": success, "suites": reports }),
        text,
        success,
    }
}

fn cmd_diff(fam: Family, tree: Tree, square: bool) -> Result<Outcome, CliError> {
    let d = differential(fam, &tree)?;
    let mut result = json!({ "family": fam.to_string(), "tree": print_tree(&tree, fam), "differential": d.to_json() });
    let mut text = format!("∂ = {d}");
    if square {
        let d2 = differential_sum(&d)?;
        result["d_squared"] = d2.to_json();
        result["d_squared_mod2_zero"] = json!(d2.mod2().is_zero());
        text.push_str(&format!("\n∂² = {d2}"));
    }
    Ok(Outcome {
        result,
        text,
        success: true,
    })
}

fn run_command(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Verify { suites } => Ok(cmd_verify(suites, cfg)),
        Command::Enumerate {
            aerial,
            ground,
            edges,
            d,
            mode,
        } => {
            let gs = enumerate(*aerial, *ground, *edges, *d, (*mode).into());
            Ok(Outcome {
                result: json!({ "count": gs.len(), "graphs": gs }),
                text: format!("{} graphs\n{}", gs.len(), graph_list(&gs)),
                success: true,
            })
        }
        Command::Diff {
            family: name,
            n,
            m,
            d,
            gen,
            tree,
            square,
        } => {
            let fam = family(name, *d)?;
            let tree = match tree {
                Some(src) => parse_tree(fam, src)?,
                None => Tree::corolla(fam, generator(fam, *n, *m, gen.as_deref())?)?,
            };
            cmd_diff(fam, tree, *square)
        }
        Command::Compose {
            g0,
            parts,
            partition,
        } => {
            let g0 = read_graph(g0)?;
            let parts: Vec<FeynmanGraph> = parts
                .iter()
                .map(|p| read_graph(p))
                .collect::<Result<_, _>>()?;
            let s = compose(&g0, &parts, &parse_partition(partition)?)?;
            Ok(Outcome {
                result: json!({ "count": s.len(), "sum": s.to_json() }),
                text: format!("{} terms\n{s}", s.len()),
                success: true,
            })
        }
        Command::Weight { graph, prop } => {
            let g = read_graph(graph)?;
            let p = Propagator::parse(prop, g.d)?;
            let slice = p.default_slice(&g);
            let est = match &cfg.cache {
                Some(dir) => {
                    WeightCache::open(Some(dir))?.weight(&g, p, slice, cfg.weight_options())?
                }
                None => crate::weights::weight(&g, p, slice, cfg.weight_options())?,
            };
            let snapped = snap_rational(est.mean, est.stderr, cfg.snap_denominator);
            let shown = snapped.as_ref().map(format_q);
            let text = format!(
                "{g}: {} ± {} ({}), snapped {}",
                est.mean,
                est.stderr,
                slice.name(),
                shown.clone().unwrap_or_else(|| "none".into())
            );
            Ok(Outcome {
                result: json!({ "graph": g, "prop": p.name(), "slice": slice.name(), "estimate": est, "snapped": shown }),
                text,
                success: true,
            })
        }
        Command::Star {
            gamma,
            prop,
            order,
            dim,
            apply,
            check_assoc,
        } => {
            let spec = AlgebraSpec::poisson_schouten(2, *dim);
            let gamma = read_poly(gamma, &spec)?;
            let spec = gamma.spec.clone();
            let p = Propagator::parse(prop, spec.d)?;
            let star = star_product(&gamma, p, *order, &mut cfg.weigher()?)?;
            let mut result = json!({ "gamma": gamma.to_json(), "star": star, "exact": star.is_exact(), "warnings": star.warnings() });
            let mut text = star
                .slices
                .iter()
                .enumerate()
                .map(|(n, s)| format!("ħ^{n}: {}", s.describe().replace('\n', " + ")))
                .collect::<Vec<_>>()
                .join("\n");
            let mut success = true;
            if let Some(fg) = apply {
                let (f, g) = (read_poly(&fg[0], &spec)?, read_poly(&fg[1], &spec)?);
                let v = star.apply(&f, &g)?;
                text.push_str(&format!("\nf ⋆ g = {v}"));
                result["product"] = v.to_json();
            }
            if let Some(fgh) = check_assoc {
                let polys: Vec<GradedPoly> = fgh
                    .iter()
                    .map(|a| read_poly(a, &spec))
                    .collect::<Result<_, _>>()?;
                let r = associativity_residual(&star, &polys[0], &polys[1], &polys[2])?;
                success = r.iter().all(GradedPoly::is_zero);
                text.push_str(&format!("\nassociator zero: {success}"));
                result["associator"] = Value::Array(r.iter().map(GradedPoly::to_json).collect());
                result["associative"] = json!(success);
            }
            Ok(Outcome {
                result,
                text,
                success,
            })
        }
        Command::Mu { d, n, prop } => {
            let p = Propagator::parse(prop, *d)?;
            let mu = build_mu(*d, p, *n, &mut cfg.weigher()?)?;
            let text = if mu.is_zero() {
                format!("μ_{n} = 0")
            } else {
                format!("μ_{n} = {}", mu.describe().replace('\n', " + "))
            };
            Ok(Outcome {
                result: json!({ "operator": mu, "zero": mu.is_zero(), "exact": mu.is_exact() }),
                text,
                success: true,
            })
        }
    }
}

fn write_file(path: &Path, s: &str) -> Result<(), CliError> {
    fs::write(path, s).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Runs a parsed command line, writing to `out`; returns the exit status.
pub fn run(cli: &Cli, out: &mut impl Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(&cli.global, &cli.command);
    let outcome = run_command(&cli.command, &cfg)?;
    let doc = json!({ "manifest": cfg, "result": outcome.result });
    let pretty = serde_json::to_string_pretty(&doc).expect("values serialize");
    if let Some(path) = &cfg.output {
        write_file(path, &pretty)?;
    }
    let io = |e| CliError::Io(PathBuf::from("<stdout>"), e);
    match cfg.format {
        Format::Json => writeln!(out, "{pretty}").map_err(io)?,
        Format::Text => {
            writeln!(
                out,
                "# manifest {}",
                serde_json::to_string(&cfg).expect("config serializes")
            )
            .map_err(io)?;
            writeln!(out, "{}", outcome.text).map_err(io)?;
        }
    }
    Ok(if outcome.success { 0 } else { 1 })
}
