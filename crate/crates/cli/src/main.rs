//! `recomp`: command-line front end for the compositional model checker.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use recomp::decomposer::decompose;
use recomp::engine::{render_structured, render_text, run_portfolio, Options, Report, Verdict};
use recomp::enumerator::{err_lts, to_lts, Limits, DEFAULT_BOUND};
use recomp::heuristics::{data_flow_order, make_strategy, total_order, Strategy, StrategyKind};
use recomp::lts::{minimize, MinimizeMode};
use recomp::recomposer::{necessary_components, RecompositionMap};
use recomp::spec_lang::{parse, parse_closed_expr, symbolic_actions, PropertyDef, SpecAst};

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "recomp", version, about = "Compositional safety checking for state-machine specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a property of a specification.
    Check(CheckArgs),
    /// Print the components a property induces.
    Decompose(SpecArgs),
    /// Print the data-flow order, the total order and the built-in maps.
    Order(SpecArgs),
    /// Dump the state graph of a specification.
    Lts(LtsArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Specification file.
    spec: PathBuf,
    /// Property to check; optional when the spec defines exactly one.
    #[arg(short, long)]
    property: Option<String>,
    /// Override a constant, e.g. `RMs={"rm1","rm2"}`. Repeatable.
    #[arg(long = "const", value_name = "NAME=EXPR")]
    constants: Vec<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// s1, s2, s3, s4, portfolio, or map:<path>.
    #[arg(short, long, default_value = "portfolio")]
    strategy: String,
    /// Parallel runs in portfolio mode.
    #[arg(short, long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
    /// Maximum number of states generated per group.
    #[arg(long, env = "RECOMP_BOUND", default_value_t = DEFAULT_BOUND, value_parser = positive)]
    bound: usize,
    /// Wall-clock limit in seconds.
    #[arg(long, env = "RECOMP_TIMEOUT")]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Strong)]
    minimize: Mode,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Keep components that cannot influence the property.
    #[arg(long)]
    no_static_reduction: bool,
}

#[derive(Args)]
struct LtsArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Fold states violating the property into an error state.
    #[arg(long)]
    error: bool,
    /// Minimize before dumping.
    #[arg(long, value_enum)]
    minimize: Option<Mode>,
    #[arg(long, env = "RECOMP_BOUND", default_value_t = DEFAULT_BOUND, value_parser = positive)]
    bound: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strong,
    Observational,
}

impl From<Mode> for MinimizeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strong => MinimizeMode::Strong,
            Mode::Observational => MinimizeMode::Observational,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".to_string()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn load_spec(args: &SpecArgs) -> Result<SpecAst> {
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("cannot read {}", args.spec.display()))?;
    let mut spec = parse(&text).with_context(|| format!("{}", args.spec.display()))?;
    for c in &args.constants {
        let (name, expr) = c.split_once('=').ok_or_else(|| anyhow!("--const expects NAME=EXPR, got '{c}'"))?;
        let name = name.trim();
        if !spec.constants.iter().any(|k| k == name) {
            bail!("unknown constant '{name}'");
        }
        let value = parse_closed_expr(expr).with_context(|| format!("value of {name}"))?;
        spec.bind_constant(name, value);
    }
    Ok(spec)
}

fn property(spec: &SpecAst, name: Option<&str>) -> Result<PropertyDef> {
    match name {
        Some(n) => spec.property(n).cloned().ok_or_else(|| anyhow!("no property named '{n}'")),
        None => match spec.properties.as_slice() {
            [p] => Ok(p.clone()),
            [] => bail!("{} defines no property", spec.name),
            _ => bail!("{} defines several properties; pick one with --property", spec.name),
        },
    }
}

fn strategies(sel: &str, spec: &SpecAst, p: &PropertyDef) -> Result<Vec<Strategy>> {
    if sel.eq_ignore_ascii_case("portfolio") {
        return Ok(StrategyKind::ALL.iter().map(|&k| k.into()).collect());
    }
    if let Some(path) = sel.strip_prefix("map:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read map {path}"))?;
        let names: Vec<String> = decompose(spec, p)?.into_iter().map(|c| c.name).collect();
        let map = RecompositionMap::parse(&text, &names).with_context(|| format!("map {path}"))?;
        let name = Path::new(path)
            .file_stem()
            .map_or(path.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![Strategy::Custom { name, map }]);
    }
    let kind: StrategyKind = sel.parse().map_err(|e: String| anyhow!(e))?;
    Ok(vec![kind.into()])
}

fn check(args: &CheckArgs) -> Result<u8> {
    let spec = load_spec(&args.spec)?;
    let p = property(&spec, args.spec.property.as_deref())?;
    let list = strategies(&args.strategy, &spec, &p)?;
    let timeout = match args.timeout {
        Some(t) if t.is_finite() && t > 0.0 => Some(Duration::from_secs_f64(t)),
        Some(t) => bail!("timeout must be positive, got {t}"),
        None => None,
    };
    let opts = Options {
        limits: Limits::with_bound(args.bound),
        minimize: args.minimize.into(),
        static_reduction: !args.no_static_reduction,
    };
    let out = run_portfolio(&spec, &p, &list, args.workers as usize, timeout, &opts)?;
    let code = match out.verdict {
        Verdict::Holds => 0,
        Verdict::Violated(_) => 1,
        Verdict::Inconclusive(_) => 2,
    };
    let report = Report {
        spec: spec.name.clone(),
        property: p.name.clone(),
        verdict: out.verdict,
        stats: out.stats,
    };
    match args.format {
        Format::Text => print!("{}", render_text(&report)),
        Format::Structured => print!("{}", render_structured(&report)),
    }
    Ok(code)
}

fn show_decomposition(args: &SpecArgs) -> Result<u8> {
    let spec = load_spec(args)?;
    let p = property(&spec, args.property.as_deref())?;
    let comps = decompose(&spec, &p)?;
    println!("{} components for {}", comps.len(), p.name);
    for (i, c) in comps.iter().enumerate() {
        let actions: Vec<String> = symbolic_actions(c).into_iter().collect();
        println!("{i} {}", c.name);
        println!("  variables: {}", c.variables.join(", "));
        println!("  actions: {}", actions.join(", "));
    }
    Ok(0)
}

fn show_order(args: &SpecArgs) -> Result<u8> {
    let spec = load_spec(args)?;
    let p = property(&spec, args.property.as_deref())?;
    let comps = decompose(&spec, &p)?;
    let names: Vec<String> = comps.iter().map(|c| c.name.clone()).collect();
    let list = |ix: &mut dyn Iterator<Item = usize>| ix.map(|i| names[i].clone()).collect::<Vec<_>>().join(", ");
    for (i, x) in necessary_components(&comps).x_sets.iter().enumerate() {
        println!("X{i} = {{{}}}", list(&mut x.iter().copied()));
    }
    let dfo = data_flow_order(&comps);
    for (i, e) in dfo.e_sets.iter().enumerate() {
        println!("E{i} = {{{}}}", list(&mut e.iter().copied()));
    }
    for &(j, k) in &dfo.f_edges {
        println!("F {} -> {}", names[j], names[k]);
    }
    let order = total_order(&comps, &spec);
    println!("order: {}", list(&mut order.iter().copied()));
    for k in StrategyKind::ALL {
        println!("\n# {k}");
        print!("{}", make_strategy(k, &order).render(&names));
    }
    Ok(0)
}

fn dump_lts(args: &LtsArgs) -> Result<u8> {
    let spec = load_spec(&args.spec)?;
    let limits = Limits::with_bound(args.bound);
    let explored = if args.error {
        let p = property(&spec, args.spec.property.as_deref())?;
        err_lts(&spec, &p, &limits)?
    } else {
        to_lts(&spec, &limits)?
    };
    let lts = match args.minimize {
        Some(m) => minimize(&explored.lts, m.into()),
        None => explored.lts,
    };
    print!("{}", lts.dump());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Check(a) => check(a),
        Command::Decompose(a) => show_decomposition(a),
        Command::Order(a) => show_order(a),
        Command::Lts(a) => dump_lts(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
