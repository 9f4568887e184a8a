mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anatomy::aggregate::{aggregate, AbstractGraph, Level};
use anatomy::callgraph::{build_graph, CallGraph, CostKind};
use anatomy::category::{categorize, CategoryRuleset};
use anatomy::comparison::{
    compare, match_reference, CompareOptions, ComparisonReport, MatchReport, ReferenceArchitecture,
    SystemView, DEFAULT_FUZZY_THRESHOLD, DEFAULT_IDLE_THRESHOLD,
};
use anatomy::emit::{emit_dot, emit_json, emit_top, DotOptions, DEFAULT_THRESHOLD};
use anatomy::includes::{
    aggregate_dirs, find_cycles, scan_includes, IncludeGraph, DEFAULT_EXTENSIONS,
};
use anatomy::profile::{parse_profile, Profile};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{fraction, CliConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "anatomy",
    version,
    about = "Explore the architecture of a program through its Callgrind profile"
)]
struct Cli {
    /// TOML file with default option values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a profile.
    Inspect { profile: PathBuf },
    /// Render a call graph as DOT or JSON.
    Graph {
        profile: PathBuf,
        #[arg(long, value_enum, default_value = "class")]
        level: LevelArg,
        #[command(flatten)]
        rules: RulesetArgs,
        #[command(flatten)]
        dot: DotArgs,
        #[arg(long, value_enum)]
        format: Option<GraphFormat>,
    },
    /// List the costliest functions.
    Top {
        profile: PathBuf,
        #[arg(short = 'n', long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value = "self")]
        kind: KindArg,
        /// Event name or index.
        #[arg(long)]
        event: Option<String>,
    },
    /// Match a profile against a reference architecture.
    Match {
        profile: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        fuzzy_threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "class")]
        level: LevelArg,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
    },
    /// Compare the anatomy of two programs.
    Compare {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "class")]
        level: LevelArg,
        #[command(flatten)]
        rules: RulesetArgs,
        #[arg(long)]
        fuzzy_threshold: Option<f64>,
        #[arg(long)]
        idle_threshold: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
    },
    /// Extract the #include graph of a source tree.
    Includes {
        root: PathBuf,
        /// File extensions to scan; repeatable.
        #[arg(long = "ext")]
        extensions: Vec<String>,
        /// Include directory, relative to the root; repeatable.
        #[arg(short = 'I', long = "include-dir")]
        include_dirs: Vec<PathBuf>,
        /// Group files by this many leading directories.
        #[arg(long)]
        depth: Option<usize>,
        /// Keep unresolved includes as one extra node when grouping.
        #[arg(long)]
        include_unresolved: bool,
        #[arg(long, value_enum)]
        format: Option<IncludeFormat>,
    },
}

#[derive(Args)]
struct RulesetArgs {
    /// Category rules (TOML); the built-in rules otherwise.
    #[arg(long)]
    ruleset: Option<PathBuf>,
}

#[derive(Args)]
struct DotArgs {
    /// Minimum inclusive share of the total, between 0 and 1.
    #[arg(long)]
    threshold: Option<f64>,
    /// Maximum hops from the entry point.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Event name or index used for shares.
    #[arg(long)]
    event: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Function,
    Class,
    File,
    Category,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "self")]
    SelfCost,
    Inclusive,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum IncludeFormat {
    Text,
    Json,
    Dot,
}

fn parse_format<T: ValueEnum>(
    flag: Option<T>,
    config: &CliConfig,
    default: T,
) -> Result<T, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match &config.format {
        None => Ok(default),
        Some(name) => T::from_str(name, true).map_err(|_| {
            CliError::Config(format!("format `{name}` is not valid for this command"))
        }),
    }
}

fn load_profile(path: &Path) -> Result<Profile, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open `{}`: {e}", path.display())))?;
    parse_profile(BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_ruleset(flag: Option<&Path>, config: &CliConfig) -> Result<CategoryRuleset, CliError> {
    let Some(path) = flag.or(config.ruleset.as_deref()) else {
        return Ok(CategoryRuleset::default_rules());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read ruleset `{}`: {e}", path.display())))?;
    CategoryRuleset::from_toml(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn event_index(name: Option<&str>, graph: &CallGraph) -> Result<usize, CliError> {
    let Some(name) = name else { return Ok(0) };
    let events = graph.events();
    if let Some(i) = events.index_of(name) {
        return Ok(i);
    }
    match name.parse::<usize>() {
        Ok(i) if i < events.len() => Ok(i),
        _ => Err(CliError::Config(format!(
            "unknown event `{name}`; the profile has {}",
            events.names.join(", ")
        ))),
    }
}

fn level_of(arg: LevelArg) -> Level {
    match arg {
        LevelArg::Function => Level::Function,
        LevelArg::Class => Level::Class,
        LevelArg::File => Level::File,
        LevelArg::Category => Level::Category,
    }
}

/// Aggregated, categorized view; category level regroups the class view.
fn abstract_view(graph: &CallGraph, level: LevelArg, rules: &CategoryRuleset) -> AbstractGraph {
    match level {
        LevelArg::Category => {
            categorize(&aggregate(graph, Level::Class), rules).regroup_by_category()
        }
        other => categorize(&aggregate(graph, level_of(other)), rules),
    }
}

fn system_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_inspect(profile: &Path) -> Result<String, CliError> {
    let p = load_profile(profile)?;
    let g = build_graph(&p);
    let mut out = String::new();
    for (k, v) in &p.header {
        for line in v.lines() {
            writeln!(out, "{k}: {line}").unwrap();
        }
    }
    writeln!(out, "events: {}", p.events.names.join(" ")).unwrap();
    let mut summary = format!(
        "functions: {}, calls: {}",
        p.functions.len(),
        g.edges().len()
    );
    let total = p.total();
    for (i, name) in p.events.names.iter().enumerate() {
        write!(summary, ", total {name}: {}", total.get(i)).unwrap();
    }
    writeln!(out, "{summary}").unwrap();
    Ok(out)
}

fn dot_options(
    args: &DotArgs,
    config: &CliConfig,
    graph: &CallGraph,
) -> Result<DotOptions, CliError> {
    let mut options = DotOptions {
        threshold: fraction(
            "threshold",
            args.threshold
                .or(config.threshold)
                .unwrap_or(DEFAULT_THRESHOLD),
        )?,
        max_depth: args.max_depth.or(config.max_depth),
        event_index: event_index(args.event.as_deref().or(config.event.as_deref()), graph)?,
        ..DotOptions::default()
    };
    options.color_map.extend(config.colors.clone());
    Ok(options)
}

fn cmd_graph(
    profile: &Path,
    level: LevelArg,
    rules: &RulesetArgs,
    dot: &DotArgs,
    format: Option<GraphFormat>,
    config: &CliConfig,
) -> Result<String, CliError> {
    let format = parse_format(format, config, GraphFormat::Dot)?;
    let ruleset = load_ruleset(rules.ruleset.as_deref(), config)?;
    let graph = build_graph(&load_profile(profile)?);
    let options = dot_options(dot, config, &graph)?;
    Ok(match (format, level) {
        (GraphFormat::Json, LevelArg::Function) => emit_json(&graph),
        (GraphFormat::Json, _) => emit_json(&abstract_view(&graph, level, &ruleset)),
        (GraphFormat::Dot, _) => emit_dot(&abstract_view(&graph, level, &ruleset), &options),
    })
}

fn cmd_top(
    profile: &Path,
    n: usize,
    kind: KindArg,
    event: Option<&str>,
    config: &CliConfig,
) -> Result<String, CliError> {
    if n == 0 {
        return Err(CliError::Config("-n must be at least 1".into()));
    }
    let graph = build_graph(&load_profile(profile)?);
    let event = event_index(event.or(config.event.as_deref()), &graph)?;
    let kind = match kind {
        KindArg::SelfCost => CostKind::SelfCost,
        KindArg::Inclusive => CostKind::Inclusive,
    };
    Ok(emit_top(&graph, n, kind, event))
}

fn fuzzy(value: Option<f64>, config: &CliConfig) -> Result<f64, CliError> {
    let v = value
        .or(config.fuzzy_threshold)
        .unwrap_or(DEFAULT_FUZZY_THRESHOLD);
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "fuzzy threshold must be in (0, 1], got {v}"
        )))
    }
}

fn match_text(report: &MatchReport) -> String {
    let mut out = format!("reference: {}\n", report.reference);
    let width = report
        .results
        .iter()
        .map(|r| r.component.len())
        .max()
        .unwrap_or(0)
        .max(9);
    for r in &report.results {
        let label = r.matched_label.as_deref().unwrap_or("-");
        write!(
            out,
            "{:width$}  {:15}  {label}",
            r.component,
            r.tier.as_str()
        )
        .unwrap();
        if r.matched_label.is_some() {
            write!(out, "  score {}  [{}]", r.score, r.evidence.join(", ")).unwrap();
        }
        out.push('\n');
    }
    let unmatched = report.unmatched().count();
    writeln!(
        out,
        "matched {} of {} components",
        report.results.len() - unmatched,
        report.results.len()
    )
    .unwrap();
    out
}

fn cmd_match(
    profile: &Path,
    reference: Option<&Path>,
    fuzzy_threshold: Option<f64>,
    level: LevelArg,
    format: Option<ReportFormat>,
    config: &CliConfig,
) -> Result<String, CliError> {
    let format = parse_format(format, config, ReportFormat::Text)?;
    let threshold = fuzzy(fuzzy_threshold, config)?;
    let path = reference
        .or(config.reference.as_deref())
        .ok_or_else(|| CliError::Config("no reference architecture given (--reference)".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read reference `{}`: {e}", path.display()))
    })?;
    let reference = ReferenceArchitecture::from_toml(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let graph = build_graph(&load_profile(profile)?);
    let view = match level {
        LevelArg::Function => aggregate(&graph, Level::Function),
        LevelArg::Category => categorize(
            &aggregate(&graph, Level::Class),
            &CategoryRuleset::default_rules(),
        )
        .regroup_by_category(),
        other => aggregate(&graph, level_of(other)),
    };
    let report = MatchReport {
        reference: reference.name.clone(),
        results: match_reference(&view, &reference, threshold),
    };
    Ok(match format {
        ReportFormat::Json => emit_json(&report),
        ReportFormat::Text => match_text(&report),
    })
}

fn list(out: &mut String, title: &str, items: &[String]) {
    writeln!(out, "{title}:").unwrap();
    if items.is_empty() {
        out.push_str("  (none)\n");
    }
    for i in items {
        writeln!(out, "  {i}").unwrap();
    }
}

fn compare_text(r: &ComparisonReport) -> String {
    let mut out = format!("{} vs {}\n", r.left, r.right);
    writeln!(out, "common:").unwrap();
    if r.common.is_empty() {
        out.push_str("  (none)\n");
    }
    for c in &r.common {
        writeln!(
            out,
            "  {} <-> {} ({}; {} / {})",
            c.left,
            c.right,
            c.tier.as_str(),
            c.left_category,
            c.right_category
        )
        .unwrap();
    }
    list(&mut out, &format!("only in {}", r.left), &r.only_left);
    list(&mut out, &format!("only in {}", r.right), &r.only_right);
    list(&mut out, "categories in both", &r.categories.common);
    list(
        &mut out,
        &format!("categories only in {}", r.left),
        &r.categories.only_left,
    );
    list(
        &mut out,
        &format!("categories only in {}", r.right),
        &r.categories.only_right,
    );
    writeln!(out, "order in {}: {}", r.left, r.left_order.join(" -> ")).unwrap();
    writeln!(out, "order in {}: {}", r.right, r.right_order.join(" -> ")).unwrap();
    let inversions: Vec<String> = r
        .order_inversions
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect();
    list(&mut out, "order inversions", &inversions);
    list(&mut out, "notes", &r.notes);
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    left: &Path,
    right: &Path,
    level: LevelArg,
    rules: &RulesetArgs,
    fuzzy_threshold: Option<f64>,
    idle_threshold: Option<f64>,
    format: Option<ReportFormat>,
    config: &CliConfig,
) -> Result<String, CliError> {
    let format = parse_format(format, config, ReportFormat::Text)?;
    let options = CompareOptions {
        fuzzy_threshold: fuzzy(fuzzy_threshold, config)?,
        idle_threshold: fraction(
            "idle threshold",
            idle_threshold
                .or(config.idle_threshold)
                .unwrap_or(DEFAULT_IDLE_THRESHOLD),
        )?,
    };
    let ruleset = load_ruleset(rules.ruleset.as_deref(), config)?;
    let level = match level {
        LevelArg::Category => {
            return Err(CliError::Config(
                "compare works on function, class or file level".into(),
            ))
        }
        other => level_of(other),
    };
    let mut systems = Vec::new();
    for path in [left, right] {
        let graph = build_graph(&load_profile(path)?);
        let view = SystemView::from_call_graph(system_name(path), &graph, level, &ruleset)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        systems.push(view);
    }
    let report =
        compare(&systems[0], &systems[1], &options).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(match format {
        ReportFormat::Json => emit_json(&report),
        ReportFormat::Text => compare_text(&report),
    })
}

fn includes_text(graph: &IncludeGraph, cycles: &[Vec<String>]) -> String {
    let mut out = format!(
        "files: {}, includes: {}\n",
        graph.nodes.len(),
        graph.edges.len()
    );
    for e in &graph.edges {
        let kind = match e.kind {
            anatomy::includes::IncludeKind::Quoted => "quoted",
            anatomy::includes::IncludeKind::Angled => "angled",
        };
        match &e.resolved {
            Some(path) => writeln!(out, "{}:{} -> {path} ({kind})", e.includer, e.line).unwrap(),
            None => writeln!(
                out,
                "{}:{} -> {} ({kind}, unresolved)",
                e.includer, e.line, e.name
            )
            .unwrap(),
        }
    }
    let cycles: Vec<String> = cycles.iter().map(|c| c.join(" -> ")).collect();
    list(&mut out, "cycles", &cycles);
    out
}

fn cmd_includes(
    root: &Path,
    extensions: &[String],
    include_dirs: &[PathBuf],
    depth: Option<usize>,
    include_unresolved: bool,
    format: Option<IncludeFormat>,
    config: &CliConfig,
) -> Result<String, CliError> {
    let format = parse_format(format, config, IncludeFormat::Text)?;
    if depth == Some(0) {
        return Err(CliError::Config("--depth must be at least 1".into()));
    }
    let extensions: Vec<String> = if extensions.is_empty() {
        DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect()
    } else {
        extensions.to_vec()
    };
    let graph = scan_includes(root, &extensions, include_dirs).map_err(|e| match e {
        anatomy::includes::IncludeError::Root { .. } => CliError::Input(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    for d in &graph.diagnostics {
        eprintln!("warning: {}: {}", d.path, d.message);
    }
    let grouped = depth.map(|d| aggregate_dirs(&graph, d, include_unresolved));
    Ok(match (format, grouped) {
        (IncludeFormat::Json, None) => emit_json(&graph),
        (IncludeFormat::Json, Some(g)) => emit_json(&g),
        (IncludeFormat::Dot, grouped) => {
            let g =
                grouped.unwrap_or_else(|| aggregate_dirs(&graph, usize::MAX, include_unresolved));
            emit_dot(&g, &DotOptions::with_threshold(0.0))
        }
        (IncludeFormat::Text, None) => includes_text(&graph, &find_cycles(&graph)),
        (IncludeFormat::Text, Some(g)) => {
            let mut out = String::new();
            for e in g.edges() {
                writeln!(out, "{} -> {} ({})", e.source, e.target, e.count).unwrap();
            }
            out
        }
    })
}

fn run(cli: Cli) -> Result<String, CliError> {
    let config = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    match cli.command {
        Command::Inspect { profile } => cmd_inspect(&profile),
        Command::Graph {
            profile,
            level,
            rules,
            dot,
            format,
        } => cmd_graph(&profile, level, &rules, &dot, format, &config),
        Command::Top {
            profile,
            count,
            kind,
            event,
        } => cmd_top(&profile, count, kind, event.as_deref(), &config),
        Command::Match {
            profile,
            reference,
            fuzzy_threshold,
            level,
            format,
        } => cmd_match(
            &profile,
            reference.as_deref(),
            fuzzy_threshold,
            level,
            format,
            &config,
        ),
        Command::Compare {
            left,
            right,
            level,
            rules,
            fuzzy_threshold,
            idle_threshold,
            format,
        } => cmd_compare(
            &left,
            &right,
            level,
            &rules,
            fuzzy_threshold,
            idle_threshold,
            format,
            &config,
        ),
        Command::Includes {
            root,
            extensions,
            include_dirs,
            depth,
            include_unresolved,
            format,
        } => cmd_includes(
            &root,
            &extensions,
            &include_dirs,
            depth,
            include_unresolved,
            format,
            &config,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
