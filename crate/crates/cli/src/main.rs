use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qmatch::experiments::{self, ExperimentConfig, Metric};
use qmatch::{Graph, MatchConfig, QueryModel};

#[derive(Parser)]
#[command(name = "qmatch", version, about = "Maximum matching through edge queries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Match one graph file and report queries and guesses.
    Solve {
        graph: PathBuf,
        #[arg(long, default_value = "matrix")]
        model: QueryModel,
        /// Fixes the neighbor order of every adjacency list.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full result, event logs included, as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Stop phase 1 right at the first tree-joining edge.
        #[arg(long)]
        stop_at_first: bool,
    },
    /// Run a TOML-configured batch and write CSV rows.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config. `-` means stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print power-law fits of the medians to stderr.
        #[arg(long)]
        fit: bool,
    },
    /// Compare against the exhaustive optimum on random small graphs.
    Verify {
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Solve {
            graph,
            model,
            seed,
            json,
            stop_at_first,
        } => solve(&graph, model, seed, json.as_deref(), stop_at_first),
        Cmd::Sweep { config, csv, fit } => sweep(&config, csv, fit),
        Cmd::Verify { n_max, trials, json } => verify(n_max, trials, json.as_deref()),
    }
}

fn solve(path: &Path, model: QueryModel, seed: u64, json: Option<&Path>, stop_at_first: bool) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = Graph::parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))?;
    let cfg = MatchConfig {
        complete_level: !stop_at_first,
        record_events: json.is_some(),
    };
    let r = qmatch::solve(&g, model, seed, cfg)?;
    if let Some(out) = json {
        let mut body = r.to_json()?;
        body.push('\n');
        fs::write(out, body).with_context(|| format!("writing {}", out.display()))?;
    }
    let rep = &r.report;
    println!(
        "model={} n={} m={} size={} phases={} T={} I={} bound={:.3}",
        model,
        g.vertex_count(),
        g.edge_count(),
        r.size(),
        r.phase_count,
        rep.t,
        rep.i,
        rep.bound
    );
    for e in r.matching.edges() {
        println!("{} {}", e.lo(), e.hi());
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(config: &Path, csv: Option<PathBuf>, fit: bool) -> Result<ExitCode> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg: ExperimentConfig = toml::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    let rows = experiments::run_experiment(&cfg)?;
    let target = csv.or_else(|| {
        cfg.output.as_ref().map(|o| {
            // Relative outputs live next to the config file.
            config.parent().unwrap_or(Path::new(".")).join(o)
        })
    });
    match target {
        Some(p) if p.as_os_str() != "-" => {
            experiments::write_csv_file(&rows, &p)?;
            eprintln!("{} rows -> {}", rows.len(), p.display());
        }
        _ => experiments::write_csv(&rows, io::stdout().lock())?,
    }
    if fit {
        for model in &cfg.models {
            let sub: Vec<_> = rows.iter().filter(|r| r.model == *model).cloned().collect();
            for metric in [Metric::I, Metric::Bound, Metric::T, Metric::Phases] {
                match experiments::fit_scaling(&sub, metric) {
                    Ok(f) => eprintln!(
                        "{model} {metric:?}: exponent {:.3}, constant {:.3}, residual {:.3}",
                        f.exponent, f.constant, f.residual
                    ),
                    Err(e) => eprintln!("{model} {metric:?}: {e}"),
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(n_max: usize, trials: u64, json: Option<&Path>) -> Result<ExitCode> {
    let s = experiments::verify(n_max, trials)?;
    let mut out = io::stdout().lock();
    writeln!(out, "runs                 {}", s.runs)?;
    writeln!(out, "size mismatches      {}", s.size_mismatches)?;
    writeln!(out, "phase-1 cap breaches {}", s.phase1_violations)?;
    writeln!(out, "phase-2 cap breaches {}", s.phase2_violations)?;
    writeln!(out, "query cap breaches   {}", s.depth_violations)?;
    writeln!(out, "phase cap breaches   {}", s.phase_violations)?;
    writeln!(out, "matrix I mismatches  {}", s.identity_violations)?;
    writeln!(out, "growing sap lengths  {:.4}", s.increasing_fraction())?;
    writeln!(out, "worst I/n phase 1    {:.3}", s.worst_phase1_ratio)?;
    writeln!(out, "worst I/n phase 2    {:.3}", s.worst_phase2_ratio)?;
    if let Some(p) = json {
        fs::write(p, serde_json::to_string_pretty(&s)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    if s.passed() {
        writeln!(out, "PASS")?;
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(out, "FAIL")?;
        Ok(ExitCode::FAILURE)
    }
}
