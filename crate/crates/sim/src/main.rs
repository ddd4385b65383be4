use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use starcrs_core::baselines::{evaluate_scheme, EvalOptions, Scheme};
use starcrs_core::channel::Scenario;
use starcrs_core::conic::ClarabelSolver;
use starcrs_core::record::Algorithm;
use starcrs_core::sca::{active_program, passive_program, Problem};
use starcrs_sim::config::SimConfig;
use starcrs_sim::formats::{read_scenario, record_to_json, write_program, write_scenario};
use starcrs_sim::plan::{run_plan, worker_count};
use starcrs_sim::table::{compare_tables, figure_tables, gains_over, summarize, write_rows, ResultTable};

/// Max-min fair STAR-RIS cooperative rate splitting simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize one scheme on one channel realization and print the record as JSON.
    Run {
        #[arg(long, default_value = "CRS-FE")]
        scheme: String,
        #[arg(long, default_value = "ao")]
        algorithm: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long)]
        snr_db: Option<f64>,
        /// Use the realization of a scenario file instead of drawing one.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the first passive and active convex programs here (prefix).
        #[arg(long)]
        dump_programs: Option<PathBuf>,
    },
    /// Run the full plan of the configuration, resuming an existing output file.
    Sweep {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
        /// Worker threads (default: STARCRS_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Gains of table A over table B, paired by cell.
    Compare { a: PathBuf, b: PathBuf },
    /// Per-cell statistics, gains over a reference and figure tables.
    Summarize {
        table: PathBuf,
        #[arg(long, default_value = "SDMA-ES")]
        reference: String,
        /// Directory for summary.csv, gains.csv and figure_*.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Draw a realization and write it as a plain-text scenario file.
    ExportChannels {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long, default_value = "FE")]
        mode: String,
        output: PathBuf,
    },
    /// Read a scenario file, check it and print its dimensions.
    ImportChannels { input: PathBuf },
}

fn load_config(path: Option<&Path>) -> anyhow::Result<SimConfig> {
    match path {
        Some(p) => SimConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(SimConfig::default()),
    }
}

fn print_csv<T: serde::Serialize>(rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Run { scheme, algorithm, seed, elements, snr_db, scenario, dump_programs } => {
            let scheme: Scheme = scheme.parse()?;
            let algorithm: Algorithm = algorithm.parse()?;
            if let Some(n) = elements {
                cfg.system.elements = n;
            }
            if snr_db.is_some() {
                cfg.system.snr_db = snr_db;
            }
            cfg.validate()?;
            let (config, channels) = match scenario {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    read_scenario(&text)?
                }
                None => {
                    let s = Scenario::draw(seed, &cfg.scenario_spec(None)?)?;
                    (s.config, s.channels)
                }
            };
            if let Some(prefix) = dump_programs {
                let pr = scheme.problem(&config, &channels)?;
                let init = pr.initial_point(seed);
                dump(&prefix, "passive", &write_program(&passive_program(&pr, &init, cfg.ao.penalty)))?;
                dump(&prefix, "active", &write_program(&active_program(&pr, &init)))?;
            }
            let opts = EvalOptions { ao: cfg.ao_options(), fast: cfg.fast_options() };
            let rec =
                evaluate_scheme(scheme, algorithm, &config, &channels, seed, &opts, &[], &ClarabelSolver::default())?;
            println!("{}", record_to_json(&rec));
        }
        Cmd::Sweep { output, seeds, schemes, values, algorithms, workers } => {
            if let Some(o) = output {
                cfg.plan.output = o;
            }
            if let Some(s) = seeds {
                cfg.plan.seeds = s;
            }
            if let Some(s) = schemes {
                cfg.plan.schemes = s;
            }
            if let Some(v) = values {
                cfg.plan.values = v;
            }
            if let Some(a) = algorithms {
                cfg.plan.algorithms = a;
            }
            let plan = cfg.plan()?;
            let workers = workers.unwrap_or_else(worker_count);
            let table = run_plan(&plan, workers)?;
            let failed = table.rows.iter().filter(|r| !r.is_ok()).count();
            eprintln!("{} rows in {} ({failed} failed)", table.rows.len(), plan.output.display());
            print_csv(&summarize(&table)?)?;
        }
        Cmd::Compare { a, b } => {
            let ta = ResultTable::read_csv(&a)?;
            let tb = ResultTable::read_csv(&b)?;
            print_csv(&compare_tables(&ta, &tb)?)?;
        }
        Cmd::Summarize { table, reference, out_dir } => {
            let t = ResultTable::read_csv(&table)?;
            let summary = summarize(&t)?;
            let gains = gains_over(&t, &reference).unwrap_or_default();
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    write_rows(&dir.join("summary.csv"), &summary)?;
                    write_rows(&dir.join("gains.csv"), &gains)?;
                    for (name, text) in figure_tables(&summary) {
                        std::fs::write(dir.join(name), text)?;
                    }
                }
                None => {
                    print_csv(&summary)?;
                    println!();
                    print_csv(&gains)?;
                }
            }
        }
        Cmd::ExportChannels { seed, elements, mode, output } => {
            if let Some(n) = elements {
                cfg.system.elements = n;
            }
            let mut spec = cfg.scenario_spec(None)?;
            spec.mode = mode.parse()?;
            let s = Scenario::draw(seed, &spec)?;
            std::fs::write(&output, write_scenario(&s.config, &s.channels))
                .with_context(|| format!("writing {}", output.display()))?;
        }
        Cmd::ImportChannels { input } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let (config, channels) = read_scenario(&text)?;
            Problem::new(config.clone(), channels)?;
            println!(
                "mode {} L {} K {} N {} relays {:?} reflect {:?} transmit {:?}",
                config.mode.name(),
                config.antennas,
                config.users,
                config.elements,
                config.relay_users,
                config.reflect_users,
                config.transmit_users
            );
        }
    }
    Ok(())
}

fn dump(prefix: &Path, kind: &str, text: &str) -> anyhow::Result<()> {
    let path = PathBuf::from(format!("{}.{kind}.txt", prefix.display()));
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
