use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use mapfe::bench::{format_summary, gen_instance, parse_config, run_suite_with, summarize, write_csv, InstanceSpec};
use mapfe::model::{parse_map, parse_scenario, write_map, write_scenario, Instance};
use mapfe::oracle::oracle_solve;
use mapfe::path::{parse_plan, write_plan};
use mapfe::{validate, SolveError, SolverConfig};

const EXIT_FAILED: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "mapfe", version, about = "Optimal multi-agent path finding with elevators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the plan
    Solve {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scen: PathBuf,
        /// Range boarding constraints
        #[arg(long, value_enum, default_value = "on")]
        ec: Switch,
        /// Decision-diagram conflict selection and bypassing
        #[arg(long, value_enum, default_value = "on")]
        mdde: Switch,
        /// Seconds before giving up
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Also write the plan to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random instance
    Gen {
        #[arg(long, default_value_t = 8)]
        width: u16,
        #[arg(long, default_value_t = 8)]
        height: u16,
        #[arg(long, default_value_t = 0.1)]
        obstacle_rate: f64,
        #[arg(long, default_value_t = 2)]
        floors: u16,
        #[arg(long, default_value_t = 3)]
        elevators: usize,
        #[arg(long, default_value_t = 3)]
        tfloor: u32,
        #[arg(long, default_value_t = 4)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output map file
        #[arg(long)]
        map: PathBuf,
        /// Output scenario file
        #[arg(long)]
        scen: PathBuf,
    },
    /// Run an experiment configuration and write the results as CSV
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a plan file against an instance
    Validate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scen: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Exact optimum by joint-state search (small instances only)
    Oracle {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scen: PathBuf,
        /// Latest time step considered
        #[arg(long, default_value_t = 100)]
        horizon: u32,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.render().to_string().contains("Usage:") {
                let mut cmd = Cli::command();
                cmd.build();
                let usage = match std::env::args().nth(1).and_then(|name| cmd.find_subcommand_mut(&name)) {
                    Some(sub) => sub.render_usage(),
                    None => cmd.render_usage(),
                };
                eprintln!("\n{usage}");
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut stdout = io::stdout().lock();
    match run(cli.command, &mut stdout).and_then(|code| Ok(stdout.flush().map(|_| code)?)) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn load(map: &PathBuf, scen: &PathBuf) -> Result<Instance> {
    let map_text = fs::read_to_string(map).with_context(|| format!("reading {}", map.display()))?;
    let graph = parse_map(&map_text).with_context(|| format!("parsing {}", map.display()))?;
    let scen_text = fs::read_to_string(scen).with_context(|| format!("reading {}", scen.display()))?;
    parse_scenario(&scen_text, graph).with_context(|| format!("parsing {}", scen.display()))
}

fn run(command: Command, stdout: &mut impl Write) -> Result<u8> {
    match command {
        Command::Solve { map, scen, ec, mdde, time_limit, out } => {
            if !(time_limit.is_finite() && time_limit > 0.0) {
                eprintln!("error: --time-limit must be a positive number of seconds");
                return Ok(EXIT_USAGE);
            }
            let instance = load(&map, &scen)?;
            let config = SolverConfig {
                ec_enabled: ec.is_on(),
                mdde_enabled: mdde.is_on(),
                time_limit: Duration::from_secs_f64(time_limit),
                ..SolverConfig::default()
            };
            match mapfe::solve(&instance, config) {
                Ok(solution) => {
                    let plan = write_plan(&solution.paths);
                    writeln!(stdout, "soc {}", solution.soc)?;
                    write!(stdout, "{plan}")?;
                    let s = &solution.stats;
                    writeln!(
                        stdout,
                        "variant {} expanded {} generated {} runtime_ms {:.1} mdde_time_fraction {:.3} bypasses {}",
                        config.variant_name(),
                        s.expanded,
                        s.generated,
                        s.runtime.as_secs_f64() * 1000.0,
                        s.mdde_time_fraction,
                        s.bypasses
                    )?;
                    if let Some(out) = out {
                        fs::write(&out, plan).with_context(|| format!("writing {}", out.display()))?;
                    }
                    Ok(0)
                }
                Err(e) => {
                    let s = e.stats();
                    writeln!(stdout, "{e} after {} expansions", s.expanded)?;
                    Ok(match e {
                        SolveError::Timeout(_) => EXIT_TIMEOUT,
                        SolveError::Infeasible(_) => EXIT_FAILED,
                    })
                }
            }
        }
        Command::Gen { width, height, obstacle_rate, floors, elevators, tfloor, agents, seed, map, scen } => {
            let spec = InstanceSpec { width, height, obstacle_rate, floors, elevators, t_floor: tfloor, agents };
            let instance = gen_instance(&spec, seed)?;
            fs::write(&map, write_map(&instance.graph)).with_context(|| format!("writing {}", map.display()))?;
            fs::write(&scen, write_scenario(&instance)).with_context(|| format!("writing {}", scen.display()))?;
            Ok(0)
        }
        Command::Bench { config, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = parse_config(&text).with_context(|| format!("parsing {}", config.display()))?;
            let records = run_suite_with(&cfg, |r| {
                tracing::info!(variant = %r.variant, n = r.agents, seed = r.seed, solved = r.solved, "run finished");
            })?;
            let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_csv(&records, file)?;
            write!(stdout, "{}", format_summary(&summarize(&records)))?;
            Ok(0)
        }
        Command::Validate { map, scen, plan } => {
            let instance = load(&map, &scen)?;
            let text = fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let paths = parse_plan(&text).with_context(|| format!("parsing {}", plan.display()))?;
            if paths.len() != instance.agents.len() {
                writeln!(stdout, "plan has {} agents, scenario has {}", paths.len(), instance.agents.len())?;
                return Ok(EXIT_FAILED);
            }
            match validate(&instance, &paths) {
                Err(e) => {
                    writeln!(stdout, "invalid path: {e}")?;
                    Ok(EXIT_FAILED)
                }
                Ok(conflicts) if conflicts.is_empty() => {
                    let soc: u64 = paths.iter().map(|p| p.cost() as u64).sum();
                    writeln!(stdout, "OK soc {soc}")?;
                    Ok(0)
                }
                Ok(conflicts) => {
                    for c in &conflicts {
                        writeln!(stdout, "{c}")?;
                    }
                    Ok(EXIT_FAILED)
                }
            }
        }
        Command::Oracle { map, scen, horizon } => {
            let instance = load(&map, &scen)?;
            match oracle_solve(&instance, horizon) {
                Some(best) => {
                    writeln!(stdout, "soc {}", best.soc)?;
                    write!(stdout, "{}", write_plan(&best.paths))?;
                    Ok(0)
                }
                None => {
                    writeln!(stdout, "no plan within horizon {horizon}")?;
                    Ok(EXIT_FAILED)
                }
            }
        }
    }
}
