use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;

use urbansense::gazetteer::{filter_by_context, geoparse, load_gazetteer, match_candidates, ToponymMatch};
use urbansense::ingestion::{
    parse_event_log, replay, synthesize_scenario, EventLog, GroundTruth, ReplayMode, ScenarioSpec, SleepPacer,
};
use urbansense::model::time::{format_iso, parse_flexible};
use urbansense::pipeline::{parse_event, read_text, Pipeline};
use urbansense::report::{export_surface, report, run_batch};
use urbansense::service::{bind, serve, Service, ServiceConfig, ServiceSink};

/// Enrichment and live analytics for geo-tagged social message streams.
///
/// Resource paths and engine settings come from the JSON file named by
/// URBANSENSE_CONFIG; the embedded fixtures are used otherwise.
#[derive(Debug, Parser)]
#[command(name = "urbansense", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate a synthetic scenario log and its ground truth.
    Synth {
        #[arg(long, value_name = "F")]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        #[arg(long, value_name = "L")]
        out: PathBuf,
        #[arg(long, value_name = "T")]
        truth: PathBuf,
    },
    /// Replay a log into live analytics, optionally serving the HTTP API.
    #[command(group(ArgGroup::new("pace").args(["speed", "instant"])))]
    Replay {
        #[arg(long = "in", value_name = "L")]
        input: PathBuf,
        /// Simulated-time multiplier.
        #[arg(long, value_name = "S", value_parser = parse_speed)]
        speed: Option<f64>,
        #[arg(long)]
        instant: bool,
        #[arg(long, value_name = "ADDR")]
        serve: Option<String>,
    },
    /// Run the full pipeline over a log and write a JSON report.
    Analyze {
        #[arg(long = "in", value_name = "L")]
        input: PathBuf,
        #[arg(long, value_name = "E")]
        event: PathBuf,
        #[arg(long, value_name = "R")]
        report: PathBuf,
        #[arg(long, value_name = "T")]
        truth: Option<PathBuf>,
    },
    /// Print the toponyms found in a text.
    Geocode {
        #[arg(long, value_name = "G")]
        gazetteer: PathBuf,
        #[arg(long, value_name = "S")]
        text: String,
    },
    /// Write the heat surface of one window as JSON.
    ExportSurface {
        #[arg(long = "in", value_name = "L")]
        input: PathBuf,
        /// Any instant inside the window, ISO-8601 or epoch seconds.
        #[arg(long, value_name = "W")]
        window: String,
        #[arg(long, value_name = "J")]
        out: PathBuf,
    },
    /// Start the HTTP service.
    Serve {
        /// Persistence directory; state is in memory only without it.
        #[arg(long, value_name = "DIR")]
        store: Option<PathBuf>,
    },
}

fn parse_speed(raw: &str) -> Result<f64, String> {
    let v: f64 = raw.parse().map_err(|_| format!("`{raw}` is not a number"))?;
    ReplayMode::Speed(v).validate().map_err(|e| e.to_string())?;
    Ok(v)
}

type Failure = Box<dyn std::error::Error + Send + Sync>;

fn config() -> Result<ServiceConfig, Failure> {
    Ok(ServiceConfig::from_env()?)
}

fn read_log(path: &Path) -> Result<EventLog, Failure> {
    let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_event_log(BufReader::new(f)).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let f = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn synth(scenario: &Path, seed: Option<u64>, out: &Path, truth: &Path) -> Result<(), Failure> {
    let mut spec = ScenarioSpec::from_json(&read_text(scenario)?)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let (log, gt) = synthesize_scenario(&spec)?;
    let f = File::create(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let mut w = BufWriter::new(f);
    log.write_jsonl(&mut w)?;
    w.flush()?;
    write_json(truth, &gt)?;
    eprintln!("wrote {} messages to {}", log.len(), out.display());
    Ok(())
}

async fn shutdown_signal() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        log::error!("cannot listen for ctrl-c: {e}");
        std::future::pending::<()>().await;
    }
}

#[derive(Serialize)]
struct ReplaySummary {
    delivered: usize,
    final_time: Option<String>,
    last_seq: u64,
}

async fn run_replay(input: &Path, mode: ReplayMode, addr: Option<String>) -> Result<(), Failure> {
    let log = read_log(input)?;
    let svc = Arc::new(Service::new(&config()?)?);
    let server = match addr {
        Some(addr) => {
            let listener = bind(&addr).await?;
            eprintln!("serving on http://{}", listener.local_addr()?);
            Some(tokio::spawn(serve(svc.clone(), listener, shutdown_signal())))
        }
        None => None,
    };
    let feeder = svc.clone();
    let rep = tokio::task::spawn_blocking(move || replay(&log, mode, &mut ServiceSink(&feeder), &mut SleepPacer))
        .await??;
    svc.submit(urbansense::service::Command::Finish)?;
    print_json(&ReplaySummary {
        delivered: rep.delivered,
        final_time: rep.final_time.map(format_iso),
        last_seq: svc.read(|s| s.last_seq()),
    })?;
    if let Some(server) = server {
        eprintln!("replay finished; serving until interrupted");
        server.await??;
    }
    Ok(())
}

fn analyze(input: &Path, event: &Path, out: &Path, truth: Option<&Path>) -> Result<(), Failure> {
    let cfg = config()?.pipeline;
    let ev = parse_event(&read_text(event)?)?;
    let pipeline = Pipeline::new(cfg.enricher_for(ev)?, cfg.engine.clone())?;
    let truth: Option<GroundTruth> = match truth {
        Some(p) => Some(serde_json::from_str(&read_text(p)?).map_err(|e| format!("{}: {e}", p.display()))?),
        None => None,
    };
    let log = read_log(input)?;
    let run = run_batch(&log, pipeline)?;
    let r = report(&run, truth.as_ref());
    write_json(out, &r)?;
    match r.truth.as_ref().and_then(|t| t.precision) {
        Some(p) => eprintln!("{} messages, {} accepted, precision {p:.4}", r.messages, r.accepted),
        None => eprintln!("{} messages, {} accepted", r.messages, r.accepted),
    }
    Ok(())
}

#[derive(Serialize)]
struct GeocodeOutput {
    matches: Vec<ToponymMatch>,
    best: Option<String>,
}

fn geocode(gazetteer: &Path, text: &str) -> Result<(), Failure> {
    let f = File::open(gazetteer).map_err(|e| format!("{}: {e}", gazetteer.display()))?;
    let g = load_gazetteer(BufReader::new(f))?;
    let ctx = config()?.pipeline.context;
    let matches = filter_by_context(match_candidates(text, &g), text, &g, &ctx);
    let best = geoparse(text, &g, &ctx).map(|e| e.id.clone());
    print_json(&GeocodeOutput { matches, best })
}

fn export(input: &Path, window: &str, out: &Path) -> Result<(), Failure> {
    let at = parse_flexible(window)?;
    let pipeline = Pipeline::from_config(&config()?.pipeline)?;
    let surface = export_surface(&read_log(input)?, pipeline, at)?;
    write_json(out, &surface)
}

async fn run_serve(store: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = config()?;
    let svc = match store {
        Some(dir) => {
            let (svc, warnings) = Service::open(&cfg, &dir)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            svc
        }
        None => Service::new(&cfg)?,
    };
    let svc = Arc::new(svc);
    let listener = bind(&cfg.listen).await?;
    eprintln!("serving on http://{}", listener.local_addr()?);
    serve(svc.clone(), listener, shutdown_signal()).await?;
    svc.checkpoint()?;
    Ok(())
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Cmd::Synth { scenario, seed, out, truth } => synth(&scenario, seed, &out, &truth),
        Cmd::Replay { input, speed, instant: _, serve } => {
            let mode = speed.map_or(ReplayMode::Instant, ReplayMode::Speed);
            runtime()?.block_on(run_replay(&input, mode, serve))
        }
        Cmd::Analyze { input, event, report, truth } => analyze(&input, &event, &report, truth.as_deref()),
        Cmd::Geocode { gazetteer, text } => geocode(&gazetteer, &text),
        Cmd::ExportSurface { input, window, out } => export(&input, &window, &out),
        Cmd::Serve { store } => runtime()?.block_on(run_serve(store)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 and usage on bad flags
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
