//! `agentctl`: boot the stack, send prompts, run scenarios, read reports.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 scenario assertion or
//! task failure, 3 stack failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use agentic_core::config::DeploymentConfig;
use agentic_core::profile::LatencyProfile;
use agentic_core::scenario::{run_scenario, ScenarioOutcome, ScenarioSpec};
use agentic_core::stack::{stack_up, Stack};
use agentic_core::trace::{export_trace_table, render_table, Interface, LatencyReport, TraceEvent};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

// stdout may be a closed pipe (`agentctl trace show | head`); ignore that
macro_rules! out {
    ($($t:tt)*) => {{ let _ = write!(std::io::stdout(), $($t)*); }};
}
macro_rules! outln {
    ($($t:tt)*) => {{ let _ = writeln!(std::io::stdout(), $($t)*); }};
}

#[derive(Parser)]
#[command(name = "agentctl", version, about = "Agentic control plane for a simulated mobile core")]
struct Cli {
    /// Deployment config (TOML); built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Control endpoint of a running stack; derived from the config otherwise.
    #[arg(long, global = true)]
    control: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boot the stack and serve until Ctrl-C or `agentctl down`.
    Up {
        /// Latency profile: fast, paper-calibrated or a file.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Stop a stack started with `up`.
    Down,
    /// NF states, registrations and endpoints of a running stack.
    Status,
    /// Send one prompt to the Host Agent.
    Prompt {
        text: String,
        /// Use the running stack instead of booting one for this command.
        #[arg(long)]
        attach: bool,
        #[arg(long)]
        profile: Option<String>,
        /// Results directory; the config's otherwise.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Scenario commands.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Report commands.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
    /// Trace commands.
    Trace {
        #[command(subcommand)]
        command: TraceCommand,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Run a scenario file or built-in scenario.
    Run {
        scenario: String,
        #[arg(long)]
        repetitions: Option<u32>,
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        attach: bool,
    },
    /// List built-in scenarios.
    List,
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Latency breakdown of the latest prompt or scenario.
    Latency {
        #[arg(long)]
        attach: bool,
        #[arg(long)]
        results: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Trace table of the latest prompt or scenario.
    Show {
        /// Only rows of this interface (A2A, MCP, SBI, SYS).
        #[arg(long)]
        interface: Option<Interface>,
        #[arg(long)]
        attach: bool,
        #[arg(long)]
        results: Option<PathBuf>,
        /// Raw events as JSON lines.
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Usage(String),
    Assertion(String),
    Stack(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Usage(m) => (1, m),
            Failure::Assertion(m) => (2, m),
            Failure::Stack(m) => (3, m),
        };
        if !msg.is_empty() {
            eprintln!("agentctl: {msg}");
        }
        ExitCode::from(code)
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    config: DeploymentConfig,
    control: String,
}

impl Ctx {
    fn results(&self, overridden: Option<PathBuf>) -> PathBuf {
        overridden.unwrap_or_else(|| PathBuf::from(&self.config.results_dir))
    }

    fn http(&self) -> reqwest::Client {
        reqwest::Client::builder()
            .no_proxy()
            .build()
            .expect("static client configuration")
    }

    async fn get(&self, path: &str) -> Result<reqwest::Response, Failure> {
        self.http()
            .get(format!("{}{path}", self.control))
            .send()
            .await
            .map_err(|e| unreachable_stack(&self.control, e))
    }

    async fn post(&self, path: &str, body: Value) -> Result<reqwest::Response, Failure> {
        self.http()
            .post(format!("{}{path}", self.control))
            .json(&body)
            .send()
            .await
            .map_err(|e| unreachable_stack(&self.control, e))
    }

    async fn boot(&self, profile: Option<&str>) -> Result<Arc<Stack>, Failure> {
        let mut config = self.config.clone();
        if let Some(p) = profile {
            config.latency_profile = p.to_string();
        }
        stack_up(config).await.map_err(|e| {
            Failure::Stack(format!(
                "{e} (is a stack already running? pass --attach to use it)"
            ))
        })
    }
}

fn unreachable_stack(control: &str, e: reqwest::Error) -> Failure {
    Failure::Stack(format!("no running stack at {control}: {e}"))
}

async fn json_body(resp: reqwest::Response) -> Result<Value, Failure> {
    let status = resp.status();
    let body: Value = resp
        .json()
        .await
        .map_err(|e| Failure::Stack(format!("malformed control response: {e}")))?;
    if !status.is_success() {
        let msg = body["error"].as_str().unwrap_or("request failed").to_string();
        return Err(if status.is_client_error() {
            Failure::Usage(msg)
        } else {
            Failure::Stack(msg)
        });
    }
    Ok(body)
}

fn print_outcome(outcome: &ScenarioOutcome, results: &Path) -> Outcome {
    out!("{}", outcome.summary());
    if let Some(last) = outcome.runs.last() {
        outln!();
        outln!("{}", render_table(&export_trace_table(&last.trace, None)));
        if let Some(text) = &last.text {
            outln!("Final response: {text}");
        }
    }
    if let Some(r) = &outcome.report {
        outln!();
        out!("{}", r.render());
    }
    outcome
        .write_results(results)
        .map_err(|e| Failure::Usage(format!("cannot write results to {}: {e}", results.display())))?;
    outln!("results written to {}", results.display());
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("scenario {} failed", outcome.scenario)))
    }
}

async fn up(ctx: &Ctx, profile: Option<String>) -> Outcome {
    let stack = ctx.boot(profile.as_deref()).await?;
    let e = stack.endpoints();
    outln!("stack up ({} profile)", stack.profile().name);
    outln!("  NRF               {}", e.nrf);
    outln!("  monitoring MCP    {}/mcp", e.monitoring_mcp);
    outln!("  execution MCP     {}/mcp", e.execution_mcp);
    outln!("  Host Agent        {}", e.host_agent);
    outln!("  Monitoring Agent  {}", e.monitoring_agent);
    outln!("  Execution Agent   {}", e.execution_agent);
    outln!("  control           {} (events at /events)", e.control);
    tokio::select! {
        _ = stack.wait_shutdown() => outln!("shutdown requested"),
        _ = tokio::signal::ctrl_c() => outln!("interrupted"),
    }
    stack.down().await;
    outln!("stack down");
    Ok(())
}

async fn down(ctx: &Ctx) -> Outcome {
    json_body(ctx.post("/shutdown", json!({})).await?).await?;
    outln!("shutdown requested at {}", ctx.control);
    Ok(())
}

async fn status(ctx: &Ctx) -> Outcome {
    let s = json_body(ctx.get("/status").await?).await?;
    outln!("latency profile: {}", s["latencyProfile"].as_str().unwrap_or("?"));
    outln!("{:<6} {:<9} {:>10}  handle", "NF", "state", "registered");
    for nf in s["nfs"].as_array().into_iter().flatten() {
        outln!(
            "{:<6} {:<9} {:>10}  {}",
            nf["nfType"].as_str().unwrap_or("?"),
            nf["state"].as_str().unwrap_or("?"),
            nf["registered"].as_u64().unwrap_or_default(),
            nf["backendHandle"].as_str().unwrap_or("")
        );
    }
    outln!("trace events: {}", s["traceEvents"]);
    Ok(())
}

async fn prompt(ctx: &Ctx, text: String, attach: bool, profile: Option<String>, results: Option<PathBuf>) -> Outcome {
    if attach {
        if let Some(p) = profile {
            json_body(ctx.post("/profile", json!({ "name": p })).await?).await?;
        }
        let out = json_body(ctx.post("/prompt", json!({ "text": text })).await?).await?;
        let events: Vec<TraceEvent> = serde_json::from_value(out["events"].clone()).unwrap_or_default();
        outln!("{}", render_table(&export_trace_table(&events, None)));
        return match out["text"].as_str() {
            Some(t) => {
                outln!("Final response: {t}");
                Ok(())
            }
            None => Err(Failure::Assertion(format!(
                "task failed: {}",
                out["error"].as_str().unwrap_or("unknown error")
            ))),
        };
    }
    let stack = ctx.boot(profile.as_deref()).await?;
    let spec = ScenarioSpec {
        name: "prompt".into(),
        description: String::new(),
        preconditions: Vec::new(),
        prompt: text,
        repetitions: 1,
        latency_profile: None,
        expect: Default::default(),
    };
    let outcome = run_scenario(&stack, &spec).await;
    stack.down().await;
    let outcome = outcome.map_err(|e| Failure::Usage(e.to_string()))?;
    print_outcome(&outcome, &ctx.results(results))
}

async fn scenario_run(
    ctx: &Ctx,
    scenario: String,
    repetitions: Option<u32>,
    profile: Option<String>,
    results: Option<PathBuf>,
    attach: bool,
) -> Outcome {
    let results = ctx.results(results);
    if attach {
        let mut body = json!({ "scenario": scenario });
        if let Some(n) = repetitions {
            body["repetitions"] = json!(n);
        }
        if let Some(p) = profile {
            body["latencyProfile"] = json!(p);
        }
        let out = json_body(ctx.post("/scenario", body).await?).await?;
        let outcome: ScenarioOutcome = serde_json::from_value(out)
            .map_err(|e| Failure::Stack(format!("malformed scenario outcome: {e}")))?;
        return print_outcome(&outcome, &results);
    }
    let mut spec = ScenarioSpec::resolve(&scenario).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(n) = repetitions {
        spec.repetitions = n;
    }
    if profile.is_some() {
        spec.latency_profile = profile;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(p) = &spec.latency_profile {
        LatencyProfile::select(p).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let stack = ctx.boot(None).await?;
    let outcome = run_scenario(&stack, &spec).await;
    stack.down().await;
    let outcome = outcome.map_err(|e| Failure::Assertion(e.to_string()))?;
    print_outcome(&outcome, &results)
}

fn read_results(dir: &Path, file: &str) -> Result<String, Failure> {
    let path = dir.join(file);
    std::fs::read_to_string(&path).map_err(|e| {
        Failure::Usage(format!(
            "cannot read {} ({e}); run a prompt or scenario first",
            path.display()
        ))
    })
}

async fn report_latency(ctx: &Ctx, attach: bool, results: Option<PathBuf>, as_json: bool) -> Outcome {
    let report: LatencyReport = if attach {
        let v = json_body(ctx.get("/report").await?).await?;
        serde_json::from_value(v).map_err(|e| Failure::Stack(format!("malformed report: {e}")))?
    } else {
        let text = read_results(&ctx.results(results), "latency.json")?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed latency.json: {e}")))?
    };
    if as_json {
        outln!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    } else {
        out!("{}", report.render());
    }
    Ok(())
}

async fn trace_show(
    ctx: &Ctx,
    interface: Option<Interface>,
    attach: bool,
    results: Option<PathBuf>,
    as_json: bool,
) -> Outcome {
    let text = if attach {
        let resp = ctx.get("/trace?scope=all&format=jsonl").await?;
        if !resp.status().is_success() {
            return Err(Failure::Stack(format!("control endpoint answered {}", resp.status())));
        }
        resp.text().await.map_err(|e| Failure::Stack(e.to_string()))?
    } else {
        read_results(&ctx.results(results), "trace.jsonl")?
    };
    let mut events = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let ev: TraceEvent = serde_json::from_str(line)
            .map_err(|e| Failure::Usage(format!("trace line {}: {e}", n + 1)))?;
        events.push(ev);
    }
    if as_json {
        for ev in events.iter().filter(|e| interface.is_none_or(|i| e.interface == i)) {
            outln!("{}", serde_json::to_string(ev).unwrap_or_default());
        }
        return Ok(());
    }
    let mut runs: Vec<u64> = events.iter().map(|e| e.run).collect();
    runs.dedup();
    for run in runs {
        let slice: Vec<TraceEvent> = events.iter().filter(|e| e.run == run).cloned().collect();
        let rows = export_trace_table(&slice, interface);
        if rows.is_empty() {
            continue;
        }
        outln!("# run {run}");
        outln!("{}", render_table(&rows));
    }
    Ok(())
}

async fn run(cli: Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => DeploymentConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => DeploymentConfig::default(),
    };
    let control = cli
        .control
        .clone()
        .unwrap_or_else(|| format!("http://{}:{}", config.bind_host, config.ports.control));
    let ctx = Ctx {
        config,
        control: control.trim_end_matches('/').to_string(),
    };
    match cli.command {
        Command::Up { profile } => up(&ctx, profile).await,
        Command::Down => down(&ctx).await,
        Command::Status => status(&ctx).await,
        Command::Prompt {
            text,
            attach,
            profile,
            results,
        } => prompt(&ctx, text, attach, profile, results).await,
        Command::Scenario { command } => match command {
            ScenarioCommand::Run {
                scenario,
                repetitions,
                profile,
                results,
                attach,
            } => scenario_run(&ctx, scenario, repetitions, profile, results, attach).await,
            ScenarioCommand::List => {
                for name in ScenarioSpec::BUILTINS {
                    let s = ScenarioSpec::builtin(name).expect("listed built-in exists");
                    outln!("{name:<24} {}", s.description);
                }
                Ok(())
            }
        },
        Command::Report {
            command: ReportCommand::Latency { attach, results, json },
        } => report_latency(&ctx, attach, results, json).await,
        Command::Trace {
            command:
                TraceCommand::Show {
                    interface,
                    attach,
                    results,
                    json,
                },
        } => trace_show(&ctx, interface, attach, results, json).await,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => return Failure::Stack(format!("cannot start async runtime: {e}")).exit(),
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
