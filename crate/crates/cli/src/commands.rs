use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use hybrid_miner::discovery::{glob_score, Redundancy};
use hybrid_miner::event_log::{parse_csv, parse_xes, write_csv, write_xes, ColumnMapping, XesOptions};
use hybrid_miner::stats::Rel1Numerator;
use hybrid_miner::synthetic::order_handling;
use hybrid_miner::{
    discover_causal_graph, discover_hybrid_net, evaluate, score, validate_consistency, CausalGraph, DirectlyFollowsTable,
    Discovery, DiscoveryParams, EventLog, HybridSystemNet, PlaceCandidate,
};
use hybrid_miner_service::ServiceConfig;
use serde_json::{json, Value};

use crate::args::{Command, GraphFormat, LogArgs, LogFormat, Model, NetFormat, Numerator, ParamArgs, StatsFormat};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats { log, emit, out } => {
            let log = read_log(&log)?;
            let table = DirectlyFollowsTable::build(&log);
            let text = match emit {
                StatsFormat::Json => pretty(&json!({
                    "summary": hybrid_miner_service::LogSummary::of(&log),
                    "table": table.to_dump(),
                })),
                StatsFormat::Tsv => table.to_tsv(),
            };
            emit_text(out.as_deref(), &text)
        }
        Command::DiscoverGraph { log, params, emit, out } => {
            let params = resolve(&params)?;
            let log = read_log(&log)?;
            let graph = graph(&log, &params)?;
            let text = match emit {
                GraphFormat::Json => pretty(&json!({ "params": params.graph, "graph": graph.to_dump() })),
                GraphFormat::Dot => graph.to_dot(),
            };
            emit_text(out.as_deref(), &text)
        }
        Command::DiscoverNet { log, params, out, dot, pnml, scores } => {
            let params = resolve(&params)?;
            let log = read_log(&log)?;
            let graph = graph(&log, &params)?;
            let discovery = net(&log, &graph, &params)?;
            let hsn = &discovery.net;
            match &out {
                Some(path) => {
                    write_file(path, &hsn.to_json())?;
                    write_file(&dot.unwrap_or_else(|| path.with_extension("dot")), &hsn.to_dot())?;
                    let consistency = validate_consistency(&log, &graph, hsn);
                    println!("{}", pretty(&json!({ "params": params, "counts": counts(&discovery), "consistency": consistency })));
                }
                None => {
                    if let Some(d) = &dot {
                        write_file(d, &hsn.to_dot())?;
                    }
                    println!("{}", hsn.to_json());
                }
            }
            if let Some(p) = &pnml {
                write_file(p, &hsn.to_pnml())?;
            }
            if let Some(s) = &scores {
                write_file(s, &pretty(&json!({ "params": params, "candidates": discovery.candidates })))?;
            }
            Ok(())
        }
        Command::Score { log, params, place } => {
            let params = resolve(&params)?;
            let place = PlaceCandidate::parse(&place).map_err(CliError::Usage)?;
            let log = read_log(&log)?;
            let graph = graph(&log, &params)?;
            for a in place.inputs().iter().chain(place.outputs()) {
                if !graph.activities().contains(a) {
                    return Err(CliError::Data(format!("activity {a} is not among the kept activities (t_freq)")));
                }
            }
            let projected = log.project(graph.activities()).map_err(|e| CliError::Data(e.to_string()))?;
            let s = score(&place, &projected);
            let table = DirectlyFollowsTable::build(&projected);
            let candidate = place.pairs().all(|pair| graph.strong().contains(&pair));
            let report = json!({
                "place": place.to_string(),
                "candidate": candidate,
                "accepted": candidate && s.passes(params.t_replay),
                "t_replay": params.t_replay,
                "glob": glob_score(&place, &table),
                "score": s,
            });
            println!("{}", pretty(&report));
            Ok(())
        }
        Command::Evaluate { log, params, net: net_path, sweep, out } => {
            let params = resolve(&params)?;
            let log = read_log(&log)?;
            let text = match (net_path, sweep) {
                (_, Some(spec)) => sweep_table(&log, params, &spec)?,
                (Some(path), None) => {
                    let hsn = read_net(&path)?;
                    let report = evaluate(&hsn, &log).map_err(|e| CliError::Data(e.to_string()))?;
                    pretty(&json!({ "net": path, "report": report }))
                }
                (None, None) => {
                    let graph = graph(&log, &params)?;
                    let discovery = net(&log, &graph, &params)?;
                    let report = evaluate(&discovery.net, &log).map_err(|e| CliError::Data(e.to_string()))?;
                    pretty(&json!({ "params": params, "counts": counts(&discovery), "report": report }))
                }
            };
            emit_text(out.as_deref(), &text)
        }
        Command::Export { net, format, out } => {
            let hsn = read_net(&net)?;
            let text = match format {
                NetFormat::Json => hsn.to_json(),
                NetFormat::Dot => hsn.to_dot(),
                NetFormat::Pnml => hsn.to_pnml(),
            };
            emit_text(out.as_deref(), &text)
        }
        Command::GenLog { model, cases, seed, format, out } => {
            if cases == 0 {
                return Err(CliError::Usage("--cases must be positive".into()));
            }
            let log = match model {
                Model::OrderHandling => order_handling(cases, seed),
            };
            let mut bytes = Vec::new();
            match format {
                LogFormat::Xes => write_xes(&log, &mut bytes)?,
                LogFormat::Csv => write_csv(&log, &mut bytes).map_err(|e| CliError::Data(e.to_string()))?,
                LogFormat::Json => bytes.extend(log.to_json().into_bytes()),
            }
            match out {
                Some(path) => std::fs::write(&path, bytes).map_err(|e| io_at(&path, e)),
                None => Ok(std::io::stdout().write_all(&bytes)?),
            }
        }
        Command::Serve { config, host, port, data_dir, upload_limit } => {
            let mut config = ServiceConfig::load(config.as_deref()).map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(h) = host {
                config.host = h;
            }
            if let Some(p) = port {
                config.port = p;
            }
            if let Some(d) = data_dir {
                config.data_dir = Some(d);
            }
            if let Some(l) = upload_limit {
                config.upload_limit = l;
            }
            hybrid_miner_service::serve_blocking(config)?;
            Ok(())
        }
    }
}

/// Flags over the config file's defaults over the built-in ones.
pub fn resolve(args: &ParamArgs) -> Result<DiscoveryParams> {
    let mut p = match &args.config {
        Some(path) => ServiceConfig::from_file(path).map_err(|e| CliError::Usage(e.to_string()))?.defaults,
        None => DiscoveryParams::default(),
    };
    if let Some(v) = args.t_freq {
        p.graph.t_freq = v;
    }
    if let Some(v) = args.c {
        p.graph.c = v;
    }
    if let Some(v) = args.w {
        p.graph.w = v;
    }
    if let Some(v) = args.rel1_numerator {
        p.graph.rel1_numerator = match v {
            Numerator::Literal => Rel1Numerator::Literal,
            Numerator::Symmetric => Rel1Numerator::Symmetric,
        };
    }
    if let Some(v) = args.t_rs {
        p.graph.t_rs = v;
    }
    if let Some(v) = args.t_rw {
        p.graph.t_rw = v;
    }
    if let Some(v) = args.t_replay {
        p.t_replay = v;
    }
    if let Some(v) = args.max_inputs {
        p.max_inputs = v;
    }
    if let Some(v) = args.max_outputs {
        p.max_outputs = v;
    }
    if args.maximal_only {
        p.redundancy = Redundancy::MaximalOnly;
    }
    if args.glob_floor.is_some() {
        p.glob_floor = args.glob_floor;
    }
    checked(p)
}

fn checked(p: DiscoveryParams) -> Result<DiscoveryParams> {
    let errors = p.errors();
    if errors.is_empty() {
        Ok(p)
    } else {
        let list: Vec<String> = errors.iter().map(|e| format!("invalid parameter {e}")).collect();
        Err(CliError::Usage(list.join("; ")))
    }
}

fn graph(log: &EventLog, params: &DiscoveryParams) -> Result<CausalGraph> {
    discover_causal_graph(log, &params.graph).map_err(|e| CliError::Usage(format!("invalid parameter {e}")))
}

fn net(log: &EventLog, graph: &CausalGraph, params: &DiscoveryParams) -> Result<Discovery> {
    discover_hybrid_net(log, graph, params).map_err(|e| CliError::Data(e.to_string()))
}

fn counts(d: &Discovery) -> Value {
    json!({
        "transitions": d.net.net().transitions().len(),
        "places": d.places().count(),
        "sure": d.net.sure().len(),
        "unsure": d.net.unsure().len(),
        "candidates": d.candidates.len(),
    })
}

/// One CSV row per value of the swept parameter.
fn sweep_table(log: &EventLog, base: DiscoveryParams, spec: &str) -> Result<String> {
    let (name, values) =
        spec.split_once('=').ok_or_else(|| CliError::Usage(format!("--sweep expects name=v1,v2,..., got {spec:?}")))?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--sweep value {v:?} is not a number"))))
        .collect::<Result<_>>()?;
    let column = name.replace('-', "_");
    let mut out = format!("{column},transitions,places,sure,unsure,fitness,precision\n");
    for v in values {
        let mut p = base;
        match name {
            "t-replay" => p.t_replay = v,
            "t-rs" => p.graph.t_rs = v,
            "t-rw" => p.graph.t_rw = v,
            "w" => p.graph.w = v,
            "c" => p.graph.c = v,
            "glob-floor" => p.glob_floor = Some(v),
            "t-freq" if v >= 0.0 && v.fract() == 0.0 => p.graph.t_freq = v as u64,
            "t-freq" => return Err(CliError::Usage(format!("t-freq must be a whole number, got {v}"))),
            other => return Err(CliError::Usage(format!("cannot sweep {other:?}"))),
        }
        let p = checked(p)?;
        let graph = graph(log, &p)?;
        let d = net(log, &graph, &p)?;
        let report = evaluate(&d.net, log).map_err(|e| CliError::Data(e.to_string()))?;
        let _ = writeln!(
            out,
            "{v},{},{},{},{},{},{}",
            d.net.net().transitions().len(),
            d.places().count(),
            d.net.sure().len(),
            d.net.unsure().len(),
            report.fitness_trace,
            report.precision_escaping
        );
    }
    Ok(out)
}

fn read_log(args: &LogArgs) -> Result<EventLog> {
    let bytes = read_input(&args.log)?;
    let format = args.log_format.unwrap_or_else(|| guess_format(&args.log, &bytes));
    let parsed = match format {
        LogFormat::Xes => parse_xes(bytes.as_slice(), XesOptions { complete_only: !args.all_lifecycles }),
        LogFormat::Csv => {
            let mapping = ColumnMapping {
                case: args.case_column.clone(),
                activity: args.activity_column.clone(),
                timestamp: (!args.timestamp_column.is_empty()).then(|| args.timestamp_column.clone()),
            };
            parse_csv(bytes.as_slice(), &mapping)
        }
        LogFormat::Json => EventLog::from_json(&bytes),
    };
    parsed.map_err(|e| CliError::Data(format!("{}: {e}", args.log.display())))
}

fn guess_format(path: &Path, bytes: &[u8]) -> LogFormat {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("xes" | "xml") => return LogFormat::Xes,
        Some("csv") => return LogFormat::Csv,
        Some("json") => return LogFormat::Json,
        _ => {}
    }
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'<') => LogFormat::Xes,
        Some(b'{') => LogFormat::Json,
        _ => LogFormat::Csv,
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(|e| io_at(path, e))
    }
}

fn read_net(path: &Path) -> Result<HybridSystemNet> {
    let text = String::from_utf8(read_input(path)?).map_err(|e| CliError::Data(e.to_string()))?;
    HybridSystemNet::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn io_at(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_at(path, e))
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialise")
}
