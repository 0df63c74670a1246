// SPDX-License-Identifier: Apache-2.0

//! Library surface of the `teksim` benchmark driver.
//!
//! All run and compare logic lives here so integration tests can drive
//! it in-process; `main.rs` only maps it onto argv and exit codes. All
//! numeric output is produced with integer/rational arithmetic, so
//! files are byte-identical across runs and platforms for the same
//! scenario and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tek_core::{
    cv_squared_rat, decode_table, mean_rat, parse_scenario_str, run_scenario, Criticality, Mode,
    Rat, RunReport, ScenarioConfig, SimOptions, ThreadInfoRecord,
};

/// Scenario files compiled into the binary; `run`/`compare` accept
/// these names as well as filesystem paths.
pub const EMBEDDED_SCENARIOS: &[(&str, &str)] = &[
    ("shares", include_str!("../../../scenarios/shares.scn")),
    ("contention", include_str!("../../../scenarios/contention.scn")),
    ("ctxswitch", include_str!("../../../scenarios/ctxswitch.scn")),
    ("stackgrowth", include_str!("../../../scenarios/stackgrowth.scn")),
];

/// Environment variable that overrides the scenario's seed.
pub const SEED_ENV: &str = "TEKSIM_SEED";

/// Normative header of the thread-table CSV rendition.
pub const TABLE_CSV_HEADER: &str =
    "tid,policy,priority,criticality,zone,creation_ns,stack_kib,vm_kib,peak_kib,role";

/// Normative header of `metrics.csv`.
pub const METRICS_CSV_HEADER: &str = "tid,role,group,nice,policy,criticality,arrival_tick,\
death_tick,cpu_ticks,switch_ins,preemptions,events_handled,response_sum_ticks,\
max_response_ticks,reserved_kib,peak_kib,zone,creation_failed";

/// Normative header of `faults.csv`.
pub const FAULTS_CSV_HEADER: &str = "tick,tid,kind,attempted_kib";

/// Normative header of `stacks.csv`.
pub const STACKS_CSV_HEADER: &str =
    "tid,role,stack_policy,reserved_kib,guard_kib,peak_kib,zone,advised_kib,faulted";

/// Normative header of `trace.csv`.
pub const TRACE_CSV_HEADER: &str = "tick,running_tid,event";

/// A driver-level failure; everything maps to exit code 1.
#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError(format!("io error: {e}"))
    }
}

fn err(message: impl Into<String>) -> CliError {
    CliError(message.into())
}

/// Where a scenario's text came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioSource {
    File(PathBuf),
    Embedded(&'static str),
}

/// Resolves a scenario argument: an existing file path wins, otherwise
/// an embedded scenario name (with or without the `.scn` suffix).
pub fn resolve_scenario(arg: &str) -> Result<(String, ScenarioSource), CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        return Ok((text, ScenarioSource::File(path.to_path_buf())));
    }
    let stem = arg.strip_suffix(".scn").unwrap_or(arg);
    for (name, text) in EMBEDDED_SCENARIOS {
        if *name == stem {
            return Ok((text.to_string(), ScenarioSource::Embedded(name)));
        }
    }
    Err(err(format!(
        "no such scenario: {arg} (not a file, and not one of: {})",
        EMBEDDED_SCENARIOS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
    )))
}

/// Parses and validates scenario text, then applies the seed override.
pub fn load_scenario(text: &str, seed_override: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut config = parse_scenario_str(text).map_err(|e| err(format!("scenario: {e}")))?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    Ok(config)
}

/// Reads the seed override from the environment.
pub fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(value) => value
            .parse::<u64>()
            .map(Some)
            .map_err(|_| err(format!("{SEED_ENV} must be an unsigned integer, got \"{value}\""))),
        Err(_) => Ok(None),
    }
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Renders an exact rational with a fixed number of decimal places
/// using integer arithmetic only (round half up).
pub fn format_rat_fixed(r: Rat, places: u32) -> String {
    let scale = 10i128.pow(places);
    let scaled = (r * Rat::from_integer(scale) + Rat::new(1, 2)).floor().to_integer();
    let negative = scaled < 0;
    let magnitude = scaled.unsigned_abs();
    let whole = magnitude / scale.unsigned_abs();
    let frac = magnitude % scale.unsigned_abs();
    if places == 0 {
        return format!("{}{whole}", if negative { "-" } else { "" });
    }
    format!(
        "{}{whole}.{frac:0width$}",
        if negative { "-" } else { "" },
        width = places as usize
    )
}

fn opt_u64(value: Option<u64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// `metrics.csv`: one row per thread, preceded by a `#` comment line
/// carrying the run-level aggregates.
pub fn metrics_csv(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# run scenario={} mode={} seed={} elapsed_ticks={} idle_ticks={} \
context_switches={} migrations={} restorations={} faults={} failed_creations={} \
allocated_kib={} actual_peak_kib={}",
        csv_field(&report.scenario),
        report.mode,
        report.seed,
        report.elapsed_ticks,
        report.idle_ticks,
        report.context_switches,
        report.migrations.len(),
        report.restorations.len(),
        report.faults.len(),
        report.failed_creations,
        report.space.allocated_kib,
        report.space.actual_peak_kib,
    );
    out.push_str(METRICS_CSV_HEADER);
    out.push('\n');
    for t in &report.threads {
        let mut handled = 0u64;
        let mut response_sum = 0u64;
        let mut response_max: Option<u64> = None;
        for event in report.events.iter().filter(|e| e.target == t.tid) {
            if let Some(resp) = event.response_ticks() {
                handled += 1;
                response_sum += resp;
                response_max = Some(response_max.map_or(resp, |m| m.max(resp)));
            }
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.tid.0,
            csv_field(&t.role),
            t.group,
            t.nice,
            t.policy.as_str(),
            t.criticality.as_str(),
            t.arrival,
            t.death.map(|d| d.to_string()).unwrap_or_default(),
            t.cpu_ticks,
            t.switch_ins,
            t.preemptions,
            handled,
            response_sum,
            opt_u64(response_max),
            t.reserved_kib,
            t.peak_kib,
            t.zone,
            t.creation_failed,
        );
    }
    out
}

/// `faults.csv`: the fault ledger in occurrence order.
pub fn faults_csv(report: &RunReport) -> String {
    let mut out = String::from(FAULTS_CSV_HEADER);
    out.push('\n');
    for fault in &report.faults {
        let attempted = match fault.kind {
            tek_core::FaultKind::AllocationExhaustion { attempted_kib } => {
                attempted_kib.to_string()
            }
            tek_core::FaultKind::GuardPageOverrun => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fault.tick,
            fault.tid.0,
            fault.kind.as_str(),
            attempted
        );
    }
    out
}

/// `stacks.csv`: reservation and watermark detail per thread.
pub fn stacks_csv(report: &RunReport) -> String {
    let stack_policy = match report.mode {
        Mode::Baseline => "fixed",
        Mode::Tek => "tuned",
    };
    let mut out = String::from(STACKS_CSV_HEADER);
    out.push('\n');
    let faulted: std::collections::BTreeSet<u32> =
        report.faults.iter().map(|f| f.tid.0).collect();
    for t in &report.threads {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            t.tid.0,
            csv_field(&t.role),
            stack_policy,
            t.reserved_kib,
            if t.creation_failed { 0 } else { tek_core::GUARD_KIB },
            t.peak_kib,
            t.zone,
            opt_u64(t.advised_kib),
            faulted.contains(&t.tid.0),
        );
    }
    out
}

/// `trace.csv`: the flag-gated schedule trace.
pub fn trace_csv(report: &RunReport) -> Option<String> {
    let trace = report.trace.as_ref()?;
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for row in trace {
        let running =
            row.running.map(|tid| tid.0.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", row.tick, running, csv_field(&row.notes.join(";")));
    }
    Some(out)
}

/// CSV rendition of a decoded thread table.
pub fn table_csv(records: &[ThreadInfoRecord]) -> String {
    let mut out = String::from(TABLE_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.tid.0,
            r.policy.as_str(),
            r.priority,
            r.criticality.as_str(),
            r.zone,
            r.creation_time_ns,
            r.stack_reserved_kib,
            r.vm_kib,
            r.peak_stack_kib,
            csv_field(&r.role),
        );
    }
    out
}

/// Writes every output file for one finished run into `dir`.
pub fn write_run_outputs(report: &RunReport, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("metrics.csv"), metrics_csv(report))?;
    fs::write(dir.join("faults.csv"), faults_csv(report))?;
    fs::write(dir.join("stacks.csv"), stacks_csv(report))?;
    fs::write(dir.join("table.tit"), &report.table_image)?;
    if let Some(trace) = trace_csv(report) {
        fs::write(dir.join("trace.csv"), trace)?;
    }
    Ok(())
}

fn utilization_percent(report: &RunReport) -> Rat {
    if report.elapsed_ticks == 0 {
        return Rat::from_integer(0);
    }
    Rat::new(report.total_cpu_ticks() as i128 * 100, report.elapsed_ticks as i128)
}

/// The human summary for a single run, as printed after `run`.
pub fn run_summary(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}  mode {}  seed {}", report.scenario, report.mode, report.seed);
    let _ = writeln!(
        out,
        "  elapsed {} ticks, idle {}, utilization {}%",
        report.elapsed_ticks,
        report.idle_ticks,
        format_rat_fixed(utilization_percent(report), 1)
    );
    let _ = writeln!(
        out,
        "  context switches {}, migrations {}, restorations {}",
        report.context_switches,
        report.migrations.len(),
        report.restorations.len()
    );
    let _ = writeln!(
        out,
        "  stacks: allocated {} KiB, actual peak {} KiB, overhead ratio {}",
        report.space.allocated_kib,
        report.space.actual_peak_kib,
        format_rat_fixed(report.space.overhead_ratio, 2)
    );
    let _ = writeln!(
        out,
        "  faults {}, failed creations {}",
        report.faults.len(),
        report.failed_creations
    );
    let tc = report.response_ticks(Criticality::TimeCritical);
    if !tc.is_empty() {
        let _ = writeln!(
            out,
            "  time-critical responses: n {}, mean {} ticks, max {}",
            tc.len(),
            format_rat_fixed(mean_rat(&tc).expect("non-empty"), 2),
            tc.iter().max().expect("non-empty")
        );
    }
    let ntc = report.response_ticks(Criticality::NonTimeCritical);
    if !ntc.is_empty() {
        let _ = writeln!(
            out,
            "  non-time-critical responses: n {}, max stall {}",
            ntc.len(),
            ntc.iter().max().expect("non-empty")
        );
    }
    out
}

/// One comparison row: label, baseline value, TEK value, delta note.
struct CompareRow {
    label: &'static str,
    baseline: String,
    tek: String,
    delta: String,
}

/// Reduction of `tek` against `base` in percent, when well-defined.
fn reduction_percent(base: u64, tek: u64) -> Option<Rat> {
    if base == 0 {
        return None;
    }
    Some(Rat::new((base as i128 - tek as i128) * 100, base as i128))
}

/// The paired-mode comparison table, as printed by `compare`.
pub fn compare_summary(baseline: &RunReport, tek: &RunReport) -> String {
    let mut rows: Vec<CompareRow> = Vec::new();

    let base_tc = baseline.response_ticks(Criticality::TimeCritical);
    let tek_tc = tek.response_ticks(Criticality::TimeCritical);
    match (mean_rat(&base_tc), mean_rat(&tek_tc)) {
        (Some(base_mean), Some(tek_mean)) => {
            let ratio = if tek_mean == Rat::from_integer(0) {
                String::from("-")
            } else {
                format!("{}x", format_rat_fixed(base_mean / tek_mean, 2))
            };
            rows.push(CompareRow {
                label: "mean time-critical response (ticks)",
                baseline: format_rat_fixed(base_mean, 2),
                tek: format_rat_fixed(tek_mean, 2),
                delta: ratio,
            });
            let base_cv2 = cv_squared_rat(&base_tc);
            let tek_cv2 = cv_squared_rat(&tek_tc);
            if let (Some(b), Some(t)) = (base_cv2, tek_cv2) {
                rows.push(CompareRow {
                    label: "response variation (cv^2)",
                    baseline: format_rat_fixed(b, 4),
                    tek: format_rat_fixed(t, 4),
                    delta: String::from(if t < b { "steadier" } else { "not steadier" }),
                });
            }
            rows.push(CompareRow {
                label: "max time-critical response (ticks)",
                baseline: opt_u64(base_tc.iter().max().copied()),
                tek: opt_u64(tek_tc.iter().max().copied()),
                delta: String::new(),
            });
        }
        _ => rows.push(CompareRow {
            label: "mean time-critical response (ticks)",
            baseline: String::from("-"),
            tek: String::from("-"),
            delta: String::from("no completed events"),
        }),
    }

    let base_ntc = baseline.response_ticks(Criticality::NonTimeCritical);
    let tek_ntc = tek.response_ticks(Criticality::NonTimeCritical);
    if !base_ntc.is_empty() || !tek_ntc.is_empty() {
        rows.push(CompareRow {
            label: "max non-time-critical stall (ticks)",
            baseline: opt_u64(base_ntc.iter().max().copied()),
            tek: opt_u64(tek_ntc.iter().max().copied()),
            delta: String::new(),
        });
    }

    rows.push(CompareRow {
        label: "context switches",
        baseline: baseline.context_switches.to_string(),
        tek: tek.context_switches.to_string(),
        delta: reduction_percent(baseline.context_switches, tek.context_switches)
            .map(|r| format!("{}% fewer", format_rat_fixed(r, 1)))
            .unwrap_or_default(),
    });
    let base_preempt = baseline.preemptions(Criticality::TimeCritical);
    let tek_preempt = tek.preemptions(Criticality::TimeCritical);
    rows.push(CompareRow {
        label: "time-critical preemptions",
        baseline: base_preempt.to_string(),
        tek: tek_preempt.to_string(),
        delta: reduction_percent(base_preempt, tek_preempt)
            .map(|r| format!("{}% fewer", format_rat_fixed(r, 1)))
            .unwrap_or_default(),
    });
    rows.push(CompareRow {
        label: "stack allocated (KiB)",
        baseline: baseline.space.allocated_kib.to_string(),
        tek: tek.space.allocated_kib.to_string(),
        delta: reduction_percent(baseline.space.allocated_kib, tek.space.allocated_kib)
            .map(|r| format!("{}% less", format_rat_fixed(r, 1)))
            .unwrap_or_default(),
    });
    rows.push(CompareRow {
        label: "stack overhead ratio",
        baseline: format_rat_fixed(baseline.space.overhead_ratio, 2),
        tek: format_rat_fixed(tek.space.overhead_ratio, 2),
        delta: String::new(),
    });
    rows.push(CompareRow {
        label: "faults",
        baseline: baseline.faults.len().to_string(),
        tek: tek.faults.len().to_string(),
        delta: String::new(),
    });
    rows.push(CompareRow {
        label: "failed creations",
        baseline: baseline.failed_creations.to_string(),
        tek: tek.failed_creations.to_string(),
        delta: String::new(),
    });

    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {}  seed {}  horizon {} ticks",
        baseline.scenario, baseline.seed, baseline.elapsed_ticks
    );
    let _ = writeln!(out, "{:<38}{:>14}{:>14}  delta", "metric", "baseline", "tek");
    for row in rows {
        let _ = writeln!(out, "{:<38}{:>14}{:>14}  {}", row.label, row.baseline, row.tek, row.delta);
    }
    out
}

/// Runs one scenario in the given mode and writes outputs under `dir`.
pub fn run_one(
    config: &ScenarioConfig,
    mode: Mode,
    collect_trace: bool,
    dir: &Path,
) -> Result<RunReport, CliError> {
    let report = run_scenario(config, mode, SimOptions { collect_trace })
        .map_err(|e| err(format!("scenario: {e}")))?;
    write_run_outputs(&report, dir)?;
    Ok(report)
}

/// Runs both modes from one parsed config and writes per-mode
/// subdirectories; returns the pair (baseline, tek).
pub fn compare_run(
    config: &ScenarioConfig,
    collect_trace: bool,
    dir: &Path,
) -> Result<(RunReport, RunReport), CliError> {
    let baseline = run_one(config, Mode::Baseline, collect_trace, &dir.join("baseline"))?;
    let tek = run_one(config, Mode::Tek, collect_trace, &dir.join("tek"))?;
    Ok((baseline, tek))
}

/// Loads the table image for `dump-table`: a `.tit` file directly, or a
/// run directory containing `table.tit`.
pub fn load_table(path: &Path) -> Result<Vec<ThreadInfoRecord>, CliError> {
    let file = if path.is_dir() { path.join("table.tit") } else { path.to_path_buf() };
    let bytes =
        fs::read(&file).map_err(|e| err(format!("cannot read {}: {e}", file.display())))?;
    decode_table(&bytes).map_err(|e| err(format!("{}: {e}", file.display())))
}

/// The `list-scenarios` listing.
pub fn list_scenarios() -> String {
    let mut out = String::new();
    for (name, text) in EMBEDDED_SCENARIOS {
        let config = parse_scenario_str(text).expect("embedded scenarios are valid");
        let _ = writeln!(
            out,
            "{name:<14} threads {:>3}  horizon {:>6}  mode {}",
            config.thread_count(),
            config.horizon_ticks,
            config.mode.as_str()
        );
    }
    out
}
