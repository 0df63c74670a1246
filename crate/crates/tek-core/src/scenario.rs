// SPDX-License-Identifier: Apache-2.0

//! Scenario files: a line-oriented `key = value` format with repeated
//! `[thread]` and `[events]` sections.
//!
//! Top-level keys configure the run (seed, horizon, mode, weight table,
//! group shares, address space, zone fractions, monitor period). Each
//! `[thread]` section declares a band of identical threads; each
//! `[events]` section declares a per-thread event stream for every
//! thread of a role. Fractions parse as exact decimals or `n/d`
//! rationals; nothing goes through floating point.

use num_rational::Ratio;

use crate::error::ScenarioError;
use crate::sched::weights::{NiceValue, Rat, WeightTableKind};
use crate::sched::GroupShares;
use crate::stack::{AddressSpaceConfig, StackZoneConfig};
use crate::types::{Criticality, GroupName, Policy, Tick};

/// Which scheduling/stack mode a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Conventional: mediator requests are ignored, stacks are fixed-size.
    Baseline,
    /// Mediator honored, stacks tuned from role history.
    Tek,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Tek => "tek",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "baseline" => Some(Mode::Baseline),
            "tek" => Some(Mode::Tek),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Modes a scenario asks for by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSpec {
    Baseline,
    Tek,
    Both,
}

impl ModeSpec {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeSpec::Baseline => "baseline",
            ModeSpec::Tek => "tek",
            ModeSpec::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<ModeSpec> {
        match s {
            "baseline" => Some(ModeSpec::Baseline),
            "tek" => Some(ModeSpec::Tek),
            "both" => Some(ModeSpec::Both),
            _ => None,
        }
    }

    pub fn modes(&self) -> Vec<Mode> {
        match self {
            ModeSpec::Baseline => vec![Mode::Baseline],
            ModeSpec::Tek => vec![Mode::Tek],
            ModeSpec::Both => vec![Mode::Baseline, Mode::Tek],
        }
    }
}

/// Inclusive integer range; a bare number is a degenerate range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeSpec {
    pub lo: u64,
    pub hi: u64,
}

impl RangeSpec {
    pub fn fixed(n: u64) -> RangeSpec {
        RangeSpec { lo: n, hi: n }
    }

    pub fn is_fixed(&self) -> bool {
        self.lo == self.hi
    }
}

impl std::fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_fixed() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

/// What a thread does with its CPU time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BehaviorTemplate {
    /// Compute forever.
    Busy,
    /// Compute a drawn number of ticks, then exit.
    Compute { ticks: RangeSpec },
    /// Alternate compute bursts and timed blocks; exit after `repeat`
    /// cycles, or run until the horizon when `repeat` is absent.
    Loop { burst: RangeSpec, block: RangeSpec, repeat: Option<u64> },
    /// Wait for an event, compute a drawn handling cost, repeat.
    Handler { compute: RangeSpec },
}

impl std::fmt::Display for BehaviorTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BehaviorTemplate::Busy => write!(f, "busy()"),
            BehaviorTemplate::Compute { ticks } => write!(f, "compute({ticks})"),
            BehaviorTemplate::Loop { burst, block, repeat } => {
                write!(f, "loop(burst={burst}, block={block}")?;
                if let Some(r) = repeat {
                    write!(f, ", repeat={r}")?;
                }
                write!(f, ")")
            }
            BehaviorTemplate::Handler { compute } => write!(f, "handler(compute={compute})"),
        }
    }
}

/// How a thread's stack demand evolves with its CPU progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackTemplate {
    /// Constant demand from the first executed tick.
    Fixed { kib: u64 },
    /// Demand climbs from `peak/steps` to `peak` in equal steps spread
    /// over the first `over` executed ticks, then stays at `peak`.
    Ramp { peak_kib: u64, over_ticks: u64, steps: u64 },
}

impl std::fmt::Display for StackTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StackTemplate::Fixed { kib } => write!(f, "fixed({kib})"),
            StackTemplate::Ramp { peak_kib, over_ticks, steps } => {
                write!(f, "ramp(peak={peak_kib}, over={over_ticks}, steps={steps})")
            }
        }
    }
}

/// A band of identical threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadSpec {
    pub count: u64,
    pub group: GroupName,
    pub nice: i8,
    pub policy: Policy,
    pub criticality: Criticality,
    pub role: String,
    pub behavior: BehaviorTemplate,
    pub stack: StackTemplate,
    /// Stack-size request passed to the allocator; default when absent.
    pub request_kib: Option<u64>,
    /// Arrival tick of the first member.
    pub arrival: Tick,
    /// Arrival spacing between successive members.
    pub arrival_step: Tick,
}

/// A per-thread event stream for every thread of `role`: arrivals at
/// `start + i*period + jitter_i` with `jitter_i` drawn uniformly from
/// `[-jitter, +jitter]` per thread and index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSpec {
    pub role: String,
    pub start: Tick,
    pub period: u64,
    pub jitter: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub horizon_ticks: Tick,
    pub mode: ModeSpec,
    pub weight_table: WeightTableKind,
    pub group_shares: GroupShares,
    pub address_space: AddressSpaceConfig,
    pub monitor_period: u64,
    pub threads: Vec<ThreadSpec>,
    pub events: Vec<EventSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: String::new(),
            seed: 0,
            horizon_ticks: 60_000,
            mode: ModeSpec::Both,
            weight_table: WeightTableKind::PaperLinear,
            group_shares: GroupShares::default(),
            address_space: AddressSpaceConfig::default(),
            monitor_period: 100,
            threads: Vec::new(),
            events: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    /// Total threads across all bands.
    pub fn thread_count(&self) -> u64 {
        self.threads.iter().map(|t| t.count).sum()
    }

    /// Structural checks beyond per-line parsing.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.is_empty() {
            return Err(ScenarioError::Invalid("name: must not be empty".into()));
        }
        if self.horizon_ticks == 0 {
            return Err(ScenarioError::Invalid("horizon: must be ≥ 1".into()));
        }
        if self.monitor_period == 0 {
            return Err(ScenarioError::Invalid("monitor_period: must be ≥ 1".into()));
        }
        if self.address_space.reserved_bytes >= self.address_space.total_user_bytes {
            return Err(ScenarioError::Invalid(
                "reserved_mib: must be below total_user_mib".into(),
            ));
        }
        for (idx, spec) in self.threads.iter().enumerate() {
            let ctx = format!("thread section {}", idx + 1);
            NiceValue::new(spec.nice).map_err(|e| {
                ScenarioError::Invalid(format!("{ctx}: nice: {e}"))
            })?;
            if spec.role.is_empty() {
                return Err(ScenarioError::Invalid(format!("{ctx}: role: must not be empty")));
            }
            match &spec.behavior {
                BehaviorTemplate::Compute { ticks } if ticks.lo == 0 => {
                    return Err(ScenarioError::Invalid(format!(
                        "{ctx}: behavior: compute ticks must be ≥ 1"
                    )));
                }
                BehaviorTemplate::Loop { burst, block, .. } => {
                    if burst.lo == 0 {
                        return Err(ScenarioError::Invalid(format!(
                            "{ctx}: behavior: burst must be ≥ 1"
                        )));
                    }
                    if block.lo == 0 {
                        return Err(ScenarioError::Invalid(format!(
                            "{ctx}: behavior: block must be ≥ 1"
                        )));
                    }
                }
                BehaviorTemplate::Handler { compute } if compute.lo == 0 => {
                    return Err(ScenarioError::Invalid(format!(
                        "{ctx}: behavior: handler compute must be ≥ 1"
                    )));
                }
                _ => {}
            }
            for range in behavior_ranges(&spec.behavior) {
                if range.lo > range.hi {
                    return Err(ScenarioError::Invalid(format!(
                        "{ctx}: behavior: range low exceeds high"
                    )));
                }
            }
            if let StackTemplate::Ramp { peak_kib, over_ticks, steps } = spec.stack {
                if peak_kib == 0 || over_ticks == 0 || steps == 0 {
                    return Err(ScenarioError::Invalid(format!(
                        "{ctx}: stack: ramp parameters must be ≥ 1"
                    )));
                }
            }
        }
        for (idx, event) in self.events.iter().enumerate() {
            let ctx = format!("events section {}", idx + 1);
            if event.period == 0 {
                return Err(ScenarioError::Invalid(format!("{ctx}: period: must be ≥ 1")));
            }
            if !self.threads.iter().any(|t| t.role == event.role) {
                return Err(ScenarioError::Invalid(format!(
                    "{ctx}: role: no thread section declares role \"{}\"",
                    event.role
                )));
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn serialize(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "horizon = {}", self.horizon_ticks);
        let _ = writeln!(out, "mode = {}", self.mode.as_str());
        let _ = writeln!(out, "weight_table = {}", self.weight_table.as_str());
        let _ = writeln!(
            out,
            "shares = {},{},{},{}",
            self.group_shares.part(GroupName::Urgent),
            self.group_shares.part(GroupName::Normal),
            self.group_shares.part(GroupName::Service),
            self.group_shares.part(GroupName::Background),
        );
        let space = &self.address_space;
        let _ = writeln!(out, "total_user_mib = {}", space.total_user_bytes / (1024 * 1024));
        let _ = writeln!(out, "reserved_mib = {}", space.reserved_bytes / (1024 * 1024));
        let _ = writeln!(out, "default_stack_kib = {}", space.default_stack_kib);
        let _ = writeln!(out, "advice_max_kib = {}", space.advice_max_kib);
        let _ = writeln!(out, "low_frac = {}", rat_literal(space.zones.low_frac()));
        let _ = writeln!(out, "high_frac = {}", rat_literal(space.zones.high_frac()));
        let _ = writeln!(out, "monitor_period = {}", self.monitor_period);
        for spec in &self.threads {
            let _ = writeln!(out, "\n[thread]");
            let _ = writeln!(out, "count = {}", spec.count);
            let _ = writeln!(out, "group = {}", spec.group);
            let _ = writeln!(out, "nice = {}", spec.nice);
            let _ = writeln!(out, "policy = {}", spec.policy);
            let _ = writeln!(out, "criticality = {}", spec.criticality);
            let _ = writeln!(out, "role = {}", spec.role);
            let _ = writeln!(out, "behavior = {}", spec.behavior);
            let _ = writeln!(out, "stack = {}", spec.stack);
            if let Some(kib) = spec.request_kib {
                let _ = writeln!(out, "request_kib = {kib}");
            }
            let _ = writeln!(out, "arrival = {}", spec.arrival);
            let _ = writeln!(out, "arrival_step = {}", spec.arrival_step);
        }
        for event in &self.events {
            let _ = writeln!(out, "\n[events]");
            let _ = writeln!(out, "role = {}", event.role);
            let _ = writeln!(out, "start = {}", event.start);
            let _ = writeln!(out, "period = {}", event.period);
            let _ = writeln!(out, "jitter = {}", event.jitter);
            let _ = writeln!(out, "count = {}", event.count);
        }
        out
    }
}

fn behavior_ranges(behavior: &BehaviorTemplate) -> Vec<RangeSpec> {
    match behavior {
        BehaviorTemplate::Busy => vec![],
        BehaviorTemplate::Compute { ticks } => vec![*ticks],
        BehaviorTemplate::Loop { burst, block, .. } => vec![*burst, *block],
        BehaviorTemplate::Handler { compute } => vec![*compute],
    }
}

/// Renders a rational as `n/d` (or a bare integer), the literal form
/// the parser also accepts.
fn rat_literal(r: Rat) -> String {
    if r.is_integer() {
        format!("{}", r.to_integer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a fraction literal: decimal (`0.25`) or rational (`1/4`) or
/// integer (`1`). Exact; no floating point involved.
pub fn parse_fraction(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let numer: i128 = n.trim().parse().map_err(|_| format!("bad numerator in \"{s}\""))?;
        let denom: i128 = d.trim().parse().map_err(|_| format!("bad denominator in \"{s}\""))?;
        if denom == 0 {
            return Err(format!("zero denominator in \"{s}\""));
        }
        return Ok(Ratio::new(numer, denom));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1i128 } else { 1 };
        let int_part: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| format!("bad integer part in \"{s}\""))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad fractional part in \"{s}\""));
        }
        let frac_digits: i128 =
            frac.parse().map_err(|_| format!("fractional part too long in \"{s}\""))?;
        let scale = 10i128
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| format!("fractional part too long in \"{s}\""))?;
        return Ok(Ratio::from_integer(int_part) + Ratio::new(sign * frac_digits, scale));
    }
    let n: i128 = s.parse().map_err(|_| format!("bad number \"{s}\""))?;
    Ok(Ratio::from_integer(n))
}

/// One `name(key=value, ...)` call form, as used by behavior and stack
/// templates.
struct CallForm<'a> {
    name: &'a str,
    args: Vec<(Option<&'a str>, &'a str)>,
}

fn parse_call(s: &str) -> Result<CallForm<'_>, String> {
    let open = s.find('(').ok_or_else(|| format!("expected name(...) in \"{s}\""))?;
    if !s.trim_end().ends_with(')') {
        return Err(format!("unclosed parenthesis in \"{s}\""));
    }
    let name = s[..open].trim();
    let inner = s[open + 1..s.trim_end().len() - 1].trim();
    let mut args = Vec::new();
    if !inner.is_empty() {
        for part in inner.split(',') {
            let part = part.trim();
            match part.split_once('=') {
                Some((k, v)) => args.push((Some(k.trim()), v.trim())),
                None => args.push((None, part)),
            }
        }
    }
    Ok(CallForm { name, args })
}

fn parse_range(s: &str) -> Result<RangeSpec, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range low \"{s}\""))?;
        let hi: u64 = hi.trim().parse().map_err(|_| format!("bad range high \"{s}\""))?;
        if lo > hi {
            return Err(format!("range low exceeds high in \"{s}\""));
        }
        Ok(RangeSpec { lo, hi })
    } else {
        let n: u64 = s.trim().parse().map_err(|_| format!("bad number \"{s}\""))?;
        Ok(RangeSpec::fixed(n))
    }
}

fn parse_behavior(s: &str) -> Result<BehaviorTemplate, String> {
    let call = parse_call(s)?;
    match call.name {
        "busy" => {
            if !call.args.is_empty() {
                return Err("busy() takes no arguments".into());
            }
            Ok(BehaviorTemplate::Busy)
        }
        "compute" => {
            let [(None, arg)] = call.args.as_slice() else {
                return Err("compute(ticks) takes one positional argument".into());
            };
            Ok(BehaviorTemplate::Compute { ticks: parse_range(arg)? })
        }
        "loop" => {
            let mut burst = None;
            let mut block = None;
            let mut repeat = None;
            for (key, value) in &call.args {
                match *key {
                    Some("burst") => burst = Some(parse_range(value)?),
                    Some("block") => block = Some(parse_range(value)?),
                    Some("repeat") => {
                        repeat = Some(
                            value.parse::<u64>().map_err(|_| format!("bad repeat \"{value}\""))?,
                        )
                    }
                    _ => return Err(format!("unknown loop argument \"{}\"", value)),
                }
            }
            Ok(BehaviorTemplate::Loop {
                burst: burst.ok_or("loop(...) requires burst=")?,
                block: block.ok_or("loop(...) requires block=")?,
                repeat,
            })
        }
        "handler" => {
            let mut compute = None;
            for (key, value) in &call.args {
                match *key {
                    Some("compute") => compute = Some(parse_range(value)?),
                    _ => return Err(format!("unknown handler argument \"{}\"", value)),
                }
            }
            Ok(BehaviorTemplate::Handler { compute: compute.ok_or("handler(...) requires compute=")? })
        }
        other => Err(format!("unknown behavior \"{other}\"")),
    }
}

fn parse_stack(s: &str) -> Result<StackTemplate, String> {
    let call = parse_call(s)?;
    match call.name {
        "fixed" => {
            let [(None, arg)] = call.args.as_slice() else {
                return Err("fixed(kib) takes one positional argument".into());
            };
            let kib: u64 = arg.parse().map_err(|_| format!("bad size \"{arg}\""))?;
            Ok(StackTemplate::Fixed { kib })
        }
        "ramp" => {
            let mut peak = None;
            let mut over = None;
            let mut steps = None;
            for (key, value) in &call.args {
                let parsed: u64 = value.parse().map_err(|_| format!("bad number \"{value}\""))?;
                match *key {
                    Some("peak") => peak = Some(parsed),
                    Some("over") => over = Some(parsed),
                    Some("steps") => steps = Some(parsed),
                    _ => return Err(format!("unknown ramp argument \"{}\"", value)),
                }
            }
            Ok(StackTemplate::Ramp {
                peak_kib: peak.ok_or("ramp(...) requires peak=")?,
                over_ticks: over.ok_or("ramp(...) requires over=")?,
                steps: steps.ok_or("ramp(...) requires steps=")?,
            })
        }
        other => Err(format!("unknown stack template \"{other}\"")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Thread,
    Events,
}

/// Parses scenario text. Every error carries its line number.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut config = ScenarioConfig::default();
    let mut section = Section::Top;
    let mut shares: Option<[u32; 4]> = None;
    let mut low_frac: Option<Rat> = None;
    let mut high_frac: Option<Rat> = None;

    // Section accumulators.
    let mut thread: Option<ThreadSpec> = None;
    let mut events: Option<EventSpec> = None;

    fn finish_thread(
        config: &mut ScenarioConfig,
        thread: &mut Option<ThreadSpec>,
    ) {
        if let Some(spec) = thread.take() {
            config.threads.push(spec);
        }
    }
    fn finish_events(config: &mut ScenarioConfig, events: &mut Option<EventSpec>) {
        if let Some(spec) = events.take() {
            config.events.push(spec);
        }
    }

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::at(line_no, "unclosed section header"))?;
            finish_thread(&mut config, &mut thread);
            finish_events(&mut config, &mut events);
            section = match header.trim() {
                "thread" => {
                    thread = Some(ThreadSpec {
                        count: 1,
                        group: GroupName::Normal,
                        nice: 0,
                        policy: Policy::SchedNormal,
                        criticality: Criticality::NonTimeCritical,
                        role: String::new(),
                        behavior: BehaviorTemplate::Busy,
                        stack: StackTemplate::Fixed { kib: 64 },
                        request_kib: None,
                        arrival: 0,
                        arrival_step: 0,
                    });
                    Section::Thread
                }
                "events" => {
                    events = Some(EventSpec {
                        role: String::new(),
                        start: 0,
                        period: 100,
                        jitter: 0,
                        count: 0,
                    });
                    Section::Events
                }
                other => {
                    return Err(ScenarioError::at(line_no, format!("unknown section [{other}]")))
                }
            };
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ScenarioError::at(line_no, "expected key = value"))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |msg: String| ScenarioError::at(line_no, format!("{key}: {msg}"));
        let parse_u64 = |value: &str, what: &str| -> Result<u64, ScenarioError> {
            value
                .parse::<u64>()
                .map_err(|_| ScenarioError::at(line_no, format!("{key}: {what} \"{value}\"")))
        };

        match section {
            Section::Top => match key {
                "name" => config.name = value.to_string(),
                "seed" => config.seed = parse_u64(value, "bad seed")?,
                "horizon" => config.horizon_ticks = parse_u64(value, "bad horizon")?,
                "mode" => {
                    config.mode = ModeSpec::parse(value)
                        .ok_or_else(|| bad(format!("unknown mode \"{value}\"")))?
                }
                "weight_table" => {
                    config.weight_table = WeightTableKind::parse(value)
                        .ok_or_else(|| bad(format!("unknown weight table \"{value}\"")))?
                }
                "shares" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 4 {
                        return Err(bad("expected four comma-separated shares".into()));
                    }
                    let mut parsed = [0u32; 4];
                    for (slot, part) in parsed.iter_mut().zip(&parts) {
                        *slot = part
                            .parse()
                            .map_err(|_| bad(format!("bad share \"{part}\"")))?;
                    }
                    shares = Some(parsed);
                }
                "total_user_mib" => {
                    config.address_space.total_user_bytes =
                        parse_u64(value, "bad size")? * 1024 * 1024
                }
                "reserved_mib" => {
                    config.address_space.reserved_bytes =
                        parse_u64(value, "bad size")? * 1024 * 1024
                }
                "default_stack_kib" => {
                    config.address_space.default_stack_kib = parse_u64(value, "bad size")?
                }
                "advice_max_kib" => {
                    config.address_space.advice_max_kib = parse_u64(value, "bad size")?
                }
                "low_frac" => low_frac = Some(parse_fraction(value).map_err(bad)?),
                "high_frac" => high_frac = Some(parse_fraction(value).map_err(bad)?),
                "monitor_period" => config.monitor_period = parse_u64(value, "bad period")?,
                other => return Err(ScenarioError::at(line_no, format!("unknown key \"{other}\""))),
            },
            Section::Thread => {
                let spec = thread.as_mut().expect("in [thread] section");
                match key {
                    "count" => {
                        spec.count = value.parse::<u64>().map_err(|_| {
                            bad(format!("thread count must be a non-negative integer, got \"{value}\""))
                        })?
                    }
                    "group" => {
                        spec.group = GroupName::parse(value)
                            .ok_or_else(|| bad(format!("unknown group \"{value}\"")))?
                    }
                    "nice" => {
                        let nice: i8 = value
                            .parse()
                            .map_err(|_| bad(format!("bad nice \"{value}\"")))?;
                        NiceValue::new(nice).map_err(|e| bad(e.to_string()))?;
                        spec.nice = nice;
                    }
                    "policy" => {
                        spec.policy = match value {
                            "sched_normal" => Policy::SchedNormal,
                            "sched_tek" => Policy::SchedTek,
                            other => return Err(bad(format!("unknown policy \"{other}\""))),
                        }
                    }
                    "criticality" => {
                        spec.criticality = match value {
                            "time_critical" => Criticality::TimeCritical,
                            "non_time_critical" => Criticality::NonTimeCritical,
                            other => return Err(bad(format!("unknown criticality \"{other}\""))),
                        }
                    }
                    "role" => spec.role = value.to_string(),
                    "behavior" => spec.behavior = parse_behavior(value).map_err(bad)?,
                    "stack" => spec.stack = parse_stack(value).map_err(bad)?,
                    "request_kib" => spec.request_kib = Some(parse_u64(value, "bad size")?),
                    "arrival" => spec.arrival = parse_u64(value, "bad tick")?,
                    "arrival_step" => spec.arrival_step = parse_u64(value, "bad tick")?,
                    other => {
                        return Err(ScenarioError::at(line_no, format!("unknown key \"{other}\"")))
                    }
                }
            }
            Section::Events => {
                let spec = events.as_mut().expect("in [events] section");
                match key {
                    "role" => spec.role = value.to_string(),
                    "start" => spec.start = parse_u64(value, "bad tick")?,
                    "period" => spec.period = parse_u64(value, "bad period")?,
                    "jitter" => spec.jitter = parse_u64(value, "bad jitter")?,
                    "count" => {
                        spec.count = value.parse::<u64>().map_err(|_| {
                            bad(format!("event count must be a non-negative integer, got \"{value}\""))
                        })?
                    }
                    other => {
                        return Err(ScenarioError::at(line_no, format!("unknown key \"{other}\"")))
                    }
                }
            }
        }
    }
    finish_thread(&mut config, &mut thread);
    finish_events(&mut config, &mut events);

    if let Some([urgent, normal, service, background]) = shares {
        config.group_shares = GroupShares::new(&[
            (GroupName::Urgent, urgent),
            (GroupName::Normal, normal),
            (GroupName::Service, service),
            (GroupName::Background, background),
        ])
        .map_err(|e| ScenarioError::Invalid(format!("shares: {e}")))?;
    }
    if low_frac.is_some() || high_frac.is_some() {
        let defaults = StackZoneConfig::default();
        let low = low_frac.unwrap_or_else(|| defaults.low_frac());
        let high = high_frac.unwrap_or_else(|| defaults.high_frac());
        config.address_space.zones = StackZoneConfig::new(low, high)
            .map_err(|e| ScenarioError::Invalid(format!("low_frac/high_frac: {e}")))?;
    }
    config.validate()?;
    Ok(config)
}
