//! Discretized multivariate time series: boolean traces, sparse event lists,
//! CSV ingestion and threshold discretization of real-valued series.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: malformed row: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: event time out of range ({time} >= horizon {horizon})")]
    EventOutOfRange { line: u64, time: u64, horizon: u64 },
    #[error("line {line}: duplicate event ({time}, {variable})")]
    DuplicateEvent {
        line: u64,
        time: u64,
        variable: String,
    },
    #[error("trace has no ticks")]
    Empty,
    #[error("duplicate variable name '{0}'")]
    DuplicateVariable(String),
    #[error("trace dimensions do not match: {0}")]
    Shape(String),
    #[error("traces disagree on the variable list")]
    VariableMismatch,
    #[error("theta_down < theta_up required (got up {up}, down {down})")]
    ThresholdOrder { up: f64, down: f64 },
    #[error("non-finite value for '{variable}' at tick {tick}")]
    NonFinite { variable: String, tick: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A boolean matrix of variables by ticks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    variables: Vec<String>,
    columns: Vec<Vec<bool>>,
    len: usize,
}

impl Trace {
    /// Builds a trace from one column per variable.
    pub fn new(variables: Vec<String>, columns: Vec<Vec<bool>>) -> Result<Self, TraceError> {
        if variables.len() != columns.len() {
            return Err(TraceError::Shape(format!(
                "{} variables but {} columns",
                variables.len(),
                columns.len()
            )));
        }
        check_unique(&variables)?;
        let len = columns.first().map_or(0, Vec::len);
        if len == 0 {
            return Err(TraceError::Empty);
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != len) {
            return Err(TraceError::Shape(format!(
                "column '{}' has {} ticks, expected {len}",
                variables[i],
                c.len()
            )));
        }
        Ok(Trace {
            variables,
            columns,
            len,
        })
    }

    /// Builds a trace from per-tick labels, each a whitespace-separated list
    /// of the variables that hold at that tick.
    pub fn from_labels(variables: &[&str], ticks: &[&str]) -> Result<Self, TraceError> {
        let index: HashMap<&str, usize> =
            variables.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut columns = vec![vec![false; ticks.len()]; variables.len()];
        for (t, labels) in ticks.iter().enumerate() {
            for l in labels.split_whitespace() {
                let &i = index
                    .get(l)
                    .ok_or_else(|| TraceError::Shape(format!("unknown variable '{l}'")))?;
                columns[i][t] = true;
            }
        }
        Trace::new(variables.iter().map(|s| s.to_string()).collect(), columns)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn column(&self, name: &str) -> Option<&[bool]> {
        self.variable_index(name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn column_at(&self, index: usize) -> &[bool] {
        &self.columns[index]
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn value(&self, variable: usize, tick: usize) -> bool {
        self.columns[variable][tick]
    }

    /// Sparse view of the trace, sorted by time then variable name.
    pub fn to_events(&self) -> EventList {
        let mut events = Vec::new();
        for (v, col) in self.columns.iter().enumerate() {
            for (t, &on) in col.iter().enumerate() {
                if on {
                    events.push(Event {
                        time: t as u64,
                        variable: self.variables[v].clone(),
                    });
                }
            }
        }
        events.sort();
        EventList {
            variables: self.variables.clone(),
            horizon: self.len as u64,
            events,
        }
    }
}

fn check_unique(variables: &[String]) -> Result<(), TraceError> {
    let mut seen = BTreeSet::new();
    for v in variables {
        if !seen.insert(v.as_str()) {
            return Err(TraceError::DuplicateVariable(v.clone()));
        }
    }
    Ok(())
}

/// One or more traces over the same variables. Transitions and windows never
/// cross from one member trace into the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSet {
    variables: Vec<String>,
    traces: Vec<Trace>,
}

impl TraceSet {
    pub fn new(traces: Vec<Trace>) -> Result<Self, TraceError> {
        let first = traces.first().ok_or(TraceError::Empty)?;
        let variables = first.variables.clone();
        if traces.iter().any(|t| t.variables != variables) {
            return Err(TraceError::VariableMismatch);
        }
        Ok(TraceSet { variables, traces })
    }

    pub fn single(trace: Trace) -> Self {
        TraceSet {
            variables: trace.variables.clone(),
            traces: vec![trace],
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn total_ticks(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    /// Appends the traces of `other`, which must share the variable list.
    pub fn extend(&mut self, other: TraceSet) -> Result<(), TraceError> {
        if other.variables != self.variables {
            return Err(TraceError::VariableMismatch);
        }
        self.traces.extend(other.traces);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub time: u64,
    pub variable: String,
}

/// Sparse event records over `0..horizon`, sorted by time then variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventList {
    variables: Vec<String>,
    horizon: u64,
    events: Vec<Event>,
}

impl EventList {
    /// Sorts the events and checks range and uniqueness. Variables named by
    /// events but missing from `variables` are appended in order of first use.
    pub fn new(
        mut variables: Vec<String>,
        mut events: Vec<Event>,
        horizon: u64,
    ) -> Result<Self, TraceError> {
        check_unique(&variables)?;
        let mut known: BTreeSet<String> = variables.iter().cloned().collect();
        for e in &events {
            if e.time >= horizon {
                return Err(TraceError::EventOutOfRange {
                    line: 0,
                    time: e.time,
                    horizon,
                });
            }
            if known.insert(e.variable.clone()) {
                variables.push(e.variable.clone());
            }
        }
        events.sort();
        if let Some(w) = events.windows(2).find(|w| w[0] == w[1]) {
            return Err(TraceError::DuplicateEvent {
                line: 0,
                time: w[0].time,
                variable: w[0].variable.clone(),
            });
        }
        Ok(EventList {
            variables,
            horizon,
            events,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Firing times of one variable, ascending.
    pub fn times_of(&self, variable: &str) -> Vec<u64> {
        self.events
            .iter()
            .filter(|e| e.variable == variable)
            .map(|e| e.time)
            .collect()
    }

    /// Densifies into a boolean trace of length `horizon`.
    pub fn to_trace(&self) -> Result<Trace, TraceError> {
        let len = usize::try_from(self.horizon)
            .map_err(|_| TraceError::Shape("horizon too large".into()))?;
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut columns = vec![vec![false; len]; self.variables.len()];
        for e in &self.events {
            columns[index[e.variable.as_str()]][e.time as usize] = true;
        }
        Trace::new(self.variables.clone(), columns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Header `time,<var>...`, one row of 0/1 cells per tick.
    WideCsv,
    /// Headerless `<time>,<variable>` rows.
    EventCsv,
}

/// Loads one trace in the given format. `horizon` sets the length of an
/// event-csv trace; without it the trace ends at the last event.
pub fn load_traces<R: Read>(
    source: R,
    format: Format,
    horizon: Option<u64>,
) -> Result<TraceSet, TraceError> {
    let trace = match format {
        Format::WideCsv => {
            let (variables, rows) = read_wide(source, |cell| match cell {
                "0" => Some(false),
                "1" => Some(true),
                _ => None,
            })?;
            let mut columns = vec![Vec::with_capacity(rows.len()); variables.len()];
            for row in rows {
                for (col, v) in columns.iter_mut().zip(row) {
                    col.push(v);
                }
            }
            Trace::new(variables, columns)?
        }
        Format::EventCsv => read_events(source, horizon)?.to_trace()?,
    };
    Ok(TraceSet::single(trace))
}

/// Parses headerless `<time>,<variable>` rows.
pub fn read_events<R: Read>(source: R, horizon: Option<u64>) -> Result<EventList, TraceError> {
    let mut reader = csv_reader(source, false);
    let mut variables = Vec::new();
    let mut known = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut events = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(TraceError::Malformed {
                line,
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let time: u64 = record[0].parse().map_err(|_| TraceError::Malformed {
            line,
            reason: format!("bad time '{}'", &record[0]),
        })?;
        let variable = record[1].to_string();
        if variable.is_empty() {
            return Err(TraceError::Malformed {
                line,
                reason: "empty variable name".into(),
            });
        }
        if let Some(h) = horizon {
            if time >= h {
                return Err(TraceError::EventOutOfRange {
                    line,
                    time,
                    horizon: h,
                });
            }
        }
        if !seen.insert((time, variable.clone())) {
            return Err(TraceError::DuplicateEvent {
                line,
                time,
                variable,
            });
        }
        if known.insert(variable.clone()) {
            variables.push(variable.clone());
        }
        events.push(Event { time, variable });
    }
    let horizon = match horizon {
        Some(h) => h,
        None => events
            .iter()
            .map(|e| e.time + 1)
            .max()
            .ok_or(TraceError::Empty)?,
    };
    EventList::new(variables, events, horizon)
}

/// Real-valued series, one row per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub variables: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Parses a wide csv whose cells are real numbers.
pub fn load_series<R: Read>(source: R) -> Result<Series, TraceError> {
    let (variables, rows) = read_wide(source, |cell| cell.parse::<f64>().ok())?;
    let mut values = vec![Vec::with_capacity(rows.len()); variables.len()];
    for row in rows {
        for (col, v) in values.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(Series { variables, values })
}

fn csv_reader<R: Read>(source: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn read_wide<R: Read, T>(
    source: R,
    cell: impl Fn(&str) -> Option<T>,
) -> Result<(Vec<String>, Vec<Vec<T>>), TraceError> {
    let mut reader = csv_reader(source, true);
    let header = reader.headers()?.clone();
    if header.get(0) != Some("time") {
        return Err(TraceError::Malformed {
            line: 1,
            reason: "header must start with 'time'".into(),
        });
    }
    let variables: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    check_unique(&variables)?;
    let mut rows = Vec::new();
    for (tick, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != variables.len() + 1 {
            return Err(TraceError::Malformed {
                line,
                reason: format!(
                    "expected {} fields, found {}",
                    variables.len() + 1,
                    record.len()
                ),
            });
        }
        if record[0].parse::<u64>().ok() != Some(tick as u64) {
            return Err(TraceError::Malformed {
                line,
                reason: format!("expected time {tick}, found '{}'", &record[0]),
            });
        }
        let row = record
            .iter()
            .skip(1)
            .map(|c| {
                cell(c).ok_or_else(|| TraceError::Malformed {
                    line,
                    reason: format!("bad cell '{c}'"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok((variables, rows))
}

/// Thresholds used when no explicit values are given.
pub const DEFAULT_THETA_UP: f64 = 0.5;
pub const DEFAULT_THETA_DOWN: f64 = -0.5;

/// Turns each real series `v` into atoms `v_up` (value >= theta_up) and
/// `v_down` (value <= theta_down).
pub fn discretize(series: &Series, theta_up: f64, theta_down: f64) -> Result<Trace, TraceError> {
    if !(theta_down < theta_up) {
        return Err(TraceError::ThresholdOrder {
            up: theta_up,
            down: theta_down,
        });
    }
    let mut variables = Vec::with_capacity(series.variables.len() * 2);
    let mut columns = Vec::with_capacity(series.variables.len() * 2);
    for (name, values) in series.variables.iter().zip(&series.values) {
        if let Some(tick) = values.iter().position(|v| !v.is_finite()) {
            return Err(TraceError::NonFinite {
                variable: name.clone(),
                tick,
            });
        }
        variables.push(format!("{name}_up"));
        columns.push(values.iter().map(|&v| v >= theta_up).collect());
        variables.push(format!("{name}_down"));
        columns.push(values.iter().map(|&v| v <= theta_down).collect());
    }
    Trace::new(variables, columns)
}

/// Writes `<time>,<variable>` rows in sorted order.
pub fn write_events<W: Write>(events: &EventList, mut out: W) -> std::io::Result<()> {
    for e in &events.events {
        writeln!(out, "{},{}", e.time, e.variable)?;
    }
    Ok(())
}

pub fn write_wide<W: Write>(trace: &Trace, mut out: W) -> std::io::Result<()> {
    write!(out, "time")?;
    for v in &trace.variables {
        write!(out, ",{v}")?;
    }
    writeln!(out)?;
    for t in 0..trace.len {
        write!(out, "{t}")?;
        for col in &trace.columns {
            write!(out, ",{}", u8::from(col[t]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
