//! Experiment reports and their JSON / CSV serializations.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// Direction of a certified comparison `lhs ~ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    Leq,
    Geq,
}

/// Whether a tolerance is absolute or relative to `max(|lhs|, |rhs|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    Absolute,
    Relative,
}

/// Outcome of one named comparison aggregated over all trials; `lhs` and
/// `rhs` come from the trial with the largest violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    pub observations: usize,
    pub worst_violation: f64,
    pub pass: bool,
}

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// Measured quantities and verdicts for one experiment run.
///
/// The headline fields (`lhs`, `rhs`, `relation`, `tolerance`) describe the
/// primary claim at its worst trial. `pass` holds iff every entry of
/// `checks` passed; the first check is the headline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    pub ratio: Option<f64>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub metadata: BTreeMap<String, Value>,
    pub trials: Vec<TrialRow>,
}

impl ExperimentReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.metadata.get(key).and_then(Value::as_f64)
    }
}

/// Accumulates one comparison across trials.
#[derive(Debug, Clone)]
pub struct Tracker {
    name: String,
    relation: Relation,
    tolerance: f64,
    kind: ToleranceKind,
    worst: Option<(f64, f64, f64)>,
    observations: usize,
    pass: bool,
}

impl Tracker {
    pub fn new(name: &str, relation: Relation, tolerance: f64, kind: ToleranceKind) -> Self {
        Self { name: name.to_string(), relation, tolerance, kind, worst: None, observations: 0, pass: true }
    }

    pub fn equal_rel(name: &str, tol: f64) -> Self {
        Self::new(name, Relation::Equal, tol, ToleranceKind::Relative)
    }

    pub fn equal_abs(name: &str, tol: f64) -> Self {
        Self::new(name, Relation::Equal, tol, ToleranceKind::Absolute)
    }

    pub fn leq_abs(name: &str, tol: f64) -> Self {
        Self::new(name, Relation::Leq, tol, ToleranceKind::Absolute)
    }

    pub fn leq_rel(name: &str, tol: f64) -> Self {
        Self::new(name, Relation::Leq, tol, ToleranceKind::Relative)
    }

    pub fn geq_abs(name: &str, tol: f64) -> Self {
        Self::new(name, Relation::Geq, tol, ToleranceKind::Absolute)
    }

    /// Records one comparison; returns whether it holds within tolerance.
    pub fn observe(&mut self, lhs: f64, rhs: f64) -> bool {
        self.observations += 1;
        let scale = match self.kind {
            ToleranceKind::Absolute => 1.0,
            ToleranceKind::Relative => lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE),
        };
        let violation = match self.relation {
            Relation::Equal => (lhs - rhs).abs() / scale,
            Relation::Leq => (lhs - rhs) / scale,
            Relation::Geq => (rhs - lhs) / scale,
        };
        let ok = violation.is_finite() && violation <= self.tolerance;
        if !ok {
            self.pass = false;
        }
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.worst.is_none_or(|(_, _, w)| v > w) {
            self.worst = Some((lhs, rhs, v));
        }
        ok
    }

    pub fn passed(&self) -> bool {
        self.pass
    }

    pub fn finish(self) -> Check {
        let (lhs, rhs, worst) = self.worst.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        Check {
            name: self.name,
            lhs,
            rhs,
            relation: self.relation,
            tolerance: self.tolerance,
            tolerance_kind: self.kind,
            observations: self.observations,
            worst_violation: worst,
            // a check that never ran certifies nothing
            pass: self.pass && self.observations > 0,
        }
    }
}

/// Assembles an [`ExperimentReport`] from trackers, rows and metadata.
#[derive(Debug)]
pub struct ReportBuilder {
    name: String,
    p: f64,
    n: usize,
    trackers: Vec<Tracker>,
    metadata: BTreeMap<String, Value>,
    trials: Vec<TrialRow>,
}

impl ReportBuilder {
    pub fn new(name: impl Into<String>, p: f64, n: usize) -> Self {
        Self { name: name.into(), p, n, trackers: Vec::new(), metadata: BTreeMap::new(), trials: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    pub fn row(&mut self, lhs: f64, rhs: f64, pass: bool) {
        let trial = self.trials.len();
        self.trials.push(TrialRow { trial, lhs, rhs, ratio: ratio(lhs, rhs), pass });
    }

    /// Adds checks in order; the first one becomes the headline.
    pub fn checks(&mut self, trackers: impl IntoIterator<Item = Tracker>) {
        self.trackers.extend(trackers);
    }

    pub fn finish(self) -> ExperimentReport {
        let checks: Vec<Check> = self.trackers.into_iter().map(Tracker::finish).collect();
        let head = checks.first().cloned().unwrap_or(Check {
            name: "none".into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation: Relation::Equal,
            tolerance: 0.0,
            tolerance_kind: ToleranceKind::Absolute,
            observations: 0,
            worst_violation: f64::NAN,
            pass: false,
        });
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        ExperimentReport {
            name: self.name,
            p: self.p,
            n: self.n,
            lhs: head.lhs,
            rhs: head.rhs,
            relation: head.relation,
            tolerance: head.tolerance,
            tolerance_kind: head.tolerance_kind,
            ratio: ratio(head.lhs, head.rhs),
            pass,
            checks,
            metadata: self.metadata,
            trials: self.trials,
        }
    }
}

fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    (rhs != 0.0 && rhs.is_finite() && lhs.is_finite()).then(|| lhs / rhs)
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_sci17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `{:.9e}`: 10 significant digits for human-readable tables.
pub fn fmt_sci10(x: f64) -> String {
    format!("{x:.9e}")
}

/// Pretty JSON whose floats are written in fixed scientific notation with
/// 17 significant digits.
struct SciFormatter<'a> {
    pretty: PrettyFormatter<'a>,
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_sci17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Serializes any value as pretty JSON with 17-digit scientific floats.
/// Non-finite floats become `null`.
pub fn to_json_string<S: Serialize + ?Sized>(value: &S) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let fmt = SciFormatter { pretty: PrettyFormatter::with_indent(b"  ") };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

#[derive(Serialize)]
struct ReportFile<'a> {
    all_pass: bool,
    reports: &'a [ExperimentReport],
}

/// Full JSON document for a batch of reports.
pub fn reports_to_json(reports: &[ExperimentReport]) -> serde_json::Result<String> {
    to_json_string(&ReportFile { all_pass: reports.iter().all(|r| r.pass), reports })
}

/// One CSV row per trial: `experiment,p,N,lhs,rhs,ratio,pass`.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> csv::Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["experiment", "p", "N", "lhs", "rhs", "ratio", "pass"])?;
    for r in reports {
        for t in &r.trials {
            wtr.write_record([
                r.name.clone(),
                fmt_sci17(r.p),
                r.n.to_string(),
                fmt_sci17(t.lhs),
                fmt_sci17(t.rhs),
                t.ratio.map(fmt_sci17).unwrap_or_default(),
                t.pass.to_string(),
            ])?;
        }
    }
    let bytes = wtr.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv emits UTF-8"))
}
