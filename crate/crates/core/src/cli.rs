//! Config-driven analysis runs.
//!
//! A run reads a TOML problem description, performs the requested analyses
//! in order and writes one JSON report plus optional CSV series files. The
//! config, report and series formats each carry a version tag; see the
//! repository README for the schema.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::budget::RaySegmentSet;
use crate::demand::{demand, indirect_utility, DemandResult, Maximizers, SolveMethod, SolverConfig};
use crate::oracles::{aubin_inclusion_test, difference_quotients, dini_pair, AubinConfig, SamplingSchedule};
use crate::subdiff::{
    limiting_subdiff_estimate, rate_of_change_bounds, Estimate, Exactness, Hypotheses, Hypothesis, LimitingMode,
    SubdiffReport,
};
use crate::utility::{check_nsc, UtilityModel};
use crate::Error;

pub const CONFIG_FORMAT: &str = "consumer-sensitivity/config-v1";
pub const REPORT_FORMAT: &str = "consumer-sensitivity/report-v1";
pub const SERIES_FORMAT: &str = "consumer-sensitivity/series-v1";

pub const EXIT_OK: i32 = 0;
/// Reserved for command-line usage errors.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;
pub const EXIT_IO: i32 = 6;

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub format: String,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    /// Hypotheses asserted by the author of the config.
    #[serde(default)]
    pub hypotheses: Vec<Hypothesis>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, rename = "analysis")]
    pub analyses: Vec<Analysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    CobbDouglas {
        #[serde(default = "one")]
        scale: f64,
        exponents: Vec<f64>,
    },
    Linear {
        coefficients: Vec<f64>,
    },
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        value_at_first: f64,
    },
    CappedIdentity {
        cap: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self) -> Result<UtilityModel, Error> {
        match self {
            ModelSpec::CobbDouglas { scale, exponents } => UtilityModel::cobb_douglas(*scale, exponents.clone()),
            ModelSpec::Linear { coefficients } => UtilityModel::linear(coefficients.clone()),
            ModelSpec::PiecewiseLinear { breakpoints, slopes, value_at_first } => {
                UtilityModel::piecewise_linear_1d(breakpoints.clone(), slopes.clone(), *value_at_first)
            }
            ModelSpec::CappedIdentity { cap } => UtilityModel::capped_identity(*cap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Classification of `<p, x> = 1`.
    pub boundary: f64,
    /// Projected-gradient stationarity.
    pub solver: f64,
    /// Non-satiety scan.
    pub nsc: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { boundary: 1e-9, solver: 1e-10, nsc: 1e-6, fd_step: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSpec {
    pub t0: f64,
    pub ratio: f64,
    pub count: usize,
    pub radius: f64,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        let s = SamplingSchedule::default();
        Self { t0: s.t0(), ratio: s.ratio(), count: s.count(), radius: s.radius() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Report file name, relative to the output directory.
    pub report: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { report: "report.json".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    InnerSemicontinuous,
    InnerSemicompact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    VAlongRay,
    DiniTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPrices {
    pub count: usize,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Demand {
        price: Vec<f64>,
    },
    Subdiff {
        price: Vec<f64>,
        /// Demand point; computed by the solver when absent.
        point: Option<Vec<f64>>,
        mode: ModeSpec,
    },
    RateBounds {
        price: Vec<f64>,
        point: Option<Vec<f64>>,
        mode: ModeSpec,
        directions: Vec<Vec<f64>>,
        /// Also report sampled Dini derivatives.
        #[serde(default)]
        dini: bool,
    },
    NscScan {
        #[serde(default)]
        prices: Vec<Vec<f64>>,
        random: Option<RandomPrices>,
    },
    Aubin {
        price: Vec<f64>,
        point: Vec<f64>,
        #[serde(default = "default_radius")]
        price_radius: f64,
        #[serde(default = "default_radius")]
        point_radius: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Series {
        series: SeriesKind,
        price: Vec<f64>,
        direction: Vec<f64>,
        /// Ray length for `v_along_ray`: `p = price + t direction`, `t ∈ [0, t_max]`.
        #[serde(default)]
        t_max: f64,
        #[serde(default = "default_points")]
        points: usize,
        file: String,
    },
}

fn default_radius() -> f64 {
    0.1
}

fn default_samples() -> usize {
    1000
}

fn default_points() -> usize {
    100
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ProblemConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Format tag and dimension consistency across model, prices, points and
    /// directions.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.format != CONFIG_FORMAT {
            return Err(CliError::Config(format!("format must be \"{CONFIG_FORMAT}\", got \"{}\"", self.format)));
        }
        let n = self.model.build().map_err(|e| CliError::Config(e.to_string()))?.dim();
        let check = |what: &str, v: &[f64]| -> Result<(), CliError> {
            if v.len() != n {
                return Err(CliError::Config(format!("{what} has {} entries but the model has {n} goods", v.len())));
            }
            Ok(())
        };
        for (i, a) in self.analyses.iter().enumerate() {
            let tag = |field: &str| format!("analysis {i} {field}");
            match a {
                Analysis::Demand { price } => check(&tag("price"), price)?,
                Analysis::Subdiff { price, point, .. } => {
                    check(&tag("price"), price)?;
                    if let Some(x) = point {
                        check(&tag("point"), x)?;
                    }
                }
                Analysis::RateBounds { price, point, directions, .. } => {
                    check(&tag("price"), price)?;
                    if let Some(x) = point {
                        check(&tag("point"), x)?;
                    }
                    for q in directions {
                        check(&tag("direction"), q)?;
                    }
                }
                Analysis::NscScan { prices, random } => {
                    for p in prices {
                        check(&tag("price"), p)?;
                    }
                    if let Some(r) = random {
                        if !(r.low > 0.0 && r.high >= r.low) {
                            return Err(CliError::Config(format!("{}: need 0 < low <= high", tag("random"))));
                        }
                    }
                }
                Analysis::Aubin { price, point, .. } => {
                    check(&tag("price"), price)?;
                    check(&tag("point"), point)?;
                }
                Analysis::Series { price, direction, file, points, .. } => {
                    check(&tag("price"), price)?;
                    check(&tag("direction"), direction)?;
                    if *points == 0 {
                        return Err(CliError::Config(format!("{} must be at least 1", tag("points"))));
                    }
                    if file.is_empty() || Path::new(file).is_absolute() || file.contains("..") {
                        return Err(CliError::Config(format!("{} must be a relative file name", tag("file"))));
                    }
                }
            }
        }
        self.schedule()?;
        Ok(())
    }

    pub fn schedule(&self) -> Result<SamplingSchedule, CliError> {
        let s = &self.schedule;
        SamplingSchedule::new(s.t0, s.ratio, s.count, s.radius).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn hypotheses(&self) -> Hypotheses {
        self.hypotheses.iter().copied().collect()
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig { tol: self.tolerances.solver, ..SolverConfig::default() }
    }
}

// ---------------------------------------------------------------- errors

#[derive(Debug)]
pub enum CliError {
    /// Unparseable or schema-invalid config.
    Config(String),
    /// A solver failed or could not decide.
    Solver(Error),
    /// Input outside the hypotheses of a computation, or a missing or
    /// contradicted hypothesis assertion.
    Validation(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Validation(e) => write!(f, "validation error: {e}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. }
            | Error::GridTooLarge { .. }
            | Error::Indeterminate(_)
            | Error::UnboundedUtility
            | Error::UnboundedProjection
            | Error::Unsupported(_)
            | Error::NotDifferentiable(_) => CliError::Solver(e),
            _ => CliError::Validation(e),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------- report

/// An extended real, serialized as a number or as `"+inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("+inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal(v)),
            Raw::Text(t) if t == "+inf" => Ok(ExtReal(f64::INFINITY)),
            Raw::Text(t) if t == "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number, \"+inf\" or \"-inf\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaximizersOut {
    Points { points: Vec<Vec<f64>> },
    Interval { lo: f64, hi: ExtReal },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOut {
    pub base: Vec<f64>,
    pub lambda_lo: f64,
    pub lambda_hi: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetOut {
    Empty,
    Zero,
    Union { segments: Vec<SegmentOut> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOut {
    pub set: SetOut,
    pub exactness: Exactness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdiffOut {
    pub price: Vec<f64>,
    pub demand_points: Vec<Vec<f64>>,
    pub frechet: Option<EstimateOut>,
    pub limiting: EstimateOut,
    pub singular: EstimateOut,
    pub hypotheses_used: Vec<Hypothesis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateOut {
    pub direction: Vec<f64>,
    pub upper: ExtReal,
    pub lower: ExtReal,
    pub clarke_support: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dini_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dini_lower: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NscViolationOut {
    pub price: Vec<f64>,
    pub point: Vec<f64>,
    pub budget_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisResult {
    Demand {
        price: Vec<f64>,
        value: f64,
        method: String,
        residual: f64,
        maximizers: MaximizersOut,
    },
    Subdiff(SubdiffOut),
    RateBounds {
        subdiff: SubdiffOut,
        bounds: Vec<RateOut>,
    },
    NscScan {
        prices_checked: usize,
        points_checked: usize,
        passed: bool,
        violations: Vec<NscViolationOut>,
    },
    Aubin {
        price: Vec<f64>,
        point: Vec<f64>,
        ell: Option<f64>,
        max_ratio: f64,
        samples_used: usize,
        skipped: usize,
    },
    Series {
        series: SeriesKind,
        file: String,
        rows: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub format: String,
    pub seed: u64,
    pub model: ModelSpec,
    pub hypotheses: Vec<Hypothesis>,
    pub results: Vec<AnalysisResult>,
}

impl From<&Maximizers> for MaximizersOut {
    fn from(m: &Maximizers) -> Self {
        match m {
            Maximizers::Points(p) => MaximizersOut::Points { points: p.clone() },
            Maximizers::Interval1D { lo, hi } => MaximizersOut::Interval { lo: *lo, hi: ExtReal(*hi) },
        }
    }
}

impl From<&RaySegmentSet> for SetOut {
    fn from(s: &RaySegmentSet) -> Self {
        match s {
            RaySegmentSet::Empty => SetOut::Empty,
            RaySegmentSet::ZeroSingleton => SetOut::Zero,
            RaySegmentSet::Union(segs) => SetOut::Union {
                segments: segs
                    .iter()
                    .map(|s| {
                        let (lo, hi) = s.lambdas.bounds().unwrap_or((f64::NAN, f64::NAN));
                        SegmentOut { base: s.base.clone(), lambda_lo: lo, lambda_hi: ExtReal(hi) }
                    })
                    .collect(),
            },
        }
    }
}

impl From<&Estimate> for EstimateOut {
    fn from(e: &Estimate) -> Self {
        EstimateOut { set: (&e.set).into(), exactness: e.exactness }
    }
}

impl From<&SubdiffReport> for SubdiffOut {
    fn from(r: &SubdiffReport) -> Self {
        SubdiffOut {
            price: r.p_bar.clone(),
            demand_points: r.demand_points.clone(),
            frechet: r.frechet.as_ref().map(Into::into),
            limiting: (&r.limiting).into(),
            singular: (&r.singular).into(),
            hypotheses_used: r.hypotheses_used.clone(),
        }
    }
}

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::ClosedForm => "closed_form",
        SolveMethod::ProjectedGradient => "projected_gradient",
        SolveMethod::Grid => "grid",
    }
}

/// JSON formatter writing every float with 17 significant digits, so that
/// report text round-trips bit-exactly.
struct FullPrecision(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

impl ReportDoc {
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(Default::default()));
        self.serialize(&mut ser).expect("report types always serialize");
        buf.push(b'\n');
        String::from_utf8(buf).expect("serde_json writes UTF-8")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: ReportDoc = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if doc.format != REPORT_FORMAT {
            return Err(CliError::Config(format!("unknown report format {:?}", doc.format)));
        }
        Ok(doc)
    }

    /// One line per analysis, for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let line = match r {
                AnalysisResult::Demand { price, value, method, .. } => {
                    format!("demand at {price:?}: v = {value} ({method})")
                }
                AnalysisResult::Subdiff(s) => format!(
                    "subdifferential at {:?}: limiting {}, singular {}, frechet {}",
                    s.price,
                    describe(&s.limiting),
                    describe(&s.singular),
                    s.frechet.as_ref().map(describe).unwrap_or_else(|| "not applicable".into())
                ),
                AnalysisResult::RateBounds { subdiff, bounds } => {
                    let parts: Vec<String> = bounds
                        .iter()
                        .map(|b| format!("q={:?}: [{}, {}]", b.direction, fmt_ext(b.lower.0), fmt_ext(b.upper.0)))
                        .collect();
                    format!("rate bounds at {:?}: {}", subdiff.price, parts.join("; "))
                }
                AnalysisResult::NscScan { prices_checked, violations, .. } => {
                    format!("non-satiety scan: {} violations over {prices_checked} prices", violations.len())
                }
                AnalysisResult::Aubin { price, ell, max_ratio, .. } => match ell {
                    Some(l) => format!("Aubin test at {price:?}: ell = {l} (max ratio {max_ratio})"),
                    None => format!("Aubin test at {price:?}: no modulus on the grid (max ratio {max_ratio})"),
                },
                AnalysisResult::Series { file, rows, .. } => format!("series {file}: {rows} rows"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn fmt_ext(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn describe(e: &EstimateOut) -> String {
    let set = match &e.set {
        SetOut::Empty => "empty".to_string(),
        SetOut::Zero => "{0}".to_string(),
        SetOut::Union { segments } => segments
            .iter()
            .map(|s| format!("[{}, {}]·{:?}", s.lambda_lo, fmt_ext(s.lambda_hi.0), s.base))
            .collect::<Vec<_>>()
            .join(" ∪ "),
    };
    let tag = match e.exactness {
        Exactness::Exact => "exact",
        Exactness::UpperBound => "upper bound",
        Exactness::EmptyByTheorem => "empty",
    };
    format!("{set} ({tag})")
}

// ---------------------------------------------------------------- series

/// A CSV series: `#` metadata lines, a header row and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub kind: SeriesKind,
    pub columns: [&'static str; 2],
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<(f64, f64)>,
}

impl Series {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# format={SERIES_FORMAT}\n");
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&format!("{},{}\n", self.columns[0], self.columns[1]));
        for (a, b) in &self.rows {
            out.push_str(&format!("{a:.16e},{b:.16e}\n"));
        }
        out
    }
}

/// `v(p̄ + t q)` for `points` evenly spaced `t ∈ [0, t_max]`, or
/// `(t, (v(p̄ + t q) - v(p̄)) / t)` over the Dini schedule.
///
/// A zero-length ray (`t_max = 0` or `q = 0`) yields a single row.
#[allow(clippy::too_many_arguments)]
pub fn emit_series(
    kind: SeriesKind,
    u: &UtilityModel,
    p_bar: &[f64],
    q: &[f64],
    t_max: f64,
    points: usize,
    sched: &SamplingSchedule,
    cfg: &SolverConfig,
) -> Result<Series, Error> {
    let mut metadata = vec![
        ("series".to_string(), format!("{kind:?}")),
        ("price".to_string(), format!("{p_bar:?}")),
        ("direction".to_string(), format!("{q:?}")),
    ];
    let (columns, rows) = match kind {
        SeriesKind::VAlongRay => {
            metadata.push(("t_max".into(), format!("{t_max:?}")));
            let degenerate = t_max == 0.0 || q.iter().all(|&v| v == 0.0) || points == 1;
            let count = if degenerate { 1 } else { points };
            let mut rows = Vec::with_capacity(count);
            for k in 0..count {
                let t = if count == 1 { 0.0 } else { t_max * k as f64 / (count - 1) as f64 };
                let p: Vec<f64> = p_bar.iter().zip(q).map(|(a, b)| a + t * b).collect();
                rows.push((t, indirect_utility(u, &p, cfg)?));
            }
            (["t", "v"], rows)
        }
        SeriesKind::DiniTrace => {
            metadata.push(("t0".into(), format!("{:?}", sched.t0())));
            metadata.push(("ratio".into(), format!("{:?}", sched.ratio())));
            (["t", "quotient"], difference_quotients(u, p_bar, q, sched, cfg)?)
        }
    };
    Ok(Series { kind, columns, metadata, rows })
}

// ---------------------------------------------------------------- run

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub verbose: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: ReportDoc,
    /// Series files as `(relative file name, contents)`.
    pub series: Vec<(String, String)>,
}

fn limiting_mode(
    u: &UtilityModel,
    price: &[f64],
    point: &Option<Vec<f64>>,
    mode: ModeSpec,
    cfg: &SolverConfig,
) -> Result<LimitingMode, Error> {
    let solved = || demand(u, price, cfg).map(|r: DemandResult| r.maximizers);
    Ok(match mode {
        ModeSpec::InnerSemicontinuous => LimitingMode::InnerSemicontinuous {
            x_bar: match point {
                Some(x) => x.clone(),
                None => solved()?.sample_points(0).remove(0),
            },
        },
        ModeSpec::InnerSemicompact => LimitingMode::InnerSemicompact {
            demand: match point {
                Some(x) => Maximizers::Points(vec![x.clone()]),
                None => solved()?,
            },
        },
    })
}

/// Runs every analysis of a validated config without touching the file
/// system.
pub fn run_config(config: &ProblemConfig, seed: u64) -> Result<RunOutput, CliError> {
    config.validate()?;
    let u = config.model.build().map_err(|e| CliError::Config(e.to_string()))?;
    let hyps = config.hypotheses();
    let cfg = config.solver();
    let sched = config.schedule()?;
    let tol = config.tolerances.boundary;
    let mut results = Vec::new();
    let mut series = Vec::new();

    for (index, analysis) in config.analyses.iter().enumerate() {
        let local_seed = seed.wrapping_add(index as u64);
        let result = match analysis {
            Analysis::Demand { price } => {
                let r = demand(&u, price, &cfg)?;
                AnalysisResult::Demand {
                    price: price.clone(),
                    value: r.value,
                    method: method_name(r.method).into(),
                    residual: r.residual,
                    maximizers: (&r.maximizers).into(),
                }
            }
            Analysis::Subdiff { price, point, mode } => {
                let mode = limiting_mode(&u, price, point, *mode, &cfg)?;
                AnalysisResult::Subdiff((&limiting_subdiff_estimate(&u, price, &mode, &hyps, tol)?).into())
            }
            Analysis::RateBounds { price, point, mode, directions, dini } => {
                let mode = limiting_mode(&u, price, point, *mode, &cfg)?;
                let report = limiting_subdiff_estimate(&u, price, &mode, &hyps, tol)?;
                let mut bounds = Vec::new();
                for q in directions {
                    let b = rate_of_change_bounds(&report, q, &hyps)?;
                    let (dini_lower, dini_upper) = if *dini {
                        let (lo, hi) = dini_pair(&u, price, q, &sched, &cfg)?;
                        (Some(lo), Some(hi))
                    } else {
                        (None, None)
                    };
                    bounds.push(RateOut {
                        direction: q.clone(),
                        upper: ExtReal(b.upper),
                        lower: ExtReal(b.lower),
                        clarke_support: ExtReal(b.clarke_support),
                        dini_upper,
                        dini_lower,
                    });
                }
                AnalysisResult::RateBounds { subdiff: (&report).into(), bounds }
            }
            Analysis::NscScan { prices, random } => {
                let mut all = prices.clone();
                if let Some(r) = random {
                    let mut rng = ChaCha8Rng::seed_from_u64(local_seed);
                    for _ in 0..r.count {
                        all.push((0..u.dim()).map(|_| rng.gen_range(r.low..=r.high)).collect());
                    }
                }
                let report = check_nsc(&u, &all, |m, p| demand(m, p, &cfg), config.tolerances.nsc)?;
                AnalysisResult::NscScan {
                    prices_checked: report.prices_checked,
                    points_checked: report.points_checked,
                    passed: report.passed(),
                    violations: report
                        .violations
                        .iter()
                        .map(|v| NscViolationOut {
                            price: v.price.clone(),
                            point: v.point.clone(),
                            budget_value: v.budget_value,
                        })
                        .collect(),
                }
            }
            Analysis::Aubin { price, point, price_radius, point_radius, samples } => {
                let a = AubinConfig {
                    price_radius: *price_radius,
                    point_radius: *point_radius,
                    samples: *samples,
                    seed: local_seed,
                    ..AubinConfig::default()
                };
                let r = aubin_inclusion_test(price, point, &a)?;
                AnalysisResult::Aubin {
                    price: price.clone(),
                    point: point.clone(),
                    ell: r.ell,
                    max_ratio: r.max_ratio,
                    samples_used: r.samples_used,
                    skipped: r.skipped,
                }
            }
            Analysis::Series { series: kind, price, direction, t_max, points, file } => {
                let s = emit_series(*kind, &u, price, direction, *t_max, *points, &sched, &cfg)?;
                let rows = s.rows.len();
                series.push((file.clone(), s.to_csv()));
                AnalysisResult::Series { series: *kind, file: file.clone(), rows }
            }
        };
        results.push(result);
    }

    let report = ReportDoc {
        format: REPORT_FORMAT.into(),
        seed,
        model: config.model.clone(),
        hypotheses: config.hypotheses.clone(),
        results,
    };
    Ok(RunOutput { report, series })
}

/// Reads the config, runs it and writes the report and series files into
/// `opts.out_dir`. Returns the path of the report.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<(PathBuf, RunOutput), CliError> {
    let text = fs::read_to_string(config_path).map_err(|e| io_error(config_path, e))?;
    let config = ProblemConfig::from_toml(&text)?;
    let seed = opts.seed_override.unwrap_or(config.seed);
    if opts.verbose > 0 {
        eprintln!("running {} analyses with seed {seed}", config.analyses.len());
    }
    let output = run_config(&config, seed)?;
    fs::create_dir_all(&opts.out_dir).map_err(|e| io_error(&opts.out_dir, e))?;
    for (name, contents) in &output.series {
        let path = opts.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        if opts.verbose > 1 {
            eprintln!("wrote {}", path.display());
        }
    }
    let report_path = opts.out_dir.join(&config.output.report);
    fs::write(&report_path, output.report.to_json()).map_err(|e| io_error(&report_path, e))?;
    if opts.verbose > 1 {
        eprintln!("wrote {}", report_path.display());
    }
    Ok((report_path, output))
}
