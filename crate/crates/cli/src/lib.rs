//! Analysis pipeline behind the `hardy` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;
use std::time::Instant;

use hardy_core::angular::{
    decide_for_self_map, invariants_from_lambda, AngularConfig, AngularDerivativeReport, BoundednessVerdict,
    OperatorInvariants,
};
use hardy_core::certify::{certify_self_map, CertMethod, CertifyConfig, SelfMapCertificate, SelfMapVerdict};
use hardy_core::kernels::{norm_kernel_check, PointSets, PsdReport};
use hardy_core::operator::{
    essential_norm_lower_bound, kernel_ratio_sup, operator_norm_estimate_with, NormEstimate, OperatorConfig,
    DEFAULT_LADDER,
};
use hardy_core::{Complex64, Extended, HardyError, MapSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EXIT_BOUNDED: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_UNBOUNDED: i32 = 2;
pub const EXIT_NOT_SELF_MAP: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<HardyError> for CliError {
    fn from(e: HardyError) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub fn parse_map_str(text: &str) -> Result<MapSpec<f64>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid map specification: {e}")))
}

pub fn parse_map_file(path: &Path) -> Result<MapSpec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_map_str(&text)
}

/// Points for `psd --points FILE`: a JSON array of `[re, im]` pairs.
pub fn parse_points_file(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let points: Vec<Complex64> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid point list: {e}")))?;
    if points.is_empty() {
        return Err(CliError::Usage("point list is empty".into()));
    }
    if let Some(z) = points.iter().find(|z| !(z.re > 0.0) || !z.im.is_finite()) {
        return Err(CliError::Usage(format!("point {z} is not in the right half-plane")));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Truncation sizes for the matrix numerics; empty skips them.
    pub truncations: Vec<usize>,
    pub psd_tol: f64,
    pub psd_sets: usize,
    pub p_values: Vec<f64>,
    pub format: OutputFormat,
    pub timings: bool,
    pub angular: AngularConfig<f64>,
    pub certify: CertifyConfig<f64>,
    pub operator: OperatorConfig<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            truncations: DEFAULT_LADDER.to_vec(),
            psd_tol: 1e-10,
            psd_sets: 10,
            p_values: vec![1.0, 2.0],
            format: OutputFormat::Json,
            timings: false,
            angular: AngularConfig::default(),
            certify: CertifyConfig::default(),
            operator: OperatorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.truncations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage("truncations must be strictly increasing".into()));
        }
        if self.truncations.first() == Some(&0) {
            return Err(CliError::Usage("truncation sizes must be positive".into()));
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.psd_tol) || !positive(self.operator.power_tol) || !positive(self.angular.agreement_tol) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        if let Some(p) = self.p_values.iter().find(|p| !positive(**p)) {
            return Err(CliError::Usage(format!("p = {p} must be positive")));
        }
        Ok(())
    }
}

/// Condensed [`PsdReport`] without points or witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdSummary {
    pub set: usize,
    pub points: usize,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub psd: bool,
}

impl PsdSummary {
    fn from_report(set: usize, r: &PsdReport<f64>) -> Self {
        PsdSummary {
            set,
            points: r.points.len(),
            min_eigenvalue: r.min_eigenvalue,
            tolerance: r.tolerance,
            psd: r.is_psd(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub map_id: String,
    pub map: MapSpec<f64>,
    pub certificate: SelfMapCertificate<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<AngularDerivativeReport<f64>>,
    pub verdict: BoundednessVerdict<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invariants: Vec<OperatorInvariants<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub psd_summary: Vec<PsdSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_kernel_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub essential_norm_lower_bound: Option<Extended<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_numerics: Option<NormEstimate<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<StageTiming>>,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.verdict)
    }
}

pub fn exit_code(verdict: &BoundednessVerdict<f64>) -> i32 {
    match verdict {
        BoundednessVerdict::Bounded { .. } => EXIT_BOUNDED,
        BoundednessVerdict::Unbounded { .. } => EXIT_UNBOUNDED,
        BoundednessVerdict::NotSelfMap { .. } => EXIT_NOT_SELF_MAP,
    }
}

struct Stopwatch {
    enabled: bool,
    last: Instant,
    stages: Vec<StageTiming>,
}

impl Stopwatch {
    fn new(enabled: bool) -> Self {
        Stopwatch {
            enabled,
            last: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        if self.enabled {
            self.stages.push(StageTiming {
                stage: stage.to_string(),
                seconds: (now - self.last).as_secs_f64(),
            });
        }
        self.last = now;
    }

    fn finish(self) -> Option<Vec<StageTiming>> {
        self.enabled.then_some(self.stages)
    }
}

/// Certify, decide, then (for bounded maps) check the norm kernel at `λ`,
/// sample kernel ratios and run the truncation ladder.
pub fn run_analyze(spec: &MapSpec<f64>, map_id: &str, cfg: &RunConfig) -> Result<AnalysisReport, CliError> {
    cfg.validate()?;
    let mut clock = Stopwatch::new(cfg.timings);
    let certificate = certify_self_map(spec, &cfg.certify)?;
    clock.lap("certify");
    let mut report = AnalysisReport {
        map_id: map_id.to_string(),
        map: spec.clone(),
        certificate: certificate.clone(),
        angular: None,
        verdict: BoundednessVerdict::NotSelfMap {
            certificate: certificate.clone(),
        },
        invariants: Vec::new(),
        psd_summary: Vec::new(),
        max_kernel_ratio: None,
        essential_norm_lower_bound: None,
        norm_numerics: None,
        timings: None,
    };
    if certificate.is_violation() {
        report.timings = clock.finish();
        return Ok(report);
    }

    let (verdict, angular) = match decide_for_self_map(spec, &cfg.angular) {
        Ok(pair) => pair,
        Err(HardyError::SelfMapViolation { re, im, value }) => {
            // Sampling along the paths found what the certifier missed.
            let witness = Complex64::new(re, im);
            let image = spec.evaluate(witness).unwrap_or(Complex64::new(value, 0.0));
            let certificate = SelfMapCertificate {
                verdict: SelfMapVerdict::NotSelfMap { witness, image },
                method: CertMethod::Sampled,
                samples_used: certificate.samples_used,
            };
            report.certificate = certificate.clone();
            report.verdict = BoundednessVerdict::NotSelfMap { certificate };
            report.timings = clock.finish();
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    clock.lap("angular");
    report.angular = Some(angular);
    report.verdict = verdict;

    if let BoundednessVerdict::Bounded { lambda, .. } = report.verdict {
        report.invariants = cfg
            .p_values
            .iter()
            .map(|&p| invariants_from_lambda(lambda, p))
            .collect::<Result<_, _>>()?;

        let sets = PointSets::<f64>::default();
        for i in 0..cfg.psd_sets {
            let r = norm_kernel_check(spec, lambda, &sets.set(i), cfg.psd_tol)?;
            report.psd_summary.push(PsdSummary::from_report(i, &r));
        }
        clock.lap("psd");

        report.max_kernel_ratio = Some(kernel_ratio_sup(spec, &cfg.angular)?.0);
        report.essential_norm_lower_bound = Some(essential_norm_lower_bound(spec, &cfg.angular)?);
        clock.lap("kernel_ratio");

        if !cfg.truncations.is_empty() {
            report.norm_numerics = Some(operator_norm_estimate_with(spec, &cfg.truncations, &cfg.operator)?);
            clock.lap("truncations");
        }
    }
    report.timings = clock.finish();
    Ok(report)
}

pub const CSV_HEADER: [&str; 9] = [
    "map_id",
    "verdict",
    "lambda",
    "norm",
    "essential_norm",
    "spectral_radius",
    "min_psd_eigenvalue",
    "max_kernel_ratio",
    "final_truncation_norm",
];

fn csv_row(report: &AnalysisReport) -> [String; 9] {
    let num = |x: Option<f64>| x.map(|v| Extended::from_value(v).to_string()).unwrap_or_default();
    let mut row: [String; 9] = Default::default();
    row[0] = report.map_id.clone();
    match &report.verdict {
        BoundednessVerdict::Bounded {
            lambda,
            norm,
            essential_norm,
            spectral_radius,
        } => {
            row[1] = "Bounded".into();
            row[2] = num(Some(*lambda));
            row[3] = num(Some(*norm));
            row[4] = num(Some(*essential_norm));
            row[5] = num(Some(*spectral_radius));
            row[6] = num(report
                .psd_summary
                .iter()
                .map(|s| s.min_eigenvalue)
                .reduce(f64::min));
            row[7] = num(report.max_kernel_ratio);
            row[8] = num(report.norm_numerics.as_ref().map(|n| n.extrapolated));
        }
        BoundednessVerdict::Unbounded { .. } => {
            row[1] = "Unbounded".into();
            row[2] = "inf".into();
        }
        BoundednessVerdict::NotSelfMap { .. } => {
            row[1] = "NotSelfMap".into();
        }
    }
    row
}

pub fn emit_report(report: &AnalysisReport, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string())),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Internal(e.to_string());
            w.write_record(CSV_HEADER).map_err(io)?;
            w.write_record(csv_row(report)).map_err(io)?;
            let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// Parses `"16,32,64"`; `"none"` gives an empty ladder.
pub fn parse_ladder(text: &str) -> Result<Vec<usize>, CliError> {
    if text.trim().eq_ignore_ascii_case("none") || text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad truncation size '{s}'")))
        })
        .collect()
}

pub fn parse_reals(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number '{s}'")))
        })
        .collect()
}
