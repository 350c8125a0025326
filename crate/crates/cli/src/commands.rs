//! The five subcommands. Each returns the rendered report and an exit code;
//! writing is left to the caller.

use gaussmap::beltrami::{xia_certify, XiaOptions, XiaReport};
use gaussmap::curvature::{sample_grid, CurvatureSample};
use gaussmap::gauss_bonnet::{degree_by_preimage, gauss_bonnet_check};
use gaussmap::rigidity::{certify_sphere, counterexample_family, epsilon_upper, CertificateReport, Verdict};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, MAX_NODES};
use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub code: i32,
    /// JSON report, newline terminated.
    pub json: String,
    /// Per-node CSV table when the report command runs in CSV format.
    pub table: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a C,
    result: &'a R,
}

fn render<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&Envelope { command, config, result })
        .map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct FieldRange {
    field: String,
    min: f64,
    max: f64,
}

#[derive(Debug, Serialize)]
struct ReportResult {
    surface: String,
    structure: &'static str,
    nodes: usize,
    summary: Vec<FieldRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    columns: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<Vec<f64>>>,
}

pub fn report_columns(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("u_{i}")).collect();
    cols.extend((1..=n).map(|i| format!("lambda_{i}")));
    cols.extend(["c", "kappa_gamma", "gk", "prop_residual"].map(String::from));
    cols
}

fn report_row(s: &CurvatureSample) -> Vec<f64> {
    let mut row = s.u.clone();
    row.extend_from_slice(&s.principal_curvatures);
    row.extend([s.c, s.kappa_gamma, s.gauss_kronecker, s.prop_residual]);
    row
}

fn to_csv(columns: &[String], rows: &[Vec<f64>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let out = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(columns).map_err(out)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(out)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

pub fn report(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let imm = cfg.surface()?;
    let structure = cfg.structure()?;
    let grid = cfg.grid(&imm)?;
    let samples = sample_grid(structure.as_ref(), &imm, &grid)?;
    let columns = report_columns(imm.n());
    let rows: Vec<Vec<f64>> = samples.iter().map(report_row).collect();
    let summary = columns
        .iter()
        .enumerate()
        .map(|(k, field)| FieldRange {
            field: field.clone(),
            min: rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min),
            max: rows.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    let csv = cfg.output.format == OutputFormat::Csv;
    let table = if csv { Some(to_csv(&columns, &rows)?) } else { None };
    let result = ReportResult {
        surface: imm.name().to_string(),
        structure: structure.name(),
        nodes: rows.len(),
        summary,
        columns: (!csv).then_some(columns),
        rows: (!csv).then_some(rows),
    };
    Ok(CommandOutput { code: EXIT_OK, json: render("report", cfg, &result)?, table })
}

#[derive(Debug, Serialize)]
struct GaussBonnetResult {
    integral: f64,
    target: f64,
    residual: f64,
    tolerance: f64,
    degree_integral: i64,
    degree_preimage: i64,
    degree_estimate: f64,
    euler_characteristic: i64,
    c_n: f64,
    nodes: usize,
    preimages: usize,
    preimage_direction: Vec<f64>,
    preimage_attempts: usize,
    max_kappa_path_difference: f64,
    max_prop_residual: f64,
    passed: bool,
}

pub fn gauss_bonnet(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let n = cfg.surface.n();
    if n % 2 == 1 {
        return Err(CliError::Invalid(format!("the Gauss-Bonnet check needs even n, got n = {n}")));
    }
    let imm = cfg.surface()?;
    let structure = cfg.structure()?;
    let grid = cfg.grid(&imm)?;
    let gb = gauss_bonnet_check(structure.as_ref(), &imm, &grid)?;
    let degree = degree_by_preimage(structure.as_ref(), &imm, &grid, &cfg.target_direction())?;
    let degree_integral = gb.degree_estimate.round() as i64;
    let passed = gb.residual < cfg.numerics.tolerance && degree_integral == degree.degree;
    let result = GaussBonnetResult {
        integral: gb.integral,
        target: gb.target,
        residual: gb.residual,
        tolerance: cfg.numerics.tolerance,
        degree_integral,
        degree_preimage: degree.degree,
        degree_estimate: gb.degree_estimate,
        euler_characteristic: gb.euler_characteristic,
        c_n: gb.c_n,
        nodes: gb.nodes,
        preimages: degree.preimages.len(),
        preimage_direction: degree.target,
        preimage_attempts: degree.attempts,
        max_kappa_path_difference: gb.max_kappa_path_difference,
        max_prop_residual: gb.max_prop_residual,
        passed,
    };
    let code = if passed { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(CommandOutput { code, json: render("gauss-bonnet", cfg, &result)?, table: None })
}

pub fn certify(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let imm = cfg.surface()?;
    let grid = cfg.grid(&imm)?;
    let report: CertificateReport =
        certify_sphere(&imm, &grid, cfg.numerics.delta, cfg.numerics.radius_convention)?;
    let code = if report.verdict == Verdict::Certified { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(CommandOutput { code, json: render("certify", cfg, &report)?, table: None })
}

pub fn xia(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let imm = cfg.surface()?;
    let grid = cfg.grid(&imm)?;
    let options = XiaOptions { margin: cfg.numerics.margin, delta: cfg.numerics.delta };
    let report: XiaReport = xia_certify(&imm, &grid, options)?;
    let code = if report.certified { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(CommandOutput { code, json: render("xia", cfg, &report)?, table: None })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleConfig {
    pub epsilon: f64,
    pub n: usize,
    pub nodes: usize,
}

pub const COUNTEREXAMPLE_N: usize = 2;
pub const COUNTEREXAMPLE_NODES: usize = 64;

pub fn counterexample(epsilon: f64, nodes: Option<usize>) -> Result<CommandOutput, CliError> {
    let upper = epsilon_upper();
    if !(epsilon > 0.0 && epsilon < upper) {
        return Err(CliError::Invalid(format!("epsilon must lie in (0, {upper:.10}), got {epsilon}")));
    }
    let nodes = nodes.unwrap_or(COUNTEREXAMPLE_NODES);
    if !(2..=MAX_NODES).contains(&nodes) {
        return Err(CliError::Invalid(format!("grid must lie in [2, {MAX_NODES}], got {nodes}")));
    }
    let cfg = CounterexampleConfig { epsilon, n: COUNTEREXAMPLE_N, nodes };
    let report = counterexample_family(epsilon, cfg.n, nodes)?;
    let code = if report.margins_positive { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(CommandOutput { code, json: render("counterexample", &cfg, &report)?, table: None })
}
