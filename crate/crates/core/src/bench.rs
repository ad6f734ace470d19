//! Experiment runner and report writer: scaling runs through the triple
//! harness, growth classification of the measured columns, and the
//! CSV/JSON outputs everything is reproduced from.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ndtm::{validate_spec, Bounds, Machine, NdtmSpec};
use crate::problems::{cnf_to_ndtm, CnfFormula};
use crate::transpile::{executed_bound, triple_check, EmitStats, TripleError};
use crate::vm::RunLimits;

/// One data point of the scaling demonstration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScalingRow {
    pub n: u32,
    pub s: u32,
    pub t: u32,
    pub n_bits: u64,
    pub oracle_nodes: u64,
    pub executed: u64,
    pub unit_cost: u64,
    pub log_cost: u64,
    /// Informational only; excluded from determinism comparisons.
    pub wall_ms: u64,
}

/// The CSV header, using the row's field names exactly.
pub const CSV_HEADER: &str = "n,S,T,N_bits,oracle_nodes,executed,unit_cost,log_cost,wall_ms";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalingProblem {
    Sat,
    /// One of the corpus machines, run on pseudorandom inputs of length n.
    Corpus(String),
}

impl ScalingProblem {
    pub fn parse(name: &str) -> Option<ScalingProblem> {
        if name == "sat" {
            return Some(ScalingProblem::Sat);
        }
        crate::ndtm::corpus::all()
            .contains_key(name)
            .then(|| ScalingProblem::Corpus(name.to_string()))
    }

    pub fn name(&self) -> &str {
        match self {
            ScalingProblem::Sat => "sat",
            ScalingProblem::Corpus(name) => name,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingOptions {
    pub seed: u64,
    pub limits: RunLimits,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            seed: 7,
            limits: RunLimits::default(),
        }
    }
}

/// Everything a scaling run produces: the CSV rows plus per-row audit
/// data (emit stats and instance shape) for the bound checks.
#[derive(Clone, Debug)]
pub struct ScalingOutcome {
    pub rows: Vec<ScalingRow>,
    pub audits: Vec<RowAudit>,
}

#[derive(Clone, Copy, Debug)]
pub struct RowAudit {
    pub stats: EmitStats,
    pub alphabet: u64,
    pub bounds: Bounds,
    pub executed_bound: f64,
}

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("the three verdicts disagree at n={n}: {detail}")]
    Disagreement { n: u32, detail: String },
    #[error("instance generation failed at n={n}: {message}")]
    Generation { n: u32, message: String },
    #[error("triple check failed at n={n}: {source}")]
    Check {
        n: u32,
        #[source]
        source: TripleError,
    },
}

/// Verdict-agreement guard: any disagreement aborts the whole run.
pub fn verify_agreement(
    n: u32,
    report: &crate::transpile::TripleReport,
) -> Result<(), ScalingError> {
    match &report.divergence {
        None => Ok(()),
        Some(detail) => Err(ScalingError::Disagreement {
            n,
            detail: detail.clone(),
        }),
    }
}

fn instance_rng(seed: u64, n: u32) -> ChaCha8Rng {
    // one independent stream per instance so sizes can be re-run alone
    ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The scaling instance at size n: n variables, 2n clauses of 3 literals
/// with seed-driven polarities. Variables come from sliding windows so
/// the instance family grows smoothly with n — a growth measurement wants
/// the size knob isolated from clause-shape noise; fully independent
/// draws degenerate into tautologies below three variables.
fn sat_instance(seed: u64, n: u32) -> CnfFormula {
    let mut rng = instance_rng(seed, n);
    let clauses = (0..2 * n)
        .map(|j| {
            let vars: [u32; 3] = if n >= 3 {
                let base = j % (n - 2) + 1;
                [base, base + 1, base + 2]
            } else if n == 2 {
                [1, 2, j % 2 + 1]
            } else {
                [1, 1, 1]
            };
            vars.iter()
                .map(|&v| {
                    if rng.next_u64() % 2 == 1 {
                        v as i32
                    } else {
                        -(v as i32)
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula {
        num_vars: n,
        clauses,
    }
}

fn corpus_instance(spec: &NdtmSpec, seed: u64, n: u32) -> (Machine, Vec<u8>, Bounds) {
    let machine = validate_spec(spec).expect("corpus machines validate");
    let mut rng = instance_rng(seed, n);
    let input: Vec<u8> = (0..n)
        .map(|_| if rng.next_u64() % 2 == 1 { 2u8 } else { 1u8 })
        .collect();
    let bounds = Bounds {
        space: n + 1,
        time: 2 * (n + 1) + 2,
    };
    (machine, input, bounds)
}

/// Runs one instance per size through the triple harness. All three
/// verdicts must agree on every row or the run aborts.
pub fn run_scaling(
    problem: &ScalingProblem,
    sizes: &[u32],
    options: &ScalingOptions,
) -> Result<ScalingOutcome, ScalingError> {
    let mut rows = Vec::with_capacity(sizes.len());
    let mut audits = Vec::with_capacity(sizes.len());

    for &n in sizes {
        let (machine, input, bounds) = match problem {
            ScalingProblem::Sat => {
                let formula = sat_instance(options.seed, n);
                let (spec, bounds) =
                    cnf_to_ndtm(&formula).map_err(|e| ScalingError::Generation {
                        n,
                        message: e.to_string(),
                    })?;
                let machine = validate_spec(&spec).expect("generated machines validate");
                (machine, Vec::new(), bounds)
            }
            ScalingProblem::Corpus(name) => {
                let spec = &crate::ndtm::corpus::all()[name.as_str()];
                corpus_instance(spec, options.seed, n)
            }
        };

        let started = Instant::now();
        let report = triple_check(&machine, &input, &bounds, &options.limits)
            .map_err(|source| ScalingError::Check { n, source })?;
        let wall_ms = started.elapsed().as_millis() as u64;
        verify_agreement(n, &report)?;

        audits.push(RowAudit {
            stats: report.stats,
            alphabet: machine.alphabet_size() as u64,
            bounds,
            executed_bound: executed_bound(
                report.stats.rules,
                bounds.space,
                machine.alphabet_size() as u64,
                bounds.time,
            ),
        });
        rows.push(ScalingRow {
            n,
            s: bounds.space,
            t: bounds.time,
            n_bits: report.universe_bits,
            oracle_nodes: report.oracle_explored,
            executed: report.cost.executed,
            unit_cost: report.cost.unit_cost,
            log_cost: report.cost.log_cost,
            wall_ms,
        });
    }

    Ok(ScalingOutcome { rows, audits })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthClass {
    PolynomialConsistent,
    Superpolynomial,
}

/// Growth analysis of one column: successive log-log slopes and the
/// classification, with the raw numbers always attached.
#[derive(Clone, Debug, Serialize)]
pub struct FitMetric {
    pub name: String,
    pub values: Vec<u64>,
    pub slopes: Vec<f64>,
    pub classification: GrowthClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub metrics: Vec<FitMetric>,
}

impl FitReport {
    pub fn metric(&self, name: &str) -> Option<&FitMetric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("growth fitting needs at least 3 rows, got {0}")]
    TooFewRows(usize),
    #[error("instance sizes must be positive and strictly increasing")]
    BadSizes,
}

/// A polynomial's successive slopes settle around its degree; an
/// exponential's keep climbing (exact n^3 trends 0.0 per step, exact 2^n
/// trends +0.70 over n = 1..4). The classifier fits a least-squares trend
/// line through the slope sequence and calls the column superpolynomial
/// when the trend climbs faster than this threshold. Calibrated between
/// the synthetic anchors and the measured sat columns (unit_cost trends
/// at most +0.05, oracle_nodes at least +0.18, over a 20-seed survey).
pub const SLOPE_TREND_THRESHOLD: f64 = 0.12;

/// Least-squares slope of `ys` against 0, 1, 2, ...
fn trend(ys: &[f64]) -> f64 {
    let k = ys.len() as f64;
    let mean_x = (k - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / k;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    sxy / sxx
}

fn classify(slopes: &[f64]) -> GrowthClass {
    if trend(slopes) >= SLOPE_TREND_THRESHOLD {
        GrowthClass::Superpolynomial
    } else {
        GrowthClass::PolynomialConsistent
    }
}

fn slopes_of(sizes: &[u32], values: &[u64]) -> Vec<f64> {
    sizes
        .windows(2)
        .zip(values.windows(2))
        .map(|(n, v)| {
            let vy = (v[1].max(1) as f64 / v[0].max(1) as f64).ln();
            let vx = (n[1] as f64 / n[0] as f64).ln();
            vy / vx
        })
        .collect()
}

/// Log-log successive-ratio slopes for unit_cost, log_cost and
/// oracle_nodes against n, each classified as polynomial-consistent or
/// superpolynomial.
pub fn fit_report(rows: &[ScalingRow]) -> Result<FitReport, FitError> {
    if rows.len() < 3 {
        return Err(FitError::TooFewRows(rows.len()));
    }
    let sizes: Vec<u32> = rows.iter().map(|r| r.n).collect();
    if sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::BadSizes);
    }
    let columns: [(&str, Vec<u64>); 3] = [
        ("unit_cost", rows.iter().map(|r| r.unit_cost).collect()),
        ("log_cost", rows.iter().map(|r| r.log_cost).collect()),
        (
            "oracle_nodes",
            rows.iter().map(|r| r.oracle_nodes).collect(),
        ),
    ];
    let metrics = columns
        .into_iter()
        .map(|(name, values)| {
            let slopes = slopes_of(&sizes, &values);
            let classification = classify(&slopes);
            FitMetric {
                name: name.to_string(),
                values,
                slopes,
                classification,
            }
        })
        .collect();
    Ok(FitReport { metrics })
}

/// Renders the rows as CSV, header first. Byte-deterministic given
/// identical rows.
pub fn render_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n, r.s, r.t, r.n_bits, r.oracle_nodes, r.executed, r.unit_cost, r.log_cost, r.wall_ms
        ));
    }
    out
}

/// Full-run configuration recorded in the JSON sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct SidecarConfig {
    pub problem: String,
    pub seed: u64,
    pub sizes: Vec<u32>,
    pub fuel: u64,
    pub bit_budget: Option<u64>,
    pub bound_c: f64,
    pub bound_k_per_rule: f64,
    pub bounds: Vec<Bounds>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a SidecarConfig,
    fit: &'a FitReport,
}

/// Writes the CSV and a JSON sidecar (fit report plus configuration) next
/// to it, at `<path with .json extension>`.
pub fn write_report(
    rows: &[ScalingRow],
    fit: &FitReport,
    config: &SidecarConfig,
    path: &Path,
) -> std::io::Result<()> {
    let mut csv = std::fs::File::create(path)?;
    csv.write_all(render_csv(rows).as_bytes())?;
    let sidecar_path = path.with_extension("json");
    let sidecar = Sidecar { config, fit };
    let mut json = std::fs::File::create(sidecar_path)?;
    let text = serde_json::to_string_pretty(&sidecar).expect("report serializes");
    json.write_all(text.as_bytes())?;
    json.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_rows(values: impl Fn(u32) -> u64, sizes: &[u32]) -> Vec<ScalingRow> {
        sizes
            .iter()
            .map(|&n| ScalingRow {
                n,
                s: n,
                t: n,
                n_bits: 1,
                oracle_nodes: values(n),
                executed: values(n),
                unit_cost: values(n),
                log_cost: values(n),
                wall_ms: 0,
            })
            .collect()
    }

    #[test]
    fn cubic_rows_classify_polynomial_with_slope_three() {
        let rows = synthetic_rows(|n| 10 * (n as u64).pow(3), &[1, 2, 3, 4, 5]);
        let fit = fit_report(&rows).unwrap();
        let m = fit.metric("unit_cost").unwrap();
        assert!(m.slopes.iter().all(|s| (s - 3.0).abs() < 1e-9));
        assert_eq!(m.classification, GrowthClass::PolynomialConsistent);
    }

    #[test]
    fn exponential_rows_classify_superpolynomial() {
        let rows = synthetic_rows(|n| 1u64 << n, &[1, 2, 3, 4]);
        let fit = fit_report(&rows).unwrap();
        let m = fit.metric("oracle_nodes").unwrap();
        assert!(m.slopes.windows(2).all(|w| w[1] > w[0] - 0.05));
        assert_eq!(m.classification, GrowthClass::Superpolynomial);
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let rows = synthetic_rows(|n| n as u64, &[1, 2]);
        assert!(matches!(fit_report(&rows), Err(FitError::TooFewRows(2))));
    }

    #[test]
    fn csv_has_one_line_per_row_plus_header() {
        let rows = synthetic_rows(|n| n as u64, &[1, 2, 3]);
        let csv = render_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn scaling_runs_agree_and_repeat_identically() {
        let options = ScalingOptions::default();
        let a = run_scaling(&ScalingProblem::Sat, &[1, 2], &options).unwrap();
        let b = run_scaling(&ScalingProblem::Sat, &[1, 2], &options).unwrap();
        let strip = |rows: &[ScalingRow]| -> Vec<ScalingRow> {
            rows.iter()
                .map(|r| ScalingRow {
                    wall_ms: 0,
                    ..r.clone()
                })
                .collect()
        };
        assert_eq!(strip(&a.rows), strip(&b.rows));
    }

    #[test]
    fn corpus_problems_run_too() {
        let options = ScalingOptions::default();
        let out = run_scaling(
            &ScalingProblem::Corpus("parity".into()),
            &[1, 2, 3],
            &options,
        )
        .unwrap();
        assert_eq!(out.rows.len(), 3);
    }

    #[test]
    fn injected_disagreement_aborts() {
        let options = ScalingOptions::default();
        let machine = validate_spec(&crate::ndtm::corpus::guess_bit()).unwrap();
        let bounds = Bounds { space: 2, time: 2 };
        let mut report = triple_check(&machine, &[], &bounds, &options.limits).unwrap();
        report.divergence = Some("oracle=true, confset=false, vm=true".into());
        assert!(matches!(
            verify_agreement(2, &report),
            Err(ScalingError::Disagreement { n: 2, .. })
        ));
    }

    #[test]
    fn problem_names_parse() {
        assert_eq!(ScalingProblem::parse("sat"), Some(ScalingProblem::Sat));
        assert_eq!(
            ScalingProblem::parse("parity"),
            Some(ScalingProblem::Corpus("parity".into()))
        );
        assert_eq!(ScalingProblem::parse("nonsense"), None);
    }
}
