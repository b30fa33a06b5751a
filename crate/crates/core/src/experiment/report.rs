//! Case results, the three-way comparison, and report emission.
//!
//! Machine-readable results are versioned JSON; plot data is tab-
//! separated text with one point per (case, scheme) plus the y = 2x
//! fairness reference line; the human summary renders Mbps with two
//! decimals. Every reported throughput is reproducible from the stored
//! raw counts by the same arithmetic that produced it.

use super::campaign::{
    brute_force_mcs, case_channel_stats, noma_common_group, solve_campaign_precoders,
    CampaignSpec, ExperimentError, SearchTrace, StatSummary,
};
use crate::allocation::{mbps, ThroughputReport, B_EFF};
use crate::precoding::{Mode, RateReport};
use crate::Scheme;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Outcome of one scheme on one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeOutcome {
    pub mode: Mode,
    pub report: ThroughputReport,
    pub min_throughput: f64,
    pub sum_throughput: f64,
    /// Power split over [common, private1, private2], absolute.
    pub stream_power: [f64; 3],
    pub rates: RateReport,
    pub objective_trace: Vec<f64>,
    pub solver_converged: bool,
    pub search: SearchTrace,
}

/// Full result of one case: channel statistics plus one outcome per
/// requested scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub schema_version: u32,
    pub label: String,
    pub seed: u64,
    pub runs: u64,
    pub alpha_db: StatSummary,
    pub rho: StatSummary,
    pub outcomes: Vec<SchemeOutcome>,
}

impl CaseResult {
    pub fn outcome(&self, scheme: Scheme) -> Option<&SchemeOutcome> {
        self.outcomes.iter().find(|o| o.mode.scheme() == scheme)
    }
}

/// Runs every requested scheme of a campaign on shared per-run channel
/// and noise realizations, brute-force searching the MCS space of each.
pub fn compare_schemes(spec: &CampaignSpec, label: &str) -> Result<CaseResult, ExperimentError> {
    spec.validate()?;
    let (alpha_db, rho) = case_channel_stats(spec)?;
    let mut outcomes = Vec::new();
    for &scheme in &spec.schemes {
        let solution = solve_campaign_precoders(spec, scheme)?;
        let (report, search) = brute_force_mcs(spec, &solution.precoders)?;
        outcomes.push(SchemeOutcome {
            mode: solution.precoders.mode,
            min_throughput: report.min_throughput(),
            sum_throughput: report.sum_throughput(),
            stream_power: [
                crate::util::norm2(&solution.precoders.p_c),
                crate::util::norm2(&solution.precoders.p_1),
                crate::util::norm2(&solution.precoders.p_2),
            ],
            rates: solution.rates.clone(),
            objective_trace: solution.objective_trace.clone(),
            solver_converged: solution.converged,
            report,
            search,
        });
    }
    Ok(CaseResult {
        schema_version: RESULT_SCHEMA_VERSION,
        label: label.to_string(),
        seed: spec.root_seed(),
        runs: spec.runs,
        alpha_db,
        rho,
        outcomes,
    })
}

/// Re-derives every throughput in the result from its stored counts and
/// split; true when all of them match bit-exactly.
pub fn verify_recomputable(case: &CaseResult) -> bool {
    case.outcomes.iter().all(|o| {
        let r = &o.report;
        let recomputed = ThroughputReport::assemble(
            r.scheme,
            noma_common_group(&o.mode),
            r.counts,
            r.runs,
            r.mcs,
            B_EFF,
        );
        match recomputed {
            Ok(re) => {
                re.t_c == r.t_c
                    && re.t_p1 == r.t_p1
                    && re.t_p2 == r.t_p2
                    && re.t_group == r.t_group
                    && re.split == r.split
                    && o.min_throughput == r.min_throughput()
                    && o.sum_throughput == r.sum_throughput()
            }
            Err(_) => false,
        }
    })
}

fn io_err(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io { path: path.display().to_string(), source }
}

fn write_file(path: &Path, content: &str) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, content).map_err(|e| io_err(path, e))
}

pub fn save_case_result(path: &Path, case: &CaseResult) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(case).expect("case result serializes");
    text.push('\n');
    write_file(path, &text)
}

pub fn load_case_result(path: &Path) -> Result<CaseResult, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        io_err(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    })
}

fn scheme_label(mode: &Mode) -> String {
    match mode {
        Mode::Noma { common_group } => format!("NOMA(common=g{common_group})"),
        other => other.scheme().to_string(),
    }
}

fn mcs_label(report: &ThroughputReport) -> String {
    let f = |v: Option<u8>| v.map_or_else(|| "-".into(), |x: u8| x.to_string());
    format!("{}/{}/{}", f(report.mcs.common), f(report.mcs.private1), f(report.mcs.private2))
}

fn bler_label(v: Option<f64>) -> String {
    v.map_or_else(|| "  -  ".into(), |x| format!("{x:.2}"))
}

/// Human-readable comparison table.
pub fn summary_table(results: &[CaseResult]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<8} {:<18} {:>9} {:>9} {:>12} {:>7} {:>7} {:>7} {:>22}\n",
        "case", "scheme", "min Mbps", "sum Mbps", "mcs c/p1/p2", "bler_c", "bler_1", "bler_2",
        "power c/p1/p2"
    ));
    for case in results {
        for o in &case.outcomes {
            let p = o.stream_power;
            let total: f64 = p.iter().sum();
            let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
            s.push_str(&format!(
                "{:<8} {:<18} {:>9} {:>9} {:>12} {:>7} {:>7} {:>7} {:>22}\n",
                case.label,
                scheme_label(&o.mode),
                mbps(o.min_throughput),
                mbps(o.sum_throughput),
                mcs_label(&o.report),
                bler_label(o.report.bler_c),
                bler_label(o.report.bler_1),
                bler_label(o.report.bler_2),
                format!("{:.2}/{:.2}/{:.2}", frac(p[0]), frac(p[1]), frac(p[2])),
            ));
        }
    }
    s
}

/// Everything [`emit_report`] writes, as (relative name, content).
fn report_files(results: &[CaseResult]) -> Vec<(PathBuf, String)> {
    let mut files = Vec::new();

    #[derive(Serialize)]
    struct Bundle<'a> {
        schema_version: u32,
        cases: &'a [CaseResult],
    }
    let mut bundle =
        serde_json::to_string_pretty(&Bundle { schema_version: RESULT_SCHEMA_VERSION, cases: results })
            .expect("bundle serializes");
    bundle.push('\n');
    files.push((PathBuf::from("summary.json"), bundle));
    files.push((PathBuf::from("summary.txt"), summary_table(results)));

    // Min-vs-sum scatter: one point per (case, scheme).
    let mut scatter = String::from("case\tscheme\tmin_mbps\tsum_mbps\n");
    let mut max_min: f64 = 0.0;
    for case in results {
        for o in &case.outcomes {
            scatter.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                case.label,
                o.mode.scheme(),
                mbps(o.min_throughput),
                mbps(o.sum_throughput)
            ));
            max_min = max_min.max(o.min_throughput);
        }
    }
    files.push((PathBuf::from("plots/scatter.tsv"), scatter));

    // Fairness reference line y = 2x spanning the data range.
    let top = (max_min / 1e6).max(1.0).ceil();
    let line = format!("min_mbps\tsum_mbps\n0.00\t0.00\n{:.2}\t{:.2}\n", top, 2.0 * top);
    files.push((PathBuf::from("plots/fairness_line.tsv"), line));

    // Stacked common/private contributions per (case, scheme, group).
    let mut bars = String::from("case\tscheme\tgroup\tcommon_mbps\tprivate_mbps\ttotal_mbps\n");
    for case in results {
        for o in &case.outcomes {
            let r = &o.report;
            for g in crate::Group::BOTH {
                let common_part = r.split.fraction(g) * r.t_c;
                let private_part = match g {
                    crate::Group::G1 => r.t_p1,
                    crate::Group::G2 => r.t_p2,
                };
                bars.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    case.label,
                    o.mode.scheme(),
                    g,
                    mbps(common_part),
                    mbps(private_part),
                    mbps(r.t_group[g.idx()])
                ));
            }
        }
    }
    files.push((PathBuf::from("plots/bars.tsv"), bars));
    files
}

/// Writes the machine-readable bundle, the human summary, and the plot
/// data files; returns the paths written.
pub fn emit_report(results: &[CaseResult], out_dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut written = Vec::new();
    for (rel, content) in report_files(results) {
        let path = out_dir.join(rel);
        write_file(&path, &content)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{DecodeCounts, McsTriple};
    use crate::experiment::campaign::McsSearchSpace;
    use crate::scenario::reference_base;
    use crate::Group;

    fn tiny_case() -> CaseResult {
        let mut spec = CampaignSpec::new(reference_base());
        spec.runs = 3;
        spec.schemes = vec![Scheme::Sdma];
        spec.mcs_candidates = McsSearchSpace::restricted(&[0]);
        compare_schemes(&spec, "case_t").unwrap()
    }

    #[test]
    fn result_roundtrip_bit_identical() {
        let case = tiny_case();
        let dir = std::env::temp_dir().join("mgm_case_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("case.json");
        save_case_result(&path, &case).unwrap();
        let loaded = load_case_result(&path).unwrap();
        assert_eq!(loaded, case);
        // Write -> read -> write is byte-stable.
        let second = dir.join("case2.json");
        save_case_result(&second, &loaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&second).unwrap());
    }

    #[test]
    fn recomputability_holds_and_detects_tampering() {
        let mut case = tiny_case();
        assert!(verify_recomputable(&case));
        case.outcomes[0].report.t_group[0] += 1.0;
        assert!(!verify_recomputable(&case));
    }

    #[test]
    fn report_files_cover_all_points() {
        let case = tiny_case();
        let files = report_files(&[case.clone()]);
        let scatter = &files.iter().find(|(p, _)| p.ends_with("scatter.tsv")).unwrap().1;
        // Header plus one line per (case, scheme).
        assert_eq!(scatter.lines().count(), 1 + case.outcomes.len());
        let line = &files.iter().find(|(p, _)| p.ends_with("fairness_line.tsv")).unwrap().1;
        assert!(line.contains("min_mbps"));
        // y = 2x: second data point doubles the first coordinate.
        let last = line.lines().last().unwrap();
        let cols: Vec<f64> = last.split('\t').map(|v| v.parse().unwrap()).collect();
        assert!((cols[1] - 2.0 * cols[0]).abs() < 1e-9);
    }

    #[test]
    fn bars_sum_to_group_totals() {
        let report = ThroughputReport::assemble(
            Scheme::Rsma,
            None,
            DecodeCounts { d_c: 91, d_1: 50, d_2: 75 },
            100,
            McsTriple { common: Some(5), private1: Some(2), private2: Some(3) },
            B_EFF,
        )
        .unwrap();
        for g in Group::BOTH {
            let common_part = report.split.fraction(g) * report.t_c;
            let private_part = if g == Group::G1 { report.t_p1 } else { report.t_p2 };
            assert!((common_part + private_part - report.t_group[g.idx()]).abs() < 1e-9);
        }
    }

    #[test]
    fn emit_writes_expected_files() {
        let case = tiny_case();
        let dir = std::env::temp_dir().join("mgm_emit_report");
        let _ = std::fs::remove_dir_all(&dir);
        let written = emit_report(std::slice::from_ref(&case), &dir).unwrap();
        assert_eq!(written.len(), 5);
        for path in written {
            assert!(path.exists(), "{path:?} missing");
        }
    }
}
