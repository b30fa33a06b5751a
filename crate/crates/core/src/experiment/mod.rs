//! Monte-Carlo campaigns, the brute-force MCS search, and report
//! emission for the three-way scheme comparison.

pub mod campaign;
pub mod report;

pub use campaign::{
    brute_force_mcs, candidate_triples, case_channel_stats, exhaustive_mcs, noma_common_group,
    run_campaign, run_channels, run_stage1_csit, solve_campaign_precoders, CampaignSpec,
    ExperimentError, McsSearchSpace, SearchTrace, StatSummary,
};
pub use report::{
    compare_schemes, emit_report, load_case_result, save_case_result, summary_table,
    verify_recomputable, CaseResult, SchemeOutcome, RESULT_SCHEMA_VERSION,
};
