#pragma once

// ============================================================================
// Report emission: accuracy matrices, scheme success rates, paradigm
// comparison (win rate / max gap), efficiency under both normalizations,
// significance statistics, and diversity summaries.  CSV files carry a
// stable column order; summary.txt renders the same figures as text tables.
// Percentages are reported to one decimal.
//
// Scheme success-rate definition: a scheme "succeeds" in a configuration
// (model, dataset, paradigm, chains) when its accuracy ties the maximum
// accuracy over all schemes in that configuration.
// ============================================================================

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqscale/harness.hpp"
#include "seqscale/stats.hpp"

namespace seqscale::report {

// ---------------------------------------------------------------------------
// Scheme tables and success rates
// ---------------------------------------------------------------------------

struct SchemeRow {
  std::string model;
  std::string dataset;
  std::string paradigm;  // empty for loaded reference tables
  int chains = 0;
  std::map<std::string, double> acc_by_scheme;  // percent
};

struct SchemeTable {
  std::vector<std::string> schemes;  // column order
  std::vector<SchemeRow> rows;
};

/** Configurations where each scheme ties the per-row maximum. */
std::map<std::string, int> success_counts(const SchemeTable& table);

/** success_counts as percentages of the row count, one decimal's worth. */
std::map<std::string, double> success_rates(const SchemeTable& table);

// ---------------------------------------------------------------------------
// Derivation from run records
// ---------------------------------------------------------------------------

/** Accuracy percent per (model, dataset, chains) for one scheme+paradigm. */
harness::AccuracyTable accuracy_table(
    const std::vector<harness::RunRecord>& records, const std::string& scheme,
    const std::string& paradigm);

/** Per-configuration scheme accuracies for one paradigm. */
SchemeTable scheme_table(const std::vector<harness::RunRecord>& records,
                         const std::string& paradigm);

// ---------------------------------------------------------------------------
// Reference-table loaders (CSV)
// ---------------------------------------------------------------------------

/**
 * Loads a paradigm-comparison CSV with header
 * `model,dataset,chains,sequential,parallel` (percent values) into aligned
 * accuracy tables.
 */
std::pair<harness::AccuracyTable, harness::AccuracyTable> load_paradigm_table(
    const std::string& path);

/**
 * Loads a scheme-accuracy CSV with header
 * `model,dataset,chains,<scheme>,…` (percent values).
 */
SchemeTable load_scheme_table(const std::string& path);

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

struct ReportOptions {
  int bonferroni_m = 0;  // 0 → number of significance rows
  std::uint64_t seed = 42;
  std::int64_t per_chain_cap = core::BudgetLedger::kDefaultPerChainCap;
  int bootstrap_resamples = 1000;
  double bootstrap_level = 0.95;
};

/**
 * Writes accuracy.csv, scheme_matrix.csv, success_rates.csv, paradigm.csv,
 * efficiency.csv, significance.csv, diversity.csv (when creative records
 * exist), and summary.txt under `out_dir` (which must exist).
 */
void write_reports(const std::vector<harness::RunRecord>& records,
                   const ReportOptions& options, const std::string& out_dir);

/** Percent with one decimal ("76.7"); used by every report column. */
std::string format_percent(double percent);

}  // namespace seqscale::report
