#include "seqscale/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace seqscale::report {
namespace {

constexpr double kTiePct = 1e-9;

struct ParadigmCellKey {
  std::string model;
  std::string dataset;
  std::string paradigm;
  int chains = 0;

  auto operator<=>(const ParadigmCellKey&) const = default;
};

struct Tally {
  std::int64_t scorable = 0;
  std::int64_t correct = 0;

  double percent() const {
    return scorable == 0 ? 0.0
                         : 100.0 * static_cast<double>(correct) /
                               static_cast<double>(scorable);
  }
};

bool scorable_record(const harness::RunRecord& r) {
  return r.task != "creative" && r.gold.has_value();
}

const harness::VoteRecord* find_vote(const harness::RunRecord& r,
                                     const std::string& scheme) {
  for (const harness::VoteRecord& v : r.votes)
    if (v.scheme == scheme) return &v;
  return nullptr;
}

std::vector<std::string> schemes_in_records(
    const std::vector<harness::RunRecord>& records) {
  std::set<std::string> seen;
  for (const harness::RunRecord& r : records)
    for (const harness::VoteRecord& v : r.votes) seen.insert(v.scheme);
  std::vector<std::string> ordered;
  for (voting::SchemeKind kind : voting::all_scheme_kinds()) {
    const std::string name = voting::to_string(kind);
    if (seen.count(name)) {
      ordered.push_back(name);
      seen.erase(name);
    }
  }
  ordered.insert(ordered.end(), seen.begin(), seen.end());
  return ordered;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw Error("cannot open report file for writing: " + path);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(core::trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw SchemaError(where + ": not a number: '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw SchemaError(where + ": not an integer: '" + text + "'");
  }
}

/** Per-problem 0/1 correctness, ordered by problem index. */
std::map<ParadigmCellKey, std::vector<double>> correctness_vectors(
    const std::vector<harness::RunRecord>& records, const std::string& scheme) {
  std::map<ParadigmCellKey, std::vector<std::pair<int, double>>> indexed;
  for (const harness::RunRecord& r : records) {
    if (!scorable_record(r)) continue;
    const harness::VoteRecord* vote = find_vote(r, scheme);
    if (vote == nullptr) continue;
    const double correct =
        vote->correct.has_value() && *vote->correct ? 1.0 : 0.0;
    indexed[{r.model, r.dataset, r.paradigm, r.n_chains}].push_back(
        {r.problem_index, correct});
  }
  std::map<ParadigmCellKey, std::vector<double>> out;
  for (auto& [key, rows] : indexed) {
    std::sort(rows.begin(), rows.end());
    std::vector<double>& v = out[key];
    v.reserve(rows.size());
    for (const auto& [index, correct] : rows) v.push_back(correct);
  }
  return out;
}

}  // namespace

std::string format_percent(double percent) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f", percent);
  return buffer;
}

std::map<std::string, int> success_counts(const SchemeTable& table) {
  std::map<std::string, int> counts;
  for (const std::string& scheme : table.schemes) counts[scheme] = 0;
  for (const SchemeRow& row : table.rows) {
    double best = -1.0;
    for (const std::string& scheme : table.schemes) {
      const auto it = row.acc_by_scheme.find(scheme);
      if (it == row.acc_by_scheme.end())
        throw Error("success_counts: row missing scheme '" + scheme + "'");
      best = std::max(best, it->second);
    }
    for (const std::string& scheme : table.schemes)
      if (row.acc_by_scheme.at(scheme) >= best - kTiePct) ++counts[scheme];
  }
  return counts;
}

std::map<std::string, double> success_rates(const SchemeTable& table) {
  if (table.rows.empty()) throw Error("success_rates: empty table");
  std::map<std::string, double> rates;
  for (const auto& [scheme, count] : success_counts(table))
    rates[scheme] = 100.0 * static_cast<double>(count) /
                    static_cast<double>(table.rows.size());
  return rates;
}

harness::AccuracyTable accuracy_table(
    const std::vector<harness::RunRecord>& records, const std::string& scheme,
    const std::string& paradigm) {
  std::map<harness::CellKey, Tally> tallies;
  for (const harness::RunRecord& r : records) {
    if (r.paradigm != paradigm || !scorable_record(r)) continue;
    const harness::VoteRecord* vote = find_vote(r, scheme);
    if (vote == nullptr) continue;
    Tally& tally = tallies[{r.model, r.dataset, r.n_chains}];
    ++tally.scorable;
    if (vote->correct.has_value() && *vote->correct) ++tally.correct;
  }
  harness::AccuracyTable table;
  for (const auto& [key, tally] : tallies) table[key] = tally.percent();
  return table;
}

SchemeTable scheme_table(const std::vector<harness::RunRecord>& records,
                         const std::string& paradigm) {
  SchemeTable table;
  table.schemes = schemes_in_records(records);

  std::map<harness::CellKey, std::map<std::string, Tally>> cells;
  for (const harness::RunRecord& r : records) {
    if (r.paradigm != paradigm || !scorable_record(r)) continue;
    for (const harness::VoteRecord& v : r.votes) {
      Tally& tally = cells[{r.model, r.dataset, r.n_chains}][v.scheme];
      ++tally.scorable;
      if (v.correct.has_value() && *v.correct) ++tally.correct;
    }
  }
  for (const auto& [key, by_scheme] : cells) {
    SchemeRow row;
    row.model = key.model;
    row.dataset = key.dataset;
    row.paradigm = paradigm;
    row.chains = key.chains;
    for (const auto& [scheme, tally] : by_scheme)
      row.acc_by_scheme[scheme] = tally.percent();
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::pair<harness::AccuracyTable, harness::AccuracyTable> load_paradigm_table(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table file: " + path);
  std::string line;
  int line_no = 0;
  harness::AccuracyTable sequential;
  harness::AccuracyTable parallel;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (core::trim(line).empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (!have_header) {
      if (fields != std::vector<std::string>{"model", "dataset", "chains",
                                             "sequential", "parallel"})
        throw SchemaError(where +
                          ": expected header model,dataset,chains,"
                          "sequential,parallel");
      have_header = true;
      continue;
    }
    if (fields.size() != 5)
      throw SchemaError(where + ": expected 5 fields, got " +
                        std::to_string(fields.size()));
    const harness::CellKey key{fields[0], fields[1],
                               parse_int(fields[2], where)};
    if (sequential.count(key))
      throw SchemaError(where + ": duplicate cell");
    sequential[key] = parse_double(fields[3], where);
    parallel[key] = parse_double(fields[4], where);
  }
  if (sequential.empty())
    throw SchemaError(path + ": table contains no rows");
  return {std::move(sequential), std::move(parallel)};
}

SchemeTable load_scheme_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table file: " + path);
  std::string line;
  int line_no = 0;
  SchemeTable table;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (core::trim(line).empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (!have_header) {
      if (fields.size() < 4 || fields[0] != "model" ||
          fields[1] != "dataset" || fields[2] != "chains")
        throw SchemaError(where +
                          ": expected header model,dataset,chains,<schemes>");
      table.schemes.assign(fields.begin() + 3, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != table.schemes.size() + 3)
      throw SchemaError(where + ": expected " +
                        std::to_string(table.schemes.size() + 3) +
                        " fields, got " + std::to_string(fields.size()));
    SchemeRow row;
    row.model = fields[0];
    row.dataset = fields[1];
    row.chains = parse_int(fields[2], where);
    for (std::size_t s = 0; s < table.schemes.size(); ++s)
      row.acc_by_scheme[table.schemes[s]] =
          parse_double(fields[s + 3], where);
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw SchemaError(path + ": table contains no rows");
  return table;
}

void write_reports(const std::vector<harness::RunRecord>& records,
                   const ReportOptions& options, const std::string& out_dir) {
  if (records.empty()) throw Error("write_reports: no records");
  const std::vector<std::string> schemes = schemes_in_records(records);

  std::set<std::string> paradigms;
  for (const harness::RunRecord& r : records) paradigms.insert(r.paradigm);

  // ---- accuracy.csv -------------------------------------------------------
  {
    std::ofstream out = open_out(out_dir + "/accuracy.csv");
    out << "model,dataset,paradigm,chains,scheme,n_scorable,n_correct,"
           "accuracy_pct\n";
    std::map<ParadigmCellKey, std::map<std::string, Tally>> cells;
    for (const harness::RunRecord& r : records) {
      if (!scorable_record(r)) continue;
      for (const harness::VoteRecord& v : r.votes) {
        Tally& tally =
            cells[{r.model, r.dataset, r.paradigm, r.n_chains}][v.scheme];
        ++tally.scorable;
        if (v.correct.has_value() && *v.correct) ++tally.correct;
      }
    }
    for (const auto& [key, by_scheme] : cells) {
      for (const std::string& scheme : schemes) {
        const auto it = by_scheme.find(scheme);
        if (it == by_scheme.end()) continue;
        out << key.model << ',' << key.dataset << ',' << key.paradigm << ','
            << key.chains << ',' << scheme << ',' << it->second.scorable
            << ',' << it->second.correct << ','
            << format_percent(it->second.percent()) << '\n';
      }
    }
  }

  // ---- scheme_matrix.csv + success_rates.csv ------------------------------
  {
    std::ofstream matrix = open_out(out_dir + "/scheme_matrix.csv");
    matrix << "model,dataset,paradigm,chains";
    for (const std::string& scheme : schemes) matrix << ',' << scheme;
    matrix << '\n';

    SchemeTable combined;
    combined.schemes = schemes;
    for (const std::string& paradigm : paradigms) {
      SchemeTable t = scheme_table(records, paradigm);
      for (SchemeRow& row : t.rows) combined.rows.push_back(std::move(row));
    }
    std::sort(combined.rows.begin(), combined.rows.end(),
              [](const SchemeRow& a, const SchemeRow& b) {
                return std::tie(a.model, a.dataset, a.paradigm, a.chains) <
                       std::tie(b.model, b.dataset, b.paradigm, b.chains);
              });
    for (const SchemeRow& row : combined.rows) {
      matrix << row.model << ',' << row.dataset << ',' << row.paradigm << ','
             << row.chains;
      for (const std::string& scheme : schemes) {
        const auto it = row.acc_by_scheme.find(scheme);
        matrix << ',' << (it == row.acc_by_scheme.end()
                              ? std::string("")
                              : format_percent(it->second));
      }
      matrix << '\n';
    }

    std::ofstream rates = open_out(out_dir + "/success_rates.csv");
    rates << "scheme,successes,configurations,success_rate_pct\n";
    if (!combined.rows.empty()) {
      bool complete = true;
      for (const SchemeRow& row : combined.rows)
        for (const std::string& scheme : schemes)
          if (!row.acc_by_scheme.count(scheme)) complete = false;
      if (complete) {
        const std::map<std::string, int> counts = success_counts(combined);
        for (const std::string& scheme : schemes)
          rates << scheme << ',' << counts.at(scheme) << ','
                << combined.rows.size() << ','
                << format_percent(100.0 * counts.at(scheme) /
                                  static_cast<double>(combined.rows.size()))
                << '\n';
      }
    }
  }

  // ---- paradigm.csv (sequential vs parallel) ------------------------------
  const bool both_paradigms =
      paradigms.count("sequential") && paradigms.count("parallel");
  if (both_paradigms) {
    std::ofstream out = open_out(out_dir + "/paradigm.csv");
    out << "scheme,model,dataset,chains,sequential_pct,parallel_pct,gap_pct\n";
    for (const std::string& scheme : schemes) {
      const harness::AccuracyTable seq =
          accuracy_table(records, scheme, "sequential");
      const harness::AccuracyTable par =
          accuracy_table(records, scheme, "parallel");
      for (const auto& [key, seq_pct] : seq) {
        const auto it = par.find(key);
        if (it == par.end()) continue;
        out << scheme << ',' << key.model << ',' << key.dataset << ','
            << key.chains << ',' << format_percent(seq_pct) << ','
            << format_percent(it->second) << ','
            << format_percent(seq_pct - it->second) << '\n';
      }
    }
  }

  // ---- efficiency.csv ------------------------------------------------------
  {
    std::ofstream out = open_out(out_dir + "/efficiency.csv");
    out << "model,dataset,paradigm,chains,scheme,accuracy_pct,"
           "budget_tokens,acc_per_1k_budget,cap_tokens,acc_per_1k_cap\n";
    std::map<ParadigmCellKey, std::map<std::string, Tally>> cells;
    std::map<ParadigmCellKey, std::int64_t> caps;
    for (const harness::RunRecord& r : records) {
      if (!scorable_record(r)) continue;
      const ParadigmCellKey key{r.model, r.dataset, r.paradigm, r.n_chains};
      caps[key] = r.total_cap;
      for (const harness::VoteRecord& v : r.votes) {
        Tally& tally = cells[key][v.scheme];
        ++tally.scorable;
        if (v.correct.has_value() && *v.correct) ++tally.correct;
      }
    }
    for (const auto& [key, by_scheme] : cells) {
      const std::int64_t budget = caps.at(key);
      for (const std::string& scheme : schemes) {
        const auto it = by_scheme.find(scheme);
        if (it == by_scheme.end()) continue;
        const double fraction = it->second.percent() / 100.0;
        char eff_budget[32];
        char eff_cap[32];
        std::snprintf(eff_budget, sizeof eff_budget, "%.3f",
                      harness::efficiency(fraction, budget));
        std::snprintf(eff_cap, sizeof eff_cap, "%.3f",
                      harness::efficiency(fraction, options.per_chain_cap));
        out << key.model << ',' << key.dataset << ',' << key.paradigm << ','
            << key.chains << ',' << scheme << ','
            << format_percent(it->second.percent()) << ',' << budget << ','
            << eff_budget << ',' << options.per_chain_cap << ',' << eff_cap
            << '\n';
      }
    }
  }

  // ---- significance.csv ----------------------------------------------------
  if (both_paradigms) {
    struct SigRow {
      std::string scheme;
      harness::CellKey key;
      std::string status;
      stats::TTestResult test;
      double d = 0.0;
      stats::BootstrapInterval ci;
    };
    std::vector<SigRow> rows;
    for (const std::string& scheme : schemes) {
      const auto seq_vectors = correctness_vectors(records, scheme);
      for (const auto& [key, seq] : seq_vectors) {
        if (key.paradigm != "sequential") continue;
        const ParadigmCellKey par_key{key.model, key.dataset, "parallel",
                                      key.chains};
        const auto par_it = seq_vectors.find(par_key);
        if (par_it == seq_vectors.end()) continue;
        const std::vector<double>& par = par_it->second;

        SigRow row;
        row.scheme = scheme;
        row.key = {key.model, key.dataset, key.chains};
        try {
          row.test = stats::welch_t_test(seq, par);
          row.d = stats::cohens_d(seq, par);
          if (seq.size() == par.size()) {
            std::vector<double> diff(seq.size());
            for (std::size_t i = 0; i < seq.size(); ++i)
              diff[i] = seq[i] - par[i];
            row.ci = stats::bootstrap_ci_mean(diff, options.bootstrap_resamples,
                                              options.bootstrap_level,
                                              options.seed);
          }
          row.status = "ok";
        } catch (const stats::DegenerateSample&) {
          row.status = "degenerate";
        }
        rows.push_back(std::move(row));
      }
    }
    const int m = options.bonferroni_m > 0
                      ? options.bonferroni_m
                      : std::max<int>(1, static_cast<int>(rows.size()));
    std::ofstream out = open_out(out_dir + "/significance.csv");
    out << "scheme,model,dataset,chains,status,t,p,df,cohens_d,ci_lo,ci_hi,"
           "bonferroni_m,p_adjusted\n";
    for (const SigRow& row : rows) {
      out << row.scheme << ',' << row.key.model << ',' << row.key.dataset
          << ',' << row.key.chains << ',' << row.status << ',';
      if (row.status == "ok") {
        char buffer[160];
        std::snprintf(buffer, sizeof buffer,
                      "%.6f,%.6f,%.4f,%.6f,%.6f,%.6f,%d,%.6f", row.test.t,
                      row.test.p, row.test.df, row.d, row.ci.lower,
                      row.ci.upper, m, stats::bonferroni(row.test.p, m));
        out << buffer << '\n';
      } else {
        out << ",,,,,," << m << ",\n";
      }
    }
  }

  // ---- diversity.csv -------------------------------------------------------
  {
    bool any = false;
    for (const harness::RunRecord& r : records)
      if (r.diversity.has_value()) any = true;
    if (any) {
      std::ofstream out = open_out(out_dir + "/diversity.csv");
      out << "model,dataset,paradigm,chains,problem_id,semantic,lexical\n";
      for (const harness::RunRecord& r : records) {
        if (!r.diversity.has_value()) continue;
        char buffer[64];
        std::snprintf(buffer, sizeof buffer, "%.6f,%.6f",
                      r.diversity->semantic, r.diversity->lexical);
        out << r.model << ',' << r.dataset << ',' << r.paradigm << ','
            << r.n_chains << ',' << r.problem_id << ',' << buffer << '\n';
      }
    }
  }

  // ---- summary.txt ---------------------------------------------------------
  {
    std::ofstream out = open_out(out_dir + "/summary.txt");
    out << "Run summary\n===========\n\n";
    out << "Records: " << records.size() << "\n";
    out << "Schemes:";
    for (const std::string& scheme : schemes) out << ' ' << scheme;
    out << "\n\n";

    for (const std::string& paradigm : paradigms) {
      SchemeTable t = scheme_table(records, paradigm);
      if (t.rows.empty()) continue;
      out << "Accuracy (%, " << paradigm << ")\n";
      out << "model,dataset,chains";
      for (const std::string& scheme : schemes) out << ',' << scheme;
      out << '\n';
      for (const SchemeRow& row : t.rows) {
        out << row.model << ',' << row.dataset << ',' << row.chains;
        for (const std::string& scheme : schemes) {
          const auto it = row.acc_by_scheme.find(scheme);
          out << ','
              << (it == row.acc_by_scheme.end() ? std::string("-")
                                                : format_percent(it->second));
        }
        out << '\n';
      }
      out << '\n';
    }

    if (both_paradigms && !schemes.empty()) {
      const std::string headline =
          std::find(schemes.begin(), schemes.end(), "majority") !=
                  schemes.end()
              ? "majority"
              : schemes.front();
      const harness::AccuracyTable seq =
          accuracy_table(records, headline, "sequential");
      const harness::AccuracyTable par =
          accuracy_table(records, headline, "parallel");
      if (!seq.empty() && seq.size() == par.size()) {
        try {
          const harness::WinRate wr = harness::win_rate(seq, par);
          out << "Sequential vs parallel (" << headline << "): " << wr.wins
              << "/" << wr.total << " wins ("
              << format_percent(100.0 * wr.fraction) << "%), max gap "
              << format_percent(harness::max_gap(seq, par)) << " points\n";
        } catch (const harness::MisalignedTables&) {
          out << "Sequential vs parallel: tables misaligned; see paradigm.csv\n";
        }
      }
    }
  }
}

}  // namespace seqscale::report
