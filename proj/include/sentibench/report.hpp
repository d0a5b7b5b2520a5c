#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/crossval.hpp"
#include "sentibench/metrics.hpp"

namespace sentibench {

inline std::string fmt_fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

namespace detail {

// Aligned plain-text table: first column left-aligned, the rest right-aligned.
inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      if (c == 0) {
        out += row[c];
        out.append(width[c] - row[c].size(), ' ');
      } else {
        out.append(width[c] - row[c].size(), ' ');
        out += row[c];
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace detail

struct NamedReport {
  std::string name;
  EvalReport report;
};

// Model | Acc. | AUC | Recall | Prec. | F1 | Kappa | MCC | Time (s).
// Wall times go into files only on request, so that report files stay
// byte-identical across reruns with the same seed.
inline std::string render_model_table(const std::vector<NamedReport>& rows,
                                      bool include_time = false) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "Acc.", "AUC", "Recall", "Prec.", "F1", "Kappa", "MCC", "Time (s)"});
  bool any_degenerate = false;
  for (const auto& [name, r] : rows) {
    any_degenerate = any_degenerate || r.degenerate;
    cells.push_back({r.degenerate ? name + "*" : name, fmt_fixed(r.accuracy), fmt_fixed(r.auc),
                     fmt_fixed(r.recall), fmt_fixed(r.precision), fmt_fixed(r.f1),
                     fmt_fixed(r.kappa), fmt_fixed(r.mcc),
                     include_time ? fmt_fixed(r.wall_time_s, 2) : std::string("-")});
  }
  std::string out = detail::render_table(cells);
  if (any_degenerate) out += "* some metrics had zero denominators and are reported as 0\n";
  return out;
}

// Per-class layout: one row per class, then accuracy and the macro average.
inline std::string render_per_class_table(const EvalReport& r) {
  const std::size_t total = r.per_class[0].support + r.per_class[1].support;
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Class", "Precision", "Recall", "F1-Score", "Support"});
  const char* names[2] = {"Negative", "Positive"};
  for (int c = 0; c < 2; ++c) {
    cells.push_back({names[c], fmt_fixed(r.per_class[c].precision),
                     fmt_fixed(r.per_class[c].recall), fmt_fixed(r.per_class[c].f1),
                     std::to_string(r.per_class[c].support)});
  }
  cells.push_back({"Accuracy", "", "", fmt_fixed(r.accuracy), std::to_string(total)});
  cells.push_back({"Macro Avg", fmt_fixed(r.precision), fmt_fixed(r.recall), fmt_fixed(r.f1),
                   std::to_string(total)});
  return detail::render_table(cells);
}

struct ComparisonRow {
  std::string name;
  double accuracy = 0.0;
  double f1 = 0.0;
};

// Two-row ML-vs-DL comparison: Approach | Accuracy | F1-Score.
inline std::string render_comparison_table(const std::vector<ComparisonRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Approach", "Accuracy", "F1-Score"});
  for (const auto& row : rows) {
    cells.push_back({row.name, fmt_fixed(row.accuracy), fmt_fixed(row.f1)});
  }
  return detail::render_table(cells);
}

inline nlohmann::json eval_report_to_json(const EvalReport& r, bool include_time = false) {
  nlohmann::json per_class = nlohmann::json::array();
  const char* names[2] = {"negative", "positive"};
  for (int c = 0; c < 2; ++c) {
    per_class.push_back({{"class", names[c]},
                         {"precision", r.per_class[c].precision},
                         {"recall", r.per_class[c].recall},
                         {"f1", r.per_class[c].f1},
                         {"support", r.per_class[c].support}});
  }
  nlohmann::json j{{"accuracy", r.accuracy},
                   {"auc", r.auc},
                   {"recall", r.recall},
                   {"precision", r.precision},
                   {"f1", r.f1},
                   {"kappa", r.kappa},
                   {"mcc", r.mcc},
                   {"per_class", std::move(per_class)},
                   {"confusion", {{"tn", r.confusion.tn},
                                  {"fp", r.confusion.fp},
                                  {"fn", r.confusion.fn},
                                  {"tp", r.confusion.tp}}},
                   {"degenerate", r.degenerate}};
  if (include_time) j["time_s"] = r.wall_time_s;
  return j;
}

inline nlohmann::json cv_result_to_json(const CvResult& cv, bool include_time = false) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& fold : cv.per_fold) folds.push_back(eval_report_to_json(fold, include_time));
  nlohmann::json std_dev{{"accuracy", cv.std_dev.accuracy}, {"auc", cv.std_dev.auc},
                         {"recall", cv.std_dev.recall},     {"precision", cv.std_dev.precision},
                         {"f1", cv.std_dev.f1},             {"kappa", cv.std_dev.kappa},
                         {"mcc", cv.std_dev.mcc}};
  return nlohmann::json{{"folds", std::move(folds)},
                        {"mean", eval_report_to_json(cv.mean, include_time)},
                        {"std", std::move(std_dev)}};
}

}  // namespace sentibench
