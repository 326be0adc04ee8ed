#include "irtcal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "irtcal/csv_io.hpp"

namespace irtcal {

namespace {

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // "-0.00" reads as a distinct value; print it as zero.
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string full(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string column_name(const ModelSpec& spec) { return std::string(to_string(spec.kind)); }

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json number_or_null(double v) {
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

nlohmann::json spec_json(const ModelSpec& spec) {
  return {{"model", to_string(spec.kind)}, {"link", to_string(spec.link)}};
}

}  // namespace

std::string axis_name(Axis axis) { return axis == Axis::Persons ? "persons" : "items"; }

std::string format_table_text(const RankedTable& table) {
  std::size_t label_w = 5;
  for (const auto& row : table.rows) label_w = std::max(label_w, row.label.size());
  std::vector<std::size_t> widths;
  for (const auto& c : table.columns) widths.push_back(std::max<std::size_t>(8, column_name(c).size() + 2));

  std::ostringstream out;
  out << (table.axis == Axis::Persons ? "Persons" : "Items") << " (standardized, sorted by "
      << to_string(table.sort_by.kind)
      << (table.axis == Axis::Persons ? ", descending" : ", ascending") << ")\n";
  out << pad_right(table.axis == Axis::Persons ? "person" : "item", label_w);
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << pad_left(column_name(table.columns[c]), widths[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    out << pad_right(row.label, label_w);
    for (std::size_t c = 0; c < row.values.size(); ++c)
      out << pad_left(fixed(row.values[c], 2), widths[c]);
    out << '\n';
  }
  if (table.has_footer) {
    for (const auto* footer : {&table.r, &table.z}) {
      out << pad_right(footer == &table.r ? "r" : "z", label_w);
      for (std::size_t c = 0; c < footer->size(); ++c)
        out << pad_left((*footer)[c] ? fixed(*(*footer)[c], 3) : "-", widths[c]);
      out << '\n';
    }
  }
  return out.str();
}

std::string format_table_csv(const RankedTable& table, bool with_header) {
  std::ostringstream out;
  if (with_header) {
    out << "axis,row,label";
    for (const auto& c : table.columns) out << ',' << column_name(c);
    out << '\n';
  }
  const auto axis = axis_name(table.axis);
  for (const auto& row : table.rows) {
    out << axis << ",value," << csv_field(row.label);
    for (double v : row.values) out << ',' << full(v);
    out << '\n';
  }
  if (table.has_footer) {
    for (const auto* footer : {&table.r, &table.z}) {
      const char* name = footer == &table.r ? "r" : "z";
      out << axis << ',' << name << ',' << name;
      for (const auto& v : *footer) out << ',' << (v ? full(*v) : "");
      out << '\n';
    }
  }
  return out.str();
}

nlohmann::json to_json(const RankedTable& table) {
  nlohmann::json j;
  j["axis"] = axis_name(table.axis);
  j["sort_by"] = to_string(table.sort_by.kind);
  j["order"] = table.axis == Axis::Persons ? "descending" : "ascending";
  j["columns"] = nlohmann::json::array();
  for (const auto& c : table.columns) j["columns"].push_back(column_name(c));
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows)
    j["rows"].push_back({{"label", row.label}, {"index", row.index}, {"values", row.values}});
  if (table.has_footer) {
    nlohmann::json r = nlohmann::json::array(), z = nlohmann::json::array();
    for (const auto& v : table.r) r.push_back(optional_number(v));
    for (const auto& v : table.z) z.push_back(optional_number(v));
    j["footer"] = {{"r", r}, {"z", z}};
  }
  return j;
}

std::string format_comparison_text(const ComparisonReport& report, Axis axis) {
  std::ostringstream out;
  out << "Comparison of " << axis_name(axis) << " against " << to_string(report.baseline.kind)
      << " (n = " << report.n << ", sigma_z = " << fixed(report.sigma_z, 3) << ")\n";
  for (const auto& c : report.compared)
    out << "  " << pad_right(column_name(c.spec), 12) << "r = " << fixed(c.r, 3)
        << "  z = " << fixed(c.z, 3) << '\n';
  for (const auto& p : report.pairwise) {
    out << "  " << column_name(p.a) << " vs " << column_name(p.b)
        << ": delta = " << fixed(p.delta, 3) << ", sigma_delta = " << fixed(p.sigma_delta, 3)
        << ", ratio = " << fixed(p.ratio, 3) << ", "
        << (p.significant_at_10pct ? "significant" : "not significant") << " at 10%\n";
  }
  return out.str();
}

std::string format_comparison_csv(const ComparisonReport& report, Axis axis) {
  std::ostringstream out;
  out << "axis,model_a,model_b,delta,sigma_delta,ratio,significant_at_10pct\n";
  for (const auto& p : report.pairwise)
    out << axis_name(axis) << ',' << column_name(p.a) << ',' << column_name(p.b) << ','
        << full(p.delta) << ',' << full(p.sigma_delta) << ',' << full(p.ratio) << ','
        << (p.significant_at_10pct ? "true" : "false") << '\n';
  return out.str();
}

nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json j;
  j["baseline"] = spec_json(report.baseline);
  j["n"] = report.n;
  j["sigma_z"] = report.sigma_z;
  j["critical_ratio"] = kCriticalRatio10pct;
  j["compared"] = nlohmann::json::array();
  for (const auto& c : report.compared)
    j["compared"].push_back({{"model", to_string(c.spec.kind)}, {"r", c.r}, {"z", c.z}});
  j["pairwise"] = nlohmann::json::array();
  for (const auto& p : report.pairwise)
    j["pairwise"].push_back({{"a", to_string(p.a.kind)},
                             {"b", to_string(p.b.kind)},
                             {"delta", p.delta},
                             {"sigma_delta", p.sigma_delta},
                             {"ratio", p.ratio},
                             {"significant_at_10pct", p.significant_at_10pct}});
  return j;
}

std::string format_ctt_text(const CttReport& report, const ResponseMatrix& matrix) {
  const auto& o = report.options;
  std::ostringstream out;
  out << "Item-total threshold " << fixed(o.item_r_threshold, 3) << ", person quota "
      << fixed(o.person_quota, 3) << (o.corrected ? ", corrected totals" : "")
      << (o.fixpoint ? ", repeated until stable" : ", single pass") << '\n';
  out << pad_right("item", 12) << pad_left("q", 8) << pad_left("r_it", 8) << "  status\n";
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    const bool removed = std::binary_search(report.flagged_items.begin(),
                                            report.flagged_items.end(), j);
    out << pad_right(matrix.item_ids()[j], 12) << pad_left(fixed(report.difficulty[j], 3), 8)
        << pad_left(fixed(report.item_total_r[j], 3), 8) << "  "
        << (removed ? "removed" : "kept") << '\n';
  }
  out << pad_right("person", 12) << pad_left("r_pt", 8) << "  status\n";
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const bool flagged = std::find(report.flagged_persons.begin(), report.flagged_persons.end(),
                                   i) != report.flagged_persons.end();
    out << pad_right(matrix.person_ids()[i], 12)
        << pad_left(fixed(report.person_total_r[i], 3), 8) << "  "
        << (flagged ? (o.remove_persons ? "removed" : "flagged") : "ok") << '\n';
  }
  out << report.flagged_items.size() << " item(s) removed, " << report.flagged_persons.size()
      << " person(s) flagged (limit " << person_flag_limit(o.person_quota, matrix.n_persons())
      << ")\n";
  return out.str();
}

std::string format_ctt_csv(const CttReport& report, const ResponseMatrix& matrix) {
  std::ostringstream out;
  out << "axis,label,difficulty,total_r,flagged\n";
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    const bool removed = std::binary_search(report.flagged_items.begin(),
                                            report.flagged_items.end(), j);
    out << "item," << csv_field(matrix.item_ids()[j]) << ',' << full(report.difficulty[j]) << ','
        << full(report.item_total_r[j]) << ',' << (removed ? "true" : "false") << '\n';
  }
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const bool flagged = std::find(report.flagged_persons.begin(), report.flagged_persons.end(),
                                   i) != report.flagged_persons.end();
    out << "person," << csv_field(matrix.person_ids()[i]) << ",," << full(report.person_total_r[i])
        << ',' << (flagged ? "true" : "false") << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const CttReport& report, const ResponseMatrix& matrix) {
  nlohmann::json j;
  const auto& o = report.options;
  j["options"] = {{"item_r_threshold", o.item_r_threshold},
                  {"person_quota", o.person_quota},
                  {"corrected", o.corrected},
                  {"fixpoint", o.fixpoint},
                  {"remove_persons", o.remove_persons}};
  j["items"] = nlohmann::json::array();
  for (std::size_t k = 0; k < matrix.n_items(); ++k)
    j["items"].push_back({{"label", matrix.item_ids()[k]},
                          {"difficulty", report.difficulty[k]},
                          {"item_total_r", number_or_null(report.item_total_r[k])}});
  j["persons"] = nlohmann::json::array();
  for (std::size_t k = 0; k < matrix.n_persons(); ++k)
    j["persons"].push_back({{"label", matrix.person_ids()[k]},
                            {"person_total_r", number_or_null(report.person_total_r[k])}});
  j["flagged_items"] = report.flagged_items;
  j["flagged_persons"] = report.flagged_persons;
  j["person_flag_limit"] = person_flag_limit(o.person_quota, matrix.n_persons());
  return j;
}

nlohmann::json to_json(const ParameterSet& params) {
  return {{"theta", params.theta},
          {"beta", params.beta},
          {"d_person", params.d_person},
          {"d_item", params.d_item}};
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j = spec_json(fit.spec);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["loglik"] = fit.final_loglik();
  j["loglik_trace"] = fit.loglik_trace;
  j["excluded_persons"] = fit.excluded_persons;
  j["excluded_items"] = fit.excluded_items;
  j["person_ids"] = fit.person_ids;
  j["item_ids"] = fit.item_ids;
  j["params"] = to_json(fit.params);
  return j;
}

}  // namespace irtcal
