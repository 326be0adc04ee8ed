#include "irtcal/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "irtcal/analysis.hpp"
#include "irtcal/csv_io.hpp"
#include "irtcal/report.hpp"
#include "irtcal/simulation.hpp"

namespace irtcal::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
T parse_number(std::string_view name, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw UsageError("--" + std::string(name) + ": '" + text + "' is not a valid number");
  return value;
}

bool parse_bool(std::string_view name, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw UsageError("--" + std::string(name) + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part.erase(0, part.find_first_not_of(' '));
    part.erase(part.find_last_not_of(' ') + 1);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

ModelKind model_or_throw(const std::string& name) {
  if (auto k = parse_model_kind(name)) return *k;
  throw UsageError("unknown model '" + name + "' (expected rasch, 2pl-item, 2pl-person, 3p)");
}

// Single setter shared by flags and the JSON config file. `name` is the flag
// without its leading dashes.
void set_option(RunConfig& c, const std::string& name, const std::string& v) {
  if (name == "input") {
    c.input_path = v;
  } else if (name == "models") {
    c.models.clear();
    for (const auto& m : split_list(v)) c.models.push_back(model_or_throw(m));
  } else if (name == "link") {
    const auto link = parse_link(v);
    if (!link) throw UsageError("unknown link '" + v + "' (expected logistic or normal)");
    c.link = *link;
  } else if (name == "tol") {
    c.estimation.tolerance = parse_number<double>(name, v);
  } else if (name == "max-iter") {
    c.estimation.max_iterations = parse_number<std::size_t>(name, v);
  } else if (name == "d-lower") {
    c.estimation.d_lower = parse_number<double>(name, v);
  } else if (name == "d-upper") {
    c.estimation.d_upper = parse_number<double>(name, v);
  } else if (name == "damping") {
    c.estimation.step_damping = parse_number<double>(name, v);
  } else if (name == "extreme") {
    if (v == "exclude")
      c.estimation.extreme_score_policy = ExtremeScorePolicy::Exclude;
    else if (v == "penalize")
      c.estimation.extreme_score_policy = ExtremeScorePolicy::Penalize;
    else
      throw UsageError("--extreme: expected exclude or penalize");
  } else if (name == "clean") {
    c.clean = parse_bool(name, v);
  } else if (name == "item-r-threshold") {
    c.ctt.item_r_threshold = parse_number<double>(name, v);
  } else if (name == "person-quota") {
    c.ctt.person_quota = parse_number<double>(name, v);
  } else if (name == "corrected") {
    c.ctt.corrected = parse_bool(name, v);
  } else if (name == "fixpoint") {
    c.ctt.fixpoint = parse_bool(name, v);
  } else if (name == "remove-persons") {
    c.ctt.remove_persons = parse_bool(name, v);
  } else if (name == "format") {
    if (v == "text")
      c.format = OutputFormat::Text;
    else if (v == "csv")
      c.format = OutputFormat::Csv;
    else if (v == "json")
      c.format = OutputFormat::Json;
    else
      throw UsageError("--format: expected text, csv or json");
  } else if (name == "axis") {
    if (v == "persons")
      c.table_axis = TableAxis::Persons;
    else if (v == "items")
      c.table_axis = TableAxis::Items;
    else if (v == "both")
      c.table_axis = TableAxis::Both;
    else
      throw UsageError("--axis: expected persons, items or both");
  } else if (name == "seed") {
    c.seed = parse_number<std::uint64_t>(name, v);
  } else if (name == "out") {
    c.out = v;
  } else if (name == "truth") {
    c.truth_path = v;
  } else if (name == "cleaned-out") {
    c.cleaned_out = v;
  } else if (name == "persons") {
    c.n_persons = parse_number<std::size_t>(name, v);
  } else if (name == "items") {
    c.n_items = parse_number<std::size_t>(name, v);
  } else if (name == "d-spread") {
    c.d_spread = parse_number<double>(name, v);
  } else if (name == "model") {
    c.simulate_model = model_or_throw(v);
  } else {
    throw UsageError("unknown configuration key '" + name + "'");
  }
}

void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (const auto& e : value) {
        if (!text.empty()) text += ',';
        text += e.is_string() ? e.get<std::string>() : e.dump();
      }
    } else {
      text = value.dump();
    }
    set_option(c, key, text);
  }
}

// Writes to config.out when given, otherwise to `fallback`.
bool emit(const std::optional<std::filesystem::path>& path, std::ostream& fallback,
          const std::string& content, std::ostream& err) {
  if (!path) {
    fallback << content;
    return true;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) {
    err << "error: cannot write " << path->string() << '\n';
    return false;
  }
  file << content;
  file.close();
  if (!file) {
    err << "error: failed writing " << path->string() << '\n';
    return false;
  }
  return true;
}

std::optional<ResponseMatrix> load_matrix(const RunConfig& c, std::ostream& err) {
  if (c.input_path.empty()) {
    err << "error: --input is required\n";
    return std::nullopt;
  }
  try {
    return read_matrix_csv(c.input_path);
  } catch (const ParseError& e) {
    err << "error: " << c.input_path.string() << ':' << e.line() << ':' << e.column() << ": "
        << e.what() << '\n';
    return std::nullopt;
  }
}

std::vector<Axis> requested_axes(TableAxis a) {
  switch (a) {
    case TableAxis::Persons: return {Axis::Persons};
    case TableAxis::Items: return {Axis::Items};
    case TableAxis::Both: return {Axis::Persons, Axis::Items};
  }
  return {};
}

struct Recovery {
  ModelKind kind;
  double theta_r;
  double beta_r;
};

// Correlates fitted locations with the generating ones from a simulate
// sidecar, matched by label.
std::vector<Recovery> score_recovery(const std::vector<FitResult>& fits,
                                     const std::filesystem::path& truth_path) {
  std::ifstream in(truth_path);
  if (!in) throw UsageError("cannot open truth file " + truth_path.string());
  const json truth = json::parse(in);
  const auto ids_p = truth.at("person_ids").get<std::vector<std::string>>();
  const auto ids_i = truth.at("item_ids").get<std::vector<std::string>>();
  const auto theta = truth.at("params").at("theta").get<std::vector<double>>();
  const auto beta = truth.at("params").at("beta").get<std::vector<double>>();
  std::map<std::string, double> theta_by_id, beta_by_id;
  for (std::size_t k = 0; k < ids_p.size(); ++k) theta_by_id[ids_p[k]] = theta.at(k);
  for (std::size_t k = 0; k < ids_i.size(); ++k) beta_by_id[ids_i[k]] = beta.at(k);

  std::vector<Recovery> out;
  for (const auto& fit : fits) {
    std::vector<double> t_true, b_true;
    for (const auto& id : fit.person_ids) t_true.push_back(theta_by_id.at(id));
    for (const auto& id : fit.item_ids) b_true.push_back(beta_by_id.at(id));
    out.push_back({fit.spec.kind, pearson_r(standardize(fit.params.theta), standardize(t_true)),
                   pearson_r(standardize(fit.params.beta), standardize(b_true))});
  }
  return out;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  if (models.empty()) throw DomainError("at least one model must be requested");
  estimation.validate();
}

std::filesystem::path truth_sidecar_path(const std::filesystem::path& matrix_path) {
  auto p = matrix_path;
  p.replace_extension(".truth.json");
  return p;
}

std::uint64_t response_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

int run_calibrate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    c.validate();
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  auto loaded = load_matrix(c, err);
  if (!loaded) return kExitInput;

  std::optional<CleanResult> cleaned;
  if (c.clean) {
    try {
      cleaned = clean_test(*loaded, c.ctt);
    } catch (const RefusalError& e) {
      err << "error: cleaning refused: " << e.what() << '\n';
      return kExitRefused;
    } catch (const DomainError& e) {
      err << "error: " << e.what() << '\n';
      return kExitInput;
    }
  }
  const ResponseMatrix& data = cleaned ? cleaned->matrix : *loaded;

  FitResult rasch;
  try {
    rasch = estimate_rasch(data, c.link, c.estimation);
  } catch (const std::exception& e) {
    err << "error: estimation refused: " << e.what() << '\n';
    return kExitRefused;
  }

  // Non-Rasch models share the Rasch warm start and are fitted concurrently.
  std::vector<std::future<FitResult>> pending;
  for (auto kind : c.models) {
    const ModelSpec spec{kind, c.link};
    pending.push_back(std::async(std::launch::async, [&, spec] {
      return estimate(data, spec, c.estimation, rasch);
    }));
  }
  std::vector<FitResult> fits;
  std::vector<std::string> warnings;
  bool partial = false;
  for (std::size_t k = 0; k < pending.size(); ++k) {
    try {
      fits.push_back(pending[k].get());
    } catch (const std::exception& e) {
      partial = true;
      err << "error: model " << to_string(c.models[k]) << " failed: " << e.what() << '\n';
    }
  }
  if (fits.empty()) return kExitRefused;
  for (const auto& f : fits) {
    if (!f.converged)
      warnings.push_back("model " + std::string(to_string(f.spec.kind)) +
                         " did not converge in " + std::to_string(f.iterations) + " iterations");
  }

  ModelSpec baseline = fits.back().spec;
  const auto three = std::find_if(fits.begin(), fits.end(), [](const FitResult& f) {
    return f.spec.kind == ModelKind::ThreeParam;
  });
  if (three != fits.end())
    baseline = three->spec;
  else if (fits.size() > 1)
    warnings.push_back("3p not fitted; comparing against " +
                       std::string(to_string(baseline.kind)));
  for (const auto& w : warnings) err << "warning: " << w << '\n';

  std::vector<RankedTable> tables;
  std::vector<std::optional<ComparisonReport>> comparisons;
  try {
    for (auto axis : requested_axes(c.table_axis)) {
      tables.push_back(ranked_table(fits, axis, baseline));
      if (fits.size() > 1) {
        std::vector<ModelVector> vectors;
        for (const auto& f : fits) vectors.push_back({f.spec, axis_values(f, axis)});
        comparisons.push_back(compare_models(vectors, baseline, tables.back().rows.size()));
      } else {
        comparisons.emplace_back();
      }
    }
  } catch (const DomainError& e) {
    // e.g. every fitted theta equal
    err << "error: cannot rank or compare the fits: " << e.what() << '\n';
    return kExitRefused;
  }

  std::vector<Recovery> recovery;
  if (c.truth_path) {
    try {
      recovery = score_recovery(fits, *c.truth_path);
    } catch (const std::exception& e) {
      err << "error: recovery scoring: " << e.what() << '\n';
      return kExitInput;
    }
  }

  std::string content;
  if (c.format == OutputFormat::Json) {
    json j;
    j["input"] = c.input_path.string();
    j["link"] = to_string(c.link);
    j["n_persons"] = data.n_persons();
    j["n_items"] = data.n_items();
    j["cleaning"] = cleaned ? to_json(cleaned->report, *loaded) : json(nullptr);
    j["fits"] = json::array();
    for (const auto& f : fits) j["fits"].push_back(to_json(f));
    j["baseline"] = to_string(baseline.kind);
    j["tables"] = json::object();
    j["comparisons"] = json::object();
    for (std::size_t k = 0; k < tables.size(); ++k) {
      const auto name = axis_name(tables[k].axis);
      j["tables"][name] = to_json(tables[k]);
      j["comparisons"][name] = comparisons[k] ? to_json(*comparisons[k]) : json(nullptr);
    }
    if (!recovery.empty()) {
      j["recovery"] = json::array();
      for (const auto& r : recovery)
        j["recovery"].push_back(
            {{"model", to_string(r.kind)}, {"theta_r", r.theta_r}, {"beta_r", r.beta_r}});
    }
    j["warnings"] = warnings;
    content = j.dump(2) + "\n";
  } else if (c.format == OutputFormat::Csv) {
    for (std::size_t k = 0; k < tables.size(); ++k) content += format_table_csv(tables[k], k == 0);
    for (std::size_t k = 0; k < tables.size(); ++k) {
      if (comparisons[k]) content += "\n" + format_comparison_csv(*comparisons[k], tables[k].axis);
    }
  } else {
    std::ostringstream s;
    s << "Calibration of " << c.input_path.string() << ": " << data.n_persons() << " persons x "
      << data.n_items() << " items, " << to_string(c.link) << " link\n";
    if (cleaned)
      s << "Cleaning removed " << cleaned->report.flagged_items.size() << " item(s), flagged "
        << cleaned->report.flagged_persons.size() << " person(s)\n";
    for (const auto& f : fits) {
      s << "  " << to_string(f.spec.kind) << ": loglik " << fixed3(f.final_loglik()) << ", "
        << f.iterations << " iterations, " << (f.converged ? "converged" : "not converged")
        << '\n';
    }
    if (!fits.front().excluded_persons.empty() || !fits.front().excluded_items.empty())
      s << "Excluded for extreme scores: " << fits.front().excluded_persons.size()
        << " person(s), " << fits.front().excluded_items.size() << " item(s)\n";
    for (std::size_t k = 0; k < tables.size(); ++k) {
      s << '\n' << format_table_text(tables[k]);
      if (comparisons[k]) s << '\n' << format_comparison_text(*comparisons[k], tables[k].axis);
    }
    if (!recovery.empty()) {
      s << "\nRecovery against generating parameters\n";
      for (const auto& r : recovery)
        s << "  " << to_string(r.kind) << ": theta r = " << fixed3(r.theta_r)
          << ", beta r = " << fixed3(r.beta_r) << '\n';
    }
    content = s.str();
  }
  if (!emit(c.out, out, content, err)) return kExitInput;
  return partial ? kExitPartial : kExitOk;
}

int run_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  (void)out;
  if (!c.out) {
    err << "error: simulate needs --out for the matrix file\n";
    return kExitInput;
  }
  std::optional<ResponseMatrix> simulated;
  ParameterSet truth;
  const ModelSpec spec{c.simulate_model, c.link};
  try {
    c.estimation.validate();
    truth = sample_population(c.n_persons, c.n_items, c.seed, c.d_spread, c.estimation.d_lower,
                              c.estimation.d_upper)
                .with_fixings(spec.kind);
    simulated = simulate({spec, truth, response_seed(c.seed), c.n_persons, c.n_items});
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  const ResponseMatrix& matrix = *simulated;
  std::ostringstream csv;
  write_matrix_csv(csv, matrix);
  if (!emit(c.out, out, csv.str(), err)) return kExitInput;

  json sidecar;
  sidecar["model"] = to_string(spec.kind);
  sidecar["link"] = to_string(spec.link);
  sidecar["seed"] = c.seed;
  sidecar["response_seed"] = response_seed(c.seed);
  sidecar["n_persons"] = c.n_persons;
  sidecar["n_items"] = c.n_items;
  sidecar["d_spread"] = c.d_spread;
  sidecar["person_ids"] = matrix.person_ids();
  sidecar["item_ids"] = matrix.item_ids();
  sidecar["params"] = to_json(truth);
  if (!emit(truth_sidecar_path(*c.out), out, sidecar.dump(2) + "\n", err)) return kExitInput;
  return kExitOk;
}

int run_ctt(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto loaded = load_matrix(c, err);
  if (!loaded) return kExitInput;
  CleanResult result{*loaded, {}};
  try {
    result = clean_test(*loaded, c.ctt);
  } catch (const RefusalError& e) {
    err << "error: cleaning refused: " << e.what() << '\n';
    return kExitRefused;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  std::string content;
  switch (c.format) {
    case OutputFormat::Json: content = to_json(result.report, *loaded).dump(2) + "\n"; break;
    case OutputFormat::Csv: content = format_ctt_csv(result.report, *loaded); break;
    case OutputFormat::Text: content = format_ctt_text(result.report, *loaded); break;
  }
  if (!emit(c.out, out, content, err)) return kExitInput;
  if (c.cleaned_out) {
    std::ostringstream csv;
    write_matrix_csv(csv, result.matrix);
    if (!emit(c.cleaned_out, out, csv.str(), err)) return kExitInput;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint maximum-likelihood calibration of dichotomous test data"};
  app.name("irtcal");
  app.require_subcommand(1);
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_path;

  auto add = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option("--" + name, values[name], help);
  };
  auto add_flag = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_flag("--" + name, flags[name], help);
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with option values; flags override it");
    add(sub, "format", "text | csv | json");
    add(sub, "out", "output file (default: standard output)");
  };
  auto add_ctt = [&](CLI::App* sub) {
    add(sub, "item-r-threshold", "drop items whose item-total r is below this (default 0.2)");
    add(sub, "person-quota", "share of persons that may be flagged, at most 0.05");
    add_flag(sub, "corrected", "exclude the item from its own total");
    add_flag(sub, "fixpoint", "repeat item removal until nothing changes");
    add_flag(sub, "remove-persons", "drop flagged persons instead of only flagging them");
  };

  auto* calibrate = app.add_subcommand("calibrate", "fit models and compare them");
  add_common(calibrate);
  add(calibrate, "input", "response matrix CSV");
  add(calibrate, "models", "comma list of rasch,2pl-item,2pl-person,3p");
  add(calibrate, "link", "logistic | normal (default normal)");
  add(calibrate, "tol", "convergence tolerance on parameter change (default 1e-4)");
  add(calibrate, "max-iter", "maximum sweeps (default 500)");
  add(calibrate, "d-lower", "lower discrimination bound (default 0.2)");
  add(calibrate, "d-upper", "upper discrimination bound (default 5)");
  add(calibrate, "damping", "Newton step damping in (0, 1]");
  add(calibrate, "extreme", "exclude | penalize extreme scores");
  add(calibrate, "axis", "persons | items | both");
  add(calibrate, "truth", "sidecar JSON from simulate, to score recovery");
  add_flag(calibrate, "clean", "clean the test before calibrating");
  add_ctt(calibrate);

  auto* simulate_cmd = app.add_subcommand("simulate", "write a simulated response matrix");
  add_common(simulate_cmd);
  add(simulate_cmd, "seed", "random seed (default 1)");
  add(simulate_cmd, "persons", "number of persons (default 46)");
  add(simulate_cmd, "items", "number of items (default 44)");
  add(simulate_cmd, "model", "generating model (default 3p)");
  add(simulate_cmd, "link", "logistic | normal (default normal)");
  add(simulate_cmd, "d-spread", "log-scale spread of discriminations (default 0.3)");
  add(simulate_cmd, "d-lower", "lower discrimination bound (default 0.2)");
  add(simulate_cmd, "d-upper", "upper discrimination bound (default 5)");

  auto* ctt_cmd = app.add_subcommand("ctt", "classical item analysis and test cleaning");
  add_common(ctt_cmd);
  add(ctt_cmd, "input", "response matrix CSV");
  add(ctt_cmd, "cleaned-out", "write the cleaned matrix CSV here");
  add_ctt(ctt_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run 'irtcal --help' for usage\n";
    return kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig config;
  try {
    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const auto& [name, value] : values) {
      if (sub->get_option_no_throw("--" + name) && sub->count("--" + name) > 0)
        set_option(config, name, value);
    }
    for (const auto& [name, value] : flags) {
      if (sub->get_option_no_throw("--" + name) && sub->count("--" + name) > 0)
        set_option(config, name, "true");
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  if (sub == calibrate) return run_calibrate(config, out, err);
  if (sub == simulate_cmd) return run_simulate(config, out, err);
  return run_ctt(config, out, err);
}

}  // namespace irtcal::cli
