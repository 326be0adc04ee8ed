#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "irtcal/ctt.hpp"
#include "irtcal/estimation.hpp"
#include "irtcal/model.hpp"

namespace irtcal::cli {

// Exit codes are part of the command-line contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;       // unparseable input, bad flags, unwritable output
inline constexpr int kExitRefused = 3;     // estimation or cleaning refused
inline constexpr int kExitPartial = 4;     // some models failed, the rest are reported

enum class OutputFormat { Text, Csv, Json };
enum class TableAxis { Persons, Items, Both };

struct RunConfig {
  std::filesystem::path input_path;
  std::vector<ModelKind> models{ModelKind::Rasch, ModelKind::TwoParamItem,
                                ModelKind::TwoParamPerson, ModelKind::ThreeParam};
  LinkFunction link = LinkFunction::NormalOgive;
  EstimationConfig estimation;
  CttOptions ctt;
  bool clean = false;
  OutputFormat format = OutputFormat::Text;
  TableAxis table_axis = TableAxis::Both;
  std::optional<std::filesystem::path> out;

  // calibrate: optional sidecar written by simulate, for recovery scoring
  std::optional<std::filesystem::path> truth_path;
  // ctt: optional destination for the cleaned matrix
  std::optional<std::filesystem::path> cleaned_out;

  // simulate
  std::uint64_t seed = 1;
  std::size_t n_persons = 46;
  std::size_t n_items = 44;
  double d_spread = 0.3;
  ModelKind simulate_model = ModelKind::ThreeParam;

  /// Throws DomainError if no model is requested or a section is invalid.
  void validate() const;
};

/// Fits the requested models and writes tables and comparisons to
/// config.out (or `out`). Diagnostics go to `err`.
int run_calibrate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes a simulated matrix CSV to config.out and the generating
/// parameters to a sidecar JSON (see truth_sidecar_path).
int run_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Classical statistics and test cleaning report.
int run_ctt(const RunConfig& config, std::ostream& out, std::ostream& err);

/// `data.csv` -> `data.truth.json`.
std::filesystem::path truth_sidecar_path(const std::filesystem::path& matrix_path);

/// Seed of the response stream for a simulate run; the population uses
/// `seed` itself so the two streams do not overlap.
std::uint64_t response_seed(std::uint64_t seed);

/// Full command line: `irtcal <calibrate|simulate|ctt> [flags]`. Flags
/// override values from `--config file.json`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace irtcal::cli
