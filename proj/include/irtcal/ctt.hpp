#pragma once

#include <cstddef>
#include <vector>

#include "irtcal/model.hpp"

namespace irtcal {

/// Share of non-missing responses to item `item` that are incorrect.
double item_difficulty(const ResponseMatrix& matrix, std::size_t item);

/// Pearson correlation between an item column and the persons' total scores.
/// Totals include the item itself unless `corrected` is set. Persons missing
/// the item are left out. Throws UndefinedCorrelation on zero variance.
double item_total_correlation(const ResponseMatrix& matrix, std::size_t item,
                              bool corrected = false);

/// Row analogue: a person's responses against the items' total scores.
double person_total_correlation(const ResponseMatrix& matrix, std::size_t person,
                                bool corrected = false);

struct CttOptions {
  double item_r_threshold = 0.2;
  double person_quota = 0.05;  // at most ceil(quota * n_persons) flagged
  bool corrected = false;      // exclude the item (person) from its own total
  bool fixpoint = false;       // repeat item removal until nothing changes
  bool remove_persons = false; // drop flagged persons instead of just flagging
};

/// Classical statistics gathered while cleaning a test. Indices refer to the
/// matrix passed to clean_test. Correlations that are undefined (zero
/// variance) are stored as NaN.
struct CttReport {
  std::vector<double> difficulty;      // per item, on the input matrix
  std::vector<double> item_total_r;    // per item, from the pass that decided it
  std::vector<double> person_total_r;  // per person, after item removal
  std::vector<std::size_t> flagged_items;    // removed items
  std::vector<std::size_t> flagged_persons;  // lowest person_total_r first
  std::vector<std::size_t> kept_items;
  std::vector<std::size_t> kept_persons;
  CttOptions options;
};

struct CleanResult {
  ResponseMatrix matrix;
  CttReport report;
};

/// Largest number of persons the quota allows: ceil(quota * n).
std::size_t person_flag_limit(double quota, std::size_t n_persons);

/// Drops items whose item-total correlation is below the threshold (an
/// undefined correlation counts as 0), then flags up to the quota of persons
/// whose person-total correlation on the reduced matrix is below the same
/// threshold. One removal pass unless options.fixpoint. Throws RefusalError
/// if fewer than 2 items or persons would remain.
CleanResult clean_test(const ResponseMatrix& matrix, const CttOptions& options = {});

}  // namespace irtcal
