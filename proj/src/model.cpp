#include "irtcal/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace irtcal {

namespace {

void require_unique(const std::vector<std::string>& labels, const char* axis) {
  std::unordered_set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(label).second)
      throw DomainError(std::string("duplicate ") + axis + " label '" + label + "'");
  }
}

std::vector<std::string> numbered_labels(char prefix, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

}  // namespace

ResponseMatrix::ResponseMatrix(std::size_t n_persons, std::size_t n_items,
                               std::vector<std::int8_t> cells,
                               std::vector<std::string> person_ids,
                               std::vector<std::string> item_ids)
    : n_persons_(n_persons),
      n_items_(n_items),
      cells_(std::move(cells)),
      person_ids_(std::move(person_ids)),
      item_ids_(std::move(item_ids)) {
  if (n_persons_ < 2 || n_items_ < 2)
    throw DomainError("response matrix needs at least 2 persons and 2 items, got " +
                      std::to_string(n_persons_) + "x" + std::to_string(n_items_));
  if (cells_.size() != n_persons_ * n_items_)
    throw DomainError("cell count does not match matrix dimensions");
  if (person_ids_.size() != n_persons_ || item_ids_.size() != n_items_)
    throw DomainError("label count does not match matrix dimensions");
  for (auto c : cells_) {
    if (c != 0 && c != 1 && c != kMissing)
      throw DomainError("response cells must be 0, 1 or missing");
  }
  require_unique(person_ids_, "person");
  require_unique(item_ids_, "item");
}

ResponseMatrix ResponseMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  const std::size_t n_items = rows.empty() ? 0 : rows.front().size();
  std::vector<std::int8_t> cells;
  cells.reserve(rows.size() * n_items);
  for (const auto& r : rows) {
    if (r.size() != n_items) throw DomainError("ragged response rows");
    for (int v : r) cells.push_back(static_cast<std::int8_t>(v));
  }
  return ResponseMatrix(rows.size(), n_items, std::move(cells),
                        numbered_labels('P', rows.size()), numbered_labels('I', n_items));
}

ResponseMatrix::ResponseMatrix(std::initializer_list<std::initializer_list<int>> rows)
    : ResponseMatrix([&] {
        std::vector<std::vector<int>> v;
        for (auto r : rows) v.emplace_back(r);
        return from_rows(v);
      }()) {}

ResponseMatrix ResponseMatrix::transposed() const {
  std::vector<std::int8_t> out(cells_.size());
  for (std::size_t i = 0; i < n_persons_; ++i)
    for (std::size_t j = 0; j < n_items_; ++j) out[j * n_persons_ + i] = (*this)(i, j);
  return ResponseMatrix(n_items_, n_persons_, std::move(out), item_ids_, person_ids_);
}

ResponseMatrix ResponseMatrix::complemented() const {
  std::vector<std::int8_t> out(cells_);
  for (auto& c : out) {
    if (c != kMissing) c = static_cast<std::int8_t>(1 - c);
  }
  return ResponseMatrix(n_persons_, n_items_, std::move(out), person_ids_, item_ids_);
}

ResponseMatrix ResponseMatrix::select(std::span<const std::size_t> persons,
                                      std::span<const std::size_t> items) const {
  std::vector<std::int8_t> out;
  out.reserve(persons.size() * items.size());
  std::vector<std::string> pids, iids;
  for (auto i : persons) {
    if (i >= n_persons_) throw DomainError("person index out of range");
    pids.push_back(person_ids_[i]);
    for (auto j : items) {
      if (j >= n_items_) throw DomainError("item index out of range");
      out.push_back((*this)(i, j));
    }
  }
  for (auto j : items) iids.push_back(item_ids_[j]);
  return ResponseMatrix(persons.size(), items.size(), std::move(out), std::move(pids),
                        std::move(iids));
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Rasch: return "rasch";
    case ModelKind::TwoParamItem: return "2pl-item";
    case ModelKind::TwoParamPerson: return "2pl-person";
    case ModelKind::ThreeParam: return "3p";
  }
  return "?";
}

std::string_view to_string(LinkFunction link) {
  return link == LinkFunction::Logistic ? "logistic" : "normal";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::Rasch, ModelKind::TwoParamItem, ModelKind::TwoParamPerson,
                 ModelKind::ThreeParam}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<LinkFunction> parse_link(std::string_view name) {
  if (name == "logistic" || name == "logit") return LinkFunction::Logistic;
  if (name == "normal" || name == "probit" || name == "normal-ogive")
    return LinkFunction::NormalOgive;
  return std::nullopt;
}

ParameterSet::ParameterSet(std::size_t n_persons, std::size_t n_items)
    : theta(n_persons, 0.0),
      beta(n_items, 0.0),
      d_person(n_persons, kFixedDiscrimination),
      d_item(n_items, kFixedDiscrimination) {}

void ParameterSet::validate(std::size_t n_persons, std::size_t n_items) const {
  if (theta.size() != n_persons || d_person.size() != n_persons)
    throw DomainError("person parameter vectors have length " + std::to_string(theta.size()) +
                      "/" + std::to_string(d_person.size()) + ", expected " +
                      std::to_string(n_persons));
  if (beta.size() != n_items || d_item.size() != n_items)
    throw DomainError("item parameter vectors have length " + std::to_string(beta.size()) +
                      "/" + std::to_string(d_item.size()) + ", expected " +
                      std::to_string(n_items));
  auto positive = [](double d) { return std::isfinite(d) && d > 0.0; };
  if (!std::all_of(d_person.begin(), d_person.end(), positive) ||
      !std::all_of(d_item.begin(), d_item.end(), positive))
    throw DomainError("discriminations must be finite and positive");
}

ParameterSet ParameterSet::with_fixings(ModelKind kind) const {
  ParameterSet out = *this;
  const ModelSpec spec{kind, LinkFunction::Logistic};
  if (!spec.person_d_free()) std::fill(out.d_person.begin(), out.d_person.end(), kFixedDiscrimination);
  if (!spec.item_d_free()) std::fill(out.d_item.begin(), out.d_item.end(), kFixedDiscrimination);
  return out;
}

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double normal_pdf(double x) noexcept {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double link_probability(LinkFunction link, double x) noexcept {
  return link == LinkFunction::Logistic ? logistic(x) : normal_cdf(x);
}

double combined_discrimination(double d_person, double d_item) {
  if (!(d_person > 0.0) || !(d_item > 0.0) || !std::isfinite(d_person) ||
      !std::isfinite(d_item))
    throw DomainError("discriminations must be finite and positive");
  return d_person * d_item / std::hypot(d_person, d_item);
}

double success_probability(const ModelSpec& spec, double theta, double beta,
                           double d_person, double d_item) {
  return link_probability(spec.link, combined_discrimination(d_person, d_item) * (theta - beta));
}

}  // namespace irtcal
