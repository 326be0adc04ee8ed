#include "irtcal/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace irtcal {

namespace {

// Log-likelihood of one cell and its first derivative and expected
// information with respect to the linear predictor eta = d_s (theta - beta).
struct CellTerms {
  double loglik;
  double score;
  double info;
};

CellTerms cell_terms(LinkFunction link, double eta, std::int8_t x) {
  double p, q, pdf;
  if (link == LinkFunction::Logistic) {
    p = logistic(eta);
    q = logistic(-eta);
    pdf = p * q;
  } else {
    p = normal_cdf(eta);
    q = normal_cdf(-eta);
    pdf = normal_pdf(eta);
  }
  constexpr double lo = kProbabilityFloor;
  constexpr double hi = 1.0 - kProbabilityFloor;
  CellTerms t{};
  t.info = (p > 0.0 && q > 0.0) ? pdf * pdf / (p * q) : 0.0;
  // 1 - P is evaluated as link(-eta) so the upper tail keeps full precision.
  if (x == 1) {
    t.loglik = std::log(std::clamp(p, lo, hi));
    t.score = (p > lo && p < hi) ? pdf / p : 0.0;
  } else {
    t.loglik = std::log(std::clamp(q, lo, hi));
    t.score = (q > lo && q < hi) ? -pdf / q : 0.0;
  }
  return t;
}

// d(d_s)/d(d_a) for d_s = d_a d_b / sqrt(d_a^2 + d_b^2).
double ds_partial(double ds, double d_a) {
  const double r = ds / d_a;
  return r * r * r;
}

// Objective of one person's (or item's) parameters: value, gradient and
// expected information with respect to (location, log discrimination).
struct Local {
  double f = 0.0;
  double g_loc = 0.0;
  double g_u = 0.0;
  double h_ll = 0.0;
  double h_lu = 0.0;
  double h_uu = 0.0;
};

struct BlockPoint {
  double loc;
  double u;  // log discrimination
};

// Damped projected Newton ascent on one unit's location and, when free, log
// discrimination (confined to [u_lo, u_hi]). Every accepted step does not
// decrease f, so the caller's objective is monotone.
template <class Eval>
BlockPoint ascend_block(BlockPoint x, bool d_free, Eval&& eval, double u_lo, double u_hi,
                        double damping, int max_inner) {
  constexpr double kMaxLocStep = 1.0;
  constexpr double kMaxLogDStep = 0.5;
  constexpr double kRidge = 1e-10;
  Local cur = eval(x);
  for (int k = 0; k < max_inner; ++k) {
    // A discrimination pinned at a bound with the gradient pointing outward
    // drops out of the step.
    const bool move_u = d_free && !(x.u <= u_lo && cur.g_u < 0.0) &&
                        !(x.u >= u_hi && cur.g_u > 0.0) && u_lo < u_hi;
    double s_loc, s_u = 0.0;
    if (move_u) {
      const double a = cur.h_ll + kRidge, b = cur.h_lu, c = cur.h_uu + kRidge;
      const double det = a * c - b * b;
      if (det > 1e-14 * a * c) {
        s_loc = (c * cur.g_loc - b * cur.g_u) / det;
        s_u = (a * cur.g_u - b * cur.g_loc) / det;
      } else {
        s_loc = cur.g_loc / a;
        s_u = cur.g_u / c;
      }
    } else {
      s_loc = cur.g_loc / (cur.h_ll + kRidge);
    }
    double scale = damping;
    if (std::abs(s_loc) * scale > kMaxLocStep) scale = kMaxLocStep / std::abs(s_loc);
    if (std::abs(s_u) * scale > kMaxLogDStep) scale = kMaxLogDStep / std::abs(s_u);
    s_loc *= scale;
    s_u *= scale;
    if (std::abs(s_loc) < 1e-14 && std::abs(s_u) < 1e-14) break;

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const BlockPoint cand{x.loc + t * s_loc, std::clamp(x.u + t * s_u, u_lo, u_hi)};
      if (cand.loc == x.loc && cand.u == x.u) break;
      const Local next = eval(cand);
      if (next.f >= cur.f) {
        x = cand;
        cur = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

class Fitter {
 public:
  Fitter(const ResponseMatrix& m, const ModelSpec& spec, const EstimationConfig& cfg,
         ParameterSet start)
      : m_(m),
        spec_(spec),
        cfg_(cfg),
        p_(std::move(start)),
        penalty_(cfg.extreme_score_policy == ExtremeScorePolicy::Penalize ? kPenaltyWeight
                                                                           : 0.0),
        u_lo_(std::log(cfg.d_lower)),
        u_hi_(std::log(cfg.d_upper)) {}

  const ParameterSet& params() const { return p_; }

  double objective() const {
    double f = log_likelihood(m_, p_, spec_);
    if (penalty_ > 0.0) {
      for (double t : p_.theta) f -= penalty_ * t * t;
      for (double b : p_.beta) f -= penalty_ * b * b;
    }
    return f;
  }

  // One iteration: a block-coordinate sweep (every person's (theta, d),
  // then every item's (beta, d), then gauge fixing), followed by an Anderson
  // extrapolation over recent sweeps that is kept only if it beats the plain
  // sweep. Returns the largest absolute parameter change.
  double sweep() {
    const ParameterSet before = p_;
    const std::vector<double> x = pack();
    for (std::size_t i = 0; i < m_.n_persons(); ++i) update_person(i);
    for (std::size_t j = 0; j < m_.n_items(); ++j) update_item(j);
    fix_gauge();
    objective_ = objective();
    accelerate(x);
    return std::max({max_abs_diff(before.theta, p_.theta), max_abs_diff(before.beta, p_.beta),
                     max_abs_diff(before.d_person, p_.d_person),
                     max_abs_diff(before.d_item, p_.d_item)});
  }

  double current_objective() const { return objective_; }

  // Locates a cell whose contribution is not finite, for error reporting.
  void throw_numeric_failure() const {
    for (std::size_t i = 0; i < m_.n_persons(); ++i) {
      for (std::size_t j = 0; j < m_.n_items(); ++j) {
        if (m_.missing(i, j)) continue;
        const double eta = combined_discrimination(p_.d_person[i], p_.d_item[j]) *
                            (p_.theta[i] - p_.beta[j]);
        if (!std::isfinite(cell_terms(spec_.link, eta, m_(i, j)).loglik) || !std::isfinite(eta))
          throw NumericFailure("non-finite likelihood at person " + m_.person_ids()[i] +
                                   ", item " + m_.item_ids()[j],
                               i, j);
      }
    }
    throw NumericFailure("non-finite objective", 0, 0);
  }

 private:
  static constexpr int kInnerSteps = 3;

  void update_person(std::size_t i) {
    const auto row = m_.row(i);
    const bool d_free = spec_.person_d_free();
    auto eval = [&](BlockPoint x) {
      const double d = d_free ? std::exp(x.u) : p_.d_person[i];
      Local l;
      l.f = -penalty_ * x.loc * x.loc;
      l.g_loc = -2.0 * penalty_ * x.loc;
      l.h_ll = 2.0 * penalty_;
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == ResponseMatrix::kMissing) continue;
        const double ds = combined_discrimination(d, p_.d_item[j]);
        const double diff = x.loc - p_.beta[j];
        const auto t = cell_terms(spec_.link, ds * diff, row[j]);
        const double de_du = d * ds_partial(ds, d) * diff;
        l.f += t.loglik;
        l.g_loc += t.score * ds;
        l.h_ll += t.info * ds * ds;
        if (d_free) {
          l.g_u += t.score * de_du;
          l.h_lu += t.info * ds * de_du;
          l.h_uu += t.info * de_du * de_du;
        }
      }
      return l;
    };
    const BlockPoint x = ascend_block({p_.theta[i], std::log(p_.d_person[i])}, d_free, eval,
                                      u_lo_, u_hi_, cfg_.step_damping, kInnerSteps);
    p_.theta[i] = x.loc;
    if (d_free && x.u != std::log(p_.d_person[i])) p_.d_person[i] = clamp_d(std::exp(x.u));
  }

  // Items mirror persons with the sign of the location flipped.
  void update_item(std::size_t j) {
    const bool d_free = spec_.item_d_free();
    auto eval = [&](BlockPoint x) {
      const double d = d_free ? std::exp(x.u) : p_.d_item[j];
      Local l;
      l.f = -penalty_ * x.loc * x.loc;
      l.g_loc = -2.0 * penalty_ * x.loc;
      l.h_ll = 2.0 * penalty_;
      for (std::size_t i = 0; i < m_.n_persons(); ++i) {
        const auto resp = m_(i, j);
        if (resp == ResponseMatrix::kMissing) continue;
        const double ds = combined_discrimination(p_.d_person[i], d);
        const double diff = p_.theta[i] - x.loc;
        const auto t = cell_terms(spec_.link, ds * diff, resp);
        const double de_du = d * ds_partial(ds, d) * diff;
        l.f += t.loglik;
        l.g_loc -= t.score * ds;
        l.h_ll += t.info * ds * ds;
        if (d_free) {
          l.g_u += t.score * de_du;
          l.h_lu -= t.info * ds * de_du;
          l.h_uu += t.info * de_du * de_du;
        }
      }
      return l;
    };
    const BlockPoint x = ascend_block({p_.beta[j], std::log(p_.d_item[j])}, d_free, eval,
                                      u_lo_, u_hi_, cfg_.step_damping, kInnerSteps);
    p_.beta[j] = x.loc;
    if (d_free && x.u != std::log(p_.d_item[j])) p_.d_item[j] = clamp_d(std::exp(x.u));
  }

  // Free parameters as one vector: theta, beta, then log d for free sides.
  std::vector<double> pack() const {
    std::vector<double> v(p_.theta);
    v.insert(v.end(), p_.beta.begin(), p_.beta.end());
    if (spec_.person_d_free())
      for (double d : p_.d_person) v.push_back(std::log(d));
    if (spec_.item_d_free())
      for (double d : p_.d_item) v.push_back(std::log(d));
    return v;
  }

  void unpack(const std::vector<double>& v) {
    auto it = v.begin();
    for (double& t : p_.theta) t = *it++;
    for (double& b : p_.beta) b = *it++;
    if (spec_.person_d_free())
      for (double& d : p_.d_person) d = clamp_d(std::exp(*it++));
    if (spec_.item_d_free())
      for (double& d : p_.d_item) d = clamp_d(std::exp(*it++));
  }

  // Anderson mixing of the sweep map G with residuals r = G(x) - x: choose
  // gamma minimizing |r_k - dR gamma| and try G(x_k) - dG gamma.
  void accelerate(const std::vector<double>& x) {
    constexpr std::size_t kDepth = 5;
    const std::vector<double> g = pack();
    std::vector<double> r(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) r[k] = g[k] - x[k];
    if (!prev_g_.empty()) {
      std::vector<double> dg(g.size()), dr(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        dg[k] = g[k] - prev_g_[k];
        dr[k] = r[k] - prev_r_[k];
      }
      hist_g_.push_back(std::move(dg));
      hist_r_.push_back(std::move(dr));
      if (hist_g_.size() > kDepth) {
        hist_g_.erase(hist_g_.begin());
        hist_r_.erase(hist_r_.begin());
      }
    }
    prev_g_ = g;
    prev_r_ = r;
    if (hist_g_.empty()) return;

    const std::size_t m = hist_r_.size();
    std::vector<double> a(m * m, 0.0), rhs(m, 0.0);
    double trace = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = 0; q <= p; ++q) {
        double s = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) s += hist_r_[p][k] * hist_r_[q][k];
        a[p * m + q] = a[q * m + p] = s;
      }
      for (std::size_t k = 0; k < r.size(); ++k) rhs[p] += hist_r_[p][k] * r[k];
      trace += a[p * m + p];
    }
    if (!(trace > 0.0)) return;
    for (std::size_t p = 0; p < m; ++p) a[p * m + p] += 1e-10 * trace;
    const auto gamma = solve_dense(std::move(a), std::move(rhs), m);
    if (gamma.empty()) return;

    std::vector<double> xa = g;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t k = 0; k < xa.size(); ++k) xa[k] -= gamma[p] * hist_g_[p][k];

    const ParameterSet plain = p_;
    unpack(xa);
    fix_gauge();
    const double fa = objective();
    if (std::isfinite(fa) && fa > objective_) {
      objective_ = fa;
      rejections_ = 0;
    } else {
      p_ = plain;
      hist_g_.clear();
      hist_r_.clear();
      if (++rejections_ >= 3) extrapolate(g, r);
    }
  }

  // When the sweeps drift at a steady rate (a ridge ending on a d bound),
  // the secant model above degenerates. Try doubling the sweep's own step
  // instead, keeping the best point that improves.
  void extrapolate(const std::vector<double>& g, const std::vector<double>& r) {
    ParameterSet best = p_;
    bool improved = false;
    for (double t = 1.0; t <= 64.0; t *= 2.0) {
      std::vector<double> xt = g;
      for (std::size_t k = 0; k < xt.size(); ++k) xt[k] += t * r[k];
      unpack(xt);
      fix_gauge();
      const double ft = objective();
      if (!(std::isfinite(ft) && ft > objective_)) break;
      objective_ = ft;
      best = p_;
      improved = true;
    }
    p_ = best;
    if (improved) {
      prev_g_.clear();
      prev_r_.clear();
    }
  }

  // Gaussian elimination with partial pivoting; empty on a singular system.
  static std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                         std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r)
        if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
      if (a[piv * n + c] == 0.0) return {};
      if (piv != c) {
        for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
        std::swap(b[c], b[piv]);
      }
      for (std::size_t r = c + 1; r < n; ++r) {
        const double f = a[r * n + c] / a[c * n + c];
        for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        b[r] -= f * b[c];
      }
    }
    std::vector<double> x(n);
    for (std::size_t c = n; c-- > 0;) {
      double s = b[c];
      for (std::size_t k = c + 1; k < n; ++k) s -= a[c * n + k] * x[k];
      x[c] = s / a[c * n + c];
    }
    return x;
  }

  double clamp_d(double d) const { return std::clamp(d, cfg_.d_lower, cfg_.d_upper); }

  // Scaling theta and beta by s while every combined discrimination becomes
  // d_s / s leaves the likelihood unchanged. With c = 0 when both sides are
  // free and c = 1/2 when the other side is fixed at sqrt(2), a free d maps
  // through 1/d'^2 + c = s^2 (1/d^2 + c).
  double scale_c() const { return spec_.kind == ModelKind::ThreeParam ? 0.0 : 0.5; }

  double scaled_d(double d, double s) const {
    const double c = scale_c();
    const double v = s * s * (1.0 / (d * d) + c) - c;
    return v > 0.0 ? clamp_d(1.0 / std::sqrt(v)) : cfg_.d_upper;
  }

  ParameterSet scaled(const ParameterSet& p, double s) const {
    ParameterSet q = p;
    for (double& t : q.theta) t *= s;
    for (double& b : q.beta) b *= s;
    if (spec_.person_d_free())
      for (double& d : q.d_person) d = scaled_d(d, s);
    if (spec_.item_d_free())
      for (double& d : q.d_item) d = scaled_d(d, s);
    return q;
  }

  // Range of s keeping every free d inside its bounds, where the map above
  // is an exact invariance.
  std::pair<double, double> scale_range() const {
    const double c = scale_c();
    const double phi_lo = 1.0 / (cfg_.d_upper * cfg_.d_upper) + c;
    const double phi_hi = 1.0 / (cfg_.d_lower * cfg_.d_lower) + c;
    double lo = 0.0, hi = INFINITY;
    auto visit = [&](const std::vector<double>& block) {
      for (double d : block) {
        const double phi = 1.0 / (d * d) + c;
        lo = std::max(lo, std::sqrt(phi_lo / phi));
        hi = std::min(hi, std::sqrt(phi_hi / phi));
      }
    };
    if (spec_.person_d_free()) visit(p_.d_person);
    if (spec_.item_d_free()) visit(p_.d_item);
    return {lo, hi};
  }

  double log_geo_mean_d(const ParameterSet& p) const {
    double s = 0.0;
    std::size_t n = 0;
    if (spec_.person_d_free())
      for (double d : p.d_person) s += std::log(d), ++n;
    if (spec_.item_d_free())
      for (double d : p.d_item) s += std::log(d), ++n;
    return s / static_cast<double>(n);
  }

  // Fix mean(theta) = 0 and the geometric mean of the free d's at sqrt(2),
  // the latter as far as the d bounds allow. Under the penalty neither move
  // is an invariance, so nothing is done.
  void fix_gauge() {
    if (penalty_ > 0.0) return;
    const double shift = mean(p_.theta);
    for (double& t : p_.theta) t -= shift;
    for (double& b : p_.beta) b -= shift;

    if (!spec_.person_d_free() && !spec_.item_d_free()) return;
    const auto [s_lo, s_hi] = scale_range();
    if (!(s_lo < s_hi)) return;
    const double target = std::log(kFixedDiscrimination);
    // the geometric mean falls as s grows
    auto excess = [&](double log_s) { return log_geo_mean_d(scaled(p_, std::exp(log_s))) - target; };
    double a = std::log(s_lo), b = std::log(s_hi), log_s;
    if (excess(a) <= 0.0) {
      log_s = a;
    } else if (excess(b) >= 0.0) {
      log_s = b;
    } else {
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (a + b);
        (excess(mid) > 0.0 ? a : b) = mid;
      }
      log_s = 0.5 * (a + b);
    }
    if (!(std::abs(log_s) > 1e-15)) return;
    p_ = scaled(p_, std::exp(log_s));
  }

  const ResponseMatrix& m_;
  ModelSpec spec_;
  EstimationConfig cfg_;
  ParameterSet p_;
  double penalty_;
  double u_lo_;
  double u_hi_;
  double objective_ = 0.0;
  int rejections_ = 0;
  std::vector<double> prev_g_, prev_r_;
  std::vector<std::vector<double>> hist_g_, hist_r_;
};

void require_answered(const ResponseMatrix& m) {
  for (std::size_t i = 0; i < m.n_persons(); ++i) {
    const auto row = m.row(i);
    if (std::all_of(row.begin(), row.end(), [](auto c) { return c == ResponseMatrix::kMissing; }))
      throw DomainError("person " + m.person_ids()[i] + " has no responses");
  }
  for (std::size_t j = 0; j < m.n_items(); ++j) {
    bool any = false;
    for (std::size_t i = 0; i < m.n_persons() && !any; ++i) any = !m.missing(i, j);
    if (!any) throw DomainError("item " + m.item_ids()[j] + " has no responses");
  }
}

// Repeatedly drops persons and items with all-correct or all-wrong responses
// (among those still kept) until none remain.
void drop_extremes(const ResponseMatrix& m, std::vector<std::size_t>& persons,
                   std::vector<std::size_t>& items) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::erase_if(persons, [&](std::size_t i) {
      std::size_t answered = 0, right = 0;
      for (auto j : items) {
        if (m.missing(i, j)) continue;
        ++answered;
        right += static_cast<std::size_t>(m(i, j));
      }
      const bool extreme = right == 0 || right == answered;
      changed |= extreme;
      return extreme;
    });
    std::erase_if(items, [&](std::size_t j) {
      std::size_t answered = 0, right = 0;
      for (auto i : persons) {
        if (m.missing(i, j)) continue;
        ++answered;
        right += static_cast<std::size_t>(m(i, j));
      }
      const bool extreme = right == 0 || right == answered;
      changed |= extreme;
      return extreme;
    });
  }
}

std::vector<std::size_t> complement_of(const std::vector<std::size_t>& kept, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0, p = 0; k < n; ++k) {
    if (p < kept.size() && kept[p] == k)
      ++p;
    else
      out.push_back(k);
  }
  return out;
}

// Logit of the smoothed proportion correct for persons and of the proportion
// incorrect for items, centered on the persons; divided by 1.7 under the
// normal ogive.
ParameterSet starting_values(const ResponseMatrix& m, LinkFunction link) {
  ParameterSet p(m.n_persons(), m.n_items());
  const double scale = link == LinkFunction::Logistic ? 1.0 : 1.0 / 1.7;
  std::vector<double> right_i(m.n_persons(), 0.0), answered_i(m.n_persons(), 0.0);
  std::vector<double> right_j(m.n_items(), 0.0), answered_j(m.n_items(), 0.0);
  for (std::size_t i = 0; i < m.n_persons(); ++i) {
    for (std::size_t j = 0; j < m.n_items(); ++j) {
      if (m.missing(i, j)) continue;
      answered_i[i] += 1;
      answered_j[j] += 1;
      right_i[i] += m(i, j);
      right_j[j] += m(i, j);
    }
  }
  for (std::size_t i = 0; i < m.n_persons(); ++i) {
    const double pr = (right_i[i] + 0.5) / (answered_i[i] + 1.0);
    p.theta[i] = scale * std::log(pr / (1.0 - pr));
  }
  for (std::size_t j = 0; j < m.n_items(); ++j) {
    const double pr = (right_j[j] + 0.5) / (answered_j[j] + 1.0);
    p.beta[j] = scale * std::log((1.0 - pr) / pr);
  }
  const double shift = mean(p.theta);
  for (double& t : p.theta) t -= shift;
  for (double& b : p.beta) b -= shift;
  return p;
}

FitResult run_fit(const ResponseMatrix& reduced, const ModelSpec& spec,
                  const EstimationConfig& cfg, ParameterSet start) {
  Fitter fitter(reduced, spec, cfg, std::move(start));
  FitResult out;
  out.spec = spec;
  double f = fitter.objective();
  if (!std::isfinite(f)) fitter.throw_numeric_failure();
  out.loglik_trace.push_back(f);
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const double change = fitter.sweep();
    f = fitter.current_objective();
    if (!std::isfinite(f)) fitter.throw_numeric_failure();
    out.loglik_trace.push_back(f);
    out.iterations = it + 1;
    if (change < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.params = fitter.params();
  out.person_ids = reduced.person_ids();
  out.item_ids = reduced.item_ids();
  return out;
}

void check_dimensions(const ResponseMatrix& m, const ParameterSet& p) {
  p.validate(m.n_persons(), m.n_items());
}

}  // namespace

void EstimationConfig::validate() const {
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
  if (!(d_lower > 0.0)) throw DomainError("lower discrimination bound must be positive");
  if (!(d_lower <= kFixedDiscrimination && kFixedDiscrimination <= d_upper))
    throw DomainError("discrimination bounds must bracket sqrt(2)");
  if (!(step_damping > 0.0 && step_damping <= 1.0))
    throw DomainError("step damping must lie in (0, 1]");
}

double log_likelihood(const ResponseMatrix& matrix, const ParameterSet& params,
                      const ModelSpec& spec) {
  check_dimensions(matrix, params);
  const bool dp_free = spec.person_d_free(), di_free = spec.item_d_free();
  double total = 0.0;
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const auto row = matrix.row(i);
    const double dp = dp_free ? params.d_person[i] : kFixedDiscrimination;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == ResponseMatrix::kMissing) continue;
      const double di = di_free ? params.d_item[j] : kFixedDiscrimination;
      const double eta = combined_discrimination(dp, di) * (params.theta[i] - params.beta[j]);
      total += cell_terms(spec.link, eta, row[j]).loglik;
    }
  }
  return total;
}

Gradient loglik_gradient(const ResponseMatrix& matrix, const ParameterSet& params,
                         const ModelSpec& spec) {
  check_dimensions(matrix, params);
  const bool dp_free = spec.person_d_free(), di_free = spec.item_d_free();
  Gradient g;
  g.theta.assign(matrix.n_persons(), 0.0);
  g.beta.assign(matrix.n_items(), 0.0);
  if (dp_free) g.d_person.assign(matrix.n_persons(), 0.0);
  if (di_free) g.d_item.assign(matrix.n_items(), 0.0);
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    const auto row = matrix.row(i);
    const double dp = dp_free ? params.d_person[i] : kFixedDiscrimination;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == ResponseMatrix::kMissing) continue;
      const double di = di_free ? params.d_item[j] : kFixedDiscrimination;
      const double ds = combined_discrimination(dp, di);
      const double diff = params.theta[i] - params.beta[j];
      const double score = cell_terms(spec.link, ds * diff, row[j]).score;
      g.theta[i] += score * ds;
      g.beta[j] -= score * ds;
      if (dp_free) g.d_person[i] += score * ds_partial(ds, dp) * diff;
      if (di_free) g.d_item[j] += score * ds_partial(ds, di) * diff;
    }
  }
  return g;
}

FitResult estimate_rasch(const ResponseMatrix& matrix, LinkFunction link,
                         const EstimationConfig& cfg) {
  cfg.validate();
  require_answered(matrix);
  std::vector<std::size_t> persons(matrix.n_persons()), items(matrix.n_items());
  std::iota(persons.begin(), persons.end(), std::size_t{0});
  std::iota(items.begin(), items.end(), std::size_t{0});
  if (cfg.extreme_score_policy == ExtremeScorePolicy::Exclude) drop_extremes(matrix, persons, items);
  if (persons.size() < 2 || items.size() < 2)
    throw RefusalError("after excluding extreme scores " + std::to_string(persons.size()) +
                       " persons and " + std::to_string(items.size()) +
                       " items remain; at least 2 of each are required");

  const ResponseMatrix reduced = matrix.select(persons, items);
  const ModelSpec spec{ModelKind::Rasch, link};
  FitResult out = run_fit(reduced, spec, cfg, starting_values(reduced, link));
  out.excluded_persons = complement_of(persons, matrix.n_persons());
  out.excluded_items = complement_of(items, matrix.n_items());
  out.kept_persons = std::move(persons);
  out.kept_items = std::move(items);
  return out;
}

FitResult estimate(const ResponseMatrix& matrix, const ModelSpec& spec,
                   const EstimationConfig& cfg) {
  FitResult rasch = estimate_rasch(matrix, spec.link, cfg);
  if (spec.kind == ModelKind::Rasch) return rasch;
  return estimate(matrix, spec, cfg, rasch);
}

FitResult estimate(const ResponseMatrix& matrix, const ModelSpec& spec,
                   const EstimationConfig& cfg, const FitResult& rasch) {
  cfg.validate();
  if (rasch.spec.kind != ModelKind::Rasch || rasch.spec.link != spec.link)
    throw DomainError("warm start must be a Rasch fit with the same link");
  if (spec.kind == ModelKind::Rasch) return rasch;
  const ResponseMatrix reduced = matrix.select(rasch.kept_persons, rasch.kept_items);
  ParameterSet start = rasch.params.with_fixings(ModelKind::Rasch);
  FitResult out = run_fit(reduced, spec, cfg, std::move(start));
  out.excluded_persons = rasch.excluded_persons;
  out.excluded_items = rasch.excluded_items;
  out.kept_persons = rasch.kept_persons;
  out.kept_items = rasch.kept_items;
  return out;
}

}  // namespace irtcal
