#include "kernrank/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernrank/errors.hpp"
#include "kernrank/parallel.hpp"
#include "kernrank/series.hpp"

namespace kernrank {

namespace {

int count_above(const std::vector<double>& sv, double rel, double floor) {
  if (sv.empty()) return 0;
  const double cut = std::max(rel * sv.front(), floor);
  return static_cast<int>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > cut; }));
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct TrialOutcome {
  RankResult rank;
  double ratio = 0.0;
};

TrialOutcome run_trial(const KernelSpec& spec, int k, Stream rng, const TolerancePolicy& policy,
                       const std::vector<Domain>& subsetsU, const std::vector<Domain>& subsetsV) {
  std::vector<Point> xs, ys;
  xs.reserve(k);
  ys.reserve(k);
  for (int i = 0; i < k; ++i)
    xs.push_back(subsetsU.empty() ? sample_point(spec.U, rng) : sample_in_subset(spec.U, subsetsU[i], rng));
  for (int j = 0; j < k; ++j)
    ys.push_back(subsetsV.empty() ? sample_point(spec.V, rng) : sample_in_subset(spec.V, subsetsV[j], rng));
  TrialOutcome out;
  if (policy.precision == Precision::extended) {
    out.rank = numerical_rank(kernel_matrix_extended(spec, xs, ys), policy);
  } else {
    out.rank = numerical_rank(kernel_matrix(spec, xs, ys).entries, policy);
  }
  out.ratio = out.rank.sigma_ratio();
  return out;
}

double smallest_singular_value(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s.size() ? s[s.size() - 1] : 0.0;
}

template <class T>
MatT<T> equilibrated(MatT<T> m) {
  using std::abs;
  for (int pass = 0; pass < 12; ++pass) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      T mx(0);
      for (Eigen::Index j = 0; j < m.cols(); ++j) mx = std::max<T>(mx, abs(m(i, j)));
      if (mx > T(0)) m.row(i) /= mx;
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      T mx(0);
      for (Eigen::Index i = 0; i < m.rows(); ++i) mx = std::max<T>(mx, abs(m(i, j)));
      if (mx > T(0)) m.col(j) /= mx;
    }
  }
  return m;
}

}  // namespace

void TolerancePolicy::validate() const {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) throw ValidationError("rel_threshold must lie in (0, 1)");
  if (!(abs_floor >= 0.0)) throw ValidationError("abs_floor must be >= 0");
}

double TolerancePolicy::working_epsilon() const {
  if (precision == Precision::extended) return static_cast<double>(std::numeric_limits<Extended>::epsilon());
  return std::numeric_limits<double>::epsilon();
}

double RankResult::sigma_ratio() const {
  if (singular_values.empty() || !(singular_values.front() > 0.0)) return 0.0;
  return singular_values.back() / singular_values.front();
}

RankResult numerical_rank(const Eigen::MatrixXd& m, const TolerancePolicy& policy) {
  policy.validate();
  if (!m.allFinite()) throw ValidationError("numerical_rank requires finite entries");
  RankResult r;
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(policy.equilibrate ? equilibrated<double>(m) : m);
  const auto& s = svd.singularValues();
  r.singular_values.assign(s.data(), s.data() + s.size());
  r.rank = count_above(r.singular_values, policy.rel_threshold, policy.abs_floor);
  return r;
}

RankResult numerical_rank(const MatT<Extended>& m, const TolerancePolicy& policy) {
  policy.validate();
  RankResult r;
  if (m.size() == 0) return r;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!boost::multiprecision::isfinite(m.data()[i])) throw ValidationError("numerical_rank requires finite entries");
  }
  Eigen::JacobiSVD<MatT<Extended>> svd(policy.equilibrate ? equilibrated<Extended>(m) : m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return r;
  // Threshold in Extended so ratios below the double range still classify correctly.
  const Extended cut = std::max<Extended>(Extended(policy.rel_threshold) * s[0], Extended(policy.abs_floor));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    r.singular_values.push_back(static_cast<double>(s[i]));
    if (s[i] > cut) ++r.rank;
  }
  return r;
}

RankReport fullrank_mc(const KernelSpec& spec, int k, int trials, std::uint64_t seed, const TolerancePolicy& policy,
                       const std::vector<Domain>& subsetsU, const std::vector<Domain>& subsetsV,
                       const MonteCarloOptions& opts) {
  policy.validate();
  if (k < 1) throw ValidationError("k must be >= 1");
  if (k > opts.max_k) throw ValidationError("k exceeds the Monte Carlo cap of " + std::to_string(opts.max_k));
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (!subsetsU.empty() && static_cast<int>(subsetsU.size()) != k) throw ValidationError("need exactly k U-subsets");
  if (!subsetsV.empty() && static_cast<int>(subsetsV.size()) != k) throw ValidationError("need exactly k V-subsets");
  for (const auto& d : subsetsU)
    if (!is_subset(d, spec.U)) throw SubsetNotContained(d.describe() + " is not contained in U");
  for (const auto& d : subsetsV)
    if (!is_subset(d, spec.V)) throw SubsetNotContained(d.describe() + " is not contained in V");

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), opts.threads, [&](std::size_t t) {
    outcomes[t] = run_trial(spec, k, Stream(derive_seed(seed, t)), policy, subsetsU, subsetsV);
  });

  RankReport rep;
  rep.kernel = spec.name();
  rep.k = k;
  rep.trials = trials;
  rep.seed = seed;
  rep.policy = policy;
  const double machine_cut = k * policy.working_epsilon();
  std::vector<double> ratios;
  ratios.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.rank.rank < k) ++rep.deficiency_count;
    if (count_above(o.rank.singular_values, machine_cut, policy.abs_floor) < k) ++rep.deficiency_count_machine;
    ratios.push_back(o.ratio);
  }
  std::sort(ratios.begin(), ratios.end());
  rep.ratio_min = ratios.front();
  rep.ratio_p5 = quantile(ratios, 0.05);
  rep.ratio_p50 = quantile(ratios, 0.50);
  rep.ratio_p95 = quantile(ratios, 0.95);
  rep.conclusion = rep.deficiency_count == 0
                       ? "consistent with full rank a.e. (no deficient trials)"
                       : "rank deficient in " + std::to_string(rep.deficiency_count) + " of " +
                             std::to_string(trials) + " trials";
  return rep;
}

std::string FiniteRankEstimate::label() const {
  return rank ? std::to_string(*rank) : ">= " + std::to_string(k_max);
}

FiniteRankEstimate finite_rank_estimate(const KernelSpec& spec, int k_max, int trials_per_k, std::uint64_t seed,
                                        const TolerancePolicy& policy, const MonteCarloOptions& opts) {
  policy.validate();
  if (k_max < 2) throw ValidationError("k_max must be >= 2");
  if (k_max > opts.max_k) throw ValidationError("k_max exceeds the Monte Carlo cap of " + std::to_string(opts.max_k));
  if (trials_per_k < 20) throw ValidationError("trials_per_k must be >= 20");

  FiniteRankEstimate est;
  est.k_max = k_max;
  est.trials_per_k = trials_per_k;
  est.seed = seed;
  est.policy = policy;
  for (int k = 1; k <= k_max; ++k) {
    const std::uint64_t kseed = derive_seed(seed, static_cast<std::uint64_t>(k));
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials_per_k));
    parallel_for(outcomes.size(), opts.threads, [&](std::size_t t) {
      outcomes[t] = run_trial(spec, k, Stream(derive_seed(kseed, t)), policy, {}, {});
    });
    RankProfileRow row;
    row.k = k;
    row.min_rank = k;
    row.max_sigma_ratio.assign(static_cast<std::size_t>(k), 0.0);
    for (const auto& o : outcomes) {
      row.max_rank = std::max(row.max_rank, o.rank.rank);
      row.min_rank = std::min(row.min_rank, o.rank.rank);
      const auto& sv = o.rank.singular_values;
      for (std::size_t j = 0; j < sv.size(); ++j) {
        const double ratio = sv.front() > 0.0 ? sv[j] / sv.front() : 0.0;
        row.max_sigma_ratio[j] = std::max(row.max_sigma_ratio[j], ratio);
      }
    }
    est.profile.push_back(std::move(row));
  }

  const int r = est.profile.back().max_rank;
  if (r < k_max) {
    int run = 0;
    for (auto it = est.profile.rbegin(); it != est.profile.rend(); ++it) {
      if (it->max_rank != r || it->max_rank >= it->k) break;
      ++run;
    }
    if (run >= 3) est.rank = r;
  }
  return est;
}

FunctionFamily FunctionFamily::powers(const std::vector<std::vector<int>>& multi_indices, Domain domain) {
  std::vector<std::pair<Point, std::vector<int>>> terms;
  for (const auto& a : multi_indices) terms.emplace_back(Point::Zero(domain.ambient_dim()), a);
  FunctionFamily fam = translated_powers(terms, std::move(domain));
  fam.label = "powers";
  return fam;
}

FunctionFamily FunctionFamily::translated_powers(const std::vector<std::pair<Point, std::vector<int>>>& terms,
                                                 Domain domain) {
  FunctionFamily fam{"translated_powers", std::move(domain), {}};
  const int n = fam.domain.ambient_dim();
  for (const auto& [center, alpha] : terms) {
    if (static_cast<int>(alpha.size()) != n || center.size() != n)
      throw ValidationError("multi-index and center must match the domain dimension");
    if (std::any_of(alpha.begin(), alpha.end(), [](int a) { return a < 0; }))
      throw ValidationError("multi-index entries must be >= 0");
    fam.members.push_back([center, alpha](const Point& x) {
      double v = 1.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) v *= std::pow(x[i] - center[i], alpha[i]);
      return v;
    });
  }
  return fam;
}

FunctionFamily FunctionFamily::exp_neg_s_over_x(const std::vector<int>& s_values, Domain domain) {
  if (domain.ambient_dim() != 1) throw ValidationError("exp(-s/x) family is one-dimensional");
  FunctionFamily fam{"exp_neg_s_over_x", std::move(domain), {}};
  for (int s : s_values) {
    if (s < 0) throw ValidationError("exp(-s/x) family needs s >= 0");
    fam.members.push_back([s](const Point& x) { return x[0] > 0.0 ? std::exp(-s / x[0]) : 0.0; });
  }
  return fam;
}

FunctionFamily FunctionFamily::kernel_rows(const KernelSpec& spec, const std::vector<Point>& xs) {
  FunctionFamily fam{"kernel_rows:" + spec.name(), spec.V, {}};
  for (const auto& x : xs) {
    if (!spec.U.contains(x)) throw DomainViolation("frozen x outside " + spec.U.describe());
    fam.members.push_back([spec, x](const Point& y) { return eval(spec, x, y); });
  }
  return fam;
}

FunctionFamily FunctionFamily::taylor_functions(const KernelSpec& spec, const Point& p, const Eigen::VectorXd& dir,
                                                const std::vector<int>& orders) {
  if (!spec.is_analytic()) throw NotAnalytic(spec.name() + " has no Taylor functions");
  if (orders.empty()) throw ValidationError("taylor_functions needs at least one order");
  const int top = *std::max_element(orders.begin(), orders.end());
  if (*std::min_element(orders.begin(), orders.end()) < 0) throw ValidationError("orders must be >= 0");
  Domain dom = spec.is_spherical() ? Domain::ball(Eigen::VectorXd::Zero(spec.U.dim()), 1.0) : spec.U;
  FunctionFamily fam{"taylor_functions:" + spec.name(), std::move(dom), {}};
  for (int s : orders) {
    fam.members.push_back([spec, p, dir, top, s](const Point& x) {
      return jet_propagate(spec, SliceSpec{x, p, dir, top, 1e-6})[s];
    });
  }
  return fam;
}

WitnessSearch constrained_fullrank_search(const FunctionFamily& fam, const std::vector<Domain>& subsets, int budget,
                                          std::uint64_t seed, const TolerancePolicy& policy) {
  policy.validate();
  const int k = static_cast<int>(subsets.size());
  if (k < 1 || k != static_cast<int>(fam.size())) throw ValidationError("need one subset per family member");
  if (budget < 1) throw ValidationError("budget must be >= 1");

  WitnessSearch out;
  Eigen::MatrixXd values(k, k);  // values(i, l) = f_i(x_l)
  for (int j = 0; j < k; ++j) {
    Stream rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    double best = -1.0;
    Point best_x;
    Eigen::VectorXd best_col;
    for (int c = 0; c < budget; ++c) {
      const Point x = sample_in_subset(fam.domain, subsets[j], rng);
      Eigen::VectorXd col(k);
      try {
        for (int i = 0; i < k; ++i) col[i] = fam.members[i](x);
      } catch (const Error&) {
        continue;  // e.g. singular expansion at this candidate
      }
      if (!col.allFinite()) continue;
      Eigen::MatrixXd lead(j + 1, j + 1);
      lead.leftCols(j) = values.topLeftCorner(j + 1, j);
      lead.col(j) = col.head(j + 1);
      const double smin = smallest_singular_value(lead);
      if (smin > best) {
        best = smin;
        best_x = x;
        best_col = col;
      }
    }
    if (best < 0.0) return out;  // no admissible candidate in this subset
    values.col(j) = best_col;
    out.points.push_back(best_x);
  }
  const RankResult r = numerical_rank(values, policy);
  out.achieved_rank = r.rank;
  out.sigma_ratio = r.sigma_ratio();
  out.found = r.rank == k;
  return out;
}

LliProbe lli_probe(const FunctionFamily& fam, const Domain& window, int k, int budget, std::uint64_t seed,
                   const TolerancePolicy& policy) {
  if (k < 1 || k > static_cast<int>(fam.size())) throw ValidationError("k must be in [1, family size]");
  if (!is_subset(window, fam.domain)) throw SubsetNotContained(window.describe() + " is not inside " + fam.domain.describe());
  FunctionFamily head{fam.label, fam.domain, {fam.members.begin(), fam.members.begin() + k}};
  LliProbe probe;
  probe.search = constrained_fullrank_search(head, std::vector<Domain>(static_cast<std::size_t>(k), window), budget,
                                             seed, policy);
  probe.verdict = probe.search.found ? LliVerdict::witness_found : LliVerdict::no_witness_in_budget;
  return probe;
}

std::string to_string(LliVerdict v) {
  return v == LliVerdict::witness_found ? "witness_found" : "no_witness_in_budget";
}

}  // namespace kernrank
