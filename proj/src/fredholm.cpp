#include "kernrank/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "kernrank/errors.hpp"
#include "kernrank/quadrature.hpp"
#include "kernrank/random.hpp"

namespace kernrank {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

const OpenBox& interval_of(const Domain& d, const char* what) {
  const auto* box = d.as<OpenBox>();
  if (!box || box->lo.size() != 1) throw ValidationError(std::string(what) + " must be a one-dimensional interval");
  return *box;
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff() * 1e-3, 0.0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max(std::abs(b[i]), scale);
    const double d = std::abs(a[i] - b[i]);
    worst = std::max(worst, denom > 0 ? d / denom : d);
  }
  return worst;
}

Eigen::VectorXd integrate_once(const KernelSpec& spec, const TestFunction& f, const std::vector<Point>& targets,
                               int nodes, int cells) {
  std::vector<double> ys, ws;
  if (const auto* box = spec.V.as<OpenBox>()) {
    const QuadratureRule q = composite_gauss_legendre(box->lo[0], box->hi[0], cells, nodes);
    ys = q.nodes;
    ws = q.weights;
    for (std::size_t j = 0; j < ys.size(); ++j) ws[j] *= f(ys[j]);
  } else {
    const auto& hl = *spec.V.as<HalfLine>();
    // Absorb the test function's own decay when it has one, otherwise the domain's rate.
    const auto* ed = std::get_if<testfn::ExpDecay>(&f.kind);
    const double rate = ed ? ed->rate : hl.rate;
    const QuadratureRule q = gauss_laguerre(nodes);
    ys.resize(q.nodes.size());
    ws.resize(q.nodes.size());
    for (std::size_t j = 0; j < ys.size(); ++j) {
      ys[j] = hl.a + q.nodes[j] / rate;
      if (ed)
        ws[j] = q.weights[j] * std::exp(-rate * hl.a) / rate;
      else
        ws[j] = q.weights[j] * std::exp(q.nodes[j]) / rate * f(ys[j]);
    }
  }
  Eigen::VectorXd g(static_cast<Eigen::Index>(targets.size()));
  Point y(1);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (ws[j] == 0.0) continue;
      y[0] = ys[j];
      acc += ws[j] * eval(spec, targets[i], y);
    }
    g[static_cast<Eigen::Index>(i)] = acc;
  }
  return g;
}

double residual_of(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  const double gn = g.norm();
  const double r = (A * x - g).norm();
  return gn > 0 ? r / gn : r;
}

}  // namespace

double TestFunction::operator()(double y) const {
  return std::visit(overloaded{
                        [&](const testfn::ExpDecay& e) { return std::exp(-e.rate * y); },
                        [&](const testfn::Polynomial& p) {
                          double acc = 0.0;
                          for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * y + *it;
                          return acc;
                        },
                        [&](const testfn::GaussianBump& b) {
                          const double z = (y - b.center) / b.width;
                          return std::exp(-0.5 * z * z);
                        },
                    },
                    kind);
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const testfn::ExpDecay& e) { os << "exp_decay(" << e.rate << ")"; },
                 [&](const testfn::Polynomial& p) {
                   os << "polynomial(";
                   for (std::size_t i = 0; i < p.coeffs.size(); ++i) os << (i ? "," : "") << p.coeffs[i];
                   os << ")";
                 },
                 [&](const testfn::GaussianBump& b) { os << "gaussian_bump(" << b.center << "," << b.width << ")"; },
             },
             kind);
  return os.str();
}

DiscreteSystem assemble(const KernelSpec& spec, const Partition& partU, const Partition& partV) {
  if (partU.size() != partV.size() || partU.size() == 0)
    throw ValidationError("assemble needs partitions with equal, positive cell counts");
  const auto k = static_cast<Eigen::Index>(partU.size());
  DiscreteSystem sys;
  sys.xs = partU.reps;
  sys.ys = partV.reps;
  sys.volumes = partV.volumes;
  sys.A.resize(k, k);
  sys.W.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = partV.volumes[j];
    if (!(v > 0)) throw ValidationError("cell volumes must be positive");
    sys.W[j] = 1.0 / v;
  }
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) sys.A(i, j) = eval(spec, sys.xs[i], sys.ys[j]) * partV.volumes[j];
  if (!sys.A.allFinite()) throw ValidationError("assembled matrix has non-finite entries");
  return sys;
}

Eigen::VectorXd forward_apply(const KernelSpec& spec, const TestFunction& f, const std::vector<Point>& targets,
                              int quad_nodes, const ForwardOptions& opts) {
  if (quad_nodes < 2) throw ValidationError("forward_apply needs quad_nodes >= 2");
  if (spec.V.dim() != 1 || !(spec.V.as<OpenBox>() || spec.V.as<HalfLine>()))
    throw ValidationError("forward_apply supports one-dimensional V (interval or half line)");
  if (opts.cells < 1) throw ValidationError("forward_apply needs cells >= 1");

  Eigen::VectorXd g = integrate_once(spec, f, targets, quad_nodes, opts.cells);
  if (!opts.self_check) {
    if (!g.allFinite()) throw QuadratureNotConverged("non-finite quadrature value");
    return g;
  }
  int n = quad_nodes;
  while (true) {
    if (2 * n > opts.max_nodes) {
      std::ostringstream os;
      os << "self-convergence not reached by " << n << " nodes";
      throw QuadratureNotConverged(os.str());
    }
    Eigen::VectorXd g2 = integrate_once(spec, f, targets, 2 * n, opts.cells);
    if (!g2.allFinite()) throw QuadratureNotConverged("non-finite quadrature value");
    const bool ok = g.allFinite() && rel_diff(g, g2) < opts.tol;
    g = std::move(g2);
    n *= 2;
    if (ok) return g;
  }
}

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::direct: return "direct";
    case SolveMethod::tsvd: return "tsvd";
    case SolveMethod::tikhonov: return "tikhonov";
  }
  return "?";
}

Solution solve_direct(const DiscreteSystem& sys, const Eigen::VectorXd& g, const TolerancePolicy& policy) {
  if (g.size() != sys.A.rows()) throw ValidationError("right-hand side length differs from k");
  const RankResult rr = numerical_rank(sys.A, policy);
  if (rr.rank < sys.k()) {
    std::ostringstream os;
    os << "matrix is numerically singular (rank " << rr.rank << " of " << sys.k() << ")";
    throw SingularSystem(os.str(), rr.rank);
  }
  Solution s;
  s.method = SolveMethod::direct;
  s.fhat = sys.A.colPivHouseholderQr().solve(g);
  s.residual = residual_of(sys.A, s.fhat, g);
  s.condition_number = rr.singular_values.front() / rr.singular_values.back();
  s.numerical_rank = rr.rank;
  return s;
}

namespace {

template <class Filter>
Solution filtered_solve(const DiscreteSystem& sys, const Eigen::VectorXd& g, Filter filter) {
  if (g.size() != sys.A.rows()) throw ValidationError("right-hand side length differs from k");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::VectorXd ug = svd.matrixU().transpose() * g;
  Eigen::VectorXd coef(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) coef[i] = filter(i, sv[i]) * ug[i];
  Solution s;
  s.fhat = svd.matrixV() * coef;
  s.residual = residual_of(sys.A, s.fhat, g);
  const double smin = sv[sv.size() - 1];
  s.condition_number = smin > 0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
  s.numerical_rank = numerical_rank(sys.A).rank;
  return s;
}

}  // namespace

Solution solve_tsvd(const DiscreteSystem& sys, const Eigen::VectorXd& g, int r) {
  if (r < 1 || r > sys.k()) throw ValidationError("tsvd needs 1 <= r <= k");
  Solution s = filtered_solve(sys, g, [r](Eigen::Index i, double sigma) {
    return (i < r && sigma > 0) ? 1.0 / sigma : 0.0;
  });
  s.method = SolveMethod::tsvd;
  s.parameter = r;
  return s;
}

Solution solve_tikhonov(const DiscreteSystem& sys, const Eigen::VectorXd& g, double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw ValidationError("tikhonov needs lambda > 0");
  const double l2 = lambda * lambda;
  Solution s = filtered_solve(sys, g, [l2](Eigen::Index, double sigma) { return sigma / (sigma * sigma + l2); });
  s.method = SolveMethod::tikhonov;
  s.parameter = lambda;
  return s;
}

double recovery_error(const Domain& V, const Eigen::VectorXd& fhat, const TestFunction& truth) {
  const auto& box = interval_of(V, "V");
  const int k = static_cast<int>(fhat.size());
  if (k < 1) throw ValidationError("empty recovered vector");
  const double a = box.lo[0], b = box.hi[0], width = (b - a) / k;
  const QuadratureRule q = gauss_legendre(32);
  double err2 = 0.0, ref2 = 0.0;
  for (int j = 0; j < k; ++j) {
    const double lo = a + j * width;
    const double hi = j + 1 == k ? b : a + (j + 1) * width;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double t = truth(mid + half * q.nodes[i]);
      const double d = fhat[j] - t;
      err2 += half * q.weights[i] * d * d;
      ref2 += half * q.weights[i] * t * t;
    }
  }
  return ref2 > 0 ? std::sqrt(err2 / ref2) : std::sqrt(err2);
}

InversionReport local_recover(const KernelSpec& spec, const TestFunction& truth, const Domain& window, int k,
                              const RecoveryMethod& method, const RecoveryOptions& opts) {
  if (k < 1) throw ValidationError("local_recover needs k >= 1");
  if (opts.noise < 0) throw ValidationError("noise must be nonnegative");
  interval_of(window, "window");
  interval_of(spec.V, "V");
  if (!is_subset(window, spec.U)) throw SubsetNotContained("window " + window.describe() + " is not inside U");

  const Partition partW = uniform_partition(window, k);
  const Partition partV = uniform_partition(spec.V, k);
  ForwardOptions fo;
  fo.cells = opts.quad_cells;
  Eigen::VectorXd g = forward_apply(spec, truth, partW.reps, opts.quad_nodes, fo);
  if (opts.noise > 0) {
    Stream rng(opts.seed);
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] *= 1.0 + opts.noise * rng.normal();
  }
  const DiscreteSystem sys = assemble(spec, partW, partV);

  InversionReport rep;
  rep.kernel = spec.name();
  rep.truth = truth.describe();
  rep.k = k;
  rep.method = method.method;
  rep.window = window.describe();
  rep.noise = opts.noise;
  rep.seed = opts.seed;
  for (const auto& p : partW.reps) rep.x_nodes.push_back(p[0]);
  for (const auto& p : partV.reps) rep.y_nodes.push_back(p[0]);
  rep.g.assign(g.data(), g.data() + g.size());

  Solution sol;
  if (method.sweep) {
    if (method.method != SolveMethod::tikhonov) throw ValidationError("only tikhonov supports a lambda sweep");
    if (opts.sweep_points < 2 || !(opts.sweep_lo > 0) || !(opts.sweep_hi > opts.sweep_lo))
      throw ValidationError("sweep needs >= 2 points on 0 < lo < hi");
    std::vector<Solution> sols;
    const double llo = std::log10(opts.sweep_lo), lhi = std::log10(opts.sweep_hi);
    for (int i = 0; i < opts.sweep_points; ++i) {
      const double lambda = std::pow(10.0, llo + (lhi - llo) * i / (opts.sweep_points - 1));
      Solution s = solve_tikhonov(sys, g, lambda);
      rep.sweep.push_back({lambda, s.residual, recovery_error(spec.V, s.fhat, truth), s.fhat.norm()});
      sols.push_back(std::move(s));
    }
    std::size_t best = 0;
    const Selection sel = method.selection != Selection::automatic ? method.selection
                          : opts.noise > 0                           ? Selection::discrepancy
                                                                     : Selection::min_recovery_error;
    if (sel == Selection::discrepancy) {
      if (!(opts.noise > 0)) throw ValidationError("discrepancy selection needs a declared noise level");
      // Discrepancy principle: the largest lambda whose residual stays at the noise floor.
      rep.selection = "discrepancy";
      const double floor = 1.1 * opts.noise;
      bool any = false;
      for (std::size_t i = 0; i < sols.size(); ++i)
        if (rep.sweep[i].residual <= floor) {
          best = i;
          any = true;
        }
      if (!any)
        for (std::size_t i = 1; i < sols.size(); ++i)
          if (rep.sweep[i].residual < rep.sweep[best].residual) best = i;
    } else {
      rep.selection = "min_recovery_error";
      for (std::size_t i = 1; i < sols.size(); ++i)
        if (rep.sweep[i].recovery_error < rep.sweep[best].recovery_error) best = i;
    }
    sol = std::move(sols[best]);
  } else {
    rep.selection = "fixed";
    switch (method.method) {
      case SolveMethod::direct: sol = solve_direct(sys, g, opts.policy); break;
      case SolveMethod::tsvd: sol = solve_tsvd(sys, g, static_cast<int>(std::lround(method.parameter))); break;
      case SolveMethod::tikhonov: sol = solve_tikhonov(sys, g, method.parameter); break;
    }
  }
  rep.parameter = sol.parameter;
  rep.condition_number = sol.condition_number;
  rep.residual = sol.residual;
  rep.recovery_error = recovery_error(spec.V, sol.fhat, truth);
  rep.fhat.assign(sol.fhat.data(), sol.fhat.data() + sol.fhat.size());
  return rep;
}

NullMomentReport null_moment_check(const std::vector<double>& x_grid, int S, const ForwardOptions& opts,
                                   int start_nodes) {
  using boost::multiprecision::cpp_int;
  if (S < 1) throw ValidationError("null_moment_check needs S >= 1");
  NullMomentReport rep;
  cpp_int fact = 1;  // running m!
  int m = 0;
  for (int s = 1; s <= S; ++s) {
    while (m < 2 * s - 1) fact *= ++m;
    const cpp_int odd = fact;                // (2s-1)!
    const cpp_int even = fact * (2 * s) / (2 * s);  // (2s)! / (2s), kept as an explicit division
    const cpp_int diff = even - odd;
    rep.rows.push_back({s, even.str(), odd.str(), diff.str()});
    if (diff != 0) rep.exact_cancellation = false;
  }

  // U widened to cover the grid; the kernel formula is defined for every real x.
  double xlo = -2.0, xhi = 2.0;
  for (double x : x_grid) {
    if (!std::isfinite(x)) throw ValidationError("x grid must be finite");
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
  }
  const KernelSpec spec = make_kernel(family::NullExample{}, Domain::interval(xlo - 1.0, xhi + 1.0), Domain::half_line(0.0));
  const TestFunction f{testfn::ExpDecay{1.0}};
  rep.x_grid = x_grid;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  int count = 0;
  for (double x : x_grid) {
    Point p(1);
    p[0] = x;
    double value = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    try {
      value = forward_apply(spec, f, {p}, start_nodes, opts)[0];
      ok = true;
    } catch (const QuadratureNotConverged&) {
      try {
        value = forward_apply(spec, f, {p}, opts.max_nodes)[0];
      } catch (const QuadratureNotConverged&) {
      }
    }
    rep.values.push_back(value);
    rep.converged.push_back(ok);
    if (ok) {
      lo = std::min(lo, value);
      hi = std::max(hi, value);
      sum += value;
      ++count;
    } else {
      rep.all_converged = false;
    }
  }
  if (count > 0) {
    rep.constancy_gap = hi - lo;
    rep.measured_constant = sum / count;
  }
  return rep;
}

}  // namespace kernrank
