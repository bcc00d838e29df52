#include "kernrank/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kernrank/errors.hpp"

#ifndef KERNRANK_VERSION
#define KERNRANK_VERSION "0.0.0"
#endif

namespace kernrank {

namespace {

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError("not a number: '" + tok + "'");
    }
  }
  return out;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// lo,hi pairs per axis; one pair repeated to `dim` axes.
Domain window_domain(const std::vector<double>& w, int dim) {
  if (w.size() < 2 || w.size() % 2 != 0) throw ValidationError("window needs lo,hi pairs");
  const int axes = static_cast<int>(w.size() / 2);
  if (axes != 1 && axes != dim) throw ValidationError("window has the wrong number of axes");
  Eigen::VectorXd lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    const int a = axes == 1 ? 0 : i;
    lo[i] = w[2 * a];
    hi[i] = w[2 * a + 1];
  }
  return Domain::box(lo, hi);
}

SolveMethod parse_method(const std::string& m) {
  if (m == "direct") return SolveMethod::direct;
  if (m == "tsvd") return SolveMethod::tsvd;
  if (m == "tikhonov") return SolveMethod::tikhonov;
  throw ValidationError("unknown method '" + m + "'");
}

Selection parse_selection(const std::string& s) {
  if (s == "automatic") return Selection::automatic;
  if (s == "min_recovery_error") return Selection::min_recovery_error;
  if (s == "discrepancy") return Selection::discrepancy;
  throw ValidationError("unknown selection '" + s + "'");
}

FunctionFamily lli_family(const ExperimentConfig& c) {
  const std::vector<double>& w = c.window;
  if (c.family == "powers" || c.family == "exp-neg-s-over-x") {
    if (w.size() != 2) throw ValidationError("one-dimensional families need a lo,hi window");
    const Domain dom = Domain::interval(std::min(-1.0, w[0] - 1.0), std::max(1.0, w[1] + 1.0));
    if (c.family == "powers") {
      std::vector<std::vector<int>> idx;
      for (int s = 0; s < c.k; ++s) idx.push_back({s});
      return FunctionFamily::powers(idx, dom);
    }
    std::vector<int> s_values;
    for (int s = 1; s <= c.k; ++s) s_values.push_back(s);
    return FunctionFamily::exp_neg_s_over_x(s_values, dom);
  }
  if (c.family == "taylor") {
    const KernelSpec spec = parse_kernel(c.kernel);
    const int n = spec.is_spherical() ? spec.U.dim() : spec.U.ambient_dim();
    std::vector<int> orders = c.orders;
    if (orders.empty())
      for (int s = 0; s < c.k; ++s) orders.push_back(s);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    dir[0] = 1.0;
    Point p;
    if (spec.is_spherical()) {
      p = Point::Zero(n);
    } else if (const auto* box = spec.V.as<OpenBox>()) {
      p = 0.5 * (box->lo + box->hi);
    } else {
      throw ValidationError("taylor family needs a box V or a spherical kernel");
    }
    return FunctionFamily::taylor_functions(spec, p, dir, orders);
  }
  throw ValidationError("unknown family '" + c.family + "'");
}

Json taylor_payload(const ExperimentConfig& c) {
  const KernelSpec spec = parse_kernel(c.kernel);
  SliceSpec slice{to_vec(c.x), to_vec(c.p), to_vec(c.dir), c.order, c.radius};
  const TaylorJet jet = jet_propagate(spec, slice);
  const FiniteDiffReport fd = finite_diff_check(spec, slice, c.h);
  Json j{{"kernel", spec.name()}, {"x", c.x}, {"p", c.p}, {"dir", c.dir}, {"order", c.order}, {"h", c.h}};
  j.update(to_json(fd, jet));
  return j;
}

Json invert_payload(const ExperimentConfig& c) {
  const KernelSpec spec = parse_kernel(c.kernel);
  RecoveryMethod m;
  m.method = parse_method(c.method);
  m.parameter = m.method == SolveMethod::tsvd ? static_cast<double>(c.r) : c.lambda;
  m.sweep = c.sweep;
  m.selection = parse_selection(c.selection);
  RecoveryOptions o;
  o.quad_nodes = c.quad_nodes;
  o.noise = c.noise;
  o.seed = c.seed;
  o.policy = c.policy;
  const std::vector<double> w = c.window.empty() ? std::vector<double>{0.4, 0.6} : c.window;
  return to_json(local_recover(spec, parse_test_function(c.truth), window_domain(w, 1), c.k, m, o));
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::rank_mc: return "rank-mc";
    case Subcommand::finite_rank: return "finite-rank";
    case Subcommand::lli_probe: return "lli-probe";
    case Subcommand::taylor: return "taylor";
    case Subcommand::invert: return "invert";
    case Subcommand::null_check: return "null-check";
  }
  return "?";
}

Subcommand parse_subcommand(const std::string& s) {
  for (Subcommand c : {Subcommand::rank_mc, Subcommand::finite_rank, Subcommand::lli_probe, Subcommand::taylor,
                       Subcommand::invert, Subcommand::null_check})
    if (to_string(c) == s) return c;
  throw ValidationError("unknown subcommand '" + s + "'");
}

TestFunction parse_test_function(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::vector<double> args = colon == std::string::npos ? std::vector<double>{} : split_doubles(text.substr(colon + 1));
  if (name == "exp_decay") {
    if (args.size() > 1) throw ValidationError("exp_decay takes one rate");
    return {testfn::ExpDecay{args.empty() ? 1.0 : args[0]}};
  }
  if (name == "polynomial") {
    if (args.empty()) throw ValidationError("polynomial needs coefficients");
    return {testfn::Polynomial{args}};
  }
  if (name == "gaussian_bump") {
    if (args.size() != 2 || !(args[1] > 0)) throw ValidationError("gaussian_bump needs center,width with width > 0");
    return {testfn::GaussianBump{args[0], args[1]}};
  }
  throw ValidationError("unknown test function '" + text + "'");
}

void ExperimentConfig::validate() const {
  policy.validate();
  if (threads < 0) throw ValidationError("threads must be >= 0");
  if (format != "json" && format != "csv") throw ValidationError("format must be json or csv");
  const bool needs_kernel = subcommand != Subcommand::null_check &&
                            !(subcommand == Subcommand::lli_probe && family != "taylor");
  if (needs_kernel) parse_kernel(kernel);
  switch (subcommand) {
    case Subcommand::rank_mc:
      if (k < 1 || trials < 1) throw ValidationError("k and trials must be >= 1");
      break;
    case Subcommand::finite_rank:
      if (k_max < 1 || trials < 20) throw ValidationError("finite-rank needs k_max >= 1 and trials >= 20");
      break;
    case Subcommand::lli_probe:
      if (k < 1 || budget < 1) throw ValidationError("k and budget must be >= 1");
      if (window.empty()) throw ValidationError("lli-probe needs a window");
      break;
    case Subcommand::taylor:
      if (x.empty() || p.empty() || dir.empty()) throw ValidationError("taylor needs x, p and dir");
      if (order < 0) throw ValidationError("order must be >= 0");
      break;
    case Subcommand::invert:
      parse_method(method);
      parse_selection(selection);
      parse_test_function(truth);
      if (k < 1) throw ValidationError("k must be >= 1");
      if (curve != "fhat" && curve != "g") throw ValidationError("curve must be fhat or g");
      break;
    case Subcommand::null_check:
      if (S < 1) throw ValidationError("S must be >= 1");
      if (x_grid.empty()) throw ValidationError("x grid must be non-empty");
      break;
  }
  if (format == "csv" && subcommand != Subcommand::taylor && subcommand != Subcommand::invert)
    throw ValidationError("csv output is available for taylor and invert only");
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"subcommand", to_string(c.subcommand)},
              {"kernel", c.kernel},
              {"seed", c.seed},
              {"policy", to_json(c.policy)},
              {"k", c.k},
              {"trials", c.trials},
              {"k_max", c.k_max},
              {"family", c.family},
              {"orders", c.orders},
              {"budget", c.budget},
              {"x", c.x},
              {"p", c.p},
              {"dir", c.dir},
              {"order", c.order},
              {"radius", c.radius},
              {"h", c.h},
              {"window", c.window},
              {"method", c.method},
              {"lambda", c.lambda},
              {"r", c.r},
              {"sweep", c.sweep},
              {"selection", c.selection},
              {"truth", c.truth},
              {"noise", c.noise},
              {"quad_nodes", c.quad_nodes},
              {"x_grid", c.x_grid},
              {"S", c.S},
              {"format", c.format},
              {"curve", c.curve}};
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.subcommand = parse_subcommand(j.at("subcommand").get<std::string>());
    c.kernel = j.value("kernel", c.kernel);
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("policy")) c.policy = policy_from_json(j.at("policy"));
    c.k = j.value("k", c.k);
    c.trials = j.value("trials", c.trials);
    c.k_max = j.value("k_max", c.k_max);
    c.family = j.value("family", c.family);
    c.orders = j.value("orders", c.orders);
    c.budget = j.value("budget", c.budget);
    c.x = j.value("x", c.x);
    c.p = j.value("p", c.p);
    c.dir = j.value("dir", c.dir);
    c.order = j.value("order", c.order);
    c.radius = j.value("radius", c.radius);
    c.h = j.value("h", c.h);
    c.window = j.value("window", c.window);
    c.method = j.value("method", c.method);
    c.lambda = j.value("lambda", c.lambda);
    c.r = j.value("r", c.r);
    c.sweep = j.value("sweep", c.sweep);
    c.selection = j.value("selection", c.selection);
    c.truth = j.value("truth", c.truth);
    c.noise = j.value("noise", c.noise);
    c.quad_nodes = j.value("quad_nodes", c.quad_nodes);
    c.x_grid = j.value("x_grid", c.x_grid);
    c.S = j.value("S", c.S);
    c.format = j.value("format", c.format);
    c.curve = j.value("curve", c.curve);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

namespace {

Json compute_payload(const ExperimentConfig& c) {
  MonteCarloOptions mc;
  mc.threads = c.threads;
  switch (c.subcommand) {
    case Subcommand::rank_mc:
      return to_json(fullrank_mc(parse_kernel(c.kernel), c.k, c.trials, c.seed, c.policy, {}, {}, mc));
    case Subcommand::finite_rank:
      return to_json(finite_rank_estimate(parse_kernel(c.kernel), c.k_max, c.trials, c.seed, c.policy, mc));
    case Subcommand::lli_probe: {
      const FunctionFamily fam = lli_family(c);
      Json j{{"family", fam.label}, {"k", c.k}, {"budget", c.budget}, {"seed", c.seed},
             {"window", c.window}, {"policy", to_json(c.policy)}};
      j.update(to_json(lli_probe(fam, window_domain(c.window, fam.domain.ambient_dim()), c.k, c.budget, c.seed, c.policy)));
      return j;
    }
    case Subcommand::taylor: return taylor_payload(c);
    case Subcommand::invert: return invert_payload(c);
    case Subcommand::null_check: return to_json(null_moment_check(c.x_grid, c.S));
  }
  throw ValidationError("unreachable subcommand");
}

}  // namespace

Json run_payload(const ExperimentConfig& c) {
  c.validate();
  Json j = compute_payload(c);
  // Seed-free computations still record the seed, so replay under another seed is detected.
  if (!j.contains("seed")) j["seed"] = c.seed;
  return j;
}

RunManifest run(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = c;
  m.version = version();
  m.result = run_payload(c);
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

Json to_json(const RunManifest& m) {
  return Json{{"config", to_json(m.config)},
              {"version", m.version},
              {"wall_clock_seconds", m.wall_clock_seconds},
              {"result", m.result}};
}

std::string to_csv(const ExperimentConfig& c, const Json& result) {
  std::ostringstream os;
  os.precision(17);
  if (c.subcommand == Subcommand::taylor) {
    os << "order,coefficient,finite_diff,rel_err\n";
    for (const auto& row : result.at("rows"))
      os << row.at("order").get<int>() << ',' << row.at("coefficient").get<double>() << ','
         << row.at("finite_diff").get<double>() << ',' << row.at("rel_err").get<double>() << '\n';
    return os.str();
  }
  if (c.subcommand == Subcommand::invert) {
    const bool g = c.curve == "g";
    const auto& nodes = result.at(g ? "x_nodes" : "y_nodes");
    const auto& values = result.at(g ? "g" : "fhat");
    os << "node,value\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) os << nodes[i].get<double>() << ',' << values[i].get<double>() << '\n';
    return os.str();
  }
  throw ValidationError("csv output is available for taylor and invert only");
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::validation, "cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw Error(ErrorKind::validation, "failed writing " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorKind::validation, "cannot move output into " + path);
  }
}

void verify_manifest_json(const Json& manifest) {
  if (!manifest.contains("config") || !manifest.contains("result"))
    throw ValidationError("manifest lacks config or result");
  const ExperimentConfig c = config_from_json(manifest.at("config"));
  const Json fresh = run_payload(c);
  const Json& stored = manifest.at("result");
  if (fresh.dump() == stored.dump()) return;
  const std::string field = "/result" + first_difference(stored, fresh, "");
  throw MismatchDetected("payload differs at " + field, field);
}

void verify_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read manifest " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest is not valid JSON: " + std::string(e.what()));
  }
  verify_manifest_json(j);
}

const char* version() { return KERNRANK_VERSION; }

int exit_code(const std::exception& e) {
  if (const auto* k = dynamic_cast<const Error*>(&e)) {
    switch (k->kind()) {
      case ErrorKind::validation: return 2;
      case ErrorKind::domain_violation: return 3;
      case ErrorKind::singular_system: return 4;
      case ErrorKind::quadrature: return 5;
      case ErrorKind::mismatch: return 6;
      case ErrorKind::numerical: return 1;
    }
  }
  return 1;
}

}  // namespace kernrank
