#include "kernrank/report.hpp"

#include <algorithm>

namespace kernrank {

namespace {

Json points_json(const std::vector<Point>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return a;
}

std::string escape_token(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

}  // namespace

Json to_json(const TolerancePolicy& p) {
  return Json{{"rel_threshold", p.rel_threshold},
              {"abs_floor", p.abs_floor},
              {"precision", p.precision == Precision::extended ? "extended" : "double"},
              {"equilibrate", p.equilibrate}};
}

TolerancePolicy policy_from_json(const Json& j) {
  TolerancePolicy p;
  p.rel_threshold = j.value("rel_threshold", p.rel_threshold);
  p.abs_floor = j.value("abs_floor", p.abs_floor);
  p.precision = j.value("precision", std::string("double")) == "extended" ? Precision::extended
                                                                           : Precision::double_precision;
  p.equilibrate = j.value("equilibrate", false);
  p.validate();
  return p;
}

Json to_json(const RankReport& r) {
  return Json{{"kernel", r.kernel},
              {"k", r.k},
              {"trials", r.trials},
              {"deficiency_count", r.deficiency_count},
              {"deficiency_count_machine", r.deficiency_count_machine},
              {"sigma_ratio", {{"min", r.ratio_min}, {"p5", r.ratio_p5}, {"p50", r.ratio_p50}, {"p95", r.ratio_p95}}},
              {"seed", r.seed},
              {"policy", to_json(r.policy)},
              {"conclusion", r.conclusion}};
}

Json to_json(const FiniteRankEstimate& e) {
  Json profile = Json::array();
  for (const auto& row : e.profile)
    profile.push_back(Json{{"k", row.k},
                           {"max_rank", row.max_rank},
                           {"min_rank", row.min_rank},
                           {"max_sigma_ratio", row.max_sigma_ratio}});
  Json j{{"estimate", e.label()}};
  j["rank"] = e.rank ? Json(*e.rank) : Json(nullptr);
  j["k_max"] = e.k_max;
  j["trials_per_k"] = e.trials_per_k;
  j["seed"] = e.seed;
  j["policy"] = to_json(e.policy);
  j["profile"] = std::move(profile);
  return j;
}

Json to_json(const LliProbe& p) {
  return Json{{"verdict", to_string(p.verdict)},
              {"achieved_rank", p.search.achieved_rank},
              {"sigma_ratio", p.search.sigma_ratio},
              {"points", points_json(p.search.points)}};
}

Json to_json(const FiniteDiffReport& r, const TaylorJet& jet) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"order", row.order},
                        {"coefficient", row.coefficient},
                        {"finite_diff", row.finite_diff},
                        {"rel_err", row.rel_err}});
  return Json{{"coeffs", jet.coeffs()}, {"rows", std::move(rows)}, {"max_rel_err", r.max_rel_err}};
}

Json to_json(const InversionReport& r) {
  Json sweep = Json::array();
  for (const auto& s : r.sweep)
    sweep.push_back(Json{{"lambda", s.lambda},
                         {"residual", s.residual},
                         {"recovery_error", s.recovery_error},
                         {"solution_norm", s.solution_norm}});
  return Json{{"kernel", r.kernel},
              {"truth", r.truth},
              {"k", r.k},
              {"method", to_string(r.method)},
              {"parameter", r.parameter},
              {"selection", r.selection},
              {"condition_number", r.condition_number},
              {"residual", r.residual},
              {"recovery_error", r.recovery_error},
              {"window", r.window},
              {"noise", r.noise},
              {"seed", r.seed},
              {"x_nodes", r.x_nodes},
              {"g", r.g},
              {"y_nodes", r.y_nodes},
              {"fhat", r.fhat},
              {"sweep", std::move(sweep)}};
}

Json to_json(const NullMomentReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"s", row.s},
                        {"moment_even", row.moment_even},
                        {"moment_odd", row.moment_odd},
                        {"difference", row.difference}});
  Json grid = Json::array();
  for (std::size_t i = 0; i < r.x_grid.size(); ++i) {
    Json v = std::isfinite(r.values[i]) ? Json(r.values[i]) : Json(nullptr);
    grid.push_back(Json{{"x", r.x_grid[i]}, {"value", v}, {"converged", static_cast<bool>(r.converged[i])}});
  }
  return Json{{"exact_cancellation", r.exact_cancellation},
              {"terms", std::move(rows)},
              {"grid", std::move(grid)},
              {"all_converged", r.all_converged},
              {"constancy_gap", r.constancy_gap},
              {"measured_constant", r.measured_constant}};
}

std::string first_difference(const Json& a, const Json& b, const std::string& path) {
  const std::string here = path.empty() ? "/" : path;
  if (a.type() != b.type()) {
    // Integer and unsigned encodings of the same number are not a difference.
    if (a.is_number() && b.is_number() && a.dump() == b.dump()) return "";
    return here;
  }
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      const std::string sub = path + "/" + escape_token(it.key());
      if (!b.contains(it.key())) return sub;
      std::string d = first_difference(it.value(), b.at(it.key()), sub);
      if (!d.empty()) return d;
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key())) return path + "/" + escape_token(it.key());
    return "";
  }
  if (a.is_array()) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      std::string d = first_difference(a[i], b[i], path + "/" + std::to_string(i));
      if (!d.empty()) return d;
    }
    if (a.size() != b.size()) return path + "/" + std::to_string(n);
    return "";
  }
  return a.dump() == b.dump() ? "" : here;
}

}  // namespace kernrank
