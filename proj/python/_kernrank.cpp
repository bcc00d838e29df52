#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kernrank/errors.hpp"
#include "kernrank/experiment.hpp"

namespace py = pybind11;
using namespace kernrank;

namespace {

TolerancePolicy make_policy(double rel_threshold, bool extended, bool equilibrate) {
  TolerancePolicy p = extended ? TolerancePolicy::extended_default() : TolerancePolicy{};
  if (rel_threshold > 0) p.rel_threshold = rel_threshold;
  p.equilibrate = equilibrate;
  p.validate();
  return p;
}

std::vector<Point> to_points(const Eigen::MatrixXd& rows) {
  std::vector<Point> out;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(rows.row(i).transpose());
  return out;
}

}  // namespace

PYBIND11_MODULE(_kernrank, m) {
  m.doc() = "Numerical rank, Taylor jets and regularized inversion for integral kernels";

  static py::exception<Error> base(m, "KernrankError");
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<DomainViolation> domain(m, "DomainViolation", base.ptr());
  static py::exception<SingularSystem> singular(m, "SingularSystem", base.ptr());
  static py::exception<QuadratureNotConverged> quadrature(m, "QuadratureNotConverged", base.ptr());
  static py::exception<MismatchDetected> mismatch(m, "MismatchDetected", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const SubsetNotContained& e) {
      py::set_error(validation, e.what());
    } catch (const DomainViolation& e) {
      py::set_error(domain, e.what());
    } catch (const OutOfChart& e) {
      py::set_error(domain, e.what());
    } catch (const SingularSystem& e) {
      py::set_error(singular, e.what());
    } catch (const QuadratureNotConverged& e) {
      py::set_error(quadrature, e.what());
    } catch (const MismatchDetected& e) {
      py::set_error(mismatch, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.attr("__version__") = version();

  m.def("kernel_name", [](const std::string& text) { return parse_kernel(text).name(); },
        "Canonical name of a kernel string; raises ValidationError if unknown.");

  m.def("evaluate", [](const std::string& kernel, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return eval(parse_kernel(kernel), x, y);
  }, py::arg("kernel"), py::arg("x"), py::arg("y"));

  m.def("kernel_matrix", [](const std::string& kernel, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
    return kernel_matrix(parse_kernel(kernel), to_points(xs), to_points(ys)).entries;
  }, py::arg("kernel"), py::arg("xs"), py::arg("ys"), "Rows of xs and ys are points.");

  m.def("numerical_rank", [](const Eigen::MatrixXd& a, double rel_threshold, bool equilibrate) {
    const RankResult r = numerical_rank(a, make_policy(rel_threshold, false, equilibrate));
    return py::make_tuple(r.rank, r.singular_values);
  }, py::arg("matrix"), py::arg("rel_threshold") = 1e-10, py::arg("equilibrate") = false);

  m.def("fullrank_mc", [](const std::string& kernel, int k, int trials, std::uint64_t seed, double rel_threshold,
                          bool extended, bool equilibrate) {
    py::gil_scoped_release nogil;
    return to_json(fullrank_mc(parse_kernel(kernel), k, trials, seed, make_policy(rel_threshold, extended, equilibrate)))
        .dump();
  }, py::arg("kernel"), py::arg("k"), py::arg("trials"), py::arg("seed"), py::arg("rel_threshold") = 0.0,
        py::arg("extended") = false, py::arg("equilibrate") = false);

  m.def("finite_rank", [](const std::string& kernel, int k_max, int trials, std::uint64_t seed) {
    py::gil_scoped_release nogil;
    return to_json(finite_rank_estimate(parse_kernel(kernel), k_max, trials, seed)).dump();
  }, py::arg("kernel"), py::arg("k_max"), py::arg("trials"), py::arg("seed"));

  m.def("taylor_coeffs", [](const std::string& kernel, const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& dir, int order, double radius) {
    return jet_propagate(parse_kernel(kernel), SliceSpec{x, p, dir, order, radius}).coeffs();
  }, py::arg("kernel"), py::arg("x"), py::arg("p"), py::arg("dir"), py::arg("order") = 6, py::arg("radius") = 0.1);

  m.def("null_moment_check", [](const std::vector<double>& grid, int S) {
    return to_json(null_moment_check(grid, S)).dump();
  }, py::arg("x_grid"), py::arg("S"));

  m.def("run", [](const std::string& config_json) {
    py::gil_scoped_release nogil;
    return to_json(run(config_from_json(Json::parse(config_json)))).dump();
  }, py::arg("config_json"), "Run an experiment config and return the manifest JSON.");

  m.def("verify", [](const std::string& manifest_json) { verify_manifest_json(Json::parse(manifest_json)); },
        py::arg("manifest_json"));
}
