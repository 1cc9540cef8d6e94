#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "selsamp/bounds.hpp"
#include "selsamp/design.hpp"
#include "selsamp/errors.hpp"
#include "selsamp/estimators.hpp"
#include "selsamp/instance.hpp"
#include "selsamp/sampler.hpp"

namespace py = pybind11;
using namespace selsamp;

namespace {

RobustMethod robust_from(const std::string& s) {
  if (s == "catoni") return RobustMethod::catoni;
  if (s == "median_of_means") return RobustMethod::median_of_means;
  throw InvalidInput("unknown robust method '" + s + "'");
}

py::dict run_dict(const RunResult& r) {
  py::list rounds;
  for (const auto& lg : r.rounds) {
    py::dict d;
    d["round"] = lg.round;
    d["active_arms"] = lg.active_arms;
    d["eps"] = lg.eps;
    d["labels_requested"] = lg.labels_requested;
    d["unlabeled_seen"] = lg.unlabeled_seen;
    d["design_saturated"] = lg.design_saturated;
    rounds.append(d);
  }
  py::dict out;
  out["recommended_arm"] = r.recommended_arm;
  out["total_unlabeled"] = r.total_unlabeled;
  out["total_labels"] = r.total_labels;
  out["correct"] = r.correct;
  out["rounds"] = rounds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_selsamp, m) {
  m.doc() = "Selective sampling for best-arm identification";

  static py::exception<Error> base(m, "SelsampError");
  static py::exception<Infeasible> infeasible(m, "InfeasibleBudget", base.ptr());
  static py::exception<SolverFailure> solver(m, "SolverFailure", base.ptr());
  static py::exception<SingularMatrix> singular(m, "SingularMatrixError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Infeasible& e) {
      PyErr_SetObject(infeasible.ptr(), py::make_tuple(e.what(), e.required).ptr());
    } catch (const InvalidInput& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const InsufficientSamples& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const SolverFailure& e) {
      PyErr_SetString(solver.ptr(), e.what());
    } catch (const SingularMatrix& e) {
      PyErr_SetString(singular.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  py::class_<Instance>(m, "Instance")
      .def(py::init<>())
      .def_readwrite("arms", &Instance::arms)
      .def_readwrite("stream_points", &Instance::stream_points)
      .def_readwrite("stream_probs", &Instance::stream_probs)
      .def_readwrite("theta_star", &Instance::theta_star)
      .def_readwrite("noise_sigma", &Instance::noise_sigma)
      .def_readwrite("bound_B", &Instance::bound_B)
      .def_property_readonly("dim", &Instance::dim)
      .def("validate", &Instance::validate)
      .def("to_json", [](const Instance& i) { return instance_to_json(i); })
      .def_static("from_json", &instance_from_json);

  m.def("benchmark_instance", &benchmark_instance);
  m.def("two_point_instance", &two_point_instance);
  m.def("gap_and_best", [](const Instance& i) {
    const BestArm b = gap_and_best(i);
    return py::make_tuple(b.index, b.gap);
  });

  m.def("psd_project", [](const Mat& a) { return psd_project(SymMatrix(a)).mat(); }, py::arg("m"));
  m.def("quad_form_inv", [](const Mat& a, const Vec& v, double ridge) { return quad_form_inv(SymMatrix(a), v, ridge); },
        py::arg("a"), py::arg("v"), py::arg("ridge") = 0.0);

  m.def("rho", py::overload_cast<const Instance&, const DesignWeights&, double>(&rho), py::arg("instance"),
        py::arg("lam"), py::arg("eps") = 0.0);
  m.def("direction_set", &direction_set, py::arg("arms"));
  m.def(
      "oracle_design",
      [](const Instance& inst, double eps, double tau, double beta) {
        const OracleDesign od = oracle_design(inst, eps, tau, beta);
        py::dict d;
        d["p"] = od.p;
        d["lambda"] = od.lambda;
        d["cost"] = od.cost;
        d["residual"] = od.residual;
        return d;
      },
      py::arg("instance"), py::arg("eps"), py::arg("tau"), py::arg("beta"));
  m.def(
      "selection_prob", [](const Mat& lam, double mu, const Vec& x) { return selection_prob({SymMatrix(lam), mu}, x); },
      py::arg("lambda_mat"), py::arg("mu"), py::arg("x"));

  m.def(
      "robust_mean",
      [](const std::vector<double>& xs, const std::string& method, double delta) {
        return robust_mean(xs, {robust_from(method), delta});
      },
      py::arg("samples"), py::arg("method") = "catoni", py::arg("delta") = 0.05);
  m.def(
      "beta_constant",
      [](double delta, int round, int num_arms, double B, double sigma, const std::string& variant, double eps,
         double scale) {
        BetaParams p;
        p.delta = delta;
        p.round = round;
        p.num_arms = num_arms;
        p.bound_B = B;
        p.sigma = sigma;
        p.eps = eps;
        p.scale = scale;
        BetaVariant v = BetaVariant::round;
        if (variant == "global") v = BetaVariant::global;
        else if (variant == "classification") v = BetaVariant::classification;
        else if (variant != "round") throw InvalidInput("unknown beta variant '" + variant + "'");
        return beta_constant(p, v);
      },
      py::arg("delta"), py::arg("round") = 1, py::arg("num_arms") = 1, py::arg("B") = 1.0, py::arg("sigma") = 1.0,
      py::arg("variant") = "round", py::arg("eps") = 0.5, py::arg("scale") = 1.0);

  m.def(
      "run",
      [](const Instance& inst, double tau, double delta, const std::string& mode, std::uint64_t seed, long iters,
         long rescale) {
        SolverParams p;
        if (iters > 0) p.sga.iters = iters;
        if (rescale > 0) p.sga.rescale_samples = rescale;
        Rng rng(seed);
        RunResult r;
        {
          py::gil_scoped_release nogil;
          r = run(inst, tau, delta, parse_mode(mode), p, rng);
        }
        return run_dict(r);
      },
      py::arg("instance"), py::arg("tau"), py::arg("delta") = 0.05, py::arg("mode") = "oracle", py::arg("seed") = 0,
      py::arg("iters") = 0, py::arg("rescale_samples") = 0);
  m.def(
      "sweep_csv",
      [](const Instance& inst, const std::vector<double>& grid, double delta, const std::vector<std::string>& modes,
         int trials, std::uint64_t seed, int jobs) {
        std::vector<SamplerMode> ms;
        for (const auto& s : modes) ms.push_back(parse_mode(s));
        py::gil_scoped_release nogil;
        return sweep_csv(label_complexity_sweep(inst, grid, delta, ms, trials, seed, SolverParams{}, jobs));
      },
      py::arg("instance"), py::arg("tau_grid"), py::arg("delta") = 0.05,
      py::arg("modes") = std::vector<std::string>{"naive", "oracle", "learned"}, py::arg("trials") = 50,
      py::arg("seed") = 0, py::arg("jobs") = 1);

  m.def("lower_bound_unlabeled", &lower_bound_unlabeled, py::arg("instance"), py::arg("delta"),
        py::arg("theorem_form") = false);
  m.def(
      "lower_bound_label_curve",
      [](const Instance& inst, double delta, const std::vector<double>& budgets, bool theorem_form) {
        py::list out;
        for (const auto& p : lower_bound_label_curve(inst, delta, budgets, theorem_form)) {
          py::dict d;
          d["budget"] = p.unlabeled_budget;
          d["min_labels"] = p.min_labels;
          d["feasible"] = p.feasible;
          d["witness_linf_ratio"] = p.witness_linf_ratio;
          d["upper_labels"] = p.upper_labels;
          d["upper_feasible"] = p.upper_feasible;
          out.append(d);
        }
        return out;
      },
      py::arg("instance"), py::arg("delta"), py::arg("budgets"), py::arg("theorem_form") = false);
}
