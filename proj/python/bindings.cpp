#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "pathsum/cdt.hpp"
#include "pathsum/error.hpp"
#include "pathsum/graph.hpp"
#include "pathsum/many_body.hpp"
#include "pathsum/oracle.hpp"
#include "pathsum/special.hpp"
#include "pathsum/two_level.hpp"
#include "pathsum/verify.hpp"

namespace py = pybind11;
using namespace pathsum;

namespace {

Quadrature rule_from(const std::string& r) {
  if (r == "trapezoid") return Quadrature::trapezoid;
  if (r == "gregory4") return Quadrature::gregory4;
  throw py::value_error("rule must be 'trapezoid' or 'gregory4'");
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

// (n, d, d) complex array from a list of square matrices.
template <class M>
py::array_t<cplx> stack(const std::vector<M>& Us) {
  const py::ssize_t n = Us.size(), r = n ? Us[0].rows() : 0, c = n ? Us[0].cols() : 0;
  py::array_t<cplx> out({n, r, c});
  auto a = out.template mutable_unchecked<3>();
  for (py::ssize_t k = 0; k < n; ++k)
    for (py::ssize_t i = 0; i < r; ++i)
      for (py::ssize_t j = 0; j < c; ++j) a(k, i, j) = Us[k](i, j);
  return out;
}

MatrixFn matrix_fn(const py::function& f) {
  return [f](double t) {
    py::gil_scoped_acquire gil;
    return f(t).cast<Mat>();
  };
}

ScalarFn scalar_fn(const py::object& f) {
  if (f.is_none()) return [](double) { return cplx(0.0); };
  return [f](double t) {
    py::gil_scoped_acquire gil;
    return f(t).cast<cplx>();
  };
}

py::dict diffusion_dict(const DiffusionResult& r) {
  std::vector<double> t(r.grid.n_points);
  for (int i = 0; i < r.grid.n_points; ++i) t[i] = r.grid.t(i);
  const py::ssize_t ns = r.probability.size(), nt = r.grid.n_points;
  py::array_t<double> P({ns, nt});
  auto a = P.mutable_unchecked<2>();
  for (py::ssize_t s = 0; s < ns; ++s)
    for (py::ssize_t i = 0; i < nt; ++i) a(s, i) = r.probability[s][i];
  py::dict d;
  d["t"] = to_array(t);
  d["probability"] = P;
  d["total"] = to_array(r.total);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Path-sum propagators for time-dependent Hamiltonians";

  // Translators are tried newest first, so the derived type goes last.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init([](double a, double b, int n, const std::string& rule) { return TimeGrid(a, b, n, rule_from(rule)); }),
           py::arg("t_min"), py::arg("t_max"), py::arg("n_points"), py::arg("rule") = "trapezoid")
      .def_readonly("t_min", &TimeGrid::t_min)
      .def_readonly("t_max", &TimeGrid::t_max)
      .def_readonly("n_points", &TimeGrid::n_points)
      .def_property_readonly("step", &TimeGrid::step)
      .def_property_readonly("order", &TimeGrid::order)
      .def("times", [](const TimeGrid& g) {
        std::vector<double> t(g.n_points);
        for (int i = 0; i < g.n_points; ++i) t[i] = g.t(i);
        return to_array(t);
      });

  py::class_<BlochSiegertParams>(m, "BlochSiegertParams")
      .def(py::init([](double b, double w, double w0) {
             BlochSiegertParams p{b, w, w0};
             p.validate();
             return p;
           }),
           py::arg("beta"), py::arg("omega") = 1.0, py::arg("omega0") = 1.0)
      .def_readonly("beta", &BlochSiegertParams::beta)
      .def_readonly("omega", &BlochSiegertParams::omega)
      .def_readonly("omega0", &BlochSiegertParams::omega0)
      .def_property_readonly("resonant", &BlochSiegertParams::resonant);

  // Two-level systems.
  m.def(
      "solve_2x2",
      [](const py::object& h_up, const py::object& h_down, const py::object& h_updown, const py::object& h_downup,
         const TimeGrid& g, bool hermitian, const std::string& method, int order) {
        TwoLevelHamiltonian h{scalar_fn(h_up), scalar_fn(h_down), scalar_fn(h_updown), scalar_fn(h_downup), hermitian};
        if (method != "direct" && method != "neumann") throw py::value_error("method must be 'direct' or 'neumann'");
        return stack(solve_2x2(h, g, method == "direct" ? TwoLevelMethod::direct : TwoLevelMethod::neumann, order).U);
      },
      py::arg("h_up"), py::arg("h_down"), py::arg("h_updown"), py::arg("h_downup"), py::arg("grid"),
      py::arg("hermitian") = false, py::arg("method") = "direct", py::arg("order") = 13,
      "U(t_i, t_0) as an (n, 2, 2) array; each entry is a callable t -> complex (None for zero).");
  m.def("transition_probability",
        [](const BlochSiegertParams& p, const TimeGrid& g, int order) { return to_array(transition_probability(p, g, order)); },
        py::arg("params"), py::arg("grid"), py::arg("order"));
  m.def("transition_probability_order0", &transition_probability_order0, py::arg("params"), py::arg("t"));
  m.def("spin_flip_radical", &spin_flip_radical, py::arg("params"));
  m.def(
      "spin_flip_time",
      [](const BlochSiegertParams& p, int order) {
        const auto s = spin_flip_time(p, order);
        return py::make_tuple(s.t, s.radical);
      },
      py::arg("params"), py::arg("fallback_order") = 13, "(t_sf, from_radical)");

  // Closed forms for the strongly driven two-level system.
  m.def("return_probability_acc0", &return_probability_acc0, py::arg("params"), py::arg("t"));
  m.def("mean_return_probability", &mean_return_probability, py::arg("params"));
  m.def("psi_transition_acc0", &psi_transition_acc0, py::arg("params"), py::arg("t"));
  m.def("sigma_x_acc0", &sigma_x_acc0, py::arg("params"), py::arg("t"), py::arg("simplified") = true);
  m.def("time_average", &time_average, py::arg("f"), py::arg("period"), py::arg("periods") = 10,
        py::arg("samples_per_period") = 400);
  m.def(
      "fluctuation_extrema",
      [](double lo, double hi) {
        const auto r = fluctuation_extrema(lo, hi);
        py::dict d;
        d["roots"] = to_array(r.roots);
        d["j0_zeros"] = to_array(r.j0_zeros);
        d["gaps"] = to_array(r.gaps);
        return d;
      },
      py::arg("x_lo"), py::arg("x_hi"));
  m.def("bessel_j", &bessel_j, py::arg("n"), py::arg("x"));
  m.def("bessel_j0_zero", &bessel_j0_zero, py::arg("k"));
  m.def("struve_h1", &struve_h1, py::arg("x"));

  // Oracle and generic path sums.
  m.def(
      "propagate",
      [](const py::function& H, const TimeGrid& g, double rtol) { return stack(propagate(matrix_fn(H), g, rtol).U); },
      py::arg("H"), py::arg("grid"), py::arg("rtol") = 1e-10, "RK4 reference U(t_i, t_0) as an (n, d, d) array.");
  m.def(
      "path_sum_propagator",
      [](const py::function& H, const std::vector<std::vector<int>>& partition, const TimeGrid& g, const std::string& method,
         int order) {
        const auto G = DynamicalGraph::from_hamiltonian(matrix_fn(H), partition, g);
        EvalOptions e;
        e.method = method == "neumann" ? ResolventMethod::neumann : ResolventMethod::direct;
        e.neumann_order = order;
        return stack(full_propagator(G, 0, {}, e));
      },
      py::arg("H"), py::arg("partition"), py::arg("grid"), py::arg("method") = "direct", py::arg("order") = 13,
      "U(t_i, t_0) assembled block by block from the path-sum Green functions.");

  // Dipolar spin diffusion.
  py::class_<SpinGeometry>(m, "SpinGeometry")
      .def(py::init([](const std::vector<std::array<double, 3>>& pos, std::vector<std::string> labels) {
             SpinGeometry g;
             for (const auto& p : pos) g.positions.emplace_back(p[0], p[1], p[2]);
             g.labels = std::move(labels);
             if (g.labels.empty())
               for (int i = 0; i < g.size(); ++i) g.labels.push_back("H" + std::to_string(i + 1));
             g.validate();
             return g;
           }),
           py::arg("positions"), py::arg("labels") = std::vector<std::string>{})
      .def_static("read", &SpinGeometry::read, py::arg("path"))
      .def_static("parse", &SpinGeometry::parse, py::arg("text"))
      .def_readonly("labels", &SpinGeometry::labels)
      .def_readwrite("prefactor", &SpinGeometry::prefactor)
      .def_property_readonly("positions",
                             [](const SpinGeometry& g) {
                               std::vector<std::array<double, 3>> out;
                               for (const auto& p : g.positions) out.push_back({p.x(), p.y(), p.z()});
                               return out;
                             })
      .def("__len__", &SpinGeometry::size);
  m.def("synthetic_chain", &synthetic_chain, py::arg("n"), py::arg("spacing"), py::arg("jitter"), py::arg("seed"));
  m.def("synthetic_dumbbell", &synthetic_dumbbell, py::arg("n_per"), py::arg("intra"), py::arg("gap"), py::arg("jitter"),
        py::arg("seed"));
  m.def(
      "sector_hamiltonian",
      [](const SpinGeometry& geom, double omega_r, std::vector<double> offsets, double t) {
        return sector_hamiltonian(geom, MasSchedule{omega_r}, std::move(offsets))(t);
      },
      py::arg("geometry"), py::arg("omega_r"), py::arg("offsets") = std::vector<double>{}, py::arg("t") = 0.0,
      "Single-excitation Hamiltonian at time t (rad/ms).");
  m.def(
      "spin_diffusion",
      [](const SpinGeometry& geom, double omega_r, const std::vector<std::vector<int>>& partition, const TimeGrid& g,
         double lambda, int initial, std::vector<double> offsets) {
        return diffusion_dict(spin_diffusion(sector_hamiltonian(geom, MasSchedule{omega_r}, std::move(offsets)), partition,
                                             lambda, initial, g));
      },
      py::arg("geometry"), py::arg("omega_r"), py::arg("partition"), py::arg("grid"), py::arg("cutoff") = kNoCutoff,
      py::arg("initial") = 0, py::arg("offsets") = std::vector<double>{});
  m.def(
      "block_graph_report",
      [](const SpinGeometry& geom, double omega_r, const std::vector<std::vector<int>>& partition, const TimeGrid& g,
         double lambda) {
        const auto bg = block_graph(sector_hamiltonian(geom, MasSchedule{omega_r}), partition, lambda, g);
        py::dict d;
        d["edges"] = bg.edges;
        d["dropped"] = bg.dropped;
        d["components"] = bg.components;
        d["coupling_max"] = bg.coupling_max;
        return d;
      },
      py::arg("geometry"), py::arg("omega_r"), py::arg("partition"), py::arg("grid"), py::arg("cutoff"));

  m.def(
      "run_verify",
      [](int n, const std::string& rule, unsigned seed) {
        VerifyOptions o;
        o.grid_points = n;
        o.rule = rule_from(rule);
        o.seed = seed;
        py::list out;
        for (const auto& c : run_verify(o).checks) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["measured"] = c.measured;
          d["tolerance"] = c.tolerance;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("grid_points") = 201, py::arg("rule") = "gregory4", py::arg("seed") = 2024);
}
