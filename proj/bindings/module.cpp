#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "rwrc/experiment.hpp"
#include "rwrc/homogenise.hpp"
#include "rwrc/json_io.hpp"
#include "rwrc/scaling.hpp"
#include "rwrc/spectrum.hpp"
#include "rwrc/varprob.hpp"
#include "rwrc/walker.hpp"

namespace py = pybind11;
using namespace rwrc;

namespace {

lattice::Domain domain_from_pairs(const std::vector<std::pair<double, double>>& pairs) {
  lattice::Domain G;
  G.d = static_cast<int>(pairs.size());
  for (int i = 0; i < G.d; ++i) {
    G.lo[i] = pairs[i].first;
    G.hi[i] = pairs[i].second;
  }
  return G;
}

lattice::Coord coord_from_list(const std::vector<std::int64_t>& z) {
  lattice::Coord c{};
  for (std::size_t i = 0; i < z.size() && i < c.size(); ++i) c[i] = z[i];
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "random conductance model laboratory: lattice walks, Dirichlet spectra, "
            "p-energy variational problems and homogenisation experiments";

  py::class_<lattice::LatticeBox>(m, "LatticeBox")
      .def_property_readonly("dim", &lattice::LatticeBox::dim)
      .def_property_readonly("alpha", &lattice::LatticeBox::alpha)
      .def_property_readonly("size", &lattice::LatticeBox::size)
      .def("sites",
           [](const lattice::LatticeBox& b) {
             std::vector<std::vector<std::int64_t>> out;
             for (const auto& z : b.sites())
               out.emplace_back(z.begin(), z.begin() + b.dim());
             return out;
           })
      .def("contains",
           [](const lattice::LatticeBox& b, const std::vector<std::int64_t>& z) {
             const auto c = coord_from_list(z);
             return b.contains(std::span<const std::int64_t>(c.data(), b.dim()));
           })
      .def("embed",
           [](const lattice::LatticeBox& b, const std::vector<std::int64_t>& z) {
             const auto c = coord_from_list(z);
             return b.embed(std::span<const std::int64_t>(c.data(), b.dim()));
           })
      .def("neighbors", [](const lattice::LatticeBox& b, const std::vector<std::int64_t>& z) {
        const auto c = coord_from_list(z);
        std::vector<std::tuple<int, std::vector<std::int64_t>, bool>> out;
        for (const auto& e : b.neighbors(std::span<const std::int64_t>(c.data(), b.dim())))
          out.emplace_back(e.direction,
                           std::vector<std::int64_t>(e.site.begin(), e.site.begin() + b.dim()),
                           e.in_box);
        return out;
      });

  m.def("build_box",
        [](int d, double alpha, const std::vector<std::pair<double, double>>& G) {
          return lattice::build_box(d, alpha, domain_from_pairs(G));
        },
        py::arg("d"), py::arg("alpha"), py::arg("G"));
  m.def("cube_box", &lattice::cube_box, py::arg("d"), py::arg("n"));

  py::class_<conductance::ConductanceField>(m, "ConductanceField")
      .def_property_readonly("box", &conductance::ConductanceField::box)
      .def("weight", [](const conductance::ConductanceField& f,
                        const std::vector<std::int64_t>& z, int dir) {
        const auto c = coord_from_list(z);
        return f.weight(std::span<const std::int64_t>(c.data(), f.box().dim()), dir);
      });

  m.def("sample_tail_field",
        [](const lattice::LatticeBox& box, double eta, double D, double cap,
           std::uint64_t seed) {
          return conductance::sample_field(box, conductance::TailModel{eta, D, cap}, seed);
        },
        py::arg("box"), py::arg("eta"), py::arg("D"), py::arg("cap") = 1.0, py::arg("seed"));
  m.def("sample_elliptic_field",
        [](const lattice::LatticeBox& box, double lambda, std::uint64_t seed) {
          return conductance::sample_field(box, conductance::EllipticModel::uniform(lambda),
                                           seed);
        },
        py::arg("box"), py::arg("lambda"), py::arg("seed"));
  m.def("constant_field", &conductance::constant_field, py::arg("box"), py::arg("value"));

  m.def("principal_eigen",
        [](const conductance::ConductanceField& field, const std::vector<double>& V,
           double laplace_scale, double tol) {
          const auto r = spectrum::principal_eigen(spectrum::assemble(field, V, laplace_scale),
                                                   tol);
          return py::make_tuple(r.value, r.eigenvector, r.residual, r.iterations);
        },
        py::arg("field"), py::arg("V") = std::vector<double>{}, py::arg("laplace_scale") = 1.0,
        py::arg("tol") = 1e-10);
  m.def("dirichlet_form",
        [](const conductance::ConductanceField& field, const std::vector<double>& g) {
          return spectrum::dirichlet_form(field, g);
        },
        py::arg("field"), py::arg("g"));
  m.def("semigroup_apply",
        [](const conductance::ConductanceField& field, double t, const std::vector<double>& g,
           const std::vector<double>& V, double laplace_scale) {
          return spectrum::semigroup_apply(spectrum::assemble(field, V, laplace_scale), t, g);
        },
        py::arg("field"), py::arg("t"), py::arg("g"), py::arg("V") = std::vector<double>{},
        py::arg("laplace_scale") = 1.0);

  m.def("p_energy",
        [](const lattice::LatticeBox& box, const std::vector<double>& g, double p) {
          return varprob::p_energy(box, g, p);
        },
        py::arg("box"), py::arg("g"), py::arg("p"));
  m.def("solve_chi_d",
        [](const lattice::LatticeBox& box, double p, int restarts, int max_iter) {
          varprob::ChiConfig cfg;
          cfg.restarts = restarts;
          cfg.max_iter = max_iter;
          const auto r = varprob::solve_chi_d(box, p, cfg);
          return py::make_tuple(r.value, r.minimizer, r.converged);
        },
        py::arg("box"), py::arg("p"), py::arg("restarts") = 4, py::arg("max_iter") = 4000);
  m.def("rate_constant_K",
        [](double eta, double D) { return varprob::RegimeParams(eta, D).K(); }, py::arg("eta"),
        py::arg("D"));

  m.def("simulate_local_times",
        [](const conductance::ConductanceField& field, const std::vector<std::int64_t>& start,
           double horizon, bool stop_on_exit, std::uint64_t seed) {
          const auto r =
              walker::simulate(field, coord_from_list(start), horizon, stop_on_exit, seed);
          return py::make_tuple(r.local_times.in_box, r.local_times.exited,
                                r.local_times.total());
        },
        py::arg("field"), py::arg("start"), py::arg("horizon"), py::arg("stop_on_exit") = true,
        py::arg("seed") = 0);
  m.def("nonexit_mc",
        [](const lattice::LatticeBox& box, double eta, double D, double cap, double t,
           int n_env, int n_walks, std::uint64_t seed) {
          const auto r = walker::nonexit_mc(conductance::TailModel{eta, D, cap}, box, t, n_env,
                                            n_walks, seed);
          return py::make_tuple(r.estimate, r.ci_lo, r.ci_hi, r.n_exit);
        },
        py::arg("box"), py::arg("eta"), py::arg("D"), py::arg("cap"), py::arg("t"),
        py::arg("n_env"), py::arg("n_walks"), py::arg("seed"));

  m.def("beta_scale",
        [](double t, double alpha, double eta, int d) { return scaling::beta(t, alpha, eta, d).value; },
        py::arg("t"), py::arg("alpha"), py::arg("eta"), py::arg("d"));
  m.def("gamma_scale", &scaling::gamma, py::arg("t"), py::arg("alpha"), py::arg("eta"),
        py::arg("d"));
  m.def("classify_regime",
        [](double eta, int d) {
          const auto info = scaling::classify_regime(eta, d);
          return std::string(info.regime == scaling::Regime::SpreadOut  ? "spread-out"
                             : info.regime == scaling::Regime::Critical ? "critical"
                                                                        : "confined");
        },
        py::arg("eta"), py::arg("d"));

  m.def("estimate_c_eff",
        [](double lambda, int d, const std::vector<double>& sizes, int n_env,
           std::uint64_t seed) {
          const auto r = homogenise::estimate_c_eff(conductance::EllipticModel::uniform(lambda),
                                                    d, sizes, n_env, seed);
          return py::make_tuple(r.value, r.ci_lo, r.ci_hi);
        },
        py::arg("lambda"), py::arg("d"), py::arg("sizes"), py::arg("n_env"), py::arg("seed"));

  // full experiment runner: JSON string in, JSON string out
  m.def("run_json", [](const std::string& config) {
    return experiment::run_config(nlohmann::json::parse(config)).dump();
  });

#ifdef VERSION_INFO
#define STR_IMPL(x) #x
#define STR(x) STR_IMPL(x)
  m.attr("__version__") = STR(VERSION_INFO);
#undef STR
#undef STR_IMPL
#else
  m.attr("__version__") = "dev";
#endif
}
