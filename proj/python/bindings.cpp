#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "polyamix/analysis.hpp"
#include "polyamix/completion.hpp"
#include "polyamix/datasets.hpp"
#include "polyamix/distributions.hpp"
#include "polyamix/gibbs.hpp"
#include "polyamix/simulation.hpp"

namespace py = pybind11;
using namespace polyamix;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Marginal Gibbs sampler and Polya completion for normal DP mixtures";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 1)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal);

  py::class_<Component>(m, "Component")
      .def(py::init<>())
      .def(py::init([](double mean, double variance) { return Component{mean, variance}; }),
           py::arg("mean"), py::arg("variance"))
      .def_readwrite("mean", &Component::mean)
      .def_readwrite("variance", &Component::variance)
      .def(py::self == py::self)
      .def("__repr__", [](const Component& c) {
        return "Component(mean=" + std::to_string(c.mean) +
               ", variance=" + std::to_string(c.variance) + ")";
      });

  py::class_<NigParams>(m, "NigParams")
      .def(py::init<>())
      .def(py::init([](double mu, double tau, double shape, double scale) {
             return NigParams{mu, tau, shape, scale};
           }),
           py::arg("mu"), py::arg("tau"), py::arg("shape"), py::arg("scale"))
      .def_readwrite("mu", &NigParams::mu)
      .def_readwrite("tau", &NigParams::tau)
      .def_readwrite("shape", &NigParams::shape)
      .def_readwrite("scale", &NigParams::scale);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("mu_mean", &ModelConfig::mu_mean)
      .def_readwrite("mu_var", &ModelConfig::mu_var)
      .def_readwrite("tau_shape", &ModelConfig::tau_shape)
      .def_readwrite("tau_scale", &ModelConfig::tau_scale)
      .def_readwrite("alpha_shape", &ModelConfig::alpha_shape)
      .def_readwrite("alpha_rate", &ModelConfig::alpha_rate)
      .def_readwrite("var_shape", &ModelConfig::var_shape)
      .def_readwrite("var_scale", &ModelConfig::var_scale)
      .def_readwrite("fix_alpha", &ModelConfig::fix_alpha)
      .def_readwrite("fix_mu", &ModelConfig::fix_mu)
      .def_readwrite("fix_tau", &ModelConfig::fix_tau)
      .def_readwrite("remix", &ModelConfig::remix)
      .def_readwrite("iterations", &ModelConfig::iterations)
      .def_readwrite("burnin", &ModelConfig::burnin)
      .def_readwrite("thin", &ModelConfig::thin)
      .def_readwrite("seed", &ModelConfig::seed)
      .def("base_measure", &ModelConfig::base_measure, py::arg("mu"), py::arg("tau"));

  py::class_<PosteriorDraw>(m, "PosteriorDraw")
      .def(py::init<>())
      .def_readwrite("thetas", &PosteriorDraw::thetas)
      .def_readwrite("mu", &PosteriorDraw::mu)
      .def_readwrite("tau", &PosteriorDraw::tau)
      .def_readwrite("alpha", &PosteriorDraw::alpha)
      .def_readwrite("k", &PosteriorDraw::k);

  py::class_<CompletionConfig>(m, "CompletionConfig")
      .def(py::init<>())
      .def(py::init([](double eps, double ups, std::uint64_t seed) {
             return CompletionConfig{eps, ups, seed};
           }),
           py::arg("eps") = 0.01, py::arg("ups") = 0.01, py::arg("seed") = 1)
      .def_readwrite("eps", &CompletionConfig::eps)
      .def_readwrite("ups", &CompletionConfig::ups)
      .def_readwrite("seed", &CompletionConfig::seed);

  py::enum_<Provenance>(m, "Provenance")
      .value("completed", Provenance::completed)
      .value("prior", Provenance::prior)
      .value("truncated_marginal", Provenance::truncated_marginal)
      .value("marginal", Provenance::marginal);

  py::class_<MixtureDensity>(m, "MixtureDensity")
      .def(py::init<>())
      .def_readwrite("weights", &MixtureDensity::weights)
      .def_readwrite("components", &MixtureDensity::components)
      .def_readwrite("provenance", &MixtureDensity::provenance)
      .def_readwrite("stick_mass", &MixtureDensity::stick_mass)
      .def_readwrite("truncation", &MixtureDensity::truncation)
      .def("mean", &MixtureDensity::mean)
      .def("variance", &MixtureDensity::variance)
      .def("__len__", &MixtureDensity::size);

  py::class_<GridFunction>(m, "GridFunction")
      .def(py::init<>())
      .def(py::init([](std::vector<double> grid, std::vector<double> values) {
             return GridFunction{std::move(grid), std::move(values)};
           }),
           py::arg("grid"), py::arg("values"))
      .def_readwrite("grid", &GridFunction::grid)
      .def_readwrite("values", &GridFunction::values);

  py::enum_<BandKind>(m, "BandKind")
      .value("pointwise", BandKind::pointwise)
      .value("simultaneous", BandKind::simultaneous);

  py::class_<BandSet>(m, "BandSet")
      .def_readonly("grid", &BandSet::grid)
      .def_readonly("lower", &BandSet::lower)
      .def_readonly("upper", &BandSet::upper)
      .def_readonly("kind", &BandSet::kind)
      .def_readonly("level", &BandSet::level)
      .def("mean_width", &BandSet::mean_width);

  py::class_<Moments>(m, "Moments")
      .def_readonly("mean", &Moments::mean)
      .def_readonly("variance", &Moments::variance)
      .def_readonly("mass", &Moments::mass)
      .def_readonly("low_mass", &Moments::low_mass);

  m.def("marginal_t_density", &marginal_t_density, py::arg("y"), py::arg("params"));
  m.def("nig_posterior_single", &nig_posterior_single, py::arg("y"), py::arg("params"));
  m.def("poisson_quantile", &poisson_quantile, py::arg("p"), py::arg("rate"));

  m.def(
      "run_chain",
      [](const std::vector<double>& data, const ModelConfig& config) {
        py::gil_scoped_release release;
        return run_chain(data, config);
      },
      py::arg("data"), py::arg("config") = ModelConfig{});
  m.def("count_components", &count_components, py::arg("draw"));

  m.def("truncation_level", &truncation_level, py::arg("alpha"), py::arg("n"),
        py::arg("eps"), py::arg("ups"));
  m.def("stick_weights", [](const std::vector<double>& v) { return stick_weights(v); },
        py::arg("v"));
  m.def("complete", &complete, py::arg("draw"), py::arg("g0"), py::arg("config"),
        py::arg("rng"));
  m.def(
      "complete_all",
      [](const std::vector<PosteriorDraw>& draws, const ModelConfig& model,
         const CompletionConfig& config, unsigned threads) {
        py::gil_scoped_release release;
        return complete_all(draws, model, config, threads);
      },
      py::arg("draws"), py::arg("model") = ModelConfig{},
      py::arg("config") = CompletionConfig{}, py::arg("threads") = 1);
  m.def("marginal_mixture", &marginal_mixture, py::arg("draw"));

  m.def("default_grid",
        [](const std::vector<double>& data, std::size_t points) {
          return default_grid(data, points);
        },
        py::arg("data"), py::arg("points") = 1000);
  m.def("moment_grid", &moment_grid, py::arg("mix"), py::arg("min_points") = 2001,
        py::arg("max_points") = 200001);
  m.def("eval_density",
        [](const MixtureDensity& mix, const std::vector<double>& grid) {
          return eval_density(mix, grid);
        },
        py::arg("mix"), py::arg("grid"));
  m.def("eval_cdf",
        [](const MixtureDensity& mix, const std::vector<double>& grid) {
          return eval_cdf(mix, grid);
        },
        py::arg("mix"), py::arg("grid"));
  m.def("count_modes", &count_modes, py::arg("mix"), py::arg("range"),
        py::arg("resolution") = 512);
  m.def("moments_trapezoid", &moments_trapezoid, py::arg("fn"));
  m.def("pointwise_mean",
        [](const std::vector<GridFunction>& fns) { return pointwise_mean(fns); },
        py::arg("fns"));
  m.def("bands",
        [](const std::vector<GridFunction>& fns, double level, BandKind kind) {
          return bands(fns, level, kind);
        },
        py::arg("fns"), py::arg("level") = 0.95, py::arg("kind") = BandKind::pointwise);

  m.def("sample_prior_mixture", &sample_prior_mixture, py::arg("alpha"), py::arg("g0"),
        py::arg("eps"), py::arg("ups"), py::arg("rng"));
  m.def(
      "generate_labeled_data",
      [](const MixtureDensity& mix, std::size_t n, Rng& rng) {
        auto s = generate_labeled_data(mix, n, rng);
        return py::make_tuple(s.y, s.labels);
      },
      py::arg("mix"), py::arg("n"), py::arg("rng"));
  m.def("truncated_marginal",
        [](const MixtureDensity& mix, const std::vector<std::size_t>& labels) {
          return truncated_marginal(mix, labels);
        },
        py::arg("mix"), py::arg("labels"));

  m.def("galaxies", [] { return *builtin_dataset("galaxies"); },
        "Galaxy velocities in 1000 km/s (82 values).");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
