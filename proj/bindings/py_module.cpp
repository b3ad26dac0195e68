// Python bindings for the restoration library: distribution layer, model
// evaluations, the two samplers, convergence diagnostics, and the synthetic
// scenario generator. Sampling entry points take an explicit seed instead of
// exposing the generator object, so results are reproducible from python.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "spikegh/diagnostics.hpp"
#include "spikegh/distributions.hpp"
#include "spikegh/gh_fit.hpp"
#include "spikegh/model.hpp"
#include "spikegh/rng.hpp"
#include "spikegh/samplers.hpp"
#include "spikegh/simulation.hpp"
#include "spikegh/specfun.hpp"

namespace py = pybind11;
using namespace spikegh;

namespace {

template <class Draw>
Vector draw_many(std::uint64_t count, std::uint64_t seed, const Draw& draw) {
  RandomStream rng(seed);
  Vector out(count);
  for (double& v : out) v = draw(rng);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Nonnegative sparse spike-train restoration: generalized-hyperbolic "
      "amplitude prior, collapsed reversible-jump sampler, truncated-Gaussian "
      "baseline, and multivariate convergence diagnostics";
  m.attr("__version__") = "0.1.0";

  // ---- distribution layer ----
  py::class_<GigParams>(m, "GigParams")
      .def(py::init<double, double, double>(), py::arg("lam"), py::arg("gamma"),
           py::arg("delta"))
      .def_readwrite("lam", &GigParams::lambda)
      .def_readwrite("gamma", &GigParams::gamma)
      .def_readwrite("delta", &GigParams::delta)
      .def("__repr__", [](const GigParams& p) {
        return "GigParams(lam=" + std::to_string(p.lambda) +
               ", gamma=" + std::to_string(p.gamma) +
               ", delta=" + std::to_string(p.delta) + ")";
      });

  py::class_<GhParams>(m, "GhParams")
      .def(py::init<double, double, double, double, double>(), py::arg("lam"),
           py::arg("alpha"), py::arg("beta"), py::arg("delta"), py::arg("mu"))
      .def_readwrite("lam", &GhParams::lambda)
      .def_readwrite("alpha", &GhParams::alpha)
      .def_readwrite("beta", &GhParams::beta)
      .def_readwrite("delta", &GhParams::delta)
      .def_readwrite("mu", &GhParams::mu)
      .def("gamma", &GhParams::gamma)
      .def("__repr__", [](const GhParams& p) {
        return "GhParams(lam=" + std::to_string(p.lambda) +
               ", alpha=" + std::to_string(p.alpha) +
               ", beta=" + std::to_string(p.beta) +
               ", delta=" + std::to_string(p.delta) +
               ", mu=" + std::to_string(p.mu) + ")";
      });

  m.def("gig_log_pdf", &gig_log_pdf, py::arg("params"), py::arg("w"));
  m.def("gig_moment", &gig_moment, py::arg("params"), py::arg("power"));
  m.def("gh_log_pdf", &gh_log_pdf, py::arg("params"), py::arg("x"));
  m.def("gh_affine", &gh_affine, py::arg("params"), py::arg("a"), py::arg("b"),
        "parameters of a*X + b when X follows the given law");
  m.def("scale_gh_prior", &scale_gh_prior, py::arg("nu"), py::arg("sigma_x"),
        "scaled amplitude law and its matching mixing law, as a pair");
  m.def(
      "gig_sample",
      [](const GigParams& p, std::uint64_t count, std::uint64_t seed) {
        return draw_many(count, seed,
                         [&](RandomStream& rng) { return gig_sample(p, rng); });
      },
      py::arg("params"), py::arg("count"), py::arg("seed"));
  m.def(
      "gh_sample",
      [](const GhParams& p, std::uint64_t count, std::uint64_t seed) {
        return draw_many(count, seed,
                         [&](RandomStream& rng) { return gh_sample(p, rng); });
      },
      py::arg("params"), py::arg("count"), py::arg("seed"));
  m.def(
      "truncnorm_sample",
      [](double mean, double std, std::uint64_t count, std::uint64_t seed) {
        return draw_many(count, seed, [&](RandomStream& rng) {
          return truncnorm_sample(mean, std, rng);
        });
      },
      py::arg("mean"), py::arg("std"), py::arg("count"), py::arg("seed"),
      "normal draws truncated to [0, inf)");
  m.def("log_norm_pdf", &log_norm_pdf, py::arg("x"), py::arg("mean"),
        py::arg("var"));
  m.def("log_bessel_k", &log_bessel_k, py::arg("order"), py::arg("x"));
  m.def("log_bessel_k_ratio", &log_bessel_k_ratio, py::arg("order"),
        py::arg("x"));

  // ---- fitted amplitude prior ----
  py::class_<FittedGhApprox>(m, "FittedGhApprox")
      .def(py::init<>())
      .def_readwrite("nu_N", &FittedGhApprox::nu_N)
      .def_readwrite("fit_sample_count", &FittedGhApprox::fit_sample_count)
      .def_readwrite("fit_seed", &FittedGhApprox::fit_seed)
      .def_readwrite("fit_kl_estimate", &FittedGhApprox::fit_kl_estimate);
  py::class_<GhFitConfig>(m, "GhFitConfig")
      .def(py::init<>())
      .def_readwrite("alpha_cap", &GhFitConfig::alpha_cap)
      .def_readwrite("delta_lo", &GhFitConfig::delta_lo)
      .def_readwrite("delta_hi", &GhFitConfig::delta_hi)
      .def_readwrite("lambda_cap", &GhFitConfig::lambda_cap)
      .def_readwrite("mu_cap", &GhFitConfig::mu_cap)
      .def_readwrite("max_iterations", &GhFitConfig::max_iterations)
      .def_readwrite("grad_tol", &GhFitConfig::grad_tol);
  m.def("fit_gh_to_truncated_normal", &fit_gh_with_seed, py::arg("samples"),
        py::arg("seed"), py::arg("config") = GhFitConfig{},
        "maximum-likelihood fit of the amplitude prior to the standard "
        "normal truncated to [0, inf)");
  m.def("save_gh_fit", &save_gh_fit, py::arg("fit"), py::arg("path"));
  m.def("load_gh_fit", &load_gh_fit, py::arg("path"));

  // ---- model layer ----
  m.def("impulse_response", &impulse_response, py::arg("scale"),
        py::arg("length"));
  m.def("build_dictionary", &build_dictionary, py::arg("ir"),
        py::arg("site_count"));

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init<double, double, double, double>(), py::arg("bern_prob"),
           py::arg("noise_var"), py::arg("amp_var"), py::arg("ir_scale") = 1.0)
      .def_readwrite("bern_prob", &Hyperparams::bern_prob)
      .def_readwrite("noise_var", &Hyperparams::noise_var)
      .def_readwrite("amp_var", &Hyperparams::amp_var)
      .def_readwrite("ir_scale", &Hyperparams::ir_scale);

  py::class_<Observation>(m, "Observation")
      .def(py::init<Vector, Matrix>(), py::arg("y"), py::arg("dictionary"))
      .def(py::init<Vector, double, int>(), py::arg("y"), py::arg("ir_scale"),
           py::arg("ir_length"),
           "parametric form: the dictionary is rebuilt from the response "
           "scale, enabling scale sampling")
      .def_property_readonly("n", &Observation::n)
      .def_property_readonly("m", &Observation::m)
      .def_property_readonly("y",
                             [](const Observation& o) { return o.y(); })
      .def("column", [](const Observation& o, int k) { return o.column(k); },
           py::arg("k"))
      .def_property_readonly("parametric", &Observation::parametric)
      .def_property_readonly("ir_scale", &Observation::ir_scale)
      .def_property_readonly("ir_length", &Observation::ir_length);

  py::class_<LatentState>(m, "LatentState")
      .def_property_readonly("q",
                             [](const LatentState& s) { return s.q; })
      .def_property_readonly("x",
                             [](const LatentState& s) { return s.x; })
      .def_property_readonly(
          "active", [](const LatentState& s) { return s.chol.active(); })
      .def_property_readonly(
          "w", [](const LatentState& s) { return s.chol.w(); },
          "mixing variances in active-set order");
  m.def(
      "make_state",
      [](const std::vector<std::uint8_t>& q, const Vector& x, const Vector& w,
         const Observation& obs, const Hyperparams& hp) {
        return make_state(q, x, w, obs, hp);
      },
      py::arg("q"), py::arg("x"), py::arg("w"), py::arg("obs"), py::arg("hp"));
  m.def("log_joint", &log_joint, py::arg("state"), py::arg("obs"),
        py::arg("hp"), py::arg("nu"));
  m.def(
      "log_marginal",
      [](const std::vector<std::uint8_t>& q, const Vector& w,
         const Observation& obs, const Hyperparams& hp, const GhParams& nu) {
        return log_marginal(q, w, obs, hp, nu);
      },
      py::arg("q"), py::arg("w"), py::arg("obs"), py::arg("hp"), py::arg("nu"),
      "support/data density with the amplitudes integrated out");

  // ---- samplers ----
  py::enum_<SamplerKind>(m, "SamplerKind")
      .value("BGH", SamplerKind::kBgh)
      .value("BTG", SamplerKind::kBtg);

  py::class_<MoveProbabilities>(m, "MoveProbabilities")
      .def(py::init<>())
      .def_readwrite("p01", &MoveProbabilities::p01)
      .def_readwrite("p10", &MoveProbabilities::p10)
      .def_readwrite("p11", &MoveProbabilities::p11)
      .def_readwrite("update_mix", &MoveProbabilities::update_mix);

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &SamplerConfig::iterations)
      .def_readwrite("burn_in", &SamplerConfig::burn_in)
      .def_readwrite("seed", &SamplerConfig::seed)
      .def_readwrite("sample_bern_prob", &SamplerConfig::sample_bern_prob)
      .def_readwrite("sample_amp_var", &SamplerConfig::sample_amp_var)
      .def_readwrite("sample_noise_var", &SamplerConfig::sample_noise_var)
      .def_readwrite("sample_scale", &SamplerConfig::sample_scale)
      .def_readwrite("amp_var_step", &SamplerConfig::amp_var_step)
      .def_readwrite("scale_step", &SamplerConfig::scale_step)
      .def_readwrite("scale_min", &SamplerConfig::scale_min)
      .def_readwrite("scale_max", &SamplerConfig::scale_max)
      .def_readwrite("amp_var_min", &SamplerConfig::amp_var_min)
      .def_readwrite("amp_var_max", &SamplerConfig::amp_var_max)
      .def_readwrite("noise_prior_shape", &SamplerConfig::noise_prior_shape)
      .def_readwrite("noise_prior_rate", &SamplerConfig::noise_prior_rate)
      .def_readwrite("thin", &SamplerConfig::thin)
      .def_readwrite("shuffle_sites", &SamplerConfig::shuffle_sites)
      .def_readwrite("moves", &SamplerConfig::moves);

  py::class_<MoveCounters>(m, "MoveCounters")
      .def_readonly("birth_proposed", &MoveCounters::birth_proposed)
      .def_readonly("birth_accepted", &MoveCounters::birth_accepted)
      .def_readonly("death_proposed", &MoveCounters::death_proposed)
      .def_readonly("death_accepted", &MoveCounters::death_accepted)
      .def_readonly("update_proposed", &MoveCounters::update_proposed)
      .def_readonly("update_accepted", &MoveCounters::update_accepted)
      .def_readonly("amp_var_proposed", &MoveCounters::amp_var_proposed)
      .def_readonly("amp_var_accepted", &MoveCounters::amp_var_accepted)
      .def_readonly("scale_proposed", &MoveCounters::scale_proposed)
      .def_readonly("scale_accepted", &MoveCounters::scale_accepted);

  py::class_<ThetaSample>(m, "ThetaSample")
      .def_readonly("bern_prob", &ThetaSample::bern_prob)
      .def_readonly("noise_var", &ThetaSample::noise_var)
      .def_readonly("amp_var", &ThetaSample::amp_var)
      .def_readonly("ir_scale", &ThetaSample::ir_scale);

  py::class_<ChainStore>(m, "ChainStore")
      .def_readonly("kind", &ChainStore::kind)
      .def_readonly("seed", &ChainStore::seed)
      .def_readonly("site_count", &ChainStore::site_count)
      .def_readonly("burn_in", &ChainStore::burn_in)
      .def_readonly("thin", &ChainStore::thin)
      .def_readonly("q_hist", &ChainStore::q_hist)
      .def_readonly("x_hist", &ChainStore::x_hist)
      .def_readonly("x_iters", &ChainStore::x_iters)
      .def_readonly("theta_hist", &ChainStore::theta_hist)
      .def_readonly("counters", &ChainStore::counters)
      .def_readonly("pm_x", &ChainStore::pm_x)
      .def_readonly("pm_count", &ChainStore::pm_count)
      .def_readonly("final_hp", &ChainStore::final_hp);

  m.def("cold_state", &cold_state, py::arg("obs"), py::arg("hp"),
        "empty support, zero amplitudes");
  m.def(
      "random_state",
      [](const Observation& obs, const Hyperparams& hp, const GhParams& nu,
         double inclusion, std::uint64_t seed) {
        RandomStream rng(seed);
        return random_state(obs, hp, nu, inclusion, rng);
      },
      py::arg("obs"), py::arg("hp"), py::arg("nu"), py::arg("inclusion"),
      py::arg("seed"), "over-dispersed start for convergence monitoring");
  m.def("run_chain", &run_chain, py::arg("config"), py::arg("obs"),
        py::arg("init"), py::arg("hp"), py::arg("nu"),
        py::arg("kind") = SamplerKind::kBgh,
        py::call_guard<py::gil_scoped_release>(),
        "run one chain to completion; deterministic for a fixed seed");

  // ---- convergence diagnostics ----
  py::class_<TracePoint>(m, "TracePoint")
      .def_readonly("length", &TracePoint::length)
      .def_readonly("r", &TracePoint::r);

  py::class_<PosteriorSummary>(m, "PosteriorSummary")
      .def_readonly("mean_x", &PosteriorSummary::mean_x)
      .def_readonly("inclusion", &PosteriorSummary::inclusion);

  m.def("intra_chain_cov", &intra_chain_cov, py::arg("chains"));
  m.def("inter_chain_cov", &inter_chain_cov, py::arg("chains"));
  m.def("mpsrf", &mpsrf, py::arg("chains"),
        "multivariate potential scale reduction factor");
  m.def("mpsrf_trace", &mpsrf_trace, py::arg("chains"), py::arg("batch"));
  m.def("convergence_iteration", &convergence_iteration, py::arg("trace"),
        py::arg("threshold"),
        "first trace length that stays below the threshold, or None");
  m.def("posterior_mean", &posterior_mean, py::arg("chain"),
        py::arg("burn_in"));
  m.def("q_monitors", &q_monitors, py::arg("chains"),
        "support trajectories as diagnostic monitor chains");

  // ---- synthetic scenarios ----
  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("signal_length", &Scenario::signal_length)
      .def_readwrite("ir_length", &Scenario::ir_length)
      .def_readwrite("ir_scale", &Scenario::ir_scale)
      .def_readwrite("spike_count", &Scenario::spike_count)
      .def_readwrite("amp_var", &Scenario::amp_var)
      .def_readwrite("enforce_snr", &Scenario::enforce_snr)
      .def_readwrite("snr_db", &Scenario::snr_db)
      .def_readwrite("noise_var", &Scenario::noise_var)
      .def_readwrite("seed", &Scenario::seed)
      .def("site_count", &Scenario::site_count);

  py::class_<GeneratedScenario>(m, "GeneratedScenario")
      .def_readonly("obs", &GeneratedScenario::obs)
      .def_readonly("truth", &GeneratedScenario::truth)
      .def_readonly("hp", &GeneratedScenario::hp)
      .def_readonly("snr_db", &GeneratedScenario::snr_db)
      .def_readonly("clean_power", &GeneratedScenario::clean_power);

  py::class_<ReconstructionMetrics>(m, "ReconstructionMetrics")
      .def_readonly("rmse", &ReconstructionMetrics::rmse)
      .def_readonly("precision", &ReconstructionMetrics::precision)
      .def_readonly("recall", &ReconstructionMetrics::recall)
      .def_readonly("detected", &ReconstructionMetrics::detected);

  m.def(
      "generate_scenario",
      [](const Scenario& sc) { return generate_scenario(sc); },
      py::arg("scenario"), "deterministic: seeded from the scenario itself");
  m.def("reconstruction_metrics", &reconstruction_metrics, py::arg("mean_x"),
        py::arg("inclusion"), py::arg("truth"), py::arg("tolerance_shift"),
        "support/amplitude quality of a posterior summary against the truth");
}
