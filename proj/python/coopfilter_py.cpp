#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "coopfilter/analysis.hpp"
#include "coopfilter/cofilter.hpp"
#include "coopfilter/errors.hpp"
#include "coopfilter/model.hpp"
#include "coopfilter/predictors.hpp"
#include "coopfilter/riccati.hpp"
#include "coopfilter/simulate.hpp"

namespace py = pybind11;
using namespace coopfilter;

namespace {

PredictorState build_predictor(const SystemModel& model, PredictorKind kind,
                               int d) {
  const AugmentedModel aug = augment(model);
  switch (kind) {
    case PredictorKind::local:
      return make_local_predictor(
          model, solve_dare(model.A, model.C, model.Q, model.R));
    case PredictorKind::centralized:
      return make_centralized_predictor(
          model, solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar));
    case PredictorKind::delayed:
    default:
      return make_delayed_predictor(
          model, solve_dare(model.A, aug.C_bar, model.Q, aug.R_bar),
          delayed_chain(model, d));
  }
}

}  // namespace

PYBIND11_MODULE(_coopfilter, mod) {
  mod.doc() =
      "Cooperative output prediction with asynchronously delayed external "
      "observations: steady filters, delay-parameterized Riccati chains, the "
      "online doubling-epoch learner, and diagnostic checks.";

  py::register_exception<UsageError>(mod, "UsageError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError",
                                       PyExc_ArithmeticError);
  py::register_exception<InvariantError>(mod, "InvariantError",
                                         PyExc_RuntimeError);

  py::class_<SystemModel>(mod, "SystemModel")
      .def(py::init<>())
      .def_readwrite("A", &SystemModel::A)
      .def_readwrite("C", &SystemModel::C)
      .def_readwrite("C_e", &SystemModel::C_e)
      .def_readwrite("Q", &SystemModel::Q)
      .def_readwrite("R", &SystemModel::R)
      .def_readwrite("R_e", &SystemModel::R_e)
      .def_property_readonly("n", &SystemModel::n)
      .def_property_readonly("m", &SystemModel::m)
      .def_property_readonly("m_ext", &SystemModel::m_ext);

  py::class_<AugmentedModel>(mod, "AugmentedModel")
      .def_readonly("C_bar", &AugmentedModel::C_bar)
      .def_readonly("R_bar", &AugmentedModel::R_bar)
      .def_readonly("m_bar", &AugmentedModel::m_bar);

  py::class_<SpectralProfile>(mod, "SpectralProfile")
      .def_readonly("rho_A", &SpectralProfile::rho_A)
      .def_readonly("kappa", &SpectralProfile::kappa);

  py::class_<CheckResult>(mod, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("pass_", &CheckResult::pass)
      .def_readonly("warning", &CheckResult::warning)
      .def_readonly("detail", &CheckResult::detail);

  py::class_<ValidationReport>(mod, "ValidationReport")
      .def_readonly("checks", &ValidationReport::checks)
      .def("all_pass", &ValidationReport::all_pass)
      .def("summary", &ValidationReport::summary);

  py::class_<SteadyKalman>(mod, "SteadyKalman")
      .def_readonly("P", &SteadyKalman::P)
      .def_readonly("L", &SteadyKalman::L)
      .def_readonly("closed_loop", &SteadyKalman::closed_loop)
      .def_readonly("rho_cl", &SteadyKalman::rho_cl)
      .def_readonly("iterations", &SteadyKalman::iterations)
      .def_readonly("residual", &SteadyKalman::residual);

  py::class_<DelayChain>(mod, "DelayChain")
      .def_readonly("d", &DelayChain::d)
      .def_readonly("P_seq", &DelayChain::P_seq)
      .def_readonly("L_seq", &DelayChain::L_seq)
      .def_readonly("Phi_seq", &DelayChain::Phi_seq)
      .def_readonly("tau", &DelayChain::tau)
      .def_readonly("rho0", &DelayChain::rho0)
      .def_readonly("decay_available", &DelayChain::decay_available);

  py::class_<Trajectory>(mod, "Trajectory")
      .def(py::init<>())
      .def_readwrite("x", &Trajectory::x)
      .def_readwrite("y", &Trajectory::y)
      .def_readwrite("y_e", &Trajectory::y_e)
      .def_readwrite("seed", &Trajectory::seed)
      .def_readwrite("model_free_only", &Trajectory::model_free_only)
      .def("length", &Trajectory::length);

  py::enum_<PredictorKind>(mod, "PredictorKind")
      .value("local", PredictorKind::local)
      .value("centralized", PredictorKind::centralized)
      .value("delayed", PredictorKind::delayed);

  py::class_<ARCoefficients>(mod, "ARCoefficients")
      .def_readonly("G", &ARCoefficients::G)
      .def_readonly("p", &ARCoefficients::p)
      .def_readonly("d", &ARCoefficients::d);

  py::class_<WindowConfig>(mod, "WindowConfig")
      .def(py::init<>())
      .def_readwrite("beta", &WindowConfig::beta)
      .def_readwrite("d", &WindowConfig::d)
      .def_readwrite("lambda_", &WindowConfig::lambda)
      .def_readwrite("T_init", &WindowConfig::T_init)
      .def_readwrite("N_E", &WindowConfig::N_E);

  py::class_<TraceRow>(mod, "TraceRow")
      .def_readonly("k", &TraceRow::k)
      .def_readonly("epoch", &TraceRow::epoch)
      .def_readonly("p", &TraceRow::p)
      .def_readonly("member", &TraceRow::member)
      .def_readonly("y_true", &TraceRow::y_true)
      .def_readonly("y_pred", &TraceRow::y_pred)
      .def_readonly("sq_err", &TraceRow::sq_err);

  py::class_<PredictionTrace>(mod, "PredictionTrace")
      .def_readonly("rows", &PredictionTrace::rows)
      .def("to_csv", [](const PredictionTrace& trace) {
        std::ostringstream out;
        trace.write_csv(out);
        return out.str();
      });

  py::class_<CoFilterResult>(mod, "CoFilterResult")
      .def_readonly("trace", &CoFilterResult::trace)
      .def_readonly("gram_min_eigs", &CoFilterResult::gram_min_eigs)
      .def_readonly("member_sq_err_total", &CoFilterResult::member_sq_err_total)
      .def_readonly("warnings", &CoFilterResult::warnings);

  py::class_<RegretTrace>(mod, "RegretTrace")
      .def_readonly("steps", &RegretTrace::steps)
      .def_readonly("e_online", &RegretTrace::e_online)
      .def_readonly("e_delayed_opt", &RegretTrace::e_delayed_opt)
      .def_readonly("e_local_opt", &RegretTrace::e_local_opt)
      .def_readonly("R", &RegretTrace::R)
      .def_readonly("R_tilde", &RegretTrace::R_tilde);

  py::class_<Assumption3Report>(mod, "Assumption3Report")
      .def_readonly("A_invertible", &Assumption3Report::A_invertible)
      .def_readonly("cond_A", &Assumption3Report::cond_A)
      .def_readonly("common_stable_pair_found",
                    &Assumption3Report::common_stable_pair_found)
      .def_readonly("pass_", &Assumption3Report::pass);

  py::class_<ImprovementReport>(mod, "ImprovementReport")
      .def_readonly("d", &ImprovementReport::d)
      .def_readonly("P_local", &ImprovementReport::P_local)
      .def_readonly("P_centralized", &ImprovementReport::P_centralized)
      .def_readonly("P_chain_end", &ImprovementReport::P_chain_end)
      .def_readonly("trace_gap", &ImprovementReport::trace_gap)
      .def_readonly("assumption3", &ImprovementReport::assumption3)
      .def_readonly("strict", &ImprovementReport::strict);

  py::class_<OrthogonalityReport>(mod, "OrthogonalityReport")
      .def_readonly("d", &OrthogonalityReport::d)
      .def_readonly("trials", &OrthogonalityReport::trials)
      .def_readonly("length", &OrthogonalityReport::length)
      .def_readonly("seed", &OrthogonalityReport::seed)
      .def_readonly("offlag_z", &OrthogonalityReport::offlag_z)
      .def_readonly("max_offlag_z", &OrthogonalityReport::max_offlag_z)
      .def_readonly("lag0_cov", &OrthogonalityReport::lag0_cov)
      .def_readonly("expected_lag0", &OrthogonalityReport::expected_lag0)
      .def_readonly("variance_rel_err", &OrthogonalityReport::variance_rel_err);

  py::class_<PEReport>(mod, "PEReport")
      .def_readonly("min_ratio", &PEReport::min_ratio)
      .def_readonly("threshold", &PEReport::threshold)
      .def_readonly("pass_", &PEReport::pass)
      .def_readonly("samples_used", &PEReport::samples_used);

  mod.def("validate", &validate, py::arg("model"));
  mod.def("augment", &augment, py::arg("model"));
  mod.def("spectral_profile", &spectral_profile, py::arg("model"));
  mod.def("model_from_json_text",
          [](const std::string& text) {
            return model_from_json(nlohmann::json::parse(text));
          },
          py::arg("text"));

  mod.def("solve_dare", &solve_dare, py::arg("A"), py::arg("C"), py::arg("Q"),
          py::arg("R"));
  mod.def("ric_step", &ric_step, py::arg("A"), py::arg("C"), py::arg("Q"),
          py::arg("R"), py::arg("P"));
  mod.def("delayed_chain", &delayed_chain, py::arg("model"), py::arg("d"));

  mod.def("gen_trajectory",
          [](const SystemModel& model, int N, std::uint64_t seed) {
            return gen_trajectory(model, N, seed);
          },
          py::arg("model"), py::arg("N"), py::arg("seed"));
  mod.def("gen_consensus_system", &gen_consensus_system, py::arg("n"),
          py::arg("seed"));
  mod.def("load_trajectory_csv", &load_trajectory_csv, py::arg("path"),
          py::arg("sigma"), py::arg("seed"));

  mod.def("run_predictor",
          [](const SystemModel& model, const Trajectory& traj,
             PredictorKind kind, int d) {
            return run_predictor(build_predictor(model, kind, d), traj);
          },
          py::arg("model"), py::arg("traj"), py::arg("kind"), py::arg("d") = 0);
  mod.def("innovations", &innovations, py::arg("model"), py::arg("traj"),
          py::arg("kind"), py::arg("d"));
  mod.def("build_ar_coefficients",
          [](const SystemModel& model, int d, int p) {
            return build_ar_coefficients(model, delayed_chain(model, d), p);
          },
          py::arg("model"), py::arg("d"), py::arg("p"));

  mod.def("past_horizon", &past_horizon, py::arg("beta"), py::arg("T"));
  mod.def("epoch_start", &epoch_start, py::arg("T_init"), py::arg("l"));
  mod.def("run_cofilter",
          [](const Trajectory& traj, const WindowConfig& cfg) {
            ObservationStream s = stream(traj, cfg.d);
            return run_cofilter(s, cfg);
          },
          py::arg("traj"), py::arg("cfg"));
  mod.def("run_ensemble",
          [](const Trajectory& traj, const std::vector<WindowConfig>& cfgs) {
            if (cfgs.empty()) {
              throw UsageError("at least one learner config required");
            }
            ObservationStream s = stream(traj, cfgs.front().d);
            return run_ensemble(s, cfgs);
          },
          py::arg("traj"), py::arg("cfgs"));

  mod.def("squared_errors", &squared_errors, py::arg("yhat"), py::arg("y"));
  mod.def("regret", &regret, py::arg("online"), py::arg("e_delayed_by_step"),
          py::arg("e_local_by_step"));
  mod.def("check_improvement", &check_improvement, py::arg("model"),
          py::arg("d"));
  mod.def("check_orthogonality", &check_orthogonality, py::arg("model"),
          py::arg("d"), py::arg("trials"), py::arg("length"), py::arg("seed"));
  mod.def("check_persistent_excitation", &check_persistent_excitation,
          py::arg("vmin_by_step"), py::arg("sigma_min_rbar"),
          py::arg("first_epoch_end"));
  mod.def("ar_identity_residual", &ar_identity_residual, py::arg("model"),
          py::arg("traj"), py::arg("d"), py::arg("p"));
}
