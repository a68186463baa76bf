#include "coopfilter/cofilter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "coopfilter/errors.hpp"
#include "coopfilter/linalg.hpp"

namespace coopfilter {

namespace {

constexpr int kRefactorPeriod = 512;
constexpr int kGramSampleStride = 16;

void format_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

struct Member {
  WindowConfig cfg;
  OnlineState state;
  bool active = true;
  double cum_err = 0.0;
  int p = 0;
};

}  // namespace

int past_horizon(double beta, int T) {
  if (beta <= 0.0) throw UsageError("beta must be positive");
  if (T < 1) throw UsageError("epoch length must be positive");
  const int p = static_cast<int>(std::ceil(beta * std::log(static_cast<double>(T))));
  return std::max(1, p);
}

long long epoch_start(int T_init, int l) {
  return (1LL << (l - 1)) * static_cast<long long>(T_init) + 1;
}

Regressor make_regressor(const ObservationStream& s, int k, int p, int d) {
  if (p < 1) throw UsageError("past horizon p must be at least 1");
  if (k < p + d) {
    throw UsageError("regressor for index " + std::to_string(k) +
                     " needs history of length p+d=" + std::to_string(p + d));
  }
  const int m = static_cast<int>(s.local(0).size());
  const int m_bar = static_cast<int>(s.fused(0).size());
  Regressor reg;
  reg.k = k;
  reg.z.resize(m * d + m_bar * p);
  int offset = 0;
  for (int j = 1; j <= d; ++j) {
    reg.z.segment(offset, m) = s.local(k - j);
    offset += m;
  }
  for (int j = 1; j <= p; ++j) {
    reg.z.segment(offset, m_bar) = s.fused(k - d - j);
    offset += m_bar;
  }
  return reg;
}

OnlineState batch_fit(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& rows,
    double lambda) {
  if (lambda <= 0.0) throw UsageError("ridge weight lambda must be positive");
  if (rows.empty()) throw UsageError("batch fit needs at least one row");
  const auto dim = rows.front().first.size();
  const auto m = rows.front().second.size();

  OnlineState state;
  state.V = lambda * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd yz = Eigen::MatrixXd::Zero(m, dim);
  for (const auto& [z, y] : rows) {
    if (z.size() != dim || y.size() != m) {
      throw UsageError("inconsistent row dimensions in batch fit");
    }
    state.V.noalias() += z * z.transpose();
    yz.noalias() += y * z.transpose();
  }
  state.V = linalg::symmetrize(state.V);
  Eigen::LLT<Eigen::MatrixXd> llt(state.V);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Gram matrix factorization failed in batch fit");
  }
  state.G_tilde = llt.solve(yz.transpose()).transpose();
  state.V_inv = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  state.step = static_cast<int>(rows.size());
  return state;
}

Eigen::VectorXd predict(const OnlineState& state, const Regressor& reg) {
  if (reg.z.size() != state.G_tilde.cols()) {
    throw UsageError("regressor length " + std::to_string(reg.z.size()) +
                     " does not match coefficient width " +
                     std::to_string(state.G_tilde.cols()));
  }
  return state.G_tilde * reg.z;
}

void online_update(OnlineState& state, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& y_observed,
                   const Eigen::VectorXd& y_predicted) {
  if (z.size() != state.V.rows()) {
    throw UsageError("regressor length does not match Gram matrix");
  }
  state.V.noalias() += z * z.transpose();
  const Eigen::VectorXd w = state.V_inv * z;
  state.V_inv.noalias() -= w * w.transpose() / (1.0 + z.dot(w));
  ++state.refactor_counter;
  if (state.refactor_counter >= kRefactorPeriod) {
    state.V_inv = linalg::spd_inverse(linalg::symmetrize(state.V),
                                      "Gram matrix refactorization");
    state.refactor_counter = 0;
  }
  state.G_tilde.noalias() +=
      (y_observed - y_predicted) * (state.V_inv * z).transpose();
  ++state.step;
}

void PredictionTrace::write_csv(std::ostream& out) const {
  if (rows.empty()) {
    out << "k,epoch,p,member,sq_err\n";
    return;
  }
  const auto m = rows.front().y_true.size();
  out << "k,epoch,p,member";
  for (Eigen::Index i = 0; i < m; ++i) out << ",y_true_" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",y_pred_" << i;
  out << ",sq_err\n";
  for (const auto& row : rows) {
    out << row.k << ',' << row.epoch << ',' << row.p << ',' << row.member;
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      format_double(out, row.y_true(i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      format_double(out, row.y_pred(i));
    }
    out << ',';
    format_double(out, row.sq_err);
    out << '\n';
  }
}

namespace {

CoFilterResult run_epochs(ObservationStream& s,
                          const std::vector<WindowConfig>& cfgs, bool strict) {
  if (cfgs.empty()) throw UsageError("at least one learner config required");
  const WindowConfig& shared = cfgs.front();
  for (const auto& cfg : cfgs) {
    if (cfg.d != shared.d || cfg.lambda != shared.lambda ||
        cfg.T_init != shared.T_init || cfg.N_E != shared.N_E) {
      throw UsageError(
          "ensemble members must share d, lambda, T_init and N_E");
    }
    if (cfg.T_init < 1) throw UsageError("T_init must be positive");
    if (cfg.N_E < 1) throw UsageError("epoch count must be positive");
    if (cfg.d != s.delay()) {
      throw UsageError("config delay does not match the observation stream");
    }
  }

  std::vector<Member> members;
  members.reserve(cfgs.size());
  for (const auto& cfg : cfgs) members.push_back(Member{cfg, {}, true, 0.0, 0});

  CoFilterResult result;
  result.member_sq_err_total.assign(members.size(), 0.0);

  while (s.step() < shared.T_init) {
    if (!s.advance()) {
      throw NumericError("observation stream exhausted during warm-up");
    }
  }

  const int d = shared.d;
  for (int l = 1; l <= shared.N_E; ++l) {
    const long long T_l = epoch_start(shared.T_init, l);
    for (std::size_t i = 0; i < members.size(); ++i) {
      Member& mem = members[i];
      if (!mem.active) continue;
      mem.p = past_horizon(mem.cfg.beta, static_cast<int>(T_l));
      const long long first_row = mem.p + d;
      if (first_row > T_l - 1) {
        const std::string reason =
            "member " + std::to_string(i) + " (beta=" +
            std::to_string(mem.cfg.beta) + ") disabled at epoch " +
            std::to_string(l) + ": window p+d=" + std::to_string(first_row) +
            " exceeds available history " + std::to_string(T_l - 1);
        if (strict) throw NumericError(reason);
        mem.active = false;
        result.warnings.push_back(reason);
        continue;
      }
      std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> rows;
      rows.reserve(static_cast<std::size_t>(T_l - first_row));
      for (long long t = first_row; t <= T_l - 1; ++t) {
        rows.emplace_back(
            make_regressor(s, static_cast<int>(t), mem.p, d).z,
            s.local(static_cast<int>(t)));
      }
      mem.state = batch_fit(rows, mem.cfg.lambda);
      mem.state.epoch = l;
      mem.state.p = mem.p;
    }
    if (std::none_of(members.begin(), members.end(),
                     [](const Member& m) { return m.active; })) {
      throw NumericError("no active ensemble member left at epoch " +
                         std::to_string(l));
    }

    for (long long k = T_l; k <= 2 * T_l - 2; ++k) {
      std::vector<Eigen::VectorXd> zs(members.size());
      std::vector<Eigen::VectorXd> preds(members.size());
      int selected = -1;
      for (std::size_t i = 0; i < members.size(); ++i) {
        Member& mem = members[i];
        if (!mem.active) continue;
        const Regressor reg = make_regressor(s, static_cast<int>(k), mem.p, d);
        zs[i] = reg.z;
        preds[i] = predict(mem.state, reg);
        if (selected < 0 ||
            mem.cum_err < members[selected].cum_err) {
          selected = static_cast<int>(i);
        }
      }

      if (!s.advance()) {
        throw NumericError("observation stream exhausted in epoch " +
                           std::to_string(l) + " at step " + std::to_string(k));
      }
      const Eigen::VectorXd y = s.local(static_cast<int>(k));

      for (std::size_t i = 0; i < members.size(); ++i) {
        Member& mem = members[i];
        if (!mem.active) continue;
        const double err = (y - preds[i]).squaredNorm();
        mem.cum_err += err;
        online_update(mem.state, zs[i], y, preds[i]);
      }

      const Member& sel = members[selected];
      TraceRow row;
      row.k = static_cast<int>(k);
      row.epoch = l;
      row.p = sel.p;
      row.member = selected;
      row.y_true = y;
      row.y_pred = preds[selected];
      row.sq_err = (y - preds[selected]).squaredNorm();
      result.trace.rows.push_back(std::move(row));

      if (members.front().active &&
          ((k - T_l) % kGramSampleStride == 0 || k == 2 * T_l - 2)) {
        result.gram_min_eigs.emplace_back(
            static_cast<int>(k), linalg::min_eig_sym(members.front().state.V));
      }
    }
  }

  for (std::size_t i = 0; i < members.size(); ++i) {
    result.member_sq_err_total[i] = members[i].cum_err;
  }
  return result;
}

}  // namespace

CoFilterResult run_cofilter(ObservationStream& s, const WindowConfig& cfg) {
  return run_epochs(s, {cfg}, /*strict=*/true);
}

CoFilterResult run_ensemble(ObservationStream& s,
                            const std::vector<WindowConfig>& cfgs) {
  return run_epochs(s, cfgs, /*strict=*/false);
}

}  // namespace coopfilter
