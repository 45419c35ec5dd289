#include "chstab/io.hpp"

#include <cmath>
#include <cstdio>

namespace chstab {

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const PhysParams& p) {
  return Json{{"nu", p.nu},         {"l0", p.l0},       {"gamma0", p.gamma0},
              {"fbar", p.fbar},     {"alpha0", p.alpha0}, {"gamma", p.gamma},
              {"l", p.l},           {"f_l", p.f_l},     {"lambda_bar", lambda_bar(p)}};
}

Json to_json(const ModeSet& modes) {
  Json list = Json::array();
  for (const Mode& m : modes) {
    Json e{{"m", m.m}};
    if (modes.domain().dimension() == 2) e["n"] = m.n;
    e["mu"] = m.mu;
    e["norm_const"] = m.norm_const;
    if (m.degenerate) e["degenerate"] = true;
    list.push_back(std::move(e));
  }
  return list;
}

Json to_json(const UnstableBasis& basis) {
  Json entries = Json::array();
  for (const UnstableEntry& e : basis.entries) {
    entries.push_back(Json{{"lambda", e.lambda},
                           {"kind", to_string(e.kind)},
                           {"mode", e.mode},
                           {"coeff_phi", e.coeff_phi},
                           {"coeff_psi", e.coeff_psi}});
  }
  return Json{{"n", basis.size()}, {"entries", std::move(entries)}, {"warnings", basis.warnings}};
}

Json to_json(const AssumptionReport& r) {
  Json h1{{"ok", r.h1_ok}};
  if (std::isfinite(r.h1_min_gap)) {
    h1["min_gap"] = r.h1_min_gap;
  } else {
    h1["min_gap"] = nullptr;
  }
  return Json{{"ok", r.ok()},
              {"h0", {{"ok", r.h0_ok},
                      {"lambda_bar", r.lambda_bar},
                      {"nearest_distance", r.h0_nearest_distance},
                      {"nearest_mode", r.h0_nearest_mode}}},
              {"h1", std::move(h1)},
              {"traces", {{"ok", r.traces_ok}, {"sup", r.trace_sup}}},
              {"necessary_condition", r.necessary_condition}};
}

Json to_json(const FeedbackLaw& law) {
  Json traces = Json::array();
  for (const TraceRep& t : law.psi_traces) traces.push_back(Json{{"mode", t.mode}, {"coeff", t.coeff}});
  return Json{{"n", law.n},
              {"convention", {{"name", law.convention.name()},
                              {"alpha0_factor", law.convention.alpha0_factor()},
                              {"shifted_gain", law.convention.shifted_gain()},
                              {"sign", law.convention.sign}}},
              {"alpha0", law.alpha0},
              {"delta", law.delta},
              {"eta_ladder", law.ladder.values},
              {"eta_retries", law.eta_retries},
              {"worst_lift_condition", law.worst_lift_condition},
              {"lambdas", to_json(law.lambdas)},
              {"shifted_lambdas", to_json(law.shifted)},
              {"lambda_s", to_json(law.lambda_s)},
              {"gram", to_json(law.gram)},
              {"coupler_sum", to_json(law.coupler_sum)},
              {"coupler", to_json(law.coupler)},
              {"coupler_condition", law.coupler_condition},
              {"psi_traces", std::move(traces)}};
}

Json to_json(const SpectralReport& r) {
  Json list = Json::array();
  for (const SpectralEntry& e : r.eigenvalues) {
    list.push_back(Json{{"re", e.value.real()}, {"im", e.value.imag()}, {"class", to_string(e.cls)}});
  }
  return Json{{"counts", {{"unstable", r.n_unstable}, {"neutral", r.n_neutral}, {"stable", r.n_stable}}},
              {"tolerance", r.tolerance},
              {"matrix_norm", r.matrix_norm},
              {"abscissa", r.abscissa},
              {"eigenvalues", std::move(list)}};
}

Json to_json(const DecayFit& fit) {
  return Json{{"c1", fit.c1},
              {"c2", fit.c2},
              {"r_squared", fit.r_squared},
              {"window", {fit.window.t0, fit.window.t1}},
              {"samples", fit.samples}};
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  const Eigen::Index n = trajectory.weights.empty() ? 0 : trajectory.weights.front().size();
  os << "t,y_norm,z_norm,norm";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",w" << i;
  os << '\n';
  for (int s = 0; s < trajectory.size(); ++s) {
    const auto k = static_cast<size_t>(s);
    os << format_number(trajectory.times[k]) << ',' << format_number(trajectory.y_norm[k]) << ','
       << format_number(trajectory.z_norm[k]) << ',' << format_number(trajectory.norm[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_number(trajectory.weights[k](i));
    os << '\n';
  }
}

}  // namespace chstab
