#include "choquard/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "choquard/error.hpp"

namespace choquard {

namespace {

bool is_zero_field(const GroundState& state) {
  const auto& v = state.field.values;
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_operator_input(const GroundState& state, int ell) {
  require(state.field.grid != nullptr, "state needs a grid");
  if (ell != 0 && ell != 1) fail(ErrorCode::unsupported, "only sectors ell = 0 and ell = 1 are supported");
  if (!state.converged && !is_zero_field(state)) fail(ErrorCode::invalid_argument, "L+ needs a converged state");
}

}  // namespace

SectorOperator assemble_lplus(const GroundState& state, int ell, KernelMethod method) {
  check_operator_input(state, ell);
  SectorOperator op;
  op.ell = ell;
  op.params = state.params;
  op.model = state.model;
  op.grid = state.field.grid;

  const auto& q = state.field.values;
  const double p = state.params.p;
  std::vector<double> v(q.size(), 0.0);
  if (!is_zero_field(state)) {
    if (state.model) {
      for (std::size_t i = 0; i < q.size(); ++i) v[i] = p * std::pow(std::abs(q[i]), p - 1.0);
    } else {
      const auto pot = choquard_potential(state.params, state.field, method);
      for (std::size_t i = 0; i < q.size(); ++i) v[i] = q[i] == 0.0 ? 0.0 : pot[i] * std::pow(std::abs(q[i]), p - 2.0);
    }
  }
  op.potential_V = RadialField(op.grid, std::move(v));

  const Eigen::MatrixXd a = lplus_matrix(state, ell, method);
  const auto m = op.grid->masses(sector_parity(ell));
  Eigen::VectorXd root(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) root[static_cast<Eigen::Index>(i)] = std::sqrt(m[i]);
  Eigen::MatrixXd s = root.asDiagonal() * a * root.cwiseInverse().asDiagonal();
  const double scale = s.cwiseAbs().maxCoeff();
  op.asymmetry = scale > 0.0 ? (s - s.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  op.matrix = 0.5 * (s + s.transpose());
  return op;
}

std::vector<double> apply_lplus(const GroundState& state, int ell, std::span<const double> f, KernelMethod method) {
  require(state.field.grid != nullptr, "state needs a grid");
  if (f.size() != state.field.grid->size()) fail(ErrorCode::grid_mismatch, "profile length differs from grid size");
  const Eigen::MatrixXd a = lplus_matrix(state, ell, method);
  const Eigen::VectorXd out = a * Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  return {out.data(), out.data() + out.size()};
}

std::vector<Eigenpair> eig_smallest(const SectorOperator& op, int k) {
  require(k >= 1 && k <= 10, "k must lie in [1, 10]");
  const auto n = op.matrix.rows();
  require(n >= k, "operator smaller than k");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
  if (es.info() != Eigen::Success) {
    const double norm = op.matrix.norm();
    fail(ErrorCode::numerical, "eigensolver failed (Frobenius norm " + std::to_string(norm) + ", size " +
                                   std::to_string(n) + ")");
  }
  const auto m = op.grid->masses(sector_parity(op.ell));
  const double area = op.grid->sphere_area();
  std::vector<Eigenpair> out;
  for (int j = 0; j < k; ++j) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      v[u] = es.eigenvectors()(i, j) / std::sqrt(m[u]);
      norm += m[u] * v[u] * v[u];
    }
    const double c = 1.0 / std::sqrt(area * norm);
    const auto peak = std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    const double sign = *peak < 0.0 ? -c : c;
    for (double& x : v) x *= sign;
    out.push_back({es.eigenvalues()[j], RadialField(op.grid, std::move(v))});
  }
  return out;
}

NondegeneracyReport nondegeneracy_verdict(const GroundState& state, double gap_tol, int k, KernelMethod method) {
  require(gap_tol > 0.0, "gap_tol must be positive");
  NondegeneracyReport rep;
  const auto e0 = eig_smallest(assemble_lplus(state, 0, method), k);
  const auto e1 = eig_smallest(assemble_lplus(state, 1, method), k);
  const auto nearest = [](const std::vector<Eigenpair>& e) {
    return std::min_element(e.begin(), e.end(), [](const Eigenpair& a, const Eigenpair& b) {
      return std::abs(a.value) < std::abs(b.value);
    });
  };

  for (const auto& e : e0) {
    rep.eigenvalues_ell0.push_back(e.value);
    if (e.value < 0.0) ++rep.negative_count_ell0;
  }
  for (const auto& e : e1) rep.eigenvalues_ell1.push_back(e.value);
  rep.nearest_zero_ell0 = nearest(e0)->value;
  rep.radial_kernel_trivial = std::abs(rep.nearest_zero_ell0) >= gap_tol;

  const auto t = nearest(e1);
  rep.nearest_zero_ell1 = t->value;
  const auto dq = radial_derivative(state.field).values;
  const auto m = state.field.grid->masses(Parity::odd);
  double vq = 0.0, vv = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < dq.size(); ++i) {
    const double v = t->field.values[i];
    vq += m[i] * v * dq[i];
    vv += m[i] * v * v;
    qq += m[i] * dq[i] * dq[i];
  }
  rep.translation_correlation = vv > 0.0 && qq > 0.0 ? std::abs(vq) / std::sqrt(vv * qq) : 0.0;
  rep.translation_mode_found = std::abs(rep.nearest_zero_ell1) < gap_tol && rep.translation_correlation > 0.99;
  return rep;
}

}  // namespace choquard
