#include "tvesim/lifting.hpp"

#include <cmath>
#include <stdexcept>

namespace tvesim {

namespace {

// integral of g(., t)^2 along the boundary with the edge Gauss rule
double boundary_sq(const Mesh& mesh, const BoundaryFn& g, double t) {
  const EdgeRule er = edge_rule();
  double s = 0.0;
  for (const auto& be : mesh.bedges) {
    const auto& a = mesh.nodes[static_cast<std::size_t>(be.n0)];
    const auto& b = mesh.nodes[static_cast<std::size_t>(be.n1)];
    for (int q = 0; q < 2; ++q) {
      const double x = a[0] + (b[0] - a[0]) * er.s[static_cast<std::size_t>(q)];
      const double y = a[1] + (b[1] - a[1]) * er.s[static_cast<std::size_t>(q)];
      const double v = g(x, y, t);
      s += er.w[static_cast<std::size_t>(q)] * be.length * v * v;
    }
  }
  return s;
}

double lumped_l1(const Eigen::VectorXd& lumped, const Eigen::VectorXd& v) {
  return lumped.cwiseProduct(v.cwiseAbs()).sum();
}

}  // namespace

ElasticLiftingSolver::ElasticLiftingSolver(const Mesh& mesh, const MaterialField& mat,
                                           const TriangleRule& rule)
    : mesh_(mesh), mat_(mat), rule_(rule) {
  map_ = interior_vector_map(mesh);
  if (map_.n_red == 0) throw std::invalid_argument("elastic lifting needs interior nodes");
  k_full_ = stiffness_elastic(mesh, mat, rule);
  m_full_ = mass_vector(mesh);
  ldlt_.compute(restrict_matrix(k_full_, map_));
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("elastic lifting stiffness failed to factorize");
}

LiftingElastic ElasticLiftingSolver::solve(const Eigen::VectorXd& f,
                                           const Eigen::VectorXd& g) const {
  const int n_dof = 2 * mesh_.n_nodes();
  if (f.size() != n_dof || g.size() != n_dof)
    throw std::invalid_argument("elastic lifting data has the wrong size");

  const Eigen::VectorXd b = m_full_ * f - k_full_ * g;
  const Eigen::VectorXd u1 = ldlt_.solve(restrict_vector(b, map_));
  if (ldlt_.info() != Eigen::Success) throw std::runtime_error("elastic lifting solve failed");

  LiftingElastic out;
  out.u = prolong_vector(u1, map_) + g;

  const int ne = mesh_.n_elems();
  out.strain.resize(static_cast<std::size_t>(ne));
  out.stress.resize(static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e) {
    const SymTensor3 eps = element_strain(mesh_, e, out.u);
    out.strain[static_cast<std::size_t>(e)] = eps;
    auto& row = out.stress[static_cast<std::size_t>(e)];
    row.resize(rule_.n);
    for (std::size_t q = 0; q < rule_.n; ++q) {
      const auto& p = rule_.pts[q];
      row[q] = mat_.at(mesh_, e, p.l1, p.l2).apply(eps);
      out.stress_max = std::max(out.stress_max, tnorm(row[q]));
    }
  }

  const double fn = std::sqrt(f.dot(m_full_ * f));
  const double gn = std::sqrt(g.dot(m_full_ * g) + g.dot(k_full_ * g));
  const double data = fn + gn;
  out.stability = data > 0.0 ? out.stress_max / data : 0.0;
  return out;
}

LiftingElastic solve_static_elastic(const Mesh& mesh, const MaterialField& mat,
                                    const TriangleRule& rule, const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& g) {
  return ElasticLiftingSolver(mesh, mat, rule).solve(f, g);
}

ElasticLifting::ElasticLifting(const Mesh& mesh, const MaterialField& mat,
                               const TriangleRule& rule, std::array<Expression, 2> f,
                               std::array<Expression, 2> g)
    : mesh_(mesh), solver_(mesh, mat, rule), f_(std::move(f)), g_(std::move(g)) {
  for (const auto& e : f_) time_dep_ = time_dep_ || e.uses(ExprVar::t);
  for (const auto& e : g_) time_dep_ = time_dep_ || e.uses(ExprVar::t);
}

const LiftingElastic& ElasticLifting::at(double t) const {
  const double key = time_dep_ ? t : 0.0;
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  const int nn = mesh_.n_nodes();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * nn);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * nn);
  for (int i = 0; i < nn; ++i) {
    EvalContext ctx;
    ctx.x = mesh_.nodes[static_cast<std::size_t>(i)][0];
    ctx.y = mesh_.nodes[static_cast<std::size_t>(i)][1];
    ctx.t = key;
    for (int d = 0; d < 2; ++d) {
      const auto& fe = f_[static_cast<std::size_t>(d)];
      const auto& ge = g_[static_cast<std::size_t>(d)];
      if (!fe.empty()) f[2 * i + d] = fe.eval(ctx);
      if (!ge.empty()) g[2 * i + d] = ge.eval(ctx);
    }
  }
  return cache_.emplace(key, solver_.solve(f, g)).first->second;
}

Eigen::VectorXd LiftingHeat::at_time(double t) const {
  if (theta.empty()) throw std::logic_error("empty heat lifting trajectory");
  if (t <= times.front()) return theta.front();
  if (t >= times.back()) return theta.back();
  const auto n = static_cast<std::size_t>((t - times.front()) / dt);
  const std::size_t lo = std::min(n, theta.size() - 2);
  const double w = (t - times[lo]) / dt;
  return (1.0 - w) * theta[lo] + w * theta[lo + 1];
}

LiftingHeat solve_lifting_heat(const Mesh& mesh, const BoundaryFn& g_theta,
                               const Eigen::VectorXd& theta0, double t_final, int steps) {
  if (theta0.size() != mesh.n_nodes())
    throw std::invalid_argument("heat lifting initial data has the wrong size");
  if (!(t_final > 0.0) || steps < 1)
    throw std::invalid_argument("heat lifting needs a positive time grid");

  const SpMat m = mass_scalar(mesh);
  const SpMat k = stiffness_scalar(mesh);
  const double dt = t_final / steps;
  Eigen::SimplicialLDLT<SpMat> ldlt(SpMat(m + dt * k));
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("heat lifting operator failed to factorize");

  const Eigen::VectorXd lumped = lumped_mass_scalar(mesh);

  LiftingHeat out;
  out.dt = dt;
  out.times.resize(static_cast<std::size_t>(steps) + 1);
  out.theta.resize(static_cast<std::size_t>(steps) + 1);
  out.theta[0] = theta0;
  out.times[0] = 0.0;
  out.sup_l1 = lumped_l1(lumped, theta0);

  double st_sq = 0.0;
  double g_sq = 0.0;
  for (int n = 1; n <= steps; ++n) {
    const double t = dt * n;
    Eigen::VectorXd rhs = m * out.theta[static_cast<std::size_t>(n) - 1];
    if (g_theta) {
      rhs += dt * boundary_flux_load(mesh, [&](double x, double y) { return g_theta(x, y, t); });
      g_sq += dt * boundary_sq(mesh, g_theta, t);
    }
    Eigen::VectorXd th = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("heat lifting step failed");
    out.sup_l1 = std::max(out.sup_l1, lumped_l1(lumped, th));
    st_sq += dt * (th.dot(m * th) + th.dot(k * th));
    out.times[static_cast<std::size_t>(n)] = t;
    out.theta[static_cast<std::size_t>(n)] = std::move(th);
  }

  out.space_time_norm = std::sqrt(st_sq);
  out.data_norm = std::sqrt(g_sq) + std::sqrt(theta0.dot(m * theta0));
  out.stability =
      out.data_norm > 0.0 ? (out.sup_l1 + out.space_time_norm) / out.data_norm : 0.0;
  return out;
}

LiftingHeat solve_lifting_heat(const Mesh& mesh, const Expression& g_theta,
                               const Eigen::VectorXd& theta0, double t_final, int steps) {
  BoundaryFn fn;
  if (!g_theta.empty())
    fn = [&g_theta](double x, double y, double t) {
      EvalContext ctx;
      ctx.x = x;
      ctx.y = y;
      ctx.t = t;
      return g_theta.eval(ctx);
    };
  return solve_lifting_heat(mesh, fn, theta0, t_final, steps);
}

}  // namespace tvesim
