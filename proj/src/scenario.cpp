#include "tvesim/scenario.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace tvesim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string parse_error_text(int line, int column, const std::string& message) {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << message;
  return os.str();
}

bool parse_number(const std::string& text, double* out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

// Collects typed values and every violation instead of stopping at the first.
struct Reader {
  const ConfigFile& cfg;
  std::vector<Violation>& sink;

  void flag(const std::string& section, const std::string& key, const std::string& message) {
    sink.push_back({section + "." + key, message});
  }

  const ConfigFile::Entry* entry(const std::string& section, const std::string& key) const {
    return cfg.find(section, key);
  }

  std::string word(const std::string& section, const std::string& key, const std::string& def) {
    const auto* e = entry(section, key);
    return e ? e->value : def;
  }

  double number(const std::string& section, const std::string& key, double def) {
    const auto* e = entry(section, key);
    if (!e) return def;
    double v = 0.0;
    if (!parse_number(e->value, &v)) {
      flag(section, key, "not a number: '" + e->value + "'");
      return def;
    }
    return v;
  }

  int integer(const std::string& section, const std::string& key, int def) {
    const double v = number(section, key, static_cast<double>(def));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      flag(section, key, "not an integer");
      return def;
    }
    return i;
  }

  std::vector<double> number_list(const std::string& section, const std::string& key,
                                  std::vector<double> def) {
    const auto* e = entry(section, key);
    if (!e) return def;
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double v = 0.0;
      if (!parse_number(item, &v)) {
        flag(section, key, "not a number list: '" + e->value + "'");
        return def;
      }
      out.push_back(v);
    }
    if (out.empty()) flag(section, key, "empty list");
    return out.empty() ? def : out;
  }

  Expression expr(const std::string& section, const std::string& key) {
    const auto* e = entry(section, key);
    if (!e || trim(e->value).empty()) return Expression{};
    try {
      return Expression::parse(e->value);
    } catch (const ExprError& err) {
      flag(section, key, std::string("expression does not parse: ") + err.what());
      return Expression{};
    }
  }

  std::array<Expression, 2> expr_pair(const std::string& section, const std::string& key) {
    const auto* e = entry(section, key);
    if (!e || trim(e->value).empty()) return {};
    try {
      auto parts = Expression::parse_components(e->value);
      if (parts.size() != 2) {
        flag(section, key, "expected two comma-separated components");
        return {};
      }
      return {parts[0], parts[1]};
    } catch (const ExprError& err) {
      flag(section, key, std::string("expression does not parse: ") + err.what());
      return {};
    }
  }
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"study", {"mode"}},
      {"mesh", {"lx", "ly", "nx", "ny"}},
      {"material", {"lambda", "mu"}},
      {"orlicz", {"p", "grid"}},
      {"constitutive", {"family", "p", "phi", "phi_lo", "phi_hi", "scale", "theta_probe"}},
      {"loads", {"f", "g", "g_theta"}},
      {"lifting", {"theta_shift0", "heat_steps"}},
      {"initial", {"theta0", "epsp_xx", "epsp_yy", "epsp_xy"}},
      {"discretization", {"k", "l", "trunc", "dt", "t_final", "output_stride", "vtk_stride"}},
      {"renormheat",
       {"amp", "x0", "y0", "a", "t_final", "steps", "eps", "tail_levels", "tail_band",
        "clamp_supports", "test_ix", "test_iy"}},
  };
  return s;
}

}  // namespace

ConfigParseError::ConfigParseError(int l, int c, const std::string& message)
    : std::runtime_error(parse_error_text(l, c, message)), line(l), column(c) {}

ScenarioError::ScenarioError(std::vector<Violation> v)
    : std::runtime_error([&v] {
        std::ostringstream os;
        os << "invalid scenario (" << v.size() << " violation" << (v.size() == 1 ? "" : "s")
           << ")";
        for (const auto& x : v) os << "\n  " << x.field << ": " << x.message;
        return os.str();
      }()),
      violations(std::move(v)) {}

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigParseError(lineno, static_cast<int>(line.size()), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigParseError(lineno, 2, "empty section name");
      cfg.data_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigParseError(lineno, 1, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigParseError(lineno, 1, "empty key");
    if (section.empty()) throw ConfigParseError(lineno, 1, "key before any [section]");
    auto& sec = cfg.data_[section];
    if (sec.count(key))
      throw ConfigParseError(lineno, 1, "duplicate key '" + key + "' in [" + section + "]");
    sec[key] = Entry{trim(line.substr(eq + 1)), lineno};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

Scenario parse_scenario(const std::string& text, const std::string& name) {
  const ConfigFile cfg = ConfigFile::parse(text);
  std::vector<Violation> violations;
  Reader rd{cfg, violations};

  for (const auto& [section, keys] : cfg.sections()) {
    const auto known = schema().find(section);
    if (known == schema().end()) {
      violations.push_back({section, "unknown section"});
      continue;
    }
    for (const auto& [key, e] : keys)
      if (!known->second.count(key))
        violations.push_back({section + "." + key, "unknown key (line " +
                                                       std::to_string(e.line) + ")"});
  }

  Scenario s;
  s.name = name;
  s.mode = rd.word("study", "mode", "run");
  if (s.mode != "run" && s.mode != "renormheat")
    rd.flag("study", "mode", "must be 'run' or 'renormheat', got '" + s.mode + "'");

  s.mesh.lx = rd.number("mesh", "lx", 1.0);
  s.mesh.ly = rd.number("mesh", "ly", 1.0);
  s.mesh.nx = rd.integer("mesh", "nx", 8);
  s.mesh.ny = rd.integer("mesh", "ny", 8);
  if (!(s.mesh.lx > 0.0)) rd.flag("mesh", "lx", "side length must be positive");
  if (!(s.mesh.ly > 0.0)) rd.flag("mesh", "ly", "side length must be positive");
  if (s.mesh.nx < 1) rd.flag("mesh", "nx", "cell count must be at least 1");
  if (s.mesh.ny < 1) rd.flag("mesh", "ny", "cell count must be at least 1");

  s.material.lambda = rd.expr("material", "lambda");
  s.material.mu = rd.expr("material", "mu");

  s.orlicz.p_text = trim(rd.word("orlicz", "p", "2"));
  s.orlicz.grid = rd.integer("orlicz", "grid", 2048);
  if (s.orlicz.grid < 8) rd.flag("orlicz", "grid", "radial grid needs at least 8 points");
  if (parse_number(s.orlicz.p_text, &s.orlicz.p_value)) {
    s.orlicz.constant_p = true;
    if (!(s.orlicz.p_value > 1.0))
      rd.flag("orlicz", "p", "growth exponent must exceed 1");
  } else {
    s.orlicz.constant_p = false;
    try {
      s.orlicz.p_field = Expression::parse(s.orlicz.p_text);
    } catch (const ExprError& err) {
      rd.flag("orlicz", "p", std::string("expression does not parse: ") + err.what());
    }
  }

  s.constitutive.family = rd.word("constitutive", "family", "power");
  if (s.constitutive.family != "power")
    rd.flag("constitutive", "family", "unknown family '" + s.constitutive.family + "'");
  s.constitutive.p_text = trim(rd.word("constitutive", "p", s.orlicz.p_text));
  s.constitutive.phi = rd.expr("constitutive", "phi");
  s.constitutive.phi_lo = rd.number("constitutive", "phi_lo", 1.0);
  s.constitutive.phi_hi = rd.number("constitutive", "phi_hi", 1.0);
  s.constitutive.scale = rd.number("constitutive", "scale", 1.0);
  s.constitutive.theta_probe = rd.number("constitutive", "theta_probe", 64.0);
  if (!(s.constitutive.phi_lo > 0.0))
    rd.flag("constitutive", "phi_lo", "temperature factor band must stay positive");
  if (!(s.constitutive.phi_hi >= s.constitutive.phi_lo))
    rd.flag("constitutive", "phi_hi", "band upper end below the lower end");
  if (!(s.constitutive.scale > 0.0)) rd.flag("constitutive", "scale", "scale must be positive");
  if (!(s.constitutive.theta_probe > 0.0))
    rd.flag("constitutive", "theta_probe", "probe range must be positive");

  // the flow family and the modular must share the exact growth exponent
  double pg = 0.0;
  double pm = 0.0;
  const bool both_const =
      parse_number(s.constitutive.p_text, &pg) && parse_number(s.orlicz.p_text, &pm);
  const bool match = both_const ? pg == pm : s.constitutive.p_text == s.orlicz.p_text;
  if (!match)
    rd.flag("constitutive", "p",
            "flow exponent '" + s.constitutive.p_text + "' does not match the growth exponent '" +
                s.orlicz.p_text + "'");

  s.loads.f = rd.expr_pair("loads", "f");
  s.loads.g = rd.expr_pair("loads", "g");
  s.loads.g_theta = rd.expr("loads", "g_theta");
  s.loads.theta_shift0 = rd.expr("lifting", "theta_shift0");
  s.loads.heat_steps = rd.integer("lifting", "heat_steps", 64);
  if (s.loads.heat_steps < 1) rd.flag("lifting", "heat_steps", "needs at least one step");

  s.initial.theta0 = rd.expr("initial", "theta0");
  s.initial.epsp_xx = rd.expr("initial", "epsp_xx");
  s.initial.epsp_yy = rd.expr("initial", "epsp_yy");
  s.initial.epsp_xy = rd.expr("initial", "epsp_xy");

  s.disc.k = rd.integer("discretization", "k", 4);
  s.disc.l = rd.integer("discretization", "l", 4);
  s.disc.trunc = rd.number("discretization", "trunc", 0.0);
  s.disc.dt = rd.number("discretization", "dt", 0.0);
  s.disc.t_final = rd.number("discretization", "t_final", 0.0);
  s.disc.output_stride = rd.integer("discretization", "output_stride", 1);
  s.disc.vtk_stride = rd.integer("discretization", "vtk_stride", 0);
  if (s.disc.k < 1) rd.flag("discretization", "k", "displacement level must be at least 1");
  if (s.disc.l < 1) rd.flag("discretization", "l", "temperature level must be at least 1");
  if (rd.entry("discretization", "trunc") && !(s.disc.trunc > 0.0))
    rd.flag("discretization", "trunc", "truncation level must be positive");
  if (s.disc.output_stride < 1) rd.flag("discretization", "output_stride", "must be at least 1");
  if (s.disc.vtk_stride < 0) rd.flag("discretization", "vtk_stride", "must be nonnegative");
  if (s.mode == "run") {
    if (!(s.disc.dt > 0.0)) rd.flag("discretization", "dt", "run mode needs a positive dt");
    if (!(s.disc.t_final > 0.0))
      rd.flag("discretization", "t_final", "run mode needs a positive horizon");
  }

  if (cfg.sections().count("renormheat")) {
    RenormSpec r;
    r.amp = rd.number("renormheat", "amp", r.amp);
    r.x0[0] = rd.number("renormheat", "x0", r.x0[0]);
    r.x0[1] = rd.number("renormheat", "y0", r.x0[1]);
    r.a = rd.number("renormheat", "a", r.a);
    r.t_final = rd.number("renormheat", "t_final", r.t_final);
    r.steps = rd.integer("renormheat", "steps", r.steps);
    r.eps = rd.number_list("renormheat", "eps", r.eps);
    r.tail_levels = rd.number_list("renormheat", "tail_levels", r.tail_levels);
    r.tail_band = rd.number("renormheat", "tail_band", r.tail_band);
    r.clamp_supports = rd.number_list("renormheat", "clamp_supports", r.clamp_supports);
    r.test_ix = rd.integer("renormheat", "test_ix", r.test_ix);
    r.test_iy = rd.integer("renormheat", "test_iy", r.test_iy);
    if (!(r.amp > 0.0)) rd.flag("renormheat", "amp", "amplitude must be positive");
    if (!(r.a >= 1.0 && r.a < 2.0))
      rd.flag("renormheat", "a", "singularity exponent must lie in [1, 2)");
    if (!(r.t_final > 0.0)) rd.flag("renormheat", "t_final", "needs a positive horizon");
    if (r.steps < 1) rd.flag("renormheat", "steps", "needs at least one step");
    for (std::size_t i = 0; i < r.eps.size(); ++i) {
      if (!(r.eps[i] > 0.0 && r.eps[i] <= 1.0))
        rd.flag("renormheat", "eps", "levels must lie in (0, 1]");
      if (i > 0 && !(r.eps[i] < r.eps[i - 1]))
        rd.flag("renormheat", "eps", "levels must decrease strictly");
    }
    for (std::size_t i = 0; i < r.tail_levels.size(); ++i) {
      if (!(r.tail_levels[i] > 0.0)) rd.flag("renormheat", "tail_levels", "levels must be positive");
      if (i > 0 && !(r.tail_levels[i] > r.tail_levels[i - 1]))
        rd.flag("renormheat", "tail_levels", "levels must increase strictly");
    }
    if (!(r.tail_band > 0.0)) rd.flag("renormheat", "tail_band", "band width must be positive");
    for (const double c : r.clamp_supports)
      if (!(c > 0.0)) rd.flag("renormheat", "clamp_supports", "supports must be positive");
    if (r.test_ix < 0 || r.test_iy < 0)
      rd.flag("renormheat", "test_ix", "polynomial degrees must be nonnegative");
    s.renorm = r;
  } else if (s.mode == "renormheat") {
    violations.push_back({"renormheat", "mode 'renormheat' needs a [renormheat] section"});
  }

  if (!violations.empty()) throw ScenarioError(std::move(violations));
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string base = path;
  const std::size_t slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return parse_scenario(ss.str(), base);
}

std::unique_ptr<Assembled> assemble(const Scenario& s, kernels::Exec exec) {
  auto a = std::make_unique<Assembled>();
  a->scn = s;
  a->mesh = build_mesh(s.mesh.lx, s.mesh.ly, s.mesh.nx, s.mesh.ny);
  const bool variable_material =
      (!s.material.lambda.empty() &&
       (s.material.lambda.uses(ExprVar::x) || s.material.lambda.uses(ExprVar::y))) ||
      (!s.material.mu.empty() &&
       (s.material.mu.uses(ExprVar::x) || s.material.mu.uses(ExprVar::y)));
  if (variable_material) {
    const int nn = a->mesh.n_nodes();
    std::vector<double> lam(static_cast<std::size_t>(nn), 1.0);
    std::vector<double> mu(static_cast<std::size_t>(nn), 1.0);
    for (int i = 0; i < nn; ++i) {
      EvalContext ctx;
      ctx.x = a->mesh.nodes[static_cast<std::size_t>(i)][0];
      ctx.y = a->mesh.nodes[static_cast<std::size_t>(i)][1];
      if (!s.material.lambda.empty()) lam[static_cast<std::size_t>(i)] = s.material.lambda.eval(ctx);
      if (!s.material.mu.empty()) mu[static_cast<std::size_t>(i)] = s.material.mu.eval(ctx);
    }
    a->mat = MaterialField::isotropic_nodal(std::move(lam), std::move(mu));
  } else {
    EvalContext ctx;
    const double lam = s.material.lambda.empty() ? 1.0 : s.material.lambda.eval(ctx);
    const double mu = s.material.mu.empty() ? 1.0 : s.material.mu.eval(ctx);
    a->mat = MaterialField::constant_isotropic(lam, mu);
  }
  a->rule = triangle_rule(2);
  a->temp = neumann_eigenbasis(a->mesh, s.disc.l);
  a->disp = elastostatic_eigenbasis(a->mesh, a->mat, a->rule, s.disc.k);
  const auto dint = integrated_moduli(a->mesh, a->mat, a->rule);
  a->comp = complement_basis(a->mesh, dint, a->disp, s.disc.l);

  RadialGrid grid;
  grid.n = s.orlicz.grid;
  a->m = s.orlicz.constant_p ? NFunction::power_constant(s.orlicz.p_value)
                             : NFunction::power(s.orlicz.p_field, s.mesh.lx, s.mesh.ly);
  a->ms = ComplementaryNFunction::of(a->m, grid);
  a->model = GModel::power_law(a->m, s.constitutive.phi, s.constitutive.phi_lo,
                               s.constitutive.phi_hi, s.constitutive.scale,
                               s.constitutive.theta_probe);

  a->elastic.emplace(a->mesh, a->mat, a->rule, s.loads.f, s.loads.g);

  const int nn = a->mesh.n_nodes();
  Eigen::VectorXd shift0 = Eigen::VectorXd::Zero(nn);
  if (!s.loads.theta_shift0.empty())
    for (int i = 0; i < nn; ++i) {
      EvalContext ctx;
      ctx.x = a->mesh.nodes[static_cast<std::size_t>(i)][0];
      ctx.y = a->mesh.nodes[static_cast<std::size_t>(i)][1];
      shift0[i] = s.loads.theta_shift0.eval(ctx);
    }
  const double horizon = std::max(s.disc.t_final, 1e-6);
  if (s.loads.g_theta.empty())
    a->heat = solve_lifting_heat(a->mesh, BoundaryFn{}, shift0, horizon, s.loads.heat_steps);
  else
    a->heat = solve_lifting_heat(a->mesh, s.loads.g_theta, shift0, horizon, s.loads.heat_steps);

  a->evo.emplace(a->mesh, a->mat, a->rule, a->temp, a->disp, a->comp, *a->elastic, a->heat,
                 a->model, a->m, a->ms, s.truncation(), exec);
  return a;
}

State Assembled::initial_state() const {
  const int nn = mesh.n_nodes();
  Eigen::VectorXd th0 = Eigen::VectorXd::Zero(nn);
  if (!scn.initial.theta0.empty())
    for (int i = 0; i < nn; ++i) {
      EvalContext ctx;
      ctx.x = mesh.nodes[static_cast<std::size_t>(i)][0];
      ctx.y = mesh.nodes[static_cast<std::size_t>(i)][1];
      th0[i] = scn.initial.theta0.eval(ctx);
    }

  QpTensorFn epsp0;
  if (!scn.initial.epsp_xx.empty() || !scn.initial.epsp_yy.empty() ||
      !scn.initial.epsp_xy.empty()) {
    const InitialSpec init = scn.initial;
    const Mesh* m = &mesh;
    epsp0 = [init, m](int e, int, double l1, double l2) {
      const auto p = m->point(e, l1, l2);
      EvalContext ctx;
      ctx.x = p[0];
      ctx.y = p[1];
      SymTensor3 v{};
      v[0] = init.epsp_xx.empty() ? 0.0 : init.epsp_xx.eval(ctx);
      v[1] = init.epsp_yy.empty() ? 0.0 : init.epsp_yy.eval(ctx);
      v[2] = -(v[0] + v[1]);  // traceless closure
      v[3] = init.epsp_xy.empty() ? 0.0 : init.epsp_xy.eval(ctx);
      return v;
    };
  }
  return evo->initial_state(th0, epsp0);
}

std::unique_ptr<RenormAssembled> assemble_renorm(const Scenario& s) {
  if (!s.renorm) throw std::invalid_argument("scenario carries no [renormheat] section");
  auto a = std::make_unique<RenormAssembled>();
  a->scn = s;
  a->spec = *s.renorm;
  a->mesh = build_mesh(s.mesh.lx, s.mesh.ly, s.mesh.nx, s.mesh.ny);
  a->rule = triangle_rule(2);
  a->target = singular_source(a->spec.amp, a->spec.x0, a->spec.a);
  a->problem = truncated_data_problem(a->mesh, a->spec.t_final, a->spec.steps, a->target,
                                      Eigen::VectorXd::Zero(a->mesh.n_nodes()));
  return a;
}

}  // namespace tvesim
