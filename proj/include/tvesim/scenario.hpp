#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tvesim/evolution.hpp"
#include "tvesim/renormheat.hpp"

namespace tvesim {

// Parse failure in the sectioned key-value format; 1-based position.
struct ConfigParseError : std::runtime_error {
  ConfigParseError(int line, int column, const std::string& message);
  int line = 0;
  int column = 0;
};

// Raw "[section]" / "key = value" text. Values keep embedded commas so array
// literals survive; '#' starts a comment anywhere on a line.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  const Entry* find(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, Entry>>& sections() const { return data_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> data_;
};

struct Violation {
  std::string field;  // "section.key"
  std::string message;
};

// Carries every violation found, not just the first.
struct ScenarioError : std::runtime_error {
  explicit ScenarioError(std::vector<Violation> violations);
  std::vector<Violation> violations;
};

struct MeshSpec {
  double lx = 1.0;
  double ly = 1.0;
  int nx = 8;
  int ny = 8;
};

struct MaterialSpec {
  Expression lambda;  // over (x, y); defaults are the unit constants
  Expression mu;
};

struct OrliczSpec {
  std::string p_text = "2";
  bool constant_p = true;
  double p_value = 2.0;
  Expression p_field;  // set when constant_p is false
  int grid = 2048;
};

struct ConstitutiveSpec {
  std::string family = "power";
  std::string p_text = "2";
  Expression phi;  // empty: unit factor
  double phi_lo = 1.0;
  double phi_hi = 1.0;
  double scale = 1.0;
  double theta_probe = 64.0;
};

struct LoadSpec {
  std::array<Expression, 2> f;  // body force
  std::array<Expression, 2> g;  // boundary displacement
  Expression g_theta;           // boundary temperature
  Expression theta_shift0;      // initial datum of the temperature shift
  int heat_steps = 64;
};

struct InitialSpec {
  Expression theta0;
  Expression epsp_xx;  // zz closes the trace, xz = yz = 0
  Expression epsp_yy;
  Expression epsp_xy;
};

struct DiscretizationSpec {
  int k = 4;
  int l = 4;
  double trunc = 0.0;  // 0: follow k
  double dt = 0.0;
  double t_final = 0.0;
  int output_stride = 1;
  int vtk_stride = 0;  // 0: pick so at most five snapshots are written
};

struct RenormSpec {
  double amp = 1.0;
  std::array<double, 2> x0{0.5, 0.5};
  double a = 1.5;
  double t_final = 0.5;
  int steps = 48;
  std::vector<double> eps{0.25, 0.0625, 0.015625};
  std::vector<double> tail_levels{1, 2, 4, 8, 16, 32};
  double tail_band = 1.0;
  std::vector<double> clamp_supports{2.0, 4.0, 8.0};
  int test_ix = 1;
  int test_iy = 1;
};

struct Scenario {
  std::string name;
  std::string mode = "run";  // "run" | "renormheat"
  MeshSpec mesh;
  MaterialSpec material;
  OrliczSpec orlicz;
  ConstitutiveSpec constitutive;
  LoadSpec loads;
  InitialSpec initial;
  DiscretizationSpec disc;
  std::optional<RenormSpec> renorm;

  double truncation() const { return disc.trunc > 0.0 ? disc.trunc : static_cast<double>(disc.k); }
};

// Throws ConfigParseError on malformed text and ScenarioError with the full
// violation list on invalid content.
Scenario parse_scenario(const std::string& text, const std::string& name);
Scenario load_scenario(const std::string& path);

// Owns every runtime object of a mechanical run; heap-only so the internal
// references stay valid.
struct Assembled {
  Scenario scn;
  Mesh mesh;
  MaterialField mat;
  TriangleRule rule;
  TempBasis temp;
  DispBasis disp;
  ComplementBasis comp;
  NFunction m;
  ComplementaryNFunction ms;
  GModel model;
  std::optional<ElasticLifting> elastic;
  LiftingHeat heat;
  std::optional<Evolution> evo;

  Evolution& evolution() { return *evo; }
  const Evolution& evolution() const { return *evo; }
  State initial_state() const;
};

std::unique_ptr<Assembled> assemble(const Scenario& s,
                                    kernels::Exec exec = kernels::Exec::parallel);

// Renormalized-heat study data; only the mesh block of the scenario is used.
struct RenormAssembled {
  Scenario scn;
  RenormSpec spec;
  Mesh mesh;
  TriangleRule rule;
  HeatProblem problem;
  SourceFn target;  // the untruncated singular source the family approximates
};

std::unique_ptr<RenormAssembled> assemble_renorm(const Scenario& s);

}  // namespace tvesim
