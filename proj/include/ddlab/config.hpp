#pragma once
// Run configuration: a small TOML subset (flat `key = value` lines, numbers,
// strings, booleans, arrays, inline tables, `#` comments).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ddlab/error.hpp"
#include "ddlab/estimates.hpp"
#include "ddlab/flux.hpp"
#include "ddlab/spectral1d.hpp"
#include "ddlab/sweep.hpp"

namespace ddlab {

/// Syntax error with the 1-based position of the offending character.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& msg, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
using ConfigTable = std::map<std::string, ConfigValue, std::less<>>;

struct ConfigValue {
  std::variant<double, std::string, bool, ConfigArray, ConfigTable> v;
  std::size_t line = 0, column = 0;
};

/// Parse the document into key -> value; duplicate keys are errors.
ConfigTable parse_document(std::string_view text);

enum class Mode { simulate, sweep, verify_estimates, riemann, gamma };

std::string_view to_string(Mode m);

struct DeltaRule {
  double K = 1.0;
  double p = 2.0;
};

struct RunConfig {
  Mode mode = Mode::simulate;
  int dim = 1;

  // flux along x (and y in 2D)
  std::string flux = "burgers";
  FluxParams flux_params;
  std::optional<std::filesystem::path> flux_table;
  std::string flux_y = "linear";
  FluxParams flux_y_params;

  // domain and grid
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  std::optional<std::size_t> n;
  std::optional<std::size_t> ny;
  double grid_factor = 16.0;

  // initial data
  InitialProfile initial;
  double amplitude_y = 0.0;  ///< 2D: u0 = sine in x + amplitude_y sin(2 pi modes_y (y - y_min)/L_y)
  int modes_y = 1;

  // regularization
  std::optional<double> eps;
  double delta = 0.0;
  std::optional<DeltaRule> delta_rule;

  // time stepping
  double t_final = 1.0;
  double cfl = 0.4;
  double dt_max = 0.05;
  std::optional<double> dt;
  std::size_t snapshots = 32;

  // sweep / gamma
  std::vector<double> eps_list;
  Window window{0.0, 1.0};
  bool window_set = false;
  std::vector<double> q_list{1.0};
  std::optional<double> t_eval;
  std::optional<ReferenceKind> reference;
  std::size_t reference_factor = 8;
  std::optional<TestFunction> theta;
  double safety = 1.5;

  // entropy for balance checks: square, exponential, special
  std::string entropy = "square";

  // riemann
  double u_left = 1.0, u_right = 0.0;

  std::size_t workers = 1;
  std::vector<std::filesystem::path> input_files;  ///< referenced files, for the manifest

  /// delta for a given eps: the rule when set, else the fixed value.
  double delta_for(double e) const;
  FluxModel make_flux_x() const;
  FluxModel make_flux_y() const;
  EntropyPair make_entropy(const FluxModel& f) const;
  SweepPlan sweep_plan() const;
};

/// Parse and validate; relative paths resolve against base_dir. Throws
/// ConfigError for syntax errors and InvalidArgument for unknown keys, type
/// errors and violated preconditions.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

}  // namespace ddlab
