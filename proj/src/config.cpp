#include "ddlab/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include "ddlab/io.hpp"

namespace ddlab {

ConfigError::ConfigError(const std::string& msg, std::size_t line, std::size_t column)
    : InvalidArgument("config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  ConfigTable document() {
    ConfigTable doc;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') fail("table headers are not supported; use flat keys");
      const std::size_t kl = line_, kc = col_;
      std::string key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      ConfigValue v = parse_value();
      skip_ws();
      if (!eof() && peek() == '#') skip_comment();
      if (!eof() && peek() != '\n') fail("expected end of line after value");
      if (doc.contains(key)) throw ConfigError("duplicate key '" + key + "'", kl, kc);
      doc.emplace(std::move(key), std::move(v));
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(msg, line_, col_); }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }
  void skip_comment() {
    while (!eof() && peek() != '\n') get();
  }
  void skip_blank_lines() {
    for (;;) {
      skip_ws();
      if (eof()) return;
      if (peek() == '#') skip_comment();
      if (!eof() && peek() == '\n') {
        get();
        continue;
      }
      return;
    }
  }
  // whitespace, newlines and comments inside arrays
  void skip_all() {
    for (;;) {
      skip_ws();
      if (eof()) return;
      if (peek() == '#') skip_comment();
      else if (peek() == '\n') get();
      else return;
    }
  }

  static bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    std::string k;
    while (!eof() && key_char(peek())) k += get();
    if (k.empty()) fail("expected a key");
    return k;
  }

  ConfigValue parse_value() {
    if (eof()) fail("expected a value");
    ConfigValue v;
    v.line = line_;
    v.column = col_;
    const char c = peek();
    if (c == '"') {
      v.v = parse_string();
    } else if (c == '[') {
      v.v = parse_array();
    } else if (c == '{') {
      v.v = parse_table();
    } else if (c == 't' || c == 'f') {
      std::string w;
      while (!eof() && std::isalpha(static_cast<unsigned char>(peek()))) w += get();
      if (w == "true") v.v = true;
      else if (w == "false") v.v = false;
      else throw ConfigError("invalid value '" + w + "' (strings must be quoted)", v.line, v.column);
    } else if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      v.v = parse_number();
    } else {
      fail("invalid value (strings must be quoted)");
    }
    return v;
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c == '\\') {
        if (eof()) fail("unterminated string");
        const char e = get();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: fail(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
  }

  double parse_number() {
    const std::size_t start = pos_;
    const std::size_t l = line_, c = col_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                      peek() == '+' || peek() == '-'))
      get();
    std::string_view tok = s_.substr(start, pos_ - start);
    std::string_view body = tok;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
    if (body.empty() || res.ec != std::errc() || res.ptr != body.data() + body.size() || !std::isfinite(v))
      throw ConfigError("invalid number '" + std::string(tok) + "'", l, c);
    return v;
  }

  ConfigArray parse_array() {
    expect('[');
    ConfigArray a;
    skip_all();
    while (!eof() && peek() != ']') {
      a.push_back(parse_value());
      skip_all();
      if (!eof() && peek() == ',') {
        get();
        skip_all();
      } else if (!eof() && peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    expect(']');
    return a;
  }

  ConfigTable parse_table() {
    expect('{');
    ConfigTable t;
    skip_ws();
    while (!eof() && peek() != '}') {
      const std::size_t kl = line_, kc = col_;
      std::string key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      ConfigValue v = parse_value();
      if (t.contains(key)) throw ConfigError("duplicate key '" + key + "'", kl, kc);
      t.emplace(std::move(key), std::move(v));
      skip_ws();
      if (!eof() && peek() == ',') {
        get();
        skip_ws();
      } else if (!eof() && peek() != '}') {
        fail("expected ',' or '}' in inline table");
      }
    }
    expect('}');
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

// Typed access with positioned errors.
class Reader {
 public:
  Reader(const ConfigTable& t, std::string context) : t_(t), ctx_(std::move(context)) {}

  bool has(std::string_view k) const {
    used_.insert(std::string(k));
    return t_.find(k) != t_.end();
  }
  const ConfigValue& at(std::string_view k) const {
    used_.insert(std::string(k));
    return t_.find(k)->second;
  }

  double num(std::string_view k) const {
    const ConfigValue& v = at(k);
    if (const double* d = std::get_if<double>(&v.v)) return *d;
    throw err(v, k, "a number");
  }
  std::size_t count(std::string_view k) const {
    const double d = num(k);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e15) throw err(at(k), k, "a non-negative integer");
    return static_cast<std::size_t>(d);
  }
  int integer(std::string_view k) const {
    const double d = num(k);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw err(at(k), k, "an integer");
    return static_cast<int>(d);
  }
  std::string str(std::string_view k) const {
    const ConfigValue& v = at(k);
    if (const auto* s = std::get_if<std::string>(&v.v)) return *s;
    throw err(v, k, "a string");
  }
  bool boolean(std::string_view k) const {
    const ConfigValue& v = at(k);
    if (const bool* b = std::get_if<bool>(&v.v)) return *b;
    throw err(v, k, "a boolean");
  }
  std::vector<double> numbers(std::string_view k) const {
    const ConfigValue& v = at(k);
    const auto* a = std::get_if<ConfigArray>(&v.v);
    if (!a) throw err(v, k, "an array of numbers");
    std::vector<double> out;
    for (const ConfigValue& e : *a) {
      const double* d = std::get_if<double>(&e.v);
      if (!d) throw err(e, k, "an array of numbers");
      out.push_back(*d);
    }
    return out;
  }
  const ConfigTable& table(std::string_view k) const {
    const ConfigValue& v = at(k);
    if (const auto* t = std::get_if<ConfigTable>(&v.v)) return *t;
    throw err(v, k, "an inline table");
  }

  void reject_unknown() const {
    for (const auto& [k, v] : t_)
      if (!used_.contains(k))
        throw ConfigError("unknown key '" + k + "'" + (ctx_.empty() ? "" : " in " + ctx_), v.line,
                          v.column);
  }

  InvalidArgument err(const ConfigValue& v, std::string_view k, const char* what) const {
    return ConfigError("key '" + std::string(k) + "' expects " + what, v.line, v.column);
  }

 private:
  const ConfigTable& t_;
  std::string ctx_;
  mutable std::set<std::string, std::less<>> used_;
};

void constraint(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what + " violated");
}

}  // namespace

ConfigTable parse_document(std::string_view text) { return Parser(text).document(); }

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::sweep: return "sweep";
    case Mode::verify_estimates: return "verify-estimates";
    case Mode::riemann: return "riemann";
    case Mode::gamma: return "gamma";
  }
  return "unknown";
}

double RunConfig::delta_for(double e) const {
  return delta_rule ? delta_rule->K * std::pow(e, delta_rule->p) : delta;
}

FluxModel RunConfig::make_flux_x() const {
  if (flux_table) return load_flux_table(*flux_table, flux_params.bound, flux_params.saturated);
  return make_flux(flux, flux_params);
}

FluxModel RunConfig::make_flux_y() const { return make_flux(flux_y, flux_y_params); }

EntropyPair RunConfig::make_entropy(const FluxModel& f) const {
  if (entropy == "square") return make_entropy_pair(square_entropy(), f);
  if (entropy == "exponential") return make_entropy_pair(exponential_entropy(), f);
  return special_entropy(f);
}

SweepPlan RunConfig::sweep_plan() const {
  SweepPlan p;
  p.eps_list = eps_list;
  p.K = delta_rule ? delta_rule->K : 0.0;
  p.p = delta_rule ? delta_rule->p : 1.0;
  p.flux = make_flux_x();
  p.profile = initial;
  p.x_min = x_min;
  p.x_max = x_max;
  p.t_eval = t_eval;
  p.window = window_set ? window : Window{x_min, x_max};
  p.q_list = q_list;
  p.grid_rule.factor = grid_factor;
  p.reference = reference;
  p.reference_factor = reference_factor;
  p.cfl = cfl;
  p.dt_max = dt_max;
  p.snapshots = snapshots;
  p.theta = theta;
  p.workers = workers;
  return p;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const ConfigTable doc = parse_document(text);
  const Reader r(doc, "");
  RunConfig c;

  auto resolve = [&](const std::string& s) {
    std::filesystem::path p(s);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (!std::filesystem::exists(p)) throw InvalidArgument("referenced file does not exist: " + p.string());
    c.input_files.push_back(p);
    return p;
  };

  if (!r.has("mode")) throw InvalidArgument("config: missing required key 'mode'");
  {
    const std::string m = r.str("mode");
    if (m == "simulate") c.mode = Mode::simulate;
    else if (m == "sweep") c.mode = Mode::sweep;
    else if (m == "verify-estimates") c.mode = Mode::verify_estimates;
    else if (m == "riemann") c.mode = Mode::riemann;
    else if (m == "gamma") c.mode = Mode::gamma;
    else throw r.err(r.at("mode"), "mode", "one of simulate, sweep, verify-estimates, riemann, gamma");
  }
  if (r.has("dim")) c.dim = r.integer("dim");
  constraint(c.dim == 1 || c.dim == 2, "dim in {1, 2}");

  // Flux.
  if (r.has("flux")) c.flux = r.str("flux");
  if (r.has("flux_a")) c.flux_params.a = r.num("flux_a");
  if (r.has("flux_p")) c.flux_params.p = r.integer("flux_p");
  if (r.has("flux_saturated")) c.flux_params.saturated = r.boolean("flux_saturated");
  if (r.has("flux_table")) c.flux_table = resolve(r.str("flux_table"));
  if (r.has("flux_y")) c.flux_y = r.str("flux_y");
  if (r.has("flux_y_a")) c.flux_y_params.a = r.num("flux_y_a");
  if (r.has("flux_y_p")) c.flux_y_params.p = r.integer("flux_y_p");

  // Domain.
  if (r.has("x_min")) c.x_min = r.num("x_min");
  if (r.has("x_max")) c.x_max = r.num("x_max");
  if (r.has("y_min")) c.y_min = r.num("y_min");
  if (r.has("y_max")) c.y_max = r.num("y_max");
  constraint(c.x_max > c.x_min, "Grid1D.x_max > x_min");
  constraint(c.y_max > c.y_min, "Grid2D.y_max > y_min");
  if (r.has("n")) c.n = r.count("n");
  if (r.has("ny")) c.ny = r.count("ny");
  if (r.has("grid_factor")) c.grid_factor = r.num("grid_factor");
  constraint(c.grid_factor > 0.0, "GridRule.factor > 0");

  // Initial data.
  std::string kind = c.mode == Mode::riemann ? "riemann" : "sine";
  if (r.has("initial")) kind = r.str("initial");
  if (r.has("u_left")) c.u_left = r.num("u_left");
  if (r.has("u_right")) c.u_right = r.num("u_right");
  if (kind == "sine") {
    c.initial = InitialProfile::sine(r.has("amplitude") ? r.num("amplitude") : 1.0,
                                     r.has("modes") ? r.integer("modes") : 1);
  } else if (kind == "constant") {
    c.initial = InitialProfile::constant(r.has("value") ? r.num("value") : 0.0);
  } else if (kind == "riemann") {
    c.initial = InitialProfile::riemann(c.u_left, c.u_right, r.has("width") ? r.num("width") : 0.05);
  } else if (kind == "gaussian") {
    c.initial = InitialProfile::gaussian(r.has("amplitude") ? r.num("amplitude") : 1.0,
                                         r.has("sigma") ? r.num("sigma") : 0.2);
  } else if (kind == "table") {
    if (!r.has("initial_file")) throw InvalidArgument("initial = \"table\" requires initial_file");
    c.initial = InitialProfile::from_csv(resolve(r.str("initial_file")));
  } else {
    throw r.err(r.at("initial"), "initial", "one of sine, constant, riemann, gaussian, table");
  }
  if (r.has("center")) c.initial.center = r.num("center");
  if (r.has("amplitude_y")) c.amplitude_y = r.num("amplitude_y");
  if (r.has("modes_y")) c.modes_y = r.integer("modes_y");

  // Flux working range: explicit, or from the data.
  {
    double sup = profile_sup(c.initial) + std::abs(c.amplitude_y);
    if (c.mode == Mode::riemann) sup = std::max(std::abs(c.u_left), std::abs(c.u_right));
    const double B = r.has("flux_bound") ? r.num("flux_bound") : default_flux_bound(sup);
    constraint(B > 0.0, "FluxParams.bound > 0");
    c.flux_params.bound = B;
    c.flux_y_params.bound = B;
  }

  // Regularization.
  if (r.has("eps")) c.eps = r.num("eps");
  if (r.has("delta")) {
    const ConfigValue& dv = r.at("delta");
    if (std::holds_alternative<double>(dv.v)) {
      c.delta = std::get<double>(dv.v);
    } else if (std::holds_alternative<ConfigTable>(dv.v)) {
      const Reader dr(std::get<ConfigTable>(dv.v), "delta");
      DeltaRule rule;
      if (dr.has("K")) rule.K = dr.num("K");
      if (dr.has("p")) rule.p = dr.num("p");
      dr.reject_unknown();
      constraint(rule.K >= 0.0, "SweepPlan.K >= 0");
      constraint(rule.p > 0.0, "SweepPlan.p > 0");
      c.delta_rule = rule;
    } else {
      throw r.err(dv, "delta", "a number or {K = ..., p = ...}");
    }
  }

  // Time stepping.
  if (r.has("t")) c.t_final = r.num("t");
  if (r.has("cfl")) c.cfl = r.num("cfl");
  if (r.has("dt_max")) c.dt_max = r.num("dt_max");
  if (r.has("dt")) c.dt = r.num("dt");
  if (r.has("snapshots")) c.snapshots = r.count("snapshots");
  constraint(c.t_final > 0.0, "TimeController.t_final > 0");
  constraint(c.cfl > 0.0, "TimeController.cfl > 0");
  constraint(c.dt_max > 0.0, "TimeController.dt_max > 0");
  constraint(!c.dt || *c.dt > 0.0, "TimeController.dt_fixed > 0");
  constraint(c.snapshots >= 1, "snapshots >= 1");

  // Sweep and gamma.
  if (r.has("eps_list")) c.eps_list = r.numbers("eps_list");
  if (r.has("window")) {
    const auto w = r.numbers("window");
    if (w.size() != 2) throw r.err(r.at("window"), "window", "[a, b]");
    c.window = {w[0], w[1]};
    c.window_set = true;
    constraint(w[0] < w[1] && w[0] >= c.x_min && w[1] <= c.x_max, "window inside the domain");
  }
  if (r.has("q")) c.q_list = r.numbers("q");
  if (r.has("t_eval")) c.t_eval = r.num("t_eval");
  if (r.has("reference")) {
    const std::string ref = r.str("reference");
    if (ref == "fan") c.reference = ReferenceKind::fan;
    else if (ref == "fine_grid") c.reference = ReferenceKind::fine_grid;
    else throw r.err(r.at("reference"), "reference", "fan or fine_grid");
  }
  if (r.has("reference_factor")) c.reference_factor = r.count("reference_factor");
  if (r.has("theta")) {
    const Reader tr(r.table("theta"), "theta");
    TestFunction th;
    if (tr.has("xc")) th.xc = tr.num("xc");
    if (tr.has("tc")) th.tc = tr.num("tc");
    if (tr.has("wx")) th.wx = tr.num("wx");
    if (tr.has("wt")) th.wt = tr.num("wt");
    tr.reject_unknown();
    constraint(th.wx > 0.0 && th.wt > 0.0, "TestFunction widths > 0");
    c.theta = th;
  }
  if (r.has("safety")) c.safety = r.num("safety");
  constraint(c.safety >= 1.0, "safety >= 1");

  if (r.has("entropy")) c.entropy = r.str("entropy");
  constraint(c.entropy == "square" || c.entropy == "exponential" || c.entropy == "special",
             "entropy in {square, exponential, special}");

  if (r.has("workers")) c.workers = r.count("workers");
  constraint(c.workers >= 1, "workers >= 1");

  r.reject_unknown();

  // Mode-specific requirements, checked through the owning module's validators.
  const FluxModel fx = c.make_flux_x();
  if (c.dim == 2) (void)c.make_flux_y();
  switch (c.mode) {
    case Mode::simulate:
    case Mode::verify_estimates: {
      if (!c.eps) throw InvalidArgument("Regularization.eps > 0 violated (eps missing)");
      (void)Regularization::make(*c.eps, c.delta_for(*c.eps));
      if (c.n) {
        if (c.dim == 1) (void)Grid1D::make(c.x_min, c.x_max, *c.n);
        else (void)Grid2D::make({c.x_min, c.x_max, *c.n}, {c.y_min, c.y_max, c.ny.value_or(*c.n)});
      }
      if (c.dim == 1 && c.n) (void)sample_initial(Grid1D::make(c.x_min, c.x_max, *c.n), c.initial, fx.working_range());
      break;
    }
    case Mode::sweep:
    case Mode::gamma: {
      constraint(c.dim == 1, "sweeps are one-dimensional (dim = 1)");
      if (c.eps_list.empty()) throw InvalidArgument("sweep requires eps_list");
      if (!c.delta_rule) {
        constraint(c.delta == 0.0, "sweep requires delta = {K = ..., p = ...} or delta = 0");
        c.delta_rule = DeltaRule{0.0, 1.0};
      }
      if (c.mode == Mode::gamma && !c.theta) throw InvalidArgument("gamma mode requires theta");
      c.sweep_plan().validate();
      break;
    }
    case Mode::riemann:
      constraint(c.u_left != c.u_right, "RiemannProblem.u_left != u_right");
      if (c.n) (void)Grid1D::make(c.x_min, c.x_max, *c.n);
      break;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

}  // namespace ddlab
