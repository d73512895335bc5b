#include "rsw/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace rsw {

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : Error(ErrorCode::ConfigError,
            field + (line > 0 ? " (line " + std::to_string(line) + ")" : std::string()) + ": " + message),
      field_(std::move(field)),
      line_(line) {}

std::string to_string(Certificate c) {
  switch (c) {
    case Certificate::Auto: return "auto";
    case Certificate::Eta1: return "eta1";
    case Certificate::Eta2: return "eta2";
    case Certificate::Eta3: return "eta3";
    case Certificate::Example1: return "example1";
  }
  return "auto";
}

namespace {

int line_of(const YAML::Node& n) { return n.IsDefined() && n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

class Section {
 public:
  Section(YAML::Node node, std::string path, int parent_line)
      : node_(std::move(node)), path_(std::move(path)), line_(node_.IsDefined() ? line_of(node_) : parent_line) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) fail(path_, line_, "expected a table");
  }

  bool present() const { return node_.IsDefined() && !node_.IsNull(); }
  bool has(const std::string& key) const { return present() && node_[key].IsDefined() && !node_[key].IsNull(); }
  YAML::Node get(const std::string& key) const { return present() ? node_[key] : YAML::Node(); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  int line(const std::string& key) const { return has(key) ? line_of(node_[key]) : line_; }

  void allow(std::initializer_list<const char*> keys) const {
    if (!present()) return;
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(field(key), line_of(kv.first), "unknown field");
    }
  }

  double number(const std::string& key) const { return as_number(get(key), field(key)); }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) fail(field(key), line(key), "expected an integer");
    return static_cast<long>(v);
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum = 1) const {
    const long v = integer(key, static_cast<long>(fallback));
    if (v < static_cast<long>(minimum)) fail(field(key), line(key), "must be >= " + std::to_string(minimum));
    return static_cast<std::size_t>(v);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const YAML::Node n = get(key);
    if (!n.IsScalar()) fail(field(key), line(key), "expected a string");
    return n.Scalar();
  }

  std::vector<double> numbers(const std::string& key) const { return as_numbers(get(key), field(key)); }

  [[noreturn]] static void fail(const std::string& field, int line, const std::string& msg) {
    throw ConfigError(field, line, msg);
  }

  static double as_number(const YAML::Node& n, const std::string& field) {
    if (!n.IsDefined() || !n.IsScalar()) fail(field, line_of(n), "expected a number");
    const std::string& s = n.Scalar();
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(field, line_of(n), "expected a number, got '" + s + "'");
    }
    if (used != s.size()) fail(field, line_of(n), "expected a number, got '" + s + "'");
    if (!std::isfinite(v)) fail(field, line_of(n), "must be finite");
    return v;
  }

  static std::vector<double> as_numbers(const YAML::Node& n, const std::string& field) {
    if (!n.IsDefined() || !n.IsSequence()) fail(field, line_of(n), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < n.size(); ++k) out.push_back(as_number(n[k], field + "[" + std::to_string(k) + "]"));
    return out;
  }

 private:
  YAML::Node node_;
  std::string path_;
  int line_;
};

nlohmann::json yaml_to_json(const YAML::Node& n) {
  if (!n.IsDefined() || n.IsNull()) return nullptr;
  if (n.IsSequence()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& x : n) out.push_back(yaml_to_json(x));
    return out;
  }
  if (n.IsMap()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& kv : n) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
    return out;
  }
  const std::string& s = n.Scalar();
  if (n.Tag() != "!") {  // plain scalars may be numbers or booleans; quoted ones stay strings
    if (s == "true") return true;
    if (s == "false") return false;
    std::size_t used = 0;
    try {
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  return s;
}

InitialValue parse_initial(const Section& sec, const std::string& key, const InitialValue& fallback) {
  if (!sec.has(key)) return fallback;
  const YAML::Node n = sec.get(key);
  if (n.IsScalar()) return {Section::as_number(n, sec.field(key)), {}};
  return {std::nullopt, Section::as_numbers(n, sec.field(key))};
}

LyapunovVariant parse_variant(const Section& sec, const std::string& key, LyapunovVariant fallback) {
  const std::string v = sec.text(key, "");
  if (v.empty()) return fallback;
  if (v == "additive_sup") return LyapunovVariant::AdditiveSup;
  if (v == "multiplicative_integral") return LyapunovVariant::MultiplicativeIntegral;
  if (v == "discretized_multiplicative") return LyapunovVariant::DiscretizedMultiplicative;
  Section::fail(sec.field(key), sec.line(key),
                "expected additive_sup, multiplicative_integral or discretized_multiplicative");
}

DelayMeasure parse_delay_measure(const Section& sec, const std::string& key, double tau, double lag) {
  if (!sec.has(key)) return DelayMeasure::point_mass(-lag, tau);
  const YAML::Node n = sec.get(key);
  if (!n.IsSequence() || n.size() == 0) Section::fail(sec.field(key), sec.line(key), "expected a list of [theta, weight]");
  std::vector<DelayMeasure::Atom> atoms;
  for (std::size_t k = 0; k < n.size(); ++k) {
    const auto f = sec.field(key) + "[" + std::to_string(k) + "]";
    const auto pair = Section::as_numbers(n[k], f);
    if (pair.size() != 2) Section::fail(f, line_of(n[k]), "expected [theta, weight]");
    atoms.push_back({pair[0], pair[1]});
  }
  try {
    return DelayMeasure(atoms, tau);
  } catch (const Error& e) {
    Section::fail(sec.field(key), sec.line(key), e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
  if (!root.IsDefined() || root.IsNull()) throw ConfigError(source, 0, "empty configuration");
  const Section top(root, "", 1);
  top.allow({"model", "chain", "scheme", "analysis", "initial", "expfun", "example1", "seed", "output"});

  RunConfig cfg;
  if (top.has("seed")) {
    const YAML::Node n = top.get("seed");
    try {
      cfg.seed = n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      Section::fail("seed", line_of(n), "expected an unsigned 64-bit integer");
    }
  }
  cfg.output = top.text("output", "");

  const Section ex(top.get("example1"), "example1", 0);
  ex.allow({"a1", "b1", "a2", "b2", "gamma", "sigma"});
  if (ex.present()) {
    Example1Params p{ex.number("a1"), ex.number("b1"), ex.number("a2"), ex.number("b2"), ex.number("gamma")};
    if (!(p.a1 > 0)) Section::fail(ex.field("a1"), ex.line("a1"), "must be positive");
    if (!(p.b1 > 0)) Section::fail(ex.field("b1"), ex.line("b1"), "must be positive");
    if (!(p.b2 > 0)) Section::fail(ex.field("b2"), ex.line("b2"), "must be positive");
    if (!(p.a2 < 0)) Section::fail(ex.field("a2"), ex.line("a2"), "must be negative");
    if (!(p.gamma > 0)) Section::fail(ex.field("gamma"), ex.line("gamma"), "must be positive");
    cfg.example1 = p;
    cfg.a = {p.a1, p.a2};
    cfg.b_delay = {p.b1, p.b2};
    cfg.sigma = ex.has("sigma") ? ex.numbers("sigma") : std::vector<double>{0.3, 0.3};
    if (cfg.sigma.size() != 2) Section::fail(ex.field("sigma"), ex.line("sigma"), "expected two entries");
    cfg.tau = cfg.lag = 1.0;
    cfg.q_raw.resize(2, 2);
    cfg.q_raw << -1.0, 1.0, p.gamma, -p.gamma;
  }

  const Section model(top.get("model"), "model", 0);
  model.allow({"kind", "a", "b_delay", "sigma", "noise", "tau", "lag", "coefficients", "params"});
  if (model.present()) {
    if (cfg.example1) Section::fail("model", model.line("kind"), "give either model or example1, not both");
    cfg.kind = model.text("kind", "switching_delay_ou");
    cfg.model_params = yaml_to_json(model.get("params"));
    cfg.tau = model.number("tau", 1.0);
    if (!(cfg.tau > 0)) Section::fail(model.field("tau"), model.line("tau"), "must be positive");
    cfg.lag = model.number("lag", cfg.tau);
    if (!(cfg.lag > 0 && cfg.lag <= cfg.tau)) Section::fail(model.field("lag"), model.line("lag"), "must lie in (0, tau]");
    const std::string noise = model.text("noise", "additive");
    if (noise == "additive") {
      cfg.noise = NoiseKind::Additive;
    } else if (noise == "multiplicative") {
      cfg.noise = NoiseKind::Multiplicative;
    } else {
      Section::fail(model.field("noise"), model.line("noise"), "expected additive or multiplicative");
    }
    if (cfg.kind == "switching_delay_ou") {
      cfg.a = model.numbers("a");
      cfg.b_delay = model.has("b_delay") ? model.numbers("b_delay") : std::vector<double>(cfg.a.size(), 0.0);
      cfg.sigma = model.numbers("sigma");
    }
  }

  const Section chain(top.get("chain"), "chain", 0);
  chain.allow({"Q", "i0"});
  if (chain.has("Q")) {
    const YAML::Node qn = chain.get("Q");
    if (!qn.IsSequence() || qn.size() == 0) Section::fail("chain.Q", chain.line("Q"), "expected a list of rows");
    const auto n = static_cast<Eigen::Index>(qn.size());
    cfg.q_raw.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto f = "chain.Q[" + std::to_string(r) + "]";
      const auto row = Section::as_numbers(qn[r], f);
      if (static_cast<Eigen::Index>(row.size()) != n) {
        Section::fail(f, line_of(qn[r]), "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(n));
      }
      for (Eigen::Index c = 0; c < n; ++c) cfg.q_raw(r, c) = row[c];
    }
  }
  if (cfg.q_raw.size() == 0) Section::fail("chain.Q", chain.line("Q"), "missing generator matrix");
  try {
    (void)GeneratorMatrix::validate(cfg.q_raw);
  } catch (const Error& e) {
    Section::fail("chain.Q", chain.line("Q"), e.what());
  }
  const auto n_states = static_cast<long>(cfg.q_raw.rows());
  cfg.i0 = static_cast<int>(chain.integer("i0", 0));
  if (cfg.i0 < 0 || cfg.i0 >= n_states) Section::fail("chain.i0", chain.line("i0"), "regime index out of range");

  if (cfg.kind == "switching_delay_ou" && !cfg.a.empty()) {
    auto check_len = [&](const std::vector<double>& v, const char* key) {
      if (static_cast<long>(v.size()) != n_states) {
        Section::fail(cfg.example1 ? std::string("example1") : model.field(key), model.line(key),
                      "expected " + std::to_string(n_states) + " entries, one per regime");
      }
    };
    check_len(cfg.a, "a");
    check_len(cfg.b_delay, "b_delay");
    check_len(cfg.sigma, "sigma");
  }

  if (model.has("coefficients")) {
    const Section co(model.get("coefficients"), "model.coefficients", model.line("coefficients"));
    co.allow({"alpha", "beta", "variant", "delay_measure"});
    const auto alpha = co.numbers("alpha");
    const auto beta = co.numbers("beta");
    if (static_cast<long>(alpha.size()) != n_states) Section::fail(co.field("alpha"), co.line("alpha"), "one entry per regime");
    if (static_cast<long>(beta.size()) != n_states) Section::fail(co.field("beta"), co.line("beta"), "one entry per regime");
    const auto variant = parse_variant(co, "variant", cfg.noise == NoiseKind::Additive
                                                          ? LyapunovVariant::AdditiveSup
                                                          : LyapunovVariant::MultiplicativeIntegral);
    const DelayMeasure v = parse_delay_measure(co, "delay_measure", cfg.tau, cfg.lag);
    try {
      cfg.declared = RegimeCoefficients<double>::make(Eigen::Map<const Eigen::VectorXd>(alpha.data(), n_states),
                                                      Eigen::Map<const Eigen::VectorXd>(beta.data(), n_states),
                                                      cfg.tau, v, variant);
    } catch (const Error& e) {
      Section::fail("model.coefficients", model.line("coefficients"), e.what());
    }
  }

  const Section scheme(top.get("scheme"), "scheme", 0);
  scheme.allow({"M", "delta", "horizon", "n_paths"});
  if (scheme.has("M") && scheme.has("delta")) Section::fail("scheme", scheme.line("delta"), "give exactly one of M and delta");
  if (scheme.has("delta")) {
    const double d = scheme.number("delta");
    const double ratio = cfg.tau / d;
    if (!(d > 0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      Section::fail("scheme.delta", scheme.line("delta"), "tau / delta must be a positive integer");
    }
    cfg.m = static_cast<int>(std::lround(ratio));
  } else {
    cfg.m = static_cast<int>(scheme.integer("M", 10));
  }
  if (cfg.m < 1) Section::fail("scheme.M", scheme.line("M"), "must be >= 1");
  if (!(cfg.delta() < 1.0)) Section::fail("scheme", scheme.line("M"), "step tau / M must be below 1");
  cfg.n_paths = scheme.count("n_paths", 1000);

  const Section analysis(top.get("analysis"), "analysis", 0);
  analysis.allow({"burn_in", "stride", "noise_floor", "confidence", "certificate", "n_samples", "t_burn", "n_blocks",
                  "n_boot"});
  cfg.burn_in = analysis.number("burn_in", cfg.tau + 1.0);
  if (!(cfg.burn_in >= 0)) Section::fail("analysis.burn_in", analysis.line("burn_in"), "must be >= 0");
  cfg.stride = analysis.number("stride", 5.0 * cfg.tau);
  if (!(cfg.stride > 0)) Section::fail("analysis.stride", analysis.line("stride"), "must be positive");
  cfg.noise_floor = analysis.number("noise_floor", 10.0);
  if (analysis.has("confidence") && analysis.number("confidence") != 0.95) {
    Section::fail("analysis.confidence", analysis.line("confidence"), "only 0.95 is supported");
  }
  const std::string cert = analysis.text("certificate", "auto");
  static const std::map<std::string, Certificate> certs{{"auto", Certificate::Auto},
                                                        {"eta1", Certificate::Eta1},
                                                        {"eta2", Certificate::Eta2},
                                                        {"eta3", Certificate::Eta3},
                                                        {"example1", Certificate::Example1}};
  if (!certs.count(cert)) Section::fail("analysis.certificate", analysis.line("certificate"), "expected auto, eta1, eta2, eta3 or example1");
  cfg.certificate = certs.at(cert);
  if (cfg.certificate == Certificate::Example1 && !cfg.example1) {
    Section::fail("analysis.certificate", analysis.line("certificate"), "example1 certificate needs an example1 section");
  }
  cfg.n_samples = analysis.count("n_samples", 10000, 2);
  cfg.t_burn = analysis.number("t_burn", 50.0);
  if (!(cfg.t_burn >= 0)) Section::fail("analysis.t_burn", analysis.line("t_burn"), "must be >= 0");
  cfg.n_blocks = analysis.count("n_blocks", 10, 2);
  cfg.n_boot = analysis.count("n_boot", 200);

  cfg.horizon = scheme.number("horizon", std::max(10.0, cfg.tau + cfg.burn_in));
  if (!(cfg.horizon >= cfg.tau + cfg.burn_in)) {
    Section::fail("scheme.horizon", scheme.line("horizon"), "must be >= tau + burn_in");
  }

  const Section initial(top.get("initial"), "initial", 0);
  initial.allow({"xi", "eta", "j0"});
  cfg.xi = parse_initial(initial, "xi", cfg.xi);
  cfg.eta = parse_initial(initial, "eta", cfg.eta);
  for (const auto* key : {"xi", "eta"}) {
    const InitialValue& v = std::string(key) == "xi" ? cfg.xi : cfg.eta;
    if (!v.constant && static_cast<int>(v.knots.size()) != cfg.m + 1) {
      Section::fail(initial.field(key), initial.line(key), "expected a number or M + 1 = " + std::to_string(cfg.m + 1) + " knots");
    }
  }
  cfg.j0 = static_cast<int>(initial.integer("j0", cfg.i0));
  if (cfg.j0 < 0 || cfg.j0 >= n_states) Section::fail("initial.j0", initial.line("j0"), "regime index out of range");

  const Section expfun(top.get("expfun"), "expfun", 0);
  expfun.allow({"K", "t_grid", "deltas", "n_paths"});
  if (expfun.present()) {
    const auto k = expfun.numbers("K");
    if (static_cast<long>(k.size()) != n_states) Section::fail("expfun.K", expfun.line("K"), "one entry per regime");
    cfg.k = Eigen::Map<const Eigen::VectorXd>(k.data(), n_states);
    cfg.t_grid = expfun.numbers("t_grid");
    if (cfg.t_grid.size() < 2) Section::fail("expfun.t_grid", expfun.line("t_grid"), "need at least two times");
    for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
      if (!(cfg.t_grid[i] > 0) || (i && !(cfg.t_grid[i] > cfg.t_grid[i - 1]))) {
        Section::fail("expfun.t_grid", expfun.line("t_grid"), "times must be positive and increasing");
      }
    }
    cfg.deltas = expfun.has("deltas") ? expfun.numbers("deltas") : std::vector<double>{};
    for (double d : cfg.deltas) {
      if (!(d > 0)) Section::fail("expfun.deltas", expfun.line("deltas"), "must be positive");
    }
    cfg.expfun_paths = expfun.count("n_paths", 10000, 100);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open configuration file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

namespace {

std::map<std::string, ModelFactory>& registry() {
  static std::map<std::string, ModelFactory> r;
  return r;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_model(const std::string& kind, ModelFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[kind] = std::move(factory);
}

ModelSpec build_model(const RunConfig& cfg) {
  if (cfg.kind == "switching_delay_ou") {
    if (cfg.a.empty()) throw ConfigError("model", 0, "missing model section");
    return make_switching_delay_ou({cfg.a, cfg.b_delay, cfg.sigma, cfg.lag, cfg.noise});
  }
  if (cfg.kind == "brownian") {
    int dim = 1;
    if (cfg.model_params.is_object() && cfg.model_params.contains("dim")) dim = cfg.model_params["dim"].get<int>();
    return make_brownian(dim, static_cast<int>(cfg.q_raw.rows()), cfg.tau);
  }
  ModelFactory factory;
  {
    std::lock_guard lock(registry_mutex());
    const auto it = registry().find(cfg.kind);
    if (it == registry().end()) throw ConfigError("model.kind", 0, "unknown model kind '" + cfg.kind + "'");
    factory = it->second;
  }
  ModelSpec m = factory(cfg);
  if (m.n_regimes != cfg.q_raw.rows()) throw ConfigError("model.kind", 0, "registered model has the wrong regime count");
  return m;
}

GeneratorMatrix build_generator(const RunConfig& cfg) { return GeneratorMatrix::validate(cfg.q_raw); }

Segment build_segment(const RunConfig& cfg, const InitialValue& v, int dim) {
  if (v.constant) return Segment::constant(Eigen::VectorXd::Constant(dim, *v.constant), cfg.tau, cfg.m);
  if (dim != 1) throw ConfigError("initial", 0, "knot lists are only supported for scalar models");
  return Segment::from_values(Eigen::Map<const Eigen::MatrixXd>(v.knots.data(), cfg.m + 1, 1), cfg.tau);
}

std::optional<RegimeCoefficients<double>> build_coefficients(const RunConfig& cfg) {
  if (cfg.declared) return cfg.declared;
  if (cfg.kind == "switching_delay_ou" && !cfg.a.empty()) {
    return SwitchingDelayOU{cfg.a, cfg.b_delay, cfg.sigma, cfg.lag, cfg.noise}.implied_coefficients();
  }
  return std::nullopt;
}

}  // namespace rsw
