#ifndef RSW_CONFIG_HPP
#define RSW_CONFIG_HPP

// Run configuration: parsing (YAML, or JSON as the same schema), validation
// with field-located errors, and construction of the library objects.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsw/generator.hpp"
#include "rsw/sde.hpp"
#include "rsw/segment.hpp"

namespace rsw {

/// Error with the offending field path and, when known, its source line.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Initial segment: a constant, or the M + 1 knot values from theta = -tau to 0.
struct InitialValue {
  std::optional<double> constant;
  std::vector<double> knots;
};

struct Example1Params {
  double a1, b1, a2, b2, gamma;
};

enum class Certificate { Auto, Eta1, Eta2, Eta3, Example1 };

struct RunConfig {
  // model
  std::string kind = "switching_delay_ou";
  std::vector<double> a, b_delay, sigma;
  NoiseKind noise = NoiseKind::Additive;
  double tau = 1.0;
  double lag = 1.0;
  std::optional<RegimeCoefficients<double>> declared;
  nlohmann::json model_params;  // raw model section, for registered custom kinds

  // chain
  Eigen::MatrixXd q_raw;
  int i0 = 0;

  // scheme
  int m = 10;
  double horizon = 10.0;
  std::size_t n_paths = 1000;

  // analysis
  double burn_in = 2.0;
  double stride = 5.0;
  double noise_floor = 10.0;
  Certificate certificate = Certificate::Auto;
  std::size_t n_samples = 10000;
  double t_burn = 50.0;
  std::size_t n_blocks = 10;
  std::size_t n_boot = 200;

  // initial data
  InitialValue xi{1.0, {}};
  InitialValue eta{-1.0, {}};
  int j0 = 0;

  // exponential functional
  Eigen::VectorXd k;
  std::vector<double> t_grid;
  std::vector<double> deltas;
  std::size_t expfun_paths = 10000;

  std::optional<Example1Params> example1;

  std::uint64_t seed = 0;
  std::string output;

  double delta() const { return tau / static_cast<double>(m); }
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Builds a model from the config: built-in kinds or a registered factory.
using ModelFactory = std::function<ModelSpec(const RunConfig&)>;
void register_model(const std::string& kind, ModelFactory factory);
ModelSpec build_model(const RunConfig& cfg);

GeneratorMatrix build_generator(const RunConfig& cfg);
Segment build_segment(const RunConfig& cfg, const InitialValue& v, int dim);

/// Declared coefficients, or those implied by the built-in model.
std::optional<RegimeCoefficients<double>> build_coefficients(const RunConfig& cfg);

std::string to_string(Certificate c);

}  // namespace rsw

#endif  // RSW_CONFIG_HPP
