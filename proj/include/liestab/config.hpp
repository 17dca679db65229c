#ifndef LIESTAB_CONFIG_HPP
#define LIESTAB_CONFIG_HPP

#include <liestab/types.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace liestab {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits.  Configs are quantized this way on parse
/// and every reported number is quantized the same way, so a report's echoed
/// config reproduces the report byte for byte.
double sig12(double x);

struct ToleranceConfig {
  double rank = 1e-9;   ///< relative rank threshold for span decisions
  double ode = 1e-6;    ///< local error budget of the integrator
  double split = 1e-9;  ///< generator reconstruction budget
};

struct SignalConfig {
  std::uint64_t seed = 1;
  double switch_rate = 1.0;  ///< per second; 0 means a single interval
  double horizon = 10.0;
  int count = 4;             ///< signals in the entropy family
};

struct EntropyConfig {
  Vector center;       ///< defaults to the origin
  Vector half_widths;  ///< defaults to 0.5 per axis
  int grid_resolution = 9;
  std::vector<double> epsilons{0.3, 0.15};
  std::vector<double> horizons;  ///< defaults to quarter points of the signal horizon
  int time_samples = 129;
  /// Flow fed to the estimator: "semi_simple" (the factored channel, used by
  /// the certificate) or "full" (diagnostic, the whole evolution operator).
  std::string channel = "semi_simple";
};

/// One parsed configuration document; all randomness downstream flows from
/// signal.seed.
struct RunConfig {
  std::vector<Matrix> modes;  ///< row-major matrices in the document
  double step = 1e-3;
  ToleranceConfig tolerances;
  SignalConfig signal;
  EntropyConfig entropy;
  int trajectories = 200;   ///< random signals for the envelope fit
  double fit_window = 0.5;  ///< trailing fraction of the horizon
  std::string outputs = "out";

  int n() const { return modes.empty() ? 0 : static_cast<int>(modes[0].rows()); }

  /// Parses and validates; throws InputError naming the offending field.
  static RunConfig from_json(const Json& doc);
  static RunConfig from_file(const std::string& path);

  /// Full echo with every default materialized.
  Json to_json() const;
};

/// Flat row-major serialization of a matrix.
Json matrix_to_json(const Matrix& m);

} // namespace liestab

#endif
