#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qlimits/models.hpp"
#include "qlimits/transverse.hpp"

namespace qlimits::app {

/// Every problem found while reading or validating a configuration,
/// reported together.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ModelSpec {
  std::string kind = "displaced_gaussian";  // displaced_gaussian | waist_scaled_gaussian | phase_tilt | custom
  std::string name;                         // defaults to kind
  double waist = 1.0;
  double kappa = 1.0;                       // phase_tilt only
  std::optional<double> p_scale;            // family default when absent
  std::string expression;                   // custom only

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct GridSpec {
  int dimension = 1;
  std::optional<double> extent;         // 6 waists when absent
  std::optional<std::size_t> points;    // 256 (1D) / 128 (2D) when absent

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct IlluminationSpec {
  double N = 1e4;
  double sigma_P2 = 1.0;
  std::optional<double> sigma_Q2;  // max(1, 1/sigma_P2) when absent

  double effective_sigma_Q2() const noexcept;
  friend bool operator==(const IlluminationSpec&, const IlluminationSpec&) = default;
};

enum class SchemeChoice { intensity, field, both };

struct McSpec {
  std::size_t n_trials = 100000;
  double true_p = 0.0;
  std::uint64_t seed = 1;

  friend bool operator==(const McSpec&, const McSpec&) = default;
};

enum class SweepAxis { N, sigma_P2, p };

struct SweepSpec {
  SweepAxis axis = SweepAxis::N;
  std::vector<double> values;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct RunConfig {
  ModelSpec model;
  GridSpec grid;
  IlluminationSpec illumination;
  SchemeChoice scheme = SchemeChoice::both;
  std::optional<double> lo_ratio;  // N_LO / N, kDefaultLoRatio when absent
  std::optional<McSpec> mc;
  std::optional<SweepSpec> sweep;
  std::string output_prefix = "qlimits";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string to_string(SchemeChoice scheme);
std::string to_string(SweepAxis axis);
std::optional<SweepAxis> parse_axis(std::string_view text);
std::vector<double> parse_value_list(std::string_view text);

/// Parses the sectioned key = value format. Throws ConfigError listing
/// every unknown key and malformed value.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Checks every numeric field against the library preconditions and throws
/// one ConfigError with all violations.
void validate(const RunConfig& config);

/// Writes the configuration back in the format parse_config() reads.
std::string format_config(const RunConfig& config);

ImageModel build_model(const ModelSpec& spec);
TransverseGrid build_grid(const RunConfig& config);
Illumination build_illumination(const IlluminationSpec& spec);

}  // namespace qlimits::app
