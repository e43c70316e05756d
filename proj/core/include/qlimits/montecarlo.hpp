#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qlimits/array_detection.hpp"
#include "qlimits/homodyne.hpp"
#include "qlimits/models.hpp"

namespace qlimits {

enum class NoiseModel {
  poisson,               // exact pixelwise Poisson counts
  sub_poisson_gaussian,  // Normal(nbar, sigma_P^2 nbar) counts, sigma_P^2 <= 1
  gaussian_field,        // independent Gaussian quadratures per cell
};

struct NoiseKind {
  NoiseModel model = NoiseModel::poisson;
  double sigma_P = 1.0;
  double sigma_Q = 1.0;

  static NoiseKind poisson() { return {}; }
  static NoiseKind sub_poisson(double sigma_P);
  static NoiseKind gaussian_field(double sigma_P, double sigma_Q);

  bool is_intensity() const noexcept { return model != NoiseModel::gaussian_field; }
  std::string name() const;
};

enum class Scheme { intensity, field };

std::string to_string(Scheme scheme);

/// Pixel count generator for one (model, N, p). Means are computed once;
/// draw() is const and thread-safe.
class IntensitySampler {
 public:
  IntensitySampler(const ImageModel& model, const TransverseGrid& grid, double N,
                   NoiseKind noise, double p);

  std::span<const double> means() const noexcept { return means_; }
  void draw(std::uint64_t seed, std::uint64_t trial, std::span<double> out) const;

 private:
  NoiseKind noise_;
  std::vector<double> means_;
};

/// Complex field generator for one (model, N, p).
///
/// Samples are returned in the local gauge of the p = 0 mean field: cell k
/// is rotated by e^{-i phi_k}, phi_k = arg u0(r_k, 0), so the mean P
/// quadrature carries the mean field and Q is its phase quadrature. Each
/// quadrature has per-cell variance sigma^2 / dA, which gives variance
/// sigma^2 to the projection on any normalized mode.
/// Streams are disjoint from the IntensitySampler ones, so the two schemes
/// run with the same seed are statistically independent.
class FieldSampler {
 public:
  FieldSampler(const ImageModel& model, const TransverseGrid& grid, double N,
               NoiseKind noise, double p);

  std::span<const complex> means() const noexcept { return means_; }
  std::span<const double> gauge() const noexcept { return phase_; }
  void draw(std::uint64_t seed, std::uint64_t trial, std::span<complex> out) const;

 private:
  NoiseKind noise_;
  double cell_sd_P_;
  double cell_sd_Q_;
  std::vector<complex> means_;
  std::vector<double> phase_;
};

/// Local mean-field phase arg u0(r, 0), zero on cells below the modulus floor.
std::vector<double> mean_field_phase(const Field& mode);

std::vector<double> sample_intensity(const ImageModel& model, const TransverseGrid& grid,
                                     double N, NoiseKind noise, double p,
                                     std::uint64_t seed, std::uint64_t trial = 0);
std::vector<complex> sample_field(const ImageModel& model, const TransverseGrid& grid,
                                  double N, NoiseKind noise, double p, std::uint64_t seed,
                                  std::uint64_t trial = 0);

/// p_hat = S / (dS/dp), S = sum_k g_k n_k. Requires a balanced gain.
class IntensityEstimator {
 public:
  IntensityEstimator(GainDistribution gain, const ImageModel& model, double N);

  double operator()(std::span<const double> counts) const;
  double slope() const noexcept { return slope_; }

 private:
  GainDistribution gain_;
  double slope_;
};

/// p_hat = n_- / (dn_-/dp) with n_- the homodyne difference count built
/// from gauge-local field samples.
class FieldEstimator {
 public:
  FieldEstimator(const HomodyneConfig& config, const ImageModel& model);

  double operator()(std::span<const complex> samples) const;
  double slope() const noexcept { return slope_; }

 private:
  std::vector<complex> weights_;
  double slope_;
};

double estimate_intensity(std::span<const double> counts, const GainDistribution& gain,
                          const ImageModel& model, double N);
double estimate_field(std::span<const complex> samples, const HomodyneConfig& config,
                      const ImageModel& model);

struct IntensitySchemeConfig {
  GainDistribution gain;
};
struct FieldSchemeConfig {
  HomodyneConfig homodyne;
};
using SchemeConfig = std::variant<IntensitySchemeConfig, FieldSchemeConfig>;

/// Intensity: Poisson for sigma_P = 1, the Gaussian surrogate for sigma_P < 1.
/// Field: Gaussian quadratures with the illumination's sigmas.
NoiseKind noise_for(Scheme scheme, const Illumination& illumination);

struct TrialBatch {
  Scheme scheme;
  NoiseKind noise;
  std::uint64_t seed;
  double true_p;
  std::vector<double> estimates;
  double mean_estimate;
  double std_estimate;
  double std_error_of_std;

  std::size_t n_trials() const noexcept { return estimates.size(); }
};

struct SampleSummary {
  double mean;
  double std;           // unbiased (n - 1) sample standard deviation
  double std_error_of_std;
};

/// Summary statistics with pairwise summation in index order.
SampleSummary summarize(std::span<const double> values);
double pairwise_sum(std::span<const double> values);

/// Runs n_trials independent measurements at true_p. Trial t draws from
/// the streams (seed, t, cell), so the result is bit-identical for any
/// thread count.
TrialBatch run_batch(const SchemeConfig& scheme, const ImageModel& model,
                     const Illumination& illumination, double true_p, std::size_t n_trials,
                     std::uint64_t seed, unsigned threads = 1);

/// Brute-force Fisher information: minus the sample mean of the central
/// second difference of the exact log-likelihood at p = 0, with data drawn
/// at p = 0. Throws when halving p_step changes the result by more than 5%.
double empirical_fisher(const ImageModel& model, const TransverseGrid& grid, double N,
                        NoiseKind noise, double p_step, std::size_t n_trials,
                        std::uint64_t seed, unsigned threads = 1);

}  // namespace qlimits
