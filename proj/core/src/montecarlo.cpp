#include "qlimits/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "qlimits/error.hpp"
#include "qlimits/philox.hpp"

namespace qlimits {

namespace {

using Poisson = boost::random::poisson_distribution<std::int64_t, double>;

// Splits [0, n) into contiguous chunks, one per worker.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

void check_noise(const NoiseKind& noise) {
  if (!(noise.sigma_P > 0.0) || !(noise.sigma_Q > 0.0)) {
    throw_invalid("noise sigmas must be positive");
  }
  if (noise.model == NoiseModel::sub_poisson_gaussian && noise.sigma_P > 1.0 + 1e-12) {
    throw_invalid("sub-Poisson noise requires sigma_P^2 <= 1");
  }
}

std::vector<complex> gauge_means(const Field& mode, std::span<const double> phase, double N) {
  std::vector<complex> m(mode.size());
  const double amp = 2.0 * std::sqrt(N);
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] = amp * mode[k] * std::polar(1.0, -phase[k]);
  }
  return m;
}

}  // namespace

NoiseKind NoiseKind::sub_poisson(double sigma_P) {
  NoiseKind n{NoiseModel::sub_poisson_gaussian, sigma_P, 1.0};
  check_noise(n);
  return n;
}

NoiseKind NoiseKind::gaussian_field(double sigma_P, double sigma_Q) {
  NoiseKind n{NoiseModel::gaussian_field, sigma_P, sigma_Q};
  check_noise(n);
  return n;
}

std::string NoiseKind::name() const {
  switch (model) {
    case NoiseModel::poisson: return "poisson";
    case NoiseModel::sub_poisson_gaussian: return "sub_poisson_gaussian";
    case NoiseModel::gaussian_field: return "gaussian_field";
  }
  return "unknown";
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::intensity ? "intensity" : "field";
}

std::vector<double> mean_field_phase(const Field& mode) {
  double max_abs = 0.0;
  for (const auto& v : mode.values()) max_abs = std::max(max_abs, std::abs(v));
  std::vector<double> phase(mode.size(), 0.0);
  for (std::size_t k = 0; k < phase.size(); ++k) {
    if (std::abs(mode[k]) >= kModulusFloor * max_abs) phase[k] = std::arg(mode[k]);
  }
  return phase;
}

IntensitySampler::IntensitySampler(const ImageModel& model, const TransverseGrid& grid,
                                   double N, NoiseKind noise, double p)
    : noise_(noise) {
  check_noise(noise_);
  if (!noise_.is_intensity()) throw_invalid("invalid noise kind for scheme");
  if (!(N > 0.0)) throw_invalid("N must be positive");
  const Field mode = mode_at(model, grid, p);
  means_.resize(mode.size());
  const double dA = grid.cell_measure();
  for (std::size_t k = 0; k < means_.size(); ++k) means_[k] = N * std::norm(mode[k]) * dA;
  const double peak = *std::max_element(means_.begin(), means_.end());
  if (peak > 1e15) throw_invalid("pixel mean outside count range");
}

void IntensitySampler::draw(std::uint64_t seed, std::uint64_t trial,
                            std::span<double> out) const {
  if (out.size() != means_.size()) throw_invalid("output size does not match grid");
  for (std::size_t k = 0; k < means_.size(); ++k) {
    const double mean = means_[k];
    if (!(mean > 0.0)) {
      out[k] = 0.0;
      continue;
    }
    CounterStream rng(seed, trial, static_cast<std::uint32_t>(k));
    if (noise_.model == NoiseModel::poisson) {
      out[k] = static_cast<double>(Poisson(mean)(rng));
    } else {
      boost::random::normal_distribution<double> z;
      out[k] = mean + noise_.sigma_P * std::sqrt(mean) * z(rng);
    }
  }
}

FieldSampler::FieldSampler(const ImageModel& model, const TransverseGrid& grid, double N,
                           NoiseKind noise, double p)
    : noise_(noise) {
  check_noise(noise_);
  if (noise_.model != NoiseModel::gaussian_field) throw_invalid("invalid noise kind for scheme");
  if (!(N > 0.0)) throw_invalid("N must be positive");
  phase_ = mean_field_phase(mode_at(model, grid, 0.0));
  means_ = gauge_means(mode_at(model, grid, p), phase_, N);
  const double inv_sqrt_dA = 1.0 / std::sqrt(grid.cell_measure());
  cell_sd_P_ = noise_.sigma_P * inv_sqrt_dA;
  cell_sd_Q_ = noise_.sigma_Q * inv_sqrt_dA;
}

void FieldSampler::draw(std::uint64_t seed, std::uint64_t trial,
                        std::span<complex> out) const {
  if (out.size() != means_.size()) throw_invalid("output size does not match grid");
  for (std::size_t k = 0; k < means_.size(); ++k) {
    // Top bit of the cell word: field streams never coincide with count streams.
    CounterStream rng(seed, trial, static_cast<std::uint32_t>(k) | 0x80000000u);
    boost::random::normal_distribution<double> z;
    const double P = means_[k].real() + cell_sd_P_ * z(rng);
    const double Q = means_[k].imag() + cell_sd_Q_ * z(rng);
    out[k] = complex{P, Q};
  }
}

std::vector<double> sample_intensity(const ImageModel& model, const TransverseGrid& grid,
                                     double N, NoiseKind noise, double p,
                                     std::uint64_t seed, std::uint64_t trial) {
  IntensitySampler sampler(model, grid, N, noise, p);
  std::vector<double> out(grid.size());
  sampler.draw(seed, trial, out);
  return out;
}

std::vector<complex> sample_field(const ImageModel& model, const TransverseGrid& grid,
                                  double N, NoiseKind noise, double p, std::uint64_t seed,
                                  std::uint64_t trial) {
  FieldSampler sampler(model, grid, N, noise, p);
  std::vector<complex> out(grid.size());
  sampler.draw(seed, trial, out);
  return out;
}

IntensityEstimator::IntensityEstimator(GainDistribution gain, const ImageModel& model,
                                       double N)
    : gain_(std::move(gain)) {
  if (!is_balanced(gain_, model)) throw_invalid("gain not balanced");
  slope_ = signal_slope(gain_, model, N);
  if (!(std::abs(slope_) > 0.0)) throw_numeric("gain insensitive to p");
}

double IntensityEstimator::operator()(std::span<const double> counts) const {
  if (counts.size() != gain_.size()) throw_invalid("incompatible grids");
  double s = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) s += gain_[k] * counts[k];
  return s / slope_;
}

FieldEstimator::FieldEstimator(const HomodyneConfig& config, const ImageModel& model) {
  const auto& lo = config.lo_mode();
  const auto phase = mean_field_phase(mode_at(model, config.grid(), 0.0));
  const complex rot = std::polar(1.0, -config.theta_LO());
  // n_- = sqrt(N_LO) Re[e^{-i theta} sum conj(lo_k) E_k dA], E_k in the lab frame.
  const double scale = std::sqrt(config.N_LO()) * config.grid().cell_measure();
  weights_.resize(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    weights_[k] = scale * rot * std::conj(lo[k]) * std::polar(1.0, phase[k]);
  }
  slope_ = homodyne_slope(config, model);
  if (!(std::abs(slope_) > 0.0)) throw_numeric("gain insensitive to p");
}

double FieldEstimator::operator()(std::span<const complex> samples) const {
  if (samples.size() != weights_.size()) throw_invalid("incompatible grids");
  double n_minus = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) n_minus += (weights_[k] * samples[k]).real();
  return n_minus / slope_;
}

double estimate_intensity(std::span<const double> counts, const GainDistribution& gain,
                          const ImageModel& model, double N) {
  return IntensityEstimator(gain, model, N)(counts);
}

double estimate_field(std::span<const complex> samples, const HomodyneConfig& config,
                      const ImageModel& model) {
  return FieldEstimator(config, model)(samples);
}

NoiseKind noise_for(Scheme scheme, const Illumination& illumination) {
  if (scheme == Scheme::field) {
    return NoiseKind::gaussian_field(illumination.sigma_P(), illumination.sigma_Q());
  }
  if (illumination.sigma_P() == 1.0) return NoiseKind::poisson();
  return NoiseKind::sub_poisson(illumination.sigma_P());
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleSummary summarize(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw_invalid("need at least two samples");
  const double nd = static_cast<double>(n);
  const double mean = pairwise_sum(values) / nd;
  std::vector<double> d2(n), d4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double var = pairwise_sum(d2) / (nd - 1.0);
  const double sd = std::sqrt(var);
  // Delta-method standard error of s from the sample fourth moment.
  const double m4 = pairwise_sum(d4) / nd;
  double se = 0.0;
  if (sd > 0.0 && n > 3) {
    const double var_of_var = std::max(0.0, (m4 - var * var * (nd - 3.0) / (nd - 1.0)) / nd);
    se = std::sqrt(var_of_var) / (2.0 * sd);
  }
  return SampleSummary{mean, sd, se};
}

TrialBatch run_batch(const SchemeConfig& scheme, const ImageModel& model,
                     const Illumination& illumination, double true_p, std::size_t n_trials,
                     std::uint64_t seed, unsigned threads) {
  if (n_trials < 100) throw_invalid("n_trials must be at least 100");
  std::vector<double> estimates(n_trials);
  const double N = illumination.N();

  Scheme kind;
  NoiseKind noise;
  if (const auto* intensity = std::get_if<IntensitySchemeConfig>(&scheme)) {
    kind = Scheme::intensity;
    noise = noise_for(kind, illumination);
    const auto& grid = intensity->gain.grid();
    const IntensityEstimator estimator(intensity->gain, model, N);
    const IntensitySampler sampler(model, grid, N, noise, true_p);
    parallel_for(n_trials, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> counts(grid.size());
      for (std::size_t t = begin; t < end; ++t) {
        sampler.draw(seed, t, counts);
        estimates[t] = estimator(counts);
      }
    });
  } else {
    const auto& field = std::get<FieldSchemeConfig>(scheme);
    kind = Scheme::field;
    noise = noise_for(kind, illumination);
    if (std::abs(field.homodyne.N() - N) > 1e-12 * N) {
      throw_invalid("homodyne N does not match illumination");
    }
    const auto& grid = field.homodyne.grid();
    const FieldEstimator estimator(field.homodyne, model);
    const FieldSampler sampler(model, grid, N, noise, true_p);
    parallel_for(n_trials, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<complex> samples(grid.size());
      for (std::size_t t = begin; t < end; ++t) {
        sampler.draw(seed, t, samples);
        estimates[t] = estimator(samples);
      }
    });
  }

  const auto s = summarize(estimates);
  return TrialBatch{kind, noise, seed, true_p, std::move(estimates), s.mean, s.std,
                    s.std_error_of_std};
}

namespace {

// Log-likelihood of one observation under the means of a given p, up to
// terms that do not depend on p.
struct LogLikelihood {
  NoiseKind noise;
  double cell_var_P = 1.0;
  double cell_var_Q = 1.0;

  double intensity(std::span<const double> counts, std::span<const double> means) const {
    double l = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double m = means[k];
      if (!(m > 0.0)) continue;
      if (noise.model == NoiseModel::poisson) {
        l += counts[k] * std::log(m) - m;
      } else {
        const double s2 = noise.sigma_P * noise.sigma_P * m;
        const double d = counts[k] - m;
        l -= d * d / (2.0 * s2) + 0.5 * std::log(m);
      }
    }
    return l;
  }

  double field(std::span<const complex> samples, std::span<const complex> means) const {
    double l = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const complex d = samples[k] - means[k];
      l -= d.real() * d.real() / (2.0 * cell_var_P) + d.imag() * d.imag() / (2.0 * cell_var_Q);
    }
    return l;
  }
};

}  // namespace

double empirical_fisher(const ImageModel& model, const TransverseGrid& grid, double N,
                        NoiseKind noise, double p_step, std::size_t n_trials,
                        std::uint64_t seed, unsigned threads) {
  check_noise(noise);
  if (grid.size() > 64) throw_invalid("empirical_fisher needs a grid of at most 64 cells");
  if (!(N > 0.0) || N > 1e3) throw_invalid("empirical_fisher needs 0 < N <= 1000");
  if (!(p_step > 0.0)) throw_invalid("p_step must be positive");
  if (n_trials < 2) throw_invalid("need at least two trials");

  // Offsets -h, -h/2, 0, h/2, h; data always drawn at p = 0.
  const std::array<double, 5> offsets{-p_step, -0.5 * p_step, 0.0, 0.5 * p_step, p_step};
  std::vector<double> curv_full(n_trials), curv_half(n_trials);
  const double h2 = p_step * p_step;
  auto record = [&](std::size_t t, const std::array<double, 5>& l) {
    curv_full[t] = (l[4] - 2.0 * l[2] + l[0]) / h2;
    curv_half[t] = (l[3] - 2.0 * l[2] + l[1]) / (0.25 * h2);
  };

  LogLikelihood ll{noise};
  if (noise.is_intensity()) {
    std::vector<std::vector<double>> means;
    for (double p : offsets) {
      const IntensitySampler s(model, grid, N, noise, p);
      means.emplace_back(s.means().begin(), s.means().end());
    }
    const IntensitySampler sampler(model, grid, N, noise, 0.0);
    parallel_for(n_trials, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> counts(grid.size());
      std::array<double, 5> l{};
      for (std::size_t t = begin; t < end; ++t) {
        sampler.draw(seed, t, counts);
        for (std::size_t j = 0; j < offsets.size(); ++j) l[j] = ll.intensity(counts, means[j]);
        record(t, l);
      }
    });
  } else {
    std::vector<std::vector<complex>> means;
    for (double p : offsets) {
      const FieldSampler s(model, grid, N, noise, p);
      means.emplace_back(s.means().begin(), s.means().end());
    }
    ll.cell_var_P = noise.sigma_P * noise.sigma_P / grid.cell_measure();
    ll.cell_var_Q = noise.sigma_Q * noise.sigma_Q / grid.cell_measure();
    const FieldSampler sampler(model, grid, N, noise, 0.0);
    parallel_for(n_trials, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<complex> samples(grid.size());
      std::array<double, 5> l{};
      for (std::size_t t = begin; t < end; ++t) {
        sampler.draw(seed, t, samples);
        for (std::size_t j = 0; j < offsets.size(); ++j) l[j] = ll.field(samples, means[j]);
        record(t, l);
      }
    });
  }

  const double trials = static_cast<double>(n_trials);
  const double fisher_full = -pairwise_sum(curv_full) / trials;
  const double fisher_half = -pairwise_sum(curv_half) / trials;
  const double scale = std::max(std::abs(fisher_full), std::abs(fisher_half));
  const double floor = 1e-6 * N / (model.p_scale() * model.p_scale());
  if (std::abs(fisher_full - fisher_half) > 0.05 * scale + floor) {
    throw_numeric("p_step too large");
  }
  return fisher_full;
}

}  // namespace qlimits
