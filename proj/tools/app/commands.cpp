#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csv.hpp"
#include "qlimits/array_detection.hpp"
#include "qlimits/bounds.hpp"
#include "qlimits/error.hpp"
#include "qlimits/homodyne.hpp"
#include "qlimits/montecarlo.hpp"

namespace qlimits::app {

namespace {

std::string model_label(const ModelSpec& spec) {
  return spec.name.empty() ? spec.kind : spec.name;
}

struct BoundsRow {
  SensitivitySummary summary;
  double sigma_Q2;
};

BoundsRow compute_bounds(const RunConfig& config) {
  const auto model = build_model(config.model);
  const auto grid = build_grid(config);
  const auto illumination = build_illumination(config.illumination);
  return BoundsRow{crb_summary(model, grid, illumination),
                   config.illumination.effective_sigma_Q2()};
}

void add_bounds_cells(CsvTable::Row& row, const RunConfig& config, const BoundsRow& b) {
  const auto& s = b.summary;
  row.add(model_label(config.model))
      .add(config.illumination.N)
      .add(config.illumination.sigma_P2)
      .add(b.sigma_Q2)
      .add(s.a)
      .add(s.b)
      .add(s.fisher_poisson)
      .add(s.fisher_gauss)
      .add(s.crb_intensity)
      .add(s.crb_field);
}

struct McRow {
  TrialBatch batch;
  double crb;
};

std::vector<Scheme> schemes_of(SchemeChoice choice) {
  switch (choice) {
    case SchemeChoice::intensity: return {Scheme::intensity};
    case SchemeChoice::field: return {Scheme::field};
    case SchemeChoice::both: return {Scheme::intensity, Scheme::field};
  }
  return {};
}

std::vector<McRow> run_simulations(const RunConfig& config, const SensitivitySummary& bounds,
                                   unsigned threads) {
  const auto model = build_model(config.model);
  const auto grid = build_grid(config);
  const auto illumination = build_illumination(config.illumination);
  const auto& mc = *config.mc;

  std::vector<McRow> rows;
  for (Scheme scheme : schemes_of(config.scheme)) {
    if (scheme == Scheme::intensity) {
      const SchemeConfig sc = IntensitySchemeConfig{optimal_gain(model, grid)};
      rows.push_back({run_batch(sc, model, illumination, mc.true_p, mc.n_trials, mc.seed, threads),
                      bounds.crb_intensity});
    } else {
      const double lo_ratio = config.lo_ratio.value_or(kDefaultLoRatio);
      const SchemeConfig sc =
          FieldSchemeConfig{matched_homodyne(model, grid, illumination.N(), lo_ratio * illumination.N())};
      rows.push_back({run_batch(sc, model, illumination, mc.true_p, mc.n_trials, mc.seed, threads),
                      bounds.crb_field});
    }
  }
  return rows;
}

void add_mc_cells(CsvTable::Row& row, const McRow& r) {
  const auto& b = r.batch;
  row.add(to_string(b.scheme))
      .add(b.noise.name())
      .add(static_cast<std::uint64_t>(b.n_trials()))
      .add(b.seed)
      .add(b.true_p)
      .add(b.mean_estimate)
      .add(b.std_estimate)
      .add(r.crb)
      .add(b.std_estimate / r.crb);
}

std::string describe_bounds(const RunConfig& config, const BoundsRow& b) {
  const auto& s = b.summary;
  std::ostringstream out;
  out << "model " << model_label(config.model) << ", N = " << format_number(config.illumination.N)
      << ", sigma_P^2 = " << format_number(config.illumination.sigma_P2)
      << ", sigma_Q^2 = " << format_number(b.sigma_Q2) << "\n"
      << "  a = " << format_number(s.a) << ", b = " << format_number(s.b) << "\n"
      << "  Fisher (intensity, Poisson) = " << format_number(s.fisher_poisson)
      << ", Fisher (field, Gaussian) = " << format_number(s.fisher_gauss) << "\n"
      << "  CRB intensity = " << format_number(s.crb_intensity)
      << ", CRB field = " << format_number(s.crb_field) << "\n";
  return out.str();
}

std::string describe_mc(const McRow& r) {
  std::ostringstream out;
  out << "  " << to_string(r.batch.scheme) << " (" << r.batch.noise.name() << "): "
      << r.batch.n_trials() << " trials, mean = " << format_number(r.batch.mean_estimate)
      << ", std = " << format_number(r.batch.std_estimate)
      << " +- " << format_number(r.batch.std_error_of_std)
      << ", CRB = " << format_number(r.crb)
      << ", std/CRB = " << format_number(r.batch.std_estimate / r.crb) << "\n";
  if (r.batch.noise.model == NoiseModel::sub_poisson_gaussian) {
    out << "    note: Normal(nbar, sigma_P^2 nbar) surrogate counts; this checks the "
           "second-moment content of the sub-Poisson bound only\n";
  }
  return out.str();
}

CommandOutput::File config_echo(const RunConfig& config) {
  return {config.output_prefix + "_config", format_config(config)};
}

}  // namespace

CommandOutput cmd_bounds(const RunConfig& config) {
  validate(config);
  const auto b = compute_bounds(config);
  CsvTable table(kBoundsColumns);
  CsvTable::Row row;
  add_bounds_cells(row, config, b);
  table.append(std::move(row));
  return CommandOutput{{{config.output_prefix + "_bounds.csv", table.str()}, config_echo(config)},
                       describe_bounds(config, b)};
}

CommandOutput cmd_simulate(const RunConfig& config, unsigned threads) {
  validate(config);
  if (!config.mc) throw ConfigError({"simulate needs an [mc] section"});
  const auto b = compute_bounds(config);
  const auto rows = run_simulations(config, b.summary, threads);

  CsvTable table(kMcColumns);
  std::string summary = describe_bounds(config, b);
  for (const auto& r : rows) {
    CsvTable::Row row;
    add_mc_cells(row, r);
    table.append(std::move(row));
    summary += describe_mc(r);
  }
  return CommandOutput{{{config.output_prefix + "_mc.csv", table.str()}, config_echo(config)},
                       summary};
}

CommandOutput cmd_sweep(const RunConfig& config, unsigned threads) {
  validate(config);
  if (!config.sweep) throw ConfigError({"sweep needs a [sweep] section or --axis/--values"});
  const auto& sweep = *config.sweep;

  std::vector<std::string> header{"axis", "value"};
  header.insert(header.end(), kBoundsColumns.begin(), kBoundsColumns.end());
  if (config.mc) header.insert(header.end(), kMcColumns.begin(), kMcColumns.end());
  CsvTable table(header);
  std::string summary;

  for (double value : sweep.values) {
    RunConfig point = config;
    point.sweep.reset();
    switch (sweep.axis) {
      case SweepAxis::N: point.illumination.N = value; break;
      case SweepAxis::sigma_P2: point.illumination.sigma_P2 = value; break;
      case SweepAxis::p: point.mc->true_p = value; break;
    }
    const auto b = compute_bounds(point);
    summary += to_string(sweep.axis) + " = " + format_number(value) + "\n" +
               describe_bounds(point, b);

    auto start_row = [&] {
      CsvTable::Row row;
      row.add(to_string(sweep.axis)).add(value);
      add_bounds_cells(row, point, b);
      return row;
    };
    if (!point.mc) {
      table.append(start_row());
      continue;
    }
    for (const auto& r : run_simulations(point, b.summary, threads)) {
      auto row = start_row();
      add_mc_cells(row, r);
      table.append(std::move(row));
      summary += describe_mc(r);
    }
  }
  return CommandOutput{{{config.output_prefix + "_sweep.csv", table.str()}, config_echo(config)},
                       summary};
}

void write_outputs(const CommandOutput& output) {
  for (const auto& f : output.files) {
    const std::filesystem::path path(f.path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::invalid_argument, "cannot write '" + f.path + "'");
    file << f.contents;
    if (!file) throw Error(ErrorKind::invalid_argument, "cannot write '" + f.path + "'");
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum Cramer-Rao limits for parameter estimation from optical images"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> prefix;
  unsigned threads = 1;
  std::optional<std::string> axis;
  std::optional<std::string> values;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration file")->required();
    sub->add_option("--seed", seed, "Override mc.seed");
    sub->add_option("--out", prefix, "Override output.prefix");
    sub->add_option("--threads", threads, "Worker threads for Monte Carlo trials")
        ->check(CLI::PositiveNumber);
  };
  auto* bounds = app.add_subcommand("bounds", "Sensitivities, Fisher informations and CRBs");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimator efficiency");
  auto* sweep = app.add_subcommand("sweep", "Bounds (and Monte Carlo) over N, sigma_P2 or p");
  common(bounds);
  common(simulate);
  common(sweep);
  sweep->add_option("--axis", axis, "N | sigma_P2 | p");
  sweep->add_option("--values", values, "Comma-separated values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    RunConfig config = load_config(config_path);
    if (prefix) config.output_prefix = *prefix;
    if (seed) {
      if (!config.mc) config.mc = McSpec{};
      config.mc->seed = *seed;
    }
    if (axis || values) {
      SweepSpec s = config.sweep.value_or(SweepSpec{});
      if (axis) {
        auto parsed = parse_axis(*axis);
        if (!parsed) throw ConfigError({"--axis: expected N, sigma_P2 or p, got '" + *axis + "'"});
        s.axis = *parsed;
      }
      if (values) s.values = parse_value_list(*values);
      config.sweep = s;
    }

    CommandOutput result;
    if (*bounds) {
      result = cmd_bounds(config);
    } else if (*simulate) {
      result = cmd_simulate(config, threads);
    } else {
      result = cmd_sweep(config, threads);
    }
    write_outputs(result);
    out << result.summary;
    for (const auto& f : result.files) out << "wrote " << f.path << "\n";
    return kSuccess;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::numeric ? kNumericError : kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace qlimits::app
