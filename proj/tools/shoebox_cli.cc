/*
Copyright 2026 The Shoebox Inversion Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Command-line driver for the simulate / invert / evaluate pipeline.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "shoebox/errors.h"
#include "shoebox/json_io.h"
#include "shoebox/study.h"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> rooms;
  std::optional<double> fs;
  std::optional<double> array_scale;
  std::optional<double> psnr;
  std::optional<std::string> array;
  std::optional<std::string> output;
  std::optional<int> workers;
  bool oracle_cloud = false;
  bool print_config = false;
};

shoebox::StudyConfig Resolve(const Overrides& o) {
  shoebox::StudyConfig cfg;
  if (!o.config_path.empty()) {
    shoebox::ApplyJson(shoebox::ReadJsonFile(o.config_path), &cfg);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.rooms) cfg.n_rooms = *o.rooms;
  if (o.fs) cfg.fs = *o.fs;
  if (o.array_scale) cfg.array.scale = *o.array_scale;
  if (o.array) cfg.array.name = *o.array;
  if (o.psnr) cfg.psnr_db = *o.psnr;
  if (o.output) cfg.output_dir = *o.output;
  if (o.workers) cfg.workers = *o.workers;
  if (o.oracle_cloud) cfg.oracle_cloud = true;
  cfg.Validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shoebox room inversion: simulate RIRs, recover image sources "
               "and room parameters, evaluate and extrapolate."};
  app.fallthrough();
  app.require_subcommand(1, 1);

  Overrides o;
  app.add_option("--config", o.config_path, "JSON study configuration")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--rooms", o.rooms, "number of rooms")->check(CLI::PositiveNumber);
  app.add_option("--fs", o.fs, "sampling rate in Hz")->check(CLI::PositiveNumber);
  app.add_option("--array", o.array, "em32, double_square or a CSV path");
  app.add_option("--array-scale", o.array_scale, "array scale factor")
      ->check(CLI::PositiveNumber);
  app.add_option("--psnr", o.psnr, "input PSNR in dB (noiseless if omitted)");
  app.add_option("--output", o.output, "output directory");
  app.add_option("--workers", o.workers, "rooms processed concurrently");
  app.add_flag("--oracle-cloud", o.oracle_cloud,
               "use the exact image sources instead of SFW");
  app.add_flag("--print-config", o.print_config,
               "print the resolved configuration and exit");

  auto* simulate = app.add_subcommand("simulate", "generate scenes and RIRs");
  auto* invert = app.add_subcommand("invert", "recover clouds and rooms");
  auto* evaluate = app.add_subcommand("evaluate", "write metric reports");
  auto* extrapolate =
      app.add_subcommand("extrapolate", "re-simulate new placements, SER table");
  auto* plot = app.add_subcommand("plot", "SVG and CSV figures from reports");
  auto* all = app.add_subcommand("all", "every stage in order");

  CLI11_PARSE(app, argc, argv);

  try {
    const shoebox::StudyConfig cfg = Resolve(o);
    if (o.print_config) {
      std::cout << shoebox::DumpJson(shoebox::StudyConfigToJson(cfg)) << "\n";
      return 0;
    }
    int failed = 0;
    if (simulate->parsed()) failed = shoebox::CmdSimulate(cfg);
    if (invert->parsed()) failed = shoebox::CmdInvert(cfg);
    if (extrapolate->parsed()) failed = shoebox::CmdExtrapolate(cfg);
    if (evaluate->parsed()) failed = shoebox::CmdEvaluate(cfg);
    if (plot->parsed()) failed = shoebox::CmdPlot(cfg);
    if (all->parsed()) failed = shoebox::CmdAll(cfg);
    std::fprintf(stderr, "%d of %d rooms failed; outputs in %s\n", failed,
                 cfg.n_rooms, cfg.output_dir.c_str());
    return failed == 0 ? 0 : 1;
  } catch (const shoebox::ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
