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

#include "shoebox/study.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "shoebox/errors.h"
#include "shoebox/image_sources.h"
#include "shoebox/parallel.h"
#include "shoebox/plot.h"
#include "shoebox/recovered_room.h"

namespace shoebox {
namespace {

namespace fs = std::filesystem;

template <typename T>
void Read(const Json& j, const char* key, T* out) {
  if (j.contains(key) && !j.at(key).is_null()) *out = j.at(key).get<T>();
}

Json SfwToJson(const SfwConfig& c) {
  Json j;
  j["lambda_rel"] = c.lambda_rel;
  j["lambda"] = c.lambda;
  j["max_spikes"] = c.max_spikes;
  j["candidate_grid"] = Json{{"radial_step_m", c.grid.radial_step},
                             {"angular_step_rad", c.grid.angular_step},
                             {"min_radius_m", c.grid.min_radius},
                             {"upsample", c.grid.upsample}};
  j["certificate_tolerance"] = c.certificate_tolerance;
  j["amp_min_pre"] = c.amp_min_pre;
  j["amp_min_post"] = c.amp_min_post;
  j["max_stalls"] = c.max_stalls;
  j["max_radius_m"] = c.max_radius;
  j["ascent_iterations"] = c.ascent_iterations;
  j["joint_iterations"] = c.joint_iterations;
  j["final_joint_iterations"] = c.final_joint_iterations;
  j["joint_tolerance"] = c.joint_tolerance;
  j["amplitude_sweeps"] = c.amplitude_sweeps;
  j["debias"] = c.debias;
  j["normalized_selection"] = c.normalized_selection;
  j["significance"] = c.significance;
  return j;
}

void ApplySfw(const Json& j, SfwConfig* c) {
  Read(j, "lambda_rel", &c->lambda_rel);
  Read(j, "lambda", &c->lambda);
  Read(j, "max_spikes", &c->max_spikes);
  if (j.contains("candidate_grid")) {
    const Json& g = j.at("candidate_grid");
    Read(g, "radial_step_m", &c->grid.radial_step);
    Read(g, "angular_step_rad", &c->grid.angular_step);
    Read(g, "min_radius_m", &c->grid.min_radius);
    Read(g, "upsample", &c->grid.upsample);
  }
  Read(j, "certificate_tolerance", &c->certificate_tolerance);
  Read(j, "amp_min_pre", &c->amp_min_pre);
  Read(j, "amp_min_post", &c->amp_min_post);
  Read(j, "max_stalls", &c->max_stalls);
  Read(j, "max_radius_m", &c->max_radius);
  Read(j, "ascent_iterations", &c->ascent_iterations);
  Read(j, "joint_iterations", &c->joint_iterations);
  Read(j, "final_joint_iterations", &c->final_joint_iterations);
  Read(j, "joint_tolerance", &c->joint_tolerance);
  Read(j, "amplitude_sweeps", &c->amplitude_sweeps);
  Read(j, "debias", &c->debias);
  Read(j, "normalized_selection", &c->normalized_selection);
  Read(j, "significance", &c->significance);
}

std::string Describe(const std::exception& e) { return e.what(); }

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void WriteJson(const std::string& path, const Json& j) {
  WriteTextFile(path, DumpJson(j) + "\n");
}

void WriteConfigEcho(const StudyConfig& cfg, const std::string& dir) {
  WriteJson(Join(dir, "config.json"), StudyConfigToJson(cfg));
}

// Runs fn(i) for each room, capturing exceptions as per-room failures.
std::vector<std::string> ForEachRoom(const StudyConfig& cfg,
                                     const std::function<void(int)>& fn) {
  std::vector<std::string> failures(cfg.n_rooms);
  ParallelFor(
      cfg.n_rooms,
      [&](int i) {
        try {
          fn(i);
        } catch (const std::exception& e) {
          failures[i] = Describe(e);
        }
      },
      cfg.workers);
  return failures;
}

int WriteManifest(const StudyConfig& cfg, const std::string& stage,
                  const std::vector<std::string>& failures,
                  const std::vector<std::vector<std::string>>& flags) {
  Json rooms = Json::array();
  int failed = 0;
  for (int i = 0; i < cfg.n_rooms; ++i) {
    Json r;
    r["room_id"] = RoomId(i);
    r["seed"] = RoomSeed(cfg.seed, i);
    r["status"] = failures[i].empty() ? "ok" : "failed";
    r["failure"] = failures[i];
    r["flags"] = flags.empty() ? std::vector<std::string>{} : flags[i];
    if (!failures[i].empty()) ++failed;
    rooms.push_back(r);
  }
  Json m;
  m["stage"] = stage;
  m["config"] = StudyConfigToJson(cfg);
  m["num_rooms"] = cfg.n_rooms;
  m["num_failed"] = failed;
  m["rooms"] = rooms;
  WriteJson(Join(cfg.output_dir, stage + "_manifest.json"), m);
  return failed;
}

Json InversionLogToJson(const InversionResult& r) {
  Json j;
  j["ok"] = r.recovered.has_value();
  j["failure"] = r.failure;
  j["flags"] = r.flags;
  j["lambda"] = r.lambda;
  j["lambda_note"] = "implementation-chosen: lambda = lambda_rel * max certificate correlation";
  j["sfw_iterations"] = r.sfw_iterations;
  j["final_certificate"] = r.final_certificate;
  j["sfw_converged"] = r.sfw_converged;
  j["num_spikes"] = r.cloud.size();
  j["true_source_index"] = r.recovery_diagnostics.true_source_index;
  Json hits = Json::array();
  for (int w = 0; w < 6; ++w) {
    const ConeHit& h = r.recovery_diagnostics.hits[w];
    hits.push_back(Json{{"index", h.index},
                        {"half_angle_rad", h.half_angle},
                        {"widenings", h.widenings},
                        {"fused_members", r.recovery_diagnostics.fused_members[w]}});
  }
  j["cone_hits"] = hits;
  return j;
}

MultichannelRir ReadInputRir(const std::string& dir) {
  const std::string noisy = Join(dir, "rir_noisy");
  if (fs::exists(noisy + ".f64")) return ReadRir(noisy);
  return ReadRir(Join(dir, "rir_clean"));
}

Json PlacementToJson(const Placement& p) {
  Json j;
  j["source_m"] = ToJson(p.source);
  j["array_center_m"] = ToJson(p.array_pose.center);
  std::vector<double> r(9);
  for (int i = 0; i < 9; ++i) r[i] = p.array_pose.orientation.matrix()(i / 3, i % 3);
  j["array_rotation"] = r;
  return j;
}

}  // namespace

void StudyConfig::Validate() const {
  if (n_rooms < 1) throw ValidationError("n_rooms must be >= 1");
  if (!(fs > 0.0) || !(duration > 0.0)) {
    throw ValidationError("fs and duration must be positive");
  }
  if (!(array.scale > 0.0)) throw ValidationError("array scale must be positive");
  if (psnr_db && !(*psnr_db > 0.0 || std::isinf(*psnr_db))) {
    throw ValidationError("psnr_db must be positive");
  }
  if (oracle_max_order < 1) throw ValidationError("oracle_max_order must be >= 1");
  if (!(absorption_threshold > 0.0) || !(ser_cap_db > 0.0)) {
    throw ValidationError("invalid evaluation thresholds");
  }
  for (double t : recall_thresholds_m) {
    if (!(t >= 0.0)) throw ValidationError("recall thresholds must be >= 0");
  }
  if (workers < 0) throw ValidationError("workers must be >= 0");
  scenes.Validate();
  sfw.Validate();
  orientation.Validate();
  recovery.Validate();
}

MicArray StudyConfig::MakeArray() const {
  return MicArray::ByName(array.name, array.scale);
}

Json StudyConfigToJson(const StudyConfig& c) {
  Json j;
  j["n_rooms"] = c.n_rooms;
  j["seed"] = c.seed;
  j["fs"] = c.fs;
  j["duration"] = c.duration;
  j["array"] = Json{{"name", c.array.name}, {"scale_factor", c.array.scale}};
  j["psnr_db"] = c.psnr_db ? Json(*c.psnr_db) : Json(nullptr);
  j["scenes"] = Json{{"dims_min_m", ToJson(c.scenes.dims_min)},
                     {"dims_max_m", ToJson(c.scenes.dims_max)},
                     {"absorption_min", c.scenes.absorption_min},
                     {"absorption_max", c.scenes.absorption_max},
                     {"source_wall_margin_m", c.scenes.source_wall_margin},
                     {"random_rotation", c.scenes.random_rotation},
                     {"max_attempts", c.scenes.max_attempts}};
  j["sfw"] = SfwToJson(c.sfw);
  j["orientation"] = Json{{"sigma_schedule", c.orientation.sigma_schedule},
                          {"sphere_mesh_size", c.orientation.sphere_mesh_size},
                          {"circle_mesh_size", c.orientation.circle_mesh_size},
                          {"num_starts", c.orientation.num_starts},
                          {"max_iterations", c.orientation.max_iterations},
                          {"angle_tolerance", c.orientation.angle_tolerance}};
  j["recovery"] = Json{
      {"mu_m", c.recovery.mu},
      {"cone",
       Json{{"initial_half_angle_rad", c.recovery.cone.initial_half_angle},
            {"widen_factor", c.recovery.cone.widen_factor},
            {"max_half_angle_rad", c.recovery.cone.max_half_angle}}}};
  j["oracle_cloud"] = c.oracle_cloud;
  j["oracle_max_order"] = c.oracle_max_order;
  j["recall_thresholds_m"] = c.recall_thresholds_m;
  j["absorption_threshold"] = c.absorption_threshold;
  j["ser_cap_db"] = c.ser_cap_db;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  return j;
}

void ApplyJson(const Json& j, StudyConfig* c) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    Read(j, "n_rooms", &c->n_rooms);
    Read(j, "seed", &c->seed);
    Read(j, "fs", &c->fs);
    Read(j, "duration", &c->duration);
    if (j.contains("array")) {
      Read(j.at("array"), "name", &c->array.name);
      Read(j.at("array"), "scale_factor", &c->array.scale);
    }
    if (j.contains("psnr_db")) {
      if (j.at("psnr_db").is_null()) {
        c->psnr_db.reset();
      } else {
        c->psnr_db = j.at("psnr_db").get<double>();
      }
    }
    if (j.contains("scenes")) {
      const Json& s = j.at("scenes");
      if (s.contains("dims_min_m")) c->scenes.dims_min = Vec3FromJson(s.at("dims_min_m"));
      if (s.contains("dims_max_m")) c->scenes.dims_max = Vec3FromJson(s.at("dims_max_m"));
      Read(s, "absorption_min", &c->scenes.absorption_min);
      Read(s, "absorption_max", &c->scenes.absorption_max);
      Read(s, "source_wall_margin_m", &c->scenes.source_wall_margin);
      Read(s, "random_rotation", &c->scenes.random_rotation);
      Read(s, "max_attempts", &c->scenes.max_attempts);
    }
    if (j.contains("sfw")) ApplySfw(j.at("sfw"), &c->sfw);
    if (j.contains("orientation")) {
      const Json& o = j.at("orientation");
      Read(o, "sigma_schedule", &c->orientation.sigma_schedule);
      Read(o, "sphere_mesh_size", &c->orientation.sphere_mesh_size);
      Read(o, "circle_mesh_size", &c->orientation.circle_mesh_size);
      Read(o, "num_starts", &c->orientation.num_starts);
      Read(o, "max_iterations", &c->orientation.max_iterations);
      Read(o, "angle_tolerance", &c->orientation.angle_tolerance);
    }
    if (j.contains("recovery")) {
      const Json& r = j.at("recovery");
      Read(r, "mu_m", &c->recovery.mu);
      if (r.contains("cone")) {
        const Json& k = r.at("cone");
        Read(k, "initial_half_angle_rad", &c->recovery.cone.initial_half_angle);
        Read(k, "widen_factor", &c->recovery.cone.widen_factor);
        Read(k, "max_half_angle_rad", &c->recovery.cone.max_half_angle);
      }
    }
    Read(j, "oracle_cloud", &c->oracle_cloud);
    Read(j, "oracle_max_order", &c->oracle_max_order);
    Read(j, "recall_thresholds_m", &c->recall_thresholds_m);
    Read(j, "absorption_threshold", &c->absorption_threshold);
    Read(j, "ser_cap_db", &c->ser_cap_db);
    Read(j, "output_dir", &c->output_dir);
    Read(j, "workers", &c->workers);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
}

StudyConfig StudyConfigFromJson(const Json& j) {
  StudyConfig c;
  ApplyJson(j, &c);
  return c;
}

std::uint64_t RoomSeed(std::uint64_t master_seed, int room_index) {
  return MixSeed(master_seed, static_cast<std::uint64_t>(room_index));
}

std::string RoomId(int room_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "room_%03d", room_index);
  return buf;
}

std::string RoomDir(const StudyConfig& cfg, int room_index) {
  return Join(Join(cfg.output_dir, "rooms"), RoomId(room_index));
}

RoomSimulation SimulateRoom(const StudyConfig& cfg, int room_index) {
  const std::uint64_t seed = RoomSeed(cfg.seed, room_index);
  RoomSimulation sim{RandomScene(cfg.scenes, seed, cfg.MakeArray()), {}, {}};
  sim.clean = SimulateSceneRir(sim.scene, cfg.fs, cfg.duration);
  if (cfg.psnr_db) {
    sim.noisy = AddNoisePsnr(sim.clean, NoiseSpec{*cfg.psnr_db, MixSeed(seed, 2)});
  }
  return sim;
}

InversionResult InvertRoom(const StudyConfig& cfg, const Scene& scene,
                           const MultichannelRir& input) {
  const auto start = std::chrono::steady_clock::now();
  InversionResult out;
  try {
    if (cfg.oracle_cloud) {
      out.cloud = EnumerateImageSources(scene, cfg.oracle_max_order,
                                        std::numeric_limits<double>::infinity());
    } else {
      if (input.IsZero()) throw DegenerateInputError("all-zero RIR");
      SfwResult sfw = SfwLocalize(input, scene.array, cfg.sfw);
      out.cloud = std::move(sfw.cloud);
      out.lambda = sfw.lambda;
      out.sfw_iterations = sfw.iterations;
      out.final_certificate = sfw.final_certificate_max;
      out.sfw_converged = sfw.converged;
      out.flags = sfw.warnings;
    }
    const Basis basis = EstimateOrientation(out.cloud, cfg.orientation);
    out.recovered = RecoverRoom(out.cloud, basis, cfg.recovery,
                                &out.recovery_diagnostics);
    for (int w = 0; w < 6; ++w) {
      if (out.recovered->raw_absorptions[w] < 0.0) {
        out.flags.push_back("negative raw absorption on wall " +
                            std::to_string(w) + " (clamped)");
      }
    }
  } catch (const std::exception& e) {
    out.recovered.reset();
    out.failure = Describe(e);
  }
  out.runtime_s = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return out;
}

ExtrapolationResult ExtrapolateRoom(const StudyConfig& cfg, int room_index,
                                    const Scene& scene,
                                    const RecoveredRoom* recovered) {
  ExtrapolationResult out;
  out.placement = RandomPlacement(scene, MixSeed(RoomSeed(cfg.seed, room_index), 3));
  out.truth = SimulateSceneRir(PlaceInScene(scene, out.placement), cfg.fs,
                               cfg.duration);
  out.oracle = ExtrapolateRir(RecoveredFromScene(scene), out.placement,
                              scene.array, cfg.fs, cfg.duration);
  out.oracle_ser_db = Ser(out.oracle, out.truth, cfg.ser_cap_db);
  if (recovered) {
    try {
      out.estimate = ExtrapolateRir(*recovered, out.placement, scene.array,
                                    cfg.fs, cfg.duration);
      out.ser_db = Ser(*out.estimate, out.truth, cfg.ser_cap_db);
    } catch (const std::exception& e) {
      out.failure = Describe(e);
    }
  } else {
    out.failure = "no recovered room";
  }
  return out;
}

RoomRecord MakeRoomRecord(const StudyConfig& cfg, int room_index,
                          const Scene& scene, const InversionResult& inversion,
                          const ExtrapolationResult* extrapolation) {
  RoomRecord rec;
  if (inversion.recovered) {
    try {
      rec = EvaluateRoom(*inversion.recovered, scene, cfg.absorption_threshold);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.failure = Describe(e);
    }
  } else {
    rec.ok = false;
    rec.failure = inversion.failure;
  }
  rec.room_id = RoomId(room_index);
  rec.flags = inversion.flags;
  rec.num_spikes = inversion.cloud.size();
  if (extrapolation) {
    rec.ser_db = extrapolation->ser_db;
    rec.oracle_ser_db = extrapolation->oracle_ser_db;
    if (!extrapolation->failure.empty() && inversion.recovered) {
      rec.flags.push_back("extrapolation: " + extrapolation->failure);
    }
  }
  return rec;
}

EvalReport RunStudyInMemory(const StudyConfig& cfg) {
  cfg.Validate();
  std::vector<RoomRecord> records(cfg.n_rooms);
  ParallelFor(
      cfg.n_rooms,
      [&](int i) {
        try {
          const RoomSimulation sim = SimulateRoom(cfg, i);
          const InversionResult inv = InvertRoom(cfg, sim.scene, sim.input());
          const ExtrapolationResult ext = ExtrapolateRoom(
              cfg, i, sim.scene, inv.recovered ? &*inv.recovered : nullptr);
          records[i] = MakeRoomRecord(cfg, i, sim.scene, inv, &ext);
        } catch (const std::exception& e) {
          records[i] = RoomRecord{};
          records[i].room_id = RoomId(i);
          records[i].failure = Describe(e);
        }
      },
      cfg.workers);
  return Aggregate(std::move(records), cfg.recall_thresholds_m,
                   cfg.absorption_threshold);
}

int CmdSimulate(const StudyConfig& cfg) {
  cfg.Validate();
  EnsureDir(cfg.output_dir);
  WriteConfigEcho(cfg, cfg.output_dir);
  const auto failures = ForEachRoom(cfg, [&](int i) {
    const std::string dir = RoomDir(cfg, i);
    EnsureDir(dir);
    WriteConfigEcho(cfg, dir);
    const RoomSimulation sim = SimulateRoom(cfg, i);
    Json scene = SceneToJson(sim.scene);
    scene["seed"] = RoomSeed(cfg.seed, i);
    WriteJson(Join(dir, "scene.json"), scene);
    WriteRir(sim.clean, Join(dir, "rir_clean"), RoomId(i));
    if (sim.noisy) WriteRir(*sim.noisy, Join(dir, "rir_noisy"), RoomId(i));
  });
  return WriteManifest(cfg, "simulate", failures, {});
}

int CmdInvert(const StudyConfig& cfg) {
  cfg.Validate();
  EnsureDir(cfg.output_dir);
  WriteConfigEcho(cfg, cfg.output_dir);
  std::vector<std::vector<std::string>> flags(cfg.n_rooms);
  std::vector<std::string> failures = ForEachRoom(cfg, [&](int i) {
    const std::string dir = RoomDir(cfg, i);
    WriteConfigEcho(cfg, dir);
    const Scene scene = SceneFromJson(ReadJsonFile(Join(dir, "scene.json")));
    const MultichannelRir input = ReadInputRir(dir);
    const InversionResult inv = InvertRoom(cfg, scene, input);
    WriteJson(Join(dir, "cloud.json"), CloudToJson(inv.cloud));
    WriteJson(Join(dir, "invert_log.json"), InversionLogToJson(inv));
    const std::string rec_path = Join(dir, "recovered.json");
    if (inv.recovered) {
      WriteJson(rec_path, RecoveredToJson(*inv.recovered, scene.array));
    } else if (fs::exists(rec_path)) {
      fs::remove(rec_path);
    }
    flags[i] = inv.flags;
    std::fprintf(stderr, "%s: %d spikes, %.1f s%s%s\n", RoomId(i).c_str(),
                 inv.cloud.size(), inv.runtime_s,
                 inv.recovered ? "" : ", failed: ", inv.failure.c_str());
    if (!inv.recovered) throw Error(inv.failure);
  });
  return WriteManifest(cfg, "invert", failures, flags);
}

int CmdExtrapolate(const StudyConfig& cfg) {
  cfg.Validate();
  EnsureDir(cfg.output_dir);
  std::vector<Json> rows(cfg.n_rooms);
  const auto failures = ForEachRoom(cfg, [&](int i) {
    const std::string dir = RoomDir(cfg, i);
    const Scene scene = SceneFromJson(ReadJsonFile(Join(dir, "scene.json")));
    std::optional<RecoveredRoom> rec;
    if (fs::exists(Join(dir, "recovered.json"))) {
      rec = RecoveredFromJson(ReadJsonFile(Join(dir, "recovered.json")));
    }
    const ExtrapolationResult ext =
        ExtrapolateRoom(cfg, i, scene, rec ? &*rec : nullptr);
    WriteRir(ext.truth, Join(dir, "extrapolated_truth"), RoomId(i));
    WriteRir(ext.oracle, Join(dir, "extrapolated_oracle"), RoomId(i));
    if (ext.estimate) {
      WriteRir(*ext.estimate, Join(dir, "extrapolated_estimate"), RoomId(i));
    }
    Json j;
    j["room_id"] = RoomId(i);
    j["placement"] = PlacementToJson(ext.placement);
    j["ser_db"] = ext.ser_db ? Json(*ext.ser_db) : Json(nullptr);
    j["oracle_ser_db"] = ext.oracle_ser_db;
    j["failure"] = ext.failure;
    WriteJson(Join(dir, "extrapolation.json"), j);
    rows[i] = j;
    if (!ext.ser_db) throw Error("extrapolation unavailable: " + ext.failure);
  });
  std::ostringstream csv;
  csv.precision(10);
  csv << "room_id,ser_db,oracle_ser_db\n";
  for (int i = 0; i < cfg.n_rooms; ++i) {
    csv << RoomId(i) << ',';
    if (!rows[i].is_null() && !rows[i]["ser_db"].is_null()) {
      csv << rows[i]["ser_db"].get<double>();
    }
    csv << ',';
    if (!rows[i].is_null()) csv << rows[i]["oracle_ser_db"].get<double>();
    csv << '\n';
  }
  WriteTextFile(Join(cfg.output_dir, "ser_table.csv"), csv.str());
  return WriteManifest(cfg, "extrapolate", failures, {});
}

int CmdEvaluate(const StudyConfig& cfg) {
  cfg.Validate();
  EnsureDir(cfg.output_dir);
  std::vector<RoomRecord> records(cfg.n_rooms);
  const auto failures = ForEachRoom(cfg, [&](int i) {
    const std::string dir = RoomDir(cfg, i);
    records[i].room_id = RoomId(i);
    const Scene scene = SceneFromJson(ReadJsonFile(Join(dir, "scene.json")));
    const Json log = ReadJsonFile(Join(dir, "invert_log.json"));
    InversionResult inv;
    inv.failure = log.at("failure").get<std::string>();
    inv.flags = log.at("flags").get<std::vector<std::string>>();
    inv.cloud = CloudFromJson(ReadJsonFile(Join(dir, "cloud.json")));
    if (fs::exists(Join(dir, "recovered.json"))) {
      inv.recovered = RecoveredFromJson(ReadJsonFile(Join(dir, "recovered.json")));
    }
    std::optional<ExtrapolationResult> ext;
    if (fs::exists(Join(dir, "extrapolation.json"))) {
      const Json e = ReadJsonFile(Join(dir, "extrapolation.json"));
      ext.emplace();
      if (!e.at("ser_db").is_null()) ext->ser_db = e.at("ser_db").get<double>();
      ext->oracle_ser_db = e.at("oracle_ser_db").get<double>();
      ext->failure = e.at("failure").get<std::string>();
    }
    records[i] = MakeRoomRecord(cfg, i, scene, inv, ext ? &*ext : nullptr);
    WriteJson(Join(dir, "record.json"), RoomRecordToJson(records[i]));
    if (!records[i].ok) throw Error(records[i].failure);
  });
  for (int i = 0; i < cfg.n_rooms; ++i) {
    if (records[i].failure.empty() && !failures[i].empty()) {
      records[i].ok = false;
      records[i].failure = failures[i];
    }
  }
  const EvalReport report =
      Aggregate(records, cfg.recall_thresholds_m, cfg.absorption_threshold);
  WriteJson(Join(cfg.output_dir, "report.json"), ReportToJson(report));
  WriteTextFile(Join(cfg.output_dir, "report.csv"), ReportToCsv(report));
  return WriteManifest(cfg, "evaluate", failures, {});
}

int CmdPlot(const StudyConfig& cfg) {
  const Json j = ReadJsonFile(Join(cfg.output_dir, "report.json"));
  std::vector<RoomRecord> rooms;
  for (const Json& r : j.at("rooms")) rooms.push_back(RoomRecordFromJson(r));
  const EvalReport report = Aggregate(
      rooms, j.at("aggregate").at("dim_recall").at("thresholds_m").get<std::vector<double>>(),
      j.at("absorption_threshold").get<double>());
  const std::string dir = Join(cfg.output_dir, "plots");
  EnsureDir(dir);
  WriteReportPlots(report, dir);
  for (int i = 0; i < cfg.n_rooms; ++i) {
    const std::string room = RoomDir(cfg, i);
    const std::string truth = Join(room, "extrapolated_truth");
    if (!fs::exists(truth + ".f64")) continue;
    const MultichannelRir gt = ReadRir(truth);
    if (fs::exists(Join(room, "extrapolated_estimate.f64"))) {
      WriteRirOverlay(gt, ReadRir(Join(room, "extrapolated_estimate")), 0,
                      RoomId(i) + ": extrapolated vs true RIR (channel 1)",
                      Join(dir, RoomId(i) + "_rir_overlay"));
    }
    WriteRirOverlay(gt, ReadRir(Join(room, "extrapolated_oracle")), 0,
                    RoomId(i) + ": oracle extrapolation vs true RIR (channel 1)",
                    Join(dir, RoomId(i) + "_rir_overlay_oracle"));
  }
  return report.num_failed;
}

int CmdAll(const StudyConfig& cfg) {
  const int sim_failed = CmdSimulate(cfg);
  CmdInvert(cfg);
  CmdExtrapolate(cfg);
  const int failed = CmdEvaluate(cfg);
  CmdPlot(cfg);
  return std::max(sim_failed, failed);
}

}  // namespace shoebox
