// Copyright 2026 The ramcts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Experiment harness. Every subcommand works inside one output directory:
//
//   config.json              resolved ExperimentConfig
//   instances.json           ids, context seeds, poisoned slots
//   trajectories/<id>.jsonl  factual episodes
//   references.json          exact or lower-bound assignments (oracle)
//   runs.csv, runs_meta.json one row per (trajectory, method, seed, step)
//   profile.csv              performance profile
//   profile_D<d>.svg         one chart per threshold
//
// Exit status: 0 success, 1 usage error, 2 generation or replay failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ramcts/errors.hpp"
#include "ramcts/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ramcts;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& it : items) s += (s.empty() ? "" : ", ") + it;
  return s;
}

// Flags shared by all subcommands; only flags given on the command line
// override the config file.
struct Flags {
  std::string config_path;
  std::string game;
  int hand_size = 0;
  std::int64_t budget = 0;
  std::vector<std::string> methods;
  int runs = 0;
  int trajectories = 0;
  int samples = 0;
  std::string mode;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<double> thresholds;
  int jobs = 0;
  int max_size = 0;
  bool deterministic = false;
  std::map<std::string, CLI::Option*> given;

  void attach(CLI::App* app) {
    given["config"] = app->add_option("--config", config_path, "JSON config; flags override it");
    given["game"] = app->add_option("--game", game, "euchre | spades | goofspiel");
    given["hand_size"] = app->add_option("--hand-size", hand_size, "cards per hand (H)");
    given["budget"] = app->add_option("--budget", budget, "environment steps per run");
    given["methods"] = app->add_option("--methods", methods, "comma-separated method names")->delimiter(',');
    given["runs"] = app->add_option("--runs", runs, "runs per trajectory and method");
    given["trajectories"] = app->add_option("--trajectories", trajectories, "trajectories to generate");
    given["samples"] = app->add_option("--samples", samples, "posterior samples (unknown-context mode)");
    given["mode"] = app->add_option("--mode", mode, "known-context | unknown-context | lower-bound");
    given["seed"] = app->add_option("--seed", seed, "master seed");
    given["out"] = app->add_option("--out", out, "output directory");
    given["thresholds"] = app->add_option("--thresholds", thresholds, "comma-separated D values")->delimiter(',');
    given["jobs"] = app->add_option("--jobs", jobs, "worker threads");
    given["max_size"] = app->add_option("--max-size", max_size, "largest intervention set");
    given["deterministic"] = app->add_flag("--deterministic", deterministic, "point-mass opponents");
  }

  bool has(const std::string& name) const { return given.at(name)->count() > 0; }

  // Config file (explicit, else <out>/config.json when `use_saved`), then flags.
  ExperimentConfig resolve(bool use_saved) const {
    ExperimentConfig c;
    if (has("out")) c.out = out;
    if (has("config")) {
      c.update_from_json(json::parse(read_file(config_path)));
    } else if (use_saved && fs::exists(fs::path(c.out) / "config.json")) {
      c.update_from_json(json::parse(read_file(fs::path(c.out) / "config.json")));
    }
    if (has("game")) {
      auto kind = parse_game(game);
      if (!kind) throw UsageError("unknown game '" + game + "'");
      c.game.kind = *kind;
    }
    if (has("methods")) {
      c.methods.clear();
      for (const auto& name : methods) {
        auto m = parse_method(name);
        if (!m) throw UsageError("unknown method '" + name + "'; valid methods: " + join(method_names()));
        c.methods.push_back(*m);
      }
    }
    if (has("mode")) {
      auto m = parse_mode(mode);
      if (!m) throw UsageError("unknown mode '" + mode + "'; valid modes: known-context, unknown-context, lower-bound");
      c.mode = *m;
    }
    if (has("hand_size")) c.game.hand_size = hand_size;
    if (has("deterministic")) c.game.deterministic_opponents = deterministic;
    if (has("budget")) c.budget = budget;
    if (has("runs")) c.runs = runs;
    if (has("trajectories")) c.trajectories = trajectories;
    if (has("samples")) c.samples = samples;
    if (has("seed")) c.seed = seed;
    if (has("out")) c.out = out;
    if (has("thresholds")) c.thresholds = thresholds;
    if (has("jobs")) c.jobs = jobs;
    if (has("max_size")) c.max_size = max_size;
    for (double d : c.thresholds) {
      if (!(d >= 0.0 && d <= 1.0)) throw UsageError("thresholds must lie in [0, 1]");
    }
    try {
      c.check();
    } catch (const ContractViolation& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

// An instance and the model that produced it.
struct Loaded {
  Instance instance;
  std::shared_ptr<const DecPomdpModel> model;
};

json instance_to_json(const Instance& inst) {
  json ordinals = json::array(), slots = json::array();
  for (auto [agent, ordinal] : inst.poisoned_ordinals) ordinals.push_back({agent, ordinal});
  for (const Var& v : inst.poisoned_slots) slots.push_back({v.t, v.agent});
  return {{"id", inst.id},
          {"context_seed", inst.context_seed},
          {"poisoned_ordinals", ordinals},
          {"poisoned_slots", slots},
          {"trajectory", "trajectories/" + std::to_string(inst.id) + ".jsonl"}};
}

std::vector<Loaded> load_instances(const ExperimentConfig& c) {
  const fs::path dir(c.out);
  const json list = json::parse(read_file(dir / "instances.json"));
  const std::shared_ptr<const DecPomdpModel> base = make_model(c.game);
  std::vector<Loaded> out;
  for (const auto& j : list) {
    Loaded l;
    l.instance.id = j.at("id").get<int>();
    l.instance.context_seed = j.at("context_seed").get<std::uint64_t>();
    for (const auto& p : j.at("poisoned_ordinals")) l.instance.poisoned_ordinals.emplace_back(p[0], p[1]);
    for (const auto& v : j.at("poisoned_slots")) l.instance.poisoned_slots.push_back({v[0], v[1]});
    l.instance.trajectory = trajectory_from_jsonl(read_file(dir / j.at("trajectory").get<std::string>()));
    l.model = l.instance.poisoned_ordinals.empty()
                  ? base
                  : std::make_shared<PoisonedModel>(base, l.instance.poisoned_ordinals);
    // The stored episode must be what its context produces.
    if (!(rollout(*l.model, Context(l.instance.context_seed)) == l.instance.trajectory)) {
      throw InconsistentTrajectory("trajectory " + std::to_string(l.instance.id) +
                                   " does not replay under its context");
    }
    out.push_back(std::move(l));
  }
  return out;
}

int cmd_gen(const ExperimentConfig& c) {
  const fs::path dir(c.out);
  const std::shared_ptr<const DecPomdpModel> base = make_model(c.game);
  std::vector<Instance> instances;
  std::vector<std::shared_ptr<const DecPomdpModel>> models;
  if (c.mode == Mode::kLowerBound) {
    for (int k = 0; k < c.trajectories; ++k) {
      auto p = poison_and_generate(base, derive_seed(c.seed, seed_tags::kPoison, k));
      p.instance.id = k;
      instances.push_back(std::move(p.instance));
      models.push_back(p.model);
    }
  } else {
    instances = generate_losing_trajectories(*base, c.trajectories, c.seed);
    models.assign(instances.size(), base);
  }
  json list = json::array();
  for (std::size_t k = 0; k < instances.size(); ++k) {
    write_file(dir / "trajectories" / (std::to_string(instances[k].id) + ".jsonl"),
               trajectory_to_jsonl(instances[k].trajectory, models[k].get()));
    list.push_back(instance_to_json(instances[k]));
  }
  write_file(dir / "instances.json", list.dump(2) + "\n");
  write_file(dir / "config.json", c.to_json().dump(2) + "\n");
  std::printf("wrote %zu %s trajectories to %s\n", instances.size(), game_name(c.game.kind).c_str(),
              dir.string().c_str());
  return 0;
}

Mode reference_mode(const ExperimentConfig& c) {
  // Unknown-context runs are scored against the true context's assignment.
  return c.mode == Mode::kLowerBound ? Mode::kLowerBound : Mode::kKnownContext;
}

std::map<int, std::vector<double>> compute_references(const ExperimentConfig& c,
                                                      const std::vector<Loaded>& instances) {
  std::vector<ResponsibilityAssignment> refs(instances.size());
  parallel_for(int(instances.size()), c.jobs, [&](int k) {
    const auto& l = instances[k];
    refs[k] = exact_reference(*l.model, Context(l.instance.context_seed), l.instance.trajectory,
                              reference_mode(c), l.instance.poisoned_slots, c.max_size);
  });
  json out = json::array();
  std::map<int, std::vector<double>> values;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    json degrees = json::array();
    for (const Degree& d : refs[k].degrees) degrees.push_back({d.num, d.den});
    out.push_back({{"id", instances[k].instance.id},
                   {"mode", mode_name(reference_mode(c))},
                   {"degrees", degrees},
                   {"assignment", refs[k].to_json()}});
    values[instances[k].instance.id] = refs[k].values();
  }
  write_file(fs::path(c.out) / "references.json", out.dump(2) + "\n");
  return values;
}

std::map<int, std::vector<double>> load_references(const ExperimentConfig& c,
                                                   const std::vector<Loaded>& instances) {
  const fs::path path = fs::path(c.out) / "references.json";
  if (!fs::exists(path)) return compute_references(c, instances);
  std::map<int, std::vector<double>> values;
  for (const auto& j : json::parse(read_file(path))) {
    if (j.at("mode").get<std::string>() != mode_name(reference_mode(c))) {
      return compute_references(c, instances);
    }
    std::vector<double>& v = values[j.at("id").get<int>()];
    for (const auto& d : j.at("degrees")) v.push_back(d[0].get<double>() / d[1].get<double>());
  }
  for (const auto& l : instances) {
    if (!values.count(l.instance.id)) return compute_references(c, instances);
  }
  return values;
}

int cmd_oracle(const ExperimentConfig& c) {
  const auto instances = load_instances(c);
  const auto refs = compute_references(c, instances);
  for (const auto& [id, v] : refs) {
    std::printf("trajectory %d:", id);
    for (double x : v) std::printf(" %.6g", x);
    std::printf("\n");
  }
  return 0;
}

int cmd_run(const ExperimentConfig& c) {
  const auto instances = load_instances(c);
  const auto refs = load_references(c, instances);
  std::vector<std::vector<RunRecord>> per(instances.size());
  std::mutex log_mutex;
  parallel_for(int(instances.size()), c.jobs, [&](int k) {
    const auto& l = instances[k];
    per[k] = run_instance(*l.model, l.instance, c, refs.at(l.instance.id));
    std::lock_guard lock(log_mutex);
    std::fprintf(stderr, "trajectory %d done\n", l.instance.id);
  });
  std::vector<RunRecord> records;
  for (auto& v : per) records.insert(records.end(), v.begin(), v.end());
  const int agents = instances.empty() ? 2 : instances.front().model->num_agents();
  write_file(fs::path(c.out) / "runs.csv", runs_csv(records, step_grid(c.budget), c.mode, agents));
  json meta = {{"config", c.to_json()},
               {"reference", mode_name(reference_mode(c))},
               {"eps", c.mode == Mode::kLowerBound ? "max_i max(0, ref_i - found_i)" : "max_i |found_i - ref_i|"},
               {"stddev", "across trajectories, of the per-trajectory mean over seeds"},
               {"stddev_alternative", "across all runs"}};
  write_file(fs::path(c.out) / "runs_meta.json", meta.dump(2) + "\n");
  std::printf("wrote %zu run records to %s\n", records.size(), (fs::path(c.out) / "runs.csv").string().c_str());
  return 0;
}

int cmd_profile(const ExperimentConfig& c) {
  const auto rows = parse_runs_csv(read_file(fs::path(c.out) / "runs.csv"));
  if (rows.empty()) throw UsageError("runs.csv has no rows");
  write_file(fs::path(c.out) / "profile.csv", profile_csv(profile_from_rows(rows, c.thresholds)));
  std::printf("wrote %s\n", (fs::path(c.out) / "profile.csv").string().c_str());
  return 0;
}

int cmd_plot(const ExperimentConfig& c) {
  const auto profile = parse_profile_csv(read_file(fs::path(c.out) / "profile.csv"));
  std::vector<double> thresholds;
  for (const auto& p : profile) {
    if (std::find(thresholds.begin(), thresholds.end(), p.threshold) == thresholds.end()) {
      thresholds.push_back(p.threshold);
    }
  }
  for (double d : thresholds) {
    char name[64], title[128];
    std::snprintf(name, sizeof name, "profile_D%g.svg", d);
    std::snprintf(title, sizeof title, "%s(%d), %s, D = %g", game_name(c.game.kind).c_str(),
                  c.game.hand_size, mode_name(c.mode).c_str(), d);
    write_file(fs::path(c.out) / name, profile_svg(profile, d, title));
    std::printf("wrote %s\n", (fs::path(c.out) / name).string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Responsibility attribution experiments on card-game Dec-POMDPs"};
  app.require_subcommand(1);
  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    bool use_saved;
    int (*run)(const ExperimentConfig&);
  };
  const Sub subs[] = {
      {"gen", "generate losing trajectories (or poisoned ones in lower-bound mode)", false, cmd_gen},
      {"run", "run methods over generated trajectories", true, cmd_run},
      {"profile", "aggregate runs.csv into profile.csv", true, cmd_profile},
      {"plot", "render profile.csv as SVG charts", true, cmd_plot},
      {"oracle", "compute exhaustive reference assignments", true, cmd_oracle},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    apps.push_back(app.add_subcommand(s.name, s.help)->fallthrough());
  }
  // Options live on the main app so they may appear on either side of the subcommand.
  flags.attach(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    for (std::size_t k = 0; k < apps.size(); ++k) {
      if (apps[k]->parsed()) return subs[k].run(flags.resolve(subs[k].use_saved));
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const GenerationExhausted& e) {
    std::fprintf(stderr, "generation failed: %s\n", e.what());
    return 2;
  } catch (const InconsistentTrajectory& e) {
    std::fprintf(stderr, "inconsistent trajectory: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: malformed JSON: %s\n", e.what());
    return 1;
  } catch (const ContractViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
