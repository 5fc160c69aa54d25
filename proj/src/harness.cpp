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

#include "ramcts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace ramcts {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string format_double(double x) {
  std::ostringstream out;
  out << std::setprecision(12) << x;
  return out.str();
}

double population_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

constexpr double kTolerance = 1e-12;

bool is_deterministic(Method m) { return m != Method::kRaMcts && m != Method::kRandom; }

}  // namespace

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kKnownContext: return "known-context";
    case Mode::kUnknownContext: return "unknown-context";
    case Mode::kLowerBound: return "lower-bound";
  }
  return "?";
}

std::optional<Mode> parse_mode(const std::string& text) {
  for (Mode m : {Mode::kKnownContext, Mode::kUnknownContext, Mode::kLowerBound}) {
    if (mode_name(m) == text) return m;
  }
  if (text == "known") return Mode::kKnownContext;
  if (text == "unknown") return Mode::kUnknownContext;
  if (text == "lower") return Mode::kLowerBound;
  return std::nullopt;
}

nlohmann::json ExperimentConfig::to_json() const {
  std::vector<std::string> names;
  for (Method m : methods) names.push_back(method_name(m));
  return {{"game", game_name(game.kind)},
          {"hand_size", game.hand_size},
          {"deterministic_opponents", game.deterministic_opponents},
          {"bowers", game.bowers},
          {"discard_tied_prizes", game.discard_tied_prizes},
          {"trajectories", trajectories},
          {"runs", runs},
          {"methods", names},
          {"budget", budget},
          {"thresholds", thresholds},
          {"samples", samples},
          {"mode", mode_name(mode)},
          {"out", out},
          {"seed", seed},
          {"max_size", max_size},
          {"jobs", jobs}};
}

void ExperimentConfig::update_from_json(const nlohmann::json& j) {
  if (j.contains("game")) {
    auto kind = parse_game(j["game"].get<std::string>());
    if (!kind) throw ContractViolation("unknown game '" + j["game"].get<std::string>() + "'");
    game.kind = *kind;
  }
  game.hand_size = j.value("hand_size", game.hand_size);
  game.deterministic_opponents = j.value("deterministic_opponents", game.deterministic_opponents);
  game.bowers = j.value("bowers", game.bowers);
  game.discard_tied_prizes = j.value("discard_tied_prizes", game.discard_tied_prizes);
  trajectories = j.value("trajectories", trajectories);
  runs = j.value("runs", runs);
  if (j.contains("methods")) {
    methods.clear();
    for (const auto& name : j["methods"]) {
      auto m = parse_method(name.get<std::string>());
      if (!m) throw ContractViolation("unknown method '" + name.get<std::string>() + "'");
      methods.push_back(*m);
    }
  }
  budget = j.value("budget", budget);
  thresholds = j.value("thresholds", thresholds);
  samples = j.value("samples", samples);
  if (j.contains("mode")) {
    auto m = parse_mode(j["mode"].get<std::string>());
    if (!m) throw ContractViolation("unknown mode '" + j["mode"].get<std::string>() + "'");
    mode = *m;
  }
  out = j.value("out", out);
  seed = j.value("seed", seed);
  max_size = j.value("max_size", max_size);
  jobs = j.value("jobs", jobs);
}

void ExperimentConfig::check() const {
  validate(game);
  if (trajectories < 1 || runs < 1 || samples < 1 || max_size < 1 || jobs < 1) {
    throw ContractViolation("counts must be positive");
  }
  if (budget < 0) throw ContractViolation("budget must be non-negative");
  if (methods.empty()) throw ContractViolation("at least one method is required");
  for (double d : thresholds) {
    if (!(d >= 0.0 && d <= 1.0)) throw ContractViolation("thresholds must lie in [0, 1]");
  }
}

std::vector<Instance> generate_losing_trajectories(const DecPomdpModel& model, int count,
                                                   std::uint64_t master_seed,
                                                   std::int64_t max_attempts) {
  if (count < 1) throw ContractViolation("trajectory count must be positive");
  std::vector<Instance> out;
  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    Instance inst;
    inst.context_seed = derive_seed(master_seed, seed_tags::kTrajectory, attempt);
    inst.trajectory = rollout(model, Context(inst.context_seed));
    if (!inst.trajectory.outcome.agents_lose()) continue;
    inst.id = static_cast<int>(out.size());
    out.push_back(std::move(inst));
    if (static_cast<int>(out.size()) == count) return out;
  }
  throw GenerationExhausted(std::to_string(out.size()) + " of " + std::to_string(count) +
                            " losing episodes after " + std::to_string(max_attempts) +
                            " attempts");
}

PoisonedModel::PoisonedModel(std::shared_ptr<const DecPomdpModel> base,
                             std::vector<std::pair<int, int>> poisoned_ordinals)
    : base_(std::move(base)), ordinals_(std::move(poisoned_ordinals)) {
  std::sort(ordinals_.begin(), ordinals_.end());
  lookup_.insert(ordinals_.begin(), ordinals_.end());
}

bool PoisonedModel::poisoned(int agent, int ordinal) const {
  return lookup_.count({agent, ordinal}) != 0;
}

Probabilities PoisonedModel::policy(int agent, const InfoState& info) const {
  Probabilities p = base_->policy(agent, info);
  if (!base_->decides(agent, info) || !poisoned(agent, base_->decision_index(agent, info))) {
    return p;
  }
  std::vector<ActionId> others;
  for (ActionId a : base_->valid_actions(agent, info)) {
    if (!(p[a] > 0.0)) others.push_back(a);
  }
  if (others.empty()) return p;
  Probabilities q(p.size(), 0.0);
  for (ActionId a : others) q[a] = 1.0 / static_cast<double>(others.size());
  return q;
}

PoisonedInstance poison_and_generate(std::shared_ptr<const DecPomdpModel> base,
                                     std::uint64_t master_seed, int per_agent,
                                     std::int64_t max_attempts) {
  // Ordinals whose hand still holds two or more cards can be poisoned; the
  // horizon bounds the number of decisions per agent.
  const int n = base->num_agents();
  const Trajectory probe = rollout(*base, Context(master_seed));
  std::vector<int> decisions(n, 0);
  for (const auto& step : probe.steps) {
    for (int i = 0; i < n; ++i) decisions[i] += base->decides(i, step.info[i]) ? 1 : 0;
  }
  Rng rng(derive_seed(master_seed, seed_tags::kPoison, 0));
  std::vector<std::pair<int, int>> ordinals;
  for (int i = 0; i < n; ++i) {
    std::vector<int> pool;
    for (int k = 0; k + 1 < decisions[i]; ++k) pool.push_back(k);
    if (static_cast<int>(pool.size()) < per_agent) {
      throw ContractViolation("not enough decisions to poison " + std::to_string(per_agent) +
                              " per agent");
    }
    for (int j = 0; j < per_agent; ++j) {
      std::swap(pool[j], pool[j + rng.uniform(pool.size() - j)]);
      ordinals.push_back({i, pool[j]});
    }
  }
  auto model = std::make_shared<PoisonedModel>(base, ordinals);

  for (std::int64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    const std::uint64_t seed = derive_seed(master_seed, seed_tags::kPoison, attempt);
    const Context context(seed);
    Trajectory clean = rollout(*base, context);
    if (!clean.outcome.agents_win()) continue;
    Trajectory poisoned = rollout(*model, context);
    if (!poisoned.outcome.agents_lose()) continue;
    PoisonedInstance out;
    out.instance.context_seed = seed;
    out.instance.poisoned_ordinals = model->poisoned_ordinals();
    for (const auto& step : poisoned.steps) {
      for (int i = 0; i < n; ++i) {
        if (base->decides(i, step.info[i]) &&
            model->poisoned(i, base->decision_index(i, step.info[i]))) {
          out.instance.poisoned_slots.push_back({step.t, i});
        }
      }
    }
    out.instance.trajectory = std::move(poisoned);
    out.model = model;
    out.clean_replay = std::move(clean);
    out.attempts = attempt;
    return out;
  }
  throw GenerationExhausted("no poisoned loss after " + std::to_string(max_attempts) +
                            " attempts");
}

ResponsibilityAssignment exact_reference(const DecPomdpModel& model, const Context& context,
                                         const Trajectory& factual, Mode mode,
                                         const VarSet& poisoned_slots, int max_size) {
  BaselineParams params;
  params.budget = std::numeric_limits<std::int64_t>::max();
  params.max_size = max_size;
  if (mode == Mode::kLowerBound) params.allowed_slots = poisoned_slots;
  return bf_dt(model, context, factual, params).assignment;
}

double epsilon_metric(const std::vector<double>& found, const std::vector<double>& reference,
                      Mode mode) {
  if (found.size() != reference.size()) {
    throw ContractViolation("epsilon: assignments differ in length");
  }
  double eps = 0.0;
  for (std::size_t i = 0; i < found.size(); ++i) {
    const double diff = mode == Mode::kLowerBound ? std::max(0.0, reference[i] - found[i])
                                                  : std::abs(found[i] - reference[i]);
    eps = std::max(eps, diff);
  }
  return std::round(eps * 1e12) / 1e12;
}

std::vector<std::int64_t> step_grid(std::int64_t budget, std::int64_t start, double factor) {
  std::vector<std::int64_t> grid;
  for (double s = static_cast<double>(start); s < static_cast<double>(budget); s *= factor) {
    const auto v = static_cast<std::int64_t>(std::llround(s));
    if (grid.empty() || grid.back() != v) grid.push_back(v);
  }
  if (grid.empty() || grid.back() != budget) grid.push_back(budget);
  return grid;
}

std::vector<double> RunRecord::degrees_at(std::int64_t s) const {
  std::vector<double> mean;
  for (const StepTrace& trace : traces) {
    const auto d = trace.at(s);
    if (mean.empty()) mean.assign(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) mean[i] += d[i].value();
  }
  for (double& x : mean) x /= static_cast<double>(traces.size());
  return mean;
}

double RunRecord::epsilon_at(std::int64_t s, Mode mode) const {
  return epsilon_metric(degrees_at(s), reference, mode);
}

std::vector<RunRecord> run_instance(const DecPomdpModel& model, const Instance& instance,
                                    const ExperimentConfig& config,
                                    const std::vector<double>& reference) {
  const Context context(instance.context_seed);
  std::vector<RunRecord> out;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const Method method = config.methods[mi];
    for (int r = 0; r < config.runs; ++r) {
      RunRecord rec;
      rec.trajectory_id = instance.id;
      rec.method = method;
      rec.seed = derive_seed(derive_seed(config.seed, seed_tags::kRun, instance.id), mi, r);
      rec.reference = reference;
      if (r > 0 && is_deterministic(method) && config.mode != Mode::kUnknownContext) {
        RunRecord copy = out.back();
        copy.seed = rec.seed;
        out.push_back(std::move(copy));
        continue;
      }
      if (config.mode == Mode::kUnknownContext) {
        for (int m = 0; m < config.samples; ++m) {
          const Context sample = posterior_sample_context(
              model, instance.trajectory, derive_seed(rec.seed, seed_tags::kPosterior, m));
          SearchResult res = run_method(method, model, sample, instance.trajectory,
                                        config.budget,
                                        derive_seed(rec.seed, seed_tags::kSampleSearch, m),
                                        config.max_size);
          rec.steps = std::max(rec.steps, res.steps);
          rec.traces.push_back(std::move(res.trace));
        }
      } else {
        SearchResult res = run_method(method, model, context, instance.trajectory, config.budget,
                                      rec.seed, config.max_size);
        rec.steps = res.steps;
        rec.traces.push_back(std::move(res.trace));
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<ProfilePoint> performance_profile(const std::vector<RunRecord>& records,
                                              const std::vector<double>& thresholds,
                                              const std::vector<std::int64_t>& grid,
                                              Mode mode) {
  std::vector<RunRow> rows;
  for (const auto& rec : records) {
    for (std::int64_t s : grid) {
      rows.push_back({rec.trajectory_id, method_name(rec.method), rec.seed, s,
                      rec.epsilon_at(s, mode), {}});
    }
  }
  return profile_from_rows(rows, thresholds);
}

std::string runs_csv(const std::vector<RunRecord>& records,
                     const std::vector<std::int64_t>& grid, Mode mode, int num_agents) {
  std::ostringstream out;
  out << "trajectory_id,method,seed,steps,eps";
  for (int i = 0; i < num_agents; ++i) out << ",d_" << i;
  out << '\n';
  for (const auto& rec : records) {
    for (std::int64_t s : grid) {
      const auto d = rec.degrees_at(s);
      out << rec.trajectory_id << ',' << method_name(rec.method) << ',' << rec.seed << ',' << s
          << ',' << format_double(epsilon_metric(d, rec.reference, mode));
      for (double x : d) out << ',' << format_double(x);
      out << '\n';
    }
  }
  return out.str();
}

std::vector<RunRow> parse_runs_csv(const std::string& text) {
  std::vector<RunRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("trajectory_id,", 0) != 0) throw ContractViolation("not a runs CSV");
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() < 5) throw ContractViolation("short runs CSV row");
    RunRow row;
    row.trajectory_id = std::stoi(cells[0]);
    row.method = cells[1];
    row.seed = std::stoull(cells[2]);
    row.steps = std::stoll(cells[3]);
    row.eps = std::stod(cells[4]);
    for (std::size_t k = 5; k < cells.size(); ++k) row.degrees.push_back(std::stod(cells[k]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ProfilePoint> profile_from_rows(const std::vector<RunRow>& rows,
                                            const std::vector<double>& thresholds) {
  // method -> (trajectory, seed) -> steps -> eps
  std::map<std::string, std::map<std::pair<int, std::uint64_t>, std::map<std::int64_t, double>>>
      runs;
  std::vector<std::string> order;
  std::vector<std::int64_t> grid;
  for (const auto& row : rows) {
    if (runs.find(row.method) == runs.end()) order.push_back(row.method);
    runs[row.method][{row.trajectory_id, row.seed}][row.steps] = row.eps;
    grid.push_back(row.steps);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<ProfilePoint> out;
  for (const std::string& method : order) {
    const auto& by_run = runs[method];
    for (double d : thresholds) {
      bool converged = false;
      for (std::int64_t s : grid) {
        std::map<int, std::pair<double, int>> per_trajectory;
        double hits = 0.0;
        for (const auto& [key, curve] : by_run) {
          auto it = curve.upper_bound(s);
          // Before a run's first row nothing has been found yet.
          const bool ok = it != curve.begin() && std::prev(it)->second <= d + kTolerance;
          hits += ok ? 1.0 : 0.0;
          auto& acc = per_trajectory[key.first];
          acc.first += ok ? 1.0 : 0.0;
          acc.second += 1;
        }
        std::vector<double> means;
        for (const auto& [tid, acc] : per_trajectory) means.push_back(acc.first / acc.second);
        ProfilePoint p;
        p.method = method;
        p.threshold = d;
        p.steps = s;
        p.fraction = hits / static_cast<double>(by_run.size());
        p.stddev = population_sd(means);
        p.converged_here = !converged && p.fraction >= 1.0;
        converged = converged || p.converged_here;
        out.push_back(p);
      }
    }
  }
  return out;
}

std::string profile_csv(const std::vector<ProfilePoint>& profile) {
  std::ostringstream out;
  out << "method,threshold,steps,fraction,stddev,converged\n";
  for (const auto& p : profile) {
    out << p.method << ',' << format_double(p.threshold) << ',' << p.steps << ','
        << format_double(p.fraction) << ',' << format_double(p.stddev) << ','
        << (p.converged_here ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<ProfilePoint> parse_profile_csv(const std::string& text) {
  std::vector<ProfilePoint> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("method,", 0) != 0) throw ContractViolation("not a profile CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw ContractViolation("bad profile CSV row");
    out.push_back({cells[0], std::stod(cells[1]), std::stoll(cells[2]), std::stod(cells[3]),
                   std::stod(cells[4]), cells[5] == "1"});
  }
  return out;
}

std::string profile_svg(const std::vector<ProfilePoint>& profile, double threshold,
                        const std::string& title) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                      "#8c564b"};
  std::vector<const ProfilePoint*> points;
  std::vector<std::string> methods;
  std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 1;
  for (const auto& p : profile) {
    if (std::abs(p.threshold - threshold) > kTolerance) continue;
    points.push_back(&p);
    if (std::find(methods.begin(), methods.end(), p.method) == methods.end()) {
      methods.push_back(p.method);
    }
    lo = std::min(lo, std::max<std::int64_t>(p.steps, 1));
    hi = std::max(hi, p.steps);
  }
  if (points.empty()) throw ContractViolation("no profile points at this threshold");
  const double log_lo = std::log10(static_cast<double>(lo));
  const double log_hi = std::max(std::log10(static_cast<double>(hi)), log_lo + 1e-9);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](std::int64_t s) {
    const double v = std::log10(static_cast<double>(std::max<std::int64_t>(s, 1)));
    return kLeft + (v - log_lo) / (log_hi - log_lo) * plot_w;
  };
  auto y_of = [&](double f) { return kTop + (1.0 - std::clamp(f, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << y_of(f)
        << "\" y2=\"" << y_of(f) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << y_of(f) + 4
        << "\" text-anchor=\"end\">" << f << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(log_lo)); e <= static_cast<int>(std::floor(log_hi));
       ++e) {
    const double x = kLeft + (e - log_lo) / (log_hi - log_lo) * plot_w;
    svg << "<line x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << kTop << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"#eee\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">1e" << e << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\">environment steps</text>\n";
  svg << "<text transform=\"translate(18," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">fraction of runs with eps &lt;= "
      << format_double(threshold) << "</text>\n";

  for (std::size_t m = 0; m < methods.size(); ++m) {
    const char* color = kPalette[m % 6];
    std::vector<const ProfilePoint*> line;
    for (const auto* p : points) {
      if (p->method == methods[m]) line.push_back(p);
    }
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (const auto* p : line) svg << x_of(p->steps) << ',' << y_of(p->fraction + p->stddev) << ' ';
    for (auto it = line.rbegin(); it != line.rend(); ++it) {
      svg << x_of((*it)->steps) << ',' << y_of((*it)->fraction - (*it)->stddev) << ' ';
    }
    svg << "\"/>\n<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const auto* p : line) svg << x_of(p->steps) << ',' << y_of(p->fraction) << ' ';
    svg << "\"/>\n";
    for (const auto* p : line) {
      if (!p->converged_here) continue;
      svg << "<circle cx=\"" << x_of(p->steps) << "\" cy=\"" << y_of(p->fraction)
          << "\" r=\"5\" fill=\"white\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    }
    const double ly = kTop + 14 + 20.0 * static_cast<double>(m);
    svg << "<line x1=\"" << kWidth - kRight + 16 << "\" x2=\"" << kWidth - kRight + 40
        << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 46 << "\" y=\"" << ly + 4 << "\">" << methods[m]
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ramcts
