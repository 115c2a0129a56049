#include "logel/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace logel {

std::string to_string(EnvironmentKind kind) {
  return kind == EnvironmentKind::Gridworld ? "gridworld" : "point";
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double x) { return nlohmann::json(x).dump(); }

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected a number, got '" + text + "'");
  return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return value;
}

int parse_int(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(key, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

template <typename Fn>
auto rethrow_as(const std::string& key, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw ConfigError(key, e.what());
  }
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Field double_field(T ExperimentConfig::*section, double T::*member) {
  return {[=](const ExperimentConfig& c) { return format_double(c.*section.*member); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*section.*member = parse_double(k, v);
          }};
}

template <typename T>
Field int_field(T ExperimentConfig::*section, int T::*member) {
  return {[=](const ExperimentConfig& c) { return std::to_string(c.*section.*member); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*section.*member = parse_int(k, v);
          }};
}

template <typename T>
Field bool_field(T ExperimentConfig::*section, bool T::*member) {
  return {[=](const ExperimentConfig& c) { return std::string(c.*section.*member ? "true" : "false"); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*section.*member = parse_bool(k, v);
          }};
}

Field solver_double(double SolverConfig::*member) {
  return {[=](const ExperimentConfig& c) { return format_double(c.observer.solver.*member); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.observer.solver.*member = parse_double(k, v);
          }};
}

const std::map<std::string, Field>& fields() {
  using C = ExperimentConfig;
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["env.name"] = {[](const C& c) { return to_string(c.env.kind); },
                     [](C& c, const std::string& k, const std::string& v) {
                       if (v == "gridworld") c.env.kind = EnvironmentKind::Gridworld;
                       else if (v == "point") c.env.kind = EnvironmentKind::LinearPoint;
                       else throw ConfigError(k, "expected gridworld or point, got '" + v + "'");
                     }};
    t["env.discount"] = double_field(&C::env, &EnvironmentSpec::discount);
    t["env.horizon"] = int_field(&C::env, &EnvironmentSpec::horizon);
    t["env.noise_sigma"] = double_field(&C::env, &EnvironmentSpec::noise_sigma);

    t["learner.algorithm"] = {[](const C& c) { return to_string(c.learner.algorithm); },
                              [](C& c, const std::string& k, const std::string& v) {
                                c.learner.algorithm = rethrow_as(k, [&] { return parse_learner_algorithm(v); });
                              }};
    t["learner.m"] = int_field(&C::learner, &LearnerConfig::m);
    t["learner.n"] = int_field(&C::learner, &LearnerConfig::n);
    t["learner.alpha"] = double_field(&C::learner, &LearnerConfig::alpha);
    t["learner.batch"] = int_field(&C::learner, &LearnerConfig::batch);
    t["learner.estimator"] = {[](const C& c) { return to_string(c.learner.estimator); },
                              [](C& c, const std::string& k, const std::string& v) {
                                c.learner.estimator = rethrow_as(k, [&] { return parse_gradient_estimator(v); });
                              }};
    t["learner.exact_gradients"] = bool_field(&C::learner, &LearnerConfig::exact_gradients);
    t["learner.episodes"] = int_field(&C::learner, &LearnerConfig::episodes);
    t["learner.learning_rate"] = double_field(&C::learner, &LearnerConfig::learning_rate);
    t["learner.exploration"] = double_field(&C::learner, &LearnerConfig::exploration);
    t["learner.temperature"] = double_field(&C::learner, &LearnerConfig::temperature);
    t["learner.temperature_decay"] = double_field(&C::learner, &LearnerConfig::temperature_decay);
    t["learner.sweeps_per_step"] = int_field(&C::learner, &LearnerConfig::sweeps_per_step);
    t["learner.policy_sigma"] = double_field(&C::learner, &LearnerConfig::policy_sigma);

    t["observer.estimator"] = {[](const C& c) { return to_string(c.observer.estimator); },
                               [](C& c, const std::string& k, const std::string& v) {
                                 c.observer.estimator = rethrow_as(k, [&] { return parse_gradient_estimator(v); });
                               }};
    t["observer.baseline"] = bool_field(&C::observer, &ObserverSpec::baseline);
    t["observer.epsilon"] = solver_double(&SolverConfig::epsilon);
    t["observer.ridge"] = solver_double(&SolverConfig::ridge);
    t["observer.tolerance"] = solver_double(&SolverConfig::tolerance);
    t["observer.max_iterations"] = {
        [](const C& c) { return std::to_string(c.observer.solver.max_iterations); },
        [](C& c, const std::string& k, const std::string& v) { c.observer.solver.max_iterations = parse_int(k, v); }};
    t["observer.initial_rate"] = solver_double(&SolverConfig::initial_rate);
    t["observer.condition_limit"] = solver_double(&SolverConfig::condition_limit);
    t["observer.fallback_ridge"] = solver_double(&SolverConfig::fallback_ridge);
    t["observer.cloning_l2"] = {
        [](const C& c) { return format_double(c.observer.cloning.l2); },
        [](C& c, const std::string& k, const std::string& v) { c.observer.cloning.l2 = parse_double(k, v); }};
    t["observer.cloning_tolerance"] = {
        [](const C& c) { return format_double(c.observer.cloning.tolerance); },
        [](C& c, const std::string& k, const std::string& v) { c.observer.cloning.tolerance = parse_double(k, v); }};
    t["observer.cloning_max_iterations"] = {
        [](const C& c) { return std::to_string(c.observer.cloning.max_iterations); },
        [](C& c, const std::string& k, const std::string& v) { c.observer.cloning.max_iterations = parse_int(k, v); }};
    t["observer.oracle_params"] = bool_field(&C::observer, &ObserverSpec::oracle_params);
    t["observer.oracle_gradients"] = bool_field(&C::observer, &ObserverSpec::oracle_gradients);
    t["observer.known_rates"] = bool_field(&C::observer, &ObserverSpec::known_rates);

    t["eval.seeds"] = int_field(&C::eval, &EvaluationSpec::seeds);
    t["eval.retrain"] = bool_field(&C::eval, &EvaluationSpec::retrain);
    t["eval.retrain_m"] = int_field(&C::eval, &EvaluationSpec::retrain_m);
    t["eval.retrain_n"] = int_field(&C::eval, &EvaluationSpec::retrain_n);
    t["eval.retrain_alpha"] = double_field(&C::eval, &EvaluationSpec::retrain_alpha);
    t["eval.retrain_exact"] = bool_field(&C::eval, &EvaluationSpec::retrain_exact);
    t["eval.mc_episodes"] = int_field(&C::eval, &EvaluationSpec::mc_episodes);

    t["output.dir"] = {[](const C& c) { return c.output_dir; },
                       [](C& c, const std::string&, const std::string& v) { c.output_dir = v; }};
    t["seed"] = {[](const C& c) { return std::to_string(c.seed); },
                 [](C& c, const std::string& k, const std::string& v) { c.seed = parse_seed(k, v); }};
    return t;
  }();
  return table;
}

bool run_defining(const std::string& key) {
  return key.rfind("env.", 0) == 0 || key.rfind("learner.", 0) == 0 || key == "seed";
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(env.discount >= 0.0 && env.discount < 1.0, "env.discount", "must lie in [0, 1)");
  require(env.horizon >= 1, "env.horizon", "must be at least 1");
  require(env.noise_sigma >= 0.0, "env.noise_sigma", "must be nonnegative");

  require(learner.m >= 1, "learner.m", "must be at least 1");
  require(learner.n >= 1, "learner.n", "must be at least 1");
  require(learner.alpha > 0.0, "learner.alpha", "must be positive");
  require(learner.batch >= 0, "learner.batch", "must be nonnegative (0 reuses the recorded dataset)");
  require(learner.episodes >= 0, "learner.episodes", "must be nonnegative");
  require(learner.learning_rate > 0.0 && learner.learning_rate <= 1.0, "learner.learning_rate",
          "must lie in (0, 1]");
  require(learner.exploration > 0.0, "learner.exploration", "must be positive");
  require(learner.temperature > 0.0, "learner.temperature", "must be positive");
  require(learner.temperature_decay > 0.0, "learner.temperature_decay", "must be positive");
  require(learner.sweeps_per_step >= 1, "learner.sweeps_per_step", "must be at least 1");
  require(learner.policy_sigma > 0.0, "learner.policy_sigma", "must be positive");
  if (env.kind == EnvironmentKind::LinearPoint) {
    require(learner.algorithm == LearnerAlgorithm::Gpomdp, "learner.algorithm",
            to_string(learner.algorithm) + " needs a finite MDP; env.name is point");
    require(!learner.exact_gradients, "learner.exact_gradients",
            "exact gradients need a finite MDP; env.name is point");
    require(!observer.oracle_gradients, "observer.oracle_gradients",
            "exact Jacobians need a finite MDP; env.name is point");
  }

  const SolverConfig& s = observer.solver;
  require(s.epsilon > 0.0, "observer.epsilon", "must be positive");
  require(s.ridge >= 0.0, "observer.ridge", "must be nonnegative");
  require(s.tolerance >= 0.0, "observer.tolerance", "must be nonnegative");
  require(s.max_iterations >= 1, "observer.max_iterations", "must be at least 1");
  require(s.initial_rate >= s.epsilon, "observer.initial_rate", "must be at least observer.epsilon");
  require(s.condition_limit > 1.0, "observer.condition_limit", "must exceed 1");
  require(s.fallback_ridge > 0.0, "observer.fallback_ridge", "must be positive");
  require(observer.cloning.l2 >= 0.0, "observer.cloning_l2", "must be nonnegative");
  require(observer.cloning.tolerance > 0.0, "observer.cloning_tolerance", "must be positive");
  require(observer.cloning.max_iterations >= 1, "observer.cloning_max_iterations", "must be at least 1");

  require(eval.seeds >= 1, "eval.seeds", "must be at least 1");
  require(eval.retrain_m >= 1, "eval.retrain_m", "must be at least 1");
  require(eval.retrain_n >= 1, "eval.retrain_n", "must be at least 1");
  require(eval.retrain_alpha > 0.0, "eval.retrain_alpha", "must be positive");
  require(eval.mc_episodes >= 2, "eval.mc_episodes", "must be at least 2");
  require(!output_dir.empty(), "output.dir", "must not be empty");
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number), "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap read_config_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ExperimentConfig apply_config(const ConfigMap& entries, ExperimentConfig base) {
  const auto& table = fields();
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second.set(base, key, value);
  }
  if (entries.count("env.name") && !entries.count("learner.exact_gradients"))
    base.learner.exact_gradients = base.env.kind == EnvironmentKind::Gridworld;
  base.learner.horizon = base.env.horizon;
  return base;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config = apply_config(read_config_map(path));
  config.validate();
  return config;
}

ConfigMap to_config_map(const ExperimentConfig& config) {
  ConfigMap out;
  for (const auto& [key, field] : fields()) out[key] = field.get(config);
  return out;
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, value] : to_config_map(config)) out += key + " = " + value + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::string canonical;
  for (const auto& [key, value] : to_config_map(config))
    if (run_defining(key)) canonical += key + "=" + value + "\n";
  return hex64(fnv1a(canonical));
}

PipelineOptions pipeline_options(const ObserverSpec& spec) {
  PipelineOptions options;
  options.estimator = spec.estimator;
  options.estimator_options.baseline = spec.baseline;
  options.cloning = spec.cloning;
  options.solver = spec.solver;
  return options;
}

LearnerConfig retrain_config(const ExperimentConfig& config) {
  LearnerConfig out;
  out.algorithm = LearnerAlgorithm::Gpomdp;
  out.m = config.eval.retrain_m;
  out.n = config.eval.retrain_n;
  out.horizon = config.env.horizon;
  out.alpha = config.eval.retrain_alpha;
  out.exact_gradients = config.eval.retrain_exact;
  out.estimator = config.learner.estimator;
  out.policy_sigma = config.learner.policy_sigma;
  return out;
}

}  // namespace logel
