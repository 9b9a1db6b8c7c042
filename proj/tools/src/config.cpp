#include "solatools/config.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

namespace solatools {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw ConfigError(origin + ": " + msg);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where, const std::string& origin) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(origin, "unknown key '" + it.key() + "' in " + where);
  }
}

long long get_int(const json& obj, const char* key, long long def, const std::string& where,
                  const std::string& origin) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(origin, "type mismatch for '" + std::string(key) + "' in " + where +
                     ": expected integer");
  return v.get<long long>();
}

double get_num(const json& obj, const char* key, double def, const std::string& where,
               const std::string& origin) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number())
    fail(origin, "type mismatch for '" + std::string(key) + "' in " + where +
                     ": expected number");
  return v.get<double>();
}

bool get_bool(const json& obj, const char* key, bool def, const std::string& where,
              const std::string& origin) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_boolean())
    fail(origin, "type mismatch for '" + std::string(key) + "' in " + where +
                     ": expected boolean");
  return v.get<bool>();
}

std::string get_str(const json& obj, const char* key, const std::string& def,
                    const std::string& where, const std::string& origin) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string())
    fail(origin, "type mismatch for '" + std::string(key) + "' in " + where +
                     ": expected string");
  return v.get<std::string>();
}

std::vector<int> get_int_array(const json& obj, const char* key, const std::string& where,
                               const std::string& origin) {
  std::vector<int> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array())
    fail(origin, "type mismatch for '" + std::string(key) + "' in " + where +
                     ": expected array");
  for (const json& e : v) {
    if (!e.is_number_integer() && !e.is_number_unsigned())
      fail(origin, "type mismatch in '" + std::string(key) + "' in " + where +
                       ": expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::string resolve_path(const std::string& p, const std::string& base_dir) {
  if (p.empty() || base_dir.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return p;
  return (std::filesystem::path(base_dir) / fp).string();
}

void require_file(const std::string& path, const std::string& key, const std::string& origin) {
  if (!std::filesystem::exists(path))
    fail(origin, key + ": file not found: " + path);
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::string& origin,
                                  const std::string& base_dir) {
  if (!j.is_object()) fail(origin, "config root must be a table/object");
  reject_unknown(j,
                 {"kind", "seed", "events", "naive", "metric", "store_params",
                  "divergence_threshold", "n0", "x0", "signal", "linreg", "quadratic",
                  "mnist", "analysis", "agent"},
                 "top level", origin);

  ExperimentConfig cfg;
  cfg.kind = get_str(j, "kind", "", "top level", origin);
  if (cfg.kind.empty()) fail(origin, "kind required (linreg | mnist | custom)");
  if (cfg.kind != "linreg" && cfg.kind != "mnist" && cfg.kind != "custom")
    fail(origin, "kind must be linreg, mnist, or custom; got '" + cfg.kind + "'");

  long long seed = get_int(j, "seed", 0, "top level", origin);
  if (seed < 0) fail(origin, "seed must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  cfg.events = static_cast<int>(get_int(j, "events", 200, "top level", origin));
  if (cfg.events < 1) fail(origin, "events must be >= 1");
  cfg.naive = get_bool(j, "naive", false, "top level", origin);

  std::string metric = get_str(j, "metric", "inverse_loss", "top level", origin);
  if (metric == "inverse_loss") cfg.metric = sola::MetricKind::InverseLoss;
  else if (metric == "inverse_error_norm") cfg.metric = sola::MetricKind::InverseErrorNorm;
  else fail(origin, "metric must be inverse_loss or inverse_error_norm; got '" + metric + "'");

  cfg.store_params = static_cast<int>(get_int(j, "store_params", -1, "top level", origin));
  if (cfg.store_params < -1 || cfg.store_params > 1)
    fail(origin, "store_params must be -1 (auto), 0, or 1");
  cfg.divergence_threshold = get_num(j, "divergence_threshold", 1e12, "top level", origin);
  if (!(cfg.divergence_threshold > 0)) fail(origin, "divergence_threshold must be positive");
  cfg.n0 = get_num(j, "n0", 1.0, "top level", origin);
  if (cfg.n0 < 0) fail(origin, "n0 must be nonnegative");

  if (j.contains("x0")) {
    if (cfg.kind == "mnist") fail(origin, "x0 not supported for mnist (init is drawn from seed)");
    const json& v = j.at("x0");
    if (!v.is_array()) fail(origin, "type mismatch for 'x0' in top level: expected array");
    for (const json& e : v) {
      if (!e.is_number()) fail(origin, "type mismatch in 'x0': expected numbers");
      cfg.x0.push_back(e.get<double>());
    }
  }

  // ---- agents
  if (!j.contains("agent")) fail(origin, "at least one [[agent]] required");
  const json& agents = j.at("agent");
  if (!agents.is_array() || agents.empty()) fail(origin, "at least one [[agent]] required");
  std::set<int> ids;
  for (const json& a : agents) {
    std::string where = "[[agent]] #" + std::to_string(cfg.agents.size() + 1);
    reject_unknown(a,
                   {"id", "algorithm", "eta", "noise_scale", "noise_var", "subunits",
                    "local_steps", "batch"},
                   where, origin);
    AgentConfig ac;
    ac.id = static_cast<int>(get_int(a, "id", 0, where, origin));
    if (ac.id < 1) fail(origin, where + ": id required (positive integer)");
    if (!ids.insert(ac.id).second)
      fail(origin, where + ": duplicate agent id " + std::to_string(ac.id));
    where = "agent " + std::to_string(ac.id);

    std::string alg = get_str(a, "algorithm", "", where, origin);
    if (alg == "gd") ac.algorithm = sola::AlgorithmKind::GD;
    else if (alg == "sgd") ac.algorithm = sola::AlgorithmKind::SGD;
    else if (alg == "dsgd") ac.algorithm = sola::AlgorithmKind::DSGD;
    else if (alg == "fedavg") ac.algorithm = sola::AlgorithmKind::FedAvg;
    else if (alg.empty()) fail(origin, where + ": algorithm required (gd|sgd|dsgd|fedavg)");
    else fail(origin, where + ": unknown algorithm '" + alg + "'");

    ac.eta = get_num(a, "eta", 0.05, where, origin);
    if (!(ac.eta > 0)) fail(origin, where + ": eta must be positive");
    ac.noise_scale = get_num(a, "noise_scale", 0.0, where, origin);
    if (ac.noise_scale < 0) fail(origin, where + ": noise_scale must be nonnegative");
    ac.noise_var = get_num(a, "noise_var", 1.0, where, origin);
    if (ac.noise_var < 0) fail(origin, where + ": noise_var must be nonnegative");
    if (a.contains("noise_var") && cfg.kind != "linreg")
      fail(origin, where + ": noise_var only applies to linreg experiments");

    bool decentralized = ac.algorithm == sola::AlgorithmKind::DSGD ||
                         ac.algorithm == sola::AlgorithmKind::FedAvg;
    ac.subunits = static_cast<int>(get_int(a, "subunits", 0, where, origin));
    if (decentralized && ac.subunits < 1)
      fail(origin, where + ": " + alg + " requires subunits >= 1");
    if (!decentralized && a.contains("subunits"))
      fail(origin, where + ": subunits only applies to dsgd/fedavg");

    ac.local_steps = static_cast<int>(get_int(a, "local_steps", 1, where, origin));
    if (ac.local_steps < 1) fail(origin, where + ": local_steps must be >= 1");
    if (a.contains("local_steps") && ac.algorithm != sola::AlgorithmKind::FedAvg)
      fail(origin, where + ": local_steps only applies to fedavg");

    ac.batch = static_cast<int>(get_int(a, "batch", 0, where, origin));
    if (ac.batch < 0) fail(origin, where + ": batch must be nonnegative");
    if (a.contains("batch") && ac.algorithm != sola::AlgorithmKind::SGD &&
        ac.algorithm != sola::AlgorithmKind::DSGD)
      fail(origin, where + ": batch only applies to sgd/dsgd");
    if (ac.algorithm == sola::AlgorithmKind::SGD && ac.batch < 1) ac.batch = 1;

    cfg.agents.push_back(ac);
  }

  // ---- signal
  if (j.contains("signal")) {
    const json& s = j.at("signal");
    if (!s.is_object()) fail(origin, "[signal] must be a table");
    reject_unknown(s, {"kind", "period", "order", "sequence"}, "[signal]", origin);
    cfg.signal.kind = get_str(s, "kind", "periodic", "[signal]", origin);
    if (cfg.signal.kind != "periodic" && cfg.signal.kind != "greedy" &&
        cfg.signal.kind != "explicit")
      fail(origin, "signal kind must be periodic, greedy, or explicit; got '" +
                       cfg.signal.kind + "'");
    cfg.signal.period = static_cast<int>(get_int(s, "period", 10, "[signal]", origin));
    if (cfg.signal.period < 1) fail(origin, "signal period must be >= 1");
    if (s.contains("period") && cfg.signal.kind != "periodic")
      fail(origin, "signal period only applies to periodic signals");
    cfg.signal.order = get_int_array(s, "order", "[signal]", origin);
    if (!cfg.signal.order.empty() && cfg.signal.kind != "periodic")
      fail(origin, "signal order only applies to periodic signals");
    cfg.signal.sequence = get_int_array(s, "sequence", "[signal]", origin);
    if (cfg.signal.kind == "explicit") {
      if (cfg.signal.sequence.empty())
        fail(origin, "explicit signal requires a sequence");
      if (static_cast<int>(cfg.signal.sequence.size()) != cfg.events)
        fail(origin, "signal sequence length " +
                         std::to_string(cfg.signal.sequence.size()) +
                         " does not match events = " + std::to_string(cfg.events));
    } else if (!cfg.signal.sequence.empty()) {
      fail(origin, "signal sequence only applies to explicit signals");
    }
  }
  if (cfg.signal.order.empty())
    for (const AgentConfig& a : cfg.agents) cfg.signal.order.push_back(a.id);

  auto known_agent = [&](int id) { return ids.count(id) > 0; };
  for (int id : cfg.signal.order)
    if (!known_agent(id))
      fail(origin, "signal order names agent " + std::to_string(id) +
                       " but no [[agent]] defines it");
  for (int id : cfg.signal.sequence)
    if (!known_agent(id))
      fail(origin, "signal sequence names agent " + std::to_string(id) +
                       " but no [[agent]] defines it");

  // ---- kind-specific tables
  if (j.contains("linreg") && cfg.kind != "linreg")
    fail(origin, "[linreg] section only applies to linreg experiments");
  if (j.contains("quadratic") && cfg.kind != "custom")
    fail(origin, "[quadratic] section only applies to custom experiments");
  if (j.contains("mnist") && cfg.kind != "mnist")
    fail(origin, "[mnist] section only applies to mnist experiments");

  if (cfg.kind == "linreg") {
    if (j.contains("linreg")) {
      const json& l = j.at("linreg");
      if (!l.is_object()) fail(origin, "[linreg] must be a table");
      reject_unknown(l, {"dim", "feature_var", "batch_size"}, "[linreg]", origin);
      cfg.linreg.dim = static_cast<int>(get_int(l, "dim", 3, "[linreg]", origin));
      if (cfg.linreg.dim < 1) fail(origin, "linreg.dim must be >= 1");
      cfg.linreg.feature_var = get_num(l, "feature_var", 0.5, "[linreg]", origin);
      if (!(cfg.linreg.feature_var > 0)) fail(origin, "linreg.feature_var must be positive");
      cfg.linreg.batch_size = static_cast<int>(get_int(l, "batch_size", 10, "[linreg]", origin));
      if (cfg.linreg.batch_size < 1) fail(origin, "linreg.batch_size must be >= 1");
    }
  } else if (cfg.kind == "custom") {
    if (!j.contains("quadratic")) fail(origin, "quadratic.diag required for custom experiments");
    const json& q = j.at("quadratic");
    if (!q.is_object()) fail(origin, "[quadratic] must be a table");
    reject_unknown(q, {"diag", "offset"}, "[quadratic]", origin);
    if (!q.contains("diag")) fail(origin, "quadratic.diag required for custom experiments");
    const json& d = q.at("diag");
    if (!d.is_array() || d.empty())
      fail(origin, "quadratic.diag must be a nonempty array of numbers");
    for (const json& e : d) {
      if (!e.is_number()) fail(origin, "quadratic.diag must be a nonempty array of numbers");
      cfg.quadratic.diag.push_back(e.get<double>());
      if (!(cfg.quadratic.diag.back() > 0)) fail(origin, "quadratic.diag entries must be positive");
    }
    cfg.quadratic.offset = get_num(q, "offset", 0.0, "[quadratic]", origin);
  } else {  // mnist
    if (!j.contains("mnist")) fail(origin, "mnist.images_path required");
    const json& m = j.at("mnist");
    if (!m.is_object()) fail(origin, "[mnist] must be a table");
    reject_unknown(m,
                   {"images_path", "labels_path", "test_images_path", "test_labels_path",
                    "hidden", "labels_per_shard", "shard_cap", "shard_noise_var", "gd_batch",
                    "eval_every"},
                   "[mnist]", origin);
    cfg.mnist.images_path = resolve_path(get_str(m, "images_path", "", "[mnist]", origin),
                                         base_dir);
    if (cfg.mnist.images_path.empty()) fail(origin, "mnist.images_path required");
    cfg.mnist.labels_path = resolve_path(get_str(m, "labels_path", "", "[mnist]", origin),
                                         base_dir);
    if (cfg.mnist.labels_path.empty()) fail(origin, "mnist.labels_path required");
    cfg.mnist.test_images_path =
        resolve_path(get_str(m, "test_images_path", "", "[mnist]", origin), base_dir);
    cfg.mnist.test_labels_path =
        resolve_path(get_str(m, "test_labels_path", "", "[mnist]", origin), base_dir);
    if (cfg.mnist.test_images_path.empty() != cfg.mnist.test_labels_path.empty())
      fail(origin, "mnist.test_images_path and mnist.test_labels_path must be given together");

    require_file(cfg.mnist.images_path, "mnist.images_path", origin);
    require_file(cfg.mnist.labels_path, "mnist.labels_path", origin);
    if (!cfg.mnist.test_images_path.empty()) {
      require_file(cfg.mnist.test_images_path, "mnist.test_images_path", origin);
      require_file(cfg.mnist.test_labels_path, "mnist.test_labels_path", origin);
    }

    cfg.mnist.hidden = static_cast<int>(get_int(m, "hidden", 128, "[mnist]", origin));
    if (cfg.mnist.hidden < 1) fail(origin, "mnist.hidden must be >= 1");
    cfg.mnist.labels_per_shard =
        static_cast<int>(get_int(m, "labels_per_shard", 2, "[mnist]", origin));
    if (cfg.mnist.labels_per_shard < 1) fail(origin, "mnist.labels_per_shard must be >= 1");
    cfg.mnist.shard_cap = static_cast<int>(get_int(m, "shard_cap", 128, "[mnist]", origin));
    if (cfg.mnist.shard_cap < 1) fail(origin, "mnist.shard_cap must be >= 1");
    cfg.mnist.shard_noise_var = get_num(m, "shard_noise_var", 0.5, "[mnist]", origin);
    if (cfg.mnist.shard_noise_var < 0) fail(origin, "mnist.shard_noise_var must be nonnegative");
    cfg.mnist.gd_batch = static_cast<int>(get_int(m, "gd_batch", 256, "[mnist]", origin));
    if (cfg.mnist.gd_batch < 1) fail(origin, "mnist.gd_batch must be >= 1");
    cfg.mnist.eval_every = static_cast<int>(get_int(m, "eval_every", 1, "[mnist]", origin));
    if (cfg.mnist.eval_every < 1) fail(origin, "mnist.eval_every must be >= 1");

    for (const AgentConfig& a : cfg.agents) {
      bool dec = a.algorithm == sola::AlgorithmKind::DSGD ||
                 a.algorithm == sola::AlgorithmKind::FedAvg;
      if (dec && a.subunits * cfg.mnist.labels_per_shard != 10)
        fail(origin, "agent " + std::to_string(a.id) +
                         ": subunits x labels_per_shard must cover the 10 classes (got " +
                         std::to_string(a.subunits) + " x " +
                         std::to_string(cfg.mnist.labels_per_shard) + ")");
    }
  }

  if (!cfg.x0.empty()) {
    int want = cfg.kind == "linreg" ? cfg.linreg.dim
                                    : static_cast<int>(cfg.quadratic.diag.size());
    if (static_cast<int>(cfg.x0.size()) != want)
      fail(origin, "x0 length " + std::to_string(cfg.x0.size()) +
                       " does not match problem dimension " + std::to_string(want));
  }

  // ---- analysis
  if (j.contains("analysis")) {
    const json& an = j.at("analysis");
    if (!an.is_object()) fail(origin, "[analysis] must be a table");
    reject_unknown(an,
                   {"regret", "stability", "contraction", "chain", "estimator_samples",
                    "chain_windows", "chain_dirs"},
                   "[analysis]", origin);
    cfg.analysis.regret = get_bool(an, "regret", false, "[analysis]", origin);
    cfg.analysis.stability = get_bool(an, "stability", false, "[analysis]", origin);
    cfg.analysis.contraction = get_bool(an, "contraction", false, "[analysis]", origin);
    cfg.analysis.chain = get_bool(an, "chain", false, "[analysis]", origin);
    cfg.analysis.estimator_samples =
        static_cast<int>(get_int(an, "estimator_samples", 256, "[analysis]", origin));
    if (cfg.analysis.estimator_samples < 1)
      fail(origin, "analysis.estimator_samples must be >= 1");
    cfg.analysis.chain_windows =
        static_cast<int>(get_int(an, "chain_windows", 20, "[analysis]", origin));
    if (cfg.analysis.chain_windows < 1) fail(origin, "analysis.chain_windows must be >= 1");
    cfg.analysis.chain_dirs = static_cast<int>(get_int(an, "chain_dirs", 5, "[analysis]", origin));
    if (cfg.analysis.chain_dirs < 1) fail(origin, "analysis.chain_dirs must be >= 1");
    if ((cfg.analysis.contraction || cfg.analysis.chain) && cfg.kind == "mnist")
      fail(origin,
           "contraction/chain analysis is not supported for mnist (parameter dimension "
           "exceeds the finite-difference guard)");
  }

  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  json j = load_config_file(path);
  std::string base = std::filesystem::path(path).parent_path().string();
  return config_from_json(j, path, base);
}

}  // namespace solatools
