#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "solatools/config.hpp"

using namespace solatools;
using testutil::contains;
using testutil::thrown_message;

namespace {

ExperimentConfig from_toml(const std::string& text) {
  return config_from_json(parse_toml(text, "test"), "test");
}

const char* kMinimal =
    "kind = \"linreg\"\n"
    "[[agent]]\n"
    "id = 1\n"
    "algorithm = \"gd\"\n";

std::string config_path(const char* leaf) {
  return std::string(SOLA_CONFIG_DIR "/") + leaf;
}

}  // namespace

TEST_CASE("a minimal config fills every default") {
  ExperimentConfig cfg = from_toml(kMinimal);
  CHECK(cfg.kind == "linreg");
  CHECK(cfg.seed == 0);
  CHECK(cfg.events == 200);
  CHECK(!cfg.naive);
  CHECK(cfg.metric == sola::MetricKind::InverseLoss);
  CHECK(cfg.store_params == -1);
  CHECK(cfg.divergence_threshold == 1e12);
  CHECK(cfg.n0 == 1.0);
  CHECK(cfg.x0.empty());
  CHECK(cfg.signal.kind == "periodic");
  CHECK(cfg.signal.period == 10);
  CHECK(cfg.signal.order == std::vector<int>{1});  // defaults to the listed agents
  CHECK(cfg.linreg.dim == 3);
  CHECK(cfg.linreg.feature_var == 0.5);
  CHECK(cfg.linreg.batch_size == 10);
  REQUIRE(cfg.agents.size() == 1);
  CHECK(cfg.agents[0].id == 1);
  CHECK(cfg.agents[0].algorithm == sola::AlgorithmKind::GD);
  CHECK(cfg.agents[0].eta == 0.05);
  CHECK(!cfg.analysis.regret);
  CHECK(cfg.analysis.estimator_samples == 256);
}

TEST_CASE("unknown keys are rejected with their location") {
  std::string msg = thrown_message([] {
    from_toml("kind = \"linreg\"\nbogus = 1\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: unknown key 'bogus' in top level");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\n[signal]\nspeed = 3\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: unknown key 'speed' in [signal]");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\n[[agent]]\nid = 1\nalgorithm = \"gd\"\nrank = 2\n");
  });
  CHECK(msg == "test: unknown key 'rank' in [[agent]] #1");
}

TEST_CASE("type mismatches name the key and the expected type") {
  std::string msg = thrown_message([] {
    from_toml("kind = \"linreg\"\nevents = 3.5\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: type mismatch for 'events' in top level: expected integer");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\nnaive = 1\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: type mismatch for 'naive' in top level: expected boolean");

  msg = thrown_message([] {
    from_toml("kind = 7\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: type mismatch for 'kind' in top level: expected string");
}

TEST_CASE("agent list validation") {
  CHECK(thrown_message([] { from_toml("kind = \"linreg\"\n"); }) ==
        "test: at least one [[agent]] required");

  std::string msg = thrown_message([] {
    from_toml(
        "kind = \"linreg\"\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n"
        "[[agent]]\nid = 1\nalgorithm = \"sgd\"\n");
  });
  CHECK(msg == "test: [[agent]] #2: duplicate agent id 1");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\n[[agent]]\nid = 1\nalgorithm = \"adam\"\n");
  });
  CHECK(msg == "test: agent 1: unknown algorithm 'adam'");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\n[[agent]]\nid = 1\nalgorithm = \"dsgd\"\n");
  });
  CHECK(msg == "test: agent 1: dsgd requires subunits >= 1");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\n[[agent]]\nid = 1\nalgorithm = \"gd\"\nsubunits = 2\n");
  });
  CHECK(msg == "test: agent 1: subunits only applies to dsgd/fedavg");

  msg = thrown_message([] {
    from_toml("kind = \"linreg\"\n[[agent]]\nid = 1\nalgorithm = \"gd\"\nlocal_steps = 2\n");
  });
  CHECK(msg == "test: agent 1: local_steps only applies to fedavg");
}

TEST_CASE("signal wiring is checked against the agent list") {
  std::string msg = thrown_message([] {
    from_toml(
        "kind = \"linreg\"\n[signal]\norder = [1, 3]\n"
        "[[agent]]\nid = 1\nalgorithm = \"gd\"\n[[agent]]\nid = 2\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: signal order names agent 3 but no [[agent]] defines it");

  msg = thrown_message([] {
    from_toml(
        "kind = \"linreg\"\nevents = 3\n[signal]\nkind = \"explicit\"\nsequence = [1, 1]\n"
        "[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: signal sequence length 2 does not match events = 3");

  msg = thrown_message([] {
    from_toml(
        "kind = \"linreg\"\n[signal]\nkind = \"explicit\"\n"
        "[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: explicit signal requires a sequence");

  ExperimentConfig ok = from_toml(
      "kind = \"linreg\"\nevents = 3\n[signal]\nkind = \"explicit\"\nsequence = [1, 2, 1]\n"
      "[[agent]]\nid = 1\nalgorithm = \"gd\"\n[[agent]]\nid = 2\nalgorithm = \"gd\"\n");
  CHECK(ok.signal.sequence == std::vector<int>{1, 2, 1});
}

TEST_CASE("kind-specific sections are fenced off from other kinds") {
  std::string msg = thrown_message([] {
    from_toml("kind = \"linreg\"\nagentless = 0\n");
  });
  CHECK(contains(msg, "unknown key"));

  msg = thrown_message([] { from_toml("kind = \"mnist\"\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n"); });
  CHECK(msg == "test: mnist.images_path required");

  msg = thrown_message([] {
    from_toml(
        "kind = \"custom\"\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: quadratic.diag required for custom experiments");

  msg = thrown_message([] {
    from_toml(
        "kind = \"custom\"\n[quadratic]\ndiag = [1.0]\n[linreg]\ndim = 2\n"
        "[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: [linreg] section only applies to linreg experiments");

  msg = thrown_message([] {
    from_toml(
        "kind = \"custom\"\n[quadratic]\ndiag = [1.0]\n"
        "[[agent]]\nid = 1\nalgorithm = \"gd\"\nnoise_var = 2.0\n");
  });
  CHECK(msg == "test: agent 1: noise_var only applies to linreg experiments");
}

TEST_CASE("x0 must match the problem dimension") {
  std::string msg = thrown_message([] {
    from_toml(
        "kind = \"linreg\"\nx0 = [1.0, 2.0]\n[linreg]\ndim = 3\n"
        "[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  });
  CHECK(msg == "test: x0 length 2 does not match problem dimension 3");

  ExperimentConfig ok = from_toml(
      "kind = \"custom\"\nx0 = [1.0, -1.0]\n[quadratic]\ndiag = [2.0, 4.0]\n"
      "[[agent]]\nid = 1\nalgorithm = \"gd\"\n");
  CHECK(ok.x0 == std::vector<double>{1.0, -1.0});
  CHECK(ok.quadratic.diag == std::vector<double>{2.0, 4.0});
}

TEST_CASE("contraction analysis is refused where jacobians are impractical") {
  std::string text =
      "kind = \"mnist\"\n[mnist]\n"
      "images_path = \"" SOLA_DATA_DIR "/mnist/train-images-idx3-ubyte\"\n"
      "labels_path = \"" SOLA_DATA_DIR "/mnist/train-labels-idx1-ubyte\"\n"
      "[analysis]\ncontraction = true\n[[agent]]\nid = 1\nalgorithm = \"gd\"\n";
  std::string msg = thrown_message([&] { from_toml(text); });
  CHECK(contains(msg, "contraction/chain analysis is not supported for mnist"));
}

TEST_CASE("toml reader: values, comments, arrays, and tables") {
  nlohmann::json j = parse_toml(
      "# leading comment\n"
      "title = \"a\\nb\\\"c\\\\d\"  # trailing comment\n"
      "count = 42\n"
      "rate = 4.5\n"
      "big = 1e3\n"
      "flag = true\n"
      "other = false\n"
      "empty = []\n"
      "nums = [1, 2, 3]\n"
      "mixed = [0.5, 2]\n"
      "hash = \"a # not a comment\"\n"
      "[table]\n"
      "x = 1\n"
      "[[row]]\n"
      "v = 1\n"
      "[[row]]\n"
      "v = 2\n",
      "unit");
  CHECK(j["title"] == "a\nb\"c\\d");
  CHECK(j["count"].is_number_integer());
  CHECK(j["count"] == 42);
  CHECK(j["rate"].is_number_float());
  CHECK(j["rate"] == 4.5);
  CHECK(j["big"] == 1000.0);
  CHECK(j["flag"] == true);
  CHECK(j["other"] == false);
  CHECK(j["empty"].is_array());
  CHECK(j["empty"].empty());
  CHECK(j["nums"] == nlohmann::json({1, 2, 3}));
  CHECK(j["nums"][0].is_number_integer());
  CHECK(j["mixed"][0] == 0.5);
  CHECK(j["hash"] == "a # not a comment");
  CHECK(j["table"]["x"] == 1);
  REQUIRE(j["row"].is_array());
  CHECK(j["row"].size() == 2);
  CHECK(j["row"][1]["v"] == 2);
}

TEST_CASE("toml reader: malformed input names the line") {
  CHECK(thrown_message([] { parse_toml("a = 1\na = 2\n", "f"); }) ==
        "f:2: duplicate key 'a' in top level");
  CHECK(thrown_message([] { parse_toml("[sig]\nx = 1\nx = 2\n", "f"); }) ==
        "f:3: duplicate key 'x' in [sig]");
  CHECK(thrown_message([] { parse_toml("a = 1 garbage\n", "f"); }) ==
        "f:1: trailing characters after value");
  CHECK(thrown_message([] { parse_toml("a = \"unterminated\n", "f"); }) ==
        "f:1: unterminated string");
  CHECK(thrown_message([] { parse_toml("a = [1, 2\n", "f"); }) ==
        "f:1: unterminated array");
  CHECK(thrown_message([] { parse_toml("just words\n", "f"); }) ==
        "f:1: expected 'key = value'");
  CHECK(thrown_message([] { parse_toml("a = @@\n", "f"); }) == "f:1: bad value '@@'");
  CHECK(thrown_message([] { parse_toml("[t]\nx = 1\n[t]\n", "f"); }) ==
        "f:3: duplicate table [t]");
  CHECK(thrown_message([] { parse_toml("t = 1\n[[t]]\n", "f"); }) ==
        "f:2: 't' used as both key and table array");
  CHECK(thrown_message([] { parse_toml("a = \"\\q\"\n", "f"); }) ==
        "f:1: unknown escape \\q");
}

TEST_CASE("json documents are accepted as configs") {
  std::string dir = testutil::scratch_dir("config_json");
  std::string path = dir + "/exp.json";
  {
    std::ofstream f(path);
    f << R"({"kind": "linreg", "events": 12,
            "agent": [{"id": 1, "algorithm": "gd", "eta": 0.1}]})";
  }
  ExperimentConfig cfg = parse_config(path);
  CHECK(cfg.kind == "linreg");
  CHECK(cfg.events == 12);
  CHECK(cfg.agents[0].eta == 0.1);

  std::string bad = dir + "/broken.json";
  {
    std::ofstream f(bad);
    f << "{ not json";
  }
  CHECK(thrown_message([&] { parse_config(bad); }) == bad + ": invalid JSON document");

  CHECK(thrown_message([&] { parse_config(dir + "/absent.toml"); }) ==
        "cannot open " + dir + "/absent.toml");
}

TEST_CASE("every bundled config parses, except the full-scale one wanting its download") {
  for (const char* leaf :
       {"linreg_gd_dsgd.toml", "linreg_fedavg_dsgd.toml", "linreg_gd_dsgd_fedavg.toml",
        "linreg_dsgd_only.toml", "quadratic_chain.toml", "mnist_n5.toml", "mnist_n10.toml"}) {
    ExperimentConfig cfg = parse_config(config_path(leaf));
    CHECK(!cfg.agents.empty());
  }

  std::string msg =
      thrown_message([] { parse_config(config_path("mnist_full.toml")); });
  CHECK(contains(msg, "mnist.images_path: file not found:"));
  CHECK(contains(msg, "data/mnist/full"));
}

TEST_CASE("relative dataset paths resolve against the config file") {
  ExperimentConfig cfg = parse_config(config_path("mnist_n5.toml"));
  CHECK(contains(cfg.mnist.images_path, "configs/../data/mnist/train-images-idx3-ubyte"));
  CHECK(std::filesystem::exists(cfg.mnist.images_path));
  CHECK(std::filesystem::exists(cfg.mnist.test_labels_path));
  CHECK(cfg.mnist.hidden == 128);
  CHECK(cfg.mnist.gd_batch == 256);
  CHECK(cfg.signal.period == 5);
  CHECK(cfg.agents.size() == 2);
  CHECK(cfg.agents[1].subunits == 5);
}
