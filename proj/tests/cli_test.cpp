#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "cli/run.hpp"
#include "cli/settings.hpp"
#include "holo/csv.hpp"
#include "holo/error.hpp"
#include "holo/transport.hpp"

namespace fs = std::filesystem;
using holo::cli::run_scenario;

namespace {

struct Outcome {
  int status = 0;
  std::string out;
  std::string err;
};

Outcome holo_run(std::vector<std::string> args, const holo::cli::EnvLookup& env =
                                                [](const std::string&) { return std::nullopt; }) {
  std::ostringstream out, err;
  Outcome r;
  r.status = run_scenario(args, out, err, env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("holo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  fs::path root_;
};

const std::vector<std::string> kSmallFl = {"--clients", "3", "--rounds", "3",
                                           "--samples-per-client", "100", "--test-samples", "140"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Settings, ConfigParsing) {
  const auto kv = holo::cli::parse_config("# comment\n\nrounds = 5\n  seed=7  \n");
  EXPECT_EQ(kv.at("rounds"), "5");
  EXPECT_EQ(kv.at("seed"), "7");
  EXPECT_THROW(holo::cli::parse_config("rounds 5\n"), holo::Error);
  EXPECT_THROW(holo::cli::parse_config("a = 1\na = 2\n"), holo::Error);
}

TEST(Settings, NamesForFlagsAndEnvironment) {
  EXPECT_EQ(holo::cli::flag_name("learning_rate"), "--learning-rate");
  EXPECT_EQ(holo::cli::env_name("port"), "HOLO_PORT");
}

TEST_F(CliTest, NetsimDefaultsReportProfiles) {
  const Outcome r = holo_run({"netsim", "--defaults", "--out", dir("n")});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto t = holo::csv::parse(slurp(root_ / "n" / "netsim_report.csv"));
  ASSERT_EQ(t.header(), (std::vector<std::string>{"arch", "latency_ms", "bandwidth_MBps"}));
  EXPECT_EQ(t.rows()[0], (std::vector<std::string>{"cloud", "170", "90"}));
  EXPECT_EQ(t.rows()[1], (std::vector<std::string>{"edge", "35", "0.28"}));
  const auto tl = holo::csv::parse(slurp(root_ / "n" / "timeline_edge.csv"));
  EXPECT_EQ(tl.header(), (std::vector<std::string>{"t_ms", "kind", "user_id"}));
}

TEST_F(CliTest, EveryRunDescribesItself) {
  ASSERT_EQ(holo_run({"compose", "--out", dir("c")}).status, 0);
  const std::string resolved = slurp(root_ / "c" / "config.resolved");
  EXPECT_NE(resolved.find("inputs = smile,voice,none"), std::string::npos);
  EXPECT_NE(resolved.find("seed = 42"), std::string::npos);
  const auto manifest = holo::csv::parse(slurp(root_ / "c" / "manifest.csv"));
  std::vector<std::string> files;
  for (const auto& row : manifest.rows()) files.push_back(row[0]);
  EXPECT_NE(std::find(files.begin(), files.end(), "views.csv"), files.end());
  EXPECT_NE(std::find(files.begin(), files.end(), "config.resolved"), files.end());
}

TEST_F(CliTest, ComposePassiveViewerSeesBase) {
  const Outcome r = holo_run({"compose", "--users", "3", "--inputs", "smile,voice,none", "--out", dir("c")});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto base = holo::csv::parse(slurp(root_ / "c" / "base.csv"));
  const auto views = holo::csv::parse(slurp(root_ / "c" / "views.csv"));
  ASSERT_EQ(views.rows().size(), 3u);
  const std::string base_hash = base.rows()[0][1];
  EXPECT_NE(views.rows()[0][4], base_hash);
  EXPECT_NE(views.rows()[1][4], base_hash);
  EXPECT_EQ(views.rows()[2][4], base_hash);
  EXPECT_EQ(views.rows()[0][2], "Smile");
  EXPECT_EQ(views.rows()[1][2], "SpeakReply");
}

TEST_F(CliTest, FedsimZeroRoundsWritesHeaderOnly) {
  const Outcome r = holo_run({"fedsim", "--rounds", "0", "--out", dir("f")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(root_ / "f" / "fl_history.csv"), "round,federated_acc,centralized_acc\n");
}

TEST_F(CliTest, IdenticalRunsProduceIdenticalArtifacts) {
  const auto small_cgh = std::vector<std::string>{"cgh", "--width", "64", "--height", "64",
                                                  "--iterations", "10", "--scaling", "false"};
  for (const auto& name : {"a", "b"}) {
    ASSERT_EQ(holo_run(with({"fedsim", "--out", dir(std::string("f") + name)}, kSmallFl)).status, 0);
    ASSERT_EQ(holo_run(with(small_cgh, {"--out", dir(std::string("g") + name)})).status, 0);
  }
  for (const auto& f : {"fl_history.csv", "fl_summary.csv"}) {
    EXPECT_EQ(slurp(root_ / "fa" / f), slurp(root_ / "fb" / f)) << f;
  }
  for (const auto& f : {"phase.pgm", "phase.meta", "gs_error.csv", "crosstalk.csv",
                        "multiplex_phase.pgm", "reconstruction.pgm"}) {
    EXPECT_EQ(slurp(root_ / "ga" / f), slurp(root_ / "gb" / f)) << f;
  }
}

TEST_F(CliTest, SeedChangesOutput) {
  ASSERT_EQ(holo_run(with({"fedsim", "--out", dir("a")}, kSmallFl)).status, 0);
  ASSERT_EQ(holo_run(with({"fedsim", "--seed", "7", "--out", dir("b")}, kSmallFl)).status, 0);
  EXPECT_NE(slurp(root_ / "a" / "fl_summary.csv"), slurp(root_ / "b" / "fl_summary.csv"));
}

TEST_F(CliTest, LayeringFileEnvironmentFlags) {
  std::ofstream(root_ / "run.cfg") << "users = 2\ninputs = smile,none\nasset_id = from_file\n";
  const auto env = [](const std::string& name) -> std::optional<std::string> {
    if (name == "HOLO_ASSET_ID") return "from_env";
    return std::nullopt;
  };
  ASSERT_EQ(holo_run({"compose", "--config", (root_ / "run.cfg").string(), "--out", dir("a")}, env)
                .status,
            0);
  EXPECT_NE(slurp(root_ / "a" / "config.resolved").find("asset_id = from_env"), std::string::npos);
  EXPECT_NE(slurp(root_ / "a" / "config.resolved").find("users = 2"), std::string::npos);

  ASSERT_EQ(holo_run({"compose", "--config", (root_ / "run.cfg").string(), "--asset-id",
                      "from_flag", "--out", dir("b")},
                     env)
                .status,
            0);
  EXPECT_NE(slurp(root_ / "b" / "config.resolved").find("asset_id = from_flag"), std::string::npos);

  ASSERT_EQ(holo_run({"compose", "--defaults", "--out", dir("c")}, env).status, 0);
  EXPECT_NE(slurp(root_ / "c" / "config.resolved").find("asset_id = mona_lisa"), std::string::npos);
}

TEST_F(CliTest, UnknownConfigKeyRejected) {
  std::ofstream(root_ / "bad.cfg") << "rounds = 3\nwarp_factor = 9\n";
  const Outcome r = holo_run({"fedsim", "--config", (root_ / "bad.cfg").string(), "--out", dir("x")});
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.err, "error code=cli.unknown_key message=\"unknown config key warp_factor\"\n");
}

TEST_F(CliTest, ErrorsAreOneMachineReadableLine) {
  const Outcome usage = holo_run({"netsim", "--no-such-flag"});
  EXPECT_EQ(usage.status, 2);
  EXPECT_EQ(usage.err.rfind("error code=cli.usage message=\"", 0), 0u);
  EXPECT_EQ(std::count(usage.err.begin(), usage.err.end(), '\n'), 1);

  const Outcome bad_value = holo_run({"fedsim", "--rounds", "many", "--out", dir("x")});
  EXPECT_EQ(bad_value.status, 2);
  EXPECT_EQ(bad_value.err.rfind("error code=cli.invalid_value", 0), 0u);

  const Outcome module = holo_run({"cgh", "--width", "48", "--scaling", "false", "--out", dir("y")});
  EXPECT_EQ(module.status, 1);
  EXPECT_EQ(module.err.rfind("error code=cgh.non_power_of_two", 0), 0u);
  EXPECT_EQ(std::count(module.err.begin(), module.err.end(), '\n'), 1);

  EXPECT_EQ(holo_run({}).status, 2);
}

TEST_F(CliTest, HelpExitsCleanly) {
  const Outcome r = holo_run({"--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("netsim"), std::string::npos);
}

TEST_F(CliTest, ServeAndClientsOverTcp) {
  std::uint16_t port = 0;
  {
    holo::transport::TcpListener probe(0);
    port = probe.port();
  }
  const auto env = [port](const std::string& name) -> std::optional<std::string> {
    if (name == "HOLO_PORT") return std::to_string(port);
    return std::nullopt;
  };
  auto server = std::async(std::launch::async, [&] {
    return holo_run(with({"serve", "--out", dir("s"), "--timeout-ms", "10000",
                          "--accept-timeout-ms", "10000"}, kSmallFl), env);
  });
  std::vector<std::future<Outcome>> clients;
  for (int k = 0; k < 3; ++k) {
    clients.push_back(std::async(std::launch::async, [&, k] {
      return holo_run(with({"client", "--client-id", std::to_string(k), "--out",
                            dir("c" + std::to_string(k)), "--accept-timeout-ms", "10000"},
                           kSmallFl),
                      env);
    }));
  }
  for (auto& c : clients) {
    const Outcome r = c.get();
    EXPECT_EQ(r.status, 0) << r.err;
  }
  const Outcome s = server.get();
  ASSERT_EQ(s.status, 0) << s.err;
  EXPECT_NE(s.out.find("listening on 127.0.0.1:" + std::to_string(port)), std::string::npos);
  const std::string summary = slurp(root_ / "s" / "wire_summary.csv");
  EXPECT_NE(summary.find("matches_in_process,true"), std::string::npos);
  const std::string client_summary = slurp(root_ / "c0" / "client_summary.csv");
  const auto digest_at = [](const std::string& text) {
    return text.substr(text.find("final_params_sha256,") + 20, 64);
  };
  EXPECT_EQ(digest_at(summary), digest_at(client_summary));
}
