/*
 * Copyright 2026 The xids Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Runs the command-line tool end to end on synthetic files.

#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "synthetic_kdd.hpp"

// After Eigen: the resolver header pulled in here defines a macro that
// collides with Eigen parameter names.
#include <httplib.h>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string(XIDS_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult r;
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::temp_directory_path() / "xids_cli_test");
    fs::remove_all(*dir_);
    fs::create_directories(*dir_);
    std::ofstream(*dir_ / "train.txt") << xids::testing::SyntheticKddText({600, 51});
    xids::testing::SyntheticKddOptions test{150, 52};
    test.cover_vocabulary = false;
    std::ofstream(*dir_ / "test.txt") << xids::testing::SyntheticKddText(test);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static std::string P(const std::string& name) { return (*dir_ / name).string(); }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

// Every stage, in order, with the file each one writes.
std::vector<std::pair<std::string, std::vector<std::string>>> Stages(const std::function<std::string(std::string)>& p) {
  const std::string m = " --model " + p("model.bin") + " --data " + p("data.bin");
  return {
      {"ingest --train " + p("train.txt") + " --test " + p("test.txt") + " --out " + p("data.bin"),
       {"data.bin", "data.bin.json"}},
      {"summary --data " + p("data.bin") + " --out " + p("summary.json"), {"summary.json"}},
      {"train --data " + p("data.bin") + " --epochs 4 --batch 64 --lr 0.003 --layers 122,16,2 --out " +
           p("model.bin"),
       {"model.bin", "model.bin.json"}},
      {"eval" + m + " --split test --out " + p("eval.json"), {"eval.json"}},
      {"explain shap" + m + " --split test --index 2 --background 8 --coalitions 150 --svg " + p("force.svg") +
           " --out " + p("shap.json"),
       {"shap.json", "force.svg"}},
      {"explain lime" + m + " --split test --index 2 --samples 400 --svg " + p("lime.svg") + " --out " +
           p("lime.json"),
       {"lime.json", "lime.svg"}},
      {"explain summary" + m + " --count 4 --background 5 --coalitions 200 --svg " + p("bee.svg") +
           " --stacked-svg " + p("stacked.svg") + " --out " + p("summary_shap.json"),
       {"summary_shap.json", "bee.svg", "stacked.svg"}},
      {"contrast pn" + m + " --index 1 --out " + p("pn.json"), {"pn.json"}},
      {"contrast pp" + m + " --index 1 --out " + p("pp.json"), {"pp.json"}},
      {"prototypes" + m + " --index 3 --m 3 --out " + p("proto.json"), {"proto.json"}},
      {"rules train --data " + p("data.bin") + " --degree 3 --out " + p("rules.txt"), {"rules.txt", "rules.txt.json"}},
      {"rules eval --rules " + p("rules.txt") + " --data " + p("data.bin") + " --split test --out " +
           p("rules_eval.json"),
       {"rules_eval.json"}},
  };
}

TEST_F(CliTest, EveryStageIsByteDeterministic) {
  const auto stages = Stages([](const std::string& n) { return P(n); });
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& [args, outputs] : stages) {
      const RunResult r = RunCli("--seed 7 " + args);
      ASSERT_EQ(r.exit_code, 0) << args << "\n" << r.out;
      // One summary line per run.
      EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << r.out;
      for (const auto& o : outputs) {
        const std::string bytes = Slurp(*dir_ / o);
        ASSERT_FALSE(bytes.empty()) << o;
        if (pass == 0) {
          first[o] = bytes;
        } else {
          EXPECT_EQ(bytes, first[o]) << o << " differs between runs";
        }
      }
      if (pass == 1) {
        EXPECT_EQ(r.out.find("error"), std::string::npos);
      }
    }
  }
  EXPECT_EQ(Json::parse(first["eval.json"])["kind"], "metrics");
  EXPECT_NE(first["force.svg"].find("class=\"segment\""), std::string::npos);
  EXPECT_EQ(first["rules.txt"].rfind("predict attack if any:", 0), 0u);
}

TEST_F(CliTest, SummaryLineFormat) {
  ASSERT_EQ(RunCli("ingest --train " + P("train.txt") + " --test " + P("test.txt") + " --out " + P("d2.bin")).exit_code, 0);
  const RunResult r = RunCli("ingest --train " + P("train.txt") + " --test " + P("test.txt") + " --out " + P("d2.bin"));
  EXPECT_EQ(r.out.rfind("ingest ", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("columns=122"), std::string::npos) << r.out;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli("").exit_code, 1);
  EXPECT_EQ(RunCli("bogus").exit_code, 1);
  EXPECT_EQ(RunCli("train --epochs 3").exit_code, 1);
  EXPECT_EQ(RunCli("eval --model a --data b --split validation --out c").exit_code, 1);
  EXPECT_EQ(RunCli("--help").exit_code, 0);

  std::ofstream(*dir_ / "broken.txt") << "0,tcp,http,SF,1,2\n";
  const RunResult bad = RunCli("ingest --train " + P("broken.txt") + " --test " + P("test.txt") + " --out " + P("x.bin"));
  EXPECT_EQ(bad.exit_code, 2);
  EXPECT_NE(bad.out.find("error status=data exit=2"), std::string::npos);
  EXPECT_EQ(RunCli("summary --data " + P("missing.bin") + " --out " + P("s.json")).exit_code, 2);

  // Learning rate overflow drives the weights to non-finite values.
  ASSERT_EQ(RunCli("ingest --train " + P("train.txt") + " --test " + P("test.txt") + " --out " + P("d3.bin")).exit_code, 0);
  const RunResult nan = RunCli("train --data " + P("d3.bin") + " --epochs 3 --lr 1e300 --layers 122,8,2 --out " +
                            P("nan.bin"));
  EXPECT_EQ(nan.exit_code, 3) << nan.out;
}

TEST_F(CliTest, ServeAnswersApiRequests) {
  ASSERT_EQ(RunCli("ingest --train " + P("train.txt") + " --test " + P("test.txt") + " --out " + P("sd.bin")).exit_code, 0);
  ASSERT_EQ(RunCli("train --data " + P("sd.bin") + " --epochs 2 --layers 122,8,2 --out " + P("sm.bin")).exit_code, 0);
  {
    std::ofstream(*dir_ / "rules_ref.txt") << Slurp(fs::path(XIDS_DATA_DIR) / "reference_rules.txt");
  }

  int fds[2];
  ASSERT_EQ(pipe(fds), 0);
  const pid_t pid = fork();
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    execl(XIDS_CLI_PATH, XIDS_CLI_PATH, "--threads", "2", "serve", "--model", P("sm.bin").c_str(), "--data",
          P("sd.bin").c_str(), "--rules", P("rules_ref.txt").c_str(), "--port", "0", static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  std::string line;
  char c;
  while (read(fds[0], &c, 1) == 1 && c != '\n') line += c;
  const auto at = line.find("port=");
  ASSERT_NE(at, std::string::npos) << line;
  const int port = std::stoi(line.substr(at + 5));

  httplib::Client client("127.0.0.1", port);
  auto meta = client.Get("/api/meta");
  ASSERT_TRUE(meta);
  EXPECT_EQ(meta->status, 200);
  EXPECT_EQ(Json::parse(meta->body)["encoded_width"], 122);
  auto page = client.Get("/api/instances?split=train&offset=0&limit=2");
  ASSERT_TRUE(page);
  const Json rows = Json::parse(page->body)["rows"];
  ASSERT_EQ(rows.size(), 2u);
  auto pred = client.Post("/api/predict", Json{{"features", rows[0]["features"]}}.dump(), "application/json");
  ASSERT_TRUE(pred);
  EXPECT_EQ(pred->status, 200);
  auto bad = client.Post("/api/predict", "{\"features\":[0.5]}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto rules = client.Get("/api/rules");
  ASSERT_TRUE(rules);
  EXPECT_EQ(Json::parse(rules->body)["rules"]["clauses"].size(), 5u);

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  close(fds[0]);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
