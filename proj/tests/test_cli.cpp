#include "cli.hpp"

#include "salflow/eval.hpp"
#include "salflow/io.hpp"
#include "salflow/synth.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;
using namespace salflow;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("salflow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Three identical textured gray frames.
  std::string identical_frames() {
    SceneSpec s = static_scene(3, 3);
    s.width = s.height = 32;
    const RenderedScene r = render(s);
    const std::string pattern = (dir_ / "in" / "f_%04d.png").string();
    save_sequence(r.sequence, pattern);
    return pattern;
  }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FlowOnIdenticalFramesIsZero) {
  const std::string in = identical_frames();
  const Outcome r = run({"flow", "--input", in, "--output", path("out/flow_%04d.flo"), "--levels", "2"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const FlowField f = load_flow_field(path("out/flow_%04d.flo"));
  ASSERT_EQ(f.time_samples(), 2);
  for (const FlowFrame& fr : f.frames)
    for (std::size_t k = 0; k < fr.u1.size(); ++k) {
      EXPECT_NEAR(fr.u1.values()[k], 0.0, 1e-6);
      EXPECT_NEAR(fr.u2.values()[k], 0.0, 1e-6);
    }
  EXPECT_TRUE(fs::exists(path("out/manifest_flow.txt")));
  EXPECT_TRUE(fs::exists(path("out/convergence.csv")));
  const std::string manifest = read_text(path("out/manifest_flow.txt"));
  EXPECT_NE(manifest.find("levels = 2"), std::string::npos);
  EXPECT_NE(manifest.find("alpha = 40"), std::string::npos);
  EXPECT_NE(manifest.find("[timings_s]"), std::string::npos);
}

TEST_F(CliTest, EvalWithConstantMapIsNumericalError) {
  for (int t = 0; t < 3; ++t) save_map(Plane(16, 16, 0.4), format_index(path("maps/m_%04d.salf"), t));
  save_fixations({{{0, 0.0, 0.1, 4, 4}}}, path("fix.csv"));
  const Outcome r = run({"eval", "--model", "flat=" + path("maps/m_%04d.salf"), "--fixations", path("fix.csv"),
                     "--out", path("eval")});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("numerical error"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("NSS undefined"), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(path("eval/manifest_eval.txt")));
}

TEST_F(CliTest, ErrorCategories) {
  const std::string in = identical_frames();
  EXPECT_EQ(run({"flow", "--input", in, "--output", path("o/f_%04d.flo"), "--bogus"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"nonsense"}).code, cli::kExitValidation);
  const Outcome conflict = run({"flow", "--input", in, "--output", path("o/f_%04d.flo"), "--layout", "gray",
                            "--provider", "spectral"});
  EXPECT_EQ(conflict.code, cli::kExitValidation);
  EXPECT_NE(conflict.err.find("validation error"), std::string::npos);
  EXPECT_EQ(run({"flow", "--input", in, "--output", path("o/f_%04d.flo"), "--alpha", "-1"}).code,
            cli::kExitValidation);
  const Outcome missing = run({"flow", "--input", path("nowhere/f_%04d.png"), "--output", path("o/f_%04d.flo")});
  EXPECT_EQ(missing.code, cli::kExitIo);
  EXPECT_NE(missing.err.find("io error"), std::string::npos);
}

TEST_F(CliTest, ConfigFileWithCommandLineOverride) {
  const std::string in = identical_frames();
  write_text(path("run.cfg"), "# solver\nlevels = 2\nmax_iterations = 7\nalpha = 12\n");
  const Outcome r = run({"flow", "--config", path("run.cfg"), "--input", in, "--output", path("out/f_%04d.flo"),
                     "--alpha", "20", "--layout", "gray"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string manifest = read_text(path("out/manifest_flow.txt"));
  EXPECT_NE(manifest.find("max_iterations = 7"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("alpha = 20"), std::string::npos);
  write_text(path("bad.cfg"), "no_such_key = 1\n");
  EXPECT_EQ(run({"flow", "--config", path("bad.cfg"), "--input", in, "--output", path("o/f_%04d.flo")}).code,
            cli::kExitValidation);
}

TEST_F(CliTest, PipelineEndToEnd) {
  SceneSpec s = occlusion_scene(2);
  s.frames = 6;
  s.occluders.clear();
  write_text(path("scene.txt"), format_scene_spec(s));
  ASSERT_EQ(run({"synth", "--spec", path("scene.txt"), "--out", path("scene")}).code, 0);
  EXPECT_TRUE(fs::exists(path("scene/fixations.csv")));
  const std::string frames = path("scene/frame_%04d.png");
  ASSERT_EQ(run({"saliency", "--input", frames}).code, 0);
  EXPECT_TRUE(fs::exists(path("scene/frame_0000_sal.png")));
  ASSERT_EQ(run({"complement", "--input", frames, "--output", path("comp/c_%04d.png")}).code, 0);
  const Outcome flow = run({"flow", "--input", frames, "--provider", "external", "--output", path("flow/f_%04d.flo"),
                        "--levels", "2", "--max-iterations", "40"});
  ASSERT_EQ(flow.code, 0) << flow.err;
  ASSERT_EQ(run({"dynsal", "--flow", path("flow/f_%04d.flo"), "--output", path("dyn/d_%04d.salf"), "--preview",
                 path("dyn/p_%04d.png")}).code,
            0);
  EXPECT_TRUE(fs::exists(path("dyn/p_0004.png")));
  const Outcome eval = run({"eval", "--model", "st=" + path("dyn/d_%04d.salf"), "--fixations",
                        path("scene/fixations.csv"), "--out", path("eval"), "--flow", path("flow/f_%04d.flo"),
                        "--truth", path("scene/truth_%04d.flo")});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const std::string summary = read_text(path("eval/summary.txt"));
  EXPECT_NE(summary.find("mean_auc"), std::string::npos) << summary;
  EXPECT_NE(summary.find("aae"), std::string::npos) << summary;
  const Outcome cond = run({"condstats", "--input", frames, "--layout", "gray", "--out", path("cond")});
  ASSERT_EQ(cond.code, 0) << cond.err;
  EXPECT_TRUE(fs::exists(path("cond/condstats.csv")));
}

TEST_F(CliTest, OutputsByteIdenticalAcrossRunsAndThreads) {
  const RenderedScene r = render(translation_scene(4));
  const std::string in = path("in/f_%04d.png");
  save_sequence(r.sequence, in);
  std::vector<std::string> digests;
  for (const char* threads : {"1", "3", "1"}) {
    fs::remove_all(path("out"));
    const Outcome f = run({"flow", "--input", in, "--output", path("out/f_%04d.flo"), "--levels", "2",
                       "--max-iterations", "30", "--threads", threads});
    ASSERT_EQ(f.code, 0) << f.err;
    std::string all;
    for (int t = 0; t < 5; ++t) all += read_text(format_index(path("out/f_%04d.flo"), t));
    all += read_text(path("out/convergence.csv"));
    digests.push_back(all);
  }
  EXPECT_EQ(digests[0], digests[1]);
  EXPECT_EQ(digests[0], digests[2]);
}

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(run({"--help"}).code, 0);
  const Outcome v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.out.empty());
}
