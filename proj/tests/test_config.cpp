#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "smflow/checkpoint.hpp"
#include "smflow/config.hpp"
#include "smflow/experiments.hpp"

using namespace smflow;
using config::ExperimentConfig;
using spectral::cplx;
using spectral::FieldState;
using spectral::GridSpec;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c;
  EXPECT_EQ(c.metric, "sphere");
  EXPECT_DOUBLE_EQ(c.epsilon, 0.05);
  EXPECT_EQ(c.n, 4096);
  EXPECT_EQ(c.integrator, "IFRK4");
  EXPECT_EQ(c.convention, "balanced");
  EXPECT_EQ(c.tracked, 16);
}

TEST(Config, ParseCommentsAndWhitespace) {
  const auto c = config::parse_string(
      "# run\n"
      "experiment = final-state\n"
      "  metric=hyperbolic   # trailing\n"
      "\n"
      "dt = 5e-2\n"
      "n = 8192\n"
      "quick = true\n"
      "nu3 = 0.5, 0.3\n");
  EXPECT_EQ(c.experiment, "final-state");
  EXPECT_EQ(c.metric, "hyperbolic");
  EXPECT_DOUBLE_EQ(c.dt, 0.05);
  EXPECT_EQ(c.n, 8192);
  EXPECT_TRUE(c.quick);
  EXPECT_EQ(*config::parse_complex("nu3", c.nu3), config::cplx(0.5, 0.3));
  EXPECT_EQ(config::parse_complex("nu1", c.nu1), std::nullopt);
}

TEST(Config, RoundTrip) {
  auto c = config::parse_string("metric = exp-linear\nepsilon = 0.1234567890123\nseed = 77\nablate = v2,tail\n");
  const auto back = config::parse_string(config::serialize(c));
  EXPECT_TRUE(back == c);
  EXPECT_EQ(config::serialize(back), config::serialize(c));
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
  const auto msg = error_of([] { config::parse_string("metric = sphere\nfoo = 1\n"); });
  EXPECT_NE(msg.find("unknown key 'foo'"), std::string::npos) << msg;
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
}

TEST(Config, MalformedInput) {
  EXPECT_THROW(config::parse_string("dt = fast\n"), Error);
  EXPECT_THROW(config::parse_string("n = 1.5\n"), Error);
  EXPECT_THROW(config::parse_string("quick = maybe\n"), Error);
  EXPECT_THROW(config::parse_string("just a line\n"), Error);
  EXPECT_THROW(config::parse_string("dt = 1\ndt = 2\n"), Error);
  EXPECT_THROW(config::load("/nonexistent/cfg.txt"), Error);
  ExperimentConfig c;
  EXPECT_THROW(config::apply_assignment(c, "novalue"), Error);
  config::apply_assignment(c, " sigma0 = 2 ");
  EXPECT_DOUBLE_EQ(c.sigma0, 2.0);
  EXPECT_EQ(config::get_value(c, "sigma0"), "2");
}

TEST(Config, MinimalConfigGetsDefaults) {
  const auto c = config::parse_string("experiment = analyze-metric\n");
  const auto d = config::defaulted_keys(c);
  EXPECT_EQ(d.size() + 1, config::known_keys().size());
  EXPECT_EQ(std::find(d.begin(), d.end(), "experiment"), d.end());
  EXPECT_NE(std::find(d.begin(), d.end(), "metric"), d.end());
}

TEST(Config, ValidationRejectsBadValues) {
  auto bad = [](const std::string& text) {
    return error_of([&] { experiments::validate(config::parse_string(text)); });
  };
  EXPECT_NE(bad("metric = torus\n").find("torus"), std::string::npos);
  EXPECT_NE(bad("experiment = nope\n").find("experiment"), std::string::npos);
  EXPECT_NE(bad("n = 1000\n"), "");
  EXPECT_NE(bad("dt = -1\n").find("dt"), std::string::npos);
  EXPECT_NE(bad("sigma_min = 5\n").find("sigma_min"), std::string::npos);
  EXPECT_NE(bad("convention = other\n").find("convention"), std::string::npos);
  EXPECT_NE(bad("ablate = v5\n").find("v5"), std::string::npos);
  EXPECT_NE(bad("region = 0,1,2\n").find("region"), std::string::npos);
  EXPECT_NE(bad("integrator = Euler\n"), "");
  EXPECT_EQ(bad("metric = remark11:0.5,0,0,0.25\n"), "");
}

TEST(Checkpoint, RoundTripBitExact) {
  const GridSpec g{25.0, 256};
  FieldState s;
  s.t = 3.25;
  s.z.resize(g.n);
  for (int j = 0; j < g.n; ++j) s.z[j] = cplx(std::sin(0.1 * j) / 3.0, std::exp(-0.01 * j));
  const auto c = checkpoint::decode(checkpoint::encode(g, s));
  EXPECT_EQ(c.grid.n, g.n);
  EXPECT_EQ(c.grid.half_length, g.half_length);
  EXPECT_EQ(c.state.t, s.t);
  EXPECT_EQ(c.state.z, s.z);
}

TEST(Checkpoint, SinglePrecision) {
  const GridSpec g{25.0, 256};
  FieldState s{1.0, spectral::Field(g.n, cplx(1.0 / 3.0, -2.0 / 7.0))};
  const std::string buf = checkpoint::encode(g, s, checkpoint::Precision::Single);
  EXPECT_EQ(buf.size(), 8u + 4 + 4 + 8 + 8 + 8 + 8u * g.n);
  const auto c = checkpoint::decode(buf);
  EXPECT_EQ(c.precision, checkpoint::Precision::Single);
  EXPECT_NEAR(std::abs(c.state.z[7] - s.z[7]), 0.0, 1e-7);
}

TEST(Checkpoint, HeaderLayout) {
  const GridSpec g{25.0, 256};
  const std::string buf = checkpoint::encode(g, FieldState{2.0, spectral::Field(g.n)});
  EXPECT_EQ(buf.substr(0, 8), "SMFLCKPT");
  EXPECT_EQ(static_cast<unsigned char>(buf[8]), 1);   // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(buf[12]), 8);  // bytes per component
  EXPECT_EQ(static_cast<unsigned char>(buf[17]), 1);  // n = 256
  EXPECT_EQ(buf.size(), 40u + 16u * g.n);
}

TEST(Checkpoint, CorruptInputRejected) {
  const GridSpec g{25.0, 256};
  std::string buf = checkpoint::encode(g, FieldState{0.0, spectral::Field(g.n)});
  EXPECT_THROW(checkpoint::decode(buf.substr(0, buf.size() - 1)), Error);
  EXPECT_THROW(checkpoint::decode(buf.substr(0, 20)), Error);
  std::string bad = buf;
  bad[0] = 'X';
  EXPECT_THROW(checkpoint::decode(bad), Error);
  bad = buf;
  bad[8] = 2;
  EXPECT_THROW(checkpoint::decode(bad), Error);
  EXPECT_THROW(checkpoint::load("/nonexistent/x.ckpt"), Error);
  EXPECT_THROW(checkpoint::encode(g, FieldState{0.0, spectral::Field(10)}), Error);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "smflow_ckpt_test";
  std::filesystem::remove_all(dir);
  const GridSpec g{25.0, 256};
  FieldState s{1.5, spectral::Field(g.n, cplx(0.25, 0.5))};
  checkpoint::save(dir / "sub" / "a.ckpt", g, s);
  EXPECT_FALSE(std::filesystem::exists(dir / "sub" / "a.ckpt.tmp"));
  const auto c = checkpoint::load(dir / "sub" / "a.ckpt");
  EXPECT_EQ(c.state.z, s.z);
  std::filesystem::remove_all(dir);
}

TEST(Config, ExampleConfigsValidate) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SMFLOW_EXAMPLES_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    ++count;
    const auto c = config::load(entry.path().string());
    EXPECT_NO_THROW(experiments::validate(c)) << entry.path();
    EXPECT_TRUE(config::parse_string(config::serialize(c)) == c) << entry.path();
  }
  EXPECT_GE(count, 6);
}
