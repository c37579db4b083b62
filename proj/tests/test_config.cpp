#include <gtest/gtest.h>

#include "mflk/config.hpp"

using namespace mflk;

TEST(ConfigText, ParsesScalarsArraysAndComments) {
  const auto t = parse_config_text(
      "# header\n[run]\nseed = 11\nname = \"x y\"  # trailing\nflag = true\nms = [20, 40]\nlosses = [\"squared\"]\n");
  EXPECT_EQ(std::get<double>(t.at("seed")), 11.0);
  EXPECT_EQ(std::get<std::string>(t.at("name")), "x y");
  EXPECT_TRUE(std::get<bool>(t.at("flag")));
  EXPECT_EQ(std::get<std::vector<double>>(t.at("ms")), (std::vector<double>{20, 40}));
  EXPECT_EQ(std::get<std::vector<std::string>>(t.at("losses")), (std::vector<std::string>{"squared"}));
}

TEST(ConfigText, RejectsMalformedInput) {
  EXPECT_THROW(parse_config_text("a = 1\na = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("no equals sign\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("a = [1, 2\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("a = \n"), std::invalid_argument);
}

TEST(ConfigFile, MissingFileThrows) {
  EXPECT_THROW(load_config_file("/nonexistent/mflk.toml"), std::invalid_argument);
}

TEST(ExperimentConfig, DefaultsValidate) { EXPECT_NO_THROW(ExperimentConfig{}.validate()); }

TEST(ExperimentConfig, AppliesKnownKeysAndRejectsUnknown) {
  const auto cfg = config_from_table(parse_config_text("seed = 3\nloss = \"hinge\"\nm_schedule = [10, 20, 30]\nm0 = 20\n"));
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.loss, LossKind::Hinge);
  EXPECT_EQ(cfg.m_schedule, (std::vector<int>{10, 20, 30}));
  EXPECT_THROW(config_from_table(parse_config_text("sede = 3\n")), std::invalid_argument);
  EXPECT_THROW(config_from_table(parse_config_text("atoms = 2.5\n")), std::invalid_argument);
  EXPECT_THROW(config_from_table(parse_config_text("loss = \"cubic\"\n")), std::invalid_argument);
}

TEST(ExperimentConfig, ValidationRejectsBadSchedules) {
  ExperimentConfig c;
  c.m_schedule = {160};
  c.m0 = 160;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.m_schedule = {40, 20, 80, 160};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.m_schedule = {1, 20, 80, 160};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.m0 = 50;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ExperimentConfig, ValidationRejectsEmptyTraining) {
  ExperimentConfig c;
  c.n_train = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_grid = {0, 10};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ExperimentConfig, EchoParsesBackToTheSameConfig) {
  ExperimentConfig c;
  c.seed = 99;
  c.svm_losses = {LossKind::Hinge};
  c.lambda_grid = {1e-4, 0.5};
  std::string text;
  for (const auto& [k, v] : c.echo()) text += k + " = " + v + "\n";
  const auto back = config_from_table(parse_config_text(text));
  EXPECT_EQ(back.echo(), c.echo());
}
