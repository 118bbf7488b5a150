#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "config.hpp"
#include "toml.hpp"

namespace cli = halfmoll::cli;

TEST(Toml, ScalarsTablesAndArrays) {
  const auto doc = cli::parse_toml(R"(
experiment = "uniqueness"   # trailing comment
seed = 42
[grid]
spacing = 3.125e-2
horizon = 0.5
[mollifier]
eta = [0.2, 0.1, 5e-2,]
[a.b]
flag = true
'quoted key' = 'C:\raw'
escaped = "tab\there"
big = 1_000
neg = -inf
)");
  EXPECT_EQ(doc["experiment"], "uniqueness");
  EXPECT_EQ(doc["seed"].get<int>(), 42);
  EXPECT_TRUE(doc["seed"].is_number_integer());
  EXPECT_DOUBLE_EQ(doc["grid"]["spacing"].get<double>(), 0.03125);
  ASSERT_EQ(doc["mollifier"]["eta"].size(), 3u);
  EXPECT_DOUBLE_EQ(doc["mollifier"]["eta"][2].get<double>(), 0.05);
  EXPECT_TRUE(doc["a"]["b"]["flag"].get<bool>());
  EXPECT_EQ(doc["a"]["b"]["quoted key"], "C:\\raw");
  EXPECT_EQ(doc["a"]["b"]["escaped"], "tab\there");
  EXPECT_EQ(doc["a"]["b"]["big"].get<int>(), 1000);
  EXPECT_TRUE(std::isinf(doc["a"]["b"]["neg"].get<double>()));
}

TEST(Toml, ErrorsNameTheLine) {
  for (const std::string bad : {"x = ", "x = 1\nx = 2", "[grid\n", "x = \"open", "x = 1 2", "x = 0x1g"}) {
    try {
      (void)cli::parse_toml(bad);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const cli::ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("line "), std::string::npos);
    }
  }
}

TEST(Toml, ConfigOverlayAndValidation) {
  auto config = cli::defaults_for("uniqueness");
  cli::apply(config, cli::parse_toml("[grid]\nspacing = 0.0625\n[mollifier]\neta = [0.2, 0.1]\n"));
  EXPECT_EQ(config.grid.spacing, 0.0625);
  EXPECT_EQ(config.etas.size(), 2u);
  EXPECT_NO_THROW(cli::validate(config));

  EXPECT_THROW(cli::apply(config, cli::parse_toml("[grid]\nspacnig = 0.1\n")), cli::ConfigError);
  EXPECT_THROW(cli::apply(config, cli::parse_toml("experiment = \"solve\"\n")), cli::ConfigError);

  auto coarse = cli::defaults_for("converge-commutator");
  coarse.grid.spacing = 0.125;
  try {
    cli::validate(coarse);
    FAIL();
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("eta >= 2h"), std::string::npos);
  }
  auto exponents = cli::defaults_for("converge-commutator");
  exponents.beta = 1.5;
  EXPECT_THROW(cli::validate(exponents), cli::ConfigError);
  EXPECT_THROW((void)cli::defaults_for("nonsense"), cli::ConfigError);
  for (const auto& name : cli::kExperiments) EXPECT_NO_THROW(cli::validate(cli::defaults_for(name))) << name;
}
