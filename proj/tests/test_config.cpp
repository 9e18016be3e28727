// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

#include "majq/config.hpp"
#include "majq/fock_oracle.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace majq;

TEST(Config, MinimalValidDocuments)
{
    const ModelConfig a = parse_config_text(R"({"M":1, "t_entries":[[1,2,0.5]]})");
    EXPECT_EQ(a.modes, 1);
    ASSERT_EQ(a.t_entries.size(), 1u);
    EXPECT_EQ(a.t_entries[0].value, 0.5);

    const ModelConfig b = parse_config_text(R"({"M":2, "g_entries":[[1,2,3,4,1.0]]})");
    ASSERT_EQ(b.g_entries.size(), 1u);
    const HamiltonianSpec spec = model_from_config(b).spec;
    EXPECT_EQ(spec.g(0, 1, 2, 3), 1.0);
}

TEST(Config, RepeatedIndicesRejected)
{
    try {
        parse_config_text(R"({"M":1, "g_entries":[[1,2,2,1,1.0]]})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("g_entries[0]"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("repeated"), std::string::npos);
    }
    EXPECT_THROW(parse_config_text(R"({"M":1, "t_entries":[[1,1,0.5]]})"), ConfigError);
}

TEST(Config, NonCanonicalAndDuplicateEntriesRejected)
{
    EXPECT_THROW(parse_config_text(R"({"M":1, "t_entries":[[2,1,0.5]]})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":2, "g_entries":[[2,1,3,4,1.0]]})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":2, "t_entries":[[1,2,0.5],[1,2,0.1]]})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":2, "g_entries":[[1,2,3,4,1.0],[1,2,3,4,2.0]]})"), ConfigError);
}

TEST(Config, FieldValidation)
{
    EXPECT_THROW(parse_config_text(R"({"M":1, "t_entries":[[1,3,0.5]]})"), ConfigError);   // out of range
    EXPECT_THROW(parse_config_text(R"({"M":0})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"t_entries":[]})"), ConfigError);                  // no M
    EXPECT_THROW(parse_config_text(R"({"M":1, "colour":"red"})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":1, "t_entries":[[1,2]]})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":1, "t_entries":[[1,2,"x"]]})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":1, "seed":-3})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":1, "tolerances":{"nope":1e-3}})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":1, "tolerances":{"fpe":0}})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"([1,2])"), ConfigError);
}

TEST(Config, SyntaxErrorsCarryLineAndColumn)
{
    try {
        parse_config_text("{\n  \"M\": 1,\n  \"seed\" 3\n}");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Config, PresetExclusiveAndConsistent)
{
    const ModelConfig c = parse_config_text(R"({"preset":{"name":"hubbard","sites":2,"J":1,"U":2}})");
    EXPECT_EQ(c.modes, 4);
    ASSERT_TRUE(c.preset.has_value());
    EXPECT_THROW(parse_config_text(R"({"M":2,"preset":{"name":"hubbard","sites":1},"t_entries":[]})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"M":3,"preset":{"name":"hubbard","sites":1}})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"preset":{"name":"hubbard","sites":1,"geometry":"square"}})"), ConfigError);
    EXPECT_THROW(parse_config_text(R"({"preset":{"name":"ising","sites":1}})"), ConfigError);
}

TEST(Config, RoundTrip)
{
    const std::string text = R"({"M":2, "t_entries":[[1,2,0.1],[2,4,-0.30000000000000004]],
        "g_entries":[[1,2,3,4,0.7]], "seed": 99, "tolerances":{"fpe":2e-5}})";
    const ModelConfig a = parse_config_text(text);
    const ModelConfig b = parse_config(to_json(a));
    EXPECT_EQ(a, b);
    const ModelConfig p = parse_config_text(R"({"preset":{"name":"hubbard","sites":1,"J":0.5,"U":3}, "seed":4})");
    EXPECT_EQ(parse_config_text(to_json(p).dump()), p);
}

TEST(Config, LoadFromFile)
{
    const std::string path = ::testing::TempDir() + "majq_cfg.json";
    {
        std::ofstream out(path);
        out << R"({"M":2, "g_entries":[[1,2,3,4,1.0]]})";
    }
    EXPECT_EQ(load_config(path).modes, 2);
    std::remove(path.c_str());
    EXPECT_THROW(load_config(path), ConfigError);
}

TEST(HubbardPreset, SingleSite)
{
    const HubbardModel h = preset_hubbard(1, 0.7, 4.0);
    ASSERT_EQ(h.spec.g.entries().size(), 1u);
    EXPECT_EQ(h.spec.g.entries()[0].idx, (std::array<int, 4>{0, 1, 2, 3}));
    EXPECT_NEAR(h.spec.g.entries()[0].value, 4.0 / 48.0, 1e-15);
    EXPECT_NEAR(h.identity_shift, 1.0, 1e-15);
    EXPECT_NEAR(h.spec.t(0, 2), 0.5, 1e-15);
    EXPECT_NEAR(h.spec.t(1, 3), 0.5, 1e-15);
}

TEST(HubbardPreset, MatchesDirectConstruction)
{
    for (int sites = 1; sites <= 2; ++sites) {
        for (auto [j, u] : std::vector<std::pair<double, double>>{{1.0, 4.0}, {0.4, -1.5}, {1.0, 0.0}, {0.0, 0.0}}) {
            const HubbardModel h = preset_hubbard(sites, j, u);
            const MajoranaSet maj(2 * sites);
            const FockOperator built = build_hamiltonian(h.spec, maj);
            const oracle::Mat direct = oracle::fermi_hubbard(sites, j, u);
            EXPECT_LT((oracle::traceless(built) - oracle::traceless(direct)).cwiseAbs().maxCoeff(), 1e-12);
            const FockOperator id = FockOperator::Identity(maj.dim(), maj.dim());
            EXPECT_LT((built + h.identity_shift * id - direct).cwiseAbs().maxCoeff(), 1e-12);
            if (u == 0.0) {
                EXPECT_TRUE(h.spec.g.empty());
            }
            if (u == 0.0 && j == 0.0) {
                EXPECT_EQ(h.spec.t.packed().cwiseAbs().maxCoeff(), 0.0);
            }
        }
    }
}

TEST(HubbardPreset, Errors)
{
    EXPECT_THROW(preset_hubbard(1, 1.0, 1.0, "square"), ConfigError);
    EXPECT_THROW(preset_hubbard(0, 1.0, 1.0), ConfigError);
}
