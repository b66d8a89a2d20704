#include <gtest/gtest.h>

#include "thermiq/config.hpp"
#include "thermiq/error.hpp"

using namespace thermiq;

TEST(Config, SectionsPrefixKeysAndCommentsAreStripped) {
    const auto c = Config::parse("top = 1  # note\n[power]\nc_dyn = 2.5\n\n# full line\n[sim]\nepoch_ms=1\n", "t.cfg");
    EXPECT_EQ(c.get_string("top", ""), "1");
    EXPECT_DOUBLE_EQ(c.get_double("power.c_dyn", 0), 2.5);
    EXPECT_EQ(c.get_int("sim.epoch_ms", 0), 1);
    EXPECT_EQ(c.entries().size(), 3u);
}

TEST(Config, DuplicateKeyReportsLine) {
    try {
        Config::parse("[a]\nx = 1\nx = 2\n", "dup.cfg");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("dup.cfg:3"), std::string::npos);
    }
}

TEST(Config, MalformedLines) {
    EXPECT_THROW(Config::parse("[a\n"), ParseError);
    EXPECT_THROW(Config::parse("[]\n"), ParseError);
    EXPECT_THROW(Config::parse("just words\n"), ParseError);
    EXPECT_THROW(Config::parse(" = 3\n"), ParseError);
}

TEST(Config, TypedGettersFallBackAndNameTheLine) {
    const auto c = Config::parse("a = 3\nb = yes\nc = off\nbad = x1\n", "g.cfg");
    EXPECT_EQ(c.get_int("missing", 7), 7);
    EXPECT_TRUE(c.get_bool("b", false));
    EXPECT_FALSE(c.get_bool("c", true));
    try {
        c.get_double("bad", 0);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("g.cfg:4"), std::string::npos);
    }
}

TEST(Config, PathsResolveAgainstBaseDir) {
    const auto c = Config::parse("w = x.wl\nabs = /tmp/y.wl\n", "p.cfg", "/data/cfg");
    EXPECT_EQ(*c.get_path("w"), std::filesystem::path("/data/cfg/x.wl"));
    EXPECT_EQ(*c.get_path("abs"), std::filesystem::path("/tmp/y.wl"));
    EXPECT_FALSE(c.get_path("none").has_value());
}

TEST(Config, SerializeRoundTrips) {
    auto c = Config::parse("z = 1\n[b]\nk = v\n[a]\nq = 2\n");
    c.set("a.new", "3");
    c.erase("z");
    const auto again = Config::parse(c.serialize());
    EXPECT_EQ(again.serialize(), c.serialize());
    EXPECT_FALSE(again.has("z"));
    EXPECT_EQ(again.get_string("a.new", ""), "3");
    EXPECT_EQ(again.get_string("b.k", ""), "v");
}
