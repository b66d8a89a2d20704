#include <gtest/gtest.h>

#include "thermiq/error.hpp"
#include "thermiq/workload.hpp"

using namespace thermiq;

TEST(Workload, ParsesAppsPhasesAndTasks) {
    const auto w = parse_workload(
        "# mix\napp a\nphase 1e6 1.2 5 0.7 0.9\nphase 2e6 1.0 0 1 1\napp b\nphase 10 1 1 1 1\n"
        "task a x3 at=2.5 channels=0,2\ntask b\n");
    ASSERT_EQ(w.apps.size(), 2u);
    EXPECT_DOUBLE_EQ(w.app("a").total_instructions(), 3e6);
    EXPECT_DOUBLE_EQ(w.apps[0].phases[0].cpi_base, 1.2);
    ASSERT_EQ(w.tasks.size(), 4u);
    EXPECT_DOUBLE_EQ(w.tasks[2].arrival, 2.5e-3);
    EXPECT_EQ(w.tasks[0].channels, (std::vector<int>{0, 2}));
    EXPECT_TRUE(w.tasks[3].channels.empty());
    EXPECT_DOUBLE_EQ(w.tasks[3].arrival, 0.0);
}

TEST(Workload, RejectsBadInput) {
    EXPECT_THROW(parse_workload("phase 1 1 1 1 1\n"), ParseError);
    EXPECT_THROW(parse_workload("app a\nphase 1 1 1\n"), ParseError);
    EXPECT_THROW(parse_workload("app a\nphase 1 1 0 1.5 1\n"), ParseError);
    EXPECT_THROW(parse_workload("app a\nphase 1 1 0 1 1\ntask b\n"), ParseError);
    EXPECT_THROW(parse_workload("app a\nphase 1 1 0 1 1\ntask a x0\n"), ParseError);
    EXPECT_THROW(parse_workload("app a\nphase 1 1 0 1 1\ntask a speed=2\n"), ParseError);
    EXPECT_THROW(parse_workload("app a\n"), ParseError);
    EXPECT_THROW(parse_workload("frobnicate\n"), ParseError);
}

TEST(Workload, SerializeRoundTrips) {
    const auto w = parse_workload("app a\nphase 1e6 1.2 5 0.7 0.9\ntask a x2 at=1 channels=1\n");
    const auto again = parse_workload(serialize_workload(w));
    EXPECT_EQ(serialize_workload(again), serialize_workload(w));
    EXPECT_EQ(again.tasks.size(), 2u);
    EXPECT_DOUBLE_EQ(again.tasks[1].arrival, 1e-3);
}
