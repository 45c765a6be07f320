#include "vf/parallel.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <stdexcept>

#include "vf/fitting.hpp"
#include "vf/simulation.hpp"

namespace vf {
namespace {

TEST(ForEachIndex, VisitsEveryIndexOnce) {
  for (Execution ex : {Execution::serial, Execution::parallel}) {
    std::vector<int> hits(1000, 0);
    for_each_index(hits.size(), ex, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(ForEachIndex, ReportsLowestFailingIndex) {
  for (Execution ex : {Execution::serial, Execution::parallel}) {
    try {
      for_each_index(100, ex, [](std::size_t i) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected a throw";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "17");
    }
  }
}

TEST(WorkerThreads, HonoursEnvironment) {
  setenv("VF_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3);
  setenv("VF_THREADS", "zero", 1);
  EXPECT_GE(worker_threads(), 1);
  unsetenv("VF_THREADS");
}

TEST(SerialParallel, BernoulliProcessIdentical) {
  Hyperparams p{100, 0.4, 0.6, 0.5, 0.5, 1, 1};
  SimConfig cfg;
  cfg.seed = 5;
  auto atoms = sample_proposed_atoms(p, cfg);
  auto a = sample_bernoulli_process(atoms, {40, 30}, 9, Execution::serial);
  auto b = sample_bernoulli_process(atoms, {40, 30}, 9, Execution::parallel);
  for (int pop = 0; pop < 2; ++pop) {
    ASSERT_EQ(a.samples(pop).size(), b.samples(pop).size());
    for (std::size_t i = 0; i < a.samples(pop).size(); ++i) {
      const auto& x = a.samples(pop)[i].variants;
      const auto& y = b.samples(pop)[i].variants;
      ASSERT_EQ(x.size(), y.size());
      for (std::size_t j = 0; j < x.size(); ++j) EXPECT_EQ(a.registry()->label(x[j]), b.registry()->label(y[j]));
    }
  }
}

TEST(SerialParallel, ObjectiveIdentical) {
  Hyperparams phi{50, 0.4, 0.6, 0.5, 0.5, 1, 1};
  KtonTable obs(4);
  obs.at(1, 0) = 7;
  obs.at(0, 1) = 9;
  obs.at(2, 2) = 1;
  EXPECT_EQ(proposed_objective({6, 6}, {6, 6}, obs, phi, 4, {}, Execution::serial),
            proposed_objective({6, 6}, {6, 6}, obs, phi, 4, {}, Execution::parallel));
}

TEST(SerialParallel, KtonGridIdentical) {
  Hyperparams phi{3, 0.3, 0.7, 0.8, 0.4, 2, 1};
  auto a = kton_predictive_grid({5, 2}, {6, 4}, 4, phi, {}, Execution::serial);
  auto b = kton_predictive_grid({5, 2}, {6, 4}, 4, phi, {}, Execution::parallel);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].lambda, b[i].lambda);
    EXPECT_EQ(a[i].quad_error, b[i].quad_error);
  }
}

}  // namespace
}  // namespace vf
