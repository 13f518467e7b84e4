#include <doctest.h>

#include "ltot/rng.hpp"
#include "ltot/tree.hpp"

using namespace ltot;

TEST_CASE("add_child links, increments depth, and validates inputs") {
  Tree t;
  const NodeId root = t.add_root("r", 0.5, 1.0);
  CHECK(root == 0);

  const NodeId child = t.add_child(root, "a", 0.4, 0.9, Origin::kMainline);
  CHECK(child == 1);
  CHECK(t.node(child).depth == 1);
  CHECK(t.node(child).parent == root);

  // Depth arithmetic down a chain.
  NodeId cur = child;
  for (int i = 0; i < 3; ++i) cur = t.add_child(cur, "x", 0.1, 0.8, Origin::kLateral);
  CHECK(t.node(cur).depth == 4);

  CHECK_THROWS_AS(t.add_child(999, "bad", 0.1, 0.5, Origin::kMainline),
                  std::invalid_argument);
  CHECK_THROWS_AS(t.add_child(root, "bad", 0.1, 1.2, Origin::kMainline),
                  std::invalid_argument);
}

TEST_CASE("origins are immutable and ids are creation-ordered") {
  Tree t;
  const NodeId root = t.add_root("r", 0.5, 1.0);
  const NodeId a = t.add_child(root, "a", 0.4, 0.9, Origin::kLateral);
  CHECK(t.node(a).origin == Origin::kLateral);
  CHECK(a > root);
  const NodeId b = t.add_child(root, "b", 0.4, 0.9, Origin::kMainline);
  CHECK(b == a + 1);
}

TEST_CASE("partition_children follows the v-then-c gate") {
  PromotionBar bar;
  bar.value = 0.8;
  bar.delta = 0.05;

  SUBCASE("clears the bar") {
    std::vector<ChildScore> kids{{0.9, 0.1}};
    const auto p = partition_children(kids, bar, 0.7);
    CHECK(p.mainline.size() == 1);
    CHECK(p.lateral.empty());
    CHECK(p.discard.empty());
  }
  SUBCASE("low v, high c goes lateral") {
    std::vector<ChildScore> kids{{0.2, 0.9}};
    const auto p = partition_children(kids, bar, 0.7);
    CHECK(p.lateral.size() == 1);
  }
  SUBCASE("fails both gates") {
    std::vector<ChildScore> kids{{0.2, 0.3}};
    const auto p = partition_children(kids, bar, 0.7);
    CHECK(p.discard.size() == 1);
  }
}

TEST_CASE("partition is exhaustive and disjoint on random inputs") {
  const rng::Stream s = rng::Stream::of(3, rng::kDomainSim);
  PromotionBar bar;
  bar.value = 0.6;
  bar.delta = 0.1;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng::bits(s, trial) % 20;
    std::vector<ChildScore> kids;
    for (std::size_t i = 0; i < n; ++i)
      kids.push_back({rng::uniform(s, 100 * trial + i, 0),
                      rng::uniform(s, 100 * trial + i, 1)});
    const auto p = partition_children(kids, bar, 0.7);
    CHECK(p.mainline.size() + p.lateral.size() + p.discard.size() == n);
    std::vector<bool> seen(n, false);
    for (auto idx : p.mainline) seen[idx] = !seen[idx];
    for (auto idx : p.lateral) seen[idx] = !seen[idx];
    for (auto idx : p.discard) seen[idx] = !seen[idx];
    for (std::size_t i = 0; i < n; ++i) CHECK(seen[i]);
  }
}

TEST_CASE("promotion bar updates") {
  SUBCASE("best-so-far is monotone") {
    PromotionBar bar;
    bar.value = 0.5;
    bar.update(std::vector<double>{0.7});
    CHECK(bar.value == doctest::Approx(0.7));
    bar.update(std::vector<double>{0.6});
    CHECK(bar.value == doctest::Approx(0.7));
    bar.update(std::vector<double>{});  // no-op
    CHECK(bar.value == doctest::Approx(0.7));
  }
  SUBCASE("top-k mean tracks the k best values seen") {
    PromotionBar bar;
    bar.mode = BarMode::kTopKMean;
    bar.k_bar = 2;
    bar.update(std::vector<double>{0.9, 0.7, 0.5});
    CHECK(bar.value == doctest::Approx(0.8));
    bar.update(std::vector<double>{0.95});
    CHECK(bar.value == doctest::Approx((0.95 + 0.9) / 2));
  }
}

TEST_CASE("ledger: spent equals the category sum and the cap binds") {
  BudgetLedger ledger(10);
  ledger.charge(Charge::kMainline, 3);
  ledger.charge(Charge::kLateralFull, 4);
  ledger.charge(Charge::kConfirm);
  CHECK(ledger.spent() == 8);
  CHECK(ledger.category(Charge::kMainline) == 3);
  CHECK(ledger.category(Charge::kLateralFull) == 4);
  CHECK(ledger.category(Charge::kLateralMicro) == 0);
  CHECK(ledger.remaining() == 2);
  CHECK(ledger.can_spend(2));
  CHECK(!ledger.can_spend(3));
  CHECK_THROWS_AS(ledger.charge(Charge::kMainline, 3), std::logic_error);
}

TEST_CASE("payload and consistency paths run root to leaf") {
  Tree t;
  const NodeId root = t.add_root("r", 0.5, 0.9);
  const NodeId a = t.add_child(root, "a", 0.4, 0.8, Origin::kMainline);
  const NodeId b = t.add_child(a, "b", 0.3, 0.7, Origin::kLateral);
  const auto path = t.payload_path(b);
  REQUIRE(path.size() == 3);
  CHECK(path[0] == "r");
  CHECK(path[2] == "b");
  const auto cs = t.c_local_path(b);
  CHECK(cs == std::vector<double>{0.9, 0.8, 0.7});
}
