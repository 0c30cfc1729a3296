// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "../support/gradcheck.hpp"
#include "../support/infonce_oracle.hpp"
#include "gkd/distill.hpp"
#include "gkd/error.hpp"
#include "gkd/ops.hpp"

using namespace gkd;
using namespace gkd::distill;
using ad::Tensor;

namespace {

DistillConfig cfg_with(double t, Denominator d, Similarity s = Similarity::kCosine) {
  DistillConfig c;
  c.temperature = t;
  c.denominator = d;
  c.similarity = s;
  return c;
}

testing::Rows random_rows(Rng& rng, std::size_t b, std::size_t d, double scale = 1.0) {
  testing::Rows r(b, std::vector<double>(d));
  for (auto& row : r)
    for (double& x : row) x = scale * rng.uniform(-2, 2);
  return r;
}

Tensor to_tensor(const testing::Rows& r) {
  std::vector<double> v;
  for (const auto& row : r) v.insert(v.end(), row.begin(), row.end());
  return Tensor::from({r.size(), r[0].size()}, std::move(v));
}

std::vector<std::vector<std::size_t>> grouped(const NegativePlan& plan) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t a = 0; a < plan.anchors.size(); ++a) {
    out.emplace_back(plan.negatives.begin() + static_cast<std::ptrdiff_t>(a * plan.per_anchor),
                     plan.negatives.begin() + static_cast<std::ptrdiff_t>((a + 1) * plan.per_anchor));
  }
  return out;
}

}  // namespace

TEST_CASE("hand-evaluated InfoNCE values") {
  SUBCASE("negatives only, sim_pos = 1, one negative at 0") {
    const Tensor a = Tensor::from({1, 2}, {1, 0});
    const Tensor p = Tensor::from({1, 2}, {3, 0});
    const Tensor n = Tensor::from({1, 2}, {0, 5});
    CHECK(infonce_layer(a, p, n, cfg_with(1.0, Denominator::kNegativesOnly)).item() == doctest::Approx(-1.0).epsilon(1e-15));
  }
  SUBCASE("with positive, all similarities equal") {
    const Tensor a = Tensor::from({1, 2}, {1, 1});
    const Tensor p = Tensor::from({1, 2}, {2, 2});
    const Tensor n = Tensor::from({1, 2}, {0.5, 0.5});
    CHECK(infonce_layer(a, p, n, cfg_with(0.5, Denominator::kWithPositive)).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("sample_negatives") {
  Rng rng(1);
  SUBCASE("a single-label batch yields nothing") {
    const std::vector<int> labels(6, 2);
    CHECK_FALSE(sample_negatives(labels, 0, 4, rng).has_value());
    const std::vector<std::uint64_t> nodes{0, 1, 2, 3, 4, 5};
    CHECK(plan_negatives(nodes, labels, 4, 0, 0, 0).anchors.empty());
  }
  SUBCASE("two classes draw only from the other class") {
    const std::vector<int> labels{0, 1, 0, 1, 1};
    const auto neg = sample_negatives(labels, 0, 4, rng);
    REQUIRE(neg.has_value());
    CHECK(neg->size() == 4);
    for (std::size_t j : *neg) CHECK(labels[j] == 1);
  }
  SUBCASE("draws are uniform over eligible positions") {
    const std::vector<int> labels{0, 1, 2, 1, 3, 0, 2};
    std::map<std::size_t, std::size_t> counts;
    const std::size_t draws = 100000;
    const auto neg = sample_negatives(labels, 0, draws, rng);
    for (std::size_t j : *neg) ++counts[j];
    CHECK(counts.size() == 5);
    for (auto [j, c] : counts) {
      CHECK(labels[j] != 0);
      CHECK(std::abs(static_cast<double>(c) / draws - 0.2) < 0.02 * 0.2);
    }
  }
  SUBCASE("plans are seeded by epoch, step and anchor node") {
    const std::vector<int> labels{0, 1, 0, 1, 2, 2};
    const std::vector<std::uint64_t> nodes{10, 11, 12, 13, 14, 15};
    const auto a = plan_negatives(nodes, labels, 8, 5, 3, 2);
    CHECK(a.negatives == plan_negatives(nodes, labels, 8, 5, 3, 2).negatives);
    CHECK(a.negatives != plan_negatives(nodes, labels, 8, 5, 4, 2).negatives);
    CHECK(a.negatives != plan_negatives(nodes, labels, 8, 5, 3, 1).negatives);
    CHECK(a.anchors.size() == 6);
    // An anchor's draws depend on its node id, not its batch position.
    Rng r(negative_seed(5, 3, 2, 12));
    const auto direct = sample_negatives(labels, 2, 8, r);
    CHECK(std::equal(direct->begin(), direct->end(), a.negatives.begin() + 16));
  }
}

TEST_CASE("vectorized loss equals the scalar oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t b = 4 + rng.index(12), d = 2 + rng.index(7), k = rng.index(3);
    std::vector<int> labels(b);
    for (int& y : labels) y = static_cast<int>(rng.index(3));
    std::vector<std::uint64_t> nodes(b);
    std::iota(nodes.begin(), nodes.end(), 100);
    const auto plan = plan_negatives(nodes, labels, 1 + rng.index(8), trial, 1, 2);
    if (plan.anchors.empty()) continue;
    std::vector<testing::Rows> s, t;
    std::vector<Tensor> st, tt;
    for (std::size_t l = 0; l <= k; ++l) {
      s.push_back(random_rows(rng, b, d));
      t.push_back(random_rows(rng, b, d));
      st.push_back(to_tensor(s.back()));
      tt.push_back(to_tensor(t.back()));
    }
    for (Denominator den : {Denominator::kNegativesOnly, Denominator::kWithPositive}) {
      for (Similarity sim : {Similarity::kCosine, Similarity::kDot}) {
        const auto cfg = cfg_with(0.2 + rng.uniform(), den, sim);
        LayerWeights w(k, GammaMode::kTrainableSoftmax);
        for (double& v : w.logits().tensor.mutable_data()) v = rng.uniform(-1, 1);
        const double got = distill_loss(st, tt, plan, w, cfg).total.item();
        const double want = testing::oracle_distill(s, t, plan.anchors, grouped(plan), w.values(), cfg);
        CHECK(std::abs(got - want) < 1e-6);
      }
    }
  }
}

TEST_CASE("cosine InfoNCE is invariant to a common rescaling") {
  Rng rng(5);
  const auto cfg = cfg_with(0.5, Denominator::kNegativesOnly);
  const auto a = random_rows(rng, 3, 6), p = random_rows(rng, 3, 6), n = random_rows(rng, 12, 6);
  const double base = infonce_layer(to_tensor(a), to_tensor(p), to_tensor(n), cfg).item();
  for (double c : {0.01, 0.7, 3.0, 250.0}) {
    const double scaled = infonce_layer(ad::scale(to_tensor(a), c), ad::scale(to_tensor(p), c),
                                        ad::scale(to_tensor(n), c), cfg)
                              .item();
    CHECK(std::abs(scaled - base) < 1e-9);
  }
}

TEST_CASE("InfoNCE is monotone in the positive and negative similarities") {
  // Anchor fixed at e_0; move the positive or one negative along a circle.
  auto loss = [](double pos_angle, double neg_angle, Denominator den) {
    const Tensor a = Tensor::from({1, 2}, {1, 0});
    const Tensor p = Tensor::from({1, 2}, {std::cos(pos_angle), std::sin(pos_angle)});
    const Tensor n = Tensor::from({2, 2}, {std::cos(neg_angle), std::sin(neg_angle), 0.0, 1.0});
    return infonce_layer(a, p, n, cfg_with(0.5, den)).item();
  };
  for (Denominator den : {Denominator::kNegativesOnly, Denominator::kWithPositive}) {
    double prev = loss(0.0, 1.0, den);
    for (double ang = 0.2; ang < 3.0; ang += 0.2) {
      const double cur = loss(ang, 1.0, den);
      CHECK(cur > prev);  // lower positive similarity
      prev = cur;
    }
    prev = loss(0.5, 3.0, den);
    for (double ang = 2.8; ang > 0.0; ang -= 0.2) {
      const double cur = loss(0.5, ang, den);
      CHECK(cur > prev);  // higher negative similarity
      prev = cur;
    }
    // sim_pos = 1 is the minimizer over positive directions
    const double at_teacher = loss(0.0, 1.0, den);
    for (double ang = -3.0; ang <= 3.0; ang += 0.1) {
      if (std::abs(ang) > 1e-9) CHECK(loss(ang, 1.0, den) > at_teacher);
    }
  }
}

TEST_CASE("layer weights") {
  SUBCASE("trainable softmax stays on the simplex") {
    LayerWeights w(3, GammaMode::kTrainableSoftmax);
    CHECK(w.values() == std::vector<double>(4, 0.25));
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      for (double& v : w.logits().tensor.mutable_data()) v = rng.uniform(-30, 30);
      const auto g = w.values();
      CHECK(std::abs(std::accumulate(g.begin(), g.end(), 0.0) - 1.0) < 1e-12);
      for (double x : g) CHECK(x > 0.0);
    }
    CHECK(w.parameters().size() == 1);
  }
  SUBCASE("fixed uniform") {
    LayerWeights w(2, GammaMode::kFixedUniform);
    for (double x : w.values()) CHECK(x == 1.0 / 3.0);
    CHECK(w.parameters().empty());
  }
  SUBCASE("k = 0 has gamma 1") {
    LayerWeights w(0, GammaMode::kTrainableSoftmax);
    CHECK(w.values() == std::vector<double>{1.0});
  }
}

TEST_CASE("distill_loss per-hop structure") {
  Rng rng(8);
  const std::size_t b = 8, d = 4;
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 1};
  std::vector<std::uint64_t> nodes(b);
  std::iota(nodes.begin(), nodes.end(), 0);
  const auto plan = plan_negatives(nodes, labels, 3, 1, 0, 0);
  std::vector<Tensor> s, t;
  for (int l = 0; l < 3; ++l) {
    s.push_back(to_tensor(random_rows(rng, b, d)));
    t.push_back(to_tensor(random_rows(rng, b, d)));
  }
  const auto cfg = cfg_with(0.5, Denominator::kNegativesOnly);
  LayerWeights w(2, GammaMode::kFixedUniform);
  const auto base = distill_loss(s, t, plan, w, cfg);
  REQUIRE(base.per_layer.size() == 3);
  CHECK(base.total.item() == doctest::Approx((base.per_layer[0] + base.per_layer[1] + base.per_layer[2]) / 3.0));

  SUBCASE("perturbing hop 1 changes only the hop-1 term") {
    auto s2 = s;
    s2[1] = to_tensor(random_rows(rng, b, d));
    const auto moved = distill_loss(s2, t, plan, w, cfg);
    CHECK(moved.per_layer[0] == base.per_layer[0]);
    CHECK(moved.per_layer[1] != base.per_layer[1]);
    CHECK(moved.per_layer[2] == base.per_layer[2]);
  }
  SUBCASE("k = 0 equals the single layer loss") {
    LayerWeights w0(0, GammaMode::kTrainableSoftmax);
    const auto r = distill_loss({s[0]}, {t[0]}, plan, w0, cfg);
    CHECK(r.total.item() == doctest::Approx(r.per_layer[0]).epsilon(1e-15));
  }
  SUBCASE("last-only uses hop k with weight one") {
    auto c = cfg;
    c.hops = HopSelection::kLastOnly;
    LayerWeights wl(2, GammaMode::kTrainableSoftmax);
    const auto r = distill_loss({Tensor(), Tensor(), s[2]}, {Tensor(), Tensor(), t[2]}, plan, wl, c);
    CHECK(r.hops == std::vector<std::size_t>{2});
    CHECK(r.total.item() == base.per_layer[2]);
    CHECK(selected_hops(2, HopSelection::kLastOnly) == std::vector<std::size_t>{2});
  }
  SUBCASE("no anchors gives a constant zero") {
    NegativePlan empty;
    empty.per_anchor = 3;
    const auto r = distill_loss(s, t, empty, w, cfg);
    CHECK(r.total.item() == 0.0);
    CHECK(r.per_layer == std::vector<double>{0.0, 0.0, 0.0});
  }
}

TEST_CASE("distill_loss gradients pass finite differences") {
  Rng rng(21);
  const std::size_t b = 6, d = 5;
  const std::vector<int> labels{0, 1, 0, 1, 2, 2};
  std::vector<std::uint64_t> nodes(b);
  std::iota(nodes.begin(), nodes.end(), 0);
  const auto plan = plan_negatives(nodes, labels, 4, 2, 0, 0);
  for (Denominator den : {Denominator::kNegativesOnly, Denominator::kWithPositive}) {
    for (Similarity sim : {Similarity::kCosine, Similarity::kDot}) {
      std::vector<Tensor> s, t, leaves;
      for (int l = 0; l < 2; ++l) {
        s.push_back(to_tensor(random_rows(rng, b, d, 0.5)).set_requires_grad(true));
        t.push_back(to_tensor(random_rows(rng, b, d, 0.5)).set_requires_grad(true));
        leaves.push_back(s.back());
        leaves.push_back(t.back());
      }
      LayerWeights w(1, GammaMode::kTrainableSoftmax);
      w.logits().tensor.mutable_data()[0] = 0.3;
      leaves.push_back(w.logits().tensor);
      const auto cfg = cfg_with(0.5, den, sim);
      const auto r = testing::grad_check([&] { return distill_loss(s, t, plan, w, cfg).total; }, leaves);
      INFO(r.worst);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("config validation") {
  DistillConfig c;
  c.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.temperature = 0.5;
  c.negatives = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(parse_denominator("with_positive") == Denominator::kWithPositive);
  CHECK_THROWS_AS(parse_gamma_mode("learned"), ValidationError);
}
