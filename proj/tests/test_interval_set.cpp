#include "doctest.h"

#include <random>
#include <set>

#include "ergolab/interval_set.hpp"

using namespace ergolab;

namespace {

IntervalSet random_set(std::mt19937_64& rng, int span, int max_runs) {
  std::uniform_int_distribution<int> val(-span, span);
  std::uniform_int_distribution<int> nr(0, max_runs);
  std::vector<Run> rs;
  int n = nr(rng);
  for (int i = 0; i < n; ++i) {
    int a = val(rng), b = a + std::uniform_int_distribution<int>(0, 6)(rng);
    rs.push_back({a, b});
  }
  return IntervalSet::from_runs(std::move(rs));
}

std::set<long long> dense(const IntervalSet& s) {
  std::set<long long> out;
  for (auto& v : s.elements()) out.insert(v.convert_to<long long>());
  return out;
}

}  // namespace

TEST_CASE("normalization merges adjacent and overlapping runs") {
  auto s = IntervalSet::from_runs({{5, 9}, {0, 3}, {4, 4}, {12, 12}});
  CHECK(s.run_count() == 2);
  CHECK(s.runs()[0] == Run{0, 9});
  CHECK(s.cardinality() == 11);
  CHECK(s.contains(4));
  CHECK(!s.contains(10));
  CHECK(s.max_internal_gap() == 2);
}

TEST_CASE("set algebra agrees with dense reference on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_set(rng, 40, 6), b = random_set(rng, 40, 6);
    auto da = dense(a), db = dense(b);

    std::set<long long> u = da, inter, diff;
    u.insert(db.begin(), db.end());
    for (auto v : da) {
      if (db.count(v)) inter.insert(v); else diff.insert(v);
    }
    CHECK(dense(a.unite(b)) == u);
    CHECK(dense(a.intersect(b)) == inter);
    CHECK(dense(a.difference(b)) == diff);
    CHECK(a.intersection_size(b) == Int(inter.size()));
    CHECK(a.symdiff_size(b) == Int(da.size() + db.size() - 2 * inter.size()));

    std::set<long long> mink;
    for (auto x : da)
      for (auto y : db) mink.insert(x + y);
    CHECK(dense(a.minkowski_sum(b)) == mink);
  }
}

TEST_CASE("minkowski sum stays exact with a long-run collapse") {
  // progression with gaps 16, summed with a long interval: single run
  std::vector<Run> prog;
  for (int k = 0; k < 50; ++k) prog.push_back({32 * k, 32 * k + 15});
  auto p = IntervalSet::from_runs(std::move(prog));
  auto block = IntervalSet::interval(-100, 0);
  auto s = p.minkowski_sum(block);
  CHECK(s.run_count() == 1);
  CHECK(s.min() == -100);
  CHECK(s.max() == 32 * 49 + 15);
}

TEST_CASE("negate and translate") {
  auto s = IntervalSet::from_runs({{0, 2}, {5, 5}});
  CHECK(s.negate().to_text() == "-5 -2..0");
  CHECK(s.translate(10).to_text() == "10..12 15");
  CHECK(s.negate().negate() == s);
}

TEST_CASE("text round-trip is exact, including big values") {
  Int big = Int("123456789012345678901234567890");
  auto s = IntervalSet::from_runs({{-big, -big + 5}, {0, 0}, {big, big * 2}});
  CHECK(IntervalSet::parse(s.to_text()) == s);
  std::mt19937_64 rng(99);
  for (int t = 0; t < 50; ++t) {
    auto r = random_set(rng, 1000, 8);
    CHECK(IntervalSet::parse(r.to_text()) == r);
  }
}

TEST_CASE("huge cardinalities do not overflow") {
  Int p = pow(Int(16), 80);
  auto s = IntervalSet::interval(0, p - 1);
  CHECK(s.cardinality() == p);
  auto shifted = s.translate(7);
  CHECK(s.symdiff_size(shifted) == 14);
}
