#include <doctest.h>

#include <cmath>

#include "condaudio/conditions.hpp"
#include "condaudio/errors.hpp"
#include "condaudio/rng.hpp"

using namespace condaudio;
using namespace condaudio::conditions;

namespace {

TimestampGrid random_grid(Rng& rng, std::size_t d, std::size_t l, double frame_rate = 100.0) {
  TimestampGrid g;
  g.frame_rate = frame_rate;
  g.grid = Mat(d, l);
  for (double& v : g.grid.raw()) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
  return g;
}

}  // namespace

TEST_CASE("events_to_grid places a dog event on frames 100..199") {
  const EventSet set({"dog", "speech"});
  const auto grid = events_to_grid({{"dog", 1.0, 2.0}}, set, 100.0, 1000);
  for (std::size_t l = 0; l < 1000; ++l) {
    CHECK(grid.grid(0, l) == (l >= 100 && l <= 199 ? 1.0 : 0.0));
    CHECK(grid.grid(1, l) == 0.0);
  }
}

TEST_CASE("events_to_grid edge cases") {
  const EventSet set({"dog"});
  const auto empty = events_to_grid({}, set, 100.0, 50);
  for (double v : empty.grid.raw()) CHECK(v == 0.0);

  CHECK_THROWS_AS(events_to_grid({{"cat", 0.0, 1.0}}, set, 100.0, 200), DataError);
  CHECK_THROWS_WITH(events_to_grid({{"cat", 0.0, 1.0}}, set, 100.0, 200),
                    "unknown event class: cat");
  CHECK_THROWS_AS(events_to_grid({{"dog", 1.0, 1.0}}, set, 100.0, 200), DataError);
  CHECK_THROWS_AS(events_to_grid({{"dog", -0.5, 1.0}}, set, 100.0, 200), DataError);
}

TEST_CASE("overlapping same-class events merge") {
  const EventSet set({"speech"});
  const auto grid =
      events_to_grid({{"speech", 0.0, 2.0}, {"speech", 1.0, 3.0}}, set, 100.0, 1000);
  // brute-force membership oracle
  for (std::size_t l = 0; l < 1000; ++l) {
    const double t = double(l) / 100.0;
    const bool inside = (t >= 0.0 && t < 2.0) || (t >= 1.0 && t < 3.0);
    CHECK(grid.grid(0, l) == (inside ? 1.0 : 0.0));
  }
  const auto events = grid_to_events(grid, set);
  REQUIRE(events.size() == 1);
  CHECK(events[0].onset == doctest::Approx(0.0));
  CHECK(events[0].offset == doctest::Approx(3.0));
}

TEST_CASE("grid_to_events inverts events_to_grid") {
  const EventSet set({"dog"});
  TimestampGrid g;
  g.frame_rate = 100.0;
  g.grid = Mat(1, 1000);
  for (std::size_t l = 100; l <= 199; ++l) g.grid(0, l) = 1.0;
  const auto events = grid_to_events(g, set);
  REQUIRE(events.size() == 1);
  CHECK(events[0].klass == "dog");
  CHECK(events[0].onset == doctest::Approx(1.0));
  CHECK(events[0].offset == doctest::Approx(2.0));

  const auto none = grid_to_events({Mat(1, 100), 100.0}, set);
  CHECK(none.empty());
}

TEST_CASE("grid -> events -> grid is the identity on random grids") {
  Rng rng(5);
  const EventSet set({"a", "b", "c"});
  for (int trial = 0; trial < 20; ++trial) {
    const auto grid = random_grid(rng, 3, 64);
    const auto events = grid_to_events(grid, set);
    const auto back = events_to_grid(events, set, grid.frame_rate, 64);
    CHECK(max_abs_diff(back.grid, grid.grid) == 0.0);
  }
}

TEST_CASE("embed_labels") {
  const EventSet set({"dog", "cat", "bird"});
  PseudoEmbeddingProvider provider(4);

  SUBCASE("identity projection returns provider rows") {
    Mat eye(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
    const auto label = embed_labels(set, provider, eye);
    for (std::size_t d = 0; d < 3; ++d) {
      const auto v = provider.embed(set.name(d));
      for (std::size_t e = 0; e < 4; ++e)
        CHECK(label.matrix(d, e) == doctest::Approx(v[e]).epsilon(1e-12));
    }
  }

  SUBCASE("zero projection gives a zero matrix") {
    const auto label = embed_labels(set, provider, Mat(4, 5));
    for (double v : label.matrix.raw()) CHECK(v == 0.0);
  }

  SUBCASE("random projection matches the loop oracle") {
    Rng rng(9);
    Mat proj(4, 5);
    for (double& v : proj.raw()) v = rng.normal();
    const auto label = embed_labels(set, provider, proj);
    for (std::size_t d = 0; d < 3; ++d) {
      const auto v = provider.embed(set.name(d));
      for (std::size_t h = 0; h < 5; ++h) {
        double acc = 0.0;
        for (std::size_t e = 0; e < 4; ++e) acc += v[e] * proj(e, h);
        CHECK(label.matrix(d, h) == doctest::Approx(acc).epsilon(1e-6));
      }
    }
  }

  SUBCASE("wrong projection rows are rejected") {
    CHECK_THROWS_AS(embed_labels(set, provider, Mat(3, 5)), std::invalid_argument);
  }
}

TEST_CASE("pseudo provider is deterministic and unit-norm") {
  PseudoEmbeddingProvider provider(64);
  const auto a = provider.embed("dog");
  const auto b = provider.embed("dog");
  CHECK(a == b);
  double norm = 0.0;
  for (double v : a) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(provider.embed("cat") != a);
}

TEST_CASE("class_object worked example and edge cases") {
  // label = [[1,2],[3,4]], grid = [[1,0,1],[1,1,0]] -> object [[4,6],[3,4],[1,2]]
  LabelEmbedding label{Mat::from_rows({{1, 2}, {3, 4}})};
  TimestampGrid grid{Mat::from_rows({{1, 0, 1}, {1, 1, 0}}), 100.0};
  const auto object = class_object(label, grid);
  CHECK(object.matrix == Mat::from_rows({{4, 6}, {3, 4}, {1, 2}}));

  const auto zero = class_object(label, {Mat(2, 3), 100.0});
  for (double v : zero.matrix.raw()) CHECK(v == 0.0);

  LabelEmbedding single{Mat::from_rows({{2.5, -1.0}})};
  TimestampGrid ones{Mat(1, 4, 1.0), 100.0};
  const auto rows = class_object(single, ones);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(rows.matrix(l, 0) == 2.5);
    CHECK(rows.matrix(l, 1) == -1.0);
  }

  CHECK_THROWS_AS(class_object(label, {Mat(3, 3), 100.0}), std::invalid_argument);
}

TEST_CASE("class_object is bilinear and permutation invariant") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 1 + rng.below(4), l = 1 + rng.below(16), h = 1 + rng.below(6);
    Mat label_a(d, h), label_b(d, h);
    for (double& v : label_a.raw()) v = rng.normal();
    for (double& v : label_b.raw()) v = rng.normal();
    auto grid = random_grid(rng, d, l);

    // additivity in the label argument
    Mat label_sum = label_a;
    for (std::size_t i = 0; i < label_sum.size(); ++i) label_sum.raw()[i] += label_b.raw()[i];
    const auto sum_obj = class_object({label_sum}, grid);
    auto a_obj = class_object({label_a}, grid);
    const auto b_obj = class_object({label_b}, grid);
    for (std::size_t i = 0; i < a_obj.matrix.size(); ++i)
      a_obj.matrix.raw()[i] += b_obj.matrix.raw()[i];
    CHECK(max_abs_diff(sum_obj.matrix, a_obj.matrix) < 1e-6);

    // reversing class order with matching label rows leaves the object fixed
    Mat label_rev(d, h);
    Mat grid_rev(d, l);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < h; ++j) label_rev(i, j) = label_a(d - 1 - i, j);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < l; ++j) grid_rev(i, j) = grid.grid(d - 1 - i, j);
    const auto obj = class_object({label_a}, grid);
    const auto obj_rev = class_object({label_rev}, {grid_rev, grid.frame_rate});
    CHECK(max_abs_diff(obj.matrix, obj_rev.matrix) < 1e-6);
  }
}

TEST_CASE("standardize") {
  SUBCASE("class object passes through") {
    ClassObject obj{Mat::from_rows({{1, 2}, {3, 4}})};
    CHECK(standardize(obj, 2) == obj.matrix);
    CHECK_THROWS_AS(standardize(obj, 3), DataError);
  }

  SUBCASE("quantized contour indexes the bin table") {
    Rng rng(33);
    Mat table(8, 5);
    for (double& v : table.raw()) v = rng.normal();
    dsp::QuantizedContour q;
    q.n_bins = 8;
    q.v_min = 1.0f;
    q.v_max = 100.0f;
    q.frame_rate = 100.0;
    for (int i = 0; i < 12; ++i) q.indices.push_back(int(rng.below(8)));

    const auto lifted = standardize(q, table, 12);
    for (std::size_t l = 0; l < 12; ++l)
      for (std::size_t h = 0; h < 5; ++h)
        CHECK(lifted(l, h) == table(std::size_t(q.indices[l]), h));

    // identical bins produce identical rows
    dsp::QuantizedContour zeros = q;
    zeros.indices.assign(12, 0);
    const auto z = standardize(zeros, table, 12);
    for (std::size_t l = 0; l < 12; ++l)
      for (std::size_t h = 0; h < 5; ++h) CHECK(z(l, h) == table(0, h));

    CHECK_THROWS_AS(standardize(q, table, 11), DataError);
    q.indices[0] = 9;
    CHECK_THROWS_AS(standardize(q, table, 12), DataError);
  }
}

TEST_CASE("event JSON round trip") {
  const EventList events = {{"dog", 1.25, 2.5}, {"speech", 0.0, 10.0}};
  const auto text = events_to_json(events);
  const auto back = events_from_json(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].klass == "dog");
  CHECK(back[0].onset == doctest::Approx(1.25));
  CHECK(back[1].offset == doctest::Approx(10.0));
  CHECK_THROWS_AS(events_from_json("{"), DataError);
}

TEST_CASE("event set validation") {
  CHECK_THROWS_AS(EventSet({"a", "a"}), std::invalid_argument);
  CHECK_THROWS_AS(EventSet(std::vector<std::string>{}), std::invalid_argument);
  const EventSet set({"b", "a"});
  CHECK(set.index_of("a") == 1);  // explicit order is preserved
  CHECK(set.index_of("zzz") == -1);
}
