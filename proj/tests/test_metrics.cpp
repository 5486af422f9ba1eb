#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "condaudio/errors.hpp"
#include "condaudio/metrics.hpp"
#include "condaudio/rng.hpp"
#include "support/oracles.hpp"

using namespace condaudio;
using namespace condaudio::metrics;

namespace {

dsp::Contour contour_of(std::vector<float> values) {
  dsp::Contour c;
  c.values = std::move(values);
  c.voiced.assign(c.values.size(), 1);
  c.frame_rate = 100.0;
  return c;
}

std::vector<ClipEvents> random_corpus(Rng& rng, std::size_t n_clips,
                                      std::size_t max_events) {
  static const char* kClasses[] = {"dog", "speech", "water"};
  std::vector<ClipEvents> out;
  for (std::size_t c = 0; c < n_clips; ++c) {
    ClipEvents clip;
    clip.id = "clip" + std::to_string(c);
    const std::size_t n = rng.below(max_events + 1);
    for (std::size_t e = 0; e < n; ++e) {
      const double onset = rng.uniform_in(0.0, 8.0);
      const double dur = rng.uniform_in(0.2, 2.0);
      clip.events.push_back({kClasses[rng.below(3)], onset, onset + dur});
    }
    out.push_back(std::move(clip));
  }
  return out;
}

}  // namespace

TEST_CASE("event_based_scores: perfect predictions score 100") {
  Rng rng(1);
  const auto refs = random_corpus(rng, 6, 4);
  const auto scores = event_based_scores(refs, refs);
  CHECK(scores.macro_f1_percent == doctest::Approx(100.0));
}

TEST_CASE("event_based_scores: empty predictions score 0") {
  std::vector<ClipEvents> refs = {{"c1", {{"dog", 1.0, 2.0}}}};
  std::vector<ClipEvents> preds = {{"c1", {}}};
  CHECK(event_based_scores(refs, preds).macro_f1_percent == doctest::Approx(0.0));
}

TEST_CASE("event_based_scores collar example") {
  // ref (1.0, 2.0), pred (1.15, 2.1): onset delta 0.15 <= 0.2 and offset
  // delta 0.10 <= max(0.2, 0.2 * 1.0) -> a true positive
  std::vector<ClipEvents> refs = {{"c1", {{"dog", 1.0, 2.0}}}};
  std::vector<ClipEvents> preds = {{"c1", {{"dog", 1.15, 2.1}}}};
  CHECK(event_based_scores(refs, preds).macro_f1_percent == doctest::Approx(100.0));

  // pushing the onset outside the collar breaks the match
  preds[0].events[0].onset = 1.25;
  CHECK(event_based_scores(refs, preds).macro_f1_percent == doctest::Approx(0.0));
}

TEST_CASE("event_based_scores agrees with the exhaustive matcher") {
  Rng rng(77);
  const MatchParams params;
  for (int trial = 0; trial < 200; ++trial) {
    const auto refs = random_corpus(rng, 3, 5);
    auto preds = refs;
    // perturb: jitter some events, drop some, add spurious ones
    for (auto& clip : preds) {
      EventList kept;
      for (auto& e : clip.events) {
        if (rng.uniform() < 0.2) continue;
        e.onset = std::max(0.0, e.onset + rng.uniform_in(-0.3, 0.3));
        e.offset = e.onset + std::max(0.05, (e.offset - e.onset) + rng.uniform_in(-0.3, 0.3));
        kept.push_back(e);
      }
      if (rng.uniform() < 0.5) {
        const double onset = rng.uniform_in(0.0, 8.0);
        kept.push_back({"dog", onset, onset + rng.uniform_in(0.2, 1.5)});
      }
      clip.events = std::move(kept);
    }

    const auto scores = event_based_scores(refs, preds, params);

    // oracle: per clip and class, exhaustively search the best matching
    std::map<std::string, ClassCounts> expected;
    for (std::size_t c = 0; c < refs.size(); ++c) {
      std::set<std::string> classes;
      for (const auto& e : refs[c].events) classes.insert(e.klass);
      for (const auto& e : preds[c].events) classes.insert(e.klass);
      for (const auto& klass : classes) {
        std::vector<Event> r, p;
        for (const auto& e : refs[c].events)
          if (e.klass == klass) r.push_back(e);
        for (const auto& e : preds[c].events)
          if (e.klass == klass) p.push_back(e);
        const std::size_t tp = oracle::max_event_matching(r, p, params);
        expected[klass].tp += tp;
        expected[klass].fp += p.size() - tp;
        expected[klass].fn += r.size() - tp;
      }
    }
    double macro = 0.0;
    for (const auto& [klass, counts] : expected) macro += counts.f1();
    macro = 100.0 * macro / double(expected.size());

    CHECK(scores.macro_f1_percent == doctest::Approx(macro).epsilon(1e-9));
    for (const auto& [klass, counts] : expected) {
      CHECK(scores.per_class.at(klass).tp == counts.tp);
      CHECK(scores.per_class.at(klass).fp == counts.fp);
      CHECK(scores.per_class.at(klass).fn == counts.fn);
    }
  }
}

TEST_CASE("event_based_scores input validation") {
  std::vector<ClipEvents> refs = {{"c1", {{"dog", 1.0, 2.0}}}, {"c1", {}}};
  std::vector<ClipEvents> preds = {{"c1", {}}};
  CHECK_THROWS_AS(event_based_scores(refs, preds), DataError);

  refs.pop_back();
  std::vector<ClipEvents> other = {{"c2", {}}};
  CHECK_THROWS_AS(event_based_scores(refs, other), DataError);
}

TEST_CASE("clip_macro_f1") {
  SUBCASE("identical presence sets score 100") {
    std::vector<ClipEvents> refs = {{"c1", {{"dog", 1.0, 2.0}, {"dog", 3.0, 4.0}}},
                                    {"c2", {{"speech", 0.0, 5.0}}}};
    CHECK(clip_macro_f1(refs, refs).macro_f1_percent == doctest::Approx(100.0));
  }

  SUBCASE("disjoint class sets score 0") {
    std::vector<ClipEvents> refs = {{"c1", {{"dog", 1.0, 2.0}}}};
    std::vector<ClipEvents> preds = {{"c1", {{"speech", 1.0, 2.0}}}};
    CHECK(clip_macro_f1(refs, preds).macro_f1_percent == doctest::Approx(0.0));
  }

  SUBCASE("hand-computed mixed case") {
    // class dog: clip1 TP, clip2 FN -> P=1, R=1/2, F1=2/3
    // class speech: clip3 TP, clip1 FP -> P=1/2, R=1, F1=2/3
    std::vector<ClipEvents> refs = {{"c1", {{"dog", 0.0, 1.0}}},
                                    {"c2", {{"dog", 0.0, 1.0}}},
                                    {"c3", {{"speech", 0.0, 1.0}}}};
    std::vector<ClipEvents> preds = {{"c1", {{"dog", 0.0, 1.0}, {"speech", 2.0, 3.0}}},
                                     {"c2", {}},
                                     {"c3", {{"speech", 0.0, 1.0}}}};
    const auto scores = clip_macro_f1(refs, preds);
    CHECK(scores.macro_f1_percent == doctest::Approx(100.0 * (2.0 / 3.0)));
  }
}

TEST_CASE("pitch_moments") {
  SUBCASE("constant contour raises") {
    CHECK_THROWS_AS(pitch_moments(contour_of({5, 5, 5, 5})), DataError);
  }

  SUBCASE("insufficient voiced frames raise") {
    dsp::Contour c = contour_of({100.0f, 120.0f});
    c.voiced = {1, 0};
    CHECK_THROWS_WITH(pitch_moments(c), "insufficient voiced frames");
  }

  SUBCASE("symmetric two-point distribution: gamma 0, kappa 1") {
    const auto m = pitch_moments(contour_of({3, 9, 3, 9}));
    CHECK(m.sigma == doctest::Approx(3.0));
    CHECK(m.gamma == doctest::Approx(0.0));
    CHECK(m.kappa == doctest::Approx(1.0));
  }

  SUBCASE("standard normal Monte Carlo") {
    Rng rng(123);
    std::vector<float> v(100000);
    for (auto& x : v) x = float(rng.normal());
    const auto m = pitch_moments(contour_of(std::move(v)));
    CHECK(std::fabs(m.sigma - 1.0) < 0.05);
    CHECK(std::fabs(m.gamma - 0.0) < 0.05);
    CHECK(std::fabs(m.kappa - 3.0) < 0.05);
  }

  SUBCASE("affine invariance") {
    Rng rng(5);
    std::vector<float> v(512);
    for (auto& x : v) x = float(std::exp(rng.normal()));
    const auto base = pitch_moments(contour_of(v));
    std::vector<float> mapped(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mapped[i] = float(2.5 * v[i] + 40.0);
    const auto moved = pitch_moments(contour_of(std::move(mapped)));
    CHECK(moved.sigma == doctest::Approx(2.5 * base.sigma).epsilon(1e-4));
    CHECK(moved.gamma == doctest::Approx(base.gamma).epsilon(1e-3));
    CHECK(moved.kappa == doctest::Approx(base.kappa).epsilon(1e-3));
  }
}

TEST_CASE("dtw basics") {
  CHECK(dtw({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(dtw({0, 0, 0}, {1, 1, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(dtw({}, {1.0}), DataError);
}

TEST_CASE("dtw equals exhaustive path search") {
  Rng rng(404);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(1 + rng.below(7)), b(1 + rng.below(7));
    for (auto& v : a) v = rng.uniform_in(-2.0, 2.0);
    for (auto& v : b) v = rng.uniform_in(-2.0, 2.0);
    CHECK(dtw(a, b) == doctest::Approx(oracle::dtw_bruteforce(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("dtw symmetry and scale covariance") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(2 + rng.below(10)), b(2 + rng.below(10));
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    CHECK(dtw(a, b) == doctest::Approx(dtw(b, a)).epsilon(1e-12));
    const double alpha = rng.uniform_in(0.1, 5.0);
    auto sa = a, sb = b;
    for (auto& v : sa) v *= alpha;
    for (auto& v : sb) v *= alpha;
    CHECK(dtw(sa, sb) == doctest::Approx(alpha * dtw(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("pitch_dtw uses voiced frames only") {
  dsp::Contour a = contour_of({100, 0, 200, 0, 300});
  a.voiced = {1, 0, 1, 0, 1};
  dsp::Contour b = contour_of({100, 200, 300});
  CHECK(pitch_dtw(a, b) == doctest::Approx(0.0));
  CHECK(pitch_dtw(a, b, true) == doctest::Approx(0.0));
}

TEST_CASE("energy_mae") {
  const auto a = contour_of({1, 2, 3, 4});
  CHECK(energy_mae(a, a) == doctest::Approx(0.0));

  auto b = a;
  for (auto& v : b.values) v += 0.5f;
  CHECK(energy_mae(b, a) == doctest::Approx(0.5));

  SUBCASE("direct-loop oracle on length 1000") {
    Rng rng(8);
    std::vector<float> x(1000), y(1000);
    for (auto& v : x) v = float(rng.uniform());
    for (auto& v : y) v = float(rng.uniform());
    double want = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) want += std::fabs(double(x[i]) - double(y[i]));
    want /= 1000.0;
    CHECK(energy_mae(contour_of(x), contour_of(y)) == doctest::Approx(want).epsilon(1e-9));
  }

  SUBCASE("triangle inequality") {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<float> x(64), y(64), z(64);
      for (auto& v : x) v = float(rng.normal());
      for (auto& v : y) v = float(rng.normal());
      for (auto& v : z) v = float(rng.normal());
      const double ab = energy_mae(contour_of(x), contour_of(y));
      const double bc = energy_mae(contour_of(y), contour_of(z));
      const double ac = energy_mae(contour_of(x), contour_of(z));
      CHECK(ac <= ab + bc + 1e-12);
    }
  }

  CHECK_THROWS_AS(energy_mae(contour_of({1, 2}), contour_of({1, 2, 3})), DataError);
}

TEST_CASE("metrics are invariant to clip order") {
  Rng rng(55);
  auto refs = random_corpus(rng, 5, 4);
  auto preds = random_corpus(rng, 5, 4);
  for (std::size_t i = 0; i < refs.size(); ++i) preds[i].id = refs[i].id;
  // keep at least one event per side so the scores are defined
  refs[0].events.push_back({"dog", 0.5, 1.0});
  preds[0].events.push_back({"dog", 0.55, 1.05});

  const double eb = event_based_scores(refs, preds).macro_f1_percent;
  const double at = clip_macro_f1(refs, preds).macro_f1_percent;
  std::reverse(refs.begin(), refs.end());
  std::reverse(preds.begin(), preds.end());
  CHECK(event_based_scores(refs, preds).macro_f1_percent == doctest::Approx(eb));
  CHECK(clip_macro_f1(refs, preds).macro_f1_percent == doctest::Approx(at));
  CHECK(eb >= 0.0);
  CHECK(eb <= 100.0);
  CHECK(at >= 0.0);
  CHECK(at <= 100.0);
}

TEST_CASE("quantized_to_unit maps bins onto [0, 1]") {
  dsp::QuantizedContour q;
  q.indices = {0, 128, 255};
  q.n_bins = 256;
  q.v_min = 1e-4f;
  q.v_max = 10.0f;
  q.frame_rate = 100.0;
  const auto c = quantized_to_unit(q);
  CHECK(c.values[0] == doctest::Approx(0.0));
  CHECK(c.values[1] == doctest::Approx(128.0 / 255.0));
  CHECK(c.values[2] == doctest::Approx(1.0));
}

TEST_CASE("report rendering") {
  EvalReport report;
  ReportRow gt;
  gt.settings = "GT";
  gt.eb = 54.21;  // placeholder-style row: DTW and MAE stay absent
  gt.at = 67.53;
  gt.sigma = 54.21;
  gt.gamma = 2.02;
  gt.kappa = 7.31;
  report.rows.push_back(gt);
  ReportRow ours;
  ours.settings = "ours";
  ours.eb = 29.066;
  ours.at = 47.114;
  ours.sigma = 55.68;
  ours.gamma = 1.93;
  ours.kappa = 6.77;
  ours.dtw = 10.79;
  ours.mae = 0.2;
  report.rows.push_back(ours);

  const auto table = render_table(report);
  CHECK(table.find("29.07") != std::string::npos);  // two-decimal formatting
  CHECK(table.find("47.11") != std::string::npos);
  CHECK(table.find("0.200") != std::string::npos);
  CHECK(table.find("-") != std::string::npos);  // absent cells render as "-"
  CHECK(table.find("Eb") != std::string::npos);

  const auto json_text = report_json(report);
  CHECK(json_text.find("\"dtw\": null") != std::string::npos);

  CHECK_THROWS_AS(render_table(EvalReport{}), DataError);
  CHECK_THROWS_AS(report_json(EvalReport{}), DataError);
}
