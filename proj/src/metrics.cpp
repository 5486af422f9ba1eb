#include "condaudio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "condaudio/errors.hpp"

namespace condaudio::metrics {
namespace {

bool events_match(const Event& ref, const Event& pred, const MatchParams& p) {
  const double offset_tol =
      std::max(p.offset_collar, p.offset_ratio * (ref.offset - ref.onset));
  return std::fabs(pred.onset - ref.onset) <= p.onset_collar &&
         std::fabs(pred.offset - ref.offset) <= offset_tol;
}

// Maximum bipartite matching via augmenting paths; sizes here are tiny.
std::size_t max_matching(const std::vector<std::vector<bool>>& compat) {
  const std::size_t n_pred = compat.size();
  const std::size_t n_ref = n_pred ? compat[0].size() : 0;
  std::vector<long long> ref_match(n_ref, -1);

  std::vector<bool> visited;
  std::function<bool(std::size_t)> try_assign = [&](std::size_t pred) -> bool {
    for (std::size_t r = 0; r < n_ref; ++r) {
      if (!compat[pred][r] || visited[r]) continue;
      visited[r] = true;
      if (ref_match[r] < 0 || try_assign(std::size_t(ref_match[r]))) {
        ref_match[r] = (long long)pred;
        return true;
      }
    }
    return false;
  };

  std::size_t matched = 0;
  for (std::size_t p = 0; p < n_pred; ++p) {
    visited.assign(n_ref, false);
    if (try_assign(p)) ++matched;
  }
  return matched;
}

std::map<std::string, const EventList*> index_clips(const std::vector<ClipEvents>& clips,
                                                    const char* which) {
  std::map<std::string, const EventList*> out;
  for (const auto& c : clips)
    if (!out.emplace(c.id, &c.events).second)
      throw DataError(std::string("duplicate clip id in ") + which + ": " + c.id);
  return out;
}

void check_aligned(const std::map<std::string, const EventList*>& refs,
                   const std::map<std::string, const EventList*>& preds) {
  std::vector<std::string> missing;
  for (const auto& [id, _] : refs)
    if (!preds.count(id)) missing.push_back("prediction for " + id);
  for (const auto& [id, _] : preds)
    if (!refs.count(id)) missing.push_back("reference for " + id);
  if (!missing.empty()) {
    std::string msg = "clip sets are not aligned; missing:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
}

double macro_percent(const std::map<std::string, ClassCounts>& per_class) {
  if (per_class.empty())
    throw DataError("no events in references or predictions");
  double sum = 0.0;
  for (const auto& [_, counts] : per_class) sum += counts.f1();
  return 100.0 * sum / double(per_class.size());
}

std::string fmt_cell(const std::optional<double>& v, int decimals) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

}  // namespace

EventScores event_based_scores(const std::vector<ClipEvents>& refs,
                               const std::vector<ClipEvents>& preds,
                               const MatchParams& params) {
  if (!(params.onset_collar > 0.0 && params.offset_collar > 0.0))
    throw std::invalid_argument("collars must be positive");
  const auto ref_map = index_clips(refs, "references");
  const auto pred_map = index_clips(preds, "predictions");
  check_aligned(ref_map, pred_map);

  EventScores out;
  for (const auto& [id, ref_events] : ref_map) {
    const auto& pred_events = *pred_map.at(id);

    std::set<std::string> classes;
    for (const auto& e : *ref_events) classes.insert(e.klass);
    for (const auto& e : pred_events) classes.insert(e.klass);

    for (const auto& klass : classes) {
      std::vector<Event> r, p;
      for (const auto& e : *ref_events)
        if (e.klass == klass) r.push_back(e);
      for (const auto& e : pred_events)
        if (e.klass == klass) p.push_back(e);

      std::vector<std::vector<bool>> compat(p.size(), std::vector<bool>(r.size(), false));
      for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j)
          compat[i][j] = events_match(r[j], p[i], params);

      const std::size_t tp = max_matching(compat);
      auto& counts = out.per_class[klass];
      counts.tp += tp;
      counts.fp += p.size() - tp;
      counts.fn += r.size() - tp;
    }
  }
  out.macro_f1_percent = macro_percent(out.per_class);
  return out;
}

EventScores clip_macro_f1(const std::vector<ClipEvents>& refs,
                          const std::vector<ClipEvents>& preds) {
  const auto ref_map = index_clips(refs, "references");
  const auto pred_map = index_clips(preds, "predictions");
  check_aligned(ref_map, pred_map);

  EventScores out;
  for (const auto& [id, ref_events] : ref_map) {
    std::set<std::string> ref_classes, pred_classes;
    for (const auto& e : *ref_events) ref_classes.insert(e.klass);
    for (const auto& e : *pred_map.at(id)) pred_classes.insert(e.klass);
    for (const auto& klass : ref_classes) {
      auto& c = out.per_class[klass];
      if (pred_classes.count(klass))
        ++c.tp;
      else
        ++c.fn;
    }
    for (const auto& klass : pred_classes)
      if (!ref_classes.count(klass)) ++out.per_class[klass].fp;
  }
  out.macro_f1_percent = macro_percent(out.per_class);
  return out;
}

Moments pitch_moments(const dsp::Contour& contour) {
  std::vector<double> v;
  for (std::size_t i = 0; i < contour.frames(); ++i)
    if (contour.voiced[i]) v.push_back(contour.values[i]);
  if (v.size() < 2) throw DataError("insufficient voiced frames");

  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= double(v.size());
  m3 /= double(v.size());
  m4 /= double(v.size());
  if (m2 <= 0.0) throw DataError("moments undefined for a constant contour");

  Moments out;
  out.sigma = std::sqrt(m2);
  out.gamma = m3 / (out.sigma * out.sigma * out.sigma);
  out.kappa = m4 / (m2 * m2);
  return out;
}

double dtw(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DataError("empty input");
  const std::size_t n = a.size(), m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;  // virtual origin; the (0,0) cell enters diagonally (weight 2)
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost = std::fabs(a[i - 1] - b[j - 1]);
      cur[j] = std::min({prev[j] + cost, cur[j - 1] + cost, prev[j - 1] + 2.0 * cost});
    }
    std::swap(prev, cur);
  }
  return prev[m] / double(n + m);
}

double pitch_dtw(const dsp::Contour& a, const dsp::Contour& b, bool log_hz) {
  auto voiced_values = [log_hz](const dsp::Contour& c) {
    std::vector<double> out;
    for (std::size_t i = 0; i < c.frames(); ++i)
      if (c.voiced[i] && c.values[i] > 0.0f)
        out.push_back(log_hz ? std::log(double(c.values[i])) : double(c.values[i]));
    return out;
  };
  return dtw(voiced_values(a), voiced_values(b));
}

double energy_mae(const dsp::Contour& gen, const dsp::Contour& ref) {
  if (gen.frames() != ref.frames())
    throw DataError("contour length mismatch: " + std::to_string(gen.frames()) + " vs " +
                    std::to_string(ref.frames()));
  if (gen.frames() == 0) throw DataError("empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < gen.frames(); ++i)
    acc += std::fabs(double(gen.values[i]) - double(ref.values[i]));
  return acc / double(gen.frames());
}

dsp::Contour quantized_to_unit(const dsp::QuantizedContour& q) {
  dsp::Contour out;
  out.frame_rate = q.frame_rate;
  out.values.resize(q.indices.size());
  out.voiced.assign(q.indices.size(), 1);
  for (std::size_t i = 0; i < q.indices.size(); ++i)
    out.values[i] = float(double(q.indices[i]) / double(q.n_bins - 1));
  return out;
}

std::string render_table(const EvalReport& report) {
  if (report.rows.empty()) throw DataError("empty report");
  static const char* headers[] = {"Settings", "Eb ↑", "At ↑", "σ",
                                  "γ",   "κ",    "DTW ↓", "MAE ↓"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : report.rows) {
    cells.push_back({r.settings, fmt_cell(r.eb, 2), fmt_cell(r.at, 2), fmt_cell(r.sigma, 2),
                     fmt_cell(r.gamma, 2), fmt_cell(r.kappa, 2), fmt_cell(r.dtw, 2),
                     fmt_cell(r.mae, 3)});
  }

  // column widths on display length (headers carry multi-byte glyphs)
  auto display_len = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
      if ((c & 0xc0) != 0x80) ++n;
    return n;
  };
  std::size_t widths[8];
  for (int c = 0; c < 8; ++c) {
    widths[c] = display_len(headers[c]);
    for (const auto& row : cells) widths[c] = std::max(widths[c], display_len(row[c]));
  }

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (int c = 0; c < 8; ++c) {
      out << row[std::size_t(c)];
      if (c + 1 < 8)
        out << std::string(widths[c] - display_len(row[std::size_t(c)]) + 2, ' ');
    }
    out << "\n";
  };
  emit({headers[0], headers[1], headers[2], headers[3], headers[4], headers[5], headers[6],
        headers[7]});
  for (const auto& row : cells) emit(row);
  return out.str();
}

std::string report_json(const EvalReport& report) {
  if (report.rows.empty()) throw DataError("empty report");
  nlohmann::json rows = nlohmann::json::array();
  auto put = [](nlohmann::json& j, const char* key, const std::optional<double>& v) {
    if (v)
      j[key] = *v;
    else
      j[key] = nullptr;
  };
  for (const auto& r : report.rows) {
    nlohmann::json j{{"settings", r.settings}};
    put(j, "eb", r.eb);
    put(j, "at", r.at);
    put(j, "sigma", r.sigma);
    put(j, "gamma", r.gamma);
    put(j, "kappa", r.kappa);
    put(j, "dtw", r.dtw);
    put(j, "mae", r.mae);
    rows.push_back(std::move(j));
  }
  nlohmann::json j{{"rows", rows},
                   {"per_class_eb", report.per_class_eb},
                   {"per_class_at", report.per_class_at}};
  return j.dump(2) + "\n";
}

}  // namespace condaudio::metrics
