#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condaudio/conditions.hpp"
#include "condaudio/dsp.hpp"

namespace condaudio::metrics {

using conditions::Event;
using conditions::EventList;

struct ClipEvents {
  std::string id;
  EventList events;
};

struct MatchParams {
  double onset_collar = 0.2;   // seconds
  double offset_collar = 0.2;  // seconds
  double offset_ratio = 0.2;   // fraction of the reference duration
};

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
  double f1() const {
    const double denom = double(2 * tp + fp + fn);
    return denom > 0.0 ? 2.0 * double(tp) / denom : 0.0;
  }
};

struct EventScores {
  double macro_f1_percent = 0.0;
  std::map<std::string, ClassCounts> per_class;
};

// Event-based F1: a prediction matches a same-class reference when both
// |onset delta| <= onset_collar and |offset delta| <= max(offset_collar,
// offset_ratio * reference duration). Matching is one-to-one and maximal
// (augmenting-path bipartite matching per clip and class). Macro-averaged
// over classes, scaled to percent.
EventScores event_based_scores(const std::vector<ClipEvents>& refs,
                               const std::vector<ClipEvents>& preds,
                               const MatchParams& params = {});

// Clip-level tagging F1 (class present/absent per clip), macro-averaged over
// classes, in percent.
EventScores clip_macro_f1(const std::vector<ClipEvents>& refs,
                          const std::vector<ClipEvents>& preds);

struct Moments {
  double sigma = 0.0;  // population standard deviation
  double gamma = 0.0;  // skewness m3 / sigma^3
  double kappa = 0.0;  // kurtosis m4 / sigma^4 (non-excess)
};

// Moments over voiced frames only. Throws when fewer than two voiced frames
// exist or the voiced values are constant (sigma == 0).
Moments pitch_moments(const dsp::Contour& contour);

// Normalized DTW: symmetric step pattern with weight 2 on diagonal moves and
// the initial cell, weight 1 on insertions/deletions, absolute-difference
// local cost, total divided by n + m. Every alignment path carries the same
// total weight, so the normalization is path-independent.
double dtw(const std::vector<double>& a, const std::vector<double>& b);

// DTW over the voiced frames of two pitch contours, optionally in log-Hz.
double pitch_dtw(const dsp::Contour& a, const dsp::Contour& b, bool log_hz = false);

// Mean absolute error over frames; inputs must have equal length.
double energy_mae(const dsp::Contour& gen, const dsp::Contour& ref);

// Quantized contour mapped onto [0, 1] as bin / (n_bins - 1); the scale the
// energy MAE is reported on.
dsp::Contour quantized_to_unit(const dsp::QuantizedContour& q);

struct ReportRow {
  std::string settings;
  std::optional<double> eb, at, sigma, gamma, kappa, dtw, mae;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::map<std::string, double> per_class_eb;  // event-based F1 percent per class
  std::map<std::string, double> per_class_at;  // clip-level F1 percent per class
};

// Renders the fixed-column table (Settings | Eb | At | sigma | gamma | kappa
// | DTW | MAE); absent cells render as "-". Throws on an empty report.
std::string render_table(const EvalReport& report);
std::string report_json(const EvalReport& report);

}  // namespace condaudio::metrics
