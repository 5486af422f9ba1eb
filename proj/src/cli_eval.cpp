#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "condaudio/acnd.hpp"
#include "condaudio/cli.hpp"
#include "condaudio/dataset.hpp"
#include "condaudio/errors.hpp"
#include "condaudio/metrics.hpp"

namespace condaudio::cli {
namespace {

namespace fs = std::filesystem;

std::vector<metrics::ClipEvents> load_clip_events(const fs::path& path) {
  const auto labels = data::parse_strong_labels_file(path);
  if (!labels.errors.empty()) {
    std::string msg = "malformed rows in " + path.string() + ":";
    for (const auto& e : labels.errors)
      msg += " line " + std::to_string(e.line) + " (" + e.message + ")";
    throw DataError(msg);
  }
  std::vector<metrics::ClipEvents> out;
  for (const auto& [id, events] : labels.by_clip) out.push_back({id, events});
  return out;
}

std::vector<std::string> contour_ids(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void require_same_ids(const std::vector<std::string>& refs,
                      const std::vector<std::string>& preds, const std::string& what) {
  std::set<std::string> r(refs.begin(), refs.end()), p(preds.begin(), preds.end());
  std::string missing;
  for (const auto& id : r)
    if (!p.count(id)) missing += " " + id + " (prediction)";
  for (const auto& id : p)
    if (!r.count(id)) missing += " " + id + " (reference)";
  if (!missing.empty()) throw DataError("mismatched " + what + " clip sets; missing:" + missing);
}

}  // namespace

int run_eval(const EvalOptions& opts) {
  const bool temporal = opts.kind == "temporal" || opts.kind == "all";
  const bool pitch = opts.kind == "pitch" || opts.kind == "all";
  const bool energy = opts.kind == "energy" || opts.kind == "all";
  if (!temporal && !pitch && !energy)
    throw std::invalid_argument("eval: kind must be temporal, pitch, energy, or all");

  metrics::EvalReport report;
  metrics::ReportRow row;
  row.settings = opts.settings_name;

  if (temporal) {
    if (opts.refs_events.empty() || opts.preds_events.empty())
      throw std::invalid_argument("eval: temporal metrics need --refs and --preds event files");
    const auto refs = load_clip_events(opts.refs_events);
    const auto preds = load_clip_events(opts.preds_events);
    const auto eb = metrics::event_based_scores(refs, preds);
    const auto at = metrics::clip_macro_f1(refs, preds);
    row.eb = eb.macro_f1_percent;
    row.at = at.macro_f1_percent;
    for (const auto& [klass, counts] : eb.per_class)
      report.per_class_eb[klass] = 100.0 * counts.f1();
    for (const auto& [klass, counts] : at.per_class)
      report.per_class_at[klass] = 100.0 * counts.f1();
  }

  std::optional<data::DatasetConfig> dconfig;
  if (!opts.dataset_config.empty()) {
    std::ifstream in(opts.dataset_config);
    if (!in) throw DataError("cannot open dataset config: " + opts.dataset_config.string());
    std::stringstream ss;
    ss << in.rdbuf();
    dconfig = data::DatasetConfig::from_json(ss.str());
  }

  if (pitch) {
    if (opts.refs_contours.empty() || opts.preds_contours.empty())
      throw std::invalid_argument("eval: pitch metrics need --refs-contours and --preds-contours");
    const auto ref_ids = contour_ids(opts.refs_contours, ".pitch.acnd");
    const auto pred_ids = contour_ids(opts.preds_contours, ".pitch.acnd");
    require_same_ids(ref_ids, pred_ids, "pitch");
    if (ref_ids.empty()) throw DataError("no pitch contours found");

    // Moments describe the generated (prediction-side) pitch distribution,
    // pooled over all voiced frames of the corpus.
    dsp::Contour pooled;
    pooled.frame_rate = 0.0;
    double dtw_sum = 0.0;
    std::size_t dtw_clips = 0;
    for (const auto& id : ref_ids) {
      const auto ref = data::read_contour(opts.refs_contours / (id + ".pitch.acnd"));
      const auto pred = data::read_contour(opts.preds_contours / (id + ".pitch.acnd"));
      for (std::size_t i = 0; i < pred.frames(); ++i) {
        pooled.values.push_back(pred.values[i]);
        pooled.voiced.push_back(pred.voiced[i]);
      }
      const bool ref_voiced = std::any_of(ref.voiced.begin(), ref.voiced.end(),
                                          [](std::uint8_t v) { return v != 0; });
      const bool pred_voiced = std::any_of(pred.voiced.begin(), pred.voiced.end(),
                                           [](std::uint8_t v) { return v != 0; });
      if (ref_voiced && pred_voiced) {
        dtw_sum += metrics::pitch_dtw(pred, ref);
        ++dtw_clips;
      }
    }
    const auto moments = metrics::pitch_moments(pooled);
    row.sigma = moments.sigma;
    row.gamma = moments.gamma;
    row.kappa = moments.kappa;
    if (dtw_clips == 0) throw DataError("no clips with voiced frames on both sides");
    row.dtw = dtw_sum / double(dtw_clips);
  }

  if (energy) {
    if (opts.refs_contours.empty() || opts.preds_contours.empty())
      throw std::invalid_argument("eval: energy metrics need --refs-contours and --preds-contours");
    const auto ref_ids = contour_ids(opts.refs_contours, ".energy.acnd");
    const auto pred_ids = contour_ids(opts.preds_contours, ".energy.acnd");
    require_same_ids(ref_ids, pred_ids, "energy");
    if (ref_ids.empty()) throw DataError("no energy contours found");

    // Quantization range: the dataset config when given, otherwise the
    // reference corpus maximum.
    int n_bins = dconfig ? dconfig->energy_bins : 256;
    float e_min = dconfig ? dconfig->energy_min : 1e-4f;
    float e_max = dconfig ? dconfig->energy_max : 0.0f;
    if (e_max <= e_min) {
      for (const auto& id : ref_ids) {
        const auto ref = data::read_contour(opts.refs_contours / (id + ".energy.acnd"));
        for (float v : ref.values) e_max = std::max(e_max, v);
      }
      if (e_max <= e_min) e_max = e_min * 10.0f;
    }

    double mae_sum = 0.0;
    for (const auto& id : ref_ids) {
      const auto ref = data::read_contour(opts.refs_contours / (id + ".energy.acnd"));
      const auto pred = data::read_contour(opts.preds_contours / (id + ".energy.acnd"));
      const auto ref_q = metrics::quantized_to_unit(dsp::log_quantize(ref, n_bins, e_min, e_max));
      const auto pred_q =
          metrics::quantized_to_unit(dsp::log_quantize(pred, n_bins, e_min, e_max));
      mae_sum += metrics::energy_mae(pred_q, ref_q);
    }
    row.mae = mae_sum / double(ref_ids.size());
  }

  report.rows.push_back(row);
  const std::string table = metrics::render_table(report);
  std::cout << table;

  fs::create_directories(opts.out_dir);
  {
    std::ofstream out(opts.out_dir / "report.txt", std::ios::binary);
    if (!out) throw DataError("cannot write report.txt");
    out << table;
  }
  {
    std::ofstream out(opts.out_dir / "report.json", std::ios::binary);
    if (!out) throw DataError("cannot write report.json");
    out << metrics::report_json(report);
  }
  return kExitOk;
}

}  // namespace condaudio::cli
