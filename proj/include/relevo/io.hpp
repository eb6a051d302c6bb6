#pragma once

// File formats. CSV input accepts LF or CRLF; CSV output is comma separated,
// LF terminated, with numbers in shortest round-trip decimal form so reports
// are byte-stable.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "relevo/error.hpp"
#include "relevo/metrics.hpp"
#include "relevo/models.hpp"
#include "relevo/relevance.hpp"
#include "relevo/robustness.hpp"

namespace relevo {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CsvTable parse_numeric_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const auto cells = split_commas(line);
    if (!have_header) {
      for (auto c : cells) table.header.push_back(unquote(c));
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw Error(ErrorCode::parse_error, source + ": line " + std::to_string(line_no) + " has " +
                                              std::to_string(cells.size()) + " fields, header has " +
                                              std::to_string(table.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v)
        throw Error(ErrorCode::parse_error, source + ": non-numeric value '" + std::string(trim(cells[c])) +
                                                "' at line " + std::to_string(line_no) + ", column " +
                                                std::to_string(c + 1) + " (" + table.header[c] + ")");
      row[c] = *v;
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::parse_error, source + ": empty file");
  return table;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path.string() + "'");
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorCode::io_error, "cannot create output directory '" + dir.string() + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Datasets and predictions

/// Numeric CSV with a header row; `target` names the response column and every
/// other column becomes a feature.
inline Dataset read_dataset_csv(const std::filesystem::path& path, const std::string& target) {
  const auto table = detail::parse_numeric_csv(detail::read_file(path), path.string());
  std::size_t target_col = table.header.size();
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == target) target_col = c;
  }
  if (target_col == table.header.size())
    throw Error(ErrorCode::parse_error, path.string() + ": target column '" + target + "' not found");

  Dataset data;
  data.target_name = target;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != target_col) data.feature_names.push_back(table.header[c]);
  }
  const std::size_t p = data.feature_names.size();
  data.features = Matrix(table.rows.size(), p);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::size_t f = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == target_col) {
        data.target.push_back(table.rows[r][c]);
      } else {
        data.features(r, f++) = table.rows[r][c];
      }
    }
  }
  return data;
}

inline std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (const auto& name : data.feature_names) out += name + ",";
  out += data.target_name + "\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < data.features.cols(); ++c) out += format_double(data.features(r, c)) + ",";
    out += format_double(data.target[r]) + "\n";
  }
  return out;
}

/// Header `y_true,<model>,...`; one row per case.
inline PredictionSet read_predictions_csv(const std::filesystem::path& path) {
  const auto table = detail::parse_numeric_csv(detail::read_file(path), path.string());
  std::size_t truth_col = table.header.size();
  std::set<std::string> seen;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!seen.insert(table.header[c]).second)
      throw Error(ErrorCode::parse_error, path.string() + ": duplicate column '" + table.header[c] + "'");
    if (table.header[c] == "y_true") truth_col = c;
  }
  if (truth_col == table.header.size())
    throw Error(ErrorCode::parse_error, path.string() + ": header has no 'y_true' column");
  if (table.header.size() < 2)
    throw Error(ErrorCode::parse_error, path.string() + ": no model columns besides 'y_true'");
  if (table.rows.empty()) throw Error(ErrorCode::parse_error, path.string() + ": no data rows");

  std::vector<double> truth;
  for (const auto& row : table.rows) truth.push_back(row[truth_col]);
  PredictionSet preds(std::move(truth));
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == truth_col) continue;
    std::vector<double> column;
    for (const auto& row : table.rows) column.push_back(row[c]);
    preds.add_model(table.header[c], std::move(column));
  }
  return preds;
}

inline std::string predictions_csv(const PredictionSet& preds) {
  std::string out = "y_true";
  for (const auto& [id, _] : preds.models()) out += "," + id;
  out += "\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out += format_double(preds.y_true()[i]);
    for (const auto& [_, values] : preds.models()) out += "," + format_double(values[i]);
    out += "\n";
  }
  return out;
}

inline void write_predictions_csv(const PredictionSet& preds, const std::filesystem::path& path) {
  detail::write_file(path, predictions_csv(preds));
}

// ---------------------------------------------------------------------------
// Relevance functions

inline Json points_to_json(std::span<const ControlPoint> points) {
  Json arr = Json::array();
  for (const auto& p : points) {
    Json j;
    j["y"] = p.y;
    j["phi"] = p.phi;
    if (p.dphi) {
      j["dphi"] = *p.dphi;
    } else {
      j["dphi"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline Json relevance_to_json(const RelevanceFunction& f) {
  Json j;
  j["points"] = points_to_json(f.points());
  return j;
}

/// Control points from `{"points": [{"y": .., "phi": .., "dphi": ..}, ...]}`.
/// `dphi` defaults to 0; `null` lets the interpolant choose the slope.
inline std::vector<ControlPoint> points_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
    throw Error(ErrorCode::parse_error, "relevance document needs a 'points' array");
  for (const auto& [key, _] : doc.items()) {
    if (key != "points") throw Error(ErrorCode::parse_error, "unknown key '" + key + "' in relevance document");
  }
  std::vector<ControlPoint> points;
  for (const auto& item : doc["points"]) {
    if (!item.is_object()) throw Error(ErrorCode::parse_error, "control point must be an object");
    for (const auto& [key, _] : item.items()) {
      if (key != "y" && key != "phi" && key != "dphi")
        throw Error(ErrorCode::parse_error, "unknown key '" + key + "' in control point");
    }
    if (!item.contains("y") || !item["y"].is_number() || !item.contains("phi") || !item["phi"].is_number())
      throw Error(ErrorCode::parse_error, "control point needs numeric 'y' and 'phi'");
    ControlPoint p;
    p.y = item["y"].get<double>();
    p.phi = item["phi"].get<double>();
    if (item.contains("dphi")) {
      if (item["dphi"].is_null()) {
        p.dphi.reset();
      } else if (item["dphi"].is_number()) {
        p.dphi = item["dphi"].get<double>();
      } else {
        throw Error(ErrorCode::parse_error, "control point 'dphi' must be a number or null");
      }
    }
    points.push_back(p);
  }
  return points;
}

inline RelevanceFunction relevance_from_json(const Json& doc) { return RelevanceFunction(points_from_json(doc)); }

inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, source + ": " + e.what());
  }
}

inline RelevanceFunction read_relevance_json(const std::filesystem::path& path) {
  return relevance_from_json(parse_json(detail::read_file(path), path.string()));
}

inline void write_relevance_json(const RelevanceFunction& f, const std::filesystem::path& path) {
  detail::write_file(path, relevance_to_json(f).dump(2) + "\n");
}

/// Control points from text like "50:0,150:1" or "50:0:0,100:0.5:auto".
/// The optional third field is the slope; "auto" leaves it to the interpolant.
inline std::vector<ControlPoint> parse_points_spec(std::string_view text) {
  std::vector<ControlPoint> points;
  for (auto item : detail::split_commas(text)) {
    item = detail::trim(item);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto colon = item.find(':', start);
      fields.push_back(item.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw Error(ErrorCode::parse_error, "control point '" + std::string(item) + "' must look like y:phi[:dphi]");
    const auto y = detail::parse_number(fields[0]);
    const auto phi = detail::parse_number(fields[1]);
    if (!y || !phi) throw Error(ErrorCode::parse_error, "control point '" + std::string(item) + "' is not numeric");
    ControlPoint p{*y, *phi, 0.0};
    if (fields.size() == 3) {
      if (detail::trim(fields[2]) == "auto") {
        p.dphi.reset();
      } else {
        const auto d = detail::parse_number(fields[2]);
        if (!d) throw Error(ErrorCode::parse_error, "control point slope in '" + std::string(item) + "' is not numeric");
        p.dphi = *d;
      }
    }
    points.push_back(p);
  }
  return points;
}

/// `y,phi` samples at `count` evenly spaced targets over [lo, hi].
inline std::string relevance_curve_csv(const RelevanceFunction& f, double lo, double hi, std::size_t count = 500) {
  std::string out = "y,phi\n";
  for (std::size_t i = 0; i < count; ++i) {
    const double y = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    out += format_double(y) + "," + format_double(f(y)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline Json anchors_to_json(const RelevanceAnchors& a) {
  Json j;
  j["pi_min"] = a.pi_min;
  j["pi_max"] = a.pi_max;
  j["tail"] = std::string(to_string(a.tail));
  return j;
}

inline Json report_to_json(const SweepReport& report) {
  Json doc;
  doc["relevance"] = Json{{"points", points_to_json(report.relevance)}};
  doc["models"] = report.models;
  doc["sera_step"] = report.sera_step;
  Json reference = Json::object();
  for (const auto& [id, curve] : report.reference_curves) reference[id] = curve.area;
  doc["reference_sera"] = reference;

  Json methods = Json::array();
  for (const auto& m : report.methods) {
    Json jm;
    jm["method"] = std::string(to_string(m.config.method));
    jm["steps"] = m.config.steps;
    jm["half_range"] = m.config.half_range;
    jm["step_size"] = m.config.step_size();
    jm["one_sided"] = m.config.one_sided;
    jm["anchors"] = anchors_to_json(m.anchors);
    jm["reference_best"] = m.reference_best;
    jm["rank_shift_probability"] = m.rank_shift_probability;
    jm["neighbours"] = m.neighbours;
    jm["shifted"] = m.shifted;

    Json scenarios = Json::array();
    Json skipped = Json::array();
    for (const auto& r : m.scenarios) {
      if (r.spec.skipped()) {
        skipped.push_back(Json{{"index", r.spec.index}, {"offset", r.spec.offset}, {"reason", r.spec.skip_reason}});
        continue;
      }
      Json js;
      js["index"] = r.spec.index;
      js["offset"] = r.spec.offset;
      js["points"] = points_to_json(r.spec.relevance->points());
      js["anchors"] = anchors_to_json(*r.spec.anchors);
      Json areas = Json::object();
      for (const auto& [id, area] : r.sera) areas[id] = area;
      js["sera"] = areas;
      js["ranking"] = r.ranking;
      js["best"] = r.ranking.front();
      scenarios.push_back(std::move(js));
    }
    jm["scenarios"] = scenarios;
    jm["skipped"] = skipped;
    methods.push_back(std::move(jm));
  }
  doc["methods"] = methods;
  return doc;
}

/// Long format: one row per (method, scenario, model), ordered by method,
/// scenario index and model id. Skipped scenarios have no rows.
inline std::string sweep_csv(const SweepReport& report) {
  std::string out = "method,scenario_index,offset,model,sera,rank\n";
  for (const auto& m : report.methods) {
    for (const auto& r : m.scenarios) {
      if (r.spec.skipped()) continue;
      for (const auto& [id, area] : r.sera) {
        const auto rank = std::find(r.ranking.begin(), r.ranking.end(), id) - r.ranking.begin() + 1;
        out += std::string(to_string(m.config.method)) + "," + std::to_string(r.spec.index) + "," +
               format_double(r.spec.offset) + "," + id + "," + format_double(area) + "," + std::to_string(rank) + "\n";
      }
    }
  }
  return out;
}

inline std::string sera_curves_csv(const std::map<std::string, SeraCurve>& curves) {
  std::string out = "model,t,ser\n";
  for (const auto& [id, curve] : curves) {
    for (std::size_t j = 0; j < curve.t_grid.size(); ++j)
      out += id + "," + format_double(curve.t_grid[j]) + "," + format_double(curve.ser_values[j]) + "\n";
  }
  return out;
}

/// Writes report.json, sweep.csv and sera_curves.csv into `dir`.
inline std::vector<std::filesystem::path> write_report(const SweepReport& report, const std::filesystem::path& dir) {
  detail::ensure_directory(dir);
  const std::vector<std::filesystem::path> files{dir / "report.json", dir / "sweep.csv", dir / "sera_curves.csv"};
  detail::write_file(files[0], report_to_json(report).dump(2) + "\n");
  detail::write_file(files[1], sweep_csv(report));
  detail::write_file(files[2], sera_curves_csv(report.reference_curves));
  return files;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class RelevanceSource { automatic, file, inline_points };

/// JSON run configuration shared by the `sweep` and `demo` commands. Every
/// level rejects unknown keys. Unset optional fields fall back to command
/// line flags or built-in defaults.
struct RunConfig {
  std::optional<RelevanceSource> relevance_source;
  std::optional<std::string> relevance_path;
  std::vector<ControlPoint> relevance_points;
  double center_quantile = 0.5;

  std::vector<SweepMethod> methods{SweepMethod::convolution, SweepMethod::elastic};
  int steps = 19;
  std::optional<double> half_range;
  std::optional<Tail> tail;
  bool one_sided = false;

  double sera_step = 0.001;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  std::optional<std::string> data_path;
  std::optional<std::string> target;
  std::optional<std::string> predictions_path;
  std::optional<std::string> output_dir;

  std::vector<SweepConfig> sweep_configs(double default_half_range) const {
    std::vector<SweepConfig> out;
    for (auto method : methods) {
      SweepConfig cfg;
      cfg.method = method;
      cfg.steps = steps;
      cfg.half_range = half_range.value_or(default_half_range);
      cfg.tail = tail;
      cfg.one_sided = one_sided;
      out.push_back(cfg);
    }
    return out;
  }

  void validate() const {
    if (steps < 3 || steps % 2 == 0)
      throw Error(ErrorCode::invalid_config, "steps must be an odd integer >= 3 (got " + std::to_string(steps) + ")");
    if (half_range && !(std::isfinite(*half_range) && *half_range > 0.0))
      throw Error(ErrorCode::invalid_config, "half_range must be positive, so the sweep step is > 0");
    if (!(sera_step > 0.0 && sera_step <= 0.5))
      throw Error(ErrorCode::invalid_config, "sera_step must lie in (0, 0.5]");
    if (methods.empty()) throw Error(ErrorCode::invalid_config, "at least one sweep method is required");
    if (!(center_quantile > 0.0 && center_quantile < 1.0))
      throw Error(ErrorCode::invalid_config, "center_quantile must lie in (0, 1)");
    if (threads == 0) throw Error(ErrorCode::invalid_config, "threads must be >= 1");
    if (relevance_source == RelevanceSource::file && !relevance_path)
      throw Error(ErrorCode::invalid_config, "relevance source 'file' needs a path");
    if (relevance_source == RelevanceSource::inline_points && relevance_points.size() < 2)
      throw Error(ErrorCode::invalid_config, "relevance source 'points' needs at least 2 points");
  }
};

namespace detail {

inline void reject_unknown(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::invalid_config, where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::invalid_config, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T config_value(const Json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::invalid_config, "bad value for '" + std::string(key) + "' in " + where);
  }
}

}  // namespace detail

inline RunConfig run_config_from_json(const Json& doc) {
  detail::reject_unknown(doc, {"relevance", "sweep", "sera_step", "seed", "threads", "inputs", "output_dir"}, "config");
  RunConfig cfg;
  if (doc.contains("relevance")) {
    const auto& rel = doc["relevance"];
    detail::reject_unknown(rel, {"source", "path", "points", "center_quantile"}, "config.relevance");
    if (rel.contains("source")) {
      const auto src = detail::config_value<std::string>(rel, "source", "config.relevance");
      if (src == "auto") cfg.relevance_source = RelevanceSource::automatic;
      else if (src == "file") cfg.relevance_source = RelevanceSource::file;
      else if (src == "points") cfg.relevance_source = RelevanceSource::inline_points;
      else throw Error(ErrorCode::invalid_config, "relevance source must be auto, file or points");
    }
    if (rel.contains("path")) cfg.relevance_path = detail::config_value<std::string>(rel, "path", "config.relevance");
    if (rel.contains("points")) {
      try {
        cfg.relevance_points = points_from_json(Json{{"points", rel["points"]}});
      } catch (const Error& e) {
        throw Error(ErrorCode::invalid_config, std::string("config.relevance.points: ") + e.what());
      }
    }
    if (rel.contains("center_quantile"))
      cfg.center_quantile = detail::config_value<double>(rel, "center_quantile", "config.relevance");
  }
  if (doc.contains("sweep")) {
    const auto& sw = doc["sweep"];
    detail::reject_unknown(sw, {"methods", "steps", "half_range", "tail", "one_sided"}, "config.sweep");
    if (sw.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : detail::config_value<std::vector<std::string>>(sw, "methods", "config.sweep")) {
        try {
          cfg.methods.push_back(parse_method(m));
        } catch (const Error& e) {
          throw Error(ErrorCode::invalid_config, e.what());
        }
      }
    }
    if (sw.contains("steps")) cfg.steps = detail::config_value<int>(sw, "steps", "config.sweep");
    if (sw.contains("half_range") && !sw["half_range"].is_null())
      cfg.half_range = detail::config_value<double>(sw, "half_range", "config.sweep");
    if (sw.contains("tail") && !sw["tail"].is_null()) {
      try {
        cfg.tail = parse_tail(detail::config_value<std::string>(sw, "tail", "config.sweep"));
      } catch (const Error& e) {
        throw Error(ErrorCode::invalid_config, e.what());
      }
    }
    if (sw.contains("one_sided")) cfg.one_sided = detail::config_value<bool>(sw, "one_sided", "config.sweep");
  }
  if (doc.contains("sera_step")) cfg.sera_step = detail::config_value<double>(doc, "sera_step", "config");
  if (doc.contains("seed")) cfg.seed = detail::config_value<std::uint64_t>(doc, "seed", "config");
  if (doc.contains("threads")) cfg.threads = detail::config_value<std::size_t>(doc, "threads", "config");
  if (doc.contains("inputs")) {
    const auto& in = doc["inputs"];
    detail::reject_unknown(in, {"data", "target", "predictions"}, "config.inputs");
    if (in.contains("data")) cfg.data_path = detail::config_value<std::string>(in, "data", "config.inputs");
    if (in.contains("target")) cfg.target = detail::config_value<std::string>(in, "target", "config.inputs");
    if (in.contains("predictions"))
      cfg.predictions_path = detail::config_value<std::string>(in, "predictions", "config.inputs");
  }
  if (doc.contains("output_dir")) cfg.output_dir = detail::config_value<std::string>(doc, "output_dir", "config");
  cfg.validate();
  return cfg;
}

inline RunConfig read_run_config(const std::filesystem::path& path) {
  return run_config_from_json(parse_json(detail::read_file(path), path.string()));
}

}  // namespace relevo
