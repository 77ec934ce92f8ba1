#include "tubekit/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace tubekit {
namespace {

using json = nlohmann::ordered_json;

// Integral values are emitted as integers so that integer annotations survive
// a round trip textually unchanged.
json number(double v) {
  if (std::floor(v) == v && std::abs(v) < 9.0e15) return json(static_cast<std::int64_t>(v));
  return json(v);
}

json points_json(const std::vector<Point2>& pts) {
  json arr = json::array();
  for (const Point2& p : pts) arr.push_back(json::array({number(p.x), number(p.y)}));
  return arr;
}

std::vector<Point2> parse_points(const json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string(what) + " must be an array of [x, y] pairs");
  std::vector<Point2> pts;
  pts.reserve(j.size());
  for (const json& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw DataError(std::string(what) + " must be an array of [x, y] pairs");
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw DataError("unexpected field '" + it.key() + "'");
    }
  }
}

std::vector<Point2> pair_up(const std::vector<double>& v) {
  if (v.size() % 2 != 0) throw DataError("odd coordinate count (" + std::to_string(v.size()) + ")");
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < v.size(); i += 2) pts.push_back({v[i], v[i + 1]});
  return pts;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& separators) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) throw DataError("not a number: '" + token + "'");
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (separators.find(c) != std::string::npos || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

AnnotationRecord parse_canonical(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("record must be a JSON object");
  check_keys(j, {"image_id", "polygon"});
  if (!j.contains("image_id") || !j["image_id"].is_string()) throw DataError("missing string field 'image_id'");
  if (!j.contains("polygon")) throw DataError("missing field 'polygon'");
  return {j["image_id"].get<std::string>(), parse_points(j["polygon"], "polygon"),
          AnnotationFormat::canonical_jsonl};
}

AnnotationRecord parse_ctw(const std::string& line, const LoadOptions& opts, const std::string& image_id) {
  const std::vector<double> v = parse_number_list(line, ",");
  if (v.size() % 2 != 0) throw DataError("odd coordinate count (" + std::to_string(v.size()) + ")");
  const std::size_t coords = 2 * opts.ctw_vertices;
  AnnotationRecord r{image_id, {}, AnnotationFormat::ctw_raw};
  if (opts.ctw_layout == CtwLayout::absolute) {
    if (v.size() != coords) {
      throw DataError("expected " + std::to_string(coords) + " values, got " + std::to_string(v.size()));
    }
    r.polygon = pair_up(v);
  } else {
    if (v.size() != coords + 4) {
      throw DataError("expected " + std::to_string(coords + 4) + " values (box + offsets), got " +
                      std::to_string(v.size()));
    }
    const Point2 origin{v[0], v[1]};
    r.polygon = pair_up(std::vector<double>(v.begin() + 4, v.end()));
    for (Point2& p : r.polygon) p += origin;
  }
  return r;
}

AnnotationRecord parse_totaltext(const std::string& line, const std::string& image_id) {
  static const std::regex xs(R"(x\s*:\s*\[\[([^\]]*)\]\])");
  static const std::regex ys(R"(y\s*:\s*\[\[([^\]]*)\]\])");
  std::smatch mx;
  std::smatch my;
  if (!std::regex_search(line, mx, xs) || !std::regex_search(line, my, ys)) {
    throw DataError("expected 'x: [[...]]' and 'y: [[...]]' lists");
  }
  const std::vector<double> x = parse_number_list(mx[1].str(), ",");
  const std::vector<double> y = parse_number_list(my[1].str(), ",");
  if (x.size() != y.size()) {
    throw DataError("x and y lists differ in length (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
  }
  AnnotationRecord r{image_id, {}, AnnotationFormat::totaltext_raw};
  for (std::size_t i = 0; i < x.size(); ++i) r.polygon.push_back({x[i], y[i]});
  return r;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

const char* to_string(AnnotationFormat f) {
  switch (f) {
    case AnnotationFormat::canonical_jsonl:
      return "canonical-jsonl";
    case AnnotationFormat::ctw_raw:
      return "ctw-raw";
    case AnnotationFormat::totaltext_raw:
      return "totaltext-raw";
  }
  return "?";
}

AnnotationFormat parse_annotation_format(const std::string& name) {
  for (AnnotationFormat f : {AnnotationFormat::canonical_jsonl, AnnotationFormat::ctw_raw,
                             AnnotationFormat::totaltext_raw}) {
    if (name == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown annotation format '" + name + "'");
}

AnnotationSet read_annotations(std::istream& in, AnnotationFormat format, const LoadOptions& opts,
                               const std::string& default_image_id) {
  const std::string image_id = opts.image_id.value_or(default_image_id);
  AnnotationSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    AnnotationRecord r;
    try {
      switch (format) {
        case AnnotationFormat::canonical_jsonl:
          r = parse_canonical(line);
          break;
        case AnnotationFormat::ctw_raw:
          r = parse_ctw(line, opts, image_id);
          break;
        case AnnotationFormat::totaltext_raw:
          r = parse_totaltext(line, image_id);
          break;
      }
    } catch (const DataError& e) {
      if (opts.strict) throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      out.rejects.push_back({lineno, e.what(), line});
      continue;
    }
    if (r.polygon.size() < 3) {
      out.rejects.push_back({lineno, "polygon needs at least 3 vertices", line});
      continue;
    }
    try {
      Polygon check(r.polygon);
    } catch (const GeometryError& e) {
      out.rejects.push_back({lineno, e.what(), line});
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

AnnotationSet load_annotations(const std::filesystem::path& path, AnnotationFormat format, const LoadOptions& opts) {
  std::ifstream in = open(path);
  return read_annotations(in, format, opts, path.stem().string());
}

void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records) {
  for (const AnnotationRecord& r : records) {
    json j;
    j["image_id"] = r.image_id;
    j["polygon"] = points_json(r.polygon);
    out << j.dump() << '\n';
  }
}

DetectionSet read_detections(std::istream& in, bool strict) {
  DetectionSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
      }
      if (!j.is_object()) throw DataError("record must be a JSON object");
      check_keys(j, {"image_id", "score", "tube", "polygon", "box"});
      if (!j.contains("image_id") || !j["image_id"].is_string()) throw DataError("missing string field 'image_id'");
      if (!j.contains("score") || !j["score"].is_number()) throw DataError("missing numeric field 'score'");
      DetectionRecord d;
      d.image_id = j["image_id"].get<std::string>();
      d.score = j["score"].get<double>();
      if (!(d.score >= 0.0 && d.score <= 1.0)) throw DataError("score outside [0, 1]");
      if (j.contains("tube") == j.contains("polygon")) throw DataError("need exactly one of 'tube' and 'polygon'");
      if (j.contains("tube")) {
        const json& t = j["tube"];
        if (!t.is_object()) throw DataError("'tube' must be an object");
        check_keys(t, {"points", "radius"});
        if (!t.contains("points") || !t.contains("radius") || !t["radius"].is_number()) {
          throw DataError("'tube' needs 'points' and numeric 'radius'");
        }
        try {
          d.tube.emplace(PolyChain(parse_points(t["points"], "tube points")), t["radius"].get<double>());
        } catch (const GeometryError& e) {
          throw DataError(std::string("invalid tube: ") + e.what());
        }
      } else {
        d.polygon = parse_points(j["polygon"], "polygon");
        try {
          Polygon check(*d.polygon);
        } catch (const GeometryError& e) {
          throw DataError(std::string("invalid polygon: ") + e.what());
        }
      }
      if (j.contains("box")) {
        const json& b = j["box"];
        if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const json& v) {
              return v.is_number();
            })) {
          throw DataError("'box' must be [xmin, ymin, xmax, ymax]");
        }
        d.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        if (!((*d.box)[0] < (*d.box)[2] && (*d.box)[1] < (*d.box)[3])) throw DataError("'box' is empty");
      }
      out.records.push_back(std::move(d));
    } catch (const DataError& e) {
      if (strict) throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      out.rejects.push_back({lineno, e.what(), line});
    }
  }
  return out;
}

DetectionSet load_detections(const std::filesystem::path& path, bool strict) {
  std::ifstream in = open(path);
  return read_detections(in, strict);
}

void write_detections(std::ostream& out, const std::vector<DetectionRecord>& records) {
  for (const DetectionRecord& d : records) {
    json j;
    j["image_id"] = d.image_id;
    j["score"] = d.score;
    if (d.tube) {
      j["tube"] = {{"points", points_json(d.tube->axis().points())}, {"radius", number(d.tube->radius())}};
    } else if (d.polygon) {
      j["polygon"] = points_json(*d.polygon);
    }
    if (d.box) j["box"] = json::array({number((*d.box)[0]), number((*d.box)[1]), number((*d.box)[2]), number((*d.box)[3])});
    out << j.dump() << '\n';
  }
}

Polygon detection_polygon(const DetectionRecord& d, std::size_t cap_segments) {
  if (d.tube) return tube_envelope(*d.tube, cap_segments);
  if (d.polygon) return Polygon(*d.polygon);
  throw DataError("detection has neither tube nor polygon");
}

void write_tube_record(std::ostream& out, const std::string& image_id, const Tube& tube) {
  json j;
  j["image_id"] = image_id;
  j["tube"] = {{"points", points_json(tube.axis().points())}, {"radius", number(tube.radius())}};
  out << j.dump() << '\n';
}

Histogram Histogram::uniform(double lo, double hi, std::size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins));
  }
  return h;
}

void Histogram::add(double v) {
  const double lo = edges.front();
  const double hi = edges.back();
  const double pos = (v - lo) / (hi - lo) * static_cast<double>(counts.size());
  const auto bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(counts.size() - 1)));
  ++counts[bin];
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (std::size_t c : counts) n += c;
  return n;
}

DatasetStats dataset_stats(const std::vector<AnnotationRecord>& records, const MedialConfig& cfg) {
  DatasetStats s;
  for (const AnnotationRecord& r : records) {
    try {
      const Polygon poly(r.polygon);
      const TubeFit fit = fit_tube_detailed(poly, cfg);
      const double angle = max_segment_angle_difference(fit.tube.axis());
      const double variation = radius_variation(poly, fit.pruned_axis, cfg.radius_samples);
      if (classify_curvature(fit.tube.axis()) == Curvature::curved) {
        ++s.n_curved;
      } else {
        ++s.n_straight;
      }
      s.curvature_histogram.add(angle);
      s.radius_variation_histogram.add(variation);
      ++s.n_instances;
    } catch (const std::exception&) {
      ++s.n_failed;
    }
  }
  return s;
}

}  // namespace tubekit
