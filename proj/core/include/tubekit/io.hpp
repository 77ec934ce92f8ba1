#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/medial.hpp"
#include "tubekit/tube.hpp"

namespace tubekit {

/// Unreadable input or a record that violates its schema.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AnnotationFormat { canonical_jsonl, ctw_raw, totaltext_raw };

const char* to_string(AnnotationFormat f);
/// Accepts "canonical-jsonl", "ctw-raw", "totaltext-raw".
AnnotationFormat parse_annotation_format(const std::string& name);

enum class CtwLayout {
  absolute,    ///< 2k absolute coordinates
  bbox_offset  ///< xmin, ymin, xmax, ymax, then 2k offsets from (xmin, ymin)
};

struct AnnotationRecord {
  std::string image_id;
  std::vector<Point2> polygon;
  AnnotationFormat source_format = AnnotationFormat::canonical_jsonl;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

struct Reject {
  std::size_t line = 0;  ///< 1-based
  std::string reason;
  std::string raw;
};

struct LoadOptions {
  CtwLayout ctw_layout = CtwLayout::absolute;
  std::size_t ctw_vertices = 14;
  /// Image id for raw formats, which hold one image per file; defaults to the
  /// file name without extension.
  std::optional<std::string> image_id;
  /// Throw DataError on the first malformed line instead of rejecting it.
  bool strict = false;
};

struct AnnotationSet {
  std::vector<AnnotationRecord> records;
  std::vector<Reject> rejects;
};

/// Parse annotations. Lines that fail to parse or whose polygon is not a
/// valid simple polygon are collected as rejects (blank lines are skipped).
AnnotationSet read_annotations(std::istream& in, AnnotationFormat format, const LoadOptions& opts = {},
                               const std::string& default_image_id = "");
AnnotationSet load_annotations(const std::filesystem::path& path, AnnotationFormat format,
                               const LoadOptions& opts = {});

/// Canonical JSONL: {"image_id": ..., "polygon": [[x, y], ...]} per line.
/// Integral coordinates are written as integers.
void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records);

struct DetectionRecord {
  std::string image_id;
  double score = 0.0;
  /// Exactly one of tube and polygon is set.
  std::optional<Tube> tube;
  std::optional<std::vector<Point2>> polygon;
  /// Axis-aligned box used by box soft-NMS; derived from the shape if absent.
  std::optional<std::array<double, 4>> box;
};

struct DetectionSet {
  std::vector<DetectionRecord> records;
  std::vector<Reject> rejects;
};

DetectionSet read_detections(std::istream& in, bool strict = false);
DetectionSet load_detections(const std::filesystem::path& path, bool strict = false);
void write_detections(std::ostream& out, const std::vector<DetectionRecord>& records);

/// Polygon for evaluation: the polygon itself or the tube's envelope.
Polygon detection_polygon(const DetectionRecord& d, std::size_t cap_segments = 8);

/// {"image_id": ..., "tube": {"points": [...], "radius": r}} per line.
void write_tube_record(std::ostream& out, const std::string& image_id, const Tube& tube);

struct Histogram {
  std::vector<double> edges;  ///< counts.size() + 1 ascending edges
  std::vector<std::size_t> counts;

  /// Uniform bins over [lo, hi]; values outside are clamped into the end bins.
  static Histogram uniform(double lo, double hi, std::size_t bins);
  void add(double v);
  std::size_t total() const;
};

struct DatasetStats {
  std::size_t n_instances = 0;
  std::size_t n_curved = 0;
  std::size_t n_straight = 0;
  std::size_t n_failed = 0;
  Histogram curvature_histogram = Histogram::uniform(0.0, 1.5707963267948966, 16);
  Histogram radius_variation_histogram = Histogram::uniform(0.0, 1.0, 20);
};

/// Fit a tube to every record and histogram the largest segment-angle
/// difference and the radius variation. Records whose fit fails are counted
/// in n_failed and otherwise ignored.
DatasetStats dataset_stats(const std::vector<AnnotationRecord>& records, const MedialConfig& cfg = {});

}  // namespace tubekit
