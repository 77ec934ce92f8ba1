#pragma once

// Minimal structural validator for the CLI's JSON outputs. A schema is a tree
// of type expectations; objects list their exact key set.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace schema {

using json = nlohmann::json;

struct Node;
using Ptr = std::shared_ptr<const Node>;

struct Node {
  std::function<bool(const json&)> type_ok;
  std::string type_name;
  std::map<std::string, Ptr> fields;  // objects only
  Ptr items;                          // arrays only
  std::size_t exact_size = 0;         // arrays only, 0 = any
  bool object = false;
};

inline Ptr leaf(std::string name, std::function<bool(const json&)> ok) {
  auto n = std::make_shared<Node>();
  n->type_ok = std::move(ok);
  n->type_name = std::move(name);
  return n;
}

inline Ptr number() { return leaf("number", [](const json& j) { return j.is_number(); }); }
inline Ptr unsigned_int() { return leaf("unsigned integer", [](const json& j) { return j.is_number_unsigned(); }); }
inline Ptr string() { return leaf("string", [](const json& j) { return j.is_string(); }); }
inline Ptr boolean() { return leaf("boolean", [](const json& j) { return j.is_boolean(); }); }
inline Ptr unit() {
  return leaf("number in [0, 1]", [](const json& j) { return j.is_number() && j.get<double>() >= 0 && j.get<double>() <= 1; });
}
inline Ptr nullable_unit() {
  return leaf("null or number in [0, 1]",
              [](const json& j) { return j.is_null() || (j.is_number() && j.get<double>() >= 0 && j.get<double>() <= 1); });
}
inline Ptr number_or_string() { return leaf("number or string", [](const json& j) { return j.is_number() || j.is_string(); }); }
inline Ptr anything() { return leaf("any", [](const json&) { return true; }); }

inline Ptr array(Ptr items, std::size_t exact_size = 0) {
  auto n = std::make_shared<Node>();
  n->type_ok = [](const json& j) { return j.is_array(); };
  n->type_name = "array";
  n->items = std::move(items);
  n->exact_size = exact_size;
  return n;
}

inline Ptr object(std::map<std::string, Ptr> fields) {
  auto n = std::make_shared<Node>();
  n->type_ok = [](const json& j) { return j.is_object(); };
  n->type_name = "object";
  n->fields = std::move(fields);
  n->object = true;
  return n;
}

inline void check(const json& j, const Ptr& s, const std::string& path, std::vector<std::string>& errors) {
  if (!s->type_ok(j)) {
    errors.push_back(path + ": expected " + s->type_name + ", got " + j.dump());
    return;
  }
  if (s->object) {
    for (const auto& [key, sub] : s->fields) {
      if (!j.contains(key)) {
        errors.push_back(path + ": missing '" + key + "'");
      } else {
        check(j[key], sub, path + "." + key, errors);
      }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!s->fields.count(it.key())) errors.push_back(path + ": unexpected '" + it.key() + "'");
    }
  }
  if (s->items) {
    if (s->exact_size && j.size() != s->exact_size) errors.push_back(path + ": wrong array length");
    for (std::size_t i = 0; i < j.size(); ++i) check(j[i], s->items, path + "[" + std::to_string(i) + "]", errors);
  }
}

inline std::vector<std::string> validate(const json& j, const Ptr& s) {
  std::vector<std::string> errors;
  check(j, s, "$", errors);
  return errors;
}

// File schemas ---------------------------------------------------------------

inline Ptr point() { return array(number(), 2); }
inline Ptr points() { return array(point()); }

inline Ptr annotation_record() { return object({{"image_id", string()}, {"polygon", points()}}); }

inline Ptr tube_record() {
  return object({{"image_id", string()}, {"tube", object({{"points", points()}, {"radius", number()}})}});
}

inline Ptr tube_detection() {
  return object({{"image_id", string()}, {"score", unit()}, {"tube", object({{"points", points()}, {"radius", number()}})}});
}
inline Ptr tube_detection_with_box() {
  return object({{"image_id", string()},
                 {"score", unit()},
                 {"tube", object({{"points", points()}, {"radius", number()}})},
                 {"box", array(number(), 4)}});
}
inline Ptr polygon_detection() { return object({{"image_id", string()}, {"score", unit()}, {"polygon", points()}}); }
inline Ptr polygon_detection_with_box() {
  return object({{"image_id", string()}, {"score", unit()}, {"polygon", points()}, {"box", array(number(), 4)}});
}

inline Ptr rejects() { return array(object({{"line", unsigned_int()}, {"reason", string()}, {"raw", string()}})); }

inline Ptr medial_config() {
  return object({{"n_points", unsigned_int()},
                 {"boundary_sample_spacing", number_or_string()},
                 {"prune_clearance_fraction", number()},
                 {"cap_segments", unsigned_int()},
                 {"radius_samples", unsigned_int()},
                 {"axis_method", string()}});
}

inline Ptr loss_config() {
  return object({{"alpha", unit()},
                 {"sigma_abs", number_or_string()},
                 {"sigma_tan", number()},
                 {"n_samples", unsigned_int()},
                 {"n_points", unsigned_int()},
                 {"term_weights", array(number(), 4)},
                 {"symmetric", boolean()},
                 {"normalize_by_radius", boolean()}});
}

inline Ptr histogram() { return object({{"edges", array(number())}, {"counts", array(unsigned_int())}}); }

inline Ptr fit_report() {
  return object({{"command", string()},
                 {"config", object({{"format", string()}, {"medial", medial_config()}})},
                 {"n_records", unsigned_int()},
                 {"n_tubes", unsigned_int()},
                 {"n_rejects", unsigned_int()},
                 {"mean_envelope_iou", nullable_unit()},
                 {"rejects", rejects()}});
}

inline Ptr eval_report() {
  return object({{"command", string()},
                 {"config", object({{"iou_threshold", unit()}, {"gt_format", string()}, {"medial", medial_config()}})},
                 {"n_gt", unsigned_int()},
                 {"n_det", unsigned_int()},
                 {"n_gt_curved", unsigned_int()},
                 {"n_gt_straight", unsigned_int()},
                 {"average_precision", unit()},
                 {"max_f", unit()},
                 {"precision_at_max_f", unit()},
                 {"recall_at_max_f", unit()},
                 {"recall_max", unit()},
                 {"subset_recall", object({{"curved", nullable_unit()}, {"straight", nullable_unit()}})},
                 {"warnings", array(string())},
                 {"rejects", object({{"gt", rejects()}, {"det", rejects()}})}});
}

inline Ptr f_replay_report() {
  return object({{"command", string()}, {"precision", unit()}, {"recall", unit()}, {"f", unit()}});
}

inline Ptr nms_report() {
  return object({{"command", string()},
                 {"config", object({{"mode", string()},
                                    {"iou_threshold", unit()},
                                    {"decay_sigma", number()},
                                    {"score_floor", unit()},
                                    {"cap_segments", unsigned_int()}})},
                 {"n_in", unsigned_int()},
                 {"n_out", unsigned_int()},
                 {"rejects", rejects()}});
}

inline Ptr stats_report() {
  return object({{"command", string()},
                 {"config", object({{"format", string()}, {"curvature_threshold", number()}, {"medial", medial_config()}})},
                 {"n_instances", unsigned_int()},
                 {"n_curved", unsigned_int()},
                 {"n_straight", unsigned_int()},
                 {"n_failed", unsigned_int()},
                 {"n_rejects", unsigned_int()},
                 {"curvature_histogram", histogram()},
                 {"radius_variation_histogram", histogram()},
                 {"rejects", rejects()}});
}

inline Ptr gradcheck_report() {
  return object({{"command", string()},
                 {"config", object({{"seed", unsigned_int()},
                                    {"trials", unsigned_int()},
                                    {"fd_step", number()},
                                    {"max_relative_error_allowed", number()},
                                    {"vertex_noise", number()},
                                    {"radius_jitter", number()},
                                    {"loss", loss_config()}})},
                 {"trials", unsigned_int()},
                 {"skipped_nonsmooth", unsigned_int()},
                 {"max_relative_error", number()},
                 {"median_relative_error", number()},
                 {"pass", boolean()}});
}

inline Ptr demofit_report() {
  return object({{"command", string()},
                 {"config", object({{"seed", unsigned_int()},
                                    {"cases", unsigned_int()},
                                    {"max_iterations", unsigned_int()},
                                    {"initial_step", number()},
                                    {"vertex_noise", number()},
                                    {"radius_jitter", number()},
                                    {"success_iou", unit()},
                                    {"min_success", unit()},
                                    {"cap_segments", unsigned_int()},
                                    {"loss", loss_config()}})},
                 {"n_cases", unsigned_int()},
                 {"n_success", unsigned_int()},
                 {"success_fraction", unit()},
                 {"pass", boolean()},
                 {"cases", array(object({{"case", unsigned_int()},
                                         {"initial_iou", unit()},
                                         {"final_iou", unit()},
                                         {"initial_loss", number()},
                                         {"final_loss", number()},
                                         {"iterations", unsigned_int()},
                                         {"stop", string()},
                                         {"success", boolean()}}))}});
}

}  // namespace schema
