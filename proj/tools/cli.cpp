#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tubekit/eval.hpp"
#include "tubekit/io.hpp"
#include "tubekit/loss.hpp"
#include "tubekit/medial.hpp"
#include "tubekit/postprocess.hpp"
#include "tubekit/synthetic.hpp"

namespace tubekit::cli {
namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string in, gt, det, out, report, pr_out, hist_prefix, traj_out, image_id;
  std::string format = "canonical-jsonl";
  std::string ctw_layout = "absolute";
  std::string mode = "soft-box";
  std::string axis_method = "voronoi";
  double iou = 0.5;
  double alpha = 0.5;
  std::optional<double> sigma_abs;
  double sigma_tan = 0.5;
  std::size_t samples = 100;
  std::size_t points = 5;
  std::size_t cap_segments = 8;
  std::uint64_t seed = 0;
  double decay_sigma = 0.5;
  double score_floor = 0.001;
  std::size_t trials = 100;
  double fd_step = 1e-5;
  double max_rel_error = 1e-4;
  bool symmetric = false;
  bool normalize = false;
  std::size_t cases = 20;
  std::size_t iters = 500;
  double step = 1.0;
  double vertex_noise = 0.5;
  double radius_jitter = 0.3;
  double min_success = 0.9;
  double success_iou = 0.9;
  std::optional<double> precision, recall;
  bool strict = false;
};

// ---------------------------------------------------------------------------
// Helpers

MedialConfig medial_config(const Options& o) {
  MedialConfig c;
  c.n_points = o.points;
  c.cap_segments = o.cap_segments;
  c.radius_samples = o.samples;
  if (o.axis_method == "paired") c.method = AxisMethod::paired;
  if (o.axis_method == "auto") c.method = AxisMethod::automatic;
  c.validate();
  return c;
}

LossConfig loss_config(const Options& o) {
  LossConfig c;
  c.alpha = o.alpha;
  c.sigma_abs = o.sigma_abs;
  c.sigma_tan = o.sigma_tan;
  c.n_samples = o.samples;
  c.n_points = o.points;
  c.symmetric = o.symmetric;
  c.normalize_by_radius = o.normalize;
  c.validate();
  return c;
}

json medial_json(const MedialConfig& c) {
  return {{"n_points", c.n_points},
          {"boundary_sample_spacing", c.boundary_sample_spacing ? json(*c.boundary_sample_spacing) : json("auto")},
          {"prune_clearance_fraction", c.prune_clearance_fraction},
          {"cap_segments", c.cap_segments},
          {"radius_samples", c.radius_samples},
          {"axis_method", c.method == AxisMethod::voronoi  ? "voronoi"
                          : c.method == AxisMethod::paired ? "paired"
                                                           : "auto"}};
}

json loss_json(const LossConfig& c) {
  return {{"alpha", c.alpha},
          {"sigma_abs", c.sigma_abs ? json(*c.sigma_abs) : json("gt_radius")},
          {"sigma_tan", c.sigma_tan},
          {"n_samples", c.n_samples},
          {"n_points", c.n_points},
          {"term_weights", c.term_weights},
          {"symmetric", c.symmetric},
          {"normalize_by_radius", c.normalize_by_radius}};
}

json rejects_json(const std::vector<Reject>& rejects) {
  json arr = json::array();
  for (const Reject& r : rejects) arr.push_back({{"line", r.line}, {"reason", r.reason}, {"raw", r.raw}});
  return arr;
}

json histogram_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

// Writes the report to --out when given, otherwise to stdout.
void emit(const json& report, const Options& o, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    open_out(o.out) << text;
  }
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Large vertex noise can fold the axis; such draws are replaced.
Tube draw_perturbed(synthetic::Rng& rng, const Tube& gt, double vertex_noise, double radius_jitter) {
  for (int attempt = 0;; ++attempt) {
    try {
      return synthetic::perturb_tube(rng, gt, vertex_noise, radius_jitter);
    } catch (const GeometryError&) {
      if (attempt == 1000) throw DataError("could not draw a non-self-intersecting perturbation");
    }
  }
}

LoadOptions load_options(const Options& o) {
  LoadOptions lo;
  lo.ctw_layout = o.ctw_layout == "bbox-offset" ? CtwLayout::bbox_offset : CtwLayout::absolute;
  if (!o.image_id.empty()) lo.image_id = o.image_id;
  lo.strict = o.strict;
  return lo;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_fit(const Options& o, std::ostream& out) {
  const MedialConfig mcfg = medial_config(o);
  AnnotationSet set = load_annotations(o.in, parse_annotation_format(o.format), load_options(o));
  std::ofstream tubes = open_out(o.out);
  std::vector<Reject> rejects = set.rejects;
  std::size_t n_tubes = 0;
  double iou_sum = 0.0;
  for (const AnnotationRecord& r : set.records) {
    try {
      const Polygon poly(r.polygon);
      const Tube tube = fit_tube(poly, mcfg);
      iou_sum += polygon_iou(tube_envelope(tube, mcfg.cap_segments), poly);
      write_tube_record(tubes, r.image_id, tube);
      ++n_tubes;
    } catch (const std::exception& e) {
      rejects.push_back({0, std::string("fit failed for image '") + r.image_id + "': " + e.what(), ""});
    }
  }
  json report;
  report["command"] = "fit";
  report["config"] = {{"format", o.format}, {"medial", medial_json(mcfg)}};
  report["n_records"] = set.records.size() + set.rejects.size();
  report["n_tubes"] = n_tubes;
  report["n_rejects"] = rejects.size();
  report["mean_envelope_iou"] = n_tubes ? json(iou_sum / static_cast<double>(n_tubes)) : json(nullptr);
  report["rejects"] = rejects_json(rejects);
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (!o.report.empty()) open_out(o.report) << text;
  return ok;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.precision || o.recall) {
    if (!o.precision || !o.recall) throw UsageError("--precision and --recall must be given together");
    json report;
    report["command"] = "eval";
    report["precision"] = *o.precision;
    report["recall"] = *o.recall;
    report["f"] = f_score(*o.precision, *o.recall);
    emit(report, o, out);
    return ok;
  }
  if (o.det.empty() || o.gt.empty()) throw UsageError("eval needs --det and --gt");
  const MedialConfig mcfg = medial_config(o);

  AnnotationSet gt_set = load_annotations(o.gt, parse_annotation_format(o.format), load_options(o));
  std::vector<std::string> warnings;
  std::vector<GroundTruthInstance> gts;
  for (const AnnotationRecord& r : gt_set.records) {
    Polygon poly(r.polygon);
    try {
      gts.push_back(make_ground_truth(r.image_id, poly, mcfg));
    } catch (const std::exception& e) {
      warnings.push_back("ground truth on image '" + r.image_id + "' could not be fitted (" + e.what() +
                         "); labelled straight");
      gts.push_back({r.image_id, std::move(poly), Curvature::straight});
    }
  }
  if (gts.empty()) throw EvalError("no valid ground-truth instances in " + o.gt);

  DetectionSet det_set = load_detections(o.det, o.strict);
  std::vector<PolygonDetection> dets;
  for (std::size_t i = 0; i < det_set.records.size(); ++i) {
    const DetectionRecord& d = det_set.records[i];
    try {
      dets.push_back({d.image_id, detection_polygon(d, mcfg.cap_segments), d.score});
    } catch (const std::exception& e) {
      throw DataError("detection " + std::to_string(i) + " on image '" + d.image_id + "': " + e.what());
    }
  }

  MatchResult match = match_detections(dets, gts, o.iou);
  for (std::string& w : match.warnings) warnings.push_back(std::move(w));
  const EvalReport r = pr_curve(match.labels, gts.size());

  auto recall_for = [&](Curvature c) -> std::optional<double> {
    try {
      return subset_recall(dets, gts, c, o.iou);
    } catch (const EvalError&) {
      return std::nullopt;
    }
  };
  const auto n_curved = static_cast<std::size_t>(
      std::count_if(gts.begin(), gts.end(), [](const GroundTruthInstance& g) { return g.subset == Curvature::curved; }));

  json report;
  report["command"] = "eval";
  report["config"] = {{"iou_threshold", o.iou}, {"gt_format", o.format}, {"medial", medial_json(mcfg)}};
  report["n_gt"] = r.n_gt;
  report["n_det"] = r.n_det;
  report["n_gt_curved"] = n_curved;
  report["n_gt_straight"] = gts.size() - n_curved;
  report["average_precision"] = r.average_precision;
  report["max_f"] = r.max_f;
  report["precision_at_max_f"] = r.p_at_max_f;
  report["recall_at_max_f"] = r.r_at_max_f;
  report["recall_max"] = r.pr_points.empty() ? 0.0 : r.pr_points.back().recall;
  report["subset_recall"] = {{"curved", nullable(recall_for(Curvature::curved))},
                             {"straight", nullable(recall_for(Curvature::straight))}};
  report["warnings"] = warnings;
  report["rejects"] = {{"gt", rejects_json(gt_set.rejects)}, {"det", rejects_json(det_set.rejects)}};
  emit(report, o, out);

  const std::string pr_path = !o.pr_out.empty() ? o.pr_out : (o.out.empty() ? "" : sibling(o.out, ".pr.tsv"));
  if (!pr_path.empty()) {
    std::ofstream t = open_out(pr_path);
    t << "rank\tscore\tprecision\trecall\n";
    for (std::size_t i = 0; i < r.pr_points.size(); ++i) {
      const PrPoint& p = r.pr_points[i];
      t << i + 1 << '\t' << fmt(p.score) << '\t' << fmt(p.precision) << '\t' << fmt(p.recall) << '\n';
    }
  }
  return ok;
}

int cmd_nms(const Options& o, std::ostream& out) {
  DetectionSet set = load_detections(o.det, o.strict);
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < set.records.size(); ++i) by_image[set.records[i].image_id].push_back(i);

  std::vector<DetectionRecord> kept;
  if (o.mode == "soft-box") {
    SoftNmsConfig cfg{o.iou, o.decay_sigma, o.score_floor};
    for (const auto& [image, idx] : by_image) {
      std::vector<BoxDetection> boxes;
      for (std::size_t i : idx) {
        DetectionRecord& d = set.records[i];
        if (!d.box) {
          const BoundingBox b = detection_polygon(d, o.cap_segments).bounds();
          d.box = {b.min.x, b.min.y, b.max.x, b.max.y};
        }
        boxes.push_back({{(*d.box)[0], (*d.box)[1], (*d.box)[2], (*d.box)[3]}, d.score, i});
      }
      for (const BoxDetection& b : soft_nms(std::move(boxes), cfg)) {
        DetectionRecord d = set.records[b.id];
        d.score = b.score;
        kept.push_back(std::move(d));
      }
    }
  } else {
    for (const auto& [image, idx] : by_image) {
      std::vector<TubeDetection> tubes;
      for (std::size_t i : idx) {
        const DetectionRecord& d = set.records[i];
        if (!d.tube) {
          throw DataError("hard-tube NMS needs tube records; detection " + std::to_string(i) + " on image '" +
                          image + "' has no tube/radius");
        }
        tubes.push_back({*d.tube, d.score, image, i});
      }
      try {
        for (const TubeDetection& t : polygonal_nms(std::move(tubes), o.iou, o.cap_segments)) {
          kept.push_back(set.records[t.id]);
        }
      } catch (const NmsError& e) {
        throw DataError(e.what());
      }
    }
  }
  std::ofstream f = open_out(o.out);
  write_detections(f, kept);

  json report;
  report["command"] = "nms";
  report["config"] = {{"mode", o.mode},
                      {"iou_threshold", o.iou},
                      {"decay_sigma", o.decay_sigma},
                      {"score_floor", o.score_floor},
                      {"cap_segments", o.cap_segments}};
  report["n_in"] = set.records.size();
  report["n_out"] = kept.size();
  report["rejects"] = rejects_json(set.rejects);
  out << report.dump(2) << "\n";
  return ok;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const MedialConfig mcfg = medial_config(o);
  AnnotationSet set = load_annotations(o.in, parse_annotation_format(o.format), load_options(o));
  const DatasetStats s = dataset_stats(set.records, mcfg);
  json report;
  report["command"] = "stats";
  report["config"] = {{"format", o.format}, {"curvature_threshold", 0.1}, {"medial", medial_json(mcfg)}};
  report["n_instances"] = s.n_instances;
  report["n_curved"] = s.n_curved;
  report["n_straight"] = s.n_straight;
  report["n_failed"] = s.n_failed;
  report["n_rejects"] = set.rejects.size();
  report["curvature_histogram"] = histogram_json(s.curvature_histogram);
  report["radius_variation_histogram"] = histogram_json(s.radius_variation_histogram);
  report["rejects"] = rejects_json(set.rejects);
  emit(report, o, out);

  const std::string prefix = !o.hist_prefix.empty() ? o.hist_prefix : (o.out.empty() ? "" : sibling(o.out, ""));
  if (!prefix.empty()) {
    auto write = [&](const Histogram& h, const std::string& suffix) {
      std::ofstream t = open_out(prefix + suffix);
      t << "bin_lo\tbin_hi\tcount\n";
      for (std::size_t i = 0; i < h.counts.size(); ++i) {
        t << fmt(h.edges[i]) << '\t' << fmt(h.edges[i + 1]) << '\t' << h.counts[i] << '\n';
      }
    };
    write(s.curvature_histogram, ".curvature.tsv");
    write(s.radius_variation_histogram, ".variation.tsv");
  }
  return ok;
}

double relative_error(const TubeGradient& analytic, const FrozenTubeObjective& obj, std::vector<Point2> pts,
                      double radius, double h) {
  double diff2 = 0.0;
  double a2 = 0.0;
  double fd2 = 0.0;
  auto accumulate = [&](double a, double fd) {
    diff2 += (a - fd) * (a - fd);
    a2 += a * a;
    fd2 += fd * fd;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (double Point2::*c : {&Point2::x, &Point2::y}) {
      const double saved = pts[i].*c;
      pts[i].*c = saved + h;
      const double up = obj.value(pts, radius);
      pts[i].*c = saved - h;
      const double down = obj.value(pts, radius);
      pts[i].*c = saved;
      accumulate(analytic.d_points[i].*c, (up - down) / (2.0 * h));
    }
  }
  accumulate(analytic.d_radius, (obj.value(pts, radius + h) - obj.value(pts, radius - h)) / (2.0 * h));
  const double scale = std::max({std::sqrt(a2), std::sqrt(fd2), 1e-12});
  return std::sqrt(diff2) / scale;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  const LossConfig cfg = loss_config(o);
  synthetic::Rng rng(o.seed);
  std::vector<double> errors;
  std::size_t skipped = 0;
  const std::size_t max_attempts = 100 * o.trials;
  for (std::size_t attempt = 0; errors.size() < o.trials && attempt < max_attempts; ++attempt) {
    const Tube gt = synthetic::random_tube(rng, o.points);
    const Tube pred = draw_perturbed(rng, gt, 0.5, 0.3);
    // Stay clear of kinks by a margin well above the difference step.
    const TubeGradient g = grad_loss_tube(pred, gt, cfg, 1e-4);
    if (!g.smooth) {
      ++skipped;
      continue;
    }
    const FrozenTubeObjective obj(pred, gt, cfg);
    errors.push_back(relative_error(g, obj, pred.axis().points(), pred.radius(), o.fd_step));
  }
  if (errors.size() < o.trials) throw DataError("could not draw enough smooth configurations");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const double max_err = sorted.back();
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const bool pass = max_err <= o.max_rel_error;

  json report;
  report["command"] = "gradcheck";
  report["config"] = {{"seed", o.seed},
                      {"trials", o.trials},
                      {"fd_step", o.fd_step},
                      {"max_relative_error_allowed", o.max_rel_error},
                      {"vertex_noise", 0.5},
                      {"radius_jitter", 0.3},
                      {"loss", loss_json(cfg)}};
  report["trials"] = n;
  report["skipped_nonsmooth"] = skipped;
  report["max_relative_error"] = max_err;
  report["median_relative_error"] = median;
  report["pass"] = pass;
  emit(report, o, out);
  return pass ? ok : acceptance_failure;
}

int cmd_demofit(const Options& o, std::ostream& out) {
  const LossConfig cfg = loss_config(o);
  const MedialConfig mcfg = medial_config(o);
  synthetic::Rng rng(o.seed);
  json cases = json::array();
  std::ostringstream traj;
  traj << "case\titeration\tloss\n";
  std::size_t successes = 0;
  for (std::size_t c = 0; c < o.cases; ++c) {
    const Tube gt = synthetic::random_tube(rng, o.points);
    const Tube init = draw_perturbed(rng, gt, o.vertex_noise, o.radius_jitter);
    const DescentResult res = fit_tube_descent(init, gt, cfg, o.iters, o.step);
    const Polygon gt_env = tube_envelope(gt, mcfg.cap_segments);
    const double iou0 = polygon_iou(tube_envelope(init, mcfg.cap_segments), gt_env);
    const double iou = polygon_iou(tube_envelope(res.tube, mcfg.cap_segments), gt_env);
    const bool success = iou >= o.success_iou;
    successes += success;
    cases.push_back({{"case", c},
                     {"initial_iou", iou0},
                     {"final_iou", iou},
                     {"initial_loss", res.initial_loss},
                     {"final_loss", res.trajectory.empty() ? res.initial_loss : res.trajectory.back()},
                     {"iterations", res.iterations},
                     {"stop", to_string(res.stop)},
                     {"success", success}});
    for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
      traj << c << '\t' << i + 1 << '\t' << fmt(res.trajectory[i]) << '\n';
    }
  }
  const double fraction = o.cases ? static_cast<double>(successes) / static_cast<double>(o.cases) : 0.0;
  const bool pass = fraction >= o.min_success;

  json report;
  report["command"] = "demofit";
  report["config"] = {{"seed", o.seed},
                      {"cases", o.cases},
                      {"max_iterations", o.iters},
                      {"initial_step", o.step},
                      {"vertex_noise", o.vertex_noise},
                      {"radius_jitter", o.radius_jitter},
                      {"success_iou", o.success_iou},
                      {"min_success", o.min_success},
                      {"cap_segments", mcfg.cap_segments},
                      {"loss", loss_json(cfg)}};
  report["n_cases"] = o.cases;
  report["n_success"] = successes;
  report["success_fraction"] = fraction;
  report["pass"] = pass;
  report["cases"] = cases;
  emit(report, o, out);

  const std::string path = !o.traj_out.empty() ? o.traj_out : (o.out.empty() ? "" : sibling(o.out, ".trajectory.tsv"));
  if (!path.empty()) open_out(path) << traj.str();
  return pass ? ok : acceptance_failure;
}

// ---------------------------------------------------------------------------
// Option wiring

void add_medial(CLI::App* app, Options& o) {
  app->add_option("--points", o.points, "Medial points per tube")->check(CLI::Range(4, 1000));
  app->add_option("--samples", o.samples, "Arc-length samples for radius and loss estimates")
      ->check(CLI::Range(2, 100000));
  app->add_option("--cap-segments", o.cap_segments, "Chords per envelope end cap")->check(CLI::Range(1, 1024));
  app->add_option("--axis-method", o.axis_method, "Medial axis construction")
      ->check(CLI::IsMember({"voronoi", "paired", "auto"}));
}

void add_format(CLI::App* app, Options& o) {
  app->add_option("--format", o.format, "Annotation format")
      ->check(CLI::IsMember({"canonical-jsonl", "ctw-raw", "totaltext-raw"}));
  app->add_option("--ctw-layout", o.ctw_layout, "Coordinate layout of ctw-raw lines")
      ->check(CLI::IsMember({"absolute", "bbox-offset"}));
  app->add_option("--image-id", o.image_id, "Image id for raw formats (default: file stem)");
  app->add_flag("--strict", o.strict, "Fail on the first malformed line instead of rejecting it");
}

void add_loss(CLI::App* app, Options& o) {
  app->add_option("--alpha", o.alpha, "Weight of the distance kernel in the axis term")->check(CLI::Range(0.0, 1.0));
  app->add_option("--sigma-abs", o.sigma_abs, "Distance kernel width in pixels (default: gt radius)")
      ->check(CLI::PositiveNumber);
  app->add_option("--sigma-tan", o.sigma_tan, "Tangent kernel width")->check(CLI::PositiveNumber);
  app->add_option("--samples", o.samples, "Arc-length samples per chain")->check(CLI::Range(2, 100000));
  app->add_option("--points", o.points, "Medial points per tube")->check(CLI::Range(4, 1000));
  app->add_flag("--symmetric", o.symmetric, "Average the axis similarity over both directions");
  app->add_flag("--normalize", o.normalize, "Divide pixel-valued terms by the gt radius");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fit, score and post-process tube parametrizations of text instances", "tubekit"};
  app.require_subcommand(1);

  CLI::App* fit = app.add_subcommand("fit", "Fit a tube to every annotation polygon");
  fit->add_option("--in", o.in, "Annotation file")->required();
  fit->add_option("--out", o.out, "Output tube file (JSONL)")->required();
  fit->add_option("--report", o.report, "Also write the summary here");
  add_format(fit, o);
  add_medial(fit, o);

  CLI::App* eval = app.add_subcommand("eval", "Score detections under the polygonal VOC protocol");
  eval->add_option("--det", o.det, "Detection file (JSONL)");
  eval->add_option("--gt", o.gt, "Ground-truth annotation file");
  eval->add_option("--iou", o.iou, "Match threshold (strict)")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--out", o.out, "Report path (default: stdout)");
  eval->add_option("--pr-out", o.pr_out, "PR table path (default: <out>.pr.tsv)");
  eval->add_option("--precision", o.precision, "Only compute F from this precision")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--recall", o.recall, "Only compute F from this recall")->check(CLI::Range(0.0, 1.0));
  add_format(eval, o);
  add_medial(eval, o);

  CLI::App* nms = app.add_subcommand("nms", "Suppress overlapping detections per image");
  nms->add_option("--det", o.det, "Detection file (JSONL)")->required();
  nms->add_option("--out", o.out, "Filtered detection file")->required();
  nms->add_option("--mode", o.mode, "soft-box or hard-tube")->check(CLI::IsMember({"soft-box", "hard-tube"}));
  nms->add_option("--iou", o.iou, "Overlap threshold")->check(CLI::Range(0.0, 1.0));
  nms->add_option("--decay-sigma", o.decay_sigma, "Gaussian decay parameter")->check(CLI::PositiveNumber);
  nms->add_option("--score-floor", o.score_floor, "Drop soft-NMS detections below this")
      ->check(CLI::Range(0.0, 1.0));
  nms->add_option("--cap-segments", o.cap_segments, "Chords per envelope end cap")->check(CLI::Range(1, 1024));
  nms->add_flag("--strict", o.strict, "Fail on the first malformed line");

  CLI::App* stats = app.add_subcommand("stats", "Curvature and radius-variation statistics");
  stats->add_option("--in", o.in, "Annotation file")->required();
  stats->add_option("--out", o.out, "Report path (default: stdout)");
  stats->add_option("--hist-prefix", o.hist_prefix, "Histogram tables prefix (default: from --out)");
  add_format(stats, o);
  add_medial(stats, o);

  CLI::App* grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference loss gradients");
  grad->add_option("--seed", o.seed, "Random seed");
  grad->add_option("--trials", o.trials, "Number of configurations")->check(CLI::Range(1, 1000000));
  grad->add_option("--fd-step", o.fd_step, "Central difference step")->check(CLI::PositiveNumber);
  grad->add_option("--max-rel-error", o.max_rel_error, "Failure threshold")->check(CLI::PositiveNumber);
  grad->add_option("--out", o.out, "Report path (default: stdout)");
  add_loss(grad, o);

  CLI::App* demo = app.add_subcommand("demofit", "Fit perturbed synthetic tubes back by loss descent");
  demo->add_option("--seed", o.seed, "Random seed");
  demo->add_option("--cases", o.cases, "Number of perturbed tubes")->check(CLI::Range(1, 1000000));
  demo->add_option("--iters", o.iters, "Iteration budget per case");
  demo->add_option("--step", o.step, "Initial step length")->check(CLI::PositiveNumber);
  demo->add_option("--vertex-noise", o.vertex_noise, "Vertex displacement, in radii")
      ->check(CLI::NonNegativeNumber);
  demo->add_option("--radius-jitter", o.radius_jitter, "Relative radius perturbation")->check(CLI::Range(0.0, 0.99));
  demo->add_option("--success-iou", o.success_iou, "Envelope IoU counted as success")->check(CLI::Range(0.0, 1.0));
  demo->add_option("--min-success", o.min_success, "Required success fraction")->check(CLI::Range(0.0, 1.0));
  demo->add_option("--cap-segments", o.cap_segments, "Chords per envelope end cap")->check(CLI::Range(1, 1024));
  demo->add_option("--out", o.out, "Report path (default: stdout)");
  demo->add_option("--trajectories", o.traj_out, "Loss trajectory table (default: <out>.trajectory.tsv)");
  add_loss(demo, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (*fit) return cmd_fit(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*nms) return cmd_nms(o, out);
    if (*stats) return cmd_stats(o, out);
    if (*grad) return cmd_gradcheck(o, out);
    if (*demo) return cmd_demofit(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return data_error;
  }
  return usage_error;
}

}  // namespace tubekit::cli
