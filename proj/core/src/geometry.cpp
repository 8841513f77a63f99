#include "sgvqa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "sgvqa/errors.hpp"
#include "sgvqa/text.hpp"

namespace sgvqa {

namespace {

struct Body {
  Vec3 p;
  double diag = 0.0;
};

Body body_of(const ObjectEntity& o) {
  if (!o.position3d || !o.extent3d) {
    throw ValidationError("object " + o.object_id + " has no 3D position/extent");
  }
  return Body{*o.position3d, std::sqrt(o.extent3d->width * o.extent3d->width +
                                       o.extent3d->height * o.extent3d->height)};
}

bool rests_on(const Body& a, const Body& b, const GeometryThresholds& t) {
  const double s = 0.5 * (a.diag + b.diag);
  const double dx = a.p.x - b.p.x;
  const double dy = a.p.y - b.p.y;
  const double dz = a.p.z - b.p.z;
  return a.p.y < b.p.y && std::fabs(dy) <= t.on_vertical * s &&
         std::sqrt(dx * dx + dz * dz) <= t.proximity * s;
}

std::optional<Predicate> pair_predicate(const Body& a, const Body& b, const GeometryThresholds& t) {
  if (rests_on(a, b, t)) return Predicate::on;

  const double s = 0.5 * (a.diag + b.diag);
  const double dx = a.p.x - b.p.x;
  const double dy = a.p.y - b.p.y;
  const double dz = a.p.z - b.p.z;
  const double horiz_xz = std::sqrt(dx * dx + dz * dz);
  const double horiz_xy = std::sqrt(dx * dx + dy * dy);

  if (std::fabs(dy) > t.vertical * s && horiz_xz <= t.proximity * s) {
    return dy < 0 ? Predicate::above : Predicate::below;
  }
  if (std::fabs(dz) > t.depth * s && horiz_xy <= t.proximity * s) {
    return dz > 0 ? Predicate::behind : Predicate::in_front_of;
  }
  if (std::sqrt(dx * dx + dy * dy + dz * dz) <= t.proximity * s && std::fabs(dy) <= t.vertical * s) {
    return Predicate::next_to;
  }
  return std::nullopt;
}

}  // namespace

void validate(const CameraModel& cam) {
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
    throw ValidationError("camera focal lengths must be positive");
  }
  if (!std::isfinite(cam.cx) || !std::isfinite(cam.cy)) {
    throw ValidationError("camera principal point must be finite");
  }
}

Placement backproject(const Box2d& box, double depth_z, const CameraModel& cam) {
  if (!(depth_z > 0.0)) throw InvalidArgumentError("backproject: depth must be positive");
  validate(cam);
  if (!(box.x_min < box.x_max && box.y_min < box.y_max)) {
    throw ValidationError("backproject: degenerate box");
  }
  const double z = depth_z;
  return Placement{
      Vec3{(box.center_x() - cam.cx) * z / cam.fx, (box.center_y() - cam.cy) * z / cam.fy, z},
      Extent2{box.width() * z / cam.fx, box.height() * z / cam.fy}};
}

std::vector<SpatialRelation> assign_spatial_predicates(std::span<const ObjectEntity> objects,
                                                       int frame_index,
                                                       const GeometryThresholds& t) {
  std::vector<Body> bodies;
  bodies.reserve(objects.size());
  for (const auto& o : objects) bodies.push_back(body_of(o));

  std::vector<SpatialRelation> out;
  const std::size_t n = objects.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // (j, on, i) claims the pair; the supporting object gets nothing back.
      if (rests_on(bodies[j], bodies[i], t)) continue;
      if (auto p = pair_predicate(bodies[i], bodies[j], t)) {
        out.push_back(SpatialRelation{objects[i].object_id, *p, objects[j].object_id, frame_index});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- perception file ------------------------------------------------------------

const PerceptionFrame* PerceptionFile::frame(int frame_index) const {
  for (const auto& f : frames) {
    if (f.frame_index == frame_index) return &f;
  }
  return nullptr;
}

void validate(const PerceptionFile& p) {
  if (p.schema_version != kPerceptionSchemaVersion) {
    throw ValidationError("unsupported perception schema_version " +
                          std::to_string(p.schema_version));
  }
  validate(p.camera);
  std::set<int> seen_frames;
  for (const auto& f : p.frames) {
    if (f.frame_index < 0 || !seen_frames.insert(f.frame_index).second) {
      throw ValidationError("perception frame_index " + std::to_string(f.frame_index) +
                            " is negative or repeated");
    }
    std::set<std::string> ids;
    for (const auto& d : f.detections) {
      const std::string who = "detection " + d.object_id + " in frame " +
                              std::to_string(f.frame_index);
      if (d.object_id.empty() || !ids.insert(d.object_id).second) {
        throw ValidationError(who + ": empty or duplicate object_id");
      }
      if (normalize_label(d.label).empty()) throw ValidationError(who + ": empty label");
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        throw ValidationError(who + ": confidence outside [0,1]");
      }
      if (!(d.box2d.x_min < d.box2d.x_max && d.box2d.y_min < d.box2d.y_max)) {
        throw ValidationError(who + ": degenerate box2d");
      }
      if (!(d.depth_z > 0.0)) throw ValidationError(who + ": depth_z must be positive");
    }
  }
}

void to_json(json& j, const CameraModel& v) {
  j = json{{"fx", v.fx}, {"fy", v.fy}, {"cx", v.cx}, {"cy", v.cy}};
}

void from_json(const json& j, CameraModel& v) {
  j.at("fx").get_to(v.fx);
  j.at("fy").get_to(v.fy);
  j.at("cx").get_to(v.cx);
  j.at("cy").get_to(v.cy);
}

void to_json(json& j, const Detection& v) {
  j = json{{"object_id", v.object_id},
           {"label", v.label},
           {"confidence", v.confidence},
           {"box2d", v.box2d},
           {"depth_z", v.depth_z}};
}

void from_json(const json& j, Detection& v) {
  j.at("object_id").get_to(v.object_id);
  j.at("label").get_to(v.label);
  j.at("confidence").get_to(v.confidence);
  j.at("box2d").get_to(v.box2d);
  j.at("depth_z").get_to(v.depth_z);
}

void to_json(json& j, const PerceptionFrame& v) {
  j = json{{"frame_index", v.frame_index}, {"detections", v.detections}};
}

void from_json(const json& j, PerceptionFrame& v) {
  j.at("frame_index").get_to(v.frame_index);
  v.detections = j.value("detections", std::vector<Detection>{});
}

void to_json(json& j, const PerceptionFile& v) {
  j = json{{"schema_version", v.schema_version},
           {"video_id", v.video_id},
           {"camera", v.camera},
           {"frames", v.frames}};
}

void from_json(const json& j, PerceptionFile& v) {
  j.at("schema_version").get_to(v.schema_version);
  v.video_id = j.value("video_id", std::string{});
  j.at("camera").get_to(v.camera);
  j.at("frames").get_to(v.frames);
}

}  // namespace sgvqa
