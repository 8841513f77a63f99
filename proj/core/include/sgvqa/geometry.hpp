#pragma once

// Pinhole back-projection of 2D detections and rule-based spatial predicates.
//
// Camera convention: +x right, +y DOWN, +z forward (image convention). "above"
// therefore means a smaller y.

#include <span>
#include <string>
#include <vector>

#include "sgvqa/json_io.hpp"
#include "sgvqa/model.hpp"

namespace sgvqa {

struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  bool operator==(const CameraModel&) const = default;
};

struct DepthSample {
  int frame_index = 0;
  std::string object_id;
  double depth_z = 1.0;
};

struct Placement {
  Vec3 position;
  Extent2 extent;
};

void validate(const CameraModel& cam);

/// Box center (u, v) maps to ((u - cx) z / fx, (v - cy) z / fy, z); the box
/// size maps to a metric width/height at depth z. Throws InvalidArgumentError
/// for z <= 0 and ValidationError for an invalid box or camera.
Placement backproject(const Box2d& box, double depth_z, const CameraModel& cam);

/// For every ordered pair (a, b) with pair scale s = (diag(a) + diag(b)) / 2,
/// diag = hypotenuse of the metric extent, the first matching rule wins:
///
///   on           y_a < y_b, |dy| <= t.on_vertical s, |dxz| <= t.proximity s
///   above/below  |dy| > t.vertical s, |dxz| <= t.proximity s  (sign of dy)
///   behind/front |dz| > t.depth s, |dxy| <= t.proximity s     (sign of dz)
///   next_to      |d| <= t.proximity s and |dy| <= t.vertical s
///
/// `on` has no converse in the vocabulary: when (a, on, b) holds, the pair
/// (b, a) emits nothing. Output is in canonical (subject, predicate, target)
/// order. Fewer than two objects yields no relations. Throws ValidationError
/// naming the object when position3d or extent3d is missing.
std::vector<SpatialRelation> assign_spatial_predicates(std::span<const ObjectEntity> objects,
                                                       int frame_index,
                                                       const GeometryThresholds& t = {});

// --- perception file ------------------------------------------------------------

inline constexpr int kPerceptionSchemaVersion = 1;

struct Detection {
  std::string object_id;
  std::string label;
  double confidence = 0.0;
  Box2d box2d;
  double depth_z = 1.0;
  bool operator==(const Detection&) const = default;
};

struct PerceptionFrame {
  int frame_index = 0;
  std::vector<Detection> detections;
  bool operator==(const PerceptionFrame&) const = default;
};

/// Output of the external detector / depth / intrinsics models for one video.
struct PerceptionFile {
  int schema_version = kPerceptionSchemaVersion;
  std::string video_id;
  CameraModel camera;
  std::vector<PerceptionFrame> frames;

  const PerceptionFrame* frame(int frame_index) const;
  bool operator==(const PerceptionFile&) const = default;
};

void validate(const PerceptionFile& p);

void to_json(json& j, const CameraModel& v);
void from_json(const json& j, CameraModel& v);
void to_json(json& j, const Detection& v);
void from_json(const json& j, Detection& v);
void to_json(json& j, const PerceptionFrame& v);
void from_json(const json& j, PerceptionFrame& v);
void to_json(json& j, const PerceptionFile& v);
void from_json(const json& j, PerceptionFile& v);

}  // namespace sgvqa
