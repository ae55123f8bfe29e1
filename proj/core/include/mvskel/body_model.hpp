#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace mvskel {

inline constexpr int kJointCount = 15;

/// The fixed 15-joint set: 3 head/torso joints and 12 limb joints. Enum
/// values define the canonical index order used by every file format.
enum class JointId : int {
  Neck = 0,
  HeadTop = 1,
  BodyCenter = 2,
  ShoulderL = 3,
  ShoulderR = 4,
  ElbowL = 5,
  ElbowR = 6,
  WristL = 7,
  WristR = 8,
  HipL = 9,
  HipR = 10,
  KneeL = 11,
  KneeR = 12,
  AnkleL = 13,
  AnkleR = 14,
};

constexpr int joint_index(JointId j) { return static_cast<int>(j); }
JointId joint_from_index(int index);  // throws std::out_of_range

std::string_view joint_name(JointId j);
std::optional<JointId> joint_from_name(std::string_view name);

/// Left/right limb joint pairs, used by the detector-confusion injector.
const std::array<std::pair<JointId, JointId>, 6>& left_right_pairs();

struct Bone {
  JointId parent;
  JointId child;
};

/// The skeleton tree: 14 bones spanning all 15 joints, rooted at the neck,
/// with an explicit Neck-BodyCenter torso bone. Immutable once built.
class SkeletonTopology {
 public:
  static SkeletonTopology default_topology();

  JointId root() const { return root_; }
  const std::vector<Bone>& bones() const { return bones_; }
  int bone_count() const { return static_cast<int>(bones_.size()); }

  /// Children of `j` in bone-list order; empty for leaves.
  std::vector<JointId> children(JointId j) const;

  /// Parent joint, or nullopt for the root.
  std::optional<JointId> parent(JointId j) const;

  /// Index into bones() of the bone (parent(child), child), or -1.
  int bone_to_parent(JointId child) const;

  /// Index of the Neck-BodyCenter torso bone.
  int torso_bone() const { return torso_bone_; }

 private:
  SkeletonTopology(JointId root, std::vector<Bone> bones);

  JointId root_;
  std::vector<Bone> bones_;
  std::array<int, kJointCount> parent_bone_{};  // -1 for root
  int torso_bone_ = -1;
};

}  // namespace mvskel
