#include "mvskel/body_model.hpp"

#include <stdexcept>
#include <string>

namespace mvskel {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "neck",       "head_top",   "body_center", "shoulder_l", "shoulder_r",
    "elbow_l",    "elbow_r",    "wrist_l",     "wrist_r",    "hip_l",
    "hip_r",      "knee_l",     "knee_r",      "ankle_l",    "ankle_r",
};

}  // namespace

JointId joint_from_index(int index) {
  if (index < 0 || index >= kJointCount) {
    throw std::out_of_range("joint index out of range: " + std::to_string(index));
  }
  return static_cast<JointId>(index);
}

std::string_view joint_name(JointId j) { return kJointNames[joint_index(j)]; }

std::optional<JointId> joint_from_name(std::string_view name) {
  for (int i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

const std::array<std::pair<JointId, JointId>, 6>& left_right_pairs() {
  static const std::array<std::pair<JointId, JointId>, 6> pairs = {{
      {JointId::ShoulderL, JointId::ShoulderR},
      {JointId::ElbowL, JointId::ElbowR},
      {JointId::WristL, JointId::WristR},
      {JointId::HipL, JointId::HipR},
      {JointId::KneeL, JointId::KneeR},
      {JointId::AnkleL, JointId::AnkleR},
  }};
  return pairs;
}

SkeletonTopology::SkeletonTopology(JointId root, std::vector<Bone> bones)
    : root_(root), bones_(std::move(bones)) {
  if (static_cast<int>(bones_.size()) != kJointCount - 1) {
    throw std::invalid_argument("skeleton topology must have 14 bones");
  }
  parent_bone_.fill(-1);
  std::array<bool, kJointCount> reached{};
  reached[joint_index(root_)] = true;
  // Bones are listed parent-first, so one pass establishes connectivity.
  for (int b = 0; b < static_cast<int>(bones_.size()); ++b) {
    const Bone& bone = bones_[b];
    const int p = joint_index(bone.parent);
    const int c = joint_index(bone.child);
    if (p == c) throw std::invalid_argument("bone joints must be distinct");
    if (!reached[p]) throw std::invalid_argument("bone list is not parent-first");
    if (reached[c]) throw std::invalid_argument("joint appears as a child twice");
    reached[c] = true;
    parent_bone_[c] = b;
    if ((bone.parent == JointId::Neck && bone.child == JointId::BodyCenter) ||
        (bone.parent == JointId::BodyCenter && bone.child == JointId::Neck)) {
      torso_bone_ = b;
    }
  }
  for (bool r : reached) {
    if (!r) throw std::invalid_argument("topology does not span all joints");
  }
  if (torso_bone_ < 0) {
    throw std::invalid_argument("topology lacks the Neck-BodyCenter torso bone");
  }
}

SkeletonTopology SkeletonTopology::default_topology() {
  using J = JointId;
  std::vector<Bone> bones = {
      {J::Neck, J::HeadTop},
      {J::Neck, J::BodyCenter},
      {J::Neck, J::ShoulderL},
      {J::Neck, J::ShoulderR},
      {J::ShoulderL, J::ElbowL},
      {J::ElbowL, J::WristL},
      {J::ShoulderR, J::ElbowR},
      {J::ElbowR, J::WristR},
      {J::BodyCenter, J::HipL},
      {J::HipL, J::KneeL},
      {J::KneeL, J::AnkleL},
      {J::BodyCenter, J::HipR},
      {J::HipR, J::KneeR},
      {J::KneeR, J::AnkleR},
  };
  return SkeletonTopology(J::Neck, std::move(bones));
}

std::vector<JointId> SkeletonTopology::children(JointId j) const {
  std::vector<JointId> out;
  for (const Bone& bone : bones_) {
    if (bone.parent == j) out.push_back(bone.child);
  }
  return out;
}

std::optional<JointId> SkeletonTopology::parent(JointId j) const {
  const int b = parent_bone_[joint_index(j)];
  if (b < 0) return std::nullopt;
  return bones_[b].parent;
}

int SkeletonTopology::bone_to_parent(JointId child) const {
  return parent_bone_[joint_index(child)];
}

}  // namespace mvskel
