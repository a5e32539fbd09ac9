#include "echoforge/labels.hpp"

#include "echoforge/errors.hpp"

namespace echoforge {

namespace {

constexpr std::array<std::string_view, kNumGrasps> kGraspNames{"Cylindrical", "Spherical", "Palmar", "Tip", "Hook"};

constexpr std::array<std::array<std::string_view, kGesturesPerGrasp>, kNumGrasps> kGestures{{
    {"Hold", "PointerIn", "PointerTap", "MiddleTap", "WristRight", "WristLeft"},
    {"Hold", "PointerIn", "PointerTap", "MiddleTap", "TwoFingerTap", "WristUp"},
    {"Hold", "ThumbTap", "ThumbIn", "ThumbDown", "PointerIn", "WristTap"},
    {"Hold", "ThumbTap", "ThumbRight", "PinkyOut", "WristLeft", "WristRight"},
    {"Hold", "ThumbTap", "ThumbLeft", "ThumbIn", "PointerIn", "Rotate"},
}};

}  // namespace

const std::array<std::array<std::string_view, kGesturesPerGrasp>, kNumGrasps>& gesture_table() { return kGestures; }

std::string_view grasp_name(Grasp g) { return kGraspNames[static_cast<int>(g)]; }

GestureLabel GestureLabel::from_index(int class_index) {
  if (class_index < 0 || class_index >= kNumClasses)
    throw ConfigError("class index " + std::to_string(class_index) + " outside [0, 30)");
  return GestureLabel(static_cast<Grasp>(class_index / kGesturesPerGrasp), class_index % kGesturesPerGrasp);
}

GestureLabel GestureLabel::from_parts(Grasp grasp, int gesture_index) {
  if (gesture_index < 0 || gesture_index >= kGesturesPerGrasp)
    throw ConfigError("gesture index " + std::to_string(gesture_index) + " outside [0, 6)");
  return GestureLabel(grasp, gesture_index);
}

std::optional<Grasp> GestureLabel::parse_grasp(std::string_view name) {
  for (int g = 0; g < kNumGrasps; ++g)
    if (kGraspNames[g] == name) return static_cast<Grasp>(g);
  return std::nullopt;
}

GestureLabel GestureLabel::parse(std::string_view grasp, std::string_view gesture) {
  const auto g = parse_grasp(grasp);
  if (!g) throw ConfigError("unknown grasp '" + std::string(grasp) + "'");
  const auto& names = kGestures[static_cast<int>(*g)];
  for (int i = 0; i < kGesturesPerGrasp; ++i)
    if (names[i] == gesture) return GestureLabel(*g, i);
  throw ConfigError("unknown gesture '" + std::string(gesture) + "' for grasp " + std::string(grasp));
}

std::string_view GestureLabel::grasp_name() const { return kGraspNames[static_cast<int>(grasp_)]; }

std::string_view GestureLabel::gesture_name() const { return kGestures[static_cast<int>(grasp_)][gesture_]; }

std::string GestureLabel::name() const { return std::string(grasp_name()) + "/" + std::string(gesture_name()); }

}  // namespace echoforge
