#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace echoforge {

inline constexpr int kNumGrasps = 5;
inline constexpr int kGesturesPerGrasp = 6;
inline constexpr int kNumClasses = kNumGrasps * kGesturesPerGrasp;

enum class Grasp : std::uint8_t { Cylindrical = 0, Spherical, Palmar, Tip, Hook };

/// One of the 30 microgestures: class_index = 6 * grasp + gesture.
class GestureLabel {
 public:
  static GestureLabel from_index(int class_index);
  static GestureLabel from_parts(Grasp grasp, int gesture_index);
  /// Accepts "Cylindrical/PointerTap" or a grasp plus a gesture name.
  static GestureLabel parse(std::string_view grasp, std::string_view gesture);
  static std::optional<Grasp> parse_grasp(std::string_view name);

  int class_index() const { return 6 * static_cast<int>(grasp_) + gesture_; }
  Grasp grasp() const { return grasp_; }
  int gesture_index() const { return gesture_; }
  std::string_view grasp_name() const;
  std::string_view gesture_name() const;
  /// "Cylindrical/PointerTap"
  std::string name() const;

  friend bool operator==(const GestureLabel&, const GestureLabel&) = default;

 private:
  GestureLabel(Grasp g, int gesture) : grasp_(g), gesture_(gesture) {}
  Grasp grasp_;
  int gesture_;
};

std::string_view grasp_name(Grasp g);

/// Gesture names per grasp, in class-index order.
const std::array<std::array<std::string_view, kGesturesPerGrasp>, kNumGrasps>& gesture_table();

}  // namespace echoforge
