#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "pinaudio/keypad.hpp"

namespace pinaudio {

enum class TypistMode { single_finger, other, mixed };

std::string_view to_string(TypistMode mode);
TypistMode parse_typist_mode(std::string_view text);  // throws InvalidInput

/// The three inter-keystroke timings of one 4-digit entry, in ms.
class GapSequence {
 public:
  /// Gaps at or above this are considered physically normal.
  static constexpr double kNormalFloorMs = 100.0;

  explicit GapSequence(const std::array<double, 3>& gaps_ms);  // throws on gap <= 0
  static GapSequence from_timestamps(std::span<const double> timestamps_ms);

  double operator[](std::size_t i) const { return gaps_[i]; }
  const std::array<double, 3>& values() const { return gaps_; }
  double total() const { return gaps_[0] + gaps_[1] + gaps_[2]; }

  /// Warning flag: some gap is shorter than kNormalFloorMs.
  bool below_normal_floor() const;

 private:
  std::array<double, 3> gaps_;
};

/// Four key-press instants of one entry with ground truth.
struct KeystrokeTrace {
  std::string trace_id;
  Pin pin;
  std::array<double, kPinLength> timestamps_ms{};
  TypistMode mode = TypistMode::single_finger;

  GapSequence gaps() const { return GapSequence::from_timestamps(timestamps_ms); }
};

}  // namespace pinaudio
