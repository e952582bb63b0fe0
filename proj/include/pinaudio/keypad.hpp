#pragma once

// PIN-pad geometry: the eight distance classes between keys, the mapping
// between PINs and distance triplets, and thermal (key-set) combinatorics.

#include <array>
#include <bitset>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pinaudio {

inline constexpr int kNumDigits = 10;
inline constexpr int kPinLength = 4;
inline constexpr int kPinSpace = 10000;

/// Euclidean distance between two keys on a unit grid. Declaration order is
/// the canonical order used for tie-breaking.
enum class DistanceClass : std::uint8_t { Z, U1, U2, U3, D1, D2, SD, LD };

inline constexpr std::size_t kNumClasses = 8;
inline constexpr std::array<DistanceClass, kNumClasses> kAllClasses = {
    DistanceClass::Z,  DistanceClass::U1, DistanceClass::U2, DistanceClass::U3,
    DistanceClass::D1, DistanceClass::D2, DistanceClass::SD, DistanceClass::LD};

constexpr std::size_t index_of(DistanceClass c) { return static_cast<std::size_t>(c); }

/// Exact squared distance: 0, 1, 4, 9, 2, 8, 5, 10.
int squared_distance(DistanceClass c);
double euclidean_distance(DistanceClass c);
std::string_view tag(DistanceClass c);
DistanceClass class_from_tag(std::string_view tag);  // throws InvalidInput
bool class_from_squared(int squared, DistanceClass& out);

struct GridPos {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridPos&, const GridPos&) = default;
};

class KeypadLayout {
 public:
  /// Rows [1 2 3] [4 5 6] [7 8 9] [. 0 .].
  static const KeypadLayout& standard();

  /// Throws InvalidInput if coordinates repeat or a key pair falls outside
  /// the eight canonical distances.
  explicit KeypadLayout(const std::array<GridPos, kNumDigits>& positions);

  GridPos position(int digit) const;
  DistanceClass distance_class(int a, int b) const;

 private:
  std::array<GridPos, kNumDigits> positions_;
  std::array<DistanceClass, kNumDigits * kNumDigits> table_{};
};

class Pin {
 public:
  Pin() = default;
  explicit Pin(const std::array<int, kPinLength>& digits);

  static Pin from_number(int value);       // 0..9999
  static Pin parse(std::string_view text);  // exactly four decimal digits

  int digit(std::size_t position) const { return digits_[position]; }
  int number() const;
  std::string str() const;

  friend auto operator<=>(const Pin&, const Pin&) = default;

 private:
  std::array<std::uint8_t, kPinLength> digits_{};
};

struct DistanceTriplet {
  std::array<DistanceClass, 3> classes{};

  /// Dense index in [0, 512), consistent with the canonical order.
  std::size_t index() const;
  static DistanceTriplet from_index(std::size_t index);
  std::string str() const;  // "Z,U3,Z"
  static DistanceTriplet parse(std::string_view text);

  friend auto operator<=>(const DistanceTriplet&, const DistanceTriplet&) = default;
};

inline constexpr std::size_t kNumTriplets = kNumClasses * kNumClasses * kNumClasses;

DistanceClass distance_class(int a, int b, const KeypadLayout& layout = KeypadLayout::standard());
DistanceTriplet triplet_of_pin(const Pin& pin, const KeypadLayout& layout = KeypadLayout::standard());

/// Brute-force scan of all 10^4 PINs, ascending numeric order.
std::vector<Pin> pins_of_triplet(const DistanceTriplet& triplet,
                                 const KeypadLayout& layout = KeypadLayout::standard());

/// Precomputed triplet -> PIN buckets for repeated queries.
class TripletIndex {
 public:
  explicit TripletIndex(const KeypadLayout& layout);
  static const TripletIndex& standard();

  std::span<const Pin> pins(const DistanceTriplet& triplet) const;
  bool feasible(const DistanceTriplet& triplet) const { return !pins(triplet).empty(); }
  std::size_t feasible_count() const;

 private:
  std::array<std::vector<Pin>, kNumTriplets> buckets_;
};

/// A set of distinct keys, as revealed by a heat map.
class KeySet {
 public:
  KeySet() = default;
  static KeySet of(std::span<const int> digits);  // throws on digit outside 0..9
  static KeySet of_pin(const Pin& pin);
  static KeySet parse(std::string_view text);      // "0,2,5"

  bool contains(int digit) const { return bits_.test(static_cast<std::size_t>(digit)); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }
  std::vector<int> digits() const;
  std::string str() const;

  friend bool operator==(const KeySet&, const KeySet&) = default;

 private:
  std::bitset<kNumDigits> bits_;
};

struct ThermalClass {
  int class_id = 0;  // number of distinct digits, 1..4
  KeySet keys;
};

ThermalClass thermal_class_of(const Pin& pin);

/// All PINs whose distinct-digit set equals `keys`, ascending.
/// Sizes are 1, 14, 36, 24 for sets of size 1..4.
std::vector<Pin> thermal_candidates(const KeySet& keys);

/// Number of PINs in a thermal class of the given id (1, 14, 36, 24).
std::size_t thermal_class_size(int class_id);

}  // namespace pinaudio
