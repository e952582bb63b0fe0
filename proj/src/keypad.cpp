#include "pinaudio/keypad.hpp"

#include <cmath>

#include "pinaudio/error.hpp"

namespace pinaudio {
namespace {

constexpr std::array<int, kNumClasses> kSquared = {0, 1, 4, 9, 2, 8, 5, 10};
constexpr std::array<std::string_view, kNumClasses> kTags = {"Z",  "U1", "U2", "U3",
                                                             "D1", "D2", "SD", "LD"};

void check_digit(int d) {
  if (d < 0 || d >= kNumDigits) {
    throw InvalidInput("digit out of range: " + std::to_string(d));
  }
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    out.push_back(item);
    start = end + 1;
  }
  return out;
}

}  // namespace

int squared_distance(DistanceClass c) { return kSquared[index_of(c)]; }

double euclidean_distance(DistanceClass c) { return std::sqrt(static_cast<double>(squared_distance(c))); }

std::string_view tag(DistanceClass c) { return kTags[index_of(c)]; }

DistanceClass class_from_tag(std::string_view t) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kTags[i] == t) return kAllClasses[i];
  }
  throw InvalidInput("unknown distance class tag: " + std::string(t));
}

bool class_from_squared(int squared, DistanceClass& out) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kSquared[i] == squared) {
      out = kAllClasses[i];
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// KeypadLayout

const KeypadLayout& KeypadLayout::standard() {
  static const KeypadLayout layout({GridPos{3, 1}, GridPos{0, 0}, GridPos{0, 1}, GridPos{0, 2},
                                    GridPos{1, 0}, GridPos{1, 1}, GridPos{1, 2}, GridPos{2, 0},
                                    GridPos{2, 1}, GridPos{2, 2}});
  return layout;
}

KeypadLayout::KeypadLayout(const std::array<GridPos, kNumDigits>& positions) : positions_(positions) {
  for (int a = 0; a < kNumDigits; ++a) {
    for (int b = 0; b < kNumDigits; ++b) {
      const int dr = positions_[a].row - positions_[b].row;
      const int dc = positions_[a].col - positions_[b].col;
      const int sq = dr * dr + dc * dc;
      if (a != b && sq == 0) {
        throw InvalidInput("keys " + std::to_string(a) + " and " + std::to_string(b) +
                           " share a grid position");
      }
      DistanceClass c{};
      if (!class_from_squared(sq, c)) {
        throw InvalidInput("keys " + std::to_string(a) + " and " + std::to_string(b) +
                           " have non-canonical squared distance " + std::to_string(sq));
      }
      table_[a * kNumDigits + b] = c;
    }
  }
}

GridPos KeypadLayout::position(int digit) const {
  check_digit(digit);
  return positions_[digit];
}

DistanceClass KeypadLayout::distance_class(int a, int b) const {
  check_digit(a);
  check_digit(b);
  return table_[a * kNumDigits + b];
}

// ---------------------------------------------------------------------------
// Pin

Pin::Pin(const std::array<int, kPinLength>& digits) {
  for (std::size_t i = 0; i < kPinLength; ++i) {
    check_digit(digits[i]);
    digits_[i] = static_cast<std::uint8_t>(digits[i]);
  }
}

Pin Pin::from_number(int value) {
  if (value < 0 || value >= kPinSpace) {
    throw InvalidInput("PIN value out of range: " + std::to_string(value));
  }
  return Pin({value / 1000, (value / 100) % 10, (value / 10) % 10, value % 10});
}

Pin Pin::parse(std::string_view text) {
  if (text.size() != kPinLength) {
    throw InvalidInput("PIN must have exactly 4 digits: '" + std::string(text) + "'");
  }
  std::array<int, kPinLength> d{};
  for (std::size_t i = 0; i < kPinLength; ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw InvalidInput("PIN must be decimal digits: '" + std::string(text) + "'");
    }
    d[i] = text[i] - '0';
  }
  return Pin(d);
}

int Pin::number() const { return digits_[0] * 1000 + digits_[1] * 100 + digits_[2] * 10 + digits_[3]; }

std::string Pin::str() const {
  std::string s(kPinLength, '0');
  for (std::size_t i = 0; i < kPinLength; ++i) s[i] = static_cast<char>('0' + digits_[i]);
  return s;
}

// ---------------------------------------------------------------------------
// DistanceTriplet

std::size_t DistanceTriplet::index() const {
  return (index_of(classes[0]) * kNumClasses + index_of(classes[1])) * kNumClasses + index_of(classes[2]);
}

DistanceTriplet DistanceTriplet::from_index(std::size_t index) {
  if (index >= kNumTriplets) throw InvalidInput("triplet index out of range");
  return DistanceTriplet{{kAllClasses[index / 64], kAllClasses[(index / 8) % 8], kAllClasses[index % 8]}};
}

std::string DistanceTriplet::str() const {
  std::string s;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) s += ',';
    s += tag(classes[i]);
  }
  return s;
}

DistanceTriplet DistanceTriplet::parse(std::string_view text) {
  auto parts = split_commas(text);
  if (parts.size() != 3) throw InvalidInput("triplet needs three class tags: '" + std::string(text) + "'");
  DistanceTriplet t;
  for (std::size_t i = 0; i < 3; ++i) t.classes[i] = class_from_tag(parts[i]);
  return t;
}

// ---------------------------------------------------------------------------

DistanceClass distance_class(int a, int b, const KeypadLayout& layout) { return layout.distance_class(a, b); }

DistanceTriplet triplet_of_pin(const Pin& pin, const KeypadLayout& layout) {
  DistanceTriplet t;
  for (std::size_t i = 0; i < 3; ++i) t.classes[i] = layout.distance_class(pin.digit(i), pin.digit(i + 1));
  return t;
}

std::vector<Pin> pins_of_triplet(const DistanceTriplet& triplet, const KeypadLayout& layout) {
  std::vector<Pin> out;
  for (int v = 0; v < kPinSpace; ++v) {
    const Pin p = Pin::from_number(v);
    if (triplet_of_pin(p, layout) == triplet) out.push_back(p);
  }
  return out;
}

TripletIndex::TripletIndex(const KeypadLayout& layout) {
  for (int v = 0; v < kPinSpace; ++v) {
    const Pin p = Pin::from_number(v);
    buckets_[triplet_of_pin(p, layout).index()].push_back(p);
  }
}

const TripletIndex& TripletIndex::standard() {
  static const TripletIndex index(KeypadLayout::standard());
  return index;
}

std::span<const Pin> TripletIndex::pins(const DistanceTriplet& triplet) const {
  return buckets_[triplet.index()];
}

std::size_t TripletIndex::feasible_count() const {
  std::size_t n = 0;
  for (const auto& b : buckets_) n += b.empty() ? 0 : 1;
  return n;
}

// ---------------------------------------------------------------------------
// KeySet / thermal

KeySet KeySet::of(std::span<const int> digits) {
  KeySet k;
  for (int d : digits) {
    check_digit(d);
    k.bits_.set(static_cast<std::size_t>(d));
  }
  return k;
}

KeySet KeySet::of_pin(const Pin& pin) {
  KeySet k;
  for (std::size_t i = 0; i < kPinLength; ++i) k.bits_.set(static_cast<std::size_t>(pin.digit(i)));
  return k;
}

KeySet KeySet::parse(std::string_view text) {
  std::vector<int> digits;
  for (auto item : split_commas(text)) {
    if (item.size() != 1 || item[0] < '0' || item[0] > '9') {
      throw InvalidInput("key set must be comma-separated digits: '" + std::string(text) + "'");
    }
    digits.push_back(item[0] - '0');
  }
  return of(digits);
}

std::vector<int> KeySet::digits() const {
  std::vector<int> out;
  for (int d = 0; d < kNumDigits; ++d)
    if (contains(d)) out.push_back(d);
  return out;
}

std::string KeySet::str() const {
  std::string s;
  for (int d : digits()) {
    if (!s.empty()) s += ',';
    s += static_cast<char>('0' + d);
  }
  return s;
}

ThermalClass thermal_class_of(const Pin& pin) {
  const KeySet keys = KeySet::of_pin(pin);
  return ThermalClass{static_cast<int>(keys.size()), keys};
}

std::vector<Pin> thermal_candidates(const KeySet& keys) {
  if (keys.empty() || keys.size() > kPinLength) {
    throw InvalidInput("thermal key set must hold 1 to 4 digits, got " + std::to_string(keys.size()));
  }
  std::vector<Pin> out;
  for (int v = 0; v < kPinSpace; ++v) {
    const Pin p = Pin::from_number(v);
    if (KeySet::of_pin(p) == keys) out.push_back(p);
  }
  return out;
}

std::size_t thermal_class_size(int class_id) {
  switch (class_id) {
    case 1: return 1;
    case 2: return 14;
    case 3: return 36;
    case 4: return 24;
    default: throw InvalidInput("thermal class id must be 1..4");
  }
}

}  // namespace pinaudio
