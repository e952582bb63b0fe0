#include "pinaudio/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "pinaudio/error.hpp"

namespace pinaudio {

double GuessingCdf::at(std::size_t k) const {
  if (k == 0 || k > cdf.size()) throw InvalidInput("attempt index outside 1..k_max");
  return cdf[k - 1];
}

std::size_t GuessingCdf::hits_at(std::size_t k) const {
  if (k == 0 || k > hits.size()) throw InvalidInput("attempt index outside 1..k_max");
  return hits[k - 1];
}

GuessingCdf guessing_cdf(std::span<const Rank> ranks, std::size_t k_max, std::string label) {
  if (ranks.empty()) throw InvalidInput("guessing curve needs at least one trial");
  if (k_max == 0) throw InvalidInput("k_max must be >= 1");
  std::vector<std::size_t> at_rank(k_max + 1, 0);
  for (const auto& r : ranks) {
    if (r && *r >= 1 && *r <= k_max) ++at_rank[*r];
  }
  GuessingCdf g;
  g.label = std::move(label);
  g.n_trials = ranks.size();
  g.hits.resize(k_max);
  g.cdf.resize(k_max);
  std::size_t running = 0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    running += at_rank[k];
    g.hits[k - 1] = running;
    g.cdf[k - 1] = static_cast<double>(running) / static_cast<double>(g.n_trials);
  }
  return g;
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::RG: return "RG";
    case BaselineKind::RGVPK: return "RGVPK";
    case BaselineKind::RGT: return "RGT";
    case BaselineKind::RGTVPK: return "RGTVPK";
  }
  return "RG";
}

BaselineKind parse_baseline(const std::string& text) {
  std::string t;
  for (char c : text) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "RG") return BaselineKind::RG;
  if (t == "RGVPK") return BaselineKind::RGVPK;
  if (t == "RGT") return BaselineKind::RGT;
  if (t == "RGTVPK") return BaselineKind::RGTVPK;
  throw InvalidInput("unknown baseline: '" + text + "' (rg, rgvpk, rgt, rgtvpk)");
}

Baseline Baseline::rg() { return Baseline(BaselineKind::RG, {{kPinSpace, 1}}); }

Baseline Baseline::rgvpk() { return Baseline(BaselineKind::RGVPK, {{kPinSpace / 10, 1}}); }

Baseline Baseline::rgt(std::span<const Pin> trial_pins) {
  if (trial_pins.empty()) throw InvalidInput("thermal baseline needs trial PINs");
  std::map<std::size_t, std::size_t> counts;
  for (const Pin& p : trial_pins) ++counts[thermal_class_size(thermal_class_of(p).class_id)];
  return Baseline(BaselineKind::RGT, std::move(counts));
}

Baseline Baseline::rgtvpk(std::span<const Pin> trial_pins, int position) {
  if (trial_pins.empty()) throw InvalidInput("thermal baseline needs trial PINs");
  if (position < 0 || position >= kPinLength) throw InvalidInput("VPK position must be 0..3");
  std::map<std::size_t, std::size_t> counts;
  for (const Pin& p : trial_pins) {
    const auto pos = static_cast<std::size_t>(position);
    std::size_t n = 0;
    for (const Pin& c : thermal_candidates(KeySet::of_pin(p)))
      if (c.digit(pos) == p.digit(pos)) ++n;
    ++counts[n];
  }
  return Baseline(BaselineKind::RGTVPK, std::move(counts));
}

Baseline Baseline::make(BaselineKind kind, std::span<const Pin> trial_pins, int vpk_position) {
  switch (kind) {
    case BaselineKind::RG: return rg();
    case BaselineKind::RGVPK: return rgvpk();
    case BaselineKind::RGT: return rgt(trial_pins);
    case BaselineKind::RGTVPK: return rgtvpk(trial_pins, vpk_position);
  }
  return rg();
}

double Baseline::at(std::size_t k) const {
  std::size_t total = 0;
  for (const auto& [size, count] : space_counts_) total += count;
  double v = 0.0;
  for (const auto& [size, count] : space_counts_) {
    const double frac = std::min(1.0, static_cast<double>(k) / static_cast<double>(size));
    v += static_cast<double>(count) / static_cast<double>(total) * frac;
  }
  return v;
}

double improvement_factor(const GuessingCdf& cdf, const Baseline& base, std::size_t k) {
  const double b = base.at(k);
  if (!(b > 0.0)) throw InvalidInput("baseline is zero at k = " + std::to_string(k));
  return cdf.at(k) / b;
}

std::vector<P50Record> p50(const std::map<Pin, std::vector<Rank>>& per_pin_ranks) {
  std::vector<P50Record> out;
  for (const auto& [pin, ranks] : per_pin_ranks) {
    if (ranks.size() < 2) {
      throw InvalidInput("P50 needs at least two trials for PIN " + pin.str());
    }
    std::vector<std::size_t> found;
    for (const auto& r : ranks)
      if (r) found.push_back(*r);
    std::sort(found.begin(), found.end());
    P50Record rec{pin, ranks.size(), std::nullopt};
    const std::size_t needed = (ranks.size() + 1) / 2;
    if (found.size() >= needed) rec.attempts = found[needed - 1];
    out.push_back(rec);
  }
  std::stable_sort(out.begin(), out.end(), [](const P50Record& a, const P50Record& b) {
    if (a.defined() != b.defined()) return a.defined();
    if (a.defined() && *a.attempts != *b.attempts) return *a.attempts < *b.attempts;
    return a.pin < b.pin;
  });
  return out;
}

ChiSquareResult chi_square_guess_freq(const GuessingCdf& a, const GuessingCdf& b, std::size_t k, bool yates) {
  return chi_square_2x2(a.hits_at(k), a.n_trials, b.hits_at(k), b.n_trials, yates);
}

std::vector<double> gap_errors(const MatchReport& report) {
  std::vector<double> out;
  for (std::size_t i = 1; i < report.matches.size(); ++i) {
    const Match& prev = report.matches[i - 1];
    const Match& cur = report.matches[i];
    if (cur.truth_index == prev.truth_index + 1) out.push_back(cur.error_ms - prev.error_ms);
  }
  return out;
}

ExtractionSummary extraction_error_report(std::span<const MatchReport> reports) {
  if (reports.empty()) throw InvalidInput("extraction report needs at least one match report");
  ExtractionSummary s;
  s.clips = reports.size();
  std::vector<double> errors, abs_gaps;
  for (const auto& r : reports) {
    s.truth_events += r.truth_count;
    s.matched += r.matches.size();
    s.misses += r.misses;
    s.false_positives += r.false_positives;
    for (const auto& m : r.matches) errors.push_back(m.error_ms);
    for (double g : gap_errors(r)) abs_gaps.push_back(std::abs(g));
  }
  s.detection_rate = static_cast<double>(s.matched) / static_cast<double>(s.truth_events);
  s.mean_error_ms = mean(errors);
  s.std_error_ms = stddev(errors);
  s.gap_count = abs_gaps.size();
  if (!abs_gaps.empty()) {
    s.mean_abs_gap_error_ms = mean(abs_gaps);
    s.p75_abs_gap_error_ms = percentile(abs_gaps, 75.0);
    s.p97_abs_gap_error_ms = percentile(abs_gaps, 97.0);
  }
  if (errors.size() >= 8 && stddev(errors) > 0.0) s.residual_normality = anderson_darling(errors);
  return s;
}

double round_sig4(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double mag = std::floor(std::log10(std::abs(v)));
  const double scale = std::pow(10.0, 3.0 - mag);
  return std::round(v * scale) / scale;
}

void write_cdf_csv(std::ostream& out, std::span<const GuessingCdf> curves) {
  if (curves.empty()) return;
  out << 'k';
  for (const auto& c : curves) out << ',' << (c.label.empty() ? "cdf" : c.label);
  out << '\n';
  const std::size_t k_max = curves.front().k_max();
  for (std::size_t k = 1; k <= k_max; ++k) {
    out << k;
    for (const auto& c : curves) out << ',' << round_sig4(c.at(k));
    out << '\n';
  }
}

void write_p50_table(std::ostream& out, const std::vector<std::string>& labels,
                     const std::vector<std::vector<P50Record>>& columns, std::size_t top) {
  out << std::left << std::setw(6) << "Rank";
  for (const auto& l : labels) out << " | " << std::setw(14) << (l + " PIN/Att.");
  out << '\n';
  for (std::size_t row = 0; row < top; ++row) {
    out << std::left << std::setw(6) << row + 1;
    for (const auto& col : columns) {
      std::string cell = "-";
      if (row < col.size()) {
        cell = col[row].pin.str() + " / " + (col[row].attempts ? std::to_string(*col[row].attempts) : "n/a");
      }
      out << " | " << std::setw(14) << cell;
    }
    out << '\n';
  }
}

}  // namespace pinaudio
