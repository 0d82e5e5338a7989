#include "tvf/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvf::fuzzy {

const std::vector<std::string>& input_labels() {
  static const std::vector<std::string> labels{"nb", "ns", "z", "ps", "pb"};
  return labels;
}

const std::vector<std::string>& output_labels() {
  static const std::vector<std::string> labels{"z", "ps", "pm", "pb", "pvb"};
  return labels;
}

double Trapezoid::operator()(double x) const {
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  if (x <= c) return 1.0;
  return (d - x) / (d - c);
}

MembershipFunctionSet MembershipFunctionSet::triangular_partition(std::vector<std::string> labels,
                                                                  std::span<const double> peaks) {
  if (labels.size() != peaks.size() || peaks.size() < 2) {
    throw std::invalid_argument("triangular_partition: need one peak per label and >= 2 labels");
  }
  MembershipFunctionSet set;
  set.labels = std::move(labels);
  set.lo = peaks.front();
  set.hi = peaks.back();
  const std::size_t n = peaks.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? peaks[0] : peaks[i - 1];
    const double right = i + 1 == n ? peaks[n - 1] : peaks[i + 1];
    set.shapes.push_back({left, peaks[i], peaks[i], right});
  }
  set.validate();
  return set;
}

void MembershipFunctionSet::validate() const {
  if (shapes.empty() || labels.size() != shapes.size()) {
    throw std::invalid_argument("membership set: label and shape counts differ");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("membership set: empty universe");
  }
  for (const auto& s : shapes) {
    if (!(s.a <= s.b && s.b <= s.c && s.c <= s.d) || !std::isfinite(s.a) || !std::isfinite(s.d)) {
      throw std::invalid_argument("membership set: shape breakpoints out of order");
    }
  }
  for (std::size_t i = 1; i < shapes.size(); ++i) {
    if (!(shapes[i].peak() > shapes[i - 1].peak())) {
      throw std::invalid_argument("membership set: peaks must be strictly increasing");
    }
    // Supports of neighbours must overlap, otherwise a gap has zero membership.
    if (!(shapes[i].a < shapes[i - 1].d)) {
      throw std::invalid_argument("membership set: universe not fully covered");
    }
  }
  if (!(shapes.front()(lo) > 0.0) || !(shapes.back()(hi) > 0.0)) {
    throw std::invalid_argument("membership set: universe ends not covered");
  }
}

std::optional<std::size_t> MembershipFunctionSet::index_of(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<double> fuzzify(double x, const MembershipFunctionSet& mfs) {
  const double clamped = std::clamp(x, mfs.lo, mfs.hi);
  std::vector<double> degrees(mfs.size());
  for (std::size_t i = 0; i < mfs.size(); ++i) {
    degrees[i] = mfs.shapes[i](clamped);
  }
  return degrees;
}

RuleTable::RuleTable(const Cells& cells) : cells_(cells) {
  for (const auto& row : cells_) {
    for (std::size_t out : row) {
      if (out >= kLabels) {
        throw std::invalid_argument("rule table: consequent index out of range");
      }
    }
  }
}

RuleTable RuleTable::from_labels(const std::vector<std::vector<std::string>>& rows,
                                 const MembershipFunctionSet& inputs,
                                 const MembershipFunctionSet& outputs) {
  if (inputs.size() != kLabels || outputs.size() != kLabels) {
    throw std::invalid_argument("rule table: membership sets must have 5 labels");
  }
  if (rows.size() != kLabels) {
    throw std::invalid_argument("rule table: expected 5 rows, got " + std::to_string(rows.size()));
  }
  Cells cells{};
  for (std::size_t r = 0; r < kLabels; ++r) {
    if (rows[r].size() != kLabels) {
      throw std::invalid_argument("rule table: row " + inputs.labels[r] + " is not total");
    }
    for (std::size_t col = 0; col < kLabels; ++col) {
      const auto idx = outputs.index_of(rows[r][col]);
      if (!idx) {
        throw std::invalid_argument("rule table: unknown output label '" + rows[r][col] + "'");
      }
      cells[r][col] = *idx;
    }
  }
  return RuleTable(cells);
}

RuleTable RuleTable::gain_schedule() {
  //          e:  nb  ns  z   ps  pb
  return RuleTable(Cells{{
      {0, 0, 1, 1, 2},  // edot nb
      {0, 1, 1, 2, 2},  // edot ns
      {0, 0, 1, 2, 3},  // edot z
      {0, 2, 3, 3, 4},  // edot ps
      {2, 3, 3, 4, 4},  // edot pb
  }});
}

bool RuleTable::rows_monotone() const {
  for (const auto& row : cells_) {
    if (!std::is_sorted(row.begin(), row.end())) return false;
  }
  return true;
}

bool RuleTable::columns_monotone() const {
  for (std::size_t col = 0; col < kLabels; ++col) {
    for (std::size_t r = 1; r < kLabels; ++r) {
      if (cells_[r][col] < cells_[r - 1][col]) return false;
    }
  }
  return true;
}

namespace {

// Value at x of the linear piece of `s` that contains `probe`.
double piece_value(const Trapezoid& s, double probe, double x) {
  if (probe < s.a || probe > s.d) return 0.0;
  if (probe < s.b) return (x - s.a) / (s.b - s.a);
  if (probe <= s.c) return 1.0;
  return (s.d - x) / (s.d - s.c);
}

}  // namespace

std::optional<double> clipped_union_centroid(const MembershipFunctionSet& outputs,
                                             std::span<const double> levels) {
  if (levels.size() != outputs.size()) {
    throw std::invalid_argument("clipped_union_centroid: one level per output label required");
  }
  const double lo = outputs.lo;
  const double hi = outputs.hi;

  std::vector<double> knots{lo, hi};
  auto add_knot = [&](double x) {
    if (x > lo && x < hi) knots.push_back(x);
  };
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const double w = levels[k];
    if (!(w > 0.0)) continue;
    const Trapezoid& s = outputs.shapes[k];
    for (double x : {s.a, s.b, s.c, s.d}) add_knot(x);
    if (w < 1.0) {
      if (s.b > s.a) add_knot(s.a + w * (s.b - s.a));
      if (s.d > s.c) add_knot(s.d - w * (s.d - s.c));
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // Inside each knot interval every clipped shape is linear; split further
  // wherever two of them cross so that their maximum is linear too.
  auto clipped = [&](std::size_t k, double probe, double x) {
    return std::min(levels[k], piece_value(outputs.shapes[k], probe, x));
  };
  std::vector<double> refined;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double x0 = knots[i];
    const double x1 = knots[i + 1];
    const double mid = 0.5 * (x0 + x1);
    refined.push_back(x0);
    std::vector<double> cuts;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      if (!(levels[k] > 0.0)) continue;
      for (std::size_t j = k + 1; j < outputs.size(); ++j) {
        if (!(levels[j] > 0.0)) continue;
        const double g0 = clipped(k, mid, x0) - clipped(j, mid, x0);
        const double g1 = clipped(k, mid, x1) - clipped(j, mid, x1);
        if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
          cuts.push_back(x0 + (x1 - x0) * g0 / (g0 - g1));
        }
      }
    }
    std::sort(cuts.begin(), cuts.end());
    for (double x : cuts) {
      if (x > x0 && x < x1) refined.push_back(x);
    }
  }
  refined.push_back(knots.back());

  double area = 0.0;
  double moment = 0.0;
  for (std::size_t i = 0; i + 1 < refined.size(); ++i) {
    const double x0 = refined[i];
    const double x1 = refined[i + 1];
    if (!(x1 > x0)) continue;
    const double mid = 0.5 * (x0 + x1);
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      if (!(levels[k] > 0.0)) continue;
      m0 = std::max(m0, clipped(k, mid, x0));
      m1 = std::max(m1, clipped(k, mid, x1));
    }
    const double h = x1 - x0;
    area += 0.5 * h * (m0 + m1);
    moment += h / 6.0 * (x0 * (2.0 * m0 + m1) + x1 * (m0 + 2.0 * m1));
  }
  if (!(area > 0.0)) return std::nullopt;
  return moment / area;
}

double infer_defuzzify(const TunerInputs& inputs, const RuleTable& rules,
                       const MembershipFunctionSet& error_mfs,
                       const MembershipFunctionSet& rate_mfs,
                       const MembershipFunctionSet& output_mfs, double kappa_min,
                       double kappa_max) {
  if (error_mfs.size() != kLabels || rate_mfs.size() != kLabels || output_mfs.size() != kLabels) {
    throw std::invalid_argument("infer_defuzzify: membership sets must have 5 labels");
  }
  const std::vector<double> mu_e = fuzzify(inputs.e, error_mfs);
  const std::vector<double> mu_r = fuzzify(inputs.edot, rate_mfs);

  std::array<double, kLabels> levels{};
  for (std::size_t r = 0; r < kLabels; ++r) {
    for (std::size_t col = 0; col < kLabels; ++col) {
      const double strength = std::min(mu_r[r], mu_e[col]);
      auto& level = levels[rules.consequent(r, col)];
      level = std::max(level, strength);
    }
  }
  const double crisp = clipped_union_centroid(output_mfs, levels).value_or(kappa_min);
  return std::clamp(crisp, kappa_min, kappa_max);
}

void TunerConfig::validate() const {
  if (!(error_scale > 0.0) || !(rate_scale > 0.0)) {
    throw std::invalid_argument("fuzzy: input scale factors must be positive");
  }
  if (!(kappa_min > 0.0)) {
    throw std::invalid_argument("fuzzy: kappa_min must be positive");
  }
  if (!(kappa_max > kappa_min)) {
    throw std::invalid_argument("fuzzy: kappa_max must exceed kappa_min");
  }
}

namespace {

std::array<double, kLabels> default_output_peaks(double kappa_max) {
  return {0.0, 0.25 * kappa_max, 0.5 * kappa_max, 0.75 * kappa_max, kappa_max};
}

}  // namespace

GainTuner::GainTuner(const TunerConfig& config)
    : config_(config),
      error_mfs_(MembershipFunctionSet::triangular_partition(input_labels(), config.input_peaks)),
      rate_mfs_(error_mfs_),
      output_mfs_(MembershipFunctionSet::triangular_partition(
          output_labels(), config.output_peaks.value_or(default_output_peaks(config.kappa_max)))),
      rules_(RuleTable::gain_schedule()) {
  config_.validate();
}

TunedGains GainTuner::tune(const LocalError& e_hat, const LocalErrorRate& e_hat_rate) const {
  const double k1_rate = config_.k1_rate_input == K1RateInput::Heading ? e_hat_rate.etheta_hat
                                                                        : e_hat_rate.ex_hat;
  const TunerInputs first{e_hat.ex_hat / config_.error_scale, k1_rate / config_.rate_scale};

  const double e_ytheta = e_hat.etheta_hat - e_hat.ey_hat;
  const double e_ytheta_rate = e_hat_rate.etheta_hat - e_hat_rate.ey_hat;
  const TunerInputs second{e_ytheta / config_.error_scale, e_ytheta_rate / config_.rate_scale};

  TunedGains g;
  g.k1 = infer_defuzzify(first, rules_, error_mfs_, rate_mfs_, output_mfs_, config_.kappa_min,
                         config_.kappa_max);
  g.k2 = infer_defuzzify(second, rules_, error_mfs_, rate_mfs_, output_mfs_, config_.kappa_min,
                         config_.kappa_max);
  g.k3 = g.k2;
  return g;
}

}  // namespace tvf::fuzzy
