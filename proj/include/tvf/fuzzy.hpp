#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvf/formation.hpp"

namespace tvf::fuzzy {

/// Piecewise-linear membership shape with feet a, d and plateau [b, c].
/// A triangle has b == c; a shoulder has a == b (or c == d).
struct Trapezoid {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(double x) const;
  double peak() const { return 0.5 * (b + c); }
};

/// Ordered labels over a universe [lo, hi].
struct MembershipFunctionSet {
  std::vector<std::string> labels;
  std::vector<Trapezoid> shapes;
  double lo = 0.0;
  double hi = 0.0;

  /// Triangles whose feet sit on the neighbouring peaks; the first and last
  /// labels saturate at the universe ends.
  static MembershipFunctionSet triangular_partition(std::vector<std::string> labels,
                                                    std::span<const double> peaks);

  /// Throws std::invalid_argument if shapes are malformed, unsorted, or
  /// leave part of the universe uncovered.
  void validate() const;

  std::size_t size() const { return shapes.size(); }
  std::optional<std::size_t> index_of(const std::string& label) const;
};

/// Degree of membership per label after clamping x into the universe.
std::vector<double> fuzzify(double x, const MembershipFunctionSet& mfs);

inline constexpr std::size_t kLabels = 5;

/// 5x5 consequent table. Rows are indexed by the error-rate label, columns
/// by the error label; cells hold output label indices.
class RuleTable {
 public:
  using Cells = std::array<std::array<std::size_t, kLabels>, kLabels>;

  explicit RuleTable(const Cells& cells);

  /// Builds a table from label names. Throws std::invalid_argument when the
  /// table is not total (wrong shape, unknown or empty labels).
  static RuleTable from_labels(const std::vector<std::vector<std::string>>& rows,
                               const MembershipFunctionSet& inputs,
                               const MembershipFunctionSet& outputs);

  /// The gain-tuning table: small gains when errors are negative and
  /// shrinking, large when positive and growing.
  static RuleTable gain_schedule();

  std::size_t consequent(std::size_t rate_label, std::size_t error_label) const {
    return cells_[rate_label][error_label];
  }
  bool rows_monotone() const;
  bool columns_monotone() const;

 private:
  Cells cells_;
};

struct TunerInputs {
  double e = 0.0;
  double edot = 0.0;
};

/// Centroid of the union of output shapes each clipped at `levels[k]`.
/// Integrates the piecewise-linear aggregate exactly. Returns nullopt when
/// the aggregate has zero area.
std::optional<double> clipped_union_centroid(const MembershipFunctionSet& outputs,
                                             std::span<const double> levels);

/// Mamdani inference: min for AND and implication, max aggregation,
/// centroid defuzzification, then clamp into [kappa_min, kappa_max].
double infer_defuzzify(const TunerInputs& inputs, const RuleTable& rules,
                       const MembershipFunctionSet& error_mfs,
                       const MembershipFunctionSet& rate_mfs,
                       const MembershipFunctionSet& output_mfs, double kappa_min,
                       double kappa_max);

/// Which error rate is paired with the longitudinal error in the k1 system.
enum class K1RateInput { Heading, Longitudinal };

struct TunerConfig {
  double error_scale = 0.3;  // ex_hat and e_ytheta, m
  double rate_scale = 20.0;  // their rates, 1/s
  double kappa_min = 0.1;
  double kappa_max = 5.0;
  std::array<double, kLabels> input_peaks{-1.0, -0.5, 0.0, 0.5, 1.0};
  /// Defaults to {0, 1/4, 1/2, 3/4, 1} * kappa_max.
  std::optional<std::array<double, kLabels>> output_peaks;
  K1RateInput k1_rate_input = K1RateInput::Heading;

  void validate() const;
};

struct TunedGains {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

/// Two single-output fuzzy systems. The first maps (ex_hat, eth_hat') to
/// k1; the second maps e_ytheta = eth_hat - ey_hat and its rate to k2,
/// with k3 tied to k2.
class GainTuner {
 public:
  explicit GainTuner(const TunerConfig& config = {});

  TunedGains tune(const LocalError& e_hat, const LocalErrorRate& e_hat_rate) const;

  const TunerConfig& config() const { return config_; }
  const MembershipFunctionSet& error_mfs() const { return error_mfs_; }
  const MembershipFunctionSet& rate_mfs() const { return rate_mfs_; }
  const MembershipFunctionSet& output_mfs() const { return output_mfs_; }
  const RuleTable& rules() const { return rules_; }

 private:
  TunerConfig config_;
  MembershipFunctionSet error_mfs_;
  MembershipFunctionSet rate_mfs_;
  MembershipFunctionSet output_mfs_;
  RuleTable rules_;
};

const std::vector<std::string>& input_labels();
const std::vector<std::string>& output_labels();

}  // namespace tvf::fuzzy
