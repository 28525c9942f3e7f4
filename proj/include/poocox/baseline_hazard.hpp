#pragma once

#include <span>
#include <vector>

namespace poocox {

/// Right-continuous step function for the baseline cumulative hazard.
/// Lambda0(t) is the sum of increments at jump times <= t; it is flat after
/// the last jump.
class BaselineHazard {
 public:
  BaselineHazard() = default;
  /// `times` strictly increasing, `increments` strictly positive.
  BaselineHazard(std::vector<double> times, std::vector<double> increments);

  double cumulative(double t) const;
  /// Jump size at exactly `t`, zero if `t` is not a jump time.
  double increment_at(double t) const;

  bool empty() const noexcept { return times_.empty(); }
  std::size_t size() const noexcept { return times_.size(); }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> increments() const noexcept { return increments_; }
  std::span<const double> cumulative_values() const noexcept { return cumulative_; }

  friend bool operator==(const BaselineHazard&, const BaselineHazard&) = default;

 private:
  std::vector<double> times_;
  std::vector<double> increments_;
  std::vector<double> cumulative_;
};

}  // namespace poocox
