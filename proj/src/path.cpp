#include "ldp/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldp {

namespace {

void validate_grid(const std::vector<double>& times,
                   const std::vector<double>& values) {
  if (times.size() < 2) throw std::invalid_argument("path needs >= 2 samples");
  if (times.size() != values.size())
    throw std::invalid_argument("path times/values length mismatch");
  if (times.front() != 0.0)
    throw std::invalid_argument("path grid must start at t = 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      throw std::invalid_argument("path contains non-finite entries");
    if (i > 0 && times[i] <= times[i - 1])
      throw std::invalid_argument("path grid must be strictly increasing");
  }
}

}  // namespace

Path::Path(std::vector<double> times, std::vector<double> values, Interp interp)
    : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
  validate_grid(times_, values_);
  rebuild_running_max();
}

Path Path::constant(double T, double dt, double x0, Interp interp) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("bad horizon/grid");
  auto m = static_cast<std::size_t>(std::llround(T / dt));
  if (m == 0 || std::abs(static_cast<double>(m) * dt - T) > 1e-12 * std::max(1.0, T))
    throw std::invalid_argument("dt must divide T");
  std::vector<double> ts(m + 1), vs(m + 1, x0);
  for (std::size_t k = 0; k <= m; ++k) ts[k] = static_cast<double>(k) * dt;
  ts[m] = T;
  return Path(std::move(ts), std::move(vs), interp);
}

void Path::rebuild_running_max() {
  abs_running_max_.resize(values_.size());
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    m = std::max(m, std::abs(values_[i]));
    abs_running_max_[i] = m;
  }
}

void Path::set_value(std::size_t i, double v) {
  values_.at(i) = v;
  rebuild_running_max();
}

std::size_t Path::cell_index(double t) const {
  if (t <= times_.front()) return 0;
  if (t >= times_.back()) return times_.size() - 2;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double Path::value_at(double t) const {
  if (t <= 0.0) return values_.front();
  if (t >= times_.back()) return values_.back();
  std::size_t i = cell_index(t);
  if (interp_ == Interp::kStepRight) return values_[i];
  double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double Path::slope_at(double t) const {
  std::size_t i = cell_index(t);
  return (values_[i + 1] - values_[i]) / (times_[i + 1] - times_[i]);
}

HistoryView Path::history(double t) const {
  double tq = std::min(t, times_.back());
  // Samples with time <= tq belong to the window.
  std::size_t k = cell_index(tq);
  if (tq >= times_[k + 1]) k += 1;  // tq exactly on a grid point past cell k
  double ev = value_at(tq);
  double sup = std::max(abs_running_max_[k], std::abs(ev));
  return HistoryView(std::span<const double>(times_.data(), k + 1),
                     std::span<const double>(values_.data(), k + 1), interp_,
                     tq, ev, sup, values_.front());
}

HistoryView::HistoryView(std::span<const double> times,
                         std::span<const double> values, Interp interp,
                         double end_time, double end_value, double sup_abs,
                         double x0)
    : times_(times),
      values_(values),
      interp_(interp),
      end_time_(end_time),
      end_value_(end_value),
      sup_abs_(sup_abs),
      x0_(x0) {}

double HistoryView::value_at(double s) const {
  if (s <= 0.0) return values_.front();
  if (s >= end_time_) return end_value_;
  double tl = times_.back();
  if (s >= tl) {
    // Between the last committed sample and the (possibly provisional) end.
    if (interp_ == Interp::kStepRight) return values_.back();
    double span = end_time_ - tl;
    if (span <= 0.0) return end_value_;
    double w = (s - tl) / span;
    return values_.back() + w * (end_value_ - values_.back());
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (interp_ == Interp::kStepRight) return values_[i];
  double w = (s - times_[i]) / (times_[i + 1] - times_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double HistoryView::average_on(double s0, double s1) const {
  s0 = std::max(0.0, s0);
  s1 = std::min(s1, end_time_);
  if (!(s1 - s0 > 0.0)) return value_at(std::max(s0, s1));
  // Walk the knots inside (s0, s1); each piece is linear or constant.
  double acc = 0.0;
  double prev_t = s0;
  double prev_v = value_at(s0);
  auto it = std::upper_bound(times_.begin(), times_.end(), s0);
  for (; it != times_.end() && *it < s1; ++it) {
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    double seg_v = (interp_ == Interp::kStepRight) ? prev_v
                                                   : 0.5 * (prev_v + values_[i]);
    acc += seg_v * (*it - prev_t);
    prev_t = *it;
    prev_v = values_[i];
  }
  double end_v = value_at(s1);
  double seg_v = (interp_ == Interp::kStepRight) ? prev_v : 0.5 * (prev_v + end_v);
  acc += seg_v * (s1 - prev_t);
  return acc / (s1 - s0);
}

ScratchPath::ScratchPath(std::size_t capacity, Interp interp)
    : interp_(interp) {
  times_.reserve(capacity);
  values_.reserve(capacity);
  times_.resize(capacity);
  values_.resize(capacity);
}

void ScratchPath::reset(double x0) {
  n_ = 1;
  times_[0] = 0.0;
  values_[0] = x0;
  sup_ = std::abs(x0);
  has_prov_ = false;
}

void ScratchPath::commit(double t, double v) {
  if (n_ >= times_.size()) {
    times_.push_back(t);
    values_.push_back(v);
  } else {
    times_[n_] = t;
    values_[n_] = v;
  }
  ++n_;
  sup_ = std::max(sup_, std::abs(v));
  has_prov_ = false;
}

void ScratchPath::set_provisional(double t, double v) {
  has_prov_ = true;
  prov_t_ = t;
  prov_v_ = v;
}

void ScratchPath::clear_provisional() { has_prov_ = false; }

HistoryView ScratchPath::view() const {
  double et = has_prov_ ? prov_t_ : times_[n_ - 1];
  double ev = has_prov_ ? prov_v_ : values_[n_ - 1];
  double sup = has_prov_ ? std::max(sup_, std::abs(prov_v_)) : sup_;
  return HistoryView(std::span<const double>(times_.data(), n_),
                     std::span<const double>(values_.data(), n_), interp_, et,
                     ev, sup, values_[0]);
}

Path ScratchPath::to_path() const {
  return Path(std::vector<double>(times_.begin(), times_.begin() + n_),
              std::vector<double>(values_.begin(), values_.begin() + n_),
              interp_);
}

}  // namespace ldp
