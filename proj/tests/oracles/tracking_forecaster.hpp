#pragma once

// Test doubles for the causality audit. The controller wrapper publishes the control step
// before delegating; the forecaster records every window it serves and flags any row past
// k + N - 1.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "thermpc/disturbance.hpp"
#include "thermpc/simloop.hpp"

namespace oracle {

class TrackingForecaster final : public thermpc::Forecaster {
 public:
  TrackingForecaster(std::shared_ptr<const thermpc::Forecaster> inner, std::size_t horizon)
      : inner_(std::move(inner)), horizon_(horizon) {}

  thermpc::Matrix forecast(std::size_t k, std::size_t horizon) const override {
    ++calls_;
    const std::size_t last = k + horizon - 1;
    max_row_ = std::max(max_row_, last);
    if (k != current_step_ || last > current_step_ + horizon_ - 1) ++violations_;
    return inner_->forecast(k, horizon);
  }

  void set_step(std::size_t k) { current_step_ = k; }
  std::size_t calls() const { return calls_; }
  std::size_t violations() const { return violations_; }
  std::size_t max_row() const { return max_row_; }

 private:
  std::shared_ptr<const thermpc::Forecaster> inner_;
  std::size_t horizon_;
  std::size_t current_step_ = 0;
  mutable std::size_t calls_ = 0;
  mutable std::size_t violations_ = 0;
  mutable std::size_t max_row_ = 0;
};

class StepPublishingController final : public thermpc::Controller {
 public:
  StepPublishingController(std::unique_ptr<thermpc::Controller> inner, std::shared_ptr<TrackingForecaster> tracker)
      : inner_(std::move(inner)), tracker_(std::move(tracker)) {}

  std::string name() const override { return inner_->name(); }
  thermpc::Vector control(std::int64_t k, const thermpc::Vector& x) override {
    tracker_->set_step(static_cast<std::size_t>(k));
    return inner_->control(k, x);
  }
  nlohmann::json diagnostics() const override { return inner_->diagnostics(); }
  thermpc::SolverStats stats() const override { return inner_->stats(); }

 private:
  std::unique_ptr<thermpc::Controller> inner_;
  std::shared_ptr<TrackingForecaster> tracker_;
};

}  // namespace oracle
