// Copyright 2026 The fksim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fk {

/// A linear cost in the payload size: intercept + slope * s.
struct LinearCost {
  double intercept = 0;
  double slope = 0;
  double at(double s_kb) const { return intercept + slope * s_kb; }
};

/// Per-operation prices in dollars, sizes in kilobytes.
struct CostParams {
  double w_s3 = 5e-6;               // object write, flat
  double r_s3 = 4e-7;               // object read, flat
  double w_dd_per_kb = 1.25e-6;     // key-value write, per started kB
  double r_dd_per_4kb = 0.25e-6;    // key-value read, per started 4 kB
  double q_per_64kb = 0.5e-6;       // queue push, per started 64 kB
  // Function cost models. The defaults put f_w + f_d at 1.2e-6 for a 1 kB
  // write, which makes 100,000 writes cost $1.12.
  LinearCost f_w{0.6e-6, 0};
  LinearCost f_d{0.6e-6, 0};

  double w_dd(double s_kb) const;
  double r_dd(double s_kb) const;
  double q(double s_kb) const;

  /// Throws std::invalid_argument if any price is negative.
  void validate() const;
};

/// Reads keys matching the field names; missing keys keep their defaults.
CostParams parse_cost_params(const nlohmann::json& doc);

double cost_read(const CostParams& p, double s_kb);
double cost_write(const CostParams& p, double s_kb);

/// Requests per day at which the mixed per-request cost equals the daily
/// cost of a ZooKeeper deployment. Throws std::domain_error when a request
/// costs nothing and std::invalid_argument on out-of-range inputs.
double break_even(const CostParams& p, double read_fraction, double zk_daily_cost, double s_kb);

/// A named ZooKeeper deployment with its daily cost.
struct ZkPreset {
  std::string name;
  double daily_cost = 0;
  std::string note;
};

/// Quoted VM prices read both as whole-deployment and as per-VM figures (the
/// latter for three VMs), with and without prorated block storage.
std::vector<ZkPreset> zk_presets();
std::optional<ZkPreset> find_zk_preset(std::string_view name);

}  // namespace fk
