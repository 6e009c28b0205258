#include "fk/cost_model.hpp"

#include <cmath>

namespace fk {

namespace {

double started(double s_kb, double unit) { return std::ceil(s_kb / unit); }

void require_size(double s_kb) {
  if (!(s_kb > 0)) throw std::invalid_argument("size must be positive");
}

}  // namespace

double CostParams::w_dd(double s_kb) const { return started(s_kb, 1) * w_dd_per_kb; }
double CostParams::r_dd(double s_kb) const { return started(s_kb, 4) * r_dd_per_4kb; }
double CostParams::q(double s_kb) const { return started(s_kb, 64) * q_per_64kb; }

void CostParams::validate() const {
  for (const double v : {w_s3, r_s3, w_dd_per_kb, r_dd_per_4kb, q_per_64kb, f_w.intercept, f_w.slope, f_d.intercept,
                         f_d.slope}) {
    if (v < 0) throw std::invalid_argument("cost parameters must be non-negative");
  }
}

CostParams parse_cost_params(const nlohmann::json& doc) {
  CostParams p;
  auto num = [&](const char* key, double& out) {
    if (doc.contains(key)) out = doc.at(key).get<double>();
  };
  num("w_s3", p.w_s3);
  num("r_s3", p.r_s3);
  num("w_dd_per_kb", p.w_dd_per_kb);
  num("r_dd_per_4kb", p.r_dd_per_4kb);
  num("q_per_64kb", p.q_per_64kb);
  for (auto [key, fn] : {std::pair{"f_w", &p.f_w}, std::pair{"f_d", &p.f_d}}) {
    if (!doc.contains(key)) continue;
    const auto& f = doc.at(key);
    fn->intercept = f.value("intercept", fn->intercept);
    fn->slope = f.value("slope", fn->slope);
  }
  p.validate();
  return p;
}

double cost_read(const CostParams& p, double s_kb) {
  require_size(s_kb);
  return p.r_s3;
}

double cost_write(const CostParams& p, double s_kb) {
  require_size(s_kb);
  return 2 * p.q(s_kb) + 3 * p.w_dd(1) + p.r_dd(1) + p.w_s3 + p.f_w.at(s_kb) + p.f_d.at(s_kb);
}

double break_even(const CostParams& p, double read_fraction, double zk_daily_cost, double s_kb) {
  if (read_fraction < 0 || read_fraction > 1) throw std::invalid_argument("read fraction must be in [0, 1]");
  if (!(zk_daily_cost > 0)) throw std::invalid_argument("daily cost must be positive");
  const double per_request = read_fraction * cost_read(p, s_kb) + (1 - read_fraction) * cost_write(p, s_kb);
  if (per_request <= 0) throw std::domain_error("a request costs nothing; break-even is undefined");
  return zk_daily_cost / per_request;
}

std::vector<ZkPreset> zk_presets() {
  constexpr double kStorage3 = 4.8 / 30;
  constexpr double kStorage9 = 14.4 / 30;
  std::vector<ZkPreset> out;
  for (const auto& [vm, daily] : {std::pair{"t3.small", 0.5}, std::pair{"t3.medium", 1.0}, std::pair{"t3.large", 2.0}}) {
    const std::string name(vm);
    out.push_back({name, daily, "quoted daily cost read as the whole deployment"});
    out.push_back({name + "-per-vm", 3 * daily, "quoted daily cost read per VM, three VMs"});
    out.push_back({name + "-per-vm+storage", 3 * daily + kStorage3, "three VMs plus 20 GB each, prorated daily"});
    out.push_back({name + "-x9+storage", 9 * daily + kStorage9, "nine VMs for matching durability, with storage"});
  }
  return out;
}

std::optional<ZkPreset> find_zk_preset(std::string_view name) {
  for (auto& p : zk_presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace fk
