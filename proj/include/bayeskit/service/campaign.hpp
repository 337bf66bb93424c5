// Copyright 2026 The bayeskit Authors. All Rights Reserved.
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
// =============================================================================

#ifndef BAYESKIT_SERVICE_CAMPAIGN_HPP
#define BAYESKIT_SERVICE_CAMPAIGN_HPP

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bayeskit/driver.hpp"
#include "bayeskit/service/serialize.hpp"

namespace bayeskit {

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncompatibleVersion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request conflicts with the campaign state (closed campaign, or a tell
/// that does not match the pending suggestion in strict mode).
class Conflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CampaignStatus { Active, Closed };

struct Campaign {
  std::string id;
  std::string created_at;  // UTC, ISO 8601
  LoopConfig config;
  CampaignState state;
  std::optional<Suggestion> pending;
  double pending_elapsed_ms = 0.0;
  CampaignStatus status = CampaignStatus::Active;
  bool strict = false;
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string new_campaign_id() {
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline bool valid_campaign_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

inline Campaign create_campaign(LoopConfig config, bool strict = false, std::string id = new_campaign_id()) {
  config.validate();
  if (!valid_campaign_id(id)) throw InvalidArgument("invalid campaign id: " + id);
  Campaign c;
  c.id = std::move(id);
  c.created_at = utc_timestamp();
  c.state = CampaignState(config.bounds.dim());
  c.config = std::move(config);
  c.strict = strict;
  return c;
}

inline std::string to_string(CampaignStatus s) { return s == CampaignStatus::Active ? "active" : "closed"; }

inline Json to_json(const Campaign& c) {
  Json trace = Json::array();
  for (const auto& r : c.state.trace) trace.push_back(to_json(r));
  return {{"schema_version", kSchemaVersion},
          {"id", c.id},
          {"created_at", c.created_at},
          {"status", to_string(c.status)},
          {"strict", c.strict},
          {"config", to_json(c.config)},
          {"observations", to_json(c.state.data)},
          {"trace", trace},
          {"pending_suggestion", c.pending ? to_json(*c.pending) : Json(nullptr)},
          {"pending_elapsed_ms", io::num(c.pending_elapsed_ms)}};
}

inline Campaign campaign_from_json(const Json& j) {
  const auto version = j.is_object() ? j.value("schema_version", 0) : 0;
  if (version != kSchemaVersion) {
    throw IncompatibleVersion("campaign schema_version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kSchemaVersion) + ")");
  }
  try {
    Campaign c;
    c.id = io::require(j, "id").get<std::string>();
    c.created_at = io::require(j, "created_at").get<std::string>();
    const auto status = io::require(j, "status").get<std::string>();
    if (status != "active" && status != "closed") throw InvalidArgument("unknown status " + status);
    c.status = status == "active" ? CampaignStatus::Active : CampaignStatus::Closed;
    c.strict = io::get_or<bool>(j, "strict", false);
    c.config = loop_config_from_json(io::require(j, "config"));
    c.state = CampaignState(c.config.bounds.dim());
    c.state.data = observations_from_json(io::require(j, "observations"), c.config.bounds.dim());
    for (const auto& r : io::require(j, "trace")) c.state.trace.push_back(trace_record_from_json(r));
    if (c.state.trace.size() != c.state.data.size()) throw InvalidArgument("trace and observations differ in length");
    const Json& p = io::require(j, "pending_suggestion");
    if (!p.is_null()) c.pending = suggestion_from_json(p);
    c.pending_elapsed_ms = io::get_num(j.value("pending_elapsed_ms", Json(0.0)));
    return c;
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("campaign document is invalid: ") + e.what());
  } catch (const Json::exception& e) {
    throw ParseError(std::string("campaign document is invalid: ") + e.what());
  }
}

/// One JSON document per campaign in a directory. Writes go to a temporary
/// file that is renamed over the target, so readers never see a partial
/// document.
class CampaignStore {
 public:
  explicit CampaignStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path_for(const std::string& id) const {
    if (!valid_campaign_id(id)) throw NotFound("no campaign with id '" + id + "'");
    return dir_ / (id + ".json");
  }

  bool exists(const std::string& id) const {
    return valid_campaign_id(id) && std::filesystem::exists(path_for(id));
  }

  std::string save(const Campaign& c) const {
    const auto target = path_for(c.id);
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
      os << to_json(c).dump(2) << '\n';
      os.flush();
      if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
    return c.id;
  }

  Campaign load(const std::string& id) const {
    const auto p = path_for(id);
    std::ifstream is(p, std::ios::binary);
    if (!is) throw NotFound("no campaign with id '" + id + "'");
    std::stringstream buf;
    buf << is.rdbuf();
    Json j;
    try {
      j = Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
      throw ParseError("campaign '" + id + "' is not valid JSON: " + e.what());
    }
    return campaign_from_json(j);
  }

  void remove(const std::string& id) const {
    if (!std::filesystem::remove(path_for(id))) throw NotFound("no campaign with id '" + id + "'");
  }

  std::vector<std::string> list() const {
    std::vector<std::string> ids;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
      if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  std::filesystem::path dir_;
};

inline std::string save_campaign(const Campaign& c, const CampaignStore& store) { return store.save(c); }
inline Campaign load_campaign(const std::string& id, const CampaignStore& store) { return store.load(id); }

/// Returns the pending suggestion, computing and recording it if absent.
inline Suggestion campaign_suggest(Campaign& c) {
  if (c.status == CampaignStatus::Closed) throw Conflict("campaign '" + c.id + "' is closed");
  if (!c.pending) {
    const auto t0 = std::chrono::steady_clock::now();
    c.pending = ask(c.config, c.state);
    c.pending_elapsed_ms = c.config.timing
        ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()
        : 0.0;
  }
  return *c.pending;
}

/// Records an observation. A told point that matches a pending suggestion
/// inherits its acquisition value; in strict mode any other point is a
/// conflict.
inline void campaign_tell(Campaign& c, const Vector& x, double y) {
  if (c.status == CampaignStatus::Closed) throw Conflict("campaign '" + c.id + "' is closed");
  require_dim(x, c.config.bounds.dim(), "tell");
  if (!c.config.bounds.contains(x)) throw InvalidArgument("tell: x is outside the campaign bounds");
  if (!std::isfinite(y)) throw InvalidArgument("tell: y must be a finite number");
  std::optional<std::size_t> match;
  if (c.pending) {
    const double tol = 1e-12 * c.config.bounds.diagonal();
    for (std::size_t i = 0; i < c.pending->points.size(); ++i) {
      if ((c.pending->points[i] - x).norm() <= tol) {
        match = i;
        break;
      }
    }
  }
  if (c.strict && !match) throw Conflict("tell: x does not match the pending suggestion");
  double acq = std::numeric_limits<double>::quiet_NaN();
  double ms = 0.0;
  if (match) {
    acq = c.pending->acq_value;
    ms = c.pending_elapsed_ms;
  }
  ingest_observation(c.config, c.state, x, y, acq, ms);
  if (match && c.pending->points.size() > 1) {
    c.pending->points.erase(c.pending->points.begin() + static_cast<std::ptrdiff_t>(*match));
  } else {
    c.pending.reset();
    c.pending_elapsed_ms = 0.0;
  }
  if (c.state.data.size() >= static_cast<std::size_t>(c.config.budget)) {
    c.status = CampaignStatus::Closed;
    c.pending.reset();
  }
}

struct PosteriorSlice {
  std::vector<double> xs, mean, lower95, upper95;
};

/// Posterior mean and mu +- 1.96 sigma along coordinate `axis`, with the
/// other coordinates held at `fixed` (the box center when empty).
inline PosteriorSlice posterior_slice(Campaign& c, int axis, const std::vector<double>& fixed, int points) {
  const auto& b = c.config.bounds;
  const Eigen::Index d = b.dim();
  if (axis < 0 || axis >= d) throw InvalidArgument("posterior: axis out of range");
  if (points < 2 || points > 10000) throw InvalidArgument("posterior: points must be in [2, 10000]");
  Vector base = b.center();
  if (!fixed.empty()) {
    if (static_cast<Eigen::Index>(fixed.size()) != d) throw InvalidArgument("posterior: fixed must have d values");
    for (Eigen::Index i = 0; i < d; ++i) base[i] = fixed[static_cast<std::size_t>(i)];
    if (!base.allFinite()) throw InvalidArgument("posterior: fixed values must be finite");
  }
  const auto ps = fit_posteriors(c.config, c.state);
  PosteriorSlice out;
  for (int k = 0; k < points; ++k) {
    Vector x = base;
    x[axis] = b.lower[axis] + (b.upper[axis] - b.lower[axis]) * k / (points - 1);
    MixturePredictive mix;
    for (const auto& p : ps) mix.components.push_back(predict(p, x));
    const double m = mix.mean();
    const double half = 1.96 * std::sqrt(mix.variance());
    out.xs.push_back(x[axis]);
    out.mean.push_back(m);
    out.lower95.push_back(m - half);
    out.upper95.push_back(m + half);
  }
  return out;
}

inline Json to_json(const PosteriorSlice& s) {
  auto arr = [](const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(io::num(x));
    return a;
  };
  return {{"xs", arr(s.xs)}, {"mean", arr(s.mean)}, {"lower95", arr(s.lower95)}, {"upper95", arr(s.upper95)}};
}

/// Compact view used by the HTTP summary endpoint.
inline Json campaign_summary(const Campaign& c) {
  Json best = nullptr;
  if (!c.state.data.empty()) {
    const auto& y = c.state.data.values();
    const auto i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    best = {{"x", io::vec(c.state.data.point(i))}, {"y", io::num(y[i])}};
  }
  return {{"id", c.id},
          {"created_at", c.created_at},
          {"status", to_string(c.status)},
          {"strict", c.strict},
          {"dim", c.config.bounds.dim()},
          {"n", c.state.data.size()},
          {"n0", c.config.n0},
          {"budget", c.config.budget},
          {"acq_kind", to_string(c.config.acquisition.kind)},
          {"bounds", {{"lower", io::vec(c.config.bounds.lower)}, {"upper", io::vec(c.config.bounds.upper)}}},
          {"observations", to_json(c.state.data)},
          {"best", best},
          {"pending_suggestion", c.pending ? to_json(*c.pending) : Json(nullptr)},
          {"config", to_json(c.config)}};
}

}  // namespace bayeskit

#endif  // BAYESKIT_SERVICE_CAMPAIGN_HPP
