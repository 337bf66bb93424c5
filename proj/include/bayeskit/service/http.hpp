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

#ifndef BAYESKIT_SERVICE_HTTP_HPP
#define BAYESKIT_SERVICE_HTTP_HPP

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"

#include "bayeskit/service/campaign.hpp"

namespace bayeskit {

/// JSON-over-HTTP ask/tell service backed by a CampaignStore. Mutations on a
/// campaign are serialized by a per-campaign mutex and applied to a loaded
/// copy that is saved only on success.
class HttpService {
 public:
  explicit HttpService(CampaignStore store, std::string static_dir = {}) : store_(std::move(store)) {
    if (!static_dir.empty()) server_.set_mount_point("/", static_dir);
    routes();
  }

  httplib::Server& server() { return server_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  /// Binds an ephemeral port and returns it; call listen_after_bind() next.
  int bind_any(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  static constexpr const char* kId = R"(/campaigns/([A-Za-z0-9_-]+))";

  static void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
  }

  std::shared_ptr<std::mutex> lock_for(const std::string& id) {
    std::lock_guard<std::mutex> g(locks_mu_);
    auto& m = locks_[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  // Maps library errors onto status codes.
  static void guarded(httplib::Response& res, const std::function<void()>& body) {
    try {
      body();
    } catch (const NotFound& e) {
      send_error(res, 404, e.what());
    } catch (const InvalidArgument& e) {
      send_error(res, 400, e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const Conflict& e) {
      send_error(res, 409, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  }

  static Json parse_body(const httplib::Request& req) {
    try {
      return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      throw InvalidArgument(std::string("malformed JSON body: ") + e.what());
    }
  }

  void routes() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server_.Get("/campaigns", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, {{"ids", store_.list()}}); });
    });

    server_.Post("/campaigns", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Json body = parse_body(req);
        const Json& cfg = body.contains("config") ? body.at("config") : body;
        const bool strict = io::get_or<bool>(body, "strict", false);
        Campaign c = create_campaign(loop_config_from_json(cfg), strict);
        store_.save(c);
        Json out = campaign_summary(c);
        send_json(res, 201, out);
      });
    });

    server_.Get(kId, [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, campaign_summary(store_.load(req.matches[1]))); });
    });

    server_.Delete(kId, [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto lock = lock_for(id);
        std::lock_guard<std::mutex> g(*lock);
        store_.remove(id);
        send_json(res, 200, {{"deleted", id}});
      });
    });

    server_.Post(std::string(kId) + "/observations", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const Json body = parse_body(req);
        const Vector x = io::get_finite_vec(io::require(body, "x"), "x");
        const Json& yj = io::require(body, "y");
        if (!yj.is_number()) throw InvalidArgument("y must be a JSON number");
        const auto lock = lock_for(id);
        std::lock_guard<std::mutex> g(*lock);
        Campaign c = store_.load(id);
        campaign_tell(c, x, yj.get<double>());
        store_.save(c);
        send_json(res, 200, campaign_summary(c));
      });
    });

    server_.Get(std::string(kId) + "/suggestion", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto lock = lock_for(id);
        std::lock_guard<std::mutex> g(*lock);
        Campaign c = store_.load(id);
        const bool had = c.pending.has_value();
        const Suggestion s = campaign_suggest(c);
        if (!had) store_.save(c);
        send_json(res, 200, to_json(s));
      });
    });

    server_.Get(std::string(kId) + "/posterior", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Campaign c = store_.load(req.matches[1]);
        const int axis = req.has_param("axis") ? parse_int(req.get_param_value("axis")) : 0;
        const int points = req.has_param("points") ? parse_int(req.get_param_value("points")) : 101;
        std::vector<double> fixed;
        if (req.has_param("fixed") && !req.get_param_value("fixed").empty()) {
          fixed = parse_list(req.get_param_value("fixed"));
        }
        send_json(res, 200, to_json(posterior_slice(c, axis, fixed, points)));
      });
    });

    server_.Get(std::string(kId) + "/trace", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Campaign c = store_.load(req.matches[1]);
        if (req.has_param("format") && req.get_param_value("format") == "csv") {
          std::ostringstream os;
          write_trace_csv(c.state.trace, c.config.bounds.dim(), os);
          res.status = 200;
          res.set_content(os.str(), "text/csv");
          return;
        }
        Json out = Json::array();
        for (const auto& r : c.state.trace) out.push_back(to_json(r));
        send_json(res, 200, out);
      });
    });
  }

 public:
  static int parse_int(const std::string& s) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(s, &pos);
      if (pos != s.size()) throw InvalidArgument("not an integer: " + s);
      return v;
    } catch (const std::logic_error&) {
      throw InvalidArgument("not an integer: " + s);
    }
  }

  /// Comma-separated finite reals.
  static std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size() || !std::isfinite(v)) throw InvalidArgument("not a finite number: " + item);
        out.push_back(v);
      } catch (const std::logic_error&) {
        throw InvalidArgument("not a finite number: " + item);
      }
    }
    if (out.empty()) throw InvalidArgument("empty list");
    return out;
  }

 private:
  CampaignStore store_;
  httplib::Server server_;
  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace bayeskit

#endif  // BAYESKIT_SERVICE_HTTP_HPP
