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

#ifndef BAYESKIT_SERVICE_CLI_HPP
#define BAYESKIT_SERVICE_CLI_HPP

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bayeskit/bench.hpp"
#include "bayeskit/service/campaign.hpp"
#include "bayeskit/service/http.hpp"

namespace bayeskit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Batch run description: a loop configuration plus the bench objective
/// (`objective`) and simulated observation noise (`noise_variance`).
struct RunSpec {
  LoopConfig config;
  std::string objective;
  double noise_variance = 0.0;
};

inline Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path + " is not valid JSON: " + e.what());
  }
}

inline RunSpec run_spec_from_json(Json j) {
  RunSpec r;
  r.objective = io::require(j, "objective").get<std::string>();
  const auto f = make_test_function(r.objective);
  if (!j.contains("bounds")) j["bounds"] = {{"lower", io::vec(f.bounds.lower)}, {"upper", io::vec(f.bounds.upper)}};
  r.config = loop_config_from_json(j);
  if (r.config.bounds.dim() != f.dim()) throw InvalidArgument("bounds do not match the objective's dimension");
  r.noise_variance = io::get_or<double>(j, "noise_variance", 0.0);
  if (!(r.noise_variance >= 0.0)) throw InvalidArgument("noise_variance must be >= 0");
  return r;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path);
}

/// Entry point of the `bayeskit` tool. Returns 0 on success, 2 on usage
/// errors (bad flags, malformed or mismatched inputs) and 1 on runtime
/// errors.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Bayesian optimization engine: batch runs and ask/tell campaigns", "bayeskit"};
  app.require_subcommand(1);

  std::string config_path, out_path, store_dir, id, x_text, what = "trace", fixed_text, host = "127.0.0.1",
                                                        static_dir;
  std::optional<std::uint64_t> seed;
  double y = 0.0;
  int port = 8080, axis = 0, points = 101;
  bool strict = false, timing = false;

  auto* run = app.add_subcommand("run", "run the loop against a bench objective and write the trace CSV");
  run->add_option("--config", config_path, "run configuration JSON")->required();
  run->add_option("--out", out_path, "trace CSV path")->required();
  run->add_option("--seed", seed, "override the configured seed");
  run->add_flag("--timing", timing, "record wall-clock elapsed_ms (otherwise 0)");

  auto* create = app.add_subcommand("new", "create a campaign");
  create->add_option("--config", config_path, "loop configuration JSON")->required();
  create->add_option("--store", store_dir, "campaign directory")->required();
  create->add_flag("--strict", strict, "require tells to match the pending suggestion");

  auto* suggest = app.add_subcommand("suggest", "print the next suggestion as JSON");
  suggest->add_option("--store", store_dir)->required();
  suggest->add_option("--id", id)->required();

  auto* tell = app.add_subcommand("tell", "record an observation");
  tell->add_option("--store", store_dir)->required();
  tell->add_option("--id", id)->required();
  tell->add_option("--x", x_text, "comma-separated coordinates")->required();
  tell->add_option("--y", y, "observed value")->required();

  auto* serve = app.add_subcommand("serve", "serve the HTTP API");
  serve->add_option("--store", store_dir)->required();
  serve->add_option("--port", port);
  serve->add_option("--host", host);
  serve->add_option("--static", static_dir, "directory served at /");

  auto* exp = app.add_subcommand("export", "export a campaign trace or posterior slice");
  exp->add_option("--store", store_dir)->required();
  exp->add_option("--id", id)->required();
  exp->add_option("--what", what)->check(CLI::IsMember({"trace", "posterior-slice"}));
  exp->add_option("--out", out_path)->required();
  exp->add_option("--axis", axis);
  exp->add_option("--fixed", fixed_text, "comma-separated point for the other coordinates");
  exp->add_option("--points", points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (run->parsed()) {
      RunSpec spec = run_spec_from_json(read_json_file(config_path));
      if (seed) spec.config.seed = *seed;
      if (timing) spec.config.timing = true;
      const auto f = make_test_function(spec.objective);
      const auto trace = run_loop(spec.config, f.evaluator, spec.noise_variance);
      std::ostringstream os;
      write_trace_csv(trace, f.dim(), os);
      write_text_file(out_path, os.str());
      return kExitOk;
    }
    if (create->parsed()) {
      const CampaignStore store(store_dir);
      const Campaign c = create_campaign(loop_config_from_json(read_json_file(config_path)), strict);
      store.save(c);
      out << Json{{"id", c.id}}.dump() << '\n';
      return kExitOk;
    }
    if (suggest->parsed()) {
      const CampaignStore store(store_dir);
      Campaign c = store.load(id);
      const bool had = c.pending.has_value();
      const Suggestion s = campaign_suggest(c);
      if (!had) store.save(c);
      out << to_json(s).dump() << '\n';
      return kExitOk;
    }
    if (tell->parsed()) {
      const CampaignStore store(store_dir);
      const auto xs = HttpService::parse_list(x_text);
      Campaign c = store.load(id);
      campaign_tell(c, Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size())), y);
      store.save(c);
      out << campaign_summary(c).dump() << '\n';
      return kExitOk;
    }
    if (serve->parsed()) {
      HttpService service(CampaignStore(store_dir), static_dir);
      err << "listening on " << host << ':' << port << '\n';
      if (!service.listen(host, port)) throw std::runtime_error("cannot listen on port " + std::to_string(port));
      return kExitOk;
    }
    if (exp->parsed()) {
      const CampaignStore store(store_dir);
      Campaign c = store.load(id);
      std::ostringstream os;
      if (what == "trace") {
        write_trace_csv(c.state.trace, c.config.bounds.dim(), os);
      } else {
        const auto fixed = fixed_text.empty() ? std::vector<double>{} : HttpService::parse_list(fixed_text);
        os << to_json(posterior_slice(c, axis, fixed, points)).dump(2) << '\n';
      }
      write_text_file(out_path, os.str());
      return kExitOk;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace bayeskit

#endif  // BAYESKIT_SERVICE_CLI_HPP
