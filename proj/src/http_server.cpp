#include "slosim/http_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include "slosim/json_io.hpp"

namespace slosim {

using nlohmann::json;

struct ControlServer::Impl {
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

ControlServer::ControlServer(Environment& env, MetricStore& store)
    : impl_(std::make_unique<Impl>()), env_(env), store_(store) {
  auto& srv = impl_->server;

  srv.Get("/services", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mutex_);
    reply(res, 200,
          json{{"services", env_.specs()}, {"budget", env_.current().budget}});
  });

  srv.Get("/metrics", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!req.has_param("service")) {
      reply(res, 400, json{{"error", "missing query parameter: service"}});
      return;
    }
    std::string id = req.get_param_value("service");
    if (find_spec(env_.specs(), id) == nullptr) {
      reply(res, 404, json{{"error", "unknown service " + id}});
      return;
    }
    const auto& records = store_.records_for(id);
    std::size_t count = records.size();
    if (req.has_param("last")) {
      try {
        long n = std::stol(req.get_param_value("last"));
        if (n < 0) throw std::invalid_argument("negative");
        count = std::min<std::size_t>(count, static_cast<std::size_t>(n));
      } catch (const std::exception&) {
        reply(res, 400, json{{"error", "last must be a non-negative integer"}});
        return;
      }
    }
    json out = json::array();
    for (std::size_t i = records.size() - count; i < records.size(); ++i)
      out.push_back(json{{"cycle", records[i].cycle}, {"metrics", records[i].metrics}});
    reply(res, 200, json{{"service", id}, {"records", out}});
  });

  srv.Get("/fulfillment", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mutex_);
    json services = json::object();
    std::vector<double> per_service;
    std::int64_t cycle = -1;
    for (const auto& spec : env_.specs()) {
      const auto& records = store_.records_for(spec.id);
      if (records.empty()) continue;
      double f = service_fulfillment(records.back().metrics, spec.slos);
      services[spec.id] = f;
      per_service.push_back(f);
      cycle = std::max(cycle, records.back().cycle);
    }
    json out{{"services", services}};
    if (per_service.empty()) {
      out["global"] = nullptr;
      out["cycle"] = nullptr;
    } else {
      out["global"] = global_fulfillment(per_service);
      out["cycle"] = cycle;
    }
    reply(res, 200, out);
  });

  srv.Post(R"(/services/([^/]+)/parameters)",
           [this](const httplib::Request& req, httplib::Response& res) {
             std::lock_guard<std::mutex> lock(mutex_);
             std::string id = req.matches[1];
             if (find_spec(env_.specs(), id) == nullptr) {
               reply(res, 404, json{{"error", "unknown service " + id}});
               return;
             }
             json body = json::parse(req.body, nullptr, false);
             if (body.is_discarded() || !body.is_object()) {
               reply(res, 400, json{{"error", "body must be a JSON object"}});
               return;
             }
             std::map<std::string, double> values;
             for (const auto& [key, v] : body.items()) {
               if (!v.is_number()) {
                 reply(res, 400, json{{"error", key + " must be a number"}});
                 return;
               }
               values[key] = v.get<double>();
             }
             // Posted values merge into the current assignment, so partial
             // updates are allowed.
             Assignment next = env_.current();
             for (const auto& [name, value] : values) next.set(id, name, value);
             auto violations = env_.apply(next);
             if (!violations.empty()) {
               reply(res, 400, json{{"ok", false}, {"violations", violations}});
               return;
             }
             reply(res, 200, json{{"ok", true}, {"assignment", env_.current()}});
           });

  srv.Post("/step", [this](const httplib::Request&, httplib::Response& res) {
    std::int64_t cycle = step_once();
    std::lock_guard<std::mutex> lock(mutex_);
    json records = json::array();
    for (const auto& spec : env_.specs()) {
      const auto& list = store_.records_for(spec.id);
      if (!list.empty() && list.back().cycle == cycle) records.push_back(list.back());
    }
    reply(res, 200, json{{"cycle", cycle}, {"records", records}});
  });
}

ControlServer::~ControlServer() { stop(); }

int ControlServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    port_ = srv.bind_to_any_port(host);
    if (port_ < 0) throw std::runtime_error("cannot bind to " + host);
  } else {
    if (!srv.bind_to_port(host, port))
      throw std::runtime_error("cannot bind to " + host + ":" + std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  srv.wait_until_ready();
  return port_;
}

void ControlServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::int64_t ControlServer::step_once() {
  std::lock_guard<std::mutex> lock(mutex_);
  std::int64_t cycle = env_.last_cycle() + 1;
  auto records = env_.step(cycle);
  for (const auto& r : records) store_.append(r);
  return cycle;
}

}  // namespace slosim
