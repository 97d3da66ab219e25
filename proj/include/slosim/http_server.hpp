#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "slosim/environment.hpp"
#include "slosim/metrics_store.hpp"

// HTTP control surface over a live environment, for externally implemented
// agents:
//   GET  /services                    the service specifications and budget
//   GET  /metrics?service=id&last=n   recent metric records (all if no n)
//   GET  /fulfillment                 latest per-service and global scores
//   POST /services/{id}/parameters    merge values into the current
//                                     assignment; 400 + violations if invalid
//   POST /step                        advance the simulation one cycle
//
// Requests are serialized through one mutex: reads see consistent
// snapshots, parameter writes and steps never interleave.

namespace slosim {

class ControlServer {
 public:
  // The environment and store must outlive the server.
  ControlServer(Environment& env, MetricStore& store);
  ~ControlServer();

  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  // Binds to an OS-assigned free port and serves on a background thread;
  // returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  int port() const { return port_; }

  // Advances the environment one cycle and appends the records; also the
  // handler behind POST /step. Returns the new cycle index.
  std::int64_t step_once();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Environment& env_;
  MetricStore& store_;
  std::mutex mutex_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace slosim
