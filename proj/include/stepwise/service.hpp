// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "stepwise/kernel.hpp"

namespace stepwise {

constexpr int kSchemaVersion = 1;

struct ServiceConfig {
  std::string logic_dir;
  std::size_t step_limit_cap = kDefaultStepLimit;
  std::string cors_origin = "*";
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

// Request handling over an immutable logic table. handle() is a pure
// function of its argument.
class Service {
 public:
  explicit Service(ServiceConfig config);
  Service(ServiceConfig config, std::map<std::string, Logic> logics);

  HttpResponse handle(const HttpRequest& req) const;

  HttpResponse list_logics() const;
  HttpResponse get_logic(const std::string& name) const;
  HttpResponse check(const nlohmann::json& req) const;

  const ServiceConfig& config() const { return config_; }
  const std::map<std::string, Logic>& logics() const { return logics_; }

 private:
  HttpResponse check_snm(const nlohmann::json& req) const;
  HttpResponse check_kernel(const Logic& l, const nlohmann::json& req) const;

  ServiceConfig config_;
  std::map<std::string, Logic> logics_;
};

// Catalog of the substitution rules in the get_logic shape.
nlohmann::json snm_logic_json();

// HTTP front end. bind() with port 0 picks a free port.
class Server {
 public:
  explicit Server(const Service& service);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  // Returns once listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stepwise
