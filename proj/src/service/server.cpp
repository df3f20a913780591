// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include "stepwise/service.hpp"

namespace stepwise {

struct Server::Impl {
  httplib::Server http;
};

Server::Server(const Service& service) : impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  const Service* svc = &service;
  std::string origin = service.config().cors_origin;
  http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto route = [svc](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = svc->handle({req.method, req.path, req.body});
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  http.Get(R"(/.*)", route);
  http.Post(R"(/.*)", route);
  http.Put(R"(/.*)", route);
  http.Delete(R"(/.*)", route);
  http.Patch(R"(/.*)", route);
  http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace stepwise
