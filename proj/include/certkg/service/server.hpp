#pragma once

#include "certkg/service/api.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace certkg::service {

// Binds a Service to cpp-httplib. Each request runs on the server's thread pool
// and goes through Service::handle unchanged.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Returns the bound port (useful with port 0). Throws Io when binding fails.
  int bind(const std::string& host, int port);
  void listen_after_bind();  // blocks until stop()
  void stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace certkg::service
