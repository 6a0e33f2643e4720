#pragma once

#include "inkline/engine.hpp"
#include "inkline/error.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <vector>

namespace inkline::service {

struct Request {
    std::string method; // GET, POST, PUT, DELETE
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    std::string body;
    std::string contentType = "application/json";
};

nlohmann::json envelope_ok(nlohmann::json data);
nlohmann::json envelope_error(const std::string& code, const std::string& message, const std::string& detail = {});

// not_found -> 404, provider failure -> 502, other engine errors -> 400.
int status_for(const Error& e);

// Socketless dispatcher over the engine; the HTTP server is a thin shell around it.
class Router {
public:
    explicit Router(Engine& engine);
    Response handle(const Request& req) const;
    // "METHOD /pattern" lines.
    std::vector<std::string> route_table() const;

private:
    using Params = std::vector<std::string>;
    using Handler = std::function<nlohmann::json(const Params&, const Request&, const nlohmann::json&)>;
    struct Route {
        std::string method;
        std::string pattern;
        std::regex re;
        Handler handler;
    };
    void add(std::string method, std::string pattern, Handler h);

    Engine& engine_;
    std::vector<Route> routes_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks a free port
    std::string corsOrigin = "http://localhost:5173";
    // INKLINE_CORS_ORIGIN overrides corsOrigin.
    static ServerOptions from_env();
};

class Server {
public:
    Server(Engine& engine, ServerOptions options);
    ~Server();
    // Binds and serves on a background thread; returns the bound port.
    int start();
    // Blocks serving on the calling thread.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace inkline::service
