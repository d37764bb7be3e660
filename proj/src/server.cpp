#include "prema/service.hpp"

#include <httplib.h>

#include <iostream>
#include <thread>

namespace prema {

struct HttpServer::Impl {
    explicit Impl(Service& s) : service(s) {
        auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
            std::map<std::string, std::string> query;
            for (const auto& [k, v] : req.params) {
                query.emplace(k, v);
            }
            HttpResponse r = service.handle(req.method, req.path, req.body, query);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        const std::string any = R"(/api/.*)";
        server.Get(any, dispatch);
        server.Post(any, dispatch);
    }

    Service& service;
    httplib::Server server;
    std::thread worker;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() {
    stop();
}

int HttpServer::start(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) {
        throw PremaError(Code::E002, "cannot listen on " + host + ":" + std::to_string(port));
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpServer::wait() {
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

void HttpServer::stop() {
    if (impl_ && impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

void serve_http(Service& service, const std::string& host, int port) {
    HttpServer server(service);
    int bound = server.start(host, port);
    std::cerr << "prema: serving on http://" << host << ":" << bound << "\n";
    server.wait();
}

} // namespace prema
