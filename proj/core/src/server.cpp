/*
 Copyright 2026 The forge Authors.
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "forge/server.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json_util.hpp"

namespace forge {

namespace {

using detail::ordered_json;

void send_ok(httplib::Response& res, ordered_json data) {
    ordered_json j;
    j["ok"] = true;
    j["data"] = std::move(data);
    res.status = 200;
    res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    ordered_json j;
    j["ok"] = false;
    j["error"] = message;
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string content_type(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".png") return "image/png";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js") return "text/javascript";
    if (ext == ".css") return "text/css";
    return "application/octet-stream";
}

ordered_json progress_json(const Progress& p) {
    ordered_json j;
    j["total_pairs"] = p.total_pairs;
    j["log_length"] = p.log_length;
    j["labeled"] = ordered_json::object();
    for (const auto& [a, n] : p.labeled) j["labeled"][a] = n;
    return j;
}

ordered_json agreement_json(const AgreementSnapshot& s) {
    ordered_json j;
    j["status"] = s.status;
    j["alpha"] = s.alpha ? ordered_json(*s.alpha) : ordered_json(nullptr);
    j["pairable_units"] = s.pairable_units;
    std::size_t resolved = 0, unsure = 0, none = 0;
    ordered_json pairs = ordered_json::array();
    for (const auto& [id, v] : s.votes) {
        ordered_json e;
        e["pair_id"] = id;
        e["votes"] = v.votes;
        if (v.resolved()) {
            ++resolved;
            e["state"] = "resolved";
            e["label"] = std::string(class_name(*v.cls));
        } else {
            (*v.excluded == Exclusion::UnsureMajority ? unsure : none)++;
            e["state"] = std::string(exclusion_name(*v.excluded));
        }
        pairs.push_back(std::move(e));
    }
    j["resolved"] = resolved;
    j["excluded_unsure_majority"] = unsure;
    j["excluded_no_majority"] = none;
    j["pairs"] = std::move(pairs);
    return j;
}

bool is_remote(const std::string& ref) {
    return ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0 ||
           ref.rfind("data:", 0) == 0;
}

}  // namespace

void apply_address(ServerOptions& options, const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error("address must be host:port, got '" + addr + "'");
    const auto host = addr.substr(0, colon);
    const auto port_text = addr.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (port_text.empty() || *end != '\0' || port < 0 || port > 65535) {
        throw Error("invalid port in address '" + addr + "'");
    }
    if (!host.empty()) options.host = host;
    options.port = static_cast<int>(port);
}

void apply_environment(ServerOptions& options) {
    if (const char* a = std::getenv("FORGE_ADDR"); a && *a) apply_address(options, a);
    if (const char* m = std::getenv("FORGE_MEDIA_ROOT"); m && *m) options.media_root = m;
}

std::string image_url(const std::string& image_ref) {
    if (is_remote(image_ref)) return image_ref;
    std::string ref = image_ref;
    while (!ref.empty() && ref.front() == '/') ref.erase(ref.begin());
    return "/media/" + ref;
}

std::optional<std::filesystem::path> resolve_media(const std::filesystem::path& root,
                                                   const std::string& request_path) {
    if (request_path.empty() || request_path.front() == '/' ||
        request_path.find('\0') != std::string::npos ||
        request_path.find('\\') != std::string::npos) {
        return std::nullopt;
    }
    const std::filesystem::path rel(request_path);
    for (const auto& part : rel) {
        if (part == "..") return std::nullopt;
    }
    std::error_code ec;
    const auto base = std::filesystem::canonical(root, ec);
    if (ec) return std::nullopt;
    const auto full = std::filesystem::weakly_canonical(base / rel, ec);
    if (ec) return std::nullopt;
    // Symlinks may still point outside the root.
    auto [b, f] = std::mismatch(base.begin(), base.end(), full.begin(), full.end());
    if (b != base.end()) return std::nullopt;
    if (!std::filesystem::is_regular_file(full, ec)) return std::nullopt;
    return full;
}

std::string help_page_html() {
    std::string rows;
    for (auto c : kAllClasses) {
        const auto t = triple_of_class(c);
        rows += "<tr><td>" + std::string(class_name(c)) + "</td><td>" + std::to_string(cmi_value(t.cmi)) +
                "</td><td>" + std::to_string(sc_value(t.sc)) + "</td><td>" +
                std::string(stat_value(t.stat)) + "</td></tr>\n";
    }
    return R"(<!doctype html>
<html lang="en"><head><meta charset="utf-8"><title>forge annotation</title>
<style>body{font-family:sans-serif;max-width:48em;margin:2em auto}
td,th{border:1px solid #999;padding:.2em .6em}table{border-collapse:collapse}</style>
</head><body>
<h1>Image-text relation classes</h1>
<p>Label each pair with one class, or Unsure. CMI: do image and text share
depicted concepts (1) or not (0). SC: does the text agree with the image (1),
contradict it (-1) or is there no shared meaning (0). STAT: is the text the
dominant carrier of meaning (T), the image (I) or neither (0).</p>
<table><tr><th>Class</th><th>CMI</th><th>SC</th><th>STAT</th></tr>
)" + rows + R"(</table>
<h2>API</h2>
<ul>
<li>GET /api/pairs/next?annotator=ID</li>
<li>POST /api/labels {"pair_id", "annotator", "label"}</li>
<li>GET /api/progress</li>
<li>GET /api/agreement</li>
<li>GET /api/export</li>
</ul>
</body></html>
)";
}

struct AnnotationServer::Impl {
    AnnotationSession& session;
    ServerOptions options;
    httplib::Server http;
    int port = -1;

    Impl(AnnotationSession& s, ServerOptions o) : session(s), options(std::move(o)) { routes(); }

    void routes() {
        http.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                      std::exception_ptr ep) {
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            } catch (...) {
                send_error(res, 500, "internal error");
            }
        });

        http.Get("/api/pairs/next", [this](const httplib::Request& req, httplib::Response& res) {
            const auto annotator = req.get_param_value("annotator");
            if (annotator.empty()) return send_error(res, 400, "missing 'annotator' parameter");
            try {
                const auto pair = session.next_pair(annotator);
                ordered_json data;
                data["done"] = !pair.has_value();
                if (pair) {
                    data["pair"] = {{"id", pair->id},
                                    {"image_url", image_url(pair->image_ref)},
                                    {"text", pair->text}};
                }
                const auto p = session.progress();
                data["progress"] = {{"labeled", p.labeled.at(annotator)}, {"total", p.total_pairs}};
                send_ok(res, std::move(data));
            } catch (const UnknownAnnotatorError& e) {
                send_error(res, 404, e.what());
            }
        });

        http.Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
            ordered_json body;
            try {
                body = ordered_json::parse(req.body);
            } catch (const ordered_json::parse_error&) {
                return send_error(res, 400, "request body must be JSON");
            }
            if (!body.is_object()) return send_error(res, 400, "request body must be an object");
            for (const char* key : {"pair_id", "annotator", "label"}) {
                if (!body.contains(key) || !body[key].is_string()) {
                    return send_error(res, 400, std::string("missing string field '") + key + "'");
                }
            }
            try {
                const auto r = session.submit_label(body["annotator"].get<std::string>(),
                                                    body["pair_id"].get<std::string>(),
                                                    body["label"].get<std::string>());
                ordered_json data;
                data["pair_id"] = r.pair_id;
                data["annotator"] = r.annotator_id;
                data["label"] = r.label.name();
                data["timestamp"] = format_timestamp(r.timestamp);
                send_ok(res, std::move(data));
            } catch (const InvalidLabelError& e) {
                send_error(res, 400, e.what());
            } catch (const UnknownAnnotatorError& e) {
                send_error(res, 404, e.what());
            } catch (const UnknownPairError& e) {
                send_error(res, 404, e.what());
            }
        });

        http.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
            send_ok(res, progress_json(session.progress()));
        });

        http.Get("/api/agreement", [this](const httplib::Request&, httplib::Response& res) {
            send_ok(res, agreement_json(session.agreement_snapshot()));
        });

        http.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
            const auto content = session.export_labels();
            if (req.get_param_value("format") == "jsonl") {
                res.set_header("Content-Disposition", "attachment; filename=\"labels.jsonl\"");
                res.set_content(content, "application/x-ndjson");
                return;
            }
            send_ok(res, ordered_json{{"format", "jsonl"}, {"content", content}});
        });

        http.Get(R"(/media/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
            if (!options.media_root) return send_error(res, 404, "no media root configured");
            const auto path = resolve_media(*options.media_root, req.matches[1].str());
            if (!path) return send_error(res, 404, "not found");
            res.set_content(read_file(*path), content_type(*path));
        });

        http.Get("/", [this](const httplib::Request&, httplib::Response& res) {
            if (options.ui_root) {
                const auto index = *options.ui_root / "index.html";
                if (std::filesystem::is_regular_file(index)) {
                    res.set_content(read_file(index), "text/html; charset=utf-8");
                    return;
                }
            }
            res.set_content(help_page_html(), "text/html; charset=utf-8");
        });

        if (options.ui_root && std::filesystem::is_directory(*options.ui_root)) {
            http.set_mount_point("/ui", options.ui_root->string());
        }

        http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) send_error(res, res.status, "not found");
        });
    }
};

AnnotationServer::AnnotationServer(AnnotationSession& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
    if (impl_->port >= 0) return impl_->port;
    const auto& o = impl_->options;
    if (o.port == 0) {
        impl_->port = impl_->http.bind_to_any_port(o.host);
    } else if (impl_->http.bind_to_port(o.host, o.port)) {
        impl_->port = o.port;
    }
    if (impl_->port < 0) {
        throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
    }
    return impl_->port;
}

void AnnotationServer::listen() {
    bind();
    impl_->http.listen_after_bind();
}

void AnnotationServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace forge
