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

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "forge/session.hpp"

namespace forge {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    // Local image_refs are served below /media/ from this directory.
    std::optional<std::filesystem::path> media_root;
    // Directory holding the browser UI (index.html); a built-in help page
    // is served at / when unset or missing.
    std::optional<std::filesystem::path> ui_root;
};

// "host:port" or ":port". Throws Error on anything else.
void apply_address(ServerOptions& options, const std::string& addr);

// Flags win over FORGE_ADDR / FORGE_MEDIA_ROOT; call this before applying flags.
void apply_environment(ServerOptions& options);

// URL an annotator's browser should load for an image_ref: remote URLs pass
// through, anything else maps to /media/<ref>.
std::string image_url(const std::string& image_ref);

// Resolves a /media/ request path below root. nullopt for traversal
// attempts, absolute paths or missing files.
std::optional<std::filesystem::path> resolve_media(const std::filesystem::path& root,
                                                   const std::string& request_path);

// Built-in page for / : class cheat sheet and API overview.
std::string help_page_html();

// JSON HTTP front end of an AnnotationSession.
//   GET  /api/pairs/next?annotator=<id>
//   POST /api/labels            {"pair_id", "annotator", "label"}
//   GET  /api/progress
//   GET  /api/agreement
//   GET  /api/export            (?format=jsonl for the raw file)
//   GET  /media/<path>
//   GET  /
// Every JSON response is {"ok": true, "data": ...} or {"ok": false, "error": "..."}.
class AnnotationServer {
public:
    AnnotationServer(AnnotationSession& session, ServerOptions options);
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    // Binds the socket; returns the bound port. Throws Error on failure.
    int bind();
    // Serves until stop(). bind() is called first if needed.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace forge
