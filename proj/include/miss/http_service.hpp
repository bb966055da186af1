#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "miss/service.hpp"

namespace miss::service {

namespace detail {

inline int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::io: return 500;
    default: return 422;
  }
}

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const Error& e) {
  json body = {{"error", e.what()}, {"kind", to_string(e.kind())}};
  if (!e.stage().empty()) body["stage"] = e.stage();
  send_json(res, status_for(e.kind()), body);
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, e);
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}, {"kind", "internal"}});
  }
}

inline PreviewRequest request_from(const httplib::Request& req) {
  json body;
  try {
    body = req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::invalid_argument, std::string("request body is not valid JSON: ") + e.what());
  }
  std::vector<std::string> bad;
  auto parsed = parse_preview_request(body, bad);
  if (!bad.empty()) {
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
    throw Error(ErrorKind::invalid_argument, "invalid parameters: " + list, "validation");
  }
  return parsed;
}

inline json session_json(const Session& s) {
  return {{"id", s.id}, {"width", s.truth.width()}, {"height", s.truth.height()}, {"contour", to_json(s.contour)}};
}

}  // namespace detail

// Registers the JSON API on `server`:
//   POST /sessions                 multipart field "mask" (or raw body)
//   GET  /sessions/{id}
//   POST /sessions/{id}/preview
//   POST /sessions/{id}/export     ?download=mask returns the raw file
//   GET  /healthz
inline void register_routes(httplib::Server& server, SessionStore& store) {
  using httplib::Request;
  using httplib::Response;

  server.Get("/healthz", [](const Request&, Response& res) { detail::send_json(res, 200, {{"status", "ok"}}); });

  server.Post("/sessions", [&store](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      const std::string bytes = req.has_file("mask") ? req.get_file_value("mask").content : req.body;
      if (bytes.empty()) throw Error(ErrorKind::invalid_argument, "no mask uploaded (multipart field 'mask')");
      auto s = store.create({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
      detail::send_json(res, 201, detail::session_json(*s));
    });
  });

  server.Get(R"(/sessions/([^/]+))", [&store](const Request& req, Response& res) {
    detail::guarded(res, [&] { detail::send_json(res, 200, detail::session_json(*store.get(req.matches[1]))); });
  });

  server.Post(R"(/sessions/([^/]+)/preview)", [&store](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      auto session = store.get(req.matches[1]);
      detail::send_json(res, 200, preview_json(preview(*session, detail::request_from(req))));
    });
  });

  server.Post(R"(/sessions/([^/]+)/export)", [&store](const Request& req, Response& res) {
    detail::guarded(res, [&] {
      auto session = store.get(req.matches[1]);
      auto out = export_mask(*session, detail::request_from(req));
      if (req.get_param_value("download") == "mask") {
        res.status = 200;
        res.set_header("Content-Disposition", "attachment; filename=\"" + out.filename + "\"");
        res.set_content(std::string(out.mask_file.begin(), out.mask_file.end()),
                        session->format == MaskFormat::png ? "image/png" : "image/x-portable-graymap");
        return;
      }
      detail::send_json(res, 200,
                        {{"filename", out.filename},
                         {"mask_base64", base64_encode(out.mask_file)},
                         {"provenance", out.provenance}});
    });
  });
}

}  // namespace miss::service
