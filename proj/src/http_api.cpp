#include "complaintscale/http_api.hpp"

#include <httplib.h>

#include <sstream>

#include "complaintscale/error.hpp"

namespace cscale {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const UnknownAnnotator& e) {
    send_error(res, 404, "unknown_annotator", e.what());
  } catch (const RejectedAnnotator& e) {
    send_error(res, 403, "rejected_annotator", e.what());
  } catch (const DuplicateSubmission& e) {
    send_error(res, 409, "duplicate_submission", e.what());
  } catch (const NoAssignment& e) {
    send_error(res, 409, "no_assignment", e.what());
  } catch (const InvalidJudgment& e) {
    send_error(res, 400, "invalid_judgment", e.what());
  } catch (const Json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

std::string string_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw std::invalid_argument(std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::size_t id_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_number_unsigned()) {
    throw std::invalid_argument(std::string("missing non-negative integer field '") + key +
                                "'");
  }
  return it->get<std::size_t>();
}

}  // namespace

Json assignment_json(const Assignment& a, const AnnotationService& service) {
  Json posts = Json::array();
  for (std::size_t id : a.display_order) {
    const Post* p = service.post(id);
    posts.push_back({{"post_id", id}, {"text", p ? p->text : ""}});
  }
  return {{"tuple_id", a.tuple_id},       {"annotator_id", a.annotator_id},
          {"issued_at", a.issued_at},     {"expires_at", a.expires_at},
          {"display_order", a.display_order}, {"posts", posts}};
}

Json progress_json(const ServiceProgress& p) {
  return {{"tuples_total", p.tuples_total},
          {"tuples_complete", p.tuples_complete},
          {"judgments_total", p.judgments_total},
          {"judgments_excluded", p.judgments_excluded},
          {"annotators_active", p.annotators_active},
          {"annotators_rejected", p.annotators_rejected}};
}

Json profile_json(const AnnotatorProfile& p) {
  Json j = {{"annotator_id", p.annotator_id},
            {"gold_judged", p.gold_judged},
            {"status", p.status == AnnotatorStatus::kActive ? "active" : "rejected"}};
  j["gold_accuracy"] = p.gold_judged ? Json(p.gold_accuracy) : Json(nullptr);
  return j;
}

ApiServer::ApiServer(AnnotationService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  srv.Post("/annotators", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = Json::parse(req.body);
      const std::string id = string_field(body, "id");
      const bool created = service_.register_annotator(id);
      Json out = profile_json(*service_.profile(id));
      out["created"] = created;
      send_json(res, created ? 201 : 200, out);
    });
  });

  srv.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("annotator")) {
        throw std::invalid_argument("missing query parameter 'annotator'");
      }
      const auto a = service_.next_tuple(req.get_param_value("annotator"));
      if (!a) {
        res.status = 204;
        return;
      }
      send_json(res, 200, assignment_json(*a, service_));
    });
  });

  srv.Post("/judgments", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = Json::parse(req.body);
      const auto result = service_.submit_judgment(
          string_field(body, "annotator_id"), id_field(body, "tuple_id"),
          id_field(body, "best_post_id"), id_field(body, "worst_post_id"));
      Json out = {{"accepted", true}, {"judgment", result.judgment}};
      if (result.profile) out["profile"] = profile_json(*result.profile);
      send_json(res, 201, out);
    });
  });

  srv.Get("/progress", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, progress_json(service_.progress())); });
  });

  srv.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      bool include = false;
      if (req.has_param("include_excluded")) {
        const std::string v = req.get_param_value("include_excluded");
        if (v == "true" || v == "1") {
          include = true;
        } else if (v != "false" && v != "0") {
          throw std::invalid_argument("include_excluded must be true or false");
        }
      }
      std::ostringstream out;
      write_jsonl(out, service_.export_judgments(include));
      res.status = 200;
      res.set_content(out.str(), "application/x-ndjson");
    });
  });
}

ApiServer::~ApiServer() = default;

int ApiServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ApiServer::run() { server_->listen_after_bind(); }

void ApiServer::stop() { server_->stop(); }

}  // namespace cscale
