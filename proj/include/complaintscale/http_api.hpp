#pragma once

#include <memory>
#include <string>

#include "complaintscale/service.hpp"

namespace httplib {
class Server;
}

namespace cscale {

// JSON view of an assignment as sent to annotators: ids, times,
// display_order and the post texts in that order. The gold flag is not
// exposed.
Json assignment_json(const Assignment& a, const AnnotationService& service);
Json progress_json(const ServiceProgress& p);
Json profile_json(const AnnotatorProfile& p);

// HTTP front end of an AnnotationService.
//
//   POST /annotators        {"id"}                 201 new, 200 existing
//   GET  /tasks/next?annotator=<id>                200 assignment, 204 no work,
//                                                  403 rejected, 404 unknown
//   POST /judgments         {"annotator_id", "tuple_id", "best_post_id",
//                            "worst_post_id"}      201, 400 invalid, 403, 404,
//                                                  409 duplicate or no assignment
//   GET  /progress                                 200
//   GET  /export?include_excluded=false            200 JSON lines
//
// Errors carry {"error": <code>, "message": <text>}.
class ApiServer {
 public:
  explicit ApiServer(AnnotationService& service);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error on failure.
  int bind(const std::string& host, int port);
  // Serves until stop(). Call after bind().
  void run();
  void stop();

 private:
  AnnotationService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace cscale
