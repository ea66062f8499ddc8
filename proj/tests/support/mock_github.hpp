#pragma once

// In-process GitHub API stand-in for crawler tests: canned issue pages with
// Link-header pagination, per-issue comment pages, and fault injection
// (single 429, malformed pages).

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace mock_github {

struct Options {
  int issue_count = 250;
  int per_page = 100;
  int comments_per_issue = 1;
  bool rate_limit_once = false;      // first issues-page request gets a 429
  int malformed_comments_issue = 0;  // issue number whose comments page is garbage; 0 = none
  std::string label = "approved";
};

class Server {
 public:
  explicit Server(Options options) : options_(options) {
    server_.Get(R"(/repos/([^/]+)/([^/]+)/issues)", [this](const httplib::Request& req,
                                                           httplib::Response& res) {
      ++request_count_;
      if (options_.rate_limit_once && !rate_limited_.exchange(true)) {
        ++rate_limited_count_;
        res.status = 429;
        res.set_header("Retry-After", "0");
        res.set_content("{\"message\":\"rate limited\"}", "application/json");
        return;
      }
      const int page = req.has_param("page") ? std::stoi(req.get_param_value("page")) : 1;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        ++issue_page_hits_[page];
      }

      nlohmann::json issues = nlohmann::json::array();
      const int begin = (page - 1) * options_.per_page;
      const int end = std::min(begin + options_.per_page, options_.issue_count);
      for (int i = begin; i < end; ++i) {
        const int number = i + 1;
        issues.push_back({{"number", number},
                          {"title", "pkg" + std::to_string(number) + ": review"},
                          {"labels", nlohmann::json::array({{{"name", options_.label}}})}});
      }
      if (end < options_.issue_count) {
        res.set_header("Link", "<http://" + host_port() + req.path + "?per_page=" +
                                   std::to_string(options_.per_page) +
                                   "&page=" + std::to_string(page + 1) + ">; rel=\"next\"");
      }
      res.set_content(issues.dump(), "application/json");
    });

    server_.Get(R"(/repos/([^/]+)/([^/]+)/issues/(\d+)/comments)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  ++request_count_;
                  const int number = std::stoi(req.matches[3]);
                  {
                    std::lock_guard<std::mutex> lock(mutex_);
                    ++comment_page_hits_[number];
                  }
                  if (number == options_.malformed_comments_issue) {
                    res.set_content("this is not json {", "application/json");
                    return;
                  }
                  nlohmann::json comments = nlohmann::json::array();
                  for (int c = 0; c < options_.comments_per_issue; ++c) {
                    comments.push_back(
                        {{"id", number * 1000 + c},
                         {"created_at", "2019-07-01T10:00:00Z"},
                         {"body", "Comment " + std::to_string(c) + " on issue " +
                                      std::to_string(number) + ". Needs better tests."},
                         {"html_url", "http://" + host_port() + "/issues/" +
                                          std::to_string(number) + "#c" +
                                          std::to_string(number * 1000 + c)}});
                  }
                  res.set_content(comments.dump(), "application/json");
                });

    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~Server() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string base_url() const { return "http://" + host_port(); }
  std::string host_port() const { return "127.0.0.1:" + std::to_string(port_); }
  int request_count() const { return request_count_; }
  int rate_limited_count() const { return rate_limited_count_; }
  int issue_page_hits(int page) {
    std::lock_guard<std::mutex> lock(mutex_);
    return issue_page_hits_[page];
  }
  int comment_page_hits(int issue) {
    std::lock_guard<std::mutex> lock(mutex_);
    return comment_page_hits_[issue];
  }

 private:
  Options options_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> request_count_{0};
  std::atomic<bool> rate_limited_{false};
  std::atomic<int> rate_limited_count_{0};
  std::mutex mutex_;
  std::map<int, int> issue_page_hits_;
  std::map<int, int> comment_page_hits_;
};

}  // namespace mock_github
