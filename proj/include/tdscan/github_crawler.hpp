#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <future>
#include <memory>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tdscan/error.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

using json = nlohmann::json;

struct RepoCoordinate {
  std::string api_base = "https://api.github.com";
  std::string owner;
  std::string repo;
};

struct CrawlOptions {
  std::string platform;
  std::string approved_label;
  std::string token;  // empty -> unauthenticated
  std::string package_title_regex = R"(([A-Za-z0-9][A-Za-z0-9._-]*))";
  int per_page = 100;
  int concurrency = 4;  // bounded concurrent per-issue comment fetches
  int max_retries = 3;
  double backoff_cap_seconds = 60.0;
};

struct CrawlStats {
  std::size_t issues_seen = 0;
  std::size_t comments_emitted = 0;
  std::size_t pages_fetched = 0;
  std::size_t malformed_pages = 0;  // skipped with a warning; triggers partial exit
  std::size_t unmatched_titles = 0;
  std::size_t rate_limit_waits = 0;

  bool partial() const { return malformed_pages > 0; }
};

namespace detail {

struct IssueRef {
  std::int64_t number = 0;
  std::string package;
};

inline std::string url_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    const bool unreserved = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

inline std::string link_header_next(const std::string& link) {
  // Link: <https://host/path?page=2>; rel="next", <...>; rel="last"
  std::size_t pos = 0;
  while (pos < link.size()) {
    std::size_t open = link.find('<', pos);
    if (open == std::string::npos) break;
    std::size_t close = link.find('>', open);
    if (close == std::string::npos) break;
    std::string url = link.substr(open + 1, close - open - 1);
    std::size_t segment_end = link.find(',', close);
    std::string params = link.substr(close, (segment_end == std::string::npos ? link.size() : segment_end) - close);
    if (params.find("rel=\"next\"") != std::string::npos) return url;
    pos = segment_end == std::string::npos ? link.size() : segment_end + 1;
  }
  return {};
}

// strips scheme+host so the path can be re-requested on the bound client
inline std::string url_to_path(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) return url;
  std::size_t path = url.find('/', scheme + 3);
  return path == std::string::npos ? "/" : url.substr(path);
}

class GithubClient {
 public:
  GithubClient(const std::string& api_base, const CrawlOptions& options)
      : client_(api_base.c_str()), options_(options) {
    client_.set_connection_timeout(30);
    client_.set_read_timeout(60);
    client_.set_follow_location(true);
  }

  // GET with rate-limit backoff; returns the response or throws
  httplib::Result get(const std::string& path, CrawlStats& stats) {
    httplib::Headers headers = {{"User-Agent", "tdscan"},
                                {"Accept", "application/vnd.github+json"}};
    if (!options_.token.empty()) headers.emplace("Authorization", "token " + options_.token);

    for (int attempt = 0;; ++attempt) {
      auto res = client_.Get(path.c_str(), headers);
      if (!res) throw Error(ErrorKind::IoError, "request failed for " + path);

      const bool limited =
          res->status == 429 ||
          (res->status == 403 && res->get_header_value("X-RateLimit-Remaining") == "0");
      if (!limited) return res;

      double wait = 1.0;
      if (res->has_header("Retry-After")) {
        try {
          wait = std::stod(res->get_header_value("Retry-After"));
        } catch (...) {
          wait = 1.0;
        }
      }
      wait = std::min(std::max(wait, 0.0), options_.backoff_cap_seconds);
      if (attempt >= options_.max_retries) {
        throw RateLimitedError(wait, "rate limited on " + path + " after " +
                                         std::to_string(attempt + 1) + " attempts");
      }
      ++stats.rate_limit_waits;
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(wait * 1000.0)));
    }
  }

 private:
  httplib::Client client_;
  const CrawlOptions& options_;
};

}  // namespace detail

// Walks every issue carrying the approved label and streams its comments to
// the sink in (issue_number, comment position) order. Comment pages of
// different issues may be fetched concurrently; emission stays ordered.
inline CrawlStats crawl_issues(const RepoCoordinate& repo, const CrawlOptions& options,
                               const std::function<void(const RawComment&)>& sink) {
  CrawlStats stats;
  const std::string repo_path = "/repos/" + repo.owner + "/" + repo.repo;
  std::regex title_regex;
  try {
    title_regex = std::regex(options.package_title_regex);
  } catch (const std::regex_error& e) {
    throw Error(ErrorKind::InvalidArgument,
                std::string("bad --package-title-regex: ") + e.what());
  }

  detail::GithubClient issues_client(repo.api_base, options);

  // phase 1: paginate the labeled issue list
  std::vector<detail::IssueRef> issues;
  std::string path = repo_path + "/issues?state=all&labels=" +
                     detail::url_encode(options.approved_label) +
                     "&per_page=" + std::to_string(options.per_page);
  bool first_page = true;
  while (!path.empty()) {
    auto res = issues_client.get(path, stats);
    ++stats.pages_fetched;
    if (res->status == 401) throw Error(ErrorKind::AuthFailed, "authentication failed");
    if (res->status == 404) {
      throw Error(ErrorKind::NotFound, repo.owner + "/" + repo.repo + " not found");
    }
    if (res->status != 200) {
      throw Error(ErrorKind::IoError, "unexpected status " + std::to_string(res->status));
    }
    json page = json::parse(res->body, nullptr, false);
    if (page.is_discarded() || !page.is_array()) {
      ++stats.malformed_pages;
      break;  // the Link chain is gone with the page
    }
    first_page = false;
    for (const auto& issue : page) {
      if (issue.contains("pull_request")) continue;
      detail::IssueRef ref;
      try {
        ref.number = issue.at("number").get<std::int64_t>();
        const auto title = issue.value("title", std::string{});
        std::smatch m;
        if (std::regex_search(title, m, title_regex)) {
          ref.package = m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
        } else {
          ++stats.unmatched_titles;
        }
      } catch (const json::exception&) {
        ++stats.malformed_pages;
        continue;
      }
      issues.push_back(std::move(ref));
    }
    path = detail::url_to_path(detail::link_header_next(res->get_header_value("Link")));
  }
  (void)first_page;
  std::sort(issues.begin(), issues.end(),
            [](const auto& a, const auto& b) { return a.number < b.number; });
  stats.issues_seen = issues.size();

  // phase 2: fetch each issue's comments; a bounded window of futures keeps
  // at most `concurrency` fetches in flight while emission follows issue order
  struct IssueComments {
    std::vector<RawComment> comments;
    std::size_t pages = 0;
    std::size_t malformed = 0;
    std::size_t rate_limit_waits = 0;
  };

  auto fetch_issue = [&](const detail::IssueRef& ref) -> IssueComments {
    IssueComments result;
    CrawlStats local;
    detail::GithubClient client(repo.api_base, options);
    std::string comments_path = repo_path + "/issues/" + std::to_string(ref.number) +
                                "/comments?per_page=" + std::to_string(options.per_page);
    while (!comments_path.empty()) {
      auto res = client.get(comments_path, local);
      ++result.pages;
      if (res->status != 200) {
        ++result.malformed;
        break;
      }
      json page = json::parse(res->body, nullptr, false);
      if (page.is_discarded() || !page.is_array()) {
        ++result.malformed;
        break;
      }
      for (const auto& comment : page) {
        try {
          RawComment rc;
          rc.platform = options.platform;
          rc.package = ref.package;
          rc.issue_number = ref.number;
          rc.comment_id = std::to_string(comment.at("id").get<std::int64_t>());
          rc.created_at = comment.at("created_at").get<std::string>();
          rc.body = comment.at("body").is_null() ? "" : comment.at("body").get<std::string>();
          rc.url = comment.value("html_url", std::string{});
          result.comments.push_back(std::move(rc));
        } catch (const json::exception&) {
          ++result.malformed;
        }
      }
      comments_path = detail::url_to_path(detail::link_header_next(res->get_header_value("Link")));
    }
    result.rate_limit_waits = local.rate_limit_waits;
    return result;
  };

  const std::size_t window = static_cast<std::size_t>(std::max(1, options.concurrency));
  std::vector<std::future<IssueComments>> in_flight(issues.size());
  std::size_t next_launch = 0, next_consume = 0;
  while (next_consume < issues.size()) {
    while (next_launch < issues.size() && next_launch - next_consume < window) {
      in_flight[next_launch] =
          std::async(std::launch::async, fetch_issue, std::cref(issues[next_launch]));
      ++next_launch;
    }
    IssueComments result = in_flight[next_consume].get();
    in_flight[next_consume] = {};
    ++next_consume;

    stats.pages_fetched += result.pages;
    stats.malformed_pages += result.malformed;
    stats.rate_limit_waits += result.rate_limit_waits;
    for (const auto& comment : result.comments) {
      sink(comment);
      ++stats.comments_emitted;
    }
  }
  return stats;
}

}  // namespace tdscan
