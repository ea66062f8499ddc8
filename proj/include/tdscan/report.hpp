#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdscan/error.hpp"
#include "tdscan/pipeline.hpp"
#include "tdscan/types.hpp"

namespace tdscan {

// Per-package debt report: totals plus every detected instance with a link
// back to its source comment.
struct TdReport {
  std::string package;
  std::string platform;
  std::string generated_at;
  std::map<std::string, std::int64_t> totals;  // type -> count
  std::vector<TdInstance> instances;           // sorted by (comment_id, sentence_index)
};

inline TdReport build_report(const std::string& package, const std::string& platform,
                             std::vector<TdInstance> instances, const std::string& generated_at) {
  TdReport report;
  report.package = package;
  report.platform = platform;
  report.generated_at = generated_at;
  std::stable_sort(instances.begin(), instances.end(), [](const TdInstance& a, const TdInstance& b) {
    if (a.comment_id != b.comment_id) return a.comment_id < b.comment_id;
    return a.sentence_index < b.sentence_index;
  });
  for (TdType t : all_td_types()) report.totals[to_string(t)] = 0;
  for (const auto& instance : instances) ++report.totals[to_string(instance.type)];
  report.instances = std::move(instances);
  return report;
}

enum class ReportFormat { Json, Html };

inline json report_to_json(const TdReport& r) {
  json instances = json::array();
  for (const auto& i : r.instances) instances.push_back(instance_to_json(i));
  return {{"schema_version", 1},
          {"package", r.package},
          {"platform", r.platform},
          {"generated_at", r.generated_at},
          {"totals", r.totals},
          {"instances", std::move(instances)}};
}

inline TdReport report_from_json(const json& j) {
  try {
    TdReport r;
    r.package = j.at("package").get<std::string>();
    r.platform = j.at("platform").get<std::string>();
    r.generated_at = j.at("generated_at").get<std::string>();
    r.totals = j.at("totals").get<std::map<std::string, std::int64_t>>();
    for (const auto& i : j.at("instances")) r.instances.push_back(instance_from_json(i));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SerializationError, std::string("bad report: ") + e.what());
  }
}

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Single self-contained page: inline styles only, no scripts, no external
// resources; the only URLs are the per-instance comment links.
inline std::string render_html_report(const TdReport& r) {
  std::ostringstream out;
  out << "<!doctype html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>TD report: " << html_escape(r.package) << "</title>\n"
      << "<style>\n"
      << "body{font-family:sans-serif;margin:2rem;max-width:60rem}\n"
      << "table{border-collapse:collapse;margin:1rem 0}\n"
      << "td,th{border:1px solid #999;padding:0.3rem 0.8rem;text-align:left}\n"
      << "th{background:#eee}\n"
      << "li{margin:0.4rem 0}\n"
      << ".meta{color:#555}\n"
      << ".score{color:#777;font-size:0.85em}\n"
      << "</style>\n</head>\n<body>\n";
  out << "<h1>Technical debt report: " << html_escape(r.package) << "</h1>\n";
  out << "<p class=\"meta\">platform: " << html_escape(r.platform);
  if (!r.generated_at.empty()) out << " &middot; generated: " << html_escape(r.generated_at);
  out << " &middot; instances: " << r.instances.size() << "</p>\n";

  out << "<table>\n<tr><th>type</th><th>count</th></tr>\n";
  for (TdType t : all_td_types()) {
    const std::string name = to_string(t);
    auto it = r.totals.find(name);
    out << "<tr><td>" << name << "</td><td>" << (it == r.totals.end() ? 0 : it->second)
        << "</td></tr>\n";
  }
  out << "</table>\n";

  for (TdType t : all_td_types()) {
    const std::string name = to_string(t);
    std::vector<const TdInstance*> section;
    for (const auto& i : r.instances) {
      if (i.type == t) section.push_back(&i);
    }
    if (section.empty()) continue;
    out << "<h2>" << name << " (" << section.size() << ")</h2>\n<ul>\n";
    for (const auto* i : section) {
      out << "<li>";
      if (i->url.empty()) {
        out << html_escape(i->text);
      } else {
        out << "<a href=\"" << html_escape(i->url) << "\">" << html_escape(i->text) << "</a>";
      }
      out << " <span class=\"score\">[" << i->cluster << "]</span></li>\n";
    }
    out << "</ul>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

inline std::string render_report(const TdReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(r).dump(2) + "\n";
  return render_html_report(r);
}

}  // namespace tdscan
