#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace argmine {

// "http://host:port/base/path" split into the origin handed to the HTTP
// client and the path prefix (without trailing slash).
struct UrlParts {
  std::string origin;
  std::string path;
};

inline UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw std::invalid_argument("URL without scheme: " + std::string(url));
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_begin == std::string_view::npos) {
    parts.origin = std::string(url);
  } else {
    parts.origin = std::string(url.substr(0, path_begin));
    parts.path = std::string(url.substr(path_begin));
  }
  while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
  return parts;
}

}  // namespace argmine
