#include <httplib.h>

#include "argmine/corpus.hpp"
#include "argmine/http_util.hpp"

namespace argmine {

TextNormalizer http_normalizer(std::string url) {
  return [parts = split_url(url)](const std::string& text) -> std::string {
    httplib::Client client(parts.origin);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(60, 0);
    auto response = client.Post(parts.path.empty() ? "/" : parts.path, text, "text/plain; charset=utf-8");
    if (!response) {
      throw std::runtime_error("normalizer request failed: " + httplib::to_string(response.error()));
    }
    if (response->status < 200 || response->status >= 300) {
      throw std::runtime_error("normalizer returned HTTP " + std::to_string(response->status));
    }
    return response->body;
  };
}

}  // namespace argmine
