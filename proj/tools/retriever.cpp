#include "retriever.hpp"

#include <httplib.h>

namespace spo {

PolicyRetriever http_retriever() {
  return [](const std::string& url) -> std::optional<std::string> {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.starts_with("https://")) return std::nullopt;
#endif
    try {
      httplib::Client client(origin);
      client.set_follow_location(true);
      client.set_connection_timeout(10);
      client.set_read_timeout(10);
      auto res = client.Get(path);
      if (!res || res->status != 200) return std::nullopt;
      return res->body;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
}

}  // namespace spo
