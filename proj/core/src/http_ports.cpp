#include "rexha/http_ports.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rexha/error.hpp"

namespace rexha::http {

using nlohmann::json;

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::kInvalidArgument, "endpoint url needs a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorKind::kInvalidArgument, "unsupported scheme: " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == scheme_end + 3) throw Error(ErrorKind::kInvalidArgument, "endpoint url has no host: " + url);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string post_json(const Endpoint& endpoint, const std::string& body) {
  const ParsedUrl u = parse_url(endpoint.url);
  httplib::Client client(u.origin);
  client.set_connection_timeout(endpoint.timeout);
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);

  httplib::Headers headers;
  if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto res = client.Post(u.path, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorKind::kTransport, endpoint.url + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorKind::kTransport, endpoint.url + ": HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::kValidation, endpoint.url + ": HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return res->body;
}

namespace {

json post(const Endpoint& endpoint, const json& request) {
  const std::string body = post_json(endpoint, request.dump());
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorKind::kParse, endpoint.url + ": response is not a JSON object");
    return j;
  } catch (const json::exception&) {
    throw Error(ErrorKind::kParse, endpoint.url + ": response is not valid JSON");
  }
}

template <typename T>
T field(const json& j, const char* name, const Endpoint& endpoint) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kParse, endpoint.url + ": response lacks a valid \"" + name + "\"");
  }
}

}  // namespace

std::string HttpSummarizer::summarize(std::string_view instruction, std::span<const std::string> inputs) {
  json req{{"instruction", instruction},
           {"inputs", std::vector<std::string>(inputs.begin(), inputs.end())},
           {"model", endpoint_.model},
           {"temperature", temperature_}};
  return field<std::string>(post(endpoint_, req), "summary", endpoint_);
}

std::vector<std::vector<float>> HttpEmbedder::embed(std::span<const std::string> texts) {
  json req{{"inputs", std::vector<std::string>(texts.begin(), texts.end())}, {"model", endpoint_.model}};
  return field<std::vector<std::vector<float>>>(post(endpoint_, req), "vectors", endpoint_);
}

std::string HttpGenerator::generate(const prompt::PromptBundle& bundle, const prompt::GenerationSettings& settings) {
  json emb = json::object();
  for (const auto& [k, v] : bundle.sidecar) emb[k] = v;
  json req{{"prompt", bundle.text},
           {"temperature", settings.temperature},
           {"max_tokens", settings.max_tokens},
           {"model", endpoint_.model},
           {"embeddings", emb}};
  return field<std::string>(post(endpoint_, req), "text", endpoint_);
}

double HttpJudge::score(std::string_view instruction, std::string_view reference, std::string_view candidate) {
  json req{{"instruction", instruction},
           {"reference", reference},
           {"candidate", candidate},
           {"model", endpoint_.model},
           {"temperature", temperature_}};
  return field<double>(post(endpoint_, req), "score", endpoint_);
}

}  // namespace rexha::http
