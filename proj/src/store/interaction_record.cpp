#include "draftcheck/store/interaction_record.hpp"

#include <array>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "draftcheck/core/errors.hpp"
#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/core/text.hpp"
#include "draftcheck/store/timestamp.hpp"

namespace draftcheck {
namespace {

using ordered_json = nlohmann::ordered_json;

const nlohmann::json& field(const nlohmann::json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) throw std::invalid_argument(fmt::format("missing field \"{}\"", name));
  return *it;
}

std::string string_field(const nlohmann::json& doc, const char* name) {
  const auto& v = field(doc, name);
  if (!v.is_string()) throw std::invalid_argument(fmt::format("field \"{}\" must be a string", name));
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(fmt::format("field \"{}\" must be a string", name));
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(InteractionKind kind) {
  return kind == InteractionKind::FeedbackRequest ? "feedback_request" : "final_submission";
}

std::optional<InteractionKind> parse_interaction_kind(std::string_view text) {
  if (text == "feedback_request") return InteractionKind::FeedbackRequest;
  if (text == "final_submission") return InteractionKind::FinalSubmission;
  return std::nullopt;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.' || c == '@';
    if (!ok) return false;
  }
  return true;
}

void check_record(const InteractionRecord& r) {
  if (!is_valid_identifier(r.student_id)) throw std::invalid_argument("invalid student_id");
  if (!is_valid_identifier(r.round_id)) throw std::invalid_argument("invalid round_id");
  try {
    utf8_length(r.draft_text);
  } catch (const InvalidEncoding& e) {
    throw std::invalid_argument(std::string("draft_text: ") + e.what());
  }
  if (r.kind == InteractionKind::FinalSubmission) {
    if (r.table || r.error_count || r.failure) {
      throw std::invalid_argument("final submission cannot carry feedback fields");
    }
    return;
  }
  if (r.table.has_value() == r.failure.has_value()) {
    throw std::invalid_argument("feedback request needs exactly one of table or failure");
  }
  if (r.table.has_value() != r.error_count.has_value()) {
    throw std::invalid_argument("error_count must be present iff table is present");
  }
  if (r.table && *r.error_count != error_count(*r.table)) {
    throw std::invalid_argument(fmt::format("error_count {} does not match table ({})",
                                            *r.error_count, error_count(*r.table)));
  }
}

std::string to_log_line(const InteractionRecord& r) {
  ordered_json line;
  line["record_id"] = r.record_id;
  line["student_id"] = r.student_id;
  line["round_id"] = r.round_id;
  line["kind"] = std::string(to_string(r.kind));
  line["timestamp"] = format_rfc3339(r.timestamp);
  line["draft_sha256"] = sha256_hex(r.draft_text);
  line["draft_text"] = r.draft_text;
  if (r.table) {
    line["prompt_version"] = std::string(to_string(r.table->prompt_version));
    line["provider_id"] = r.table->provider_id;
    line["tasks"] = tasks_to_json(r.table->tasks);
    line["error_count"] = *r.error_count;
    line["raw_response"] = r.table->raw_response;
    line["failure"] = nullptr;
  } else if (r.failure) {
    line["prompt_version"] = std::string(to_string(r.failure->prompt_version));
    line["provider_id"] = r.failure->provider_id;
    line["tasks"] = nullptr;
    line["error_count"] = nullptr;
    line["raw_response"] = r.failure->raw_response ? ordered_json(*r.failure->raw_response)
                                                   : ordered_json(nullptr);
    line["failure"] = {{"reason", r.failure->reason}, {"detail", r.failure->detail}};
  } else {
    for (const char* k : {"prompt_version", "provider_id", "tasks", "error_count", "raw_response",
                          "failure"}) {
      line[k] = nullptr;
    }
  }
  return line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

InteractionRecord from_log_line(std::string_view text) {
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw std::invalid_argument("not valid JSON");
  if (!doc.is_object()) throw std::invalid_argument("line is not a JSON object");

  InteractionRecord r;
  r.record_id = string_field(doc, "record_id");
  if (r.record_id.empty()) throw std::invalid_argument("empty record_id");
  r.student_id = string_field(doc, "student_id");
  r.round_id = string_field(doc, "round_id");
  const std::string kind = string_field(doc, "kind");
  const auto parsed_kind = parse_interaction_kind(kind);
  if (!parsed_kind) throw std::invalid_argument("unknown kind \"" + kind + "\"");
  r.kind = *parsed_kind;
  const auto ts = parse_rfc3339(string_field(doc, "timestamp"));
  if (!ts) throw std::invalid_argument("bad timestamp");
  r.timestamp = *ts;
  r.draft_text = string_field(doc, "draft_text");
  if (string_field(doc, "draft_sha256") != sha256_hex(r.draft_text)) {
    throw std::invalid_argument("draft_sha256 does not match draft_text");
  }

  const auto version_text = optional_string(doc, "prompt_version");
  const auto provider_id = optional_string(doc, "provider_id");
  const auto raw_response = optional_string(doc, "raw_response");
  const auto tasks_it = doc.find("tasks");
  const bool has_tasks = tasks_it != doc.end() && !tasks_it->is_null();
  const auto failure_it = doc.find("failure");
  const bool has_failure = failure_it != doc.end() && !failure_it->is_null();

  if (has_tasks || has_failure) {
    if (!version_text || !provider_id) {
      throw std::invalid_argument("feedback fields require prompt_version and provider_id");
    }
    const auto version = parse_prompt_version(*version_text);
    if (!version) throw std::invalid_argument("unknown prompt_version \"" + *version_text + "\"");
    if (has_tasks) {
      FeedbackTable table;
      try {
        table.tasks = tasks_from_json(nlohmann::json{{"tasks", *tasks_it}}, *version);
      } catch (const SchemaViolation& e) {
        throw std::invalid_argument(e.what());
      }
      table.prompt_version = *version;
      table.provider_id = *provider_id;
      table.raw_response = raw_response.value_or("");
      r.table = std::move(table);
      const auto& ec = field(doc, "error_count");
      if (!ec.is_number_unsigned()) throw std::invalid_argument("error_count must be a non-negative integer");
      r.error_count = ec.get<std::size_t>();
    }
    if (has_failure) {
      if (!failure_it->is_object()) throw std::invalid_argument("failure must be an object");
      ProviderFailure f;
      f.reason = string_field(*failure_it, "reason");
      f.detail = string_field(*failure_it, "detail");
      f.prompt_version = *version;
      f.provider_id = *provider_id;
      f.raw_response = raw_response;
      r.failure = std::move(f);
    }
  }
  check_record(r);
  return r;
}

}  // namespace draftcheck
