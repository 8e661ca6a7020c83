#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "draftcheck/store/interaction_record.hpp"

namespace draftcheck {

struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StorageFull : StoreError {
  using StoreError::StoreError;
};

struct CorruptStore : StoreError {
  std::filesystem::path file;
  std::size_t line;  // 1-based
  CorruptStore(std::filesystem::path file, std::size_t line, const std::string& reason);
};

// Rejected by append: structural problem or a timestamp earlier than the stream's last one.
struct InvalidRecord : StoreError {
  using StoreError::StoreError;
};

struct RecordQuery {
  std::string round_id;
  std::optional<std::string> student_id;
  std::optional<InteractionKind> kind;
};

class EventStore {
 public:
  virtual ~EventStore() = default;

  // Assigns record_id, persists the record and returns the id.
  virtual std::string append(InteractionRecord record) = 0;

  // Matching records in timestamp order (ties keep append order).
  virtual std::vector<InteractionRecord> query(const RecordQuery& q) = 0;

  virtual std::vector<std::string> rounds() = 0;

  // Last timestamp written for a (round, student) stream.
  virtual std::optional<Timestamp> last_timestamp(const std::string& round_id,
                                                  const std::string& student_id) = 0;
};

// One append-only JSONL file per round: <dir>/<round_id>.jsonl, UTF-8, LF-terminated.
// Record ids are "<round_id>:<sequence>" with the sequence continuing across reopen.
//
// A final line without its LF (torn write) is skipped with a warning and truncated away before the
// next append; any other malformed line raises CorruptStore.
class JsonlEventStore final : public EventStore {
 public:
  explicit JsonlEventStore(std::filesystem::path dir, bool durable = true);

  std::string append(InteractionRecord record) override;
  std::vector<InteractionRecord> query(const RecordQuery& q) override;
  std::vector<std::string> rounds() override;

  // Every record of the round in file order.
  std::vector<InteractionRecord> load_round(const std::string& round_id);

  std::filesystem::path round_path(const std::string& round_id) const;
  const std::filesystem::path& dir() const { return dir_; }

  std::optional<Timestamp> last_timestamp(const std::string& round_id,
                                          const std::string& student_id) override;

 private:
  struct RoundState {
    std::vector<InteractionRecord> records;
    std::uint64_t max_sequence{0};
    std::uintmax_t valid_bytes{0};  // file prefix covered by complete lines
    bool torn_tail{false};
    std::map<std::string, Timestamp> last_by_student;
  };

  RoundState& state_for(const std::string& round_id);
  RoundState read_round_file(const std::string& round_id) const;

  std::filesystem::path dir_;
  bool durable_;
  std::mutex mu_;
  std::map<std::string, RoundState> cache_;
};

}  // namespace draftcheck
