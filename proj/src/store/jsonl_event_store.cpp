#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "draftcheck/store/event_store.hpp"

namespace draftcheck {
namespace {

std::optional<std::uint64_t> sequence_of(std::string_view record_id, std::string_view round_id) {
  if (record_id.size() <= round_id.size() + 1 || record_id.substr(0, round_id.size()) != round_id ||
      record_id[round_id.size()] != ':') {
    return std::nullopt;
  }
  const std::string_view digits = record_id.substr(round_id.size() + 1);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

class FileDescriptor {
 public:
  explicit FileDescriptor(int fd) : fd_(fd) {}
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

[[noreturn]] void throw_io(const std::string& what, int err) {
  if (err == ENOSPC || err == EDQUOT || err == EFBIG) {
    throw StorageFull(what + ": " + std::strerror(err));
  }
  throw StoreError(what + ": " + std::strerror(err));
}

}  // namespace

CorruptStore::CorruptStore(std::filesystem::path f, std::size_t l, const std::string& reason)
    : StoreError(fmt::format("corrupt store {} line {}: {}", f.string(), l, reason)),
      file(std::move(f)),
      line(l) {}

JsonlEventStore::JsonlEventStore(std::filesystem::path dir, bool durable)
    : dir_(std::move(dir)), durable_(durable) {}

std::filesystem::path JsonlEventStore::round_path(const std::string& round_id) const {
  return dir_ / (round_id + ".jsonl");
}

JsonlEventStore::RoundState JsonlEventStore::read_round_file(const std::string& round_id) const {
  RoundState state;
  const auto path = round_path(round_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (std::filesystem::exists(path)) throw StoreError("cannot open " + path.string());
    return state;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  std::set<std::string> ids;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    ++line_no;
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      spdlog::warn("{}: ignoring torn final line {} ({} bytes)", path.string(), line_no,
                   content.size() - pos);
      state.torn_tail = true;
      break;
    }
    const std::string_view line(content.data() + pos, nl - pos);
    InteractionRecord record;
    try {
      record = from_log_line(line);
    } catch (const std::exception& e) {
      throw CorruptStore(path, line_no, e.what());
    }
    if (record.round_id != round_id) {
      throw CorruptStore(path, line_no, "record belongs to round " + record.round_id);
    }
    if (!ids.insert(record.record_id).second) {
      throw CorruptStore(path, line_no, "duplicate record_id " + record.record_id);
    }
    auto [it, inserted] = state.last_by_student.try_emplace(record.student_id, record.timestamp);
    if (!inserted) {
      if (record.timestamp < it->second) {
        throw CorruptStore(path, line_no, "timestamp earlier than previous record of student " +
                                              record.student_id);
      }
      it->second = record.timestamp;
    }
    state.max_sequence = std::max(state.max_sequence,
                                  sequence_of(record.record_id, round_id).value_or(0));
    state.records.push_back(std::move(record));
    pos = nl + 1;
    state.valid_bytes = pos;
  }
  return state;
}

JsonlEventStore::RoundState& JsonlEventStore::state_for(const std::string& round_id) {
  auto it = cache_.find(round_id);
  if (it == cache_.end()) it = cache_.emplace(round_id, read_round_file(round_id)).first;
  return it->second;
}

std::string JsonlEventStore::append(InteractionRecord record) {
  try {
    check_record(record);
  } catch (const std::invalid_argument& e) {
    throw InvalidRecord(e.what());
  }

  std::lock_guard lock(mu_);
  RoundState& state = state_for(record.round_id);
  const auto last = state.last_by_student.find(record.student_id);
  if (last != state.last_by_student.end() && record.timestamp < last->second) {
    throw InvalidRecord("timestamp precedes the last record of student " + record.student_id);
  }

  const std::uint64_t sequence = state.max_sequence + 1;
  record.record_id = record.round_id + ":" + std::to_string(sequence);
  const std::string line = to_log_line(record) + "\n";

  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create " + dir_.string() + ": " + ec.message());

  const auto path = round_path(record.round_id);
  FileDescriptor fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw_io("cannot open " + path.string(), errno);
  if (state.torn_tail) {
    if (::ftruncate(fd.get(), static_cast<off_t>(state.valid_bytes)) != 0) {
      throw_io("cannot truncate torn tail of " + path.string(), errno);
    }
    state.torn_tail = false;
  }
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd.get(), line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      if (written > 0) state.torn_tail = true;
      throw_io("append to " + path.string() + " failed", err);
    }
    written += static_cast<std::size_t>(n);
  }
  if (durable_ && ::fsync(fd.get()) != 0) throw_io("fsync " + path.string() + " failed", errno);

  state.valid_bytes += line.size();
  state.max_sequence = sequence;
  state.last_by_student[record.student_id] = record.timestamp;
  state.records.push_back(record);
  return record.record_id;
}

std::vector<InteractionRecord> JsonlEventStore::load_round(const std::string& round_id) {
  if (!is_valid_identifier(round_id)) return {};
  std::lock_guard lock(mu_);
  return state_for(round_id).records;
}

std::vector<InteractionRecord> JsonlEventStore::query(const RecordQuery& q) {
  std::vector<InteractionRecord> out;
  if (!is_valid_identifier(q.round_id)) return out;
  {
    std::lock_guard lock(mu_);
    for (const auto& r : state_for(q.round_id).records) {
      if (q.student_id && r.student_id != *q.student_id) continue;
      if (q.kind && r.kind != *q.kind) continue;
      out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const InteractionRecord& a, const InteractionRecord& b) {
    return a.timestamp < b.timestamp;
  });
  return out;
}

std::vector<std::string> JsonlEventStore::rounds() {
  std::vector<std::string> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir_, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      out.push_back(entry.path().stem().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Timestamp> JsonlEventStore::last_timestamp(const std::string& round_id,
                                                         const std::string& student_id) {
  if (!is_valid_identifier(round_id)) return std::nullopt;
  std::lock_guard lock(mu_);
  const auto& state = state_for(round_id);
  const auto it = state.last_by_student.find(student_id);
  if (it == state.last_by_student.end()) return std::nullopt;
  return it->second;
}

}  // namespace draftcheck
