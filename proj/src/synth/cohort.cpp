#include "draftcheck/synth/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "draftcheck/core/feedback_table.hpp"
#include "draftcheck/gateway/gateway.hpp"
#include "draftcheck/store/timestamp.hpp"

namespace draftcheck::synth {
namespace {

struct TaskTemplate {
  std::string_view description;
  std::string_view evidence;  // always contains a material keyword
};

// Spread over all five categories via the mock's keyword map.
constexpr TaskTemplate kTemplates[] = {
    {"studied the motor controller datasheet", "summary text on the team drive"},
    {"researched sensor fusion approaches", "reference list in the project report"},
    {"tested the battery discharge curve", "results table in the repository"},
    {"implemented the telemetry parser", "code in the project repository"},
    {"developed the calibration routine", "http://git.example.edu/capstone/calibration"},
    {"assembled the gripper prototype", "drawing and photos in the report"},
    {"machined the motor bracket", "technical drawing uploaded to the repository"},
    {"documented the REST endpoints", "text in the repository wiki"},
    {"drafted the risk analysis section of the report", "report chapter 3 on Overleaf"},
    {"scheduled the sprint review with the client", "calendar invite text in the project channel"},
    {"contacted the supplier about lead times", "email text archived in the repository"},
    {"organized the task board for the next sprint", "board export table in the repository"},
    {"attended the weekly meeting with the advisor", "minutes text in the repository"},
    {"presented the prototype status in the client meeting", "slides http://slides.example.edu/s4"},
};
constexpr std::size_t kTemplateCount = std::size(kTemplates);

enum class Flaw { MissingEvidence, Vague, Unauthored };

Timestamp round_base(std::size_t round_index) {
  using namespace std::chrono;
  return sys_days{year{2025} / March / 3} + hours{12} + days{14 * round_index};
}

std::string first_word(std::string_view s) { return std::string(s.substr(0, s.find(' '))); }

struct StudentPlan {
  std::vector<std::size_t> templates;  // one per task
  std::vector<Flaw> flaws;             // cycles through error kinds
};

std::string render_draft(const StudentPlan& plan, std::size_t errors, std::size_t hours) {
  std::string text = "Biweekly report.\n";
  for (std::size_t i = 0; i < plan.templates.size(); ++i) {
    const TaskTemplate& t = kTemplates[plan.templates[i]];
    if (i < errors) {
      switch (plan.flaws[i]) {
        case Flaw::MissingEvidence:
          text += fmt::format("- {}\n", t.description);
          break;
        case Flaw::Vague:
          text += fmt::format("- {} things (evidence: {})\n", first_word(t.description), t.evidence);
          break;
        case Flaw::Unauthored:
          text += fmt::format("- we {} (evidence: {})\n", t.description, t.evidence);
          break;
      }
    } else {
      text += fmt::format("- {} (evidence: {})\n", t.description, t.evidence);
    }
  }
  text += fmt::format("Hours dedicated: {}\n", hours);
  return text;
}

std::size_t typical_task_count(Rng& rng) {
  // 3: 10%, 4: 40%, 5: 40%, 6: 10%
  const auto roll = rng.below(10);
  if (roll == 0) return 3;
  if (roll <= 4) return 4;
  if (roll <= 8) return 5;
  return 6;
}

}  // namespace

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

void SyntheticCohortSpec::validate() const {
  const std::array<double, 4> f = {mix.never_use, mix.single_use, mix.multi_use, mix.correcting};
  for (double v : f) {
    if (!(v >= 0.0 && v <= 1.0)) throw InfeasibleSpec("engagement fractions must lie in [0, 1]");
  }
  const double sum = f[0] + f[1] + f[2] + f[3];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InfeasibleSpec(fmt::format("engagement fractions sum to {}, expected 1", sum));
  }
  std::set<std::string> ids;
  for (const auto& r : rounds) {
    if (!is_valid_identifier(r.round_id)) throw InfeasibleSpec("invalid round id \"" + r.round_id + "\"");
    if (!ids.insert(r.round_id).second) throw InfeasibleSpec("duplicate round id \"" + r.round_id + "\"");
    if (r.submitted > n_students) {
      throw InfeasibleSpec(fmt::format("round {} has {} submissions but only {} students", r.round_id,
                                       r.submitted, n_students));
    }
  }
}

SyntheticCohortSpec default_cohort_spec() {
  SyntheticCohortSpec spec;
  spec.n_students = 76;
  spec.rounds = {{"round1", 69, PromptVersion::V1}, {"round2", 49, PromptVersion::V2}};
  return spec;
}

std::array<std::size_t, 4> apportion(std::size_t submitted, const EngagementMix& mix) {
  const std::array<double, 4> f = {mix.never_use, mix.single_use, mix.multi_use, mix.correcting};
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double quota = f[i] * static_cast<double>(submitted);
    counts[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; assigned < submitted; k = (k + 1) % 4, ++assigned) ++counts[order[k]];
  while (assigned > submitted) {
    // Only reachable through rounding slop when fractions sum slightly above 1.
    for (std::size_t i = 4; i-- > 0;) {
      if (counts[i] > 0 && assigned > submitted) {
        --counts[i];
        --assigned;
      }
    }
  }
  return counts;
}

std::vector<RoundSummary> generate_cohort(const SyntheticCohortSpec& spec, EventStore& store) {
  spec.validate();

  std::vector<std::string> students;
  const int width = std::max<int>(3, static_cast<int>(std::to_string(spec.n_students).size()));
  for (std::size_t i = 1; i <= spec.n_students; ++i) students.push_back(fmt::format("s{:0{}}", i, width));

  std::vector<RoundSummary> summaries;
  for (std::size_t r = 0; r < spec.rounds.size(); ++r) {
    const RoundSpec& round = spec.rounds[r];
    Rng rng(spec.seed ^ (0xA5A5A5A5ULL * (r + 1)));

    gateway::ProviderConfig provider;
    provider.provider_kind = gateway::ProviderKind::MockRules;
    provider.prompt_version = round.prompt_version;
    provider.max_retries = 0;
    gateway::FeedbackGateway gateway(provider);

    std::vector<std::string> order = students;
    rng.shuffle(order);
    order.resize(round.submitted);

    RoundSummary summary;
    summary.round_id = round.round_id;
    summary.engagement = apportion(round.submitted, spec.mix);

    const std::size_t users = round.submitted - summary.engagement[0];
    summary.too_many_task_students = std::min(spec.too_many_task_students, users);
    summary.too_few_task_students =
        std::min(spec.too_few_task_students, users - summary.too_many_task_students);

    const Timestamp base = round_base(r);
    std::size_t user_index = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const std::string& student = order[pos];
      // 0 never, 1 single, 2 multi, 3 correcting; classes occupy consecutive positions.
      std::size_t cls = 0;
      std::size_t boundary = summary.engagement[0];
      while (cls < 3 && pos >= boundary) boundary += summary.engagement[++cls];
      Timestamp t = base + std::chrono::minutes(30 * pos);

      std::size_t tasks = typical_task_count(rng);
      if (cls > 0) {
        if (user_index < summary.too_many_task_students) {
          tasks = 9;
        } else if (user_index < summary.too_many_task_students + summary.too_few_task_students) {
          tasks = 1;
        }
        ++user_index;
      }
      StudentPlan plan;
      for (std::size_t k = 0; k < tasks; ++k) {
        plan.templates.push_back(static_cast<std::size_t>(rng.below(kTemplateCount)));
        plan.flaws.push_back(static_cast<Flaw>(rng.below(3)));
      }
      const std::size_t hours = 6 + static_cast<std::size_t>(rng.below(20));
      const std::size_t max_errors = std::min<std::size_t>(3, tasks);

      // Error count per feedback request.
      std::vector<std::size_t> trajectory;
      if (cls == 1) {
        trajectory = {static_cast<std::size_t>(rng.below(std::min<std::size_t>(2, tasks) + 1))};
      } else if (cls == 2) {
        const std::size_t attempts = 2 + static_cast<std::size_t>(rng.below(3));
        const std::size_t e = static_cast<std::size_t>(rng.below(max_errors + 1));
        trajectory.assign(attempts, e);
      } else if (cls == 3) {
        const std::size_t attempts = 2 + static_cast<std::size_t>(rng.below(3));
        const std::size_t first = 1 + static_cast<std::size_t>(rng.below(max_errors));
        const std::size_t last = static_cast<std::size_t>(rng.below(first));
        trajectory.push_back(first);
        for (std::size_t k = 1; k + 1 < attempts; ++k) {
          const std::size_t prev = trajectory.back();
          trajectory.push_back(last + static_cast<std::size_t>(rng.below(prev - last + 1)));
        }
        trajectory.push_back(last);
      }

      std::string final_draft;
      for (std::size_t errors : trajectory) {
        final_draft = render_draft(plan, errors, hours);
        ReportDraft draft{final_draft, student, round.round_id, t};
        InteractionRecord record;
        record.student_id = student;
        record.round_id = round.round_id;
        record.kind = InteractionKind::FeedbackRequest;
        record.draft_text = final_draft;
        record.table = gateway.request_feedback(draft);
        record.error_count = error_count(*record.table);
        if (*record.error_count != errors || record.table->tasks.size() != tasks) {
          throw std::logic_error(fmt::format("synthetic draft for {} produced {} errors/{} tasks, "
                                             "expected {}/{}", student, *record.error_count,
                                             record.table->tasks.size(), errors, tasks));
        }
        record.timestamp = t;
        store.append(std::move(record));
        ++summary.records;
        t += std::chrono::minutes(2);
      }
      if (final_draft.empty()) {
        final_draft = render_draft(plan, static_cast<std::size_t>(rng.below(max_errors + 1)), hours);
      }
      InteractionRecord submission;
      submission.student_id = student;
      submission.round_id = round.round_id;
      submission.kind = InteractionKind::FinalSubmission;
      submission.draft_text = final_draft;
      submission.timestamp = t + std::chrono::minutes(1);
      store.append(std::move(submission));
      ++summary.records;
    }
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

}  // namespace draftcheck::synth
