#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/scene.hpp"
#include "groundplan/validator.hpp"

namespace groundplan {

enum class VoteVerdict { Success, Failure };
enum class FailureType { Counterfactual, Hallucination };

std::string_view to_string(VoteVerdict v);
std::string_view to_string(FailureType t);
FailureType parse_failure_type(std::string_view text);
VoteVerdict parse_vote_verdict(std::string_view text);

/// One plan shown to annotators.
struct EvalItem {
  std::string item_id;
  std::string scene_id;
  RoomType room_type = RoomType::Kitchen;
  std::string instruction;
  std::vector<std::string> plan_steps;
  ObjectList object_list;
  /// Automated suggestion; never counted as a vote.
  std::optional<Verdict> auto_verdict;
};

nlohmann::json item_to_json(const EvalItem& item);
EvalItem item_from_json(const nlohmann::json& doc);

struct VoteRecord {
  std::string item_id;
  std::string annotator_id;
  VoteVerdict verdict = VoteVerdict::Success;
  /// Required iff verdict is Failure.
  std::optional<FailureType> failure_type;
  std::int64_t timestamp = 0;

  /// Throws Error{Validation} when the failure type does not fit the verdict.
  void validate() const;
};

nlohmann::json vote_to_json(const VoteRecord& vote);
VoteRecord vote_from_json(const nlohmann::json& doc);

inline constexpr std::size_t kVotesPerItem = 3;

struct ItemVerdict {
  VoteVerdict verdict = VoteVerdict::Success;
  std::optional<FailureType> failure_type;

  friend bool operator==(const ItemVerdict&, const ItemVerdict&) = default;
};

/// Success with at least two Success votes out of three; otherwise the
/// majority failure type, Counterfactual on a 1-1 split.
ItemVerdict majority_verdict(std::span<const VoteRecord> votes);

/// Maps an automated report onto the same outcome space as votes.
ItemVerdict verdict_from_report(Verdict verdict);

struct DecidedItem {
  RoomType room_type = RoomType::Kitchen;
  ItemVerdict verdict;
};

struct RoomSuccess {
  std::size_t successes = 0;
  std::size_t total = 0;
  double rate = 0.0;
};

struct SuccessTable {
  std::map<RoomType, RoomSuccess> rooms;
  /// Mean of the (rounded) per-room rates; rooms without items are excluded.
  double macro_average = 0.0;
  std::vector<std::string> warnings;
};

/// Rounds half away from zero to 2 decimals (values here are non-negative).
double round_half_up_2(double value);

SuccessTable aggregate_success(std::span<const DecidedItem> items);

struct FailureBreakdown {
  double success = 0.0;
  double counterfactual = 0.0;
  double hallucination = 0.0;
};

/// Percentages over all items, each rounded to 2 decimals.
FailureBreakdown failure_breakdown(std::span<const DecidedItem> items);

nlohmann::json table_to_json(const SuccessTable& table);
nlohmann::json breakdown_to_json(const FailureBreakdown& breakdown);

/// Fixed-width text table: one row per label, columns Kit. Living. Bed.
/// Bath. Avg., two decimals. Missing rooms print as "-".
std::string format_success_rows(const std::vector<std::pair<std::string, SuccessTable>>& rows);

/// Append-only vote log backed by a newline-delimited file. Appends are
/// serialized and flushed to disk before record() returns.
class VoteStore {
 public:
  /// Replays an existing log. Throws Error{Storage} when the log is corrupt or
  /// references unknown items.
  VoteStore(std::filesystem::path log_path, std::vector<EvalItem> items);

  void record(const VoteRecord& vote);

  const std::vector<EvalItem>& items() const { return items_; }
  std::vector<VoteRecord> votes() const;
  std::vector<VoteRecord> votes_for(std::string_view item_id) const;

  /// First item (in registration order) with fewer than three votes and no
  /// vote from this annotator.
  std::optional<EvalItem> next_for(std::string_view annotator_id) const;

  /// Items holding three votes, with their majority verdicts.
  std::vector<DecidedItem> decided() const;
  std::size_t pending_count() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  void apply(const VoteRecord& vote);
  void check(const VoteRecord& vote) const;

  std::filesystem::path path_;
  std::vector<EvalItem> items_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::vector<VoteRecord>, std::less<>> by_item_;
  std::vector<VoteRecord> log_;
  mutable std::mutex mutex_;
};

std::vector<EvalItem> load_items(const std::filesystem::path& path);
void save_items(const std::vector<EvalItem>& items, const std::filesystem::path& path);

}  // namespace groundplan
