#include "groundplan/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "groundplan/errors.hpp"

namespace groundplan {

using nlohmann::json;

std::string_view to_string(VoteVerdict v) { return v == VoteVerdict::Success ? "success" : "failure"; }

std::string_view to_string(FailureType t) {
  return t == FailureType::Counterfactual ? "counterfactual" : "hallucination";
}

FailureType parse_failure_type(std::string_view text) {
  if (text == "counterfactual") return FailureType::Counterfactual;
  if (text == "hallucination") return FailureType::Hallucination;
  throw Error(ErrorCode::Validation, "failure_type: unknown value '" + std::string(text) + "'");
}

VoteVerdict parse_vote_verdict(std::string_view text) {
  if (text == "success") return VoteVerdict::Success;
  if (text == "failure") return VoteVerdict::Failure;
  throw Error(ErrorCode::Validation, "verdict: unknown value '" + std::string(text) + "'");
}

json item_to_json(const EvalItem& item) {
  return json{{"item_id", item.item_id},
              {"scene_id", item.scene_id},
              {"room_type", std::string(to_string(item.room_type))},
              {"instruction", item.instruction},
              {"plan_steps", item.plan_steps},
              {"object_list", item.object_list.names()},
              {"auto_verdict", item.auto_verdict ? json(std::string(to_string(*item.auto_verdict))) : json(nullptr)}};
}

EvalItem item_from_json(const json& doc) {
  try {
    EvalItem item;
    item.item_id = doc.at("item_id").get<std::string>();
    item.scene_id = doc.value("scene_id", std::string());
    item.room_type = parse_room_type(doc.at("room_type").get<std::string>());
    item.instruction = doc.value("instruction", std::string());
    item.plan_steps = doc.value("plan_steps", std::vector<std::string>{});
    item.object_list = ObjectList::from_names(doc.value("object_list", std::vector<std::string>{}));
    if (doc.contains("auto_verdict") && doc.at("auto_verdict").is_string()) {
      const auto v = doc.at("auto_verdict").get<std::string>();
      item.auto_verdict = v == "success"          ? Verdict::Success
                          : v == "hallucination" ? Verdict::Hallucination
                                                 : Verdict::Counterfactual;
    }
    return item;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("item: ") + e.what());
  }
}

void VoteRecord::validate() const {
  if (item_id.empty()) throw Error(ErrorCode::Validation, "item_id: must be non-empty");
  if (annotator_id.empty()) throw Error(ErrorCode::Validation, "annotator_id: must be non-empty");
  if (verdict == VoteVerdict::Failure && !failure_type)
    throw Error(ErrorCode::Validation, "failure_type: required when verdict is failure");
  if (verdict == VoteVerdict::Success && failure_type)
    throw Error(ErrorCode::Validation, "failure_type: must be absent when verdict is success");
}

json vote_to_json(const VoteRecord& v) {
  return json{{"item_id", v.item_id},
              {"annotator_id", v.annotator_id},
              {"verdict", std::string(to_string(v.verdict))},
              {"failure_type", v.failure_type ? json(std::string(to_string(*v.failure_type))) : json(nullptr)},
              {"timestamp", v.timestamp}};
}

VoteRecord vote_from_json(const json& doc) {
  try {
    VoteRecord v;
    v.item_id = doc.at("item_id").get<std::string>();
    v.annotator_id = doc.at("annotator_id").get<std::string>();
    v.verdict = parse_vote_verdict(doc.at("verdict").get<std::string>());
    if (doc.contains("failure_type") && !doc.at("failure_type").is_null())
      v.failure_type = parse_failure_type(doc.at("failure_type").get<std::string>());
    v.timestamp = doc.value("timestamp", std::int64_t{0});
    return v;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("vote: ") + e.what());
  }
}

ItemVerdict majority_verdict(std::span<const VoteRecord> votes) {
  if (votes.size() != kVotesPerItem)
    throw Error(ErrorCode::InvalidArgument,
                "majority verdict needs exactly 3 votes, got " + std::to_string(votes.size()));
  std::size_t successes = 0;
  std::size_t counterfactual = 0;
  std::size_t hallucination = 0;
  for (const auto& v : votes) {
    v.validate();
    if (v.verdict == VoteVerdict::Success) {
      ++successes;
    } else if (*v.failure_type == FailureType::Counterfactual) {
      ++counterfactual;
    } else {
      ++hallucination;
    }
  }
  if (successes >= 2) return {VoteVerdict::Success, std::nullopt};
  return {VoteVerdict::Failure,
          hallucination > counterfactual ? FailureType::Hallucination : FailureType::Counterfactual};
}

ItemVerdict verdict_from_report(Verdict verdict) {
  switch (verdict) {
    case Verdict::Success: return {VoteVerdict::Success, std::nullopt};
    case Verdict::Hallucination: return {VoteVerdict::Failure, FailureType::Hallucination};
    case Verdict::Counterfactual: return {VoteVerdict::Failure, FailureType::Counterfactual};
  }
  return {};
}

double round_half_up_2(double value) { return std::floor(value * 100.0 + 0.5 + 1e-7) / 100.0; }

SuccessTable aggregate_success(std::span<const DecidedItem> items) {
  SuccessTable table;
  for (const auto& item : items) {
    auto& room = table.rooms[item.room_type];
    ++room.total;
    if (item.verdict.verdict == VoteVerdict::Success) ++room.successes;
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (RoomType t : kAllRoomTypes) {
    auto it = table.rooms.find(t);
    if (it == table.rooms.end()) {
      table.warnings.push_back(std::string(to_string(t)) + ": no items, excluded from the average");
      continue;
    }
    auto& room = it->second;
    room.rate = round_half_up_2(100.0 * static_cast<double>(room.successes) / static_cast<double>(room.total));
    sum += room.rate;
    ++present;
  }
  table.macro_average = present ? round_half_up_2(sum / static_cast<double>(present)) : 0.0;
  return table;
}

FailureBreakdown failure_breakdown(std::span<const DecidedItem> items) {
  if (items.empty()) throw Error(ErrorCode::InvalidArgument, "failure breakdown over an empty item set");
  std::size_t s = 0, c = 0, h = 0;
  for (const auto& item : items) {
    if (item.verdict.verdict == VoteVerdict::Success) {
      ++s;
    } else if (item.verdict.failure_type == FailureType::Hallucination) {
      ++h;
    } else {
      ++c;
    }
  }
  const double n = static_cast<double>(items.size());
  return {round_half_up_2(100.0 * static_cast<double>(s) / n), round_half_up_2(100.0 * static_cast<double>(c) / n),
          round_half_up_2(100.0 * static_cast<double>(h) / n)};
}

json table_to_json(const SuccessTable& table) {
  json rooms = json::object();
  for (const auto& [type, r] : table.rooms) {
    rooms[std::string(to_string(type))] = json{{"successes", r.successes}, {"total", r.total}, {"rate", r.rate}};
  }
  return json{{"rooms", std::move(rooms)}, {"average", table.macro_average}, {"warnings", table.warnings}};
}

json breakdown_to_json(const FailureBreakdown& b) {
  return json{{"success", b.success}, {"counterfactual", b.counterfactual}, {"hallucination", b.hallucination}};
}

std::string format_success_rows(const std::vector<std::pair<std::string, SuccessTable>>& rows) {
  std::size_t label_width = 6;
  for (const auto& [label, _] : rows) label_width = std::max(label_width, label.size());
  std::string out;
  char buf[64];
  auto cell = [&](const char* text) {
    std::snprintf(buf, sizeof buf, " %8s", text);
    out += buf;
  };
  out += "Method" + std::string(label_width - 6, ' ') + " |";
  for (RoomType t : kAllRoomTypes) cell(std::string(short_label(t)).c_str());
  cell("Avg.");
  out += "\n";
  for (const auto& [label, table] : rows) {
    out += label + std::string(label_width - label.size(), ' ') + " |";
    for (RoomType t : kAllRoomTypes) {
      auto it = table.rooms.find(t);
      if (it == table.rooms.end()) {
        cell("-");
        continue;
      }
      char num[32];
      std::snprintf(num, sizeof num, "%.2f", it->second.rate);
      cell(num);
    }
    char avg[32];
    std::snprintf(avg, sizeof avg, "%.2f", table.macro_average);
    cell(avg);
    out += "\n";
  }
  return out;
}

}  // namespace groundplan
