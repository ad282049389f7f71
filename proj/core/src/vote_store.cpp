#include <cstdio>
#include <fstream>

#include <unistd.h>

#include "groundplan/errors.hpp"
#include "groundplan/evaluation.hpp"

namespace groundplan {

using nlohmann::json;

VoteStore::VoteStore(std::filesystem::path log_path, std::vector<EvalItem> items)
    : path_(std::move(log_path)), items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].item_id, i).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate item id '" + items_[i].item_id + "'");
  }
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto vote = vote_from_json(json::parse(line));
      check(vote);
      apply(vote);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Storage, "corrupt vote log " + path_.string() + " line " +
                                          std::to_string(lineno) + ": " + e.what());
    }
  }
}

void VoteStore::check(const VoteRecord& vote) const {
  vote.validate();
  if (!index_.count(vote.item_id))
    throw Error(ErrorCode::UnknownItem, "unknown item '" + vote.item_id + "'");
  auto it = by_item_.find(vote.item_id);
  if (it == by_item_.end()) return;
  for (const auto& v : it->second) {
    if (v.annotator_id == vote.annotator_id)
      throw Error(ErrorCode::DuplicateVote,
                  "annotator '" + vote.annotator_id + "' already voted on '" + vote.item_id + "'");
  }
  if (it->second.size() >= kVotesPerItem)
    throw Error(ErrorCode::ItemComplete, "item '" + vote.item_id + "' already has 3 votes");
}

void VoteStore::apply(const VoteRecord& vote) {
  by_item_[vote.item_id].push_back(vote);
  log_.push_back(vote);
}

void VoteStore::record(const VoteRecord& vote) {
  std::lock_guard lock(mutex_);
  check(vote);
  const auto line = vote_to_json(vote).dump() + "\n";
  std::FILE* f = std::fopen(path_.c_str(), "ab");
  if (!f) throw Error(ErrorCode::Storage, "cannot open vote log " + path_.string());
  const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0 &&
                  ::fsync(::fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw Error(ErrorCode::Storage, "failed to append to vote log " + path_.string());
  apply(vote);
}

std::vector<VoteRecord> VoteStore::votes() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::vector<VoteRecord> VoteStore::votes_for(std::string_view item_id) const {
  std::lock_guard lock(mutex_);
  auto it = by_item_.find(item_id);
  return it == by_item_.end() ? std::vector<VoteRecord>{} : it->second;
}

std::optional<EvalItem> VoteStore::next_for(std::string_view annotator_id) const {
  std::lock_guard lock(mutex_);
  for (const auto& item : items_) {
    auto it = by_item_.find(item.item_id);
    if (it == by_item_.end()) return item;
    if (it->second.size() >= kVotesPerItem) continue;
    bool voted = false;
    for (const auto& v : it->second) voted = voted || v.annotator_id == annotator_id;
    if (!voted) return item;
  }
  return std::nullopt;
}

std::vector<DecidedItem> VoteStore::decided() const {
  std::lock_guard lock(mutex_);
  std::vector<DecidedItem> out;
  for (const auto& item : items_) {
    auto it = by_item_.find(item.item_id);
    if (it == by_item_.end() || it->second.size() < kVotesPerItem) continue;
    out.push_back(DecidedItem{item.room_type, majority_verdict(it->second)});
  }
  return out;
}

std::size_t VoteStore::pending_count() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& item : items_) {
    auto it = by_item_.find(item.item_id);
    if (it == by_item_.end() || it->second.size() < kVotesPerItem) ++n;
  }
  return n;
}

std::vector<EvalItem> load_items(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open items file " + path.string());
  std::vector<EvalItem> items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      items.push_back(item_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
  }
  return items;
}

void save_items(const std::vector<EvalItem>& items, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write items file " + path.string());
  for (const auto& item : items) out << item_to_json(item).dump() << '\n';
}

}  // namespace groundplan
