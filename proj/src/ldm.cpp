#include "citypulse/ldm.hpp"

#include <algorithm>
#include <fstream>

#include "citypulse/lines.hpp"

namespace citypulse {

CommuneIndex::CommuneIndex(std::vector<CommuneId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  for (int i = 0; i < int(ids_.size()); ++i) index_[ids_[i]] = i;
}

int CommuneIndex::index_of(CommuneId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

uint64_t CountTensor::slot_total(int slot) const {
  uint64_t sum = 0;
  int n = n_communes();
  for (int c = 0; c < n; ++c) sum += at(slot, c);
  return sum;
}

uint64_t CountTensor::total() const {
  uint64_t sum = 0;
  for (uint32_t v : counts) sum += v;
  return sum;
}

void CountTensor::merge(const CountTensor& other) {
  if (counts.size() != other.counts.size())
    throw std::invalid_argument("merging tensors of different shapes");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

LdmMatrix normalize(const CountTensor& tensor) {
  int n = tensor.n_communes();
  LdmMatrix ldm;
  ldm.probs.assign(tensor.counts.size(), 0.0);
  for (int s = 0; s < kNumSlots; ++s) {
    uint64_t row_sum = tensor.slot_total(s);
    if (row_sum == 0) continue;
    for (int c = 0; c < n; ++c)
      ldm.probs[size_t(s) * n + c] = double(tensor.at(s, c)) / double(row_sum);
  }
  return ldm;
}

bool UserTensors::add_record(const CdrRecord& rec,
                             const AntennaCommuneMap& antenna_map) {
  auto commune = antenna_map.commune_of(rec.antenna);
  if (!commune) return false;
  add_call(rec.caller, classify_timestamp(rec.timestamp), *commune);
  return true;
}

void UserTensors::add_call(const std::string& user, TimeSlot slot,
                           CommuneId commune) {
  int cidx = communes_.index_of(commune);
  if (cidx < 0) throw std::invalid_argument("unknown commune id");
  auto [it, inserted] = tensors_.try_emplace(user, communes_.size());
  ++it->second.at(slot.index(), cidx);
}

void UserTensors::merge(UserTensors&& other) {
  for (auto& [user, tensor] : other.tensors_) {
    auto [it, inserted] = tensors_.try_emplace(user, std::move(tensor));
    if (!inserted) it->second.merge(tensor);
  }
}

const CountTensor* UserTensors::find(const std::string& user) const {
  auto it = tensors_.find(user);
  return it == tensors_.end() ? nullptr : &it->second;
}

uint64_t UserTensors::total_counted() const {
  uint64_t sum = 0;
  for (const auto& [user, tensor] : tensors_) sum += tensor.total();
  return sum;
}

std::vector<std::string> filter_users(const UserTensors& tensors, uint32_t tau) {
  if (tau < 1) throw FilterError("filter threshold must be >= 1");
  std::vector<std::string> kept;
  for (const auto& [user, tensor] : tensors.tensors()) {
    bool ok = true;
    for (int s = 0; s < kNumSlots && ok; ++s)
      if (tensor.slot_total(s) < tau) ok = false;
    if (ok) kept.push_back(user);
  }
  // std::map iteration is already sorted.
  return kept;
}

void dump_tensors(const UserTensors& tensors, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write tensor dump: " + path);
  out << "user,day_group,hour_group,commune_id,count\n";
  const auto& communes = tensors.communes();
  for (const auto& [user, tensor] : tensors.tensors()) {
    for (int s = 0; s < kNumSlots; ++s) {
      TimeSlot slot = TimeSlot::from_index(s);
      for (int c = 0; c < communes.size(); ++c) {
        uint32_t v = tensor.at(s, c);
        if (v == 0) continue;
        out << user << ',' << to_string(slot.day) << ',' << to_string(slot.hour)
            << ',' << communes.id_at(c) << ',' << v << '\n';
      }
    }
  }
}

} // namespace citypulse
