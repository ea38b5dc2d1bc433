#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "citypulse/geomap.hpp"
#include "citypulse/ingest.hpp"
#include "citypulse/timegrid.hpp"

namespace citypulse {

// Dense id <-> index table for the commune set, ascending id order.
class CommuneIndex {
 public:
  CommuneIndex() = default;
  explicit CommuneIndex(std::vector<CommuneId> ids);

  int size() const { return static_cast<int>(ids_.size()); }
  CommuneId id_at(int idx) const { return ids_[idx]; }
  int index_of(CommuneId id) const; // -1 when unknown
  const std::vector<CommuneId>& ids() const { return ids_; }

 private:
  std::vector<CommuneId> ids_;
  std::map<CommuneId, int> index_;
};

// Per-user call counts, dense 16 x N. Row = one time slot.
struct CountTensor {
  std::vector<uint32_t> counts; // kNumSlots * n_communes

  explicit CountTensor(int n_communes = 0)
      : counts(size_t(kNumSlots) * n_communes, 0) {}

  int n_communes() const { return int(counts.size() / kNumSlots); }
  uint32_t& at(int slot, int commune_idx) {
    return counts[size_t(slot) * n_communes() + commune_idx];
  }
  uint32_t at(int slot, int commune_idx) const {
    return counts[size_t(slot) * n_communes() + commune_idx];
  }
  uint64_t slot_total(int slot) const;
  uint64_t total() const;

  void merge(const CountTensor& other);
};

// Row-stochastic-or-zero probabilities, same 16 x N layout.
struct LdmMatrix {
  std::vector<double> probs;

  int n_communes() const { return int(probs.size() / kNumSlots); }
  double at(int slot, int commune_idx) const {
    return probs[size_t(slot) * n_communes() + commune_idx];
  }
};

// Each slot row divided by its sum; all-zero rows stay exactly zero.
LdmMatrix normalize(const CountTensor& tensor);

// Accumulated per-user tensors keyed by caller hash.
class UserTensors {
 public:
  UserTensors() = default;
  explicit UserTensors(CommuneIndex communes) : communes_(std::move(communes)) {}

  const CommuneIndex& communes() const { return communes_; }

  // Counts the caller side of one record; calls on unmapped antennas are
  // ignored and reported via the return value.
  bool add_record(const CdrRecord& rec, const AntennaCommuneMap& antenna_map);
  void add_call(const std::string& user, TimeSlot slot, CommuneId commune);

  // Entrywise-additive merge of a partial aggregation.
  void merge(UserTensors&& other);

  const std::map<std::string, CountTensor>& tensors() const { return tensors_; }
  const CountTensor* find(const std::string& user) const;
  uint64_t total_counted() const;

 private:
  CommuneIndex communes_;
  std::map<std::string, CountTensor> tensors_;
};

struct FilterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Users with slot-row count sums >= tau in every one of the 16 slots.
// Result sorted ascending.
std::vector<std::string> filter_users(const UserTensors& tensors, uint32_t tau);

// Debug dump: CSV `user,day_group,hour_group,commune_id,count`, zero entries
// omitted, rows sorted by (user, slot, commune).
void dump_tensors(const UserTensors& tensors, const std::string& path);

} // namespace citypulse
