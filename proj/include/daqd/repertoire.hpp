#pragma once

#include "daqd/core_types.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace daqd {

struct RepertoireEntry {
    PolicyParams policy;
    SkillDescriptor descriptor;
    double ret = 0.0;
    /// Only set for entries that come from the learned model.
    std::optional<double> disagreement;
    bool evaluated_in_env = true;
    /// Assigned by the container on insertion.
    std::uint64_t id = 0;
};

struct RepertoireParams {
    double distance_threshold = 0.015; // l
    double epsilon = 0.1;
    std::size_t k = 15;

    void validate() const;
};

enum class DiscardReason {
    SecondNeighborTooClose, // d2 < l
    NoveltyTooLow,          // nov_new < (1 - eps) nov_1
    ReturnTooLow,           // R_new < (1 - eps) R_1
    NoveltyReturnTradeoff,  // (nov_new - nov_1)|R_1| < -(R_new - R_1)|nov_1|
};

const char* to_string(DiscardReason r);

struct AdditionOutcome {
    enum class Kind { AddedNew, Replaced, Discarded };

    Kind kind = Kind::Discarded;
    /// Slot written to (AddedNew / Replaced).
    std::size_t slot = 0;
    /// The entry that was overwritten (Replaced only).
    std::optional<RepertoireEntry> replaced;
    std::optional<DiscardReason> reason;
    // Quantities the decision was made on, kept for auditing.
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    double novelty_new = 0.0;
    double novelty_nearest = 0.0;

    bool accepted() const noexcept { return kind != Kind::Discarded; }
};

bool same_decision(const AdditionOutcome& a, const AdditionOutcome& b);

struct NeighborHit {
    std::size_t slot;
    double distance;
};

struct NearestTwo {
    std::optional<NeighborHit> first;
    std::optional<NeighborHit> second;
};

/// Unstructured container with a minimum descriptor spacing `l`.
///
/// Slots are stable: AddedNew appends, Replaced overwrites the nearest
/// neighbour's slot. Slot order is the insertion order used for tie-breaking.
class Repertoire {
public:
    static constexpr double kEmptyNovelty = std::numeric_limits<double>::infinity();

    Repertoire(std::size_t descriptor_dim, RepertoireParams params = {});

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t descriptor_dim() const noexcept { return dim_; }
    const RepertoireParams& params() const noexcept { return params_; }

    const std::vector<RepertoireEntry>& entries() const noexcept { return entries_; }
    const RepertoireEntry& operator[](std::size_t slot) const { return entries_[slot]; }
    std::span<const double> descriptor(std::size_t slot) const;

    /// Mean distance to the min(k, n) nearest descriptors; +inf when there is
    /// nothing to compare against. `exclude` removes one slot from the reference set.
    double novelty(std::span<const double> sd, std::optional<std::size_t> exclude = std::nullopt) const;

    NearestTwo nearest_two(std::span<const double> sd) const;

    AdditionOutcome try_add(RepertoireEntry candidate);

    double qd_score() const;
    double mean_return() const;

    /// Unconditional append, used when loading a file or syncing containers.
    void insert_unchecked(RepertoireEntry entry);
    void clear();
    void mark_evaluated(std::size_t slot);

private:
    void check_descriptor(std::span<const double> sd) const;

    std::size_t dim_;
    RepertoireParams params_;
    std::vector<RepertoireEntry> entries_;
    std::vector<double> flat_; // descriptors, row-major n x dim
    std::uint64_t next_id_ = 0;
};

/// CSV with columns entry_id, sd_*, return, disagreement, phi_*; 17 significant digits.
void save_repertoire(const Repertoire& rep, const std::filesystem::path& path);
Repertoire load_repertoire(const std::filesystem::path& path, RepertoireParams params = {});

/// Plain-text float formatting shared by the CSV writers.
std::string format_real(double v);

} // namespace daqd
