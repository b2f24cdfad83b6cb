#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pvs/mask.hpp"
#include "pvs/prompts.hpp"

namespace pvs {

/// One frame's memory: the committed mask plus whatever opaque feature the
/// segmenter wants to carry. Prompted entries keep the prompts that created
/// them.
struct MemoryEntry {
    int frame_idx = 0;
    RleMask mask;
    std::optional<std::vector<double>> feature;
    bool occluded = false;
    bool is_prompted = false;
    std::vector<Prompt> prompts;

    bool operator==(const MemoryEntry&) const = default;
};

/// Lightweight semantic summary vector for one processed frame.
struct ObjectPointer {
    int frame_idx = 0;
    std::vector<double> vec;

    bool operator==(const ObjectPointer&) const = default;
};

/// What a frame's prediction may condition on: prompted memories carry no
/// temporal position (they may come from any temporal range, including the
/// future); recent memories carry their distance in frames from the current
/// frame.
struct ConditioningSet {
    struct TimedEntry {
        MemoryEntry entry;
        int temporal_position = 0;  // current_frame - entry.frame_idx
    };

    std::vector<MemoryEntry> prompted;  // ordered by frame_idx
    std::vector<TimedEntry> recent;     // newest first
    std::vector<ObjectPointer> pointers;

    bool empty() const { return prompted.empty() && recent.empty() && pointers.empty(); }
};

/// Per-object streaming memory: a FIFO of up to N recent unprompted frames,
/// a FIFO of up to M prompted frames whose earliest entry is pinned (the
/// first frame's memory is always retained), and a FIFO of up to N+M object
/// pointers. Single-owner; one instance per tracked object.
class MemoryBank {
public:
    explicit MemoryBank(int recent_capacity = 6, int prompted_capacity = 8)
        : recent_capacity_(recent_capacity), prompted_capacity_(prompted_capacity) {
        if (recent_capacity < 1 || prompted_capacity < 1)
            throw std::invalid_argument("MemoryBank: capacities must be >= 1");
    }

    int recent_capacity() const { return recent_capacity_; }
    int prompted_capacity() const { return prompted_capacity_; }
    int pointer_capacity() const { return recent_capacity_ + prompted_capacity_; }

    const std::deque<MemoryEntry>& recent() const { return recent_; }
    const std::deque<MemoryEntry>& prompted() const { return prompted_; }
    const std::deque<ObjectPointer>& pointers() const { return pointers_; }

    void push_unprompted(MemoryEntry entry, std::optional<ObjectPointer> pointer = std::nullopt) {
        if (entry.is_prompted) throw std::invalid_argument("push_unprompted: entry is flagged prompted");
        recent_.push_back(std::move(entry));
        if (static_cast<int>(recent_.size()) > recent_capacity_) recent_.pop_front();
        if (pointer) push_pointer(std::move(*pointer));
    }

    void push_prompted(MemoryEntry entry, std::optional<ObjectPointer> pointer = std::nullopt) {
        if (!entry.is_prompted) throw std::invalid_argument("push_prompted: entry is not flagged prompted");
        prompted_.push_back(std::move(entry));
        if (static_cast<int>(prompted_.size()) > prompted_capacity_) {
            // the earliest prompted entry (index 0) is pinned; evict the
            // oldest non-pinned one
            prompted_.erase(prompted_.begin() + 1);
        }
        if (pointer) push_pointer(std::move(*pointer));
    }

    ConditioningSet context_for(int current_frame) const {
        ConditioningSet ctx;
        ctx.prompted.assign(prompted_.begin(), prompted_.end());
        std::sort(ctx.prompted.begin(), ctx.prompted.end(),
                  [](const MemoryEntry& a, const MemoryEntry& b) { return a.frame_idx < b.frame_idx; });
        for (auto it = recent_.rbegin(); it != recent_.rend(); ++it)
            ctx.recent.push_back({*it, current_frame - it->frame_idx});
        ctx.pointers.assign(pointers_.begin(), pointers_.end());
        return ctx;
    }

    void clear() {
        recent_.clear();
        prompted_.clear();
        pointers_.clear();
        pointer_dim_.reset();
    }

    /// Rebuilds a bank from snapshotted state (deserialization path).
    static MemoryBank restore(int recent_capacity, int prompted_capacity, std::vector<MemoryEntry> recent,
                              std::vector<MemoryEntry> prompted, std::vector<ObjectPointer> pointers) {
        MemoryBank bank(recent_capacity, prompted_capacity);
        if (static_cast<int>(recent.size()) > recent_capacity ||
            static_cast<int>(prompted.size()) > prompted_capacity ||
            static_cast<int>(pointers.size()) > bank.pointer_capacity())
            throw std::runtime_error("MemoryBank::restore: snapshot exceeds declared capacities");
        bank.recent_.assign(std::make_move_iterator(recent.begin()), std::make_move_iterator(recent.end()));
        bank.prompted_.assign(std::make_move_iterator(prompted.begin()), std::make_move_iterator(prompted.end()));
        for (auto& p : pointers) bank.push_pointer(std::move(p));
        return bank;
    }

private:
    void push_pointer(ObjectPointer p) {
        if (pointer_dim_ && p.vec.size() != *pointer_dim_)
            throw std::invalid_argument("MemoryBank: object pointer dimensionality changed");
        if (!pointer_dim_) pointer_dim_ = p.vec.size();
        pointers_.push_back(std::move(p));
        if (static_cast<int>(pointers_.size()) > pointer_capacity()) pointers_.pop_front();
    }

    int recent_capacity_;
    int prompted_capacity_;
    std::deque<MemoryEntry> recent_;
    std::deque<MemoryEntry> prompted_;
    std::deque<ObjectPointer> pointers_;
    std::optional<std::size_t> pointer_dim_;
};

}  // namespace pvs
