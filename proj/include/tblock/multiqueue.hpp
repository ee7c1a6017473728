/*
 *   Copyright 2026 The tblock Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tblock/error.hpp"
#include "tblock/grid.hpp"

namespace tblock {

/// How a circular multi-queue moves from one streamed element to the next.
enum class QueueVariant {
    shifting_data,     ///< heads stay put, every element moves one slot down
    shifting_address,  ///< heads advance with a compare-and-wrap
    computing_address, ///< heads advance under a power-of-two mask
};

std::string_view to_string(QueueVariant v);
QueueVariant queue_variant_from_string(std::string_view s);

/// `a mod range`; uses `a & (range - 1)` when range is a power of two.
std::size_t masked_mod(std::size_t a, std::size_t range);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Buffer length of a multi-queue whose adjacent levels share one slot.
int naive_range(int depth, int radius);

/// Layout of a multi-queue. Level `s` owns the window
/// [head[s], head[s] + 2*radius] and writes its newest element at the last
/// slot of that window. Level s+1 sits `spacing` slots below level s, so with
/// spacing == 2*radius the tail of level s+1 aliases the head of level s.
struct QueueGeometry {
    int depth = 0;
    int radius = 0;
    int window = 0;
    int spacing = 0;
    int range = 0;
    QueueVariant variant = QueueVariant::computing_address;
    bool lazy = false;

    /// Slots actually touched by the levels.
    int span() const { return spacing * (depth - 1) + window; }
};

/// Validates arguments and derives the layout.
///  - non-lazy: spacing 2*radius, range = naive range (shifting variants) or
///    the next power of two (computing-address);
///  - lazy: range = lazy_capacity (rounded up to a power of two for
///    computing-address) and spacing = 2*radius + 1 unless given, so that an
///    enqueue never lands inside another level's live window.
QueueGeometry plan_queue(int depth, int radius, QueueVariant variant, bool lazy,
                         std::optional<int> lazy_capacity = std::nullopt,
                         std::optional<int> spacing = std::nullopt);

/// Capacity used when lazy streaming is requested without an explicit one.
int default_lazy_capacity(int depth, int radius);

/// Ring of `range` elements shared by `depth` chained sliding-window queues.
/// Single writer; no internal locking.
template <class T>
class CircularMultiQueue {
  public:
    explicit CircularMultiQueue(QueueGeometry g, T init = T{})
        : geo_(g), buffer_(static_cast<std::size_t>(g.range), init),
          heads_(static_cast<std::size_t>(g.depth)), valid_(heads_.size(), 0),
          tail_valid_(heads_.size(), false) {
        for (int s = 0; s < g.depth; ++s)
            heads_[s] = static_cast<std::size_t>(g.spacing) * static_cast<std::size_t>(g.depth - 1 - s);
        mask_ = static_cast<std::size_t>(g.range) - 1;
    }

    const QueueGeometry& geometry() const { return geo_; }
    int depth() const { return geo_.depth; }
    int range() const { return geo_.range; }
    std::span<const std::size_t> heads() const { return heads_; }
    std::span<const T> buffer() const { return buffer_; }
    int fill(int level) const { return valid_.at(static_cast<std::size_t>(level)); }
    std::uint64_t syncs() const { return syncs_; }
    std::uint64_t shuffles() const { return shuffles_; }

    std::size_t tail_slot(int level) const {
        return wrap(heads_[checked(level)] + static_cast<std::size_t>(geo_.window - 1));
    }

    void enqueue(int level, T value) {
        const std::size_t l = checked(level);
        buffer_[tail_slot(level)] = std::move(value);
        if (!tail_valid_[l]) {
            tail_valid_[l] = true;
            valid_[l] = std::min(valid_[l] + 1, geo_.window);
        }
        if (l > 0 && geo_.spacing == geo_.window - 1)
            valid_[l - 1] = std::min(valid_[l - 1], geo_.window - 1);
        if (!geo_.lazy)
            ++syncs_;
    }

    /// Element `k` of a level's window, 0 being the oldest.
    const T& at(int level, int k) const {
        const std::size_t l = checked(level);
        if (valid_[l] < geo_.window)
            throw PreconditionError("queue level " + std::to_string(level) + " holds " +
                                    std::to_string(valid_[l]) + " of " +
                                    std::to_string(geo_.window) + " window elements");
        return buffer_[wrap(heads_[l] + static_cast<std::size_t>(k))];
    }

    /// Weighted sum over a level's window, oldest element first.
    T compute(int level, std::span<const double> coefficients) const
        requires std::floating_point<T>
    {
        if (coefficients.size() != static_cast<std::size_t>(geo_.window))
            throw PreconditionError("expected " + std::to_string(geo_.window) + " coefficients");
        T acc = 0;
        for (int k = 0; k < geo_.window; ++k)
            acc += coefficients[static_cast<std::size_t>(k)] * at(level, k);
        return acc;
    }

    void shuffle() {
        switch (geo_.variant) {
        case QueueVariant::shifting_data:
            if constexpr (std::is_trivially_copyable_v<T>) {
                for (std::size_t i = 0; i + 1 < buffer_.size(); ++i)
                    buffer_[i] = buffer_[i + 1];
            } else {
                // Last slot ends up stale either way; rotating avoids copies.
                std::rotate(buffer_.begin(), buffer_.begin() + 1, buffer_.end());
            }
            break;
        case QueueVariant::shifting_address:
        case QueueVariant::computing_address:
            for (auto& h : heads_)
                h = wrap(h + 1);
            break;
        }
        for (std::size_t l = 0; l < heads_.size(); ++l) {
            valid_[l] = tail_valid_[l] ? std::min(valid_[l], geo_.window - 1) : 0;
            tail_valid_[l] = false;
        }
        ++shuffles_;
        if (geo_.lazy)
            ++syncs_;
        if (dump_)
            write_dump_line();
    }

    /// Emits one line per shuffle; see validate_queue_dump.
    void set_dump(std::ostream* os) { dump_ = os; }

  private:
    std::size_t checked(int level) const {
        if (level < 0 || level >= geo_.depth)
            throw PreconditionError("queue level " + std::to_string(level) + " outside [0, " +
                                    std::to_string(geo_.depth) + ")");
        return static_cast<std::size_t>(level);
    }

    std::size_t wrap(std::size_t i) const {
        switch (geo_.variant) {
        case QueueVariant::computing_address:
            return i & mask_;
        case QueueVariant::shifting_address:
            return i >= static_cast<std::size_t>(geo_.range) ? i - static_cast<std::size_t>(geo_.range) : i;
        case QueueVariant::shifting_data:
            break;
        }
        return i;
    }

    void write_dump_line() const {
        std::ostream& os = *dump_;
        os << "shuffle=" << shuffles_ << " variant=" << to_string(geo_.variant)
           << " range=" << geo_.range << " window=" << geo_.window << " heads=";
        for (std::size_t l = 0; l < heads_.size(); ++l)
            os << (l ? "," : "") << heads_[l];
        os << " fill=";
        for (std::size_t l = 0; l < valid_.size(); ++l)
            os << (l ? "," : "") << valid_[l];
        os << '\n';
    }

    QueueGeometry geo_;
    std::vector<T> buffer_;
    std::vector<std::size_t> heads_;
    std::vector<int> valid_;
    std::vector<bool> tail_valid_;
    std::size_t mask_ = 0;
    std::uint64_t syncs_ = 0;
    std::uint64_t shuffles_ = 0;
    std::ostream* dump_ = nullptr;
};

/// Streams `length` elements through every level of `mq`.
///
/// Per cycle `k`: element k enters level 0; level s then produces position
/// p = k - (s+1)*radius of level s+1, either from its window (`step(s, p)`)
/// or, for the `radius` positions at either end, from `frame(s+1, p)`.
/// Level `depth` results go to `sink(p, value)` instead of a queue. Each
/// cycle ends with one shuffle.
template <class T, class Load, class Frame, class Step, class Sink>
void drive_pipeline(CircularMultiQueue<T>& mq, int length, Load&& load, Frame&& frame,
                    Step&& step, Sink&& sink) {
    const int r = mq.geometry().radius;
    const int depth = mq.depth();
    const int cycles = length + depth * r;
    for (int k = 0; k < cycles; ++k) {
        if (k < length)
            mq.enqueue(0, load(k));
        for (int s = 0; s < depth; ++s) {
            const int p = k - (s + 1) * r;
            if (p < 0 || p >= length)
                continue;
            T v = (p < r || p >= length - r) ? frame(s + 1, p) : step(s, p);
            if (s + 1 < depth)
                mq.enqueue(s + 1, std::move(v));
            else
                sink(p, std::move(v));
        }
        mq.shuffle();
    }
}

struct StreamResult {
    std::vector<double> output;
    std::uint64_t syncs = 0;
    std::uint64_t shuffles = 0;
};

/// Runs `depth` Jacobi steps of a 1D stencil with window coefficients
/// (offsets -r..r) by streaming `input` through a circular multi-queue.
StreamResult stream_1d(std::span<const double> input, std::span<const double> coefficients,
                       const QueueGeometry& geometry, Boundary boundary = Boundary::fixed_value,
                       std::ostream* dump = nullptr);

struct DumpCheck {
    bool ok = true;
    int lines = 0;
    std::string error;
};

/// Checks a shuffle dump: constant range, pairwise-distinct heads, heads
/// that advance by exactly one slot (address variants) or stay fixed
/// (shifting-data), and fills within the window.
DumpCheck validate_queue_dump(std::istream& in);

} // namespace tblock
