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

#include "tblock/multiqueue.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace tblock {

std::string_view to_string(QueueVariant v) {
    switch (v) {
    case QueueVariant::shifting_data:
        return "shifting-data";
    case QueueVariant::shifting_address:
        return "shifting-address";
    case QueueVariant::computing_address:
        return "computing-address";
    }
    return "?";
}

QueueVariant queue_variant_from_string(std::string_view s) {
    for (auto v : {QueueVariant::shifting_data, QueueVariant::shifting_address,
                   QueueVariant::computing_address})
        if (to_string(v) == s)
            return v;
    throw ConfigError("unknown queue variant '" + std::string(s) + "'");
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

std::size_t masked_mod(std::size_t a, std::size_t range) {
    if (range == 0)
        throw PreconditionError("masked_mod: range must be at least 1");
    return is_power_of_two(range) ? (a & (range - 1)) : a % range;
}

int naive_range(int depth, int radius) { return 2 * radius * depth + 1; }

int default_lazy_capacity(int depth, int radius) {
    return static_cast<int>(next_power_of_two(static_cast<std::size_t>((2 * radius + 1) * depth)));
}

QueueGeometry plan_queue(int depth, int radius, QueueVariant variant, bool lazy,
                         std::optional<int> lazy_capacity, std::optional<int> spacing) {
    if (depth < 1)
        throw PreconditionError("multi-queue depth must be at least 1");
    if (radius < 1)
        throw PreconditionError("multi-queue radius must be at least 1");
    QueueGeometry g;
    g.depth = depth;
    g.radius = radius;
    g.window = 2 * radius + 1;
    g.variant = variant;
    g.lazy = lazy;
    const int naive = naive_range(depth, radius);
    const auto fits = [&](int q, int range) { return q * (depth - 1) + g.window <= range; };

    if (spacing && *spacing < 2 * radius)
        throw PreconditionError("queue spacing " + std::to_string(*spacing) +
                                " is below 2*radius = " + std::to_string(2 * radius));

    if (!lazy) {
        g.spacing = spacing.value_or(2 * radius);
        g.range = g.span();
        if (variant == QueueVariant::computing_address)
            g.range = static_cast<int>(next_power_of_two(static_cast<std::size_t>(g.range)));
        return g;
    }

    const int capacity = lazy_capacity.value_or(default_lazy_capacity(depth, radius));
    if (capacity < naive)
        throw PreconditionError("lazy capacity " + std::to_string(capacity) +
                                " is below the naive range " + std::to_string(naive));
    g.range = variant == QueueVariant::computing_address
                  ? static_cast<int>(next_power_of_two(static_cast<std::size_t>(capacity)))
                  : capacity;
    if (spacing) {
        g.spacing = *spacing;
    } else {
        g.spacing = fits(2 * radius + 1, g.range) ? 2 * radius + 1 : 2 * radius;
    }
    if (!fits(g.spacing, g.range))
        throw PreconditionError("queue levels span " + std::to_string(g.span()) +
                                " slots but the range is " + std::to_string(g.range));
    return g;
}

StreamResult stream_1d(std::span<const double> input, std::span<const double> coefficients,
                       const QueueGeometry& geometry, Boundary boundary, std::ostream* dump) {
    const int r = geometry.radius;
    const int n = static_cast<int>(input.size());
    if (coefficients.size() != static_cast<std::size_t>(geometry.window))
        throw PreconditionError("expected " + std::to_string(geometry.window) + " coefficients");
    if (n <= 2 * r)
        throw PreconditionError("stream of " + std::to_string(n) + " elements is too short for radius " +
                                std::to_string(r));

    CircularMultiQueue<double> mq(geometry);
    mq.set_dump(dump);
    StreamResult res;
    res.output.assign(input.begin(), input.end());
    const bool keep = boundary == Boundary::fixed_value;
    if (!keep)
        for (int p = 0; p < n; ++p)
            if (p < r || p >= n - r)
                res.output[static_cast<std::size_t>(p)] = 0.0;

    drive_pipeline(
        mq, n, [&](int k) { return input[static_cast<std::size_t>(k)]; },
        [&](int, int p) { return keep ? input[static_cast<std::size_t>(p)] : 0.0; },
        [&](int s, int) { return mq.compute(s, coefficients); },
        [&](int p, double v) { res.output[static_cast<std::size_t>(p)] = v; });
    res.syncs = mq.syncs();
    res.shuffles = mq.shuffles();
    return res;
}

namespace {

std::vector<long> parse_list(const std::string& s) {
    std::vector<long> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stol(item));
    return out;
}

} // namespace

DumpCheck validate_queue_dump(std::istream& in) {
    DumpCheck check;
    std::string line;
    long range = -1;
    std::string variant;
    std::vector<long> prev_heads;
    const auto fail = [&](const std::string& why) {
        check.ok = false;
        check.error = "line " + std::to_string(check.lines) + ": " + why;
        return check;
    };
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        ++check.lines;
        std::stringstream ss(line);
        std::string field;
        long this_range = -1, window = -1;
        std::string this_variant;
        std::vector<long> heads, fill;
        try {
            while (ss >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos)
                    return fail("malformed field '" + field + "'");
                const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
                if (key == "range")
                    this_range = std::stol(val);
                else if (key == "window")
                    window = std::stol(val);
                else if (key == "variant")
                    this_variant = val;
                else if (key == "heads")
                    heads = parse_list(val);
                else if (key == "fill")
                    fill = parse_list(val);
            }
        } catch (const std::exception&) {
            return fail("unparseable number");
        }
        if (this_range <= 0 || window <= 0 || heads.empty() || fill.size() != heads.size())
            return fail("missing range, window, heads or fill");
        if (range >= 0 && (this_range != range || this_variant != variant))
            return fail("range or variant changed between shuffles");
        for (std::size_t i = 0; i < heads.size(); ++i) {
            if (heads[i] < 0 || heads[i] >= this_range)
                return fail("head outside the ring");
            for (std::size_t j = i + 1; j < heads.size(); ++j)
                if (heads[i] == heads[j])
                    return fail("heads collide");
            if (fill[i] < 0 || fill[i] > window)
                return fail("fill outside [0, window]");
        }
        if (!prev_heads.empty()) {
            if (prev_heads.size() != heads.size())
                return fail("depth changed between shuffles");
            const long step = this_variant == "shifting-data" ? 0 : 1;
            for (std::size_t i = 0; i < heads.size(); ++i)
                if (heads[i] != (prev_heads[i] + step) % this_range)
                    return fail("head " + std::to_string(i) + " did not advance by " +
                                std::to_string(step));
        }
        range = this_range;
        variant = this_variant;
        prev_heads = heads;
    }
    return check;
}

} // namespace tblock
