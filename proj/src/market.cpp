#include "spotsched/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "spotsched/common.hpp"

namespace spotsched {

namespace {

constexpr char kCsvHeader[] = "slot,spot_price,spot_avail";
constexpr int kDailyPeriodSlots = 48;

double parse_field(std::string_view field, int line_no, const char* name) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError("trace csv line " + std::to_string(line_no) + ": field '" +
                         name + "' is not numeric: '" + std::string(field) + "'");
    if (value < 0.0)
        throw ParseError("trace csv line " + std::to_string(line_no) + ": field '" +
                         name + "' is negative");
    return value;
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

}  // namespace

const MarketSlot& SpotTrace::at(int i) const {
    if (i < 0 || i >= size())
        throw std::out_of_range("trace slot " + std::to_string(i) + " out of range (" +
                                std::to_string(size()) + " slots)");
    return slots[static_cast<std::size_t>(i)];
}

double SpotTrace::mean_price() const {
    if (slots.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : slots) sum += s.spot_price;
    return sum / static_cast<double>(slots.size());
}

double SpotTrace::mean_avail() const {
    if (slots.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : slots) sum += s.spot_avail;
    return sum / static_cast<double>(slots.size());
}

SpotTrace load_trace(std::istream& source) {
    std::string line;
    if (!std::getline(source, line))
        throw ParseError("trace csv line 1: missing header");
    if (strip_cr(line) != kCsvHeader)
        throw ParseError("trace csv line 1: expected header '" + std::string(kCsvHeader) +
                         "', got '" + line + "'");

    SpotTrace trace;
    int line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view row = strip_cr(line);
        if (row.empty()) continue;

        std::size_t c1 = row.find(',');
        std::size_t c2 = c1 == std::string_view::npos ? std::string_view::npos
                                                      : row.find(',', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos)
            throw ParseError("trace csv line " + std::to_string(line_no) +
                             ": expected 3 comma-separated fields");

        double slot = parse_field(row.substr(0, c1), line_no, "slot");
        double price = parse_field(row.substr(c1 + 1, c2 - c1 - 1), line_no, "spot_price");
        double avail = parse_field(row.substr(c2 + 1), line_no, "spot_avail");

        if (slot != std::floor(slot) || avail != std::floor(avail))
            throw ParseError("trace csv line " + std::to_string(line_no) +
                             ": slot and spot_avail must be integers");

        int expected = trace.size();
        if (static_cast<int>(slot) != expected)
            throw ParseError("trace csv line " + std::to_string(line_no) +
                             ": slot index gap, expected " + std::to_string(expected) +
                             ", got " + std::to_string(static_cast<int>(slot)));

        trace.slots.push_back({expected, price, static_cast<int>(avail)});
    }
    return trace;
}

void write_trace_csv(const SpotTrace& trace, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& s : trace.slots)
        out << s.slot_index << ',' << format_double(s.spot_price) << ',' << s.spot_avail
            << '\n';
}

SpotTrace normalize_trace(const SpotTrace& raw, double od_reference_price,
                          double avail_scale, int avail_cap) {
    if (od_reference_price <= 0.0)
        throw ConfigError("normalize_trace: od_reference_price must be positive");
    if (avail_scale <= 0.0)
        throw ConfigError("normalize_trace: avail_scale must be positive");
    if (avail_cap < 0)
        throw ConfigError("normalize_trace: avail_cap must be nonnegative");

    SpotTrace out = raw;
    out.on_demand_price = 1.0;
    for (auto& s : out.slots) {
        s.spot_price /= od_reference_price;
        long long scaled = round_half_up(s.spot_avail * avail_scale);
        s.spot_avail = static_cast<int>(std::clamp<long long>(scaled, 0, avail_cap));
    }
    return out;
}

SpotTrace synthesize_trace(const TraceSynthSpec& spec) {
    if (spec.length < 1)
        throw ConfigError("synthesize_trace: length must be at least 1");

    SpotTrace trace;
    trace.slots.reserve(static_cast<std::size_t>(spec.length));
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    constexpr double two_pi = 6.283185307179586;
    for (int i = 0; i < spec.length; ++i) {
        double phase = std::sin(two_pi * i / kDailyPeriodSlots);
        double avail_noise = unit(rng) * spec.jitter * spec.base_avail;
        double price_noise = unit(rng) * spec.jitter * spec.base_price;

        double avail = spec.base_avail + spec.avail_amplitude * phase + avail_noise;
        double price = spec.base_price + spec.price_amplitude * phase + price_noise;

        long long a = std::max<long long>(0, round_half_up(avail));
        trace.slots.push_back({i, std::max(0.0, price), static_cast<int>(a)});
    }
    return trace;
}

void validate_trace(const SpotTrace& trace) {
    if (trace.on_demand_price <= 0.0)
        throw ConfigError("trace: on-demand price must be positive");
    if (trace.slot_minutes <= 0)
        throw ConfigError("trace: slot duration must be positive");
    for (int i = 0; i < trace.size(); ++i) {
        const auto& s = trace.slots[static_cast<std::size_t>(i)];
        if (s.slot_index != i)
            throw ConfigError("trace: slot indices must be contiguous from 0");
        if (s.spot_price < 0.0 || s.spot_avail < 0)
            throw ConfigError("trace: slot " + std::to_string(i) +
                              " has a negative price or availability");
    }
}

}  // namespace spotsched
