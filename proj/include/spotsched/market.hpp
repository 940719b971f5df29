#ifndef SPOTSCHED_MARKET_HPP
#define SPOTSCHED_MARKET_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace spotsched {

// One 30-minute market slot. Prices are normalized so the on-demand
// price is 1; availability is an instance count.
struct MarketSlot {
    int slot_index = 0;
    double spot_price = 0.0;
    int spot_avail = 0;
};

struct SpotTrace {
    std::vector<MarketSlot> slots;  // contiguous slot_index from 0
    double on_demand_price = 1.0;
    int slot_minutes = 30;

    int size() const { return static_cast<int>(slots.size()); }
    bool empty() const { return slots.empty(); }
    const MarketSlot& at(int i) const;

    double mean_price() const;
    double mean_avail() const;
};

// Parameters for the synthetic generator: a daily sinusoid (period 48
// slots = 24h) on top of a base level, with relative per-slot jitter.
struct TraceSynthSpec {
    int length = 0;
    double base_avail = 0.0;
    double avail_amplitude = 0.0;
    double base_price = 0.0;
    double price_amplitude = 0.0;
    double jitter = 0.0;
    std::uint64_t seed = 0;
};

// CSV format: header `slot,spot_price,spot_avail`, one row per slot,
// LF line endings. Parse errors name the offending 1-based line.
SpotTrace load_trace(std::istream& source);
void write_trace_csv(const SpotTrace& trace, std::ostream& out);

// Divides prices by the on-demand reference, rescales availability and
// clamps it to [0, avail_cap]; the result has on_demand_price == 1.
SpotTrace normalize_trace(const SpotTrace& raw, double od_reference_price,
                          double avail_scale, int avail_cap = 16);

SpotTrace synthesize_trace(const TraceSynthSpec& spec);

// Throws ConfigError if any slot violates the trace invariants.
void validate_trace(const SpotTrace& trace);

}  // namespace spotsched

#endif
