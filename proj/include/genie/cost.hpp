#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "genie/error.hpp"

namespace genie {

/// Money in integer micro-dollars. Sums are exact.
class Micros {
public:
    constexpr Micros() = default;
    constexpr explicit Micros(std::int64_t v) : value_(v) {}

    static Micros from_dollars(double dollars) { return Micros(std::llround(dollars * 1e6)); }

    constexpr std::int64_t count() const noexcept { return value_; }
    constexpr double dollars() const noexcept { return static_cast<double>(value_) / 1e6; }

    constexpr Micros& operator+=(Micros o) noexcept {
        value_ += o.value_;
        return *this;
    }
    friend constexpr Micros operator+(Micros a, Micros b) noexcept { return Micros(a.value_ + b.value_); }
    friend constexpr Micros operator-(Micros a, Micros b) noexcept { return Micros(a.value_ - b.value_); }
    friend constexpr auto operator<=>(Micros, Micros) = default;

    /// Fixed 4-decimal dollar rendering, e.g. "$0.0260".
    std::string display() const {
        const bool negative = value_ < 0;
        const std::int64_t magnitude = negative ? -value_ : value_;
        const std::int64_t units = (magnitude + 50) / 100; // 1e-4 dollars
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s$%lld.%04lld", negative ? "-" : "",
                      static_cast<long long>(units / 10000), static_cast<long long>(units % 10000));
        return buf;
    }

private:
    std::int64_t value_ = 0;
};

using TokenCount = std::int64_t;

/// Prices are micro-dollars per one million tokens, so $2.50/M is 2'500'000.
struct PricingEntry {
    std::string model;
    std::int64_t input_per_million = 0;
    std::int64_t output_per_million = 0;
    std::string as_of;

    friend bool operator==(const PricingEntry&, const PricingEntry&) = default;
};

namespace detail {

// tokens * price / 1e6, rounded half away from zero, without overflow.
inline std::int64_t scaled_cost(TokenCount tokens, std::int64_t per_million) {
    const __int128 num = static_cast<__int128>(tokens) * per_million;
    return static_cast<std::int64_t>((num + 500'000) / 1'000'000);
}

} // namespace detail

inline Micros request_cost(TokenCount input_tokens, TokenCount output_tokens, const PricingEntry& p) {
    if (input_tokens < 0 || output_tokens < 0) {
        throw Error(ErrorCode::OutOfRange, "token counts must be non-negative");
    }
    return Micros(detail::scaled_cost(input_tokens, p.input_per_million) +
                  detail::scaled_cost(output_tokens, p.output_per_million));
}

/// total cost = frequency x cost per request.
inline Micros total_cost(std::int64_t requests, Micros per_request) {
    if (requests < 0 || per_request.count() < 0) {
        throw Error(ErrorCode::OutOfRange, "frequency and cost must be non-negative");
    }
    return Micros(requests * per_request.count());
}

/// Spend relative to an autocomplete-only baseline: 1 + p*r, where r is the
/// per-request cost ratio (proactive / autocomplete) and p the proactive
/// request frequency as a fraction of autocomplete requests.
inline double proactivity_multiplier(double cost_ratio, double frequency_fraction) {
    if (cost_ratio < 0.0) throw Error(ErrorCode::OutOfRange, "cost ratio must be non-negative");
    if (frequency_fraction < 0.0 || frequency_fraction > 1.0) {
        throw Error(ErrorCode::OutOfRange, "frequency fraction must lie in [0, 1]");
    }
    return 1.0 + frequency_fraction * cost_ratio;
}

class PricingTable {
public:
    PricingTable() = default;
    explicit PricingTable(std::vector<PricingEntry> entries) {
        for (auto& e : entries) upsert(std::move(e));
    }

    /// GPT-4o for chat and Codestral for autocomplete, January 2025 list prices.
    static PricingTable defaults() {
        return PricingTable({
            {"gpt-4o", 2'500'000, 10'000'000, "2025-01"},
            {"codestral", 200'000, 6'000'000, "2025-01"},
        });
    }

    void upsert(PricingEntry e) {
        if (e.input_per_million < 0 || e.output_per_million < 0) {
            throw Error(ErrorCode::InvalidConfig, "negative price for model " + e.model);
        }
        entries_[e.model] = std::move(e);
    }

    bool contains(std::string_view model) const { return entries_.count(std::string(model)) != 0; }

    const PricingEntry& at(std::string_view model) const {
        auto it = entries_.find(std::string(model));
        if (it == entries_.end()) throw Error(ErrorCode::UnknownModel, std::string(model));
        return it->second;
    }

    Micros request_cost(std::string_view model, TokenCount input_tokens, TokenCount output_tokens) const {
        return genie::request_cost(input_tokens, output_tokens, at(model));
    }

    const std::map<std::string, PricingEntry>& entries() const noexcept { return entries_; }

    /// JSON array of {model, input_per_million_usd, output_per_million_usd, as_of}.
    static PricingTable from_json(const nlohmann::json& doc) {
        if (!doc.is_array()) throw Error(ErrorCode::InvalidConfig, "pricing table must be a JSON array");
        PricingTable table;
        for (const auto& e : doc) {
            try {
                table.upsert(PricingEntry{
                    e.at("model").get<std::string>(),
                    std::llround(e.at("input_per_million_usd").get<double>() * 1e6),
                    std::llround(e.at("output_per_million_usd").get<double>() * 1e6),
                    e.value("as_of", std::string{}),
                });
            } catch (const nlohmann::json::exception& ex) {
                throw Error(ErrorCode::InvalidConfig, std::string("bad pricing entry: ") + ex.what());
            }
        }
        return table;
    }

    static PricingTable load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open pricing table " + path.string());
        auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw Error(ErrorCode::InvalidConfig, "pricing table is not JSON");
        return from_json(doc);
    }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (const auto& [model, e] : entries_) {
            arr.push_back({{"model", model},
                           {"input_per_million_usd", static_cast<double>(e.input_per_million) / 1e6},
                           {"output_per_million_usd", static_cast<double>(e.output_per_million) / 1e6},
                           {"as_of", e.as_of}});
        }
        return arr;
    }

private:
    std::map<std::string, PricingEntry> entries_;
};

/// Per-request cost ratio between two models in the input-dominated limit
/// (output tokens negligible next to a long code context).
inline double input_price_ratio(const PricingEntry& proactive, const PricingEntry& autocomplete) {
    if (autocomplete.input_per_million == 0) throw Error(ErrorCode::OutOfRange, "zero baseline input price");
    return static_cast<double>(proactive.input_per_million) / static_cast<double>(autocomplete.input_per_million);
}

/// Two request streams over the same period.
struct UsageScenario {
    std::int64_t f_auto = 0;
    std::int64_t f_pro = 0;
    Micros c_auto;
    Micros c_pro;

    Micros baseline_cost() const { return total_cost(f_auto, c_auto); }
    Micros total() const { return total_cost(f_auto, c_auto) + total_cost(f_pro, c_pro); }

    double cost_ratio() const {
        if (c_auto.count() == 0) throw Error(ErrorCode::OutOfRange, "zero autocomplete cost per request");
        return static_cast<double>(c_pro.count()) / static_cast<double>(c_auto.count());
    }
    double frequency_fraction() const {
        if (f_auto == 0) throw Error(ErrorCode::OutOfRange, "zero autocomplete frequency");
        return static_cast<double>(f_pro) / static_cast<double>(f_auto);
    }

    /// Same context length for both streams: each request sends `context_tokens`
    /// in and gets `output_tokens` back, priced with the respective model.
    static UsageScenario equal_context(std::int64_t f_auto, std::int64_t f_pro, TokenCount context_tokens,
                                       TokenCount auto_output_tokens, TokenCount pro_output_tokens,
                                       const PricingEntry& autocomplete, const PricingEntry& proactive) {
        return UsageScenario{f_auto, f_pro, request_cost(context_tokens, auto_output_tokens, autocomplete),
                             request_cost(context_tokens, pro_output_tokens, proactive)};
    }
};

struct LedgerEntry {
    std::string model;
    TokenCount input_tokens = 0;
    TokenCount output_tokens = 0;
    bool estimated = false;
    Micros cost;
};

/// Append-only record of priced provider calls.
class CostLedger {
public:
    explicit CostLedger(PricingTable pricing = PricingTable::defaults()) : pricing_(std::move(pricing)) {}

    /// Unknown models are recorded with zero cost and flagged `unpriced`.
    const LedgerEntry& record(const std::string& model, TokenCount input_tokens, TokenCount output_tokens,
                              bool estimated) {
        LedgerEntry e{model, input_tokens, output_tokens, estimated, Micros(0)};
        if (pricing_.contains(model)) {
            e.cost = pricing_.request_cost(model, input_tokens, output_tokens);
        } else {
            ++unpriced_;
        }
        total_ += e.cost;
        input_tokens_ += input_tokens;
        output_tokens_ += output_tokens;
        entries_.push_back(std::move(e));
        return entries_.back();
    }

    const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
    Micros total() const noexcept { return total_; }
    TokenCount input_tokens() const noexcept { return input_tokens_; }
    TokenCount output_tokens() const noexcept { return output_tokens_; }
    std::size_t unpriced() const noexcept { return unpriced_; }
    const PricingTable& pricing() const noexcept { return pricing_; }

    nlohmann::json totals_json() const {
        return {{"requests", entries_.size()},
                {"input_tokens", input_tokens_},
                {"output_tokens", output_tokens_},
                {"total_micros", total_.count()},
                {"total_usd", total_.display()},
                {"unpriced_requests", unpriced_}};
    }

private:
    PricingTable pricing_;
    std::vector<LedgerEntry> entries_;
    Micros total_;
    TokenCount input_tokens_ = 0;
    TokenCount output_tokens_ = 0;
    std::size_t unpriced_ = 0;
};

} // namespace genie
