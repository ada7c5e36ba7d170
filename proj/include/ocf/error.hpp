#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>

namespace ocf {

/// Error categories raised by the library. The CLI maps them onto exit codes.
enum class Errc {
    parse_error,
    invalid_denominator,
    unsupported_field,
    degenerate_input,
    mixed_field,
    domain,
    pole,
    not_in_set,
    not_convergent_pair,
    not_reduced,
    inapplicable_site,
    precondition,
    period_not_found,
    budget_exceeded,
};

inline const char* to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::parse_error: return "parse_error";
    case Errc::invalid_denominator: return "invalid_denominator";
    case Errc::unsupported_field: return "unsupported_field";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::mixed_field: return "mixed_field";
    case Errc::domain: return "domain";
    case Errc::pole: return "pole";
    case Errc::not_in_set: return "not_in_set";
    case Errc::not_convergent_pair: return "not_convergent_pair";
    case Errc::not_reduced: return "not_reduced";
    case Errc::inapplicable_site: return "inapplicable_site";
    case Errc::precondition: return "precondition";
    case Errc::period_not_found: return "period_not_found";
    case Errc::budget_exceeded: return "budget_exceeded";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Wall-clock cap for oracle scans. A default-constructed budget never expires.
class Budget {
public:
    Budget() = default;
    explicit Budget(std::chrono::milliseconds limit)
        : deadline_(std::chrono::steady_clock::now() + limit) {}

    /// Reads OCFLAB_BUDGET_MS; unset or unparsable means unlimited.
    static Budget from_env()
    {
        const char* raw = std::getenv("OCFLAB_BUDGET_MS");
        if (raw == nullptr || *raw == '\0')
            return {};
        char* end = nullptr;
        const long long ms = std::strtoll(raw, &end, 10);
        if (end == raw || ms <= 0)
            return {};
        return Budget(std::chrono::milliseconds(ms));
    }

    bool expired() const
    {
        return deadline_ && std::chrono::steady_clock::now() > *deadline_;
    }

    void check(const char* where) const
    {
        if (expired())
            throw Error(Errc::budget_exceeded, std::string(where) + ": time budget exhausted");
    }

private:
    std::optional<std::chrono::steady_clock::time_point> deadline_;
};

}  // namespace ocf
