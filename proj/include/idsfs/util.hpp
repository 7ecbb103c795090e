#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idsfs {

inline constexpr std::string_view kToolVersion = "idsfs 0.1.0";

// Shortest decimal string that round-trips to the same double. Used for every
// float written to CSV or text reports so reruns are byte-identical.
std::string format_double(double value);

// Fixed-precision decimal (for aligned report tables).
std::string format_fixed(double value, int decimals);

// Strict double parse of a full token. Throws std::runtime_error with
// `context` on failure.
double parse_double(std::string_view token, const std::string& context);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::uint64_t hash_bytes(std::string_view bytes);
std::uint64_t hash_doubles(std::span<const double> values, std::uint64_t seed = 0);
std::string hash_hex(std::uint64_t h);

// Collects non-fatal diagnostics. Operations that the contract says must
// "report" or "warn" take an optional sink; with no sink the message goes to
// stderr.
class Warnings {
public:
    void add(std::string message);
    const std::vector<std::string>& messages() const { return messages_; }
    bool empty() const { return messages_.empty(); }

    static void emit(Warnings* sink, std::string message);

private:
    std::vector<std::string> messages_;
};

}  // namespace idsfs
