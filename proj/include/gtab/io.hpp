#pragma once

/**
 * @file io.hpp
 * @brief Strategy-table persistence, prior files and number formatting for
 *        the command-line tools.
 *
 * A strategy table is a CSV `k1,k2,u_index,action` with one row per decision
 * state and grid node, plus a JSON sidecar `<csv>.meta.json` holding
 * epsilon, the grid, the prior, the tie-break rule and the format version.
 */

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gtab/core.hpp"
#include "gtab/errors.hpp"
#include "gtab/tables.hpp"
#include "json.hpp"

namespace gtab::io {

inline constexpr int kStrategyFormatVersion = 1;

/// Malformed input file; the message carries line and field.
class FormatError : public ConfigError {
public:
    explicit FormatError(const std::string& what) : ConfigError(what) {}
};

/// Rounds to six significant digits (the precision of every emitted number).
double round6(double x);
std::string format6(double x);

nlohmann::json prior_to_json(const SymmetricPrior& prior);
/// Accepts {"atoms": [{"w": .., "weight": ..}, ...], "c": ..} or {"d": ..}.
SymmetricPrior prior_from_json(const nlohmann::json& j);
SymmetricPrior load_prior(const std::filesystem::path& path);

nlohmann::json strategy_metadata(const StrategyTable& table, const SymmetricPrior& prior);
void write_strategy_csv(const StrategyTable& table, std::ostream& out);
/// Parses the CSV against the lattice and grid described by `metadata`.
StrategyTable read_strategy_csv(std::istream& in, const nlohmann::json& metadata);

std::filesystem::path metadata_path(const std::filesystem::path& csv);

/// Writes CSV and sidecar; nothing is left behind on failure.
void save_strategy(const std::filesystem::path& csv, const StrategyTable& table,
                   const SymmetricPrior& prior);
StrategyTable load_strategy(const std::filesystem::path& csv);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace gtab::io
