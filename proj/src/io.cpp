#include "gtab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gtab::io {

using nlohmann::json;

double round6(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

std::string format6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

json prior_to_json(const SymmetricPrior& prior) {
    json atoms = json::array();
    for (const auto& a : prior.atoms()) {
        atoms.push_back({{"w", round6(a.w)}, {"weight", round6(a.weight)}});
    }
    json j{{"atoms", atoms}};
    if (std::isfinite(prior.support_bound())) {
        j["c"] = round6(prior.support_bound());
    } else {
        j["c"] = nullptr;
    }
    return j;
}

SymmetricPrior prior_from_json(const json& j) {
    try {
        if (j.contains("d")) return SymmetricPrior::two_point(j.at("d").get<double>());
        std::vector<PriorAtom> atoms;
        for (const auto& a : j.at("atoms")) {
            atoms.push_back({a.at("w").get<double>(), a.at("weight").get<double>()});
        }
        double c = std::numeric_limits<double>::infinity();
        if (j.contains("c") && !j.at("c").is_null()) c = j.at("c").get<double>();
        return SymmetricPrior(std::move(atoms), c);
    } catch (const json::exception& e) {
        throw FormatError(std::string("prior: ") + e.what());
    }
}

SymmetricPrior load_prior(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open prior file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return prior_from_json(j);
}

json strategy_metadata(const StrategyTable& table, const SymmetricPrior& prior) {
    const UGrid& g = table.grid();
    return {{"format_version", kStrategyFormatVersion},
            {"epsilon", round6(table.lattice().epsilon())},
            {"packets", table.lattice().packets()},
            {"grid", {{"u_max", round6(g.u_max())}, {"du", g.du()}, {"half_points", g.half_points()}}},
            {"prior", prior_to_json(prior)},
            {"tie_break", "arm1"},
            {"columns", {"k1", "k2", "u_index", "action"}}};
}

void write_strategy_csv(const StrategyTable& table, std::ostream& out) {
    out << "k1,k2,u_index,action\n";
    const int P = table.lattice().packets();
    for (int K = 2; K <= P - 1; ++K) {
        for (int k1 = 1; k1 <= K - 1; ++k1) {
            const auto row = table.row(k1, K - k1);
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << k1 << ',' << K - k1 << ',' << i << ',' << static_cast<int>(row[i]) << '\n';
            }
        }
    }
}

namespace {

[[noreturn]] void fail(long line, const std::string& field, const std::string& msg) {
    std::ostringstream os;
    os << "strategy file line " << line << ", field '" << field << "': " << msg;
    throw FormatError(os.str());
}

long parse_field(std::string_view text, long line, const char* field) {
    long v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) {
        fail(line, field, "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

StrategyTable read_strategy_csv(std::istream& in, const json& metadata) {
    int packets = 0;
    UGrid grid = UGrid::from_half_points(1, 1.0);
    try {
        const int version = metadata.at("format_version").get<int>();
        if (version != kStrategyFormatVersion) {
            throw FormatError("strategy metadata: unsupported format_version " +
                              std::to_string(version));
        }
        packets = metadata.at("packets").get<int>();
        const auto& g = metadata.at("grid");
        grid = UGrid::from_half_points(g.at("half_points").get<int>(), g.at("du").get<double>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("strategy metadata: ") + e.what());
    }
    StrategyTable table(Lattice(packets), grid);
    const Lattice& lattice = table.lattice();

    std::vector<std::uint8_t> seen(lattice.decision_state_count() * grid.size(), 0);
    std::string text;
    long line = 0;
    if (!std::getline(in, text)) fail(1, "header", "empty file");
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text != "k1,k2,u_index,action") fail(line, "header", "expected 'k1,k2,u_index,action'");

    std::size_t rows = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.empty()) continue;
        std::string_view rest(text);
        std::array<std::string_view, 4> parts;
        static constexpr std::array<const char*, 4> names{"k1", "k2", "u_index", "action"};
        for (std::size_t f = 0; f < 4; ++f) {
            const auto comma = rest.find(',');
            if (f < 3 && comma == std::string_view::npos) fail(line, names[f + 1], "missing field");
            if (f == 3 && comma != std::string_view::npos) fail(line, "action", "too many fields");
            parts[f] = rest.substr(0, comma);
            if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
        }
        const long k1 = parse_field(parts[0], line, names[0]);
        const long k2 = parse_field(parts[1], line, names[1]);
        const long ui = parse_field(parts[2], line, names[2]);
        const long action = parse_field(parts[3], line, names[3]);
        if (!lattice.contains(static_cast<int>(k1), static_cast<int>(k2)) ||
            lattice.terminal(static_cast<int>(k1), static_cast<int>(k2))) {
            fail(line, "k1", "state (" + std::to_string(k1) + ", " + std::to_string(k2) +
                                 ") is not a decision state");
        }
        if (ui < 0 || ui >= grid.size()) fail(line, "u_index", "out of range");
        if (action != 1 && action != 2) fail(line, "action", "must be 1 or 2");
        const std::size_t slot =
            lattice.index(static_cast<int>(k1), static_cast<int>(k2)) * grid.size() +
            static_cast<std::size_t>(ui);
        if (seen[slot]) fail(line, "u_index", "duplicate row");
        seen[slot] = 1;
        ++rows;
        table.set(static_cast<int>(k1), static_cast<int>(k2), static_cast<int>(ui),
                  static_cast<Arm>(action));
    }
    if (rows != seen.size()) {
        std::ostringstream os;
        os << "strategy file has " << rows << " rows, expected " << seen.size();
        throw FormatError(os.str());
    }
    return table;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
    return std::filesystem::path(csv.string() + ".meta.json");
}

namespace {

std::filesystem::path temp_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".tmp");
}

void write_temp(const std::filesystem::path& tmp, const std::string& content) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.close();
    if (!out) {
        std::filesystem::remove(tmp);
        throw ConfigError("failed writing " + tmp.string());
    }
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = temp_path(path);
    write_temp(tmp, content);
    std::filesystem::rename(tmp, path);
}

void save_strategy(const std::filesystem::path& csv, const StrategyTable& table,
                   const SymmetricPrior& prior) {
    std::ostringstream body;
    write_strategy_csv(table, body);
    const std::string meta = strategy_metadata(table, prior).dump(2) + "\n";
    const auto csv_tmp = temp_path(csv);
    const auto meta_tmp = temp_path(metadata_path(csv));
    try {
        write_temp(csv_tmp, body.str());
        write_temp(meta_tmp, meta);
    } catch (...) {
        std::filesystem::remove(csv_tmp);
        std::filesystem::remove(meta_tmp);
        throw;
    }
    std::filesystem::rename(meta_tmp, metadata_path(csv));
    std::filesystem::rename(csv_tmp, csv);
}

StrategyTable load_strategy(const std::filesystem::path& csv) {
    const auto meta_file = metadata_path(csv);
    std::ifstream meta_in(meta_file);
    if (!meta_in) throw FormatError("missing strategy metadata file " + meta_file.string());
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw FormatError(meta_file.string() + ": " + e.what());
    }
    std::ifstream in(csv);
    if (!in) throw FormatError("cannot open strategy file " + csv.string());
    return read_strategy_csv(in, meta);
}

}  // namespace gtab::io
