#include "ccr/stateio.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ccr {

namespace {

using nlohmann::ordered_json;

std::pair<int, int> lineColumnOf(const std::string& text, std::size_t byteOffset) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byteOffset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

Dims parseDims(const ordered_json& j) {
    if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty())
        throw ParseError("state file: missing or invalid \"dims\" array");
    Dims dims;
    for (const auto& d : j["dims"]) {
        if (!d.is_number_integer() || d.get<long>() < 1)
            throw ParseError("state file: dims entries must be integers >= 1");
        dims.push_back(d.get<int>());
    }
    return dims;
}

Cplx parseEntry(const ordered_json& e, const char* what) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ParseError(std::string("state file: each ") + what +
                         " entry must be a [re, im] pair");
    return {e[0].get<double>(), e[1].get<double>()};
}

ordered_json entryJson(const Cplx& v) { return ordered_json::array({v.real(), v.imag()}); }

}  // namespace

LoadedState parseStateJson(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = lineColumnOf(text, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream os;
        os << "state file: JSON parse error at line " << line << ", column " << col;
        throw ParseError(os.str(), line, col);
    }
    if (!j.is_object()) throw ParseError("state file: top level must be an object");

    Dims dims = parseDims(j);
    long d = dimProduct(dims);

    if (j.contains("matrix")) {
        const auto& rows = j["matrix"];
        if (!rows.is_array() || static_cast<long>(rows.size()) != d * d)
            throw ParseError("state file: \"matrix\" must list d*d [re, im] pairs row-major");
        Mat m(d, d);
        for (long i = 0; i < d; ++i)
            for (long k = 0; k < d; ++k) m(i, k) = parseEntry(rows[i * d + k], "matrix");
        try {
            return DensityMatrix(dims, std::move(m));
        } catch (const InvalidState& e) {
            throw ParseError(std::string("state file: ") + e.what());
        }
    }
    if (j.contains("vector")) {
        const auto& entries = j["vector"];
        if (!entries.is_array() || static_cast<long>(entries.size()) != d)
            throw ParseError("state file: \"vector\" must list d [re, im] pairs");
        Vec v(d);
        for (long i = 0; i < d; ++i) v(i) = parseEntry(entries[i], "vector");
        try {
            return PureState(dims, std::move(v));
        } catch (const InvalidState& e) {
            throw ParseError(std::string("state file: ") + e.what());
        }
    }
    throw ParseError("state file: need a \"matrix\" or \"vector\" field");
}

LoadedState loadStateFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open state file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseStateJson(buf.str());
}

std::string stateToJson(const DensityMatrix& rho) {
    ordered_json j;
    j["dims"] = rho.dims();
    ordered_json rows = ordered_json::array();
    for (long i = 0; i < rho.dim(); ++i)
        for (long k = 0; k < rho.dim(); ++k) rows.push_back(entryJson(rho.mat()(i, k)));
    j["matrix"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::string stateToJson(const PureState& psi) {
    ordered_json j;
    j["dims"] = psi.dims();
    ordered_json entries = ordered_json::array();
    for (long i = 0; i < psi.dim(); ++i) entries.push_back(entryJson(psi.amplitudes()(i)));
    j["vector"] = std::move(entries);
    return j.dump(2) + "\n";
}

DensityMatrix asDensity(const LoadedState& state) {
    if (std::holds_alternative<DensityMatrix>(state)) return std::get<DensityMatrix>(state);
    return std::get<PureState>(state).toDensity();
}

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void writeFileAtomic(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write to " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace ccr
