#include "soliton/io.hpp"

#include "soliton/errors.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace soliton {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t row) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) {
                throw std::invalid_argument(cell);
            }
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument,
                        "profile CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
        }
    }
    return out;
}

void write_value(const nlohmann::ordered_json& v, std::ostream& out, int depth) {
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close(2 * depth, ' ');
    switch (v.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (v.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out << ",\n";
                first = false;
                out << pad << nlohmann::ordered_json(it.key()).dump() << ": ";
                write_value(it.value(), out, depth + 1);
            }
            out << "\n" << close << "}";
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            if (v.empty()) {
                out << "[]";
                return;
            }
            out << "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out << ",\n";
                out << pad;
                write_value(v[i], out, depth + 1);
            }
            out << "\n" << close << "]";
            return;
        }
        case nlohmann::ordered_json::value_t::number_float: {
            const double x = v.get<double>();
            out << (std::isfinite(x) ? format_double(x) : "null");
            return;
        }
        default:
            out << v.dump();
    }
}

}  // namespace

Profile read_profile_csv(std::istream& in, const ConeSpec& spec) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, "profile CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,phi,phi1,phi2,phi3,residual") {
        throw Error(ErrorKind::InvalidArgument, "profile CSV header mismatch: " + line);
    }
    std::vector<double> t, phi, phi1, phi2, phi3, res;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto v = parse_row(line, row);
        if (v.size() != 6) {
            throw Error(ErrorKind::InvalidArgument, "profile CSV row " + std::to_string(row) + ": expected 6 columns");
        }
        t.push_back(v[0]);
        phi.push_back(v[1]);
        phi1.push_back(v[2]);
        phi2.push_back(v[3]);
        phi3.push_back(v[4]);
        res.push_back(v[5]);
    }
    if (t.size() < 2) throw Error(ErrorKind::InvalidArgument, "profile CSV needs at least two rows");
    const RadialGrid grid(t.front(), t.back(), t.size());
    const double tol = 1e-9 * std::max(1.0, std::max(std::abs(t.front()), std::abs(t.back())));
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (std::abs(grid[k] - t[k]) > tol) {
            throw Error(ErrorKind::InvalidArgument, "profile CSV t column is not uniform at row " + std::to_string(k + 2));
        }
    }
    return profile_from_samples(spec, grid, std::move(phi), std::move(phi1), std::move(phi2), std::move(phi3),
                                std::move(res));
}

void write_json(const nlohmann::ordered_json& value, std::ostream& out) {
    write_value(value, out, 0);
    out << "\n";
}

}  // namespace soliton
