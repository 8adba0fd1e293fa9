#include "zeropi/errors.hpp"
#include "zeropi/fitcore.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace zeropi::fitcore {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& where, const std::string& column)
{
    if (s.empty()) throw ValidationError(where + ": empty " + column);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ValidationError(where + ": " + column + " '" + s + "' is not a number");
    if (!std::isfinite(v)) throw ValidationError(where + ": " + column + " must be finite");
    return v;
}

int parse_label(const std::string& s, const std::string& where, const std::string& column)
{
    const double v = parse_double(s, where, column);
    if (v < 0 || v != std::floor(v)) throw ValidationError(where + ": " + column + " must be a non-negative integer");
    return static_cast<int>(v);
}

void check_point(const DataPoint& p, const std::string& where)
{
    if (!std::isfinite(p.flux)) throw ValidationError(where + ": flux must be finite");
    if (!std::isfinite(p.n_g)) throw ValidationError(where + ": n_g must be finite");
    if (!(p.frequency > 0.0) || !std::isfinite(p.frequency))
        throw ValidationError(where + ": frequency must be a positive number of GHz");
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) throw ValidationError(where + ": weight must be >= 0");
    if (p.label && !(p.label->first >= 0 && p.label->second > p.label->first))
        throw ValidationError(where + ": label must satisfy 0 <= from < to");
}

}  // namespace

bool SpectroscopyDataset::has_labeled() const
{
    for (const auto& p : points)
        if (p.label) return true;
    return false;
}

bool SpectroscopyDataset::has_unlabeled() const
{
    for (const auto& p : points)
        if (!p.label) return true;
    return false;
}

std::optional<double> SpectroscopyDataset::scan_ng() const
{
    if (points.empty()) return std::nullopt;
    for (const auto& p : points)
        if (p.n_g != points.front().n_g) return std::nullopt;
    return points.front().n_g;
}

void SpectroscopyDataset::validate() const
{
    if (points.empty()) throw ValidationError(name + ": dataset holds no points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const std::string where =
            name + ":" + (p.line > 0 ? "line " + std::to_string(p.line) : "point " + std::to_string(i));
        check_point(p, where);
    }
}

SpectroscopyDataset parse_dataset(std::istream& in, const std::string& name)
{
    SpectroscopyDataset d;
    d.name = name;
    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = name + ":" + std::to_string(lineno);
        auto cells = split(t);
        if (header.empty()) {
            header = cells;
            const std::vector<std::string> want{"flux_phi0", "ng", "freq_ghz", "weight", "from_label", "to_label"};
            if (header.size() < 4 || header.size() > 6 || header.size() == 5)
                throw ValidationError(where + ": header must be flux_phi0,ng,freq_ghz,weight[,from_label,to_label]");
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] != want[i])
                    throw ValidationError(where + ": expected column '" + want[i] + "', found '" + header[i] + "'");
            continue;
        }
        if (cells.size() != header.size() && !(cells.size() == 4 && header.size() == 6))
            throw ValidationError(where + ": expected " + std::to_string(header.size()) + " columns, found " +
                                  std::to_string(cells.size()));
        DataPoint p;
        p.line = lineno;
        p.flux = parse_double(cells[0], where, "flux_phi0");
        p.n_g = parse_double(cells[1], where, "ng");
        p.frequency = parse_double(cells[2], where, "freq_ghz");
        p.weight = parse_double(cells[3], where, "weight");
        if (cells.size() == 6) {
            const bool has_from = !cells[4].empty(), has_to = !cells[5].empty();
            if (has_from != has_to) throw ValidationError(where + ": from_label and to_label must be given together");
            if (has_from)
                p.label = std::make_pair(parse_label(cells[4], where, "from_label"),
                                         parse_label(cells[5], where, "to_label"));
        }
        check_point(p, where);
        d.points.push_back(p);
    }
    if (header.empty()) throw ValidationError(name + ": empty file");
    if (d.points.empty()) throw ValidationError(name + ": no data rows");
    return d;
}

SpectroscopyDataset load_dataset(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open");
    return parse_dataset(in, path);
}

void write_dataset(const SpectroscopyDataset& d, std::ostream& out)
{
    out << "flux_phi0,ng,freq_ghz,weight,from_label,to_label\n";
    out << std::setprecision(17);
    for (const auto& p : d.points) {
        out << p.flux << ',' << p.n_g << ',' << p.frequency << ',' << p.weight << ',';
        if (p.label) out << p.label->first << ',' << p.label->second;
        else out << ',';
        out << '\n';
    }
}

}  // namespace zeropi::fitcore
