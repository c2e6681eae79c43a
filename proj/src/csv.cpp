#include "skinrelax/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skinrelax/error.hpp"

namespace skin {

std::string fmt17(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string quoted(const std::string& field)
{
    if (field.find_first_of(",\"\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row)
{
    if (row.size() != header_.size())
        fail_config("Shape", "CsvTable: row has " + std::to_string(row.size()) + " fields, header has " +
                                 std::to_string(header_.size()));
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i)
            os << (i ? "," : "") << quoted(r[i]);
        os << '\n';
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return os.str();
}

void CsvTable::write(const std::string& path) const
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        fail_config("OutputUnwritable", "cannot open '" + path + "' for writing");
    f << str();
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        fail_config("OutputUnwritable", "cannot open '" + path + "' for writing");
    f << j.dump(2) << '\n';
}

std::string sidecar_path(const std::string& csv_path)
{
    return csv_path + ".meta.json";
}

} // namespace skin
