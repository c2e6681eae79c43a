#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace skin {

// 17 significant digits, lowercase exponent.
std::string fmt17(double v);

inline const std::vector<std::string> kPropagatorColumns = {"model", "stat", "L", "j", "m", "t", "logP", "route"};
inline const std::vector<std::string> kRelaxationColumns = {"model", "stat",  "L",   "w",   "kappa",           "lambda",
                                                            "Gamma", "init",  "eta", "tau", "tau_times_Delta", "sustained"};
inline const std::vector<std::string> kTrajectoryColumns = {"t", "site", "n", "delta_n"};

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> row);
    const std::vector<std::string>& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::string& path, const nlohmann::json& j);

std::string sidecar_path(const std::string& csv_path);

} // namespace skin
